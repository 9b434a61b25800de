//! The normalizing factors S_even(q~,t), S_odd(q~,t) and S^(k)_{-m}(q) as
//! exact truncated series, by enumeration over the stood-up state spaces.

use std::collections::HashMap;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::series::{Monomial, TruncatedSeries};
use crate::standup::OmegaState;

const DEPTH_RETRIES: usize = 8;

/// Which irreducible component the normalizer sums over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Space {
    Even,
    Odd,
    Exclusion { k: u32, m: u32 },
}

impl Space {
    fn k_m(self) -> (u32, u32) {
        match self {
            Space::Even => (2, 0),
            Space::Odd => (2, 1),
            Space::Exclusion { k, m } => (k, m),
        }
    }

    fn tracks_t(self) -> bool {
        !matches!(self, Space::Exclusion { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalizerSeries {
    pub series: TruncatedSeries,
    pub space: Space,
    pub depth_used: usize,
    pub stabilized: bool,
}

/// H-weight: sum over i of i * (omega_{-i} - ground_i).
pub fn h_weight(omega: &OmegaState) -> i64 {
    (1..=omega.depth())
        .map(|i| i as i64 * (omega.get(i) as i64 - OmegaState::ground_value(omega.k(), omega.m(), i) as i64))
        .sum()
}

fn t_step(ground: u32, v: u32) -> i32 {
    match (ground, v) {
        (0, v) if v >= 1 => 2,
        (1, 0) => -2,
        _ => 0,
    }
}

/// Exponent of t in the stationary weight of a k = 2 state.
pub fn t_exponent(omega: &OmegaState) -> i32 {
    (1..=omega.depth()).map(|i| t_step(OmegaState::ground_value(2, omega.m(), i), omega.get(i))).sum()
}

/// Ground zeros immediately after position `depth`.
fn ground_zero_run(k: u32, m: u32, depth: usize) -> usize {
    (depth + 1..).take_while(|&i| OmegaState::ground_value(k, m, i) == 0).count()
}

/// lmin[i][run]: least total contribution of positions i..=depth given a
/// trailing zero run before position i (None when infeasible).
fn min_completion(k: u32, m: u32, depth: usize) -> Vec<Vec<Option<i64>>> {
    let kk = k as usize;
    let mut lmin = vec![vec![None; kk]; depth + 2];
    let tail = ground_zero_run(k, m, depth);
    for (run, slot) in lmin[depth + 1].iter_mut().enumerate() {
        if run + tail < kk {
            *slot = Some(0);
        }
    }
    for i in (1..=depth).rev() {
        let g = OmegaState::ground_value(k, m, i) as i64;
        for run in 0..kk {
            let mut best: Option<i64> = None;
            for v in 0..=1i64 {
                let next = if v == 0 { run + 1 } else { 0 };
                if next >= kk {
                    continue;
                }
                if let Some(rest) = lmin[i + 1][next] {
                    let c = i as i64 * (v - g) + rest;
                    best = Some(best.map_or(c, |b: i64| b.min(c)));
                }
            }
            lmin[i][run] = best;
        }
    }
    lmin
}

/// Sums the weights of all states of depth at most `depth` and H-weight at
/// most `order`, by dynamic programming over (zero run, weight, t exponent).
fn dp_series(space: Space, order: u32, depth: usize) -> TruncatedSeries {
    let (k, m) = space.k_m();
    let kk = k as usize;
    let n = order as i64;
    let lmin = min_completion(k, m, depth);
    let mut layer: HashMap<(usize, i64, i32), BigUint> = HashMap::new();
    layer.insert((0, 0, 0), BigUint::one());
    for i in 1..=depth {
        let g = OmegaState::ground_value(k, m, i);
        let mut next: HashMap<(usize, i64, i32), BigUint> = HashMap::new();
        for ((run, w, e), count) in layer {
            let mut v = 0u32;
            loop {
                let w2 = w + i as i64 * (v as i64 - g as i64);
                let run2 = if v == 0 { run + 1 } else { 0 };
                let rest = if run2 < kk { lmin[i + 1][run2] } else { None };
                if let Some(rest) = rest {
                    if w2 + rest > n {
                        // Larger v only adds weight.
                        if v > 0 {
                            break;
                        }
                    } else {
                        let e2 = if space.tracks_t() { e + t_step(g, v) } else { 0 };
                        *next.entry((run2, w2, e2)).or_insert_with(BigUint::zero) += &count;
                    }
                } else if v > 0 {
                    break;
                }
                v += 1;
            }
        }
        layer = next;
    }
    let mut s = TruncatedSeries::zero(order);
    let tail = ground_zero_run(k, m, depth);
    for ((run, w, e), count) in layer {
        if run + tail >= kk || w < 0 || w > n {
            continue;
        }
        let dt = u32::try_from(e).expect("t exponent of a stationary weight is nonnegative");
        s.add_term(Monomial::new(w as u32, dt, 0), BigInt::from(count));
    }
    s
}

fn initial_depth(k: u32, order: u32) -> usize {
    (k * order + k + 2) as usize
}

fn stabilized(space: Space, order: u32) -> Result<NormalizerSeries> {
    let (k, _) = space.k_m();
    let mut depth = initial_depth(k, order);
    let mut current = dp_series(space, order, depth);
    for _ in 0..DEPTH_RETRIES {
        let deeper = dp_series(space, order, depth + 2);
        if deeper == current {
            return Ok(NormalizerSeries { series: current, space, depth_used: depth, stabilized: true });
        }
        depth += 2;
        current = deeper;
    }
    Err(Error::NonStabilization(depth))
}

/// S_even(q~,t) to order q~^order.
pub fn s_even(order: u32) -> Result<NormalizerSeries> {
    stabilized(Space::Even, order)
}

/// S_odd(q~,t) to order q~^order.
pub fn s_odd(order: u32) -> Result<NormalizerSeries> {
    stabilized(Space::Odd, order)
}

/// S^(k)_{-m}(q) to order q^order.
pub fn s_k(k: u32, m: u32, order: u32) -> Result<NormalizerSeries> {
    if k == 0 || m >= k {
        return Err(Error::Parameter(format!("need 0 <= m < k, got k = {k}, m = {m}")));
    }
    stabilized(Space::Exclusion { k, m }, order)
}

/// Every canonical state of class m with H-weight at most `max_weight`, by
/// depth-first search (the cross-check for the dynamic program).
pub fn enumerate_states(k: u32, m: u32, max_weight: u32) -> Result<Vec<OmegaState>> {
    if k == 0 || m >= k {
        return Err(Error::Parameter(format!("need 0 <= m < k, got k = {k}, m = {m}")));
    }
    let depth = initial_depth(k, max_weight) + 2;
    let lmin = min_completion(k, m, depth);
    let mut out = Vec::new();
    let mut vals = Vec::with_capacity(depth);
    dfs(k, m, max_weight as i64, depth, &lmin, 0, 0, &mut vals, &mut out);
    out.sort();
    out.dedup();
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn dfs(
    k: u32,
    m: u32,
    n: i64,
    depth: usize,
    lmin: &[Vec<Option<i64>>],
    run: usize,
    w: i64,
    vals: &mut Vec<u32>,
    out: &mut Vec<OmegaState>,
) {
    let i = vals.len() + 1;
    if i > depth {
        if (0..=n).contains(&w) {
            if let Ok(s) = OmegaState::new(k, m, vals.clone()) {
                out.push(s);
            }
        }
        return;
    }
    let g = OmegaState::ground_value(k, m, i) as i64;
    let mut v = 0u32;
    loop {
        let w2 = w + i as i64 * (v as i64 - g);
        let run2 = if v == 0 { run + 1 } else { 0 };
        let rest = if run2 < k as usize { lmin[i + 1][run2] } else { None };
        match rest {
            Some(rest) if w2 + rest <= n => {
                vals.push(v);
                dfs(k, m, n, depth, lmin, run2, w2, vals, out);
                vals.pop();
            }
            _ if v > 0 => break,
            _ => {}
        }
        v += 1;
    }
}

/// Coefficient table with rows n and columns t-powers, as CSV.
pub fn to_csv(s: &TruncatedSeries) -> String {
    let max_t = s.terms().keys().map(|m| m.dt).max().unwrap_or(0);
    let mut out = String::from("n");
    for e in 0..=max_t {
        out.push_str(&format!(",t^{e}"));
    }
    out.push('\n');
    for n in 0..=s.order() {
        out.push_str(&n.to_string());
        for e in 0..=max_t {
            out.push_str(&format!(",{}", s.coeff(Monomial::new(n, e, 0))));
        }
        out.push('\n');
    }
    out
}
