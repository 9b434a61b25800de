//! Exact detailed-balance checks, exact stationary solves of finite chains
//! and Gillespie simulation on frozen-boundary windows.

use std::collections::{HashMap, VecDeque};
use std::hash::Hash;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::blocking::{
    asep_q1_table, derive_params, format_rational, k_exclusion_table, marginal_weight_mono, three_state_table,
    BlockingParams, RateTable, TMono, Q,
};
use crate::error::{Error, Result};
use crate::normalizers::{h_weight, t_exponent};
use crate::standup::{conserved_n, eta_jumps, omega_jumps, Direction, EtaState, OmegaState};

/// Builds a rate table from a model id: `2-exclusion`, `asep`, `3-state`
/// (uses `gamma`) or `k-exclusion:<k>`.
pub fn model_table(id: &str, q: &Q, gamma: &Q) -> Result<RateTable> {
    match id {
        "2-exclusion" => k_exclusion_table(q, 2),
        "asep" => asep_q1_table(q),
        "3-state" => three_state_table(q, gamma),
        _ => match id.strip_prefix("k-exclusion:") {
            Some(k) => {
                let k = k.parse().map_err(|_| Error::Parse(format!("bad k in model {id:?}")))?;
                k_exclusion_table(q, k)
            }
            None => Err(Error::Parse(format!(
                "unknown model {id:?}; expected 2-exclusion, asep, 3-state or k-exclusion:<k>"
            ))),
        },
    }
}

/// A finite state space with positive-rate transitions, closed under them.
#[derive(Debug, Clone)]
pub struct FiniteChain<S> {
    pub states: Vec<S>,
    pub transitions: Vec<(usize, usize, Q)>,
}

impl<S: Clone + Eq + Hash> FiniteChain<S> {
    /// Breadth-first closure of `start` under `step`, keeping only states
    /// accepted by `keep` (transitions leaving the kept set are deleted).
    pub fn explore(
        start: S,
        step: impl Fn(&S) -> Vec<(S, Q)>,
        keep: impl Fn(&S) -> bool,
        max_states: usize,
    ) -> Result<Self> {
        if !keep(&start) {
            return Err(Error::InvalidState("initial state lies outside the truncation".into()));
        }
        let mut index: HashMap<S, usize> = HashMap::new();
        let mut states = vec![start.clone()];
        index.insert(start, 0);
        let mut transitions = Vec::new();
        let mut queue = VecDeque::from([0usize]);
        while let Some(i) = queue.pop_front() {
            for (next, rate) in step(&states[i]) {
                if !keep(&next) {
                    continue;
                }
                let j = match index.get(&next) {
                    Some(&j) => j,
                    None => {
                        if states.len() >= max_states {
                            return Err(Error::Parameter(format!("chain exceeds {max_states} states")));
                        }
                        states.push(next.clone());
                        index.insert(next, states.len() - 1);
                        queue.push_back(states.len() - 1);
                        states.len() - 1
                    }
                };
                transitions.push((i, j, rate));
            }
        }
        Ok(FiniteChain { states, transitions })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

const MAX_STATES: usize = 20_000;

/// Transitions of eta across bonds (i, i+1) with lo <= i < hi.
pub fn window_jumps(eta: &EtaState, rates: &RateTable, lo: i64, hi: i64) -> Vec<(EtaState, Q)> {
    eta_jumps(eta, rates)
        .into_iter()
        .filter(|(ev, _)| match ev.dir {
            Direction::Right => ev.site >= lo && ev.site < hi,
            Direction::Left => ev.site > lo && ev.site <= hi,
        })
        .map(|(ev, next)| (next, ev.rate))
        .collect()
}

/// The chain of `initial` with every site outside lo..=hi frozen.
pub fn eta_window_chain(rates: &RateTable, initial: &EtaState, lo: i64, hi: i64) -> Result<FiniteChain<EtaState>> {
    if lo > hi {
        return Err(Error::Parameter(format!("empty window {lo}..={hi}")));
    }
    FiniteChain::explore(initial.clone(), |e| window_jumps(e, rates, lo, hi), |_| true, MAX_STATES)
}

/// The stood-up chain from the ground state of class m, truncated at H-weight `max_weight`.
pub fn omega_chain(rates: &RateTable, m: u32, max_weight: i64) -> Result<FiniteChain<OmegaState>> {
    let start = OmegaState::ground(rates.k, m);
    FiniteChain::explore(
        start,
        |w| omega_jumps(w, rates).into_iter().map(|(ev, next)| (next, ev.rate)).collect(),
        |w| h_weight(w) <= max_weight,
        MAX_STATES,
    )
}

/// Unnormalized product weight of eta over sites lo..=hi.
pub fn eta_weight(eta: &EtaState, params: &BlockingParams, c: i64, lo: i64, hi: i64) -> TMono {
    (lo..=hi).fold(TMono::rational(Q::one()), |acc, i| acc.mul(&marginal_weight_mono(i, eta.get(i), params, c)))
}

/// Stationary weight of a stood-up state: q~^H t^(t-exponent) (t absent for k != 2).
pub fn omega_weight(omega: &OmegaState, params: &BlockingParams) -> TMono {
    let h = h_weight(omega);
    let e = if omega.k() == 2 { t_exponent(omega) } else { 0 };
    TMono::new(crate::blocking::pow(&params.qtilde, h), e)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DetailedBalanceReport {
    pub holds: bool,
    pub edges_checked: usize,
    /// First violated edge, as "eta -> eta'".
    pub violation: Option<String>,
}

/// Checks mu(eta) rate(eta -> eta') = mu(eta') rate(eta' -> eta) on every
/// transition out of every sample state.
pub fn detailed_balance_verify(rates: &RateTable, c: i64, sample: &[EtaState]) -> Result<DetailedBalanceReport> {
    let params = derive_params(rates)?;
    Ok(detailed_balance_against(rates, &params, c, sample))
}

/// As [`detailed_balance_verify`], with the measure parameters supplied
/// separately (so a corrupted table can be tested against a fixed measure).
pub fn detailed_balance_against(
    rates: &RateTable,
    params: &BlockingParams,
    c: i64,
    sample: &[EtaState],
) -> DetailedBalanceReport {
    let results: Vec<(usize, Option<String>)> = sample
        .par_iter()
        .map(|eta| {
            let mut edges = 0;
            for (ev, next) in eta_jumps(eta, rates) {
                edges += 1;
                let back_site = match ev.dir {
                    Direction::Right => ev.site + 1,
                    Direction::Left => ev.site - 1,
                };
                let back_dir = match ev.dir {
                    Direction::Right => Direction::Left,
                    Direction::Left => Direction::Right,
                };
                let back = eta_jumps(&next, rates)
                    .into_iter()
                    .find(|(b, target)| b.site == back_site && b.dir == back_dir && target == eta)
                    .map(|(b, _)| b.rate)
                    .unwrap_or_else(Q::zero);
                let lo = eta.lo().min(next.lo()) - 1;
                let hi = eta.hi().max(next.hi()) + 1;
                let lhs = eta_weight(eta, params, c, lo, hi).mul(&TMono::rational(ev.rate.clone()));
                let rhs = eta_weight(&next, params, c, lo, hi).mul(&TMono::rational(back));
                if !lhs.eq_with(&rhs, &params.t_squared) {
                    return (edges, Some(format!("{eta} -> {next}")));
                }
            }
            (edges, None)
        })
        .collect();
    let edges_checked = results.iter().map(|r| r.0).sum();
    let violation = results.into_iter().find_map(|r| r.1);
    DetailedBalanceReport { holds: violation.is_none(), edges_checked, violation }
}

fn strongly_connected<S>(chain: &FiniteChain<S>) -> bool {
    let n = chain.states.len();
    let reach = |forward: bool| {
        let mut adj = vec![Vec::new(); n];
        for (a, b, _) in &chain.transitions {
            if forward {
                adj[*a].push(*b);
            } else {
                adj[*b].push(*a);
            }
        }
        let mut seen = vec![false; n];
        seen[0] = true;
        let mut stack = vec![0];
        while let Some(i) = stack.pop() {
            for &j in &adj[i] {
                if !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        seen.into_iter().all(|s| s)
    };
    n > 0 && reach(true) && reach(false)
}

/// Primes below 2^31, largest first.
fn primes() -> impl Iterator<Item = u64> {
    (1u64 << 20..1u64 << 31).rev().filter(|&p| num_prime::nt_funcs::is_prime64(p))
}

fn mod_pow(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    r
}

/// Solves Q^T x = 0 with x_0 = 1 modulo p; None when singular mod p.
fn solve_mod(n: usize, transitions: &[(usize, usize, BigInt)], p: u64) -> Option<Vec<u64>> {
    let pb = BigInt::from(p);
    let mut a = vec![vec![0u64; n + 1]; n];
    for (from, to, r) in transitions {
        let r = r.mod_floor(&pb).to_u64().expect("reduced");
        a[*to][*from] = (a[*to][*from] + r) % p;
        a[*from][*from] = (a[*from][*from] + p - r) % p;
    }
    a[0] = vec![0; n + 1];
    a[0][0] = 1;
    a[0][n] = 1;
    for col in 0..n {
        let piv = (col..n).find(|&r| a[r][col] != 0)?;
        a.swap(col, piv);
        let inv = mod_pow(a[col][col], p - 2, p);
        for v in a[col][col..].iter_mut() {
            *v = *v * inv % p;
        }
        let pivot_row = a[col].clone();
        for (r, row) in a.iter_mut().enumerate() {
            if r == col || row[col] == 0 {
                continue;
            }
            let f = p - row[col];
            for (x, y) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                *x = (*x + f * y) % p;
            }
        }
    }
    Some(a.into_iter().map(|row| row[n]).collect())
}

/// r/s with r = s a mod m and |r|, s below sqrt(m/2).
fn rational_reconstruct(a: &BigInt, m: &BigInt) -> Option<Q> {
    let bound = (m / 2u32).sqrt();
    let (mut r0, mut r1) = (m.clone(), a.mod_floor(m));
    let (mut s0, mut s1) = (BigInt::zero(), BigInt::one());
    while r1 > bound {
        let q = &r0 / &r1;
        let r2 = &r0 - &q * &r1;
        let s2 = &s0 - &q * &s1;
        r0 = std::mem::replace(&mut r1, r2);
        s0 = std::mem::replace(&mut s1, s2);
    }
    if s1.is_zero() || s1.abs() > bound || !r1.gcd(&s1).is_one() {
        return None;
    }
    Some(Q::new(r1, s1))
}

fn satisfies_global_balance(n: usize, transitions: &[(usize, usize, Q)], pi: &[Q]) -> bool {
    let mut flow = vec![Q::zero(); n];
    for (a, b, r) in transitions {
        let f = &pi[*a] * r;
        flow[*b] += &f;
        flow[*a] -= f;
    }
    flow.iter().all(|f| f.is_zero())
}

const MAX_PRIMES: usize = 200;

/// The unique stationary distribution, exact. Solved modulo word-sized
/// primes, lifted by CRT and rational reconstruction, and accepted only
/// once it satisfies global balance exactly.
pub fn exact_stationary<S>(chain: &FiniteChain<S>) -> Result<Vec<Q>> {
    let n = chain.states.len();
    if n == 0 {
        return Err(Error::Reducible("empty chain".into()));
    }
    if !strongly_connected(chain) {
        return Err(Error::Reducible(format!("{n} states are not mutually reachable")));
    }
    if chain.transitions.iter().any(|(_, _, r)| !r.is_positive()) {
        return Err(Error::InvalidRates("transition rates must be positive".into()));
    }
    let lcm = chain.transitions.iter().fold(BigInt::one(), |l, (_, _, r)| l.lcm(r.denom()));
    let int_rates: Vec<(usize, usize, BigInt)> =
        chain.transitions.iter().map(|(a, b, r)| (*a, *b, (r * &lcm).to_integer())).collect();
    let mut modulus = BigInt::one();
    let mut residues = vec![BigInt::zero(); n];
    for p in primes().take(MAX_PRIMES) {
        let Some(x) = solve_mod(n, &int_rates, p) else { continue };
        let pb = BigInt::from(p);
        let inv = BigInt::from(mod_pow((&modulus % &pb).to_u64().expect("reduced"), p - 2, p));
        for (res, xi) in residues.iter_mut().zip(x) {
            let diff = (BigInt::from(xi) - &*res).mod_floor(&pb);
            *res += &modulus * ((diff * &inv) % &pb);
        }
        modulus *= pb;
        let candidate: Option<Vec<Q>> = residues.iter().map(|r| rational_reconstruct(r, &modulus)).collect();
        if let Some(pi) = candidate {
            if satisfies_global_balance(n, &chain.transitions, &pi) {
                let total: Q = pi.iter().sum();
                return Ok(pi.into_iter().map(|x| x / &total).collect());
            }
        }
    }
    Err(Error::NonConvergence(MAX_PRIMES))
}

/// Checks that `pi` is proportional to the exact weights `w`.
pub fn proportional_to(pi: &[Q], w: &[TMono], t_squared: &Q) -> bool {
    if pi.len() != w.len() || pi.is_empty() {
        return false;
    }
    let scale = w[0].recip().mul(&TMono::rational(pi[0].clone()));
    pi.iter().zip(w).all(|(p, wi)| wi.mul(&scale).eq_with(&TMono::rational(p.clone()), t_squared))
}

/// Whether exact_stationary of the window chain is proportional to the
/// product blocking weights.
pub fn stationary_matches_blocking(rates: &RateTable, initial: &EtaState, lo: i64, hi: i64) -> Result<bool> {
    let params = derive_params(rates)?;
    let chain = eta_window_chain(rates, initial, lo, hi)?;
    let pi = exact_stationary(&chain)?;
    let w: Vec<TMono> = chain.states.iter().map(|e| eta_weight(e, &params, 0, lo, hi)).collect();
    Ok(proportional_to(&pi, &w, &params.t_squared))
}

/// Whether exact_stationary of the truncated stood-up chain is proportional
/// to the q~^H t^e weights.
pub fn stood_up_stationary_matches(rates: &RateTable, m: u32, max_weight: i64) -> Result<bool> {
    let params = derive_params(rates)?;
    let chain = omega_chain(rates, m, max_weight)?;
    let pi = exact_stationary(&chain)?;
    let w: Vec<TMono> = chain.states.iter().map(|s| omega_weight(s, &params)).collect();
    Ok(proportional_to(&pi, &w, &params.t_squared))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CalibrationCase {
    pub case: String,
    pub edges: usize,
    pub holds: bool,
}

/// Detailed balance across the boundary edge under the calibrated marginal
/// pi*_{-1}(z) = q~^z t^(2 1{z >= 1}) (k = 2) or q^z (k-exclusion), with
/// the boundary rates taken from the stood-up jump rules.
pub fn stood_up_boundary_calibration(rates: &RateTable) -> Result<Vec<CalibrationCase>> {
    let params = derive_params(rates)?;
    let k = rates.k;
    let marginal = |z: u32| {
        let e = if k == 2 && z >= 1 { 2 } else { 0 };
        TMono::new(crate::blocking::pow(&params.qtilde, z as i64), e)
    };
    Ok(boundary_balance(rates, &params.t_squared, marginal))
}

/// Detailed balance across the boundary edge for an arbitrary marginal of
/// omega_{-1}, split into the cases y = 1 and y >= 2.
pub fn boundary_balance(rates: &RateTable, t_squared: &Q, marginal: impl Fn(u32) -> TMono) -> Vec<CalibrationCase> {
    let k = rates.k;
    let mut cases: Vec<CalibrationCase> = vec![
        CalibrationCase { case: "y = 1".into(), edges: 0, holds: true },
        CalibrationCase { case: "y >= 2".into(), edges: 0, holds: true },
    ];
    let tails: Vec<Vec<u32>> = vec![vec![], vec![1], vec![2], vec![0, 1], vec![1, 1], vec![0, 2, 1], vec![3, 0, 1]];
    for m in 0..k {
        for y in 1..=4u32 {
            for tail in &tails {
                let mut vals = vec![y];
                vals.extend(tail);
                let Ok(omega) = OmegaState::new(k, m, vals) else { continue };
                let into =
                    omega_jumps(&omega, rates).into_iter().find(|(ev, _)| ev.boundary && ev.dir == Direction::Right);
                let Some((ev_in, below)) = into else { continue };
                let out = omega_jumps(&below, rates)
                    .into_iter()
                    .find(|(ev, target)| ev.boundary && ev.dir == Direction::Left && *target == omega)
                    .map(|(ev, _)| ev.rate)
                    .unwrap_or_else(Q::zero);
                let lhs = marginal(y).mul(&TMono::rational(ev_in.rate));
                let rhs = marginal(y - 1).mul(&TMono::rational(out));
                let case = &mut cases[if y == 1 { 0 } else { 1 }];
                case.edges += 1;
                case.holds &= lhs.eq_with(&rhs, t_squared);
            }
        }
    }
    cases
}

/// Stopping rule for a trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Horizon {
    Time(f64),
    Jumps(u64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryStats {
    pub seed: u64,
    pub total_time: f64,
    pub jumps: u64,
    pub window_lo: i64,
    pub window_hi: i64,
    /// occupation[site - lo][z]: fraction of time site holds z.
    pub occupation: Vec<Vec<f64>>,
    /// Batch-means standard errors of `occupation`.
    pub std_err: Vec<Vec<f64>>,
    /// Jumps across each bond (lo+j, lo+j+1), both directions.
    pub bond_jumps: Vec<u64>,
    pub conserved_n: i64,
    pub conserved_held: bool,
}

impl TrajectoryStats {
    /// CSV rows "site,z,fraction,std_err".
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(vec![]);
        w.write_record(["site", "z", "fraction", "std_err"]).expect("in-memory write");
        for (j, row) in self.occupation.iter().enumerate() {
            for (z, f) in row.iter().enumerate() {
                let site = self.window_lo + j as i64;
                w.write_record([site.to_string(), z.to_string(), f.to_string(), self.std_err[j][z].to_string()])
                    .expect("in-memory write");
            }
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
    }
}

const BATCHES: usize = 100;

/// Gillespie simulation of eta restricted to bonds inside lo..=hi.
pub fn gillespie(
    rates: &RateTable,
    initial: &EtaState,
    lo: i64,
    hi: i64,
    horizon: Horizon,
    seed: u64,
) -> Result<TrajectoryStats> {
    if lo >= hi {
        return Err(Error::Parameter(format!("window {lo}..={hi} needs at least two sites")));
    }
    let k = rates.k as usize;
    let width = (hi - lo + 1) as usize;
    let to_f = |x: &Q| x.to_f64().unwrap_or(f64::NAN);
    let p: Vec<Vec<f64>> = (0..=k).map(|y| (0..=k).map(|z| to_f(rates.p(y as u32, z as u32))).collect()).collect();
    let q: Vec<Vec<f64>> = (0..=k).map(|y| (0..=k).map(|z| to_f(rates.q(y as u32, z as u32))).collect()).collect();
    let mut occ: Vec<usize> = (lo..=hi).map(|i| initial.get(i) as usize).collect();
    let outside_left: Vec<u32> = (initial.lo().min(lo)..lo).map(|i| initial.get(i)).collect();
    let outside_right: Vec<u32> = (hi + 1..=initial.hi().max(hi)).map(|i| initial.get(i)).collect();
    let n0 = conserved_n(initial);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bonds = width - 1;
    let mut bond_rates = vec![0.0f64; 2 * bonds];
    let mut time = 0.0f64;
    let mut jumps = 0u64;
    let mut bond_jumps = vec![0u64; bonds];
    let mut occupation = vec![vec![0.0f64; k + 1]; width];
    let mut batches: Vec<(f64, Vec<Vec<f64>>)> = Vec::new();
    let mut batch_time = 0.0f64;
    let mut batch_occ = vec![vec![0.0f64; k + 1]; width];
    let batch_len = match horizon {
        Horizon::Jumps(n) => Horizon::Jumps((n / BATCHES as u64).max(1)),
        Horizon::Time(t) => Horizon::Time(t / BATCHES as f64),
    };
    let done = |time: f64, jumps: u64, h: Horizon| match h {
        Horizon::Time(t) => time >= t,
        Horizon::Jumps(n) => jumps >= n,
    };
    let (mut batch_start_time, mut batch_start_jumps) = (0.0, 0u64);
    while !done(time, jumps, horizon) {
        let mut total = 0.0;
        for b in 0..bonds {
            let (y, z) = (occ[b], occ[b + 1]);
            let right = if y > 0 && z < k { p[y][z] } else { 0.0 };
            let left = if z > 0 && y < k { q[y][z] } else { 0.0 };
            bond_rates[2 * b] = right;
            bond_rates[2 * b + 1] = left;
            total += right + left;
        }
        if total <= 0.0 {
            return Err(Error::Parameter("window state has no allowed transitions".into()));
        }
        let mut hold = -(1.0 - rng.gen::<f64>()).ln() / total;
        if let Horizon::Time(t) = horizon {
            hold = hold.min(t - time);
        }
        for (j, &z) in occ.iter().enumerate() {
            occupation[j][z] += hold;
            batch_occ[j][z] += hold;
        }
        time += hold;
        batch_time += hold;
        if done(time, jumps, horizon) {
            break;
        }
        let mut u = rng.gen::<f64>() * total;
        let mut pick = bond_rates.len() - 1;
        for (i, r) in bond_rates.iter().enumerate() {
            if u < *r {
                pick = i;
                break;
            }
            u -= r;
        }
        while bond_rates[pick] == 0.0 {
            pick -= 1;
        }
        let b = pick / 2;
        if pick.is_multiple_of(2) {
            occ[b] -= 1;
            occ[b + 1] += 1;
        } else {
            occ[b + 1] -= 1;
            occ[b] += 1;
        }
        jumps += 1;
        bond_jumps[b] += 1;
        if done(time - batch_start_time, jumps - batch_start_jumps, batch_len) {
            batches.push((batch_time, std::mem::replace(&mut batch_occ, vec![vec![0.0; k + 1]; width])));
            batch_time = 0.0;
            batch_start_time = time;
            batch_start_jumps = jumps;
        }
    }
    if batch_time > 0.0 {
        batches.push((batch_time, batch_occ));
    }
    for row in occupation.iter_mut() {
        for v in row.iter_mut() {
            *v /= time;
        }
    }
    let nb = batches.len() as f64;
    let std_err = occupation
        .iter()
        .enumerate()
        .map(|(j, row)| {
            row.iter()
                .enumerate()
                .map(|(z, &mean)| {
                    if nb < 2.0 {
                        return f64::NAN;
                    }
                    let ss: f64 = batches.iter().map(|(bt, bo)| (bo[j][z] - mean * bt).powi(2)).sum();
                    (ss * nb / (nb - 1.0)).sqrt() / time
                })
                .collect()
        })
        .collect();
    let mut full = outside_left;
    full.extend(occ.iter().map(|&v| v as u32));
    full.extend(outside_right);
    let final_state = EtaState::new(initial.k(), initial.lo().min(lo), full)?;
    let conserved = conserved_n(&final_state);
    Ok(TrajectoryStats {
        seed,
        total_time: time,
        jumps,
        window_lo: lo,
        window_hi: hi,
        occupation,
        std_err,
        bond_jumps,
        conserved_n: conserved,
        conserved_held: conserved == n0,
    })
}

/// Independent trajectories in parallel, one per seed.
pub fn gillespie_many(
    rates: &RateTable,
    initial: &EtaState,
    lo: i64,
    hi: i64,
    horizon: Horizon,
    seeds: &[u64],
) -> Result<Vec<TrajectoryStats>> {
    seeds.par_iter().map(|&s| gillespie(rates, initial, lo, hi, horizon, s)).collect()
}

/// Exact occupation marginals of the window chain: marginals[site - lo][z].
pub fn exact_marginals(chain: &FiniteChain<EtaState>, pi: &[Q], lo: i64, hi: i64, k: u32) -> Vec<Vec<Q>> {
    let mut out = vec![vec![Q::zero(); k as usize + 1]; (hi - lo + 1) as usize];
    for (state, p) in chain.states.iter().zip(pi) {
        for i in lo..=hi {
            out[(i - lo) as usize][state.get(i) as usize] += p;
        }
    }
    out
}

/// Largest |empirical - exact| / SE over all sites and values, and the
/// entry attaining it as (site, z).
pub fn max_standardized_error(stats: &TrajectoryStats, exact: &[Vec<Q>]) -> (f64, i64, usize) {
    let mut worst = (0.0, stats.window_lo, 0);
    for (j, row) in exact.iter().enumerate() {
        for (z, e) in row.iter().enumerate() {
            let diff = (stats.occupation[j][z] - e.to_f64().unwrap_or(f64::NAN)).abs();
            let se = stats.std_err[j][z];
            let score = if diff == 0.0 { 0.0 } else { diff / se };
            if score > worst.0 || score.is_nan() {
                worst = (score, stats.window_lo + j as i64, z);
            }
        }
    }
    worst
}

/// Readable summary of a rational probability vector (for CLI output).
pub fn format_distribution(pi: &[Q]) -> Vec<String> {
    pi.iter().map(format_rational).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blocking::rat;

    #[test]
    fn reconstruct_small_fraction() {
        let m = BigInt::from(2_305_843_009_213_693_951u64);
        let a = (BigInt::from(-3) * BigInt::from(7).modpow(&(&m - 2u32), &m)).mod_floor(&m);
        assert_eq!(rational_reconstruct(&a, &m), Some(rat(-3, 7)));
        assert_eq!(rational_reconstruct(&BigInt::from(5), &m), Some(rat(5, 1)));
    }

    #[test]
    fn two_state_chain() {
        let chain = FiniteChain { states: vec![0, 1], transitions: vec![(0, 1, rat(1, 3)), (1, 0, rat(2, 1))] };
        assert_eq!(exact_stationary(&chain).unwrap(), vec![rat(6, 7), rat(1, 7)]);
    }

    #[test]
    fn single_state_chain() {
        let chain: FiniteChain<u8> = FiniteChain { states: vec![0], transitions: vec![] };
        assert_eq!(exact_stationary(&chain).unwrap(), vec![rat(1, 1)]);
    }

    #[test]
    fn reducible_chain_rejected() {
        let chain = FiniteChain { states: vec![0, 1], transitions: vec![(0, 1, rat(1, 1))] };
        assert!(matches!(exact_stationary(&chain), Err(Error::Reducible(_))));
    }

    #[test]
    fn non_reversible_cycle() {
        let chain = FiniteChain {
            states: vec![0, 1, 2],
            transitions: vec![(0, 1, rat(1, 1)), (1, 2, rat(2, 1)), (2, 0, rat(3, 1))],
        };
        assert_eq!(exact_stationary(&chain).unwrap(), vec![rat(6, 11), rat(3, 11), rat(2, 11)]);
    }

    #[test]
    fn model_ids() {
        assert_eq!(model_table("k-exclusion:3", &rat(1, 2), &rat(1, 2)).unwrap().k, 3);
        assert!(model_table("zrp", &rat(1, 2), &rat(1, 2)).is_err());
    }
}
