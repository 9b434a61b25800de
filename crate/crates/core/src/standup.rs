//! Finite-deviation encodings of the original and stood-up processes, the
//! conserved quantity, the standing-up and laying-down maps, and the jump
//! rates of both processes.

use std::fmt;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::blocking::{RateTable, Q};
use crate::error::{Error, Result};

/// A state of the 0..k system: sites below `lo` hold 0, sites above the
/// window hold k.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EtaState {
    k: u32,
    lo: i64,
    occ: Vec<u32>,
}

impl EtaState {
    pub fn new(k: u32, lo: i64, occ: Vec<u32>) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidState("k must be at least 1".into()));
        }
        if let Some(v) = occ.iter().find(|&&v| v > k) {
            return Err(Error::InvalidState(format!("occupancy {v} exceeds k = {k}")));
        }
        Ok(EtaState { k, lo, occ }.canonical())
    }

    /// The ground state of class -m: m particles at site 0, sites >= 1 full.
    pub fn ground(k: u32, m: u32) -> Self {
        EtaState { k, lo: 0, occ: vec![m % k] }.canonical()
    }

    fn canonical(mut self) -> Self {
        let lead = self.occ.iter().take_while(|&&v| v == 0).count();
        self.occ.drain(..lead);
        self.lo += lead as i64;
        while self.occ.last() == Some(&self.k) {
            self.occ.pop();
        }
        self
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    /// Last site of the window (lo - 1 when the window is empty).
    pub fn hi(&self) -> i64 {
        self.lo + self.occ.len() as i64 - 1
    }

    pub fn occ(&self) -> &[u32] {
        &self.occ
    }

    pub fn get(&self, i: i64) -> u32 {
        if i < self.lo {
            0
        } else if i > self.hi() {
            self.k
        } else {
            self.occ[(i - self.lo) as usize]
        }
    }

    /// Moves every particle d sites to the right; N grows by k*d.
    pub fn shift(&self, d: i64) -> Self {
        EtaState { k: self.k, lo: self.lo + d, occ: self.occ.clone() }
    }

    /// Sites of the particles inside the window, in reading order.
    pub fn particle_sites(&self) -> Vec<i64> {
        let mut s = Vec::new();
        for (j, &v) in self.occ.iter().enumerate() {
            s.extend(std::iter::repeat_n(self.lo + j as i64, v as usize));
        }
        s
    }

    fn with_site(&self, i: i64, v: u32) -> Self {
        let (mut lo, mut occ) = (self.lo, self.occ.clone());
        while i < lo {
            occ.insert(0, 0);
            lo -= 1;
        }
        while i > lo + occ.len() as i64 - 1 {
            occ.push(self.k);
        }
        occ[(i - lo) as usize] = v;
        EtaState { k: self.k, lo, occ }.canonical()
    }

    /// Serializes as {k, m_or_n: N, values}; the window position follows from N.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&StateJson { k: self.k, m_or_n: conserved_n(self), values: self.occ.clone() })
            .expect("state serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let j: StateJson = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        let base = EtaState::new(j.k, 0, j.values)?;
        let n0 = conserved_n(&base);
        let k = j.k as i64;
        if (j.m_or_n - n0).rem_euclid(k) != 0 {
            return Err(Error::Parse(format!("N = {} incompatible with the occupancies", j.m_or_n)));
        }
        Ok(base.shift((j.m_or_n - n0) / k))
    }
}

impl fmt::Display for EtaState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let body: Vec<String> = self.occ.iter().map(|v| v.to_string()).collect();
        write!(f, "...0|{}:{}|{}...", self.lo, body.join(" "), self.k)
    }
}

#[derive(Serialize, Deserialize)]
struct StateJson {
    k: u32,
    m_or_n: i64,
    values: Vec<u32>,
}

/// A stood-up state: omega_{-1}, omega_{-2}, ... with omega_{-i} = 1{i = m mod k}
/// beyond the stored values.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OmegaState {
    k: u32,
    m: u32,
    vals: Vec<u32>,
}

impl OmegaState {
    pub fn new(k: u32, m: u32, vals: Vec<u32>) -> Result<Self> {
        if k == 0 || m >= k {
            return Err(Error::InvalidState(format!("need k >= 1 and 0 <= m < k, got k = {k}, m = {m}")));
        }
        let s = OmegaState { k, m, vals }.canonical();
        if let Some(i) = s.zero_run_violation() {
            return Err(Error::InvalidState(format!("{k} consecutive zeros starting at omega_-{i}")));
        }
        Ok(s)
    }

    pub fn ground(k: u32, m: u32) -> Self {
        OmegaState { k, m, vals: Vec::new() }
    }

    pub fn ground_value(k: u32, m: u32, i: usize) -> u32 {
        (i as u64 % k as u64 == m as u64) as u32
    }

    fn canonical(mut self) -> Self {
        while let Some(&v) = self.vals.last() {
            if v != Self::ground_value(self.k, self.m, self.vals.len()) {
                break;
            }
            self.vals.pop();
        }
        self
    }

    fn zero_run_violation(&self) -> Option<usize> {
        let k = self.k as usize;
        let mut run = 0;
        for i in 1..=self.vals.len() + k {
            if self.get(i) == 0 {
                run += 1;
                if run >= k {
                    return Some(i + 1 - k);
                }
            } else {
                run = 0;
            }
        }
        None
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    /// Canonical depth: index of the last value differing from the ground state.
    pub fn depth(&self) -> usize {
        self.vals.len()
    }

    pub fn vals(&self) -> &[u32] {
        &self.vals
    }

    /// omega_{-i} for i >= 1.
    pub fn get(&self, i: usize) -> u32 {
        assert!(i >= 1, "omega is indexed from -1");
        self.vals.get(i - 1).copied().unwrap_or_else(|| Self::ground_value(self.k, self.m, i))
    }

    /// Values omega_{-1}..omega_{-len}, padded with the ground state.
    pub fn padded(&self, len: usize) -> Vec<u32> {
        (1..=len).map(|i| self.get(i)).collect()
    }

    fn with_values(&self, updates: &[(usize, u32)]) -> Self {
        let max = updates.iter().map(|u| u.0).max().unwrap_or(0).max(self.vals.len());
        let mut vals = self.padded(max);
        for &(i, v) in updates {
            vals[i - 1] = v;
        }
        OmegaState { k: self.k, m: self.m, vals }.canonical()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&StateJson { k: self.k, m_or_n: self.m as i64, values: self.vals.clone() })
            .expect("state serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let j: StateJson = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        if j.m_or_n < 0 {
            return Err(Error::Parse("class m must be nonnegative".into()));
        }
        OmegaState::new(j.k, j.m_or_n as u32, j.values)
    }
}

impl fmt::Display for OmegaState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let body: Vec<String> = self.vals.iter().map(|v| v.to_string()).collect();
        write!(f, "({}|ground m={})", body.join(","), self.m)
    }
}

/// N(eta) = sum_{i>=1} (k - eta_i) - sum_{i<=0} eta_i.
pub fn conserved_n(eta: &EtaState) -> i64 {
    let k = eta.k as i64;
    let from = eta.lo.min(1);
    let to = eta.hi().max(0);
    (from..=to)
        .map(|i| {
            let v = eta.get(i) as i64;
            if i >= 1 {
                k - v
            } else {
                -v
            }
        })
        .sum()
}

/// Gaps between consecutive particles read left to right, bottom to top.
pub fn stand_up(eta: &EtaState) -> OmegaState {
    let k = eta.k;
    let s = eta.particle_sites();
    if s.is_empty() {
        return OmegaState::ground(k, 0);
    }
    let mut vals: Vec<u32> = s.windows(2).map(|w| (w[1] - w[0]) as u32).collect();
    vals.push((eta.hi() + 1 - s[s.len() - 1]) as u32);
    let m = (s.len() as u64 % k as u64) as u32;
    OmegaState { k, m, vals }.canonical()
}

/// The unique eta in class n with stand_up(eta) = omega.
pub fn lay_down(omega: &OmegaState, n: i64) -> Result<EtaState> {
    let k = omega.k as i64;
    if (n + omega.m as i64).rem_euclid(k) != 0 {
        return Err(Error::ClassMismatch { n, m: omega.m, k: omega.k });
    }
    // Particle R with R = m mod k and R > D + k sits on a full site with
    // only full sites to its right.
    let d = omega.depth() as i64;
    let mut r = omega.m as i64;
    while r <= d + k {
        r += k;
    }
    let mut sites = vec![0i64];
    for i in 1..r as usize {
        sites.push(sites[i - 1] + omega.get(i) as i64);
    }
    let hi = sites[sites.len() - 1];
    let mut occ = vec![0u32; (hi + 1) as usize];
    for &s in &sites {
        occ[s as usize] += 1;
    }
    let base = EtaState::new(omega.k, 0, occ)?;
    let n0 = conserved_n(&base);
    debug_assert_eq!((n - n0).rem_euclid(k), 0);
    Ok(base.shift((n - n0) / k))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Direction {
    Right,
    Left,
}

/// A transition of either process. For eta, `site` is the source site; for
/// omega, `site` is the index r of the moving particle (r = 1 is the
/// boundary: right jumps enter the reservoir, left jumps leave it).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct JumpEvent {
    pub site: i64,
    pub dir: Direction,
    pub rate: Q,
    pub boundary: bool,
}

/// All positive-rate transitions of eta.
pub fn eta_jumps(eta: &EtaState, rates: &RateTable) -> Vec<(JumpEvent, EtaState)> {
    let mut out = Vec::new();
    for i in eta.lo - 1..=eta.hi() {
        let (y, z) = (eta.get(i), eta.get(i + 1));
        let p = rates.p(y, z);
        if !p.is_zero() && y > 0 && z < eta.k {
            let next = eta.with_site(i, y - 1).with_site(i + 1, z + 1);
            out.push((JumpEvent { site: i, dir: Direction::Right, rate: p.clone(), boundary: false }, next));
        }
        let q = rates.q(y, z);
        if !q.is_zero() && z > 0 && y < eta.k {
            let next = eta.with_site(i + 1, z - 1).with_site(i, y + 1);
            out.push((JumpEvent { site: i + 1, dir: Direction::Left, rate: q.clone(), boundary: false }, next));
        }
    }
    out
}

/// Index of the particle that makes the given eta jump.
pub fn moving_particle(eta: &EtaState, site: i64, dir: Direction) -> usize {
    let before: u32 = (eta.lo..site).map(|i| eta.get(i)).sum();
    match dir {
        Direction::Right => (before + eta.get(site)) as usize,
        Direction::Left => before as usize + 1,
    }
}

fn is_k_exclusion(r: &RateTable) -> bool {
    let (p, q) = (r.p(1, 0), r.q(0, 1));
    (1..=r.k).all(|y| (0..r.k).all(|z| r.p(y, z) == p)) && (0..r.k).all(|y| (1..=r.k).all(|z| r.q(y, z) == q))
}

fn apply_omega(omega: &OmegaState, r: usize, dir: Direction) -> OmegaState {
    let a = omega.get(r);
    match dir {
        Direction::Right if r == 1 => omega.with_values(&[(1, a - 1)]),
        Direction::Right => omega.with_values(&[(r, a - 1), (r - 1, omega.get(r - 1) + 1)]),
        Direction::Left if r == 1 => omega.with_values(&[(1, a + 1)]),
        Direction::Left => omega.with_values(&[(r, a + 1), (r - 1, omega.get(r - 1) - 1)]),
    }
}

/// omega_{-i}, with indices at or beyond the boundary treated as nonzero.
fn val_or_boundary(omega: &OmegaState, i: i64) -> u32 {
    if i >= 1 {
        omega.get(i as usize)
    } else {
        u32::MAX
    }
}

fn rate_k2(omega: &OmegaState, rates: &RateTable, r: usize, dir: Direction) -> Q {
    let w = |i: i64| val_or_boundary(omega, i);
    let r = r as i64;
    let zero = Q::zero();
    match dir {
        Direction::Right => {
            let (a, b, c) = (w(r), w(r - 1), w(r + 1));
            match (a, b) {
                (0, _) => zero,
                (1, 0) if c != 0 => rates.p(2, 1).clone(),
                (1, _) if b != 0 && c != 0 => rates.p(1, 1).clone(),
                (1, _) => zero,
                (_, 0) => rates.p(2, 0).clone(),
                _ => rates.p(1, 0).clone(),
            }
        }
        Direction::Left => {
            let (a, b, d) = (w(r), w(r - 1), w(r - 2));
            match (a, b) {
                (_, 0) => zero,
                (0, 1) if d != 0 => rates.q(1, 2).clone(),
                (_, 1) if d != 0 => rates.q(1, 1).clone(),
                (_, 1) => zero,
                (0, _) => rates.q(0, 2).clone(),
                _ => rates.q(0, 1).clone(),
            }
        }
    }
}

fn rate_k_exclusion(omega: &OmegaState, rates: &RateTable, r: usize, dir: Direction) -> Q {
    let w = |i: i64| val_or_boundary(omega, i);
    let (r, k) = (r as i64, omega.k as i64);
    let zero = Q::zero();
    match dir {
        Direction::Right => match w(r) {
            0 => zero,
            1 if (1..k).all(|j| w(r + j) == 0) => zero,
            _ => rates.p(1, 0).clone(),
        },
        Direction::Left => match w(r - 1) {
            0 => zero,
            1 if (1..k).all(|j| w(r - 1 - j) == 0) => zero,
            _ => rates.q(0, 1).clone(),
        },
    }
}

/// Rates read off the laid-down configuration: occupancies are one plus
/// the length of the adjacent zero run.
pub fn rate_generic(omega: &OmegaState, rates: &RateTable, r: usize, dir: Direction) -> Q {
    let w = |i: i64| val_or_boundary(omega, i);
    let r = r as i64;
    let run = |start: i64, step: i64| {
        let mut n = 0;
        let mut i = start;
        while w(i) == 0 {
            n += 1;
            i += step;
        }
        n
    };
    let k = omega.k;
    match dir {
        Direction::Right => {
            if w(r) == 0 {
                return Q::zero();
            }
            let y = 1 + run(r - 1, -1);
            let z = if w(r) >= 2 { 0 } else { 1 + run(r + 1, 1) };
            if y > k || z > k {
                Q::zero()
            } else {
                rates.p(y, z).clone()
            }
        }
        Direction::Left => {
            if w(r - 1) == 0 {
                return Q::zero();
            }
            let y = 1 + run(r, 1);
            let z = if w(r - 1) >= 2 { 0 } else { 1 + run(r - 2, -1) };
            if y > k || z > k {
                Q::zero()
            } else {
                rates.q(z, y).clone()
            }
        }
    }
}

fn collect_omega_jumps(omega: &OmegaState, rate: impl Fn(usize, Direction) -> Q) -> Vec<(JumpEvent, OmegaState)> {
    let mut out = Vec::new();
    for r in 1..=omega.depth() + 2 * omega.k as usize + 2 {
        for dir in [Direction::Right, Direction::Left] {
            let q = rate(r, dir);
            if !q.is_zero() {
                let ev = JumpEvent { site: r as i64, dir, rate: q, boundary: r == 1 };
                out.push((ev, apply_omega(omega, r, dir)));
            }
        }
    }
    out
}

/// All positive-rate transitions of the stood-up process, including entry
/// to and exit from the boundary reservoir.
pub fn omega_jumps(omega: &OmegaState, rates: &RateTable) -> Vec<(JumpEvent, OmegaState)> {
    if rates.k == 2 && omega.k == 2 {
        collect_omega_jumps(omega, |r, d| rate_k2(omega, rates, r, d))
    } else if is_k_exclusion(rates) {
        collect_omega_jumps(omega, |r, d| rate_k_exclusion(omega, rates, r, d))
    } else {
        omega_jumps_generic(omega, rates)
    }
}

/// Transitions from the zero-run rule, valid for any 0..k table.
pub fn omega_jumps_generic(omega: &OmegaState, rates: &RateTable) -> Vec<(JumpEvent, OmegaState)> {
    collect_omega_jumps(omega, |r, d| rate_generic(omega, rates, r, d))
}

type Signature = Vec<(i64, Direction, Q, OmegaState)>;

fn signature(mut v: Signature) -> Signature {
    v.sort();
    v
}

/// Checks that standing up carries the eta transitions onto the omega
/// transitions at the same particle index with equal rates.
pub fn intertwine_check(eta: &EtaState, rates: &RateTable) -> bool {
    intertwine_with(eta, rates, omega_jumps)
}

pub fn intertwine_with(
    eta: &EtaState,
    rates: &RateTable,
    jumps: impl Fn(&OmegaState, &RateTable) -> Vec<(JumpEvent, OmegaState)>,
) -> bool {
    let from_eta: Signature = eta_jumps(eta, rates)
        .into_iter()
        .map(|(ev, next)| (moving_particle(eta, ev.site, ev.dir) as i64, ev.dir, ev.rate, stand_up(&next)))
        .collect();
    let from_omega: Signature =
        jumps(&stand_up(eta), rates).into_iter().map(|(ev, next)| (ev.site, ev.dir, ev.rate, next)).collect();
    signature(from_eta) == signature(from_omega)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blocking::{asep_q1_table, k_exclusion_table, rat};

    fn sample_state() -> EtaState {
        EtaState::new(2, -3, vec![1, 2, 0, 0, 2, 1, 1, 2, 2]).unwrap()
    }

    #[test]
    fn ground_states() {
        let e = EtaState::ground(2, 0);
        let o = EtaState::ground(2, 1);
        assert_eq!(conserved_n(&e), 0);
        assert_eq!(conserved_n(&o), -1);
        assert_eq!(stand_up(&e), OmegaState::ground(2, 0));
        assert_eq!(stand_up(&o), OmegaState::ground(2, 1));
        assert_eq!(OmegaState::ground(2, 0).padded(4), vec![0, 1, 0, 1]);
        for k in 1..6 {
            for m in 0..k {
                assert_eq!(conserved_n(&EtaState::ground(k, m)), -(m as i64));
                assert_eq!(stand_up(&EtaState::ground(k, m)), OmegaState::ground(k, m));
            }
        }
    }

    #[test]
    fn sample_state_stands_up() {
        let eta = sample_state();
        assert_eq!(conserved_n(&eta), -1);
        let w = stand_up(&eta);
        assert_eq!(w.m(), 1);
        assert_eq!(w.padded(11), vec![1, 0, 3, 0, 1, 1, 1, 0, 1, 0, 1]);
        assert_eq!(lay_down(&w, -1).unwrap(), eta);
    }

    #[test]
    fn lay_down_ground_examples() {
        assert_eq!(lay_down(&OmegaState::ground(2, 1), -1).unwrap(), EtaState::ground(2, 1));
        let up = lay_down(&OmegaState::ground(2, 0), 2).unwrap();
        assert_eq!(up, EtaState::ground(2, 0).shift(1));
        assert_eq!(conserved_n(&up), 2);
        assert!(matches!(lay_down(&OmegaState::ground(2, 0), 1), Err(Error::ClassMismatch { .. })));
    }

    #[test]
    fn omega_rejects_k_zeros() {
        assert!(OmegaState::new(2, 0, vec![1, 0, 0, 1]).is_err());
        assert!(OmegaState::new(3, 0, vec![1, 0, 0, 1]).is_ok());
        assert!(OmegaState::new(2, 0, vec![1, 0]).is_err());
        assert!(OmegaState::new(2, 1, vec![1, 1, 0, 1]).is_ok());
        assert!(OmegaState::new(2, 1, vec![1, 0, 0]).is_err());
    }

    #[test]
    fn ground_eta_jumps_two_exclusion() {
        let r = k_exclusion_table(&rat(1, 2), 2).unwrap();
        let jumps = eta_jumps(&EtaState::ground(2, 0), &r);
        assert_eq!(jumps.len(), 1);
        assert_eq!(jumps[0].0.dir, Direction::Left);
        assert_eq!(jumps[0].0.site, 1);
        assert_eq!(jumps[0].0.rate, rat(1, 2));
    }

    #[test]
    fn blocked_right_jump_k2() {
        let r = asep_q1_table(&rat(1, 2)).unwrap();
        let w = OmegaState::new(2, 1, vec![1, 1, 0, 1]).unwrap();
        // r = 2: omega_-2 = 1, omega_-3 = 0 blocks the right jump.
        assert!(omega_jumps(&w, &r).iter().all(|(e, _)| !(e.site == 2 && e.dir == Direction::Right)));
    }

    #[test]
    fn boundary_exit_rate() {
        let r = asep_q1_table(&rat(1, 2)).unwrap();
        let w = OmegaState::new(2, 0, vec![0, 1]).unwrap();
        let out: Vec<_> =
            omega_jumps(&w, &r).into_iter().filter(|(e, _)| e.boundary && e.dir == Direction::Left).collect();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].0.rate, *r.q(0, 2));
    }

    #[test]
    fn k3_zero_run_blocking() {
        let r = k_exclusion_table(&rat(1, 2), 3).unwrap();
        let w = OmegaState::new(3, 0, vec![2, 1, 0, 0, 1]).unwrap();
        let right2 = omega_jumps(&w, &r).into_iter().any(|(e, _)| e.site == 2 && e.dir == Direction::Right);
        assert!(!right2);
        let w = OmegaState::new(3, 0, vec![2, 1, 0, 1, 1]).unwrap();
        let right2 = omega_jumps(&w, &r).into_iter().any(|(e, _)| e.site == 2 && e.dir == Direction::Right);
        assert!(right2);
    }

    #[test]
    fn json_round_trip() {
        let eta = sample_state();
        assert_eq!(EtaState::from_json(&eta.to_json()).unwrap(), eta);
        let w = stand_up(&eta);
        assert_eq!(OmegaState::from_json(&w.to_json()).unwrap(), w);
    }
}
