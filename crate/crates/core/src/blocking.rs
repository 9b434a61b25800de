//! Nearest-neighbour rate tables of 0-1-...-k systems, the blocking-family
//! axioms, and the derived blocking-measure parameters and marginals.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Q = BigRational;

/// Builds the rational n/d.
pub fn rat(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Parses "num/den" or an integer.
pub fn parse_rational(s: &str) -> Result<Q> {
    let s = s.trim();
    let bad = || Error::Parse(format!("bad rational {s:?}"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Q::new(n, d))
        }
        None => Ok(Q::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

/// Formats a rational as "num/den" (or "num" when integral).
pub fn format_rational(x: &Q) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Exact square root of a nonnegative rational, when one exists.
pub fn rational_sqrt(x: &Q) -> Option<Q> {
    if x.is_negative() {
        return None;
    }
    let n = x.numer().sqrt();
    let d = x.denom().sqrt();
    (&n * &n == *x.numer() && &d * &d == *x.denom()).then(|| Q::new(n, d))
}

/// x^e for any integer e.
pub fn pow(x: &Q, e: i64) -> Q {
    if e >= 0 {
        num_traits::pow(x.clone(), e as usize)
    } else {
        num_traits::pow(x.recip(), (-e) as usize)
    }
}

/// A value coeff * t^t_exp, exact even when t itself is irrational.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TMono {
    pub coeff: Q,
    pub t_exp: i32,
}

impl TMono {
    pub fn new(coeff: Q, t_exp: i32) -> Self {
        TMono { coeff, t_exp }
    }

    pub fn rational(coeff: Q) -> Self {
        TMono { coeff, t_exp: 0 }
    }

    pub fn zero() -> Self {
        TMono::rational(Q::zero())
    }

    pub fn mul(&self, o: &TMono) -> TMono {
        TMono { coeff: &self.coeff * &o.coeff, t_exp: self.t_exp + o.t_exp }
    }

    pub fn recip(&self) -> TMono {
        TMono { coeff: self.coeff.recip(), t_exp: -self.t_exp }
    }

    /// Reduces to coeff * t^(0 or 1) using the rational value of t^2.
    pub fn normalize(&self, t_squared: &Q) -> (Q, i32) {
        if self.coeff.is_zero() {
            return (Q::zero(), 0);
        }
        let half = self.t_exp.div_euclid(2);
        (&self.coeff * pow(t_squared, half as i64), self.t_exp.rem_euclid(2))
    }

    pub fn eq_with(&self, o: &TMono, t_squared: &Q) -> bool {
        self.normalize(t_squared) == o.normalize(t_squared)
    }

    /// Exact value when t is rational.
    pub fn value(&self, t: &Q) -> Q {
        &self.coeff * pow(t, self.t_exp as i64)
    }

    pub fn value_f64(&self, t: f64) -> f64 {
        self.coeff.to_f64().unwrap_or(f64::NAN) * t.powi(self.t_exp)
    }
}

/// Right rates p(y,z) and left rates q(y,z) of a 0..k system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RateTable {
    pub k: u32,
    pub p: Vec<Vec<Q>>,
    pub q: Vec<Vec<Q>>,
}

#[derive(Serialize, Deserialize)]
struct RateTableJson {
    k: u32,
    p: Vec<Vec<String>>,
    q: Vec<Vec<String>>,
}

impl RateTable {
    pub fn zeros(k: u32) -> Self {
        let n = k as usize + 1;
        RateTable { k, p: vec![vec![Q::zero(); n]; n], q: vec![vec![Q::zero(); n]; n] }
    }

    pub fn p(&self, y: u32, z: u32) -> &Q {
        &self.p[y as usize][z as usize]
    }

    pub fn q(&self, y: u32, z: u32) -> &Q {
        &self.q[y as usize][z as usize]
    }

    pub fn to_json(&self) -> String {
        let conv = |m: &Vec<Vec<Q>>| m.iter().map(|r| r.iter().map(format_rational).collect()).collect();
        serde_json::to_string(&RateTableJson { k: self.k, p: conv(&self.p), q: conv(&self.q) })
            .expect("rate table serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let j: RateTableJson = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        let n = j.k as usize + 1;
        let conv = |m: Vec<Vec<String>>| -> Result<Vec<Vec<Q>>> {
            if m.len() != n || m.iter().any(|r| r.len() != n) {
                return Err(Error::Parse(format!("rate matrix must be {n}x{n}")));
            }
            m.iter().map(|r| r.iter().map(|x| parse_rational(x)).collect()).collect()
        };
        Ok(RateTable { k: j.k, p: conv(j.p)?, q: conv(j.q)? })
    }

    /// Returns a copy with p(y,z) multiplied by `factor`.
    pub fn scaled_p(&self, y: u32, z: u32, factor: &Q) -> Self {
        let mut r = self.clone();
        r.p[y as usize][z as usize] = &r.p[y as usize][z as usize] * factor;
        r
    }
}

/// One failed axiom with the rates that witness it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub axiom: String,
    pub witness: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub accepted: bool,
    pub violations: Vec<Violation>,
}

/// Checks the blocking-family axioms, reporting every failure.
pub fn validate(r: &RateTable) -> ValidationReport {
    let mut v = Vec::new();
    let mut fail = |axiom: &str, witness: String| v.push(Violation { axiom: axiom.into(), witness });
    let k = r.k;
    if k == 0 || r.p.len() != k as usize + 1 || r.q.len() != k as usize + 1 {
        fail("shape", format!("tables must be (k+1)x(k+1) with k >= 1, k = {k}"));
        return ValidationReport { accepted: false, violations: v };
    }
    for y in 0..=k {
        for z in 0..=k {
            let forced_p = y == 0 || z == k;
            let forced_q = y == k || z == 0;
            for (name, val, forced) in [("p", r.p(y, z), forced_p), ("q", r.q(y, z), forced_q)] {
                if forced && !val.is_zero() {
                    fail("B1", format!("{name}({y},{z}) = {} must be 0", format_rational(val)));
                } else if !forced && !val.is_positive() {
                    fail("positivity", format!("{name}({y},{z}) = {} must be > 0", format_rational(val)));
                }
            }
        }
    }
    // Monotonicity: more particles push harder, fuller targets resist.
    for y in 1..k {
        for z in 0..k {
            if r.p(y + 1, z) < r.p(y, z) {
                fail("B2", format!("p({},{z}) < p({y},{z})", y + 1));
            }
        }
    }
    for y in 1..=k {
        for z in 0..k - 1 {
            if r.p(y, z) < r.p(y, z + 1) {
                fail("B2", format!("p({y},{z}) < p({y},{})", z + 1));
            }
        }
    }
    for y in 0..k - 1 {
        for z in 1..=k {
            if r.q(y, z) < r.q(y + 1, z) {
                fail("B2", format!("q({y},{z}) < q({},{z})", y + 1));
            }
        }
    }
    for y in 0..k {
        for z in 1..k {
            if r.q(y, z + 1) < r.q(y, z) {
                fail("B2", format!("q({y},{}) < q({y},{z})", z + 1));
            }
        }
    }
    for y in 1..=k {
        for z in 0..k {
            if r.p(y, z) <= r.q(z, y) {
                fail("a", format!("p({y},{z}) <= q({z},{y})"));
            }
        }
    }
    let nonzero = r.p(1, 0).is_positive() && r.q(0, 1).is_positive();
    if k == 2 && nonzero && r.p(2, 1).is_positive() && r.q(1, 2).is_positive() {
        if r.p(1, 0) / r.q(0, 1) != r.p(2, 1) / r.q(1, 2) {
            fail("b", "p(1,0)/q(0,1) != p(2,1)/q(1,2)".into());
        }
        let den = r.q(0, 1) * r.q(1, 2) * r.p(2, 0) * r.p(1, 1);
        if !den.is_zero() {
            let c = r.p(1, 0) * r.p(2, 1) * r.q(1, 1) * r.q(0, 2) / den;
            if !c.is_one() {
                fail("c", format!("product condition evaluates to {}", format_rational(&c)));
            }
        }
    } else if k != 2 && nonzero {
        // General k: only the k-exclusion pattern (constant p and q off B1) is admitted.
        for y in 1..=k {
            for z in 0..k {
                if r.p(y, z) != r.p(1, 0) {
                    fail("B3", format!("p({y},{z}) differs from p(1,0): not a k-exclusion table"));
                }
            }
        }
        for y in 0..k {
            for z in 1..=k {
                if r.q(y, z) != r.q(0, 1) {
                    fail("B3", format!("q({y},{z}) differs from q(0,1): not a k-exclusion table"));
                }
            }
        }
    }
    ValidationReport { accepted: v.is_empty(), violations: v }
}

/// Blocking-measure parameters derived from a validated table.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockingParams {
    pub k: u32,
    pub p_asym: Q,
    pub q_asym: Q,
    pub qtilde: Q,
    pub t_squared: Q,
    /// Exact t when t^2 is a rational square.
    pub t: Option<Q>,
    /// f(0..=k), normalized so that the product of the nonzero values is 1.
    pub f: Vec<TMono>,
    /// s(y,z) for y, z in 1..=k+1 (zero when either argument is k+1).
    pub s: BTreeMap<(u32, u32), TMono>,
    /// Family parameter c, used only numerically.
    pub c: f64,
}

impl BlockingParams {
    pub fn with_c(mut self, c: f64) -> Self {
        self.c = c;
        self
    }

    pub fn t_f64(&self) -> f64 {
        self.t_squared.to_f64().unwrap_or(f64::NAN).sqrt()
    }

    /// 1/f(z)! as an exact t-monomial.
    pub fn inv_f_factorial(&self, z: u32) -> TMono {
        (1..=z).fold(TMono::rational(Q::one()), |acc, j| acc.mul(&self.f[j as usize])).recip()
    }

    /// Checks p(y,z) = p_asym s(y,z+1) f(y) and q(y,z) = q_asym s(y+1,z) f(z).
    pub fn reconstruct(&self, r: &RateTable) -> bool {
        let k = self.k;
        let s = |y: u32, z: u32| self.s.get(&(y, z)).cloned().unwrap_or_else(TMono::zero);
        for y in 0..=k {
            for z in 0..=k {
                let fy = self.f[y as usize].clone();
                let fz = self.f[z as usize].clone();
                let p = TMono::rational(self.p_asym.clone()).mul(&s(y, z + 1)).mul(&fy);
                let q = TMono::rational(self.q_asym.clone()).mul(&s(y + 1, z)).mul(&fz);
                if !p.eq_with(&TMono::rational(r.p(y, z).clone()), &self.t_squared)
                    || !q.eq_with(&TMono::rational(r.q(y, z).clone()), &self.t_squared)
                {
                    return false;
                }
            }
        }
        true
    }
}

/// Derives p_asym, q_asym, q~, t^2, f and s from a validated table.
pub fn derive_params(r: &RateTable) -> Result<BlockingParams> {
    let report = validate(r);
    if !report.accepted {
        let msg = report.violations.iter().map(|v| format!("{}: {}", v.axiom, v.witness)).collect::<Vec<_>>();
        return Err(Error::InvalidRates(msg.join("; ")));
    }
    let (p10, q01) = (r.p(1, 0).clone(), r.q(0, 1).clone());
    let sum = &p10 + &q01;
    let p_asym = &p10 / &sum;
    let q_asym = &q01 / &sum;
    let qtilde = &q01 / &p10;
    let k = r.k;
    let mut s = BTreeMap::new();
    let (t_squared, f) = if k == 2 {
        let t2 = &p10 * r.q(0, 2) / (&q01 * r.p(1, 1));
        let f = vec![TMono::zero(), TMono::new(Q::one(), -1), TMono::new(Q::one(), 1)];
        s.insert((1, 1), TMono::new(sum.clone(), 1));
        s.insert((1, 2), TMono::new(r.p(1, 1) * &sum / &p10, 1));
        s.insert((2, 1), TMono::new(r.p(2, 0) * &sum / &p10, -1));
        s.insert((2, 2), TMono::new(r.p(2, 1) * &sum / &p10, -1));
        (t2, f)
    } else {
        let mut f = vec![TMono::zero()];
        f.extend((1..=k).map(|_| TMono::rational(Q::one())));
        for y in 1..=k {
            for z in 1..=k {
                s.insert((y, z), TMono::rational(sum.clone()));
            }
        }
        (Q::one(), f)
    };
    let t = rational_sqrt(&t_squared);
    Ok(BlockingParams { k, p_asym, q_asym, qtilde, t_squared, t, f, s, c: 0.0 })
}

/// Unnormalized marginal weight as an exact t-monomial: (p_asym/q_asym)^((i-c)z) / f(z)!.
pub fn marginal_weight_mono(i: i64, z: u32, params: &BlockingParams, c: i64) -> TMono {
    let ratio = &params.p_asym / &params.q_asym;
    TMono::rational(pow(&ratio, (i - c) * z as i64)).mul(&params.inv_f_factorial(z))
}

/// Unnormalized marginal weight as an exact rational (needs rational t).
pub fn marginal_weight(i: i64, z: u32, params: &BlockingParams, c: i64) -> Result<Q> {
    let mono = marginal_weight_mono(i, z, params, c);
    match &params.t {
        Some(t) => Ok(mono.value(t)),
        None if mono.t_exp == 0 => Ok(mono.coeff),
        None => Err(Error::Parameter("t is irrational; use marginal_weight_mono".into())),
    }
}

/// Normalized marginal probabilities (numeric, real c) over z = 0..=k.
pub fn marginal_vector(i: i64, params: &BlockingParams, c: f64) -> Vec<f64> {
    let ln_ratio = (params.p_asym.to_f64().unwrap() / params.q_asym.to_f64().unwrap()).ln();
    let ln_t = params.t_f64().ln();
    let logs: Vec<f64> = (0..=params.k)
        .map(|z| {
            let m = params.inv_f_factorial(z);
            (i as f64 - c) * z as f64 * ln_ratio + m.coeff.to_f64().unwrap().ln() + m.t_exp as f64 * ln_t
        })
        .collect();
    let max = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
    let z: f64 = w.iter().sum();
    w.into_iter().map(|x| x / z).collect()
}

/// Normalized marginal probability of occupancy z at site i.
pub fn marginal(i: i64, z: u32, params: &BlockingParams, c: f64) -> f64 {
    marginal_vector(i, params, c)[z as usize]
}

fn q_integer(n: u32, q: &Q) -> Q {
    (0..n).map(|j| pow(q, 2 * j as i64 + 1 - n as i64)).fold(Q::zero(), |a, b| a + b)
}

fn check_q(q: &Q) -> Result<()> {
    if q.is_positive() && *q < Q::one() {
        Ok(())
    } else {
        Err(Error::Parameter(format!("need 0 < q < 1, got {}", format_rational(q))))
    }
}

/// ASEP(q,1): p(a,b) = q^(a-b-3)[a][2-b], q(a,b) = q^(a-b+3)[2-a][b].
pub fn asep_q1_table(q: &Q) -> Result<RateTable> {
    check_q(q)?;
    let mut r = RateTable::zeros(2);
    for a in 0..=2u32 {
        for b in 0..=2u32 {
            let d = a as i64 - b as i64;
            r.p[a as usize][b as usize] = pow(q, d - 3) * q_integer(a, q) * q_integer(2 - b, q);
            r.q[a as usize][b as usize] = pow(q, d + 3) * q_integer(2 - a, q) * q_integer(b, q);
        }
    }
    Ok(r)
}

/// The 3-state model with interaction rates gamma (right) and gamma' (left).
pub fn three_state_table_general(q: &Q, gamma: &Q, gamma_prime: &Q) -> Result<RateTable> {
    check_q(q)?;
    for g in [gamma, gamma_prime] {
        if !g.is_positive() || *g > Q::one() {
            return Err(Error::Parameter(format!("need 0 < gamma <= 1, got {}", format_rational(g))));
        }
    }
    let mut r = RateTable::zeros(2);
    r.p[1][0] = Q::one();
    r.p[1][1] = gamma.clone();
    r.p[2][0] = rat(2, 1);
    r.p[2][1] = Q::one();
    r.q[0][1] = q.clone();
    r.q[0][2] = q * rat(2, 1);
    r.q[1][1] = gamma_prime * q;
    r.q[1][2] = q.clone();
    Ok(r)
}

pub fn three_state_table(q: &Q, gamma: &Q) -> Result<RateTable> {
    three_state_table_general(q, gamma, gamma)
}

/// k-exclusion: p(y,z) = 1{y != 0}1{z != k}, q(y,z) = q 1{z != 0}1{y != k}.
pub fn k_exclusion_table(q: &Q, k: u32) -> Result<RateTable> {
    check_q(q)?;
    if k == 0 {
        return Err(Error::Parameter("k must be at least 1".into()));
    }
    let mut r = RateTable::zeros(k);
    for y in 0..=k {
        for z in 0..=k {
            if y != 0 && z != k {
                r.p[y as usize][z as usize] = Q::one();
            }
            if z != 0 && y != k {
                r.q[y as usize][z as usize] = q.clone();
            }
        }
    }
    Ok(r)
}

/// Probability under the product measure that N = -m mod k.
///
/// Sites are added outward from c until the remaining factors are within
/// `tol` of 1. k = 2 uses the real parity product; larger k uses the
/// character sum over k-th roots of unity.
pub fn class_probability(params: &BlockingParams, c: f64, m: u32, k: u32, tol: f64) -> Result<f64> {
    if tol <= 0.0 || k == 0 || m >= k {
        return Err(Error::Parameter("need tol > 0 and 0 <= m < k".into()));
    }
    const BUDGET: usize = 1_000_000;
    let centre = c.floor() as i64;
    // Per-site factors E[zeta^(-r eta_i)] for r = 0..k-1.
    let site = |i: i64| -> (Vec<Complex64>, f64) {
        let mu = marginal_vector(i, params, c);
        let ground = if (i as f64) <= c { 0 } else { k as usize };
        let off_ground = 1.0 - mu[ground];
        let f = (0..k)
            .map(|r| {
                mu.iter()
                    .enumerate()
                    .map(|(j, p)| {
                        Complex64::from_polar(*p, -2.0 * std::f64::consts::PI * (r as f64) * (j as f64) / k as f64)
                    })
                    .sum()
            })
            .collect();
        (f, off_ground)
    };
    let mut prod = vec![Complex64::new(1.0, 0.0); k as usize];
    let mut count = 0usize;
    for dir in [1i64, -1] {
        let mut i = if dir == 1 { centre + 1 } else { centre };
        let mut quiet = 0;
        loop {
            let (f, off) = site(i);
            for r in 0..k as usize {
                prod[r] *= f[r];
            }
            count += 1;
            if count > BUDGET {
                return Err(Error::NonConvergence(BUDGET));
            }
            quiet = if off < tol * 1e-3 { quiet + 1 } else { 0 };
            if quiet >= 8 {
                break;
            }
            i += dir;
        }
    }
    let value = if k == 2 {
        let parity = prod[1].re;
        if m == 0 {
            (1.0 + parity) / 2.0
        } else {
            (1.0 - parity) / 2.0
        }
    } else {
        // N = -sum eta_i mod k, so N = -m iff sum eta_i = m.
        let s: Complex64 = (0..k as usize)
            .map(|r| {
                Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * (r as f64) * (m as f64) / k as f64) * prod[r]
            })
            .sum();
        s.re / k as f64
    };
    Ok(value.clamp(0.0, 1.0))
}
