//! Exact truncated series in q~ and t, Laurent in z, plus substitution
//! into a single Laurent variable q.
//!
//! Truncation is by q~-degree only. Binary operations use the smaller of
//! the two orders. Coefficients are arbitrary-precision integers.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A monomial q~^dq t^dt z^dz. Ordering is lexicographic on (dq, dt, dz).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Monomial {
    pub dq: u32,
    pub dt: u32,
    pub dz: i32,
}

impl Monomial {
    pub const ONE: Monomial = Monomial { dq: 0, dt: 0, dz: 0 };

    pub fn new(dq: u32, dt: u32, dz: i32) -> Self {
        Monomial { dq, dt, dz }
    }

    fn times(self, other: Monomial) -> Monomial {
        Monomial { dq: self.dq + other.dq, dt: self.dt + other.dt, dz: self.dz + other.dz }
    }
}

/// A formal series truncated at q~-order `order` (terms with dq <= order are exact).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncatedSeries {
    order: u32,
    terms: BTreeMap<Monomial, BigInt>,
}

/// One serialized term: `{dq, dt, dz, coeff}` with the coefficient as a decimal string.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermRecord {
    pub dq: u32,
    pub dt: u32,
    pub dz: i32,
    pub coeff: String,
}

impl TruncatedSeries {
    pub fn zero(order: u32) -> Self {
        TruncatedSeries { order, terms: BTreeMap::new() }
    }

    pub fn one(order: u32) -> Self {
        Self::monomial(order, Monomial::ONE, BigInt::one())
    }

    /// A single term, dropped if it lies beyond the order.
    pub fn monomial(order: u32, m: Monomial, coeff: impl Into<BigInt>) -> Self {
        let mut s = Self::zero(order);
        s.add_term(m, coeff.into());
        s
    }

    /// Builds a series from (monomial, coefficient) pairs, summing repeats.
    pub fn from_terms<I, C>(order: u32, terms: I) -> Self
    where
        I: IntoIterator<Item = (Monomial, C)>,
        C: Into<BigInt>,
    {
        let mut s = Self::zero(order);
        for (m, c) in terms {
            s.add_term(m, c.into());
        }
        s
    }

    /// A univariate series in q~ from coefficients c_0, c_1, ...
    pub fn from_q_coeffs<C: Into<BigInt> + Clone>(order: u32, coeffs: &[C]) -> Self {
        Self::from_terms(
            order,
            coeffs.iter().enumerate().map(|(n, c)| (Monomial::new(n as u32, 0, 0), c.clone().into())),
        )
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, BigInt> {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: Monomial) -> BigInt {
        self.terms.get(&m).cloned().unwrap_or_else(BigInt::zero)
    }

    /// Adds `c` to the coefficient of `m`, keeping zero coefficients out of the map.
    pub fn add_term(&mut self, m: Monomial, c: BigInt) {
        if m.dq > self.order || c.is_zero() {
            return;
        }
        let entry = self.terms.entry(m).or_insert_with(BigInt::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&m);
        }
    }

    /// Drops terms beyond `order` (which may only lower the order).
    pub fn truncate(&self, order: u32) -> Self {
        let order = order.min(self.order);
        TruncatedSeries {
            order,
            terms: self.terms.iter().filter(|(m, _)| m.dq <= order).map(|(m, c)| (*m, c.clone())).collect(),
        }
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        if c.is_zero() {
            return Self::zero(self.order);
        }
        TruncatedSeries { order: self.order, terms: self.terms.iter().map(|(m, v)| (*m, v * c)).collect() }
    }

    /// Multiplies by the monomial `m` (shifting exponents), truncating at the current order.
    pub fn shift(&self, m: Monomial) -> Self {
        let mut s = Self::zero(self.order);
        for (k, v) in &self.terms {
            s.add_term(k.times(m), v.clone());
        }
        s
    }

    /// Multiplies by q~^d, raising the exponent of every term.
    pub fn shift_q(&self, d: u32) -> Self {
        self.shift(Monomial::new(d, 0, 0))
    }

    /// The sub-series with dz = k, re-expressed with dz = 0.
    pub fn coeff_z(&self, k: i32) -> Self {
        TruncatedSeries {
            order: self.order,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.dz == k)
                .map(|(m, c)| (Monomial::new(m.dq, m.dt, 0), c.clone()))
                .collect(),
        }
    }

    /// The set of z-exponents present.
    pub fn z_support(&self) -> std::collections::BTreeSet<i32> {
        self.terms.keys().map(|m| m.dz).collect()
    }

    /// Replaces t by the integer `value` (the result is t-free).
    pub fn specialize_t(&self, value: i64) -> Self {
        let v = BigInt::from(value);
        let mut s = Self::zero(self.order);
        for (m, c) in &self.terms {
            s.add_term(Monomial::new(m.dq, 0, m.dz), c * num_traits::pow(v.clone(), m.dt as usize));
        }
        s
    }

    /// Replaces t^dt by t^(dt/2) when every t-exponent is even.
    pub fn halve_t(&self) -> Option<Self> {
        let mut s = Self::zero(self.order);
        for (m, c) in &self.terms {
            if m.dt % 2 != 0 {
                return None;
            }
            s.add_term(Monomial::new(m.dq, m.dt / 2, m.dz), c.clone());
        }
        Some(s)
    }

    /// Coefficients of a z-free, t-free series as a vector indexed by q~-degree.
    pub fn q_coeffs(&self) -> Vec<BigInt> {
        let mut v = vec![BigInt::zero(); self.order as usize + 1];
        for (m, c) in &self.terms {
            if m.dt == 0 && m.dz == 0 {
                v[m.dq as usize] += c;
            }
        }
        v
    }

    /// Multiplicative inverse, defined when the q~^0 part is exactly 1.
    pub fn inverse(&self) -> Option<Self> {
        let q0: Vec<_> = self.terms.iter().filter(|(m, _)| m.dq == 0).collect();
        if q0.len() != 1 || *q0[0].0 != Monomial::ONE || !q0[0].1.is_one() {
            return None;
        }
        // 1/(1 - u) = sum u^j where u = 1 - self has positive q~-degree.
        let u = &Self::one(self.order) - self;
        let mut result = Self::one(self.order);
        let mut power = Self::one(self.order);
        for _ in 0..self.order {
            power = &power * &u;
            if power.is_zero() {
                break;
            }
            result = &result + &power;
        }
        Some(result)
    }

    /// Canonically ordered records for JSON output.
    pub fn to_records(&self) -> Vec<TermRecord> {
        self.terms.iter().map(|(m, c)| TermRecord { dq: m.dq, dt: m.dt, dz: m.dz, coeff: c.to_string() }).collect()
    }

    pub fn from_records(order: u32, records: &[TermRecord]) -> Result<Self> {
        let mut s = Self::zero(order);
        for r in records {
            let c: BigInt = r.coeff.parse().map_err(|_| Error::Parse(format!("bad coefficient {:?}", r.coeff)))?;
            s.add_term(Monomial::new(r.dq, r.dt, r.dz), c);
        }
        Ok(s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_records()).expect("records serialize")
    }

    /// First monomial (canonical order) where the two series differ, with both coefficients.
    pub fn first_difference(&self, other: &Self) -> Option<(Monomial, BigInt, BigInt)> {
        let order = self.order.min(other.order);
        let keys: std::collections::BTreeSet<Monomial> =
            self.terms.keys().chain(other.terms.keys()).filter(|m| m.dq <= order).copied().collect();
        keys.into_iter().find_map(|m| {
            let (a, b) = (self.coeff(m), other.coeff(m));
            (a != b).then_some((m, a, b))
        })
    }
}

impl Add for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn add(self, rhs: &TruncatedSeries) -> TruncatedSeries {
        let mut s = self.truncate(self.order.min(rhs.order));
        for (m, c) in &rhs.terms {
            s.add_term(*m, c.clone());
        }
        s
    }
}

impl Neg for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn neg(self) -> TruncatedSeries {
        TruncatedSeries { order: self.order, terms: self.terms.iter().map(|(m, c)| (*m, -c)).collect() }
    }
}

impl Sub for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn sub(self, rhs: &TruncatedSeries) -> TruncatedSeries {
        self + &(-rhs)
    }
}

impl Mul for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn mul(self, rhs: &TruncatedSeries) -> TruncatedSeries {
        let order = self.order.min(rhs.order);
        let mut s = TruncatedSeries::zero(order);
        for (ma, ca) in &self.terms {
            if ma.dq > order {
                continue;
            }
            for (mb, cb) in rhs.terms.range(..=Monomial::new(order - ma.dq, u32::MAX, i32::MAX)) {
                s.add_term(ma.times(*mb), ca * cb);
            }
        }
        s
    }
}

impl fmt::Display for TruncatedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0 + O(q~^{})", self.order + 1);
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            let sign = if c.is_negative() {
                " - "
            } else if i > 0 {
                " + "
            } else {
                ""
            };
            let sign = if i == 0 && c.is_negative() { "-" } else { sign };
            write!(f, "{}{}", sign, c.abs())?;
            if m.dq > 0 {
                write!(f, "*q~^{}", m.dq)?;
            }
            if m.dt > 0 {
                write!(f, "*t^{}", m.dt)?;
            }
            if m.dz != 0 {
                write!(f, "*z^{}", m.dz)?;
            }
        }
        write!(f, " + O(q~^{})", self.order + 1)
    }
}

/// One term template of a factor family: coeff * q~^(slope*i + offset) * t^dt * z^dz.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TermTemplate {
    pub coeff: BigInt,
    pub slope: u32,
    pub offset: i64,
    pub dt: u32,
    pub dz: i32,
}

impl TermTemplate {
    pub fn new(coeff: i64, slope: u32, offset: i64, dt: u32, dz: i32) -> Self {
        TermTemplate { coeff: BigInt::from(coeff), slope, offset, dt, dz }
    }

    fn is_unit(&self) -> bool {
        self.slope == 0 && self.offset == 0 && self.dt == 0 && self.dz == 0
    }

    fn q_degree(&self, i: u32) -> i64 {
        self.slope as i64 * i as i64 + self.offset
    }
}

/// A family of polynomial factors indexed by i >= 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorFamily {
    pub terms: Vec<TermTemplate>,
}

/// A formal infinite product: the product over all families and all i >= 1.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FactorSpec {
    pub families: Vec<FactorFamily>,
}

impl FactorSpec {
    pub fn new() -> Self {
        FactorSpec::default()
    }

    pub fn with(mut self, terms: Vec<TermTemplate>) -> Self {
        self.families.push(FactorFamily { terms });
        self
    }

    /// The k=2 family with the sign of t: (1 ± t z q~^i + z^2 q~^2i)(1 ± t z^-1 q~^(i-1) + z^-2 q~^(2i-2)).
    pub fn k2(sign: i64) -> Self {
        FactorSpec::new()
            .with(vec![
                TermTemplate::new(1, 0, 0, 0, 0),
                TermTemplate::new(sign, 1, 0, 1, 1),
                TermTemplate::new(1, 2, 0, 0, 2),
            ])
            .with(vec![
                TermTemplate::new(1, 0, 0, 0, 0),
                TermTemplate::new(sign, 1, -1, 1, -1),
                TermTemplate::new(1, 2, -2, 0, -2),
            ])
    }

    /// The k-exclusion family: (sum_a q^(a i) z^a)(sum_a q^(a(i-1)) z^-a), a = 0..k.
    pub fn k_exclusion(k: u32) -> Self {
        let pos = (0..=k).map(|a| TermTemplate::new(1, a, 0, 0, a as i32)).collect();
        let neg = (0..=k).map(|a| TermTemplate::new(1, a, -(a as i64), 0, -(a as i32))).collect();
        FactorSpec::new().with(pos).with(neg)
    }

    /// (1 - q~^i)(1 + q~^i z)(1 + q~^(i-1) z^-1).
    pub fn jacobi_shifted() -> Self {
        FactorSpec::new()
            .with(vec![TermTemplate::new(1, 0, 0, 0, 0), TermTemplate::new(-1, 1, 0, 0, 0)])
            .with(vec![TermTemplate::new(1, 0, 0, 0, 0), TermTemplate::new(1, 1, 0, 0, 1)])
            .with(vec![TermTemplate::new(1, 0, 0, 0, 0), TermTemplate::new(1, 1, -1, 0, -1)])
    }

    /// (1 - q^2i)(1 + q^(2i-1) z)(1 + q^(2i-1) z^-1).
    pub fn jacobi_classical() -> Self {
        FactorSpec::new()
            .with(vec![TermTemplate::new(1, 0, 0, 0, 0), TermTemplate::new(-1, 2, 0, 0, 0)])
            .with(Self::odd_half(1, 1))
            .with(Self::odd_half(1, -1))
    }

    /// (1 + sign q^(2i-1) z)(1 + sign q^(2i-1) z^-1).
    pub fn odd_pair(sign: i64) -> Self {
        FactorSpec::new().with(Self::odd_half(sign, 1)).with(Self::odd_half(sign, -1))
    }

    fn odd_half(sign: i64, dz: i32) -> Vec<TermTemplate> {
        vec![TermTemplate::new(1, 0, 0, 0, 0), TermTemplate::new(sign, 2, -1, 0, dz)]
    }

    /// Concatenates the families of two specs (product of the two products).
    pub fn times(mut self, other: &FactorSpec) -> Self {
        self.families.extend(other.families.iter().cloned());
        self
    }

    /// Checks that omitted factors (i > order + 1) are 1 modulo q~^(order+1).
    pub fn check_convergence(&self, order: u32) -> Result<()> {
        for (idx, fam) in self.families.iter().enumerate() {
            let units: Vec<_> = fam.terms.iter().filter(|t| t.is_unit()).collect();
            let unit_sum: BigInt = units.iter().map(|t| t.coeff.clone()).sum();
            if !unit_sum.is_one() {
                return Err(Error::DivergentProduct {
                    family: idx,
                    reason: format!("constant term is {unit_sum}, not 1"),
                });
            }
            for t in fam.terms.iter().filter(|t| !t.is_unit()) {
                if t.slope == 0 {
                    return Err(Error::DivergentProduct {
                        family: idx,
                        reason: "a non-constant term has q~-degree independent of i".into(),
                    });
                }
                if t.q_degree(1) < 0 {
                    return Err(Error::DivergentProduct { family: idx, reason: "negative q~-degree at i = 1".into() });
                }
                // Degree growth: slope*i + offset >= i - 1 for every omitted i >= order + 2.
                let i = order as i64 + 2;
                if (t.slope as i64 - 1) * i + t.offset < -1 {
                    return Err(Error::DivergentProduct {
                        family: idx,
                        reason: "non-constant terms grow slower than q~^(i-1)".into(),
                    });
                }
            }
        }
        Ok(())
    }

    /// The i-th factor of one family as a truncated series.
    pub fn factor(&self, family: usize, i: u32, order: u32) -> TruncatedSeries {
        TruncatedSeries::from_terms(
            order,
            self.families[family]
                .terms
                .iter()
                .map(|t| (Monomial::new(t.q_degree(i) as u32, t.dt, t.dz), t.coeff.clone())),
        )
    }
}

/// The formal infinite product of `spec`, exact to q~-order `order`.
pub fn product_rhs(spec: &FactorSpec, order: u32) -> Result<TruncatedSeries> {
    spec.check_convergence(order)?;
    let mut acc = TruncatedSeries::one(order);
    for i in 1..=order + 1 {
        for f in 0..spec.families.len() {
            acc = &acc * &spec.factor(f, i, order);
        }
    }
    Ok(acc)
}

/// A finite Laurent polynomial in q with integer coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LaurentPoly {
    terms: BTreeMap<i64, BigInt>,
}

impl LaurentPoly {
    pub fn from_terms<C: Into<BigInt>>(terms: impl IntoIterator<Item = (i64, C)>) -> Self {
        let mut p = LaurentPoly::default();
        for (e, c) in terms {
            *p.terms.entry(e).or_insert_with(BigInt::zero) += c.into();
        }
        p.terms.retain(|_, c| !c.is_zero());
        p
    }

    pub fn constant(c: i64) -> Self {
        Self::from_terms([(0, c)])
    }

    /// The q-integer [n]_q = q^(1-n) + q^(3-n) + ... + q^(n-1).
    pub fn q_integer(n: u32) -> Self {
        Self::from_terms((0..n).map(|j| (2 * j as i64 + 1 - n as i64, 1)))
    }

    pub fn min_exp(&self) -> i64 {
        self.terms.keys().next().copied().unwrap_or(0)
    }

    fn mul(&self, other: &LaurentPoly, cap: i64) -> LaurentPoly {
        let mut out = BTreeMap::new();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                if ea + eb <= cap {
                    *out.entry(ea + eb).or_insert_with(BigInt::zero) += ca * cb;
                }
            }
        }
        out.retain(|_, c: &mut BigInt| !c.is_zero());
        LaurentPoly { terms: out }
    }
}

/// An exact Laurent series in q, known for exponents up to `hi`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LaurentQSeries {
    lo: i64,
    hi: i64,
    coeffs: Vec<BigInt>,
}

impl LaurentQSeries {
    /// Builds a canonical series from coefficients starting at exponent `lo`.
    pub fn new(lo: i64, hi: i64, coeffs: Vec<BigInt>) -> Self {
        let mut map = BTreeMap::new();
        for (j, c) in coeffs.into_iter().enumerate() {
            let e = lo + j as i64;
            if e <= hi && !c.is_zero() {
                map.insert(e, c);
            }
        }
        Self::from_map(map, hi)
    }

    fn from_map(map: BTreeMap<i64, BigInt>, hi: i64) -> Self {
        let lo = match map.keys().next() {
            Some(&e) if e <= hi => e,
            _ => hi.min(0),
        };
        let coeffs = (lo..=hi).map(|e| map.get(&e).cloned().unwrap_or_else(BigInt::zero)).collect();
        LaurentQSeries { lo, hi, coeffs }
    }

    pub fn from_ints(lo: i64, hi: i64, coeffs: &[i64]) -> Self {
        Self::new(lo, hi, coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    /// A finite polynomial viewed as a series exact to q^hi.
    pub fn from_poly(p: &LaurentPoly, hi: i64) -> Self {
        Self::from_map(p.terms.iter().filter(|(e, _)| **e <= hi).map(|(e, c)| (*e, c.clone())).collect(), hi)
    }

    pub fn one(hi: i64) -> Self {
        Self::from_poly(&LaurentPoly::constant(1), hi)
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.hi
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Coefficient of q^e; `None` above the exact range.
    pub fn coeff(&self, e: i64) -> Option<BigInt> {
        if e > self.hi {
            None
        } else if e < self.lo {
            Some(BigInt::zero())
        } else {
            Some(self.coeffs[(e - self.lo) as usize].clone())
        }
    }

    /// Coefficients for exponents 0..=n (requires n <= hi).
    pub fn coeffs_from_zero(&self, n: i64) -> Vec<BigInt> {
        (0..=n).map(|e| self.coeff(e).expect("exponent within exact range")).collect()
    }

    fn map(&self) -> BTreeMap<i64, BigInt> {
        (self.lo..=self.hi).zip(self.coeffs.iter()).filter(|(_, c)| !c.is_zero()).map(|(e, c)| (e, c.clone())).collect()
    }

    pub fn truncate(&self, hi: i64) -> Self {
        Self::from_map(self.map(), hi.min(self.hi))
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        Self::from_map(self.map().into_iter().map(|(e, v)| (e, v * c)).collect(), self.hi)
    }

    /// Multiplies by q^d.
    pub fn shift(&self, d: i64) -> Self {
        Self::from_map(self.map().into_iter().map(|(e, v)| (e + d, v)).collect(), self.hi + d)
    }

    pub fn add(&self, other: &Self) -> Self {
        let hi = self.hi.min(other.hi);
        let mut m = self.map();
        for (e, c) in other.map() {
            *m.entry(e).or_insert_with(BigInt::zero) += c;
        }
        m.retain(|e, c| *e <= hi && !c.is_zero());
        Self::from_map(m, hi)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&BigInt::from(-1)))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let a = self.map();
        let b = other.map();
        let lo_a = a.keys().next().copied().unwrap_or(self.hi);
        let lo_b = b.keys().next().copied().unwrap_or(other.hi);
        let hi = (lo_a + other.hi).min(lo_b + self.hi);
        let mut m = BTreeMap::new();
        for (ea, ca) in &a {
            for (eb, cb) in &b {
                if ea + eb <= hi {
                    *m.entry(ea + eb).or_insert_with(BigInt::zero) += ca * cb;
                }
            }
        }
        m.retain(|_, c: &mut BigInt| !c.is_zero());
        Self::from_map(m, hi)
    }

    /// CSV rows "exponent,coefficient" for every exponent in lo..=hi.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(vec![]);
        w.write_record(["exponent", "coefficient"]).expect("in-memory write");
        for (e, c) in (self.lo..=self.hi).zip(self.coeffs.iter()) {
            w.write_record([e.to_string(), c.to_string()]).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
    }
}

/// Substitutes q~ -> q^alpha and t -> T(q) in a z-free series, exact to q^target.
///
/// `bound` declares dt <= bound*dq + 1 for every term; it is checked per term.
pub fn substitute(a: &TruncatedSeries, alpha: u32, t: &LaurentPoly, bound: u32, target: i64) -> Result<LaurentQSeries> {
    let neg = (-t.min_exp()).max(0);
    // Smallest q-exponent reachable by an omitted term (dq = order + 1).
    let next = a.order() as i64 + 1;
    let slope = alpha as i64 - neg * bound as i64;
    let exact_hi = if neg == 0 {
        alpha as i64 * next - 1
    } else if slope > 0 {
        slope * next - neg - 1
    } else {
        i64::MIN
    };
    if target > exact_hi {
        return Err(Error::InsufficientOrder { have: a.order(), want: target });
    }
    let max_dt = a.terms().keys().map(|m| m.dt).max().unwrap_or(0);
    let mut powers = vec![LaurentPoly::constant(1)];
    for _ in 0..max_dt {
        let next = powers.last().unwrap().mul(t, i64::MAX);
        powers.push(next);
    }
    let mut out: BTreeMap<i64, BigInt> = BTreeMap::new();
    for (m, c) in a.terms() {
        if m.dz != 0 {
            return Err(Error::NotZFree(m.dz));
        }
        if m.dt > bound * m.dq + 1 {
            return Err(Error::SubstitutionBound { dq: m.dq, dt: m.dt, bound });
        }
        let base = alpha as i64 * m.dq as i64;
        for (e, pc) in &powers[m.dt as usize].terms {
            if base + e <= target {
                *out.entry(base + e).or_insert_with(BigInt::zero) += c * pc;
            }
        }
    }
    out.retain(|_, c| !c.is_zero());
    Ok(LaurentQSeries::from_map(out, target))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(dq: u32) -> Monomial {
        Monomial::new(dq, 0, 0)
    }

    #[test]
    fn add_cancels() {
        let a = TruncatedSeries::from_terms(5, [(q(0), 1), (q(1), 1)]);
        let b = TruncatedSeries::from_terms(5, [(q(0), 1), (q(1), -1)]);
        assert_eq!(&a + &b, TruncatedSeries::from_terms(5, [(q(0), 2)]));
        assert_eq!(&a + &TruncatedSeries::zero(5), a);
    }

    #[test]
    fn doubling() {
        let a = TruncatedSeries::monomial(3, Monomial::new(1, 2, 0), 1);
        assert_eq!((&a + &a).coeff(Monomial::new(1, 2, 0)), BigInt::from(2));
    }

    #[test]
    fn mul_small_cases() {
        let a = TruncatedSeries::from_terms(5, [(q(0), 1), (q(1), 1)]);
        let b = TruncatedSeries::from_terms(5, [(q(0), 1), (q(1), -1)]);
        assert_eq!(&a * &b, TruncatedSeries::from_terms(5, [(q(0), 1), (q(2), -1)]));

        let c = TruncatedSeries::from_terms(5, [(q(0), 1), (Monomial::new(1, 1, 1), 1)]);
        let d = TruncatedSeries::from_terms(5, [(q(0), 1), (Monomial::new(0, 1, -1), 1)]);
        let expect = TruncatedSeries::from_terms(
            5,
            [(q(0), 1), (Monomial::new(0, 1, -1), 1), (Monomial::new(1, 1, 1), 1), (Monomial::new(1, 2, 0), 1)],
        );
        assert_eq!(&c * &d, expect);
    }

    #[test]
    fn three_factor_z1_coefficient() {
        let mut p = TruncatedSeries::one(6);
        for i in 1..=3 {
            p = &p * &TruncatedSeries::from_terms(6, [(q(0), 1), (Monomial::new(i, 1, 1), 1)]);
        }
        let expect = TruncatedSeries::from_terms(
            6,
            [(Monomial::new(1, 1, 0), 1), (Monomial::new(2, 1, 0), 1), (Monomial::new(3, 1, 0), 1)],
        );
        assert_eq!(p.coeff_z(1), expect);
    }

    #[test]
    fn k2_family_at_order_zero() {
        let p = product_rhs(&FactorSpec::k2(1), 0).unwrap();
        let expect =
            TruncatedSeries::from_terms(0, [(q(0), 1), (Monomial::new(0, 1, -1), 1), (Monomial::new(0, 0, -2), 1)]);
        assert_eq!(p, expect);
    }

    #[test]
    fn jacobi_constant_term() {
        let p = product_rhs(&FactorSpec::jacobi_shifted(), 4).unwrap();
        assert_eq!(p.coeff(Monomial::ONE), BigInt::one());
    }

    #[test]
    fn k3_family_lowest_negative_power() {
        let p = product_rhs(&FactorSpec::k_exclusion(3), 2).unwrap();
        assert_eq!(p.coeff(Monomial::new(0, 0, -3)), BigInt::one());
    }

    #[test]
    fn divergent_family_rejected() {
        let bad = FactorSpec::new().with(vec![TermTemplate::new(1, 0, 0, 0, 0), TermTemplate::new(1, 0, 1, 0, 1)]);
        assert!(matches!(product_rhs(&bad, 3), Err(Error::DivergentProduct { .. })));
        let slow = FactorSpec::new().with(vec![TermTemplate::new(1, 0, 0, 0, 0), TermTemplate::new(1, 1, -2, 0, 1)]);
        assert!(product_rhs(&slow, 3).is_err());
        let non_unit = FactorSpec::new().with(vec![TermTemplate::new(2, 0, 0, 0, 0)]);
        assert!(product_rhs(&non_unit, 3).is_err());
    }

    #[test]
    fn coeff_z_examples() {
        let a = TruncatedSeries::from_terms(2, [(q(0), 1), (Monomial::new(0, 1, -1), 1), (Monomial::new(0, 0, -2), 1)]);
        assert_eq!(a.coeff_z(-1), TruncatedSeries::monomial(2, Monomial::new(0, 1, 0), 1));
        let mut total = TruncatedSeries::zero(2);
        for k in a.z_support() {
            total = &total + &a.coeff_z(k).shift(Monomial::new(0, 0, k));
        }
        assert_eq!(total, a);
    }

    #[test]
    fn substitute_examples() {
        let two = LaurentPoly::q_integer(2);
        let a = TruncatedSeries::monomial(3, Monomial::new(1, 2, 0), 1);
        let s = substitute(&a, 4, &two, 2, 6).unwrap();
        assert_eq!(s, LaurentQSeries::from_ints(2, 6, &[1, 0, 2, 0, 1]));

        let b = TruncatedSeries::monomial(3, Monomial::new(2, 2, 0), 1);
        let s = substitute(&b, 1, &LaurentPoly::constant(2), 2, 3).unwrap();
        assert_eq!(s, LaurentQSeries::from_ints(2, 3, &[4, 0]));
    }

    #[test]
    fn substitute_rejects_bound_violation_and_short_order() {
        let a = TruncatedSeries::monomial(3, Monomial::new(1, 4, 0), 1);
        assert!(matches!(substitute(&a, 4, &LaurentPoly::q_integer(2), 2, 4), Err(Error::SubstitutionBound { .. })));
        let b = TruncatedSeries::one(1);
        assert!(matches!(substitute(&b, 4, &LaurentPoly::q_integer(2), 2, 10), Err(Error::InsufficientOrder { .. })));
    }

    #[test]
    fn inverse_of_one_minus_q() {
        let a = TruncatedSeries::from_terms(6, [(q(0), 1), (q(1), -1)]);
        let inv = a.inverse().unwrap();
        assert_eq!(inv.q_coeffs(), vec![BigInt::one(); 7]);
        assert_eq!(&a * &inv, TruncatedSeries::one(6));
    }

    #[test]
    fn json_round_trip_is_canonical() {
        let a = TruncatedSeries::from_terms(4, [(Monomial::new(2, 1, -1), 3), (q(0), 1), (Monomial::new(1, 0, 2), -7)]);
        let json = a.to_json();
        assert_eq!(
            json,
            r#"[{"dq":0,"dt":0,"dz":0,"coeff":"1"},{"dq":1,"dt":0,"dz":2,"coeff":"-7"},{"dq":2,"dt":1,"dz":-1,"coeff":"3"}]"#
        );
        let recs: Vec<TermRecord> = serde_json::from_str(&json).unwrap();
        assert_eq!(TruncatedSeries::from_records(4, &recs).unwrap(), a);
    }

    #[test]
    fn laurent_csv() {
        let s = LaurentQSeries::from_ints(-1, 1, &[2, 0, 5]);
        assert_eq!(s.to_csv(), "exponent,coefficient\n-1,2\n0,0\n1,5\n");
    }

    #[test]
    fn laurent_mul_tracks_exact_range() {
        let a = LaurentQSeries::from_ints(0, 3, &[1, -1]);
        let b = LaurentQSeries::from_ints(0, 3, &[1, 1, 1, 1]);
        assert_eq!(a.mul(&b), LaurentQSeries::from_ints(0, 3, &[1, 0, 0, 0]));
    }
}
