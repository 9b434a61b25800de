//! Both sides of every identity as exact truncated series, compared
//! coefficient by coefficient.
//!
//! Sum sides come from the normalizers with explicit shifts, product sides
//! from `product_rhs`, so the two sides never share a code path.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gfp::gf_enumerated;
use crate::normalizers::{s_even, s_k, s_odd};
use crate::series::{
    product_rhs, substitute, FactorSpec, LaurentPoly, LaurentQSeries, Monomial, TermTemplate, TruncatedSeries,
};

/// First coefficient where the two sides disagree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Discrepancy {
    pub check: String,
    pub dq: i64,
    pub dt: u32,
    pub dz: i32,
    pub lhs: String,
    pub rhs: String,
}

/// Outcome of one identity check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IdentityReport {
    pub id: String,
    pub order: u32,
    pub z_window: u32,
    pub equal: bool,
    /// Number of coefficient-series comparisons performed.
    pub comparisons: usize,
    /// For each z-exponent, how many q-orders past the leading shift were exact.
    pub z_orders: BTreeMap<i32, i64>,
    pub discrepancy: Option<Discrepancy>,
}

impl IdentityReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

struct Checker {
    report: IdentityReport,
}

impl Checker {
    fn new(id: impl Into<String>, order: u32, z_window: u32) -> Self {
        Checker {
            report: IdentityReport {
                id: id.into(),
                order,
                z_window,
                equal: true,
                comparisons: 0,
                z_orders: BTreeMap::new(),
                discrepancy: None,
            },
        }
    }

    fn fail(&mut self, d: Discrepancy) {
        self.report.equal = false;
        if self.report.discrepancy.is_none() {
            self.report.discrepancy = Some(d);
        }
    }

    fn record_z(&mut self, dz: i32, leading: i64) {
        self.report.z_orders.insert(dz, self.report.order as i64 - leading);
    }

    fn series(&mut self, check: &str, dz: i32, lhs: &TruncatedSeries, rhs: &TruncatedSeries) {
        self.report.comparisons += 1;
        if let Some((m, a, b)) = lhs.first_difference(rhs) {
            self.fail(Discrepancy {
                check: check.to_string(),
                dq: m.dq as i64,
                dt: m.dt,
                dz: m.dz + dz,
                lhs: a.to_string(),
                rhs: b.to_string(),
            });
        }
    }

    fn laurent(&mut self, check: &str, dz: i32, lhs: &LaurentQSeries, rhs: &LaurentQSeries, hi: i64) {
        self.report.comparisons += 1;
        let lo = lhs.lo().min(rhs.lo());
        for e in lo..=hi {
            let (a, b) = (lhs.coeff(e), rhs.coeff(e));
            if a != b {
                let show = |c: Option<BigInt>| c.map_or_else(|| "unknown".to_string(), |c| c.to_string());
                self.fail(Discrepancy { check: check.to_string(), dq: e, dt: 0, dz, lhs: show(a), rhs: show(b) });
                return;
            }
        }
    }

    fn list(&mut self, check: &str, got: &[BigInt], want: &[i64]) {
        self.report.comparisons += 1;
        for (e, w) in want.iter().enumerate() {
            let g = got.get(e).cloned();
            if g.as_ref() != Some(&BigInt::from(*w)) {
                self.fail(Discrepancy {
                    check: check.to_string(),
                    dq: e as i64,
                    dt: 0,
                    dz: 0,
                    lhs: g.map_or_else(|| "unknown".to_string(), |c| c.to_string()),
                    rhs: w.to_string(),
                });
                return;
            }
        }
    }

    fn finish(self) -> IdentityReport {
        self.report
    }
}

fn two() -> BigInt {
    BigInt::from(2)
}

/// Splits k' = 2l or 2l + 1 and returns (l, odd).
fn split2(kp: i32) -> (i64, bool) {
    (kp.div_euclid(2) as i64, kp.rem_euclid(2) == 1)
}

/// Leading q~-exponent at z^k' for the k = 2 identities.
fn shift2(kp: i32) -> i64 {
    let (l, odd) = split2(kp);
    if odd {
        (l + 1) * (l + 1)
    } else {
        l * (l + 1)
    }
}

/// Leading q-exponent at z^k' for k-exclusion: k l(l+1)/2 - m l with k' = k l - m.
fn shift_k(k: u32, kp: i32) -> (u32, i64) {
    let k = k as i64;
    let m = (-(kp as i64)).rem_euclid(k);
    let l = (kp as i64 + m) / k;
    (m as u32, k * l * (l + 1) / 2 - m * l)
}

fn shifted(s: &TruncatedSeries, dq: i64, dt: u32) -> TruncatedSeries {
    if dq > s.order() as i64 {
        return TruncatedSeries::zero(s.order());
    }
    s.shift(Monomial::new(dq as u32, dt, 0))
}

/// Largest |k'| whose leading exponent `lead(k')` or `lead(-k')` is at most `order`.
fn natural_window(order: u32, lead: impl Fn(i32) -> i64) -> u32 {
    let mut w = 0u32;
    while lead(w as i32 + 1).min(lead(-(w as i32) - 1)) <= order as i64 {
        w += 1;
    }
    w
}

fn one_minus(slope: u32, offset: i64) -> Vec<TermTemplate> {
    vec![TermTemplate::new(1, 0, 0, 0, 0), TermTemplate::new(-1, slope, offset, 0, 0)]
}

fn one_plus(slope: u32, offset: i64) -> Vec<TermTemplate> {
    vec![TermTemplate::new(1, 0, 0, 0, 0), TermTemplate::new(1, slope, offset, 0, 0)]
}

fn product_of(families: Vec<Vec<TermTemplate>>) -> FactorSpec {
    families.into_iter().fold(FactorSpec::new(), |s, f| s.with(f))
}

/// A z-free, t-free series as a Laurent series in q exact to its order.
fn to_laurent(s: &TruncatedSeries) -> LaurentQSeries {
    LaurentQSeries::new(0, s.order() as i64, s.q_coeffs())
}

/// Main identities for k = 2 at formal q~ and t.
pub fn check_main(order: u32, z_window: u32) -> Result<IdentityReport> {
    let ((se, so), (pp, pm)) = rayon::join(
        || (s_even(order), s_odd(order)),
        || (product_rhs(&FactorSpec::k2(1), order), product_rhs(&FactorSpec::k2(-1), order)),
    );
    let (se, so, pp, pm) = (se?.series, so?.series, pp?, pm?);
    let sum = &pp + &pm;
    let diff = &pp - &pm;
    let mut c = Checker::new("main", order, z_window);
    let w = z_window as i32;
    for kp in -w..=w {
        let (_, odd) = split2(kp);
        let lead = shift2(kp);
        let (lhs, rhs) = if odd {
            (shifted(&so.scale(&two()), lead, 1), diff.coeff_z(kp))
        } else {
            (shifted(&se.scale(&two()), lead, 0), sum.coeff_z(kp))
        };
        c.record_z(kp, lead);
        c.series(if odd { "odd" } else { "even" }, kp, &lhs, &rhs);
    }
    Ok(c.finish())
}

/// f_{D_k,D_k,k'} from enumerated GFPs against the shifted normalizer.
pub fn check_offset_law(k_rep: u32, offset: i64, order: u32) -> Result<IdentityReport> {
    if k_rep == 0 {
        return Err(Error::Parameter("k_rep must be positive".into()));
    }
    let kp = i32::try_from(offset).map_err(|_| Error::Parameter(format!("offset {offset} out of range")))?;
    let mut c = Checker::new(format!("offset-law:{k_rep}:{offset}"), order, offset.unsigned_abs() as u32);
    let f = gf_enumerated(offset, k_rep, order);
    if k_rep == 2 {
        let (_, odd) = split2(kp);
        let lead = shift2(kp);
        let rhs = if odd { shifted(&s_odd(order)?.series, lead, 1) } else { shifted(&s_even(order)?.series, lead, 0) };
        c.record_z(kp, lead);
        c.series("offset-law", kp, &f, &rhs);
    } else {
        let (m, lead) = shift_k(k_rep, kp);
        let rhs = shifted(&s_k(k_rep, m, order)?.series, lead, 0);
        c.record_z(kp, lead);
        c.series("offset-law", kp, &f.specialize_t(1), &rhs);
    }
    Ok(c.finish())
}

/// Jacobi triple product in its classical and shifted forms, and at z = 1.
pub fn check_jacobi(order: u32, z_window: u32) -> Result<IdentityReport> {
    let (shifted_p, classical) = rayon::join(
        || product_rhs(&FactorSpec::jacobi_shifted(), order),
        || product_rhs(&FactorSpec::jacobi_classical(), order),
    );
    let (shifted_p, classical) = (shifted_p?, classical?);
    let mut c = Checker::new("jacobi", order, z_window);
    let w = z_window as i32;
    let power = |e: i64| {
        if e <= order as i64 {
            TruncatedSeries::monomial(order, Monomial::new(e as u32, 0, 0), 1)
        } else {
            TruncatedSeries::zero(order)
        }
    };
    for kp in -w..=w {
        let k = kp as i64;
        c.record_z(kp, k * k);
        c.series("shifted", kp, &power(k * (k + 1) / 2), &shifted_p.coeff_z(kp));
        c.series("classical", kp, &power(k * k), &classical.coeff_z(kp));
    }
    let mut at_one = TruncatedSeries::zero(order);
    for kp in classical.z_support() {
        at_one = &at_one + &classical.coeff_z(kp);
    }
    let mut theta = TruncatedSeries::zero(order);
    let mut k = 0i64;
    while k * k <= order as i64 {
        let times = if k == 0 { 1 } else { 2 };
        theta.add_term(Monomial::new((k * k) as u32, 0, 0), BigInt::from(times));
        k += 1;
    }
    c.series("z=1", 0, &theta, &at_one);
    Ok(c.finish())
}

/// ASEP(q,1): q~ = q^4, t = q + 1/q, to q-order `order`.
pub fn check_asep(order: u32) -> Result<IdentityReport> {
    let target = order as i64;
    let w = natural_window(order, |k| (k as i64) * (k as i64));
    let mut c = Checker::new("asep", order, w);
    let norm_order = order / 2 + 1;
    let t = LaurentPoly::q_integer(2);
    let (se, so) = rayon::join(|| s_even(norm_order), || s_odd(norm_order));
    let se = substitute(&se?.series, 4, &t, 2, target)?;
    let so = substitute(&so?.series, 4, &t, 2, target)?;
    let euler = to_laurent(&product_rhs(&product_of(vec![one_minus(2, 0)]), order)?);
    let one_plus_q2 = LaurentQSeries::from_poly(&LaurentPoly::from_terms([(0, 1), (2, 1)]), target);
    let one = LaurentQSeries::one(target);

    let partitions = [1, 0, 1, 0, 2, 0, 3, 0, 5, 0, 7];
    let n = partitions.len().min(order as usize + 1);
    c.list("S_even(q^4,[2]_q) coefficients", &se.coeffs_from_zero(n as i64 - 1), &partitions[..n]);
    c.laurent("S_even closed form", 0, &se.mul(&euler), &one, target);
    c.laurent("S_odd closed form", 0, &one_plus_q2.mul(&so).mul(&euler), &one, target);

    let (pp, pm) =
        rayon::join(|| product_rhs(&FactorSpec::odd_pair(1), order), || product_rhs(&FactorSpec::odd_pair(-1), order));
    let (pp, pm) = (pp?, pm?);
    let sum = &pp + &pm;
    let diff = &pp - &pm;
    let wi = w as i32;
    for kp in -wi..=wi {
        let lead = kp as i64 * kp as i64;
        c.record_z(kp, lead);
        let (lhs, rhs) = if kp.rem_euclid(2) == 1 {
            (se.scale(&two()).shift(lead), to_laurent(&diff.coeff_z(kp)))
        } else {
            (one_plus_q2.mul(&so).scale(&two()).shift(lead), to_laurent(&sum.coeff_z(kp)))
        };
        c.laurent("specialized identity", kp, &lhs.truncate(target), &rhs, target);
    }

    // The k = 2 products collapse to the odd-pair products under z = w q^-2.
    let k2_order = (order + 2 * w) / 2 + 1;
    for sign in [1i64, -1] {
        let (k2, odd) = rayon::join(
            || product_rhs(&FactorSpec::k2(sign), k2_order),
            || product_rhs(&FactorSpec::odd_pair(sign), order),
        );
        let (k2, odd) = (k2?, odd?);
        for kp in -wi..=wi {
            let sub = substitute(&k2.coeff_z(kp), 4, &t, 2, target + 2 * kp as i64)?.shift(-2 * kp as i64);
            c.laurent("collapsed product", kp, &sub, &to_laurent(&odd.coeff_z(kp)), target);
        }
    }
    Ok(c.finish())
}

/// ((1 + sign q^i z)(1 + sign q^(i-1) z^-1))^2.
fn squared_jacobi(sign: i64) -> FactorSpec {
    let pos = vec![TermTemplate::new(1, 0, 0, 0, 0), TermTemplate::new(sign, 1, 0, 0, 1)];
    let neg = vec![TermTemplate::new(1, 0, 0, 0, 0), TermTemplate::new(sign, 1, -1, 0, -1)];
    product_of(vec![pos.clone(), pos, neg.clone(), neg])
}

/// Three-state model: t = 2.
pub fn check_three_state(order: u32) -> Result<IdentityReport> {
    let w = natural_window(order, shift2);
    let mut c = Checker::new("three-state", order, w);
    let (se, so) = rayon::join(|| s_even(order), || s_odd(order));
    let (se_t, so_t) = (se?.series, so?.series);
    let se = se_t.specialize_t(2);
    let so = so_t.specialize_t(2);

    let n = 9.min(order as usize + 1);
    c.list("S_even(q,2) coefficients", &se.q_coeffs(), &[1, 4, 9, 20, 42, 80, 147, 260, 445][..n]);
    c.list("2 S_odd(q,2) coefficients", &so.scale(&two()).q_coeffs(), &[2, 4, 12, 24, 50, 92, 172, 296, 510][..n]);

    let (qp, qm) = rayon::join(|| product_rhs(&squared_jacobi(1), order), || product_rhs(&squared_jacobi(-1), order));
    let (qp, qm) = (qp?, qm?);
    c.series("t = 2 collapse", 0, &product_rhs(&FactorSpec::k2(1), order)?.specialize_t(2), &qp);
    let sum = &qp + &qm;
    let diff = &qp - &qm;
    let wi = w as i32;
    for kp in -wi..=wi {
        let (_, odd) = split2(kp);
        let lead = shift2(kp);
        c.record_z(kp, lead);
        let (lhs, rhs) = if odd {
            (shifted(&so.scale(&BigInt::from(4)), lead, 0), diff.coeff_z(kp))
        } else {
            (shifted(&se.scale(&two()), lead, 0), sum.coeff_z(kp))
        };
        c.series("specialized identity", kp, &lhs, &rhs);
    }

    let euler = product_rhs(&product_of(vec![one_minus(1, 0)]), order)?;
    let even_num = product_rhs(&product_of(vec![one_plus(2, -1), one_plus(2, -1), one_plus(1, 0)]), order)?;
    let odd_num = product_rhs(&product_of(vec![one_plus(2, 0), one_plus(2, 0), one_plus(1, 0)]), order)?;
    c.series("S_even(q,2) product", 0, &(&se * &euler), &even_num);
    c.series("S_odd(q,2) product", 0, &(&so * &euler), &odd_num);

    // Each GFP with m distinct parts has 2^m colourings.
    for kp in -wi..=wi {
        let (_, odd) = split2(kp);
        let lead = shift2(kp);
        let coloured = gf_enumerated(kp as i64, 2, order).specialize_t(2);
        let rhs = if odd { shifted(&so.scale(&two()), lead, 0) } else { shifted(&se, lead, 0) };
        c.series("colour law", kp, &coloured, &rhs);
    }
    Ok(c.finish())
}

/// Two-exclusion: t = 1.
pub fn check_two_exclusion(order: u32) -> Result<IdentityReport> {
    let w = natural_window(order, shift2);
    let mut c = Checker::new("two-exclusion", order, w);
    let ((se, so), (ex0, ex1)) = rayon::join(|| (s_even(order), s_odd(order)), || (s_k(2, 0, order), s_k(2, 1, order)));
    let (se, so, ex0, ex1) = (se?.series, so?.series, ex0?.series, ex1?.series);
    c.series("S_even(q,1) = S^(2)_0", 0, &se.specialize_t(1), &ex0);
    c.series("S_odd(q,1) = S^(2)_-1", 0, &so.specialize_t(1), &ex1);

    let n = 9.min(order as usize + 1);
    c.list("Phi_2 coefficients", &ex0.q_coeffs(), &[1, 1, 3, 5, 9, 14, 24, 35, 55][..n]);
    c.list("S_odd(q,1) coefficients", &ex1.q_coeffs(), &[1, 2, 3, 6, 10, 16, 26, 40, 60][..n]);

    let minus = FactorSpec::new()
        .with(vec![
            TermTemplate::new(1, 0, 0, 0, 0),
            TermTemplate::new(-1, 1, 0, 0, 1),
            TermTemplate::new(1, 2, 0, 0, 2),
        ])
        .with(vec![
            TermTemplate::new(1, 0, 0, 0, 0),
            TermTemplate::new(-1, 1, -1, 0, -1),
            TermTemplate::new(1, 2, -2, 0, -2),
        ]);
    let (rp, rm) = rayon::join(|| product_rhs(&FactorSpec::k_exclusion(2), order), || product_rhs(&minus, order));
    let (rp, rm) = (rp?, rm?);
    let sum = &rp + &rm;
    let diff = &rp - &rm;
    let wi = w as i32;
    for kp in -wi..=wi {
        let (_, odd) = split2(kp);
        let lead = shift2(kp);
        c.record_z(kp, lead);
        let (lhs, rhs) = if odd {
            (shifted(&ex1.scale(&two()), lead, 0), diff.coeff_z(kp))
        } else {
            (shifted(&ex0.scale(&two()), lead, 0), sum.coeff_z(kp))
        };
        c.series("specialized identity", kp, &lhs, &rhs);
    }
    Ok(c.finish())
}

/// Product forms of Phi_2, S_odd(q,1) and Phi_3.
pub fn check_phi_products(order: u32) -> Result<IdentityReport> {
    let mut c = Checker::new("products", order, 0);
    let (phi2, s_odd1, phi3) = (s_k(2, 0, order)?.series, s_k(2, 1, order)?.series, s_k(3, 0, order)?.series);
    let one = TruncatedSeries::one(order);

    let phi2_den =
        product_of(vec![one_minus(1, 0), one_minus(12, -10), one_minus(12, -9), one_minus(12, -3), one_minus(12, -2)]);
    c.series("Phi_2 product", 0, &(&phi2 * &product_rhs(&phi2_den, order)?), &one);

    let odd_den = product_of(vec![
        one_minus(2, -1),
        one_minus(2, -1),
        one_minus(12, -8),
        one_minus(12, -6),
        one_minus(12, -4),
        one_minus(12, 0),
    ]);
    c.series("S_odd(q,1) product", 0, &(&s_odd1 * &product_rhs(&odd_den, order)?), &one);

    let n = 9.min(order as usize + 1);
    c.list("Phi_3 coefficients", &phi3.q_coeffs(), &[1, 1, 3, 6, 11, 18, 31, 49, 78][..n]);
    let mut den = vec![one_minus(12, 0)];
    for (offset, power) in [(-5, 1), (-4, 2), (-3, 3), (-2, 2), (-1, 1)] {
        for _ in 0..power {
            den.push(one_minus(6, offset));
        }
    }
    let num = product_rhs(&product_of(vec![one_minus(12, -6)]), order)?;
    c.series("Phi_3 product", 0, &(&phi3 * &product_rhs(&product_of(den), order)?), &num);
    Ok(c.finish())
}

/// k-exclusion: the class-restricted form, f_{D_k,D_k,k'} = S^(k)_{-m} q^(k l(l+1)/2 - m l).
pub fn check_k_exclusion(k: u32, order: u32, z_window: u32) -> Result<IdentityReport> {
    if k < 2 {
        return Err(Error::Parameter(format!("k-exclusion needs k >= 2, got {k}")));
    }
    let (prod, norms) = rayon::join(
        || product_rhs(&FactorSpec::k_exclusion(k), order),
        || (0..k).into_par_iter().map(|m| s_k(k, m, order).map(|s| s.series)).collect::<Result<Vec<_>>>(),
    );
    let (prod, norms) = (prod?, norms?);
    let mut c = Checker::new(format!("k-exclusion:{k}"), order, z_window);
    let w = z_window as i32;
    for kp in -w..=w {
        let (m, lead) = shift_k(k, kp);
        c.record_z(kp, lead);
        c.series(&format!("class m = {m}"), kp, &shifted(&norms[m as usize], lead, 0), &prod.coeff_z(kp));
    }
    Ok(c.finish())
}

/// Identity ids accepted by [`check_by_id`].
pub const IDENTITY_IDS: &[&str] =
    &["main", "jacobi", "asep", "three-state", "two-exclusion", "k-exclusion:<k>", "offset-law:<k>:<k'>", "products"];

fn parse_num<T: std::str::FromStr>(s: &str, id: &str) -> Result<T> {
    s.parse().map_err(|_| Error::Parse(format!("bad number {s:?} in identity id {id:?}")))
}

/// Dispatches an identity id to its check. The window is ignored by checks
/// that choose their own.
pub fn check_by_id(id: &str, order: u32, z_window: u32) -> Result<IdentityReport> {
    let parts: Vec<&str> = id.split(':').collect();
    match parts.as_slice() {
        ["main"] => check_main(order, z_window),
        ["jacobi"] => check_jacobi(order, z_window),
        ["asep"] => check_asep(order),
        ["three-state"] => check_three_state(order),
        ["two-exclusion"] => check_two_exclusion(order),
        ["products"] => check_phi_products(order),
        ["k-exclusion", k] => check_k_exclusion(parse_num(k, id)?, order, z_window),
        ["offset-law", k, kp] => check_offset_law(parse_num(k, id)?, parse_num(kp, id)?, order),
        _ => Err(Error::Parse(format!("unknown identity {id:?}; expected one of {}", IDENTITY_IDS.join(", ")))),
    }
}

/// Runs independent checks in parallel, preserving input order.
pub fn check_many(ids: &[&str], order: u32, z_window: u32) -> Vec<Result<IdentityReport>> {
    ids.par_iter().map(|id| check_by_id(id, order, z_window)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shifts() {
        assert_eq!(shift2(0), 0);
        assert_eq!(shift2(-1), 0);
        assert_eq!(shift2(4), 6);
        assert_eq!(shift2(1), 1);
        assert_eq!(shift_k(3, 3), (0, 3));
        assert_eq!(shift_k(3, -1), (1, 0));
        assert_eq!(shift_k(3, -2), (2, 0));
        assert_eq!(shift_k(3, 1), (2, 1));
    }

    #[test]
    fn natural_windows() {
        assert_eq!(natural_window(30, |k| (k as i64) * (k as i64)), 5);
        assert_eq!(natural_window(8, shift2), 6);
    }

    #[test]
    fn main_small() {
        let r = check_main(6, 4).unwrap();
        assert!(r.equal, "{r:?}");
        assert_eq!(r.z_orders[&4], 0);
    }

    #[test]
    fn corrupted_sum_side_is_caught() {
        let order = 4;
        let se = s_even(order).unwrap().series;
        let bad = &se + &TruncatedSeries::monomial(order, Monomial::new(3, 2, 0), 1);
        let sum = &product_rhs(&FactorSpec::k2(1), order).unwrap() + &product_rhs(&FactorSpec::k2(-1), order).unwrap();
        let mut c = Checker::new("main", order, 0);
        c.series("even", 0, &bad.scale(&two()), &sum.coeff_z(0));
        let r = c.finish();
        assert!(!r.equal);
        let d = r.discrepancy.unwrap();
        assert_eq!((d.dq, d.dt, d.lhs.as_str(), d.rhs.as_str()), (3, 2, "12", "10"));
    }

    #[test]
    fn unknown_id_rejected() {
        assert!(matches!(check_by_id("nope", 2, 2), Err(Error::Parse(_))));
        assert!(matches!(check_by_id("k-exclusion:x", 2, 2), Err(Error::Parse(_))));
    }

    #[test]
    fn jacobi_small() {
        assert!(check_jacobi(12, 4).unwrap().equal);
    }
}
