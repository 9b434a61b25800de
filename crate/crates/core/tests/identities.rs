use std::time::Instant;

use blocking_jacobi::identities::*;
use blocking_jacobi::normalizers::{s_even, s_odd};
use blocking_jacobi::series::{Monomial, TruncatedSeries};

/// Rows of (dq, [(dt, coeff)]) as a series.
fn table(order: u32, rows: &[(u32, &[(u32, i64)])]) -> TruncatedSeries {
    let mut s = TruncatedSeries::zero(order);
    for (dq, terms) in rows {
        for (dt, c) in terms.iter() {
            s.add_term(Monomial::new(*dq, *dt, 0), (*c).into());
        }
    }
    s
}

#[test]
fn golden_normalizer_tables() {
    let start = Instant::now();
    let even = table(
        8,
        &[
            (0, &[(0, 1)]),
            (1, &[(2, 1)]),
            (2, &[(0, 1), (2, 2)]),
            (3, &[(2, 5)]),
            (4, &[(0, 2), (2, 6), (4, 1)]),
            (5, &[(2, 12), (4, 2)]),
            (6, &[(0, 3), (2, 16), (4, 5)]),
            (7, &[(2, 25), (4, 10)]),
            (8, &[(0, 5), (2, 30), (4, 20)]),
        ],
    );
    let odd = table(
        8,
        &[
            (0, &[(0, 1)]),
            (1, &[(0, 2)]),
            (2, &[(0, 2), (2, 1)]),
            (3, &[(0, 4), (2, 2)]),
            (4, &[(0, 5), (2, 5)]),
            (5, &[(0, 6), (2, 10)]),
            (6, &[(0, 10), (2, 15), (4, 1)]),
            (7, &[(0, 12), (2, 26), (4, 2)]),
            (8, &[(0, 15), (2, 40), (4, 5)]),
        ],
    );
    assert_eq!(s_even(8).unwrap().series, even);
    assert_eq!(s_odd(8).unwrap().series, odd);
    assert!(start.elapsed().as_secs() < 10);
}

#[test]
fn main_identity() {
    let r = check_main(10, 6).unwrap();
    assert!(r.equal, "{}", r.to_json());
    assert_eq!(r.z_orders.len(), 13);
}

#[test]
fn main_identity_small_grid() {
    for n in 0..=8 {
        for w in 1..=4 {
            assert!(check_main(n, w).unwrap().equal, "N = {n}, W = {w}");
        }
    }
}

#[test]
fn offset_laws() {
    for (k, kp, n) in [(2, 4, 10), (2, -1, 10), (2, 0, 8), (2, 3, 8), (2, -4, 8), (3, 3, 8), (3, -2, 8), (1, 2, 8)] {
        let r = check_offset_law(k, kp, n).unwrap();
        assert!(r.equal, "{}", r.to_json());
    }
}

#[test]
fn jacobi() {
    assert!(check_jacobi(20, 6).unwrap().equal);
}

#[test]
fn asep_specialization() {
    let r = check_asep(30).unwrap();
    assert!(r.equal, "{}", r.to_json());
}

#[test]
fn three_state_specialization() {
    let r = check_three_state(8).unwrap();
    assert!(r.equal, "{}", r.to_json());
}

#[test]
fn two_exclusion_and_products() {
    let r = check_two_exclusion(10).unwrap();
    assert!(r.equal, "{}", r.to_json());
    let r = check_phi_products(12).unwrap();
    assert!(r.equal, "{}", r.to_json());
}

#[test]
fn k_exclusion() {
    for (k, n, w) in [(2, 10, 6), (3, 8, 5), (4, 6, 4)] {
        let r = check_k_exclusion(k, n, w).unwrap();
        assert!(r.equal, "{}", r.to_json());
    }
}

#[test]
fn dispatch_and_parallel_order() {
    let ids = ["jacobi", "k-exclusion:3", "offset-law:2:-1"];
    let reports = check_many(&ids, 6, 3);
    for (id, r) in ids.iter().zip(reports) {
        let r = r.unwrap();
        assert_eq!(&r.id, id);
        assert!(r.equal);
    }
}
