use blocking_jacobi::blocking::{asep_q1_table, k_exclusion_table, rat, three_state_table, RateTable};
use blocking_jacobi::standup::*;
use proptest::prelude::*;

mod common;
use common::small_states;

/// Left-most particle site from the explicit k = 2 laying-down formula.
fn s1_formula_k2(w: &OmegaState, n: i64) -> i64 {
    let e = w.depth() as i64 + 1;
    let sum: i64 = (1..e).map(|i| w.get(i as usize) as i64).sum();
    let ind = if n.rem_euclid(2) == 0 { (e % 2 == 1) as i64 } else { (e % 2 == 0) as i64 };
    (n + e + ind) / 2 - sum
}

#[test]
fn two_exclusion_exhaustive() {
    let r = k_exclusion_table(&rat(1, 2), 2).unwrap();
    for eta in small_states(2, 8) {
        let n = conserved_n(&eta);
        let w = stand_up(&eta);
        assert_eq!((n + w.m() as i64).rem_euclid(2), 0);
        assert_eq!(lay_down(&w, n).unwrap(), eta, "{eta}");
        assert!(intertwine_check(&eta, &r), "{eta}");
        for (_, next) in eta_jumps(&eta, &r) {
            assert_eq!(conserved_n(&next), n);
        }
        assert_eq!(conserved_n(&eta.shift(-1)), n - 2);
    }
}

#[test]
fn laying_down_matches_explicit_formula_k2() {
    for eta in small_states(2, 7) {
        let n = conserved_n(&eta);
        let w = stand_up(&eta);
        assert_eq!(eta.particle_sites().first().copied().unwrap_or(eta.lo()), s1_formula_k2(&w, n), "{eta}");
    }
}

#[test]
fn table_rates_match_zero_run_rule() {
    let tables: Vec<RateTable> = vec![
        asep_q1_table(&rat(1, 2)).unwrap(),
        three_state_table(&rat(1, 3), &rat(1, 2)).unwrap(),
        k_exclusion_table(&rat(1, 2), 2).unwrap(),
    ];
    for r in &tables {
        for eta in small_states(2, 6) {
            let w = stand_up(&eta);
            let mut a: Vec<_> = omega_jumps(&w, r);
            let mut b: Vec<_> = omega_jumps_generic(&w, r);
            a.sort();
            b.sort();
            assert_eq!(a, b, "{w}");
            assert!(intertwine_check(&eta, r));
        }
    }
}

#[test]
fn k_exclusion_exhaustive() {
    for k in 3..=4 {
        let r = k_exclusion_table(&rat(1, 3), k).unwrap();
        for eta in small_states(k, if k == 3 { 6 } else { 5 }) {
            let n = conserved_n(&eta);
            let w = stand_up(&eta);
            assert_eq!((n + w.m() as i64).rem_euclid(k as i64), 0);
            assert_eq!(lay_down(&w, n).unwrap(), eta);
            assert!(intertwine_check(&eta, &r), "{eta}");
            let mut a = omega_jumps(&w, &r);
            let mut b = omega_jumps_generic(&w, &r);
            a.sort();
            b.sort();
            assert_eq!(a, b);
        }
    }
}

#[test]
fn corrupted_rates_break_intertwining() {
    let r = asep_q1_table(&rat(1, 2)).unwrap();
    let bad = r.scaled_p(1, 0, &rat(2, 1));
    let eta = EtaState::new(2, -1, vec![1, 0, 1, 2, 0]).unwrap();
    assert!(intertwine_check(&eta, &r));
    let corrupted = |w: &OmegaState, _: &RateTable| omega_jumps(w, &bad);
    assert!(!intertwine_with(&eta, &r, corrupted));
}

#[test]
fn eta_jumps_match_pair_scan() {
    let r = asep_q1_table(&rat(1, 2)).unwrap();
    for eta in small_states(2, 6) {
        let mut count = 0;
        for i in eta.lo() - 3..=eta.hi() + 3 {
            let (y, z) = (eta.get(i), eta.get(i + 1));
            count += (y > 0 && z < 2) as usize + (z > 0 && y < 2) as usize;
        }
        assert_eq!(eta_jumps(&eta, &r).len(), count);
    }
}

fn eta_strategy(k: u32) -> impl Strategy<Value = EtaState> {
    (-6i64..6, prop::collection::vec(0..=k, 0..14)).prop_map(move |(lo, v)| EtaState::new(k, lo, v).unwrap())
}

proptest! {
    #[test]
    fn asep_random_states_intertwine(eta in eta_strategy(2)) {
        let r = asep_q1_table(&rat(1, 2)).unwrap();
        prop_assert!(intertwine_check(&eta, &r));
    }

    #[test]
    fn round_trip_random(k in 1u32..5, seed in prop::collection::vec(0u32..5, 0..14), lo in -6i64..6) {
        let eta = EtaState::new(k, lo, seed.into_iter().map(|v| v % (k + 1)).collect()).unwrap();
        let n = conserved_n(&eta);
        let w = stand_up(&eta);
        prop_assert!(OmegaState::new(w.k(), w.m(), w.vals().to_vec()).is_ok());
        prop_assert_eq!(lay_down(&w, n).unwrap(), eta.clone());
        prop_assert_eq!(conserved_n(&eta.shift(-1)), n - k as i64);
        prop_assert_eq!(stand_up(&eta.shift(3)), w);
    }
}
