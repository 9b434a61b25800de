//! One PASS/FAIL line per acceptance criterion; exits nonzero if any fails.

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use blocking_jacobi::blocking::{asep_q1_table, k_exclusion_table, rat, three_state_table, RateTable};
use blocking_jacobi::gfp::*;
use blocking_jacobi::identities::*;
use blocking_jacobi::normalizers::{enumerate_states, h_weight, s_even, s_odd, t_exponent};
use blocking_jacobi::series::{Monomial, TruncatedSeries};
use blocking_jacobi::simulate::*;
use blocking_jacobi::standup::*;
use serde::Deserialize;

mod common;
use common::small_states;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    ensure(start.elapsed() < limit, || format!("took {:.1?}, limit {limit:?}", start.elapsed()))
}

fn table(order: u32, rows: &[(u32, &[(u32, i64)])]) -> TruncatedSeries {
    let mut s = TruncatedSeries::zero(order);
    for (dq, terms) in rows {
        for (dt, c) in terms.iter() {
            s.add_term(Monomial::new(*dq, *dt, 0), (*c).into());
        }
    }
    s
}

fn normalizer_golden() -> Outcome {
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
    let se = s_even(8).map_err(|e| e.to_string())?.series;
    let so = s_odd(8).map_err(|e| e.to_string())?.series;
    ensure(se == even, || format!("s_even differs: {se}"))?;
    ensure(so == odd, || format!("s_odd differs: {so}"))?;
    within(start, Duration::from_secs(10))?;
    Ok(format!("{} + {} terms, {:.2?}", se.len(), so.len(), start.elapsed()))
}

#[derive(Deserialize)]
struct Member {
    top: Vec<u32>,
    bottom: Vec<u32>,
}

#[derive(Deserialize)]
struct CensusSet {
    offset: i64,
    m: u32,
    n: u64,
    members: Vec<Member>,
}

fn gfp_census() -> Outcome {
    let sets: Vec<CensusSet> = serde_json::from_str(include_str!("data/gfp_census.json")).map_err(|e| e.to_string())?;
    for set in &sets {
        let found: BTreeSet<Gfp> =
            enumerate(set.n, set.offset, 2).into_iter().filter(|x| distinct_parts(x) == set.m).collect();
        let printed: BTreeSet<Gfp> = set
            .members
            .iter()
            .map(|x| Gfp::new(2, x.top.clone(), x.bottom.clone()).map_err(|e| e.to_string()))
            .collect::<Result<_, _>>()?;
        ensure(found.len() == set.members.len() && found == printed, || {
            format!(
                "offset {} m {} n {}: {} enumerated, {} listed",
                set.offset,
                set.m,
                set.n,
                found.len(),
                printed.len()
            )
        })?;
    }
    let count = |offset, n, m| sets.iter().find(|s| (s.offset, s.n, s.m) == (offset, n, m)).map(|s| s.members.len());
    ensure(count(0, 5, 2) == Some(12), || "|GFP(0, m 2, n 5)| != 12".into())?;
    ensure(count(-1, 8, 5) == Some(5), || "|GFP(-1, m 5, n 8)| != 5".into())?;
    Ok(format!("{} sets", sets.len()))
}

fn report(r: blocking_jacobi::Result<IdentityReport>) -> Result<IdentityReport, String> {
    let r = r.map_err(|e| e.to_string())?;
    ensure(r.equal, || r.to_json())?;
    Ok(r)
}

fn main_identity() -> Outcome {
    let start = Instant::now();
    let r = report(check_main(10, 6))?;
    within(start, Duration::from_secs(60))?;
    Ok(format!("{} comparisons over {} z-powers, {:.2?}", r.comparisons, r.z_orders.len(), start.elapsed()))
}

fn specializations() -> Outcome {
    let asep = report(check_asep(30))?;
    let three = report(check_three_state(8))?;
    let two = report(check_two_exclusion(8))?;
    let phi = report(check_phi_products(8))?;
    Ok(format!(
        "asep {}, 3-state {}, 2-exclusion {}, Phi {} comparisons",
        asep.comparisons, three.comparisons, two.comparisons, phi.comparisons
    ))
}

fn k_exclusion() -> Outcome {
    let start = Instant::now();
    report(check_k_exclusion(3, 8, 5))?;
    report(check_k_exclusion(4, 6, 4))?;
    within(start, Duration::from_secs(300))?;
    Ok(format!("{:.2?}", start.elapsed()))
}

fn bijections() -> Outcome {
    let err = |e: blocking_jacobi::Error| e.to_string();
    let mut states = 0;
    for (k, m) in [(2, 0), (2, 1), (3, 0), (3, 1), (3, 2)] {
        let all = enumerate_states(k, m, 10).map_err(err)?;
        let mut image: BTreeMap<u64, BTreeSet<Gfp>> = BTreeMap::new();
        for s in &all {
            let x = psi(s).map_err(err)?;
            ensure(x.weight() as i64 == h_weight(s) && x.offset() == -(m as i64), || format!("psi({s}) = {x}"))?;
            if k == 2 {
                ensure(distinct_parts(&x) as i32 == t_exponent(s) + m as i32, || format!("statistic at {s}"))?;
            }
            ensure(&psi_inverse(&x).map_err(err)? == s, || format!("psi_inverse at {s}"))?;
            ensure(image.entry(x.weight()).or_default().insert(x), || format!("psi not injective at {s}"))?;
        }
        for n in 0..=10 {
            let target: BTreeSet<Gfp> = enumerate(n, -(m as i64), k).into_iter().collect();
            ensure(image.remove(&n).unwrap_or_default() == target, || format!("psi image k {k} m {m} n {n}"))?;
        }
        states += all.len();
    }

    let g = |k, top: &[u32], bottom: &[u32]| Gfp::new(k, top.to_vec(), bottom.to_vec()).map_err(err);
    let wright_src = g(1, &[7, 6, 4], &[6, 3, 1])?;
    ensure(phi(&wright_src, 4).map_err(err)? == g(1, &[11, 10, 8, 3, 1], &[2])?, || "Wright map, l = 4".into())?;
    ensure(phi(&wright_src, -4).map_err(err)? == g(1, &[3, 2, 0], &[10, 7, 5, 3, 2, 1, 0])?, || {
        "Wright map, l = -4".into()
    })?;
    let even_src = g(2, &[4, 2, 2], &[2, 2, 0])?;
    ensure(phi(&even_src, 2).map_err(err)? == g(2, &[6, 4, 4, 1, 0, 0], &[0, 0])?, || "even phi example".into())?;
    let odd_src = g(2, &[4, 2, 2], &[2, 2, 0, 0])?;
    ensure(phi_odd(&odd_src, 1).map_err(err)? == g(2, &[6, 4, 4, 0, 0], &[0, 0])?, || "odd phi example".into())?;

    let mut images = 0;
    for n in 0..=8u64 {
        for x in enumerate(n, 0, 2) {
            for l in -4..=4i64 {
                let y = phi(&x, l).map_err(err)?;
                ensure(y.weight() as i64 == n as i64 + l * (l + 1) && y.offset() == 2 * l, || {
                    format!("even law at {x}, l {l}")
                })?;
                images += 1;
            }
        }
        for x in enumerate(n, -1, 2) {
            for l in -4..=4i64 {
                let y = phi_odd(&x, l).map_err(err)?;
                ensure(y.weight() as i64 == n as i64 + (l + 1) * (l + 1) && y.offset() == 2 * l + 1, || {
                    format!("odd law at {x}, l {l}")
                })?;
                images += 1;
            }
        }
        for k in [3u32, 4] {
            for m in 0..k {
                for x in enumerate(n, -(m as i64), k) {
                    for l in -3..=3i64 {
                        let y = phi(&x, l).map_err(err)?;
                        let shift = k as i64 * l * (l + 1) / 2 - m as i64 * l;
                        ensure(y.weight() as i64 == n as i64 + shift, || format!("k {k} law at {x}, l {l}"))?;
                        images += 1;
                    }
                }
            }
        }
    }
    Ok(format!("{states} states under psi, {images} phi images"))
}

fn standup_models() -> Vec<(&'static str, RateTable)> {
    let h = rat(1, 2);
    vec![
        ("2-exclusion", k_exclusion_table(&h, 2).unwrap()),
        ("asep", asep_q1_table(&h).unwrap()),
        ("3-state", three_state_table(&rat(1, 3), &h).unwrap()),
        ("3-exclusion", k_exclusion_table(&h, 3).unwrap()),
    ]
}

fn standing_up() -> Outcome {
    use rayon::prelude::*;
    let mut checked = 0;
    for (name, r) in standup_models() {
        let states = small_states(r.k, 8);
        let bad = states.par_iter().find_any(|eta| {
            let n = conserved_n(eta);
            lay_down(&stand_up(eta), n).ok().as_ref() != Some(*eta) || !intertwine_check(eta, &r)
        });
        if let Some(eta) = bad {
            return Err(format!("{name}: fails at {eta}"));
        }
        checked += states.len();
    }
    Ok(format!("{checked} states"))
}

fn reversibility() -> Outcome {
    let h = rat(1, 2);
    let models = [
        ("2-exclusion", model_table("2-exclusion", &h, &h).unwrap()),
        ("asep", model_table("asep", &h, &h).unwrap()),
        ("3-state", model_table("3-state", &rat(1, 3), &h).unwrap()),
        ("3-exclusion", model_table("k-exclusion:3", &h, &h).unwrap()),
    ];
    let mut min_edges = usize::MAX;
    for (name, r) in &models {
        let sample = small_states(r.k, if r.k == 2 { 8 } else { 6 });
        let rep = detailed_balance_verify(r, 0, &sample).map_err(|e| e.to_string())?;
        ensure(rep.holds, || format!("{name}: {:?}", rep.violation))?;
        ensure(rep.edges_checked >= 10_000, || format!("{name}: only {} edges", rep.edges_checked))?;
        min_edges = min_edges.min(rep.edges_checked);
        for m in 0..r.k {
            let ground = EtaState::ground(r.k, m);
            let window = stationary_matches_blocking(r, &ground, -2, 2).map_err(|e| e.to_string())?;
            ensure(window, || format!("{name}: window stationary law, m = {m}"))?;
            let stood = stood_up_stationary_matches(r, m, 6).map_err(|e| e.to_string())?;
            ensure(stood, || format!("{name}: stood-up stationary law, m = {m}"))?;
        }
    }
    Ok(format!("at least {min_edges} edges per model"))
}

fn monte_carlo() -> Outcome {
    let start = Instant::now();
    let r = model_table("2-exclusion", &rat(1, 2), &rat(1, 2)).unwrap();
    let ground = EtaState::ground(2, 0);
    let (lo, hi) = (-3, 4);
    let chain = eta_window_chain(&r, &ground, lo, hi).map_err(|e| e.to_string())?;
    let pi = exact_stationary(&chain).map_err(|e| e.to_string())?;
    let exact = exact_marginals(&chain, &pi, lo, hi, 2);
    let stats = gillespie(&r, &ground, lo, hi, Horizon::Jumps(1_000_000), 7).map_err(|e| e.to_string())?;
    ensure(stats.conserved_held, || "conserved quantity drifted".into())?;
    let (score, site, z) = max_standardized_error(&stats, &exact);
    ensure(score <= 3.0, || format!("site {site}, z {z}: {score:.2} standard errors"))?;
    within(start, Duration::from_secs(60))?;
    Ok(format!("{} states, max {score:.2} SE, {:.2?}", chain.len(), start.elapsed()))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("normalizer golden tables", normalizer_golden),
        ("GFP census", gfp_census),
        ("main identity, order 10, window 6", main_identity),
        ("specialization suite", specializations),
        ("k-exclusion identities", k_exclusion),
        ("bijection properties", bijections),
        ("standing up and intertwining", standing_up),
        ("reversibility and exact stationary laws", reversibility),
        ("Monte Carlo against exact solve", monte_carlo),
    ];
    let mut failed = Vec::new();
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default())
        });
        match outcome {
            Ok(detail) => println!("PASS {} {name}: {detail}", i + 1),
            Err(why) => {
                println!("FAIL {} {name}: {why}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
