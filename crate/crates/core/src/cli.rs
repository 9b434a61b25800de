//! Command-line front end. `run` parses arguments, dispatches and returns
//! the exit code: 0 on success or equality, 1 on identity failure, 2 on
//! usage or input errors.

use std::ffi::OsString;
use std::io::Write;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::blocking::{parse_rational, Q};
use crate::error::{Error, Result};
use crate::gfp::{self, Gfp};
use crate::identities::check_by_id;
use crate::normalizers::{enumerate_states, h_weight, s_even, s_k, s_odd};
use crate::series::{product_rhs, substitute, FactorSpec, LaurentPoly, TermRecord, TruncatedSeries};
use crate::simulate::{eta_window_chain, exact_marginals, exact_stationary, gillespie, model_table, Horizon};
use crate::standup::{EtaState, OmegaState};

pub const EXIT_OK: i32 = 0;
pub const EXIT_UNEQUAL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "blocking-jacobi",
    version,
    about = "Blocking measures, stood-up processes and Jacobi-style identities"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Copy)]
struct Format {
    /// Emit JSON.
    #[arg(long, conflicts_with = "csv")]
    json: bool,
    /// Emit CSV.
    #[arg(long)]
    csv: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check an identity: main, jacobi, asep, three-state, two-exclusion,
    /// products, k-exclusion:<k>, offset-law:<k>:<k'>.
    Verify {
        id: String,
        #[arg(long, default_value_t = 10)]
        order: u32,
        #[arg(long, default_value_t = 6)]
        zwindow: u32,
        #[command(flatten)]
        format: Format,
    },
    /// Expand a product side: k2-plus, k2-minus, k-exclusion, jacobi, jacobi-classical.
    Expand {
        product: ProductId,
        #[arg(long, default_value_t = 8)]
        order: u32,
        /// Repetition bound for k-exclusion.
        #[arg(long, default_value_t = 2)]
        k: u32,
        /// Keep only the coefficient of z^offset.
        #[arg(long, allow_hyphen_values = true)]
        offset: Option<i32>,
        #[command(flatten)]
        format: Format,
    },
    /// List GFPs of a given offset, or stood-up states of the matching class.
    Enumerate {
        what: EnumTarget,
        #[arg(long, default_value_t = 2)]
        k: u32,
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        offset: i64,
        #[arg(long, default_value_t = 4)]
        order: u32,
        #[command(flatten)]
        format: Format,
    },
    /// Apply a bijection: psi (--omega), psi-inverse (--gfp), phi (--gfp --offset), frobenius (--partition).
    Biject {
        map: BijectMap,
        /// Comma-separated omega_{-1}, omega_{-2}, ...
        #[arg(long)]
        omega: Option<String>,
        /// even, odd, or a class index m.
        #[arg(long, default_value = "even")]
        class: String,
        /// A GFP written "(a b ; c d)".
        #[arg(long, allow_hyphen_values = true)]
        gfp: Option<String>,
        /// Comma-separated parts.
        #[arg(long)]
        partition: Option<String>,
        #[arg(long, default_value_t = 2)]
        k: u32,
        /// Target offset for phi.
        #[arg(long, allow_hyphen_values = true)]
        offset: Option<i64>,
        #[command(flatten)]
        format: Format,
    },
    /// Gillespie run on a window of sites around the interface.
    Simulate {
        /// 2-exclusion, asep, 3-state or k-exclusion:<k>.
        #[arg(long)]
        model: String,
        #[arg(long, default_value = "1/2")]
        q: String,
        #[arg(long, default_value = "1/2")]
        gamma: String,
        /// Number of sites.
        #[arg(long, default_value_t = 8)]
        window: u32,
        /// Time horizon.
        #[arg(long, default_value_t = 1000.0)]
        horizon: f64,
        /// Stop after this many jumps instead of at the time horizon.
        #[arg(long)]
        jumps: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also solve the window chain exactly and report its marginals.
        #[arg(long)]
        exact: bool,
        #[command(flatten)]
        format: Format,
    },
    /// Print a coefficient sequence: s_even, s_odd, s_k, gfp, asep-even, asep-odd.
    Sequence {
        name: SequenceId,
        #[arg(long, default_value_t = 8)]
        order: u32,
        #[arg(long, default_value_t = 2)]
        k: u32,
        /// Offset k' (s_k uses the class m = -k' mod k).
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        offset: i64,
        #[command(flatten)]
        format: Format,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ProductId {
    K2Plus,
    K2Minus,
    KExclusion,
    Jacobi,
    JacobiClassical,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum EnumTarget {
    Gfp,
    States,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum BijectMap {
    Psi,
    PsiInverse,
    Phi,
    Frobenius,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
#[value(rename_all = "snake_case")]
enum SequenceId {
    SEven,
    SOdd,
    #[value(name = "s_k")]
    SK,
    Gfp,
    #[value(name = "asep-even")]
    AsepEven,
    #[value(name = "asep-odd")]
    AsepOdd,
}

enum Outcome {
    Ok(String),
    Unequal(String),
}

/// Parses `argv` (including the program name), runs the command and writes
/// its output; returns the exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(Outcome::Ok(s)) => {
            let _ = writeln!(out, "{}", s.trim_end());
            EXIT_OK
        }
        Ok(Outcome::Unequal(s)) => {
            let _ = writeln!(out, "{}", s.trim_end());
            EXIT_UNEQUAL
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
    }
}

fn dispatch(cmd: Command) -> Result<Outcome> {
    match cmd {
        Command::Verify { id, order, zwindow, format } => {
            let r = check_by_id(&id, order, zwindow)?;
            let text = if format.json {
                r.to_json()
            } else {
                let mut s = format!(
                    "{} order {} window {}: {}",
                    r.id,
                    r.order,
                    r.z_window,
                    if r.equal { "equal" } else { "UNEQUAL" }
                );
                if let Some(d) = &r.discrepancy {
                    s.push_str(&format!(
                        "\nfirst discrepancy in {}: q^{} t^{} z^{}: {} vs {}",
                        d.check, d.dq, d.dt, d.dz, d.lhs, d.rhs
                    ));
                }
                s
            };
            Ok(if r.equal { Outcome::Ok(text) } else { Outcome::Unequal(text) })
        }
        Command::Expand { product, order, k, offset, format } => {
            let spec = match product {
                ProductId::K2Plus => FactorSpec::k2(1),
                ProductId::K2Minus => FactorSpec::k2(-1),
                ProductId::KExclusion => FactorSpec::k_exclusion(k),
                ProductId::Jacobi => FactorSpec::jacobi_shifted(),
                ProductId::JacobiClassical => FactorSpec::jacobi_classical(),
            };
            let mut s = product_rhs(&spec, order)?;
            if let Some(o) = offset {
                s = s.coeff_z(o);
            }
            Ok(Outcome::Ok(render_series(&s, format)))
        }
        Command::Enumerate { what, k, offset, order, format } => enumerate(what, k, offset, order, format),
        Command::Biject { map, omega, class, gfp, partition, k, offset, format } => {
            biject(map, omega, &class, gfp, partition, k, offset, format)
        }
        Command::Simulate { model, q, gamma, window, horizon, jumps, seed, exact, format } => {
            simulate(&model, &q, &gamma, window, horizon, jumps, seed, exact, format)
        }
        Command::Sequence { name, order, k, offset, format } => sequence(name, order, k, offset, format),
    }
}

fn render_series(s: &TruncatedSeries, format: Format) -> String {
    if format.json {
        return s.to_json();
    }
    if format.csv {
        return csv_rows(
            ["dq", "dt", "dz", "coeff"],
            s.to_records()
                .into_iter()
                .map(|r: TermRecord| [r.dq.to_string(), r.dt.to_string(), r.dz.to_string(), r.coeff]),
        );
    }
    s.to_string()
}

fn csv_rows<const N: usize>(header: [&str; N], rows: impl IntoIterator<Item = [String; N]>) -> String {
    let mut w = csv::Writer::from_writer(vec![]);
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
}

fn class_of(k: u32, offset: i64) -> u32 {
    (-offset).rem_euclid(k as i64) as u32
}

fn enumerate(what: EnumTarget, k: u32, offset: i64, order: u32, format: Format) -> Result<Outcome> {
    if k == 0 {
        return Err(Error::Parameter("k must be positive".into()));
    }
    match what {
        EnumTarget::Gfp => {
            let all: Vec<Gfp> = (0..=order as u64).flat_map(|n| gfp::enumerate(n, offset, k)).collect();
            if format.json {
                let items: Vec<serde_json::Value> =
                    all.iter().map(|g| serde_json::from_str(&g.to_json()).expect("valid json")).collect();
                return Ok(Outcome::Ok(serde_json::to_string_pretty(&items).expect("serializes")));
            }
            if format.csv {
                return Ok(Outcome::Ok(csv_rows(
                    ["weight", "distinct", "gfp"],
                    all.iter().map(|g| [g.weight().to_string(), gfp::distinct_parts(g).to_string(), g.to_string()]),
                )));
            }
            Ok(Outcome::Ok(all.iter().map(|g| format!("{} {}", g.weight(), g)).collect::<Vec<_>>().join("\n")))
        }
        EnumTarget::States => {
            let states = enumerate_states(k, class_of(k, offset), order)?;
            let row = |s: &OmegaState| s.vals().iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",");
            if format.json {
                let items: Vec<serde_json::Value> =
                    states.iter().map(|s| serde_json::from_str(&s.to_json()).expect("valid json")).collect();
                return Ok(Outcome::Ok(serde_json::to_string_pretty(&items).expect("serializes")));
            }
            if format.csv {
                return Ok(Outcome::Ok(csv_rows(
                    ["weight", "omega"],
                    states.iter().map(|s| [h_weight(s).to_string(), row(s)]),
                )));
            }
            Ok(Outcome::Ok(states.iter().map(|s| format!("{} {}", h_weight(s), row(s))).collect::<Vec<_>>().join("\n")))
        }
    }
}

fn parse_list(s: &str) -> Result<Vec<u32>> {
    s.split([',', ' '])
        .filter(|p| !p.is_empty())
        .map(|p| p.trim().parse().map_err(|_| Error::Parse(format!("bad entry {p:?} in list {s:?}"))))
        .collect()
}

/// Parses "(a b ; c d)" (parentheses optional).
pub fn parse_gfp(s: &str, k_rep: u32) -> Result<Gfp> {
    let body = s.trim().trim_start_matches('(').trim_end_matches(')');
    let (top, bottom) =
        body.split_once(';').ok_or_else(|| Error::Parse(format!("GFP {s:?} needs a ';' between rows")))?;
    Gfp::new(k_rep, parse_list(top)?, parse_list(bottom)?)
}

fn parse_class(class: &str, k: u32) -> Result<u32> {
    match class {
        "even" if k == 2 => Ok(0),
        "odd" if k == 2 => Ok(1),
        _ => class
            .parse::<u32>()
            .ok()
            .filter(|&m| m < k)
            .ok_or_else(|| Error::Parse(format!("class {class:?} is not even, odd (k = 2) or 0..{k}"))),
    }
}

fn require<T>(v: Option<T>, flag: &str) -> Result<T> {
    v.ok_or_else(|| Error::Parameter(format!("missing --{flag}")))
}

#[allow(clippy::too_many_arguments)]
fn biject(
    map: BijectMap,
    omega: Option<String>,
    class: &str,
    gfp_text: Option<String>,
    partition: Option<String>,
    k: u32,
    offset: Option<i64>,
    format: Format,
) -> Result<Outcome> {
    let show_gfp = |g: &Gfp| if format.json { g.to_json() } else { g.to_string() };
    match map {
        BijectMap::Psi => {
            let w = OmegaState::new(k, parse_class(class, k)?, parse_list(&require(omega, "omega")?)?)?;
            Ok(Outcome::Ok(show_gfp(&gfp::psi(&w)?)))
        }
        BijectMap::PsiInverse => {
            let g = parse_gfp(&require(gfp_text, "gfp")?, k)?;
            let w = gfp::psi_inverse(&g)?;
            Ok(Outcome::Ok(if format.json {
                w.to_json()
            } else {
                w.vals().iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
            }))
        }
        BijectMap::Phi => {
            let g = parse_gfp(&require(gfp_text, "gfp")?, k)?;
            Ok(Outcome::Ok(show_gfp(&gfp::phi_to_offset(&g, require(offset, "offset")?)?)))
        }
        BijectMap::Frobenius => {
            let parts = parse_list(&require(partition, "partition")?)?;
            Ok(Outcome::Ok(show_gfp(&gfp::frobenius(&parts)?)))
        }
    }
}

#[derive(Serialize)]
struct SimulationOutput {
    model: String,
    q: String,
    stats: crate::simulate::TrajectoryStats,
    exact: Option<Vec<Vec<f64>>>,
}

#[allow(clippy::too_many_arguments)]
fn simulate(
    model: &str,
    q: &str,
    gamma: &str,
    window: u32,
    horizon: f64,
    jumps: Option<u64>,
    seed: u64,
    exact: bool,
    format: Format,
) -> Result<Outcome> {
    let (qv, gv): (Q, Q) = (parse_rational(q)?, parse_rational(gamma)?);
    let rates = model_table(model, &qv, &gv)?;
    if window < 2 {
        return Err(Error::Parameter("window needs at least two sites".into()));
    }
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::Parameter(format!("horizon must be positive, got {horizon}")));
    }
    let hi = window as i64 / 2;
    let lo = hi - window as i64 + 1;
    let ground = EtaState::ground(rates.k, 0);
    let h = jumps.map_or(Horizon::Time(horizon), Horizon::Jumps);
    let stats = gillespie(&rates, &ground, lo, hi, h, seed)?;
    let exact_marg = if exact {
        let chain = eta_window_chain(&rates, &ground, lo, hi)?;
        let pi = exact_stationary(&chain)?;
        Some(
            exact_marginals(&chain, &pi, lo, hi, rates.k)
                .into_iter()
                .map(|row| row.iter().map(|x| num_traits::ToPrimitive::to_f64(x).unwrap_or(f64::NAN)).collect())
                .collect(),
        )
    } else {
        None
    };
    if format.json {
        let o = SimulationOutput { model: model.into(), q: q.into(), stats, exact: exact_marg };
        return Ok(Outcome::Ok(serde_json::to_string_pretty(&o).expect("serializes")));
    }
    let mut text = stats.to_csv();
    if let Some(ex) = exact_marg {
        text = csv_rows(
            ["site", "z", "fraction", "std_err", "exact"],
            stats.occupation.iter().enumerate().flat_map(|(j, row)| {
                let (ex, stats) = (&ex, &stats);
                row.iter().enumerate().map(move |(z, f)| {
                    [
                        (lo + j as i64).to_string(),
                        z.to_string(),
                        f.to_string(),
                        stats.std_err[j][z].to_string(),
                        ex[j][z].to_string(),
                    ]
                })
            }),
        );
    }
    if !format.csv {
        text = format!(
            "# seed {} time {} jumps {} conserved {} ({})\n{}",
            stats.seed,
            stats.total_time,
            stats.jumps,
            stats.conserved_n,
            if stats.conserved_held { "held" } else { "VIOLATED" },
            text
        );
    }
    Ok(Outcome::Ok(text))
}

fn sequence(name: SequenceId, order: u32, k: u32, offset: i64, format: Format) -> Result<Outcome> {
    let bivariate = |s: &TruncatedSeries| {
        let rows: Vec<(u32, u32, String)> =
            s.terms().iter().filter(|(m, _)| m.dz == 0).map(|(m, c)| (m.dq, m.dt, c.to_string())).collect();
        if format.json {
            let items: Vec<_> = rows.iter().map(|(n, m, c)| serde_json::json!({"n": n, "m": m, "coeff": c})).collect();
            serde_json::to_string_pretty(&items).expect("serializes")
        } else {
            csv_rows(["n", "m", "coeff"], rows.into_iter().map(|(n, m, c)| [n.to_string(), m.to_string(), c]))
        }
    };
    let univariate = |coeffs: Vec<(i64, String)>| {
        if format.json {
            let items: Vec<_> = coeffs.iter().map(|(n, c)| serde_json::json!({"n": n, "coeff": c})).collect();
            serde_json::to_string_pretty(&items).expect("serializes")
        } else {
            csv_rows(["n", "coeff"], coeffs.into_iter().map(|(n, c)| [n.to_string(), c]))
        }
    };
    let text = match name {
        SequenceId::SEven => bivariate(&s_even(order)?.series),
        SequenceId::SOdd => bivariate(&s_odd(order)?.series),
        SequenceId::Gfp => {
            if k == 0 {
                return Err(Error::Parameter("k must be positive".into()));
            }
            bivariate(&gfp::gf_enumerated(offset, k, order))
        }
        SequenceId::SK => {
            if k == 0 {
                return Err(Error::Parameter("k must be positive".into()));
            }
            let s = s_k(k, class_of(k, offset), order)?.series;
            univariate(s.q_coeffs().into_iter().enumerate().map(|(n, c)| (n as i64, c.to_string())).collect())
        }
        SequenceId::AsepEven | SequenceId::AsepOdd => {
            let norm = order / 2 + 1;
            let s = if matches!(name, SequenceId::AsepEven) { s_even(norm)? } else { s_odd(norm)? };
            let sub = substitute(&s.series, 4, &LaurentPoly::q_integer(2), 2, order as i64)?;
            univariate((0..=order as i64).map(|e| (e, sub.coeff(e).unwrap_or_default().to_string())).collect())
        }
    };
    Ok(Outcome::Ok(text))
}
