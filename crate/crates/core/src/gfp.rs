//! Generalized Frobenius partitions with a repetition bound, their
//! generalized Young diagrams on the lattices C_m, and the psi / phi /
//! Wright bijections.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{Monomial, TruncatedSeries};
use crate::standup::OmegaState;

/// A two-row array with weakly decreasing rows, each value at most `k_rep`
/// times per row. Offset is top length minus bottom length.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Gfp {
    k_rep: u32,
    top: Vec<u32>,
    bottom: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
struct GfpJson {
    offset: i64,
    top: Vec<u32>,
    bottom: Vec<u32>,
}

fn check_row(row: &[u32], k_rep: u32) -> Result<()> {
    if row.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::InvalidGfp(format!("row {row:?} is not weakly decreasing")));
    }
    let mut i = 0;
    while i < row.len() {
        let run = row[i..].iter().take_while(|&&v| v == row[i]).count();
        if run > k_rep as usize {
            return Err(Error::InvalidGfp(format!("value {} repeats {run} > {k_rep} times", row[i])));
        }
        i += run;
    }
    Ok(())
}

fn distinct_in_row(row: &[u32]) -> u32 {
    let mut n = 0;
    let mut i = 0;
    while i < row.len() {
        let run = row[i..].iter().take_while(|&&v| v == row[i]).count();
        n += (run == 1) as u32;
        i += run;
    }
    n
}

impl Gfp {
    pub fn new(k_rep: u32, top: Vec<u32>, bottom: Vec<u32>) -> Result<Self> {
        if k_rep == 0 {
            return Err(Error::InvalidGfp("repetition bound must be positive".into()));
        }
        check_row(&top, k_rep)?;
        check_row(&bottom, k_rep)?;
        Ok(Gfp { k_rep, top, bottom })
    }

    /// The empty GFP of offset -m: no top entries and m zeros in the bottom row.
    pub fn empty(k_rep: u32, m: u32) -> Self {
        Gfp { k_rep, top: Vec::new(), bottom: vec![0; m as usize] }
    }

    pub fn k_rep(&self) -> u32 {
        self.k_rep
    }

    pub fn top(&self) -> &[u32] {
        &self.top
    }

    pub fn bottom(&self) -> &[u32] {
        &self.bottom
    }

    pub fn offset(&self) -> i64 {
        self.top.len() as i64 - self.bottom.len() as i64
    }

    pub fn weight(&self) -> u64 {
        self.top.len() as u64 + self.top.iter().chain(&self.bottom).map(|&v| v as u64).sum::<u64>()
    }

    pub fn to_json(&self) -> String {
        let j = GfpJson { offset: self.offset(), top: self.top.clone(), bottom: self.bottom.clone() };
        serde_json::to_string(&j).expect("gfp serializes")
    }

    pub fn from_json(s: &str, k_rep: u32) -> Result<Self> {
        let j: GfpJson = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        let g = Gfp::new(k_rep, j.top, j.bottom)?;
        if g.offset() != j.offset {
            return Err(Error::Parse(format!("offset {} does not match row lengths", j.offset)));
        }
        Ok(g)
    }
}

impl fmt::Display for Gfp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let row = |r: &[u32]| r.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ");
        write!(f, "({} ; {})", row(&self.top), row(&self.bottom))
    }
}

/// Number of values occurring exactly once, counted separately per row.
pub fn distinct_parts(g: &Gfp) -> u32 {
    distinct_in_row(&g.top) + distinct_in_row(&g.bottom)
}

/// Weakly decreasing rows of the given length and sum, values at most
/// `max`, each value at most `k_rep` times.
fn rows(len: usize, sum: u64, max: u64, k_rep: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if len == 0 {
        if sum == 0 {
            out.push(prefix.clone());
        }
        return;
    }
    // Largest sum reachable with len entries below max+1, at most k_rep each.
    let mut cap = 0u64;
    let (mut v, mut left) = (max as i64, len);
    while left > 0 && v >= 0 {
        let c = left.min(k_rep as usize);
        cap += c as u64 * v as u64;
        left -= c;
        v -= 1;
    }
    if left > 0 || cap < sum {
        return;
    }
    for v in (0..=max.min(sum)).rev() {
        for c in 1..=len.min(k_rep as usize) {
            if c as u64 * v > sum {
                break;
            }
            for _ in 0..c {
                prefix.push(v as u32);
            }
            if v > 0 {
                rows(len - c, sum - c as u64 * v, v - 1, k_rep, prefix, out);
            } else if len == c && sum == 0 {
                out.push(prefix.clone());
            }
            prefix.truncate(prefix.len() - c);
        }
    }
}

fn all_rows(len: usize, sum: u64, k_rep: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    rows(len, sum, sum, k_rep, &mut Vec::new(), &mut out);
    out
}

/// All GFPs of weight n with the given offset and repetition bound, sorted.
pub fn enumerate(n: u64, offset: i64, k_rep: u32) -> Vec<Gfp> {
    let mut out = Vec::new();
    for s1 in offset.max(0)..=n as i64 {
        let s2 = s1 - offset;
        let rest = n - s1 as u64;
        for wt in 0..=rest {
            let tops = all_rows(s1 as usize, wt, k_rep);
            if tops.is_empty() {
                continue;
            }
            let bottoms = all_rows(s2 as usize, rest - wt, k_rep);
            for t in &tops {
                for b in &bottoms {
                    out.push(Gfp { k_rep, top: t.clone(), bottom: b.clone() });
                }
            }
        }
    }
    out.sort();
    out
}

/// Sum of q~^weight t^distinct_parts over all GFPs of weight at most `order`.
pub fn gf_enumerated(offset: i64, k_rep: u32, order: u32) -> TruncatedSeries {
    let mut s = TruncatedSeries::zero(order);
    for n in 0..=order {
        for g in enumerate(n as u64, offset, k_rep) {
            s.add_term(Monomial::new(n, distinct_parts(&g), 0), BigInt::one());
        }
    }
    s
}

/// A finite subset of C_m = {(x,y) : x + y = m mod k} read along the
/// leading diagonal (i - offset, -i).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiagramPoints {
    pub k: u32,
    pub m: u32,
    pub offset: i64,
    pub points: BTreeSet<(i64, i64)>,
}

impl DiagramPoints {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// The generalized Young diagram of g on C_m with m = -offset mod k_rep.
pub fn to_diagram(g: &Gfp) -> DiagramPoints {
    let k = g.k_rep as i64;
    let o = g.offset();
    let mut points = BTreeSet::new();
    for (idx, &a) in g.top.iter().enumerate() {
        let i = idx as i64 + 1;
        for l in 0..=a as i64 {
            points.insert((i - o + k * l, -i));
        }
    }
    for (idx, &b) in g.bottom.iter().enumerate() {
        let j = idx as i64 + 1;
        for l in 1..=b as i64 {
            points.insert((j, -j - o - k * l));
        }
    }
    DiagramPoints { k: g.k_rep, m: (-o).rem_euclid(k) as u32, offset: o, points }
}

/// Reads a GFP along the diagonal of `d.offset`, rejecting sets that are
/// not the diagram of any GFP.
pub fn from_diagram(d: &DiagramPoints) -> Result<Gfp> {
    let k = d.k as i64;
    let o = d.offset;
    if let Some(p) = d.points.iter().find(|(x, y)| (x + y - d.m as i64).rem_euclid(k) != 0) {
        return Err(Error::InvalidDiagram(format!("point {p:?} is not on C_{}", d.m)));
    }
    if (-o - d.m as i64).rem_euclid(k) != 0 {
        return Err(Error::InvalidDiagram(format!("offset {o} does not match lattice class {}", d.m)));
    }
    let mut s1 = 0i64;
    while d.points.contains(&(s1 + 1 - o, -(s1 + 1))) {
        s1 += 1;
    }
    let s2 = s1 - o;
    if s2 < 0 {
        return Err(Error::InvalidDiagram(format!("diagonal of length {s1} too short for offset {o}")));
    }
    let top: Vec<u32> = (1..=s1)
        .map(|i| d.points.range((i - o + 1, -i)..=(i64::MAX, -i)).filter(|p| p.1 == -i).count() as u32)
        .collect();
    let bottom: Vec<u32> = (1..=s2).map(|j| d.points.range((j, i64::MIN)..(j, -j - o)).count() as u32).collect();
    let g = Gfp::new(d.k, top, bottom).map_err(|e| Error::InvalidDiagram(e.to_string()))?;
    if to_diagram(&g).points != d.points {
        return Err(Error::InvalidDiagram("point set is not closed under the reading rules".into()));
    }
    Ok(g)
}

/// Column counts of the stacked-wave diagram of omega.
fn wave_columns(omega: &OmegaState) -> Vec<i64> {
    let (k, m) = (omega.k(), omega.m());
    let d = omega.depth();
    let mut cols = vec![0i64; d + 1];
    for x in (1..=d).rev() {
        let g = OmegaState::ground_value(k, m, x) as i64;
        cols[x - 1] = cols[x] + omega.get(x) as i64 - g;
    }
    cols.truncate(d);
    cols
}

fn wave_points(k: u32, m: u32, cols: &[i64]) -> BTreeSet<(i64, i64)> {
    let k = k as i64;
    let mut pts = BTreeSet::new();
    for (idx, &c) in cols.iter().enumerate() {
        let x = idx as i64 + 1;
        let top = -1 - (x - 1 - m as i64).rem_euclid(k);
        for j in 0..c {
            pts.insert((x, top - k * j));
        }
    }
    pts
}

/// Stacks omega_{-i} - 1{i = m mod k} copies of the length-i wave, removes a
/// bottom point from columns 1..i for each ground-occupied i with
/// omega_{-i} = 0, and reads the diagram with offset -m.
pub fn psi(omega: &OmegaState) -> Result<Gfp> {
    let cols = wave_columns(omega);
    if let Some(x) = cols.iter().position(|&c| c < 0) {
        return Err(Error::InvalidState(format!("negative column {} in wave stack", x + 1)));
    }
    let d = DiagramPoints {
        k: omega.k(),
        m: omega.m(),
        offset: -(omega.m() as i64),
        points: wave_points(omega.k(), omega.m(), &cols),
    };
    from_diagram(&d)
}

/// Inverse of psi: recovers omega from the column counts of the diagram.
pub fn psi_inverse(g: &Gfp) -> Result<OmegaState> {
    let d = to_diagram(g);
    let (k, m) = (d.k, d.m);
    if d.offset != -(m as i64) {
        return Err(Error::InvalidGfp(format!("offset {} is not in 1-k..=0", d.offset)));
    }
    let width = d.points.iter().map(|p| p.0).max().unwrap_or(0).max(0) as usize;
    let cols: Vec<i64> = (1..=width as i64).map(|x| d.points.iter().filter(|p| p.0 == x).count() as i64).collect();
    if wave_points(k, m, &cols) != d.points {
        return Err(Error::InvalidGfp("diagram is not a stack of waves".into()));
    }
    let mut vals = Vec::with_capacity(width + 1);
    for x in 1..=width.max(1) {
        let c = cols.get(x - 1).copied().unwrap_or(0);
        let next = cols.get(x).copied().unwrap_or(0);
        let v = c - next + OmegaState::ground_value(k, m, x) as i64;
        if v < 0 {
            return Err(Error::InvalidGfp("column counts increase".into()));
        }
        vals.push(v as u32);
    }
    OmegaState::new(k, m, vals)
}

/// Triangle adjoined to the left (new offset >= 0) or on top (new offset < 0).
fn triangle(k: u32, m: u32, new_offset: i64) -> BTreeSet<(i64, i64)> {
    let kk = k as i64;
    let on_lattice = |x: i64, y: i64| (x + y - m as i64).rem_euclid(kk) == 0;
    let mut t = BTreeSet::new();
    let size = new_offset.abs();
    if new_offset >= 0 {
        for x in -size..=0 {
            for y in -size - 1..=-1 {
                if x + y >= -size && on_lattice(x, y) {
                    t.insert((x, y));
                }
            }
        }
    } else {
        for x in 1..=size {
            for y in 0..=size {
                if x + y < size && on_lattice(x, y) {
                    t.insert((x, y));
                }
            }
        }
    }
    t
}

/// Re-reads g along the diagonal of `new_offset` after adjoining the
/// triangle; new_offset must be congruent to g's offset mod k_rep.
pub fn phi_to_offset(g: &Gfp, new_offset: i64) -> Result<Gfp> {
    let k = g.k_rep as i64;
    let o = g.offset();
    if o > 0 || o <= -k {
        return Err(Error::InvalidGfp(format!("phi needs offset in 1-k..=0, got {o}")));
    }
    if (new_offset - o).rem_euclid(k) != 0 {
        return Err(Error::Parameter(format!("offset {new_offset} is not congruent to {o} mod {k}")));
    }
    let mut d = to_diagram(g);
    d.points.extend(triangle(g.k_rep, d.m, new_offset));
    d.offset = new_offset;
    from_diagram(&d)
}

/// The generalized Wright map: offset -m becomes k*l - m and the weight
/// grows by k l(l+1)/2 - m l.
pub fn phi(g: &Gfp, l: i64) -> Result<Gfp> {
    phi_to_offset(g, g.k_rep as i64 * l + g.offset())
}

/// The k = 2 odd-offset convention: offset -1 becomes 2l + 1 and the weight
/// grows by (l+1)^2.
pub fn phi_odd(g: &Gfp, l: i64) -> Result<Gfp> {
    if g.k_rep != 2 || g.offset() != -1 {
        return Err(Error::InvalidGfp("phi_odd needs k_rep = 2 and offset -1".into()));
    }
    phi_to_offset(g, 2 * l + 1)
}

/// Weight added by phi_to_offset for a target offset k l - m.
pub fn phi_weight_shift(k: u32, m: u32, l: i64) -> i64 {
    k as i64 * l * (l + 1) / 2 - m as i64 * l
}

/// Classical Frobenius symbol: a_i = lambda_i - i, b_i = lambda'_i - i.
pub fn frobenius(partition: &[u32]) -> Result<Gfp> {
    if partition.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::InvalidGfp("partition must be weakly decreasing".into()));
    }
    let parts: Vec<u32> = partition.iter().copied().filter(|&v| v > 0).collect();
    let conj = conjugate(&parts);
    let durfee = (0..parts.len()).take_while(|&i| parts[i] as usize > i).count();
    let top = (0..durfee).map(|i| parts[i] - i as u32 - 1).collect();
    let bottom = (0..durfee).map(|i| conj[i] - i as u32 - 1).collect();
    Gfp::new(1, top, bottom)
}

pub fn frobenius_inverse(g: &Gfp) -> Result<Vec<u32>> {
    if g.k_rep != 1 || g.offset() != 0 {
        return Err(Error::InvalidGfp("need k_rep = 1 and offset 0".into()));
    }
    let d = g.top.len();
    let cols: Vec<u32> = (0..d).map(|i| g.bottom[i] + i as u32 + 1).collect();
    // Rows beyond the Durfee square come from the columns below it.
    let mut parts: Vec<u32> = (0..d).map(|i| g.top[i] + i as u32 + 1).collect();
    let mut row = d as u32;
    loop {
        let len = cols.iter().filter(|&&c| c > row).count() as u32;
        if len == 0 {
            break;
        }
        parts.push(len);
        row += 1;
    }
    Ok(parts)
}

pub fn conjugate(parts: &[u32]) -> Vec<u32> {
    let max = parts.first().copied().unwrap_or(0);
    (1..=max).map(|j| parts.iter().filter(|&&p| p >= j).count() as u32).collect()
}

/// Wright's map on ordinary GFPs: adjoin a triangle of size |k'|(|k'|+1)/2.
pub fn wright(g: &Gfp, k_prime: i64) -> Result<Gfp> {
    if g.k_rep != 1 || g.offset() != 0 {
        return Err(Error::InvalidGfp("Wright's map needs k_rep = 1 and offset 0".into()));
    }
    phi_to_offset(g, k_prime)
}
