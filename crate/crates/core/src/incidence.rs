//! Incidence counting, richness pruning and rich-line enumeration.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;

use rustc_hash::{FxHashMap, FxHashSet};
use serde::Serialize;

use crate::energies::{LineSet, ScalarSet};
use crate::error::{input, Error, Result};
use crate::rational::{Line, Point, Rational};
use crate::small::{all_small, Frac};

pub const DEFAULT_INCIDENCE_ORACLE_CAP: u128 = 100_000_000;
pub const DEFAULT_RICH_POINT_CAP: usize = 5000;

/// Counts pairs `(p, ℓ)` with `p` on `ℓ` by testing every pair.
pub fn count_incidences_oracle(points: &[Point], lines: &LineSet, cap: u128) -> Result<u64> {
    let size = points.len() as u128 * lines.len() as u128;
    if size > cap {
        return Err(Error::CapExceeded { what: "incidence oracle", size, cap });
    }
    Ok(lines
        .iter()
        .map(|l| points.iter().filter(|p| l.eval(&p.x) == p.y).count() as u64)
        .sum())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IncidenceProfile {
    pub total: u64,
    pub per_line: Vec<(Line, u64)>,
    /// richness -> number of lines with that richness
    pub histogram: BTreeMap<u64, u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct IncidenceSummary {
    pub total: u64,
    pub min: u64,
    pub max: u64,
    pub median: u64,
}

impl IncidenceProfile {
    fn from_counts(per_line: Vec<(Line, u64)>) -> Self {
        let mut histogram = BTreeMap::new();
        for (_, k) in &per_line {
            *histogram.entry(*k).or_insert(0) += 1;
        }
        IncidenceProfile { total: per_line.iter().map(|(_, k)| k).sum(), per_line, histogram }
    }

    /// Lower median of the per-line counts; 0 for an empty profile.
    pub fn median(&self) -> u64 {
        let mut seen = 0u64;
        let target = (self.per_line.len() as u64).saturating_sub(1) / 2;
        for (&k, &lines) in &self.histogram {
            seen += lines;
            if seen > target {
                return k;
            }
        }
        0
    }

    pub fn summary(&self) -> IncidenceSummary {
        IncidenceSummary {
            total: self.total,
            min: self.histogram.keys().next().copied().unwrap_or(0),
            max: self.histogram.keys().next_back().copied().unwrap_or(0),
            median: self.median(),
        }
    }

    /// `line_c,line_d,count` with a header row.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "line_c,line_d,count")?;
        for (l, k) in &self.per_line {
            writeln!(out, "{},{},{}", l.c, l.d, k)?;
        }
        Ok(())
    }
}

/// Membership test for `B` specialised to integer sets.
enum IntRows {
    Range(i64, i64),
    Set(FxHashSet<i64>),
}

impl IntRows {
    fn new(b: &[i64]) -> Self {
        match (b.first(), b.last()) {
            (Some(&lo), Some(&hi)) if (hi - lo) as usize + 1 == b.len() => IntRows::Range(lo, hi),
            _ => IntRows::Set(b.iter().copied().collect()),
        }
    }

    fn contains(&self, y: i128) -> bool {
        match self {
            IntRows::Range(lo, hi) => (*lo as i128..=*hi as i128).contains(&y),
            IntRows::Set(s) => i64::try_from(y).is_ok_and(|y| s.contains(&y)),
        }
    }
}

fn integer_values(xs: &ScalarSet) -> Option<Vec<i64>> {
    xs.iter()
        .map(|x| if x.is_integer() { x.to_i64_pair().map(|(n, _)| n) } else { None })
        .collect()
}

/// Per-line counter over one representation of `A` and `B`.
enum Counter<'a> {
    Integer { xs: Vec<i64>, rows: IntRows },
    Small { xs: Vec<Frac>, rows: FxHashSet<Frac> },
    Big { a: &'a ScalarSet, b: &'a ScalarSet },
}

impl<'a> Counter<'a> {
    fn new(a: &'a ScalarSet, b: &'a ScalarSet) -> Self {
        if let (Some(xs), Some(ys)) = (integer_values(a), integer_values(b)) {
            return Counter::Integer { xs, rows: IntRows::new(&ys) };
        }
        if let (Some(xs), Some(ys)) = (all_small(a.as_slice()), all_small(b.as_slice())) {
            return Counter::Small { xs, rows: ys.into_iter().collect() };
        }
        Counter::Big { a, b }
    }

    fn big(a: &ScalarSet, b: &ScalarSet, line: &Line) -> u64 {
        a.iter().filter(|x| b.contains(&line.eval(x))).count() as u64
    }

    fn count(&self, line: &Line, a: &ScalarSet, b: &ScalarSet) -> u64 {
        let fast = match self {
            Counter::Integer { xs, rows } => Self::count_integer(xs, rows, line),
            Counter::Small { xs, rows } => Self::count_small(xs, rows, line),
            Counter::Big { a, b } => return Self::big(a, b, line),
        };
        fast.unwrap_or_else(|| Self::big(a, b, line))
    }

    /// `y = (P·x + Q) / D` with `D = lcm` of the coefficient denominators.
    fn count_integer(xs: &[i64], rows: &IntRows, line: &Line) -> Option<u64> {
        let c = Frac::from_rational(&line.c)?;
        let d = Frac::from_rational(&line.d)?;
        let g = num_integer::Integer::gcd(&c.denom(), &d.denom());
        let den = (c.denom() / g).checked_mul(d.denom())?;
        let p = c.numer().checked_mul(den / c.denom())?;
        let q = d.numer().checked_mul(den / d.denom())?;
        let mut count = 0u64;
        for &x in xs {
            let num = p.checked_mul(x as i128)?.checked_add(q)?;
            if num % den == 0 && rows.contains(num / den) {
                count += 1;
            }
        }
        Some(count)
    }

    fn count_small(xs: &[Frac], rows: &FxHashSet<Frac>, line: &Line) -> Option<u64> {
        let c = Frac::from_rational(&line.c)?;
        let d = Frac::from_rational(&line.d)?;
        let mut count = 0u64;
        for &x in xs {
            if rows.contains(&c.mul(x)?.add(d)?) {
                count += 1;
            }
        }
        Some(count)
    }
}

/// Incidences between `A × B` and `lines` without materialising the grid:
/// for each line, count `x ∈ A` with `c·x + d ∈ B`.
pub fn count_incidences_product(a: &ScalarSet, b: &ScalarSet, lines: &LineSet) -> IncidenceProfile {
    let counter = Counter::new(a, b);
    let count = |l: &Line| (l.clone(), counter.count(l, a, b));
    #[cfg(feature = "parallel")]
    let per_line: Vec<(Line, u64)> = {
        use rayon::prelude::*;
        lines.as_slice().par_iter().map(count).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let per_line: Vec<(Line, u64)> = lines.iter().map(count).collect();
    IncidenceProfile::from_counts(per_line)
}

/// Inclusive richness band; `hi = None` means unbounded.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Band {
    pub lo: u64,
    pub hi: Option<u64>,
}

impl Band {
    pub fn new(lo: u64, hi: Option<u64>) -> Result<Self> {
        if let Some(hi) = hi {
            if lo > hi {
                return input(format!("empty band [{lo}, {hi}]"));
            }
        }
        Ok(Band { lo, hi })
    }

    pub fn all() -> Self {
        Band { lo: 0, hi: None }
    }

    /// `[median/4, 4·median]` of the observed richness.
    pub fn around_median(profile: &IncidenceProfile) -> Self {
        let m = profile.median();
        Band { lo: m / 4, hi: Some(m.saturating_mul(4)) }
    }

    pub fn contains(&self, k: u64) -> bool {
        k >= self.lo && self.hi.is_none_or(|hi| k <= hi)
    }
}

impl fmt::Display for Band {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.hi {
            Some(hi) => write!(f, "{}:{}", self.lo, hi),
            None => write!(f, "{}:", self.lo),
        }
    }
}

impl std::str::FromStr for Band {
    type Err = Error;

    /// `LO:HI`, with `HI` empty or `inf` for an open band.
    fn from_str(s: &str) -> Result<Self> {
        let (lo, hi) = s
            .split_once(':')
            .ok_or_else(|| Error::Input(format!("band must look like LO:HI, got {s:?}")))?;
        let lo = lo.trim().parse::<u64>().map_err(|_| Error::Input(format!("bad band low end {lo:?}")))?;
        let hi = match hi.trim() {
            "" | "inf" => None,
            h => Some(h.parse::<u64>().map_err(|_| Error::Input(format!("bad band high end {h:?}")))?),
        };
        Band::new(lo, hi)
    }
}

/// The lines whose richness over `A × B` lies in `band`.
pub fn prune_richness_band(a: &ScalarSet, b: &ScalarSet, lines: &LineSet, band: Band) -> LineSet {
    let profile = count_incidences_product(a, b, lines);
    let keep: FxHashSet<&Line> = profile
        .per_line
        .iter()
        .filter(|(_, k)| band.contains(*k))
        .map(|(l, _)| l)
        .collect();
    lines.filtered(|l| keep.contains(l))
}

/// A line through a general point set; vertical lines only occur here.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum PlaneLine {
    Sloped(Line),
    Vertical(Rational),
}

impl PlaneLine {
    pub fn through(p: &Point, q: &Point) -> PlaneLine {
        if p.x == q.x {
            return PlaneLine::Vertical(p.x.clone());
        }
        let c = (&q.y - &p.y) / (&q.x - &p.x);
        let d = &p.y - &(&c * &p.x);
        PlaneLine::Sloped(Line::new(c, d))
    }

    pub fn contains(&self, p: &Point) -> bool {
        match self {
            PlaneLine::Sloped(l) => l.contains(p),
            PlaneLine::Vertical(x) => &p.x == x,
        }
    }
}

impl fmt::Display for PlaneLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlaneLine::Sloped(l) => write!(f, "{l}"),
            PlaneLine::Vertical(x) => write!(f, "x = {x}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RichLines {
    pub r: usize,
    pub points: usize,
    /// sorted by line
    pub lines: Vec<(PlaneLine, usize)>,
    /// `m²/r³ + m/r`
    pub reference: f64,
}

impl RichLines {
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "kind,line_c,line_d,x,count")?;
        for (l, k) in &self.lines {
            match l {
                PlaneLine::Sloped(l) => writeln!(out, "sloped,{},{},,{}", l.c, l.d, k)?,
                PlaneLine::Vertical(x) => writeln!(out, "vertical,,,{x},{k}")?,
            }
        }
        Ok(())
    }
}

/// All lines through at least `r` of `points` (duplicates ignored).
///
/// Point pairs are grouped under the exact line they span. A line is recorded
/// from its first point in input order, where the pair group is complete.
pub fn enumerate_rich_lines(points: &[Point], r: usize, cap: usize) -> Result<RichLines> {
    if r < 2 {
        return input(format!("richness threshold must be at least 2, got {r}"));
    }
    let mut pts = points.to_vec();
    pts.sort();
    pts.dedup();
    if pts.len() > cap {
        return Err(Error::CapExceeded { what: "rich-line enumeration", size: pts.len() as u128, cap: cap as u128 });
    }
    let mut rich: FxHashMap<PlaneLine, usize> = FxHashMap::default();
    for (i, p) in pts.iter().enumerate() {
        let mut through_p: FxHashMap<PlaneLine, usize> = FxHashMap::default();
        for q in &pts[i + 1..] {
            *through_p.entry(PlaneLine::through(p, q)).or_insert(0) += 1;
        }
        for (line, k) in through_p {
            if k + 1 >= r {
                rich.entry(line).or_insert(k + 1);
            }
        }
    }
    let mut lines: Vec<(PlaneLine, usize)> = rich.into_iter().collect();
    lines.sort();
    let m = pts.len() as f64;
    let rf = r as f64;
    Ok(RichLines { r, points: pts.len(), lines, reference: m * m / rf.powi(3) + m / rf })
}

/// Every point of `A × B`, row by row. Only for small grids.
pub fn grid_points(a: &ScalarSet, b: &ScalarSet) -> Vec<Point> {
    a.iter()
        .flat_map(|x| b.iter().map(move |y| Point::new(x.clone(), y.clone())))
        .collect()
}
