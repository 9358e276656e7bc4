//! Parallel and concurrent families, dyadic binning, and the structure reports
//! built from them.
//!
//! The Θ(·) statements being probed have no explicit constants, so every
//! "family of Θ(n^β) lines" and "energy Θ(t)" is realised by the dominant bin
//! of a dyadic profile weighted by incidences. Ties go to the smaller exponent.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rustc_hash::{FxHashMap, FxHashSet};
use serde::Serialize;

use crate::constructions::Configuration;
use crate::energies::{additive_energy, multiplicative_energy, LineSet, ScalarSet};
use crate::error::{input, Error, Result};
use crate::incidence::{count_incidences_product, Band, IncidenceProfile};
use crate::rational::{Intersection, Line, Point, Rational};
use crate::small::{Frac, SmallLine};

pub const DEFAULT_CONCURRENT_CAP: usize = 8192;

/// Lines grouped by exact slope, largest group first, ties by slope.
pub fn parallel_families(lines: &LineSet) -> Vec<(Rational, LineSet)> {
    let mut families: Vec<(Rational, LineSet)> = Vec::new();
    // line sets are sorted by slope first, so equal slopes are adjacent
    for chunk in lines.as_slice().chunk_by(|a, b| a.c == b.c) {
        let fam = LineSet::new(chunk.to_vec()).expect("subset of a valid line set");
        families.push((chunk[0].c.clone(), fam));
    }
    families.sort_by(|(s1, f1), (s2, f2)| f2.len().cmp(&f1.len()).then_with(|| s1.cmp(s2)));
    families
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum PointKey {
    Small(Frac, Frac),
    Big(Point),
}

impl PointKey {
    fn from_point(p: Point) -> PointKey {
        match (Frac::from_rational_wide(&p.x), Frac::from_rational_wide(&p.y)) {
            (Some(x), Some(y)) => PointKey::Small(x, y),
            _ => PointKey::Big(p),
        }
    }

    fn to_point(&self) -> Point {
        match self {
            PointKey::Small(x, y) => Point::new(
                Rational::new(x.numer(), x.denom()).expect("reduced"),
                Rational::new(y.numer(), y.denom()).expect("reduced"),
            ),
            PointKey::Big(p) => p.clone(),
        }
    }
}

fn crossing(lines: &[Line], small: Option<&[SmallLine]>, i: usize, j: usize) -> Option<PointKey> {
    if lines[i].c == lines[j].c {
        return None;
    }
    if let Some(s) = small {
        if let Some((x, y)) = s[i].crossing(s[j]) {
            return Some(PointKey::Small(x, y));
        }
    }
    match lines[i].intersection(&lines[j]) {
        Intersection::Point(p) => Some(PointKey::from_point(p)),
        _ => None,
    }
}

/// Every point lying on at least `min_size` of `lines`, with the indices of
/// all lines through it.
///
/// Each point is discovered from the first line through it: the crossings of
/// line `i` with lines `j > i` are grouped, and that group plus `i` is complete.
fn pencils(lines: &LineSet, min_size: usize) -> Vec<(PointKey, Vec<u32>)> {
    let ls = lines.as_slice();
    let small: Option<Vec<SmallLine>> = ls.iter().map(SmallLine::from_line).collect();
    let per_line = |i: usize| -> Vec<(PointKey, Vec<u32>)> {
        let mut through: FxHashMap<PointKey, Vec<u32>> = FxHashMap::default();
        for j in i + 1..ls.len() {
            if let Some(p) = crossing(ls, small.as_deref(), i, j) {
                through.entry(p).or_default().push(j as u32);
            }
        }
        through
            .into_iter()
            .filter(|(_, js)| js.len() + 1 >= min_size)
            .map(|(p, mut js)| {
                js.insert(0, i as u32);
                (p, js)
            })
            .collect()
    };
    #[cfg(feature = "parallel")]
    let found: Vec<Vec<(PointKey, Vec<u32>)>> = {
        use rayon::prelude::*;
        (0..ls.len()).into_par_iter().map(per_line).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let found: Vec<Vec<(PointKey, Vec<u32>)>> = (0..ls.len()).map(per_line).collect();

    // keep the first (complete) sighting of each point
    let mut seen: FxHashSet<PointKey> = FxHashSet::default();
    let mut out = Vec::new();
    for (p, js) in found.into_iter().flatten() {
        if seen.insert(p.clone()) {
            out.push((p, js));
        }
    }
    out
}

/// The largest number of lines through a single point (1 if no two lines meet).
pub fn max_concurrency(lines: &LineSet) -> usize {
    if lines.is_empty() {
        return 0;
    }
    pencils(lines, 2).iter().map(|(_, js)| js.len()).max().unwrap_or(1)
}

/// Greedy line-disjoint pencils: repeatedly take the point with the most
/// unused lines through it, while that number is at least `min_size`.
/// Ties go to the lexicographically smaller point.
pub fn concurrent_families(lines: &LineSet, min_size: usize, cap: usize) -> Result<Vec<(Point, LineSet)>> {
    if min_size < 2 {
        return input("concurrent families need min_size >= 2");
    }
    if lines.len() > cap {
        return Err(Error::CapExceeded { what: "concurrent families", size: lines.len() as u128, cap: cap as u128 });
    }
    let candidates: Vec<(Point, Vec<u32>)> = pencils(lines, min_size)
        .into_iter()
        .map(|(k, js)| (k.to_point(), js))
        .collect();
    let mut heap: BinaryHeap<(usize, Reverse<&Point>, usize)> = candidates
        .iter()
        .enumerate()
        .map(|(idx, (p, js))| (js.len(), Reverse(p), idx))
        .collect();
    let mut used = vec![false; lines.len()];
    let mut families = Vec::new();
    while let Some((count, point, idx)) = heap.pop() {
        if count < min_size {
            break;
        }
        let free: Vec<u32> = candidates[idx].1.iter().copied().filter(|&j| !used[j as usize]).collect();
        if free.len() < count {
            // stale entry; requeue with its current size
            heap.push((free.len(), point, idx));
            continue;
        }
        for &j in &free {
            used[j as usize] = true;
        }
        let fam = LineSet::new(free.iter().map(|&j| lines.as_slice()[j as usize].clone()).collect())?;
        families.push((point.0.clone(), fam));
    }
    Ok(families)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FamilyInventory {
    pub parallel: Vec<(Rational, LineSet)>,
    pub concurrent: Vec<(Point, LineSet)>,
    /// lines in no concurrent family
    pub leftovers: LineSet,
}

pub fn family_inventory(lines: &LineSet, min_size: usize) -> Result<FamilyInventory> {
    let concurrent = concurrent_families(lines, min_size, DEFAULT_CONCURRENT_CAP)?;
    let used: FxHashSet<&Line> = concurrent.iter().flat_map(|(_, f)| f.iter()).collect();
    Ok(FamilyInventory {
        parallel: parallel_families(lines),
        leftovers: lines.filtered(|l| !used.contains(l)),
        concurrent,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DyadicBin {
    /// the bin holds values in `[2^j, 2^(j+1))`
    pub j: u64,
    pub members: u64,
    #[serde(with = "crate::serde_big::biguint")]
    pub weight: BigUint,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DyadicProfile {
    /// nonempty bins in increasing `j`
    pub bins: Vec<DyadicBin>,
    pub dominant_j: u64,
    /// `log_n 2^dominant_j`
    pub exponent: f64,
}

impl DyadicProfile {
    pub fn bin_of(value: &BigUint) -> u64 {
        value.bits() - 1
    }

    pub fn dominant(&self) -> &DyadicBin {
        self.bins.iter().find(|b| b.j == self.dominant_j).expect("dominant bin exists")
    }
}

/// Bins positive `values` by `⌊log₂ v⌋`; the dominant bin has the largest
/// total weight (weights default to 1).
pub fn dyadic_profile(values: &[BigUint], weights: Option<&[u64]>, base_n: f64) -> Result<DyadicProfile> {
    if values.is_empty() {
        return input("dyadic profile of no values");
    }
    if let Some(w) = weights {
        if w.len() != values.len() {
            return input(format!("{} weights for {} values", w.len(), values.len()));
        }
    }
    let mut bins: std::collections::BTreeMap<u64, (u64, BigUint)> = Default::default();
    for (idx, v) in values.iter().enumerate() {
        if v.bits() == 0 {
            return input("dyadic profile needs positive values");
        }
        let w = weights.map_or(1, |w| w[idx]);
        let entry = bins.entry(DyadicProfile::bin_of(v)).or_insert((0, BigUint::default()));
        entry.0 += 1;
        entry.1 += w;
    }
    let bins: Vec<DyadicBin> = bins
        .into_iter()
        .map(|(j, (members, weight))| DyadicBin { j, members, weight })
        .collect();
    // strict comparison keeps the first (smallest j) maximiser
    let mut dominant = &bins[0];
    for b in &bins[1..] {
        if b.weight > dominant.weight {
            dominant = b;
        }
    }
    let dominant_j = dominant.j;
    Ok(DyadicProfile { bins, dominant_j, exponent: dominant_j as f64 * 2f64.ln() / base_n.ln() })
}

/// A real-valued report entry together with the expression it evaluates.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TaggedReal {
    pub value: f64,
    pub formula: &'static str,
}

impl TaggedReal {
    fn new(value: f64, formula: &'static str) -> Self {
        TaggedReal { value, formula }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ParallelFamilySummary {
    pub slope: Rational,
    pub size: usize,
    #[serde(with = "crate::serde_big::u64_str")]
    pub incidences: u64,
    /// additive energy of the intercepts; only computed for the dominant size bin
    #[serde(with = "opt_big")]
    pub intercept_energy: Option<BigUint>,
    pub selected: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConcurrentFamilySummary {
    pub point: Point,
    pub size: usize,
    #[serde(with = "crate::serde_big::u64_str")]
    pub incidences: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Parallel,
    Concurrent,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ElekesFields {
    pub k: usize,
    pub alpha_rich: Rational,
    pub min_incidences: u64,
    pub rhs_bound_shape: TaggedReal,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StructureReport {
    #[serde(with = "crate::serde_big::u64_str")]
    pub n: u64,
    pub alpha: Option<Rational>,
    pub log_base: &'static str,
    /// set when no family survives; the remaining fields are then empty
    pub degenerate: bool,
    pub band: Option<Band>,
    pub lines_considered: usize,
    #[serde(with = "crate::serde_big::u64_str")]
    pub incidences: u64,
    pub branch: Option<Branch>,
    pub beta: Option<TaggedReal>,
    pub gamma: Option<TaggedReal>,
    pub families_used: usize,
    pub parallel: Vec<ParallelFamilySummary>,
    pub concurrent: Vec<ConcurrentFamilySummary>,
    /// set when the concurrent search was skipped for exceeding its cap
    pub concurrent_skipped: bool,
    #[serde(with = "opt_big")]
    pub t: Option<BigUint>,
    pub slopes: ScalarSet,
    #[serde(with = "opt_big")]
    pub e_times_s: Option<BigUint>,
    #[serde(with = "opt_big")]
    pub product: Option<BigUint>,
    pub reference: Vec<TaggedReal>,
    pub elekes: Option<ElekesFields>,
}

impl StructureReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    fn empty(n: u64, alpha: Option<Rational>) -> Self {
        StructureReport {
            n,
            alpha,
            log_base: "e",
            degenerate: true,
            band: None,
            lines_considered: 0,
            incidences: 0,
            branch: None,
            beta: None,
            gamma: None,
            families_used: 0,
            parallel: Vec::new(),
            concurrent: Vec::new(),
            concurrent_skipped: false,
            t: None,
            slopes: ScalarSet::default(),
            e_times_s: None,
            product: None,
            reference: Vec::new(),
            elekes: None,
        }
    }
}

mod opt_big {
    use num_bigint::BigUint;
    use serde::Serializer;

    pub fn serialize<S: Serializer>(v: &Option<BigUint>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(v) => s.collect_str(v),
            None => s.serialize_none(),
        }
    }
}

/// Lower median.
fn lower_median(mut xs: Vec<BigUint>) -> BigUint {
    xs.sort();
    xs.swap_remove((xs.len() - 1) / 2)
}

struct ParallelAnalysis {
    beta: f64,
    summaries: Vec<ParallelFamilySummary>,
    selected_incidences: u64,
    families_used: usize,
    t: BigUint,
    slopes: ScalarSet,
    e_times_s: BigUint,
}

/// Steps shared by both reports: dyadic family sizes → β, intercept energies
/// of the dominant size bin → t, slopes of the dominant energy bin → E^×(S).
fn analyse_parallel(lines: &LineSet, richness: &FxHashMap<&Line, u64>, base_n: f64) -> Result<Option<ParallelAnalysis>> {
    let families = parallel_families(lines);
    if families.is_empty() {
        return Ok(None);
    }
    let fam_incidences: Vec<u64> = families
        .iter()
        .map(|(_, f)| f.iter().map(|l| richness[l]).sum())
        .collect();
    let sizes: Vec<BigUint> = families.iter().map(|(_, f)| BigUint::from(f.len())).collect();
    let size_profile = dyadic_profile(&sizes, Some(&fam_incidences), base_n)?;
    let size_bin = size_profile.dominant_j;

    let mut summaries: Vec<ParallelFamilySummary> = families
        .iter()
        .zip(&fam_incidences)
        .map(|((slope, f), &inc)| ParallelFamilySummary {
            slope: slope.clone(),
            size: f.len(),
            incidences: inc,
            intercept_energy: None,
            selected: false,
        })
        .collect();
    let in_size_bin: Vec<usize> = (0..families.len())
        .filter(|&i| DyadicProfile::bin_of(&sizes[i]) == size_bin)
        .collect();
    let mut energies = Vec::with_capacity(in_size_bin.len());
    for &i in &in_size_bin {
        let intercepts: ScalarSet = families[i].1.iter().map(|l| l.d.clone()).collect();
        let e = additive_energy(&intercepts)?.value;
        summaries[i].intercept_energy = Some(e.clone());
        energies.push(e);
    }
    let weights: Vec<u64> = in_size_bin.iter().map(|&i| fam_incidences[i]).collect();
    let energy_profile = dyadic_profile(&energies, Some(&weights), base_n)?;

    let mut chosen_energies = Vec::new();
    let mut slopes = Vec::new();
    let mut selected_incidences = 0;
    for (pos, &i) in in_size_bin.iter().enumerate() {
        if DyadicProfile::bin_of(&energies[pos]) == energy_profile.dominant_j {
            summaries[i].selected = true;
            chosen_energies.push(energies[pos].clone());
            slopes.push(families[i].0.clone());
            selected_incidences += fam_incidences[i];
        }
    }
    let slopes = ScalarSet::new(slopes);
    let e_times_s = multiplicative_energy(&slopes)?.value;
    Ok(Some(ParallelAnalysis {
        beta: size_profile.exponent,
        families_used: slopes.len(),
        summaries,
        selected_incidences,
        t: lower_median(chosen_energies),
        slopes,
        e_times_s,
    }))
}

fn richness_map(profile: &IncidenceProfile) -> FxHashMap<&Line, u64> {
    profile.per_line.iter().map(|(l, k)| (l, *k)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StructureParams {
    /// smallest concurrent family reported
    pub min_size: usize,
    /// richness band; `None` uses `[median/4, 4·median]`
    pub band: Option<Band>,
}

impl Default for StructureParams {
    fn default() -> Self {
        StructureParams { min_size: 3, band: None }
    }
}

/// Richness-prune, then analyse parallel families (β, t, S, E^×(S)) and the
/// concurrent families (γ) of a Cartesian configuration.
pub fn structure_report(cfg: &Configuration, params: StructureParams) -> Result<StructureReport> {
    let alpha = Some(cfg.alpha.clone());
    let full = count_incidences_product(&cfg.a, &cfg.b, &cfg.lines);
    let band = params.band.unwrap_or_else(|| Band::around_median(&full));
    let kept: FxHashSet<&Line> = full.per_line.iter().filter(|(_, k)| band.contains(*k)).map(|(l, _)| l).collect();
    let pruned = cfg.lines.filtered(|l| kept.contains(l));
    let richness = richness_map(&full);
    let base_n = (cfg.n as f64).max(2.0);

    let mut report = StructureReport::empty(cfg.n, alpha);
    report.band = Some(band);
    report.lines_considered = pruned.len();
    report.incidences = pruned.iter().map(|l| richness[l]).sum();
    let n = cfg.n as f64;
    let exponent = 3.0 - cfg.alpha.to_f64();
    report.reference = vec![
        TaggedReal::new(n.powf(exponent), "n^(3-alpha)"),
        TaggedReal::new(n.powf(exponent) / n.ln().powi(12), "n^(3-alpha)/ln(n)^12"),
    ];

    let Some(par) = analyse_parallel(&pruned, &richness, base_n)? else {
        return Ok(report);
    };
    report.degenerate = false;
    report.beta = Some(TaggedReal::new(par.beta, "log_n 2^j, j = dominant family-size bin"));
    report.families_used = par.families_used;
    report.product = Some(&par.e_times_s * &par.t);
    report.parallel = par.summaries;
    report.t = Some(par.t);
    report.slopes = par.slopes;
    report.e_times_s = Some(par.e_times_s);

    let mut concurrent_incidences = 0;
    match concurrent_families(&pruned, params.min_size, DEFAULT_CONCURRENT_CAP) {
        Ok(fams) => {
            report.concurrent = fams
                .iter()
                .map(|(p, f)| ConcurrentFamilySummary {
                    point: p.clone(),
                    size: f.len(),
                    incidences: f.iter().map(|l| richness[l]).sum(),
                })
                .collect();
            if !report.concurrent.is_empty() {
                let sizes: Vec<BigUint> = report.concurrent.iter().map(|c| BigUint::from(c.size)).collect();
                let weights: Vec<u64> = report.concurrent.iter().map(|c| c.incidences).collect();
                let prof = dyadic_profile(&sizes, Some(&weights), base_n)?;
                concurrent_incidences = report
                    .concurrent
                    .iter()
                    .filter(|c| DyadicProfile::bin_of(&BigUint::from(c.size)) == prof.dominant_j)
                    .map(|c| c.incidences)
                    .sum();
                report.gamma = Some(TaggedReal::new(prof.exponent, "log_n 2^j, j = dominant pencil-size bin"));
            }
        }
        Err(Error::CapExceeded { .. }) => report.concurrent_skipped = true,
        Err(e) => return Err(e),
    }
    report.branch = Some(if par.selected_incidences >= concurrent_incidences {
        Branch::Parallel
    } else {
        Branch::Concurrent
    });
    Ok(report)
}

/// Restricts `lines` to those meeting at least `alpha_rich·|A|` points of
/// `A × A`, then runs the parallel-family analysis with `n = |A|` and reports
/// `n^{1/4} t^{1/4} E^×(S)^{1/4} (ln n)³ / alpha^{3/2}` beside `k`.
pub fn elekes_report(a: &ScalarSet, lines: &LineSet, alpha_rich: &Rational) -> Result<StructureReport> {
    if !(alpha_rich.is_positive() && alpha_rich <= &Rational::one()) {
        return input(format!("alpha_rich must lie in (0, 1], got {alpha_rich}"));
    }
    let n = a.len() as u64;
    let threshold_exact = alpha_rich * &Rational::from(n as i64);
    let threshold = threshold_exact.as_big().ceil().to_integer().to_u64().expect("threshold fits");
    let full = count_incidences_product(a, a, lines);
    let richness = richness_map(&full);
    let rich = lines.filtered(|l| richness[l] >= threshold);

    let mut report = StructureReport::empty(n, None);
    report.band = Some(Band { lo: threshold, hi: None });
    report.lines_considered = rich.len();
    report.incidences = rich.iter().map(|l| richness[l]).sum();
    let mut elekes = ElekesFields {
        k: rich.len(),
        alpha_rich: alpha_rich.clone(),
        min_incidences: threshold,
        rhs_bound_shape: TaggedReal::new(f64::NAN, "n^(1/4) t^(1/4) E^x(S)^(1/4) ln(n)^3 / alpha^(3/2)"),
    };
    let Some(par) = analyse_parallel(&rich, &richness, (n as f64).max(2.0))? else {
        report.elekes = Some(elekes);
        return Ok(report);
    };
    let nf = n as f64;
    let t = par.t.to_f64().unwrap_or(f64::INFINITY);
    let e = par.e_times_s.to_f64().unwrap_or(f64::INFINITY);
    elekes.rhs_bound_shape.value =
        nf.powf(0.25) * t.powf(0.25) * e.powf(0.25) * nf.ln().powi(3) / alpha_rich.to_f64().powf(1.5);

    report.degenerate = false;
    report.elekes = Some(elekes);
    report.branch = Some(Branch::Parallel);
    report.beta = Some(TaggedReal::new(par.beta, "log_n 2^j, j = dominant family-size bin"));
    report.families_used = par.families_used;
    report.product = Some(&par.e_times_s * &par.t);
    report.parallel = par.summaries;
    report.t = Some(par.t);
    report.slopes = par.slopes;
    report.e_times_s = Some(par.e_times_s);
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecompositionThresholds {
    pub parallel_min: usize,
    pub concurrent_min: usize,
    /// stop once the remaining incidences drop below this fraction of the start
    pub stop_fraction: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum FamilyAnchor {
    Parallel { slope: Rational },
    Concurrent { point: Point },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RemovalEvent {
    pub anchor: FamilyAnchor,
    pub size: usize,
    pub incidences_removed: u64,
    pub lines: LineSet,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Decomposition {
    pub initial_incidences: u64,
    pub events: Vec<RemovalEvent>,
    pub remaining: LineSet,
    pub remaining_incidences: u64,
}

/// Peels off the largest parallel family while it has at least
/// `parallel_min` lines, otherwise the heaviest pencil with at least
/// `concurrent_min` lines, until neither exists or the incidences left fall
/// below `stop_fraction` of the original.
pub fn iterative_decomposition(cfg: &Configuration, th: DecompositionThresholds) -> Result<Decomposition> {
    if th.parallel_min == 0 || th.concurrent_min < 2 {
        return input("decomposition needs parallel_min >= 1 and concurrent_min >= 2");
    }
    if !(th.stop_fraction > 0.0 && th.stop_fraction < 1.0) {
        return input(format!("stop_fraction must lie in (0, 1), got {}", th.stop_fraction));
    }
    let profile = count_incidences_product(&cfg.a, &cfg.b, &cfg.lines);
    let richness = richness_map(&profile);
    let initial = profile.total;
    let mut remaining = cfg.lines.clone();
    let mut left = initial;
    let mut events = Vec::new();
    while !remaining.is_empty() && (left as f64) >= th.stop_fraction * initial as f64 {
        let mut pick: Option<(FamilyAnchor, LineSet)> = parallel_families(&remaining)
            .into_iter()
            .next()
            .filter(|(_, f)| f.len() >= th.parallel_min)
            .map(|(slope, f)| (FamilyAnchor::Parallel { slope }, f));
        if pick.is_none() {
            pick = concurrent_families(&remaining, th.concurrent_min, usize::MAX)?
                .into_iter()
                .next()
                .map(|(point, f)| (FamilyAnchor::Concurrent { point }, f));
        }
        let Some((anchor, fam)) = pick else { break };
        let removed: u64 = fam.iter().map(|l| richness[l]).sum();
        remaining = remaining.filtered(|l| !fam.contains(l));
        left -= removed;
        events.push(RemovalEvent { anchor, size: fam.len(), incidences_removed: removed, lines: fam });
    }
    Ok(Decomposition { initial_incidences: initial, events, remaining, remaining_incidences: left })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{build_elekes, build_geometric};
    use crate::rational::rat;

    fn lines(ls: &[(i64, i64)]) -> LineSet {
        LineSet::new(ls.iter().map(|&(c, d)| Line::int(c, d)).collect()).unwrap()
    }

    fn big(n: u64) -> BigUint {
        BigUint::from(n)
    }

    #[test]
    fn parallel_examples() {
        let fams = parallel_families(&build_elekes(64).unwrap().lines);
        assert_eq!(fams.len(), 4);
        assert!(fams.iter().all(|(_, f)| f.len() == 16));
        assert_eq!(fams.iter().map(|(s, _)| s.clone()).collect::<Vec<_>>(), (1..=4).map(Rational::from).collect::<Vec<_>>());
        let fams = parallel_families(&build_geometric(64).unwrap().lines);
        assert_eq!(fams.len(), 33);
        let fams = parallel_families(&lines(&[(1, 0), (1, 1), (2, 0)]));
        assert_eq!(fams.iter().map(|(_, f)| f.len()).collect::<Vec<_>>(), vec![2, 1]);
    }

    #[test]
    fn concurrent_examples() {
        let fams = concurrent_families(&lines(&[(1, 0), (2, 0), (3, 0)]), 3, 100).unwrap();
        assert_eq!(fams.len(), 1);
        assert_eq!(fams[0].0, Point::int(0, 0));
        assert_eq!(fams[0].1.len(), 3);

        // pencils at (0,0) and (1,5) sharing y = 5x; the larger one goes first
        let two = LineSet::new(vec![
            Line::int(5, 0),
            Line::int(1, 0),
            Line::int(2, 0),
            Line::int(-1, 6),
            Line::int(3, 2),
        ])
        .unwrap();
        let fams = concurrent_families(&two, 2, 100).unwrap();
        let sizes: Vec<usize> = fams.iter().map(|(_, f)| f.len()).collect();
        assert_eq!(sizes[..2], [3, 2]);
        assert_eq!(fams[0].0, Point::int(0, 0));
        assert_eq!(fams[1].0, Point::int(1, 5));
        let mut seen = FxHashSet::default();
        for (p, f) in &fams {
            for l in f {
                assert!(l.contains(p));
                assert!(seen.insert(l.clone()), "line used twice");
            }
        }
        assert!(concurrent_families(&two, 1, 100).is_err());
        assert!(concurrent_families(&two, 2, 4).is_err());
    }

    #[test]
    fn elekes_pencils_are_small() {
        let cfg = build_elekes(64).unwrap();
        let fams = concurrent_families(&cfg.lines, 5, DEFAULT_CONCURRENT_CAP).unwrap();
        // slopes 1..4 only, so at most 4 lines share a point
        assert!(fams.is_empty());
        assert_eq!(max_concurrency(&cfg.lines), 4);
    }

    #[test]
    fn dyadic_examples() {
        let v = |xs: &[u64]| xs.iter().map(|&x| big(x)).collect::<Vec<_>>();
        let p = dyadic_profile(&v(&[16, 16, 16, 16]), None, 2.0).unwrap();
        assert_eq!(p.bins.len(), 1);
        assert_eq!(p.dominant_j, 4);
        assert!((p.exponent - 4.0).abs() < 1e-12);
        let p = dyadic_profile(&v(&[1, 2, 4, 8]), None, 2.0).unwrap();
        assert_eq!(p.bins.len(), 4);
        assert_eq!(p.dominant_j, 0);
        let p = dyadic_profile(&v(&[1, 2, 3]), Some(&[1, 1, 1]), 2.0).unwrap();
        assert_eq!((p.dominant_j, p.dominant().members), (1, 2));
        assert!(dyadic_profile(&v(&[0, 1]), None, 2.0).is_err());
        assert!(dyadic_profile(&v(&[1]), Some(&[1, 2]), 2.0).is_err());

        let sizes: Vec<BigUint> = parallel_families(&build_elekes(64).unwrap().lines)
            .iter()
            .map(|(_, f)| big(f.len() as u64))
            .collect();
        assert_eq!(dyadic_profile(&sizes, None, 64.0).unwrap().dominant_j, 4);
    }

    #[test]
    fn structure_report_elekes_512() {
        let cfg = build_elekes(512).unwrap();
        let r = structure_report(&cfg, StructureParams::default()).unwrap();
        assert!(!r.degenerate);
        assert_eq!(r.parallel.len(), 8);
        assert!(r.parallel.iter().all(|f| f.size == 64 && f.selected));
        assert!(r.parallel.iter().all(|f| f.intercept_energy == Some(big(174784))));
        assert_eq!(r.t, Some(big(174784)));
        assert_eq!(r.slopes, ScalarSet::interval(1, 8));
        assert_eq!(r.families_used, 8);
        assert_eq!(r.e_times_s, Some(multiplicative_energy(&ScalarSet::interval(1, 8)).unwrap().value));
        assert_eq!(r.branch, Some(Branch::Parallel));
        let beta = r.beta.unwrap().value;
        assert!((beta - 6.0 / 9.0).abs() < 1e-12, "beta = {beta}");
    }

    #[test]
    fn structure_report_geometric() {
        let cfg = build_geometric(64).unwrap();
        let r = structure_report(&cfg, StructureParams::default()).unwrap();
        assert!(r.parallel.iter().all(|f| f.size == 1 && f.intercept_energy == Some(big(1))));
        assert_eq!(r.t, Some(big(1)));
        assert_eq!(r.e_times_s, Some(big(23969)));
        assert_eq!(r.concurrent.len(), 1);
        assert_eq!(r.concurrent[0].point, Point::int(0, 0));
        assert_eq!(r.concurrent[0].size, 33);
    }

    #[test]
    fn structure_report_degenerate() {
        let mut cfg = build_elekes(64).unwrap();
        cfg.lines = LineSet::empty();
        let r = structure_report(&cfg, StructureParams::default()).unwrap();
        assert!(r.degenerate);
        assert!(r.t.is_none());
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["degenerate"], true);
    }

    #[test]
    fn structure_json_shapes() {
        let r = structure_report(&build_elekes(64).unwrap(), StructureParams::default()).unwrap();
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["n"], "64");
        assert_eq!(v["t"], "2736");
        assert_eq!(v["reference"][0]["formula"], "n^(3-alpha)");
        assert!(v["beta"]["value"].is_f64());
    }

    #[test]
    fn elekes_report_geometric() {
        let cfg = build_geometric(64).unwrap();
        let r = elekes_report(&cfg.a, &cfg.lines, &rat(1, 2)).unwrap();
        let e = r.elekes.as_ref().unwrap();
        assert_eq!(e.k, 33);
        assert_eq!(r.t, Some(big(1)));
        assert_eq!(r.e_times_s, Some(big((2 * 33u64.pow(3) + 33) / 3)));
        assert!(e.rhs_bound_shape.value.is_finite());

        let r = elekes_report(&cfg.a, &cfg.lines, &rat(1, 1)).unwrap();
        assert_eq!(r.elekes.unwrap().k, 1);
        assert!(elekes_report(&cfg.a, &cfg.lines, &rat(0, 1)).is_err());
        assert!(elekes_report(&cfg.a, &cfg.lines, &rat(3, 2)).is_err());
    }

    #[test]
    fn elekes_report_on_mismatched_grid_is_flagged() {
        let cfg = build_elekes(64).unwrap();
        let r = elekes_report(&cfg.a, &cfg.lines, &rat(1, 1)).unwrap();
        assert!(r.degenerate);
        assert_eq!(r.elekes.unwrap().k, 0);
    }

    fn th(parallel_min: usize, concurrent_min: usize, stop_fraction: f64) -> DecompositionThresholds {
        DecompositionThresholds { parallel_min, concurrent_min, stop_fraction }
    }

    #[test]
    fn decomposition_elekes_64() {
        let cfg = build_elekes(64).unwrap();
        let d = iterative_decomposition(&cfg, th(8, 1000, 1e-9)).unwrap();
        assert_eq!(d.events.len(), 4);
        assert!(d.events.iter().all(|e| e.size == 16 && matches!(e.anchor, FamilyAnchor::Parallel { .. })));
        assert!(d.remaining.is_empty());
        assert_eq!(d.remaining_incidences, 0);
    }

    #[test]
    fn decomposition_stops_immediately_without_structure() {
        let cfg = build_geometric(8).unwrap();
        // distinct slopes, and every pencil is smaller than 100
        let d = iterative_decomposition(&cfg, th(2, 100, 0.5)).unwrap();
        assert!(d.events.is_empty());
        assert_eq!(d.remaining, cfg.lines);
    }

    #[test]
    fn decomposition_stop_fraction() {
        let cfg = build_elekes(512).unwrap();
        let d = iterative_decomposition(&cfg, th(8, 1000, 0.5)).unwrap();
        let mut cumulative = 0;
        let crossing = d
            .events
            .iter()
            .position(|e| {
                cumulative += e.incidences_removed;
                cumulative * 2 > 2048
            })
            .unwrap();
        assert_eq!(crossing, d.events.len() - 1);
        assert_eq!(d.events.len(), 5);
        assert!(iterative_decomposition(&cfg, th(8, 3, 1.0)).is_err());
    }

    #[test]
    fn decomposition_uses_pencils_when_no_parallel_family() {
        let cfg = build_geometric(8).unwrap();
        let d = iterative_decomposition(&cfg, th(2, 3, 0.01)).unwrap();
        assert_eq!(d.events.len(), 1);
        assert_eq!(d.events[0].anchor, FamilyAnchor::Concurrent { point: Point::int(0, 0) });
        assert_eq!(d.events[0].size, 5);
    }
}
