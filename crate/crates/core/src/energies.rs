//! Additive, multiplicative, bipartite and line energies by collision counting.
//!
//! Each energy is `Σ_k r(k)²` where `r(k)` counts ordered pairs mapping to the
//! collision key `k`. Pairs are enumerated once into a multiplicity table; a
//! fixed-width fast path is tried first and the whole count is redone over
//! [`Rational`] keys if any intermediate overflows.
//!
//! [`quadruple_oracle`] recounts every energy straight from its defining
//! equation and shares no code with the tables.

use std::fmt;
use std::hash::Hash;

use num_bigint::BigUint;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::error::{domain, input, Error, Result};
use crate::rational::{Line, Rational};
use crate::small::{all_small, Frac, SmallLine};

/// A finite, deduplicated, sorted set of rationals.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ScalarSet(Vec<Rational>);

impl ScalarSet {
    pub fn new(mut elements: Vec<Rational>) -> Self {
        elements.sort();
        elements.dedup();
        ScalarSet(elements)
    }

    pub fn from_ints(xs: impl IntoIterator<Item = i64>) -> Self {
        ScalarSet::new(xs.into_iter().map(Rational::from).collect())
    }

    /// `{lo, lo + 1, ..., hi}`.
    pub fn interval(lo: i64, hi: i64) -> Self {
        ScalarSet::from_ints(lo..=hi)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, x: &Rational) -> bool {
        self.0.binary_search(x).is_ok()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Rational> {
        self.0.iter()
    }

    pub fn as_slice(&self) -> &[Rational] {
        &self.0
    }

    pub fn min(&self) -> Option<&Rational> {
        self.0.first()
    }

    pub fn max(&self) -> Option<&Rational> {
        self.0.last()
    }

    /// `{λx : x ∈ self}`.
    pub fn scaled(&self, lambda: &Rational) -> ScalarSet {
        ScalarSet::new(self.0.iter().map(|x| x * lambda).collect())
    }

    /// `{x + s : x ∈ self}`.
    pub fn shifted(&self, s: &Rational) -> ScalarSet {
        ScalarSet::new(self.0.iter().map(|x| x + s).collect())
    }

    /// Number of distinct sums `a + b`.
    pub fn sumset_size(&self) -> usize {
        let mut sums: Vec<Rational> = Vec::with_capacity(self.len() * (self.len() + 1) / 2);
        for (i, a) in self.0.iter().enumerate() {
            for b in &self.0[i..] {
                sums.push(a + b);
            }
        }
        sums.sort();
        sums.dedup();
        sums.len()
    }
}

impl FromIterator<Rational> for ScalarSet {
    fn from_iter<I: IntoIterator<Item = Rational>>(iter: I) -> Self {
        ScalarSet::new(iter.into_iter().collect())
    }
}

impl<'a> IntoIterator for &'a ScalarSet {
    type Item = &'a Rational;
    type IntoIter = std::slice::Iter<'a, Rational>;
    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

/// A finite, deduplicated set of lines with nonzero slope, sorted by `(c, d)`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct LineSet(Vec<Line>);

impl LineSet {
    /// Fails with a domain error if any line is horizontal.
    pub fn new(mut lines: Vec<Line>) -> Result<Self> {
        if let Some(l) = lines.iter().find(|l| l.c.is_zero()) {
            return domain(format!("horizontal line {l:?} in line set"));
        }
        lines.sort();
        lines.dedup();
        Ok(LineSet(lines))
    }

    pub fn empty() -> Self {
        LineSet(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Line> {
        self.0.iter()
    }

    pub fn as_slice(&self) -> &[Line] {
        &self.0
    }

    pub fn contains(&self, l: &Line) -> bool {
        self.0.binary_search(l).is_ok()
    }

    /// Lines of `self` accepted by `keep`; stays sorted and duplicate-free.
    pub fn filtered(&self, mut keep: impl FnMut(&Line) -> bool) -> LineSet {
        LineSet(self.0.iter().filter(|l| keep(l)).cloned().collect())
    }

    pub fn into_vec(self) -> Vec<Line> {
        self.0
    }
}

impl<'de> Deserialize<'de> for LineSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let lines = Vec::<Line>::deserialize(d)?;
        LineSet::new(lines).map_err(serde::de::Error::custom)
    }
}

impl<'a> IntoIterator for &'a LineSet {
    type Item = &'a Line;
    type IntoIter = std::slice::Iter<'a, Line>;
    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnergyKind {
    Additive,
    Multiplicative,
    Bipartite,
    Line,
}

impl fmt::Display for EnergyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EnergyKind::Additive => "additive",
            EnergyKind::Multiplicative => "multiplicative",
            EnergyKind::Bipartite => "bipartite",
            EnergyKind::Line => "line",
        })
    }
}

impl std::str::FromStr for EnergyKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "additive" => Ok(EnergyKind::Additive),
            "multiplicative" => Ok(EnergyKind::Multiplicative),
            "bipartite" => Ok(EnergyKind::Bipartite),
            "line" => Ok(EnergyKind::Line),
            other => input(format!("unknown energy kind {other:?}")),
        }
    }
}

/// A labelled comparison value attached to an energy, as a decimal string.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bound {
    pub label: String,
    pub value: String,
}

impl Bound {
    pub fn exact(label: impl Into<String>, value: impl fmt::Display) -> Self {
        Bound { label: label.into(), value: value.to_string() }
    }

    pub fn real(label: impl Into<String>, value: f64) -> Self {
        Bound { label: label.into(), value: format!("{value:.6e}") }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub kind: EnergyKind,
    #[serde(with = "crate::serde_big::biguint")]
    pub value: BigUint,
    /// Number of distinct collision keys.
    pub support: u64,
    pub bounds: Vec<Bound>,
}

impl EnergyReport {
    fn new(kind: EnergyKind, tally: Tally) -> Self {
        EnergyReport { kind, value: tally.value, support: tally.support, bounds: Vec::new() }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

pub(crate) struct Tally {
    pub(crate) value: BigUint,
    pub(crate) support: u64,
}

fn tally_squares<K>(table: &FxHashMap<K, u64>) -> Tally {
    let value: u128 = table.values().map(|&r| (r as u128) * (r as u128)).sum();
    Tally { value: BigUint::from(value), support: table.len() as u64 }
}

fn merge_tables<K: Hash + Eq>(mut a: FxHashMap<K, u64>, mut b: FxHashMap<K, u64>) -> FxHashMap<K, u64> {
    if a.len() < b.len() {
        std::mem::swap(&mut a, &mut b);
    }
    for (k, r) in b {
        *a.entry(k).or_insert(0) += r;
    }
    a
}

/// Multiplicity table of `key(i, j)` over all `rows × cols` ordered pairs.
///
/// Returns `None` as soon as any key is `None`. Rows may be split across
/// workers; counts merge by addition so the table does not depend on the split.
pub(crate) fn pair_table<K, F>(rows: usize, cols: usize, key: F) -> Option<FxHashMap<K, u64>>
where
    K: Hash + Eq + Send,
    F: Fn(usize, usize) -> Option<K> + Sync,
{
    let row_table = |i: usize, mut acc: FxHashMap<K, u64>| -> Option<FxHashMap<K, u64>> {
        for j in 0..cols {
            *acc.entry(key(i, j)?).or_insert(0) += 1;
        }
        Some(acc)
    };

    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..rows)
            .into_par_iter()
            .try_fold(FxHashMap::default, |acc, i| row_table(i, acc))
            .try_reduce(FxHashMap::default, |a, b| Some(merge_tables(a, b)))
    }
    #[cfg(not(feature = "parallel"))]
    {
        let mut acc = FxHashMap::default();
        for i in 0..rows {
            acc = row_table(i, acc)?;
        }
        Some(merge_tables(acc, FxHashMap::default()))
    }
}

fn pair_tally<KS, KB, FS, FB>(rows: usize, cols: usize, small: FS, big: FB) -> Tally
where
    KS: Hash + Eq + Send,
    KB: Hash + Eq + Send,
    FS: Fn(usize, usize) -> Option<KS> + Sync,
    FB: Fn(usize, usize) -> KB + Sync,
{
    match pair_table(rows, cols, small) {
        Some(t) => tally_squares(&t),
        None => tally_squares(&pair_table(rows, cols, |i, j| Some(big(i, j))).expect("infallible keys")),
    }
}

fn require_nonempty(set: &ScalarSet, what: &str) -> Result<()> {
    if set.is_empty() {
        return input(format!("{what}: empty set"));
    }
    Ok(())
}

fn sum_table_tally(a: &ScalarSet) -> Tally {
    let xs = a.as_slice();
    let small = all_small(xs);
    let n = xs.len();
    pair_tally(
        n,
        n,
        |i, j| small.as_ref().and_then(|s| s[i].add(s[j])),
        |i, j| &xs[i] + &xs[j],
    )
}

/// `E⁺(A) = #{(a, b, c, d) ∈ A⁴ : a + b = c + d}`.
pub fn additive_energy(a: &ScalarSet) -> Result<EnergyReport> {
    require_nonempty(a, "additive energy")?;
    let mut report = EnergyReport::new(EnergyKind::Additive, sum_table_tally(a));
    let k = a.len() as u64;
    report.bounds = vec![
        Bound::exact("|A|^2", k * k),
        Bound::exact("|A|^3", BigUint::from(k).pow(3)),
        Bound::real("|A|^4/|A+A|", (k as f64).powi(4) / a.sumset_size() as f64),
    ];
    Ok(report)
}

/// `E^×(A) = #{(a, b, c, d) ∈ A⁴ : ab = cd}`, for `0 ∉ A`.
pub fn multiplicative_energy(a: &ScalarSet) -> Result<EnergyReport> {
    require_nonempty(a, "multiplicative energy")?;
    if a.iter().any(Rational::is_zero) {
        return input("multiplicative energy: set contains 0");
    }
    let xs = a.as_slice();
    let small = all_small(xs);
    let n = xs.len();
    let tally = pair_tally(
        n,
        n,
        |i, j| small.as_ref().and_then(|s| s[i].mul(s[j])),
        |i, j| &xs[i] * &xs[j],
    );
    let mut report = EnergyReport::new(EnergyKind::Multiplicative, tally);
    let k = a.len() as u64;
    report.bounds = vec![Bound::exact("|A|^2", k * k), Bound::exact("|A|^3", BigUint::from(k).pow(3))];
    Ok(report)
}

fn difference_table(a: &ScalarSet) -> FxHashMap<Rational, u64> {
    let xs = a.as_slice();
    pair_table(xs.len(), xs.len(), |i, j| Some(&xs[i] - &xs[j])).expect("infallible keys")
}

fn small_difference_table(a: &ScalarSet) -> Option<FxHashMap<Frac, u64>> {
    let s = all_small(a.as_slice())?;
    pair_table(s.len(), s.len(), |i, j| s[i].sub(s[j]))
}

fn correlate<K: Hash + Eq>(ta: &FxHashMap<K, u64>, tb: &FxHashMap<K, u64>) -> Tally {
    let (small, large) = if ta.len() <= tb.len() { (ta, tb) } else { (tb, ta) };
    let mut value: u128 = 0;
    let mut support = 0u64;
    for (k, &ra) in small {
        if let Some(&rb) = large.get(k) {
            value += ra as u128 * rb as u128;
            support += 1;
        }
    }
    Tally { value: BigUint::from(value), support }
}

/// `E⁺(A, B) = #{a + b = c + d : a, c ∈ A, b, d ∈ B} = Σ_x r_A⁻(x)·r_B⁻(x)`.
pub fn bipartite_additive_energy(a: &ScalarSet, b: &ScalarSet) -> Result<EnergyReport> {
    require_nonempty(a, "bipartite energy")?;
    require_nonempty(b, "bipartite energy")?;
    let tally = match (small_difference_table(a), small_difference_table(b)) {
        (Some(ta), Some(tb)) => correlate(&ta, &tb),
        _ => correlate(&difference_table(a), &difference_table(b)),
    };
    let mut report = EnergyReport::new(EnergyKind::Bipartite, tally);
    let ea = additive_energy(a)?.value;
    let eb = additive_energy(b)?.value;
    report.bounds = vec![
        Bound::exact("E+(A)", &ea),
        Bound::exact("E+(B)", &eb),
        Bound::exact("E+(A)*E+(B)", &ea * &eb),
    ];
    Ok(report)
}

/// Multiplicity table of `ℓ₁⁻¹∘ℓ₂` over all ordered pairs of `lines`.
pub(crate) fn quotient_tally(lines: &LineSet) -> Tally {
    let ls = lines.as_slice();
    let small: Option<Vec<SmallLine>> = ls.iter().map(SmallLine::from_line).collect();
    let n = ls.len();
    pair_tally(
        n,
        n,
        |i, j| small.as_ref().and_then(|s| s[i].quotient(s[j])),
        |i, j| ls[i].quotient(&ls[j]).expect("line sets hold no horizontal lines"),
    )
}

/// `E(L) = #{(ℓ₁, ℓ₂, ℓ₃, ℓ₄) ∈ L⁴ : ℓ₁⁻¹∘ℓ₂ = ℓ₃⁻¹∘ℓ₄}`.
///
/// Horizontal lines cannot enter a [`LineSet`], so the domain error for them
/// is raised by [`LineSet::new`].
pub fn line_energy(lines: &LineSet) -> EnergyReport {
    let mut report = EnergyReport::new(EnergyKind::Line, quotient_tally(lines));
    let k = lines.len() as u64;
    report.bounds = vec![Bound::exact("|L|^2", k * k), Bound::exact("|L|^4", BigUint::from(k).pow(4))];
    report
}

/// Input to [`quadruple_oracle`].
#[derive(Clone, Debug)]
pub enum OracleInput<'a> {
    Additive(&'a ScalarSet),
    Multiplicative(&'a ScalarSet),
    Bipartite(&'a ScalarSet, &'a ScalarSet),
    Line(&'a LineSet),
}

pub const DEFAULT_ORACLE_CAP: usize = 40;

fn count_equal_pairs<T: PartialEq>(lhs: &[T], rhs: &[T]) -> u64 {
    let mut count = 0u64;
    for x in lhs {
        for y in rhs {
            if x == y {
                count += 1;
            }
        }
    }
    count
}

/// Counts quadruples satisfying the defining equation by direct enumeration.
///
/// Refuses inputs with more than `cap` elements in any operand.
pub fn quadruple_oracle(instance: OracleInput<'_>, cap: usize) -> Result<u64> {
    let size = match &instance {
        OracleInput::Additive(a) | OracleInput::Multiplicative(a) => a.len(),
        OracleInput::Bipartite(a, b) => a.len().max(b.len()),
        OracleInput::Line(l) => l.len(),
    };
    if size > cap {
        return Err(Error::CapExceeded { what: "quadruple oracle", size: size as u128, cap: cap as u128 });
    }
    // Each side of the defining equation is evaluated once per ordered pair;
    // every quadruple is then tested by comparing two sides.
    match instance {
        OracleInput::Additive(a) => {
            let sums: Vec<Rational> = a.iter().flat_map(|p| a.iter().map(move |q| p + q)).collect();
            Ok(count_equal_pairs(&sums, &sums))
        }
        OracleInput::Multiplicative(a) => {
            if a.iter().any(Rational::is_zero) {
                return input("multiplicative energy: set contains 0");
            }
            let products: Vec<Rational> = a.iter().flat_map(|p| a.iter().map(move |q| p * q)).collect();
            Ok(count_equal_pairs(&products, &products))
        }
        OracleInput::Bipartite(a, b) => {
            // a + b = c + d with a, c ∈ A and b, d ∈ B
            let sums: Vec<Rational> = a.iter().flat_map(|p| b.iter().map(move |q| p + q)).collect();
            Ok(count_equal_pairs(&sums, &sums))
        }
        OracleInput::Line(l) => {
            // ℓ₁⁻¹∘ℓ₂ = ℓ₃⁻¹∘ℓ₄ via explicit inverse and composition
            let mut quotients = Vec::with_capacity(l.len() * l.len());
            for g in l {
                let inv = g.inverse()?;
                for h in l {
                    quotients.push(inv.compose(h)?);
                }
            }
            Ok(count_equal_pairs(&quotients, &quotients))
        }
    }
}

/// Both sides of `E(C×D) ≤ E^×(C)·E⁺(D)` for the lines `y = cx + d`, `(c, d) ∈ C × D`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CartesianEnergyReport {
    #[serde(with = "crate::serde_big::biguint")]
    pub line_energy: BigUint,
    #[serde(with = "crate::serde_big::biguint")]
    pub mult_energy_c: BigUint,
    #[serde(with = "crate::serde_big::biguint")]
    pub add_energy_d: BigUint,
    #[serde(with = "crate::serde_big::biguint")]
    pub product: BigUint,
    pub holds: bool,
}

pub fn cartesian_lines(c: &ScalarSet, d: &ScalarSet) -> Result<LineSet> {
    LineSet::new(
        c.iter()
            .flat_map(|ci| d.iter().map(move |di| Line::new(ci.clone(), di.clone())))
            .collect(),
    )
}

pub fn cartesian_line_energy_bound(c: &ScalarSet, d: &ScalarSet) -> Result<CartesianEnergyReport> {
    let mult = multiplicative_energy(c)?.value;
    let add = additive_energy(d)?.value;
    let lines = cartesian_lines(c, d)?;
    let energy = line_energy(&lines).value;
    let product = &mult * &add;
    Ok(CartesianEnergyReport {
        holds: energy <= product,
        line_energy: energy,
        mult_energy_c: mult,
        add_energy_d: add,
        product,
    })
}

/// `E(L)` next to `m^{1/2}|L|^{5/2} + M|L|²`, where `m` is the largest number
/// of lines sharing a slope and `M` the largest number through one point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeConcurrencyReport {
    #[serde(with = "crate::serde_big::biguint")]
    pub energy: BigUint,
    pub max_parallel: usize,
    pub max_concurrent: usize,
    pub bound_shape: f64,
}

pub fn prnrw_bound_report(lines: &LineSet) -> Result<SlopeConcurrencyReport> {
    if lines.len() < 2 {
        return input("slope/concurrency bound needs at least 2 lines");
    }
    let energy = line_energy(lines).value;
    let max_parallel = crate::structure::parallel_families(lines)
        .first()
        .map_or(0, |(_, fam)| fam.len());
    let max_concurrent = crate::structure::max_concurrency(lines);
    let k = lines.len() as f64;
    let bound_shape = (max_parallel as f64).sqrt() * k.powf(2.5) + max_concurrent as f64 * k * k;
    Ok(SlopeConcurrencyReport { energy, max_parallel, max_concurrent, bound_shape })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn ints(xs: &[i64]) -> ScalarSet {
        ScalarSet::from_ints(xs.iter().copied())
    }

    fn lines(ls: &[(i64, i64)]) -> LineSet {
        LineSet::new(ls.iter().map(|&(c, d)| Line::int(c, d)).collect()).unwrap()
    }

    fn big(n: u64) -> BigUint {
        BigUint::from(n)
    }

    #[test]
    fn additive_examples() {
        assert_eq!(additive_energy(&ints(&[0])).unwrap().value, big(1));
        assert_eq!(additive_energy(&ints(&[1, 2])).unwrap().value, big(6));
        let r = additive_energy(&ScalarSet::interval(1, 10)).unwrap();
        assert_eq!(r.value, big(670));
        assert!(matches!(additive_energy(&ScalarSet::default()), Err(Error::Input(_))));
    }

    #[test]
    fn multiplicative_examples() {
        assert_eq!(multiplicative_energy(&ints(&[1])).unwrap().value, big(1));
        assert_eq!(multiplicative_energy(&ints(&[1, 2, 3, 4])).unwrap().value, big(32));
        // equals E⁺({1,2,3,4}) under the log map
        assert_eq!(multiplicative_energy(&ints(&[2, 4, 8, 16])).unwrap().value, big(44));
        assert!(matches!(multiplicative_energy(&ints(&[0, 1])), Err(Error::Input(_))));
    }

    #[test]
    fn bipartite_examples() {
        assert_eq!(bipartite_additive_energy(&ints(&[1, 2]), &ints(&[1, 2])).unwrap().value, big(6));
        assert_eq!(bipartite_additive_energy(&ints(&[0, 1]), &ints(&[5])).unwrap().value, big(2));
        let (a, b) = (ints(&[1, 2, 3]), ints(&[10, 20]));
        let e = bipartite_additive_energy(&a, &b).unwrap().value;
        let ea = additive_energy(&a).unwrap().value;
        let eb = additive_energy(&b).unwrap().value;
        assert_eq!(e, big(quadruple_oracle(OracleInput::Bipartite(&a, &b), 40).unwrap()));
        assert!(&e * &e <= ea * eb);
    }

    #[test]
    fn line_examples() {
        assert_eq!(line_energy(&lines(&[(1, 0)])).value, big(1));
        assert_eq!(line_energy(&lines(&[(1, 0), (2, 0)])).value, big(6));
        assert_eq!(line_energy(&lines(&[(1, 0), (-1, 1)])).value, big(8));
        assert_eq!(line_energy(&lines(&[(1, 0), (1, 1)])).value, big(6));
        assert!(matches!(LineSet::new(vec![Line::int(0, 1)]), Err(Error::Domain(_))));
    }

    #[test]
    fn oracle_examples() {
        assert_eq!(quadruple_oracle(OracleInput::Additive(&ints(&[1, 2])), 40).unwrap(), 6);
        assert_eq!(quadruple_oracle(OracleInput::Line(&lines(&[(1, 0), (2, 0)])), 40).unwrap(), 6);
        assert_eq!(quadruple_oracle(OracleInput::Multiplicative(&ints(&[3])), 40).unwrap(), 1);
        let too_big = ScalarSet::interval(1, 41);
        assert!(matches!(
            quadruple_oracle(OracleInput::Additive(&too_big), DEFAULT_ORACLE_CAP),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn fast_and_big_paths_agree_on_overflowing_input() {
        let huge = rat(i64::MAX, 3);
        let a = ScalarSet::new(vec![huge.clone(), rat(1, 2), rat(i64::MAX - 1, 7), -huge]);
        let fast = additive_energy(&a).unwrap().value;
        assert_eq!(fast, big(quadruple_oracle(OracleInput::Additive(&a), 40).unwrap()));
        let m = multiplicative_energy(&a).unwrap().value;
        assert_eq!(m, big(quadruple_oracle(OracleInput::Multiplicative(&a), 40).unwrap()));
        let l = LineSet::new(vec![
            Line::new(rat(i64::MAX, 2), rat(1, i64::MAX)),
            Line::new(rat(3, i64::MAX), rat(i64::MIN + 1, 5)),
            Line::int(1, 0),
        ])
        .unwrap();
        assert_eq!(line_energy(&l).value, big(quadruple_oracle(OracleInput::Line(&l), 40).unwrap()));
    }

    #[test]
    fn cartesian_bound_examples() {
        let r = cartesian_line_energy_bound(&ints(&[1, 2]), &ints(&[0, 1])).unwrap();
        assert_eq!((r.line_energy.clone(), r.product.clone()), (big(32), big(36)));
        assert!(r.holds);
        let r = cartesian_line_energy_bound(&ints(&[1]), &ints(&[0])).unwrap();
        assert_eq!((r.line_energy.clone(), r.product.clone()), (big(1), big(1)));
        let (c, d) = (ints(&[1, 2, 4]), ints(&[0, 1, 2]));
        let r = cartesian_line_energy_bound(&c, &d).unwrap();
        let lines = cartesian_lines(&c, &d).unwrap();
        assert_eq!(r.line_energy, big(quadruple_oracle(OracleInput::Line(&lines), 40).unwrap()));
        assert_eq!(r.line_energy, big(293));
        assert_eq!(r.product, big(361));
        assert!(r.holds);
        assert!(cartesian_line_energy_bound(&ints(&[0, 1]), &ints(&[0])).is_err());
    }

    #[test]
    fn slope_concurrency_examples() {
        let r = prnrw_bound_report(&lines(&[(1, 0), (1, 1)])).unwrap();
        assert_eq!((r.max_parallel, r.max_concurrent, r.energy.clone()), (2, 1, big(6)));
        let r = prnrw_bound_report(&lines(&[(1, 0), (2, 0)])).unwrap();
        assert_eq!((r.max_parallel, r.max_concurrent, r.energy.clone()), (1, 2, big(6)));
        let r = prnrw_bound_report(&lines(&[(1, 0), (2, 0), (4, 0)])).unwrap();
        assert_eq!(r.max_concurrent, 3);
        assert!(prnrw_bound_report(&lines(&[(1, 0)])).is_err());
    }

    #[test]
    fn report_json_uses_decimal_strings() {
        let r = additive_energy(&ints(&[1, 2])).unwrap();
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["kind"], "additive");
        assert_eq!(v["value"], "6");
        assert_eq!(v["support"], 3);
        assert_eq!(v["bounds"][0]["label"], "|A|^2");
    }
}
