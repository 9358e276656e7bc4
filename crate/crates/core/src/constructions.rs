//! Point-line configurations over Cartesian products, and the totient sieve
//! used to count them.

use num_bigint::BigUint;
use num_integer::{Integer, Roots};
use serde::{Deserialize, Serialize};

use crate::energies::{LineSet, ScalarSet};
use crate::error::{input, Result};
use crate::incidence::count_incidences_product;
use crate::rational::{Line, Rational};

/// Points `A × B` plus a set of lines, tagged with how they were built.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    pub name: String,
    pub n: u64,
    pub alpha: Rational,
    #[serde(rename = "A")]
    pub a: ScalarSet,
    #[serde(rename = "B")]
    pub b: ScalarSet,
    pub lines: LineSet,
}

impl Configuration {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("configuration serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn point_count(&self) -> usize {
        self.a.len() * self.b.len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TotientTable {
    limit: usize,
    phi: Vec<u64>,
}

impl TotientTable {
    pub fn limit(&self) -> usize {
        self.limit
    }

    /// `φ(i)` for `1 ≤ i ≤ limit`.
    pub fn get(&self, i: usize) -> u64 {
        assert!((1..=self.limit).contains(&i), "totient index {i} out of 1..={}", self.limit);
        self.phi[i]
    }

    /// `φ(1), ..., φ(limit)`.
    pub fn values(&self) -> &[u64] {
        &self.phi[1..]
    }
}

/// Linear sieve: each composite is struck once, by its smallest prime factor.
pub fn totient_table(r: usize) -> Result<TotientTable> {
    if r < 1 {
        return input("totient table needs r >= 1");
    }
    let mut phi = vec![0u64; r + 1];
    let mut primes: Vec<usize> = Vec::new();
    phi[1] = 1;
    for i in 2..=r {
        if phi[i] == 0 {
            phi[i] = (i - 1) as u64;
            primes.push(i);
        }
        for &p in &primes {
            let m = i * p;
            if m > r {
                break;
            }
            if i % p == 0 {
                phi[m] = phi[i] * p as u64;
                break;
            }
            phi[m] = phi[i] * (p as u64 - 1);
        }
    }
    Ok(TotientTable { limit: r, phi })
}

/// Above this limit the exact `Σ φ(i)/i²` is omitted: its reduced denominator
/// grows like `lcm(1..r)²`.
pub const EXACT_RECIPROCAL_SUM_LIMIT: usize = 2000;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TotientSumReport {
    pub r: usize,
    #[serde(with = "crate::serde_big::biguint")]
    pub sum_phi: BigUint,
    #[serde(with = "crate::serde_big::biguint")]
    pub sum_i_phi: BigUint,
    /// `Σ φ(i)/i²` exactly, when `r ≤ EXACT_RECIPROCAL_SUM_LIMIT`.
    pub sum_phi_over_i2: Option<Rational>,
    pub sum_phi_over_i2_decimal: f64,
    /// `(3/π²)·r²`
    pub ref_quadratic: f64,
    /// `r³`
    pub ref_cubic: f64,
    /// `ln r`
    pub ref_log: f64,
}

pub fn totient_sum_report(r: usize) -> Result<TotientSumReport> {
    if r < 2 {
        return input("totient sums need r >= 2");
    }
    let table = totient_table(r)?;
    let mut sum_phi: u128 = 0;
    let mut sum_i_phi: u128 = 0;
    // compensated summation, largest terms first would be better but r ≤ 10⁷ keeps error ~1e-12
    let mut recip = 0.0f64;
    let mut carry = 0.0f64;
    for (idx, &p) in table.values().iter().enumerate() {
        let i = (idx + 1) as u128;
        sum_phi += p as u128;
        sum_i_phi += i * p as u128;
        let term = p as f64 / (i as f64 * i as f64) - carry;
        let next = recip + term;
        carry = (next - recip) - term;
        recip = next;
    }
    let exact = (r <= EXACT_RECIPROCAL_SUM_LIMIT).then(|| {
        table
            .values()
            .iter()
            .enumerate()
            .fold(Rational::zero(), |acc, (idx, &p)| {
                let i = (idx + 1) as i64;
                acc + Rational::new(p as i64, i * i).expect("nonzero")
            })
    });
    let rf = r as f64;
    Ok(TotientSumReport {
        r,
        sum_phi: sum_phi.into(),
        sum_i_phi: sum_i_phi.into(),
        sum_phi_over_i2: exact,
        sum_phi_over_i2_decimal: recip,
        ref_quadratic: 3.0 / (std::f64::consts::PI * std::f64::consts::PI) * rf * rf,
        ref_cubic: rf.powi(3),
        ref_log: rf.ln(),
    })
}

/// `⌊n^(p/q)⌋` for `p ≥ 0`, `q ≥ 1`, computed exactly.
pub fn floor_pow(n: u64, p: u32, q: u32) -> u64 {
    let pow = BigUint::from(n).pow(p);
    let root = pow.nth_root(q);
    u64::try_from(root).expect("floor_pow result fits in u64")
}

/// Index ranges of the family construction, after flooring every real bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct FamilyParams {
    /// `|A| = ⌊n^α⌋`
    pub columns: u64,
    /// `⌊n^(1-α)⌋`; the rows are the integers in `(-rows/2, rows/2]`
    pub rows: u64,
    /// number of integer parts `a`: `max(1, ⌊n^(1-2α)/4⌋)`
    pub a_max: u64,
    /// largest denominator `c`: `⌊n^(α-1/3)⌋`
    pub c_max: u64,
    /// number of offsets `d`: `max(1, ⌊n^(1-α)/4⌋)`
    pub d_max: u64,
}

fn alpha_parts(alpha: &Rational) -> Result<(u32, u32)> {
    let lo = Rational::new(1, 3)?;
    let hi = Rational::new(1, 2)?;
    if !(alpha > &lo && alpha < &hi) {
        return input(format!("alpha must lie strictly between 1/3 and 1/2, got {alpha}"));
    }
    let p = u32::try_from(alpha.numer()).map_err(|_| crate::Error::Input("alpha numerator too large".into()))?;
    let q = u32::try_from(alpha.denom()).map_err(|_| crate::Error::Input("alpha denominator too large".into()))?;
    Ok((p, q))
}

pub fn family_params(n: u64, alpha: &Rational) -> Result<FamilyParams> {
    let (p, q) = alpha_parts(alpha)?;
    if n < 2 {
        return input("family construction needs n >= 2");
    }
    let rows = floor_pow(n, q - p, q);
    Ok(FamilyParams {
        columns: floor_pow(n, p, q),
        rows,
        a_max: (floor_pow(n, q - 2 * p, q) / 4).max(1),
        c_max: floor_pow(n, 3 * p - q, 3 * q),
        d_max: (rows / 4).max(1),
    })
}

/// Integers `j` with `-rows/2 < j ≤ rows/2`.
fn centered_rows(rows: u64) -> ScalarSet {
    let rows = rows as i64;
    ScalarSet::interval(Integer::div_floor(&-rows, &2) + 1, Integer::div_floor(&rows, &2))
}

/// `Σ_{c=2}^{C} A·D·c·φ(c)`: the number of lines `build_family` generates.
pub fn family_line_count(params: &FamilyParams) -> u64 {
    if params.c_max < 2 {
        return 0;
    }
    let phi = totient_table(params.c_max as usize).expect("c_max >= 1");
    (2..=params.c_max)
        .map(|c| params.a_max * params.d_max * c * phi.get(c as usize))
        .sum()
}

/// `A_max · Σ_{c=2}^{C} φ(c)`: the number of distinct slopes `a + b/c`.
pub fn family_slope_count(params: &FamilyParams) -> u64 {
    if params.c_max < 2 {
        return 0;
    }
    let phi = totient_table(params.c_max as usize).expect("c_max >= 1");
    params.a_max * (2..=params.c_max).map(|c| phi.get(c as usize)).sum::<u64>()
}

/// The lattice family: points `{0..|A|-1} × (-rows/2, rows/2]` and lines
/// `y = (a + b/c)(x - i) + d` with `gcd(b, c) = 1`, `1 ≤ b < c ≤ C`,
/// `0 ≤ i < c`, `0 ≤ a < A_max`, `0 ≤ d < D_max`.
///
/// Each line meets every `c`-th column, so richness is about `|A|/c`.
/// Returns an empty line set when no denominator `c ≥ 2` is admissible.
pub fn build_family(n: u64, alpha: &Rational) -> Result<Configuration> {
    let params = family_params(n, alpha)?;
    let mut lines = Vec::with_capacity(family_line_count(&params) as usize);
    for c in 2..=params.c_max as i64 {
        for b in (1..c).filter(|b| b.gcd(&c) == 1) {
            for a in 0..params.a_max as i64 {
                let slope = Rational::new(a * c + b, c)?;
                for i in 0..c {
                    let shift = &slope * &Rational::from(i);
                    for d in 0..params.d_max as i64 {
                        lines.push(Line::new(slope.clone(), &Rational::from(d) - &shift));
                    }
                }
            }
        }
    }
    Ok(Configuration {
        name: "family".into(),
        n,
        alpha: alpha.clone(),
        a: ScalarSet::interval(0, params.columns as i64 - 1),
        b: centered_rows(params.rows),
        lines: LineSet::new(lines)?,
    })
}

fn exact_cube_root(n: u64) -> Option<u64> {
    let m = n.cbrt();
    (m * m * m == n).then_some(m)
}

/// Points `{1..m/2} × {1..2m²}` and lines `y = ax + b`, `1 ≤ a ≤ m`,
/// `1 ≤ b ≤ m²`, where `n = m³` and `m` is even.
pub fn build_elekes(n: u64) -> Result<Configuration> {
    let m = match exact_cube_root(n) {
        Some(m) if m >= 2 && m % 2 == 0 => m as i64,
        _ => return input(format!("n = {n} is not the cube of an even integer")),
    };
    let lines = (1..=m)
        .flat_map(|a| (1..=m * m).map(move |b| Line::int(a, b)))
        .collect();
    Ok(Configuration {
        name: "elekes".into(),
        n,
        alpha: Rational::new(1, 3)?,
        a: ScalarSet::interval(1, m / 2),
        b: ScalarSet::interval(1, 2 * m * m),
        lines: LineSet::new(lines)?,
    })
}

fn power_of_two(e: u64) -> Rational {
    Rational::from_integer(num_bigint::BigInt::from(1u8) << e)
}

/// `A = B = {2⁰, ..., 2ⁿ⁻¹}` with the lines `y = 2ʲx`, `0 ≤ j ≤ n/2`.
pub fn build_geometric(n: u64) -> Result<Configuration> {
    if n < 2 || n % 2 != 0 {
        return input(format!("geometric construction needs an even n >= 2, got {n}"));
    }
    let a = ScalarSet::new((0..n).map(power_of_two).collect());
    let lines = (0..=n / 2).map(|j| Line::new(power_of_two(j), Rational::zero())).collect();
    Ok(Configuration {
        name: "geometric".into(),
        n,
        alpha: Rational::new(1, 2)?,
        b: a.clone(),
        a,
        lines: LineSet::new(lines)?,
    })
}

pub fn slope_set(lines: &LineSet) -> ScalarSet {
    ScalarSet::new(lines.iter().map(|l| l.c.clone()).collect())
}

/// Brings `lines` to exactly `n` members.
///
/// Surplus lines go in increasing order of incidences with `A × B`, ties by
/// `(slope, intercept)`. Missing lines are filled with `y = x + d` for integers
/// `d` large enough that the new lines miss `A × B` entirely.
pub fn normalize_line_count(lines: &LineSet, n: usize, a: &ScalarSet, b: &ScalarSet) -> LineSet {
    use std::cmp::Ordering;
    match lines.len().cmp(&n) {
        Ordering::Equal => lines.clone(),
        Ordering::Greater => {
            let profile = count_incidences_product(a, b, lines);
            let mut ranked: Vec<(u64, &Line)> =
                profile.per_line.iter().map(|(l, k)| (*k, l)).collect();
            ranked.sort();
            let drop = lines.len() - n;
            let keep: Vec<Line> = ranked[drop..].iter().map(|(_, l)| (*l).clone()).collect();
            LineSet::new(keep).expect("subset of a valid line set")
        }
        Ordering::Less => {
            let start = match (a.min(), b.max()) {
                (Some(lo), Some(hi)) => {
                    let gap = hi - lo;
                    // smallest integer strictly above the gap
                    gap.as_big().floor().to_integer() + 1
                }
                _ => num_bigint::BigInt::from(0),
            };
            let mut out = lines.clone().into_vec();
            let mut d = start;
            let one = Rational::one();
            while out.len() < n {
                let candidate = Line::new(one.clone(), Rational::from_integer(d.clone()));
                if !lines.contains(&candidate) {
                    out.push(candidate);
                }
                d += 1;
            }
            LineSet::new(out).expect("padding lines have slope 1")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::incidence::count_incidences_oracle;
    use crate::rational::{rat, Point};

    fn gcd_count(i: u64) -> u64 {
        (1..=i).filter(|a| a.gcd(&i) == 1).count() as u64
    }

    #[test]
    fn totient_examples() {
        assert_eq!(totient_table(1).unwrap().values(), &[1]);
        assert_eq!(totient_table(10).unwrap().values(), &[1, 1, 2, 2, 4, 2, 6, 4, 6, 4]);
        assert_eq!(totient_table(12).unwrap().get(12), 4);
        assert!(totient_table(0).is_err());
    }

    #[test]
    fn totient_matches_gcd_count() {
        let t = totient_table(2000).unwrap();
        for i in 1..=2000u64 {
            assert_eq!(t.get(i as usize), gcd_count(i), "phi({i})");
        }
    }

    #[test]
    fn totient_sum_examples() {
        let r = totient_sum_report(10).unwrap();
        assert_eq!(r.sum_phi, BigUint::from(32u32));
        assert!((r.ref_quadratic - 30.396).abs() < 1e-3);
        let exact = r.sum_phi_over_i2.clone().unwrap();
        assert!((exact.to_f64() - r.sum_phi_over_i2_decimal).abs() < 1e-12);
        let r = totient_sum_report(2).unwrap();
        assert_eq!(r.sum_i_phi, BigUint::from(3u32));
        assert_eq!(r.sum_phi_over_i2, Some(rat(5, 4)));
        assert!(totient_sum_report(1).is_err());
        assert!(totient_sum_report(5000).unwrap().sum_phi_over_i2.is_none());
    }

    #[test]
    fn floor_pow_is_exact() {
        assert_eq!(floor_pow(4096, 5, 12), 32);
        assert_eq!(floor_pow(1 << 16, 5, 12), 101);
        assert_eq!(floor_pow(1 << 16, 7, 12), 645);
        assert_eq!(floor_pow(27, 1, 3), 3);
        assert_eq!(floor_pow(26, 1, 3), 2);
        assert_eq!(floor_pow(10, 0, 1), 1);
    }

    #[test]
    fn family_4096_five_twelfths() {
        let alpha = rat(5, 12);
        let p = family_params(4096, &alpha).unwrap();
        assert_eq!(p, FamilyParams { columns: 32, rows: 128, a_max: 1, c_max: 2, d_max: 32 });
        let cfg = build_family(4096, &alpha).unwrap();
        assert_eq!(cfg.lines.len(), 64);
        assert_eq!(family_line_count(&p), 64);
        assert_eq!(cfg.a.len(), 32);
        assert_eq!(cfg.b.len(), 128);
        assert_eq!(cfg.b.min(), Some(&rat(-63, 1)));
        assert_eq!(cfg.b.max(), Some(&rat(64, 1)));
        assert!(cfg.lines.iter().all(|l| l.c == rat(1, 2)));
        let points: Vec<Point> = cfg
            .a
            .iter()
            .flat_map(|x| cfg.b.iter().map(move |y| Point::new(x.clone(), y.clone())))
            .collect();
        for l in &cfg.lines {
            let single = LineSet::new(vec![l.clone()]).unwrap();
            assert_eq!(count_incidences_oracle(&points, &single, 1 << 20).unwrap(), 16);
        }
        assert_eq!(slope_set(&cfg.lines).len(), 1);
    }

    #[test]
    fn family_too_small_is_empty() {
        let cfg = build_family(64, &rat(5, 12)).unwrap();
        assert!(cfg.lines.is_empty());
        assert!(build_family(4096, &rat(1, 3)).is_err());
        assert!(build_family(4096, &rat(1, 2)).is_err());
        assert!(build_family(1, &rat(5, 12)).is_err());
    }

    #[test]
    fn family_counts_match_closed_forms() {
        for (n, alpha) in [(1u64 << 16, rat(5, 12)), (1 << 20, rat(5, 12)), (1 << 18, rat(2, 5)), (1 << 22, rat(3, 7))] {
            let p = family_params(n, &alpha).unwrap();
            let cfg = build_family(n, &alpha).unwrap();
            assert_eq!(cfg.lines.len() as u64, family_line_count(&p), "n={n} alpha={alpha}");
            let slopes = slope_set(&cfg.lines);
            assert_eq!(slopes.len() as u64, family_slope_count(&p));
            for s in slopes.iter() {
                assert!(s.is_positive());
                let c = s.denom().clone();
                let b = s.numer() % &c;
                assert_eq!(b.gcd(&c), 1.into());
            }
        }
    }

    #[test]
    fn elekes_examples() {
        let cfg = build_elekes(64).unwrap();
        assert_eq!((cfg.a.len(), cfg.b.len(), cfg.lines.len()), (2, 32, 64));
        assert_eq!(slope_set(&cfg.lines).len(), 4);
        assert_eq!(count_incidences_product(&cfg.a, &cfg.b, &cfg.lines).total, 128);
        let cfg = build_elekes(512).unwrap();
        assert_eq!(count_incidences_product(&cfg.a, &cfg.b, &cfg.lines).total, 2048);
        assert!(build_elekes(27).is_err());
        assert!(build_elekes(100).is_err());
    }

    #[test]
    fn geometric_examples() {
        let cfg = build_geometric(64).unwrap();
        assert_eq!(cfg.lines.len(), 33);
        assert_eq!(slope_set(&cfg.lines).len(), 33);
        let profile = count_incidences_product(&cfg.a, &cfg.b, &cfg.lines);
        assert_eq!(profile.total, 1584);
        for (l, k) in &profile.per_line {
            let j = l.c.numer().bits() - 1;
            assert_eq!(*k, 64 - j);
        }
        assert_eq!(build_geometric(2).unwrap().lines.len(), 2);
        assert!(build_geometric(3).is_err());
    }

    #[test]
    fn normalize_examples() {
        let cfg = build_elekes(64).unwrap();
        assert_eq!(normalize_line_count(&cfg.lines, 64, &cfg.a, &cfg.b), cfg.lines);

        let mut with_idle = cfg.lines.clone().into_vec();
        let idle = Line::int(1, 1000);
        with_idle.push(idle.clone());
        let grown = LineSet::new(with_idle).unwrap();
        let trimmed = normalize_line_count(&grown, 64, &cfg.a, &cfg.b);
        assert_eq!(trimmed.len(), 64);
        assert!(!trimmed.contains(&idle));

        let short = LineSet::new(cfg.lines.as_slice()[2..].to_vec()).unwrap();
        let before = count_incidences_product(&cfg.a, &cfg.b, &short).total;
        let padded = normalize_line_count(&short, 64, &cfg.a, &cfg.b);
        assert_eq!(padded.len(), 64);
        assert_eq!(count_incidences_product(&cfg.a, &cfg.b, &padded).total, before);
        let points: Vec<Point> = cfg
            .a
            .iter()
            .flat_map(|x| cfg.b.iter().map(move |y| Point::new(x.clone(), y.clone())))
            .collect();
        let added = padded.filtered(|l| !short.contains(l));
        assert_eq!(added.len(), 2);
        assert_eq!(count_incidences_oracle(&points, &added, 1 << 20).unwrap(), 0);
    }

    #[test]
    fn configuration_json_round_trip() {
        let cfg = build_family(4096, &rat(5, 12)).unwrap();
        let json = cfg.to_json();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["alpha"], "5/12");
        assert_eq!(v["lines"][0]["c"], "1/2");
        assert_eq!(Configuration::from_json(&json).unwrap(), cfg);
    }
}
