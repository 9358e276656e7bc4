//! Parameter sweeps over one construction, emitted as long-format CSV.

use std::io::Write;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::constructions::{build_elekes, build_family, build_geometric, slope_set, Configuration};
use crate::energies::{line_energy, multiplicative_energy};
use crate::error::{input, Error, Result};
use crate::fit::{exponent_fit, ExponentFit};
use crate::incidence::count_incidences_product;
use crate::rational::Rational;
use crate::structure::{structure_report, StructureParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Construction {
    Family,
    Elekes,
    Geometric,
}

impl std::str::FromStr for Construction {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "family" => Ok(Construction::Family),
            "elekes" => Ok(Construction::Elekes),
            "geometric" => Ok(Construction::Geometric),
            other => input(format!("unknown construction {other:?}")),
        }
    }
}

impl std::fmt::Display for Construction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Construction::Family => "family",
            Construction::Elekes => "elekes",
            Construction::Geometric => "geometric",
        })
    }
}

pub fn build(construction: Construction, n: u64, alpha: Option<&Rational>) -> Result<Configuration> {
    match (construction, alpha) {
        (Construction::Family, Some(alpha)) => build_family(n, alpha),
        (Construction::Family, None) => input("the family construction needs --alpha"),
        (Construction::Elekes, None) => build_elekes(n),
        (Construction::Geometric, None) => build_geometric(n),
        (c, Some(_)) => input(format!("alpha only applies to the family construction, not {c}")),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measurement {
    Incidences,
    LineEnergy,
    SlopeEnergy,
    Structure,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub construction: Construction,
    pub n_values: Vec<u64>,
    #[serde(default)]
    pub alpha: Option<Rational>,
    pub measurements: Vec<Measurement>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_values.windows(2).any(|w| w[0] >= w[1]) {
            return input("n_values must be strictly increasing");
        }
        if self.n_values.is_empty() {
            return input("n_values is empty");
        }
        if (self.construction == Construction::Family) != self.alpha.is_some() {
            return input("alpha is required for the family construction and only for it");
        }
        if self.measurements.is_empty() {
            return input("no measurements requested");
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub construction: Construction,
    pub n: u64,
    pub alpha: Option<Rational>,
    pub metric: String,
    pub value: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricFit {
    pub metric: String,
    pub fit: ExponentFit,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub fits: Vec<MetricFit>,
}

impl SweepResult {
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "construction,n,alpha,metric,value")?;
        for r in &self.rows {
            let alpha = r.alpha.as_ref().map(|a| a.to_string()).unwrap_or_default();
            writeln!(out, "{},{},{},{},{}", r.construction, r.n, alpha, r.metric, r.value)?;
        }
        Ok(())
    }
}

/// Rows come out in `n_values` order, then in `measurements` order.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    let mut rows = Vec::new();
    for &n in &spec.n_values {
        let cfg = build(spec.construction, n, spec.alpha.as_ref())?;
        let mut push = |metric: &str, value: String| {
            rows.push(SweepRow {
                construction: spec.construction,
                n,
                alpha: spec.alpha.clone(),
                metric: metric.to_string(),
                value,
            })
        };
        for m in &spec.measurements {
            match m {
                Measurement::Incidences => {
                    push("incidences", count_incidences_product(&cfg.a, &cfg.b, &cfg.lines).total.to_string());
                }
                Measurement::LineEnergy => push("line_energy", line_energy(&cfg.lines).value.to_string()),
                Measurement::SlopeEnergy => {
                    let s = slope_set(&cfg.lines);
                    push("slopes", s.len().to_string());
                    let e = if s.is_empty() { BigUint::default() } else { multiplicative_energy(&s)?.value };
                    push("slope_energy", e.to_string());
                }
                Measurement::Structure => {
                    let r = structure_report(&cfg, StructureParams::default())?;
                    let show = |v: &Option<BigUint>| v.as_ref().map(|v| v.to_string()).unwrap_or_default();
                    push("structure_t", show(&r.t));
                    push("structure_e_times_s", show(&r.e_times_s));
                    push("structure_product", show(&r.product));
                    push("structure_beta", r.beta.map(|b| b.value.to_string()).unwrap_or_default());
                }
            }
        }
    }
    Ok(SweepResult { fits: fit_metrics(&rows), rows })
}

/// One log-log fit per metric with at least three positive values.
fn fit_metrics(rows: &[SweepRow]) -> Vec<MetricFit> {
    let mut metrics: Vec<&str> = rows.iter().map(|r| r.metric.as_str()).collect();
    metrics.dedup();
    let mut seen = std::collections::HashSet::new();
    metrics.retain(|m| seen.insert(*m));
    metrics
        .into_iter()
        .filter_map(|metric| {
            let pts: Vec<(f64, f64)> = rows
                .iter()
                .filter(|r| r.metric == metric)
                .filter_map(|r| {
                    let v = r.value.parse::<BigUint>().ok()?.to_f64()?;
                    (v > 0.0).then_some((r.n as f64, v))
                })
                .collect();
            let fit = exponent_fit(&pts).ok()?;
            Some(MetricFit { metric: metric.to_string(), fit })
        })
        .collect()
}
