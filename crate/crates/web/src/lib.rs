//! Browser bindings: incidence profiles, line energies and structure reports
//! for the built-in constructions. Every export returns a JSON string.

use serde_json::json;
use wasm_bindgen::prelude::*;

use inclab::energies::line_energy;
use inclab::incidence::count_incidences_product;
use inclab::structure::{structure_report, StructureParams};
use inclab::sweep::{build, Construction};
use inclab::{Configuration, Line, LineSet, Rational};

/// Keeps a single click under a second or so in the browser.
const MAX_LINES: usize = 50_000;

fn configuration(construction: &str, n: u64, alpha: &str) -> Result<Configuration, String> {
    let construction: Construction = construction.parse().map_err(|e: inclab::Error| e.to_string())?;
    let alpha = match alpha.trim() {
        "" => None,
        a => Some(a.parse::<Rational>().map_err(|e| e.to_string())?),
    };
    let alpha = alpha.filter(|_| construction == Construction::Family);
    let cfg = build(construction, n, alpha.as_ref()).map_err(|e| e.to_string())?;
    if cfg.lines.len() > MAX_LINES {
        return Err(format!("{} lines is more than this page handles ({MAX_LINES})", cfg.lines.len()));
    }
    Ok(cfg)
}

pub fn profile_json(construction: &str, n: u64, alpha: &str) -> Result<String, String> {
    let cfg = configuration(construction, n, alpha)?;
    let profile = count_incidences_product(&cfg.a, &cfg.b, &cfg.lines);
    let s = profile.summary();
    Ok(json!({
        "name": cfg.name,
        "n": cfg.n,
        "alpha": cfg.alpha.to_string(),
        "columns": cfg.a.len(),
        "rows": cfg.b.len(),
        "lines": cfg.lines.len(),
        "total": s.total,
        "min": s.min,
        "max": s.max,
        "median": s.median,
        "histogram": profile.histogram.iter().map(|(k, v)| [k, v]).collect::<Vec<_>>(),
    })
    .to_string())
}

/// One line per row, `c d` or `c,d`, each a fraction like `3/2`.
pub fn parse_lines(text: &str) -> Result<LineSet, String> {
    let mut lines = Vec::new();
    for (no, row) in text.lines().enumerate() {
        let row = row.trim();
        if row.is_empty() || row.starts_with('#') {
            continue;
        }
        let parts: Vec<&str> = row.split(|c: char| c == ',' || c.is_whitespace()).filter(|p| !p.is_empty()).collect();
        let [c, d] = parts.as_slice() else {
            return Err(format!("row {}: expected slope and intercept, got {row:?}", no + 1));
        };
        let c: Rational = c.parse().map_err(|e| format!("row {}: {e}", no + 1))?;
        let d: Rational = d.parse().map_err(|e| format!("row {}: {e}", no + 1))?;
        lines.push(Line::new(c, d));
    }
    LineSet::new(lines).map_err(|e| e.to_string())
}

pub fn energy_json(text: &str) -> Result<String, String> {
    let lines = parse_lines(text)?;
    if lines.len() > 2000 {
        return Err(format!("{} lines; the page stops at 2000", lines.len()));
    }
    Ok(line_energy(&lines).to_json())
}

pub fn structure_json(construction: &str, n: u64, alpha: &str) -> Result<String, String> {
    let cfg = configuration(construction, n, alpha)?;
    structure_report(&cfg, StructureParams::default())
        .map(|r| r.to_json())
        .map_err(|e| e.to_string())
}

#[wasm_bindgen(js_name = incidenceProfile)]
pub fn incidence_profile(construction: &str, n: u32, alpha: &str) -> Result<String, JsValue> {
    profile_json(construction, n.into(), alpha).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = lineEnergy)]
pub fn line_energy_report(text: &str) -> Result<String, JsValue> {
    energy_json(text).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = structureReport)]
pub fn structure(construction: &str, n: u32, alpha: &str) -> Result<String, JsValue> {
    structure_json(construction, n.into(), alpha).map_err(|e| JsValue::from_str(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn elekes_profile() {
        let v: serde_json::Value = serde_json::from_str(&profile_json("elekes", 64, "").unwrap()).unwrap();
        assert_eq!(v["total"], 128);
        assert_eq!(v["lines"], 64);
        assert_eq!(v["histogram"], json!([[2, 64]]));
    }

    #[test]
    fn two_lines() {
        let v: serde_json::Value = serde_json::from_str(&energy_json("1 0\n2, 0\n").unwrap()).unwrap();
        assert_eq!(v["value"], "6");
        assert!(energy_json("0 1").is_err());
        assert!(energy_json("1 2 3").is_err());
    }

    #[test]
    fn geometric_structure() {
        let v: serde_json::Value = serde_json::from_str(&structure_json("geometric", 64, "").unwrap()).unwrap();
        assert_eq!(v["t"], "1");
        assert_eq!(v["e_times_s"], "23969");
    }

    #[test]
    fn too_big_is_refused() {
        assert!(profile_json("elekes", 262144, "").is_err());
        assert!(profile_json("family", 4096, "").is_err());
    }
}
