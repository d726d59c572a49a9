//! wasm bindings for the static demo page. Every export takes and returns JSON text.

use planedom::constructions::{build_family, FAMILIES};
use planedom::gf::FieldSpec;
use planedom::plane::{build_pg2q, Plane};
use planedom::sets::{analyze, Candidate};
use serde_json::json;
use wasm_bindgen::prelude::*;

/// Largest order the page offers; keeps the incidence canvas legible.
pub const MAX_ORDER: u64 = 9;

fn plane(q: u64) -> Result<Plane, String> {
    if q > MAX_ORDER {
        return Err(format!("order {q} is above the demo limit {MAX_ORDER}"));
    }
    let f = FieldSpec::of_order(q).map_err(|e| e.to_string())?;
    build_pg2q(&f).map_err(|e| e.to_string())
}

fn incidence(p: &Plane) -> Vec<Vec<u32>> {
    p.lines()
        .map(|l| p.points_on(l).map(|x| x.0).collect())
        .collect()
}

/// Builds a family member and its analysis, plus the line list for drawing.
pub fn construct_json(family: &str, q: u64, t: Option<u32>) -> Result<String, String> {
    let p = plane(q)?;
    let c = build_family(&p, family, t).map_err(|e| e.to_string())?;
    let report = analyze(&p, &c.candidate);
    let mismatches: Vec<_> = c
        .expected
        .mismatches(&report.flags)
        .into_iter()
        .map(|(flag, want, got)| json!({"flag": flag, "expected": want, "got": got}))
        .collect();
    Ok(json!({
        "family": family,
        "q": q,
        "candidate": c.candidate,
        "expected_size": c.expected_size,
        "mismatches": mismatches,
        "report": report,
        "lines": incidence(&p),
    })
    .to_string())
}

/// Analyses an arbitrary candidate given as `{"points": [...], "lines": [...]}`.
pub fn analyze_json(q: u64, candidate: &str) -> Result<String, String> {
    let p = plane(q)?;
    let c = Candidate::from_json(candidate.as_bytes()).map_err(|e| e.to_string())?;
    c.check(&p).map_err(|e| e.to_string())?;
    serde_json::to_string(&analyze(&p, &c)).map_err(|e| e.to_string())
}

/// Feasibility records for `q_min..=q_max`, with the exclusion verdict attached.
pub fn scan_json(q_min: u64, q_max: u64, all_k: bool) -> Result<String, String> {
    use planedom::feasibility::{combinatorial_exclusion, scan};
    let records = scan(q_min, q_max, all_k).map_err(|e| e.to_string())?;
    let rows: Vec<_> = records
        .into_iter()
        .map(|r| {
            let excl = combinatorial_exclusion(&r).ok();
            json!({"record": r, "exclusion": excl})
        })
        .collect();
    serde_json::to_string(&rows).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn families() -> String {
    serde_json::to_string(&FAMILIES).unwrap()
}

#[wasm_bindgen]
pub fn construct(family: &str, q: u32, t: Option<u32>) -> Result<String, JsError> {
    construct_json(family, q.into(), t).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = analyzeSet)]
pub fn analyze_set(q: u32, candidate: &str) -> Result<String, JsError> {
    analyze_json(q.into(), candidate).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = feasibilityScan)]
pub fn feasibility_scan(q_min: u32, q_max: u32, all_k: bool) -> Result<String, JsError> {
    scan_json(q_min.into(), q_max.into(), all_k).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    #[test]
    fn construct_then_reanalyze() {
        let v: Value = serde_json::from_str(&construct_json("ii", 4, None).unwrap()).unwrap();
        assert_eq!(v["report"]["size"], 10);
        assert_eq!(v["mismatches"].as_array().unwrap().len(), 0);
        assert_eq!(v["lines"].as_array().unwrap().len(), 21);
        let again: Value =
            serde_json::from_str(&analyze_json(4, &v["candidate"].to_string()).unwrap()).unwrap();
        assert_eq!(again, v["report"]);
    }

    #[test]
    fn analyze_rejects_out_of_range() {
        assert!(analyze_json(2, r#"{"points":[7],"lines":[]}"#).is_err());
        assert!(analyze_json(11, r#"{"points":[],"lines":[]}"#).is_err());
    }

    #[test]
    fn scan_rows_carry_exclusions() {
        let rows: Value = serde_json::from_str(&scan_json(21, 40, false).unwrap()).unwrap();
        assert!(!rows.as_array().unwrap().is_empty());
        assert!(rows[0]["record"]["q"].is_u64());
    }
}
