//! Browser bindings: entropy curves, residual curves and classification.
//!
//! Each exported function returns a JSON string. The `*_json` functions are
//! the plain-Rust versions, usable and testable off the browser.

use qentropy::additivity::{pseudo_residual, shannon_residual};
use qentropy::classify::classify;
use qentropy::{
    EntropyFunctional, Form, FunctionalKind, FunctionalSpec, PhiSpec, ProbVec, ProductSystem,
};
use serde::Serialize;
use wasm_bindgen::prelude::*;

#[derive(Serialize)]
struct Series {
    kind: FunctionalKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    identity: Option<&'static str>,
    values: Vec<Option<f64>>,
}

#[derive(Serialize)]
struct Curves {
    q: Vec<f64>,
    series: Vec<Series>,
}

fn parse_p(text: &str) -> Result<ProbVec, String> {
    let w = text
        .split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|_| format!("not a number: `{x}`")))
        .collect::<Result<Vec<_>, _>>()?;
    ProbVec::from_weights(w).map_err(|e| e.to_string())
}

fn parse_phi(text: &str) -> Result<PhiSpec, String> {
    let text = text.trim();
    if text.is_empty() || text == "paper_example" {
        return Ok(PhiSpec::Named("paper_example".into()));
    }
    text.split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|_| format!("not a number: `{x}`")))
        .collect::<Result<Vec<_>, _>>()
        .map(PhiSpec::Poly)
}

fn q_axis(q_min: f64, q_max: f64, steps: usize) -> Result<Vec<f64>, String> {
    if !(q_min > 0.0 && q_max > q_min && (2..=2000).contains(&steps)) {
        return Err("need 0 < q_min < q_max and 2 <= steps <= 2000".into());
    }
    Ok((0..steps)
        .map(|i| q_min + (q_max - q_min) * i as f64 / (steps - 1) as f64)
        .collect())
}

fn functional(kind: FunctionalKind, q: f64, phi: &PhiSpec) -> Result<EntropyFunctional, String> {
    FunctionalSpec {
        kind,
        q: Some(q),
        phi: kind.needs_phi().then(|| phi.clone()),
        name: None,
    }
    .build()
    .map_err(|e| e.to_string())
}

fn form_of(kind: FunctionalKind) -> Form {
    match kind {
        FunctionalKind::NormalizedTsallis | FunctionalKind::NClass2 | FunctionalKind::NClass3 => {
            Form::Normalized
        }
        _ => Form::Original,
    }
}

/// Values of every built-in functional on `p` over a grid of `q`.
pub fn entropy_curves_json(p: &str, q_min: f64, q_max: f64, steps: usize, phi: &str) -> Result<String, String> {
    let p = parse_p(p)?;
    let phi = parse_phi(phi)?;
    let q = q_axis(q_min, q_max, steps)?;
    let series = FunctionalKind::BUILTIN
        .into_iter()
        .map(|kind| {
            let values = q
                .iter()
                .map(|&qv| Ok(functional(kind, qv, &phi)?.eval(&p).ok()))
                .collect::<Result<Vec<_>, String>>()?;
            Ok(Series {
                kind,
                identity: None,
                values,
            })
        })
        .collect::<Result<Vec<_>, String>>()?;
    serde_json::to_string(&Curves { q, series }).map_err(|e| e.to_string())
}

/// Relative residuals of both laws on the product of `a` and `b`, per
/// functional, over a grid of `q`. The grouping law uses the refinement of
/// `a` by copies of `b`.
pub fn residual_curves_json(a: &str, b: &str, q_min: f64, q_max: f64, steps: usize, phi: &str) -> Result<String, String> {
    let sys = ProductSystem::new(parse_p(a)?, parse_p(b)?).map_err(|e| e.to_string())?;
    let refinement = sys.to_refinement();
    let phi = parse_phi(phi)?;
    let q = q_axis(q_min, q_max, steps)?;
    let mut series = Vec::new();
    for kind in FunctionalKind::BUILTIN.into_iter().filter(|&k| k != FunctionalKind::Shannon) {
        let form = form_of(kind);
        let mut shannon = Vec::with_capacity(q.len());
        let mut pseudo = Vec::with_capacity(q.len());
        for &qv in &q {
            let f = functional(kind, qv, &phi)?;
            shannon.push(shannon_residual(&f, &refinement, form).ok().map(|r| r.rel_residual));
            pseudo.push(pseudo_residual(&f, &sys, form).ok().map(|r| r.rel_residual));
        }
        series.push(Series {
            kind,
            identity: Some("shannon"),
            values: shannon,
        });
        series.push(Series {
            kind,
            identity: Some("pseudo"),
            values: pseudo,
        });
    }
    serde_json::to_string(&Curves { q, series }).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct Summary {
    kind: FunctionalKind,
    form: Form,
    label: String,
    samples: usize,
    seed: u64,
    shannon_status: qentropy::classify::IdentityStatus,
    pseudo_status: qentropy::classify::IdentityStatus,
    worst_shannon: f64,
    worst_pseudo: f64,
    shannon_failures: usize,
    pseudo_failures: usize,
    quarantined: usize,
}

/// Classification summary for one built-in functional.
pub fn classify_json(kind: &str, phi: &str, samples: usize, seed: u64) -> Result<String, String> {
    let kind: FunctionalKind = kind.parse().map_err(|e: qentropy::Error| e.to_string())?;
    if !(1..=20_000).contains(&samples) {
        return Err("samples must be in 1..=20000".into());
    }
    let f = functional(kind, 1.0, &parse_phi(phi)?)?;
    let form = form_of(kind);
    let r = classify(&f, form, samples, seed).map_err(|e| e.to_string())?;
    serde_json::to_string(&Summary {
        kind,
        form,
        label: r.label.to_string(),
        samples,
        seed,
        shannon_status: r.shannon_status,
        pseudo_status: r.pseudo_status,
        worst_shannon: r.worst_shannon.rel_residual,
        worst_pseudo: r.worst_pseudo.rel_residual,
        shannon_failures: r.shannon_failures,
        pseudo_failures: r.pseudo_failures,
        quarantined: r.quarantined,
    })
    .map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn entropy_curves(p: &str, q_min: f64, q_max: f64, steps: usize, phi: &str) -> Result<String, JsValue> {
    entropy_curves_json(p, q_min, q_max, steps, phi).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn residual_curves(a: &str, b: &str, q_min: f64, q_max: f64, steps: usize, phi: &str) -> Result<String, JsValue> {
    residual_curves_json(a, b, q_min, q_max, steps, phi).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn classify_functional(kind: &str, phi: &str, samples: usize, seed: u64) -> Result<String, JsValue> {
    classify_json(kind, phi, samples, seed).map_err(|e| JsValue::from_str(&e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    #[test]
    fn entropy_curves_shape() {
        let v: Value = serde_json::from_str(&entropy_curves_json("1,1", 0.5, 2.0, 4, "").unwrap()).unwrap();
        assert_eq!(v["q"].as_array().unwrap().len(), 4);
        assert_eq!(v["series"].as_array().unwrap().len(), 7);
        // tsallis at q = 2 on the fair coin
        let tsallis = &v["series"][1];
        assert_eq!(tsallis["kind"], "tsallis");
        assert!((tsallis["values"][3].as_f64().unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn residual_curves_separate_classes() {
        let v: Value =
            serde_json::from_str(&residual_curves_json("0.2,0.8", "0.5,0.5", 2.0, 3.0, 2, "paper_example").unwrap())
                .unwrap();
        let find = |kind: &str, identity: &str| {
            v["series"]
                .as_array()
                .unwrap()
                .iter()
                .find(|s| s["kind"] == kind && s["identity"] == identity)
                .unwrap()["values"][0]
                .as_f64()
                .unwrap()
        };
        assert!(find("tsallis", "pseudo") < 1e-12);
        assert!(find("class2", "shannon") < 1e-12);
        assert!(find("class2", "pseudo") > 1e-4);
        assert!(find("class3", "shannon") > 1e-4);
    }

    #[test]
    fn classify_summary() {
        let v: Value = serde_json::from_str(&classify_json("class3", "", 200, 1).unwrap()).unwrap();
        assert_eq!(v["label"], "class3");
        assert!(classify_json("nope", "", 10, 1).is_err());
    }

    #[test]
    fn bad_inputs_are_errors() {
        assert!(entropy_curves_json("a", 0.5, 2.0, 4, "").is_err());
        assert!(entropy_curves_json("1", 2.0, 0.5, 4, "").is_err());
        assert!(residual_curves_json("1", "1", 0.5, 2.0, 4, "x").is_err());
    }
}
