//! Browser bindings. Every export returns a JSON string; errors come back
//! as `{"error": "..."}` so the page has a single code path.

use std::sync::Arc;

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use negtype::ball::{enumerate_balls_with, BallTable, EnumOptions};
use negtype::construct::{properness_threshold, select_parameters, to_f64, ConstructionParams, LengthContext};
use negtype::group::{make_group, Element, GroupSpec};
use negtype::growth::{alpha_sequence, decidable_depth, fit_growth_exponent, GrowthFit};
use negtype::verify::{default_levels, LevelSets};

/// Keeps a page from asking for a table that would stall the tab.
const ELEMENT_BUDGET: usize = 2_000_000;

type Out = Result<Value, String>;

fn group_spec(name: &str) -> Result<GroupSpec, String> {
    match name {
        "z1" => Ok(GroupSpec::free_abelian(1)),
        "z2" => Ok(GroupSpec::free_abelian(2)),
        "z3" => Ok(GroupSpec::free_abelian(3)),
        "heisenberg" => Ok(GroupSpec::heisenberg()),
        other => Err(format!("unknown group '{other}' (use z1, z2, z3 or heisenberg)")),
    }
}

fn table(group: &str, radius: u32) -> Result<Arc<BallTable>, String> {
    let g = make_group(group_spec(group)?).map_err(|e| e.to_string())?;
    let opts = EnumOptions {
        budget: ELEMENT_BUDGET,
        threads: None,
    };
    enumerate_balls_with(&g, radius, &opts)
        .map(Arc::new)
        .map_err(|e| e.to_string())
}

fn fit(t: &BallTable) -> Result<GrowthFit, String> {
    let r = t.radius();
    fit_growth_exponent(t, (r / 2, r)).map_err(|e| e.to_string())
}

fn finish(out: Out) -> String {
    match out {
        Ok(v) => v.to_string(),
        Err(e) => json!({ "error": e }).to_string(),
    }
}

pub fn growth_curve_value(group: &str, radius: u32) -> Out {
    let t = table(group, radius)?;
    let f = fit(&t)?;
    let alphas: Vec<f64> = alpha_sequence(&t).iter().map(|(_, a)| to_f64(a)).collect();
    Ok(json!({
        "group": t.group().spec().short_name(),
        "mu": t.sizes(),
        "alpha": alphas,
        "d_hat": f.d_hat,
        "c": f.c,
        "d": f.d,
        "window": [f.window.0, f.window.1],
    }))
}

/// Values of `ℓ_N` and its sublevel counts. `beta`/`gamma` override the
/// target when both are positive.
pub fn length_profile_value(group: &str, radius: u32, d_target: f64, beta: f64, gamma: f64, depth: u32) -> Out {
    let t = table(group, radius)?;
    let f = fit(&t)?;
    let (beta, gamma) = if beta > 0.0 && gamma > 0.0 {
        (beta, gamma)
    } else {
        select_parameters(d_target, &f).map_err(|e| e.to_string())?
    };
    let depth = (depth as u64).min(decidable_depth(radius as u64, gamma)).max(1);
    let params = ConstructionParams::new(beta, gamma, depth).map_err(|e| e.to_string())?;
    let ctx = LengthContext::build(Arc::clone(&t), params).map_err(|e| e.to_string())?;
    let (two_m, bound) = properness_threshold(&ctx);
    let levels = LevelSets::compute(&ctx).map_err(|e| e.to_string())?;
    let counting: Vec<Value> = default_levels(bound, 24)
        .into_iter()
        .map(|x| {
            let p = levels.point(x);
            json!([p.x, p.count, p.certified])
        })
        .collect();
    // Mean ℓ_N per word-length sphere inside the certified ball.
    let shown = two_m.min(t.radius());
    let by_length: Vec<f64> = (0..=shown)
        .map(|n| {
            let r = t.sphere(n);
            let sum: f64 = levels.values[r.clone()].iter().map(to_f64).sum();
            sum / r.len() as f64
        })
        .collect();
    Ok(json!({
        "beta": beta,
        "gamma": gamma,
        "depth": depth,
        "terms": ctx.terms().iter().map(|t| json!({"n": t.n, "k": t.k})).collect::<Vec<_>>(),
        "skipped": ctx.skipped(),
        "radius_2m": two_m,
        "bound": bound,
        "counting": counting,
        "mean_by_length": by_length,
    }))
}

pub fn overlap_value(group: &str, radius: u32, k: u32, element: &str) -> Out {
    if k == 0 || k > radius {
        return Err(format!("k must be in [1, {radius}]"));
    }
    let t = table(group, radius)?;
    let s = Element::parse(element).map_err(|e| e.to_string())?;
    let w = negtype::construct::omega(&t, k, &s).map_err(|e| e.to_string())?;
    let len = t.word_length(s.as_slice()).map_err(|e| e.to_string())?;
    Ok(json!({
        "element": s.to_string(),
        "word_length": len,
        "k": k,
        "omega": w.to_string(),
        "omega_f64": to_f64(&w),
    }))
}

/// Ball sizes, ratio jumps and the fitted growth exponent.
#[wasm_bindgen]
pub fn growth_curve(group: &str, radius: u32) -> String {
    finish(growth_curve_value(group, radius))
}

/// The truncated length function and its sublevel counting function.
#[wasm_bindgen]
pub fn length_profile(group: &str, radius: u32, d_target: f64, beta: f64, gamma: f64, depth: u32) -> String {
    finish(length_profile_value(group, radius, d_target, beta, gamma, depth))
}

/// `|sB_k ∩ B_k| / |B_k|` for an element written like `(1,-2,0)`.
#[wasm_bindgen]
pub fn overlap(group: &str, radius: u32, k: u32, element: &str) -> String {
    finish(overlap_value(group, radius, k, element))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn growth_curve_z1() {
        let v = growth_curve_value("z1", 20).unwrap();
        assert_eq!(v["mu"][3], 7);
        assert!((v["d_hat"].as_f64().unwrap() - 1.0).abs() < 0.1);
    }

    #[test]
    fn overlap_examples() {
        let v = overlap_value("z1", 10, 5, "(3)").unwrap();
        assert_eq!(v["omega"], "8/11");
        assert_eq!(v["word_length"], 3);
        let v = overlap_value("heisenberg", 6, 2, "(0,0,0)").unwrap();
        assert_eq!(v["omega"], "1");
        assert!(overlap_value("z1", 10, 0, "(1)").is_err());
        assert!(overlap_value("z1", 10, 2, "(1,2)").is_err());
    }

    #[test]
    fn length_profile_z1() {
        let v = length_profile_value("z1", 30, 0.0, 0.9, 1.2, 3).unwrap();
        assert_eq!(v["bound"], 2);
        assert_eq!(v["radius_2m"], 12);
        let mean = v["mean_by_length"].as_array().unwrap();
        // Sphere of radius 1 is {±1}, both at 4/9.
        assert!((mean[1].as_f64().unwrap() - 4.0 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn errors_are_json() {
        let s = growth_curve("free", 5);
        assert!(s.contains("\"error\""));
        let s = length_profile("z1", 30, 0.5, 0.0, 0.0, 3);
        assert!(s.contains("error"), "{s}");
    }
}
