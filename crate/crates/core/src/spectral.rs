//! Spectrum of the multiplication operator `(La)(s) = ℓ_N(s)·a(s)` on
//! `ℓ²(Γ)`: counting function, dimension estimate, Dirichlet energy and
//! heat trace.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::construct::{to_f64, LengthContext};
use crate::error::{Error, Result};
use crate::group::Element;
use crate::growth::GrowthFit;
use crate::verify::{fit_sublevel_exponent, LevelSets, SublevelPoint};

/// The heat-trace tail is called negligible below this fraction of the partial sum.
pub const HEAT_TAIL_FRACTION: f64 = 1e-6;

/// Eigenvalue counting `N(x) = ♯{s : ℓ_N(s) ≤ x}` with multiplicity.
pub fn spectral_counting(ctx: &LengthContext, x_grid: &[f64]) -> Result<Vec<SublevelPoint>> {
    crate::verify::sublevel_counts(ctx, x_grid)
}

pub fn fit_spectral_dimension(points: &[SublevelPoint]) -> Result<f64> {
    fit_sublevel_exponent(points)
}

/// `E[a] = Σ ℓ_N(s)·a(s)²`; repeated support points are summed first.
pub fn dirichlet_energy(ctx: &LengthContext, a: &[(Element, f64)]) -> Result<f64> {
    let mut merged: BTreeMap<&Element, f64> = BTreeMap::new();
    for (s, v) in a {
        *merged.entry(s).or_insert(0.0) += v;
    }
    let mut acc = 0.0;
    for (s, v) in merged {
        if v != 0.0 {
            acc += to_f64(&ctx.ell(s)?.value) * v * v;
        }
    }
    Ok(acc)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HeatSample {
    pub t: f64,
    pub value: f64,
    /// Upper bound on the contribution of the horizon outside the certified ball.
    pub tail: f64,
    pub certified_tail: bool,
}

/// `Σ e^{−tℓ_N(s)}` over `K^{2m}` (or the whole horizon when it is smaller).
///
/// Every element between radius `2m` and the horizon `R` has `ℓ_N` at least
/// the properness bound, and there are at most `c(R+1)^d − μ(2m)` of them.
pub fn heat_trace_levels(levels: &LevelSets, fit: &GrowthFit, t: f64) -> Result<HeatSample> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::DomainError(format!("heat trace needs t > 0, got {t}")));
    }
    let mut terms: Vec<f64> = levels.values.iter().map(|v| (-t * to_f64(v)).exp()).collect();
    terms.sort_by(f64::total_cmp);
    let value: f64 = terms.iter().sum();
    let inside = levels.values.len() as f64;
    let outside = if levels.certified_ball() {
        (fit.c * ((levels.horizon + 1) as f64).powf(fit.d) - inside).max(0.0)
    } else {
        0.0
    };
    let tail = if outside == 0.0 {
        0.0
    } else {
        outside * (-t * levels.bound as f64).exp()
    };
    Ok(HeatSample {
        t,
        value,
        tail,
        certified_tail: levels.certified_ball() && tail < HEAT_TAIL_FRACTION * value,
    })
}

pub fn heat_trace(ctx: &LengthContext, fit: &GrowthFit, t: f64) -> Result<HeatSample> {
    if !(t > 0.0) {
        return Err(Error::DomainError(format!("heat trace needs t > 0, got {t}")));
    }
    heat_trace_levels(&LevelSets::compute(ctx)?, fit, t)
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectralReport {
    pub counting: Vec<SublevelPoint>,
    pub d_s_estimate: Option<f64>,
    /// Why no estimate was produced.
    pub fit_error: Option<String>,
    pub d_hat: f64,
    pub heat: Vec<HeatSample>,
    pub properness_bound: u64,
}

pub fn spectral_report(ctx: &LengthContext, fit: &GrowthFit, x_grid: &[f64], t_grid: &[f64]) -> Result<SpectralReport> {
    let levels = LevelSets::compute(ctx)?;
    let counting: Vec<SublevelPoint> = x_grid.iter().map(|&x| levels.point(x)).collect();
    let (d_s_estimate, fit_error) = match fit_spectral_dimension(&counting) {
        Ok(v) => (Some(v), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let heat = t_grid
        .iter()
        .map(|&t| heat_trace_levels(&levels, fit, t))
        .collect::<Result<_>>()?;
    Ok(SpectralReport {
        counting,
        d_s_estimate,
        fit_error,
        d_hat: fit.d_hat,
        heat,
        properness_bound: levels.bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ball::enumerate_balls;
    use crate::construct::ConstructionParams;
    use crate::group::{make_group, GroupSpec};
    use crate::growth::fit_growth_exponent;
    use crate::rng::SplitMix64;
    use std::sync::Arc;

    fn z1() -> (LengthContext, GrowthFit) {
        let g = make_group(GroupSpec::free_abelian(1)).unwrap();
        let t = Arc::new(enumerate_balls(&g, 30).unwrap());
        let fit = fit_growth_exponent(&t, (15, 30)).unwrap();
        (LengthContext::build(t, ConstructionParams::new(0.9, 1.2, 3).unwrap()).unwrap(), fit)
    }

    fn e(v: i64) -> Element {
        Element::new(&[v])
    }

    #[test]
    fn counting_examples() {
        let (ctx, _) = z1();
        let pts = spectral_counting(&ctx, &[0.0, 0.5, 1.0, 1.5]).unwrap();
        assert_eq!(pts[0].count, 1);
        assert_eq!(pts[2].count, 5);
        assert!(pts[2].certified);
        assert!(pts.windows(2).all(|w| w[0].count <= w[1].count));
    }

    #[test]
    fn energy_examples() {
        let (ctx, _) = z1();
        assert_eq!(dirichlet_energy(&ctx, &[(e(0), 1.0)]).unwrap(), 0.0);
        assert!((dirichlet_energy(&ctx, &[(e(1), 1.0)]).unwrap() - 4.0 / 9.0).abs() < 1e-15);
        assert!((dirichlet_energy(&ctx, &[(e(1), 3.0)]).unwrap() - 4.0).abs() < 1e-14);
        assert!((dirichlet_energy(&ctx, &[(e(1), 1.0), (e(1), 2.0)]).unwrap() - 4.0).abs() < 1e-14);
        assert!(matches!(
            dirichlet_energy(&ctx, &[(e(31), 1.0)]),
            Err(Error::HorizonError { .. })
        ));
    }

    #[test]
    fn parallelogram_law() {
        let (ctx, _) = z1();
        let mut rng = SplitMix64::new(9);
        let draw = |rng: &mut SplitMix64| -> Vec<(Element, f64)> {
            (0..6)
                .map(|_| (e(rng.range_i64(-30, 30)), rng.next_f64() * 4.0 - 2.0))
                .collect()
        };
        for _ in 0..100 {
            let a = draw(&mut rng);
            let b = draw(&mut rng);
            let plus: Vec<_> = a.iter().cloned().chain(b.iter().cloned()).collect();
            let minus: Vec<_> = a.iter().cloned().chain(b.iter().map(|(s, v)| (s.clone(), -v))).collect();
            let lhs = dirichlet_energy(&ctx, &plus).unwrap() + dirichlet_energy(&ctx, &minus).unwrap();
            let rhs = 2.0 * dirichlet_energy(&ctx, &a).unwrap() + 2.0 * dirichlet_energy(&ctx, &b).unwrap();
            assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs().max(1.0));
        }
    }

    #[test]
    fn heat_trace_examples() {
        let (ctx, fit) = z1();
        assert!(matches!(heat_trace(&ctx, &fit, 0.0), Err(Error::DomainError(_))));
        let big = heat_trace(&ctx, &fit, 1e4).unwrap();
        assert!((big.value - 1.0).abs() < 1e-12);
        let one = heat_trace(&ctx, &fit, 1.0).unwrap();
        let head = 1.0 + 2.0 * (-4.0f64 / 9.0).exp() + 2.0 * (-8.0f64 / 9.0).exp();
        assert!(one.value > head);
        let mut prev = f64::INFINITY;
        for t in [0.1, 0.5, 1.0, 2.0, 10.0] {
            let v = heat_trace(&ctx, &fit, t).unwrap().value;
            assert!(v < prev);
            prev = v;
        }
    }
}
