//! Checks of the construction: positive definiteness of the overlap
//! functions, conditional negative definiteness of `ℓ_N` (exact and
//! spectral), the per-term decay bounds, properness and sublevel growth.

use std::cmp::Ordering;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::certified::{cmp_with_power, rational_from_f64, rational_to_f64};
use crate::construct::{properness_threshold, to_f64, LengthContext, Term};
use crate::error::{Error, Result};
use crate::group::Element;
use crate::growth::least_squares;
use crate::rng::SplitMix64;

/// Relative tolerance for eigenvalue checks of exact-rational matrices.
pub const PSD_TOL: f64 = 1e-9;

/// Smallest eigenvalue of a symmetric matrix by cyclic Jacobi rotations.
pub fn min_eig_sym(m: &[Vec<f64>]) -> Result<f64> {
    let n = m.len();
    if n == 0 {
        return Err(Error::DomainError("empty matrix".into()));
    }
    if n > 256 || m.iter().any(|r| r.len() != n) {
        return Err(Error::DomainError(format!("matrix must be square with size <= 256, got {n}")));
    }
    let scale = m.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
    for i in 0..n {
        for j in i + 1..n {
            if (m[i][j] - m[j][i]).abs() > 1e-12 * scale.max(f64::MIN_POSITIVE) {
                return Err(Error::NotSymmetric(i, j));
            }
        }
    }
    let mut a: Vec<Vec<f64>> = m.to_vec();
    let total: f64 = a.iter().flatten().map(|v| v * v).sum::<f64>().sqrt();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * total || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p][q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for r in 0..n {
                    let arp = a[r][p];
                    let arq = a[r][q];
                    a[r][p] = c * arp - s * arq;
                    a[r][q] = s * arp + c * arq;
                }
                for r in 0..n {
                    let apr = a[p][r];
                    let aqr = a[q][r];
                    a[p][r] = c * apr - s * aqr;
                    a[q][r] = s * apr + c * aqr;
                }
            }
        }
    }
    Ok((0..n).map(|i| a[i][i]).fold(f64::INFINITY, f64::min))
}

#[derive(Clone, Debug, Serialize)]
pub struct PsdReport {
    pub size: usize,
    pub min_eig: f64,
    /// Largest absolute entry.
    pub scale: f64,
    pub pass: bool,
}

impl PsdReport {
    pub fn from_matrix(m: &[Vec<f64>]) -> Result<Self> {
        let min_eig = min_eig_sym(m)?;
        let scale = m.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
        Ok(PsdReport {
            size: m.len(),
            min_eig,
            scale,
            pass: min_eig >= -PSD_TOL * scale,
        })
    }
}

fn term_for(ctx: &LengthContext, n: u64) -> Result<Term> {
    ctx.terms()
        .iter()
        .copied()
        .find(|t| t.n == n)
        .ok_or_else(|| Error::DomainError(format!("n = {n} is not a selected term")))
}

/// Gram test of `ω_{k(n)}`: `M_ij = ω(s_i⁻¹ s_j)`.
pub fn check_positive_definite_omega(ctx: &LengthContext, n: u64, sample: &[Element]) -> Result<PsdReport> {
    let k = term_for(ctx, n)?.k;
    omega_gram(ctx, k, sample)
}

/// Gram test of the overlap function of radius `k` directly.
pub fn omega_gram(ctx: &LengthContext, k: u32, sample: &[Element]) -> Result<PsdReport> {
    let g = ctx.table().group();
    let mut m = vec![vec![0.0; sample.len()]; sample.len()];
    for (i, a) in sample.iter().enumerate() {
        for (j, b) in sample.iter().enumerate().skip(i) {
            let v = to_f64(&ctx.omega(k, &g.left_quotient(a, b)?)?);
            m[i][j] = v;
            m[j][i] = v;
        }
    }
    PsdReport::from_matrix(&m)
}

#[derive(Clone, Debug, Serialize)]
pub struct SchoenbergMargin {
    pub t: f64,
    pub min_eig: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CndReport {
    pub sample: Vec<String>,
    /// Exact values of `Σ c_i c_j ℓ_N(s_i⁻¹ s_j)` for zero-sum integer `c`.
    pub forms: Vec<String>,
    pub max_form: f64,
    pub exact_pass: bool,
    /// `ℓ(s_i) + ℓ(s_j) − ℓ(s_i⁻¹ s_j)`.
    pub kernel: PsdReport,
    pub schoenberg: Vec<SchoenbergMargin>,
    pub pass: bool,
}

/// Matrix `ℓ_N(s_i⁻¹ s_j)` in exact arithmetic.
pub fn ell_matrix(ctx: &LengthContext, sample: &[Element]) -> Result<Vec<Vec<BigRational>>> {
    let g = ctx.table().group();
    let n = sample.len();
    let mut m = vec![vec![BigRational::zero(); n]; n];
    for i in 0..n {
        for j in i..n {
            let v = ctx.ell(&g.left_quotient(&sample[i], &sample[j])?)?.value;
            m[j][i] = v.clone();
            m[i][j] = v;
        }
    }
    Ok(m)
}

/// Zero-sum integer vector: entries in `[−9, 9]`, the last one adjusted.
pub fn zero_sum_vector(rng: &mut SplitMix64, len: usize) -> Vec<i64> {
    let mut c: Vec<i64> = (0..len).map(|_| rng.range_i64(-9, 9)).collect();
    if let Some(last) = c.len().checked_sub(1) {
        let s: i64 = c[..last].iter().sum();
        c[last] = -s;
    }
    c
}

pub fn quadratic_form(m: &[Vec<BigRational>], c: &[i64]) -> BigRational {
    let mut acc = BigRational::zero();
    for (i, row) in m.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            let w = c[i] * c[j];
            if w != 0 && !v.is_zero() {
                acc += v * BigRational::from_integer(w.into());
            }
        }
    }
    acc
}

pub fn check_negative_definite_ell(
    ctx: &LengthContext,
    sample: &[Element],
    t_grid: &[f64],
    trials: usize,
    rng: &mut SplitMix64,
) -> Result<CndReport> {
    let lm = ell_matrix(ctx, sample)?;
    let n = sample.len();
    let mut forms = Vec::with_capacity(trials);
    let mut max_form = f64::NEG_INFINITY;
    let mut exact_pass = true;
    for _ in 0..trials {
        let c = zero_sum_vector(rng, n);
        let q = quadratic_form(&lm, &c);
        if q.is_positive() {
            exact_pass = false;
        }
        max_form = max_form.max(rational_to_f64(&q));
        forms.push(q.to_string());
    }
    let lf: Vec<Vec<f64>> = lm.iter().map(|r| r.iter().map(to_f64).collect()).collect();
    let diag: Vec<f64> = sample
        .iter()
        .map(|s| ctx.ell(s).map(|v| to_f64(&v.value)))
        .collect::<Result<_>>()?;
    let kernel: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| diag[i] + diag[j] - lf[i][j]).collect())
        .collect();
    let kernel = PsdReport::from_matrix(&kernel)?;
    let mut schoenberg = Vec::new();
    for &t in t_grid {
        let e: Vec<Vec<f64>> = lf
            .iter()
            .map(|r| r.iter().map(|v| (-t * v).exp()).collect())
            .collect();
        let rep = PsdReport::from_matrix(&e)?;
        schoenberg.push(SchoenbergMargin {
            t,
            min_eig: rep.min_eig,
            pass: rep.pass,
        });
    }
    let pass = exact_pass && kernel.pass && schoenberg.iter().all(|s| s.pass);
    Ok(CndReport {
        sample: sample.iter().map(Element::to_string).collect(),
        forms,
        max_form: if trials == 0 { 0.0 } else { max_form },
        exact_pass,
        kernel,
        schoenberg,
        pass,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayViolation {
    pub element: String,
    pub word_length: u32,
    pub n: u64,
    pub k: u32,
    pub gap: String,
    pub kind: &'static str,
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayReport {
    pub p_max: u32,
    pub elements_checked: usize,
    pub comparisons: usize,
    /// Generator bound on `K`: `ω ≥ (1+α_k)⁻¹ ≥ 1 − α_k ≥ 1 − k^{−β}` and `1 − ω ≤ n^{−βγ}`.
    pub generator_violations: usize,
    /// `1 − ω_n(s) ≤ p·n^{−βγ}` for `s` of word length `p`.
    pub linear_violations: usize,
    /// `1 − ω_n(s) ≤ p²·n^{−2βγ}`; reported, not part of the verdict.
    pub quadratic_violations: usize,
    pub examples: Vec<DecayViolation>,
    pub pass: bool,
}

/// Word-length spheres up to `p_max` (sampled down to 500 elements each)
/// against every selected term.
pub fn check_lemma_bounds(ctx: &LengthContext, p_max: u32, rng: &mut SplitMix64) -> Result<DecayReport> {
    let table = ctx.table();
    if p_max > table.radius() {
        return Err(Error::HorizonError { required: p_max });
    }
    let p = ctx.params();
    let decay = rational_from_f64(p.beta) * rational_from_f64(p.gamma);
    let neg_decay = -decay.clone();
    let neg_double = -(decay * BigRational::from_integer(2.into()));
    let neg_beta = -rational_from_f64(p.beta);
    let one = BigRational::one();
    let mut rep = DecayReport {
        p_max,
        elements_checked: 0,
        comparisons: 0,
        generator_violations: 0,
        linear_violations: 0,
        quadratic_violations: 0,
        examples: Vec::new(),
        pass: true,
    };
    let record = |rep: &mut DecayReport, s: &Element, wl: u32, t: Term, gap: &BigRational, kind| {
        if rep.examples.len() < 20 {
            rep.examples.push(DecayViolation {
                element: s.to_string(),
                word_length: wl,
                n: t.n,
                k: t.k,
                gap: gap.to_string(),
                kind,
            });
        }
    };

    for &t in ctx.terms() {
        let alpha = ctx.alphas().get(t.k as u64).clone();
        let chain = BigRational::new(table.mu(t.k - 1).into(), table.mu(t.k).into());
        // α_1 = 0 is a convention rather than μ_1/μ_0 − 1, so the chain starts at k = 2.
        let chained = t.k >= 2;
        let mut ok = !chained
            || (chain >= &one - &alpha && cmp_with_power(&alpha, t.k as u64, &neg_beta) != Ordering::Greater);
        for sigma in table.group().generators() {
            let w = ctx.omega(t.k, sigma)?;
            let gap = &one - &w;
            let bullet = cmp_with_power(&gap, t.n, &neg_decay) != Ordering::Greater;
            if (chained && w < chain) || !bullet {
                ok = false;
                record(&mut rep, sigma, 1, t, &gap, "generator");
            }
        }
        if !ok {
            rep.generator_violations += 1;
        }
    }

    for wl in 0..=p_max {
        let sphere = table.sphere(wl);
        let picks = rng.sample_indices(sphere.len(), 500);
        for off in picks {
            let s = table.element(sphere.start + off);
            rep.elements_checked += 1;
            for &t in ctx.terms() {
                rep.comparisons += 1;
                let gap = &one - ctx.omega(t.k, &s)?;
                if wl == 0 {
                    if !gap.is_zero() {
                        rep.linear_violations += 1;
                        record(&mut rep, &s, wl, t, &gap, "linear");
                    }
                    continue;
                }
                let pr = BigRational::from_integer(wl.into());
                if cmp_with_power(&(&gap / &pr), t.n, &neg_decay) == Ordering::Greater {
                    rep.linear_violations += 1;
                    record(&mut rep, &s, wl, t, &gap, "linear");
                }
                if cmp_with_power(&(&gap / (&pr * &pr)), t.n, &neg_double) == Ordering::Greater {
                    rep.quadratic_violations += 1;
                    record(&mut rep, &s, wl, t, &gap, "quadratic");
                }
            }
        }
    }
    rep.pass = rep.generator_violations == 0 && rep.linear_violations == 0;
    Ok(rep)
}

#[derive(Clone, Debug, Serialize)]
pub struct ProperReport {
    pub radius: u32,
    pub bound: u64,
    pub horizon: u32,
    pub scanned: usize,
    pub violations: usize,
    /// Smallest `ℓ_N` seen in the annulus.
    pub min_value: Option<f64>,
    /// Whether every overlap was counted directly rather than through the
    /// disjoint-translate shortcut.
    pub direct: bool,
    pub pass: bool,
}

/// Work limit (ball-membership lookups) for a fully direct annulus scan.
pub const DIRECT_SCAN_BUDGET: u64 = 3_000_000_000;

/// Scans every element between radius `2m` and the horizon for a value of
/// `ℓ_N` below `♯([1,N] \ F)`.
pub fn properness_scan(ctx: &LengthContext) -> Result<ProperReport> {
    let (radius, bound) = properness_threshold(ctx);
    let table = ctx.table();
    let horizon = table.radius();
    let lo = table.mu(radius.min(horizon)) as usize;
    let hi = table.len();
    let per_elem: u64 = ctx.terms().iter().map(|t| table.mu(t.k)).sum();
    let direct = (hi.saturating_sub(lo)) as u64 * per_elem <= DIRECT_SCAN_BUDGET;
    let bound_q = BigRational::from_integer(bound.into());
    let check = |i: usize| -> Result<(bool, f64)> {
        let s = table.coords(i);
        let v = if direct {
            ctx.ell_value_direct(s)?
        } else {
            ctx.ell_value(s)?
        };
        Ok((v < bound_q, to_f64(&v)))
    };
    let results: Vec<(bool, f64)> = {
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            (lo..hi).into_par_iter().map(check).collect::<Result<_>>()?
        }
        #[cfg(not(feature = "parallel"))]
        {
            (lo..hi).map(check).collect::<Result<_>>()?
        }
    };
    let violations = results.iter().filter(|r| r.0).count();
    let min_value = results.iter().map(|r| r.1).reduce(f64::min);
    Ok(ProperReport {
        radius,
        bound,
        horizon,
        scanned: results.len(),
        violations,
        min_value,
        direct,
        pass: violations == 0,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SublevelPoint {
    pub x: f64,
    pub count: u64,
    pub certified: bool,
}

/// Values of `ℓ_N` over the horizon, sufficient for exact sublevel counts.
#[derive(Clone, Debug)]
pub struct LevelSets {
    /// `ℓ_N` on `K^{min(2m, R)}`, table order.
    pub values: Vec<BigRational>,
    /// Elements of the horizon outside that ball; each has `ℓ_N = ♯terms`.
    pub outside: u64,
    pub n_terms: u64,
    /// Properness radius `2m` and bound.
    pub radius: u32,
    pub bound: u64,
    pub horizon: u32,
}

impl LevelSets {
    pub fn compute(ctx: &LengthContext) -> Result<Self> {
        let (radius, bound) = properness_threshold(ctx);
        let table = ctx.table();
        let r = radius.min(table.radius());
        let values = ctx.values_on_ball(r)?;
        Ok(LevelSets {
            outside: table.len() as u64 - values.len() as u64,
            values,
            n_terms: ctx.terms().len() as u64,
            radius,
            bound,
            horizon: table.radius(),
        })
    }

    pub fn certified_ball(&self) -> bool {
        self.horizon >= self.radius
    }

    /// `♯{s ∈ K^R : ℓ_N(s) ≤ x}` by a linear scan.
    pub fn count(&self, x: f64) -> u64 {
        let xq = rational_from_f64(x);
        let inside = self.values.iter().filter(|v| **v <= xq).count() as u64;
        let tail = if xq >= BigRational::from_integer(self.n_terms.into()) {
            self.outside
        } else {
            0
        };
        inside + tail
    }

    pub fn point(&self, x: f64) -> SublevelPoint {
        SublevelPoint {
            x,
            count: self.count(x),
            certified: self.certified_ball() && x < self.bound as f64,
        }
    }
}

/// Counts `♯{ℓ_N ≤ x}` on the horizon; a count is certified (exact for the
/// whole group) when `x` is below the properness bound and the horizon
/// covers radius `2m`.
pub fn sublevel_counts(ctx: &LengthContext, xs: &[f64]) -> Result<Vec<SublevelPoint>> {
    let levels = LevelSets::compute(ctx)?;
    Ok(xs.iter().map(|&x| levels.point(x)).collect())
}

/// Log-log slope of count against `x` over certified points with count ≥ 2.
pub fn fit_sublevel_exponent(points: &[SublevelPoint]) -> Result<f64> {
    let usable: Vec<&SublevelPoint> = points
        .iter()
        .filter(|p| p.certified && p.count >= 2 && p.x > 0.0)
        .collect();
    if usable.len() < 4 {
        return Err(Error::InsufficientCertifiedPoints {
            needed: 4,
            have: usable.len(),
        });
    }
    let xs: Vec<f64> = usable.iter().map(|p| p.x.ln()).collect();
    let ys: Vec<f64> = usable.iter().map(|p| (p.count as f64).ln()).collect();
    Ok(least_squares(&xs, &ys).0)
}

/// Evenly spaced levels in `(0, bound)`.
pub fn default_levels(bound: u64, points: usize) -> Vec<f64> {
    (1..=points)
        .map(|j| bound as f64 * j as f64 / (points + 1) as f64)
        .collect()
}

/// `count` elements drawn uniformly from `K^radius`.
pub fn sample_ball(ctx: &LengthContext, radius: u32, count: usize, rng: &mut SplitMix64) -> Vec<Element> {
    let table = ctx.table();
    let n = table.mu(radius.min(table.radius()));
    (0..count)
        .map(|_| table.element(rng.below(n) as usize))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ball::enumerate_balls;
    use crate::construct::ConstructionParams;
    use crate::group::{make_group, GroupSpec};
    use std::sync::Arc;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    /// Eigenvalues of a symmetric 2x2 or 3x3 matrix from its characteristic polynomial.
    fn charpoly_min(m: &[Vec<f64>]) -> f64 {
        if m.len() == 2 {
            let (a, b, d) = (m[0][0], m[0][1], m[1][1]);
            let tr = a + d;
            let disc = ((a - d) * (a - d) + 4.0 * b * b).sqrt();
            return (tr - disc) / 2.0;
        }
        // Trigonometric solution of the symmetric 3x3 case.
        let p1 = m[0][1].powi(2) + m[0][2].powi(2) + m[1][2].powi(2);
        let qv = (m[0][0] + m[1][1] + m[2][2]) / 3.0;
        let p2 = (m[0][0] - qv).powi(2) + (m[1][1] - qv).powi(2) + (m[2][2] - qv).powi(2) + 2.0 * p1;
        let p = (p2 / 6.0).sqrt();
        if p == 0.0 {
            return qv;
        }
        let b: Vec<Vec<f64>> = (0..3)
            .map(|i| (0..3).map(|j| (m[i][j] - if i == j { qv } else { 0.0 }) / p).collect())
            .collect();
        let det = b[0][0] * (b[1][1] * b[2][2] - b[1][2] * b[2][1])
            - b[0][1] * (b[1][0] * b[2][2] - b[1][2] * b[2][0])
            + b[0][2] * (b[1][0] * b[2][1] - b[1][1] * b[2][0]);
        let r = (det / 2.0).clamp(-1.0, 1.0);
        let phi = r.acos() / 3.0;
        qv + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos()
    }

    #[test]
    fn jacobi_examples() {
        let id = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]];
        assert!((min_eig_sym(&id).unwrap() - 1.0).abs() < 1e-14);
        let swap = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        assert!((min_eig_sym(&swap).unwrap() + 1.0).abs() < 1e-14);
        let m = vec![vec![2.0, 1.0], vec![1.0, 2.0]];
        assert!((min_eig_sym(&m).unwrap() - 1.0).abs() < 1e-14);
        let bad = vec![vec![1.0, 2.0], vec![0.0, 1.0]];
        assert!(matches!(min_eig_sym(&bad), Err(Error::NotSymmetric(0, 1))));
    }

    #[test]
    fn jacobi_matches_characteristic_polynomial() {
        let mut rng = SplitMix64::new(5);
        for size in [2usize, 3] {
            for _ in 0..500 {
                let mut m = vec![vec![0.0; size]; size];
                for i in 0..size {
                    for j in i..size {
                        let v = rng.next_f64() * 4.0 - 2.0;
                        m[i][j] = v;
                        m[j][i] = v;
                    }
                }
                let a = min_eig_sym(&m).unwrap();
                let b = charpoly_min(&m);
                assert!((a - b).abs() <= 1e-10 * (1.0 + b.abs()), "{m:?}: {a} vs {b}");
            }
        }
    }

    fn z1_ctx() -> LengthContext {
        let g = make_group(GroupSpec::free_abelian(1)).unwrap();
        let t = Arc::new(enumerate_balls(&g, 30).unwrap());
        LengthContext::build(t, ConstructionParams::new(0.9, 1.2, 3).unwrap()).unwrap()
    }

    #[test]
    fn omega_gram_examples() {
        let ctx = z1_ctx();
        let rep = omega_gram(&ctx, 5, &[Element::new(&[0])]).unwrap();
        assert_eq!(rep.min_eig, 1.0);
        let sample: Vec<Element> = [-1, 0, 1].iter().map(|&v| Element::new(&[v])).collect();
        let rep = omega_gram(&ctx, 5, &sample).unwrap();
        assert!(rep.min_eig > 0.0 && rep.pass);
        let dup: Vec<Element> = [2, 2, 0].iter().map(|&v| Element::new(&[v])).collect();
        assert!(omega_gram(&ctx, 5, &dup).unwrap().pass);
        assert!(check_positive_definite_omega(&ctx, 2, &sample).is_err());
        assert!(check_positive_definite_omega(&ctx, 3, &sample).unwrap().pass);
    }

    #[test]
    fn exact_form_example() {
        let ctx = z1_ctx();
        let sample: Vec<Element> = [-1, 0, 1].iter().map(|&v| Element::new(&[v])).collect();
        let m = ell_matrix(&ctx, &sample).unwrap();
        assert_eq!(quadratic_form(&m, &[1, -2, 1]), q(-16, 9));
    }

    #[test]
    fn cnd_trivial_sample() {
        let ctx = z1_ctx();
        let mut rng = SplitMix64::new(1);
        let rep = check_negative_definite_ell(&ctx, &[Element::new(&[0])], &[0.1, 1.0, 10.0], 5, &mut rng).unwrap();
        assert!(rep.pass);
        // Small t: exp(−tℓ) approaches the all-ones matrix, whose least eigenvalue is 0.
        let sample: Vec<Element> = [-3, 0, 4].iter().map(|&v| Element::new(&[v])).collect();
        let rep = check_negative_definite_ell(&ctx, &sample, &[1e-9], 50, &mut rng).unwrap();
        assert!(rep.pass);
        assert!(rep.schoenberg[0].min_eig.abs() < 1e-8);
    }

    #[test]
    fn decay_bounds_z1() {
        let ctx = z1_ctx();
        let mut rng = SplitMix64::new(2);
        let rep = check_lemma_bounds(&ctx, 12, &mut rng).unwrap();
        assert!(rep.pass, "{:?}", rep);
        assert_eq!(rep.generator_violations, 0);
        // The quadratic variant is violated at n = 3, k = 4 already for p = 1.
        assert!(rep.quadratic_violations > 0);
    }

    #[test]
    fn sublevel_examples() {
        let ctx = z1_ctx();
        let pts = sublevel_counts(&ctx, &[0.0, 1.0, 2.0]).unwrap();
        assert_eq!(pts[0], SublevelPoint { x: 0.0, count: 1, certified: true });
        assert_eq!(pts[1], SublevelPoint { x: 1.0, count: 5, certified: true });
        assert!(!pts[2].certified);
        assert_eq!(pts[2].count, 61);
    }

    #[test]
    fn properness_z1() {
        let ctx = z1_ctx();
        let rep = properness_scan(&ctx).unwrap();
        assert_eq!((rep.radius, rep.bound), (12, 2));
        assert!(rep.direct && rep.pass);
        assert_eq!(rep.scanned, 61 - 25);
        assert_eq!(rep.min_value, Some(2.0));
    }

    #[test]
    fn sublevel_fit_edge_cases() {
        let flat: Vec<SublevelPoint> = (1..=5)
            .map(|i| SublevelPoint { x: i as f64, count: 7, certified: true })
            .collect();
        assert!(fit_sublevel_exponent(&flat).unwrap().abs() < 1e-12);
        assert!(matches!(
            fit_sublevel_exponent(&flat[..3]),
            Err(Error::InsufficientCertifiedPoints { have: 3, .. })
        ));
    }
}
