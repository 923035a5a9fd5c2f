//! The length function: good radii `k(n)`, ball overlap functions
//! `ω(s) = |sB_k ∩ B_k| / |B_k|`, and the truncated series
//! `ℓ_N(s) = Σ_{n ≤ N, n ∉ F} (1 − ω_{k(n)}(s))` with a certified tail.

use std::sync::{Arc, RwLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rustc_hash::FxHashMap;
use serde::Serialize;

use crate::ball::BallTable;
use crate::certified::{floor_power, rational_from_f64, rational_to_f64, round_up};
use crate::error::{Error, Result};
use crate::group::Element;
use crate::growth::{
    alpha_sequence, classify_indices, interval_integers, validate_beta_gamma, Alphas,
    Classification, GrowthFit,
};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConstructionParams {
    pub beta: f64,
    pub gamma: f64,
    /// Truncation depth `N`.
    pub depth: u64,
    pub d_target: Option<f64>,
}

impl ConstructionParams {
    pub fn new(beta: f64, gamma: f64, depth: u64) -> Result<Self> {
        validate_beta_gamma(beta, gamma)?;
        Ok(ConstructionParams {
            beta,
            gamma,
            depth,
            d_target: None,
        })
    }

    /// `βγ`, the decay exponent of the per-term bound.
    pub fn decay(&self) -> f64 {
        self.beta * self.gamma
    }
}

/// `γ = d_target / (d̂ + ε)` with `ε = max(0.05, residual)`, and
/// `β = (1/γ + 1)/2`, which lies strictly between `1/γ` and 1.
pub fn select_parameters(d_target: f64, fit: &GrowthFit) -> Result<(f64, f64)> {
    let tight = || Error::TargetTooTight {
        target: d_target,
        fitted: fit.d_hat,
    };
    if d_target <= fit.d_hat {
        return Err(tight());
    }
    let eps = fit.residual.max(0.05);
    let gamma = d_target / (fit.d_hat + eps);
    if gamma <= 1.02 {
        return Err(tight());
    }
    Ok(((1.0 / gamma + 1.0) / 2.0, gamma))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KChoice {
    Selected(u64),
    SkippedInF,
}

/// Smallest `k` in `[n^γ, (n+1)^γ]` outside `E_β`.
pub fn select_k(classes: &Classification, n: u64) -> Result<KChoice> {
    let g = rational_from_f64(classes.gamma);
    let range = interval_integers(n, &g);
    let end = *range.end();
    if end > classes.in_e.len() as u64 {
        return Err(Error::HorizonError { required: end as u32 });
    }
    let choice = range
        .clone()
        .find(|&k| !classes.e(k))
        .map_or(KChoice::SkippedInF, KChoice::Selected);
    if n <= classes.depth() {
        assert_eq!(
            classes.f(n),
            choice == KChoice::SkippedInF,
            "selection disagrees with F flags at n = {n}"
        );
    }
    Ok(choice)
}

/// `|sB_k ∩ B_k|`, counted directly over `x ∈ B_k` with no shortcuts.
pub fn overlap_count_direct(table: &BallTable, k: u32, s: &[i64]) -> Result<u64> {
    if k > table.radius() {
        return Err(Error::HorizonError { required: k });
    }
    let g = table.group();
    let ball = table.mu(k) as usize;
    let mut buf = vec![0i64; g.arity()];
    let mut count = 0;
    for i in 0..ball {
        g.mul_into(s, table.coords(i), &mut buf)?;
        if table.lookup(&buf).is_some_and(|j| j < ball) {
            count += 1;
        }
    }
    Ok(count)
}

/// `|sB_k ∩ B_k|`, skipping the count when the translate is provably
/// disjoint (`sB_k ∩ B_k ≠ ∅` forces `s ∈ K^{2k}`).
pub fn overlap_count(table: &BallTable, k: u32, s: &[i64]) -> Result<u64> {
    if k > table.radius() {
        return Err(Error::HorizonError { required: k });
    }
    if table.group().is_identity(s) {
        return Ok(table.mu(k));
    }
    match table.word_length(s)? {
        Some(p) if p > 2 * k => return Ok(0),
        None if table.radius() >= 2 * k => return Ok(0),
        _ => {}
    }
    overlap_count_direct(table, k, s)
}

/// `ω(s) = |sB_k ∩ B_k| / |B_k|` as an exact rational.
pub fn omega(table: &BallTable, k: u32, s: &Element) -> Result<BigRational> {
    let c = overlap_count(table, k, s.as_slice())?;
    Ok(BigRational::new(c.into(), table.mu(k).into()))
}

/// One term of the series: index `n ∉ F` and its radius `k(n)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Term {
    pub n: u64,
    pub k: u32,
}

#[derive(Clone, Debug, Serialize)]
pub struct LengthValue {
    /// `ℓ_N(s)`, exact.
    #[serde(serialize_with = "ser_rational")]
    pub value: BigRational,
    /// Upper bound on `ℓ(s) − ℓ_N(s)`.
    pub tail_bound: f64,
    pub word_length: u32,
    pub n_terms: usize,
}

fn ser_rational<S: serde::Serializer>(r: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

/// Construction state for one parameter set over one ball table.
pub struct LengthContext {
    params: ConstructionParams,
    table: Arc<BallTable>,
    alphas: Alphas,
    classes: Classification,
    terms: Vec<Term>,
    skipped: Vec<u64>,
    memo: RwLock<FxHashMap<(u32, Element), u64>>,
}

impl std::fmt::Debug for LengthContext {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LengthContext")
            .field("params", &self.params)
            .field("terms", &self.terms)
            .field("skipped", &self.skipped)
            .finish()
    }
}

impl LengthContext {
    pub fn build(table: Arc<BallTable>, params: ConstructionParams) -> Result<Self> {
        validate_beta_gamma(params.beta, params.gamma)?;
        let alphas = alpha_sequence(&table);
        let classes = classify_indices(&alphas, params.beta, params.gamma, params.depth)?;
        let mut terms = Vec::new();
        let mut skipped = Vec::new();
        for n in 1..=params.depth {
            match select_k(&classes, n)? {
                KChoice::Selected(k) => terms.push(Term { n, k: k as u32 }),
                KChoice::SkippedInF => skipped.push(n),
            }
        }
        Ok(LengthContext {
            params,
            table,
            alphas,
            classes,
            terms,
            skipped,
            memo: RwLock::new(FxHashMap::default()),
        })
    }

    pub fn params(&self) -> &ConstructionParams {
        &self.params
    }

    pub fn table(&self) -> &BallTable {
        &self.table
    }

    pub fn shared_table(&self) -> Arc<BallTable> {
        Arc::clone(&self.table)
    }

    pub fn alphas(&self) -> &Alphas {
        &self.alphas
    }

    pub fn classes(&self) -> &Classification {
        &self.classes
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    /// `F ∩ [1, N]`.
    pub fn skipped(&self) -> &[u64] {
        &self.skipped
    }

    pub fn max_k(&self) -> u32 {
        self.terms.iter().map(|t| t.k).max().unwrap_or(0)
    }

    /// Memoized overlap count; `s` and `s⁻¹` share an entry.
    fn overlap_memo(&self, k: u32, s: &[i64]) -> Result<u64> {
        let g = self.table.group();
        let e = Element::new(s);
        let inv = g.inverse(&e)?;
        let key = (k, if inv < e { inv } else { e });
        if let Some(&c) = self.memo.read().unwrap().get(&key) {
            return Ok(c);
        }
        let c = overlap_count(&self.table, k, s)?;
        self.memo.write().unwrap().insert(key, c);
        Ok(c)
    }

    /// `ω_{k(n)}(s)` for the term with radius `k`.
    pub fn omega(&self, k: u32, s: &Element) -> Result<BigRational> {
        let c = self.overlap_memo(k, s.as_slice())?;
        Ok(BigRational::new(c.into(), self.table.mu(k).into()))
    }

    fn sum_terms(&self, counts: impl Iterator<Item = (Term, u64)>) -> BigRational {
        counts.fold(BigRational::zero(), |acc, (t, c)| {
            let mu = self.table.mu(t.k);
            acc + BigRational::new(BigInt::from(mu - c), BigInt::from(mu))
        })
    }

    /// `ℓ_N(s)` without touching the memo table.
    pub fn ell_value(&self, s: &[i64]) -> Result<BigRational> {
        let counts = self
            .terms
            .iter()
            .map(|&t| overlap_count(&self.table, t.k, s).map(|c| (t, c)))
            .collect::<Result<Vec<_>>>()?;
        Ok(self.sum_terms(counts.into_iter()))
    }

    /// `ℓ_N(s)` computed with [`overlap_count_direct`] only.
    pub fn ell_value_direct(&self, s: &[i64]) -> Result<BigRational> {
        let counts = self
            .terms
            .iter()
            .map(|&t| overlap_count_direct(&self.table, t.k, s).map(|c| (t, c)))
            .collect::<Result<Vec<_>>>()?;
        Ok(self.sum_terms(counts.into_iter()))
    }

    /// Upper bound on `Σ_{n>N} (1 − ω_n(s))` for `s` of word length `p`,
    /// from `1 − ω_n(s) ≤ min(1, p·n^{−βγ})`.
    pub fn tail_bound(&self, p: u32) -> f64 {
        if p == 0 {
            return 0.0;
        }
        let a = self.params.decay();
        let p = p as f64;
        let big_n = self.params.depth as f64;
        // Terms with p·n^{−a} ≥ 1 are capped at 1.
        let m = big_n.max(p.powf(1.0 / a).floor()).max(1.0);
        round_up((m - big_n) + p * m.powf(1.0 - a) / (a - 1.0))
    }

    pub fn ell(&self, s: &Element) -> Result<LengthValue> {
        let p = self
            .table
            .word_length(s.as_slice())?
            .ok_or(Error::HorizonError {
                required: self.table.radius() + 1,
            })?;
        let counts = self
            .terms
            .iter()
            .map(|&t| self.overlap_memo(t.k, s.as_slice()).map(|c| (t, c)))
            .collect::<Result<Vec<_>>>()?;
        Ok(LengthValue {
            value: self.sum_terms(counts.into_iter()),
            tail_bound: self.tail_bound(p),
            word_length: p,
            n_terms: self.terms.len(),
        })
    }

    /// `ℓ_N` on every element of `K^radius`, in table order.
    pub fn values_on_ball(&self, radius: u32) -> Result<Vec<BigRational>> {
        let n = self.table.mu(radius.min(self.table.radius())) as usize;
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            (0..n)
                .into_par_iter()
                .map(|i| self.ell_value(self.table.coords(i)))
                .collect()
        }
        #[cfg(not(feature = "parallel"))]
        {
            (0..n).map(|i| self.ell_value(self.table.coords(i))).collect()
        }
    }
}

/// Radius `2m` with `m = ⌊(N+1)^γ⌋ + 1`, and the count `♯([1,N] \ F)`:
/// every `s` outside `K^{2m}` has `ℓ_N(s) ≥` that count.
pub fn properness_threshold(ctx: &LengthContext) -> (u32, u64) {
    let p = ctx.params();
    let m = floor_power(p.depth + 1, &rational_from_f64(p.gamma)) + 1;
    (2 * m as u32, ctx.terms().len() as u64)
}

/// The series with weights `2^{−m}`, each context normalized so that its
/// maximum over the generating set is 1.
pub struct Combination<'a> {
    parts: Vec<(u32, &'a LengthContext, Option<BigRational>)>,
    pub diagnostics: Vec<String>,
}

impl<'a> Combination<'a> {
    /// Contexts paired with their weight exponents `m`.
    pub fn new(ctxs: Vec<(u32, &'a LengthContext)>) -> Result<Self> {
        if ctxs.is_empty() {
            return Err(Error::EmptyCombination);
        }
        let mut parts = Vec::new();
        let mut diagnostics = Vec::new();
        for (m, ctx) in ctxs {
            let mut sigma = BigRational::zero();
            for g in ctx.table().group().generators() {
                let v = ctx.ell(g)?.value;
                if v > sigma {
                    sigma = v;
                }
            }
            let sigma = if sigma.is_zero() {
                diagnostics.push(format!(
                    "context m={m} vanishes on the generating set and contributes 0"
                ));
                None
            } else {
                Some(sigma)
            };
            parts.push((m, ctx, sigma));
        }
        Ok(Combination { parts, diagnostics })
    }

    pub fn sigmas(&self) -> Vec<Option<f64>> {
        self.parts
            .iter()
            .map(|(_, _, s)| s.as_ref().map(rational_to_f64))
            .collect()
    }

    pub fn eval(&self, s: &Element) -> Result<f64> {
        let mut total = 0.0;
        for (m, ctx, sigma) in &self.parts {
            if let Some(sigma) = sigma {
                let v = ctx.ell(s)?.value / sigma;
                total += rational_to_f64(&v) * 0.5f64.powi(*m as i32);
            }
        }
        Ok(total)
    }
}

/// `Σ_m 2^{−m} ℓ^{(m)}(s)/σ_m` with `m = 1, 2, …` in list order.
pub fn combined_ell(ctxs: &[&LengthContext], s: &Element) -> Result<f64> {
    let parts = ctxs
        .iter()
        .enumerate()
        .map(|(i, c)| (i as u32 + 1, *c))
        .collect();
    Combination::new(parts)?.eval(s)
}

/// Contexts for targets `d_m = d̂(1 + 2^{−m})`, `m = 1..=count`. Targets too
/// close to `d̂` for [`select_parameters`] are dropped, and each depth is
/// capped at what the table can classify.
pub fn decreasing_target_contexts(
    table: &Arc<BallTable>,
    fit: &GrowthFit,
    count: u32,
    depth: u64,
) -> (Vec<(u32, LengthContext)>, Vec<String>) {
    let mut out = Vec::new();
    let mut notes = Vec::new();
    for m in 1..=count {
        let d_m = fit.d_hat * (1.0 + 0.5f64.powi(m as i32));
        let (beta, gamma) = match select_parameters(d_m, fit) {
            Ok(p) => p,
            Err(e) => {
                notes.push(format!("m={m}: {e}"));
                continue;
            }
        };
        let cap = crate::growth::decidable_depth(table.radius() as u64, gamma);
        let params = ConstructionParams {
            beta,
            gamma,
            depth: depth.min(cap),
            d_target: Some(d_m),
        };
        match LengthContext::build(Arc::clone(table), params) {
            Ok(ctx) => out.push((m, ctx)),
            Err(e) => notes.push(format!("m={m}: {e}")),
        }
    }
    (out, notes)
}

/// `ℓ_N(s)` as `f64`.
pub fn to_f64(v: &BigRational) -> f64 {
    v.to_f64().unwrap_or_else(|| rational_to_f64(v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ball::enumerate_balls;
    use crate::group::{make_group, GroupSpec};
    use crate::growth::fit_growth_exponent;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn z1_table(r: u32) -> Arc<BallTable> {
        Arc::new(enumerate_balls(&make_group(GroupSpec::free_abelian(1)).unwrap(), r).unwrap())
    }

    fn z1_ctx() -> LengthContext {
        LengthContext::build(z1_table(20), ConstructionParams::new(0.9, 1.2, 3).unwrap()).unwrap()
    }

    fn fit(d_hat: f64, residual: f64) -> GrowthFit {
        GrowthFit {
            d_hat,
            c: 1.0,
            d: d_hat,
            d_prime: d_hat,
            window: (2, 10),
            residual,
        }
    }

    #[test]
    fn parameter_rule() {
        let (b, g) = select_parameters(4.4, &fit(4.0, 0.01)).unwrap();
        assert!((g - 4.4 / 4.05).abs() < 1e-12);
        assert!((g - 1.0864).abs() < 1e-4);
        assert!((b - 0.9602).abs() < 1e-4);
        let (b, g) = select_parameters(1.5, &fit(1.0, 0.0)).unwrap();
        assert!((g - 1.4286).abs() < 1e-4);
        assert!((b - 0.85).abs() < 1e-4);
        assert!(b * g > 1.0);
        assert!(matches!(
            select_parameters(4.0, &fit(4.0, 0.0)),
            Err(Error::TargetTooTight { .. })
        ));
        assert!(matches!(
            select_parameters(4.1, &fit(4.0, 0.0)),
            Err(Error::TargetTooTight { .. })
        ));
    }

    #[test]
    fn k_selection_z1() {
        let ctx = z1_ctx();
        assert_eq!(select_k(ctx.classes(), 1).unwrap(), KChoice::Selected(1));
        assert_eq!(select_k(ctx.classes(), 2).unwrap(), KChoice::SkippedInF);
        assert_eq!(select_k(ctx.classes(), 3).unwrap(), KChoice::Selected(4));
        assert_eq!(ctx.terms(), &[Term { n: 1, k: 1 }, Term { n: 3, k: 4 }]);
        assert_eq!(ctx.skipped(), &[2]);
    }

    #[test]
    fn omega_examples() {
        let t = z1_table(12);
        assert_eq!(omega(&t, 5, &Element::new(&[3])).unwrap(), q(8, 11));
        assert_eq!(omega(&t, 5, &Element::new(&[0])).unwrap(), q(1, 1));
        assert_eq!(omega(&t, 5, &Element::new(&[11])).unwrap(), q(0, 1));
        assert_eq!(overlap_count_direct(&t, 5, &[11]).unwrap(), 0);
        assert!(matches!(omega(&t, 13, &Element::new(&[1])), Err(Error::HorizonError { .. })));
    }

    #[test]
    fn omega_shortcut_matches_direct_heisenberg() {
        let h = make_group(GroupSpec::heisenberg()).unwrap();
        let t = enumerate_balls(&h, 10).unwrap();
        for i in (0..t.len()).step_by(7) {
            let s = t.coords(i);
            for k in 1..=4 {
                assert_eq!(overlap_count(&t, k, s).unwrap(), overlap_count_direct(&t, k, s).unwrap());
            }
        }
    }

    #[test]
    fn ell_examples() {
        let ctx = z1_ctx();
        let e = Element::new(&[0]);
        let v = ctx.ell(&e).unwrap();
        assert_eq!(v.value, q(0, 1));
        assert_eq!(v.tail_bound, 0.0);
        assert_eq!(ctx.ell(&Element::new(&[1])).unwrap().value, q(4, 9));
        assert_eq!(ctx.ell(&Element::new(&[-2])).unwrap().value, q(8, 9));
        for s in 9..=20 {
            assert_eq!(ctx.ell(&Element::new(&[s])).unwrap().value, q(2, 1));
            assert_eq!(ctx.ell(&Element::new(&[-s])).unwrap().value, q(2, 1));
        }
        assert!(matches!(ctx.ell(&Element::new(&[21])), Err(Error::HorizonError { .. })));
        assert!(ctx.ell(&Element::new(&[1])).unwrap().tail_bound > 0.0);
    }

    #[test]
    fn combination_examples() {
        let ctx = z1_ctx();
        let two = Element::new(&[2]);
        assert_eq!(combined_ell(&[&ctx], &Element::new(&[0])).unwrap(), 0.0);
        assert!((combined_ell(&[&ctx], &two).unwrap() - 1.0).abs() < 1e-15);
        let single = combined_ell(&[&ctx], &Element::new(&[5])).unwrap() * 2.0;
        let double = combined_ell(&[&ctx, &ctx], &Element::new(&[5])).unwrap();
        assert!((double - 0.75 * single).abs() < 1e-15);
        assert!(matches!(combined_ell(&[], &two), Err(Error::EmptyCombination)));
    }

    #[test]
    fn properness_examples() {
        let ctx = z1_ctx();
        assert_eq!(properness_threshold(&ctx), (12, 2));
        let zero = LengthContext::build(z1_table(5), ConstructionParams::new(0.9, 1.2, 0).unwrap()).unwrap();
        assert_eq!(properness_threshold(&zero).1, 0);
    }

    #[test]
    fn decreasing_targets_drop_tight_ones() {
        let t = z1_table(60);
        let f = fit_growth_exponent(&t, (30, 60)).unwrap();
        let (ctxs, notes) = decreasing_target_contexts(&t, &f, 4, 8);
        assert_eq!(ctxs.len(), 3);
        assert_eq!(notes.len(), 1);
        for (_, c) in &ctxs {
            let (r, _) = properness_threshold(c);
            assert!(c.max_k() < r);
        }
    }

    #[test]
    fn quadratic_decay_bound_fails_on_z1() {
        // With β = 0.9, γ = 1.2 the term n = 3 uses k = 4, where
        // 1 − ω(1) = 1/9 exceeds 3^{−2βγ} ≈ 0.0932.
        let ctx = z1_ctx();
        let gap = BigRational::from_integer(1.into()) - ctx.omega(4, &Element::new(&[1])).unwrap();
        assert_eq!(gap, q(1, 9));
        assert!(to_f64(&gap) > 3f64.powf(-2.0 * 0.9 * 1.2));
        assert!(to_f64(&gap) <= 3f64.powf(-0.9 * 1.2));
    }
}
