//! Growth statistics of a ball table: the ratio sequence `α_n`, fitted and
//! certified growth exponents, and the exceptional index sets `E_β`, `F_{β,γ}`.

use std::cmp::Ordering;

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::ball::BallTable;
use crate::certified::{
    ceil_power, cmp_with_power, cmp_with_power_f64, floor_power, rational_from_f64,
    rational_to_f64, round_up,
};
use crate::error::{Error, Result};

/// `α_n = μ(K^n)/μ(K^{n−1}) − 1` for `n ≥ 2` and `α_1 = 0`, exactly.
#[derive(Clone, Debug, PartialEq)]
pub struct Alphas {
    values: Vec<BigRational>,
}

impl Alphas {
    /// Builds the sequence from `μ(K^0), …, μ(K^R)`.
    pub fn from_sizes(mu: &[u64]) -> Self {
        let mut values = Vec::with_capacity(mu.len().saturating_sub(1));
        for n in 1..mu.len() {
            if n == 1 {
                values.push(BigRational::zero());
            } else {
                let r = BigRational::new(mu[n].into(), mu[n - 1].into());
                values.push(r - BigRational::one());
            }
        }
        Alphas { values }
    }

    /// `α_n` for `1 ≤ n ≤ horizon`.
    pub fn get(&self, n: u64) -> &BigRational {
        &self.values[n as usize - 1]
    }

    pub fn horizon(&self) -> u64 {
        self.values.len() as u64
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, &BigRational)> {
        self.values.iter().enumerate().map(|(i, a)| (i as u64 + 1, a))
    }
}

pub fn alpha_sequence(table: &BallTable) -> Alphas {
    Alphas::from_sizes(table.sizes())
}

/// Fitted exponent plus a certified growth pair.
#[derive(Clone, Debug, Serialize)]
pub struct GrowthFit {
    /// Least-squares slope of `log μ(K^n)` against `log n`.
    pub d_hat: f64,
    /// Certified: `μ(K^n) ≤ c (n+1)^d` for every computed `n`.
    pub c: f64,
    pub d: f64,
    /// `d + log₂ c`.
    pub d_prime: f64,
    pub window: (u32, u32),
    /// Root-mean-square residual of the log-log fit.
    pub residual: f64,
}

/// Ordinary least squares slope and RMS residual.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = if sxx == 0.0 { 0.0 } else { sxy / sxx };
    let intercept = my - slope * mx;
    let rss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    (slope, intercept, (rss / n).sqrt())
}

/// Checks `μ(K^n) ≤ c (n+1)^d` exactly for every `n` in the table.
pub fn certifies(mu: &[u64], c: &BigRational, d: &BigRational) -> bool {
    mu.iter().enumerate().all(|(n, &m)| {
        let lhs = BigRational::from_integer(m.into()) / c;
        cmp_with_power(&lhs, n as u64 + 1, d) != Ordering::Greater
    })
}

pub fn fit_growth_exponent(table: &BallTable, window: (u32, u32)) -> Result<GrowthFit> {
    fit_sizes(table.sizes(), window)
}

/// Fits and certifies growth from raw ball sizes `μ(K^0..K^R)`.
pub fn fit_sizes(mu: &[u64], window: (u32, u32)) -> Result<GrowthFit> {
    let radius = mu.len() as u32 - 1;
    let (lo, hi) = window;
    if lo < 2 || hi > radius || hi < lo || hi - lo + 1 < 4 {
        return Err(Error::FitWindowError(format!(
            "window [{lo},{hi}] must lie in [2,{radius}] and hold at least 4 radii"
        )));
    }
    let xs: Vec<f64> = (lo..=hi).map(|n| (n as f64).ln()).collect();
    let ys: Vec<f64> = (lo..=hi).map(|n| (mu[n as usize] as f64).ln()).collect();
    let (d_hat, _, residual) = least_squares(&xs, &ys);

    for j in 0..=200 {
        let d = d_hat + 0.05 * j as f64;
        if d <= 0.0 {
            continue;
        }
        let d_exact = rational_from_f64(d);
        let cmax = mu
            .iter()
            .enumerate()
            .map(|(n, &m)| m as f64 / ((n + 1) as f64).powf(d))
            .fold(0.0f64, f64::max);
        let mut c = round_up(cmax);
        // The f64 maximum can sit a few ulps below the exact one.
        for _ in 0..8 {
            if certifies(mu, &rational_from_f64(c), &d_exact) {
                return Ok(GrowthFit {
                    d_hat,
                    c,
                    d,
                    d_prime: d + c.log2(),
                    window,
                    residual,
                });
            }
            c *= 1.0 + 1e-9;
        }
    }
    Err(Error::FitWindowError("no certified growth pair found".into()))
}

/// Integers `k` with `n^γ ≤ k ≤ (n+1)^γ`.
pub fn interval_integers(n: u64, gamma: &BigRational) -> std::ops::RangeInclusive<u64> {
    ceil_power(n, gamma)..=floor_power(n + 1, gamma)
}

/// Membership flags for `E_β` and `F_{β,γ}`, 1-based.
#[derive(Clone, Debug, PartialEq)]
pub struct Classification {
    /// `in_e[n-1]` for `1 ≤ n ≤` α horizon.
    pub in_e: Vec<bool>,
    /// `in_f[n-1]` for `1 ≤ n ≤ N`.
    pub in_f: Vec<bool>,
    pub beta: f64,
    pub gamma: f64,
}

impl Classification {
    pub fn e(&self, n: u64) -> bool {
        self.in_e[n as usize - 1]
    }

    pub fn f(&self, n: u64) -> bool {
        self.in_f[n as usize - 1]
    }

    pub fn depth(&self) -> u64 {
        self.in_f.len() as u64
    }
}

pub fn validate_beta_gamma(beta: f64, gamma: f64) -> Result<()> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::InvalidParams(format!("beta = {beta} not in (0,1)")));
    }
    // γ > 1/β, checked exactly.
    let prod = rational_from_f64(beta) * rational_from_f64(gamma);
    if prod <= BigRational::one() {
        return Err(Error::InvalidParams(format!(
            "gamma = {gamma} must exceed 1/beta = {}",
            1.0 / beta
        )));
    }
    Ok(())
}

/// Exact test `α_n > n^{−β}`.
pub fn in_e_beta(alpha: &BigRational, n: u64, neg_beta: &BigRational) -> bool {
    cmp_with_power(alpha, n, neg_beta) == Ordering::Greater
}

/// Radius of α data needed to classify `F` up to depth `n_max`.
pub fn required_radius(n_max: u64, gamma: f64) -> u64 {
    floor_power(n_max + 1, &rational_from_f64(gamma))
}

pub fn classify_indices(alphas: &Alphas, beta: f64, gamma: f64, depth: u64) -> Result<Classification> {
    validate_beta_gamma(beta, gamma)?;
    let g = rational_from_f64(gamma);
    let required = floor_power(depth + 1, &g);
    if alphas.horizon() < required {
        return Err(Error::HorizonError {
            required: required as u32,
        });
    }
    let nb = -rational_from_f64(beta);
    let in_e: Vec<bool> = alphas.iter().map(|(n, a)| in_e_beta(a, n, &nb)).collect();
    let in_f = (1..=depth)
        .map(|n| interval_integers(n, &g).all(|k| in_e[k as usize - 1]))
        .collect();
    Ok(Classification {
        in_e,
        in_f,
        beta,
        gamma,
    })
}

/// Floating-point `E_β` classification; `None` where the slack band is hit.
pub fn classify_e_float(alphas: &Alphas, beta: f64, rel_slack: f64) -> Vec<Option<bool>> {
    alphas
        .iter()
        .map(|(n, a)| {
            cmp_with_power_f64(rational_to_f64(a), n, -beta, rel_slack).map(|o| o == Ordering::Greater)
        })
        .collect()
}

/// Largest depth whose `F` flags are decidable from α data up to `horizon`.
pub fn decidable_depth(horizon: u64, gamma: f64) -> u64 {
    let g = rational_from_f64(gamma);
    let mut n = 0;
    while floor_power(n + 2, &g) <= horizon {
        n += 1;
    }
    n
}

#[derive(Clone, Debug, Serialize)]
pub struct DensityRow {
    pub n: u64,
    pub count: u64,
    pub empirical: f64,
    pub bound: f64,
    pub ok: bool,
}

/// Constant in `log(1+x) ≥ K₀ x` on `[0, 1]`.
pub const K0: f64 = std::f64::consts::LN_2;

/// Empirical density of `E_β` on `[1,n]` against `(d′/K₀) log(n+1)/n^{1−β}`.
pub fn density_report(in_e: &[bool], fit: &GrowthFit, beta: f64) -> Vec<DensityRow> {
    let mut count = 0u64;
    in_e.iter()
        .enumerate()
        .map(|(i, &flag)| {
            let n = i as u64 + 1;
            count += flag as u64;
            let empirical = count as f64 / n as f64;
            let bound = fit.d_prime / K0 * ((n + 1) as f64).ln() / (n as f64).powf(1.0 - beta);
            DensityRow {
                n,
                count,
                empirical,
                bound,
                ok: empirical <= bound * (1.0 + 1e-12),
            }
        })
        .collect()
}

/// Everything the construction needs from the growth side.
#[derive(Clone, Debug)]
pub struct GrowthProfile {
    pub alphas: Alphas,
    pub fit: GrowthFit,
    pub classes: Classification,
}
