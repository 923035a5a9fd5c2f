//! Closed forms for the integers with generators ±1, written without any
//! use of the library's ball tables or overlap code.

#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;

pub fn mu(n: u64) -> u64 {
    2 * n + 1
}

/// `|B_k ∩ (s + B_k)| / |B_k|` for the interval `B_k = [−k, k]`.
pub fn omega(k: u64, s: i64) -> BigRational {
    let size = 2 * k as i64 + 1;
    let overlap = (size - s.abs()).max(0);
    BigRational::new(BigInt::from(overlap), BigInt::from(size))
}

/// `α_n = μ_n/μ_{n−1} − 1 = 2/(2n−1)` for `n ≥ 2`, and `α_1 = 0`.
pub fn alpha(n: u64) -> f64 {
    if n == 1 {
        0.0
    } else {
        2.0 / (2 * n - 1) as f64
    }
}

fn in_e(n: u64, beta: f64) -> bool {
    alpha(n) > (n as f64).powf(-beta)
}

/// Selected radii `k(n)` for `n = 1..=depth`; `None` marks `n ∈ F`.
pub fn radii(beta: f64, gamma: f64, depth: u64) -> Vec<Option<u64>> {
    (1..=depth)
        .map(|n| {
            let lo = (n as f64).powf(gamma).ceil() as u64;
            let hi = ((n + 1) as f64).powf(gamma).floor() as u64;
            (lo..=hi).find(|&k| !in_e(k, beta))
        })
        .collect()
}

pub fn ell(beta: f64, gamma: f64, depth: u64, s: i64) -> BigRational {
    let one = BigRational::from_integer(BigInt::from(1));
    radii(beta, gamma, depth)
        .into_iter()
        .flatten()
        .map(|k| &one - omega(k, s))
        .fold(BigRational::from_integer(BigInt::from(0)), |a, b| a + b)
}

/// `Σ c_i c_j ℓ(x_j − x_i)`.
pub fn cnd_form(beta: f64, gamma: f64, depth: u64, xs: &[i64], c: &[i64]) -> BigRational {
    let mut acc = BigRational::from_integer(BigInt::from(0));
    for (i, &xi) in xs.iter().enumerate() {
        for (j, &xj) in xs.iter().enumerate() {
            acc += ell(beta, gamma, depth, xj - xi) * BigRational::from_integer(BigInt::from(c[i] * c[j]));
        }
    }
    acc
}
