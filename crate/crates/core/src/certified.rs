//! Certified comparisons between rationals and real powers `b^e`.
//!
//! Thresholds such as `n^{-β}` or the interval endpoints `n^γ` are
//! irrational in general, so a plain `f64` comparison can be wrong near
//! ties. [`cmp_with_power`] first tries `f64` with a wide guard band, then
//! evaluates logarithms in fixed-point interval arithmetic at increasing
//! precision. When `b^e` is itself rational the comparison is done exactly.

use std::cmp::Ordering;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Exact rational value of a finite `f64`.
pub fn rational_from_f64(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite float")
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| ln_big(r.numer()).exp() / ln_big(r.denom()).exp())
}

/// Natural log of a positive big integer in `f64`.
fn ln_big(n: &BigInt) -> f64 {
    let bits = n.bits();
    if bits <= 1000 {
        return n.to_f64().unwrap().ln();
    }
    let shift = bits - 64;
    let top: BigInt = n >> shift;
    top.to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
}

/// Closed interval `[lo, hi]` scaled by `2^prec`.
#[derive(Clone, Debug)]
struct Fixed {
    lo: BigInt,
    hi: BigInt,
}

impl Fixed {
    fn sub(&self, o: &Fixed) -> Fixed {
        Fixed {
            lo: &self.lo - &o.hi,
            hi: &self.hi - &o.lo,
        }
    }

    /// Multiplies by the exact rational `p/q`, rounding outward.
    fn scale(&self, r: &BigRational) -> Fixed {
        let (p, q) = (r.numer(), r.denom());
        let a = (&self.lo * p).div_floor(q);
        let b = (&self.hi * p).div_floor(q) + 1;
        let a2 = (&self.lo * p).div_floor(q) + 1;
        let b2 = (&self.hi * p).div_floor(q);
        if p.sign() == Sign::Minus {
            Fixed { lo: b2, hi: a2 }
        } else {
            Fixed { lo: a, hi: b }
        }
    }
}

/// `2·atanh(u/v)` for `|u/v| ≤ 1/3`, scaled by `2^prec`.
fn two_atanh(u: &BigInt, v: &BigInt, prec: u64) -> Fixed {
    let one: BigInt = BigInt::one() << prec;
    let u2 = u * u;
    let v2 = v * v;
    let mut power = (&one * u).div_floor(v);
    let mut sum = BigInt::zero();
    let mut j: u64 = 0;
    while !power.is_zero() && power.abs() > BigInt::one() {
        sum += power.div_floor(&BigInt::from(2 * j + 1));
        power = (&power * &u2).div_floor(&v2);
        j += 1;
    }
    // Each floored step contributes at most one unit; the remaining series is
    // dominated by a geometric tail of ratio at most 1/9.
    let err = BigInt::from(4 * j + 8) + power.abs() * 2;
    Fixed {
        lo: (&sum - &err) * 2,
        hi: (&sum + &err) * 2,
    }
}

fn ln2(prec: u64) -> Fixed {
    two_atanh(&BigInt::one(), &BigInt::from(3), prec)
}

/// `ln n` for `n ≥ 1`, scaled by `2^prec`.
fn ln_int(n: &BigInt, prec: u64) -> Fixed {
    debug_assert!(n.is_positive());
    if n.is_one() {
        return Fixed {
            lo: BigInt::zero(),
            hi: BigInt::zero(),
        };
    }
    // n = 2^e · y with y ∈ [1/2, 1); ln y = 2 atanh((n − 2^e)/(n + 2^e)).
    let e = n.bits();
    let p2: BigInt = BigInt::one() << e;
    let ly = two_atanh(&(n - &p2), &(n + &p2), prec);
    let l2 = ln2(prec);
    let eb = BigInt::from(e);
    Fixed {
        lo: &l2.lo * &eb + ly.lo,
        hi: &l2.hi * &eb + ly.hi,
    }
}

/// Integer `q`-th root of `n` when `n` is a perfect `q`-th power.
fn exact_root(n: &BigInt, q: u32) -> Option<BigInt> {
    let r = n.nth_root(q);
    if r.pow(q) == *n {
        Some(r)
    } else {
        None
    }
}

/// `base^expo` as a rational when it is one.
fn rational_power(base: &BigInt, expo: &BigRational) -> Option<BigRational> {
    if base.is_one() {
        return Some(BigRational::one());
    }
    let q = expo.denom().to_u32().filter(|&q| q <= 64)?;
    let root = exact_root(base, q)?;
    let p = expo.numer();
    let mag = p.abs().to_u32()?;
    let v = BigRational::from_integer(root.pow(mag));
    Some(if p.is_negative() { v.recip() } else { v })
}

/// Orders the rational `r` against `base^expo` for an integer `base ≥ 1`.
pub fn cmp_with_power(r: &BigRational, base: u64, expo: &BigRational) -> Ordering {
    assert!(base >= 1, "base must be positive");
    if !r.is_positive() {
        return Ordering::Less;
    }
    let b = BigInt::from(base);
    if let Some(v) = rational_power(&b, expo) {
        return r.cmp(&v);
    }
    // Fast path: both sides as f64 logarithms with a wide guard band.
    let lhs = ln_big(r.numer()) - ln_big(r.denom());
    let rhs = rational_to_f64(expo) * (base as f64).ln();
    let slack = 1e-9 * (1.0 + lhs.abs().max(rhs.abs()));
    if lhs < rhs - slack {
        return Ordering::Less;
    }
    if lhs > rhs + slack {
        return Ordering::Greater;
    }
    // base^expo is irrational here, so the two sides differ and some finite
    // precision separates them.
    let mut prec = 96u64;
    loop {
        let left = ln_int(r.numer(), prec).sub(&ln_int(r.denom(), prec));
        let right = ln_int(&b, prec).scale(expo);
        if left.hi < right.lo {
            return Ordering::Less;
        }
        if left.lo > right.hi {
            return Ordering::Greater;
        }
        prec *= 2;
        assert!(prec <= 1 << 22, "comparison did not resolve");
    }
}

/// Floating comparison with an explicit slack; `None` when inside the band.
pub fn cmp_with_power_f64(r: f64, base: u64, expo: f64, rel_slack: f64) -> Option<Ordering> {
    let rhs = (base as f64).powf(expo);
    let band = rel_slack * rhs.abs().max(r.abs());
    if r < rhs - band {
        Some(Ordering::Less)
    } else if r > rhs + band {
        Some(Ordering::Greater)
    } else {
        None
    }
}

/// `⌊base^expo⌋` exactly.
pub fn floor_power(base: u64, expo: &BigRational) -> u64 {
    let approx = (base as f64).powf(rational_to_f64(expo)).floor().max(0.0) as u64;
    let mut k = approx;
    // Largest k with k ≤ base^expo.
    while k > 0 && cmp_with_power(&BigRational::from_integer(k.into()), base, expo) == Ordering::Greater {
        k -= 1;
    }
    while cmp_with_power(&BigRational::from_integer((k + 1).into()), base, expo) != Ordering::Greater {
        k += 1;
    }
    k
}

/// `⌈base^expo⌉` exactly.
pub fn ceil_power(base: u64, expo: &BigRational) -> u64 {
    let f = floor_power(base, expo);
    if cmp_with_power(&BigRational::from_integer(f.into()), base, expo) == Ordering::Equal {
        f
    } else {
        f + 1
    }
}

/// Upper bound on the real number `x` computed in `f64` with a few ulps of
/// error, widened by a relative `1e-12`.
pub fn round_up(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x + x.abs() * 1e-12 + f64::MIN_POSITIVE
    }
}
