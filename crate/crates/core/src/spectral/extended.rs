//! Double-double evaluation of the `K_n` recurrence.
//!
//! Near a root the forward recurrence loses the decaying solution to
//! rounding. Root polishing and branch-state construction therefore run in
//! double-double; the 64-bit tables are audited against the same arithmetic.

use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::error::{RabiError, Result};
use crate::params::{Parity, RabiParams};

use super::{check_pole, CoefficientTable};

/// Relative tail threshold of the extended series.
pub const EXTENDED_SERIES_TOLERANCE: f64 = 1e-30;

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi) / 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoubleDouble {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl DoubleDouble {
    pub const ZERO: Self = Self { hi: 0.0, lo: 0.0 };
    pub const ONE: Self = Self { hi: 1.0, lo: 0.0 };

    pub fn from_f64(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    /// Exact `hi + lo` of two doubles, renormalized.
    pub fn from_pair(hi: f64, lo: f64) -> Self {
        let (hi, lo) = two_sum(hi, lo);
        Self { hi, lo }
    }

    pub fn abs(self) -> Self {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    pub fn is_finite(self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }
}

impl From<f64> for DoubleDouble {
    fn from(x: f64) -> Self {
        Self::from_f64(x)
    }
}

impl Add for DoubleDouble {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Self { hi, lo }
    }
}

impl Neg for DoubleDouble {
    type Output = Self;
    fn neg(self) -> Self {
        Self { hi: -self.hi, lo: -self.lo }
    }
}

impl Sub for DoubleDouble {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + (-o)
    }
}

impl Mul for DoubleDouble {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let (p, e) = two_prod(self.hi, o.hi);
        let e = e + (self.hi * o.lo + self.lo * o.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Self { hi, lo }
    }
}

impl Div for DoubleDouble {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        // long division: two correction steps
        let q1 = self.hi / o.hi;
        let r = self - o * Self::from_f64(q1);
        let q2 = r.hi / o.hi;
        let r = r - o * Self::from_f64(q2);
        let q3 = r.hi / o.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Self { hi, lo } + Self::from_f64(q3)
    }
}

/// Streams `(K_n, J_n)` in double-double.
#[derive(Debug, Clone)]
pub struct ExtendedRecurrence {
    delta: DoubleDouble,
    two_g: DoubleDouble,
    x: DoubleDouble,
    n: usize,
    k_prev: DoubleDouble,
    k_prev2: DoubleDouble,
}

impl ExtendedRecurrence {
    pub fn new(delta: f64, g: f64, x: DoubleDouble) -> Self {
        Self {
            delta: delta.into(),
            two_g: DoubleDouble::from(2.0) * g.into(),
            x,
            n: 0,
            k_prev: DoubleDouble::ZERO,
            k_prev2: DoubleDouble::ZERO,
        }
    }
}

impl Iterator for ExtendedRecurrence {
    type Item = (DoubleDouble, DoubleDouble);

    fn next(&mut self) -> Option<Self::Item> {
        let n = self.n;
        let k = if n == 0 {
            DoubleDouble::ONE
        } else {
            let m = DoubleDouble::from((n - 1) as f64);
            let f = self.two_g + (m - self.x + self.delta * self.delta / (self.x - m)) / self.two_g;
            (f * self.k_prev - self.k_prev2) / DoubleDouble::from(n as f64)
        };
        self.k_prev2 = self.k_prev;
        self.k_prev = k;
        self.n += 1;
        let j = self.delta / (self.x - DoubleDouble::from(n as f64)) * k;
        Some((k, j))
    }
}

/// `K_0..K_{n_max}` evaluated in double-double and rounded back to `f64`.
pub fn recompute_k(delta: f64, g: f64, x: f64, n_max: usize) -> Vec<f64> {
    ExtendedRecurrence::new(delta, g, x.into()).take(n_max + 1).map(|(k, _)| k.to_f64()).collect()
}

/// `G±(x)` in double-double, with the largest term magnitude.
pub fn g_function_extended(
    params: &RabiParams,
    x: DoubleDouble,
    parity: Parity,
    tail_run: usize,
    n_cap: usize,
) -> Result<(DoubleDouble, f64)> {
    if params.g == 0.0 {
        return Err(RabiError::ZeroCoupling);
    }
    check_pole(x.hi, n_cap)?;
    let g = DoubleDouble::from(params.g);
    let mut gn = DoubleDouble::ONE;
    let mut sum = DoubleDouble::ZERO;
    let mut max_term: f64 = 0.0;
    let mut run = 0;
    for (k, j) in ExtendedRecurrence::new(params.delta, params.g, x).take(n_cap + 1) {
        let term = match parity {
            Parity::Plus => k - j,
            Parity::Minus => k + j,
        } * gn;
        if !term.is_finite() {
            return Err(RabiError::NonFinite { x: x.hi });
        }
        sum = sum + term;
        let mag = term.hi.abs();
        max_term = max_term.max(mag);
        run = if mag < EXTENDED_SERIES_TOLERANCE * max_term { run + 1 } else { 0 };
        if run >= tail_run {
            return Ok((sum, max_term));
        }
        gn = gn * g;
    }
    Err(RabiError::SeriesNoConverge { x: x.hi, n_cap })
}

/// Coefficient table at `x_hi + x_lo`, computed in double-double and
/// rounded to `f64`.
pub fn compute_coefficients_extended(
    params: &RabiParams,
    x_hi: f64,
    x_lo: f64,
    n_max: usize,
) -> Result<CoefficientTable> {
    if params.g == 0.0 {
        return Err(RabiError::ZeroCoupling);
    }
    check_pole(x_hi, n_max)?;
    let (k, j): (Vec<f64>, Vec<f64>) =
        ExtendedRecurrence::new(params.delta, params.g, DoubleDouble::from_pair(x_hi, x_lo))
            .take(n_max + 1)
            .map(|(k, j)| (k.to_f64(), j.to_f64()))
            .unzip();
    let tail_estimate = (k[n_max].abs() + j[n_max].abs()) * params.g.powi(n_max as i32);
    Ok(CoefficientTable { x: x_hi, k, j, n_used: n_max, tail_estimate, delta: params.delta, g: params.g })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn third_is_exact_to_double_double() {
        let third = DoubleDouble::ONE / DoubleDouble::from(3.0);
        let back = third * DoubleDouble::from(3.0) - DoubleDouble::ONE;
        assert!(back.to_f64().abs() < 1e-31);
    }

    #[test]
    fn captures_sub_ulp_sums() {
        let a = DoubleDouble::from(1.0) + DoubleDouble::from(1e-20);
        let b = a - DoubleDouble::ONE;
        assert!((b.to_f64() - 1e-20).abs() < 1e-35);
    }

    #[test]
    fn zero_coupling_limit_sequence() {
        // at Δ → 0 and x → 0 the recurrence is solved by K_n = (2g)^n / n!
        let k = recompute_k(0.0, 0.75, -1e-300, 12);
        let mut expect = 1.0;
        for (n, &v) in k.iter().enumerate() {
            if n > 0 {
                expect *= 1.5 / n as f64;
            }
            assert!((v - expect).abs() <= 1e-14 * expect, "n = {n}");
        }
    }
}
