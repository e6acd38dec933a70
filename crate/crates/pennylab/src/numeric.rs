//! Small numeric utilities shared across modules.

use crate::scalar::Real;

/// Kahan compensated accumulator; long-horizon sums of step quantities lose
/// about two digits without it.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct Kahan<R: Real = f64> {
    sum: R,
    carry: R,
}

impl<R: Real> Kahan<R> {
    pub fn new() -> Self {
        Kahan { sum: R::zero(), carry: R::zero() }
    }

    pub fn add(&mut self, x: R) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> R {
        self.sum
    }
}

/// Normal density with the given mean and variance.
pub(crate) fn normal_pdf<R: Real>(x: R, mean: R, var: R) -> R {
    let two_pi = R::of(std::f64::consts::TAU);
    let d = x - mean;
    (-(d * d) / (R::of(2.0) * var)).exp() / (two_pi * var).sqrt()
}

/// Standard normal CDF via the complementary error function.
pub(crate) fn std_normal_cdf(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-x / std::f64::consts::SQRT_2)
}
