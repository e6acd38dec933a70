//! Scalar abstraction for the closed-form math kernels.
//!
//! Game algebra, strategy maps, and pmf computations are generic over [`Real`]
//! so they run in `f32` or `f64`. The simulation and probe layers are pinned
//! to `f64`: they interleave RNG streams and statistical tolerances that are
//! calibrated for double precision.

use std::fmt::{Debug, Display};

use num_traits::{Float, NumCast};

/// Floating-point scalar usable by the generic kernels.
pub trait Real: Float + NumCast + Debug + Display + Send + Sync + 'static {
    /// Natural log of the gamma function, used for log-space binomial terms.
    /// Named to stay clear of the unstable `f64::ln_gamma`.
    fn log_gamma(self) -> Self;

    /// Lossy conversion from `f64`; panics on values unrepresentable even
    /// approximately (only NaN-free finite literals are passed in practice).
    fn of(x: f64) -> Self {
        <Self as NumCast>::from(x).expect("finite literal convertible to scalar")
    }

    /// Widening conversion for reporting and comparisons.
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar convertible to f64")
    }

    /// Largest representable value strictly below 1, the saturation guard for
    /// probability outputs.
    fn one_minus_ulp() -> Self {
        Self::one() - Self::epsilon() / Self::of(2.0)
    }
}

impl Real for f64 {
    fn log_gamma(self) -> f64 {
        statrs::function::gamma::ln_gamma(self)
    }
}

impl Real for f32 {
    fn log_gamma(self) -> f32 {
        statrs::function::gamma::ln_gamma(self as f64) as f32
    }
}
