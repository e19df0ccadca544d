//! Scalar abstraction: the numeric core is generic over `f32`/`f64`.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::str::FromStr;

use num_traits::{Float, FromPrimitive};

/// Floating-point scalar for the regret algebra.
///
/// Tolerances are expressed in `f64` and converted; `tol_strict`/`tol_ident`
/// widen to a small multiple of the type epsilon so the same checks stay
/// meaningful at `f32` precision.
pub trait Real:
    Float
    + FromPrimitive
    + FromStr
    + Display
    + Debug
    + Sum
    + std::ops::AddAssign
    + serde::Serialize
    + for<'de> serde::Deserialize<'de>
    + Send
    + Sync
    + 'static
{
    /// Convert an `f64` constant, panicking only for non-representable input.
    fn real(v: f64) -> Self {
        Self::from_f64(v).expect("constant must be representable")
    }

    /// Tolerance for simplex sums and per-round inequality slack (1e-12 at f64).
    fn tol_strict() -> Self {
        Self::real(1e-12).max(Self::epsilon() * Self::real(128.0))
    }

    /// Tolerance for cross-representation identities (1e-9 at f64).
    fn tol_ident() -> Self {
        Self::real(1e-9).max(Self::epsilon() * Self::real(131072.0))
    }

    fn two() -> Self {
        Self::one() + Self::one()
    }

    fn half() -> Self {
        Self::one() / Self::two()
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// `max_i x_i` over a non-empty slice.
pub fn coordinate_max<F: Real>(xs: &[F]) -> F {
    xs.iter().copied().fold(F::neg_infinity(), F::max)
}
