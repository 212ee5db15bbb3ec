//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display, LowerExp};
use std::str::FromStr;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point type the lattice, EC and density code is generic over.
///
/// Implemented for `f32` and `f64`. The complementary error function is the
/// only special function not expressible through [`Float`]; it is routed to
/// `libm` per concrete type.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + Default
    + Debug
    + Display
    + LowerExp
    + FromStr
    + Send
    + Sync
    + 'static
{
    /// Complementary error function, accurate into the far tail (no `1 - erf`).
    fn erfc(self) -> Self;

    /// Converts an `f64` constant into `Self`.
    #[inline]
    fn cst(x: f64) -> Self {
        Self::from_f64(x).expect("finite constant fits every Scalar")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize converts to float")
    }
}

impl Scalar for f64 {
    #[inline]
    fn erfc(self) -> Self {
        libm::erfc(self)
    }
}

impl Scalar for f32 {
    #[inline]
    fn erfc(self) -> Self {
        libm::erfcf(self)
    }
}

/// Shortest round-trip decimal text: plain notation for moderate magnitudes,
/// scientific otherwise. Parsing the result recovers the exact value.
pub fn format_shortest<T: Scalar>(x: T) -> String {
    let a = x.abs();
    if a == T::zero() || (a >= T::cst(1e-4) && a < T::cst(1e15)) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}
