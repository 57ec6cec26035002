//! Numeric scalar abstractions.
//!
//! Penalties in an instance are integers. The pricing engine and the oracle
//! work over any [`Scalar`] so that the same code runs with exact integer
//! duals (`i64`) and with LP duals (`f64`/`f32`). The LP engine needs a
//! field with rounding, captured by [`Real`].

use num_traits::{Float, FromPrimitive, Num, ToPrimitive};
use std::fmt::{Debug, Display};
use std::ops::Neg;

/// Cost type carried by labels, arcs and dual values.
pub trait Scalar:
    Copy
    + Num
    + Neg<Output = Self>
    + PartialOrd
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// `true` when arithmetic on this type never rounds.
    const EXACT: bool;

    fn from_penalty(p: i64) -> Self {
        Self::from_i64(p).expect("penalty does not fit the scalar type")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn min_of(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }
}

impl Scalar for i64 {
    const EXACT: bool = true;
}

impl Scalar for f64 {
    const EXACT: bool = false;
}

impl Scalar for f32 {
    const EXACT: bool = false;
}

/// Floating-point scalar with the tolerances used by the simplex engine and
/// the column-generation loop.
pub trait Real: Scalar + Float {
    /// Smallest admissible pivot magnitude.
    fn pivot_tol() -> Self;
    /// Primal feasibility tolerance.
    fn feas_tol() -> Self;
    /// Dual feasibility (reduced cost) tolerance.
    fn opt_tol() -> Self;

    fn lit(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("literal fits the scalar type")
    }
}

impl Real for f64 {
    fn pivot_tol() -> Self {
        1e-9
    }
    fn feas_tol() -> Self {
        1e-9
    }
    fn opt_tol() -> Self {
        1e-7
    }
}

impl Real for f32 {
    fn pivot_tol() -> Self {
        1e-5
    }
    fn feas_tol() -> Self {
        1e-5
    }
    fn opt_tol() -> Self {
        1e-4
    }
}

/// Rounds `x` onto a fixed binary grid (2^-20) so that mathematically equal
/// LP values reached along different pivot sequences compare bitwise equal.
pub fn snap<F: Real>(x: F) -> F {
    let scale = F::lit(1_048_576.0);
    (x * scale).round() / scale
}
