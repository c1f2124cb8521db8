//! Numeric abstraction over the scalar type used by the model.
//!
//! Domain types, utilities, equilibrium checks and the exact oracles only
//! need ring/field arithmetic and comparisons, so they work both with floats
//! and with arbitrary-precision rationals. The approximation algorithms take
//! square roots and logarithms and are restricted to [`RealScalar`].

use std::fmt::{Debug, Display};

use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive};

/// Scalar type the core model is generic over: `f32`, `f64`, or
/// `BigRational` for exact arithmetic on rational-valued instances.
pub trait Scalar:
    Num + Signed + FromPrimitive + ToPrimitive + Clone + PartialOrd + Debug + Display + Send + Sync + 'static
{
    /// The fraction `n / d` as a scalar. Exact for rationals.
    fn ratio(n: i64, d: i64) -> Self {
        Self::from_i64(n).expect("small integer fits any scalar")
            / Self::from_i64(d).expect("small integer fits any scalar")
    }

    /// Small non-negative integer as a scalar.
    fn integer(n: usize) -> Self {
        Self::from_usize(n).expect("small integer fits any scalar")
    }

    /// False only for floating-point NaN/infinities.
    fn is_finite_scalar(&self) -> bool {
        true
    }
}

impl Scalar for f32 {
    fn is_finite_scalar(&self) -> bool {
        self.is_finite()
    }
}

impl Scalar for f64 {
    fn is_finite_scalar(&self) -> bool {
        self.is_finite()
    }
}

impl Scalar for BigRational {}

/// Floating-point scalar: everything in [`Scalar`] plus roots, logarithms and
/// infinities. Required by the approximation algorithms and the hidden-team
/// reward family.
pub trait RealScalar: Scalar + num_traits::Float {}

impl RealScalar for f32 {}
impl RealScalar for f64 {}
