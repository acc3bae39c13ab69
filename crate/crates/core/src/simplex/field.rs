use std::fmt::Debug;

use num_rational::BigRational;
use num_traits::{FromPrimitive, Signed, ToPrimitive, Zero};

/// Pivot tolerance for floating-point tableaux.
pub const PIVOT_TOLERANCE: f64 = 1e-10;

/// Arithmetic the tableau needs. Floating point compares against
/// [`PIVOT_TOLERANCE`]; rationals compare exactly.
pub(crate) trait Field: Clone + Debug + PartialOrd {
    fn zero() -> Self;
    fn one() -> Self;
    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn div(&self, rhs: &Self) -> Self;
    fn neg(&self) -> Self;
    fn is_zero(&self) -> bool;
    fn is_positive(&self) -> bool;
    fn is_negative(&self) -> bool;
    /// `self <= other` up to the field tolerance.
    fn approx_le(&self, other: &Self) -> bool;
    fn from_f64(value: f64) -> Option<Self>;
    fn to_f64(&self) -> f64;
    /// Snap values that are numerically zero.
    fn clean(self) -> Self;
    /// Phase-one residual large enough to declare infeasibility.
    fn exceeds_feasibility_tolerance(&self, scale: f64) -> bool;
}

impl Field for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn div(&self, rhs: &Self) -> Self {
        self / rhs
    }
    fn neg(&self) -> Self {
        -self
    }
    fn is_zero(&self) -> bool {
        self.abs() <= PIVOT_TOLERANCE
    }
    fn is_positive(&self) -> bool {
        *self > PIVOT_TOLERANCE
    }
    fn is_negative(&self) -> bool {
        *self < -PIVOT_TOLERANCE
    }
    fn approx_le(&self, other: &Self) -> bool {
        *self <= other + PIVOT_TOLERANCE * (1.0 + other.abs())
    }
    fn from_f64(value: f64) -> Option<Self> {
        value.is_finite().then_some(value)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn clean(self) -> Self {
        if self.abs() < 1e-13 {
            0.0
        } else {
            self
        }
    }
    fn exceeds_feasibility_tolerance(&self, scale: f64) -> bool {
        *self > 1e-9 * scale
    }
}

impl Field for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        num_traits::One::one()
    }
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn div(&self, rhs: &Self) -> Self {
        self / rhs
    }
    fn neg(&self) -> Self {
        -self
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_positive(&self) -> bool {
        Signed::is_positive(self)
    }
    fn is_negative(&self) -> bool {
        Signed::is_negative(self)
    }
    fn approx_le(&self, other: &Self) -> bool {
        self <= other
    }
    fn from_f64(value: f64) -> Option<Self> {
        <BigRational as FromPrimitive>::from_f64(value)
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn clean(self) -> Self {
        self
    }
    fn exceeds_feasibility_tolerance(&self, _scale: f64) -> bool {
        Signed::is_positive(self)
    }
}
