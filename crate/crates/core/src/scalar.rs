// Copyright 2026 The oqs-ident Authors
// SPDX-License-Identifier: Apache-2.0

//! Scalar abstraction shared by every numerical routine in the crate.

use nalgebra::{Complex, RealField};
use num_traits::ToPrimitive;

/// Real floating-point scalar usable throughout the crate (`f32` or `f64`).
///
/// The associated constants carry the precision-dependent thresholds. The
/// `f64` values are the documented defaults; `f32` gets proportionally
/// looser ones so the same code paths stay meaningful in single precision.
pub trait Real: RealField + Copy + ToPrimitive {
    /// Magnitude below which sparse tensor entries are dropped.
    const ZERO_CUTOFF: f64;
    /// Largest tolerated imaginary residue on a quantity that must be real.
    const IMAG_TOLERANCE: f64;
    /// Tolerance for structural checks (Hermiticity, symmetry, unit trace).
    const CHECK_TOLERANCE: f64;

    /// Converts an `f64` literal.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f64 {
    const ZERO_CUTOFF: f64 = 1e-12;
    const IMAG_TOLERANCE: f64 = 1e-10;
    const CHECK_TOLERANCE: f64 = 1e-12;
}

impl Real for f32 {
    const ZERO_CUTOFF: f64 = 1e-5;
    const IMAG_TOLERANCE: f64 = 1e-4;
    const CHECK_TOLERANCE: f64 = 1e-5;
}

#[inline]
pub fn cplx<T: Real>(re: T, im: T) -> Complex<T> {
    Complex::new(re, im)
}

#[inline]
pub fn creal<T: Real>(re: T) -> Complex<T> {
    Complex::new(re, T::zero())
}

/// Modulus of a complex scalar.
#[inline]
pub fn cabs<T: Real>(z: Complex<T>) -> T {
    z.re.hypot(z.im)
}
