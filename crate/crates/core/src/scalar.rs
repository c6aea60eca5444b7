//! Scalar field abstraction.
//!
//! Everything in the crate is generic over [`Scalar`], implemented for `f64`
//! (the default) and [`Complex64`]. Inner products are linear in the first
//! slot and conjugate-linear in the second; all adjoints are conjugate
//! transposes.

use std::fmt;

use nalgebra::{ComplexField, DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    #[default]
    Real,
    Complex,
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Real => f.write_str("real"),
            Field::Complex => f.write_str("complex"),
        }
    }
}

pub trait Scalar:
    ComplexField<RealField = f64> + Copy + fmt::Debug + fmt::Display + Send + Sync + 'static
{
    const FIELD: Field;

    /// Builds a scalar from real and imaginary parts; `None` when the field
    /// cannot represent a nonzero imaginary part.
    fn from_parts(re: f64, im: f64) -> Option<Self>;

    fn parts(self) -> (f64, f64);

    /// Standard normal sample (circular for the complex field).
    fn sample<R: Rng + ?Sized>(rng: &mut R) -> Self;
}

impl Scalar for f64 {
    const FIELD: Field = Field::Real;

    fn from_parts(re: f64, im: f64) -> Option<Self> {
        (im == 0.0).then_some(re)
    }

    fn parts(self) -> (f64, f64) {
        (self, 0.0)
    }

    fn sample<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.sample(StandardNormal)
    }
}

impl Scalar for Complex64 {
    const FIELD: Field = Field::Complex;

    fn from_parts(re: f64, im: f64) -> Option<Self> {
        Some(Complex64::new(re, im))
    }

    fn parts(self) -> (f64, f64) {
        (self.re, self.im)
    }

    fn sample<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    }
}

pub fn random_vector<T: Scalar, R: Rng + ?Sized>(len: usize, rng: &mut R) -> DVector<T> {
    DVector::from_fn(len, |_, _| T::sample(rng))
}

pub fn random_matrix<T: Scalar, R: Rng + ?Sized>(
    rows: usize,
    cols: usize,
    rng: &mut R,
) -> DMatrix<T> {
    DMatrix::from_fn(rows, cols, |_, _| T::sample(rng))
}

/// Unit coordinate vector `e_i` (zero-based `i`).
pub fn unit<T: Scalar>(len: usize, i: usize) -> DVector<T> {
    let mut v = DVector::zeros(len);
    v[i] = T::one();
    v
}

pub fn real<T: Scalar>(x: f64) -> T {
    T::from_real(x)
}
