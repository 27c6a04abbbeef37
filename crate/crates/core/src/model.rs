//! Model parameters, the periodic grid, and sampled fields.
//!
//! The equation family is selected by the quadruple (N, beta, k, lambda):
//! N is the nonlinearity order, beta balances the convective terms, k is the
//! dispersion coefficient and lambda >= 0 the dissipation rate. The classical
//! peakon equations are the (N, beta) reductions listed in [`Reduction`].

use serde::{Deserialize, Serialize};

use crate::error::{GchError, Result};

/// The quadruple (N, beta, k, lambda) selecting one member of the family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Nonlinearity order N >= 1.
    pub n: u32,
    pub beta: f64,
    /// Dispersion coefficient (any real).
    pub k: f64,
    /// Dissipation rate, >= 0. Zero is admitted to reach the undamped reductions.
    pub lambda: f64,
}

impl ModelParams {
    pub fn new(n: u32, beta: f64, k: f64, lambda: f64) -> Result<Self> {
        Self { n, beta, k, lambda }.validated()
    }

    /// Checks the construction invariants and returns the value unchanged.
    pub fn validated(self) -> Result<Self> {
        if self.n < 1 {
            return Err(GchError::InvalidParams("N must be >= 1".into()));
        }
        if !self.beta.is_finite() || !self.k.is_finite() || !self.lambda.is_finite() {
            return Err(GchError::InvalidParams(
                "beta, k, lambda must be finite".into(),
            ));
        }
        if self.lambda < 0.0 {
            return Err(GchError::InvalidParams("lambda must be >= 0".into()));
        }
        Ok(self)
    }

    /// beta/(N+1), the coefficient of u^{N+1} in the h source.
    pub fn h_power_coeff(&self) -> f64 {
        self.beta / (self.n as f64 + 1.0)
    }

    /// (3N-beta)/2, the coefficient of u^{N-1} u_x^2 in the h source.
    pub fn h_slope_coeff(&self) -> f64 {
        (3.0 * self.n as f64 - self.beta) / 2.0
    }

    /// (N-1)(beta-N)/2, the coefficient of u^{N-2} u_x^3 in the g source.
    /// Zero for N = 1 or beta = N; callers must skip the term before forming
    /// u^{N-2} in those cases.
    pub fn g_cubic_coeff(&self) -> f64 {
        (self.n as f64 - 1.0) * (self.beta - self.n as f64) / 2.0
    }

    /// beta/N, the momentum-form stretching exponent and coefficient.
    pub fn stretch_exponent(&self) -> f64 {
        self.beta / self.n as f64
    }
}

/// Named (N, beta) reductions of the nonlinearity; k and lambda are ignored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Reduction {
    CamassaHolm,
    DegasperisProcesi,
    Novikov,
    Generic,
}

/// Pure function of (N, beta) only.
pub fn classify_reduction(p: &ModelParams) -> Reduction {
    if p.n == 1 && p.beta == 2.0 {
        Reduction::CamassaHolm
    } else if p.n == 1 && p.beta == 3.0 {
        Reduction::DegasperisProcesi
    } else if p.n == 2 && p.beta == 3.0 {
        Reduction::Novikov
    } else {
        Reduction::Generic
    }
}

/// Uniform periodic grid on [-L, L) with nx nodes, nx a power of two.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub half_length: f64,
    pub nx: usize,
}

impl Grid {
    pub fn new(half_length: f64, nx: usize) -> Result<Self> {
        if half_length <= 0.0 || !half_length.is_finite() {
            return Err(GchError::InvalidGrid("half_length must be > 0".into()));
        }
        if nx < 16 || !nx.is_power_of_two() {
            return Err(GchError::InvalidGrid(format!(
                "nx must be a power of two >= 16, got {nx}"
            )));
        }
        Ok(Self { half_length, nx })
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_length / self.nx as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        -self.half_length + j as f64 * self.dx()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.nx).map(|j| self.node(j)).collect()
    }

    /// Samples a function at the grid nodes.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Field {
        Field::new((0..self.nx).map(|j| f(self.node(j))).collect())
    }
}

/// Real samples of a function at the grid nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Field(Vec<f64>);

impl Field {
    pub fn new(values: Vec<f64>) -> Self {
        Field(values)
    }

    pub fn zeros(n: usize) -> Self {
        Field(vec![0.0; n])
    }

    pub fn constant(c: f64, n: usize) -> Self {
        Field(vec![c; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn into_values(self) -> Vec<f64> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.0.iter().fold(f64::INFINITY, |m, &v| m.min(v))
    }

    pub fn max(&self) -> f64 {
        self.0.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v))
    }

    /// Elementwise x^p with an integer exponent, 0^0 = 1.
    pub fn powi(&self, p: i32) -> Field {
        Field(self.0.iter().map(|v| v.powi(p)).collect())
    }

    pub fn scaled(&self, c: f64) -> Field {
        Field(self.0.iter().map(|v| c * v).collect())
    }

    pub fn add(&self, other: &Field) -> Field {
        debug_assert_eq!(self.len(), other.len());
        Field(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Field) -> Field {
        debug_assert_eq!(self.len(), other.len());
        Field(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn mul(&self, other: &Field) -> Field {
        debug_assert_eq!(self.len(), other.len());
        Field(self.0.iter().zip(&other.0).map(|(a, b)| a * b).collect())
    }

    /// self + c * other, the RK4 workhorse.
    pub fn axpy(&self, c: f64, other: &Field) -> Field {
        debug_assert_eq!(self.len(), other.len());
        Field(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + c * b)
                .collect(),
        )
    }
}

impl std::ops::Index<usize> for Field {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Solution snapshot: time and the velocity samples.
#[derive(Debug, Clone)]
pub struct State {
    pub t: f64,
    pub u: Field,
}

impl State {
    pub fn new(t: f64, u: Field) -> Self {
        State { t, u }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validate_accepts_ch_and_flags_degenerate_coefficients() {
        let p = ModelParams::new(1, 2.0, 0.0, 0.0).unwrap();
        // N = 1 forces the cubic g coefficient to vanish.
        assert_eq!(p.g_cubic_coeff(), 0.0);

        let p = ModelParams::new(3, 3.0, 0.5, 0.1).unwrap();
        // beta = N forces the same coefficient to vanish.
        assert_eq!(p.g_cubic_coeff(), 0.0);
    }

    #[test]
    fn validate_rejects_bad_params() {
        assert!(ModelParams::new(0, 2.0, 0.0, 0.0).is_err());
        assert!(ModelParams::new(1, 2.0, 0.0, -0.5).is_err());
        assert!(ModelParams::new(1, f64::NAN, 0.0, 0.0).is_err());
    }

    #[test]
    fn reduction_classification() {
        let mk = |n, beta| ModelParams::new(n, beta, 0.7, 0.3).unwrap();
        assert_eq!(classify_reduction(&mk(1, 2.0)), Reduction::CamassaHolm);
        assert_eq!(
            classify_reduction(&mk(1, 3.0)),
            Reduction::DegasperisProcesi
        );
        assert_eq!(classify_reduction(&mk(2, 3.0)), Reduction::Novikov);
        assert_eq!(classify_reduction(&mk(4, 7.0)), Reduction::Generic);
        // k and lambda play no role.
        let a = ModelParams::new(2, 3.0, 0.0, 0.0).unwrap();
        let b = ModelParams::new(2, 3.0, -5.0, 9.0).unwrap();
        assert_eq!(classify_reduction(&a), classify_reduction(&b));
    }

    #[test]
    fn grid_invariants() {
        let g = Grid::new(10.0, 64).unwrap();
        assert_eq!(g.dx() * g.nx as f64, 2.0 * g.half_length);
        assert_eq!(g.node(0), -10.0);
        assert!(Grid::new(10.0, 48).is_err());
        assert!(Grid::new(10.0, 8).is_err());
        assert!(Grid::new(-1.0, 64).is_err());
    }
}
