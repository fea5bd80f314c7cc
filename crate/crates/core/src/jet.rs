//! Truncated complex Taylor series ("jets") about a real base parameter.
//!
//! A [`LocalJet`] of order `K` stores `c_0..=c_K`, the coefficients of
//! `(x - t0)^n`. Binary operations truncate to the smaller of the two orders.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest constant term accepted by [`LocalJet::reciprocal`] and [`LocalJet::powf`].
pub const MIN_PIVOT: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalJet {
    t0: f64,
    coeffs: Vec<Complex64>,
}

impl LocalJet {
    /// Builds a jet from its coefficients. Panics on an empty coefficient list.
    pub fn new(t0: f64, coeffs: Vec<Complex64>) -> Self {
        assert!(!coeffs.is_empty(), "a jet needs at least one coefficient");
        Self { t0, coeffs }
    }

    pub fn constant(t0: f64, value: Complex64, order: usize) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); order + 1];
        coeffs[0] = value;
        Self { t0, coeffs }
    }

    pub fn zero(t0: f64, order: usize) -> Self {
        Self::constant(t0, Complex64::new(0.0, 0.0), order)
    }

    /// Multiplicative identity.
    pub fn one(t0: f64, order: usize) -> Self {
        Self::constant(t0, Complex64::new(1.0, 0.0), order)
    }

    /// Builds a jet from real coefficients.
    pub fn from_real(t0: f64, coeffs: &[f64]) -> Self {
        Self::new(t0, coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn base(&self) -> f64 {
        self.t0
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeff(&self, n: usize) -> Complex64 {
        self.coeffs[n]
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Drops coefficients above `order`.
    pub fn truncate(&self, order: usize) -> Self {
        let k = order.min(self.order());
        Self::new(self.t0, self.coeffs[..=k].to_vec())
    }

    fn check_base(&self, other: &Self) -> Result<()> {
        if self.t0 == other.t0 {
            Ok(())
        } else {
            Err(Error::BaseMismatch(self.t0, other.t0))
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_base(other)?;
        let k = self.order().min(other.order());
        let coeffs = (0..=k).map(|n| self.coeffs[n] + other.coeffs[n]).collect();
        Ok(Self::new(self.t0, coeffs))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_base(other)?;
        let k = self.order().min(other.order());
        let coeffs = (0..=k).map(|n| self.coeffs[n] - other.coeffs[n]).collect();
        Ok(Self::new(self.t0, coeffs))
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self::new(self.t0, self.coeffs.iter().map(|c| c * factor).collect())
    }

    pub fn conj(&self) -> Self {
        Self::new(self.t0, self.coeffs.iter().map(|c| c.conj()).collect())
    }

    /// Truncated Cauchy product.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_base(other)?;
        let k = self.order().min(other.order());
        let coeffs = (0..=k)
            .map(|n| {
                (0..=n)
                    .map(|j| self.coeffs[j] * other.coeffs[n - j])
                    .sum::<Complex64>()
            })
            .collect();
        Ok(Self::new(self.t0, coeffs))
    }

    /// `1/x` via `y_0 = 1/x_0`, `y_n = -(1/x_0) sum_{k=1}^{n} x_k y_{n-k}`.
    pub fn reciprocal(&self) -> Result<Self> {
        let x0 = self.coeffs[0];
        if x0.norm() <= MIN_PIVOT {
            return Err(Error::DivisionByZeroJet(x0.norm()));
        }
        let inv = 1.0 / x0;
        let mut y = Vec::with_capacity(self.coeffs.len());
        y.push(inv);
        for n in 1..self.coeffs.len() {
            let s: Complex64 = (1..=n).map(|k| self.coeffs[k] * y[n - k]).sum();
            y.push(-s * inv);
        }
        Ok(Self::new(self.t0, y))
    }

    /// `x^alpha` on the principal branch of the constant term.
    ///
    /// Uses `n x_0 y_n = sum_{k=1}^{n} (alpha k - (n - k)) x_k y_{n-k}`, which
    /// follows from `x y' = alpha x' y`.
    pub fn powf(&self, alpha: f64) -> Result<Self> {
        let x0 = self.coeffs[0];
        if x0.norm() <= MIN_PIVOT {
            return Err(Error::DivisionByZeroJet(x0.norm()));
        }
        let mut y = Vec::with_capacity(self.coeffs.len());
        y.push(x0.powf(alpha));
        for n in 1..self.coeffs.len() {
            let s: Complex64 = (1..=n)
                .map(|k| self.coeffs[k] * y[n - k] * (alpha * k as f64 - (n - k) as f64))
                .sum();
            y.push(s / (x0 * n as f64));
        }
        Ok(Self::new(self.t0, y))
    }

    pub fn sqrt(&self) -> Result<Self> {
        self.powf(0.5)
    }

    /// Derivative jet; the order drops by one (an order-0 jet stays order 0 with value 0).
    pub fn differentiate(&self) -> Self {
        if self.order() == 0 {
            return Self::zero(self.t0, 0);
        }
        let coeffs = (1..self.coeffs.len())
            .map(|n| self.coeffs[n] * n as f64)
            .collect();
        Self::new(self.t0, coeffs)
    }

    /// Evaluates the truncated polynomial at `x` (Horner).
    pub fn eval(&self, x: Complex64) -> Complex64 {
        let dx = x - self.t0;
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, c| acc * dx + c)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// The four truncated operations exposed as a single entry point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JetOp {
    Add,
    Mul,
    Reciprocal,
    Differentiate,
}

/// Applies `op` to `x` (and `y` for the binary operations).
pub fn jet_algebra(op: JetOp, x: &LocalJet, y: Option<&LocalJet>) -> Result<LocalJet> {
    let need = |y: Option<&LocalJet>| {
        y.cloned()
            .ok_or_else(|| Error::InvalidData("binary jet operation needs two operands".into()))
    };
    match op {
        JetOp::Add => x.add(&need(y)?),
        JetOp::Mul => x.mul(&need(y)?),
        JetOp::Reciprocal => x.reciprocal(),
        JetOp::Differentiate => Ok(x.differentiate()),
    }
}
