use serde::{Deserialize, Serialize};

use crate::config::Regime;
use crate::error::{Error, Result};

/// Exponents and weights of `J(u) = (1/p) ∫ |∇u|^p |x|^{-ap} - (1/q) ∫ |u|^q |x|^{-bq}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemParams {
    pub n: usize,
    pub p: f64,
    pub a: f64,
    pub b: f64,
    /// Exponent actually used; the critical one unless a surrogate was requested.
    pub q: f64,
    /// Homogeneity exponent `(n - p(1+a))/p`.
    pub gamma: f64,
}

impl ProblemParams {
    /// Parameters with the critical exponent `q = np/(n - p(1+a-b))`.
    pub fn new(n: usize, p: f64, a: f64, b: f64) -> Result<Self> {
        let nf = n as f64;
        if n < 2 {
            return Err(Error::InvalidParams(format!("dimension n = {n} is too small")));
        }
        if !(p > 1.0 && p < nf) {
            return Err(Error::InvalidParams(format!("need 1 < p < n, got p = {p}")));
        }
        if !(a < (nf - p) / p) {
            return Err(Error::InvalidParams(format!("need a < (n-p)/p = {}, got a = {a}", (nf - p) / p)));
        }
        if !(a <= b && b < a + 1.0) {
            return Err(Error::InvalidParams(format!("need a <= b < a + 1, got a = {a}, b = {b}")));
        }
        let q = Self::critical_exponent(n, p, a, b);
        Ok(ProblemParams { n, p, a, b, q, gamma: (nf - p * (1.0 + a)) / p })
    }

    pub fn critical_exponent(n: usize, p: f64, a: f64, b: f64) -> f64 {
        let nf = n as f64;
        nf * p / (nf - p * (1.0 + a - b))
    }

    pub fn critical_q(&self) -> f64 {
        Self::critical_exponent(self.n, self.p, self.a, self.b)
    }

    pub fn is_critical(&self) -> bool {
        (self.q - self.critical_q()).abs() <= 1e-14 * self.q
    }

    /// Same problem with exponent `q`, which must lie in `(p, q_critical]`.
    pub fn with_exponent(self, q: f64) -> Result<Self> {
        if !(q > self.p && q <= self.critical_q()) {
            return Err(Error::InvalidParams(format!(
                "exponent q = {q} must lie in (p, q_crit] = ({}, {}]",
                self.p,
                self.critical_q()
            )));
        }
        Ok(ProblemParams { q, ..self })
    }

    /// Subcritical surrogate `q - shift`.
    pub fn subcritical(self, shift: f64) -> Result<Self> {
        self.with_exponent(self.critical_q() - shift)
    }

    pub fn regime(&self) -> Regime {
        if self.a < self.b {
            Regime::ALessB
        } else if self.a == 0.0 {
            Regime::AEqBZero
        } else {
            Regime::AEqBNonzero
        }
    }

    /// `1/p - 1/q`, the factor relating `J` to `‖∇u‖^p` on the Nehari manifold.
    pub fn nehari_factor(&self) -> f64 {
        1.0 / self.p - 1.0 / self.q
    }
}
