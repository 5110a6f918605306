//! Symmetry configurations `(alpha, m)` and their admissibility conditions.
//!
//! A configuration fixes the dimension `n`, the pinwheel parameter `alpha`,
//! and a tuple `m = (m_1, ..., m_k)` with `k = floor(n/2) - 1`, where `m_j`
//! counts the copies of the group acting on `j + 1` complex coordinates.
//! The complex weight of a configuration is
//!
//! ```text
//! s = 2 chi(alpha) + sum_j m_j (j + 1),   chi(alpha) = [alpha > 0]
//! ```
//!
//! and the two admissibility conditions read `0 < s <= n/2` (*fit*) and
//! `s != (n - 1)/2` (*orbit*). The orbit condition is only required in the
//! [`Regime::AEqBNonzero`] parameter regime.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameter regime of the weighted problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `a < b`.
    ALessB,
    /// `a = b = 0`, the unweighted critical Sobolev case.
    AEqBZero,
    /// `a = b != 0`; requires the orbit condition and `n != 5`.
    AEqBNonzero,
}

impl Regime {
    pub const ALL: [Regime; 3] = [Regime::ALessB, Regime::AEqBZero, Regime::AEqBNonzero];

    pub fn as_str(self) -> &'static str {
        match self {
            Regime::ALessB => "a_less_b",
            Regime::AEqBZero => "a_eq_b_zero",
            Regime::AEqBNonzero => "a_eq_b_nonzero",
        }
    }

    /// Whether every nonzero point must have an infinite orbit in this regime.
    pub fn requires_infinite_orbits(self) -> bool {
        self == Regime::AEqBNonzero
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Regime::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| Error::Parse(format!("unknown regime `{s}`")))
    }
}

/// `k(n) = floor(n/2) - 1`, the length of the tuple `m`.
/// Largest supported `alpha`; `beta` is stored modulo `2^(alpha+2)` in a `u32`.
pub const MAX_ALPHA: u32 = 28;

pub fn tuple_len(n: usize) -> usize {
    (n / 2).saturating_sub(1)
}

/// `chi(alpha)`: 0 when `alpha = 0`, 1 otherwise.
pub fn chi(alpha: u32) -> usize {
    usize::from(alpha > 0)
}

/// A symmetry configuration `(alpha, m)` in dimension `n` for a regime.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymmetryConfig {
    pub n: usize,
    pub alpha: u32,
    pub m: Vec<u32>,
    pub regime: Regime,
}

impl SymmetryConfig {
    /// Builds and fully validates a configuration.
    pub fn new(n: usize, alpha: u32, m: Vec<u32>, regime: Regime) -> Result<Self> {
        let cfg = Self::unchecked(n, alpha, m, regime);
        cfg.validate()?;
        Ok(cfg)
    }

    /// Builds a configuration without checking any condition.
    pub fn unchecked(n: usize, alpha: u32, m: Vec<u32>, regime: Regime) -> Self {
        SymmetryConfig { n, alpha, m, regime }
    }

    /// Complex weight `s = 2 chi(alpha) + sum_j m_j (j+1)`.
    pub fn weight(&self) -> usize {
        2 * chi(self.alpha)
            + self
                .m
                .iter()
                .enumerate()
                .map(|(i, &mj)| mj as usize * (i + 2))
                .sum::<usize>()
    }

    /// `0 < s <= n/2`.
    pub fn fit_condition(&self) -> bool {
        let s = self.weight();
        s > 0 && 2 * s <= self.n
    }

    /// `s != (n-1)/2`; fails only when `n = 2s + 1`.
    pub fn orbit_condition(&self) -> bool {
        2 * self.weight() + 1 != self.n
    }

    /// Real dimension of the coordinates left to the orthogonal tail factor.
    pub fn tail_dim(&self) -> usize {
        self.n.saturating_sub(2 * self.weight())
    }

    /// Checks everything needed to build the group `G_{alpha,m}`: dimension,
    /// tuple length, the fit condition and `m != 0` when `alpha = 0`.
    pub fn validate_group(&self) -> Result<()> {
        if self.n < 4 {
            return Err(Error::InvalidConfig(format!("dimension n = {} must be at least 4", self.n)));
        }
        let k = tuple_len(self.n);
        if self.m.len() != k {
            return Err(Error::InvalidConfig(format!(
                "tuple m has length {} but n = {} requires k = {k}",
                self.m.len(),
                self.n
            )));
        }
        if self.alpha == 0 && self.m.iter().all(|&x| x == 0) {
            return Err(Error::InvalidConfig("alpha = 0 requires m != 0".into()));
        }
        if !self.fit_condition() {
            return Err(Error::InvalidConfig(format!(
                "weight 2chi + sum m_j(j+1) = {} exceeds n/2 = {}",
                self.weight(),
                self.n as f64 / 2.0
            )));
        }
        if self.alpha > MAX_ALPHA {
            return Err(Error::InvalidConfig(format!("alpha = {} is too large", self.alpha)));
        }
        Ok(())
    }

    /// Full validation, including the regime-specific requirements.
    pub fn validate(&self) -> Result<()> {
        self.validate_group()?;
        if self.regime == Regime::AEqBNonzero {
            if self.n == 5 {
                return Err(Error::InvalidConfig("regime a_eq_b_nonzero excludes n = 5".into()));
            }
            if !self.orbit_condition() {
                return Err(Error::InvalidConfig(format!(
                    "regime a_eq_b_nonzero requires 2chi + sum m_j(j+1) != (n-1)/2, got weight {} with n = {}",
                    self.weight(),
                    self.n
                )));
            }
        }
        Ok(())
    }

    /// Parses the key-value (TOML) document form.
    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// `(alpha, m)` written compactly, e.g. `(0,(1,0,0))`.
    pub fn label(&self) -> String {
        let m: Vec<String> = self.m.iter().map(|x| x.to_string()).collect();
        format!("({},({}))", self.alpha, m.join(","))
    }
}

impl fmt::Display for SymmetryConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n={} {} [{}]", self.n, self.label(), self.regime)
    }
}
