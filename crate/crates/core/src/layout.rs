//! Partition of the coordinates of `R^n` among the factors of `G_{alpha,m}`.
//!
//! Complex coordinates are interleaved: inside a block starting at real
//! (0-based) index `s`, the complex coordinate `z_k` is `x[s + 2k] + i x[s + 2k + 1]`.

use std::fmt;
use std::ops::Range;

use serde::Serialize;

use crate::config::SymmetryConfig;
use crate::error::Result;

/// One copy `Gamma_{j,l}` of the reflection-rotation group on `C^{j+1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GammaBlock {
    pub j: usize,
    /// 1-based copy index `l` in `1..=m_j`.
    pub ell: usize,
    /// 0-based first real coordinate.
    pub start: usize,
    /// Real width `2(j+1)`.
    pub len: usize,
}

impl GammaBlock {
    /// Number of complex coordinates, `j + 1`.
    pub fn complex_dim(&self) -> usize {
        self.j + 1
    }

    pub fn range(&self) -> Range<usize> {
        self.start..self.start + self.len
    }

    /// 1-based first coordinate, as in the indexing formula.
    pub fn start_one_based(&self) -> usize {
        self.start + 1
    }

    /// Whether `rho_j^{j+1} = -I`, i.e. `j + 1` is even.
    pub fn even(&self) -> bool {
        (self.j + 1) % 2 == 0
    }

    /// Number of canonical reflection exponents: `j + 1` if even, `2(j+1)` if odd.
    pub fn eps_classes(&self) -> u32 {
        if self.even() {
            (self.j + 1) as u32
        } else {
            2 * (self.j + 1) as u32
        }
    }
}

/// Whether the orthogonal factor on the tail coordinates is the full
/// orthogonal group or trivial (the latter when the orbit condition fails).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TailGroup {
    Orthogonal,
    Trivial,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoordinateLayout {
    pub n: usize,
    pub alpha: u32,
    /// Real coordinates of the pinwheel factor (width 4), present iff `alpha > 0`.
    pub pinwheel: Option<Range<usize>>,
    pub blocks: Vec<GammaBlock>,
    pub tail: Range<usize>,
    pub tail_group: TailGroup,
}

impl CoordinateLayout {
    /// Builds the layout of a configuration that passes
    /// [`SymmetryConfig::validate`].
    pub fn new(cfg: &SymmetryConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self::build(cfg))
    }

    /// Like [`CoordinateLayout::new`] but only requires the group-level
    /// conditions, ignoring regime-specific ones.
    pub fn for_group(cfg: &SymmetryConfig) -> Result<Self> {
        cfg.validate_group()?;
        Ok(Self::build(cfg))
    }

    fn build(cfg: &SymmetryConfig) -> Self {
        let offset = if cfg.alpha > 0 { 5 } else { 1 };
        let mut blocks = Vec::new();
        let mut before = 0usize;
        for (idx, &mj) in cfg.m.iter().enumerate() {
            let j = idx + 1;
            for ell in 1..=mj as usize {
                let start_one = before + 2 * (ell - 1) * (j + 1) + offset;
                blocks.push(GammaBlock { j, ell, start: start_one - 1, len: 2 * (j + 1) });
            }
            before += 2 * mj as usize * (j + 1);
        }
        let used = 2 * cfg.weight();
        CoordinateLayout {
            n: cfg.n,
            alpha: cfg.alpha,
            pinwheel: (cfg.alpha > 0).then_some(0..4),
            blocks,
            tail: used..cfg.n,
            tail_group: if cfg.orbit_condition() { TailGroup::Orthogonal } else { TailGroup::Trivial },
        }
    }

    pub fn tail_dim(&self) -> usize {
        self.tail.len()
    }

    /// Order `2^(alpha+2)` of the pinwheel map.
    pub fn pinwheel_order(&self) -> u32 {
        1u32 << (self.alpha + 2)
    }

    /// Short human-readable summary, 1-based coordinates.
    pub fn summary(&self) -> String {
        let mut parts = Vec::new();
        if let Some(p) = &self.pinwheel {
            parts.push(format!("P[{}-{}]", p.start + 1, p.end));
        }
        for b in &self.blocks {
            parts.push(format!("G{}.{}[{}-{}]", b.j, b.ell, b.start + 1, b.start + b.len));
        }
        if !self.tail.is_empty() {
            let kind = match self.tail_group {
                TailGroup::Orthogonal => "O",
                TailGroup::Trivial => "I",
            };
            parts.push(format!("{kind}[{}-{}]", self.tail.start + 1, self.tail.end));
        }
        parts.join(" ")
    }
}

impl fmt::Display for CoordinateLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.summary())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Regime;

    fn layout(n: usize, alpha: u32, m: Vec<u32>) -> CoordinateLayout {
        CoordinateLayout::new(&SymmetryConfig::unchecked(n, alpha, m, Regime::ALessB)).unwrap()
    }

    #[test]
    fn n4_single_block() {
        let l = layout(4, 0, vec![1]);
        assert!(l.pinwheel.is_none());
        assert_eq!(l.blocks, vec![GammaBlock { j: 1, ell: 1, start: 0, len: 4 }]);
        assert!(l.tail.is_empty());
    }

    #[test]
    fn n8_pinwheel_and_tail() {
        let l = layout(8, 1, vec![0, 0, 0]);
        assert_eq!(l.pinwheel, Some(0..4));
        assert!(l.blocks.is_empty());
        assert_eq!(l.tail, 4..8);
        assert_eq!(l.summary(), "P[1-4] O[5-8]");
    }

    #[test]
    fn indexing_formula_with_pinwheel() {
        // n = 20, alpha = 1, m = (1,1,0,...): weight 2 + 2 + 3 = 7 <= 10.
        let mut m = vec![0; 9];
        m[0] = 1;
        m[1] = 1;
        let l = layout(20, 1, m);
        assert_eq!(l.blocks[0].start_one_based(), 5);
        assert_eq!(l.blocks[1].start_one_based(), 9);
        assert_eq!(l.blocks[1].len, 6);
        assert_eq!(l.tail, 14..20);
    }

    #[test]
    fn layout_partitions_coordinates() {
        let mut m = vec![0; 9];
        m[0] = 2;
        m[2] = 1;
        let l = layout(20, 0, m);
        let mut covered = vec![0u8; 20];
        for b in &l.blocks {
            for i in b.range() {
                covered[i] += 1;
            }
        }
        for i in l.tail.clone() {
            covered[i] += 1;
        }
        assert!(covered.iter().all(|&c| c == 1));
    }

    #[test]
    fn n5_rejected_only_in_nonzero_regime() {
        let ok = SymmetryConfig::unchecked(5, 0, vec![1], Regime::ALessB);
        let l = CoordinateLayout::new(&ok).unwrap();
        assert_eq!(l.tail_group, TailGroup::Trivial);
        assert_eq!(l.tail_dim(), 1);
        let bad = SymmetryConfig::unchecked(5, 0, vec![1], Regime::AEqBNonzero);
        assert!(CoordinateLayout::new(&bad).is_err());
        assert!(CoordinateLayout::for_group(&bad).is_ok());
    }
}
