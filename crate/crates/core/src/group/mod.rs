//! Elements of `G_{alpha,m}` in canonical form.
//!
//! Every element factors uniquely as a pinwheel factor, one
//! reflection-rotation factor per block and an orthogonal matrix on the tail,
//! all commuting. [`GroupElement`] stores exactly that data; products are
//! computed factor by factor and the explicit matrices in [`matrix`] act as
//! the independent oracle.

pub mod factor;
pub mod matrix;
mod text;

use std::f64::consts::TAU;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::config::SymmetryConfig;
use crate::error::{Error, Result};
use crate::layout::{CoordinateLayout, TailGroup};

pub use factor::{angle_distance, wrap_angle, GammaFactor, PinwheelFactor, ANGLE_TOL};

/// The group `G_{alpha,m}` of a configuration, used to create elements.
#[derive(Debug, Clone)]
pub struct SymmetryGroup {
    config: SymmetryConfig,
    layout: Arc<CoordinateLayout>,
}

impl SymmetryGroup {
    /// Builds the group of a fully valid configuration.
    pub fn new(config: &SymmetryConfig) -> Result<Self> {
        Ok(SymmetryGroup { config: config.clone(), layout: Arc::new(CoordinateLayout::new(config)?) })
    }

    /// Builds the group ignoring regime-specific conditions (the group itself
    /// is well defined as soon as the fit condition holds).
    pub fn for_group(config: &SymmetryConfig) -> Result<Self> {
        Ok(SymmetryGroup { config: config.clone(), layout: Arc::new(CoordinateLayout::for_group(config)?) })
    }

    pub fn config(&self) -> &SymmetryConfig {
        &self.config
    }

    pub fn layout(&self) -> &CoordinateLayout {
        &self.layout
    }

    pub fn n(&self) -> usize {
        self.layout.n
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement {
            layout: self.layout.clone(),
            pinwheel: self.layout.pinwheel.as_ref().map(|_| PinwheelFactor::IDENTITY),
            blocks: vec![GammaFactor::IDENTITY; self.layout.blocks.len()],
            tail: DMatrix::identity(self.layout.tail_dim(), self.layout.tail_dim()),
        }
    }

    fn check_block(&self, block: usize) -> Result<()> {
        if block >= self.layout.blocks.len() {
            return Err(Error::InvalidArgument(format!(
                "block index {block} out of range ({} blocks)",
                self.layout.blocks.len()
            )));
        }
        Ok(())
    }

    /// `rho_j` acting on the given block, identity elsewhere.
    pub fn rho(&self, block: usize) -> Result<GroupElement> {
        self.block_element(block, 1, 0.0)
    }

    /// Synchronous rotation `e^{i theta}` on the given block.
    pub fn block_rotation(&self, block: usize, theta: f64) -> Result<GroupElement> {
        self.block_element(block, 0, theta)
    }

    /// `rho_j^eps e^{i theta}` on one block (any integer exponent).
    pub fn block_element(&self, block: usize, eps: i64, theta: f64) -> Result<GroupElement> {
        self.check_block(block)?;
        let mut g = self.identity();
        g.blocks[block] = GammaFactor::normalized(self.layout.blocks[block].j, eps, theta);
        Ok(g)
    }

    /// `varrho_alpha^beta e^{i theta}` on the pinwheel block.
    pub fn pinwheel_element(&self, beta: i64, theta: f64) -> Result<GroupElement> {
        if self.layout.pinwheel.is_none() {
            return Err(Error::InvalidArgument("alpha = 0 has no pinwheel factor".into()));
        }
        let mut g = self.identity();
        g.pinwheel = Some(PinwheelFactor::normalized(self.layout.alpha, beta, theta));
        Ok(g)
    }

    /// Element acting by `q` on the tail coordinates. Fails if `q` is not
    /// orthogonal or the tail factor is trivial and `q != I`.
    pub fn tail_element(&self, q: DMatrix<f64>) -> Result<GroupElement> {
        let d = self.layout.tail_dim();
        if q.nrows() != d || q.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, actual: q.nrows() });
        }
        if matrix::orthogonality_defect(&q) > 1e-10 {
            return Err(Error::InvalidArgument("tail matrix is not orthogonal".into()));
        }
        if self.layout.tail_group == TailGroup::Trivial && (&q - DMatrix::identity(d, d)).abs().max() > 1e-12 {
            return Err(Error::InvalidArgument("tail factor is trivial for this configuration".into()));
        }
        let mut g = self.identity();
        g.tail = q;
        Ok(g)
    }

    /// A random element: uniform discrete data, uniform angles, and a tail
    /// drawn by QR of a Gaussian matrix.
    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> GroupElement {
        let layout = &self.layout;
        let pinwheel = layout.pinwheel.as_ref().map(|_| PinwheelFactor {
            beta: rng.random_range(0..(1u32 << (layout.alpha + 1))),
            theta: rng.random_range(0.0..TAU),
        });
        let blocks = layout
            .blocks
            .iter()
            .map(|b| GammaFactor { eps: rng.random_range(0..b.eps_classes()), theta: rng.random_range(0.0..TAU) })
            .collect();
        let d = layout.tail_dim();
        let tail = match layout.tail_group {
            TailGroup::Orthogonal if d > 0 => random_orthogonal(d, rng),
            _ => DMatrix::identity(d, d),
        };
        GroupElement { layout: layout.clone(), pinwheel, blocks, tail }
    }

    /// An element with `phi = -1`, witnessing surjectivity of `phi`.
    pub fn sign_witness(&self) -> GroupElement {
        if self.layout.pinwheel.is_some() {
            self.pinwheel_element(1, 0.0).expect("pinwheel present")
        } else {
            // validation guarantees m != 0 when alpha = 0
            self.rho(0).expect("at least one block")
        }
    }
}

/// Random orthogonal matrix from the QR factorization of a Gaussian matrix.
pub fn random_orthogonal<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DMatrix<f64> {
    let a = DMatrix::<f64>::from_fn(d, d, |_, _| rng.sample(StandardNormal));
    a.qr().q()
}

/// Canonical-form element of `G_{alpha,m}`.
#[derive(Debug, Clone)]
pub struct GroupElement {
    layout: Arc<CoordinateLayout>,
    pinwheel: Option<PinwheelFactor>,
    blocks: Vec<GammaFactor>,
    tail: DMatrix<f64>,
}

impl GroupElement {
    pub fn layout(&self) -> &CoordinateLayout {
        &self.layout
    }

    pub fn pinwheel(&self) -> Option<PinwheelFactor> {
        self.pinwheel
    }

    pub fn blocks(&self) -> &[GammaFactor] {
        &self.blocks
    }

    pub fn tail(&self) -> &DMatrix<f64> {
        &self.tail
    }

    fn same_group(&self, other: &GroupElement) -> Result<()> {
        if Arc::ptr_eq(&self.layout, &other.layout) || *self.layout == *other.layout {
            Ok(())
        } else {
            Err(Error::ConfigMismatch(format!("elements of {} and {}", self.layout, other.layout)))
        }
    }

    /// Product `self * other` (apply `other` first).
    pub fn compose(&self, other: &GroupElement) -> Result<GroupElement> {
        self.same_group(other)?;
        let alpha = self.layout.alpha;
        let pinwheel = match (self.pinwheel, other.pinwheel) {
            (Some(a), Some(b)) => Some(a.compose(b, alpha)),
            _ => None,
        };
        let blocks = self
            .blocks
            .iter()
            .zip(&other.blocks)
            .zip(&self.layout.blocks)
            .map(|((a, b), blk)| a.compose(*b, blk.j))
            .collect();
        Ok(GroupElement { layout: self.layout.clone(), pinwheel, blocks, tail: &self.tail * &other.tail })
    }

    pub fn inverse(&self) -> GroupElement {
        GroupElement {
            layout: self.layout.clone(),
            pinwheel: self.pinwheel.map(|p| p.inverse(self.layout.alpha)),
            blocks: self.blocks.iter().zip(&self.layout.blocks).map(|(f, b)| f.inverse(b.j)).collect(),
            tail: self.tail.transpose(),
        }
    }

    /// `g^k` for any integer `k`.
    pub fn pow(&self, k: i64) -> GroupElement {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let mut acc = GroupElement {
            layout: self.layout.clone(),
            pinwheel: self.pinwheel.map(|_| PinwheelFactor::IDENTITY),
            blocks: vec![GammaFactor::IDENTITY; self.blocks.len()],
            tail: DMatrix::identity(self.tail.nrows(), self.tail.ncols()),
        };
        for _ in 0..k.unsigned_abs() {
            acc = acc.compose(&base).expect("same group");
        }
        acc
    }

    /// The sign homomorphism `phi_{alpha,m}`: `(-1)^beta prod (-1)^eps`.
    pub fn phi(&self) -> i8 {
        let mut s = self.pinwheel.map_or(1, |p| p.sign());
        for f in &self.blocks {
            s *= f.sign();
        }
        s
    }

    pub fn is_identity(&self, tol: f64) -> bool {
        self.pinwheel.is_none_or(|p| p.approx_eq(PinwheelFactor::IDENTITY, tol))
            && self.blocks.iter().all(|f| f.approx_eq(GammaFactor::IDENTITY, tol))
            && (&self.tail - DMatrix::identity(self.tail.nrows(), self.tail.ncols())).abs().max() <= tol
    }

    /// Equality of canonical forms, angles compared modulo `2pi`.
    pub fn approx_eq(&self, other: &GroupElement, tol: f64) -> bool {
        if self.same_group(other).is_err() {
            return false;
        }
        let pin = match (self.pinwheel, other.pinwheel) {
            (Some(a), Some(b)) => a.approx_eq(b, tol),
            (None, None) => true,
            _ => false,
        };
        pin && self.blocks.iter().zip(&other.blocks).all(|(a, b)| a.approx_eq(*b, tol))
            && (&self.tail - &other.tail).abs().max() <= tol
    }

    /// Real `n x n` orthogonal matrix of the element.
    pub fn to_matrix(&self) -> DMatrix<f64> {
        let n = self.layout.n;
        let mut m = DMatrix::zeros(n, n);
        if let (Some(range), Some(f)) = (&self.layout.pinwheel, self.pinwheel) {
            m.view_mut((range.start, range.start), (4, 4))
                .copy_from(&matrix::pinwheel_matrix(self.layout.alpha, f));
        }
        for (blk, f) in self.layout.blocks.iter().zip(&self.blocks) {
            m.view_mut((blk.start, blk.start), (blk.len, blk.len)).copy_from(&matrix::gamma_matrix(blk.j, *f));
        }
        let t = &self.layout.tail;
        if !t.is_empty() {
            m.view_mut((t.start, t.start), (t.len(), t.len())).copy_from(&self.tail);
        }
        m
    }

    /// `g x`, computed blockwise without forming the matrix.
    pub fn act(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut y = x.to_vec();
        self.act_in_place(&mut y)?;
        Ok(y)
    }

    pub fn act_in_place(&self, x: &mut [f64]) -> Result<()> {
        if x.len() != self.layout.n {
            return Err(Error::DimensionMismatch { expected: self.layout.n, actual: x.len() });
        }
        if let (Some(range), Some(f)) = (&self.layout.pinwheel, self.pinwheel) {
            factor::apply_pinwheel(&mut x[range.clone()], f, self.layout.alpha);
        }
        for (blk, f) in self.layout.blocks.iter().zip(&self.blocks) {
            factor::apply_gamma(&mut x[blk.range()], *f);
        }
        let t = self.layout.tail.clone();
        if !t.is_empty() {
            let w = DVector::from_column_slice(&x[t.clone()]);
            let out = &self.tail * w;
            x[t].copy_from_slice(out.as_slice());
        }
        Ok(())
    }
}

impl PartialEq for GroupElement {
    fn eq(&self, other: &Self) -> bool {
        self.approx_eq(other, ANGLE_TOL)
    }
}
