//! Canonical-form arithmetic of the individual factors.
//!
//! A reflection-rotation factor on `C^{j+1}` is `rho_j^eps e^{i theta}`. The
//! relation `e^{i theta} rho_j = rho_j e^{-i theta}` gives the product law
//!
//! ```text
//! (eps, theta) (eps', theta') = (eps + eps', (-1)^eps' theta + theta')
//! ```
//!
//! followed by reduction: `rho_j` has order `2(j+1)`, and when `j + 1` is
//! even `rho_j^{j+1} = e^{i pi}`, so exponents `>= j + 1` fold into the angle.
//!
//! The pinwheel factor `varrho^beta e^{i theta}` (asynchronous rotation)
//! commutes, and `varrho^{2^{alpha+1}} = -I = e^{i pi}`, so `beta` folds the
//! same way into `0..2^{alpha+1}`.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

/// Tolerance used when comparing angles and matrices of canonical forms.
pub const ANGLE_TOL: f64 = 1e-12;

/// Reduces an angle into `[0, 2pi)`.
pub fn wrap_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    if t >= TAU {
        0.0
    } else {
        t
    }
}

/// Distance between two angles on the circle.
pub fn angle_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

/// `rho_j^eps e^{i theta}` on one block.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GammaFactor {
    pub eps: u32,
    pub theta: f64,
}

impl GammaFactor {
    pub const IDENTITY: GammaFactor = GammaFactor { eps: 0, theta: 0.0 };

    /// Canonical form of `rho_j^eps e^{i theta}` for arbitrary integer `eps`.
    pub fn normalized(j: usize, eps: i64, theta: f64) -> Self {
        let dim = (j + 1) as i64;
        let mut e = eps.rem_euclid(2 * dim);
        let mut t = theta;
        if dim % 2 == 0 && e >= dim {
            e -= dim;
            t += PI;
        }
        GammaFactor { eps: e as u32, theta: wrap_angle(t) }
    }

    pub fn compose(self, other: GammaFactor, j: usize) -> GammaFactor {
        let sign = if other.eps % 2 == 0 { 1.0 } else { -1.0 };
        GammaFactor::normalized(j, self.eps as i64 + other.eps as i64, sign * self.theta + other.theta)
    }

    pub fn inverse(self, j: usize) -> GammaFactor {
        let sign = if self.eps % 2 == 0 { -1.0 } else { 1.0 };
        GammaFactor::normalized(j, -(self.eps as i64), sign * self.theta)
    }

    /// `(-1)^eps`.
    pub fn sign(self) -> i8 {
        if self.eps % 2 == 0 {
            1
        } else {
            -1
        }
    }

    pub fn approx_eq(self, other: GammaFactor, tol: f64) -> bool {
        self.eps == other.eps && angle_distance(self.theta, other.theta) <= tol
    }
}

/// `varrho_alpha^beta e^{i theta}` on the pinwheel block.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PinwheelFactor {
    pub beta: u32,
    pub theta: f64,
}

impl PinwheelFactor {
    pub const IDENTITY: PinwheelFactor = PinwheelFactor { beta: 0, theta: 0.0 };

    pub fn normalized(alpha: u32, beta: i64, theta: f64) -> Self {
        let half = 1i64 << (alpha + 1);
        let mut b = beta.rem_euclid(2 * half);
        let mut t = theta;
        if b >= half {
            b -= half;
            t += PI;
        }
        PinwheelFactor { beta: b as u32, theta: wrap_angle(t) }
    }

    pub fn compose(self, other: PinwheelFactor, alpha: u32) -> PinwheelFactor {
        PinwheelFactor::normalized(alpha, self.beta as i64 + other.beta as i64, self.theta + other.theta)
    }

    pub fn inverse(self, alpha: u32) -> PinwheelFactor {
        PinwheelFactor::normalized(alpha, -(self.beta as i64), -self.theta)
    }

    pub fn sign(self) -> i8 {
        if self.beta % 2 == 0 {
            1
        } else {
            -1
        }
    }

    /// Angle `beta pi / 2^{alpha+1}` of the map `cos(.) I + sin(.) rho_1`.
    pub fn varrho_angle(self, alpha: u32) -> f64 {
        self.beta as f64 * PI / (1u64 << (alpha + 1)) as f64
    }

    pub fn approx_eq(self, other: PinwheelFactor, tol: f64) -> bool {
        self.beta == other.beta && angle_distance(self.theta, other.theta) <= tol
    }
}

/// Applies `rho_j` in place to an interleaved block of `j + 1` complex numbers:
/// `(z_1, ..., z_{j+1}) -> (-conj z_{j+1}, conj z_1, ..., conj z_j)`.
pub(crate) fn apply_rho(block: &mut [f64]) {
    let d = block.len() / 2;
    let (lre, lim) = (block[2 * (d - 1)], block[2 * (d - 1) + 1]);
    for k in (1..d).rev() {
        block[2 * k] = block[2 * (k - 1)];
        block[2 * k + 1] = -block[2 * (k - 1) + 1];
    }
    block[0] = -lre;
    block[1] = lim;
}

/// Multiplies every complex coordinate of the block by `e^{i theta}`.
pub(crate) fn apply_sync_rotation(block: &mut [f64], theta: f64) {
    let (s, c) = theta.sin_cos();
    for pair in block.chunks_exact_mut(2) {
        let (x, y) = (pair[0], pair[1]);
        pair[0] = c * x - s * y;
        pair[1] = s * x + c * y;
    }
}

/// `(z_1, z_2) -> (e^{i theta} z_1, e^{-i theta} z_2)` on four reals.
pub(crate) fn apply_async_rotation(block: &mut [f64], theta: f64) {
    apply_sync_rotation(&mut block[0..2], theta);
    apply_sync_rotation(&mut block[2..4], -theta);
}

pub(crate) fn apply_gamma(block: &mut [f64], f: GammaFactor) {
    apply_sync_rotation(block, f.theta);
    for _ in 0..f.eps {
        apply_rho(block);
    }
}

pub(crate) fn apply_pinwheel(block: &mut [f64], f: PinwheelFactor, alpha: u32) {
    apply_async_rotation(block, f.theta);
    let a = f.varrho_angle(alpha);
    if f.beta != 0 {
        let mut r = [block[0], block[1], block[2], block[3]];
        apply_rho(&mut r);
        let (s, c) = a.sin_cos();
        for i in 0..4 {
            block[i] = c * block[i] + s * r[i];
        }
    }
}
