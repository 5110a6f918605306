//! Explicit real matrices of the generators, built entry by entry from their
//! definitions. These serve as the oracle for the blockwise action and the
//! canonical-form product law, so they deliberately do not reuse them.

use nalgebra::DMatrix;

use super::factor::{GammaFactor, PinwheelFactor};

/// Real `2(j+1) x 2(j+1)` matrix of `rho_j`.
pub fn rho_matrix(j: usize) -> DMatrix<f64> {
    let d = j + 1;
    let mut m = DMatrix::zeros(2 * d, 2 * d);
    // out z_1 = -conj(z_{j+1}) = -x + i y
    m[(0, 2 * (d - 1))] = -1.0;
    m[(1, 2 * (d - 1) + 1)] = 1.0;
    // out z_k = conj(z_{k-1})
    for k in 1..d {
        m[(2 * k, 2 * (k - 1))] = 1.0;
        m[(2 * k + 1, 2 * (k - 1) + 1)] = -1.0;
    }
    m
}

/// Block-diagonal rotation by the given angles on consecutive coordinate pairs.
pub fn pair_rotation_matrix(angles: &[f64]) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(2 * angles.len(), 2 * angles.len());
    for (k, &t) in angles.iter().enumerate() {
        let (s, c) = t.sin_cos();
        m[(2 * k, 2 * k)] = c;
        m[(2 * k, 2 * k + 1)] = -s;
        m[(2 * k + 1, 2 * k)] = s;
        m[(2 * k + 1, 2 * k + 1)] = c;
    }
    m
}

/// Synchronous rotation `e^{i theta}` on `C^{j+1}`.
pub fn sync_rotation_matrix(j: usize, theta: f64) -> DMatrix<f64> {
    pair_rotation_matrix(&vec![theta; j + 1])
}

/// Rotation `R_c(theta)` rotating complex coordinate `k` by `c_k theta`.
pub fn code_rotation_matrix(code: &[bool], theta: f64) -> DMatrix<f64> {
    let angles: Vec<f64> = code.iter().map(|&c| if c { theta } else { 0.0 }).collect();
    pair_rotation_matrix(&angles)
}

pub fn gamma_matrix(j: usize, f: GammaFactor) -> DMatrix<f64> {
    let rho = rho_matrix(j);
    let mut m = sync_rotation_matrix(j, f.theta);
    for _ in 0..f.eps {
        m = &rho * m;
    }
    m
}

/// `varrho_alpha^beta (asynchronous e^{i theta})` on `C^2`.
pub fn pinwheel_matrix(alpha: u32, f: PinwheelFactor) -> DMatrix<f64> {
    let a = f.varrho_angle(alpha);
    let varrho = DMatrix::<f64>::identity(4, 4) * a.cos() + rho_matrix(1) * a.sin();
    varrho * pair_rotation_matrix(&[f.theta, -f.theta])
}

/// Largest entry of `M^T M - I`.
pub fn orthogonality_defect(m: &DMatrix<f64>) -> f64 {
    let p = m.transpose() * m;
    let id = DMatrix::<f64>::identity(m.nrows(), m.ncols());
    (p - id).abs().max()
}
