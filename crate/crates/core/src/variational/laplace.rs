//! Discrete Dirichlet Laplacian on the masked grid and a conjugate-gradient
//! solver, used as the inner product for Sobolev gradients.

use super::grid::Grid;
use crate::error::{Error, Result};

/// `(Kv)_i = h^{n-2} Σ_d (2 v_i - v_{i+e_d} - v_{i-e_d})` on interior nodes,
/// the matrix of `∫ ∇v·∇w` for piecewise differences.
pub fn apply_laplacian(grid: &Grid, mask: &[bool], v: &[f64], out: &mut [f64]) {
    let n = grid.n;
    let scale = grid.h().powi(n as i32 - 2);
    let strides = grid.strides();
    let mut idx = vec![0usize; n];
    for i in 0..grid.len() {
        if mask[i] {
            let mut acc = 2.0 * n as f64 * v[i];
            for d in 0..n {
                let s = strides[d];
                if idx[d] > 0 {
                    acc -= v[i - s];
                }
                if idx[d] + 1 < grid.points {
                    acc -= v[i + s];
                }
            }
            out[i] = scale * acc;
        } else {
            out[i] = 0.0;
        }
        for d in (0..n).rev() {
            idx[d] += 1;
            if idx[d] < grid.points {
                break;
            }
            idx[d] = 0;
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solves `K x = rhs` on interior nodes to relative residual `tol`.
pub fn solve_laplacian(grid: &Grid, mask: &[bool], rhs: &[f64], tol: f64, max_iter: usize) -> Result<(Vec<f64>, usize)> {
    let len = grid.len();
    let mut x = vec![0.0; len];
    let mut r: Vec<f64> = rhs.iter().zip(mask).map(|(v, &m)| if m { *v } else { 0.0 }).collect();
    let norm_b = dot(&r, &r).sqrt();
    if norm_b == 0.0 {
        return Ok((x, 0));
    }
    let mut p = r.clone();
    let mut kp = vec![0.0; len];
    let mut rr = dot(&r, &r);
    for it in 1..=max_iter {
        apply_laplacian(grid, mask, &p, &mut kp);
        let alpha = rr / dot(&p, &kp);
        for i in 0..len {
            x[i] += alpha * p[i];
            r[i] -= alpha * kp[i];
        }
        let rr_new = dot(&r, &r);
        if rr_new.sqrt() <= tol * norm_b {
            return Ok((x, it));
        }
        let beta = rr_new / rr;
        for i in 0..len {
            p[i] = r[i] + beta * p[i];
        }
        rr = rr_new;
    }
    Err(Error::Solver(format!("conjugate gradients did not reach {tol:e} in {max_iter} iterations")))
}
