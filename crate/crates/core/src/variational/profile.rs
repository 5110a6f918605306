//! Ball masses `sup_y ∫_{B(y, λ)} |u|^q |x|^{-bq}` as a concentration diagnostic.

use serde::{Deserialize, Serialize};

use super::functional::Functional;
use super::grid::GridField;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConcentrationRow {
    pub radius: f64,
    /// Largest ball mass over the sampled centres.
    pub mass: f64,
    /// Maximizing centre (first in node order on ties).
    pub center: Vec<f64>,
}

/// For every radius, the largest discrete mass of a ball centred at a grid
/// node whose indices are all multiples of `stride` away from the middle node.
pub fn concentration_profile(
    functional: &Functional,
    u: &GridField,
    radii: &[f64],
    stride: usize,
) -> Result<Vec<ConcentrationRow>> {
    if stride == 0 {
        return Err(Error::InvalidArgument("stride must be positive".into()));
    }
    let grid = functional.grid();
    let density = functional.potential_density(u)?;
    let n = grid.n;
    let h = grid.h();
    let strides = grid.strides();
    let mid = (grid.points - 1) / 2;
    let mut rows = Vec::with_capacity(radii.len());
    for &radius in radii {
        if !(radius >= 0.0) {
            return Err(Error::InvalidArgument(format!("radius {radius} is negative")));
        }
        let reach = (radius / h).floor() as isize;
        // integer offsets inside the ball
        let mut offsets: Vec<Vec<isize>> = vec![vec![]];
        for _ in 0..n {
            offsets = offsets
                .into_iter()
                .flat_map(|o| (-reach..=reach).map(move |k| {
                    let mut v = o.clone();
                    v.push(k);
                    v
                }))
                .collect();
        }
        let r2 = (radius / h) * (radius / h) + 1e-9;
        offsets.retain(|o| o.iter().map(|&k| (k * k) as f64).sum::<f64>() <= r2);
        let mut best = (f64::NEG_INFINITY, 0usize);
        let mut idx = vec![0usize; n];
        for c in 0..grid.len() {
            grid.multi_index(c, &mut idx);
            if idx.iter().any(|&k| k.abs_diff(mid) % stride != 0) {
                continue;
            }
            let mut mass = 0.0;
            'off: for o in &offsets {
                let mut flat = 0usize;
                for d in 0..n {
                    let k = idx[d] as isize + o[d];
                    if k < 0 || k >= grid.points as isize {
                        continue 'off;
                    }
                    flat += k as usize * strides[d];
                }
                mass += density[flat];
            }
            if mass > best.0 {
                best = (mass, c);
            }
        }
        let mut center = vec![0.0; n];
        grid.position(best.1, &mut center);
        rows.push(ConcentrationRow { radius, mass: best.0.max(0.0), center });
    }
    Ok(rows)
}
