//! Finite subgroups of `G_{0,m}` that map the grid onto itself, and the
//! averaging operator `ϑh(x) = (1/|H|) Σ_{g ∈ H} φ(g) h(gx)` over them.
//!
//! With `alpha = 0` the block factors restricted to angles in `(pi/2) Z`
//! together with the signed permutations of the tail form a subgroup `H`
//! of signed permutation matrices whose image under `φ` is `{±1}`.

use nalgebra::DMatrix;

use super::grid::{Grid, GridField};
use crate::group::{GroupElement, SymmetryGroup};
use crate::error::{Error, Result};
use crate::layout::TailGroup;

/// `(gx)_r = sign[r] * x[perm[r]]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SignedPermutation {
    pub perm: Vec<usize>,
    pub sign: Vec<i8>,
}

impl SignedPermutation {
    /// Recognizes a signed permutation matrix up to `1e-9`.
    pub fn from_matrix(m: &DMatrix<f64>) -> Option<Self> {
        let n = m.nrows();
        let mut perm = vec![0; n];
        let mut sign = vec![0i8; n];
        let mut used = vec![false; n];
        for r in 0..n {
            let mut found = None;
            for c in 0..n {
                let v = m[(r, c)];
                if (v.abs() - 1.0).abs() < 1e-9 {
                    if found.is_some() {
                        return None;
                    }
                    found = Some((c, if v > 0.0 { 1 } else { -1 }));
                } else if v.abs() > 1e-9 {
                    return None;
                }
            }
            let (c, s) = found?;
            if used[c] {
                return None;
            }
            used[c] = true;
            perm[r] = c;
            sign[r] = s;
        }
        Some(SignedPermutation { perm, sign })
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.perm.iter().zip(&self.sign).map(|(&c, &s)| s as f64 * x[c]).collect()
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &SignedPermutation) -> SignedPermutation {
        let perm = self.perm.iter().map(|&c| other.perm[c]).collect();
        let sign = self.perm.iter().zip(&self.sign).map(|(&c, &s)| s * other.sign[c]).collect();
        SignedPermutation { perm, sign }
    }
}

fn permutations(d: usize) -> Vec<Vec<usize>> {
    if d == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(d - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, d - 1);
            out.push(q);
        }
    }
    out
}

/// All `d x d` signed permutation matrices.
fn signed_permutation_matrices(d: usize) -> Vec<DMatrix<f64>> {
    let mut out = Vec::new();
    for p in permutations(d) {
        for signs in 0..(1u32 << d) {
            let mut m = DMatrix::zeros(d, d);
            for (r, &c) in p.iter().enumerate() {
                m[(r, c)] = if signs >> r & 1 == 1 { -1.0 } else { 1.0 };
            }
            out.push(m);
        }
    }
    out
}

/// The grid-preserving subgroup `H` with its signs `φ|_H`.
#[derive(Debug, Clone)]
pub struct FiniteSubgroup {
    elements: Vec<GroupElement>,
    maps: Vec<SignedPermutation>,
    phi: Vec<i8>,
}

impl FiniteSubgroup {
    pub fn new(group: &SymmetryGroup) -> Result<Self> {
        let layout = group.layout();
        if layout.alpha != 0 {
            return Err(Error::InvalidConfig(
                "the pinwheel factor does not preserve Cartesian grids; only alpha = 0 is supported".into(),
            ));
        }
        let mut factors: Vec<Vec<GroupElement>> = Vec::new();
        for (b, blk) in layout.blocks.iter().enumerate() {
            let mut list = Vec::new();
            for eps in 0..blk.eps_classes() {
                for k in 0..4 {
                    list.push(group.block_element(b, eps as i64, k as f64 * std::f64::consts::FRAC_PI_2)?);
                }
            }
            factors.push(list);
        }
        if layout.tail_group == TailGroup::Orthogonal && layout.tail_dim() > 0 {
            let list = signed_permutation_matrices(layout.tail_dim())
                .into_iter()
                .map(|m| group.tail_element(m))
                .collect::<Result<Vec<_>>>()?;
            factors.push(list);
        }
        let mut elements = vec![group.identity()];
        for list in &factors {
            let mut next = Vec::with_capacity(elements.len() * list.len());
            for g in &elements {
                for f in list {
                    next.push(g.compose(f)?);
                }
            }
            elements = next;
        }
        let mut maps = Vec::with_capacity(elements.len());
        for g in &elements {
            let m = SignedPermutation::from_matrix(&g.to_matrix())
                .ok_or_else(|| Error::Solver("subgroup element is not a signed permutation".into()))?;
            maps.push(m);
        }
        let phi = elements.iter().map(GroupElement::phi).collect();
        Ok(FiniteSubgroup { elements, maps, phi })
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[GroupElement] {
        &self.elements
    }

    pub fn maps(&self) -> &[SignedPermutation] {
        &self.maps
    }

    pub fn signs(&self) -> &[i8] {
        &self.phi
    }

    fn check(&self, grid: &Grid) -> Result<()> {
        let n = self.maps[0].perm.len();
        if grid.n != n {
            return Err(Error::DimensionMismatch { expected: n, actual: grid.n });
        }
        Ok(())
    }

    /// Calls `f(i, gi)` for every node `i` with `gi` the node at `g x_i`.
    fn for_each_image<F: FnMut(usize, usize)>(grid: &Grid, g: &SignedPermutation, mut f: F) {
        let n = grid.n;
        let last = grid.points - 1;
        let strides = grid.strides();
        let mut idx = vec![0usize; n];
        for i in 0..grid.len() {
            let mut j = 0;
            for r in 0..n {
                let k = idx[g.perm[r]];
                j += strides[r] * if g.sign[r] > 0 { k } else { last - k };
            }
            f(i, j);
            // odometer
            for d in (0..n).rev() {
                idx[d] += 1;
                if idx[d] < grid.points {
                    break;
                }
                idx[d] = 0;
            }
        }
    }

    /// `ϑh`.
    pub fn symmetrize(&self, h: &GridField) -> Result<GridField> {
        self.check(&h.grid)?;
        let mut out = vec![0.0; h.values.len()];
        for (g, &s) in self.maps.iter().zip(&self.phi) {
            let s = s as f64;
            Self::for_each_image(&h.grid, g, |i, j| out[i] += s * h.values[j]);
        }
        let inv = 1.0 / self.order() as f64;
        for v in &mut out {
            *v *= inv;
        }
        Ok(GridField { grid: h.grid.clone(), values: out })
    }

    /// `max_g max_i |u(g x_i) - φ(g) u(x_i)|`.
    pub fn equivariance_residual(&self, u: &GridField) -> Result<f64> {
        self.check(&u.grid)?;
        let mut worst = 0.0f64;
        for (g, &s) in self.maps.iter().zip(&self.phi) {
            let s = s as f64;
            Self::for_each_image(&u.grid, g, |i, j| worst = worst.max((u.values[j] - s * u.values[i]).abs()));
        }
        Ok(worst)
    }

    /// The distinct points `g x` with the signs `φ(g)` of the first element reaching them.
    pub fn orbit(&self, x: &[f64]) -> Vec<(Vec<f64>, i8)> {
        let mut out: Vec<(Vec<f64>, i8)> = Vec::new();
        for (g, &s) in self.maps.iter().zip(&self.phi) {
            let y = g.apply(x);
            if !out.iter().any(|(z, _)| z.iter().zip(&y).all(|(a, b)| (a - b).abs() < 1e-12)) {
                out.push((y, s));
            }
        }
        out
    }
}

/// Multilinear interpolation of a field at an arbitrary point; zero outside the grid.
pub fn interpolate(u: &GridField, y: &[f64]) -> f64 {
    let grid = &u.grid;
    let n = grid.n;
    let h = grid.h();
    let mut base = vec![0isize; n];
    let mut frac = vec![0.0; n];
    for d in 0..n {
        let t = (y[d] + grid.half_width) / h;
        let f = t.floor();
        base[d] = f as isize;
        frac[d] = t - f;
    }
    let strides = grid.strides();
    let mut total = 0.0;
    'corner: for corner in 0..(1usize << n) {
        let mut w = 1.0;
        let mut flat = 0usize;
        for d in 0..n {
            let bit = (corner >> d) & 1;
            let k = base[d] + bit as isize;
            if k < 0 || k >= grid.points as isize {
                continue 'corner;
            }
            w *= if bit == 1 { frac[d] } else { 1.0 - frac[d] };
            flat += k as usize * strides[d];
        }
        total += w * u.values[flat];
    }
    total
}

/// Relative defect `max |u(gx) - φ(g) u(x)| / max |u|` over rotations by
/// `2 pi k / order` in every block (and the first tail plane), with and
/// without a reflection `rho` on the first block, evaluated by interpolation.
/// Measures how far a field equivariant under the finite subgroup is from
/// being equivariant under the full group.
pub fn rotation_bias(group: &SymmetryGroup, u: &GridField, order: usize) -> Result<f64> {
    let layout = group.layout();
    let grid = &u.grid;
    if grid.n != layout.n {
        return Err(Error::DimensionMismatch { expected: layout.n, actual: grid.n });
    }
    let scale = u.max_abs();
    if scale == 0.0 || order == 0 {
        return Ok(0.0);
    }
    let mask = grid.interior_mask();
    let mut worst = 0.0f64;
    let mut x = vec![0.0; grid.n];
    for k in 1..order {
        let theta = std::f64::consts::TAU * k as f64 / order as f64;
        let mut g = group.identity();
        for b in 0..layout.blocks.len() {
            g = g.compose(&group.block_rotation(b, theta)?)?;
        }
        if layout.tail_group == TailGroup::Orthogonal && layout.tail_dim() >= 2 {
            let mut q = DMatrix::identity(layout.tail_dim(), layout.tail_dim());
            let (s, c) = theta.sin_cos();
            q[(0, 0)] = c;
            q[(0, 1)] = -s;
            q[(1, 0)] = s;
            q[(1, 1)] = c;
            g = g.compose(&group.tail_element(q)?)?;
        }
        let candidates = if layout.blocks.is_empty() { vec![g] } else { vec![g.clone(), group.rho(0)?.compose(&g)?] };
        for g in candidates {
            let s = g.phi() as f64;
            let m = g.to_matrix();
            for i in 0..grid.len() {
                if !mask[i] {
                    continue;
                }
                grid.position(i, &mut x);
                let gx: Vec<f64> = (0..grid.n).map(|r| (0..grid.n).map(|c| m[(r, c)] * x[c]).sum()).collect();
                worst = worst.max((interpolate(u, &gx) - s * u.values[i]).abs());
            }
        }
    }
    Ok(worst / scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{Regime, SymmetryConfig};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashSet;

    fn subgroup(n: usize, m: Vec<u32>) -> (SymmetryGroup, FiniteSubgroup) {
        let g = SymmetryGroup::new(&SymmetryConfig::new(n, 0, m, Regime::ALessB).unwrap()).unwrap();
        let h = FiniteSubgroup::new(&g).unwrap();
        (g, h)
    }

    #[test]
    fn orders_and_closure() {
        for (n, m, order) in [(4, vec![1], 8), (6, vec![0, 1], 24), (6, vec![1, 0], 64)] {
            let (_, h) = subgroup(n, m);
            assert_eq!(h.order(), order);
            let set: HashSet<_> = h.maps().iter().cloned().collect();
            assert_eq!(set.len(), order);
            for a in h.maps() {
                for b in h.maps() {
                    assert!(set.contains(&a.compose(b)));
                }
            }
            assert!(h.signs().contains(&-1));
        }
    }

    #[test]
    fn signed_permutation_matches_matrix() {
        let (_, h) = subgroup(4, vec![1]);
        let x = [0.1, -0.7, 0.3, 0.9];
        for (g, sp) in h.elements().iter().zip(h.maps()) {
            let y = g.act(&x).unwrap();
            let z = sp.apply(&x);
            assert!(y.iter().zip(&z).all(|(a, b)| (a - b).abs() < 1e-12));
        }
    }

    #[test]
    fn symmetrize_is_a_projection() {
        let (_, h) = subgroup(4, vec![1]);
        let grid = Grid::unit(4, 7).unwrap();
        let mask = grid.interior_mask();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let values = mask.iter().map(|&m| if m { rng.random_range(-1.0..1.0) } else { 0.0 }).collect();
        let f = GridField { grid, values };
        let s = h.symmetrize(&f).unwrap();
        assert!(h.equivariance_residual(&s).unwrap() < 1e-15);
        let ss = h.symmetrize(&s).unwrap();
        assert!(s.values.iter().zip(&ss.values).all(|(a, b)| (a - b).abs() < 1e-15));
    }

    #[test]
    fn interpolation_exact_on_multilinear() {
        let grid = Grid::new(2, 9, 1.5).unwrap();
        let mut x = vec![0.0; 2];
        let values = (0..grid.len())
            .map(|i| {
                grid.position(i, &mut x);
                1.0 + 2.0 * x[0] - x[1] + 0.5 * x[0] * x[1]
            })
            .collect();
        let u = GridField { grid, values };
        let y = [0.13, -0.41];
        let exact = 1.0 + 2.0 * y[0] - y[1] + 0.5 * y[0] * y[1];
        assert!((interpolate(&u, &y) - exact).abs() < 1e-13);
    }
}
