//! Discrete energy `J(u) = A(u)/p - B(u)/q` with
//!
//! ```text
//! A(u) = h^n Σ_cells |x_c|^{-ap} |∇u|_c^p,    B(u) = (h/2)^n Σ_y |y|^{-bq} |Iu(y)|^q
//! ```
//!
//! Derivatives along an axis live on grid edges and use the sixth-order
//! staggered difference; `|∇u|_c^2` sums over axes the mean of the squared
//! differences on the `2^{n-1}` edges of the cell parallel to that axis.
//! `B` uses the tensor two-point Gauss rule on each cell applied to the
//! tensor product of six-point Lagrange interpolants, `Iu`. Lumping `B` onto nodes instead lets single-node
//! spikes become discrete critical points whose level grows under refinement.

use super::grid::{Grid, GridField, PAD};
use super::params::ProblemParams;
use crate::error::{Error, Result};

/// Coefficients of `(u_{i+1} - u_i)`, `(u_{i+2} - u_{i-1})`, `(u_{i+3} - u_{i-2})`.
const STENCIL: [f64; 3] = [75.0 / 64.0, -25.0 / 384.0, 3.0 / 640.0];

/// Regularization of `|∇u|^{p-2}` in the derivative when `p < 2`.
pub const P_REGULARIZATION: f64 = 1e-8;

/// `(outer, inner)` extents for sweeping axis `d` of an `m^n` array.
fn axis_extents(m: usize, n: usize, d: usize) -> (usize, usize) {
    (m.pow(d as u32), m.pow((n - 1 - d) as u32))
}

/// Local coordinates of the two Gauss points in `[0, 1]`.
fn gauss_points() -> [f64; 2] {
    let d = 0.5 / 3f64.sqrt();
    [0.5 - d, 0.5 + d]
}

/// Number of nodes in the interpolation stencil along each axis.
const INTERP_POINTS: usize = 6;

/// Lagrange weights at `i + t` on the nodes `i - 2, ..., i + 3`.
fn interp_weights(t: f64) -> [f64; INTERP_POINTS] {
    let off = (INTERP_POINTS / 2 - 1) as f64;
    let mut w = [1.0; INTERP_POINTS];
    for (a, wa) in w.iter_mut().enumerate() {
        let xa = a as f64 - off;
        for b in 0..INTERP_POINTS {
            let xb = b as f64 - off;
            if b != a {
                *wa *= (t - xb) / (xa - xb);
            }
        }
    }
    w
}

/// Calls `f(gauss_row, node_row, weight)` for every stencil entry along an
/// axis with `k` nodes; nodes beyond the ends are zero and skipped.
fn for_each_stencil(k: usize, mut f: impl FnMut(usize, usize, f64)) {
    for i in 0..k - 1 {
        for_each_stencil_row(k, i, |s, node, w| f(2 * i + s, node, w));
    }
}

/// Like [`for_each_stencil`] for the single interval `[i, i + 1]`; calls
/// `f(s, node, weight)` for Gauss point `s` in `{0, 1}`.
fn for_each_stencil_row(k: usize, i: usize, mut f: impl FnMut(usize, usize, f64)) {
    let weights = gauss_points().map(interp_weights);
    let back = INTERP_POINTS / 2 - 1;
    for (s, w) in weights.iter().enumerate() {
        for (c, &wc) in w.iter().enumerate() {
            if let Some(node) = (i + c).checked_sub(back).filter(|&node| node < k) {
                f(s, node, wc);
            }
        }
    }
}

/// Interpolates axis `d` of an array with extents `dims` from nodes to the
/// two Gauss points of every interval; the axis length goes from `k` to `2(k-1)`.
fn to_gauss(src: &[f64], dims: &[usize], d: usize) -> Vec<f64> {
    let outer: usize = dims[..d].iter().product();
    let inner: usize = dims[d + 1..].iter().product();
    let k = dims[d];
    let mut out = vec![0.0; outer * 2 * (k - 1) * inner];
    for o in 0..outer {
        for_each_stencil(k, |gi, node, w| {
            let dst = (o * 2 * (k - 1) + gi) * inner;
            let src_row = (o * k + node) * inner;
            for j in 0..inner {
                out[dst + j] += w * src[src_row + j];
            }
        });
    }
    out
}

/// Transpose of [`to_gauss`]; `dims` are the node extents.
fn from_gauss(g: &[f64], dims: &[usize], d: usize) -> Vec<f64> {
    let outer: usize = dims[..d].iter().product();
    let inner: usize = dims[d + 1..].iter().product();
    let k = dims[d];
    let mut out = vec![0.0; outer * k * inner];
    for o in 0..outer {
        for_each_stencil(k, |gi, node, w| {
            let src = (o * 2 * (k - 1) + gi) * inner;
            let dst_row = (o * k + node) * inner;
            for j in 0..inner {
                out[dst_row + j] += w * g[src + j];
            }
        });
    }
    out
}

/// `|v|^q`, avoiding `powf` when `2q` is an integer.
fn abs_pow(v: f64, q: f64) -> f64 {
    let twice = 2.0 * q;
    let a = v.abs();
    if twice == twice.round() && twice < 64.0 {
        let k = twice as i32;
        let r = a.powi(k / 2);
        if k % 2 == 1 {
            r * a.sqrt()
        } else {
            r
        }
    } else {
        a.powf(q)
    }
}

/// Distance from the origin used in the weights; bounded below by `h sqrt(n) / 4`.
pub(crate) fn regularized_radius(x: &[f64], h: f64) -> f64 {
    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    r.max(h * (x.len() as f64).sqrt() / 4.0)
}

/// The two integrals of the energy and their gradients on a fixed grid.
#[derive(Debug, Clone)]
pub struct Functional {
    params: ProblemParams,
    grid: Grid,
    mask: Vec<bool>,
    /// `|x_c|^{-ap}` on the padded cell array, zero for cells outside the stencil range.
    cell_weight: Vec<f64>,
}

impl Functional {
    pub fn new(params: &ProblemParams, grid: &Grid) -> Result<Self> {
        if params.n != grid.n {
            return Err(Error::DimensionMismatch { expected: params.n, actual: grid.n });
        }
        let n = grid.n;
        let h = grid.h();
        let mask = grid.interior_mask();
        let m = grid.padded_side();
        let (lo, hi) = (PAD - 2, PAD + grid.points);
        let mut cell_weight = vec![0.0; grid.padded_len()];
        let mut idx = vec![0usize; n];
        let mut x = vec![0.0; n];
        for (c, w) in cell_weight.iter_mut().enumerate() {
            let mut f = c;
            for d in (0..n).rev() {
                idx[d] = f % m;
                f /= m;
            }
            if idx.iter().all(|&k| k >= lo && k <= hi) {
                *w = if params.a == 0.0 {
                    1.0
                } else {
                    for d in 0..n {
                        x[d] = -grid.half_width + (idx[d] as f64 - PAD as f64 + 0.5) * h;
                    }
                    regularized_radius(&x, h).powf(-params.a * params.p)
                };
            }
        }
        Ok(Functional { params: *params, grid: grid.clone(), mask, cell_weight })
    }

    pub fn params(&self) -> &ProblemParams {
        &self.params
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    fn check(&self, u: &GridField) -> Result<()> {
        if u.grid != self.grid {
            return Err(Error::InvalidArgument("field lives on a different grid".into()));
        }
        if let Some(i) = u.values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Solver(format!("non-finite value at node {i}")));
        }
        Ok(())
    }

    /// Edge differences along `d` from the padded node array.
    fn edge_diff(&self, u: &[f64], out: &mut [f64], d: usize) {
        let m = self.grid.padded_side();
        let (outer, inner) = axis_extents(m, self.grid.n, d);
        let inv_h = 1.0 / self.grid.h();
        let (lo, hi) = (PAD - 2, PAD + self.grid.points);
        let [c1, c2, c3] = STENCIL;
        out.fill(0.0);
        for o in 0..outer {
            let base = o * m * inner;
            for k in lo..=hi {
                let row = base + k * inner;
                for i in row..row + inner {
                    out[i] = (c1 * (u[i + inner] - u[i])
                        + c2 * (u[i + 2 * inner] - u[i - inner])
                        + c3 * (u[i + 3 * inner] - u[i - 2 * inner]))
                        * inv_h;
                }
            }
        }
    }

    /// Transpose of [`Functional::edge_diff`], accumulated into `acc` on node rows.
    fn edge_diff_adjoint(&self, g: &[f64], acc: &mut [f64], d: usize) {
        let m = self.grid.padded_side();
        let (outer, inner) = axis_extents(m, self.grid.n, d);
        let inv_h = 1.0 / self.grid.h();
        let [c1, c2, c3] = STENCIL;
        for o in 0..outer {
            let base = o * m * inner;
            for k in PAD..PAD + self.grid.points {
                let row = base + k * inner;
                for j in row..row + inner {
                    acc[j] += (c1 * (g[j - inner] - g[j])
                        + c2 * (g[j - 2 * inner] - g[j + inner])
                        + c3 * (g[j - 3 * inner] - g[j + 2 * inner]))
                        * inv_h;
                }
            }
        }
    }

    /// `s[i] += s[i + e]`: sums each edge value into the cell below it along `e`.
    fn box_forward(&self, s: &mut [f64], e: usize) {
        let m = self.grid.padded_side();
        let (outer, inner) = axis_extents(m, self.grid.n, e);
        for o in 0..outer {
            let base = o * m * inner;
            for k in 0..m - 1 {
                let row = base + k * inner;
                for i in row..row + inner {
                    s[i] += s[i + inner];
                }
            }
        }
    }

    fn box_adjoint(&self, s: &mut [f64], e: usize) {
        let m = self.grid.padded_side();
        let (outer, inner) = axis_extents(m, self.grid.n, e);
        for o in 0..outer {
            let base = o * m * inner;
            for k in (1..m).rev() {
                let row = base + k * inner;
                for i in row..row + inner {
                    s[i] += s[i - inner];
                }
            }
        }
    }

    /// Squared gradient per cell on the padded cell array (zero outside the stencil range).
    fn cell_gradient_sq(&self, upad: &[f64]) -> Vec<f64> {
        let n = self.grid.n;
        let mut g = vec![0.0; upad.len()];
        let mut e = vec![0.0; upad.len()];
        let scale = 1.0 / (1u64 << (n - 1)) as f64;
        for d in 0..n {
            self.edge_diff(upad, &mut e, d);
            for v in e.iter_mut() {
                *v *= *v;
            }
            for ax in (0..n).filter(|&ax| ax != d) {
                self.box_forward(&mut e, ax);
            }
            for ((gc, ec), w) in g.iter_mut().zip(&e).zip(&self.cell_weight) {
                if *w != 0.0 {
                    *gc += scale * ec;
                }
            }
        }
        g
    }

    fn pow_half_p(&self, g: f64) -> f64 {
        if self.params.p == 2.0 {
            g
        } else {
            g.powf(self.params.p / 2.0)
        }
    }

    /// `A(u) = ‖∇u‖_{p,a}^p`.
    pub fn gradient_term(&self, u: &GridField) -> Result<f64> {
        self.check(u)?;
        let g = self.cell_gradient_sq(&self.grid.pad(&u.values));
        let s: f64 = g.iter().zip(&self.cell_weight).map(|(g, w)| w * self.pow_half_p(*g)).sum();
        Ok(s * self.grid.cell_volume())
    }

    /// Values of the interpolant at the Gauss points between node rows `i`
    /// and `i + 1` along axis 0, laid out as `[2, side, ..., side]` with
    /// `side = 2(points - 1)`. Working slab by slab keeps memory at
    /// `O(side^{n-1})`.
    fn gauss_slab(&self, u: &[f64], i: usize) -> Vec<f64> {
        let (n, k) = (self.grid.n, self.grid.points);
        let row = k.pow(n as u32 - 1);
        let mut v = vec![0.0; 2 * row];
        for_each_stencil_row(k, i, |s, node, w| {
            let src = &u[node * row..(node + 1) * row];
            for (dst, x) in v[s * row..(s + 1) * row].iter_mut().zip(src) {
                *dst += w * x;
            }
        });
        let mut dims = vec![k; n];
        dims[0] = 2;
        for d in (1..n).rev() {
            v = to_gauss(&v, &dims, d);
            dims[d] = 2 * (k - 1);
        }
        v
    }

    /// Transpose of [`Functional::gauss_slab`], accumulated into `acc`.
    fn gauss_slab_adjoint(&self, mut g: Vec<f64>, i: usize, acc: &mut [f64]) {
        let (n, k) = (self.grid.n, self.grid.points);
        let row = k.pow(n as u32 - 1);
        let mut dims = vec![2 * (k - 1); n];
        dims[0] = 2;
        for d in 1..n {
            dims[d] = k;
            g = from_gauss(&g, &dims, d);
        }
        for_each_stencil_row(k, i, |s, node, w| {
            for (dst, x) in acc[node * row..(node + 1) * row].iter_mut().zip(&g[s * row..(s + 1) * row]) {
                *dst += w * x;
            }
        });
    }

    /// `|y|^{-bq}` at entry `f` of slab `i`.
    fn gauss_weight(&self, i: usize, f: usize) -> f64 {
        if self.params.b == 0.0 {
            return 1.0;
        }
        let (n, k) = (self.grid.n, self.grid.points);
        let (h, side, t) = (self.grid.h(), 2 * (k - 1), gauss_points());
        let mut x = vec![0.0; n];
        let mut rest = f;
        for d in (1..n).rev() {
            let j = rest % side;
            rest /= side;
            x[d] = -self.grid.half_width + ((j / 2) as f64 + t[j % 2]) * h;
        }
        x[0] = -self.grid.half_width + (i as f64 + t[rest]) * h;
        regularized_radius(&x, h).powf(-self.params.b * self.params.q)
    }

    fn gauss_volume(&self) -> f64 {
        self.grid.cell_volume() / (1u64 << self.grid.n) as f64
    }

    /// Contributions to `B(u)`, each Gauss point credited to its nearest node.
    pub fn potential_density(&self, u: &GridField) -> Result<Vec<f64>> {
        self.check(u)?;
        let (n, k) = (self.grid.n, self.grid.points);
        let q = self.params.q;
        let vol = self.gauss_volume();
        let side = 2 * (k - 1);
        let row = k.pow(n as u32 - 1);
        let mut out = vec![0.0; self.grid.len()];
        for i in 0..k - 1 {
            for (f, v) in self.gauss_slab(&u.values, i).iter().enumerate() {
                let (mut rest, mut node, mut stride) = (f, 0, 1);
                for _ in 1..n {
                    let j = rest % side;
                    rest /= side;
                    node += (j / 2 + j % 2) * stride;
                    stride *= k;
                }
                node += (i + rest) * row;
                out[node] += vol * self.gauss_weight(i, f) * abs_pow(*v, q);
            }
        }
        Ok(out)
    }

    /// `B(u) = ‖u‖_{q,b}^q`.
    pub fn potential_term(&self, u: &GridField) -> Result<f64> {
        self.check(u)?;
        let q = self.params.q;
        let mut s = 0.0;
        for i in 0..self.grid.points - 1 {
            let g = self.gauss_slab(&u.values, i);
            s += if self.params.b == 0.0 {
                g.iter().map(|&v| abs_pow(v, q)).sum::<f64>()
            } else {
                g.iter().enumerate().map(|(f, &v)| self.gauss_weight(i, f) * abs_pow(v, q)).sum::<f64>()
            };
        }
        Ok(s * self.gauss_volume())
    }

    /// `(A(u), B(u))`.
    pub fn terms(&self, u: &GridField) -> Result<(f64, f64)> {
        Ok((self.gradient_term(u)?, self.potential_term(u)?))
    }

    pub fn energy(&self, u: &GridField) -> Result<f64> {
        let (a, b) = self.terms(u)?;
        let j = a / self.params.p - b / self.params.q;
        if !j.is_finite() {
            return Err(Error::Solver("energy is not finite".into()));
        }
        Ok(j)
    }

    /// `‖∇u‖_{p,a}`.
    pub fn norm(&self, u: &GridField) -> Result<f64> {
        Ok(self.gradient_term(u)?.powf(1.0 / self.params.p))
    }

    /// Gradient of `A(u)/p` with respect to the node values.
    pub fn gradient_term_derivative(&self, u: &GridField) -> Result<GridField> {
        self.check(u)?;
        let n = self.grid.n;
        let p = self.params.p;
        let upad = self.grid.pad(&u.values);
        let mut f = self.cell_gradient_sq(&upad);
        let vol = self.grid.cell_volume();
        let scale = 1.0 / (1u64 << (n - 1)) as f64;
        for (fc, w) in f.iter_mut().zip(&self.cell_weight) {
            let d = if *w == 0.0 {
                0.0
            } else if p == 2.0 {
                1.0
            } else if p < 2.0 {
                (*fc + P_REGULARIZATION).powf(p / 2.0 - 1.0)
            } else {
                fc.powf(p / 2.0 - 1.0)
            };
            // d(G^{p/2}/p)/dG = G^{p/2-1}/2, then 1/2^{n-1} from the edge mean
            *fc = 0.5 * vol * w * d * scale;
        }
        let mut acc = vec![0.0; upad.len()];
        let mut e = vec![0.0; upad.len()];
        let mut wgt = vec![0.0; upad.len()];
        for d in 0..n {
            wgt.copy_from_slice(&f);
            for ax in (0..n).filter(|&ax| ax != d) {
                self.box_adjoint(&mut wgt, ax);
            }
            self.edge_diff(&upad, &mut e, d);
            for (ev, wv) in e.iter_mut().zip(&wgt) {
                *ev *= 2.0 * wv;
            }
            self.edge_diff_adjoint(&e, &mut acc, d);
        }
        let mut values = self.grid.unpad(&acc);
        for (v, &inside) in values.iter_mut().zip(&self.mask) {
            if !inside {
                *v = 0.0;
            }
        }
        Ok(GridField { grid: self.grid.clone(), values })
    }

    /// Gradient of `B(u)/q` with respect to the node values.
    pub fn potential_term_derivative(&self, u: &GridField) -> Result<GridField> {
        self.check(u)?;
        let q = self.params.q;
        let vol = self.gauss_volume();
        let mut acc = vec![0.0; self.grid.len()];
        for i in 0..self.grid.points - 1 {
            let mut g = self.gauss_slab(&u.values, i);
            for (f, v) in g.iter_mut().enumerate() {
                *v = if *v == 0.0 { 0.0 } else { vol * self.gauss_weight(i, f) * abs_pow(*v, q - 2.0) * *v };
            }
            self.gauss_slab_adjoint(g, i, &mut acc);
        }
        for (v, &inside) in acc.iter_mut().zip(&self.mask) {
            if !inside {
                *v = 0.0;
            }
        }
        Ok(GridField { grid: self.grid.clone(), values: acc })
    }

    /// `J'(u)` as a node vector: `⟨J'(u), h⟩ = Σ_i J'(u)_i h_i`.
    pub fn gradient(&self, u: &GridField) -> Result<GridField> {
        let ga = self.gradient_term_derivative(u)?;
        let gb = self.potential_term_derivative(u)?;
        Ok(ga.axpy(-1.0, &gb))
    }

    pub fn pairing(&self, u: &GridField, h: &GridField) -> Result<f64> {
        Ok(self.gradient(u)?.dot(h))
    }

    /// Rescales `u != 0` onto the discrete Nehari manifold `A(tu) = B(tu)`;
    /// returns the projected field and the factor `t = (A/B)^{1/(q-p)}`.
    pub fn nehari_project(&self, u: &GridField) -> Result<(GridField, f64)> {
        let (v, t, _) = self.nehari_project_with_energy(u)?;
        Ok((v, t))
    }

    /// Like [`Functional::nehari_project`], also returning the energy of the
    /// projection, `(1/p - 1/q) t^p A(u)`.
    pub fn nehari_project_with_energy(&self, u: &GridField) -> Result<(GridField, f64, f64)> {
        let (a, b) = self.terms(u)?;
        if a == 0.0 || b == 0.0 {
            return Err(Error::Solver("cannot project the zero field onto the Nehari manifold".into()));
        }
        let t = (a / b).powf(1.0 / (self.params.q - self.params.p));
        if !t.is_finite() || t == 0.0 {
            return Err(Error::Solver(format!("Nehari factor {t} is degenerate")));
        }
        let j = self.params.nehari_factor() * t.powf(self.params.p) * a;
        if !j.is_finite() {
            return Err(Error::Solver("energy is not finite".into()));
        }
        Ok((u.scaled(t), t, j))
    }

    /// `|A(u) - B(u)| / A(u)`.
    pub fn nehari_residual(&self, u: &GridField) -> Result<f64> {
        let (a, b) = self.terms(u)?;
        Ok((a - b).abs() / a)
    }

    /// `κ(u) = B(u)/A(u)`.
    pub fn kappa(&self, u: &GridField) -> Result<f64> {
        let (a, b) = self.terms(u)?;
        Ok(b / a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn setup(n: usize, points: usize, p: f64) -> Functional {
        let pp = ProblemParams::new(n, p, 0.0, 0.0).unwrap();
        Functional::new(&pp, &Grid::unit(n, points).unwrap()).unwrap()
    }

    fn random_field(f: &Functional, rng: &mut ChaCha8Rng) -> GridField {
        let values = f.mask().iter().map(|&m| if m { rng.random_range(-1.0..1.0) } else { 0.0 }).collect();
        GridField { grid: f.grid().clone(), values }
    }

    #[test]
    fn zero_field() {
        let f = setup(3, 9, 2.0);
        let z = GridField::zeros(f.grid());
        assert_eq!(f.energy(&z).unwrap(), 0.0);
        assert!(f.nehari_project(&z).is_err());
    }

    #[test]
    fn linear_field_gradient() {
        // away from the boundary the stencil is exact on linear functions
        let f = setup(3, 41, 2.0);
        let u = GridField::from_fn(f.grid(), |x| 3.0 * x[0] - x[1]);
        let g = f.cell_gradient_sq(&f.grid().pad(&u.values));
        let m = f.grid().padded_side();
        let c = ((PAD + 20) * m + PAD + 20) * m + PAD + 20;
        assert!((g[c] - 10.0).abs() < 1e-10);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for p in [2.0, 2.5, 3.0] {
            let f = setup(4, 7, p);
            let u = random_field(&f, &mut rng);
            let h = random_field(&f, &mut rng);
            let exact = f.pairing(&u, &h).unwrap();
            let eps = 1e-5;
            let fd = (f.energy(&u.axpy(eps, &h)).unwrap() - f.energy(&u.axpy(-eps, &h)).unwrap()) / (2.0 * eps);
            assert!((exact - fd).abs() <= 1e-7 * exact.abs().max(1.0), "p={p}: {exact} vs {fd}");
        }
    }

    #[test]
    fn weighted_gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let pp = ProblemParams::new(4, 2.0, 0.3, 0.8).unwrap();
        let f = Functional::new(&pp, &Grid::unit(4, 6).unwrap()).unwrap();
        let u = random_field(&f, &mut rng);
        let h = random_field(&f, &mut rng);
        let exact = f.pairing(&u, &h).unwrap();
        let eps = 1e-5;
        let fd = (f.energy(&u.axpy(eps, &h)).unwrap() - f.energy(&u.axpy(-eps, &h)).unwrap()) / (2.0 * eps);
        assert!((exact - fd).abs() <= 1e-7 * exact.abs().max(1.0), "{exact} vs {fd}");
    }

    #[test]
    fn potential_term_converges_on_gaussian() {
        // ∫ exp(-2|x|²/σ²) over R^3 = (π/2)^{3/2} σ³
        let sigma: f64 = 0.3;
        let exact = (std::f64::consts::PI / 2.0).powf(1.5) * sigma.powi(3);
        let pp = ProblemParams::new(3, 1.5, 0.0, 0.0).unwrap().with_exponent(2.0).unwrap();
        let f = Functional::new(&pp, &Grid::unit(3, 41).unwrap()).unwrap();
        let u = GridField::from_fn(f.grid(), |x| (-x.iter().map(|v| v * v).sum::<f64>() / (sigma * sigma)).exp());
        let b = f.potential_term(&u).unwrap();
        assert!((b / exact - 1.0).abs() < 1e-5, "{b} vs {exact}");
        let d = f.potential_density(&u).unwrap();
        assert!((d.iter().sum::<f64>() - b).abs() < 1e-12 * b);
    }

    #[test]
    fn single_node_spike_is_damped() {
        let f = setup(4, 9, 2.0);
        let mut u = GridField::zeros(f.grid());
        u.values[f.grid().flat_index(&[4, 4, 4, 5])] = 1.0;
        let lumped = f.grid().cell_volume();
        assert!(f.potential_term(&u).unwrap() < 0.2 * lumped);
    }

    #[test]
    fn nehari_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = setup(3, 9, 2.0);
        let u = random_field(&f, &mut rng);
        let (v, _) = f.nehari_project(&u).unwrap();
        let (a, b) = f.terms(&v).unwrap();
        assert!((a - b).abs() <= 1e-12 * a);
        let j = f.energy(&v).unwrap();
        assert!((j - f.params().nehari_factor() * a).abs() <= 1e-12 * a);
        let (v2, t2) = f.nehari_project(&v).unwrap();
        assert!((t2 - 1.0).abs() < 1e-12);
        assert!(v2.values.iter().zip(&v.values).all(|(x, y)| (x - y).abs() <= 1e-12 * y.abs().max(1e-300)));
    }
}
