//! Verification of the structural properties of `(G_{alpha,m}, phi_{alpha,m})`:
//!
//! * (P1) some point `xi` has `Stab(xi) ⊆ ker phi`;
//! * (P2) `phi` is surjective;
//! * (P3) every nonzero point has an infinite orbit.
//!
//! All checks return a report carrying an explicit certificate.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::factor::{apply_gamma, apply_pinwheel, GammaFactor, PinwheelFactor};
use crate::group::{GroupElement, SymmetryGroup};
use crate::layout::{CoordinateLayout, TailGroup};

/// Squared residual below which a factor class counts as fixing the witness.
pub const FIXING_TOL: f64 = 1e-12;

/// The witness point `(e, xi_1, .., xi_1, .., xi_k, .., xi_k, w)` with
/// `e = (1, 0)` in `C^2` (only when `alpha > 0`) and `xi_j = (1+i, 1, ..., 1)`.
/// The tail `w` defaults to zero.
pub fn witness_point(layout: &CoordinateLayout, tail: Option<&[f64]>) -> Result<Vec<f64>> {
    let mut x = vec![0.0; layout.n];
    if let Some(p) = &layout.pinwheel {
        x[p.start] = 1.0;
    }
    for b in &layout.blocks {
        let s = b.start;
        x[s] = 1.0;
        x[s + 1] = 1.0;
        for k in 1..b.complex_dim() {
            x[s + 2 * k] = 1.0;
        }
    }
    if let Some(w) = tail {
        if w.len() != layout.tail_dim() {
            return Err(Error::DimensionMismatch { expected: layout.tail_dim(), actual: w.len() });
        }
        x[layout.tail.clone()].copy_from_slice(w);
    }
    Ok(x)
}

/// Which factor a class analysis refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FactorSlot {
    Pinwheel,
    Block { j: usize, ell: usize, index: usize },
}

/// For one discrete class (`eps` or `beta`) of one factor: the minimum over
/// the continuous angle of `|g xi - xi|^2` and the minimizing angle.
#[derive(Debug, Clone, Serialize)]
pub struct ClassResidual {
    pub slot: FactorSlot,
    pub class: u32,
    pub sign: i8,
    pub theta: f64,
    pub min_residual: f64,
    pub fixes_witness: bool,
}

#[derive(Debug, Clone)]
pub struct StabilizerReport {
    pub passed: bool,
    pub witness: Vec<f64>,
    pub classes: Vec<ClassResidual>,
    /// An element of `Stab(xi)` outside `ker phi`, if one was found.
    pub violation: Option<GroupElement>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// For `g(theta) = F R_theta` with `F` orthogonal and `R_theta` a rotation
/// with `R_{pi/2} xi ⊥ xi`: `|g xi - xi|^2 = 2|xi|^2 - 2(cos t u.xi + sin t v.xi)`
/// where `u = F xi`, `v = F R_{pi/2} xi`. Returns `(theta*, min residual)`.
fn min_over_angle(xi: &[f64], u: &[f64], v: &[f64]) -> (f64, f64) {
    let a = dot(u, xi);
    let b = dot(v, xi);
    let r = a.hypot(b);
    let theta = crate::group::wrap_angle(b.atan2(a));
    (theta, (2.0 * (dot(xi, xi) - r)).max(0.0))
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Checks (P1) at the witness point by enumerating every canonical factor
/// class and minimizing the fixing residual over the angle analytically.
/// Since the group acts blockwise, `Stab(xi)` is the product of the
/// per-factor stabilizers, and the tail factor always has `phi = +1`.
pub fn stabilizer_in_kernel_check(group: &SymmetryGroup) -> Result<StabilizerReport> {
    let layout = group.layout();
    let witness = witness_point(layout, None)?;
    let mut classes = Vec::new();
    let mut violation = None;

    if let Some(range) = &layout.pinwheel {
        let xi = &witness[range.clone()];
        for beta in 0..(1u32 << (layout.alpha + 1)) {
            let mut u = xi.to_vec();
            apply_pinwheel(&mut u, PinwheelFactor { beta, theta: 0.0 }, layout.alpha);
            let mut v = xi.to_vec();
            apply_pinwheel(&mut v, PinwheelFactor { beta, theta: std::f64::consts::FRAC_PI_2 }, layout.alpha);
            let (theta, min_residual) = min_over_angle(xi, &u, &v);
            let f = PinwheelFactor { beta, theta };
            let mut check = xi.to_vec();
            apply_pinwheel(&mut check, f, layout.alpha);
            debug_assert!((sq_dist(&check, xi) - min_residual).abs() < 1e-9);
            let fixes = min_residual <= FIXING_TOL;
            if fixes && f.sign() < 0 && violation.is_none() {
                violation = Some(group.pinwheel_element(beta as i64, theta)?);
            }
            classes.push(ClassResidual {
                slot: FactorSlot::Pinwheel,
                class: beta,
                sign: f.sign(),
                theta,
                min_residual,
                fixes_witness: fixes,
            });
        }
    }

    for (index, blk) in layout.blocks.iter().enumerate() {
        let xi = &witness[blk.range()];
        for eps in 0..blk.eps_classes() {
            let mut u = xi.to_vec();
            apply_gamma(&mut u, GammaFactor { eps, theta: 0.0 });
            let mut v = xi.to_vec();
            apply_gamma(&mut v, GammaFactor { eps, theta: std::f64::consts::FRAC_PI_2 });
            let (theta, min_residual) = min_over_angle(xi, &u, &v);
            let f = GammaFactor { eps, theta };
            let mut check = xi.to_vec();
            apply_gamma(&mut check, f);
            debug_assert!((sq_dist(&check, xi) - min_residual).abs() < 1e-9);
            let fixes = min_residual <= FIXING_TOL;
            if fixes && f.sign() < 0 && violation.is_none() {
                violation = Some(group.block_element(index, eps as i64, theta)?);
            }
            classes.push(ClassResidual {
                slot: FactorSlot::Block { j: blk.j, ell: blk.ell, index },
                class: eps,
                sign: f.sign(),
                theta,
                min_residual,
                fixes_witness: fixes,
            });
        }
    }

    if let Some(g) = &violation {
        // the certificate must really fix the witness
        let gx = g.act(&witness)?;
        debug_assert!(sq_dist(&gx, &witness) <= 1e-10);
    }
    Ok(StabilizerReport { passed: violation.is_none(), witness, classes, violation })
}

#[derive(Debug, Clone)]
pub struct HomomorphismReport {
    pub passed: bool,
    pub trials: usize,
    /// Whether both signs were attained (P2).
    pub surjective: bool,
    pub violation: Option<(GroupElement, GroupElement)>,
}

/// Checks `phi(gh) = phi(g) phi(h)` on random pairs and that `phi` attains `-1`.
pub fn phi_homomorphism_check<R: Rng + ?Sized>(
    group: &SymmetryGroup,
    trials: usize,
    rng: &mut R,
) -> Result<HomomorphismReport> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    let mut violation = None;
    let mut seen_minus = false;
    let mut seen_plus = false;
    for _ in 0..trials {
        let g = group.random(rng);
        let h = group.random(rng);
        let gh = g.compose(&h)?;
        for s in [g.phi(), h.phi(), gh.phi()] {
            seen_minus |= s < 0;
            seen_plus |= s > 0;
        }
        if gh.phi() != g.phi() * h.phi() {
            violation = Some((g, h));
            break;
        }
    }
    let w = group.sign_witness();
    seen_minus |= w.phi() < 0;
    seen_plus |= group.identity().phi() > 0;
    let surjective = seen_minus && seen_plus;
    Ok(HomomorphismReport { passed: violation.is_none() && surjective, trials, surjective, violation })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OrbitKind {
    Singleton,
    Infinite,
}

#[derive(Debug, Clone)]
pub struct OrbitReport {
    pub kind: OrbitKind,
    /// The factor responsible for an infinite orbit.
    pub reason: Option<String>,
    pub samples: Vec<Vec<f64>>,
}

/// Classifies the orbit of `x`. The orbit is a product of per-factor orbits:
/// a nonzero vector under a circle action, or a nonzero tail under a
/// nontrivial orthogonal group, has an infinite orbit; everything else is
/// fixed. `samples` random group elements are applied to `x` as a sample of
/// the orbit.
pub fn orbit_classify<R: Rng + ?Sized>(
    group: &SymmetryGroup,
    x: &[f64],
    samples: usize,
    rng: &mut R,
) -> Result<OrbitReport> {
    let layout = group.layout();
    if x.len() != layout.n {
        return Err(Error::DimensionMismatch { expected: layout.n, actual: x.len() });
    }
    let nonzero = |r: std::ops::Range<usize>| x[r].iter().any(|&v| v != 0.0);
    let mut reason = None;
    if let Some(p) = &layout.pinwheel {
        if nonzero(p.clone()) {
            reason = Some("pinwheel block: asynchronous rotation of a nonzero vector".to_string());
        }
    }
    if reason.is_none() {
        if let Some(b) = layout.blocks.iter().find(|b| nonzero(b.range())) {
            reason = Some(format!("block G{}.{}: synchronous rotation of a nonzero vector", b.j, b.ell));
        }
    }
    if reason.is_none()
        && layout.tail_group == TailGroup::Orthogonal
        && layout.tail_dim() >= 2
        && nonzero(layout.tail.clone())
    {
        reason = Some(format!("tail: O({}) orbit of a nonzero vector", layout.tail_dim()));
    }
    let kind = if reason.is_some() { OrbitKind::Infinite } else { OrbitKind::Singleton };
    let samples = (0..samples).map(|_| group.random(rng).act(x)).collect::<Result<Vec<_>>>()?;
    Ok(OrbitReport { kind, reason, samples })
}

#[derive(Debug, Clone)]
pub struct InfiniteOrbitReport {
    pub passed: bool,
    /// A nonzero point with a finite (singleton) orbit.
    pub counterexample: Option<Vec<f64>>,
}

/// Checks (P3). Orbits are products over factors, so it suffices to test the
/// coordinate basis vectors.
pub fn infinite_orbit_check<R: Rng + ?Sized>(group: &SymmetryGroup, rng: &mut R) -> Result<InfiniteOrbitReport> {
    let n = group.n();
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        if orbit_classify(group, &e, 0, rng)?.kind == OrbitKind::Singleton {
            return Ok(InfiniteOrbitReport { passed: false, counterexample: Some(e) });
        }
    }
    Ok(InfiniteOrbitReport { passed: true, counterexample: None })
}

/// `max |f(g x) - phi(g) f(x)|` over the given elements and points.
pub fn equivariance_residual<F>(f: F, elements: &[GroupElement], points: &[Vec<f64>]) -> Result<f64>
where
    F: Fn(&[f64]) -> f64,
{
    let mut worst = 0.0f64;
    for g in elements {
        let s = g.phi() as f64;
        for x in points {
            let gx = g.act(x)?;
            worst = worst.max((f(&gx) - s * f(x)).abs());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{Regime, SymmetryConfig};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn group(n: usize, alpha: u32, m: Vec<u32>) -> SymmetryGroup {
        SymmetryGroup::new(&SymmetryConfig::new(n, alpha, m, Regime::ALessB).unwrap()).unwrap()
    }

    #[test]
    fn witness_layout() {
        let g = group(8, 1, vec![1, 0, 0]);
        let x = witness_point(g.layout(), None).unwrap();
        assert_eq!(x, vec![1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 0.0]);
    }

    #[test]
    fn p1_small_configs() {
        let r = stabilizer_in_kernel_check(&group(4, 0, vec![1])).unwrap();
        assert!(r.passed);
        let fixing: Vec<_> = r.classes.iter().filter(|c| c.fixes_witness).collect();
        assert_eq!(fixing.len(), 1);
        assert_eq!(fixing[0].class, 0);

        let r = stabilizer_in_kernel_check(&group(8, 1, vec![0, 0, 0])).unwrap();
        assert!(r.passed);
        assert!(r.classes.iter().filter(|c| c.fixes_witness).all(|c| c.class == 0 && c.theta.abs() < 1e-12));
    }

    #[test]
    fn odd_block_half_turn_never_fixes() {
        // j = 2: eps = j + 1 = 3, residual 8 - 4 sin t + 4 cos t >= 8 - 4 sqrt 2
        let r = stabilizer_in_kernel_check(&group(6, 0, vec![0, 1])).unwrap();
        let c = r.classes.iter().find(|c| c.class == 3).unwrap();
        assert!((c.min_residual - (8.0 - 4.0 * 2f64.sqrt())).abs() < 1e-12);
        assert!(c.min_residual >= 6.0 - 2.0 * 5f64.sqrt());
    }

    #[test]
    fn orbits() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let g = group(8, 0, vec![1, 0, 0]);
        let r = orbit_classify(&g, &[0.0; 8], 3, &mut rng).unwrap();
        assert_eq!(r.kind, OrbitKind::Singleton);
        assert!(r.samples.iter().all(|s| s.iter().all(|&v| v == 0.0)));
        let r = orbit_classify(&g, &[0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0], 0, &mut rng).unwrap();
        assert_eq!(r.kind, OrbitKind::Infinite);

        // orbit condition fails: n = 5, tail of dimension 1 is fixed
        let g5 = group(5, 0, vec![1]);
        let r = orbit_classify(&g5, &[0.0, 0.0, 0.0, 0.0, 2.0], 2, &mut rng).unwrap();
        assert_eq!(r.kind, OrbitKind::Singleton);
        assert!(!infinite_orbit_check(&g5, &mut rng).unwrap().passed);
        assert!(infinite_orbit_check(&g, &mut rng).unwrap().passed);
    }

    #[test]
    fn homomorphism_squares() {
        let g = group(8, 0, vec![1, 0, 0]);
        let r = g.rho(0).unwrap();
        assert_eq!(r.compose(&r).unwrap().phi(), 1);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rep = phi_homomorphism_check(&g, 100, &mut rng).unwrap();
        assert!(rep.passed && rep.surjective);
        assert!(phi_homomorphism_check(&g, 0, &mut rng).is_err());
    }
}
