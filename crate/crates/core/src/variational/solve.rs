//! Nehari-constrained descent for sign-changing equivariant critical points.
//!
//! Each step takes the Sobolev gradient `K^{-1} J'(u)` (with `K` the
//! discrete Dirichlet Laplacian), symmetrizes it, conjugates it with the
//! previous direction `d` (Polak-Ribière, restarting when that is not a
//! descent direction), and backtracks on `s -> J(P(u - s d))` where `P` is
//! the Nehari projection, accepting the first step with sufficient decrease.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::functional::Functional;
use super::grid::{read_u32, read_u64, Grid, GridField, SignCertificate};
use super::laplace::{apply_laplacian, solve_laplacian};
use super::params::ProblemParams;
use super::symmetry::{rotation_bias, FiniteSubgroup};
use crate::checks::witness_point;
use crate::config::SymmetryConfig;
use crate::error::{Error, Result};
use crate::group::SymmetryGroup;

/// Largest dimension handled by the dense-grid solver.
pub const MAX_SOLVER_DIM: usize = 6;

const CHECKPOINT_MAGIC: &[u8; 8] = b"CKNCHKPT";
const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DescentOptions {
    pub max_iter: usize,
    /// Stop when the energy decrease of a step falls below `energy_tol * |J|`.
    pub energy_tol: f64,
    pub initial_step: f64,
    /// Upper bound for the step, which doubles after every accepted step.
    pub max_step: f64,
    /// Polak-Ribière conjugation of successive Sobolev gradients.
    pub conjugate: bool,
    /// Backtracking gives up below this step.
    pub min_step: f64,
    /// Sufficient-decrease constant of the line search.
    pub armijo: f64,
    pub cg_tol: f64,
    pub cg_max_iter: usize,
    /// Distance of the seed bump centre from the origin.
    pub seed_offset: f64,
    /// Amplitude of the random perturbation added to the seed, relative to its maximum.
    pub seed_noise: f64,
    /// Radius of the seed bump; by default it is kept clear of the other orbit points.
    pub seed_radius: Option<f64>,
}

impl Default for DescentOptions {
    fn default() -> Self {
        DescentOptions {
            max_iter: 300,
            energy_tol: 1e-10,
            initial_step: 1.0,
            max_step: 16.0,
            conjugate: true,
            min_step: 1e-10,
            armijo: 1e-4,
            cg_tol: 1e-8,
            cg_max_iter: 5000,
            seed_offset: 0.5,
            seed_noise: 0.05,
            seed_radius: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveOptions {
    pub grid: Grid,
    #[serde(default)]
    pub descent: DescentOptions,
    #[serde(default)]
    pub seed: u64,
}

/// One accepted descent step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub energy: f64,
    pub step: f64,
    pub decrement: f64,
    /// Dual norm of `J'` at the start of the step, relative to `‖u‖_K`.
    pub pde_residual: f64,
    pub gradient_norm: f64,
}

/// Everything needed to continue a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverState {
    pub iteration: usize,
    pub step: f64,
    pub energy: f64,
    pub initial_energy: f64,
    pub min_gradient_norm: f64,
    pub finished: bool,
    pub converged: bool,
    pub stop_reason: String,
    pub history: Vec<IterationRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CheckpointMeta {
    config: SymmetryConfig,
    params: ProblemParams,
    options: SolveOptions,
    state: SolverState,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveReport {
    pub config: SymmetryConfig,
    pub params: ProblemParams,
    pub grid_points: usize,
    pub half_width: f64,
    pub seed: u64,
    pub subgroup_order: usize,
    pub iterations: usize,
    pub converged: bool,
    pub stop_reason: String,
    pub accepted: bool,
    pub energy: f64,
    /// `(1/p - 1/q) ‖∇u‖^p`, the level estimate.
    pub c_estimate: f64,
    pub gradient_norm: f64,
    /// `|A - B| / A`.
    pub nehari_residual: f64,
    /// `max |u(gx) - φ(g)u(x)|` over the grid-preserving subgroup.
    pub equivariance_residual: f64,
    /// Interpolated defect under rotations of order 16 and 64.
    pub rotation_bias_16: f64,
    pub rotation_bias_64: f64,
    pub pde_residual: f64,
    /// Smallest `‖∇u‖` over all projected iterates.
    pub min_gradient_norm: f64,
    /// Whether the energy decreased at every accepted step.
    pub monotone: bool,
    pub sign_certificate: SignCertificate,
    pub refinement_history: Vec<IterationRecord>,
}

impl SolveReport {
    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// Descent driver holding the current iterate.
pub struct Solver {
    config: SymmetryConfig,
    params: ProblemParams,
    options: SolveOptions,
    group: SymmetryGroup,
    subgroup: FiniteSubgroup,
    functional: Functional,
    u: GridField,
    state: SolverState,
    /// `(J'(u), K^{-1}J'(u), direction)` of the last accepted step.
    previous: Option<[GridField; 3]>,
}

fn check_compatible(config: &SymmetryConfig, params: &ProblemParams, options: &SolveOptions) -> Result<()> {
    config.validate()?;
    if config.n != params.n || options.grid.n != params.n {
        return Err(Error::ConfigMismatch(format!(
            "dimensions differ: config n = {}, problem n = {}, grid n = {}",
            config.n, params.n, options.grid.n
        )));
    }
    if config.regime != params.regime() {
        return Err(Error::ConfigMismatch(format!(
            "configuration is declared for regime {} but (a, b) = ({}, {}) is in regime {}",
            config.regime.as_str(),
            params.a,
            params.b,
            params.regime().as_str()
        )));
    }
    if config.n > MAX_SOLVER_DIM {
        return Err(Error::InvalidConfig(format!(
            "the grid solver handles n <= {MAX_SOLVER_DIM}, got n = {}",
            config.n
        )));
    }
    Ok(())
}

impl Solver {
    /// Starts from the symmetrized two-sign bump seed around the witness point.
    pub fn new(config: &SymmetryConfig, params: &ProblemParams, options: &SolveOptions) -> Result<Self> {
        check_compatible(config, params, options)?;
        let group = SymmetryGroup::new(config)?;
        let subgroup = FiniteSubgroup::new(&group)?;
        let seed = seed_field(&group, &subgroup, &options.grid, options)?;
        Self::build(config, params, options, group, subgroup, seed)
    }

    /// Starts from an explicit field, which is symmetrized first.
    pub fn with_initial(
        config: &SymmetryConfig,
        params: &ProblemParams,
        options: &SolveOptions,
        initial: &GridField,
    ) -> Result<Self> {
        check_compatible(config, params, options)?;
        let group = SymmetryGroup::new(config)?;
        let subgroup = FiniteSubgroup::new(&group)?;
        Self::build(config, params, options, group, subgroup, initial.clone())
    }

    fn build(
        config: &SymmetryConfig,
        params: &ProblemParams,
        options: &SolveOptions,
        group: SymmetryGroup,
        subgroup: FiniteSubgroup,
        seed: GridField,
    ) -> Result<Self> {
        let functional = Functional::new(params, &options.grid)?;
        if seed.grid != options.grid {
            return Err(Error::InvalidArgument("initial field lives on a different grid".into()));
        }
        seed.validate()?;
        let sym = subgroup.symmetrize(&seed)?;
        if sym.is_zero() {
            return Err(Error::Solver("initial field is zero after symmetrization".into()));
        }
        let (u, _, energy) = functional.nehari_project_with_energy(&sym)?;
        let norm = (energy / params.nehari_factor()).powf(1.0 / params.p);
        let previous = None;
        let state = SolverState {
            iteration: 0,
            step: options.descent.initial_step,
            energy,
            initial_energy: energy,
            min_gradient_norm: norm,
            finished: false,
            converged: false,
            stop_reason: String::new(),
            history: Vec::new(),
        };
        Ok(Solver {
            config: config.clone(),
            params: *params,
            options: options.clone(),
            group,
            subgroup,
            functional,
            u,
            state,
            previous,
        })
    }

    pub fn field(&self) -> &GridField {
        &self.u
    }

    pub fn state(&self) -> &SolverState {
        &self.state
    }

    pub fn functional(&self) -> &Functional {
        &self.functional
    }

    pub fn subgroup(&self) -> &FiniteSubgroup {
        &self.subgroup
    }

    /// Sobolev gradient `K^{-1} J'(u)`, symmetrized; returns it with `J'(u)`.
    fn direction(&self) -> Result<(GridField, GridField)> {
        let g = self.functional.gradient(&self.u)?;
        let (d, _) = solve_laplacian(
            &self.options.grid,
            self.functional.mask(),
            &g.values,
            self.options.descent.cg_tol,
            self.options.descent.cg_max_iter,
        )?;
        let d = self.subgroup.symmetrize(&GridField { grid: self.options.grid.clone(), values: d })?;
        Ok((d, g))
    }

    fn k_norm(&self, v: &GridField) -> f64 {
        let mut kv = vec![0.0; v.values.len()];
        apply_laplacian(&self.options.grid, self.functional.mask(), &v.values, &mut kv);
        v.values.iter().zip(&kv).map(|(a, b)| a * b).sum::<f64>().sqrt()
    }

    fn finish(&mut self, converged: bool, reason: &str) {
        self.state.finished = true;
        self.state.converged = converged;
        self.state.stop_reason = reason.to_string();
    }

    /// One descent step. Returns `false` once the run has stopped.
    pub fn step(&mut self) -> Result<bool> {
        if self.state.finished {
            return Ok(false);
        }
        if self.state.iteration >= self.options.descent.max_iter {
            self.finish(false, "iteration limit reached");
            return Ok(false);
        }
        let opts = &self.options.descent;
        let (pg, g) = self.direction()?;
        let gpg = g.dot(&pg);
        let pde_residual = gpg.max(0.0).sqrt() / self.k_norm(&self.u);
        if !(gpg > 0.0) {
            self.finish(true, "gradient vanished");
            return Ok(false);
        }
        let d = match (&self.previous, opts.conjugate) {
            (Some([g0, pg0, d0]), true) => {
                let beta = (g.dot(&pg) - g.dot(pg0)) / g0.dot(pg0);
                let d = pg.axpy(beta.max(0.0), d0);
                if g.dot(&d) > 0.0 {
                    d
                } else {
                    pg.clone()
                }
            }
            _ => pg.clone(),
        };
        let gd = g.dot(&d);
        let mut s = self.state.step;
        let j0 = self.state.energy;
        let accepted = loop {
            let trial = self.u.axpy(-s, &d);
            let candidate =
                if trial.is_zero() { None } else { Some(self.functional.nehari_project_with_energy(&trial)?) };
            if let Some((v, _, j)) = candidate {
                if j <= j0 - opts.armijo * s * gd {
                    break Some((v, j));
                }
            }
            s *= 0.5;
            if s < opts.min_step {
                break None;
            }
        };
        let Some((v, j)) = accepted else {
            self.finish(true, "line search found no further decrease");
            return Ok(false);
        };
        let norm = (j / self.params.nehari_factor()).powf(1.0 / self.params.p);
        self.u = v;
        self.previous = Some([g, pg, d]);
        self.state.iteration += 1;
        self.state.energy = j;
        self.state.min_gradient_norm = self.state.min_gradient_norm.min(norm);
        self.state.history.push(IterationRecord {
            iteration: self.state.iteration,
            energy: j,
            step: s,
            decrement: j0 - j,
            pde_residual,
            gradient_norm: norm,
        });
        self.state.step = (2.0 * s).min(opts.max_step.max(s));
        if j0 - j <= opts.energy_tol * j.abs() {
            self.finish(true, "energy decrement below tolerance");
            return Ok(false);
        }
        Ok(true)
    }

    /// Steps until the run stops, writing a checkpoint every `every` steps if requested.
    pub fn run(&mut self, checkpoint: Option<(&Path, usize)>) -> Result<()> {
        while self.step()? {
            if let Some((path, every)) = checkpoint {
                if every > 0 && self.state.iteration % every == 0 {
                    self.write_checkpoint(path)?;
                }
            }
        }
        if let Some((path, _)) = checkpoint {
            self.write_checkpoint(path)?;
        }
        Ok(())
    }

    pub fn report(&self) -> Result<SolveReport> {
        let f = &self.functional;
        let (a, _) = f.terms(&self.u)?;
        let energy = f.energy(&self.u)?;
        let (d, g) = self.direction()?;
        let pde_residual = g.dot(&d).max(0.0).sqrt() / self.k_norm(&self.u);
        let equivariance_residual = self.subgroup.equivariance_residual(&self.u)?;
        let sign_certificate = self.u.sign_certificate();
        let monotone = self
            .state
            .history
            .iter()
            .scan(self.state.initial_energy, |prev, r| {
                let ok = r.energy < *prev;
                *prev = r.energy;
                Some(ok)
            })
            .all(|ok| ok);
        let accepted = sign_certificate.changes_sign() && equivariance_residual <= 1e-8 && monotone;
        Ok(SolveReport {
            config: self.config.clone(),
            params: self.params,
            grid_points: self.options.grid.points,
            half_width: self.options.grid.half_width,
            seed: self.options.seed,
            subgroup_order: self.subgroup.order(),
            iterations: self.state.iteration,
            converged: self.state.converged,
            stop_reason: self.state.stop_reason.clone(),
            accepted,
            energy,
            c_estimate: self.params.nehari_factor() * a,
            gradient_norm: a.powf(1.0 / self.params.p),
            nehari_residual: f.nehari_residual(&self.u)?,
            equivariance_residual,
            rotation_bias_16: rotation_bias(&self.group, &self.u, 16)?,
            rotation_bias_64: rotation_bias(&self.group, &self.u, 64)?,
            pde_residual,
            min_gradient_norm: self.state.min_gradient_norm,
            monotone,
            sign_certificate,
            refinement_history: self.state.history.clone(),
        })
    }

    /// Writes a versioned checkpoint: magic, version, TOML metadata, field.
    pub fn write_checkpoint(&self, path: &Path) -> Result<()> {
        let meta = CheckpointMeta {
            config: self.config.clone(),
            params: self.params,
            options: self.options.clone(),
            state: self.state.clone(),
        };
        let text = toml::to_string(&meta).map_err(|e| Error::Parse(e.to_string()))?;
        let tmp = path.with_extension("tmp");
        {
            let mut w = BufWriter::new(File::create(&tmp)?);
            w.write_all(CHECKPOINT_MAGIC)?;
            w.write_all(&CHECKPOINT_VERSION.to_le_bytes())?;
            w.write_all(&(text.len() as u64).to_le_bytes())?;
            w.write_all(text.as_bytes())?;
            self.u.write(&mut w, &self.params)?;
            w.write_all(&[self.previous.is_some() as u8])?;
            if let Some(prev) = &self.previous {
                for f in prev {
                    f.write(&mut w, &self.params)?;
                }
            }
            w.flush()?;
        }
        std::fs::rename(&tmp, path)?;
        Ok(())
    }

    /// Continues a run from a checkpoint. The configuration, problem and
    /// grid must match; the descent options (e.g. a larger `max_iter`) are
    /// taken from `options`.
    pub fn resume(
        path: &Path,
        config: &SymmetryConfig,
        params: &ProblemParams,
        options: &SolveOptions,
    ) -> Result<Self> {
        check_compatible(config, params, options)?;
        let mut r = BufReader::new(File::open(path)?);
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != CHECKPOINT_MAGIC {
            return Err(Error::Parse(format!("{} is not a checkpoint", path.display())));
        }
        let version = read_u32(&mut r)?;
        if version != CHECKPOINT_VERSION {
            return Err(Error::Parse(format!("unsupported checkpoint version {version}")));
        }
        let len = read_u64(&mut r)? as usize;
        let mut text = vec![0u8; len];
        r.read_exact(&mut text)?;
        let text = String::from_utf8(text).map_err(|e| Error::Parse(e.to_string()))?;
        let meta: CheckpointMeta = toml::from_str(&text).map_err(|e| Error::Parse(e.to_string()))?;
        if meta.config != *config || meta.params != *params || meta.options.grid != options.grid {
            return Err(Error::ConfigMismatch("checkpoint was written for a different run".into()));
        }
        let (u, _) = GridField::read(&mut r)?;
        let mut flag = [0u8; 1];
        r.read_exact(&mut flag)?;
        let previous = match flag[0] {
            0 => None,
            1 => Some([GridField::read(&mut r)?.0, GridField::read(&mut r)?.0, GridField::read(&mut r)?.0]),
            other => return Err(Error::Parse(format!("bad direction flag {other} in checkpoint"))),
        };
        for f in std::iter::once(&u).chain(previous.iter().flatten()) {
            if f.grid != options.grid {
                return Err(Error::ConfigMismatch("checkpoint field lives on a different grid".into()));
            }
        }
        let group = SymmetryGroup::new(config)?;
        let subgroup = FiniteSubgroup::new(&group)?;
        let functional = Functional::new(params, &options.grid)?;
        let mut state = meta.state;
        if state.finished && state.stop_reason == "iteration limit reached" {
            state.finished = false;
        }
        Ok(Solver {
            config: config.clone(),
            params: *params,
            options: options.clone(),
            group,
            subgroup,
            functional,
            u,
            state,
            previous,
        })
    }
}

/// Symmetrized bump `(1 - |x - c|^2 / r^2)_+^4` at `c = offset * ξ/|ξ|` for
/// the witness point `ξ`, plus seeded noise. The radius keeps the bump
/// inside the ball and away from the other points of the orbit of `c`.
pub fn seed_field(group: &SymmetryGroup, subgroup: &FiniteSubgroup, grid: &Grid, options: &SolveOptions) -> Result<GridField> {
    let xi = witness_point(group.layout(), None)?;
    let norm = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
    let offset = options.descent.seed_offset;
    if !(offset > 0.0 && offset < 1.0) {
        return Err(Error::InvalidArgument(format!("seed offset {offset} must lie in (0, 1)")));
    }
    let c: Vec<f64> = xi.iter().map(|v| offset * v / norm).collect();
    let sep = subgroup
        .orbit(&c)
        .iter()
        .map(|(y, _)| y.iter().zip(&c).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt())
        .filter(|&d| d > 1e-12)
        .fold(f64::INFINITY, f64::min);
    let radius = options.descent.seed_radius.unwrap_or(0.95 * (sep / 2.0).min(1.0 - offset));
    if !(radius > 0.0) {
        return Err(Error::InvalidArgument(format!("seed radius {radius} must be positive")));
    }
    let bump = GridField::from_fn(grid, |x| {
        let d2: f64 = x.iter().zip(&c).map(|(a, b)| (a - b) * (a - b)).sum();
        (1.0 - d2 / (radius * radius)).max(0.0).powi(4)
    });
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let amp = options.descent.seed_noise;
    let mask = grid.interior_mask();
    let values = bump
        .values
        .iter()
        .zip(&mask)
        .map(|(v, &m)| {
            let noise: f64 = rng.random_range(-1.0..1.0);
            if m {
                v + amp * noise
            } else {
                0.0
            }
        })
        .collect();
    Ok(GridField { grid: grid.clone(), values })
}

/// Runs a full solve with the default seed.
pub fn solve(config: &SymmetryConfig, params: &ProblemParams, options: &SolveOptions) -> Result<SolveReport> {
    let mut solver = Solver::new(config, params, options)?;
    solver.run(None)?;
    solver.report()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RefinementRow {
    pub points: usize,
    pub c_estimate: f64,
    pub energy: f64,
    pub iterations: usize,
    pub accepted: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RefinementStudy {
    pub rows: Vec<RefinementRow>,
    /// `(max c - min c) / max c` over the grids.
    pub relative_spread: f64,
}

/// Solves on each grid size and compares the level estimates.
pub fn refinement_study(
    config: &SymmetryConfig,
    params: &ProblemParams,
    points: &[usize],
    options: &SolveOptions,
) -> Result<RefinementStudy> {
    let mut rows = Vec::new();
    for &p in points {
        let opts = SolveOptions { grid: Grid::new(options.grid.n, p, options.grid.half_width)?, ..options.clone() };
        let rep = solve(config, params, &opts)?;
        rows.push(RefinementRow {
            points: p,
            c_estimate: rep.c_estimate,
            energy: rep.energy,
            iterations: rep.iterations,
            accepted: rep.accepted,
        });
    }
    let max = rows.iter().map(|r| r.c_estimate).fold(f64::NEG_INFINITY, f64::max);
    let min = rows.iter().map(|r| r.c_estimate).fold(f64::INFINITY, f64::min);
    Ok(RefinementStudy { rows, relative_spread: (max - min) / max })
}
