//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
//!
//! Run with `cargo test -p cknsym --test acceptance`.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use cknsym::checks::{equivariance_residual, stabilizer_in_kernel_check};
use cknsym::codes::{distinct_guaranteed, four_term_invariant, gcd, Code, Codeword, Verdict};
use cknsym::enumerate::{count_configs, count_configs_brute_force, enumerate};
use cknsym::variational::{
    solve, DescentOptions, FiniteSubgroup, Functional, Grid, GridField, ProblemParams, SolveOptions,
};
use cknsym::{GroupElement, Regime, SymmetryConfig, SymmetryGroup};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const GROUP_TOL: f64 = 1e-10;
const RELATION_TOL: f64 = 1e-12;
const REMARK_TOL: f64 = 1e-10;
const FD_TOL: f64 = 1e-6;
const DILATION_TOL: f64 = 1e-3;
const EQUIVARIANCE_TOL: f64 = 1e-8;
const REFINEMENT_TOL: f64 = 0.05;
const IDEMPOTENCE_TOL: f64 = 1e-10;
const PAIRING_TOL: f64 = 1e-8;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn group(n: usize, alpha: u32, m: &[u32]) -> SymmetryGroup {
    SymmetryGroup::for_group(&SymmetryConfig::unchecked(n, alpha, m.to_vec(), Regime::ALessB)).unwrap()
}

fn max_abs_diff(a: &nalgebra::DMatrix<f64>, b: &nalgebra::DMatrix<f64>) -> f64 {
    (a - b).abs().max()
}

fn c1_group_algebra() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for (n, alpha, m) in [(4, 0, vec![1]), (8, 0, vec![0, 0, 1]), (8, 2, vec![1, 0, 0])] {
        let g = group(n, alpha, &m);
        for _ in 0..10_000 {
            let (a, b) = (g.random(&mut rng), g.random(&mut rng));
            let product = a.to_matrix() * b.to_matrix();
            worst = worst.max(max_abs_diff(&a.compose(&b).unwrap().to_matrix(), &product));
        }
    }
    let t = start.elapsed();
    outcome(
        worst <= GROUP_TOL && t < Duration::from_secs(30),
        format!("max |M(gh) - M(g)M(h)| = {worst:.2e} (tol {GROUP_TOL:.0e}), {:.1}s (limit 30s)", t.as_secs_f64()),
    )
}

fn exact_order(g: &GroupElement, expected: i64) -> bool {
    g.pow(expected).is_identity(RELATION_TOL) && (1..expected).all(|k| !g.pow(k).is_identity(RELATION_TOL))
}

fn c2_orders_and_relations() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut failures = Vec::new();
    let mut worst = 0.0f64;
    for j in 1..=5usize {
        let mut m = vec![0; j];
        m[j - 1] = 1;
        let g = group(2 * (j + 1), 0, &m);
        let rho = g.rho(0).unwrap();
        if !exact_order(&rho, 2 * (j as i64 + 1)) {
            failures.push(format!("rho_{j}"));
        }
        for _ in 0..100 {
            let theta = rng.random_range(0.0..std::f64::consts::TAU);
            let lhs = g.block_rotation(0, theta).unwrap().compose(&rho).unwrap();
            let rhs = rho.compose(&g.block_rotation(0, std::f64::consts::TAU - theta).unwrap()).unwrap();
            worst = worst.max(max_abs_diff(&lhs.to_matrix(), &rhs.to_matrix()));
        }
    }
    // the pinwheel factor exists for alpha >= 1 only
    for alpha in 1..=4u32 {
        let g = group(4, alpha, &[0]);
        if !exact_order(&g.pinwheel_element(1, 0.0).unwrap(), 1 << (alpha + 2)) {
            failures.push(format!("varrho_{alpha}"));
        }
    }
    outcome(
        failures.is_empty() && worst <= RELATION_TOL,
        format!("wrong orders: {failures:?}; commutation residual {worst:.2e} (tol {RELATION_TOL:.0e})"),
    )
}

fn c3_stabilizer_certificates() -> Outcome {
    let mut checked = 0;
    let mut failed = Vec::new();
    for n in [4, 6, 8] {
        for regime in Regime::ALL {
            for cfg in enumerate(n, regime, 3).unwrap().configs {
                let report = stabilizer_in_kernel_check(&SymmetryGroup::new(&cfg).unwrap()).unwrap();
                checked += 1;
                if !report.passed {
                    failed.push(cfg.to_string());
                }
            }
        }
    }
    outcome(failed.is_empty(), format!("{checked} configs checked, failures: {failed:?}"))
}

fn c4_code_calculus() -> Outcome {
    let start = Instant::now();
    let mut pairs = 0;
    let mut failures = Vec::new();
    for t in 2..=12usize {
        for s in 2..=t {
            for r in 1..s {
                let v = |k| Codeword::leading_ones(t, k).unwrap();
                let code = Code::closure(t, [v(r), v(s)]).unwrap();
                let g = gcd(r, s);
                let ok = if g == 1 {
                    (1..=t).all(|i| code.contains(&Codeword::basis(t, i).unwrap()))
                } else {
                    // oracle: every word of the closure has weight divisible by g
                    code.words().all(|w| w.weight() as usize % g == 0)
                        && !code.contains(&Codeword::basis(t, 1).unwrap())
                };
                pairs += 1;
                if !ok {
                    failures.push((t, r, s));
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        failures.is_empty() && secs < 60.0,
        format!("{pairs} (t, r, s) triples, failures {failures:?}, {secs:.1}s (limit 60s)"),
    )
}

fn c5_remark_counterexample() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let points: Vec<Vec<f64>> = (0..1000).map(|_| (0..8).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    let mut worst = 0.0f64;
    let a = SymmetryConfig::unchecked(8, 0, vec![2, 0, 0], Regime::ALessB);
    let b = SymmetryConfig::unchecked(8, 0, vec![0, 0, 1], Regime::ALessB);
    for cfg in [&a, &b] {
        let g = SymmetryGroup::new(cfg).unwrap();
        let mut elements = Vec::new();
        for blk in 0..g.layout().blocks.len() {
            elements.push(g.rho(blk).unwrap());
            elements.push(g.block_rotation(blk, 0.7).unwrap());
        }
        elements.extend((0..50).map(|_| g.random(&mut rng)));
        worst = worst.max(equivariance_residual(four_term_invariant, &elements, &points).unwrap());
    }
    let verdict = distinct_guaranteed(&a, &b).unwrap().verdict;
    outcome(
        worst <= REMARK_TOL && verdict == Verdict::NotGuaranteed,
        format!("residual {worst:.2e} (tol {REMARK_TOL:.0e}), verdict {verdict:?}"),
    )
}

fn c6_enumeration() -> Outcome {
    let mut problems = Vec::new();
    for regime in Regime::ALL {
        let n4 = enumerate(4, regime, 0).unwrap().len();
        let n8 = enumerate(8, regime, 0).unwrap().len();
        if n4 != 1 || n8 != 4 {
            problems.push(format!("{regime}: n=4 -> {n4}, n=8 -> {n8}"));
        }
        for n in 4..=20 {
            for alpha in 0..=3 {
                let dp = count_configs(n, regime, alpha).unwrap();
                let brute = count_configs_brute_force(n, regime, alpha).unwrap();
                if dp != brute {
                    problems.push(format!("{regime} n={n} alpha={alpha}: {dp} vs {brute}"));
                }
            }
        }
    }
    outcome(problems.is_empty(), format!("n=4 -> 1 and n=8 -> 4 in every regime; knapsack = brute force for n <= 20; problems {problems:?}"))
}

fn random_field(grid: &Grid, rng: &mut ChaCha8Rng) -> GridField {
    let mask = grid.interior_mask();
    let values = mask.iter().map(|&m| if m { rng.random_range(-1.0..1.0) } else { 0.0 }).collect();
    GridField::new(grid, values).unwrap()
}

fn c7_gradient_consistency() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let grid = Grid::unit(4, 7).unwrap();
    let mut worst = 0.0f64;
    for p in [2.0, 3.0] {
        let f = Functional::new(&ProblemParams::new(4, p, 0.0, 0.0).unwrap(), &grid).unwrap();
        for _ in 0..20 {
            let u = random_field(&grid, &mut rng);
            let h = random_field(&grid, &mut rng);
            let exact = f.pairing(&u, &h).unwrap();
            let eps = 1e-5;
            let fd = (f.energy(&u.axpy(eps, &h)).unwrap() - f.energy(&u.axpy(-eps, &h)).unwrap()) / (2.0 * eps);
            worst = worst.max((exact - fd).abs() / exact.abs());
        }
    }
    outcome(worst <= FD_TOL, format!("max relative error {worst:.2e} over 40 pairs (tol {FD_TOL:.0e})"))
}

fn c8_dilation() -> Outcome {
    let params = ProblemParams::new(4, 2.0, 0.0, 0.0).unwrap();
    let grid = Grid::unit(4, 49).unwrap();
    let f = Functional::new(&params, &grid).unwrap();
    let gamma = params.gamma;
    // u_λ(x) = λ^γ u(λx) with u a smooth bump of radius 0.47
    let bump = |lam: f64| {
        GridField::from_fn(&grid, move |x| {
            let r2: f64 = x.iter().map(|v| v * v).sum();
            3.0 * lam.powf(gamma) * (1.0 - lam * lam * r2 / (0.47 * 0.47)).max(0.0).powi(4)
        })
    };
    let j1 = f.energy(&bump(1.0)).unwrap();
    let dev = [0.5, 2.0].map(|lam| (f.energy(&bump(lam)).unwrap() / j1 - 1.0).abs());
    let worst = dev[0].max(dev[1]);
    outcome(
        worst <= DILATION_TOL,
        format!("|J(u_λ)/J(u) - 1| = {:.2e} (λ=0.5), {:.2e} (λ=2) on 49^4 (tol {DILATION_TOL:.0e})", dev[0], dev[1]),
    )
}

fn c9_solver() -> Outcome {
    let start = Instant::now();
    let cfg = SymmetryConfig::new(4, 0, vec![1], Regime::AEqBZero).unwrap();
    let params = ProblemParams::new(4, 2.0, 0.0, 0.0).unwrap().subcritical(0.5).unwrap();
    let mut reports = Vec::new();
    for points in [17, 25] {
        let options = SolveOptions { grid: Grid::unit(4, points).unwrap(), descent: DescentOptions::default(), seed: 0 };
        reports.push(solve(&cfg, &params, &options).unwrap());
    }
    let secs = start.elapsed().as_secs_f64();
    let (c17, c25) = (reports[0].c_estimate, reports[1].c_estimate);
    let spread = (c17 - c25).abs() / c25;
    let monotone = reports.iter().all(|r| r.monotone);
    let eq = reports.iter().map(|r| r.equivariance_residual).fold(0.0, f64::max);
    let sign = reports.iter().all(|r| r.sign_certificate.min < 0.0 && r.sign_certificate.max > 0.0);
    outcome(
        monotone && eq <= EQUIVARIANCE_TOL && sign && spread <= REFINEMENT_TOL && secs < 600.0,
        format!(
            "monotone {monotone}, equivariance {eq:.1e}, sign change {sign}, c(17^4) = {c17:.2}, c(25^4) = {c25:.2}, \
             spread {:.2}% (tol 5%), {secs:.0}s (limit 600s)",
            100.0 * spread
        ),
    )
}

fn c10_symmetrization() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let cfg = SymmetryConfig::new(4, 0, vec![1], Regime::AEqBZero).unwrap();
    let sub = FiniteSubgroup::new(&SymmetryGroup::new(&cfg).unwrap()).unwrap();
    let grid = Grid::unit(4, 11).unwrap();
    let f = Functional::new(&ProblemParams::new(4, 2.0, 0.0, 0.0).unwrap(), &grid).unwrap();
    let (mut norm_ok, mut idem, mut pairing) = (true, 0.0f64, 0.0f64);
    for _ in 0..100 {
        let h = random_field(&grid, &mut rng);
        let t = sub.symmetrize(&h).unwrap();
        norm_ok &= t.dot(&t).sqrt() <= h.dot(&h).sqrt() * (1.0 + 1e-12);
        norm_ok &= f.norm(&t).unwrap() <= f.norm(&h).unwrap() * (1.0 + 1e-12);
        let tt = sub.symmetrize(&t).unwrap();
        idem = idem.max(tt.axpy(-1.0, &t).max_abs());
        let u = sub.symmetrize(&random_field(&grid, &mut rng)).unwrap();
        let (a, b) = (f.pairing(&u, &t).unwrap(), f.pairing(&u, &h).unwrap());
        pairing = pairing.max((a - b).abs() / b.abs());
    }
    outcome(
        norm_ok && idem <= IDEMPOTENCE_TOL && pairing <= PAIRING_TOL,
        format!(
            "norms non-increasing {norm_ok}, idempotence {idem:.1e} (tol {IDEMPOTENCE_TOL:.0e}), \
             pairing {pairing:.1e} (tol {PAIRING_TOL:.0e})"
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("group algebra oracle", c1_group_algebra),
        ("orders and relations", c2_orders_and_relations),
        ("stabilizer certificates", c3_stabilizer_certificates),
        ("code calculus", c4_code_calculus),
        ("four-term invariant", c5_remark_counterexample),
        ("enumeration ground truth", c6_enumeration),
        ("energy/gradient consistency", c7_gradient_consistency),
        ("dilation invariance", c8_dilation),
        ("solver run and refinement", c9_solver),
        ("symmetrization contract", c10_symmetrization),
    ];
    let mut all = true;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let out = catch_unwind(AssertUnwindSafe(run))
            .unwrap_or_else(|e| outcome(false, format!("panicked: {:?}", e.downcast_ref::<String>())));
        all &= out.passed;
        println!("criterion {:>2} {}: {} ({})", i + 1, if out.passed { "PASS" } else { "FAIL" }, name, out.detail);
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
