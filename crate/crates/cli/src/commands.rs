use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use cknsym::checks::{infinite_orbit_check, orbit_classify, phi_homomorphism_check, stabilizer_in_kernel_check};
use cknsym::codes::{distinct_guaranteed, Verdict};
use cknsym::enumerate::{enumerate, max_distinct_family};
use cknsym::variational::{SolveReport, Solver};
use cknsym::{Regime, SymmetryConfig, SymmetryGroup};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::run_config::{load, CheckGroupConfig, DistinguishConfig, EnumerateConfig, OrbitConfig, SolveConfig};
use crate::CliError;

/// Writes `text` to `out`, or to stdout when no path is given.
fn emit(text: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub struct EnumerateArgs {
    pub config: Option<PathBuf>,
    pub n: Option<usize>,
    pub regime: Option<String>,
    pub alpha_max: Option<u32>,
    pub max_distinct: bool,
}

pub fn cmd_enumerate(args: EnumerateArgs, out: Option<&Path>) -> Result<(), CliError> {
    let mut cfg = match &args.config {
        Some(path) => load::<EnumerateConfig>(path)?,
        None => EnumerateConfig {
            n: args.n.ok_or_else(|| CliError::validation("enumerate needs --n or --config"))?,
            regime: Regime::AEqBZero,
            alpha_max: 0,
            max_distinct: false,
        },
    };
    if let Some(n) = args.n {
        cfg.n = n;
    }
    if let Some(r) = &args.regime {
        cfg.regime = r.parse()?;
    }
    if let Some(a) = args.alpha_max {
        cfg.alpha_max = a;
    }
    cfg.max_distinct |= args.max_distinct;
    let family = enumerate(cfg.n, cfg.regime, cfg.alpha_max)?;
    let mut text = format!(
        "# n = {}, regime = {}, alpha_max = {}: {} configurations\n",
        cfg.n,
        cfg.regime,
        cfg.alpha_max,
        family.len()
    );
    text.push_str(&family.to_table());
    if cfg.max_distinct {
        let best = max_distinct_family(&family)?;
        let labels: Vec<String> = best.iter().map(SymmetryConfig::label).collect();
        writeln!(text, "# pairwise distinct subfamily ({}): {}", best.len(), labels.join(" ")).unwrap();
    }
    emit(&text, out)
}

pub fn cmd_check_group(config: &Path, out: Option<&Path>, seed: Option<u64>) -> Result<(), CliError> {
    let run: CheckGroupConfig = load(config)?;
    let cfg = &run.config;
    let group = SymmetryGroup::for_group(cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed.unwrap_or(run.seed));
    let mut text = String::new();
    writeln!(text, "config: {cfg}").unwrap();
    writeln!(text, "layout: {}", group.layout()).unwrap();
    let mut failed = Vec::new();

    let p1 = stabilizer_in_kernel_check(&group)?;
    writeln!(text, "P1 stabilizer in kernel: {}", verdict(p1.passed)).unwrap();
    writeln!(text, "  witness: {:?}", p1.witness).unwrap();
    for c in &p1.classes {
        writeln!(
            text,
            "  {:?} class {} phi {:+} theta {:.6} min residual {:.3e}{}",
            c.slot,
            c.class,
            c.sign,
            c.theta,
            c.min_residual,
            if c.fixes_witness { " (fixes witness)" } else { "" }
        )
        .unwrap();
    }
    if let Some(g) = &p1.violation {
        writeln!(text, "  certificate: element with phi = -1 fixing the witness").unwrap();
        text.push_str(&indent(&g.to_text()));
        failed.push("P1");
    }

    let p2 = phi_homomorphism_check(&group, run.trials, &mut rng)?;
    writeln!(text, "P2 phi homomorphism ({} trials): {}", p2.trials, verdict(p2.passed)).unwrap();
    writeln!(text, "  surjective: {}", p2.surjective).unwrap();
    if let Some((g, h)) = &p2.violation {
        writeln!(text, "  certificate: phi(gh) != phi(g) phi(h) for").unwrap();
        text.push_str(&indent(&g.to_text()));
        text.push_str(&indent(&h.to_text()));
    }
    if !p2.passed {
        failed.push("P2");
    }

    let p3 = infinite_orbit_check(&group, &mut rng)?;
    let required = cfg.regime.requires_infinite_orbits();
    let status = match (p3.passed, required) {
        (true, _) => "pass",
        (false, true) => "FAIL",
        (false, false) => "fails (not required in this regime)",
    };
    writeln!(text, "P3 infinite orbits: {status}").unwrap();
    if let Some(x) = &p3.counterexample {
        writeln!(text, "  certificate: nonzero point with a singleton orbit {x:?}").unwrap();
        if required {
            failed.push("P3");
        }
    }
    if failed.is_empty() {
        writeln!(text, "result: pass").unwrap();
    } else {
        writeln!(text, "result: FAIL ({})", failed.join(", ")).unwrap();
    }
    emit(&text, out)?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::failure(format!("check-group failed: {}", failed.join(", "))))
    }
}

fn verdict(passed: bool) -> &'static str {
    if passed {
        "pass"
    } else {
        "FAIL"
    }
}

fn indent(s: &str) -> String {
    s.lines().map(|l| format!("    {l}\n")).collect()
}

pub fn cmd_distinguish(config: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let run: DistinguishConfig = load(config)?;
    let d = distinct_guaranteed(&run.a, &run.b)?;
    let mut text = String::new();
    writeln!(text, "a: {}", run.a).unwrap();
    writeln!(text, "b: {}", run.b).unwrap();
    let v = match d.verdict {
        Verdict::Guaranteed => "guaranteed",
        Verdict::NotGuaranteed => "not_guaranteed",
    };
    writeln!(text, "verdict: {v}").unwrap();
    writeln!(text, "reason: {:?}", d.reason).unwrap();
    match d.gcd {
        Some(g) => writeln!(text, "gcd: {g}").unwrap(),
        None => writeln!(text, "gcd: -").unwrap(),
    }
    emit(&text, out)
}

pub fn cmd_orbit(config: &Path, out: Option<&Path>, seed: Option<u64>) -> Result<(), CliError> {
    let run: OrbitConfig = load(config)?;
    let group = SymmetryGroup::for_group(&run.config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed.unwrap_or(run.seed));
    let report = orbit_classify(&group, &run.point, run.samples, &mut rng)?;
    let mut text = String::new();
    writeln!(text, "config: {}", run.config).unwrap();
    writeln!(text, "point: {:?}", run.point).unwrap();
    writeln!(text, "orbit: {:?}", report.kind).unwrap();
    if let Some(r) = &report.reason {
        writeln!(text, "reason: {r}").unwrap();
    }
    for s in &report.samples {
        writeln!(text, "sample: {s:?}").unwrap();
    }
    emit(&text, out)
}

pub const REPORT_FILE: &str = "report.toml";
pub const FIELD_FILE: &str = "field.bin";
pub const LOG_FILE: &str = "log.txt";
pub const CHECKPOINT_FILE: &str = "checkpoint.bin";

pub fn cmd_solve(config: &Path, out: &Path, seed: Option<u64>, resume: Option<&Path>) -> Result<(), CliError> {
    let mut run: SolveConfig = load(config)?;
    if let Some(s) = seed {
        run.seed = s;
    }
    let (params, options) = run.resolve()?;
    let mut solver = match resume {
        Some(path) => {
            if !path.is_file() {
                return Err(CliError::io(format!("checkpoint {} not found", path.display())));
            }
            Solver::resume(path, &run.config, &params, &options)?
        }
        None => Solver::new(&run.config, &params, &options)?,
    };
    fs::create_dir_all(out).map_err(|e| CliError::io(format!("cannot create {}: {e}", out.display())))?;
    let checkpoint = out.join(CHECKPOINT_FILE);
    solver.run(Some((&checkpoint, run.checkpoint_every)))?;
    let report = solver.report()?;
    let write = |name: &str, text: &str| {
        let p = out.join(name);
        fs::write(&p, text).map_err(|e| CliError::io(format!("cannot write {}: {e}", p.display())))
    };
    write(REPORT_FILE, &report.to_toml_string()?)?;
    solver.field().write_to(&out.join(FIELD_FILE), &params)?;
    write(LOG_FILE, &solve_log(&run, &params, resume, &report))?;
    println!(
        "c estimate {:.6e}, energy {:.6e}, {} iterations ({}), sign change: {}",
        report.c_estimate,
        report.energy,
        report.iterations,
        report.stop_reason,
        report.sign_certificate.changes_sign()
    );
    Ok(())
}

fn solve_log(
    run: &SolveConfig,
    params: &cknsym::variational::ProblemParams,
    resume: Option<&Path>,
    report: &SolveReport,
) -> String {
    let mut text = String::from("# run configuration\n");
    text.push_str(&toml::to_string(run).unwrap_or_default());
    text.push_str("\n# resolved problem\n");
    text.push_str(&toml::to_string(params).unwrap_or_default());
    if let Some(p) = resume {
        writeln!(text, "\n# resumed from {}", p.display()).unwrap();
    }
    writeln!(text, "\n# iteration energy step decrement pde_residual gradient_norm").unwrap();
    for r in &report.refinement_history {
        writeln!(
            text,
            "{} {:.12e} {:.6e} {:.6e} {:.6e} {:.12e}",
            r.iteration, r.energy, r.step, r.decrement, r.pde_residual, r.gradient_norm
        )
        .unwrap();
    }
    writeln!(text, "\n# stop: {} (converged: {})", report.stop_reason, report.converged).unwrap();
    writeln!(text, "# c estimate {:.12e}", report.c_estimate).unwrap();
    text
}
