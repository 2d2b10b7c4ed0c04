//! `pseudoell`: checks, lifts, boundary classification, monodromy witnesses
//! and verification sweeps for pseudoellipsoids.
//!
//! Exit codes: 0 success or affirmative verdict, 1 negative verdict, 2 input
//! error, 3 inconclusive.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde_json::{json, Value};

use pseudoell::charts::{non_extendibility_witness_with, WitnessConfig, WitnessOutcome, DEFAULT_STEPS};
use pseudoell::hermitian::{membership_defects, normalize_det, MEMBERSHIP_TOL};
use pseudoell::json::{pair, parse_point};
use pseudoell::matrix::max_dist;
use pseudoell::verify::{run_all, VerifyConfig};
use pseudoell::{
    build_lift, check_extendible, check_membership, BallAutomorphism, Error, MatrixFile, PseudoEllipsoid,
    SpecialUnitaryMatrix,
};

#[derive(Debug, Parser)]
#[command(name = "pseudoell", version)]
#[command(about = "Automorphisms of pseudoellipsoids through the branched cover of the unit ball")]
struct Cli {
    #[command(flatten)]
    run: RunConfig,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct RunConfig {
    /// Tolerance for accepting matrices into SU(n,1).
    #[arg(long, global = true, default_value_t = MEMBERSHIP_TOL, value_parser = positive)]
    tol: f64,

    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Number of boundary samples for `classify`.
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    samples: Option<u64>,

    /// Cap on loop discretization steps for `witness`.
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    steps: Option<u64>,

    /// Write the JSON lines here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        _ => Err(format!("expected a positive number, got {s:?}")),
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check whether a matrix lies in SU(n,1).
    CheckSu { matrix: PathBuf },

    /// Decide whether a ball automorphism comes from an automorphism of the domain.
    Extendible { domain: PathBuf, matrix: PathBuf },

    /// Evaluate the lift of an extendible ball automorphism at a point.
    Lift {
        domain: PathBuf,
        matrix: PathBuf,
        /// Point as `[[re, im], ...]`.
        #[arg(long)]
        point: String,
    },

    /// Classify boundary points as strongly pseudoconvex or Levi degenerate.
    Classify {
        domain: PathBuf,
        /// Boundary point as `[[re, im], ...]`; otherwise `--samples` random points.
        #[arg(long)]
        point: Option<String>,
    },

    /// Search for a loop on which the local lift has nontrivial monodromy.
    Witness { domain: PathBuf, matrix: PathBuf },

    /// Run the property suites on a domain.
    Verify {
        domain: PathBuf,
        /// Use the full sample counts.
        #[arg(long)]
        full: bool,
    },
}

/// Failure modes that map onto exit codes.
enum Fail {
    Negative,
    Input(String),
    Inconclusive,
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Input(e.to_string())
    }
}

struct Output {
    lines: Vec<String>,
}

impl Output {
    fn emit(&mut self, v: Value) {
        self.lines.push(v.to_string());
    }
}

fn read(path: &Path) -> Result<String, Fail> {
    fs::read_to_string(path).map_err(|e| Fail::Input(format!("{}: {e}", path.display())))
}

fn load_domain(path: &Path) -> Result<PseudoEllipsoid, Fail> {
    Ok(PseudoEllipsoid::from_json(&read(path)?)?)
}

/// Loads a pseudo-unitary matrix; the determinant is rescaled to 1.
fn load_automorphism(path: &Path, domain: &PseudoEllipsoid, tol: f64) -> Result<BallAutomorphism, Fail> {
    let file = MatrixFile::parse(&read(path)?)?;
    if file.n != domain.n() {
        return Err(Fail::Input(format!("matrix has n = {}, domain has n = {}", file.n, domain.n())));
    }
    let m = file.to_matrix()?;
    let (unitarity, _) = membership_defects(&m, file.n);
    if unitarity > tol {
        return Err(Fail::Input(format!("matrix is not pseudo-unitary (defect {unitarity:.3e})")));
    }
    let rep = SpecialUnitaryMatrix::certify(normalize_det(&m), file.n, tol)?;
    Ok(BallAutomorphism::new(rep))
}

fn pairs(v: &[Complex64]) -> Vec<[f64; 2]> {
    v.iter().map(|z| pair(*z)).collect()
}

fn check_su(out: &mut Output, cfg: &RunConfig, matrix: &Path) -> Result<(), Fail> {
    let file = MatrixFile::parse(&read(matrix)?)?;
    let m = file.to_matrix()?;
    match check_membership(&m, file.n, cfg.tol)? {
        Ok(rep) => {
            out.emit(json!({"member": true, "residual": rep.residual(), "tol": cfg.tol}));
            eprintln!("accepted: residual {:.3e}", rep.residual());
            Ok(())
        }
        Err(rej) => {
            out.emit(json!({
                "member": false,
                "unitarity_defect": rej.unitarity_defect,
                "determinant_defect": rej.determinant_defect,
                "tol": rej.tol,
            }));
            eprintln!("rejected: {rej}");
            Err(Fail::Negative)
        }
    }
}

fn extendible(out: &mut Output, cfg: &RunConfig, domain: &Path, matrix: &Path) -> Result<(), Fail> {
    let e = load_domain(domain)?;
    let f = load_automorphism(matrix, &e, cfg.tol)?;
    let verdict = check_extendible(&e, &f)?;
    out.emit(verdict.to_json());
    if verdict.extendible {
        eprintln!("extendible");
        Ok(())
    } else {
        eprintln!("not extendible");
        Err(Fail::Negative)
    }
}

fn lift(out: &mut Output, cfg: &RunConfig, domain: &Path, matrix: &Path, point: &str) -> Result<(), Fail> {
    let e = load_domain(domain)?;
    let f = load_automorphism(matrix, &e, cfg.tol)?;
    let z = parse_point(point)?;
    if z.len() != e.n() {
        return Err(Fail::Input(format!("point has {} coordinates, expected {}", z.len(), e.n())));
    }
    let verdict = check_extendible(&e, &f)?;
    if !verdict.extendible {
        out.emit(verdict.to_json());
        eprintln!("not extendible; no global lift");
        return Err(Fail::Negative);
    }
    let g = build_lift(&e, &verdict, &f, None)?;
    let w = g.apply(&z)?;
    let residual = max_dist(&e.covering_map(&w), &f.apply(&e.covering_map(&z))?);
    out.emit(json!({"point": pairs(&z), "image": pairs(&w), "residual": residual}));
    eprintln!("functional equation residual {residual:.3e}");
    Ok(())
}

fn classify(out: &mut Output, cfg: &RunConfig, domain: &Path, point: Option<&str>) -> Result<(), Fail> {
    let e = load_domain(domain)?;
    let points = match (point, cfg.samples) {
        (Some(p), _) => vec![parse_point(p)?],
        (None, Some(n)) => e.sample_boundary(cfg.seed, n as usize),
        (None, None) => return Err(Fail::Input("classify needs --point or --samples".into())),
    };
    let mut degenerate = 0;
    for z in &points {
        let report = e.classify_boundary(z)?;
        if report.classification == pseudoell::BoundaryClass::LeviDegenerate {
            degenerate += 1;
        }
        out.emit(serde_json::to_value(&report).map_err(Error::from)?);
    }
    eprintln!("{} points, {degenerate} Levi degenerate", points.len());
    Ok(())
}

fn witness(out: &mut Output, cfg: &RunConfig, domain: &Path, matrix: &Path) -> Result<(), Fail> {
    let e = load_domain(domain)?;
    let f = load_automorphism(matrix, &e, cfg.tol)?;
    let mut wc = WitnessConfig {
        seed: cfg.seed,
        ..WitnessConfig::default()
    };
    if let Some(cap) = cfg.steps {
        wc.max_steps = cap as usize;
        wc.initial_steps = DEFAULT_STEPS.min(wc.max_steps);
    }
    match non_extendibility_witness_with(&e, &f, &wc)? {
        WitnessOutcome::None => {
            out.emit(json!({"witness": "none"}));
            eprintln!("extendible; no witness");
            Ok(())
        }
        WitnessOutcome::Found(report) => {
            let factor = report.monodromy.factor;
            out.emit(json!({"witness": report.to_json()}));
            eprintln!(
                "monodromy factor {:.12} {:+.12}i on tail coordinate {}",
                factor.re,
                factor.im,
                report.monodromy.tail_index + 1
            );
            Ok(())
        }
        WitnessOutcome::Inconclusive(reason) => {
            out.emit(json!({"witness": null, "inconclusive": reason}));
            eprintln!("inconclusive: {reason}");
            Err(Fail::Inconclusive)
        }
    }
}

fn verify(out: &mut Output, cfg: &RunConfig, domain: &Path, full: bool) -> Result<(), Fail> {
    let e = load_domain(domain)?;
    let reports = run_all(&e, VerifyConfig { seed: cfg.seed, full });
    let mut failed = 0;
    for r in &reports {
        out.emit(serde_json::to_value(r).map_err(Error::from)?);
        let status = match (&r.vacuous, r.passed) {
            (Some(_), _) => "PASS (vacuous)",
            (None, true) => "PASS",
            (None, false) => "FAIL",
        };
        eprintln!(
            "{status:<15} {:<22} measured {:.3e} <= {:.1e}  ({} samples, {:.0} ms)",
            r.name, r.measured, r.threshold, r.samples, r.elapsed_ms
        );
        if !r.passed {
            failed += 1;
        }
    }
    if failed == 0 {
        Ok(())
    } else {
        eprintln!("{failed} suite(s) failed");
        Err(Fail::Negative)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = &cli.run;
    let mut out = Output { lines: Vec::new() };
    let result = match &cli.command {
        Command::CheckSu { matrix } => check_su(&mut out, cfg, matrix),
        Command::Extendible { domain, matrix } => extendible(&mut out, cfg, domain, matrix),
        Command::Lift { domain, matrix, point } => lift(&mut out, cfg, domain, matrix, point),
        Command::Classify { domain, point } => classify(&mut out, cfg, domain, point.as_deref()),
        Command::Witness { domain, matrix } => witness(&mut out, cfg, domain, matrix),
        Command::Verify { domain, full } => verify(&mut out, cfg, domain, *full),
    };

    let mut text = out.lines.join("\n");
    if !text.is_empty() {
        text.push('\n');
    }
    let written = match &cfg.out {
        Some(path) => fs::write(path, &text),
        None => std::io::stdout().write_all(text.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("error: cannot write output: {e}");
        return ExitCode::from(2);
    }

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Fail::Negative) => ExitCode::from(1),
        Err(Fail::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Fail::Inconclusive) => ExitCode::from(3),
    }
}
