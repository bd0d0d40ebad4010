//! Command-line front end: `verify`, `solve`, `bounds` and `kappa`.
//!
//! Exit status is 0 on success, 1 on a computational or certification
//! failure and 2 on a usage error.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bounds::{convergence_study, format_sig, row_fields, AlphaMode, Domain, EncloseOptions, Rounding, CSV_HEADER};
use crate::fem::{
    cr_interpolation_constant, reference_eigenvalue, solve_discrete_eigen_with, ElementKind, DEFAULT_KAPPA_DEPTH,
    REFERENCE_TRIANGLE,
};
use crate::framework::{random_instance, verify_maxmin_chain, verify_theorem, HilbertTriple, Subspace};
use crate::linalg::EigenOptions;
use crate::mesh::{load_mesh, unit_square, TriangleMesh};

#[derive(Parser, Debug)]
#[command(name = "eigbound", version, about = "Guaranteed two-sided bounds for Laplace eigenvalues")]
pub struct Cli {
    /// Seed for random instances and eigensolver start vectors.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Write the table here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    #[value(alias = "markdown")]
    Md,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Element {
    Cr,
    P1,
}

impl From<Element> for ElementKind {
    fn from(e: Element) -> Self {
        match e {
            Element::Cr => ElementKind::CrNonconforming,
            Element::P1 => ElementKind::P1Conforming,
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check the lower-bound inequality and its proof chain on random instances.
    Verify(VerifyArgs),
    /// Discrete Dirichlet eigenvalues on a mesh.
    Solve(SolveArgs),
    /// Enclosures on a sequence of red-refined meshes.
    Bounds(BoundsArgs),
    /// The CR interpolation constant on the reference triangle.
    Kappa(KappaArgs),
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    /// Largest dimension of the ambient space.
    #[arg(long, default_value_t = 30)]
    pub dim_max: usize,
}

#[derive(Args, Debug, Clone)]
pub struct MeshSource {
    /// Unit square with an N×N structured mesh.
    #[arg(long, value_name = "N", conflicts_with = "mesh")]
    pub square: Option<usize>,
    /// Mesh file in eigmesh format.
    #[arg(long, value_name = "FILE")]
    pub mesh: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    #[command(flatten)]
    pub source: MeshSource,
    #[arg(long, value_enum, default_value_t = Element::Cr)]
    pub element: Element,
    #[arg(short = 'k', long = "num-eigs", default_value_t = 5)]
    pub num_eigs: usize,
}

#[derive(Args, Debug)]
pub struct BoundsArgs {
    /// Defaults to `--square 4`.
    #[command(flatten)]
    pub source: MeshSource,
    #[arg(long, default_value_t = 4)]
    pub levels: usize,
    #[arg(short = 'k', long = "num-eigs", default_value_t = 5)]
    pub num_eigs: usize,
    /// `auto` or a positive number.
    #[arg(long, default_value = "auto", allow_hyphen_values = true)]
    pub alpha: String,
    /// Accept `--alpha 0` (only valid when the lower space is conforming).
    #[arg(long)]
    pub allow_zero_alpha: bool,
    /// Space whose eigenvalues are turned into lower bounds.
    #[arg(long, value_enum, default_value_t = Element::Cr)]
    pub lower_element: Element,
    /// Reference refinement depth for the automatic α.
    #[arg(long, default_value_t = DEFAULT_KAPPA_DEPTH)]
    pub kappa_depth: usize,
}

#[derive(Args, Debug)]
pub struct KappaArgs {
    #[arg(long, default_value_t = DEFAULT_KAPPA_DEPTH)]
    pub refine_depth: usize,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Failure(String),
}

fn failure(e: impl std::fmt::Display) -> CliError {
    CliError::Failure(e.to_string())
}

/// Rendered table plus status; `ok == false` maps to exit code 1.
#[derive(Debug)]
struct Report {
    table: String,
    ok: bool,
}

pub fn run() -> i32 {
    run_from(std::env::args_os())
}

pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
        }
    };
    let report = match execute(&cli) {
        Ok(r) => r,
        Err(CliError::Usage(m)) => {
            eprintln!("error: {m}");
            return 2;
        }
        Err(CliError::Failure(m)) => {
            eprintln!("error: {m}");
            return 1;
        }
    };
    let written = match &cli.out {
        Some(path) => fs::write(path, &report.table).map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => {
            print!("{}", report.table);
            Ok(())
        }
    };
    match written {
        Err(m) => {
            eprintln!("error: {m}");
            1
        }
        Ok(()) if report.ok => 0,
        Ok(()) => 1,
    }
}

fn execute(cli: &Cli) -> Result<Report, CliError> {
    match &cli.command {
        Command::Verify(a) => cmd_verify(a, cli.seed, cli.format),
        Command::Solve(a) => cmd_solve(a, cli.seed, cli.format),
        Command::Bounds(a) => cmd_bounds(a, cli.seed, cli.format),
        Command::Kappa(a) => cmd_kappa(a, cli.format),
    }
}

fn render(headers: &[&str], rows: &[Vec<String>], format: Format) -> String {
    let mut s = String::new();
    match format {
        Format::Csv => {
            let _ = writeln!(s, "{}", headers.join(","));
            for r in rows {
                let _ = writeln!(s, "{}", r.join(","));
            }
        }
        Format::Md => {
            let _ = writeln!(s, "| {} |", headers.join(" | "));
            let _ = writeln!(s, "|{}", "---|".repeat(headers.len()));
            for r in rows {
                let _ = writeln!(s, "| {} |", r.join(" | "));
            }
        }
    }
    s
}

fn nearest(x: f64) -> String {
    format_sig(x, Rounding::Nearest)
}

/// Dimensions of instance `seed`: `n` in `[2, dim_max]`, `dim W` and
/// `dim V` in `[1, n]`.
pub fn verify_instance_dims(seed: u64, dim_max: usize) -> (usize, usize, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..=dim_max);
    let p = rng.gen_range(1..=n);
    let q = rng.gen_range(1..=n);
    (n, p, q)
}

fn cmd_verify(a: &VerifyArgs, seed: u64, format: Format) -> Result<Report, CliError> {
    if a.trials == 0 {
        return Err(CliError::Usage("--trials must be at least 1".into()));
    }
    if a.dim_max < 2 {
        return Err(CliError::Usage("--dim-max must be at least 2".into()));
    }
    let headers = ["instance", "seed", "n", "dim_w", "dim_v", "k_max", "alpha", "worst_margin", "chain_checks", "holds"];
    let mut rows = Vec::with_capacity(a.trials);
    let mut failures = Vec::new();
    let mut worst: Option<(f64, u64)> = None;
    for i in 0..a.trials {
        let s = seed.wrapping_add(i as u64);
        let (n, p, q) = verify_instance_dims(s, a.dim_max);
        let t: HilbertTriple<f64> = random_instance(s, n, p, q).map_err(failure)?;
        let k_max = t.effective_dim(Subspace::W).min(t.effective_dim(Subspace::V));
        let report = verify_theorem(&t, k_max).map_err(failure)?;
        let mut holds = report.all_hold;
        for k in 1..=k_max {
            holds &= verify_maxmin_chain(&t, k).map_err(failure)?.all_hold;
        }
        if k_max > 0 && worst.map_or(true, |(m, _)| report.worst_margin < m) {
            worst = Some((report.worst_margin, s));
        }
        if !holds {
            failures.push(s);
        }
        rows.push(vec![
            i.to_string(),
            s.to_string(),
            n.to_string(),
            p.to_string(),
            q.to_string(),
            k_max.to_string(),
            format_sig(report.alpha, Rounding::Up),
            if k_max > 0 { nearest(report.worst_margin) } else { String::new() },
            k_max.to_string(),
            holds.to_string(),
        ]);
    }
    match worst {
        Some((m, s)) => eprintln!("verify: {} instances, {} violations, worst margin {} (seed {s})", a.trials, failures.len(), nearest(m)),
        None => eprintln!("verify: {} instances, {} violations", a.trials, failures.len()),
    }
    for s in &failures {
        eprintln!("violation at seed {s}");
    }
    Ok(Report { table: render(&headers, &rows, format), ok: failures.is_empty() })
}

fn load_source(src: &MeshSource, default_square: Option<usize>) -> Result<TriangleMesh, CliError> {
    match (src.square, &src.mesh, default_square) {
        (Some(0), _, _) => Err(CliError::Usage("--square must be at least 1".into())),
        (Some(n), None, _) => unit_square(n).map_err(failure),
        (None, Some(path), _) => {
            let loaded = load_mesh(path).map_err(failure)?;
            if loaded.reoriented > 0 {
                eprintln!("warning: reoriented {} clockwise triangles", loaded.reoriented);
            }
            Ok(loaded.mesh)
        }
        (None, None, Some(n)) => unit_square(n).map_err(failure),
        (None, None, None) => Err(CliError::Usage("one of --square or --mesh is required".into())),
        (Some(_), Some(_), _) => Err(CliError::Usage("--square and --mesh are mutually exclusive".into())),
    }
}

fn cmd_solve(a: &SolveArgs, seed: u64, format: Format) -> Result<Report, CliError> {
    if a.num_eigs == 0 {
        return Err(CliError::Usage("--num-eigs must be at least 1".into()));
    }
    let mesh = load_source(&a.source, None)?;
    let result = solve_discrete_eigen_with(&mesh, a.element.into(), a.num_eigs, &EigenOptions { seed }).map_err(failure)?;
    let rows: Vec<Vec<String>> = (0..result.len())
        .map(|i| vec![(i + 1).to_string(), nearest(result.values[i]), nearest(result.residuals[i])])
        .collect();
    Ok(Report { table: render(&["k", "eigenvalue", "residual"], &rows, format), ok: true })
}

fn parse_alpha(a: &BoundsArgs) -> Result<Option<f64>, CliError> {
    if a.alpha.eq_ignore_ascii_case("auto") {
        return Ok(None);
    }
    let alpha: f64 = a.alpha.parse().map_err(|_| CliError::Usage(format!("--alpha expects `auto` or a number, got `{}`", a.alpha)))?;
    if !alpha.is_finite() || alpha < 0.0 {
        return Err(CliError::Usage(format!("--alpha must be positive, got {}", a.alpha)));
    }
    if alpha == 0.0 && !a.allow_zero_alpha {
        return Err(CliError::Usage("--alpha 0 requires --allow-zero-alpha".into()));
    }
    Ok(Some(alpha))
}

fn cmd_bounds(a: &BoundsArgs, seed: u64, format: Format) -> Result<Report, CliError> {
    if a.levels == 0 {
        return Err(CliError::Usage("--levels must be at least 1".into()));
    }
    if a.num_eigs == 0 {
        return Err(CliError::Usage("--num-eigs must be at least 1".into()));
    }
    let fixed = parse_alpha(a)?;
    if fixed.is_none() && a.kappa_depth < 2 {
        return Err(CliError::Usage("--kappa-depth must be at least 2".into()));
    }
    let mesh = load_source(&a.source, Some(4))?;
    let alpha = match fixed {
        Some(alpha) => AlphaMode::Fixed { alpha, allow_zero: a.allow_zero_alpha },
        None => AlphaMode::AutoWith(cr_interpolation_constant(a.kappa_depth).map_err(failure)?),
    };
    let opts = EncloseOptions { alpha, lower_space: a.lower_element.into(), seed };
    let table = convergence_study(&Domain::Mesh(mesh), a.levels, a.num_eigs, &opts).map_err(failure)?;
    let headers: Vec<&str> = CSV_HEADER.split(',').collect();
    let rows: Vec<Vec<String>> = table.rows.iter().map(|r| row_fields(r).to_vec()).collect();
    let violations = table.violations();
    for r in &violations {
        eprintln!(
            "certification failure: level {} k {} exact {} outside [{}, {}]",
            r.level,
            r.k,
            nearest(r.exact.unwrap_or(f64::NAN)),
            format_sig(r.lower, Rounding::Down),
            format_sig(r.upper, Rounding::Up)
        );
    }
    if fixed.is_none() {
        eprintln!("note: lower bounds certified modulo the reference-constant discretization (depth {})", a.kappa_depth);
    }
    Ok(Report { table: render(&headers, &rows, format), ok: violations.is_empty() })
}

fn cmd_kappa(a: &KappaArgs, format: Format) -> Result<Report, CliError> {
    if a.refine_depth < 2 {
        return Err(CliError::Usage(format!("--refine-depth must be at least 2, got {}", a.refine_depth)));
    }
    let k = cr_interpolation_constant(a.refine_depth).map_err(failure)?;
    let previous = 1.0 / reference_eigenvalue(REFERENCE_TRIANGLE, a.refine_depth - 1, true).map_err(failure)?.sqrt();
    let change = (k.kappa_ref - previous).abs() / k.kappa_ref;
    let headers = ["refine_depth", "mu_min", "kappa_ref", "kappa_ref_previous", "relative_change", "inflated"];
    let row = vec![
        k.refine_depth.to_string(),
        nearest(k.mu_min),
        nearest(k.kappa_ref),
        nearest(previous),
        nearest(change),
        format_sig(k.inflated_value(), Rounding::Up),
    ];
    Ok(Report { table: render(&headers, &[row], format), ok: true })
}
