//! Command-line front end: `solve`, `analyze` and `export-sdpa`.

use std::f64::consts::PI;
use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dynframe_core::analysis::{eigenpairs, loaded_nodes, time_histories, worst_case};
use dynframe_core::benchmarks::{builtin_benchmark, builtin_benchmark_self_consistent, Benchmark, Variant};
use dynframe_core::certify::{certify_loop_with_clock, check_feasible, initial_feasible, CertifyOptions, Verdict};
use dynframe_core::constraints::{compactification_lmis, load_matrix, response_lmis};
use dynframe_core::fem::assemble_pencil;
use dynframe_core::model::FrameProblem;
use dynframe_core::relaxation::{build_relaxation, min_order, RelaxationOptions};

use crate::error::{read_file, write_file, AppError, AppResult};
use crate::{problem_file, report, sdpa};

#[derive(Debug, Parser)]
#[command(name = "dynframe", version, about = "Certified minimum-weight frame design")]
pub struct Cli {
    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the bound loop and write `certificate.json` and `table.txt`.
    Solve(SolveArgs),
    /// Eigen and worst-case analysis of a fixed design.
    Analyze(AnalyzeArgs),
    /// Write a relaxation as `problem.dat-s`.
    ExportSdpa(ExportArgs),
}

#[derive(Debug, Args)]
pub struct Source {
    /// Built-in benchmark as NAME:VARIANT, e.g. ten-segment:free-vibration.
    #[arg(long, conflicts_with = "problem", required_unless_present = "problem")]
    pub builtin: Option<String>,
    /// Problem document (JSON).
    #[arg(long)]
    pub problem: Option<PathBuf>,
    /// Use the load radius for which the dynamic variants match the free-vibration masses.
    #[arg(long, requires = "builtin")]
    pub self_consistent: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Backend {
    /// Built-in primal-dual interior-point method.
    Ipm,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub source: Source,
    #[arg(long)]
    pub r_min: Option<usize>,
    #[arg(long, default_value_t = 3)]
    pub r_max: usize,
    #[arg(long, default_value_t = 0.01)]
    pub eps: f64,
    #[arg(long, value_enum, default_value_t = Backend::Ipm)]
    pub backend: Backend,
    /// Relative tolerance of the SDP solver.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long, default_value_t = 20)]
    pub max_relaxations: usize,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub source: Source,
    /// Design vector: JSON array of areas in m^2.
    #[arg(long)]
    pub design: PathBuf,
    /// Excitation frequency override (rad/s); 0 gives the static response.
    #[arg(long)]
    pub omega: Option<f64>,
    #[arg(long, default_value_t = 2001)]
    pub samples: usize,
    /// Number of eigenpairs to report.
    #[arg(long, default_value_t = 6)]
    pub modes: usize,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[command(flatten)]
    pub source: Source,
    /// Relaxation order; defaults to the smallest admissible one.
    #[arg(long)]
    pub r: Option<usize>,
    /// Weight cap for the compactification; defaults to the problem's cap or an initial feasible weight.
    #[arg(long)]
    pub weight_cap: Option<f64>,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

pub fn parse_builtin(spec: &str) -> AppResult<(Benchmark, Variant)> {
    let (b, v) = spec.split_once(':').unwrap_or((spec, "free-vibration"));
    let b = b.parse::<Benchmark>().map_err(|_| AppError::Usage(format!("unknown benchmark `{b}`")))?;
    let v = v.parse::<Variant>().map_err(|_| AppError::Usage(format!("unknown variant `{v}`")))?;
    Ok((b, v))
}

pub fn load_problem(source: &Source) -> AppResult<FrameProblem> {
    match (&source.builtin, &source.problem) {
        (Some(spec), None) => {
            let (b, v) = parse_builtin(spec)?;
            Ok(if source.self_consistent { builtin_benchmark_self_consistent(b, v) } else { builtin_benchmark(b, v) })
        }
        (None, Some(path)) => problem_file::parse_problem(&read_file(path)?),
        _ => Err(AppError::Usage("give exactly one of --builtin or --problem".into())),
    }
}

fn ensure_dir(dir: &Path) -> AppResult<()> {
    std::fs::create_dir_all(dir).map_err(|source| AppError::Io { path: dir.to_path_buf(), source })
}

pub fn cmd_solve(args: &SolveArgs) -> AppResult<Verdict> {
    let problem = load_problem(&args.source)?;
    if args.eps.is_nan() || args.eps <= 0.0 {
        return Err(AppError::Usage("--eps must be positive".into()));
    }
    let Backend::Ipm = args.backend;
    let mut options =
        CertifyOptions { eps: args.eps, r_min: args.r_min, r_max: args.r_max, max_relaxations: args.max_relaxations, ..Default::default() };
    options.ipm.tolerance = args.tol;
    let start = Instant::now();
    let clock = move || start.elapsed().as_secs_f64();
    let cert = certify_loop_with_clock(&problem, &options, Some(&clock))?;
    ensure_dir(&args.out)?;
    write_file(&args.out.join("certificate.json"), &report::certificate_json(&problem.name, &cert))?;
    let table = report::history_table(&cert);
    write_file(&args.out.join("table.txt"), &table)?;
    print!("{table}");
    Ok(cert.verdict)
}

pub fn cmd_analyze(args: &AnalyzeArgs) -> AppResult<()> {
    let problem = load_problem(&args.source)?;
    let design = problem_file::parse_design(&read_file(&args.design)?)?;
    let pencil = assemble_pencil(&problem)?;
    if design.len() != pencil.n_vars() {
        return Err(AppError::Usage(format!("design has {} entries, the problem has {} variables", design.len(), pencil.n_vars())));
    }
    ensure_dir(&args.out)?;
    let eig = eigenpairs(&pencil, &design, args.modes)?;
    write_file(&args.out.join("eigen.json"), &report::eigen_json(&eig))?;
    let freqs = eig.frequencies_hz();
    println!("frequencies (Hz): {}", freqs.iter().map(|f| format!("{f:.3}")).collect::<Vec<_>>().join(" "));

    if let Some(load) = &problem.load {
        let omega = args.omega.unwrap_or(load.omega);
        let q = load_matrix(&problem, &pencil)?;
        let nodes = loaded_nodes(&problem, &pencil);
        let wc = worst_case(&pencil, &design, &q, omega, &nodes)?;
        let radius = load.columns.first().map_or(1.0, |c| c.scale.abs());
        let history = if omega > 0.0 {
            let h = time_histories(wc.d_r, wc.p_r, omega, load.phase, args.samples, 2.0 * PI / omega)?;
            write_file(&args.out.join("history.csv"), &report::history_csv(&h))?;
            Some(h)
        } else {
            None
        };
        write_file(&args.out.join("worst_case.json"), &report::worst_case_json(&wc, radius, history.as_ref()))?;
        println!("worst case: d_R = {:e} N m, p_R = {:e} W", wc.d_r, wc.p_r);
        for l in &wc.loads {
            println!("  node {}: {:.3} N at {:.2} deg", l.node, l.magnitude, l.angle_deg);
        }
    }

    if let Ok(lmis) = response_lmis(&problem, &pencil) {
        let feas = check_feasible(&lmis, &design, 1e-7)?;
        if !feas.feasible {
            return Err(AppError::Design(format!("constraints violated (margin {:e})", feas.margin)));
        }
    }
    Ok(())
}

pub fn cmd_export_sdpa(args: &ExportArgs) -> AppResult<PathBuf> {
    let problem = load_problem(&args.source)?;
    let pencil = assemble_pencil(&problem)?;
    let lmis = response_lmis(&problem, &pencil)?;
    let cap = match args.weight_cap.or(problem.weight_cap) {
        Some(c) => c,
        None => initial_feasible(&pencil, &lmis, None)?.1,
    };
    let mut all = lmis.clone();
    all.extend(compactification_lmis(&pencil, cap)?);
    let r = args.r.unwrap_or_else(|| min_order(&all));
    let relax = build_relaxation(&pencil, &all, r, &RelaxationOptions::default())?;
    ensure_dir(&args.out)?;
    let path = args.out.join("problem.dat-s");
    write_file(&path, &sdpa::write_sdpa(&relax.sdp))?;
    Ok(path)
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();
}

/// Runs the CLI and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    init_logging(cli.verbose);
    let result = match &cli.command {
        Command::Solve(a) => cmd_solve(a).map(|v| if v == Verdict::Failed { 1 } else { 0 }),
        Command::Analyze(a) => cmd_analyze(a).map(|_| 0),
        Command::ExportSdpa(a) => cmd_export_sdpa(a).map(|p| {
            println!("wrote {}", p.display());
            0
        }),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
