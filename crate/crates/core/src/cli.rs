//! Command-line front end: `solve`, `bench` and `plot`.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::bench::{default_suite, emit_subdivision_svg, instance, run_suite, suite_csv};
use crate::bnb::{solve, RunReport};
use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::expression::Objective;
use crate::geometry::BoxRegion;

#[derive(Debug, Parser)]
#[command(name = "convexify", version, about = "Find all global minimizers of a box-constrained function")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one problem and write the run report as JSON.
    Solve(SolveArgs),
    /// Run benchmark instances and write a CSV summary.
    Bench(BenchArgs),
    /// Draw the final subdivision of a two-dimensional report as SVG.
    Plot(PlotArgs),
}

#[derive(Debug, Args)]
pub struct Tuning {
    /// Termination width for the modified box width.
    #[arg(long, default_value_t = 1e-3)]
    pub eps: f64,
    /// Keep pooled candidates within this much of the best value.
    #[arg(long)]
    pub filter_tol: Option<f64>,
    /// Distance below which solutions merge into one cluster.
    #[arg(long)]
    pub cluster_delta: Option<f64>,
    #[arg(long)]
    pub max_outer_iters: Option<usize>,
    #[arg(long)]
    pub inner_tol: Option<f64>,
    #[arg(long)]
    pub inner_max_iters: Option<usize>,
    /// Relative outward widening of the Hessian interval bounds.
    #[arg(long)]
    pub hessian_slack: Option<f64>,
}

impl Tuning {
    pub fn config(&self) -> Result<SolverConfig> {
        let d = SolverConfig::default();
        let cfg = SolverConfig {
            epsilon: self.eps,
            filter_tol: self.filter_tol.unwrap_or(d.filter_tol),
            cluster_delta: self.cluster_delta.unwrap_or(d.cluster_delta),
            max_outer_iters: self.max_outer_iters.unwrap_or(d.max_outer_iters),
            inner_tol: self.inner_tol.unwrap_or(d.inner_tol),
            inner_max_iters: self.inner_max_iters.unwrap_or(d.inner_max_iters),
            hessian_slack: self.hessian_slack.unwrap_or(d.hessian_slack),
            ..d
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Objective in x1..xn, e.g. "x1^2 + sin(x2)".
    #[arg(long, required_unless_present = "instance", conflicts_with = "instance")]
    pub function: Option<String>,
    /// Search box, e.g. "[-5,5]x[-5,5]".
    #[arg(long = "box", required_unless_present = "instance", conflicts_with = "instance")]
    pub region: Option<String>,
    /// Use a registered benchmark instance instead of --function/--box.
    #[arg(long)]
    pub instance: Option<String>,
    #[command(flatten)]
    pub tuning: Tuning,
    /// Report destination; printed to stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Instance name, or `all` for every fixed-size instance.
    #[arg(long, default_value = "all")]
    pub instance: Vec<String>,
    #[command(flatten)]
    pub tuning: Tuning,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    #[arg(long)]
    pub report: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

fn write(path: &PathBuf, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn read(path: &PathBuf) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

fn run_solve(args: &SolveArgs) -> Result<RunReport> {
    let cfg = args.tuning.config()?;
    let (objective, domain) = match &args.instance {
        Some(name) => {
            let inst = instance(name)?;
            (inst.objective(), inst.domain)
        }
        None => {
            let domain: BoxRegion = args.region.as_deref().unwrap_or_default().parse()?;
            let text = args.function.as_deref().unwrap_or_default();
            (Objective::parse(text, domain.dimension())?, domain)
        }
    };
    let report = solve(&objective, &domain, &cfg)?;
    let json = report.to_json();
    match &args.out {
        Some(path) => {
            write(path, &json)?;
            println!("{}", report.summary());
        }
        None => {
            println!("{json}");
            eprintln!("{}", report.summary());
        }
    }
    Ok(report)
}

fn run_bench(args: &BenchArgs) -> Result<()> {
    let cfg = args.tuning.config()?;
    let names: Vec<String> = if args.instance.iter().any(|n| n.eq_ignore_ascii_case("all")) {
        default_suite()
    } else {
        args.instance.clone()
    };
    let rows: Vec<_> = run_suite(&names, &cfg)?.into_iter().map(|(row, _)| row).collect();
    for r in &rows {
        println!(
            "{:<14} iter={} n_eps={} f_min={} flag_ter={} wall_ms={}",
            r.name, r.iter, r.n_eps, r.f_min, r.flag_ter, r.wall_ms
        );
    }
    write(&args.out, &suite_csv(&rows))
}

fn run_plot(args: &PlotArgs) -> Result<()> {
    let report = RunReport::from_json(&read(&args.report)?)?;
    emit_subdivision_svg(&report, &args.out)
}

/// Exit status for an error: 1 for internal or write failures, 2 for bad input.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io(_) | Error::NonFiniteAlpha | Error::Empty => 1,
        _ => 2,
    }
}

pub fn execute(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Solve(args) => {
            run_solve(args)?;
        }
        Command::Bench(args) => run_bench(args)?,
        Command::Plot(args) => run_plot(args)?,
    }
    Ok(())
}

/// Parses `args` and runs the command, returning the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
