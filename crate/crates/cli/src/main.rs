//! `gcwave` command-line harness: convergence tables, energy histories and
//! time quadrature rules.

mod config;
mod format;

use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gcwave::diagnostics::energy;
use gcwave::polytime::{QuadKind, QuadRule};
use gcwave::slabsolver::{ProblemKind, Scheme};
use gcwave::study::{final_eoc, run_study, solve_level, Conventions, LevelResult, Method};
use thiserror::Error;

use crate::config::{ConfigFile, Levels, StudyArgs, StudyDefaults};
use crate::format::{order, sci};

const COLUMNS: [&str; 6] = ["e0_linf_l2", "e1_linf_l2", "energy_linf", "e0_l2_l2", "e1_l2_l2", "energy_l2"];

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Solver(gcwave::Error),
    #[error("{0}")]
    Io(#[from] io::Error),
    #[error("{0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Io(_) | CliError::Csv(_) => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "gcwave", version, about = "Space-time finite element studies for the wave equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a convergence study and write one CSV row per level plus an EOC row
    Convergence(ConvergenceArgs),
    /// Print the discrete energy at every slab end point
    Energy(EnergyArgs),
    /// Print nodes, weights and exactness of the four time quadrature rules
    Rules {
        #[arg(long)]
        k: usize,
    },
}

#[derive(Debug, clap::Args)]
struct ConvergenceArgs {
    #[command(flatten)]
    study: StudyArgs,
    /// Refinement levels, e.g. 0..3 or 0,2,4
    #[arg(long)]
    levels: Option<Levels>,
    /// Uniform samples per slab for the L∞ norms
    #[arg(long)]
    samples_per_slab: Option<usize>,
    /// Sample 1000 points per slab (grid spacing 0.001 at τ = 0.1)
    #[arg(long)]
    paper_grid: bool,
    /// Shortest round-trip numbers instead of 4 significant digits
    #[arg(long)]
    full_precision: bool,
    /// CSV destination; standard output when absent
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
struct EnergyArgs {
    #[command(flatten)]
    study: StudyArgs,
    #[arg(long)]
    level: Option<usize>,
    #[arg(long)]
    full_precision: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let line = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("invalid arguments");
            eprintln!("{}", line.trim());
            return ExitCode::from(2);
        }
    };
    let result = match cli.command {
        Command::Convergence(args) => convergence(args),
        Command::Energy(args) => energy_history(args),
        Command::Rules { k } => rules(k),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn open_config(args: &StudyArgs) -> Result<ConfigFile, CliError> {
    match &args.config {
        Some(p) => ConfigFile::load(p),
        None => Ok(ConfigFile::default()),
    }
}

fn convergence(args: ConvergenceArgs) -> Result<(), CliError> {
    let mut file = open_config(&args.study)?;
    let levels = file.pick("levels", args.levels)?.map(|l| l.0).unwrap_or_else(|| (0..=3).collect());
    let defaults = StudyDefaults {
        scheme: Method::Direct(Scheme::CgpC1),
        problem: ProblemKind::ExSol1,
        conventions: Conventions::Reference,
    };
    let mut cfg = args.study.resolve(&mut file, defaults, levels)?;
    let samples = file.pick("samples-per-slab", args.samples_per_slab)?;
    let paper_grid = file.pick_flag("paper-grid", args.paper_grid)?;
    if let Some(s) = config::sampling(samples, paper_grid)? {
        cfg.norms = cfg.norms.with_sampling(s);
    }
    let full = file.pick_flag("full-precision", args.full_precision)?;
    let output = file.pick("output", args.output)?;
    file.finish()?;
    config::validate(&cfg)?;

    let to_file = output.is_some();
    let sink: Box<dyn Write> = match &output {
        Some(p) => Box::new(
            File::create(p).map_err(|e| CliError::Config(format!("cannot create {}: {e}", p.display())))?,
        ),
        None => Box::new(io::stdout().lock()),
    };
    let mut csv = csv::Writer::from_writer(sink);
    let mut header = vec!["tau", "h"];
    header.extend(COLUMNS);
    csv.write_record(&header)?;
    csv.flush()?;

    let mut failure = None;
    let results = run_study(&cfg, |r: &LevelResult| {
        let rep = &r.report;
        let mut row = vec![sci(rep.tau, 4, full), sci(rep.h, 4, full)];
        row.extend(rep.columns().iter().map(|v| sci(*v, 4, full)));
        if let Err(e) = csv.write_record(&row).and_then(|_| csv.flush().map_err(csv::Error::from)) {
            failure.get_or_insert(e);
        }
        if to_file {
            println!(
                "level {}: n_dof {} slabs {} {}",
                r.level,
                r.n_dof,
                r.n_slabs,
                COLUMNS
                    .iter()
                    .zip(rep.columns())
                    .map(|(c, v)| format!("{c} {}", sci(v, 4, full)))
                    .collect::<Vec<_>>()
                    .join(" ")
            );
        }
    })
    .map_err(CliError::Solver)?;
    if let Some(e) = failure {
        return Err(e.into());
    }

    let orders = final_eoc(&results);
    let mut row = vec!["eoc".to_string(), String::new()];
    row.extend(orders.iter().map(|o| order(*o, full)));
    csv.write_record(&row)?;
    csv.flush()?;
    if to_file {
        println!(
            "eoc {}",
            COLUMNS
                .iter()
                .zip(orders)
                .map(|(c, o)| format!("{c} {}", order(o, full)))
                .collect::<Vec<_>>()
                .join(" ")
        );
    }
    Ok(())
}

fn energy_history(args: EnergyArgs) -> Result<(), CliError> {
    let mut file = open_config(&args.study)?;
    let level = file.pick("level", args.level)?.unwrap_or(0);
    let defaults = StudyDefaults {
        scheme: Method::Direct(Scheme::CgpC1),
        problem: ProblemKind::StandingWave,
        conventions: Conventions::Standard,
    };
    let cfg = args.study.resolve(&mut file, defaults, vec![level])?;
    let full = file.pick_flag("full-precision", args.full_precision)?;
    file.finish()?;
    config::validate(&cfg)?;

    let run = solve_level(&cfg, level).map_err(CliError::Solver)?;
    let mut csv = csv::Writer::from_writer(io::stdout().lock());
    csv.write_record(["n", "t", "energy"])?;
    for (n, t) in run.solution.time_mesh().into_iter().enumerate() {
        let e = energy(&run.solution, &run.ops, t).map_err(CliError::Solver)?;
        csv.write_record([n.to_string(), sci(t, 4, full), sci(e, 10, full)])?;
    }
    csv.flush()?;
    Ok(())
}

fn rules(k: usize) -> Result<(), CliError> {
    let built: Vec<QuadRule> = QuadKind::ALL
        .into_iter()
        .filter(|kind| k >= kind.min_k())
        .map(|kind| QuadRule::build(kind, k))
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Config(e.to_string()))?;
    if built.is_empty() {
        return Err(CliError::Config(format!("no quadrature rule is defined for k = {k}")));
    }
    let mut csv = csv::Writer::from_writer(io::stdout().lock());
    csv.write_record(["rule", "exactness", "entry", "node", "weight"])?;
    for rule in &built {
        let name = rule.kind.name();
        let exact = rule.exactness_degree.to_string();
        for (x, w) in rule.nodes.iter().zip(&rule.value_weights) {
            csv.write_record([name, &exact, "value", &sci(*x, 0, true), &sci(*w, 0, true)])?;
        }
        if rule.kind.uses_derivatives() {
            for (x, w) in [(-1.0, rule.deriv_weight_left), (1.0, rule.deriv_weight_right)] {
                csv.write_record([name, &exact, "derivative", &sci(x, 0, true), &sci(w, 0, true)])?;
            }
        }
    }
    csv.flush()?;
    Ok(())
}
