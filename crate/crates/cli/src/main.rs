use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use hanoi_migrate::bench::{
    canonical_name, render_table, run_experiment, run_single, table_csv, table_markdown, write_outputs,
    write_runs_csv, BenchError, ExperimentConfig, InstanceSpec, OutputSpec, SolverSpec,
};
use hanoi_migrate::migration::{plan_to_migration_steps, MigrationProblem};
use hanoi_migrate::plan_io::{parse_plan, parse_problem, score_corpus, validate_plan, CorpusReport};

#[derive(Parser)]
#[command(name = "hanoi-migrate", version, about = "Plan dependency-ordered service migrations as Towers of Hanoi")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Md,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance with one solver and print the plan.
    Solve {
        #[arg(long, default_value_t = 3)]
        disks: usize,
        #[arg(long, default_value = "exact")]
        solver: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Treat the instance as a smart-city migration and print named steps.
        #[arg(long)]
        migration: bool,
        /// Take the solver's overrides from this experiment config.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Run an experiment config and write runs.csv, table.csv and table.md.
    Bench {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides the config's `output.dir`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Format of the table printed to stdout.
        #[arg(long, value_enum, default_value = "md")]
        format: Format,
    },
    /// Check a plan file against a problem file.
    Validate {
        problem: PathBuf,
        plan: PathBuf,
        /// Known optimal length, for the optimality verdict.
        #[arg(long)]
        optimal: Option<usize>,
    },
    /// Score a directory of `.hanoi-problem` / `.hanoi-plan` pairs.
    Score {
        dir: PathBuf,
        /// Also write the per-file CSV report here.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "md")]
        format: Format,
    },
}

enum Failure {
    /// Exit 1.
    Input(String),
    /// Exit 2.
    Internal(String),
}

impl From<BenchError> for Failure {
    fn from(e: BenchError) -> Self {
        match e {
            BenchError::UnknownSolver(_) | BenchError::Config(_) | BenchError::Toml(_) => Failure::Input(e.to_string()),
            other => Failure::Internal(other.to_string()),
        }
    }
}

fn internal(e: impl std::fmt::Display) -> Failure {
    Failure::Internal(e.to_string())
}

/// An unreadable config file is bad input, not an internal failure.
fn load_config(path: &Path) -> Result<ExperimentConfig, Failure> {
    ExperimentConfig::load(path).map_err(|e| match e {
        BenchError::Io(io) => Failure::Input(format!("{}: {io}", path.display())),
        other => other.into(),
    })
}

fn read_input(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn solve(
    disks: usize,
    solver: &str,
    seed: u64,
    migration: bool,
    config: Option<&Path>,
    format: Option<Format>,
) -> Result<(), Failure> {
    let name = canonical_name(solver)?;
    let mut spec = SolverSpec::named(name);
    if let Some(path) = config {
        let config = load_config(path)?;
        if let Some(s) = config.solvers.iter().find(|s| canonical_name(&s.name).ok() == Some(name)) {
            spec = s.clone();
        }
    }
    if disks == 0 || disks > hanoi_migrate::hanoi::DEFAULT_STATE_CAP {
        return Err(Failure::Input(format!("--disks must be 1..={}", hanoi_migrate::hanoi::DEFAULT_STATE_CAP)));
    }
    if matches!(name, "plan_corpus" | "ncm") {
        return Err(Failure::Input(format!("{name} does not solve single instances")));
    }
    let instance = if migration {
        InstanceSpec::SmartCity(disks)
    } else {
        InstanceSpec::Disks(disks)
    };
    let outcome = run_single(&spec, instance, seed, &OutputSpec::default())?;
    let report = &outcome.report;
    let mut out = io::stdout().lock();
    let steps: Vec<String> = outcome.plan.iter().flat_map(|p| p.steps.iter().map(|s| s.to_string())).collect();
    let io = |e: io::Error| internal(e);
    match format {
        Some(Format::Csv) => {
            writeln!(out, "step,action").map_err(io)?;
            for (i, s) in steps.iter().enumerate() {
                writeln!(out, "{},{s}", i + 1).map_err(io)?;
            }
        }
        Some(Format::Md) => {
            writeln!(out, "| step | action |\n|---|---|").map_err(io)?;
            for (i, s) in steps.iter().enumerate() {
                writeln!(out, "| {} | {s} |", i + 1).map_err(io)?;
            }
        }
        None => {
            for s in &steps {
                writeln!(out, "{s}").map_err(io)?;
            }
            if let (true, Some(moves)) = (migration, &outcome.moves) {
                let plan = plan_to_migration_steps(&MigrationProblem::smart_city(disks), moves).map_err(internal)?;
                write!(out, "{plan}").map_err(io)?;
            }
        }
    }
    eprintln!(
        "{} on {}: {} moves, validity {}, optimal {}",
        report.solver,
        report.instance,
        report.plan_length.map_or("-".into(), |l| l.to_string()),
        report.validity_percent.map_or("N/A".into(), |v| format!("{v:.0}%")),
        report.optimal.map_or("-".into(), |o| o.to_string()),
    );
    match &report.error {
        Some(e) => Err(Failure::Internal(format!("{} failed: {e}", report.solver))),
        None => Ok(()),
    }
}

fn bench(config: &Path, out: Option<PathBuf>, format: Format) -> Result<(), Failure> {
    let config = load_config(config)?;
    let outcomes = run_experiment(&config)?;
    let dir = out.or_else(|| config.output.dir.clone());
    if let Some(dir) = &dir {
        write_outputs(&outcomes, &config.output, dir)?;
    }
    let reports: Vec<_> = outcomes.into_iter().map(|o| o.report).collect();
    let table = render_table(&reports);
    let text = match format {
        Format::Md => table_markdown(&table),
        Format::Csv => table_csv(&table)?,
    };
    print!("{text}");
    if dir.is_none() {
        eprintln!("no output directory given; per-run rows follow");
        write_runs_csv(&reports, io::stderr())?;
    }
    Ok(())
}

fn validate(problem: &Path, plan: &Path, optimal: Option<usize>) -> Result<bool, Failure> {
    let doc = parse_problem(&read_input(problem)?).map_err(|e| Failure::Input(format!("{}: {e}", problem.display())))?;
    let plan_doc = parse_plan(&read_input(plan)?).map_err(|e| Failure::Input(format!("{}: {e}", plan.display())))?;
    let v = validate_plan(&doc, &plan_doc, optimal);
    match &v.failing_step {
        None => println!("valid: {} steps", plan_doc.steps.len()),
        Some(f) => println!("invalid at step {}: {}", f.index, f.reason),
    }
    if let Some(ratio) = v.optimality_ratio {
        println!("optimal: {} (ratio {ratio:.4})", v.optimal);
    }
    Ok(v.valid)
}

fn summary_md(r: &CorpusReport) -> String {
    let opt = |v: Option<f64>| v.map_or("N/A".into(), |x| format!("{x:.4}"));
    format!(
        "| metric | value |\n|---|---|\n| files | {} |\n| errors | {} |\n| validity | {:.2}% |\n| optimality | {:.2}% |\n| ROUGE-L | {} |\n| BLEU | {} |\n",
        r.total(),
        r.errors(),
        r.validity_percent(),
        r.optimality_percent(),
        opt(r.mean_rouge_l()),
        opt(r.mean_bleu()),
    )
}

fn score(dir: &Path, out: Option<&Path>, format: Format) -> Result<(), Failure> {
    if !dir.is_dir() {
        return Err(Failure::Input(format!("{} is not a directory", dir.display())));
    }
    let report = score_corpus(dir).map_err(internal)?;
    if let Some(path) = out {
        report.write_csv(fs::File::create(path).map_err(internal)?).map_err(internal)?;
    }
    match format {
        Format::Md => print!("{}", summary_md(&report)),
        Format::Csv => report.write_csv(io::stdout().lock()).map_err(internal)?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Solve {
            disks,
            solver,
            seed,
            migration,
            config,
            format,
        } => solve(disks, &solver, seed, migration, config.as_deref(), format),
        Command::Bench { config, out, format } => bench(&config, out, format),
        Command::Validate { problem, plan, optimal } => match validate(&problem, &plan, optimal) {
            Ok(true) => Ok(()),
            Ok(false) => return ExitCode::from(1),
            Err(e) => Err(e),
        },
        Command::Score { dir, out, format } => score(&dir, out.as_deref(), format),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Internal(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
