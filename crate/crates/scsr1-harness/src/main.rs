//! `scsr1`: regenerate the experiment classes, solve them, verify the
//! optimality conditions, and emit table-shaped output.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use scsr1::solver::Norm;
use scsr1_harness::experiment::{ExperimentSpec, ExperimentTag};
use scsr1_harness::snapshot::{read_snapshot, verify_snapshot, write_snapshot, Snapshot};
use scsr1_harness::table::{emit, OutputFormat, TableRow};

#[derive(Parser)]
#[command(name = "scsr1", version, about = "Shape-changing L-SR1 trust-region subproblem solver harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExperimentArg {
    E1,
    E2,
    E3,
    E4,
    E5,
    E6,
}

impl From<ExperimentArg> for ExperimentTag {
    fn from(value: ExperimentArg) -> Self {
        match value {
            ExperimentArg::E1 => ExperimentTag::E1,
            ExperimentArg::E2 => ExperimentTag::E2,
            ExperimentArg::E3 => ExperimentTag::E3,
            ExperimentArg::E4 => ExperimentTag::E4,
            ExperimentArg::E5 => ExperimentTag::E5,
            ExperimentArg::E6 => ExperimentTag::E6,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum NormArg {
    P2,
    Pinf,
}

impl From<NormArg> for Norm {
    fn from(value: NormArg) -> Self {
        match value {
            NormArg::P2 => Norm::P2,
            NormArg::Pinf => Norm::PInf,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Pretty,
    Csv,
}

impl From<FormatArg> for OutputFormat {
    fn from(value: FormatArg) -> Self {
        match value {
            FormatArg::Pretty => OutputFormat::Pretty,
            FormatArg::Csv => OutputFormat::Csv,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate instances of one experiment class, solve, and verify.
    Run {
        /// Experiment class e1..e6.
        #[arg(long, value_enum)]
        experiment: ExperimentArg,
        /// Problem dimension.
        #[arg(long)]
        n: usize,
        /// Stored pair count.
        #[arg(long, default_value_t = 5)]
        pairs: usize,
        /// Target multiplicity of the extreme eigenvalue.
        #[arg(long, default_value_t = 2)]
        r: usize,
        /// Base seed; trials derive their own streams from it.
        #[arg(long)]
        seed: u64,
        /// Number of independent trials.
        #[arg(long, default_value_t = 1)]
        trials: u64,
        /// Trust-region norm.
        #[arg(long, value_enum, default_value_t = NormArg::P2)]
        norm: NormArg,
        #[arg(long, value_enum, default_value_t = FormatArg::Pretty)]
        format: FormatArg,
        /// Scale applied to the gradient after generation.
        #[arg(long, default_value_t = 1.0)]
        gscale: f64,
        /// Also save one snapshot file per trial into this directory.
        #[arg(long)]
        snapshot_dir: Option<PathBuf>,
    },
    /// Re-check a saved problem snapshot.
    Verify {
        /// Snapshot file produced by `run --snapshot-dir`.
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = NormArg::P2)]
        norm: NormArg,
        #[arg(long, value_enum, default_value_t = FormatArg::Pretty)]
        format: FormatArg,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            experiment,
            n,
            pairs,
            r,
            seed,
            trials,
            norm,
            format,
            gscale,
            snapshot_dir,
        } => {
            let spec = ExperimentSpec {
                tag: experiment.into(),
                n,
                pairs,
                r_target: r,
                seed,
                trials,
                norm: norm.into(),
                gscale,
                delta_policy: Default::default(),
            };
            let mut rows = Vec::with_capacity(trials as usize);
            for trial in 0..trials {
                match scsr1_harness::experiment::generate(&spec, trial) {
                    Ok(problem) => {
                        if let Some(dir) = &snapshot_dir {
                            if let Err(e) = std::fs::create_dir_all(dir).and_then(|_| {
                                let name = format!(
                                    "{}_n{}_seed{}_trial{}.snap",
                                    spec.tag, spec.n, spec.seed, trial
                                );
                                write_snapshot(&dir.join(name), &Snapshot::of_problem(&problem))
                                    .map_err(|e| std::io::Error::other(e.to_string()))
                            }) {
                                eprintln!("warning: snapshot not written: {e}");
                            }
                        }
                        rows.push(scsr1_harness::run::solve_one(&spec, &problem));
                    }
                    Err(e) => rows.push(TableRow::error_row(spec.n, e.to_string())),
                }
            }
            finish(rows, format.into())
        }
        Command::Verify {
            input,
            norm,
            format,
        } => {
            let row = read_snapshot(&input)
                .and_then(|snap| verify_snapshot(&snap, norm.into()))
                .unwrap_or_else(|e| TableRow::error_row(0, e.to_string()));
            finish(vec![row], format.into())
        }
    }
}

fn finish(rows: Vec<TableRow>, format: OutputFormat) -> ExitCode {
    print!("{}", emit(&rows, format));
    if rows.iter().all(|r| r.pass) {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
