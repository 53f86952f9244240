//! Command-line definition and dispatch.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::commands;
use crate::report::{Format, Report};
use crate::suite::{render_matrix, run_suite, suite_report, SuiteOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "embezzle-lab", version, about = "Embezzlement catalysts, families and bound checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Cyclic-shift catalyst errors for seeded random pairs.
    Catalyst(CatalystArgs),
    /// Transitions through a cover-based LTW family.
    Ltw(LtwArgs),
    /// Convergence of the van Dam–Hayden restrictions to the trace.
    Vdh(VdhArgs),
    /// Diagonal catalysts.
    Diagonal {
        #[command(subcommand)]
        command: DiagonalCommand,
    },
    /// Oracle probes.
    Probe {
        #[command(subcommand)]
        command: ProbeCommand,
    },
    /// Run every acceptance criterion.
    Suite(SuiteArgs),
}

#[derive(Debug, Args)]
pub struct CatalystArgs {
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    /// Number of parties.
    #[arg(long = "N", default_value_t = 2)]
    pub n_parties: usize,
    /// Catalyst lengths (comma separated).
    #[arg(long, value_delimiter = ',', default_value = "8")]
    pub n: Vec<usize>,
    #[arg(long, default_value_t = 10)]
    pub pairs: usize,
    #[arg(long)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct LtwArgs {
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    #[arg(long = "N", default_value_t = 2)]
    pub n_parties: usize,
    #[arg(long)]
    pub epsilon: f64,
    /// Number of counting entries available to the family.
    #[arg(long, default_value_t = 10_000_000)]
    pub prefix: usize,
    #[arg(long, default_value_t = 3)]
    pub pairs: usize,
    #[arg(long)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct VdhArgs {
    #[arg(long, default_value_t = 1)]
    pub m: u32,
    #[arg(long = "n-exp", value_delimiter = ',', required = true)]
    pub n_exp: Vec<u32>,
}

#[derive(Debug, Subcommand)]
pub enum DiagonalCommand {
    /// Closed-form spectrum of the point-mass to uniform catalyst.
    Spectrum {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
    },
    /// Shift errors; point mass to uniform unless a seed is given.
    Error {
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 10)]
        pairs: usize,
    },
    /// Top-eigenvalue ratios between two local dimensions.
    Ratio {
        #[arg(long)]
        d1: usize,
        #[arg(long)]
        d2: usize,
        #[arg(long = "n-max", default_value_t = 50)]
        n_max: usize,
    },
    /// Mixed target from trace embezzlers and a polar lift.
    Mixed {
        /// Target probabilities (comma separated).
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        target: Vec<f64>,
        #[arg(long)]
        epsilon: f64,
        #[arg(long, default_value_t = 10_000)]
        prefix: usize,
        #[arg(long, default_value_t = 1e-9)]
        tolerance: f64,
    },
}

#[derive(Debug, Subcommand)]
pub enum ProbeCommand {
    /// Sorted-Schmidt optimum against local-unitary search.
    Optimal {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        instances: usize,
        #[arg(long, default_value_t = 20)]
        restarts: usize,
    },
    /// Polar lift of random near-embedding contractions.
    Polar {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, value_delimiter = ',', default_value = "0.01,0.001")]
        epsilon: Vec<f64>,
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long, default_value_t = 2)]
        d: usize,
    },
}

#[derive(Debug, Args)]
pub struct SuiteArgs {
    #[arg(long, default_value_t = 2024)]
    pub seed: u64,
    #[arg(long, default_value_t = 8)]
    pub workers: usize,
    /// Replace one criterion's tolerances with negative values.
    #[arg(long, hide = true)]
    pub corrupt: Option<usize>,
}

fn report_for(command: &Command) -> embezzle_core::Result<Report> {
    match command {
        Command::Catalyst(a) => commands::catalyst(a.d, a.n_parties, &a.n, a.pairs, a.seed),
        Command::Ltw(a) => commands::ltw(a.d, a.n_parties, a.epsilon, a.prefix, a.pairs, a.seed),
        Command::Vdh(a) => commands::vdh(a.m, &a.n_exp),
        Command::Diagonal { command } => match command {
            DiagonalCommand::Spectrum { n, d } => commands::diagonal_spectrum(*n, *d),
            DiagonalCommand::Error { n, d, seed, pairs } => commands::diagonal_error(n, *d, *seed, *pairs),
            DiagonalCommand::Ratio { d1, d2, n_max } => commands::diagonal_ratio(*d1, *d2, *n_max),
            DiagonalCommand::Mixed { target, epsilon, prefix, tolerance } => {
                commands::diagonal_mixed(target, *epsilon, *prefix, *tolerance)
            }
        },
        Command::Probe { command } => match command {
            ProbeCommand::Optimal { seed, instances, restarts } => commands::probe_optimal(*seed, *instances, *restarts),
            ProbeCommand::Polar { seed, trials, epsilon, k, d } => commands::probe_polar(*seed, *trials, epsilon, *k, *d),
        },
        Command::Suite(_) => unreachable!("the suite is dispatched separately"),
    }
}

fn emit(cli: &Cli, report: &Report, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let text = report.render(cli.format);
    let written = match &cli.out {
        Some(path) => std::fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => stdout.write_all(text.as_bytes()).map_err(|e| e.to_string()),
    };
    if let Err(e) = written {
        let _ = writeln!(stderr, "error: {e}");
        return EXIT_CONFIG;
    }
    let mut code = EXIT_OK;
    for v in report.violations() {
        let _ = writeln!(
            stderr,
            "bound violated: {}: {} (lhs {} > rhs {}) [{}]",
            v.name, v.inequality, v.lhs, v.rhs, v.inputs
        );
        code = EXIT_VIOLATION;
    }
    code
}

/// Execute a parsed command; returns the process exit code.
pub fn run(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    if let Command::Suite(a) = &cli.command {
        let opts = SuiteOptions {
            seed: a.seed,
            workers: a.workers,
            corrupt: a.corrupt,
        };
        return match run_suite(&opts) {
            Ok(outcomes) => {
                let _ = stderr.write_all(render_matrix(&outcomes).as_bytes());
                let report = suite_report(&opts, &outcomes);
                let code = emit(cli, &report, stdout, &mut std::io::sink());
                for o in outcomes.iter().filter(|o| !o.passed) {
                    let _ = writeln!(stderr, "failed: criterion {} ({})", o.id, o.name);
                }
                if outcomes.iter().all(|o| o.passed) {
                    code
                } else {
                    EXIT_VIOLATION
                }
            }
            Err(e) => {
                let _ = writeln!(stderr, "configuration error: {e}");
                EXIT_CONFIG
            }
        };
    }
    match report_for(&cli.command) {
        Ok(report) => emit(cli, &report, stdout, stderr),
        Err(e) => {
            let _ = writeln!(stderr, "configuration error: {e}");
            EXIT_CONFIG
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::Check;

    #[test]
    fn violations_exit_1_and_name_the_inequality() {
        let cli = Cli::parse_from(["embezzle-lab", "vdh", "--n-exp", "4"]);
        let mut report = Report::new("demo", None, Default::default());
        report.checks.push(Check::le("shift", "exact_error <= 2/(n-1)", 0.9, 0.5, "n=5 d=2".into()));
        let (mut out, mut err) = (Vec::new(), Vec::new());
        assert_eq!(emit(&cli, &report, &mut out, &mut err), EXIT_VIOLATION);
        let msg = String::from_utf8(err).unwrap();
        assert!(msg.contains("bound violated: shift: exact_error <= 2/(n-1)") && msg.contains("n=5 d=2"));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(Cli::try_parse_from(["embezzle-lab", "vdh", "--n-exp", "4", "--colour", "red"]).is_err());
        assert!(Cli::try_parse_from(["embezzle-lab", "ltw", "--epsilon", "0.5"]).is_err());
    }
}
