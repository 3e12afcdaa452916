use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mtc_benjamin::harness::{self, RunSpec};
use mtc_benjamin::Exec;
use mtc_benjamin_cli::{output, read_config, CliError, Experiment};

#[derive(Parser)]
#[command(name = "mtcb", version, about = "Whole-line spectral solver for the Benjamin equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Convergence in n for one of the numbered examples.
    Sweep {
        #[arg(long)]
        example: u8,
        #[arg(long, value_delimiter = ',', required = true)]
        n_list: Vec<usize>,
        /// Base configuration; its `example` is replaced by `--example`.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Also write errors.csv and summary.json here.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long)]
        t_final: Option<f64>,
        /// Report wall_ms as 0.
        #[arg(long)]
        no_timing: bool,
        #[arg(long)]
        sequential: bool,
    },
    /// Compute one traveling wave described by a config `[wave]` table.
    Travelwave {
        #[arg(long)]
        config: PathBuf,
        /// Defaults to `output.dir`, then `./travelwave`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Quick structural checks of the discretization.
    Selftest,
}

fn main() -> ExitCode {
    match dispatch(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mtcb: error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn dispatch(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::Run { config, out } => {
            let cfg = read_config(&config)?;
            output::run(&cfg, &out)
        }
        Command::Sweep {
            example,
            n_list,
            config,
            out,
            tau,
            t_final,
            no_timing,
            sequential,
        } => {
            let mut base = match config {
                Some(path) => match read_config(&path)?.experiment {
                    Experiment::Run(spec) => RunSpec {
                        example,
                        ..*spec
                    },
                    Experiment::Wave(_) => {
                        return Err(CliError::Config {
                            path: "wave".into(),
                            message: "a sweep needs an example, not a traveling-wave spec".into(),
                        })
                    }
                },
                None => RunSpec::example(example).map_err(|e| CliError::Config {
                    path: "--example".into(),
                    message: e.to_string(),
                })?,
            };
            base.tau = tau.unwrap_or(base.tau);
            base.t_final = t_final.unwrap_or(base.t_final);
            base.record_timing &= !no_timing;
            if sequential {
                base.exec = Exec::Sequential;
            }
            base.validate()?;
            let report = output::sweep(&base, &n_list, out.as_ref(), &mut std::io::stdout().lock())?;
            for (n, msg) in &report.failures {
                eprintln!("mtcb: n = {n} failed: {msg}");
            }
            if report.is_partial() {
                return Err(CliError::Failed(format!(
                    "{} of {} sweep runs failed",
                    report.failures.len(),
                    n_list.len()
                )));
            }
            Ok(())
        }
        Command::Travelwave { config, out } => {
            let cfg = read_config(&config)?;
            let Experiment::Wave(w) = &cfg.experiment else {
                return Err(CliError::Config {
                    path: "wave".into(),
                    message: "travelwave needs a `[wave]` table".into(),
                });
            };
            let dir = out
                .or_else(|| cfg.output.dir.clone())
                .unwrap_or_else(|| PathBuf::from("travelwave"));
            output::run_wave(w, &cfg.output, &dir)
        }
        Command::Selftest => {
            let checks = harness::selftest();
            for c in &checks {
                let tag = if c.passed { "PASS" } else { "FAIL" };
                println!("{tag} {}: {}", c.name, c.detail);
            }
            let failed = checks.iter().filter(|c| !c.passed).count();
            if failed > 0 {
                return Err(CliError::Failed(format!("{failed} self-test check(s) failed")));
            }
            Ok(())
        }
    }
}
