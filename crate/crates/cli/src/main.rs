use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use viable_sde_cli::builtins::list_builtins;
use viable_sde_cli::config::PolySpec;
use viable_sde_cli::{check_weights, load_experiment, run_experiment, CliError, CliResult};

#[derive(Parser)]
#[command(name = "viable-sde", version, about = "Simulate and check SDEs that stay inside polyhedra")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Suppress the summary on stdout.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run a builtin or a JSON config.
    Run {
        config: String,
        /// Output root; artifacts go to <out>/<name>/.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the configured seeds.
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
    },
    /// Report every config problem without running.
    Validate { config: String },
    /// List builtin configs.
    List,
    /// Boundary conditions of a stored drift network, raw and under WSP.
    Check {
        weights: PathBuf,
        /// Diffusion network (softplus output); constant 1 when absent.
        #[arg(long)]
        diffusion: Option<PathBuf>,
        /// Polyhedron as JSON, e.g. '{"box":{"lo":[0],"hi":[1]}}'; unit box by default.
        #[arg(long)]
        polyhedron: Option<String>,
    },
}

fn run(cli: Cli) -> CliResult<ExitCode> {
    match cli.command {
        Command::Run { config, out, seeds } => {
            let mut exp = load_experiment(&config)?;
            if let Some(seeds) = seeds {
                exp.set_seeds(seeds);
            }
            let out = out.or_else(|| exp.output().cloned()).unwrap_or_else(|| PathBuf::from("out"));
            let summary = run_experiment(&exp, &out)?;
            if !cli.quiet {
                print!("{}", summary.text());
                println!("wrote {} file(s) to {}", summary.files.len(), out.join(exp.name()).display());
            }
            match summary.failures() {
                0 => Ok(ExitCode::SUCCESS),
                n => Err(CliError::Assertions(n)),
            }
        }
        Command::Validate { config } => {
            let problems = load_experiment(&config)?.validate();
            if problems.is_empty() {
                if !cli.quiet {
                    println!("ok");
                }
                Ok(ExitCode::SUCCESS)
            } else {
                Err(CliError::Invalid(problems))
            }
        }
        Command::List => {
            for name in list_builtins() {
                println!("{name}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Check {
            weights,
            diffusion,
            polyhedron,
        } => {
            let poly = match polyhedron {
                Some(text) => Some(
                    serde_json::from_str::<PolySpec>(&text)
                        .map_err(|e| CliError::Config(format!("--polyhedron: {e}")))?
                        .build()?,
                ),
                None => None,
            };
            let summary = check_weights(&weights, diffusion.as_deref(), poly)?;
            if !cli.quiet {
                print!("{}", summary.text());
            }
            let wsp_fail = summary.lines.iter().filter(|l| l.name.starts_with("wsp.") && !l.pass).count();
            match wsp_fail {
                0 => Ok(ExitCode::SUCCESS),
                n => Err(CliError::Assertions(n)),
            }
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
