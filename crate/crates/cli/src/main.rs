use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use wnd_cli::config::{Assignments, ConfigError, ScenarioKind};
use wnd_cli::report;
use wnd_cli::run_scenario;

#[derive(Parser)]
#[command(name = "wnd", version, about = "Decoupled driven-oscillator scenarios and Lie-algebra closure reports")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its trajectory CSV.
    Run {
        /// Scenario name (see `wnd list`); may also come from the config file.
        scenario: Option<String>,
        /// `key=value` parameter overrides.
        #[arg(value_name = "KEY=VALUE")]
        params: Vec<String>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        cutoff: Option<String>,
        #[arg(long)]
        rtol: Option<String>,
        #[arg(long)]
        atol: Option<String>,
        #[arg(long = "dt-out")]
        dt_out: Option<String>,
    },
    /// Close a set of generators under commutation and print the structure.
    Closure {
        /// Generators such as `ad*a`, `0.5*ad^2`, `ad*a*(bd+b)`.
        #[arg(required = true)]
        generators: Vec<String>,
        #[arg(long, default_value_t = report::MAX_CLOSURE_DIM)]
        max_dim: usize,
    },
    /// List the available scenarios.
    List,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match cli.command {
        Command::List => {
            for k in ScenarioKind::ALL {
                println!("{:<22}{}", k.name(), k.description());
            }
            ExitCode::SUCCESS
        }
        Command::Closure { generators, max_dim } => {
            match report::closure(&generators, max_dim).and_then(|b| report::closure_report(&b)) {
                Ok(text) => {
                    print!("{text}");
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
            }
        }
        Command::Run { scenario, params, config, out, cutoff, rtol, atol, dt_out } => {
            let mut scenario = scenario;
            let mut params = params;
            // a leading `key=value` is a parameter, not a scenario name
            if scenario.as_deref().is_some_and(|s| s.contains('=')) {
                params.insert(0, scenario.take().unwrap_or_default());
            }
            let resolved = (|| {
                let mut a = Assignments::new();
                if let Some(path) = &config {
                    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io(format!("{}: {e}", path.display())))?;
                    a.parse_file(&text)?;
                }
                for p in &params {
                    a.parse_arg(p)?;
                }
                for (key, value) in [("cutoff", &cutoff), ("rtol", &rtol), ("atol", &atol), ("dt_out", &dt_out)] {
                    if let Some(v) = value {
                        a.set(key, v);
                    }
                }
                a.resolve(scenario.as_deref())
            })();
            let cfg = match resolved {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("config error: {e}");
                    return ExitCode::from(2);
                }
            };
            let output = match run_scenario(&cfg) {
                Ok(o) => o,
                Err(e) => {
                    match e.failure_time() {
                        Some(t) => eprintln!("solver error at t = {t}: {e}"),
                        None => eprintln!("solver error: {e}"),
                    }
                    return ExitCode::from(3);
                }
            };
            let path = out.unwrap_or_else(|| {
                let dir = std::env::var_os("WND_OUT_DIR").map(PathBuf::from).unwrap_or_else(|| PathBuf::from("."));
                dir.join(format!("{}.csv", cfg.kind))
            });
            if let Err(e) = std::fs::write(&path, output.to_csv()) {
                eprintln!("cannot write {}: {e}", path.display());
                return ExitCode::from(1);
            }
            println!("{}", output.summary());
            println!("wrote {}", path.display());
            ExitCode::SUCCESS
        }
    }
}
