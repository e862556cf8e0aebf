use clap::Parser;
use hyperstab::io::to_json_string;
use hyperstab_cli::{run_from_path, Command};
use std::path::PathBuf;

/// Riemann solving, stability and thin-film experiments from a config file.
#[derive(Parser)]
#[command(name = "hyperstab", version)]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// Experiment config (TOML).
    config: PathBuf,
    /// Override a config value, e.g. `--set riemann.left=[0.5,1.2]`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Fine grid and long horizon (dx 0.001, dt 0.0005, t 30) for `simulate` and `compare`.
    #[arg(long)]
    full_scale: bool,
}

fn main() {
    let args = Args::parse();
    match run_from_path(args.command, &args.config, &args.overrides, args.full_scale) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
        }
        Err(e) => {
            let report = to_json_string(&e.report()).unwrap_or_else(|_| format!("{{\"message\": {:?}}}\n", e.to_string()));
            eprint!("{report}");
            std::process::exit(e.exit_code());
        }
    }
}
