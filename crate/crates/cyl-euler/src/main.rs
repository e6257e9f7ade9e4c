//! Thin command-line wrapper: `run`, `study`, and `verify` subcommands.

use std::path::PathBuf;
use std::process::ExitCode;

use cyl_euler::cli;
use cyl_euler::config::Overrides;

const USAGE: &str = "\
usage:
  cyl-euler run <config> [--gamma G] [--epsilon E] [--nx N] [--t-final T]
  cyl-euler study <config> [--gamma G] [--epsilon E] [--nx N] [--t-final T]
  cyl-euler verify <snapshot-dir> <config>

Set CYL_EULER_THREADS to cap worker parallelism (default: machine cores).
Exit codes: 0 all verifications pass, 1 verification failure,
2 configuration error, 3 solver blow-up.";

fn parse_overrides(args: &[String]) -> Result<Overrides, String> {
    let mut over = Overrides::default();
    let mut it = args.iter();
    while let Some(flag) = it.next() {
        let value = it
            .next()
            .ok_or_else(|| format!("flag {flag} needs a value"))?;
        match flag.as_str() {
            "--gamma" => over.gamma = Some(value.parse().map_err(|e| format!("--gamma: {e}"))?),
            "--epsilon" => {
                over.epsilon = Some(value.parse().map_err(|e| format!("--epsilon: {e}"))?)
            }
            "--nx" => over.nx = Some(value.parse().map_err(|e| format!("--nx: {e}"))?),
            "--t-final" => {
                over.t_final = Some(value.parse().map_err(|e| format!("--t-final: {e}"))?)
            }
            other => return Err(format!("unknown flag {other}")),
        }
    }
    Ok(over)
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("CYL_EULER_THREADS") {
        if let Ok(k) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
        }
    }
    let args: Vec<String> = std::env::args().skip(1).collect();
    let code = match args.split_first() {
        Some((cmd, rest)) => match (cmd.as_str(), rest) {
            ("run", [config, flags @ ..]) => match parse_overrides(flags) {
                Ok(over) => cli::cmd_run(&PathBuf::from(config), &over),
                Err(e) => {
                    eprintln!("error: {e}\n{USAGE}");
                    cli::EXIT_CONFIG
                }
            },
            ("study", [config, flags @ ..]) => match parse_overrides(flags) {
                Ok(over) => cli::cmd_study(&PathBuf::from(config), &over),
                Err(e) => {
                    eprintln!("error: {e}\n{USAGE}");
                    cli::EXIT_CONFIG
                }
            },
            ("verify", [snapshot_dir, config]) => {
                cli::cmd_verify(&PathBuf::from(snapshot_dir), &PathBuf::from(config))
            }
            _ => {
                eprintln!("{USAGE}");
                cli::EXIT_CONFIG
            }
        },
        None => {
            eprintln!("{USAGE}");
            cli::EXIT_CONFIG
        }
    };
    ExitCode::from(code as u8)
}
