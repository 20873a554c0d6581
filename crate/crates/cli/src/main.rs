//! `splasso`: generate sparsified designs, solve the Lasso, run the witness
//! construction and Monte Carlo sweeps from the command line.
//!
//! Parameters resolve as defaults ← `--config` file ← flags. Exit status is
//! 0 on success, 1 for runtime and data errors, 2 for usage errors.

mod commands;
mod config;

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Arg, ArgAction, ArgMatches, Command};

use config::{CliConfig, CliError, COMMANDS};

fn cli() -> Command {
    let mut cmd = Command::new("splasso")
        .about("Support recovery with sparsified measurement matrices")
        .version(env!("CARGO_PKG_VERSION"))
        .subcommand_required(true)
        .arg_required_else_help(true)
        .arg(
            Arg::new("config")
                .long("config")
                .value_name("PATH")
                .global(true)
                .value_parser(clap::value_parser!(PathBuf))
                .help("TOML file with one [section] per subcommand"),
        );
    for spec in COMMANDS {
        let mut sub = Command::new(spec.name).about(spec.about);
        for k in spec.keys {
            let help = match k.default {
                Some(d) => format!("{} [default: {d}]", k.help),
                None => k.help.to_string(),
            };
            let mut arg = Arg::new(k.key)
                .long(k.flag)
                .value_name("VALUE")
                .help(help);
            if k.flag != k.key {
                arg = arg.alias(k.key);
            }
            sub = sub.arg(arg);
        }
        if spec.name == "sweep" {
            sub = sub.arg(
                Arg::new("dry_run")
                    .long("dry-run")
                    .action(ArgAction::SetTrue)
                    .help("print the resolved grid and exit without writing files"),
            );
        }
        cmd = cmd.subcommand(sub);
    }
    cmd
}

fn resolve(name: &str, m: &ArgMatches) -> Result<CliConfig, CliError> {
    let spec = config::command_spec(name).expect("subcommands come from COMMANDS");
    let file = match m.get_one::<PathBuf>("config") {
        Some(path) => config::load_config(path, name)?,
        None => Vec::new(),
    };
    let flags: Vec<(&'static str, String)> = spec
        .keys
        .iter()
        .filter_map(|k| m.get_one::<String>(k.key).map(|v| (k.key, v.clone())))
        .collect();
    CliConfig::resolve(spec, &file, &flags)
}

fn dispatch(name: &str, m: &ArgMatches) -> Result<i32, CliError> {
    let cfg = resolve(name, m)?;
    match name {
        "gen" => commands::gen(&cfg),
        "solve" => commands::solve(&cfg),
        "witness" => commands::witness(&cfg),
        "sweep" => commands::sweep(&cfg, m.get_flag("dry_run")),
        "bounds" => commands::bounds(&cfg),
        "check-conditions" => commands::check_conditions(&cfg),
        other => unreachable!("unhandled subcommand {other}"),
    }
}

fn run(args: impl IntoIterator<Item = OsString>) -> i32 {
    let mut cmd = cli();
    let matches = match cmd.try_get_matches_from_mut(args) {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let (name, sub) = matches.subcommand().expect("a subcommand is required");
    match dispatch(name, sub) {
        Ok(code) => code,
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            1
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}\n");
            if let Some(sub) = cmd.find_subcommand_mut(name) {
                eprintln!("{}", sub.render_usage());
            }
            eprintln!("For more information, try 'splasso {name} --help'.");
            2
        }
    }
}

fn main() -> ExitCode {
    let code = run(std::env::args_os());
    ExitCode::from(u8::try_from(code).unwrap_or(1))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn code(args: &[&str]) -> i32 {
        run(std::iter::once("splasso").chain(args.iter().copied()).map(OsString::from))
    }

    #[test]
    fn command_tree_is_consistent() {
        cli().debug_assert();
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(code(&["frobnicate"]), 2);
        assert_eq!(code(&["solve", "--lamda", "0.1"]), 2);
        assert_eq!(code(&["bounds"]), 2);
        assert_eq!(code(&["check-conditions", "--eps", "lots"]), 2);
    }

    #[test]
    fn help_exits_zero() {
        assert_eq!(code(&["sweep", "--help"]), 0);
    }
}
