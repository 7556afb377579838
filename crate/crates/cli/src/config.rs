use std::ffi::OsString;
use std::path::Path;

use clap::parser::ValueSource;
use clap::{ArgMatches, Command};

use crate::error::CliError;

/// Appends flags from the TOML file named by `--config` for every key not
/// already given on the command line. Keys are long flag names.
pub fn merge_config(cmd: &Command, argv: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let matches = cmd
        .clone()
        .ignore_errors(true)
        .try_get_matches_from(&argv)?;
    let Some((name, sub)) = matches.subcommand() else {
        return Ok(argv);
    };
    let Some(path) = sub.get_one::<std::path::PathBuf>("config").cloned() else {
        return Ok(argv);
    };
    let sub_cmd = cmd
        .find_subcommand(name)
        .expect("matched subcommand exists");
    let extra = config_flags(sub_cmd, sub, &path)?;
    let mut out = argv;
    out.extend(extra);
    Ok(out)
}

fn config_flags(
    cmd: &Command,
    matches: &ArgMatches,
    path: &Path,
) -> Result<Vec<OsString>, CliError> {
    let src = std::fs::read_to_string(path)?;
    let table: toml::Table =
        toml::from_str(&src).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (key, value) in table {
        let arg = cmd
            .get_arguments()
            .find(|a| a.get_long() == Some(key.as_str()))
            .ok_or_else(|| {
                CliError::Usage(format!(
                    "{}: unknown key {key:?} for `{}`",
                    path.display(),
                    cmd.get_name()
                ))
            })?;
        if key == "config" {
            return Err(CliError::Usage(format!(
                "{}: config files cannot include other config files",
                path.display()
            )));
        }
        if matches.value_source(arg.get_id().as_str()) == Some(ValueSource::CommandLine) {
            continue;
        }
        let flag = format!("--{key}");
        let scalar = |v: &toml::Value| -> Result<String, CliError> {
            match v {
                toml::Value::String(s) => Ok(s.clone()),
                toml::Value::Integer(i) => Ok(i.to_string()),
                toml::Value::Float(f) => Ok(f.to_string()),
                other => Err(CliError::Usage(format!(
                    "{}: unsupported value for {key:?}: {other}",
                    path.display()
                ))),
            }
        };
        match &value {
            toml::Value::Boolean(true) => out.push(flag.into()),
            toml::Value::Boolean(false) => {}
            toml::Value::Array(items) => {
                for item in items {
                    out.push(format!("{flag}={}", scalar(item)?).into());
                }
            }
            v => out.push(format!("{flag}={}", scalar(v)?).into()),
        }
    }
    Ok(out)
}
