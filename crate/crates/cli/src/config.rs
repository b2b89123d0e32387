//! `--config` files: flat `key=value` lines using the long flag names.
//!
//! The entries are spliced into the argument list right after the subcommand,
//! ahead of anything typed on the command line, so explicit flags win.

use std::path::Path;

use anyhow::{bail, Context, Result};

pub const SUBCOMMANDS: [&str; 4] = ["embed", "diagram", "verify", "resources"];

/// Parses a config file body into `--key=value` arguments.
pub fn parse_config(text: &str) -> Result<Vec<String>> {
    let mut args = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!("config line {}: expected key=value, got {line:?}", n + 1);
        };
        let key = key.trim().trim_start_matches("--");
        if key.is_empty() || key == "config" {
            bail!("config line {}: invalid key {key:?}", n + 1);
        }
        args.push(format!("--{key}={}", value.trim()));
    }
    Ok(args)
}

/// Value of `--config` if present, in either `--config X` or `--config=X` form.
fn config_path(args: &[String]) -> Option<&str> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().map(String::as_str);
        }
        if let Some(v) = a.strip_prefix("--config=") {
            return Some(v);
        }
    }
    None
}

/// Returns `args` with the config entries spliced in after the subcommand.
/// Without `--config` the arguments are returned unchanged.
pub fn expand_args(args: Vec<String>) -> Result<Vec<String>> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(Path::new(path))
        .with_context(|| format!("cannot read config file {path}"))?;
    let extra = parse_config(&text)?;
    let at = args
        .iter()
        .skip(1)
        .position(|a| SUBCOMMANDS.contains(&a.as_str()))
        .map(|p| p + 2);
    let Some(at) = at else {
        return Ok(args);
    };
    let mut out = args[..at].to_vec();
    out.extend(extra);
    out.extend_from_slice(&args[at..]);
    Ok(out)
}
