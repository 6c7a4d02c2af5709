//! Flat `key = value` config files. Keys are flag names without the leading
//! dashes; anything given on the command line wins.

use std::fs;
use std::path::Path;

#[derive(Debug, PartialEq)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

/// Parses `key = value` lines. Blank lines and `#` comments are skipped;
/// underscores in keys are read as dashes.
pub fn parse(text: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let mut out: Vec<(String, String)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| ConfigError(format!("line {}: expected key = value", i + 1)))?;
        let key = k.trim().trim_start_matches("--").replace('_', "-");
        if key.is_empty() || key == "config" {
            return Err(ConfigError(format!("line {}: bad key `{}`", i + 1, k.trim())));
        }
        let value = v.trim().trim_matches('"').to_string();
        if let Some(slot) = out.iter_mut().find(|(existing, _)| *existing == key) {
            slot.1 = value;
        } else {
            out.push((key, value));
        }
    }
    Ok(out)
}

/// Removes `--config <path>` from `args` and appends the file's entries as
/// flags, skipping keys already present on the command line.
pub fn merge(mut args: Vec<String>) -> Result<Vec<String>, ConfigError> {
    let Some(pos) = args.iter().position(|a| a == "--config" || a.starts_with("--config=")) else {
        return Ok(args);
    };
    let path = if let Some(p) = args[pos].strip_prefix("--config=") {
        let p = p.to_string();
        args.remove(pos);
        p
    } else {
        if pos + 1 >= args.len() {
            return Err(ConfigError("--config needs a path".into()));
        }
        let p = args.remove(pos + 1);
        args.remove(pos);
        p
    };
    let text = fs::read_to_string(Path::new(&path)).map_err(|e| ConfigError(format!("{path}: {e}")))?;
    let given = |key: &str| {
        let flag = format!("--{key}");
        args.iter().any(|a| *a == flag || a.starts_with(&format!("{flag}=")))
    };
    let mut extra = Vec::new();
    for (key, value) in parse(&text)? {
        if given(&key) {
            continue;
        }
        match value.as_str() {
            "true" => extra.push(format!("--{key}")),
            "false" => {}
            _ => extra.push(format!("--{key}={value}")),
        }
    }
    args.extend(extra);
    Ok(args)
}
