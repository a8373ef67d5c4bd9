//! Flat `key = value` config files, expanded into command-line flags.

use std::fs;
use std::path::Path;

use crate::error::{usage, CliResult};

/// Parses `key = value` lines; `#` starts a comment, blank lines are skipped.
pub fn parse_config(text: &str) -> CliResult<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| usage(format!("config line {}: expected key = value", i + 1)))?;
        let key = k.trim().replace('_', "-");
        if key.is_empty() || key == "config" {
            return Err(usage(format!(
                "config line {}: invalid key `{}`",
                i + 1,
                k.trim()
            )));
        }
        out.push((key, v.trim().to_string()));
    }
    Ok(out)
}

/// Replaces `--config <file>` by the file's entries as `--key=value` flags,
/// placed right after the subcommand so explicit flags later on win.
pub fn expand_config(mut argv: Vec<String>) -> CliResult<Vec<String>> {
    let mut path = None;
    let mut i = 1;
    while i < argv.len() {
        if argv[i] == "--config" {
            if i + 1 >= argv.len() {
                return Err(usage("--config needs a file"));
            }
            path = Some(argv.remove(i + 1));
            argv.remove(i);
        } else if let Some(p) = argv[i].strip_prefix("--config=") {
            path = Some(p.to_string());
            argv.remove(i);
        } else {
            i += 1;
        }
    }
    let Some(path) = path else {
        return Ok(argv);
    };
    let text = fs::read_to_string(Path::new(&path))
        .map_err(|e| usage(format!("cannot read config {path}: {e}")))?;
    let flags: Vec<String> = parse_config(&text)?
        .into_iter()
        .map(|(k, v)| format!("--{k}={v}"))
        .collect();
    let at = 2.min(argv.len());
    argv.splice(at..at, flags);
    Ok(argv)
}
