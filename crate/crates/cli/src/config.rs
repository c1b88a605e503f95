//! `--config FILE` handling: `key=value` lines merged into argv as flags
//! that the command line did not already set.

use std::fs;

use clap::Command;

/// Remove `--config PATH` / `--config=PATH` from `args`, returning the path.
fn take_config_path(args: &mut Vec<String>) -> Result<Option<String>, String> {
    let mut path = None;
    let mut i = 1;
    while i < args.len() {
        if args[i] == "--" {
            break;
        }
        if args[i] == "--config" {
            if i + 1 >= args.len() {
                return Err("--config needs a file path".into());
            }
            path = Some(args.remove(i + 1));
            args.remove(i);
        } else if let Some(p) = args[i].strip_prefix("--config=") {
            path = Some(p.to_string());
            args.remove(i);
        } else {
            i += 1;
        }
    }
    Ok(path)
}

/// Parse `key=value` lines. Blank lines and `#` comments are skipped.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>, String> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("config line {}: expected key=value", n + 1))?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return Err(format!("config line {}: empty key", n + 1));
        }
        out.push((k.to_string(), v.to_string()));
    }
    Ok(out)
}

/// Apply the config file named in `args`, if any. Keys must be long flags
/// of the chosen subcommand; flags given on the command line win.
pub fn apply(mut args: Vec<String>, cmd: &Command) -> Result<Vec<String>, String> {
    let Some(path) = take_config_path(&mut args)? else {
        return Ok(args);
    };
    let text = fs::read_to_string(&path).map_err(|e| format!("cannot read config {path}: {e}"))?;
    let entries = parse_config(&text)?;
    let Some(sub_pos) = args.iter().skip(1).position(|a| !a.starts_with('-')).map(|p| p + 1) else {
        return Ok(args);
    };
    let Some(sub) = cmd.find_subcommand(&args[sub_pos]) else {
        return Ok(args);
    };
    let known: Vec<&str> = sub
        .get_arguments()
        .filter_map(|a| a.get_long())
        .filter(|l| *l != "help")
        .collect();
    for (key, value) in entries {
        if !known.contains(&key.as_str()) {
            return Err(format!("unknown config key {key:?} for {}", sub.get_name()));
        }
        let flag = format!("--{key}");
        let given = args[sub_pos + 1..]
            .iter()
            .any(|a| *a == flag || a.starts_with(&format!("{flag}=")));
        if !given {
            args.push(format!("{flag}={value}"));
        }
    }
    Ok(args)
}
