use std::ffi::OsString;
use std::path::Path;

use serde_json::Value;

use crate::error::CliError;

/// Subcommand names, used to find where config flags are spliced in.
const COMMANDS: &[&str] = &[
    "cascade",
    "branches",
    "telemann",
    "summability",
    "audit-prop31",
    "mane",
    "density",
    "lyapunov",
    "classify",
    "sweep",
];

/// Rewrites `argv` so that the flags of a `--config` file precede the
/// command-line flags of the subcommand. With `args_override_self` the
/// later occurrence wins.
pub fn expand(argv: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let Some(path) = config_path(&argv) else {
        return Ok(argv);
    };
    let Some(at) = argv.iter().position(|a| COMMANDS.iter().any(|c| a == *c)) else {
        return Ok(argv);
    };
    let flags = flags_from_file(Path::new(&path))?;
    let mut out = argv[..=at].to_vec();
    out.extend(flags);
    out.extend_from_slice(&argv[at + 1..]);
    Ok(out)
}

fn config_path(argv: &[OsString]) -> Option<OsString> {
    let mut it = argv.iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().cloned();
        }
        if let Some(rest) = s.strip_prefix("--config=") {
            return Some(rest.into());
        }
    }
    None
}

fn flags_from_file(path: &Path) -> Result<Vec<OsString>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("config {} is not valid JSON: {e}", path.display())))?;
    let Value::Object(map) = value else {
        return Err(CliError::Usage("config must be a JSON object".into()));
    };
    let mut flags = Vec::new();
    for (key, value) in map {
        let flag = format!("--{}", key.replace('_', "-"));
        match value {
            Value::Bool(true) => flags.push(flag.into()),
            Value::Bool(false) | Value::Null => {}
            Value::Number(n) => flags.push(format!("{flag}={n}").into()),
            Value::String(s) => flags.push(format!("{flag}={s}").into()),
            other => {
                return Err(CliError::Usage(format!("config key {key:?} has unsupported value {other}")))
            }
        }
    }
    Ok(flags)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(v: &[&str]) -> Vec<OsString> {
        v.iter().map(OsString::from).collect()
    }

    #[test]
    fn config_flags_come_before_command_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"t": 0.9, "kmax": 30, "format": "json", "injectivity": true}"#).unwrap();
        let p = path.to_str().unwrap();
        let out = expand(args(&["unimodal", "--config", p, "summability", "--t", "1"])).unwrap();
        assert_eq!(
            out,
            args(&[
                "unimodal",
                "--config",
                p,
                "summability",
                "--format=json",
                "--injectivity",
                "--kmax=30",
                "--t=0.9",
                "--t",
                "1"
            ])
        );
    }

    #[test]
    fn bad_config_is_a_usage_error() {
        let out = expand(args(&["unimodal", "cascade", "--config", "/nonexistent.json"]));
        assert!(matches!(out, Err(CliError::Usage(_))));
    }
}
