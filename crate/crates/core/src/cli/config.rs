//! Flag defaults from a TOML file.
//!
//! ```toml
//! version = 1
//!
//! [search]
//! mode = "qt-impact"
//! fields = "both"
//! prf = true
//!
//! [fuse]
//! run = ["a.run", "b.run"]
//! ```
//!
//! Each key in a subcommand's table becomes `--key value`. `true` becomes a
//! bare `--key`, `false` is skipped, arrays repeat the flag. Flags given on
//! the command line take precedence.

use std::ffi::OsString;
use std::path::Path;

use crate::{Error, Result};

pub const CONFIG_VERSION: i64 = 1;

/// Command-line arguments contributed by `path` for `subcommand`.
pub fn config_args(path: &Path, subcommand: &str) -> Result<Vec<OsString>> {
    let raw = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&raw, subcommand).map_err(|e| e.in_file(path))
}

pub fn parse_config(raw: &str, subcommand: &str) -> Result<Vec<OsString>> {
    let doc: toml::Table = raw.parse().map_err(|e: toml::de::Error| Error::InvalidArgument(e.to_string()))?;
    match doc.get("version").and_then(toml::Value::as_integer) {
        Some(CONFIG_VERSION) => {}
        Some(v) => return Err(Error::InvalidArgument(format!("unsupported config version {v}"))),
        None => return Err(Error::InvalidArgument("config file needs `version = 1`".into())),
    }
    let Some(section) = doc.get(subcommand) else { return Ok(Vec::new()) };
    let table = section.as_table().ok_or_else(|| Error::InvalidArgument(format!("`{subcommand}` must be a table")))?;

    let mut args = Vec::new();
    for (key, value) in table {
        let flag = format!("--{key}");
        let values = match value {
            toml::Value::Array(items) => items.iter().collect(),
            other => vec![other],
        };
        for v in values {
            match v {
                toml::Value::Boolean(true) => args.push(flag.clone().into()),
                toml::Value::Boolean(false) => {}
                toml::Value::String(s) => args.extend([flag.clone().into(), s.into()]),
                toml::Value::Integer(i) => args.extend([flag.clone().into(), i.to_string().into()]),
                toml::Value::Float(f) => args.extend([flag.clone().into(), f.to_string().into()]),
                _ => return Err(Error::InvalidArgument(format!("unsupported value for `{key}`"))),
            }
        }
    }
    Ok(args)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_from_table() {
        let raw = "version = 1\n[search]\nmode = \"dense\"\nk = 50\nprf = true\nsilent = false\n[fuse]\nrun = [\"a\", \"b\"]\n";
        let search: Vec<String> =
            parse_config(raw, "search").unwrap().into_iter().map(|s| s.into_string().unwrap()).collect();
        assert_eq!(search, ["--k", "50", "--mode", "dense", "--prf"]);
        let fuse: Vec<String> =
            parse_config(raw, "fuse").unwrap().into_iter().map(|s| s.into_string().unwrap()).collect();
        assert_eq!(fuse, ["--run", "a", "--run", "b"]);
        assert!(parse_config(raw, "eval").unwrap().is_empty());
    }

    #[test]
    fn version_required() {
        assert!(parse_config("[search]\nk = 1\n", "search").is_err());
        assert!(parse_config("version = 2\n", "search").is_err());
    }
}
