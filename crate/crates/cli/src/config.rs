//! Flat `key = value` config files. Keys are the long flag names without
//! the leading dashes; `#` starts a comment line.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::CliError;

#[derive(Debug, Default)]
pub struct Config {
    entries: BTreeMap<String, String>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Config, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
        Config::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Config, CliError> {
        let mut entries = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Validation(format!("config line {}: expected key = value", i + 1)))?;
            let key = key.trim().trim_start_matches("--").to_string();
            if !KEYS.contains(&key.as_str()) {
                return Err(CliError::Validation(format!("config line {}: unknown key `{key}`", i + 1)));
            }
            entries.insert(key, value.trim().to_string());
        }
        Ok(Config { entries })
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| CliError::Validation(format!("config key `{key}`: cannot parse `{v}`"))),
        }
    }
}

/// Every key a config file may set.
pub const KEYS: &[&str] = &[
    "model", "sigma", "kappa", "theta", "rho", "v0", "lambda", "kbar", "delta", "kappa2", "theta2", "sigma2", "rho2",
    "v02", "T", "F", "K", "B", "N", "L", "use-c4", "range-a", "range-b", "notional", "method", "tol", "kind", "strikes",
    "out", "M", "points", "table",
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_spacing() {
        let c = Config::parse("# heston\nkappa = 0.1\n\n--T=1\n").unwrap();
        assert_eq!(c.get::<f64>("kappa").unwrap(), Some(0.1));
        assert_eq!(c.get::<f64>("T").unwrap(), Some(1.0));
        assert_eq!(c.get::<f64>("rho").unwrap(), None);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(Config::parse("kapa = 1").is_err());
        assert!(Config::parse("kappa 1").is_err());
        assert!(Config::parse("kappa = x").unwrap().get::<f64>("kappa").is_err());
    }
}
