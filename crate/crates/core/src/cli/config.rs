//! Flat `key = value` configuration files.
//!
//! Blank lines and lines starting with `#` are skipped. Every problem is
//! reported with the 1-based line it came from.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

pub const KEYS: &[&str] = &[
    "grid.N1",
    "grid.N2",
    "lags.n1",
    "lags.n2",
    "prior.kind",
    "prior.value",
    "prior.file",
    "data.kind",
    "data.file",
    "data.T1",
    "data.T2",
    "data.noise_var",
    "solver.kind",
    "solver.hessian",
    "solver.line_search",
    "solver.grad_tol",
    "solver.max_iters",
    "solver.dense",
    "continuation.dt",
    "continuation.min_dt",
    "seed",
    "preset",
    "trials",
    "refine",
    "bench.n",
    "bench.trials",
];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    /// Value and source line; line 0 marks a command-line override.
    entries: BTreeMap<String, (String, usize)>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let s = raw.trim();
            if s.is_empty() || s.starts_with('#') {
                continue;
            }
            let err = |msg: String| Error::Parse { line, msg };
            let (k, v) = s
                .split_once('=')
                .ok_or_else(|| err(format!("expected 'key = value', got '{s}'")))?;
            let (k, v) = (k.trim(), v.trim());
            if !KEYS.contains(&k) {
                return Err(err(format!("unknown key '{k}'")));
            }
            if v.is_empty() {
                return Err(err(format!("missing value for '{k}'")));
            }
            if let Some((_, first)) = entries.get(k) {
                return Err(err(format!("duplicate key '{k}' (first set on line {first})")));
            }
            entries.insert(k.to_string(), (v.to_string(), line));
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) -> Result<()> {
        if !KEYS.contains(&key) {
            return Err(Error::InvalidArgument(format!("unknown key '{key}'")));
        }
        self.entries.insert(key.to_string(), (value.into(), 0));
        Ok(())
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(v, _)| v.as_str())
    }

    pub fn line(&self, key: &str) -> Option<usize> {
        self.entries.get(key).map(|(_, l)| *l)
    }

    /// Parses the value of `key`, if set.
    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.entries.get(key) {
            None => Ok(None),
            Some((v, line)) => v.parse::<T>().map(Some).map_err(|e| self.error(key, *line, v, e)),
        }
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        Ok(self.get(key)?.unwrap_or(default))
    }

    /// Comma-separated list.
    pub fn get_list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>>
    where
        T::Err: std::fmt::Display,
    {
        match self.entries.get(key) {
            None => Ok(None),
            Some((v, line)) => v
                .split(',')
                .map(|t| t.trim().parse::<T>().map_err(|e| self.error(key, *line, v, e)))
                .collect::<Result<Vec<T>>>()
                .map(Some),
        }
    }

    /// An error about the value of `key`, located at its line.
    pub fn invalid(&self, key: &str, msg: impl std::fmt::Display) -> Error {
        match self.line(key) {
            Some(line) if line > 0 => Error::Parse {
                line,
                msg: format!("{key}: {msg}"),
            },
            _ => Error::InvalidArgument(format!("{key}: {msg}")),
        }
    }

    fn error(&self, key: &str, line: usize, v: &str, e: impl std::fmt::Display) -> Error {
        let msg = format!("{key}: cannot parse '{v}': {e}");
        if line > 0 {
            Error::Parse { line, msg }
        } else {
            Error::InvalidArgument(msg)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_of(e: Error) -> usize {
        match e {
            Error::Parse { line, .. } => line,
            other => panic!("expected a parse error, got {other}"),
        }
    }

    #[test]
    fn parses_keys_comments_and_blanks() {
        let c = Config::parse("# grid\ngrid.N1 = 30\n\n  grid.N2=20  \nsolver.kind = newton\n").unwrap();
        assert_eq!(c.get::<usize>("grid.N1").unwrap(), Some(30));
        assert_eq!(c.get::<usize>("grid.N2").unwrap(), Some(20));
        assert_eq!(c.raw("solver.kind"), Some("newton"));
        assert_eq!(c.line("grid.N2"), Some(4));
        assert_eq!(c.get::<usize>("lags.n1").unwrap(), None);
        assert_eq!(c.get_or("lags.n1", 3usize).unwrap(), 3);
    }

    #[test]
    fn errors_carry_line_numbers() {
        assert_eq!(line_of(Config::parse("seed = 1\n\nno equals sign\n").unwrap_err()), 3);
        assert_eq!(line_of(Config::parse("grid.N3 = 4").unwrap_err()), 1);
        assert_eq!(line_of(Config::parse("seed = 1\nseed = 2").unwrap_err()), 2);
        assert_eq!(line_of(Config::parse("# c\nseed =").unwrap_err()), 2);
        let c = Config::parse("seed = 1\ngrid.N1 = thirty").unwrap();
        assert_eq!(line_of(c.get::<usize>("grid.N1").unwrap_err()), 2);
        assert_eq!(line_of(c.invalid("seed", "bad")), 1);
    }

    #[test]
    fn lists_and_overrides() {
        let mut c = Config::parse("bench.n = 5, 10,20\n").unwrap();
        assert_eq!(c.get_list::<usize>("bench.n").unwrap(), Some(vec![5, 10, 20]));
        c.set("seed", "7").unwrap();
        assert_eq!(c.get::<u64>("seed").unwrap(), Some(7));
        assert!(matches!(c.set("nope", "1"), Err(Error::InvalidArgument(_))));
        c.set("trials", "x").unwrap();
        assert!(matches!(c.get::<usize>("trials"), Err(Error::InvalidArgument(_))));
    }
}
