//! Flat `key = value` configuration files and flag/file/default precedence.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::ValueEnum;

use crate::CliError;

/// Settings read from a config file, consulted for every flag left unset on
/// the command line.
#[derive(Debug, Default)]
pub struct Settings {
    path: Option<PathBuf>,
    values: BTreeMap<String, String>,
    used: RefCell<BTreeSet<String>>,
}

/// `max-depth` and `max_depth` name the same key.
fn normalize(key: &str) -> String {
    key.trim().replace('_', "-")
}

impl Settings {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text, path)
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let syntax = |reason: &str| CliError::ConfigSyntax {
                path: path.to_path_buf(),
                line: n + 1,
                reason: reason.to_string(),
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| syntax("expected `key = value`"))?;
            let key = normalize(key);
            if key.is_empty() {
                return Err(syntax("empty key"));
            }
            if values.insert(key, value.trim().to_string()).is_some() {
                return Err(syntax("duplicate key"));
            }
        }
        Ok(Self {
            path: Some(path.to_path_buf()),
            values,
            used: RefCell::default(),
        })
    }

    /// The flag if given, else the config entry, else `None`.
    pub fn get<T>(
        &self,
        flag: Option<T>,
        key: &str,
        parse: impl Fn(&str) -> Result<T, String>,
    ) -> Result<Option<T>, CliError> {
        self.used.borrow_mut().insert(key.to_string());
        if flag.is_some() {
            return Ok(flag);
        }
        match self.values.get(key) {
            None => Ok(None),
            Some(text) => parse(text).map(Some).map_err(|reason| CliError::InvalidValue {
                key: key.to_string(),
                value: text.clone(),
                reason,
            }),
        }
    }

    pub fn or<T>(
        &self,
        flag: Option<T>,
        key: &str,
        parse: impl Fn(&str) -> Result<T, String>,
        default: T,
    ) -> Result<T, CliError> {
        Ok(self.get(flag, key, parse)?.unwrap_or(default))
    }

    /// A textual flag or config entry, parsed the same way from either source.
    pub fn text<T>(
        &self,
        flag: Option<String>,
        key: &str,
        parse: impl Fn(&str) -> Result<T, String>,
    ) -> Result<Option<T>, CliError> {
        let Some(text) = self.get(flag, key, |t| Ok(t.to_string()))? else {
            return Ok(None);
        };
        parse(&text).map(Some).map_err(|reason| CliError::InvalidValue {
            key: key.to_string(),
            value: text,
            reason,
        })
    }

    /// A switch is on if the flag is set or the file says `true`.
    pub fn switch(&self, flag: bool, key: &str) -> Result<bool, CliError> {
        Ok(flag || self.get(None, key, parse_bool)?.unwrap_or(false))
    }

    /// Reject config entries the command never asked for.
    pub fn finish(&self, command: &'static str) -> Result<(), CliError> {
        let used = self.used.borrow();
        match self.values.keys().find(|k| !used.contains(*k)) {
            Some(key) => Err(CliError::UnknownKey {
                key: key.clone(),
                command,
                path: self.path.clone().unwrap_or_default(),
            }),
            None => Ok(()),
        }
    }
}

pub fn parse_num<T: FromStr>(s: &str) -> Result<T, String>
where
    T::Err: std::fmt::Display,
{
    s.trim().parse::<T>().map_err(|e| e.to_string())
}

pub fn parse_bool(s: &str) -> Result<bool, String> {
    match s.trim() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(format!("expected true or false, got `{other}`")),
    }
}

pub fn parse_enum<T: ValueEnum>(s: &str) -> Result<T, String> {
    T::from_str(s.trim(), true)
}

pub fn parse_path(s: &str) -> Result<PathBuf, String> {
    Ok(PathBuf::from(s.trim()))
}

/// `a:b:…` with exactly `n` finite numbers.
pub fn parse_tuple(s: &str, n: usize) -> Result<Vec<f64>, String> {
    let parts: Vec<f64> = s
        .split(':')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("`{p}`: {e}")))
        .collect::<Result<_, _>>()?;
    if parts.len() != n {
        return Err(format!("expected {n} colon-separated numbers"));
    }
    if parts.iter().any(|x| !x.is_finite()) {
        return Err("values must be finite".to_string());
    }
    Ok(parts)
}

/// `x,y`
pub fn parse_point(s: &str) -> Result<(f64, f64), String> {
    let (x, y) = s.split_once(',').ok_or("expected `x,y`")?;
    let x: f64 = parse_num(x)?;
    let y: f64 = parse_num(y)?;
    if !x.is_finite() || !y.is_finite() {
        return Err("coordinates must be finite".to_string());
    }
    Ok((x, y))
}

/// Radii for a sweep.
#[derive(Debug, Clone, PartialEq)]
pub enum RadiusGrid {
    /// `start:stop:step`, both ends included. Radii on a degeneracy circle
    /// are skipped.
    Range(Vec<f64>),
    /// Comma-separated values, each required to be valid.
    List(Vec<f64>),
}

impl RadiusGrid {
    pub fn parse(s: &str) -> Result<Self, String> {
        if s.contains(':') {
            let v = parse_tuple(s, 3)?;
            let (start, stop, step) = (v[0], v[1], v[2]);
            if !(step > 0.0) || stop < start {
                return Err("range needs step > 0 and stop >= start".to_string());
            }
            let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
            if count > 1_000_000 {
                return Err(format!("{count} radii is too many"));
            }
            Ok(Self::Range((0..count).map(|i| start + i as f64 * step).collect()))
        } else {
            let values = s
                .split(',')
                .map(parse_num::<f64>)
                .collect::<Result<Vec<_>, _>>()?;
            if values.iter().any(|x| !x.is_finite()) {
                return Err("radii must be finite".to_string());
            }
            Ok(Self::List(values))
        }
    }
}
