//! Merging command-line flags with an optional `key=value` config file.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::CliError;

/// Parses `key = value` lines; `#` starts a comment, blank lines are skipped.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected key=value", i + 1)))?;
        let key = key.trim().replace('_', "-");
        if map.insert(key.clone(), value.trim().to_owned()).is_some() {
            return Err(CliError::Usage(format!("config line {}: duplicate key '{key}'", i + 1)));
        }
    }
    Ok(map)
}

pub fn load_config(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text)
}

/// Resolves each setting from its flag, then the config file, then a
/// default, recording the result for the provenance line.
pub struct Resolver {
    command: String,
    config: BTreeMap<String, String>,
    resolved: Vec<(String, String)>,
}

impl Resolver {
    pub fn new(command: &str, config: BTreeMap<String, String>) -> Self {
        Self {
            command: command.to_owned(),
            config,
            resolved: Vec::new(),
        }
    }

    fn lookup<T>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>, CliError>
    where
        T: FromStr,
        T::Err: Display,
    {
        let from_config = self.config.remove(key);
        if flag.is_some() {
            return Ok(flag);
        }
        match from_config {
            Some(text) => text
                .parse()
                .map(Some)
                .map_err(|e| CliError::Usage(format!("config key '{key}': {e}"))),
            None => Ok(None),
        }
    }

    fn record(&mut self, key: &str, value: String) {
        self.resolved.push((key.to_owned(), value));
    }

    pub fn get<T>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T, CliError>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        let value = self.lookup(key, flag)?.unwrap_or(default);
        self.record(key, value.to_string());
        Ok(value)
    }

    pub fn required<T>(&mut self, key: &str, flag: Option<T>) -> Result<T, CliError>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        let value = self
            .lookup(key, flag)?
            .ok_or_else(|| CliError::Usage(format!("{}: --{key} is required", self.command)))?;
        self.record(key, value.to_string());
        Ok(value)
    }

    /// A setting that may stay unset; recorded only when given.
    pub fn optional<T>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>, CliError>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        let value = self.lookup(key, flag)?;
        if let Some(v) = &value {
            self.record(key, v.to_string());
        }
        Ok(value)
    }

    /// Like [`Resolver::optional`] but kept out of the provenance line, for
    /// settings such as the output path that do not affect the content.
    pub fn unrecorded<T>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>, CliError>
    where
        T: FromStr,
        T::Err: Display,
    {
        self.lookup(key, flag)
    }

    /// Fails on config keys the command did not consume and returns the
    /// provenance line.
    pub fn finish(self) -> Result<String, CliError> {
        if let Some(key) = self.config.keys().next() {
            return Err(CliError::Usage(format!(
                "unknown config key '{key}' for command {}",
                self.command
            )));
        }
        let mut line = format!("mu2amp {}", self.command);
        for (k, v) in &self.resolved {
            line.push_str(&format!(" --{k} {v}"));
        }
        Ok(line)
    }
}
