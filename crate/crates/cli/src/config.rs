//! Flat `key = value` configuration shared by config files, flags and manifests.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

/// Keys written into manifests for the record only; accepted and ignored on input.
pub const INFORMATIONAL_KEYS: [&str; 3] = ["command", "tool_version", "wall_time_s"];

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Origin {
    File { path: PathBuf, line: usize },
    Flag,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigError {
    pub origin: Option<Origin>,
    pub message: String,
}

impl ConfigError {
    pub fn new(message: impl Into<String>) -> Self {
        Self { origin: None, message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.origin {
            Some(Origin::File { path, line }) => write!(f, "{}:{line}: {}", path.display(), self.message),
            Some(Origin::Flag) => write!(f, "command line: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

/// Raw values by key, each remembering where it came from.
#[derive(Clone, Debug, Default)]
pub struct Sources {
    entries: BTreeMap<String, (String, Origin)>,
}

impl Sources {
    /// Parses `text`; `#` starts a comment, blank lines are skipped, every
    /// other line must be `key = value` with a key from `allowed`.
    pub fn parse(path: &Path, text: &str, allowed: &[&str]) -> Result<Self, ConfigError> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let origin = Origin::File { path: path.to_path_buf(), line: idx + 1 };
            let fail = |message: String| ConfigError { origin: Some(origin.clone()), message };
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) =
                line.split_once('=').ok_or_else(|| fail(format!("expected `key = value`, got `{line}`")))?;
            let (key, value) = (key.trim(), value.trim());
            if INFORMATIONAL_KEYS.contains(&key) {
                continue;
            }
            if !allowed.contains(&key) {
                return Err(fail(format!("unknown key `{key}` (expected one of: {})", allowed.join(", "))));
            }
            if value.is_empty() {
                return Err(fail(format!("empty value for `{key}`")));
            }
            if entries.insert(key.to_string(), (value.to_string(), origin.clone())).is_some() {
                return Err(fail(format!("duplicate key `{key}`")));
            }
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path, allowed: &[&str]) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::new(format!("cannot read config file {}: {e}", path.display())))?;
        Self::parse(path, &text, allowed)
    }

    /// A flag value replaces whatever the file provided.
    pub fn set_flag(&mut self, key: &str, value: Option<String>) {
        if let Some(v) = value {
            self.entries.insert(key.to_string(), (v.trim().to_string(), Origin::Flag));
        }
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(v, _)| v.as_str())
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    /// Error attributed to the line or flag that supplied `key`.
    pub fn error_at(&self, key: &str, message: impl Into<String>) -> ConfigError {
        ConfigError { origin: self.entries.get(key).map(|(_, o)| o.clone()), message: message.into() }
    }

    /// Parses `key` with `parse`, or returns `None` when absent.
    pub fn get_with<T>(
        &self,
        key: &str,
        parse: impl FnOnce(&str) -> Result<T, String>,
    ) -> Result<Option<T>, ConfigError> {
        match self.entries.get(key) {
            None => Ok(None),
            Some((v, origin)) => parse(v)
                .map(Some)
                .map_err(|m| ConfigError { origin: Some(origin.clone()), message: format!("{key}: {m}") }),
        }
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError>
    where
        T::Err: fmt::Display,
    {
        self.get_with(key, |v| v.parse::<T>().map_err(|e| format!("cannot parse `{v}`: {e}")))
    }
}

/// Comma-separated list of positive integers.
pub fn parse_list(v: &str) -> Result<Vec<usize>, String> {
    v.split(',').map(|s| s.trim().parse::<usize>().map_err(|e| format!("cannot parse `{s}` in list: {e}"))).collect()
}

pub fn parse_bool(v: &str) -> Result<bool, String> {
    match v.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(format!("expected true or false, got `{v}`")),
    }
}

/// Writes `pairs` as a config file that [`Sources::parse`] reads back.
pub fn render(header: &str, pairs: &[(&str, String)]) -> String {
    let mut out = format!("# {header}\n");
    for (k, v) in pairs {
        out.push_str(&format!("{k} = {v}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const KEYS: [&str; 3] = ["k", "N", "flux"];

    #[test]
    fn parses_comments_and_reports_lines() {
        let p = Path::new("c.txt");
        let s = Sources::parse(p, "# header\n\nk = 2  # degree\nN=20,40\n", &KEYS).unwrap();
        assert_eq!(s.get::<usize>("k").unwrap(), Some(2));
        assert_eq!(s.get_with("N", parse_list).unwrap(), Some(vec![20, 40]));
        let err = Sources::parse(p, "k = 1\nbogus = 3\n", &KEYS).unwrap_err();
        assert_eq!(err.origin, Some(Origin::File { path: p.into(), line: 2 }));
        assert!(err.to_string().starts_with("c.txt:2: unknown key `bogus`"));
        assert!(Sources::parse(p, "k = 1\nk = 2\n", &KEYS).unwrap_err().to_string().contains(":2: duplicate"));
        assert!(Sources::parse(p, "k 1\n", &KEYS).unwrap_err().to_string().contains(":1: expected"));
        let s = Sources::parse(p, "k = x\n", &KEYS).unwrap();
        assert!(s.get::<usize>("k").unwrap_err().to_string().starts_with("c.txt:1: k:"));
    }

    #[test]
    fn flags_override_and_informational_keys_are_skipped() {
        let p = Path::new("m.txt");
        let mut s = Sources::parse(p, "k = 1\ntool_version = 9\nwall_time_s = 0.5\n", &KEYS).unwrap();
        s.set_flag("k", Some("3".into()));
        s.set_flag("flux", None);
        assert_eq!(s.get::<usize>("k").unwrap(), Some(3));
        assert!(!s.contains("flux") && !s.contains("tool_version"));
    }

    #[test]
    fn render_round_trips() {
        let text = render("manifest", &[("k", "2".into()), ("N", "20,40".into())]);
        let s = Sources::parse(Path::new("m"), &text, &KEYS).unwrap();
        assert_eq!(s.raw("N"), Some("20,40"));
        assert_eq!(parse_bool("Yes"), Ok(true));
        assert!(parse_bool("maybe").is_err());
    }
}
