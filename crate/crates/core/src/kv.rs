//! The line-oriented `key = value` dialect shared by scene headers and
//! pipeline configuration files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use chrono::{DateTime, NaiveDate, SecondsFormat, Utc};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct KeyValues {
    entries: BTreeMap<String, String>,
}

impl KeyValues {
    pub fn new() -> Self {
        Self::default()
    }

    /// Blank lines and lines starting with `#` are skipped. Duplicate keys
    /// are an error.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::MalformedRow {
                row: lineno + 1,
                reason: "expected `key = value`".into(),
            })?;
            let key = key.trim();
            if key.is_empty() {
                return Err(Error::MalformedRow {
                    row: lineno + 1,
                    reason: "empty key".into(),
                });
            }
            if entries.insert(key.to_string(), value.trim().to_string()).is_some() {
                return Err(Error::MalformedRow {
                    row: lineno + 1,
                    reason: format!("duplicate key `{key}`"),
                });
            }
        }
        Ok(KeyValues { entries })
    }

    pub fn set(&mut self, key: impl Into<String>, value: impl ToString) {
        self.entries.insert(key.into(), value.to_string());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key).ok_or_else(|| Error::MissingHeaderKey(key.to_string()))
    }

    pub fn parse_required<T: FromStr>(&self, key: &str) -> Result<T> {
        let raw = self.require(key)?;
        raw.parse()
            .map_err(|_| Error::invalid(key, format!("cannot parse `{raw}`")))
    }

    pub fn parse_or<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        match self.get(key) {
            None => Ok(default),
            Some(raw) => raw
                .parse()
                .map_err(|_| Error::invalid(key, format!("cannot parse `{raw}`"))),
        }
    }

    /// Entries whose key starts with `prefix`, with the prefix stripped.
    pub fn with_prefix<'a>(&'a self, prefix: &'a str) -> impl Iterator<Item = (&'a str, &'a str)> + 'a {
        self.entries
            .range(prefix.to_string()..)
            .take_while(move |(k, _)| k.starts_with(prefix))
            .map(move |(k, v)| (&k[prefix.len()..], v.as_str()))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    /// Sorted, one `key = value` per line.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }
}

/// RFC 3339 timestamps, or bare `YYYY-MM-DD` dates taken as midnight UTC.
pub fn parse_timestamp(raw: &str) -> Result<DateTime<Utc>> {
    let raw = raw.trim();
    if let Ok(t) = DateTime::parse_from_rfc3339(raw) {
        return Ok(t.with_timezone(&Utc));
    }
    NaiveDate::parse_from_str(raw, "%Y-%m-%d")
        .ok()
        .and_then(|d| d.and_hms_opt(0, 0, 0))
        .map(|dt| dt.and_utc())
        .ok_or_else(|| Error::invalid("timestamp", format!("cannot parse `{raw}`")))
}

pub fn format_timestamp(t: &DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::Secs, true)
}

/// 17 significant digits; parses back to the identical `f64`.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_prefixes() {
        let kv = KeyValues::parse("# c\nband.R.file = r.bin\nband.G.file=g.bin\n\nwidth = 4\n").unwrap();
        assert_eq!(kv.get("width"), Some("4"));
        let files: Vec<_> = kv.with_prefix("band.").collect();
        assert_eq!(files, vec![("G.file", "g.bin"), ("R.file", "r.bin")]);
        assert!(KeyValues::parse("a = 1\na = 2").is_err());
        assert!(KeyValues::parse("no equals sign").is_err());
    }

    #[test]
    fn timestamps() {
        let t = parse_timestamp("2021-06-01T12:00:00Z").unwrap();
        assert_eq!(format_timestamp(&t), "2021-06-01T12:00:00Z");
        assert_eq!(format_timestamp(&parse_timestamp("2021-06-01").unwrap()), "2021-06-01T00:00:00Z");
        assert!(parse_timestamp("yesterday").is_err());
    }

    #[test]
    fn float_format_round_trips() {
        for v in [0.1, -1.0 / 3.0, 1e-300, 12345.678901234567] {
            assert_eq!(format_f64(v).parse::<f64>().unwrap(), v);
        }
    }
}
