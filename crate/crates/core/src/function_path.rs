//! Function paths: `key=value` pairs and bare tags separated by commas.
//!
//! ```
//! use metaffi_core::function_path::FunctionPath;
//!
//! let fp: FunctionPath = "class=Logger,callable=error,instance_required".parse().unwrap();
//! assert_eq!(fp.get("callable"), Some("error"));
//! assert!(fp.has_tag("instance_required"));
//! ```
//!
//! There is no escaping: values cannot contain commas. Whitespace is kept.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PathEntry {
    Pair(String, String),
    Tag(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FunctionPathError {
    #[error("function path segment {index} is empty")]
    EmptySegment { index: usize },
    #[error("function path segment {index} has an empty key")]
    EmptyKey { index: usize },
    #[error("function path segment {index} repeats '{name}'")]
    Duplicate { index: usize, name: String },
    #[error("'{0}' is not a valid key or tag")]
    InvalidName(String),
    #[error("value '{0}' contains a comma")]
    InvalidValue(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct FunctionPath {
    entries: Vec<PathEntry>,
}

impl FunctionPath {
    pub fn new() -> FunctionPath {
        FunctionPath::default()
    }

    pub fn parse(text: &str) -> Result<FunctionPath, FunctionPathError> {
        let mut fp = FunctionPath::new();
        if text.is_empty() {
            return Ok(fp);
        }
        for (index, seg) in text.split(',').enumerate() {
            if seg.is_empty() {
                return Err(FunctionPathError::EmptySegment { index });
            }
            let entry = match seg.split_once('=') {
                Some(("", _)) => return Err(FunctionPathError::EmptyKey { index }),
                Some((k, v)) => PathEntry::Pair(k.to_string(), v.to_string()),
                None => PathEntry::Tag(seg.to_string()),
            };
            fp.push(entry).map_err(|e| match e {
                FunctionPathError::Duplicate { name, .. } => {
                    FunctionPathError::Duplicate { index, name }
                }
                other => other,
            })?;
        }
        Ok(fp)
    }

    fn push(&mut self, entry: PathEntry) -> Result<(), FunctionPathError> {
        let (name, is_tag) = match &entry {
            PathEntry::Pair(k, v) => {
                if v.contains(',') {
                    return Err(FunctionPathError::InvalidValue(v.clone()));
                }
                (k, false)
            }
            PathEntry::Tag(t) => (t, true),
        };
        if name.is_empty() || name.contains([',', '=']) {
            return Err(FunctionPathError::InvalidName(name.clone()));
        }
        let clash = self.entries.iter().any(|e| match e {
            PathEntry::Pair(k, _) => !is_tag && k == name,
            PathEntry::Tag(t) => is_tag && t == name,
        });
        if clash {
            return Err(FunctionPathError::Duplicate {
                index: self.entries.len(),
                name: name.clone(),
            });
        }
        self.entries.push(entry);
        Ok(())
    }

    /// Appends a pair, validating it the same way the parser would.
    pub fn with_pair(
        mut self,
        key: impl Into<String>,
        value: impl Into<String>,
    ) -> Result<FunctionPath, FunctionPathError> {
        self.push(PathEntry::Pair(key.into(), value.into()))?;
        Ok(self)
    }

    pub fn with_tag(mut self, tag: impl Into<String>) -> Result<FunctionPath, FunctionPathError> {
        self.push(PathEntry::Tag(tag.into()))?;
        Ok(self)
    }

    pub fn entries(&self) -> &[PathEntry] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find_map(|e| match e {
            PathEntry::Pair(k, v) if k == key => Some(v.as_str()),
            _ => None,
        })
    }

    pub fn has_tag(&self, tag: &str) -> bool {
        self.entries
            .iter()
            .any(|e| matches!(e, PathEntry::Tag(t) if t == tag))
    }

    pub fn tags(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().filter_map(|e| match e {
            PathEntry::Tag(t) => Some(t.as_str()),
            _ => None,
        })
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().filter_map(|e| match e {
            PathEntry::Pair(k, v) => Some((k.as_str(), v.as_str())),
            _ => None,
        })
    }
}

impl FromStr for FunctionPath {
    type Err = FunctionPathError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FunctionPath::parse(s)
    }
}

impl fmt::Display for FunctionPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.entries.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            match e {
                PathEntry::Pair(k, v) => write!(f, "{k}={v}")?,
                PathEntry::Tag(t) => f.write_str(t)?,
            }
        }
        Ok(())
    }
}
