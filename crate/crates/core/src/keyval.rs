//! Plain-text key–value documents with `[section]` headers.
//!
//! Used for both crystal-data files and run configurations. Lines starting
//! with `#` or `;` are comments; keys before the first header belong to the
//! unnamed top-level section. Key and section order are preserved so that a
//! document re-serializes deterministically.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Section {
    pub name: String,
    entries: Vec<(String, String)>,
}

impl Section {
    pub fn new(name: impl Into<String>) -> Self {
        Section {
            name: name.into(),
            entries: Vec::new(),
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .rev()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    /// Insert or replace a key, keeping its original position when present.
    pub fn set(&mut self, key: impl Into<String>, value: impl Into<String>) {
        let key = key.into();
        let value = value.into();
        match self.entries.iter_mut().find(|(k, _)| *k == key) {
            Some(slot) => slot.1 = value,
            None => self.entries.push((key, value)),
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key).ok_or_else(|| Error::MissingKey {
            section: self.name.clone(),
            key: key.to_string(),
        })
    }

    pub fn parse_value<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.get(key) {
            None => Ok(None),
            Some(raw) => raw.parse::<T>().map(Some).map_err(|_| Error::Parse {
                line: 0,
                message: format!("[{}] {key} = `{raw}` is not a valid value", self.name),
            }),
        }
    }

    /// Comma-separated list of floats.
    pub fn parse_list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        let Some(raw) = self.get(key) else {
            return Ok(None);
        };
        raw.split(',')
            .map(|tok| {
                tok.trim().parse::<f64>().map_err(|_| Error::Parse {
                    line: 0,
                    message: format!("[{}] {key}: `{}` is not a number", self.name, tok.trim()),
                })
            })
            .collect::<Result<Vec<_>>>()
            .map(Some)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    sections: Vec<Section>,
}

impl Default for Document {
    fn default() -> Self {
        Document {
            sections: vec![Section::new("")],
        }
    }
}

impl Document {
    pub fn parse(text: &str) -> Result<Self> {
        let mut doc = Document::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest.strip_suffix(']').ok_or_else(|| Error::Parse {
                    line: idx + 1,
                    message: format!("unterminated section header `{line}`"),
                })?;
                let name = name.trim();
                if name.is_empty() {
                    return Err(Error::Parse {
                        line: idx + 1,
                        message: "empty section name".into(),
                    });
                }
                if doc.section(name).is_none() {
                    doc.sections.push(Section::new(name));
                }
                // later keys go to the most recently named section
                let pos = doc.sections.iter().position(|s| s.name == name).unwrap();
                let sec = doc.sections.remove(pos);
                doc.sections.push(sec);
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: idx + 1,
                message: format!("expected `key = value`, found `{line}`"),
            })?;
            let key = key.trim();
            if key.is_empty() {
                return Err(Error::Parse {
                    line: idx + 1,
                    message: "empty key".into(),
                });
            }
            doc.sections
                .last_mut()
                .expect("document always has a section")
                .set(key, value.trim());
        }
        Ok(doc)
    }

    pub fn root(&self) -> &Section {
        &self.sections[0]
    }

    pub fn section(&self, name: &str) -> Option<&Section> {
        self.sections.iter().find(|s| s.name == name)
    }

    pub fn section_mut(&mut self, name: &str) -> &mut Section {
        if let Some(pos) = self.sections.iter().position(|s| s.name == name) {
            &mut self.sections[pos]
        } else {
            self.sections.push(Section::new(name));
            self.sections.last_mut().unwrap()
        }
    }

    pub fn require_section(&self, name: &str) -> Result<&Section> {
        self.section(name).ok_or_else(|| Error::Parse {
            line: 0,
            message: format!("missing section [{name}]"),
        })
    }

    pub fn sections(&self) -> impl Iterator<Item = &Section> {
        self.sections.iter()
    }
}

impl fmt::Display for Document {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for sec in &self.sections {
            if sec.name.is_empty() && sec.entries.is_empty() {
                continue;
            }
            if !first {
                writeln!(f)?;
            }
            first = false;
            if !sec.name.is_empty() {
                writeln!(f, "[{}]", sec.name)?;
            }
            for (k, v) in &sec.entries {
                writeln!(f, "{k} = {v}")?;
            }
        }
        Ok(())
    }
}
