//! Annotator registry: a TSV file of `annotator_id<TAB>display_name<TAB>token`
//! lines. Blank lines and lines starting with `#` are skipped.

use std::collections::HashMap;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Annotator {
    pub annotator_id: String,
    pub display_name: String,
    #[serde(skip)]
    pub token: String,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RegistryError {
    #[error("annotators line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("annotator {0:?} is listed twice")]
    DuplicateAnnotator(String),
    #[error("two annotators share a token (line {0})")]
    DuplicateToken(usize),
}

#[derive(Debug, Clone, Default)]
pub struct AnnotatorRegistry {
    by_token: HashMap<String, Annotator>,
}

impl AnnotatorRegistry {
    pub fn new(annotators: impl IntoIterator<Item = Annotator>) -> Result<Self, RegistryError> {
        let mut registry = AnnotatorRegistry::default();
        for (i, a) in annotators.into_iter().enumerate() {
            registry.add(a, i + 1)?;
        }
        Ok(registry)
    }

    fn add(&mut self, annotator: Annotator, line: usize) -> Result<(), RegistryError> {
        if self
            .by_token
            .values()
            .any(|a| a.annotator_id == annotator.annotator_id)
        {
            return Err(RegistryError::DuplicateAnnotator(annotator.annotator_id));
        }
        if self.by_token.contains_key(&annotator.token) {
            return Err(RegistryError::DuplicateToken(line));
        }
        self.by_token.insert(annotator.token.clone(), annotator);
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self, RegistryError> {
        let mut registry = AnnotatorRegistry::default();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let [id, name, token] = fields[..] else {
                return Err(RegistryError::Malformed {
                    line: line_no,
                    reason: format!("expected 3 tab-separated fields, found {}", fields.len()),
                });
            };
            if id.is_empty() || token.is_empty() {
                return Err(RegistryError::Malformed {
                    line: line_no,
                    reason: "annotator id and token must be non-empty".into(),
                });
            }
            registry.add(
                Annotator {
                    annotator_id: id.to_string(),
                    display_name: name.to_string(),
                    token: token.to_string(),
                },
                line_no,
            )?;
        }
        Ok(registry)
    }

    pub fn authenticate(&self, token: &str) -> Option<&Annotator> {
        self.by_token.get(token)
    }

    pub fn len(&self) -> usize {
        self.by_token.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_token.is_empty()
    }
}
