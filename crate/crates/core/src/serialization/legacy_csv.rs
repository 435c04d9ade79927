//! Import of spreadsheet-era CSV files: a header row `sentence_id,text`,
//! optionally followed by `tags`, one source document per file.
//!
//! Tags are space-separated labels aligned with whitespace-delimited
//! tokens; `-` leaves a token untagged. Legacy sentence ids are kept,
//! namespaced under the document id, when they are unique.

use std::collections::HashSet;
use std::io::Read;

use crate::corpus::{
    sentence_id, tokenize_whitespace, Corpus, CorpusError, Document, Sentence, SubcorpusPath,
};
use crate::tagset::{Provenance, Tagset};

use super::tsv::derived_status;
use super::SerializationError;

#[derive(Debug, Clone, PartialEq)]
pub struct LegacyImport {
    pub document: Document,
    /// Rows whose ids had to be regenerated or that were skipped.
    pub warnings: Vec<String>,
}

struct Row {
    line: usize,
    supplied_id: String,
    text: String,
    tags: Option<String>,
}

fn csv_err(line: usize, reason: impl Into<String>) -> SerializationError {
    SerializationError::Parse {
        line,
        reason: reason.into(),
    }
}

pub fn import_legacy_csv<R: Read>(
    input: R,
    doc_id: &str,
    subcorpus: SubcorpusPath,
    corpus: &Corpus,
    tagset: &Tagset,
) -> Result<LegacyImport, SerializationError> {
    if corpus.contains_document(doc_id) {
        return Err(CorpusError::DuplicateDocument(doc_id.to_string()).into());
    }

    let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(input);
    let headers = reader
        .headers()
        .map_err(|e| csv_err(1, e.to_string()))?
        .clone();
    let column = |name: &str| headers.iter().position(|h| h.trim() == name);
    let (Some(id_col), Some(text_col)) = (column("sentence_id"), column("text")) else {
        return Err(csv_err(1, "header must contain sentence_id and text columns"));
    };
    let tags_col = column("tags");

    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            csv_err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let text = record.get(text_col).unwrap_or_default().trim().to_string();
        if text.is_empty() {
            warnings.push(format!("line {line}: empty sentence skipped"));
            continue;
        }
        rows.push(Row {
            line,
            supplied_id: record.get(id_col).unwrap_or_default().trim().to_string(),
            text,
            tags: tags_col
                .and_then(|c| record.get(c))
                .map(str::trim)
                .filter(|t| !t.is_empty())
                .map(String::from),
        });
    }

    // First pass: keep supplied ids that are usable and unique.
    let mut used: HashSet<String> = HashSet::new();
    let mut ids: Vec<Option<String>> = Vec::with_capacity(rows.len());
    for row in &rows {
        let candidate = if row.supplied_id.starts_with(&format!("{doc_id}.")) {
            row.supplied_id.clone()
        } else {
            format!("{doc_id}.{}", row.supplied_id)
        };
        let usable = !row.supplied_id.is_empty()
            && !row.supplied_id.chars().any(char::is_whitespace)
            && !corpus.contains_sentence(&candidate)
            && !used.contains(&candidate);
        if usable {
            used.insert(candidate.clone());
            ids.push(Some(candidate));
        } else {
            ids.push(None);
        }
    }

    let mut document = Document::new(doc_id, subcorpus);
    let mut ordinal = 0;
    for (row, id) in rows.into_iter().zip(ids) {
        let id = match id {
            Some(id) => id,
            None => {
                let fresh = loop {
                    ordinal += 1;
                    let candidate = sentence_id(doc_id, ordinal);
                    if !used.contains(&candidate) && !corpus.contains_sentence(&candidate) {
                        break candidate;
                    }
                };
                warnings.push(format!(
                    "line {}: sentence id {:?} is empty or not unique, using {fresh}",
                    row.line, row.supplied_id
                ));
                used.insert(fresh.clone());
                fresh
            }
        };

        let mut tokens = tokenize_whitespace(&row.text);
        if let Some(tags) = &row.tags {
            let labels: Vec<&str> = tags.split_whitespace().collect();
            if labels.len() != tokens.len() {
                return Err(SerializationError::MisalignedTags {
                    row: row.line,
                    tokens: tokens.len(),
                    tags: labels.len(),
                });
            }
            for (token, label) in tokens.iter_mut().zip(labels) {
                if label == "-" {
                    continue;
                }
                token.tag = Some(tagset.assign_label(label, Provenance::Manual).map_err(|_| {
                    SerializationError::UnknownLabel {
                        row: row.line,
                        label: label.to_string(),
                    }
                })?);
            }
        }
        let tags: Vec<_> = tokens.iter().map(|t| t.tag.clone()).collect();
        document.sentences.push(Sentence {
            id,
            text: row.text,
            tokens,
            status: derived_status(&tags),
        });
    }

    Ok(LegacyImport { document, warnings })
}
