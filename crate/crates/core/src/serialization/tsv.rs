//! Canonical TSV document format.
//!
//! ```text
//! #doc folktale01
//! #subcorpus indirect_written/book/prose
//! #meta written-0001
//! #sid folktale01.0001
//! #status in_progress
//! #text həm go
//! həm    PR__PRP    manual
//! go    RP__CL    auto
//!
//! #sid folktale01.0002
//! ...
//! ```
//!
//! A line holding a TAB is a token line; every other non-blank line is a
//! `#` directive. `#meta`, `#status` and `#text` are optional on import:
//! status is then derived from the tags and text from single-space joined
//! surfaces. `#text` escapes backslash, TAB, CR and LF.

use std::fmt::Write as _;

use crate::corpus::{Document, Sentence, SentenceStatus, SubcorpusPath};
use crate::tagset::{Provenance, TagAssignment, Tagset};

use super::SerializationError;

const NONE: &str = "-";

pub(crate) fn escape_text(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out
}

fn unescape_text(text: &str) -> Result<String, String> {
    let mut out = String::with_capacity(text.len());
    let mut chars = text.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('\\') => out.push('\\'),
            Some('t') => out.push('\t'),
            Some('n') => out.push('\n'),
            Some('r') => out.push('\r'),
            other => return Err(format!("invalid escape sequence \\{}", other.unwrap_or(' '))),
        }
    }
    Ok(out)
}

pub fn export_tsv(doc: &Document) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "#doc {}", doc.doc_id);
    let _ = writeln!(out, "#subcorpus {}", doc.subcorpus);
    if let Some(meta) = &doc.metadata_ref {
        let _ = writeln!(out, "#meta {meta}");
    }
    for (i, s) in doc.sentences.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let _ = writeln!(out, "#sid {}", s.id);
        let _ = writeln!(out, "#status {}", s.status);
        let _ = writeln!(out, "#text {}", escape_text(&s.text));
        for t in &s.tokens {
            match &t.tag {
                Some(tag) => {
                    let _ = writeln!(out, "{}\t{}\t{}", t.surface, tag.convention, tag.provenance);
                }
                None => {
                    let _ = writeln!(out, "{}\t{NONE}\t{NONE}", t.surface);
                }
            }
        }
    }
    out
}

/// Status implied by tags alone, for input without `#status`.
pub(crate) fn derived_status(tags: &[Option<TagAssignment>]) -> SentenceStatus {
    let manual = tags
        .iter()
        .filter(|t| t.as_ref().is_some_and(|t| t.provenance == Provenance::Manual))
        .count();
    if !tags.is_empty() && manual == tags.len() {
        SentenceStatus::Complete
    } else if manual > 0 {
        SentenceStatus::InProgress
    } else if tags.iter().any(Option::is_some) {
        SentenceStatus::Autotagged
    } else {
        SentenceStatus::Raw
    }
}

struct PendingSentence {
    line: usize,
    id: String,
    status: Option<SentenceStatus>,
    text: Option<String>,
    tokens: Vec<(String, Option<TagAssignment>)>,
}

impl PendingSentence {
    fn finish(self) -> Result<Sentence, SerializationError> {
        let tags: Vec<_> = self.tokens.iter().map(|(_, t)| t.clone()).collect();
        let status = self.status.unwrap_or_else(|| derived_status(&tags));
        let text = self.text.unwrap_or_else(|| {
            self.tokens
                .iter()
                .map(|(s, _)| s.as_str())
                .collect::<Vec<_>>()
                .join(" ")
        });
        Sentence::from_parts(self.id, text, self.tokens, status).map_err(|e| {
            SerializationError::Parse {
                line: self.line,
                reason: e.to_string(),
            }
        })
    }
}

pub fn import_tsv(text: &str, tagset: &Tagset) -> Result<Document, SerializationError> {
    let mut doc_id: Option<String> = None;
    let mut subcorpus: Option<SubcorpusPath> = None;
    let mut metadata_ref = None;
    let mut sentences = Vec::new();
    let mut current: Option<PendingSentence> = None;

    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let parse_err = |reason: String| SerializationError::Parse {
            line: line_no,
            reason,
        };

        if line.trim().is_empty() || line.starts_with("# ") {
            continue;
        }

        if line.contains('\t') && !line.starts_with("#text ") {
            let sentence = current
                .as_mut()
                .ok_or_else(|| parse_err("token line before any #sid".into()))?;
            let fields: Vec<&str> = line.split('\t').collect();
            let [surface, conv, prov] = fields.as_slice() else {
                return Err(parse_err(format!(
                    "expected 3 tab-separated fields, found {}",
                    fields.len()
                )));
            };
            if surface.is_empty() {
                return Err(parse_err("empty surface form".into()));
            }
            let tag = match (*conv, *prov) {
                (NONE, NONE) => None,
                (NONE, _) | (_, NONE) => {
                    return Err(parse_err("tag and provenance must both be set or both be -".into()))
                }
                (conv, prov) => {
                    let provenance: Provenance = prov.parse().map_err(parse_err)?;
                    let tag = tagset.assign_convention(conv, provenance).map_err(|_| {
                        SerializationError::UnknownTag {
                            line: line_no,
                            tag: conv.to_string(),
                        }
                    })?;
                    Some(tag)
                }
            };
            sentence.tokens.push((surface.to_string(), tag));
            continue;
        }

        let Some((directive, value)) = line
            .strip_prefix('#')
            .map(|rest| rest.split_once(' ').unwrap_or((rest, "")))
        else {
            return Err(parse_err(format!("unexpected line {line:?}")));
        };
        let needs_value = |what: &str| {
            if value.trim().is_empty() && what != "text" {
                Err(parse_err(format!("#{what} needs a value")))
            } else {
                Ok(value.trim().to_string())
            }
        };
        match directive {
            "doc" => {
                if doc_id.is_some() {
                    return Err(parse_err("repeated #doc header".into()));
                }
                doc_id = Some(needs_value("doc")?);
            }
            "subcorpus" => {
                subcorpus = Some(needs_value("subcorpus")?.parse().map_err(parse_err)?);
            }
            "meta" => metadata_ref = Some(needs_value("meta")?),
            "sid" => {
                if doc_id.is_none() || subcorpus.is_none() {
                    return Err(parse_err("#sid before #doc and #subcorpus headers".into()));
                }
                if let Some(done) = current.take() {
                    sentences.push(done.finish()?);
                }
                current = Some(PendingSentence {
                    line: line_no,
                    id: needs_value("sid")?,
                    status: None,
                    text: None,
                    tokens: Vec::new(),
                });
            }
            "status" | "text" => {
                let sentence = current
                    .as_mut()
                    .ok_or_else(|| parse_err(format!("#{directive} before any #sid")))?;
                if !sentence.tokens.is_empty() {
                    return Err(parse_err(format!("#{directive} after token lines")));
                }
                if directive == "status" {
                    sentence.status = Some(needs_value("status")?.parse().map_err(parse_err)?);
                } else {
                    sentence.text = Some(unescape_text(value).map_err(parse_err)?);
                }
            }
            other => return Err(parse_err(format!("unknown directive #{other}"))),
        }
    }
    if let Some(done) = current.take() {
        sentences.push(done.finish()?);
    }

    let doc_id = doc_id.ok_or(SerializationError::Parse {
        line: 1,
        reason: "missing #doc header".into(),
    })?;
    let subcorpus = subcorpus.ok_or(SerializationError::Parse {
        line: 1,
        reason: "missing #subcorpus header".into(),
    })?;
    Ok(Document {
        doc_id,
        subcorpus,
        sentences,
        metadata_ref,
    })
}
