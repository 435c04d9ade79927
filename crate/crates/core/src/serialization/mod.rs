//! Corpus file formats: the canonical TSV store, the XML export, and import
//! of spreadsheet-era CSV files.

mod legacy_csv;
mod tsv;
mod xml;

use thiserror::Error;

use crate::corpus::CorpusError;
use crate::metadata::CatalogReport;

pub use legacy_csv::{import_legacy_csv, LegacyImport};
pub use tsv::{export_tsv, import_tsv};
pub use xml::{export_xml, import_xml, XML_SCHEMA};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SerializationError {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("line {line}: unknown tag {tag:?}")]
    UnknownTag { line: usize, tag: String },
    #[error("row {row}: {tags} tag(s) for {tokens} token(s)")]
    MisalignedTags { row: usize, tokens: usize, tags: usize },
    #[error("row {row}: unknown label {label:?}")]
    UnknownLabel { row: usize, label: String },
    #[error("catalog validation failed with {} error(s)", .0.error_count())]
    CatalogInvalid(CatalogReport),
    #[error("character U+{0:04X} cannot be represented in XML 1.0")]
    Unrepresentable(u32),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}
