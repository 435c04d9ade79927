//! Metadata catalog.
//!
//! Each subcorpus branch keeps two metadata files: a cataloguing store with
//! one record per source document (written, CMC or recording), and a
//! descriptive record summarising the branch. A general record for the whole
//! corpus is derived on demand from the corpus and the catalog.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use chrono::{NaiveDate, NaiveTime};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

use crate::corpus::{Channel, Corpus, CorpusStats, Mode, SubcorpusPath};
use crate::store;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetadataError {
    #[error("missing required field(s): {}", .0.join(", "))]
    MissingField(Vec<String>),
    #[error("invalid value for {field}: {reason}")]
    InvalidValue { field: String, reason: String },
    #[error("unknown field {0:?}")]
    UnknownField(String),
    #[error("record {0:?} already exists")]
    DuplicateRecord(String),
    #[error("catalog has {} error finding(s)", .0.error_count())]
    CatalogInvalid(CatalogReport),
}

fn invalid(field: &str, reason: impl Into<String>) -> MetadataError {
    MetadataError::InvalidValue {
        field: field.to_string(),
        reason: reason.into(),
    }
}

/// Someone taking part in a conversation or exchange.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Participant {
    pub pseudonym: String,
    pub role: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub age_band: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gender: Option<String>,
}

/// Cataloguing record for a printed source (magazine or book).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WrittenSourceMeta {
    pub record_id: String,
    pub title: String,
    pub author: String,
    pub publication: String,
    pub publication_date: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub page_range: Option<String>,
    pub entry_date: String,
    pub entered_by: String,
    #[serde(default)]
    pub sentence_ids: Vec<String>,
}

/// Cataloguing record for directly written communication. Asynchronous CMC
/// sources carry a url; the other channels carry participants instead.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CmcMeta {
    pub record_id: String,
    pub channel: Channel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub writer: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub posted_date: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entry_date: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub url: Option<String>,
    #[serde(default)]
    pub participants: Vec<Participant>,
    #[serde(default)]
    pub sentence_ids: Vec<String>,
}

/// Cataloguing record for a spoken transcript's source recording.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecordingMeta {
    pub record_id: String,
    pub record_date: String,
    pub record_time: String,
    pub place: String,
    pub recorded_by: String,
    pub original_format: String,
    pub original_encoding: String,
    pub current_format: String,
    pub current_encoding: String,
    pub device: String,
    pub context_description: String,
    pub duration_seconds: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transfer_software: Option<String>,
    pub participants: Vec<Participant>,
    #[serde(default)]
    pub bystanders: Vec<Participant>,
    #[serde(default)]
    pub sentence_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DocumentTheme {
    pub doc_id: String,
    pub theme: String,
}

/// Descriptive, structural and technical notes for one subcorpus branch.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DescriptiveMeta {
    pub record_id: String,
    pub subcorpus: SubcorpusPath,
    pub summary: String,
    #[serde(default)]
    pub themes: Vec<DocumentTheme>,
    pub structure_note: String,
    pub access_software_note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MetadataRecord {
    Written(WrittenSourceMeta),
    Cmc(CmcMeta),
    Recording(RecordingMeta),
    Descriptive(DescriptiveMeta),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordKind {
    Written,
    Cmc,
    Recording,
    Descriptive,
}

impl RecordKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RecordKind::Written => "written",
            RecordKind::Cmc => "cmc",
            RecordKind::Recording => "recording",
            RecordKind::Descriptive => "descriptive",
        }
    }

    /// The cataloguing kind expected for documents in `mode`.
    pub fn for_mode(mode: Mode) -> RecordKind {
        match mode {
            Mode::IndirectWritten => RecordKind::Written,
            Mode::DirectWritten => RecordKind::Cmc,
            Mode::Spoken => RecordKind::Recording,
        }
    }
}

impl fmt::Display for RecordKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RecordKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "written" => Ok(RecordKind::Written),
            "cmc" => Ok(RecordKind::Cmc),
            "recording" => Ok(RecordKind::Recording),
            "descriptive" => Ok(RecordKind::Descriptive),
            other => Err(format!("unknown record kind {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum FieldType {
    Text,
    Date,
    Time,
    PositiveNumber,
    TextList,
    Participants,
    Channel,
    Subcorpus,
    Themes,
}

fn field_types(kind: RecordKind) -> &'static [(&'static str, FieldType)] {
    use FieldType::*;
    match kind {
        RecordKind::Written => &[
            ("title", Text),
            ("author", Text),
            ("publication", Text),
            ("publication_date", Date),
            ("page_range", Text),
            ("entry_date", Date),
            ("entered_by", Text),
            ("sentence_ids", TextList),
        ],
        RecordKind::Cmc => &[
            ("channel", Channel),
            ("source_name", Text),
            ("writer", Text),
            ("posted_date", Date),
            ("entry_date", Date),
            ("url", Text),
            ("participants", Participants),
            ("sentence_ids", TextList),
        ],
        RecordKind::Recording => &[
            ("record_date", Date),
            ("record_time", Time),
            ("place", Text),
            ("recorded_by", Text),
            ("original_format", Text),
            ("original_encoding", Text),
            ("current_format", Text),
            ("current_encoding", Text),
            ("device", Text),
            ("context_description", Text),
            ("duration_seconds", PositiveNumber),
            ("transfer_software", Text),
            ("participants", Participants),
            ("bystanders", Participants),
            ("sentence_ids", TextList),
        ],
        RecordKind::Descriptive => &[
            ("subcorpus", Subcorpus),
            ("summary", Text),
            ("themes", Themes),
            ("structure_note", Text),
            ("access_software_note", Text),
        ],
    }
}

/// Fields that must be present and non-empty. CMC requirements depend on
/// the channel: asynchronous sources need the full bibliographic set and a
/// url, the others only a date and participants.
pub fn required_fields(kind: RecordKind, channel: Option<Channel>) -> &'static [&'static str] {
    match kind {
        RecordKind::Written => &[
            "title",
            "author",
            "publication",
            "publication_date",
            "entry_date",
            "entered_by",
        ],
        RecordKind::Cmc => match channel {
            Some(Channel::CmcAsynchronous) => &[
                "channel",
                "source_name",
                "writer",
                "posted_date",
                "entry_date",
                "url",
            ],
            Some(_) => &["channel", "posted_date", "participants"],
            None => &["channel", "posted_date"],
        },
        RecordKind::Recording => &[
            "record_date",
            "record_time",
            "place",
            "recorded_by",
            "original_format",
            "original_encoding",
            "current_format",
            "current_encoding",
            "device",
            "context_description",
            "duration_seconds",
            "participants",
        ],
        RecordKind::Descriptive => &["subcorpus", "summary", "structure_note", "access_software_note"],
    }
}

fn is_blank(v: &Value) -> bool {
    match v {
        Value::Null => true,
        Value::String(s) => s.trim().is_empty(),
        Value::Array(a) => a.is_empty(),
        _ => false,
    }
}

fn check_value(name: &str, ty: FieldType, v: &Value) -> Result<(), MetadataError> {
    let text = || {
        v.as_str()
            .ok_or_else(|| invalid(name, "expected a string"))
    };
    match ty {
        FieldType::Text => {
            text()?;
        }
        FieldType::Date => {
            NaiveDate::parse_from_str(text()?, "%Y-%m-%d")
                .map_err(|_| invalid(name, "expected an ISO-8601 date (YYYY-MM-DD)"))?;
        }
        FieldType::Time => {
            let t = text()?;
            NaiveTime::parse_from_str(t, "%H:%M:%S")
                .or_else(|_| NaiveTime::parse_from_str(t, "%H:%M"))
                .map_err(|_| invalid(name, "expected an ISO-8601 time (HH:MM[:SS])"))?;
        }
        FieldType::PositiveNumber => {
            let n = v
                .as_f64()
                .ok_or_else(|| invalid(name, "expected a number"))?;
            if !(n.is_finite() && n > 0.0) {
                return Err(invalid(name, "must be greater than zero"));
            }
        }
        FieldType::TextList => {
            let items = v
                .as_array()
                .ok_or_else(|| invalid(name, "expected a list of strings"))?;
            if items.iter().any(|i| !i.is_string()) {
                return Err(invalid(name, "expected a list of strings"));
            }
        }
        FieldType::Participants => {
            serde_json::from_value::<Vec<Participant>>(v.clone())
                .map_err(|e| invalid(name, format!("expected a list of participants: {e}")))?;
        }
        FieldType::Channel => {
            text()?.parse::<Channel>().map_err(|e| invalid(name, e))?;
        }
        FieldType::Subcorpus => {
            text()?.parse::<SubcorpusPath>().map_err(|e| invalid(name, e))?;
        }
        FieldType::Themes => {
            serde_json::from_value::<Vec<DocumentTheme>>(v.clone())
                .map_err(|e| invalid(name, format!("expected a list of themes: {e}")))?;
        }
    }
    Ok(())
}

fn check_fields(kind: RecordKind, fields: &Map<String, Value>) -> Result<(), MetadataError> {
    let types = field_types(kind);
    for key in fields.keys() {
        if !types.iter().any(|(name, _)| name == key) {
            return Err(MetadataError::UnknownField(key.clone()));
        }
    }

    let channel = fields
        .get("channel")
        .and_then(Value::as_str)
        .and_then(|c| c.parse::<Channel>().ok());
    let missing: Vec<String> = required_fields(kind, channel)
        .iter()
        .filter(|name| fields.get(**name).is_none_or(is_blank))
        .map(|name| name.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(MetadataError::MissingField(missing));
    }

    for (name, ty) in types {
        match fields.get(*name) {
            Some(v) if !v.is_null() => check_value(name, *ty, v)?,
            _ => {}
        }
    }

    if kind == RecordKind::Cmc
        && channel != Some(Channel::CmcAsynchronous)
        && fields.get("url").is_some_and(|v| !is_blank(v))
    {
        return Err(invalid("url", "only asynchronous CMC sources carry a url"));
    }
    Ok(())
}

impl MetadataRecord {
    /// Validates `fields` against the inventory for `kind` and builds a record.
    pub fn from_fields(
        kind: RecordKind,
        record_id: impl Into<String>,
        fields: &Map<String, Value>,
    ) -> Result<MetadataRecord, MetadataError> {
        check_fields(kind, fields)?;
        let mut object: Map<String, Value> = fields
            .iter()
            .filter(|(_, v)| !v.is_null())
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();
        object.insert("kind".into(), Value::String(kind.as_str().into()));
        object.insert("record_id".into(), Value::String(record_id.into()));
        serde_json::from_value(Value::Object(object)).map_err(|e| invalid("record", e.to_string()))
    }

    /// Re-runs field validation, e.g. on a record loaded from disk.
    pub fn validate(&self) -> Result<(), MetadataError> {
        let Value::Object(mut fields) = serde_json::to_value(self).expect("records serialize")
        else {
            unreachable!("records serialize to objects")
        };
        fields.remove("kind");
        fields.remove("record_id");
        check_fields(self.kind(), &fields)
    }

    pub fn kind(&self) -> RecordKind {
        match self {
            MetadataRecord::Written(_) => RecordKind::Written,
            MetadataRecord::Cmc(_) => RecordKind::Cmc,
            MetadataRecord::Recording(_) => RecordKind::Recording,
            MetadataRecord::Descriptive(_) => RecordKind::Descriptive,
        }
    }

    pub fn record_id(&self) -> &str {
        match self {
            MetadataRecord::Written(r) => &r.record_id,
            MetadataRecord::Cmc(r) => &r.record_id,
            MetadataRecord::Recording(r) => &r.record_id,
            MetadataRecord::Descriptive(r) => &r.record_id,
        }
    }

    pub fn sentence_ids(&self) -> &[String] {
        match self {
            MetadataRecord::Written(r) => &r.sentence_ids,
            MetadataRecord::Cmc(r) => &r.sentence_ids,
            MetadataRecord::Recording(r) => &r.sentence_ids,
            MetadataRecord::Descriptive(_) => &[],
        }
    }

    pub fn is_cataloguing(&self) -> bool {
        self.kind() != RecordKind::Descriptive
    }
}

// ---------------------------------------------------------------------------
// Catalog

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Catalog {
    records: BTreeMap<String, MetadataRecord>,
}

impl Catalog {
    pub fn new() -> Catalog {
        Catalog::default()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Records ordered by id.
    pub fn records(&self) -> impl Iterator<Item = &MetadataRecord> {
        self.records.values()
    }

    pub fn get(&self, record_id: &str) -> Option<&MetadataRecord> {
        self.records.get(record_id)
    }

    pub fn insert(&mut self, record: MetadataRecord) -> Result<(), MetadataError> {
        let id = record.record_id().to_string();
        if self.records.contains_key(&id) {
            return Err(MetadataError::DuplicateRecord(id));
        }
        self.records.insert(id, record);
        Ok(())
    }

    /// Replaces or inserts a record.
    pub fn upsert(&mut self, record: MetadataRecord) {
        self.records.insert(record.record_id().to_string(), record);
    }

    /// Validates the fields and stores a record under a fresh id of the form
    /// `<kind>-<n>`.
    pub fn create_record(
        &mut self,
        kind: RecordKind,
        fields: &Map<String, Value>,
    ) -> Result<&MetadataRecord, MetadataError> {
        let id = self.next_id(kind);
        let record = MetadataRecord::from_fields(kind, id.clone(), fields)?;
        self.records.insert(id.clone(), record);
        Ok(&self.records[&id])
    }

    fn next_id(&self, kind: RecordKind) -> String {
        let prefix = format!("{kind}-");
        let next = self
            .records
            .keys()
            .filter_map(|k| k.strip_prefix(&prefix)?.parse::<u64>().ok())
            .max()
            .unwrap_or(0)
            + 1;
        format!("{prefix}{next:04}")
    }

    pub fn descriptive_for(&self, subcorpus: SubcorpusPath) -> Vec<&DescriptiveMeta> {
        self.records
            .values()
            .filter_map(|r| match r {
                MetadataRecord::Descriptive(d) if d.subcorpus == subcorpus => Some(d),
                _ => None,
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "code")]
pub enum CatalogFinding {
    /// The document has no `metadata_ref`, or it does not name a
    /// cataloguing record.
    MissingCatalogRecord { doc_id: String },
    DanglingSentenceRef { record_id: String, sentence_id: String },
    MissingUrl { record_id: String },
    /// The record kind (or CMC channel) does not fit the document's branch.
    KindMismatch { doc_id: String, record_id: String },
    InvalidRecord { record_id: String, reason: String },
    MissingDescriptiveRecord { subcorpus: String },
    DuplicateDescriptiveRecord { subcorpus: String },
}

impl CatalogFinding {
    pub fn is_error(&self) -> bool {
        !matches!(self, CatalogFinding::MissingDescriptiveRecord { .. })
    }
}

impl fmt::Display for CatalogFinding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CatalogFinding::MissingCatalogRecord { doc_id } => {
                write!(f, "document {doc_id} has no cataloguing record")
            }
            CatalogFinding::DanglingSentenceRef {
                record_id,
                sentence_id,
            } => write!(f, "record {record_id} refers to unknown sentence {sentence_id}"),
            CatalogFinding::MissingUrl { record_id } => {
                write!(f, "asynchronous CMC record {record_id} has no url")
            }
            CatalogFinding::KindMismatch { doc_id, record_id } => {
                write!(f, "record {record_id} does not fit the subcorpus of {doc_id}")
            }
            CatalogFinding::InvalidRecord { record_id, reason } => {
                write!(f, "record {record_id} is invalid: {reason}")
            }
            CatalogFinding::MissingDescriptiveRecord { subcorpus } => {
                write!(f, "subcorpus {subcorpus} has no descriptive record")
            }
            CatalogFinding::DuplicateDescriptiveRecord { subcorpus } => {
                write!(f, "subcorpus {subcorpus} has more than one descriptive record")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogReport {
    pub findings: Vec<CatalogFinding>,
}

impl CatalogReport {
    pub fn error_count(&self) -> usize {
        self.findings.iter().filter(|f| f.is_error()).count()
    }

    pub fn has_errors(&self) -> bool {
        self.error_count() > 0
    }

    pub fn is_empty(&self) -> bool {
        self.findings.is_empty()
    }
}

fn record_fits(record: &MetadataRecord, subcorpus: SubcorpusPath) -> bool {
    match record {
        MetadataRecord::Written(_) => subcorpus.mode() == Mode::IndirectWritten,
        MetadataRecord::Cmc(c) => subcorpus.channel() == Some(c.channel),
        MetadataRecord::Recording(_) => subcorpus.mode() == Mode::Spoken,
        MetadataRecord::Descriptive(_) => false,
    }
}

/// Cross-checks documents against the catalog.
pub fn validate_catalog(corpus: &Corpus, catalog: &Catalog) -> CatalogReport {
    let mut findings = Vec::new();

    for doc in corpus.documents() {
        let record = doc
            .metadata_ref
            .as_deref()
            .and_then(|id| catalog.get(id))
            .filter(|r| r.is_cataloguing());
        match record {
            None => findings.push(CatalogFinding::MissingCatalogRecord {
                doc_id: doc.doc_id.clone(),
            }),
            Some(r) if !record_fits(r, doc.subcorpus) => {
                findings.push(CatalogFinding::KindMismatch {
                    doc_id: doc.doc_id.clone(),
                    record_id: r.record_id().to_string(),
                })
            }
            Some(_) => {}
        }
    }

    for record in catalog.records() {
        let record_id = record.record_id().to_string();
        for sid in record.sentence_ids() {
            if !corpus.contains_sentence(sid) {
                findings.push(CatalogFinding::DanglingSentenceRef {
                    record_id: record_id.clone(),
                    sentence_id: sid.clone(),
                });
            }
        }
        if let MetadataRecord::Cmc(c) = record {
            if c.channel == Channel::CmcAsynchronous
                && c.url.as_deref().is_none_or(|u| u.trim().is_empty())
            {
                findings.push(CatalogFinding::MissingUrl {
                    record_id: record_id.clone(),
                });
            }
        }
        match record.validate() {
            // Already reported above with a dedicated finding.
            Err(MetadataError::MissingField(f)) if f == ["url"] => {}
            Err(e) => findings.push(CatalogFinding::InvalidRecord {
                record_id,
                reason: e.to_string(),
            }),
            Ok(()) => {}
        }
    }

    let branches: BTreeSet<SubcorpusPath> = corpus.documents().map(|d| d.subcorpus).collect();
    for branch in branches {
        match catalog.descriptive_for(branch).len() {
            0 => findings.push(CatalogFinding::MissingDescriptiveRecord {
                subcorpus: branch.to_string(),
            }),
            1 => {}
            _ => findings.push(CatalogFinding::DuplicateDescriptiveRecord {
                subcorpus: branch.to_string(),
            }),
        }
    }

    CatalogReport { findings }
}

/// Corpus-wide record: where each branch lives, statistics, and links to
/// every document and metadata file.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneralMeta {
    pub locations: BTreeMap<String, String>,
    pub stats: CorpusStats,
    pub links: Vec<String>,
}

pub fn build_general_meta(corpus: &Corpus, catalog: &Catalog) -> Result<GeneralMeta, MetadataError> {
    let report = validate_catalog(corpus, catalog);
    if report.has_errors() {
        return Err(MetadataError::CatalogInvalid(report));
    }

    let mut meta = GeneralMeta {
        stats: corpus.compute_stats(),
        ..GeneralMeta::default()
    };
    let mut links = BTreeSet::new();
    for doc in corpus.documents() {
        meta.locations
            .entry(doc.subcorpus.to_string())
            .or_insert_with(|| store::path_string(&store::mode_dir(doc.subcorpus.mode())));
        links.insert(store::path_string(&store::document_path(doc)));
        links.insert(store::path_string(&store::catalog_path(doc.subcorpus)));
        if !catalog.descriptive_for(doc.subcorpus).is_empty() {
            links.insert(store::path_string(&store::descriptive_path(doc.subcorpus)));
        }
    }
    meta.links = links.into_iter().collect();
    Ok(meta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Genre, PrintSource, SentenceSplitter};
    use serde_json::json;

    fn obj(v: Value) -> Map<String, Value> {
        match v {
            Value::Object(m) => m,
            _ => panic!("not an object"),
        }
    }

    fn written_fields() -> Map<String, Value> {
        obj(json!({
            "title": "Bhukhal Bagh",
            "author": "R. Prasad",
            "publication": "Magadhbhumi",
            "publication_date": "2009-04-01",
            "entry_date": "2011-07-12",
            "entered_by": "annotator-1",
        }))
    }

    #[test]
    fn written_record_with_inventory_is_valid() {
        let mut catalog = Catalog::new();
        let rec = catalog
            .create_record(RecordKind::Written, &written_fields())
            .unwrap();
        assert_eq!(rec.record_id(), "written-0001");
        assert_eq!(rec.kind(), RecordKind::Written);
        let rec = catalog
            .create_record(RecordKind::Written, &written_fields())
            .unwrap();
        assert_eq!(rec.record_id(), "written-0002");
    }

    #[test]
    fn missing_fields_are_all_listed() {
        let mut f = written_fields();
        f.remove("author");
        assert_eq!(
            MetadataRecord::from_fields(RecordKind::Written, "w", &f).unwrap_err(),
            MetadataError::MissingField(vec!["author".into()])
        );
        f.remove("title");
        f.insert("entered_by".into(), json!("  "));
        assert_eq!(
            MetadataRecord::from_fields(RecordKind::Written, "w", &f).unwrap_err(),
            MetadataError::MissingField(vec!["title".into(), "author".into(), "entered_by".into()])
        );
    }

    #[test]
    fn unknown_and_invalid_fields() {
        let mut f = written_fields();
        f.insert("isbn".into(), json!("123"));
        assert_eq!(
            MetadataRecord::from_fields(RecordKind::Written, "w", &f).unwrap_err(),
            MetadataError::UnknownField("isbn".into())
        );
        let mut f = written_fields();
        f.insert("publication_date".into(), json!("April 2009"));
        assert!(matches!(
            MetadataRecord::from_fields(RecordKind::Written, "w", &f),
            Err(MetadataError::InvalidValue { field, .. }) if field == "publication_date"
        ));
    }

    fn recording_fields() -> Map<String, Value> {
        obj(json!({
            "record_date": "2011-03-05",
            "record_time": "18:30",
            "place": "Jehanabad",
            "recorded_by": "fieldworker-2",
            "original_format": "WAV",
            "original_encoding": "PCM 16-bit 44.1kHz",
            "current_format": "FLAC",
            "current_encoding": "FLAC level 5",
            "device": "Zoom H4n",
            "context_description": "evening conversation at home",
            "duration_seconds": 612.5,
            "participants": [{"pseudonym": "S1", "role": "speaker"}],
        }))
    }

    #[test]
    fn recording_duration_must_be_positive() {
        assert!(MetadataRecord::from_fields(RecordKind::Recording, "r", &recording_fields()).is_ok());
        let mut f = recording_fields();
        f.insert("duration_seconds".into(), json!(-5));
        assert!(matches!(
            MetadataRecord::from_fields(RecordKind::Recording, "r", &f),
            Err(MetadataError::InvalidValue { field, .. }) if field == "duration_seconds"
        ));
    }

    #[test]
    fn cmc_channel_rules() {
        let asynchronous = obj(json!({
            "channel": "cmc_asynchronous",
            "source_name": "magahi blog",
            "writer": "blogger",
            "posted_date": "2010-11-02",
            "entry_date": "2011-01-20",
            "url": "http://example.org/post/1",
        }));
        assert!(MetadataRecord::from_fields(RecordKind::Cmc, "c", &asynchronous).is_ok());

        let mut no_url = asynchronous.clone();
        no_url.remove("url");
        assert_eq!(
            MetadataRecord::from_fields(RecordKind::Cmc, "c", &no_url).unwrap_err(),
            MetadataError::MissingField(vec!["url".into()])
        );

        let letters = obj(json!({
            "channel": "non_cmc_personal",
            "posted_date": "1998-05-14",
            "participants": [{"pseudonym": "P1", "role": "writer"}, {"pseudonym": "P2", "role": "addressee"}],
        }));
        assert!(MetadataRecord::from_fields(RecordKind::Cmc, "c", &letters).is_ok());

        let mut with_url = letters.clone();
        with_url.insert("url".into(), json!("http://example.org"));
        assert!(matches!(
            MetadataRecord::from_fields(RecordKind::Cmc, "c", &with_url),
            Err(MetadataError::InvalidValue { field, .. }) if field == "url"
        ));

        let mut no_people = letters;
        no_people.remove("participants");
        assert_eq!(
            MetadataRecord::from_fields(RecordKind::Cmc, "c", &no_people).unwrap_err(),
            MetadataError::MissingField(vec!["participants".into()])
        );
    }

    #[test]
    fn json_uses_kind_discriminator() {
        let rec = MetadataRecord::from_fields(RecordKind::Written, "written-0001", &written_fields())
            .unwrap();
        let v = serde_json::to_value(&rec).unwrap();
        assert_eq!(v["kind"], "written");
        assert_eq!(v["record_id"], "written-0001");
        let back: MetadataRecord = serde_json::from_value(v).unwrap();
        assert_eq!(back, rec);

        let bogus = json!({"kind": "written", "record_id": "x", "nonsense": 1});
        assert!(serde_json::from_value::<MetadataRecord>(bogus).is_err());
    }

    fn prose() -> SubcorpusPath {
        SubcorpusPath::IndirectWritten {
            source: PrintSource::Book,
            genre: Genre::Prose,
        }
    }

    #[test]
    fn catalog_validation_findings() {
        let mut corpus = Corpus::new();
        corpus
            .ingest_document(b"ek go", "d1", prose(), SentenceSplitter::Lines)
            .unwrap();
        let report = validate_catalog(&corpus, &Catalog::new());
        assert!(report.findings.contains(&CatalogFinding::MissingCatalogRecord {
            doc_id: "d1".into()
        }));

        let mut catalog = Catalog::new();
        let mut f = written_fields();
        f.insert("sentence_ids".into(), json!(["d1.0001", "x.9999"]));
        let id = catalog
            .create_record(RecordKind::Written, &f)
            .unwrap()
            .record_id()
            .to_string();
        corpus.document_mut("d1").unwrap().metadata_ref = Some(id.clone());
        let report = validate_catalog(&corpus, &catalog);
        assert!(report.findings.contains(&CatalogFinding::DanglingSentenceRef {
            record_id: id,
            sentence_id: "x.9999".into()
        }));
        assert!(report.has_errors());
    }

    #[test]
    fn async_cmc_without_url_is_flagged() {
        let mut catalog = Catalog::new();
        catalog.upsert(MetadataRecord::Cmc(CmcMeta {
            record_id: "cmc-0001".into(),
            channel: Channel::CmcAsynchronous,
            source_name: Some("blog".into()),
            writer: Some("w".into()),
            posted_date: Some("2010-01-01".into()),
            entry_date: Some("2010-01-02".into()),
            url: None,
            participants: vec![],
            sentence_ids: vec![],
        }));
        let report = validate_catalog(&Corpus::new(), &catalog);
        assert_eq!(
            report.findings,
            [CatalogFinding::MissingUrl {
                record_id: "cmc-0001".into()
            }]
        );
    }

    #[test]
    fn empty_corpus_general_meta() {
        let meta = build_general_meta(&Corpus::new(), &Catalog::new()).unwrap();
        assert!(meta.locations.is_empty());
        assert_eq!(meta.stats, CorpusStats::default());
    }

    #[test]
    fn general_meta_requires_valid_catalog() {
        let mut corpus = Corpus::new();
        corpus
            .ingest_document(b"ek", "d1", prose(), SentenceSplitter::Lines)
            .unwrap();
        assert!(matches!(
            build_general_meta(&corpus, &Catalog::new()),
            Err(MetadataError::CatalogInvalid(r)) if r.error_count() == 1
        ));
    }
}
