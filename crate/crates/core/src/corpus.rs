//! Corpus structure: subcorpus taxonomy, documents, sentences and tokens.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::AddAssign;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;
use unicode_general_category::{get_general_category, GeneralCategory};

use crate::tagset::{Provenance, TagAssignment, TagError, Tagset};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CorpusError {
    #[error("document {0:?} already exists")]
    DuplicateDocument(String),
    #[error("invalid document id {0:?}")]
    InvalidDocId(String),
    #[error("sentence id {0:?} is already in use")]
    DuplicateSentenceId(String),
    #[error("input is not valid UTF-8 at byte offset {offset}")]
    EncodingError { offset: usize },
    #[error("unknown document {0:?}")]
    UnknownDocument(String),
    #[error("unknown sentence {0:?}")]
    UnknownSentence(String),
    #[error("token index {index} out of range for sentence of {len} tokens")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("token {index} carries no pending suggestion")]
    NoSuggestion { index: usize },
    #[error("token {surface:?} does not occur in sentence text after offset {from}")]
    SurfaceMismatch { surface: String, from: usize },
    #[error("sentence text has {0:?} left over after the last token")]
    TrailingText(String),
    #[error(transparent)]
    Tag(#[from] TagError),
}

// ---------------------------------------------------------------------------
// Subcorpus taxonomy

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    IndirectWritten,
    DirectWritten,
    Spoken,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PrintSource {
    Magazine,
    Book,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Genre {
    Prose,
    Drama,
    Poetry,
    Nonfiction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    CmcSynchronous,
    CmcAsynchronous,
    NonCmcPersonal,
    NonCmcPublic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Domain {
    Personal,
    Public,
}

macro_rules! keyword_enum {
    ($ty:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        impl $ty {
            pub const ALL: &'static [$ty] = &[$($ty::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $($ty::$variant => $text),+
                }
            }

            fn from_keyword(s: &str) -> Option<$ty> {
                match s {
                    $($text => Some($ty::$variant),)+
                    _ => None,
                }
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }
    };
}

keyword_enum!(Mode {
    IndirectWritten => "indirect_written",
    DirectWritten => "direct_written",
    Spoken => "spoken",
});
keyword_enum!(PrintSource { Magazine => "magazine", Book => "book" });
keyword_enum!(Genre {
    Prose => "prose",
    Drama => "drama",
    Poetry => "poetry",
    Nonfiction => "nonfiction",
});
keyword_enum!(Channel {
    CmcSynchronous => "cmc_synchronous",
    CmcAsynchronous => "cmc_asynchronous",
    NonCmcPersonal => "non_cmc_personal",
    NonCmcPublic => "non_cmc_public",
});
keyword_enum!(Domain { Personal => "personal", Public => "public" });

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Mode::from_keyword(s).ok_or_else(|| format!("unknown subcorpus mode {s:?}"))
    }
}

impl FromStr for Channel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Channel::from_keyword(s).ok_or_else(|| format!("unknown channel {s:?}"))
    }
}

/// Position of a document in the subcorpus tree. Branch values only exist
/// under their own mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SubcorpusPath {
    IndirectWritten { source: PrintSource, genre: Genre },
    DirectWritten { channel: Channel },
    Spoken { domain: Domain },
}

impl SubcorpusPath {
    pub fn mode(&self) -> Mode {
        match self {
            SubcorpusPath::IndirectWritten { .. } => Mode::IndirectWritten,
            SubcorpusPath::DirectWritten { .. } => Mode::DirectWritten,
            SubcorpusPath::Spoken { .. } => Mode::Spoken,
        }
    }

    pub fn channel(&self) -> Option<Channel> {
        match self {
            SubcorpusPath::DirectWritten { channel } => Some(*channel),
            _ => None,
        }
    }

    /// Every branch of the taxonomy.
    pub fn all() -> Vec<SubcorpusPath> {
        let mut out = Vec::new();
        for &source in PrintSource::ALL {
            for &genre in Genre::ALL {
                out.push(SubcorpusPath::IndirectWritten { source, genre });
            }
        }
        for &channel in Channel::ALL {
            out.push(SubcorpusPath::DirectWritten { channel });
        }
        for &domain in Domain::ALL {
            out.push(SubcorpusPath::Spoken { domain });
        }
        out
    }

    /// File-name friendly form, e.g. `indirect_written-book-prose`.
    pub fn slug(&self) -> String {
        self.to_string().replace('/', "-")
    }
}

impl fmt::Display for SubcorpusPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SubcorpusPath::IndirectWritten { source, genre } => {
                write!(f, "{}/{source}/{genre}", self.mode())
            }
            SubcorpusPath::DirectWritten { channel } => write!(f, "{}/{channel}", self.mode()),
            SubcorpusPath::Spoken { domain } => write!(f, "{}/{domain}", self.mode()),
        }
    }
}

impl FromStr for SubcorpusPath {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split('/').collect();
        let bad = || format!("invalid subcorpus path {s:?}");
        match parts.as_slice() {
            ["indirect_written", source, genre] => Ok(SubcorpusPath::IndirectWritten {
                source: PrintSource::from_keyword(source).ok_or_else(bad)?,
                genre: Genre::from_keyword(genre).ok_or_else(bad)?,
            }),
            ["direct_written", channel] => Ok(SubcorpusPath::DirectWritten {
                channel: Channel::from_keyword(channel).ok_or_else(bad)?,
            }),
            ["spoken", domain] => Ok(SubcorpusPath::Spoken {
                domain: Domain::from_keyword(domain).ok_or_else(bad)?,
            }),
            _ => Err(bad()),
        }
    }
}

impl Serialize for SubcorpusPath {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SubcorpusPath {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

// ---------------------------------------------------------------------------
// Tokens and tokenization

/// Half-open range of character (Unicode scalar) offsets into sentence text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    pub tag: Option<TagAssignment>,
    pub span: Span,
}

impl Token {
    pub fn provenance(&self) -> Option<Provenance> {
        self.tag.as_ref().map(|t| t.provenance)
    }

    pub fn is_manual(&self) -> bool {
        self.provenance() == Some(Provenance::Manual)
    }

    pub fn is_punctuation(&self) -> bool {
        !self.surface.is_empty() && self.surface.chars().all(is_punctuation)
    }
}

/// Unicode category P, plus the Devanagari danda and double danda.
pub fn is_punctuation(c: char) -> bool {
    if matches!(c, '\u{0964}' | '\u{0965}') {
        return true;
    }
    matches!(
        get_general_category(c),
        GeneralCategory::ConnectorPunctuation
            | GeneralCategory::DashPunctuation
            | GeneralCategory::OpenPunctuation
            | GeneralCategory::ClosePunctuation
            | GeneralCategory::InitialPunctuation
            | GeneralCategory::FinalPunctuation
            | GeneralCategory::OtherPunctuation
    )
}

fn is_danda(c: char) -> bool {
    matches!(c, '\u{0964}' | '\u{0965}')
}

/// Splits on whitespace; each maximal run of punctuation becomes its own
/// token.
pub fn tokenize(text: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    // (byte start, char start, is punctuation run)
    let mut current: Option<(usize, usize, bool)> = None;
    let mut char_idx = 0;

    let mut flush = |current: &mut Option<(usize, usize, bool)>, byte_end: usize, char_end: usize| {
        if let Some((b, c, _)) = current.take() {
            tokens.push(Token {
                surface: text[b..byte_end].to_string(),
                tag: None,
                span: Span {
                    start: c,
                    end: char_end,
                },
            });
        }
    };

    for (byte_idx, ch) in text.char_indices() {
        if ch.is_whitespace() {
            flush(&mut current, byte_idx, char_idx);
        } else {
            let punct = is_punctuation(ch);
            match current {
                Some((_, _, kind)) if kind == punct => {}
                _ => {
                    flush(&mut current, byte_idx, char_idx);
                    current = Some((byte_idx, char_idx, punct));
                }
            }
        }
        char_idx += 1;
    }
    flush(&mut current, text.len(), char_idx);
    tokens
}

/// Whitespace-only tokenization, as used by spreadsheet-era data.
pub fn tokenize_whitespace(text: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut start: Option<(usize, usize)> = None;
    let mut char_idx = 0;
    for (byte_idx, ch) in text.char_indices() {
        match (ch.is_whitespace(), start) {
            (true, Some((b, c))) => {
                tokens.push(Token {
                    surface: text[b..byte_idx].to_string(),
                    tag: None,
                    span: Span {
                        start: c,
                        end: char_idx,
                    },
                });
                start = None;
            }
            (false, None) => start = Some((byte_idx, char_idx)),
            _ => {}
        }
        char_idx += 1;
    }
    if let Some((b, c)) = start {
        tokens.push(Token {
            surface: text[b..].to_string(),
            tag: None,
            span: Span {
                start: c,
                end: char_idx,
            },
        });
    }
    tokens
}

// ---------------------------------------------------------------------------
// Sentences

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SentenceStatus {
    Raw,
    Autotagged,
    InProgress,
    Complete,
}

impl SentenceStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SentenceStatus::Raw => "raw",
            SentenceStatus::Autotagged => "autotagged",
            SentenceStatus::InProgress => "in_progress",
            SentenceStatus::Complete => "complete",
        }
    }
}

impl fmt::Display for SentenceStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SentenceStatus {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "raw" => Ok(SentenceStatus::Raw),
            "autotagged" => Ok(SentenceStatus::Autotagged),
            "in_progress" => Ok(SentenceStatus::InProgress),
            "complete" => Ok(SentenceStatus::Complete),
            other => Err(format!("unknown sentence status {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub id: String,
    pub text: String,
    pub tokens: Vec<Token>,
    pub status: SentenceStatus,
}

impl Sentence {
    /// A raw sentence tokenized with [`tokenize`].
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Sentence {
        let text = text.into();
        Sentence {
            id: id.into(),
            tokens: tokenize(&text),
            text,
            status: SentenceStatus::Raw,
        }
    }

    /// Rebuilds a sentence from its text and token surfaces, recovering spans
    /// by scanning the text left to right. Only whitespace may separate
    /// consecutive surfaces.
    pub fn from_parts(
        id: impl Into<String>,
        text: impl Into<String>,
        tokens: Vec<(String, Option<TagAssignment>)>,
        status: SentenceStatus,
    ) -> Result<Sentence, CorpusError> {
        let text = text.into();
        let mut out = Vec::with_capacity(tokens.len());
        let mut rest = text.as_str();
        let mut char_pos = 0;
        for (surface, tag) in tokens {
            let trimmed = rest.trim_start();
            char_pos += rest[..rest.len() - trimmed.len()].chars().count();
            if surface.is_empty() || !trimmed.starts_with(surface.as_str()) {
                return Err(CorpusError::SurfaceMismatch {
                    surface,
                    from: char_pos,
                });
            }
            let len = surface.chars().count();
            rest = &trimmed[surface.len()..];
            out.push(Token {
                surface,
                tag,
                span: Span {
                    start: char_pos,
                    end: char_pos + len,
                },
            });
            char_pos += len;
        }
        if !rest.trim().is_empty() {
            return Err(CorpusError::TrailingText(rest.to_string()));
        }
        Ok(Sentence {
            id: id.into(),
            text,
            tokens: out,
            status,
        })
    }

    /// Reassembles the text from token surfaces and the gaps between spans.
    pub fn detokenize(&self) -> String {
        let chars: Vec<char> = self.text.chars().collect();
        let mut out = String::with_capacity(self.text.len());
        let mut pos = 0;
        for token in &self.tokens {
            out.extend(&chars[pos..token.span.start]);
            out.push_str(&token.surface);
            pos = token.span.end;
        }
        out.extend(&chars[pos..]);
        out
    }

    pub fn token(&self, index: usize) -> Result<&Token, CorpusError> {
        self.tokens.get(index).ok_or(CorpusError::IndexOutOfRange {
            index,
            len: self.tokens.len(),
        })
    }

    fn token_mut(&mut self, index: usize) -> Result<&mut Token, CorpusError> {
        let len = self.tokens.len();
        self.tokens
            .get_mut(index)
            .ok_or(CorpusError::IndexOutOfRange { index, len })
    }

    pub fn is_fully_manual(&self) -> bool {
        !self.tokens.is_empty() && self.tokens.iter().all(Token::is_manual)
    }

    /// Status after a human edit: complete once every token is manual,
    /// otherwise in progress.
    fn after_edit(&mut self) {
        self.status = if self.is_fully_manual() {
            SentenceStatus::Complete
        } else {
            SentenceStatus::InProgress
        };
    }

    pub fn set_tag(&mut self, index: usize, tag: TagAssignment) -> Result<&Token, CorpusError> {
        self.token_mut(index)?.tag = Some(tag);
        self.after_edit();
        Ok(&self.tokens[index])
    }

    /// Removes one token's tag.
    pub fn clear_tag(&mut self, index: usize) -> Result<&Token, CorpusError> {
        self.token_mut(index)?.tag = None;
        self.after_edit();
        Ok(&self.tokens[index])
    }

    /// Turns a pending (auto or suggested) tag into a manual one.
    pub fn confirm(&mut self, index: usize) -> Result<&Token, CorpusError> {
        let token = self.token_mut(index)?;
        match token.tag.as_mut() {
            Some(tag) if tag.provenance.is_pending() => tag.provenance = Provenance::Manual,
            _ => return Err(CorpusError::NoSuggestion { index }),
        }
        self.after_edit();
        Ok(&self.tokens[index])
    }

    /// Confirms every pending tag; returns how many were confirmed.
    pub fn confirm_all(&mut self) -> usize {
        let mut n = 0;
        for tag in self.tokens.iter_mut().filter_map(|t| t.tag.as_mut()) {
            if tag.provenance.is_pending() {
                tag.provenance = Provenance::Manual;
                n += 1;
            }
        }
        if n > 0 {
            self.after_edit();
        }
        n
    }

    /// Removes every tag and resets the sentence to raw.
    pub fn clear_tags(&mut self) {
        for token in &mut self.tokens {
            token.tag = None;
        }
        self.status = SentenceStatus::Raw;
    }

    pub fn word_count(&self) -> usize {
        self.tokens.iter().filter(|t| is_word(t)).count()
    }
}

fn is_word(token: &Token) -> bool {
    let tagged_punct = token
        .tag
        .as_ref()
        .is_some_and(|t| t.convention == "RD__PUNC");
    !tagged_punct && !token.is_punctuation()
}

// ---------------------------------------------------------------------------
// Documents

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub doc_id: String,
    pub subcorpus: SubcorpusPath,
    pub sentences: Vec<Sentence>,
    pub metadata_ref: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[derive(Default)]
pub enum SentenceSplitter {
    /// One sentence per non-blank line.
    #[default]
    Lines,
    /// Sentences end after a danda or double danda, which stays with its
    /// sentence. Text after the last danda forms a final sentence.
    Danda,
}


/// Document ids double as file names: non-empty, no whitespace, no path
/// separators, not starting with a dot.
pub fn is_valid_doc_id(doc_id: &str) -> bool {
    !doc_id.is_empty()
        && !doc_id.starts_with('.')
        && !doc_id
            .chars()
            .any(|c| c.is_whitespace() || c.is_control() || matches!(c, '/' | '\\'))
}

/// Sentence id for the `ordinal`-th sentence (1-based) of a document.
pub fn sentence_id(doc_id: &str, ordinal: usize) -> String {
    format!("{doc_id}.{ordinal:04}")
}

pub fn split_sentences(text: &str, splitter: SentenceSplitter) -> Vec<&str> {
    match splitter {
        SentenceSplitter::Lines => text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .collect(),
        SentenceSplitter::Danda => {
            let mut out = Vec::new();
            let mut start = 0;
            let mut chars = text.char_indices().peekable();
            while let Some((i, c)) = chars.next() {
                if is_danda(c) && !chars.peek().is_some_and(|(_, n)| is_danda(*n)) {
                    let end = i + c.len_utf8();
                    out.push(&text[start..end]);
                    start = end;
                }
            }
            out.push(&text[start..]);
            out.into_iter()
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .collect()
        }
    }
}

impl Document {
    pub fn new(doc_id: impl Into<String>, subcorpus: SubcorpusPath) -> Document {
        Document {
            doc_id: doc_id.into(),
            subcorpus,
            sentences: Vec::new(),
            metadata_ref: None,
        }
    }

    /// Builds a raw document from decoded text.
    pub fn from_text(
        doc_id: impl Into<String>,
        subcorpus: SubcorpusPath,
        text: &str,
        splitter: SentenceSplitter,
    ) -> Document {
        let mut doc = Document::new(doc_id, subcorpus);
        doc.sentences = split_sentences(text, splitter)
            .into_iter()
            .enumerate()
            .map(|(i, s)| Sentence::new(sentence_id(&doc.doc_id, i + 1), s))
            .collect();
        doc
    }

    /// Decodes `raw` as UTF-8 (a leading BOM is dropped) and builds a raw
    /// document.
    pub fn from_bytes(
        doc_id: impl Into<String>,
        subcorpus: SubcorpusPath,
        raw: &[u8],
        splitter: SentenceSplitter,
    ) -> Result<Document, CorpusError> {
        let text = std::str::from_utf8(raw).map_err(|e| CorpusError::EncodingError {
            offset: e.valid_up_to(),
        })?;
        let text = text.strip_prefix('\u{feff}').unwrap_or(text);
        Ok(Document::from_text(doc_id, subcorpus, text, splitter))
    }

    pub fn sentence(&self, sentence_id: &str) -> Option<&Sentence> {
        self.sentences.iter().find(|s| s.id == sentence_id)
    }

    pub fn sentence_mut(&mut self, sentence_id: &str) -> Result<&mut Sentence, CorpusError> {
        self.sentences
            .iter_mut()
            .find(|s| s.id == sentence_id)
            .ok_or_else(|| CorpusError::UnknownSentence(sentence_id.to_string()))
    }

    pub fn token_count(&self) -> usize {
        self.sentences.iter().map(|s| s.tokens.len()).sum()
    }

    pub fn counts(&self) -> Counts {
        Counts {
            word_count: self.sentences.iter().map(Sentence::word_count).sum(),
            sentence_count: self.sentences.len(),
        }
    }

    /// Overall status: complete when every sentence is, raw when every
    /// sentence is, autotagged when nothing has been touched by a human yet.
    pub fn status(&self) -> SentenceStatus {
        let all = |st: SentenceStatus| self.sentences.iter().all(|s| s.status == st);
        if self.sentences.is_empty() || all(SentenceStatus::Raw) {
            SentenceStatus::Raw
        } else if all(SentenceStatus::Complete) {
            SentenceStatus::Complete
        } else if self
            .sentences
            .iter()
            .all(|s| matches!(s.status, SentenceStatus::Raw | SentenceStatus::Autotagged))
        {
            SentenceStatus::Autotagged
        } else {
            SentenceStatus::InProgress
        }
    }

    /// Sets a tag from a label at any depth, expanding it to the full
    /// convention.
    pub fn set_tag(
        &mut self,
        tagset: &Tagset,
        sentence_id: &str,
        index: usize,
        label: &str,
        provenance: Provenance,
    ) -> Result<&Sentence, CorpusError> {
        let sentence = self.sentence_mut(sentence_id)?;
        sentence.token(index)?;
        let tag = tagset.assign_label(label, provenance)?;
        sentence.set_tag(index, tag)?;
        Ok(sentence)
    }
}

// ---------------------------------------------------------------------------
// Statistics

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub word_count: usize,
    pub sentence_count: usize,
}

impl AddAssign for Counts {
    fn add_assign(&mut self, rhs: Counts) {
        self.word_count += rhs.word_count;
        self.sentence_count += rhs.sentence_count;
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub word_count: usize,
    pub sentence_count: usize,
    pub by_mode: BTreeMap<Mode, Counts>,
}

impl CorpusStats {
    pub fn totals(&self) -> Counts {
        Counts {
            word_count: self.word_count,
            sentence_count: self.sentence_count,
        }
    }

    pub fn add_document(&mut self, doc: &Document) {
        let counts = doc.counts();
        self.word_count += counts.word_count;
        self.sentence_count += counts.sentence_count;
        *self.by_mode.entry(doc.subcorpus.mode()).or_default() += counts;
    }
}

// ---------------------------------------------------------------------------
// Corpus

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Corpus {
    documents: BTreeMap<String, Document>,
    /// sentence id -> doc id
    sentence_index: HashMap<String, String>,
}

impl Corpus {
    pub fn new() -> Corpus {
        Corpus::default()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    /// Documents ordered by id.
    pub fn documents(&self) -> impl Iterator<Item = &Document> {
        self.documents.values()
    }

    pub fn document(&self, doc_id: &str) -> Option<&Document> {
        self.documents.get(doc_id)
    }

    pub fn document_mut(&mut self, doc_id: &str) -> Option<&mut Document> {
        self.documents.get_mut(doc_id)
    }

    pub fn contains_document(&self, doc_id: &str) -> bool {
        self.documents.contains_key(doc_id)
    }

    pub fn contains_sentence(&self, sentence_id: &str) -> bool {
        self.sentence_index.contains_key(sentence_id)
    }

    pub fn document_of(&self, sentence_id: &str) -> Option<&str> {
        self.sentence_index.get(sentence_id).map(String::as_str)
    }

    pub fn sentence(&self, sentence_id: &str) -> Option<&Sentence> {
        let doc = self.document_of(sentence_id)?;
        self.documents[doc].sentence(sentence_id)
    }

    pub fn sentences(&self) -> impl Iterator<Item = &Sentence> {
        self.documents.values().flat_map(|d| d.sentences.iter())
    }

    /// Adds a fully built document. Fails without modifying the corpus if the
    /// document id or any sentence id is taken.
    pub fn add_document(&mut self, doc: Document) -> Result<&Document, CorpusError> {
        if !is_valid_doc_id(&doc.doc_id) {
            return Err(CorpusError::InvalidDocId(doc.doc_id));
        }
        if self.documents.contains_key(&doc.doc_id) {
            return Err(CorpusError::DuplicateDocument(doc.doc_id));
        }
        let mut seen = std::collections::HashSet::new();
        for s in &doc.sentences {
            if self.sentence_index.contains_key(&s.id) || !seen.insert(s.id.as_str()) {
                return Err(CorpusError::DuplicateSentenceId(s.id.clone()));
            }
        }
        for s in &doc.sentences {
            self.sentence_index.insert(s.id.clone(), doc.doc_id.clone());
        }
        let id = doc.doc_id.clone();
        Ok(self.documents.entry(id).or_insert(doc))
    }

    /// Replaces a document wholesale, keeping the sentence index in sync.
    pub fn replace_document(&mut self, doc: Document) -> Result<(), CorpusError> {
        let old = self
            .documents
            .remove(&doc.doc_id)
            .ok_or_else(|| CorpusError::UnknownDocument(doc.doc_id.clone()))?;
        for s in &old.sentences {
            self.sentence_index.remove(&s.id);
        }
        match self.add_document(doc) {
            Ok(_) => Ok(()),
            Err(e) => {
                self.add_document(old).expect("restoring previous document");
                Err(e)
            }
        }
    }

    pub fn remove_document(&mut self, doc_id: &str) -> Option<Document> {
        let doc = self.documents.remove(doc_id)?;
        for s in &doc.sentences {
            self.sentence_index.remove(&s.id);
        }
        Some(doc)
    }

    /// Decodes, splits and tokenizes raw text into a new document with
    /// sequential sentence ids.
    pub fn ingest_document(
        &mut self,
        raw: &[u8],
        doc_id: &str,
        subcorpus: SubcorpusPath,
        splitter: SentenceSplitter,
    ) -> Result<&Document, CorpusError> {
        if !is_valid_doc_id(doc_id) {
            return Err(CorpusError::InvalidDocId(doc_id.to_string()));
        }
        if self.documents.contains_key(doc_id) {
            return Err(CorpusError::DuplicateDocument(doc_id.to_string()));
        }
        let doc = Document::from_bytes(doc_id, subcorpus, raw, splitter)?;
        self.add_document(doc)
    }

    fn sentence_mut(&mut self, sentence_id: &str) -> Result<&mut Sentence, CorpusError> {
        let doc_id = self
            .sentence_index
            .get(sentence_id)
            .ok_or_else(|| CorpusError::UnknownSentence(sentence_id.to_string()))?;
        self.documents
            .get_mut(doc_id)
            .expect("sentence index points at a live document")
            .sentence_mut(sentence_id)
    }

    pub fn set_tag(
        &mut self,
        tagset: &Tagset,
        sentence_id: &str,
        index: usize,
        label: &str,
        provenance: Provenance,
    ) -> Result<&Sentence, CorpusError> {
        let sentence = self.sentence_mut(sentence_id)?;
        sentence.token(index)?;
        let tag = tagset.assign_label(label, provenance)?;
        sentence.set_tag(index, tag)?;
        Ok(sentence)
    }

    pub fn confirm_suggestion(
        &mut self,
        sentence_id: &str,
        index: usize,
    ) -> Result<&Token, CorpusError> {
        self.sentence_mut(sentence_id)?.confirm(index)
    }

    pub fn confirm_all(&mut self, sentence_id: &str) -> Result<usize, CorpusError> {
        Ok(self.sentence_mut(sentence_id)?.confirm_all())
    }

    pub fn clear_tags(&mut self, sentence_id: &str) -> Result<(), CorpusError> {
        self.sentence_mut(sentence_id)?.clear_tags();
        Ok(())
    }

    pub fn compute_stats(&self) -> CorpusStats {
        let mut stats = CorpusStats::default();
        for doc in self.documents.values() {
            stats.add_document(doc);
        }
        stats
    }
}
