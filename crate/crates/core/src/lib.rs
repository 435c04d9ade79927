//! Annotation toolkit for low-resource language corpora.
//!
//! - [`tagset`]: hierarchical POS tagsets and full-tag derivation
//! - [`corpus`]: subcorpus taxonomy, documents, sentences, tokenization, statistics
//! - [`metadata`]: cataloguing and descriptive records, catalog validation
//! - [`autotag`]: frequency lexicon and suggestion policies
//! - [`serialization`]: canonical TSV, XML export, legacy CSV import
//! - [`store`]: on-disk layout and the shared per-document store

pub mod autotag;
pub mod corpus;
pub mod metadata;
pub mod serialization;
pub mod store;
pub mod tagset;

pub use autotag::{autotag_sentence, AutotagLexicon, AutotagPolicy, PolicyMode};
pub use corpus::{
    tokenize, Corpus, CorpusError, CorpusStats, Document, Sentence, SentenceSplitter,
    SentenceStatus, SubcorpusPath, Token,
};
pub use metadata::{build_general_meta, validate_catalog, Catalog, GeneralMeta, MetadataRecord};
pub use store::CorpusStore;
pub use tagset::{Provenance, TagAssignment, TagNode, Tagset};
