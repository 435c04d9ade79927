//! On-disk corpus layout and the shared in-memory store.
//!
//! ```text
//! <root>/corpus-meta.json                         general metadata
//! <root>/<mode>/<doc_id>.tsv                      one file per document
//! <root>/<mode>/<branch>.catalog.json             cataloguing records
//! <root>/<mode>/<branch>.descriptive.json         descriptive record
//! <root>/unlinked.catalog.json                    records no document uses
//! ```
//!
//! `<branch>` is the subcorpus path with `/` replaced by `-`.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock, RwLockReadGuard};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Corpus, CorpusError, CorpusStats, Document, Mode, SubcorpusPath};
use crate::metadata::{Catalog, GeneralMeta, MetadataError, MetadataRecord};
use crate::serialization::{export_tsv, import_tsv, SerializationError};
use crate::tagset::Tagset;

pub const GENERAL_META_FILE: &str = "corpus-meta.json";
pub const UNLINKED_CATALOG_FILE: &str = "unlinked.catalog.json";

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    Format {
        path: PathBuf,
        source: SerializationError,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Metadata(#[from] MetadataError),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn mode_dir(mode: Mode) -> PathBuf {
    PathBuf::from(mode.as_str())
}

pub fn document_path(doc: &Document) -> PathBuf {
    mode_dir(doc.subcorpus.mode()).join(format!("{}.tsv", doc.doc_id))
}

pub fn catalog_path(subcorpus: SubcorpusPath) -> PathBuf {
    mode_dir(subcorpus.mode()).join(format!("{}.catalog.json", subcorpus.slug()))
}

pub fn descriptive_path(subcorpus: SubcorpusPath) -> PathBuf {
    mode_dir(subcorpus.mode()).join(format!("{}.descriptive.json", subcorpus.slug()))
}

/// Relative path rendered with `/` separators and, for directories, a
/// trailing slash.
pub fn path_string(path: &Path) -> String {
    let s = path
        .components()
        .map(|c| c.as_os_str().to_string_lossy().into_owned())
        .collect::<Vec<_>>()
        .join("/");
    if path.extension().is_none() {
        format!("{s}/")
    } else {
        s
    }
}

/// Cataloguing store file for one branch.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct CatalogFile {
    kind: String,
    #[serde(default)]
    subcorpus: Option<SubcorpusPath>,
    records: Vec<MetadataRecord>,
}

fn write_atomic(path: &Path, contents: &str) -> Result<(), StoreError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, contents).map_err(io_err(&tmp))?;
    fs::rename(&tmp, path).map_err(io_err(path))
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("metadata serializes");
    s.push('\n');
    s
}

pub fn save_document(root: &Path, doc: &Document) -> Result<(), StoreError> {
    write_atomic(&root.join(document_path(doc)), &export_tsv(doc))
}

/// Writes every catalog file. Each cataloguing record goes to the branch of
/// the first document (by id) that references it.
pub fn save_catalog(root: &Path, corpus: &Corpus, catalog: &Catalog) -> Result<(), StoreError> {
    let mut owner: HashMap<&str, SubcorpusPath> = HashMap::new();
    for doc in corpus.documents() {
        if let Some(r) = &doc.metadata_ref {
            owner.entry(r.as_str()).or_insert(doc.subcorpus);
        }
    }
    let mut per_branch: BTreeMap<SubcorpusPath, Vec<MetadataRecord>> = BTreeMap::new();
    let mut unlinked = Vec::new();
    for record in catalog.records() {
        match record {
            MetadataRecord::Descriptive(d) => write_atomic(
                &root.join(descriptive_path(d.subcorpus)),
                &to_json(record),
            )?,
            _ => match owner.get(record.record_id()) {
                Some(branch) => per_branch.entry(*branch).or_default().push(record.clone()),
                None => unlinked.push(record.clone()),
            },
        }
    }
    for doc in corpus.documents() {
        per_branch.entry(doc.subcorpus).or_default();
    }
    for (branch, records) in per_branch {
        let file = CatalogFile {
            kind: "catalog".into(),
            subcorpus: Some(branch),
            records,
        };
        write_atomic(&root.join(catalog_path(branch)), &to_json(&file))?;
    }
    if !unlinked.is_empty() {
        let file = CatalogFile {
            kind: "catalog".into(),
            subcorpus: None,
            records: unlinked,
        };
        write_atomic(&root.join(UNLINKED_CATALOG_FILE), &to_json(&file))?;
    }
    Ok(())
}

pub fn save_general_meta(root: &Path, meta: &GeneralMeta) -> Result<(), StoreError> {
    write_atomic(&root.join(GENERAL_META_FILE), &to_json(meta))
}

pub fn save_corpus(root: &Path, corpus: &Corpus, catalog: &Catalog) -> Result<(), StoreError> {
    for doc in corpus.documents() {
        save_document(root, doc)?;
    }
    save_catalog(root, corpus, catalog)
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, StoreError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|source| StoreError::Json {
        path: path.to_path_buf(),
        source,
    })
}

fn sorted_entries(dir: &Path) -> Result<Vec<PathBuf>, StoreError> {
    let mut out: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(io_err(dir))?
        .map(|e| e.map(|e| e.path()))
        .collect::<Result<_, _>>()
        .map_err(io_err(dir))?;
    out.sort();
    Ok(out)
}

/// Loads every document and metadata file under `root`. A missing root is
/// an empty corpus.
pub fn load_corpus(root: &Path, tagset: &Tagset) -> Result<(Corpus, Catalog), StoreError> {
    let mut corpus = Corpus::new();
    let mut catalog = Catalog::new();
    if !root.exists() {
        return Ok((corpus, catalog));
    }

    let mut catalog_files = Vec::new();
    let unlinked = root.join(UNLINKED_CATALOG_FILE);
    if unlinked.exists() {
        catalog_files.push(unlinked);
    }

    for mode in Mode::ALL {
        let dir = root.join(mode_dir(*mode));
        if !dir.is_dir() {
            continue;
        }
        for path in sorted_entries(&dir)? {
            let name = path.file_name().map(|n| n.to_string_lossy().into_owned());
            let Some(name) = name else { continue };
            if name.ends_with(".tsv") {
                let text = fs::read_to_string(&path).map_err(io_err(&path))?;
                let doc = import_tsv(&text, tagset).map_err(|source| StoreError::Format {
                    path: path.clone(),
                    source,
                })?;
                corpus.add_document(doc)?;
            } else if name.ends_with(".catalog.json") {
                catalog_files.push(path);
            } else if name.ends_with(".descriptive.json") {
                let record: MetadataRecord = read_json(&path)?;
                catalog.insert(record)?;
            }
        }
    }

    for path in catalog_files {
        let file: CatalogFile = read_json(&path)?;
        for record in file.records {
            catalog.insert(record)?;
        }
    }
    Ok((corpus, catalog))
}

// ---------------------------------------------------------------------------
// Shared store

/// A corpus shared between threads. Each document sits behind its own lock:
/// mutations of one document are totally ordered, different documents
/// proceed independently.
#[derive(Debug, Default)]
pub struct CorpusStore {
    documents: RwLock<BTreeMap<String, Arc<RwLock<Document>>>>,
    sentence_index: RwLock<HashMap<String, String>>,
}

impl CorpusStore {
    pub fn new(corpus: Corpus) -> CorpusStore {
        let store = CorpusStore::default();
        {
            let mut docs = store.documents.write().unwrap();
            let mut index = store.sentence_index.write().unwrap();
            for doc in corpus.documents() {
                for s in &doc.sentences {
                    index.insert(s.id.clone(), doc.doc_id.clone());
                }
                docs.insert(doc.doc_id.clone(), Arc::new(RwLock::new(doc.clone())));
            }
        }
        store
    }

    pub fn document_ids(&self) -> Vec<String> {
        self.documents.read().unwrap().keys().cloned().collect()
    }

    pub fn contains(&self, doc_id: &str) -> bool {
        self.documents.read().unwrap().contains_key(doc_id)
    }

    pub fn document_of(&self, sentence_id: &str) -> Option<String> {
        self.sentence_index.read().unwrap().get(sentence_id).cloned()
    }

    fn handle(&self, doc_id: &str) -> Result<Arc<RwLock<Document>>, CorpusError> {
        self.documents
            .read()
            .unwrap()
            .get(doc_id)
            .cloned()
            .ok_or_else(|| CorpusError::UnknownDocument(doc_id.to_string()))
    }

    pub fn read<R>(&self, doc_id: &str, f: impl FnOnce(&Document) -> R) -> Result<R, CorpusError> {
        let handle = self.handle(doc_id)?;
        let doc = handle.read().unwrap();
        Ok(f(&doc))
    }

    /// Runs `f` with exclusive access to one document.
    pub fn write<R>(
        &self,
        doc_id: &str,
        f: impl FnOnce(&mut Document) -> R,
    ) -> Result<R, CorpusError> {
        let handle = self.handle(doc_id)?;
        let mut doc = handle.write().unwrap();
        Ok(f(&mut doc))
    }

    pub fn insert(&self, doc: Document) -> Result<(), CorpusError> {
        if !crate::corpus::is_valid_doc_id(&doc.doc_id) {
            return Err(CorpusError::InvalidDocId(doc.doc_id));
        }
        let mut docs = self.documents.write().unwrap();
        let mut index = self.sentence_index.write().unwrap();
        if docs.contains_key(&doc.doc_id) {
            return Err(CorpusError::DuplicateDocument(doc.doc_id));
        }
        let mut seen = std::collections::HashSet::new();
        for s in &doc.sentences {
            if index.contains_key(&s.id) || !seen.insert(s.id.as_str()) {
                return Err(CorpusError::DuplicateSentenceId(s.id.clone()));
            }
        }
        for s in &doc.sentences {
            index.insert(s.id.clone(), doc.doc_id.clone());
        }
        docs.insert(doc.doc_id.clone(), Arc::new(RwLock::new(doc)));
        Ok(())
    }

    /// A consistent copy of the whole corpus: every document lock is held
    /// at once while copying, so no mutation lands halfway through.
    pub fn snapshot(&self) -> Corpus {
        let docs = self.documents.read().unwrap();
        let guards: Vec<RwLockReadGuard<'_, Document>> =
            docs.values().map(|d| d.read().unwrap()).collect();
        let mut corpus = Corpus::new();
        for g in &guards {
            corpus
                .add_document((**g).clone())
                .expect("store keeps ids unique");
        }
        corpus
    }

    pub fn stats(&self) -> CorpusStats {
        let docs = self.documents.read().unwrap();
        let guards: Vec<RwLockReadGuard<'_, Document>> =
            docs.values().map(|d| d.read().unwrap()).collect();
        let mut stats = CorpusStats::default();
        for g in &guards {
            stats.add_document(g);
        }
        stats
    }
}
