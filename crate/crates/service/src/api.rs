//! HTTP routes.
//!
//! | route | auth | claim |
//! |---|---|---|
//! | `GET /tagset` | | |
//! | `GET /documents?status=` | | |
//! | `POST /documents/{id}/claim` | yes | |
//! | `POST /documents/{id}/release` body `{"finished": bool}` (optional) | yes | yes |
//! | `GET /documents/{id}/sentences?from=&limit=` | | |
//! | `GET /documents/{id}/progress` | | |
//! | `PUT /sentences/{sid}/tokens/{i}/tag` body `{"leaf_label": ...}` | yes | yes |
//! | `DELETE /sentences/{sid}/tokens/{i}/tag` | yes | yes |
//! | `POST /sentences/{sid}/tokens/{i}/confirm` | yes | yes |
//! | `POST /sentences/{sid}/confirm-all` | yes | yes |
//! | `POST /autotag/{doc_id}` body `{"policy": ...}` (optional) | yes | yes |
//! | `POST /lexicon/rebuild` | yes | |
//! | `GET /suggest?form=&mode=&min_count=` | | |
//! | `GET /stats` | | |
//! | `GET /metadata` | | |
//! | `GET /export?format=xml\|tsv&doc=` | | |

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::{Arc, RwLock};

use axum::body::Bytes;
use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{FromRequestParts, Path, Query, State};
use axum::http::request::Parts;
use axum::http::header;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::{Json, Router};
use chrono::TimeDelta;
use serde::{Deserialize, Serialize};
use tower_http::services::ServeDir;

use ann_core::autotag::{autotag_sentence, AutotagLexicon, AutotagPolicy, PolicyMode};
use ann_core::corpus::{Corpus, Document, Sentence, SentenceStatus, Span, SubcorpusPath};
use ann_core::metadata::{build_general_meta, Catalog, GeneralMeta};
use ann_core::serialization::{export_tsv, export_xml};
use ann_core::store::{self, CorpusStore};
use ann_core::tagset::{Provenance, TagsetTree, Tagset};
use ann_core::CorpusStats;

use crate::auth::{Annotator, AnnotatorRegistry};
use crate::claims::{system_clock, Claim, ClaimRegistry, Clock, DEFAULT_IDLE_TIMEOUT_MINUTES};
use crate::error::ApiError;

pub const DEFAULT_PAGE_SIZE: usize = 50;
pub const MAX_PAGE_SIZE: usize = 500;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    /// Corpus directory for write-through saves; `None` keeps changes in
    /// memory only.
    pub corpus_dir: Option<PathBuf>,
    pub idle_timeout: TimeDelta,
    pub default_policy: AutotagPolicy,
    /// Static files served at `/`.
    pub webui_dir: Option<PathBuf>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            corpus_dir: None,
            idle_timeout: TimeDelta::minutes(DEFAULT_IDLE_TIMEOUT_MINUTES),
            default_policy: AutotagPolicy::default(),
            webui_dir: None,
        }
    }
}

pub struct AppState {
    tagset: Tagset,
    store: CorpusStore,
    catalog: RwLock<Catalog>,
    lexicon: RwLock<Arc<AutotagLexicon>>,
    annotators: AnnotatorRegistry,
    claims: ClaimRegistry,
    config: ServiceConfig,
}

impl AppState {
    pub fn new(
        tagset: Tagset,
        corpus: Corpus,
        catalog: Catalog,
        lexicon: AutotagLexicon,
        annotators: AnnotatorRegistry,
        config: ServiceConfig,
    ) -> AppState {
        AppState::with_clock(tagset, corpus, catalog, lexicon, annotators, config, system_clock())
    }

    pub fn with_clock(
        tagset: Tagset,
        corpus: Corpus,
        catalog: Catalog,
        lexicon: AutotagLexicon,
        annotators: AnnotatorRegistry,
        config: ServiceConfig,
        clock: Clock,
    ) -> AppState {
        AppState {
            tagset,
            store: CorpusStore::new(corpus),
            catalog: RwLock::new(catalog),
            lexicon: RwLock::new(Arc::new(lexicon)),
            annotators,
            claims: ClaimRegistry::new(config.idle_timeout, clock),
            config,
        }
    }

    pub fn store(&self) -> &CorpusStore {
        &self.store
    }

    pub fn claims(&self) -> &ClaimRegistry {
        &self.claims
    }

    fn lexicon(&self) -> Arc<AutotagLexicon> {
        self.lexicon.read().unwrap().clone()
    }

    /// Applies `f` to a copy of the document, saves the copy when a corpus
    /// directory is configured, then publishes it. A failed save leaves the
    /// document unchanged.
    fn mutate<R>(
        &self,
        doc_id: &str,
        f: impl FnOnce(&mut Document) -> Result<R, ApiError>,
    ) -> Result<R, ApiError> {
        self.store.write(doc_id, |doc| {
            let mut next = doc.clone();
            let out = f(&mut next)?;
            if let Some(dir) = &self.config.corpus_dir {
                store::save_document(dir, &next)?;
            }
            *doc = next;
            Ok(out)
        })?
    }

    fn doc_of_sentence(&self, sentence_id: &str) -> Result<String, ApiError> {
        self.store
            .document_of(sentence_id)
            .ok_or_else(|| ann_core::CorpusError::UnknownSentence(sentence_id.to_string()).into())
    }

    fn require_document(&self, doc_id: &str) -> Result<(), ApiError> {
        if self.store.contains(doc_id) {
            Ok(())
        } else {
            Err(ann_core::CorpusError::UnknownDocument(doc_id.to_string()).into())
        }
    }
}

type AppStateRef = Arc<AppState>;

pub fn router(state: AppStateRef) -> Router {
    let webui = state.config.webui_dir.clone();
    let api = Router::new()
        .route("/tagset", get(get_tagset))
        .route("/documents", get(list_documents))
        .route("/documents/{id}/claim", post(claim_document))
        .route("/documents/{id}/release", post(release_document))
        .route("/documents/{id}/sentences", get(get_sentences))
        .route("/documents/{id}/progress", get(get_progress))
        .route(
            "/sentences/{sid}/tokens/{index}/tag",
            put(put_tag).delete(delete_tag),
        )
        .route("/sentences/{sid}/tokens/{index}/confirm", post(confirm_token))
        .route("/sentences/{sid}/confirm-all", post(confirm_all))
        .route("/autotag/{doc_id}", post(autotag_document))
        .route("/lexicon/rebuild", post(rebuild_lexicon))
        .route("/suggest", get(suggest))
        .route("/stats", get(get_stats))
        .route("/metadata", get(get_metadata))
        .route("/export", get(export))
        .with_state(state);
    match webui {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

// ---------------------------------------------------------------------------
// Authentication

/// The annotator named by the request's bearer token.
pub struct Authed(pub Annotator);

impl FromRequestParts<AppStateRef> for Authed {
    type Rejection = ApiError;

    async fn from_request_parts(
        parts: &mut Parts,
        state: &AppStateRef,
    ) -> Result<Self, Self::Rejection> {
        let value = parts
            .headers
            .get(header::AUTHORIZATION)
            .ok_or_else(|| ApiError::unauthorized("missing bearer token"))?;
        let token = value
            .to_str()
            .ok()
            .and_then(|v| v.strip_prefix("Bearer "))
            .map(str::trim)
            .ok_or_else(|| ApiError::unauthorized("malformed authorization header"))?;
        state
            .annotators
            .authenticate(token)
            .cloned()
            .map(Authed)
            .ok_or_else(|| ApiError::unauthorized("unknown token"))
    }
}

// ---------------------------------------------------------------------------
// Views

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct TokenView {
    pub index: usize,
    pub surface: String,
    pub span: Span,
    pub tag: Option<String>,
    pub leaf_label: Option<String>,
    pub provenance: Option<Provenance>,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct SentenceView {
    pub id: String,
    pub text: String,
    pub status: SentenceStatus,
    pub tokens: Vec<TokenView>,
}

impl From<&Sentence> for SentenceView {
    fn from(s: &Sentence) -> Self {
        SentenceView {
            id: s.id.clone(),
            text: s.text.clone(),
            status: s.status,
            tokens: s
                .tokens
                .iter()
                .enumerate()
                .map(|(index, t)| TokenView {
                    index,
                    surface: t.surface.clone(),
                    span: t.span,
                    tag: t.tag.as_ref().map(|a| a.convention.clone()),
                    leaf_label: t.tag.as_ref().map(|a| a.leaf_label.clone()),
                    provenance: t.provenance(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
pub struct Progress {
    pub total_tokens: usize,
    pub manual: usize,
    /// Pending suggestions (auto or suggested provenance).
    pub auto: usize,
    pub untagged: usize,
}

impl Progress {
    pub fn of(doc: &Document) -> Progress {
        let mut p = Progress {
            total_tokens: 0,
            manual: 0,
            auto: 0,
            untagged: 0,
        };
        for t in doc.sentences.iter().flat_map(|s| &s.tokens) {
            p.total_tokens += 1;
            match t.provenance() {
                Some(Provenance::Manual) => p.manual += 1,
                Some(_) => p.auto += 1,
                None => p.untagged += 1,
            }
        }
        p
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct DocumentSummary {
    pub doc_id: String,
    pub subcorpus: SubcorpusPath,
    pub status: SentenceStatus,
    pub sentence_count: usize,
    pub progress: Progress,
    pub claim: Option<ClaimView>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ClaimView {
    pub doc_id: String,
    pub annotator_id: String,
    pub claimed_at: chrono::DateTime<chrono::Utc>,
    pub state: String,
}

impl From<Claim> for ClaimView {
    fn from(c: Claim) -> Self {
        let state = serde_json::to_value(c.state)
            .ok()
            .and_then(|v| v.as_str().map(String::from))
            .unwrap_or_default();
        ClaimView {
            doc_id: c.doc_id,
            annotator_id: c.annotator_id,
            claimed_at: c.claimed_at,
            state,
        }
    }
}

// ---------------------------------------------------------------------------
// Handlers

async fn get_tagset(State(st): State<AppStateRef>) -> Json<TagsetTree> {
    Json(st.tagset.tree())
}

#[derive(Deserialize)]
struct ListQuery {
    status: Option<String>,
}

async fn list_documents(
    State(st): State<AppStateRef>,
    query: Result<Query<ListQuery>, QueryRejection>,
) -> Result<Json<Vec<DocumentSummary>>, ApiError> {
    let Query(query) = query?;
    let wanted: Option<SentenceStatus> = query
        .status
        .map(|s| s.parse())
        .transpose()
        .map_err(|e: String| ApiError::unprocessable("InvalidQuery", e))?;
    let mut out = Vec::new();
    for id in st.store.document_ids() {
        let Ok(summary) = st.store.read(&id, |doc| DocumentSummary {
            doc_id: doc.doc_id.clone(),
            subcorpus: doc.subcorpus,
            status: doc.status(),
            sentence_count: doc.sentences.len(),
            progress: Progress::of(doc),
            claim: None,
        }) else {
            continue;
        };
        if wanted.is_some_and(|w| w != summary.status) {
            continue;
        }
        out.push(DocumentSummary {
            claim: st.claims.current(&id).map(ClaimView::from),
            ..summary
        });
    }
    Ok(Json(out))
}

async fn claim_document(
    State(st): State<AppStateRef>,
    Authed(who): Authed,
    Path(doc_id): Path<String>,
) -> Result<Json<ClaimView>, ApiError> {
    st.require_document(&doc_id)?;
    let claim = st.claims.claim(&doc_id, &who.annotator_id)?;
    Ok(Json(claim.into()))
}

#[derive(Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
struct ReleaseBody {
    finished: bool,
}

fn optional_json<T: for<'de> Deserialize<'de> + Default>(body: &Bytes) -> Result<T, ApiError> {
    if body.iter().all(u8::is_ascii_whitespace) {
        return Ok(T::default());
    }
    serde_json::from_slice(body).map_err(|e| ApiError::unprocessable("InvalidBody", e.to_string()))
}

async fn release_document(
    State(st): State<AppStateRef>,
    Authed(who): Authed,
    Path(doc_id): Path<String>,
    body: Bytes,
) -> Result<Json<ClaimView>, ApiError> {
    st.require_document(&doc_id)?;
    let body: ReleaseBody = optional_json(&body)?;
    let claim = st.claims.release(&doc_id, &who.annotator_id, body.finished)?;
    Ok(Json(claim.into()))
}

#[derive(Deserialize)]
struct PageQuery {
    from: Option<usize>,
    limit: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SentencePage {
    pub doc_id: String,
    pub from: usize,
    pub total: usize,
    pub sentences: Vec<SentenceView>,
}

async fn get_sentences(
    State(st): State<AppStateRef>,
    Path(doc_id): Path<String>,
    query: Result<Query<PageQuery>, QueryRejection>,
) -> Result<Json<SentencePage>, ApiError> {
    let Query(q) = query?;
    let from = q.from.unwrap_or(0);
    let limit = q.limit.unwrap_or(DEFAULT_PAGE_SIZE).min(MAX_PAGE_SIZE);
    let page = st.store.read(&doc_id, |doc| SentencePage {
        doc_id: doc.doc_id.clone(),
        from,
        total: doc.sentences.len(),
        sentences: doc
            .sentences
            .iter()
            .skip(from)
            .take(limit)
            .map(SentenceView::from)
            .collect(),
    })?;
    Ok(Json(page))
}

async fn get_progress(
    State(st): State<AppStateRef>,
    Path(doc_id): Path<String>,
) -> Result<Json<Progress>, ApiError> {
    Ok(Json(st.store.read(&doc_id, Progress::of)?))
}

#[derive(Deserialize)]
struct TagBody {
    leaf_label: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct TokenWrite {
    pub token: TokenView,
    pub sentence_status: SentenceStatus,
}

fn token_write(s: &Sentence, index: usize) -> TokenWrite {
    let mut view = SentenceView::from(s);
    TokenWrite {
        token: view.tokens.swap_remove(index),
        sentence_status: s.status,
    }
}

async fn put_tag(
    State(st): State<AppStateRef>,
    Authed(who): Authed,
    Path((sid, index)): Path<(String, usize)>,
    body: Result<Json<TagBody>, JsonRejection>,
) -> Result<Json<TokenWrite>, ApiError> {
    let doc_id = st.doc_of_sentence(&sid)?;
    st.claims.touch(&doc_id, &who.annotator_id)?;
    let Json(body) = body?;
    let out = st.mutate(&doc_id, |doc| {
        let s = doc.sentence_mut(&sid)?;
        s.token(index)?;
        let tag = st.tagset.assign_label(&body.leaf_label, Provenance::Manual)?;
        s.set_tag(index, tag)?;
        Ok(token_write(s, index))
    })?;
    Ok(Json(out))
}

async fn delete_tag(
    State(st): State<AppStateRef>,
    Authed(who): Authed,
    Path((sid, index)): Path<(String, usize)>,
) -> Result<Json<TokenWrite>, ApiError> {
    let doc_id = st.doc_of_sentence(&sid)?;
    st.claims.touch(&doc_id, &who.annotator_id)?;
    let out = st.mutate(&doc_id, |doc| {
        let s = doc.sentence_mut(&sid)?;
        s.clear_tag(index)?;
        Ok(token_write(s, index))
    })?;
    Ok(Json(out))
}

async fn confirm_token(
    State(st): State<AppStateRef>,
    Authed(who): Authed,
    Path((sid, index)): Path<(String, usize)>,
) -> Result<Json<TokenWrite>, ApiError> {
    let doc_id = st.doc_of_sentence(&sid)?;
    st.claims.touch(&doc_id, &who.annotator_id)?;
    let out = st.mutate(&doc_id, |doc| {
        let s = doc.sentence_mut(&sid)?;
        s.confirm(index)?;
        Ok(token_write(s, index))
    })?;
    Ok(Json(out))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ConfirmAll {
    pub confirmed: usize,
    pub sentence: SentenceView,
}

async fn confirm_all(
    State(st): State<AppStateRef>,
    Authed(who): Authed,
    Path(sid): Path<String>,
) -> Result<Json<ConfirmAll>, ApiError> {
    let doc_id = st.doc_of_sentence(&sid)?;
    st.claims.touch(&doc_id, &who.annotator_id)?;
    let out = st.mutate(&doc_id, |doc| {
        let s = doc.sentence_mut(&sid)?;
        let confirmed = s.confirm_all();
        Ok(ConfirmAll {
            confirmed,
            sentence: SentenceView::from(&*s),
        })
    })?;
    Ok(Json(out))
}

/// A policy given either as a bare mode name or as a full object.
#[derive(Deserialize)]
#[serde(untagged)]
enum PolicySpec {
    Mode(PolicyMode),
    Full(AutotagPolicy),
}

#[derive(Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
struct AutotagBody {
    policy: Option<PolicySpec>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct AutotagResult {
    pub doc_id: String,
    pub policy: AutotagPolicy,
    pub suggested: usize,
    pub progress: Progress,
}

async fn autotag_document(
    State(st): State<AppStateRef>,
    Authed(who): Authed,
    Path(doc_id): Path<String>,
    body: Bytes,
) -> Result<Json<AutotagResult>, ApiError> {
    st.require_document(&doc_id)?;
    st.claims.touch(&doc_id, &who.annotator_id)?;
    let body: AutotagBody = optional_json(&body)?;
    let policy = match body.policy {
        None => st.config.default_policy,
        Some(PolicySpec::Mode(mode)) => AutotagPolicy::new(mode, st.config.default_policy.min_count),
        Some(PolicySpec::Full(p)) => AutotagPolicy::new(p.mode, p.min_count),
    };
    let lexicon = st.lexicon();
    let out = st.mutate(&doc_id, |doc| {
        let suggested = doc
            .sentences
            .iter_mut()
            .map(|s| autotag_sentence(s, &lexicon, &policy, &st.tagset))
            .sum();
        Ok(AutotagResult {
            doc_id: doc.doc_id.clone(),
            policy,
            suggested,
            progress: Progress::of(doc),
        })
    })?;
    Ok(Json(out))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct LexiconSummary {
    pub forms: usize,
    pub source_note: String,
}

async fn rebuild_lexicon(
    State(st): State<AppStateRef>,
    Authed(_): Authed,
) -> Result<Json<LexiconSummary>, ApiError> {
    let corpus = st.store.snapshot();
    let lexicon = AutotagLexicon::build(corpus.sentences(), &st.tagset)
        .map_err(|e| ApiError::unprocessable("InvalidTagInInput", e.to_string()))?;
    let summary = LexiconSummary {
        forms: lexicon.len(),
        source_note: lexicon.source_note.clone(),
    };
    *st.lexicon.write().unwrap() = Arc::new(lexicon);
    Ok(Json(summary))
}

#[derive(Deserialize)]
struct SuggestQuery {
    form: String,
    mode: Option<PolicyMode>,
    min_count: Option<u32>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Suggestion {
    pub form: String,
    pub counts: BTreeMap<String, u32>,
    pub policy: AutotagPolicy,
    pub suggestion: Option<String>,
}

async fn suggest(
    State(st): State<AppStateRef>,
    query: Result<Query<SuggestQuery>, QueryRejection>,
) -> Result<Json<Suggestion>, ApiError> {
    let Query(q) = query?;
    let default = st.config.default_policy;
    let policy = AutotagPolicy::new(
        q.mode.unwrap_or(default.mode),
        q.min_count.unwrap_or(default.min_count),
    );
    let lexicon = st.lexicon();
    Ok(Json(Suggestion {
        counts: lexicon.counts(&q.form).cloned().unwrap_or_default(),
        suggestion: lexicon.suggest(&q.form, &policy).map(String::from),
        form: q.form,
        policy,
    }))
}

async fn get_stats(State(st): State<AppStateRef>) -> Json<CorpusStats> {
    Json(st.store.stats())
}

async fn get_metadata(State(st): State<AppStateRef>) -> Result<Json<GeneralMeta>, ApiError> {
    let corpus = st.store.snapshot();
    let catalog = st.catalog.read().unwrap();
    Ok(Json(build_general_meta(&corpus, &catalog)?))
}

#[derive(Deserialize)]
struct ExportQuery {
    format: String,
    doc: Option<String>,
}

async fn export(
    State(st): State<AppStateRef>,
    query: Result<Query<ExportQuery>, QueryRejection>,
) -> Result<Response, ApiError> {
    let Query(q) = query?;
    match q.format.as_str() {
        "xml" => {
            let corpus = st.store.snapshot();
            let corpus = match &q.doc {
                Some(id) => {
                    let doc = corpus
                        .document(id)
                        .cloned()
                        .ok_or_else(|| ann_core::CorpusError::UnknownDocument(id.clone()))?;
                    let mut single = Corpus::new();
                    single.add_document(doc)?;
                    single
                }
                None => corpus,
            };
            let catalog = st.catalog.read().unwrap().clone();
            let xml = export_xml(&corpus, &catalog, &st.tagset)?;
            Ok(([(header::CONTENT_TYPE, "application/xml; charset=utf-8")], xml).into_response())
        }
        "tsv" => {
            let id = q.doc.ok_or_else(|| {
                ApiError::unprocessable("InvalidQuery", "tsv export needs a doc parameter")
            })?;
            let tsv = st.store.read(&id, export_tsv)?;
            Ok((
                [(header::CONTENT_TYPE, "text/tab-separated-values; charset=utf-8")],
                tsv,
            )
                .into_response())
        }
        other => Err(ApiError::unprocessable(
            "InvalidQuery",
            format!("unknown export format {other:?}; expected xml or tsv"),
        )),
    }
}

