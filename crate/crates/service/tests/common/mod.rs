#![allow(dead_code)]

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicI64, Ordering};
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use chrono::{DateTime, TimeDelta};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use ann_core::autotag::AutotagLexicon;
use ann_core::corpus::{Corpus, Document, Genre, PrintSource, SentenceSplitter, SubcorpusPath};
use ann_core::metadata::{Catalog, RecordKind};
use ann_core::tagset::Tagset;
use ann_service::auth::{Annotator, AnnotatorRegistry};
use ann_service::claims::Clock;
use ann_service::{router, AppState, ServiceConfig};

pub const DOC: &str = "tale";
/// Two sentences, ten tokens; `du` and `go` occur twice each.
pub const TEXT: &str = "həm du go khailiyo\nek go du ləika ke dekhlthi";

pub fn prose() -> SubcorpusPath {
    SubcorpusPath::IndirectWritten {
        source: PrintSource::Book,
        genre: Genre::Prose,
    }
}

pub fn lexicon() -> AutotagLexicon {
    let mut entries = BTreeMap::new();
    entries.insert("go".to_string(), BTreeMap::from([("RP__CL".to_string(), 5)]));
    entries.insert("du".to_string(), BTreeMap::from([("QT__QTC".to_string(), 2)]));
    entries.insert(
        "je".to_string(),
        BTreeMap::from([("PR__PRL".to_string(), 3), ("DM__DMR".to_string(), 2)]),
    );
    AutotagLexicon {
        entries,
        source_note: "fixture".into(),
    }
}

pub fn token(i: usize) -> String {
    format!("token-{i}")
}

/// Annotators `a0`..`a{n-1}` with bearer tokens `token-{i}`.
pub fn registry(n: usize) -> AnnotatorRegistry {
    AnnotatorRegistry::new((0..n).map(|i| Annotator {
        annotator_id: format!("a{i}"),
        display_name: format!("Annotator {i}"),
        token: token(i),
    }))
    .unwrap()
}

pub fn fixture_corpus() -> (Corpus, Catalog) {
    let mut catalog = Catalog::new();
    let fields = json!({
        "title": "Ek Kahani",
        "author": "R. Prasad",
        "publication": "Magadhbhumi",
        "publication_date": "2009-04-01",
        "entry_date": "2011-07-12",
        "entered_by": "a0",
        "sentence_ids": ["tale.0001", "tale.0002"],
    });
    let record = catalog
        .create_record(RecordKind::Written, fields.as_object().unwrap())
        .unwrap()
        .record_id()
        .to_string();
    let mut doc = Document::from_text(DOC, prose(), TEXT, SentenceSplitter::Lines);
    doc.metadata_ref = Some(record);
    let mut corpus = Corpus::new();
    corpus.add_document(doc).unwrap();
    (corpus, catalog)
}

pub struct ManualClock {
    pub minutes: Arc<AtomicI64>,
}

impl ManualClock {
    pub fn advance(&self, minutes: i64) {
        self.minutes.fetch_add(minutes, Ordering::SeqCst);
    }
}

pub fn manual_clock() -> (Clock, ManualClock) {
    let minutes = Arc::new(AtomicI64::new(0));
    let m = minutes.clone();
    let base = DateTime::from_timestamp(1_300_000_000, 0).unwrap();
    let clock: Clock = Arc::new(move || base + TimeDelta::minutes(m.load(Ordering::SeqCst)));
    (clock, ManualClock { minutes })
}

pub struct TestApp {
    pub app: Router,
    pub state: Arc<AppState>,
    pub clock: ManualClock,
}

pub fn app_with(corpus: Corpus, catalog: Catalog, annotators: usize, config: ServiceConfig) -> TestApp {
    let (clock, manual) = manual_clock();
    let state = Arc::new(AppState::with_clock(
        Tagset::magahi(),
        corpus,
        catalog,
        lexicon(),
        registry(annotators),
        config,
        clock,
    ));
    TestApp {
        app: router(state.clone()),
        state,
        clock: manual,
    }
}

pub fn app() -> TestApp {
    let (corpus, catalog) = fixture_corpus();
    app_with(corpus, catalog, 4, ServiceConfig::default())
}

pub async fn call_raw(
    app: &Router,
    method: &str,
    uri: &str,
    bearer: Option<&str>,
    body: Option<Value>,
) -> (StatusCode, String) {
    let mut req = Request::builder().method(method).uri(uri);
    if let Some(t) = bearer {
        req = req.header("authorization", format!("Bearer {t}"));
    }
    let body = match body {
        Some(v) => {
            req = req.header("content-type", "application/json");
            Body::from(v.to_string())
        }
        None => Body::empty(),
    };
    let resp = app.clone().oneshot(req.body(body).unwrap()).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, String::from_utf8(bytes.to_vec()).unwrap())
}

pub async fn call(
    app: &Router,
    method: &str,
    uri: &str,
    bearer: Option<&str>,
    body: Option<Value>,
) -> (StatusCode, Value) {
    let (status, text) = call_raw(app, method, uri, bearer, body).await;
    let value = serde_json::from_str(&text).unwrap_or(Value::String(text));
    (status, value)
}
