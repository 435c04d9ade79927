//! Seeded fixture generators and brute-force oracles shared by the
//! integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use serde_json::{json, Map, Value};

use ann_core::autotag::{AutotagLexicon, AutotagPolicy, PolicyMode};
use ann_core::corpus::{
    is_punctuation, Channel, Corpus, Document, Sentence, SentenceStatus, SubcorpusPath,
};
use ann_core::metadata::{Catalog, RecordKind};
use ann_core::tagset::{Provenance, Tagset};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// Word forms drawn from the tagset examples plus Devanagari, mixed case
/// and characters that need escaping in XML.
pub const WORDS: &[&str] = &[
    "həm", "go", "du", "je", "jəkər", "ʈʰo", "ləika", "ke", "me", "hae", "ek", "tin", "bəhut",
    "dekhlthi", "khailiyo", "u", "ham", "Ram", "मगही", "भाषा", "a<b", "x>y", "Tom&Jerry", "ná",
    "ɡʰər", "pəʈna", "2011",
];

pub const PUNCT: &[&str] = &[",", ".", "?", "!", "।", "॥", "\"", "'", "(", ")", "-", "...", "&", ";"];

const GAPS: &[&str] = &[" ", " ", " ", "  ", "\t", " \u{a0}"];

/// Random sentence text: words separated by whitespace, with punctuation
/// sometimes glued to either side.
pub fn random_text(rng: &mut StdRng, max_words: usize) -> String {
    let n = rng.gen_range(1..=max_words);
    let mut out = String::new();
    for i in 0..n {
        if i > 0 {
            out.push_str(GAPS.choose(rng).unwrap());
        }
        if rng.gen_bool(0.1) {
            out.push_str(PUNCT.choose(rng).unwrap());
        }
        out.push_str(WORDS.choose(rng).unwrap());
        if rng.gen_bool(0.2) {
            out.push_str(PUNCT.choose(rng).unwrap());
        }
        if rng.gen_bool(0.05) {
            out.push(' ');
            out.push_str(PUNCT.choose(rng).unwrap());
        }
    }
    out
}

pub fn random_provenance(rng: &mut StdRng) -> Provenance {
    match rng.gen_range(0..5) {
        0 | 1 => Provenance::Manual,
        2 | 3 => Provenance::Auto,
        _ => Provenance::Suggested,
    }
}

/// Tags a random subset of tokens with random tagset nodes, leaves mostly.
pub fn random_tags(rng: &mut StdRng, sentence: &mut Sentence, tagset: &Tagset) {
    let leaves: Vec<&str> = tagset.leaves().map(|n| n.convention()).collect();
    let all: Vec<&str> = tagset.nodes().map(|n| n.convention()).collect();
    for token in &mut sentence.tokens {
        if rng.gen_bool(0.4) {
            continue;
        }
        let conv = if rng.gen_bool(0.9) {
            leaves.choose(rng).unwrap()
        } else {
            all.choose(rng).unwrap()
        };
        token.tag = Some(
            tagset
                .assign_convention(conv, random_provenance(rng))
                .unwrap(),
        );
    }
    sentence.status = *[
        SentenceStatus::Raw,
        SentenceStatus::Autotagged,
        SentenceStatus::InProgress,
        SentenceStatus::Complete,
    ]
    .choose(rng)
    .unwrap();
}

pub fn random_subcorpus(rng: &mut StdRng) -> SubcorpusPath {
    *SubcorpusPath::all().choose(rng).unwrap()
}

pub fn random_document(rng: &mut StdRng, doc_id: &str, max_sentences: usize, tagset: &Tagset) -> Document {
    let mut doc = Document::new(doc_id, random_subcorpus(rng));
    let n = rng.gen_range(0..=max_sentences);
    for i in 1..=n {
        let mut s = Sentence::new(format!("{doc_id}.{i:04}"), random_text(rng, 12));
        random_tags(rng, &mut s, tagset);
        doc.sentences.push(s);
    }
    doc
}

fn date(rng: &mut StdRng) -> String {
    format!(
        "{}-{:02}-{:02}",
        rng.gen_range(1990..2012),
        rng.gen_range(1..=12),
        rng.gen_range(1..=28)
    )
}

fn participants(rng: &mut StdRng) -> Value {
    let n = rng.gen_range(1..4);
    Value::Array(
        (0..n)
            .map(|i| {
                let mut p = json!({"pseudonym": format!("P{i}"), "role": "speaker"});
                if rng.gen_bool(0.5) {
                    p["age_band"] = json!("30-39");
                }
                p
            })
            .collect(),
    )
}

/// A complete, valid field map for a cataloguing record fitting `subcorpus`.
pub fn cataloguing_fields(rng: &mut StdRng, subcorpus: SubcorpusPath, sentence_ids: &[String]) -> (RecordKind, Map<String, Value>) {
    let ids = json!(sentence_ids);
    let value = match subcorpus {
        SubcorpusPath::IndirectWritten { .. } => json!({
            "title": "Bhukhal Bagh & other stories",
            "author": "R. Prasad",
            "publication": "Magadhbhumi",
            "publication_date": date(rng),
            "page_range": "12-19",
            "entry_date": date(rng),
            "entered_by": "annotator-1",
            "sentence_ids": ids,
        }),
        SubcorpusPath::DirectWritten {
            channel: Channel::CmcAsynchronous,
        } => json!({
            "channel": "cmc_asynchronous",
            "source_name": "magahi blog",
            "writer": "writer <one>",
            "posted_date": date(rng),
            "entry_date": date(rng),
            "url": "http://example.org/post?id=1&lang=mag",
            "sentence_ids": ids,
        }),
        SubcorpusPath::DirectWritten { channel } => json!({
            "channel": channel.as_str(),
            "posted_date": date(rng),
            "participants": participants(rng),
            "sentence_ids": ids,
        }),
        SubcorpusPath::Spoken { .. } => json!({
            "record_date": date(rng),
            "record_time": "14:05",
            "place": "Gaya",
            "recorded_by": "field worker",
            "original_format": "wav",
            "original_encoding": "PCM 16-bit",
            "current_format": "flac",
            "current_encoding": "FLAC",
            "device": "Zoom H4n",
            "context_description": "family conversation",
            "duration_seconds": rng.gen_range(1..5000) as f64 + 0.5,
            "participants": participants(rng),
            "bystanders": [],
            "sentence_ids": ids,
        }),
    };
    let kind = RecordKind::for_mode(subcorpus.mode());
    (kind, value.as_object().unwrap().clone())
}

/// A corpus of `n_docs` random documents with a valid catalog: one
/// cataloguing record per document and a descriptive record for most
/// branches.
pub fn random_corpus(rng: &mut StdRng, n_docs: usize, max_sentences: usize, tagset: &Tagset) -> (Corpus, Catalog) {
    let mut corpus = Corpus::new();
    let mut catalog = Catalog::new();
    for i in 0..n_docs {
        let mut doc = random_document(rng, &format!("doc{i:03}"), max_sentences, tagset);
        let ids: Vec<String> = doc
            .sentences
            .iter()
            .filter(|_| rng.gen_bool(0.7))
            .map(|s| s.id.clone())
            .collect();
        let (kind, fields) = cataloguing_fields(rng, doc.subcorpus, &ids);
        let id = catalog.create_record(kind, &fields).unwrap().record_id().to_string();
        doc.metadata_ref = Some(id);
        corpus.add_document(doc).unwrap();
    }
    let branches: std::collections::BTreeSet<SubcorpusPath> =
        corpus.documents().map(|d| d.subcorpus).collect();
    for branch in branches {
        if rng.gen_bool(0.8) {
            let fields = json!({
                "subcorpus": branch.to_string(),
                "summary": "texts \"collected\" in 2011",
                "themes": [{"doc_id": "doc000", "theme": "folk <tale>"}],
                "structure_note": "one file per source",
                "access_software_note": "UTF-8 text editor",
            });
            catalog
                .create_record(RecordKind::Descriptive, fields.as_object().unwrap())
                .unwrap();
        }
    }
    (corpus, catalog)
}

// ---------------------------------------------------------------------------
// Oracles

/// Manual (surface, convention) pairs in order of occurrence.
pub fn manual_pairs<'a>(sentences: impl IntoIterator<Item = &'a Sentence>) -> Vec<(String, String)> {
    let mut out = Vec::new();
    for s in sentences {
        for t in &s.tokens {
            if let Some(tag) = &t.tag {
                if tag.provenance == Provenance::Manual {
                    out.push((t.surface.clone(), tag.convention.clone()));
                }
            }
        }
    }
    out
}

/// Recount by scanning the pair list once per distinct pair.
pub fn brute_force_counts(pairs: &[(String, String)]) -> Vec<(String, String, u32)> {
    let mut distinct: Vec<&(String, String)> = Vec::new();
    for p in pairs {
        if !distinct.contains(&p) {
            distinct.push(p);
        }
    }
    let mut out: Vec<(String, String, u32)> = distinct
        .into_iter()
        .map(|(s, c)| {
            let n = pairs.iter().filter(|(s2, c2)| s2 == s && c2 == c).count() as u32;
            (s.clone(), c.clone(), n)
        })
        .collect();
    out.sort();
    out
}

pub fn flatten(lexicon: &AutotagLexicon) -> Vec<(String, String, u32)> {
    let mut out = Vec::new();
    for (surface, counts) in &lexicon.entries {
        for (conv, n) in counts {
            out.push((surface.clone(), conv.clone(), *n));
        }
    }
    out.sort();
    out
}

/// Policy selection by sorting candidates: count descending, then
/// convention ascending.
pub fn brute_force_suggest(counts: &[(String, String, u32)], surface: &str, policy: &AutotagPolicy) -> Option<String> {
    let mut eligible: Vec<(u32, String)> = counts
        .iter()
        .filter(|(s, _, n)| s == surface && *n >= policy.min_count)
        .map(|(_, c, n)| (*n, c.clone()))
        .collect();
    match policy.mode {
        PolicyMode::UnambiguousOnly => (eligible.len() == 1).then(|| eligible.remove(0).1),
        PolicyMode::MostFrequent => {
            eligible.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
            eligible.into_iter().next().map(|(_, c)| c)
        }
    }
}

/// Sentences over at most `forms` distinct surfaces and `max_tokens`
/// tokens in total, each token tagged manually with a convention drawn
/// from a small per-form pool so that ties and ambiguity are common.
pub fn lexicon_fixture(rng: &mut StdRng, tagset: &Tagset, max_tokens: usize, forms: usize) -> Vec<Sentence> {
    let surfaces: Vec<&str> = WORDS.iter().copied().take(forms).collect();
    let leaves: Vec<String> = tagset.leaves().map(|n| n.convention().to_string()).collect();
    let pools: BTreeMap<&str, Vec<String>> = surfaces
        .iter()
        .map(|s| {
            let k = rng.gen_range(1..=3);
            (*s, (0..k).map(|_| leaves.choose(rng).unwrap().clone()).collect())
        })
        .collect();
    let total = rng.gen_range(0..=max_tokens);
    let mut sentences = Vec::new();
    let mut left = total;
    let mut n = 0;
    while left > 0 {
        let len = rng.gen_range(1..=left.min(15));
        left -= len;
        n += 1;
        let words: Vec<&str> = (0..len).map(|_| *surfaces.choose(rng).unwrap()).collect();
        let mut s = Sentence::new(format!("fx.{n:04}"), words.join(" "));
        for t in &mut s.tokens {
            let conv = pools[t.surface.as_str()].choose(rng).unwrap();
            let prov = if rng.gen_bool(0.75) {
                Provenance::Manual
            } else {
                random_provenance(rng)
            };
            t.tag = if rng.gen_bool(0.1) {
                None
            } else {
                Some(tagset.assign_convention(conv, prov).unwrap())
            };
        }
        sentences.push(s);
    }
    sentences
}

/// Words in `text`: maximal runs of non-punctuation, non-whitespace
/// characters.
pub fn count_words(text: &str) -> usize {
    let mut n = 0;
    let mut in_word = false;
    for c in text.chars() {
        let word_char = !c.is_whitespace() && !is_punctuation(c);
        if word_char && !in_word {
            n += 1;
        }
        in_word = word_char;
    }
    n
}
