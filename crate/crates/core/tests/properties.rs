mod common;

use std::collections::HashSet;

use proptest::prelude::*;
use rand::Rng;

use ann_core::autotag::{autotag_sentence, AutotagLexicon, AutotagPolicy, PolicyMode};
use ann_core::corpus::{
    is_punctuation, tokenize, Corpus, Sentence, SentenceSplitter, SentenceStatus,
};
use ann_core::metadata::validate_catalog;
use ann_core::serialization::{export_tsv, export_xml, import_tsv, import_xml};
use ann_core::tagset::{Provenance, Tagset};
use common::*;

fn policy_strategy() -> impl Strategy<Value = AutotagPolicy> {
    (prop::bool::ANY, 1u32..4).prop_map(|(mf, min)| {
        let mode = if mf {
            PolicyMode::MostFrequent
        } else {
            PolicyMode::UnambiguousOnly
        };
        AutotagPolicy::new(mode, min)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn tokens_cover_text(text in "\\PC{0,60}") {
        let tokens = tokenize(&text);
        let chars: Vec<char> = text.chars().collect();
        let mut prev_end = 0;
        for t in &tokens {
            prop_assert!(t.span.start >= prev_end && t.span.end > t.span.start);
            let slice: String = chars[t.span.start..t.span.end].iter().collect();
            prop_assert_eq!(&slice, &t.surface);
            // Gaps between tokens hold only whitespace.
            prop_assert!(chars[prev_end..t.span.start].iter().all(|c| c.is_whitespace()));
            let punct = t.surface.chars().filter(|c| is_punctuation(*c)).count();
            prop_assert!(punct == 0 || punct == t.surface.chars().count());
            prev_end = t.span.end;
        }
        prop_assert!(chars[prev_end..].iter().all(|c| c.is_whitespace()));
        let squeezed: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        let joined: String = tokens.iter().map(|t| t.surface.as_str()).collect();
        prop_assert_eq!(joined, squeezed);
    }

    #[test]
    fn detokenize_restores_text(seed in any::<u64>()) {
        let mut r = rng(seed);
        let text = random_text(&mut r, 20);
        let s = Sentence::new("x.0001", text.clone());
        prop_assert_eq!(s.detokenize(), text);
    }

    #[test]
    fn from_parts_inverts_tokenize(seed in any::<u64>()) {
        let mut r = rng(seed);
        let ts = Tagset::magahi();
        let mut s = Sentence::new("x.0001", random_text(&mut r, 20));
        random_tags(&mut r, &mut s, &ts);
        let parts = s.tokens.iter().map(|t| (t.surface.clone(), t.tag.clone())).collect();
        let rebuilt = Sentence::from_parts(s.id.clone(), s.text.clone(), parts, s.status).unwrap();
        prop_assert_eq!(rebuilt, s);
    }

    #[test]
    fn tsv_roundtrip(seed in any::<u64>()) {
        let ts = Tagset::magahi();
        let mut r = rng(seed);
        let mut doc = random_document(&mut r, "doc", 12, &ts);
        if r.gen_bool(0.5) {
            doc.metadata_ref = Some("written-0001".into());
        }
        let tsv = export_tsv(&doc);
        let back = import_tsv(&tsv, &ts).unwrap();
        prop_assert_eq!(&back, &doc);
        prop_assert_eq!(export_tsv(&back), tsv);
    }

    #[test]
    fn xml_roundtrip(seed in any::<u64>()) {
        let ts = Tagset::magahi();
        let mut r = rng(seed);
        let (corpus, catalog) = random_corpus(&mut r, 4, 6, &ts);
        prop_assert!(!validate_catalog(&corpus, &catalog).has_errors());
        let xml = export_xml(&corpus, &catalog, &ts).unwrap();
        let (c2, k2) = import_xml(&xml, &ts).unwrap();
        prop_assert_eq!(&c2, &corpus);
        prop_assert_eq!(&k2, &catalog);
        prop_assert_eq!(export_xml(&c2, &k2, &ts).unwrap(), xml);
    }

    #[test]
    fn exported_tags_parse_strictly(seed in any::<u64>()) {
        let ts = Tagset::magahi();
        let mut r = rng(seed);
        let doc = random_document(&mut r, "doc", 8, &ts);
        let tsv = export_tsv(&doc);
        for line in tsv.lines().filter(|l| l.contains('\t')) {
            let conv = line.split('\t').nth(1).unwrap();
            if conv != "-" {
                prop_assert!(ts.parse_tag(conv).is_ok(), "{}", conv);
            }
        }
    }

    #[test]
    fn ingest_ids_are_unique(seed in any::<u64>(), danda in prop::bool::ANY) {
        let mut r = rng(seed);
        let mut corpus = Corpus::new();
        let splitter = if danda { SentenceSplitter::Danda } else { SentenceSplitter::Lines };
        for i in 0..8 {
            let lines: Vec<String> = (0..r.gen_range(0..6)).map(|_| random_text(&mut r, 8)).collect();
            let doc_id = format!("d{i}");
            corpus
                .ingest_document(lines.join("\n").as_bytes(), &doc_id, random_subcorpus(&mut r), splitter)
                .unwrap();
        }
        let mut seen = HashSet::new();
        for doc in corpus.documents() {
            for (n, s) in doc.sentences.iter().enumerate() {
                prop_assert!(seen.insert(s.id.clone()));
                prop_assert_eq!(&s.id, &format!("{}.{:04}", doc.doc_id, n + 1));
                prop_assert_eq!(corpus.document_of(&s.id), Some(doc.doc_id.as_str()));
                prop_assert_eq!(s.status, SentenceStatus::Raw);
            }
        }
    }

    #[test]
    fn lexicon_matches_recount(seed in any::<u64>(), policy in policy_strategy()) {
        let ts = Tagset::magahi();
        let mut r = rng(seed);
        let sentences = lexicon_fixture(&mut r, &ts, 200, 20);
        let lexicon = AutotagLexicon::build(&sentences, &ts).unwrap();
        let expected = brute_force_counts(&manual_pairs(&sentences));
        prop_assert_eq!(flatten(&lexicon), expected.clone());
        for surface in WORDS.iter().take(20) {
            prop_assert_eq!(
                lexicon.suggest(surface, &policy).map(String::from),
                brute_force_suggest(&expected, surface, &policy)
            );
        }
        let reread = AutotagLexicon::from_tsv(&lexicon.to_tsv(), &ts).unwrap();
        prop_assert_eq!(reread.entries, lexicon.entries);
    }

    #[test]
    fn autotag_never_overwrites_manual(seed in any::<u64>(), policy in policy_strategy()) {
        let ts = Tagset::magahi();
        let mut r = rng(seed);
        let lexicon = AutotagLexicon::build(&lexicon_fixture(&mut r, &ts, 200, 20), &ts).unwrap();
        let mut s = Sentence::new("s.0001", random_text(&mut r, 20));
        random_tags(&mut r, &mut s, &ts);
        let before = s.clone();
        autotag_sentence(&mut s, &lexicon, &policy, &ts);
        for (a, b) in before.tokens.iter().zip(&s.tokens) {
            if a.is_manual() {
                prop_assert_eq!(a, b);
            }
            prop_assert_eq!(&a.surface, &b.surface);
            if let Some(tag) = &b.tag {
                if !a.is_manual() && a.tag.as_ref() != Some(tag) {
                    prop_assert_eq!(tag.provenance, Provenance::Auto);
                    prop_assert_eq!(Some(tag.convention.as_str()), lexicon.suggest(&b.surface, &policy));
                }
            }
        }
        if before.status == SentenceStatus::Raw {
            prop_assert_eq!(s.status, SentenceStatus::Autotagged);
        } else {
            prop_assert_eq!(s.status, before.status);
        }
    }

    #[test]
    fn autotag_is_idempotent_and_deterministic(seed in any::<u64>(), policy in policy_strategy()) {
        let ts = Tagset::magahi();
        let mut r = rng(seed);
        let lexicon = AutotagLexicon::build(&lexicon_fixture(&mut r, &ts, 120, 20), &ts).unwrap();
        let mut s = Sentence::new("s.0001", random_text(&mut r, 20));
        random_tags(&mut r, &mut s, &ts);
        let mut once = s.clone();
        autotag_sentence(&mut once, &lexicon, &policy, &ts);
        let mut again = s.clone();
        autotag_sentence(&mut again, &lexicon, &policy, &ts);
        prop_assert_eq!(&once, &again);
        let mut twice = once.clone();
        autotag_sentence(&mut twice, &lexicon, &policy, &ts);
        prop_assert_eq!(twice, once);
    }

    #[test]
    fn stats_are_additive(seed in any::<u64>()) {
        let ts = Tagset::magahi();
        let mut r = rng(seed);
        let (corpus, _) = random_corpus(&mut r, 6, 5, &ts);
        let stats = corpus.compute_stats();
        let mut words = 0;
        let mut sentences = 0;
        for doc in corpus.documents() {
            let mut single = Corpus::new();
            single.add_document(doc.clone()).unwrap();
            let s = single.compute_stats();
            words += s.word_count;
            sentences += s.sentence_count;
        }
        prop_assert_eq!((stats.word_count, stats.sentence_count), (words, sentences));
        let by_mode_words: usize = stats.by_mode.values().map(|c| c.word_count).sum();
        let by_mode_sentences: usize = stats.by_mode.values().map(|c| c.sentence_count).sum();
        prop_assert_eq!((by_mode_words, by_mode_sentences), (words, sentences));
    }
}

#[test]
fn raw_word_count_matches_text_scan() {
    let mut r = rng(7);
    for i in 0..200 {
        let text = random_text(&mut r, 15);
        let s = Sentence::new(format!("w.{i:04}"), text.clone());
        assert_eq!(s.word_count(), count_words(&text), "{text:?}");
    }
}
