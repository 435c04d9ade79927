//! Lexicon-based autotagging.
//!
//! A lexicon maps exact surface forms to the frequency of each convention
//! string observed on manually tagged tokens. Applying it pre-fills tags with
//! `auto` provenance for a human to confirm or override. Manual tags are
//! never touched.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Sentence, SentenceStatus};
use crate::tagset::{Provenance, Tagset};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AutotagError {
    #[error("sentence {sentence_id}: token {index} carries an unparseable tag")]
    InvalidTagInInput { sentence_id: String, index: usize },
    #[error("lexicon line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyMode {
    /// Suggest only when exactly one tag reaches `min_count`.
    UnambiguousOnly,
    /// Suggest the highest-count tag among those reaching `min_count`;
    /// ties go to the lexicographically smallest convention.
    MostFrequent,
}

impl FromStr for PolicyMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.replace('-', "_").as_str() {
            "unambiguous_only" => Ok(PolicyMode::UnambiguousOnly),
            "most_frequent" => Ok(PolicyMode::MostFrequent),
            _ => Err(format!("unknown autotag policy {s:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(default)]
pub struct AutotagPolicy {
    pub mode: PolicyMode,
    pub min_count: u32,
}

impl Default for AutotagPolicy {
    fn default() -> Self {
        AutotagPolicy {
            mode: PolicyMode::UnambiguousOnly,
            min_count: 1,
        }
    }
}

impl AutotagPolicy {
    pub fn new(mode: PolicyMode, min_count: u32) -> Self {
        AutotagPolicy {
            mode,
            min_count: min_count.max(1),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AutotagLexicon {
    pub entries: BTreeMap<String, BTreeMap<String, u32>>,
    pub source_note: String,
}

impl AutotagLexicon {
    /// Counts manual tags per surface form. Auto and suggested tags are
    /// skipped so suggestions never feed back into the lexicon.
    pub fn build<'a, I>(sentences: I, tagset: &Tagset) -> Result<AutotagLexicon, AutotagError>
    where
        I: IntoIterator<Item = &'a Sentence>,
    {
        let mut lexicon = AutotagLexicon {
            entries: BTreeMap::new(),
            source_note: format!("built from manual annotations, tagset {}", tagset.version()),
        };
        for sentence in sentences {
            for (index, token) in sentence.tokens.iter().enumerate() {
                let Some(tag) = token.tag.as_ref().filter(|t| t.provenance == Provenance::Manual)
                else {
                    continue;
                };
                if tagset.parse_tag(&tag.convention).is_err() {
                    return Err(AutotagError::InvalidTagInInput {
                        sentence_id: sentence.id.clone(),
                        index,
                    });
                }
                *lexicon
                    .entries
                    .entry(token.surface.clone())
                    .or_default()
                    .entry(tag.convention.clone())
                    .or_default() += 1;
            }
        }
        Ok(lexicon)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn counts(&self, surface: &str) -> Option<&BTreeMap<String, u32>> {
        self.entries.get(surface)
    }

    /// The convention the policy would suggest for `surface`, if any.
    pub fn suggest(&self, surface: &str, policy: &AutotagPolicy) -> Option<&str> {
        let counts = self.entries.get(surface)?;
        let mut eligible = counts
            .iter()
            .filter(|(_, &n)| n >= policy.min_count.max(1));
        match policy.mode {
            PolicyMode::UnambiguousOnly => {
                let first = eligible.next()?;
                eligible.next().is_none().then_some(first.0.as_str())
            }
            // BTreeMap iterates conventions in ascending order, so keeping the
            // first maximum implements the tie-break.
            PolicyMode::MostFrequent => eligible
                .fold(None::<(&String, u32)>, |best, (conv, &n)| match best {
                    Some((_, m)) if m >= n => best,
                    _ => Some((conv, n)),
                })
                .map(|(conv, _)| conv.as_str()),
        }
    }

    /// Writes `surface<TAB>convention<TAB>count` lines sorted by surface then
    /// convention.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (surface, counts) in &self.entries {
            for (conv, n) in counts {
                let _ = writeln!(out, "{surface}\t{conv}\t{n}");
            }
        }
        out
    }

    /// Reads the TSV form. Blank lines and `#` comments are skipped; repeated
    /// `(surface, convention)` pairs are rejected.
    pub fn from_tsv(text: &str, tagset: &Tagset) -> Result<AutotagLexicon, AutotagError> {
        let mut lexicon = AutotagLexicon {
            entries: BTreeMap::new(),
            source_note: "loaded from TSV".to_string(),
        };
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let err = |reason: String| AutotagError::Parse {
                line: line_no,
                reason,
            };
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let [surface, conv, count] = fields.as_slice() else {
                return Err(err(format!("expected 3 fields, found {}", fields.len())));
            };
            if surface.is_empty() || surface.chars().any(char::is_whitespace) {
                return Err(err(format!("invalid surface form {surface:?}")));
            }
            if tagset.parse_tag(conv).is_err() {
                return Err(err(format!("unknown tag {conv:?}")));
            }
            let n: u32 = count
                .trim()
                .parse()
                .ok()
                .filter(|n| *n >= 1)
                .ok_or_else(|| err(format!("count {count:?} is not a positive integer")))?;
            let slot = lexicon.entries.entry(surface.to_string()).or_default();
            if slot.insert(conv.to_string(), n).is_some() {
                return Err(err(format!("duplicate entry for {surface:?} / {conv:?}")));
            }
        }
        Ok(lexicon)
    }
}

/// Fills suggestions into every non-manual token the lexicon covers and
/// returns how many tokens received one. A raw sentence becomes autotagged.
///
/// Tokens without a suggestion keep whatever pending tag they had.
pub fn autotag_sentence(
    sentence: &mut Sentence,
    lexicon: &AutotagLexicon,
    policy: &AutotagPolicy,
    tagset: &Tagset,
) -> usize {
    let mut suggested = 0;
    for token in &mut sentence.tokens {
        if token.is_manual() {
            continue;
        }
        let Some(conv) = lexicon.suggest(&token.surface, policy) else {
            continue;
        };
        // Lexicon conventions are checked on load, but a lexicon built for a
        // different tagset could still slip through.
        if let Ok(tag) = tagset.assign_convention(conv, Provenance::Auto) {
            token.tag = Some(tag);
            suggested += 1;
        }
    }
    if sentence.status == SentenceStatus::Raw {
        sentence.status = SentenceStatus::Autotagged;
    }
    suggested
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Sentence;

    fn lexicon(entries: &[(&str, &[(&str, u32)])]) -> AutotagLexicon {
        AutotagLexicon {
            entries: entries
                .iter()
                .map(|(s, counts)| {
                    (
                        s.to_string(),
                        counts.iter().map(|(c, n)| (c.to_string(), *n)).collect(),
                    )
                })
                .collect(),
            source_note: String::new(),
        }
    }

    fn tagged(id: &str, text: &str, labels: &[Option<(&str, Provenance)>], ts: &Tagset) -> Sentence {
        let mut s = Sentence::new(id, text);
        for (i, l) in labels.iter().enumerate() {
            if let Some((label, prov)) = l {
                s.tokens[i].tag = Some(ts.assign_label(label, *prov).unwrap());
            }
        }
        s
    }

    #[test]
    fn build_counts_manual_tags_only() {
        let ts = Tagset::magahi();
        let m = Provenance::Manual;
        let mut sentences = Vec::new();
        for i in 0..5 {
            sentences.push(tagged(&format!("a.{i}"), "ek go", &[None, Some(("CL", m))], &ts));
        }
        sentences.push(tagged("b.1", "go", &[Some(("CL", Provenance::Auto))], &ts));
        let lex = AutotagLexicon::build(&sentences, &ts).unwrap();
        assert_eq!(lex.entries.len(), 1);
        assert_eq!(lex.entries["go"], BTreeMap::from([("RP__CL".to_string(), 5)]));
    }

    #[test]
    fn build_empty() {
        let lex = AutotagLexicon::build(&[], &Tagset::magahi()).unwrap();
        assert!(lex.is_empty());
    }

    #[test]
    fn build_ambiguous_relative() {
        let ts = Tagset::magahi();
        let m = Provenance::Manual;
        let mut sentences = Vec::new();
        for i in 0..3 {
            sentences.push(tagged(&format!("p.{i}"), "je", &[Some(("PRL", m))], &ts));
        }
        for i in 0..2 {
            sentences.push(tagged(&format!("d.{i}"), "je", &[Some(("DMR", m))], &ts));
        }
        let lex = AutotagLexicon::build(&sentences, &ts).unwrap();
        assert_eq!(
            lex.entries["je"],
            BTreeMap::from([("PR__PRL".to_string(), 3), ("DM__DMR".to_string(), 2)])
        );
    }

    #[test]
    fn build_rejects_bad_tags() {
        let ts = Tagset::magahi();
        let mut s = Sentence::new("x.1", "go");
        s.tokens[0].tag = Some(crate::tagset::TagAssignment::unchecked(
            "RP__XX",
            Provenance::Manual,
        ));
        assert_eq!(
            AutotagLexicon::build([&s], &ts).unwrap_err(),
            AutotagError::InvalidTagInInput {
                sentence_id: "x.1".into(),
                index: 0
            }
        );
    }

    #[test]
    fn unambiguous_policy() {
        let ts = Tagset::magahi();
        let lex = lexicon(&[("go", &[("RP__CL", 5)]), ("du", &[("QT__QTC", 2)])]);
        let mut s = Sentence::new("s", "du go");
        let n = autotag_sentence(&mut s, &lex, &AutotagPolicy::default(), &ts);
        assert_eq!(n, 2);
        assert_eq!(s.tokens[0].tag.as_ref().unwrap().convention, "QT__QTC");
        assert_eq!(s.tokens[1].tag.as_ref().unwrap().convention, "RP__CL");
        assert_eq!(s.tokens[1].provenance(), Some(Provenance::Auto));
        assert_eq!(s.status, SentenceStatus::Autotagged);

        let lex = lexicon(&[("je", &[("PR__PRL", 3), ("DM__DMR", 2)])]);
        assert_eq!(lex.suggest("je", &AutotagPolicy::default()), None);
    }

    #[test]
    fn min_count_filters_before_ambiguity() {
        let lex = lexicon(&[("je", &[("PR__PRL", 3), ("DM__DMR", 2)])]);
        let policy = AutotagPolicy::new(PolicyMode::UnambiguousOnly, 3);
        assert_eq!(lex.suggest("je", &policy), Some("PR__PRL"));
        let policy = AutotagPolicy::new(PolicyMode::UnambiguousOnly, 4);
        assert_eq!(lex.suggest("je", &policy), None);
        let policy = AutotagPolicy::new(PolicyMode::MostFrequent, 4);
        assert_eq!(lex.suggest("je", &policy), None);
    }

    #[test]
    fn most_frequent_policy() {
        let mf = AutotagPolicy::new(PolicyMode::MostFrequent, 1);
        let lex = lexicon(&[("je", &[("PR__PRL", 3), ("DM__DMR", 2)])]);
        assert_eq!(lex.suggest("je", &mf), Some("PR__PRL"));
        let lex = lexicon(&[("je", &[("PR__PRL", 2), ("DM__DMR", 2)])]);
        assert_eq!(lex.suggest("je", &mf), Some("DM__DMR"));
        assert_eq!(lex.suggest("unseen", &mf), None);
    }

    #[test]
    fn manual_tags_survive() {
        let ts = Tagset::magahi();
        let lex = lexicon(&[("go", &[("RP__CL", 5)])]);
        let mut s = tagged("s", "go", &[Some(("NN", Provenance::Manual))], &ts);
        s.status = SentenceStatus::Complete;
        assert_eq!(autotag_sentence(&mut s, &lex, &AutotagPolicy::default(), &ts), 0);
        assert_eq!(s.tokens[0].tag.as_ref().unwrap().convention, "N__NN");
        assert_eq!(s.status, SentenceStatus::Complete);
    }

    #[test]
    fn tsv_roundtrip_and_order() {
        let ts = Tagset::magahi();
        let lex = lexicon(&[
            ("je", &[("PR__PRL", 3), ("DM__DMR", 2)]),
            ("go", &[("RP__CL", 5)]),
        ]);
        let tsv = lex.to_tsv();
        assert_eq!(tsv, "go\tRP__CL\t5\nje\tDM__DMR\t2\nje\tPR__PRL\t3\n");
        let back = AutotagLexicon::from_tsv(&tsv, &ts).unwrap();
        assert_eq!(back.entries, lex.entries);
    }

    #[test]
    fn tsv_errors() {
        let ts = Tagset::magahi();
        let bad = [
            "go\tRP__CL\n",
            "go\tRP__ZZ\t1\n",
            "go\tRP__CL\t0\n",
            "go\tRP__CL\tmany\n",
            "go\tRP__CL\t1\ngo\tRP__CL\t2\n",
        ];
        for text in bad {
            assert!(
                matches!(AutotagLexicon::from_tsv(text, &ts), Err(AutotagError::Parse { .. })),
                "{text:?}"
            );
        }
        let lex = AutotagLexicon::from_tsv("# hand curated\n\ngo\tRP__CL\t1\n", &ts).unwrap();
        assert_eq!(lex.len(), 1);
    }

    #[test]
    fn policy_mode_parsing() {
        assert_eq!("most-frequent".parse::<PolicyMode>().unwrap(), PolicyMode::MostFrequent);
        assert_eq!(
            "unambiguous_only".parse::<PolicyMode>().unwrap(),
            PolicyMode::UnambiguousOnly
        );
        assert!("best".parse::<PolicyMode>().is_err());
    }
}
