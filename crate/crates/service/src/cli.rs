//! The `ann` command line.

use std::error::Error;
use std::fs;
use std::io::Write;
use std::net::IpAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use chrono::TimeDelta;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::Value;

use ann_core::autotag::{autotag_sentence, AutotagLexicon, AutotagPolicy, PolicyMode};
use ann_core::corpus::{Corpus, Sentence, SentenceSplitter, SubcorpusPath};
use ann_core::metadata::{build_general_meta, validate_catalog, Catalog, RecordKind};
use ann_core::serialization::{export_tsv, export_xml, import_legacy_csv};
use ann_core::store;
use ann_core::tagset::{Severity, Tagset};

use crate::api::{router, AppState, ServiceConfig};
use crate::auth::AnnotatorRegistry;

pub type CliResult<T> = Result<T, Box<dyn Error + Send + Sync>>;

/// Environment variable that takes precedence over `--corpus`.
pub const CORPUS_DIR_ENV: &str = "ANN_CORPUS_DIR";

#[derive(Debug, Parser)]
#[command(name = "ann", version, about = "Corpus annotation toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct CorpusArgs {
    /// Corpus directory. ANN_CORPUS_DIR, when set, takes precedence.
    #[arg(long, value_name = "DIR")]
    pub corpus: Option<PathBuf>,
    /// Tagset definition file; the bundled Magahi tagset by default.
    #[arg(long, value_name = "FILE")]
    pub tagset: Option<PathBuf>,
}

#[derive(Debug, Args, Clone, Copy)]
pub struct PolicyArgs {
    #[arg(long, value_enum, default_value = "unambiguous-only")]
    pub policy: PolicyArg,
    #[arg(long, default_value_t = 1)]
    pub min_count: u32,
}

impl PolicyArgs {
    fn policy(self) -> AutotagPolicy {
        let mode = match self.policy {
            PolicyArg::UnambiguousOnly => PolicyMode::UnambiguousOnly,
            PolicyArg::MostFrequent => PolicyMode::MostFrequent,
        };
        AutotagPolicy::new(mode, self.min_count)
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum PolicyArg {
    UnambiguousOnly,
    MostFrequent,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SplitterArg {
    Lines,
    Danda,
}

#[derive(Debug, Clone, Copy, ValueEnum, PartialEq, Eq)]
pub enum FormatArg {
    Xml,
    Tsv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the HTTP annotation service.
    Serve {
        #[command(flatten)]
        corpus: CorpusArgs,
        /// Lexicon TSV; built from the corpus's manual tags when absent.
        #[arg(long, value_name = "FILE")]
        lexicon: Option<PathBuf>,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        bind: IpAddr,
        /// Annotator registry: annotator_id<TAB>display_name<TAB>token.
        #[arg(long, value_name = "FILE")]
        annotators: PathBuf,
        /// Directory with the static workbench bundle, served at `/`.
        #[arg(long, value_name = "DIR")]
        webui: Option<PathBuf>,
        #[arg(long, default_value_t = crate::claims::DEFAULT_IDLE_TIMEOUT_MINUTES)]
        claim_timeout_minutes: i64,
        #[command(flatten)]
        policy: PolicyArgs,
    },
    /// Add a raw text file as a new document.
    Ingest {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long)]
        doc_id: String,
        /// Taxonomy path, e.g. indirect_written/book/prose.
        #[arg(long)]
        subcorpus: SubcorpusPath,
        #[arg(long, value_enum, default_value = "lines")]
        splitter: SplitterArg,
        /// Cataloguing record to link the document to.
        #[arg(long, value_name = "RECORD_ID")]
        meta: Option<String>,
        file: PathBuf,
    },
    /// Import a legacy spreadsheet CSV (sentence_id,text[,tags]).
    ImportCsv {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long)]
        doc_id: String,
        #[arg(long)]
        subcorpus: SubcorpusPath,
        file: PathBuf,
    },
    /// Create a metadata record from a JSON object of fields.
    AddRecord {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long)]
        kind: RecordKind,
        /// JSON file holding the field map.
        #[arg(long, value_name = "FILE")]
        fields: PathBuf,
        /// Document whose `meta` reference should point at the new record.
        #[arg(long, value_name = "DOC_ID")]
        link: Option<String>,
    },
    /// Fill autotag suggestions into tokens without a manual tag.
    Autotag {
        #[command(flatten)]
        corpus: CorpusArgs,
        /// Lexicon TSV; built from the corpus's manual tags when absent.
        #[arg(long, value_name = "FILE")]
        lexicon: Option<PathBuf>,
        /// Restrict to one document.
        #[arg(long)]
        doc: Option<String>,
        #[command(flatten)]
        policy: PolicyArgs,
    },
    /// Write the lexicon built from manual tags.
    BuildLexicon {
        #[command(flatten)]
        corpus: CorpusArgs,
        /// Output file; standard output when absent.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Check tags and the metadata catalog. Exits non-zero on errors.
    Validate {
        #[command(flatten)]
        corpus: CorpusArgs,
        /// Also report tags that stop above the leaf level.
        #[arg(long)]
        strict: bool,
    },
    /// Print word and sentence counts as JSON.
    Stats {
        #[command(flatten)]
        corpus: CorpusArgs,
        /// Also write corpus-meta.json.
        #[arg(long)]
        write_meta: bool,
    },
    /// Export the corpus as XML or one document as TSV.
    Export {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long, value_enum)]
        format: FormatArg,
        #[arg(long)]
        doc: Option<String>,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
}

/// `ANN_CORPUS_DIR` wins over `--corpus`.
pub fn resolve_corpus_dir(flag: Option<&Path>, env: Option<&Path>) -> CliResult<PathBuf> {
    env.filter(|p| !p.as_os_str().is_empty())
        .or(flag)
        .map(Path::to_path_buf)
        .ok_or_else(|| format!("no corpus directory: pass --corpus or set {CORPUS_DIR_ENV}").into())
}

struct Workspace {
    root: PathBuf,
    tagset: Tagset,
    corpus: Corpus,
    catalog: Catalog,
}

impl Workspace {
    fn open(args: &CorpusArgs, env: Option<&Path>) -> CliResult<Workspace> {
        let root = resolve_corpus_dir(args.corpus.as_deref(), env)?;
        let tagset = match &args.tagset {
            Some(path) => Tagset::from_definition(&read(path)?)?,
            None => Tagset::magahi(),
        };
        let (corpus, catalog) = store::load_corpus(&root, &tagset)?;
        Ok(Workspace {
            root,
            tagset,
            corpus,
            catalog,
        })
    }

    fn lexicon(&self, path: Option<&Path>) -> CliResult<AutotagLexicon> {
        Ok(match path {
            Some(p) => AutotagLexicon::from_tsv(&read(p)?, &self.tagset)?,
            None => AutotagLexicon::build(self.corpus.sentences(), &self.tagset)?,
        })
    }
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()).into())
}

fn write_output(output: Option<&Path>, text: &str, out: &mut dyn Write) -> CliResult<()> {
    match output {
        Some(p) => fs::write(p, text).map_err(|e| format!("{}: {e}", p.display()))?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

/// Runs one command. Returns the process exit code.
pub fn run(cli: Cli, env_corpus: Option<&Path>, out: &mut dyn Write) -> CliResult<i32> {
    match cli.command {
        Command::Serve {
            corpus,
            lexicon,
            port,
            bind,
            annotators,
            webui,
            claim_timeout_minutes,
            policy,
        } => {
            let ws = Workspace::open(&corpus, env_corpus)?;
            let lexicon = ws.lexicon(lexicon.as_deref())?;
            let registry = AnnotatorRegistry::parse(&read(&annotators)?)?;
            let config = ServiceConfig {
                corpus_dir: Some(ws.root.clone()),
                idle_timeout: TimeDelta::minutes(claim_timeout_minutes),
                default_policy: policy.policy(),
                webui_dir: webui,
            };
            let state = AppState::new(ws.tagset, ws.corpus, ws.catalog, lexicon, registry, config);
            let app = router(Arc::new(state));
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(async move {
                let listener = tokio::net::TcpListener::bind((bind, port)).await?;
                tracing::info!("listening on {}", listener.local_addr()?);
                axum::serve(listener, app).await
            })?;
            Ok(0)
        }

        Command::Ingest {
            corpus,
            doc_id,
            subcorpus,
            splitter,
            meta,
            file,
        } => {
            let mut ws = Workspace::open(&corpus, env_corpus)?;
            let raw = fs::read(&file).map_err(|e| format!("{}: {e}", file.display()))?;
            let splitter = match splitter {
                SplitterArg::Lines => SentenceSplitter::Lines,
                SplitterArg::Danda => SentenceSplitter::Danda,
            };
            ws.corpus
                .ingest_document(&raw, &doc_id, subcorpus, splitter)?;
            let doc = ws.corpus.document_mut(&doc_id).expect("just ingested");
            doc.metadata_ref = meta;
            store::save_document(&ws.root, doc)?;
            writeln!(
                out,
                "ingested {doc_id}: {} sentences, {} tokens",
                doc.sentences.len(),
                doc.token_count()
            )?;
            Ok(0)
        }

        Command::ImportCsv {
            corpus,
            doc_id,
            subcorpus,
            file,
        } => {
            let mut ws = Workspace::open(&corpus, env_corpus)?;
            let input = fs::File::open(&file).map_err(|e| format!("{}: {e}", file.display()))?;
            let import = import_legacy_csv(input, &doc_id, subcorpus, &ws.corpus, &ws.tagset)?;
            for w in &import.warnings {
                eprintln!("warning: {w}");
            }
            let doc = ws.corpus.add_document(import.document)?;
            store::save_document(&ws.root, doc)?;
            writeln!(out, "imported {doc_id}: {} sentences", doc.sentences.len())?;
            Ok(0)
        }

        Command::AddRecord {
            corpus,
            kind,
            fields,
            link,
        } => {
            let mut ws = Workspace::open(&corpus, env_corpus)?;
            let value: Value = serde_json::from_str(&read(&fields)?)?;
            let Value::Object(map) = value else {
                return Err("record fields must be a JSON object".into());
            };
            let record_id = ws.catalog.create_record(kind, &map)?.record_id().to_string();
            if let Some(doc_id) = link {
                let doc = ws
                    .corpus
                    .document_mut(&doc_id)
                    .ok_or_else(|| format!("unknown document {doc_id:?}"))?;
                doc.metadata_ref = Some(record_id.clone());
                store::save_document(&ws.root, doc)?;
            }
            store::save_catalog(&ws.root, &ws.corpus, &ws.catalog)?;
            writeln!(out, "{record_id}")?;
            Ok(0)
        }

        Command::Autotag {
            corpus,
            lexicon,
            doc,
            policy,
        } => {
            let mut ws = Workspace::open(&corpus, env_corpus)?;
            let lexicon = ws.lexicon(lexicon.as_deref())?;
            let policy = policy.policy();
            let ids: Vec<String> = match doc {
                Some(id) if ws.corpus.contains_document(&id) => vec![id],
                Some(id) => return Err(format!("unknown document {id:?}").into()),
                None => ws.corpus.documents().map(|d| d.doc_id.clone()).collect(),
            };
            let mut total = 0;
            for id in ids {
                let d = ws.corpus.document_mut(&id).expect("listed above");
                let n: usize = d
                    .sentences
                    .iter_mut()
                    .map(|s| autotag_sentence(s, &lexicon, &policy, &ws.tagset))
                    .sum();
                store::save_document(&ws.root, d)?;
                writeln!(out, "{id}: {n} suggestions")?;
                total += n;
            }
            writeln!(out, "total: {total} suggestions")?;
            Ok(0)
        }

        Command::BuildLexicon { corpus, output } => {
            let ws = Workspace::open(&corpus, env_corpus)?;
            let lexicon = ws.lexicon(None)?;
            write_output(output.as_deref(), &lexicon.to_tsv(), out)?;
            Ok(0)
        }

        Command::Validate { corpus, strict } => {
            let ws = Workspace::open(&corpus, env_corpus)?;
            let mut errors = 0;
            for s in ws.corpus.sentences() {
                for (i, t) in s.tokens.iter().enumerate() {
                    let Some(tag) = &t.tag else { continue };
                    for f in ws.tagset.validate_assignment(tag, strict).findings {
                        if f.severity() == Severity::Error {
                            errors += 1;
                        }
                        writeln!(out, "{}[{i}]: {f}", s.id)?;
                    }
                }
            }
            let report = validate_catalog(&ws.corpus, &ws.catalog);
            for f in &report.findings {
                let level = if f.is_error() { "error" } else { "warning" };
                writeln!(out, "{level}: {f}")?;
            }
            errors += report.error_count();
            writeln!(out, "{errors} error(s)")?;
            Ok(if errors == 0 { 0 } else { 1 })
        }

        Command::Stats { corpus, write_meta } => {
            let ws = Workspace::open(&corpus, env_corpus)?;
            let stats = ws.corpus.compute_stats();
            writeln!(out, "{}", serde_json::to_string_pretty(&stats)?)?;
            if write_meta {
                let meta = build_general_meta(&ws.corpus, &ws.catalog)?;
                store::save_general_meta(&ws.root, &meta)?;
            }
            Ok(0)
        }

        Command::Export {
            corpus,
            format,
            doc,
            output,
        } => {
            let ws = Workspace::open(&corpus, env_corpus)?;
            let scope: Vec<&Sentence> = match &doc {
                Some(id) => ws.corpus.document(id).map(|d| d.sentences.iter().collect()).unwrap_or_default(),
                None => ws.corpus.sentences().collect(),
            };
            for s in scope {
                for (i, t) in s.tokens.iter().enumerate() {
                    let Some(tag) = &t.tag else { continue };
                    for f in ws.tagset.validate_assignment(tag, true).findings {
                        tracing::warn!("{}[{i}]: {f}", s.id);
                    }
                }
            }
            let text = match format {
                FormatArg::Tsv => {
                    let id = doc.ok_or("tsv export needs --doc")?;
                    let d = ws
                        .corpus
                        .document(&id)
                        .ok_or_else(|| format!("unknown document {id:?}"))?;
                    export_tsv(d)
                }
                FormatArg::Xml => match doc {
                    None => export_xml(&ws.corpus, &ws.catalog, &ws.tagset)?,
                    Some(id) => {
                        let d = ws
                            .corpus
                            .document(&id)
                            .ok_or_else(|| format!("unknown document {id:?}"))?;
                        let mut single = Corpus::new();
                        single.add_document(d.clone())?;
                        export_xml(&single, &ws.catalog, &ws.tagset)?
                    }
                },
            };
            write_output(output.as_deref(), &text, out)?;
            Ok(0)
        }
    }
}
