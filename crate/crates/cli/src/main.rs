use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use nim_cli::config::{AppConfig, EMBEDDINGS_TOKEN_ENV, LLM_TOKEN_ENV, TRANSLATOR_TOKEN_ENV};
use nim_cli::http::{HttpCompletion, HttpEmbeddings, HttpTranslator, NoTranslator};
use nim_cli::service::{router, AppState};
use nim_cli::{exit, exit_code};
use nim_core::binding_translate::{TableTranslator, TranslationProvider};
use nim_core::decompose::ablation_strip_text;
use nim_core::llm_fallback::{CompletionProvider, ReplayProvider};
use nim_core::metrics::{self, EmbeddingProvider, MatchResources, MiaTarget, VectorReplay};
use nim_core::ontology::{load_ontology, save_ontology, ConceptEntry};
use nim_core::serialize::{render_terminal, render_terminal_expanded, to_elementalization, to_wire_json};
use nim_core::{Clock, Compiler, Ontology, OntologyError, OntologyStore, Providers, Resources, SystemClock};

#[derive(Parser)]
#[command(
    name = "nim",
    version,
    about = "Compile short text messages into ideographic metalanguage messages"
)]
struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true, env = "NIM_CONFIG")]
    config: Option<PathBuf>,
    /// Ontology file (defaults to the config's, then the bundled seed).
    #[arg(long, global = true)]
    ontology: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compile one message.
    Compile(CompileArgs),
    /// Inspect or modify the ontology file.
    #[command(subcommand)]
    Ontology(OntologyCmd),
    /// Evaluation metrics.
    #[command(subcommand)]
    Eval(EvalCmd),
    /// Run the HTTP service.
    Serve(ServeArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Elem,
    Tty,
}

#[derive(Args)]
struct CompileArgs {
    /// Message text; read from stdin when absent.
    text: Option<String>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Add explication lines to the tty preview.
    #[arg(long)]
    expand: bool,
    #[arg(long)]
    binding_lang: Option<String>,
    /// Fail on out-of-vocabulary words instead of asking a provider.
    #[arg(long)]
    no_fallback: bool,
    /// Drop binding text, keep ideographs in source order.
    #[arg(long)]
    ablate_text: bool,
    /// Replay completions from a recorded transcript.
    #[arg(long)]
    transcript: Option<PathBuf>,
    /// Translate binding text from a stored translation table.
    #[arg(long)]
    translations: Option<PathBuf>,
    /// Write admitted concepts back to the ontology file.
    #[arg(long)]
    persist: bool,
    /// Stamp the message with the current time.
    #[arg(long)]
    timestamp: bool,
}

#[derive(Subcommand)]
enum OntologyCmd {
    /// Check every invariant; exit 4 on violations.
    Validate,
    /// Class, template, tuple and concept counts.
    Stats {
        #[arg(long)]
        json: bool,
    },
    /// Add a concept (JSON file, `-` for stdin) to the ontology file.
    Insert { entry: PathBuf },
    /// Write the ontology in canonical form.
    Export {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum EvalCmd {
    /// METEOR per line of two files, or for one pair of texts.
    Meteor {
        candidates: Option<PathBuf>,
        references: Option<PathBuf>,
        #[arg(long, conflicts_with_all = ["candidates", "references"], requires = "reference")]
        candidate: Option<String>,
        #[arg(long)]
        reference: Option<String>,
    },
    /// Comprehensibility per day from an evaluation-record CSV.
    Comp {
        records: PathBuf,
        #[arg(long)]
        day: Option<u32>,
    },
    /// Learning-curve rate from two day means or from records.
    Lcr {
        #[arg(long, required_unless_present = "records")]
        c1: Option<f64>,
        #[arg(long, required_unless_present = "records")]
        c5: Option<f64>,
        #[arg(long, conflicts_with_all = ["c1", "c5"])]
        records: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        first_day: u32,
        #[arg(long, default_value_t = 5)]
        last_day: u32,
        #[arg(long, default_value_t = 0.9)]
        t: f64,
    },
    /// MIA indices from a response CSV.
    Mia { responses: PathBuf },
    /// Write a synthetic MIA response CSV built to the given rates.
    MiaFixture {
        #[arg(long)]
        hr: f64,
        #[arg(long)]
        far: f64,
        #[arg(long)]
        sc: f64,
        #[arg(long)]
        ss: f64,
        #[arg(long, default_value_t = 100)]
        n: usize,
    },
    /// Mean and sample standard deviation of a CSV column.
    Stats {
        file: PathBuf,
        #[arg(long)]
        column: String,
    },
    /// Embedding cosine of two texts.
    Sts {
        #[arg(long)]
        candidate: String,
        #[arg(long)]
        reference: String,
        /// Replay vectors from a JSON object of text -> vector.
        #[arg(long)]
        vectors: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long)]
    addr: Option<String>,
    #[arg(long)]
    max_in_flight: Option<usize>,
    /// Never admit new concepts.
    #[arg(long)]
    read_only: bool,
    #[arg(long)]
    transcript: Option<PathBuf>,
    #[arg(long)]
    translations: Option<PathBuf>,
    /// Directory icon paths are relative to (default: the ontology file's).
    #[arg(long)]
    icons_dir: Option<PathBuf>,
}

struct Failure {
    code: u8,
    stage: &'static str,
    error: anyhow::Error,
}

fn fail(code: u8, stage: &'static str, error: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code,
        stage,
        error: error.into(),
    }
}

type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("nim: {}: {}", f.stage, describe(&f.error));
            ExitCode::from(f.code)
        }
    }
}

/// Error chain joined with ": ", skipping causes the outer message already ends with.
fn describe(error: &anyhow::Error) -> String {
    let mut out = error.to_string();
    for cause in error.chain().skip(1) {
        let c = cause.to_string();
        if !out.ends_with(&c) {
            out.push_str(": ");
            out.push_str(&c);
        }
    }
    out
}

struct Env {
    config: AppConfig,
    ontology_path: Option<PathBuf>,
}

impl Env {
    fn new(cli: &Cli) -> Result<Self, Failure> {
        let config = match &cli.config {
            Some(p) => AppConfig::load(p).map_err(|e| fail(exit::INPUT, "config", e))?,
            None => AppConfig::default(),
        };
        let ontology_path = cli.ontology.clone().or_else(|| config.ontology.clone());
        Ok(Self { config, ontology_path })
    }

    fn ontology(&self) -> Result<Ontology, Failure> {
        match &self.ontology_path {
            Some(p) => load_ontology(p).map_err(|e| fail(exit::ONTOLOGY, "ontology", e)),
            None => Ok(Ontology::seed()),
        }
    }

    fn ontology_file(&self, what: &str) -> Result<&Path, Failure> {
        self.ontology_path.as_deref().ok_or_else(|| {
            fail(
                exit::INPUT,
                "ontology",
                anyhow!("{what} needs an ontology file (--ontology)"),
            )
        })
    }

    fn resources(&self) -> Result<Resources, Failure> {
        Resources::load(&self.config.resources).map_err(|e| fail(exit::INPUT, "config", e))
    }

    fn fallback(&self, transcript: Option<&Path>) -> Result<Option<Arc<dyn CompletionProvider>>, Failure> {
        if let Some(path) = transcript {
            let replay = ReplayProvider::load(path).map_err(|e| fail(exit::INPUT, "llm_fallback", e))?;
            return Ok(Some(Arc::new(replay)));
        }
        Ok(self
            .config
            .llm
            .as_ref()
            .map(|c| Arc::new(HttpCompletion::new(c, c.token(LLM_TOKEN_ENV))) as Arc<dyn CompletionProvider>))
    }

    fn translator(&self, table: Option<&Path>) -> Result<Arc<dyn TranslationProvider>, Failure> {
        if let Some(path) = table {
            let t = TableTranslator::load(path).map_err(|e| fail(exit::INPUT, "binding_translate", e))?;
            return Ok(Arc::new(t));
        }
        Ok(match &self.config.translator {
            Some(c) => Arc::new(HttpTranslator::new(c, c.token(TRANSLATOR_TOKEN_ENV))),
            None => Arc::new(NoTranslator),
        })
    }
}

fn run(cli: Cli) -> CmdResult {
    let env = Env::new(&cli)?;
    match cli.command {
        Command::Compile(args) => compile(&env, args),
        Command::Ontology(cmd) => ontology(&env, cmd),
        Command::Eval(cmd) => eval(&env, cmd),
        Command::Serve(args) => serve(&env, args),
    }
}

fn write_stdout(bytes: &[u8]) -> CmdResult {
    let mut out = std::io::stdout().lock();
    out.write_all(bytes)
        .and_then(|()| out.flush())
        .map_err(|e| fail(1, "output", e))
}

fn print_json(value: &impl serde::Serialize) -> CmdResult {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| fail(1, "output", e))?;
    text.push('\n');
    write_stdout(text.as_bytes())
}

fn compile(env: &Env, args: CompileArgs) -> CmdResult {
    let text = match args.text {
        Some(t) => t,
        None => {
            let mut buf = String::new();
            std::io::stdin()
                .read_to_string(&mut buf)
                .map_err(|e| fail(exit::INPUT, "input", e))?;
            buf
        }
    };
    if text.trim().is_empty() {
        return Err(fail(exit::INPUT, "input", anyhow!("empty message")));
    }
    let ontology = Arc::new(env.ontology()?);
    let compiler = Compiler::new(env.config.pipeline.clone(), env.resources()?);
    let fallback = if args.no_fallback {
        None
    } else {
        env.fallback(args.transcript.as_deref())?
    };
    let translator = env.translator(args.translations.as_deref())?;
    let clock = SystemClock;
    let providers = Providers {
        fallback: fallback.as_deref(),
        translator: translator.as_ref(),
        clock: args.timestamp.then_some(&clock as &dyn Clock),
    };
    let lang = args
        .binding_lang
        .unwrap_or_else(|| compiler.config.binding_lang.clone());
    let out = compiler
        .compile_to(&text, &lang, &ontology, providers)
        .map_err(|e| fail(exit_code(e.class()), e.stage(), e))?;

    if args.persist && !out.admitted.is_empty() {
        let path = env.ontology_file("--persist")?;
        let store = OntologyStore::open(path).map_err(|e| fail(exit::ONTOLOGY, "ontology", e))?;
        store
            .admit(&out.admitted)
            .map_err(|e| fail(exit::ONTOLOGY, "ontology", e))?;
    }
    for note in &out.message.notes {
        eprintln!("note: {note}");
    }
    let message = if args.ablate_text {
        ablation_strip_text(&out.message)
    } else {
        out.message
    };
    let mut bytes = match args.format {
        Format::Json => to_wire_json(&message),
        Format::Elem => to_elementalization(&message).into_bytes(),
        Format::Tty if args.expand => render_terminal_expanded(&message).into_bytes(),
        Format::Tty => render_terminal(&message).into_bytes(),
    };
    bytes.push(b'\n');
    write_stdout(&bytes)
}

fn ontology(env: &Env, cmd: OntologyCmd) -> CmdResult {
    match cmd {
        OntologyCmd::Validate => match env.ontology() {
            Ok(o) => {
                let out = format!("ok: version {}, {} concepts\n", o.version, o.concepts.len());
                write_stdout(out.as_bytes())
            }
            Err(Failure { error, .. }) => {
                if let Some(OntologyError::Invalid(report)) = error.downcast_ref::<OntologyError>() {
                    let mut out = String::new();
                    for v in &report.violations {
                        out.push_str(&format!("{v}\n"));
                    }
                    write_stdout(out.as_bytes())?;
                    Err(fail(
                        exit::ONTOLOGY,
                        "ontology",
                        anyhow!("{} violations", report.violations.len()),
                    ))
                } else {
                    Err(fail(exit::ONTOLOGY, "ontology", error))
                }
            }
        },
        OntologyCmd::Stats { json } => {
            let o = env.ontology()?;
            let s = o.stats();
            if json {
                let mut v = serde_json::to_value(s).map_err(|e| fail(1, "output", e))?;
                v["version"] = o.version.into();
                return print_json(&v);
            }
            let mut out = format!("ontology version {}\n", o.version);
            out.push_str(&format!(
                "{:<8}{:>9}{:>11}{:>8}{:>10}\n",
                "domain", "classes", "templates", "tuples", "concepts"
            ));
            for (name, d) in [("noun", s.nouns), ("verb", s.verbs)] {
                out.push_str(&format!(
                    "{name:<8}{:>9}{:>11}{:>8}{:>10}\n",
                    d.classes, d.templates, d.tuples, d.concepts
                ));
            }
            out.push_str(&format!("ideographs {}\n", s.ideographs));
            write_stdout(out.as_bytes())
        }
        OntologyCmd::Insert { entry } => {
            let path = env.ontology_file("insert")?;
            let text = if entry == Path::new("-") {
                let mut buf = String::new();
                std::io::stdin()
                    .read_to_string(&mut buf)
                    .map_err(|e| fail(exit::INPUT, "input", e))?;
                buf
            } else {
                std::fs::read_to_string(&entry)
                    .with_context(|| entry.display().to_string())
                    .map_err(|e| fail(exit::INPUT, "input", e))?
            };
            let concept: ConceptEntry = serde_json::from_str(&text).map_err(|e| fail(exit::INPUT, "input", e))?;
            let store = OntologyStore::open(path).map_err(|e| fail(exit::ONTOLOGY, "ontology", e))?;
            let current = store.snapshot();
            // run the same checks as an in-memory insert so duplicates and
            // violations are reported rather than skipped
            current
                .insert_concept(concept.clone())
                .map_err(|e| fail(exit::ONTOLOGY, "ontology", e))?;
            let updated = store
                .admit(std::slice::from_ref(&concept))
                .map_err(|e| fail(exit::ONTOLOGY, "ontology", e))?;
            write_stdout(format!("inserted `{}`; version {}\n", concept.lemma, updated.version).as_bytes())
        }
        OntologyCmd::Export { out } => {
            let o = env.ontology()?;
            match out {
                Some(path) => save_ontology(&o, &path).map_err(|e| fail(exit::ONTOLOGY, "ontology", e)),
                None => write_stdout(o.to_json().as_bytes()),
            }
        }
    }
}

fn open_csv(path: &Path) -> Result<std::fs::File, Failure> {
    std::fs::File::open(path)
        .with_context(|| path.display().to_string())
        .map_err(|e| fail(exit::INPUT, "input", e))
}

fn read_lines(path: &Path) -> Result<Vec<String>, Failure> {
    let text = std::fs::read_to_string(path)
        .with_context(|| path.display().to_string())
        .map_err(|e| fail(exit::INPUT, "input", e))?;
    Ok(text.lines().map(str::to_owned).collect())
}

fn metric_failure(e: metrics::MetricError) -> Failure {
    let code = match e {
        metrics::MetricError::Provider(_) => exit::PROVIDER,
        _ => exit::INPUT,
    };
    fail(code, "metrics", e)
}

fn eval(env: &Env, cmd: EvalCmd) -> CmdResult {
    match cmd {
        EvalCmd::Meteor {
            candidates,
            references,
            candidate,
            reference,
        } => {
            let res = {
                let r = env.resources()?;
                MatchResources {
                    lemma_rules: r.lemma_rules,
                    synonyms: r.synonyms,
                }
            };
            let pairs: Vec<(String, String)> = match (candidate, reference, candidates, references) {
                (Some(c), Some(r), _, _) => vec![(c, r)],
                (_, _, Some(c), Some(r)) => {
                    let (c, r) = (read_lines(&c)?, read_lines(&r)?);
                    if c.len() != r.len() {
                        return Err(fail(
                            exit::INPUT,
                            "input",
                            anyhow!("{} candidate lines but {} reference lines", c.len(), r.len()),
                        ));
                    }
                    c.into_iter().zip(r).collect()
                }
                _ => {
                    return Err(fail(
                        exit::INPUT,
                        "input",
                        anyhow!("give two files or --candidate and --reference"),
                    ))
                }
            };
            let scores: Vec<f64> = pairs
                .iter()
                .map(|(c, r)| metrics::meteor::<f64>(c, r, &res).score)
                .collect();
            let mean = if scores.is_empty() {
                None
            } else {
                Some(scores.iter().sum::<f64>() / scores.len() as f64)
            };
            print_json(&serde_json::json!({ "scores": scores, "mean": mean }))
        }
        EvalCmd::Comp { records, day } => {
            let recs = metrics::read_eval_records(open_csv(&records)?).map_err(metric_failure)?;
            let res = MatchResources::builtin();
            match day {
                Some(d) => {
                    let c: f64 = metrics::comprehensibility(&recs, d, &res).map_err(metric_failure)?;
                    print_json(&serde_json::json!({ "day": d, "comprehensibility": c }))
                }
                None => {
                    let mut days = BTreeMap::new();
                    for d in recs.iter().map(|r| r.day).collect::<std::collections::BTreeSet<_>>() {
                        let c: f64 = metrics::comprehensibility(&recs, d, &res).map_err(metric_failure)?;
                        days.insert(d.to_string(), c);
                    }
                    print_json(&serde_json::json!({ "days": days }))
                }
            }
        }
        EvalCmd::Lcr {
            c1,
            c5,
            records,
            first_day,
            last_day,
            t,
        } => {
            let (c1, c5) = match records {
                Some(path) => {
                    let recs = metrics::read_eval_records(open_csv(&path)?).map_err(metric_failure)?;
                    let res = MatchResources::builtin();
                    (
                        metrics::comprehensibility::<f64>(&recs, first_day, &res).map_err(metric_failure)?,
                        metrics::comprehensibility::<f64>(&recs, last_day, &res).map_err(metric_failure)?,
                    )
                }
                None => (c1.unwrap_or_default(), c5.unwrap_or_default()),
            };
            let lcr = metrics::lcr(c1, c5, t).map_err(metric_failure)?;
            print_json(&serde_json::json!({ "c1": c1, "c5": c5, "t": t, "lcr": lcr }))
        }
        EvalCmd::Mia { responses } => {
            let rs = metrics::read_mia_responses(open_csv(&responses)?).map_err(metric_failure)?;
            let s: nim_core::MiaScores64 = metrics::mia(&rs).map_err(metric_failure)?;
            print_json(&s)
        }
        EvalCmd::MiaFixture { hr, far, sc, ss, n } => {
            if n == 0 {
                return Err(fail(exit::INPUT, "input", anyhow!("--n must be positive")));
            }
            let rs = metrics::mia_fixture(&MiaTarget { hr, far, sc, ss }, n);
            let mut buf = Vec::new();
            metrics::write_mia_responses(&mut buf, &rs).map_err(metric_failure)?;
            write_stdout(&buf)
        }
        EvalCmd::Stats { file, column } => {
            let values = metrics::read_column(open_csv(&file)?, &column).map_err(metric_failure)?;
            let s: nim_core::ColumnStats64 = metrics::column_stats(&values).map_err(metric_failure)?;
            print_json(&serde_json::json!({ "n": s.n, "mean": s.mean, "std_dev": s.std_dev() }))
        }
        EvalCmd::Sts {
            candidate,
            reference,
            vectors,
        } => {
            let provider: Box<dyn EmbeddingProvider> = match (vectors, &env.config.embeddings) {
                (Some(path), _) => {
                    let text = std::fs::read_to_string(&path)
                        .with_context(|| path.display().to_string())
                        .map_err(|e| fail(exit::INPUT, "input", e))?;
                    Box::new(VectorReplay::from_json(&text).map_err(|e| fail(exit::INPUT, "input", e))?)
                }
                (None, Some(c)) => Box::new(HttpEmbeddings::new(c, c.token(EMBEDDINGS_TOKEN_ENV))),
                (None, None) => {
                    return Err(fail(
                        exit::PROVIDER,
                        "metrics",
                        anyhow!("no embedding provider configured"),
                    ))
                }
            };
            let cos: f64 = metrics::sts_score(&candidate, &reference, provider.as_ref()).map_err(metric_failure)?;
            print_json(&serde_json::json!({ "cosine": cos }))
        }
    }
}

fn serve(env: &Env, args: ServeArgs) -> CmdResult {
    let store = match &env.ontology_path {
        Some(p) => OntologyStore::open(p).map_err(|e| fail(exit::ONTOLOGY, "ontology", e))?,
        None => OntologyStore::in_memory(Ontology::seed()),
    };
    let icons_base = args.icons_dir.clone().or_else(|| {
        env.ontology_path
            .as_deref()
            .and_then(Path::parent)
            .map(Path::to_path_buf)
    });
    let svc = &env.config.service;
    let admit = !(args.read_only || svc.read_only) && env.config.pipeline.admit_oov;
    let mut pipeline = env.config.pipeline.clone();
    pipeline.admit_oov = admit;
    let state = AppState {
        store: Arc::new(store),
        compiler: Arc::new(Compiler::new(pipeline, env.resources()?)),
        fallback: env.fallback(args.transcript.as_deref())?,
        translator: env.translator(args.translations.as_deref())?,
        icons_base,
        limit: Arc::new(tokio::sync::Semaphore::new(
            args.max_in_flight.unwrap_or(svc.max_in_flight).max(1),
        )),
        admit,
    };
    let addr = args.addr.unwrap_or_else(|| svc.addr.clone());
    let rt = tokio::runtime::Runtime::new().map_err(|e| fail(1, "service", e))?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind(&addr)
            .await
            .with_context(|| format!("binding {addr}"))
            .map_err(|e| fail(exit::INPUT, "service", e))?;
        let local = listener.local_addr().map_err(|e| fail(1, "service", e))?;
        eprintln!("listening on http://{local}");
        axum::serve(listener, router(state))
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
            .map_err(|e| fail(1, "service", e))
    })
}
