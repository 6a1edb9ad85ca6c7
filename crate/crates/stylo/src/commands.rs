//! Subcommand wiring: ingest, train, classify, distance, intertext,
//! doc-compare. Parameters resolve as flags > config file > built-in
//! defaults. Exit codes: 0 success, 1 input error, 2 solver failure.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use stylometry::corpus::{
    load_document, load_manifest, Corpus, Document, NormalizationOptions, Script,
};
use stylometry::features::{
    build_feature_space, build_ngram_model, gram_distribution, tfidf_fit, tfidf_vectorize,
    vectorize_ngram, FeatureSpace, FeatureVector, TfIdfModel, VectorizeMode,
};
use stylometry::intertext::{doc_compare, make_plan, scan_full, scan_sampled, Query, SamplingPlan};
use stylometry::metrics::bhattacharyya_distance;
use stylometry::ocsvm::{
    decision_value, default_gamma_grid, default_nu_grid, grid_search, predict, train, GridCell,
    KernelSpec, PersistedOcsvm, TrainConfig,
};

use crate::artifact::{csv_f64, csv_field, csv_sibling, write_json, write_text, RunStanza};

#[derive(Parser, Debug)]
#[command(
    name = "stylo",
    version,
    about = "Character n-gram stylometry: attribution and intertextuality search"
)]
pub struct Cli {
    /// Seed for randomized steps (tie-breaking, sampling phase, passage draws)
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// JSON config file with parameter defaults; explicit flags override it
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Output artifact path (JSON; a sibling .csv is written where applicable)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Normalize the texts of a manifest into a corpus archive
    Ingest(IngestArgs),
    /// Build features over an archive and train a one-class SVM
    Train(TrainArgs),
    /// Score test documents against a trained model
    Classify(ClassifyArgs),
    /// Bhattacharyya distance between the gram distributions of two texts
    Distance(DistanceArgs),
    /// Scan a document for passages close to a query passage
    Intertext(IntertextArgs),
    /// Sample passages of one document and search for them in another
    DocCompare(DocCompareArgs),
}

// ---------------------------------------------------------------------------
// config file

#[derive(Debug, Clone, Default, Deserialize)]
pub struct NormConfig {
    pub lowercase: Option<bool>,
    pub strip_punctuation: Option<bool>,
    pub strip_digits: Option<bool>,
    pub strip_spaces: Option<bool>,
}

#[derive(Debug, Clone, Default, Deserialize)]
pub struct TrainFileConfig {
    pub n: Option<usize>,
    pub mode: Option<String>,
    pub top_k: Option<usize>,
    pub tfidf: Option<bool>,
    pub nu: Option<f64>,
    pub gamma: Option<f64>,
    pub tol: Option<f64>,
    pub max_passes: Option<usize>,
    pub nu_grid: Option<Vec<f64>>,
    pub gamma_grid: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
pub struct DistanceFileConfig {
    pub n: Option<usize>,
    pub script: Option<String>,
}

#[derive(Debug, Clone, Default, Deserialize)]
pub struct IntertextFileConfig {
    pub n: Option<usize>,
    pub script: Option<String>,
    pub alpha: Option<f64>,
    pub epsilon: Option<f64>,
    pub threshold: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
pub struct DocCompareFileConfig {
    pub n: Option<usize>,
    pub script: Option<String>,
    pub n_per_len: Option<usize>,
    pub min_len: Option<usize>,
    pub max_len: Option<usize>,
    pub step: Option<usize>,
    pub alpha: Option<f64>,
    pub epsilon: Option<f64>,
    pub threshold: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub normalization: Option<NormConfig>,
    pub train: Option<TrainFileConfig>,
    pub distance: Option<DistanceFileConfig>,
    pub intertext: Option<IntertextFileConfig>,
    pub doc_compare: Option<DocCompareFileConfig>,
}

fn load_config(path: &Option<PathBuf>) -> Result<FileConfig> {
    match path {
        None => Ok(FileConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .with_context(|| format!("reading config {}", p.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing config {}", p.display()))
        }
    }
}

// ---------------------------------------------------------------------------
// shared flag groups

#[derive(Args, Debug, Clone)]
pub struct NormFlags {
    /// Keep letter case instead of lowercasing
    #[arg(long)]
    pub no_lowercase: bool,
    /// Keep punctuation characters
    #[arg(long)]
    pub keep_punctuation: bool,
    /// Keep digits
    #[arg(long)]
    pub keep_digits: bool,
    /// Remove spaces entirely so n-grams never span them
    #[arg(long)]
    pub strip_spaces: bool,
}

impl NormFlags {
    fn resolve(&self, cfg: &Option<NormConfig>) -> NormalizationOptions {
        let c = cfg.clone().unwrap_or_default();
        NormalizationOptions {
            lowercase: if self.no_lowercase {
                false
            } else {
                c.lowercase.unwrap_or(true)
            },
            strip_punctuation: if self.keep_punctuation {
                false
            } else {
                c.strip_punctuation.unwrap_or(true)
            },
            strip_digits: if self.keep_digits {
                false
            } else {
                c.strip_digits.unwrap_or(true)
            },
            strip_spaces: self.strip_spaces || c.strip_spaces.unwrap_or(false),
        }
    }
}

fn parse_script(flag: Option<Script>, cfg: &Option<String>) -> Result<Script> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match cfg {
        Some(name) => name
            .parse::<Script>()
            .map_err(|e| anyhow!("config script: {e}")),
        None => Ok(Script::Latin),
    }
}

fn load_text_document(
    path: &Path,
    script: Script,
    opts: &NormalizationOptions,
) -> Result<Document> {
    let raw = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    let (doc, _) = Document::new(id, raw, script, opts);
    if doc.is_empty() {
        bail!("{} is empty after normalization", path.display());
    }
    Ok(doc)
}

// ---------------------------------------------------------------------------
// ingest

#[derive(Args, Debug)]
pub struct IngestArgs {
    /// JSON manifest: array of {id?, path, script} records
    #[arg(long)]
    pub manifest: PathBuf,
    #[command(flatten)]
    pub norm: NormFlags,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ArchivedDocument {
    pub id: String,
    pub script: Script,
    pub normalized: String,
    pub dropped_bytes: usize,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct IngestErrorRecord {
    pub id: String,
    pub path: String,
    pub error: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CorpusArchive {
    pub run: RunStanza,
    pub normalization: NormalizationOptions,
    pub documents: Vec<ArchivedDocument>,
    pub errors: Vec<IngestErrorRecord>,
}

impl CorpusArchive {
    pub fn corpus(&self) -> stylometry::Result<Corpus> {
        Corpus::new(
            self.documents
                .iter()
                .map(|d| Document::from_normalized(d.id.clone(), d.normalized.clone(), d.script))
                .collect(),
        )
    }

    pub fn script(&self) -> Option<Script> {
        self.documents.first().map(|d| d.script)
    }
}

fn run_ingest(args: IngestArgs, cfg: FileConfig, seed: u64, out: PathBuf) -> Result<()> {
    let opts = args.norm.resolve(&cfg.normalization);
    let entries = load_manifest(&args.manifest)
        .with_context(|| format!("loading manifest {}", args.manifest.display()))?;
    let base = args
        .manifest
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_default();

    let mut stanza = RunStanza::new(
        "ingest",
        serde_json::json!({ "manifest": args.manifest.display().to_string(), "normalization": opts }),
        seed,
    );
    stanza.record_input(&args.manifest);

    let mut documents = Vec::new();
    let mut errors = Vec::new();
    for entry in &entries {
        let id = entry.effective_id();
        stanza.record_input(&if entry.path.is_absolute() {
            entry.path.clone()
        } else {
            base.join(&entry.path)
        });
        match load_document(entry, &base, &opts) {
            Ok((doc, _)) if doc.is_empty() => {
                errors.push(IngestErrorRecord {
                    id,
                    path: entry.path.display().to_string(),
                    error: "empty after normalization".to_string(),
                });
            }
            Ok((doc, dropped_bytes)) => documents.push(ArchivedDocument {
                id: doc.id.clone(),
                script: doc.script,
                normalized: doc.normalized,
                dropped_bytes,
            }),
            Err(e) => errors.push(IngestErrorRecord {
                id,
                path: entry.path.display().to_string(),
                error: e.to_string(),
            }),
        }
    }

    let archive = CorpusArchive {
        run: stanza,
        normalization: opts,
        documents,
        errors,
    };
    // corpus invariants (unique ids, one script) are hard errors
    archive.corpus()?;

    for err in &archive.errors {
        eprintln!("warning: skipped {} ({}): {}", err.id, err.path, err.error);
    }
    write_json(&out, &archive)?;
    println!(
        "wrote corpus archive: {} documents, {} skipped -> {}",
        archive.documents.len(),
        archive.errors.len(),
        out.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// train

#[derive(Args, Debug)]
pub struct TrainArgs {
    /// Corpus archive produced by `ingest`
    #[arg(long)]
    pub archive: PathBuf,
    /// Gram order
    #[arg(long)]
    pub n: Option<usize>,
    /// Vectorization mode: joint (default) or conditional
    #[arg(long)]
    pub mode: Option<VectorizeMode>,
    /// Keep only the k most frequent grams
    #[arg(long)]
    pub top_k: Option<usize>,
    /// Use tf-idf features instead of n-gram probabilities
    #[arg(long)]
    pub tfidf: bool,
    /// Fixed nu (with --gamma skips the grid search)
    #[arg(long)]
    pub nu: Option<f64>,
    /// Fixed RBF gamma
    #[arg(long)]
    pub gamma: Option<f64>,
    /// KKT tolerance
    #[arg(long)]
    pub tol: Option<f64>,
    /// Solver step cap
    #[arg(long)]
    pub max_passes: Option<usize>,
    /// Force a grid search even when nu and gamma are given
    #[arg(long)]
    pub grid: bool,
    /// Manifest of documents that should classify as inliers
    #[arg(long)]
    pub holdout_in: Option<PathBuf>,
    /// Manifest of documents that should classify as outliers
    #[arg(long)]
    pub holdout_out: Option<PathBuf>,
    /// Comma-separated nu grid
    #[arg(long, value_delimiter = ',')]
    pub nu_grid: Option<Vec<f64>>,
    /// Comma-separated gamma grid
    #[arg(long, value_delimiter = ',')]
    pub gamma_grid: Option<Vec<f64>>,
    #[command(flatten)]
    pub norm: NormFlags,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FeatureSetup {
    Ngram {
        n: usize,
        mode: VectorizeMode,
        top_k: Option<usize>,
        space: FeatureSpace,
    },
    Tfidf {
        vocab: Vec<String>,
        corpus_size: usize,
        doc_frequency: BTreeMap<String, usize>,
    },
}

#[derive(Debug, Serialize, Deserialize)]
pub struct GridRecord {
    pub best_score: f64,
    pub weak_scoring: bool,
    pub cells: Vec<GridCell>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ModelFile {
    pub run: RunStanza,
    pub script: Script,
    pub normalization: NormalizationOptions,
    pub features: FeatureSetup,
    pub model: PersistedOcsvm,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub grid: Option<GridRecord>,
}

impl FeatureSetup {
    fn vectorize(&self, doc: &Document) -> Result<FeatureVector> {
        match self {
            FeatureSetup::Ngram { n, mode, space, .. } => {
                let model = build_ngram_model(doc, *n)?;
                Ok(vectorize_ngram(&model, space, *mode)?)
            }
            FeatureSetup::Tfidf {
                vocab,
                corpus_size,
                doc_frequency,
            } => {
                let model = TfIdfModel::from_parts(
                    *corpus_size,
                    doc_frequency
                        .iter()
                        .map(|(k, v)| (k.clone(), *v))
                        .collect(),
                );
                Ok(tfidf_vectorize(&model, doc, vocab)?)
            }
        }
    }
}

fn load_archive(path: &Path) -> Result<CorpusArchive> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading archive {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing archive {}", path.display()))
}

fn load_holdout_vectors(
    manifest: &Option<PathBuf>,
    setup: &FeatureSetup,
    opts: &NormalizationOptions,
) -> Result<Vec<FeatureVector>> {
    let Some(path) = manifest else {
        return Ok(Vec::new());
    };
    let entries = load_manifest(path)?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let mut out = Vec::new();
    for entry in &entries {
        let (doc, _) = load_document(entry, &base, opts)?;
        out.push(setup.vectorize(&doc)?);
    }
    Ok(out)
}

fn run_train(args: TrainArgs, cfg: FileConfig, seed: u64, out: PathBuf) -> Result<()> {
    let tc = cfg.train.clone().unwrap_or_default();
    let n = args.n.or(tc.n).unwrap_or(2);
    let config_mode = tc
        .mode
        .as_deref()
        .map(|m| m.parse::<VectorizeMode>())
        .transpose()
        .map_err(|e| anyhow!("config mode: {e}"))?;
    let mode = args.mode.or(config_mode).unwrap_or_default();
    let top_k = args.top_k.or(tc.top_k);
    let use_tfidf = args.tfidf || tc.tfidf.unwrap_or(false);
    let nu = args.nu.or(tc.nu);
    let gamma = args.gamma.or(tc.gamma);
    let tol = args.tol.or(tc.tol).unwrap_or(1e-6);
    let max_passes = args.max_passes.or(tc.max_passes).unwrap_or(200_000);
    let opts_override = args.norm.resolve(&cfg.normalization);

    let archive = load_archive(&args.archive)?;
    // the archive's normalization travels with the model unless overridden
    let norm = if cfg.normalization.is_some()
        || args.norm.no_lowercase
        || args.norm.keep_punctuation
        || args.norm.keep_digits
        || args.norm.strip_spaces
    {
        opts_override
    } else {
        archive.normalization.clone()
    };
    let corpus = archive.corpus()?;
    if corpus.is_empty() {
        bail!("archive contains no documents");
    }
    let script = archive.script().unwrap_or(Script::Latin);

    let setup = if use_tfidf {
        let model = tfidf_fit(&corpus)?;
        let vocab = model.vocabulary();
        FeatureSetup::Tfidf {
            corpus_size: model.corpus_size(),
            doc_frequency: model
                .frequencies()
                .iter()
                .map(|(k, v)| (k.clone(), *v))
                .collect(),
            vocab,
        }
    } else {
        let space = build_feature_space(&corpus, n, top_k)?;
        FeatureSetup::Ngram {
            n,
            mode,
            top_k,
            space,
        }
    };

    let x_train: Vec<FeatureVector> = corpus
        .documents()
        .iter()
        .map(|d| setup.vectorize(d))
        .collect::<Result<_>>()?;
    if x_train.len() == 1 {
        eprintln!("warning: training on a single document; the model is degenerate");
    }

    let base_cfg = TrainConfig::new(nu.unwrap_or(0.3))
        .map_err(anyhow::Error::from)?
        .with_tol(tol)
        .with_max_passes(max_passes)
        .with_seed(seed);

    let use_grid = args.grid || nu.is_none() || gamma.is_none();
    let (train_cfg, kernel, grid_record) = if use_grid {
        let nus = args.nu_grid.or(tc.nu_grid).unwrap_or_else(default_nu_grid);
        let gammas = args
            .gamma_grid
            .or(tc.gamma_grid)
            .unwrap_or_else(|| default_gamma_grid(x_train[0].len()));
        let holdout_in = load_holdout_vectors(&args.holdout_in, &setup, &norm)?;
        let holdout_out = load_holdout_vectors(&args.holdout_out, &setup, &norm)?;
        let outcome = grid_search(&x_train, &holdout_in, &holdout_out, &nus, &gammas, &base_cfg)?;
        if outcome.weak_scoring {
            eprintln!(
                "warning: no holdout sets; grid scored by training acceptance minus nu, a weak criterion"
            );
        }
        (
            outcome.config,
            outcome.kernel,
            Some(GridRecord {
                best_score: outcome.score,
                weak_scoring: outcome.weak_scoring,
                cells: outcome.cells,
            }),
        )
    } else {
        (
            base_cfg,
            KernelSpec::rbf(gamma.expect("checked above")).map_err(anyhow::Error::from)?,
            None,
        )
    };

    let model = train(&x_train, &train_cfg, &kernel)?;

    let mut stanza = RunStanza::new(
        "train",
        serde_json::json!({
            "archive": args.archive.display().to_string(),
            "n": n, "mode": mode, "top_k": top_k, "tfidf": use_tfidf,
            "nu": train_cfg.nu, "gamma": kernel.gamma,
            "tol": tol, "max_passes": max_passes,
        }),
        seed,
    );
    stanza.record_input(&args.archive);

    let file = ModelFile {
        run: stanza,
        script,
        normalization: norm,
        features: setup,
        model: PersistedOcsvm::from(&model),
        grid: grid_record,
    };
    write_json(&out, &file)?;
    println!(
        "trained on {} documents (nu {}, gamma {}); {} support vectors -> {}",
        x_train.len(),
        train_cfg.nu,
        kernel.gamma,
        file.model.alphas.len(),
        out.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// classify

#[derive(Args, Debug)]
pub struct ClassifyArgs {
    /// Model file produced by `train`
    #[arg(long)]
    pub model: PathBuf,
    /// JSON manifest of test documents
    #[arg(long)]
    pub manifest: PathBuf,
}

#[derive(Debug, Serialize)]
pub struct ClassifyRow {
    pub id: String,
    pub decision_value: f64,
    pub label: String,
}

#[derive(Debug, Serialize)]
pub struct ClassifyArtifact {
    pub run: RunStanza,
    pub rows: Vec<ClassifyRow>,
}

fn run_classify(args: ClassifyArgs, _cfg: FileConfig, seed: u64, out: PathBuf) -> Result<()> {
    let text = std::fs::read_to_string(&args.model)
        .with_context(|| format!("reading model {}", args.model.display()))?;
    let file: ModelFile = serde_json::from_str(&text)
        .with_context(|| format!("parsing model {}", args.model.display()))?;
    let model = file.model.clone().into_model()?;

    let entries = load_manifest(&args.manifest)?;
    let base = args
        .manifest
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_default();

    let mut stanza = RunStanza::new(
        "classify",
        serde_json::json!({
            "model": args.model.display().to_string(),
            "manifest": args.manifest.display().to_string(),
        }),
        seed,
    );
    stanza.record_input(&args.model);
    stanza.record_input(&args.manifest);

    let mut rows = Vec::new();
    for entry in &entries {
        let (doc, _) = load_document(entry, &base, &file.normalization)?;
        let vector = file.features.vectorize(&doc)?;
        if vector.space_id != model.space_id {
            bail!(
                "document `{}` vectorized into space {} but the model expects {}",
                doc.id,
                vector.space_id,
                model.space_id
            );
        }
        let value = decision_value(&model, &vector)?;
        let label = predict(&model, &vector)?.label().to_string();
        rows.push(ClassifyRow {
            id: doc.id,
            decision_value: value,
            label,
        });
    }

    let mut csv = String::from("id,decision_value,label\n");
    for row in &rows {
        csv.push_str(&format!(
            "{},{},{}\n",
            csv_field(&row.id),
            csv_f64(row.decision_value),
            row.label
        ));
    }
    let csv_path = csv_sibling(&out);
    write_text(&csv_path, &csv)?;
    write_json(&out, &ClassifyArtifact { run: stanza, rows })?;
    println!(
        "classified {} documents -> {} and {}",
        entries.len(),
        out.display(),
        csv_path.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// distance

#[derive(Args, Debug)]
pub struct DistanceArgs {
    /// First text file
    #[arg(long)]
    pub doc_a: PathBuf,
    /// Second text file
    #[arg(long)]
    pub doc_b: PathBuf,
    /// Script of both texts (latin or greek)
    #[arg(long)]
    pub script: Option<Script>,
    /// Gram order
    #[arg(long)]
    pub n: Option<usize>,
    #[command(flatten)]
    pub norm: NormFlags,
}

fn run_distance(args: DistanceArgs, cfg: FileConfig, seed: u64, out: PathBuf) -> Result<()> {
    let dc = cfg.distance.clone().unwrap_or_default();
    let n = args.n.or(dc.n).unwrap_or(2);
    let script = parse_script(args.script, &dc.script)?;
    let opts = args.norm.resolve(&cfg.normalization);

    let a = load_text_document(&args.doc_a, script, &opts)?;
    let b = load_text_document(&args.doc_b, script, &opts)?;
    let da = gram_distribution(&build_ngram_model(&a, n)?)?;
    let db = gram_distribution(&build_ngram_model(&b, n)?)?;
    let d = bhattacharyya_distance(&da, &db);

    println!("{}", csv_f64(d));

    let mut stanza = RunStanza::new(
        "distance",
        serde_json::json!({
            "doc_a": args.doc_a.display().to_string(),
            "doc_b": args.doc_b.display().to_string(),
            "script": script, "n": n, "normalization": opts,
        }),
        seed,
    );
    stanza.record_input(&args.doc_a);
    stanza.record_input(&args.doc_b);
    let distance_json = if d.is_finite() {
        serde_json::json!(d)
    } else {
        serde_json::json!("inf")
    };
    write_json(
        &out,
        &serde_json::json!({ "run": stanza, "distance": distance_json }),
    )?;
    Ok(())
}

// ---------------------------------------------------------------------------
// intertext

#[derive(Args, Debug)]
pub struct IntertextArgs {
    /// Query passage file
    #[arg(long)]
    pub query: PathBuf,
    /// Document file to scan
    #[arg(long)]
    pub doc: PathBuf,
    /// Script of both texts
    #[arg(long)]
    pub script: Option<Script>,
    /// Gram order
    #[arg(long)]
    pub n: Option<usize>,
    /// Scan every window instead of sampling
    #[arg(long)]
    pub full: bool,
    /// Miss-probability bound for the sampled scan
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Deviation tolerance for the sampled scan
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Match threshold on the Bhattacharyya distance
    #[arg(long)]
    pub threshold: Option<f64>,
    #[command(flatten)]
    pub norm: NormFlags,
}

fn run_intertext(args: IntertextArgs, cfg: FileConfig, seed: u64, out: PathBuf) -> Result<()> {
    let ic = cfg.intertext.clone().unwrap_or_default();
    let n = args.n.or(ic.n).unwrap_or(2);
    let script = parse_script(args.script, &ic.script)?;
    let alpha = args.alpha.or(ic.alpha).unwrap_or(0.05);
    let epsilon = args.epsilon.or(ic.epsilon).unwrap_or(0.1);
    let threshold = args.threshold.or(ic.threshold).unwrap_or(0.05);
    let opts = args.norm.resolve(&cfg.normalization);

    let query_doc = load_text_document(&args.query, script, &opts)?;
    let target = load_text_document(&args.doc, script, &opts)?;
    let query = Query::new(query_doc, n)?;

    let (report, plan): (_, Option<SamplingPlan>) = if args.full {
        (scan_full(&query, &target, threshold)?, None)
    } else {
        let plan = make_plan(target.char_len(), query.m, alpha, epsilon)?;
        if plan.b_clamped {
            eprintln!("warning: sample budget clamped up to 1 (alpha = {alpha})");
        }
        let plan = if plan.full_scan {
            eprintln!("warning: document too short for the sample budget; scanning every window");
            plan
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            plan.with_phase(rng.random_range(0..plan.stride))
        };
        (scan_sampled(&query, &target, &plan, threshold)?, Some(plan))
    };

    let mut stanza = RunStanza::new(
        "intertext",
        serde_json::json!({
            "query": args.query.display().to_string(),
            "doc": args.doc.display().to_string(),
            "script": script, "n": n, "full": args.full,
            "alpha": alpha, "epsilon": epsilon, "threshold": threshold,
            "normalization": opts,
        }),
        seed,
    );
    stanza.record_input(&args.query);
    stanza.record_input(&args.doc);

    let csv_path = csv_sibling(&out);
    write_text(&csv_path, &report.to_csv())?;
    write_json(
        &out,
        &serde_json::json!({ "run": stanza, "plan": plan, "report": report }),
    )?;
    println!(
        "{} hits over {} comparisons -> {} and {}",
        report.hits.len(),
        report.comparisons_made,
        out.display(),
        csv_path.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// doc-compare

#[derive(Args, Debug)]
pub struct DocCompareArgs {
    /// Document to draw query passages from
    #[arg(long)]
    pub doc_a: PathBuf,
    /// Document to search
    #[arg(long)]
    pub doc_b: PathBuf,
    /// Script of both texts
    #[arg(long)]
    pub script: Option<Script>,
    /// Gram order
    #[arg(long)]
    pub n: Option<usize>,
    /// Passages drawn per length
    #[arg(long)]
    pub n_per_len: Option<usize>,
    /// Smallest passage length
    #[arg(long)]
    pub min_len: Option<usize>,
    /// Largest passage length
    #[arg(long)]
    pub max_len: Option<usize>,
    /// Length grid step
    #[arg(long)]
    pub step: Option<usize>,
    /// Miss-probability bound per sampled scan
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Deviation tolerance per sampled scan
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Match threshold on the Bhattacharyya distance
    #[arg(long)]
    pub threshold: Option<f64>,
    #[command(flatten)]
    pub norm: NormFlags,
}

fn run_doc_compare(args: DocCompareArgs, cfg: FileConfig, seed: u64, out: PathBuf) -> Result<()> {
    let dc = cfg.doc_compare.clone().unwrap_or_default();
    let n = args.n.or(dc.n).unwrap_or(2);
    let script = parse_script(args.script, &dc.script)?;
    let n_per_len = args.n_per_len.or(dc.n_per_len).unwrap_or(10);
    let min_len = args.min_len.or(dc.min_len).unwrap_or(60);
    let max_len = args.max_len.or(dc.max_len).unwrap_or(200);
    let step = args.step.or(dc.step).unwrap_or(20);
    let alpha = args.alpha.or(dc.alpha).unwrap_or(0.05);
    let epsilon = args.epsilon.or(dc.epsilon).unwrap_or(0.1);
    let threshold = args.threshold.or(dc.threshold).unwrap_or(0.05);
    let opts = args.norm.resolve(&cfg.normalization);

    let doc_a = load_text_document(&args.doc_a, script, &opts)?;
    let doc_b = load_text_document(&args.doc_b, script, &opts)?;

    let entries = doc_compare(
        &doc_a, &doc_b, n, n_per_len, min_len, max_len, step, alpha, epsilon, threshold, seed,
    )?;

    let mut stanza = RunStanza::new(
        "doc-compare",
        serde_json::json!({
            "doc_a": args.doc_a.display().to_string(),
            "doc_b": args.doc_b.display().to_string(),
            "script": script, "n": n,
            "n_per_len": n_per_len, "min_len": min_len, "max_len": max_len, "step": step,
            "alpha": alpha, "epsilon": epsilon, "threshold": threshold,
            "normalization": opts,
        }),
        seed,
    );
    stanza.record_input(&args.doc_a);
    stanza.record_input(&args.doc_b);

    let mut csv = String::from("query_offset,query_len,best_offset,best_distance,hits\n");
    for e in &entries {
        let (best_offset, best_distance) = e
            .report
            .hits
            .iter()
            .min_by(|x, y| x.distance.total_cmp(&y.distance))
            .map(|h| (h.offset.to_string(), csv_f64(h.distance)))
            .unwrap_or_else(|| (String::new(), String::new()));
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            e.query_offset,
            e.query_len,
            best_offset,
            best_distance,
            e.report.hits.len()
        ));
    }
    let csv_path = csv_sibling(&out);
    write_text(&csv_path, &csv)?;
    write_json(
        &out,
        &serde_json::json!({ "run": stanza, "entries": entries }),
    )?;

    let found = entries.iter().filter(|e| !e.report.hits.is_empty()).count();
    println!(
        "{} of {} queries matched somewhere -> {} and {}",
        found,
        entries.len(),
        out.display(),
        csv_path.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------

pub fn run(cli: Cli) -> Result<()> {
    let cfg = load_config(&cli.config)?;
    let seed = cli.seed.or(cfg.seed).unwrap_or(0);
    let default_out = |name: &str| PathBuf::from(format!("{name}.json"));
    match cli.command {
        Command::Ingest(args) => {
            let out = cli.out.unwrap_or_else(|| default_out("corpus"));
            run_ingest(args, cfg, seed, out)
        }
        Command::Train(args) => {
            let out = cli.out.unwrap_or_else(|| default_out("model"));
            run_train(args, cfg, seed, out)
        }
        Command::Classify(args) => {
            let out = cli.out.unwrap_or_else(|| default_out("classify"));
            run_classify(args, cfg, seed, out)
        }
        Command::Distance(args) => {
            let out = cli.out.unwrap_or_else(|| default_out("distance"));
            run_distance(args, cfg, seed, out)
        }
        Command::Intertext(args) => {
            let out = cli.out.unwrap_or_else(|| default_out("intertext"));
            run_intertext(args, cfg, seed, out)
        }
        Command::DocCompare(args) => {
            let out = cli.out.unwrap_or_else(|| default_out("doc_compare"));
            run_doc_compare(args, cfg, seed, out)
        }
    }
}
