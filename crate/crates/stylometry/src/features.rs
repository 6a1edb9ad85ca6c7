//! Character n-gram probability features and tf-idf features, plus the
//! fixed-order vector representation shared across a corpus.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Document};
use crate::digest::digest_parts;
use crate::error::{Error, Result};
use crate::metrics::DiscreteDistribution;

/// Counts of length-n substrings and their length-(n-1) contexts for one
/// document, gathered in a single left-to-right pass.
///
/// Contexts are counted only at positions that have a following character,
/// so for every seen context c the gram counts `c+x` sum exactly to the
/// context count of c.
#[derive(Debug, Clone)]
pub struct NGramModel {
    n: usize,
    gram_counts: HashMap<String, u64>,
    context_counts: HashMap<String, u64>,
    source_length: usize,
}

impl NGramModel {
    /// Count every length-n window of `chars`.
    pub fn from_chars(chars: &[char], n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidOrder(n));
        }
        if chars.len() < n {
            return Err(Error::DocumentTooShort {
                id: String::new(),
                len: chars.len(),
                needed: n,
            });
        }
        let mut gram_counts: HashMap<String, u64> = HashMap::new();
        let mut context_counts: HashMap<String, u64> = HashMap::new();
        for window in chars.windows(n) {
            let gram: String = window.iter().collect();
            let context: String = window[..n - 1].iter().collect();
            *gram_counts.entry(gram).or_insert(0) += 1;
            *context_counts.entry(context).or_insert(0) += 1;
        }
        Ok(Self {
            n,
            gram_counts,
            context_counts,
            source_length: chars.len(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gram_count(&self, gram: &str) -> u64 {
        self.gram_counts.get(gram).copied().unwrap_or(0)
    }

    pub fn context_count(&self, context: &str) -> u64 {
        self.context_counts.get(context).copied().unwrap_or(0)
    }

    pub fn gram_counts(&self) -> &HashMap<String, u64> {
        &self.gram_counts
    }

    pub fn context_counts(&self) -> &HashMap<String, u64> {
        &self.context_counts
    }

    pub fn source_length(&self) -> usize {
        self.source_length
    }

    pub fn total_grams(&self) -> u64 {
        self.gram_counts.values().sum()
    }
}

/// Build the n-gram model of a document's normalized text.
pub fn build_ngram_model(doc: &Document, n: usize) -> Result<NGramModel> {
    let chars: Vec<char> = doc.normalized.chars().collect();
    NGramModel::from_chars(&chars, n).map_err(|e| match e {
        Error::DocumentTooShort { len, needed, .. } => Error::DocumentTooShort {
            id: doc.id.clone(),
            len,
            needed,
        },
        other => other,
    })
}

/// Conditional probability of `next` following `context`: the gram count of
/// `context + next` over the context count. Returns 0 for an unseen gram
/// under a seen context; an unseen context is an error because the
/// conditional is undefined there.
pub fn conditional_probability(model: &NGramModel, context: &str, next: char) -> Result<f64> {
    let got = context.chars().count();
    if got != model.n - 1 {
        return Err(Error::ContextLength {
            got,
            expected: model.n - 1,
        });
    }
    let ctx_count = model.context_count(context);
    if ctx_count == 0 {
        return Err(Error::UndefinedContext {
            context: context.to_owned(),
        });
    }
    let mut gram = String::with_capacity(context.len() + next.len_utf8());
    gram.push_str(context);
    gram.push(next);
    Ok(model.gram_count(&gram) as f64 / ctx_count as f64)
}

/// The model's gram counts normalized by their total: a single discrete
/// probability distribution over the document's n-grams.
pub fn gram_distribution(model: &NGramModel) -> Result<DiscreteDistribution> {
    let total = model.total_grams();
    if total == 0 {
        return Err(Error::EmptyModel);
    }
    DiscreteDistribution::from_pairs(
        model
            .gram_counts
            .iter()
            .map(|(g, c)| (g.clone(), *c as f64 / total as f64)),
    )
}

/// The ordered gram vocabulary a corpus is vectorized against.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSpace {
    n: usize,
    grams: Vec<String>,
}

impl FeatureSpace {
    /// Grams are sorted and must be unique and of length n.
    pub fn new(n: usize, mut grams: Vec<String>) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidOrder(n));
        }
        grams.sort();
        for w in grams.windows(2) {
            if w[0] == w[1] {
                return Err(Error::DuplicateSupportKey(w[0].clone()));
            }
        }
        for g in &grams {
            if g.chars().count() != n {
                return Err(Error::ContextLength {
                    got: g.chars().count(),
                    expected: n,
                });
            }
        }
        Ok(Self { n, grams })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn grams(&self) -> &[String] {
        &self.grams
    }

    pub fn dimensionality(&self) -> usize {
        self.grams.len()
    }

    /// Stable content digest of (n, grams); vectors carry it so that models
    /// and test documents can be checked for feature-space agreement.
    pub fn space_id(&self) -> String {
        let n = self.n.to_string();
        digest_parts(
            "ngram-space",
            std::iter::once(n.as_str()).chain(self.grams.iter().map(|s| s.as_str())),
        )
    }
}

/// What kind of values a vector holds; n-gram probability vectors must be
/// nonnegative, tf-idf vectors may go negative, raw vectors are free-form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VectorKind {
    NGram,
    TfIdf,
    Raw,
}

/// A dense numeric representation of one document, aligned to the feature
/// space identified by `space_id`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub space_id: String,
    pub values: Vec<f64>,
    pub kind: VectorKind,
}

impl FeatureVector {
    pub fn new(space_id: impl Into<String>, values: Vec<f64>, kind: VectorKind) -> Result<Self> {
        for (i, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFiniteValue(i));
            }
            if kind == VectorKind::NGram && *v < 0.0 {
                return Err(Error::NegativeValue(i));
            }
        }
        Ok(Self {
            space_id: space_id.into(),
            values,
            kind,
        })
    }

    /// Free-form dense vector, used where inputs are not text features.
    pub fn raw(values: Vec<f64>) -> Result<Self> {
        let id = format!("raw:{}", values.len());
        Self::new(id, values, VectorKind::Raw)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// How an n-gram model is turned into a vector: `Joint` uses the normalized
/// gram distribution (the default); `Conditional` uses per-gram conditional
/// probabilities, with unseen contexts mapped to 0 so the vector stays total.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VectorizeMode {
    #[default]
    Joint,
    Conditional,
}

impl std::str::FromStr for VectorizeMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "joint" => Ok(VectorizeMode::Joint),
            "conditional" => Ok(VectorizeMode::Conditional),
            other => Err(format!("unknown mode `{other}` (expected joint or conditional)")),
        }
    }
}

/// The union of all n-grams appearing in the corpus, sorted. With `top_k`,
/// only the k most frequent grams (by total corpus count, ties to the
/// lexicographically smaller) are kept before sorting.
pub fn build_feature_space(corpus: &Corpus, n: usize, top_k: Option<usize>) -> Result<FeatureSpace> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut totals: HashMap<String, u64> = HashMap::new();
    for doc in corpus.documents() {
        let model = build_ngram_model(doc, n)?;
        for (gram, count) in model.gram_counts() {
            *totals.entry(gram.clone()).or_insert(0) += count;
        }
    }
    let grams: Vec<String> = match top_k {
        Some(k) => {
            let mut ranked: Vec<(String, u64)> = totals.into_iter().collect();
            ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
            ranked.into_iter().take(k).map(|(g, _)| g).collect()
        }
        None => totals.into_keys().collect(),
    };
    FeatureSpace::new(n, grams)
}

/// Map a model onto a space-aligned dense vector. Grams absent from the
/// model yield 0 in either mode.
pub fn vectorize_ngram(
    model: &NGramModel,
    space: &FeatureSpace,
    mode: VectorizeMode,
) -> Result<FeatureVector> {
    if model.n() != space.n() {
        return Err(Error::OrderMismatch {
            model_n: model.n(),
            space_n: space.n(),
        });
    }
    let values = match mode {
        VectorizeMode::Joint => {
            let dist = gram_distribution(model)?;
            space.grams().iter().map(|g| dist.get(g)).collect()
        }
        VectorizeMode::Conditional => space
            .grams()
            .iter()
            .map(|g| {
                let chars: Vec<char> = g.chars().collect();
                let context: String = chars[..chars.len() - 1].iter().collect();
                let ctx_count = model.context_count(&context);
                if ctx_count == 0 {
                    0.0
                } else {
                    model.gram_count(g) as f64 / ctx_count as f64
                }
            })
            .collect(),
    };
    FeatureVector::new(space.space_id(), values, VectorKind::NGram)
}

/// Document-frequency statistics for tf-idf scoring. Fit once over a corpus
/// or grow incrementally with [`TfIdfModel::add_document`].
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct TfIdfModel {
    corpus_size: usize,
    doc_frequency: HashMap<String, usize>,
}

impl TfIdfModel {
    pub fn new() -> Self {
        Self::default()
    }

    /// Rebuild a fitted model from persisted statistics.
    pub fn from_parts(corpus_size: usize, doc_frequency: HashMap<String, usize>) -> Self {
        Self {
            corpus_size,
            doc_frequency,
        }
    }

    pub fn frequencies(&self) -> &HashMap<String, usize> {
        &self.doc_frequency
    }

    /// Update corpus size and document frequencies with one more document.
    pub fn add_document(&mut self, doc: &Document) {
        self.corpus_size += 1;
        let distinct: HashSet<&String> = doc.tokens.iter().collect();
        for term in distinct {
            *self.doc_frequency.entry(term.clone()).or_insert(0) += 1;
        }
    }

    pub fn corpus_size(&self) -> usize {
        self.corpus_size
    }

    /// Number of documents containing `term` (0 when absent everywhere).
    pub fn doc_frequency(&self, term: &str) -> usize {
        self.doc_frequency.get(term).copied().unwrap_or(0)
    }

    /// All terms seen during fitting, sorted — a ready-made vocabulary.
    pub fn vocabulary(&self) -> Vec<String> {
        let mut terms: Vec<String> = self.doc_frequency.keys().cloned().collect();
        terms.sort();
        terms
    }
}

/// Fit document frequencies over a whole corpus.
pub fn tfidf_fit(corpus: &Corpus) -> Result<TfIdfModel> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut model = TfIdfModel::new();
    for doc in corpus.documents() {
        model.add_document(doc);
    }
    Ok(model)
}

/// tf-idf score of `term` in `doc`: raw term count times ln(|D| / (1 + df)).
/// The +1 in the denominator is kept as-is, so a term present in every
/// document scores negative. Absent terms score exactly 0.
pub fn tfidf_score(model: &TfIdfModel, term: &str, doc: &Document) -> f64 {
    let count = doc.tokens.iter().filter(|t| t.as_str() == term).count();
    if count == 0 || model.corpus_size == 0 {
        return 0.0;
    }
    let idf = (model.corpus_size as f64 / (1.0 + model.doc_frequency(term) as f64)).ln();
    count as f64 * idf
}

/// Vector of tf-idf scores aligned to a sorted, duplicate-free vocabulary.
pub fn tfidf_vectorize(model: &TfIdfModel, doc: &Document, vocab: &[String]) -> Result<FeatureVector> {
    for w in vocab.windows(2) {
        if w[0] >= w[1] {
            return Err(Error::UnsortedVocab);
        }
    }
    let values = vocab.iter().map(|t| tfidf_score(model, t, doc)).collect();
    let space_id = digest_parts("tfidf-vocab", vocab.iter().map(|s| s.as_str()));
    FeatureVector::new(space_id, values, VectorKind::TfIdf)
}
