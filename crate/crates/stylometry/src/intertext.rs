//! Passage-to-document and document-to-document intertextuality search.
//!
//! A query passage is compared against fixed-length windows of a target
//! document by the Bhattacharyya distance between their n-gram
//! distributions. A scan either visits every window or only an evenly
//! spaced sample whose size comes from Hoeffding's inequality: with `b`
//! samples the observed match proportion deviates from the true one by more
//! than epsilon with probability at most `2 exp(-2 b epsilon^2)`.

use serde::{Deserialize, Serialize};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::Document;
use crate::error::{Error, Result};
use crate::features::{gram_distribution, NGramModel};
use crate::metrics::{bhattacharyya_distance, DiscreteDistribution};

/// Number of samples needed so that the observed proportion stays within
/// `epsilon` of the truth with miss probability at most `alpha`:
/// `ceil(ln(2/alpha) / (2 epsilon^2))`. A plan of zero samples (alpha = 2)
/// is clamped to one.
pub fn sample_count(alpha: f64, epsilon: f64) -> Result<usize> {
    let (b, _) = sample_count_with_clamp(alpha, epsilon)?;
    Ok(b)
}

fn sample_count_with_clamp(alpha: f64, epsilon: f64) -> Result<(usize, bool)> {
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(Error::InvalidAlpha(alpha));
    }
    if !epsilon.is_finite() || epsilon <= 0.0 {
        return Err(Error::InvalidEpsilon(epsilon));
    }
    let raw = (2.0 / alpha).ln() / (2.0 * epsilon * epsilon);
    // Guard against float noise just above an integer before taking ceil.
    let b = (raw - 1e-9).ceil().max(0.0) as usize;
    if b == 0 {
        Ok((1, true))
    } else {
        Ok((b, false))
    }
}

/// How a sampled scan walks a document: `b` windows, one every `stride`
/// characters, starting at `phase`. When the document is too short for the
/// budget the plan degrades to a full scan.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SamplingPlan {
    pub alpha: f64,
    pub epsilon: f64,
    pub b: usize,
    pub stride: usize,
    #[serde(default)]
    pub phase: usize,
    pub full_scan: bool,
    pub b_clamped: bool,
}

impl SamplingPlan {
    /// Shift the sampling grid. The phase is reduced modulo the stride so
    /// the even spacing and the sample count are preserved.
    pub fn with_phase(mut self, phase: usize) -> Self {
        if self.stride > 0 {
            self.phase = phase % self.stride;
        }
        self
    }

    /// The window offsets a sampled scan will evaluate for the given
    /// document and query lengths: phase, phase+stride, ... — at most `b`
    /// of them, fewer when the document ends first.
    pub fn offsets(&self, doc_len: usize, query_len: usize) -> Vec<usize> {
        if doc_len < query_len {
            return Vec::new();
        }
        let last = doc_len - query_len;
        if self.full_scan {
            (0..=last).collect()
        } else {
            (0..self.b)
                .map(|k| self.phase + k * self.stride)
                .take_while(|&o| o <= last)
                .collect()
        }
    }
}

/// Derive a plan for a document of `doc_len` characters and a query of
/// `query_len`: `b` from [`sample_count`], stride = floor((n - m + 1) / b).
pub fn make_plan(doc_len: usize, query_len: usize, alpha: f64, epsilon: f64) -> Result<SamplingPlan> {
    if doc_len < query_len {
        return Err(Error::DocumentShorterThanQuery {
            doc_len,
            query_len,
        });
    }
    let (b, b_clamped) = sample_count_with_clamp(alpha, epsilon)?;
    let positions = doc_len - query_len + 1;
    let stride = positions / b;
    let full_scan = stride < 1;
    Ok(SamplingPlan {
        alpha,
        epsilon,
        b,
        stride: stride.max(1),
        phase: 0,
        full_scan,
        b_clamped,
    })
}

/// A query passage together with its precomputed gram distribution.
#[derive(Debug, Clone)]
pub struct Query {
    pub passage: Document,
    pub m: usize,
    pub n: usize,
    pub distribution: DiscreteDistribution,
}

impl Query {
    pub fn new(passage: Document, n: usize) -> Result<Self> {
        let chars: Vec<char> = passage.normalized.chars().collect();
        let model = NGramModel::from_chars(&chars, n).map_err(|e| match e {
            Error::DocumentTooShort { len, needed, .. } => Error::DocumentTooShort {
                id: passage.id.clone(),
                len,
                needed,
            },
            other => other,
        })?;
        let distribution = gram_distribution(&model)?;
        Ok(Self {
            m: chars.len(),
            n,
            passage,
            distribution,
        })
    }
}

/// One located match: where it starts, how far its distribution is from the
/// query's, and the text itself.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IntertextHit {
    pub offset: usize,
    pub distance: f64,
    pub excerpt: String,
}

/// The outcome of one scan. `sampled_proportion` and `confidence_interval`
/// are present only for sampled scans; the interval is proportion +/- epsilon.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanReport {
    pub hits: Vec<IntertextHit>,
    pub sampled_proportion: Option<f64>,
    pub confidence_interval: Option<(f64, f64)>,
    pub comparisons_made: usize,
}

impl ScanReport {
    /// CSV with an `offset,distance,excerpt` header row. Excerpts are quoted
    /// when they contain a delimiter (possible when punctuation is kept).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("offset,distance,excerpt\n");
        for hit in &self.hits {
            let d = if hit.distance.is_finite() {
                format!("{}", hit.distance)
            } else {
                "inf".to_string()
            };
            out.push_str(&format!("{},{},{}\n", hit.offset, d, csv_field(&hit.excerpt)));
        }
        out
    }

    /// Smallest hit distance, if any hit was found.
    pub fn best_distance(&self) -> Option<f64> {
        self.hits
            .iter()
            .map(|h| h.distance)
            .min_by(f64::total_cmp)
    }
}

/// Quote a CSV field only when it needs it.
fn csv_field(value: &str) -> String {
    if value.contains(',') || value.contains('"') || value.contains('\n') {
        format!("\"{}\"", value.replace('"', "\"\""))
    } else {
        value.to_string()
    }
}

fn validate_threshold(threshold: f64) -> Result<()> {
    if !threshold.is_finite() || threshold <= 0.0 {
        return Err(Error::InvalidThreshold(threshold));
    }
    Ok(())
}

fn window_distance(query: &Query, chars: &[char]) -> f64 {
    // Windows have length >= n by construction, so these cannot fail.
    let model = NGramModel::from_chars(chars, query.n).expect("window shorter than n");
    let dist = gram_distribution(&model).expect("window produced no grams");
    bhattacharyya_distance(&query.distribution, &dist)
}

/// Collapse runs of overlapping candidates to the best representative.
/// Candidates must arrive sorted by offset. Two candidates whose windows
/// overlap are taken to point at the same intertextual object, so only the
/// minimum-distance one (ties to the earlier offset) survives per run.
fn dedup_overlapping(candidates: Vec<IntertextHit>, m: usize) -> Vec<IntertextHit> {
    let mut out: Vec<IntertextHit> = Vec::new();
    let mut run: Option<(usize, IntertextHit)> = None; // (last offset in run, best)
    for cand in candidates {
        match run.take() {
            None => run = Some((cand.offset, cand)),
            Some((last, best)) => {
                if cand.offset < last + m {
                    // same run; keep the better representative
                    let offset = cand.offset;
                    let best = if cand.distance < best.distance { cand } else { best };
                    run = Some((offset, best));
                } else {
                    out.push(best);
                    run = Some((cand.offset, cand));
                }
            }
        }
    }
    if let Some((_, best)) = run {
        out.push(best);
    }
    out
}

fn scan_offsets(
    query: &Query,
    doc: &Document,
    offsets: impl Iterator<Item = usize>,
    threshold: f64,
) -> (Vec<IntertextHit>, usize, usize) {
    let chars: Vec<char> = doc.normalized.chars().collect();
    let m = query.m;
    let mut candidates = Vec::new();
    let mut comparisons = 0usize;
    let mut matched = 0usize;
    for offset in offsets {
        let window = &chars[offset..offset + m];
        let distance = window_distance(query, window);
        comparisons += 1;
        if distance <= threshold {
            matched += 1;
            candidates.push(IntertextHit {
                offset,
                distance,
                excerpt: window.iter().collect(),
            });
        }
    }
    (dedup_overlapping(candidates, m), comparisons, matched)
}

/// Compare the query against every window of the document. Hits are the
/// offsets whose distance is at or below the threshold, deduplicated.
pub fn scan_full(query: &Query, doc: &Document, threshold: f64) -> Result<ScanReport> {
    validate_threshold(threshold)?;
    let doc_len = doc.char_len();
    if doc_len < query.m {
        return Err(Error::DocumentShorterThanQuery {
            doc_len,
            query_len: query.m,
        });
    }
    let (hits, comparisons, _) = scan_offsets(query, doc, 0..=doc_len - query.m, threshold);
    Ok(ScanReport {
        hits,
        sampled_proportion: None,
        confidence_interval: None,
        comparisons_made: comparisons,
    })
}

/// Compare the query against the plan's evenly spaced sample of windows and
/// report the matched proportion with its Hoeffding confidence interval.
/// A plan flagged as degraded visits every window instead.
pub fn scan_sampled(
    query: &Query,
    doc: &Document,
    plan: &SamplingPlan,
    threshold: f64,
) -> Result<ScanReport> {
    validate_threshold(threshold)?;
    let doc_len = doc.char_len();
    if doc_len < query.m {
        return Err(Error::DocumentShorterThanQuery {
            doc_len,
            query_len: query.m,
        });
    }
    let offsets = plan.offsets(doc_len, query.m);
    if offsets.is_empty() {
        return Err(Error::PlanMismatch);
    }

    let (hits, comparisons, matched) = scan_offsets(query, doc, offsets.into_iter(), threshold);
    let proportion = matched as f64 / comparisons as f64;
    Ok(ScanReport {
        hits,
        sampled_proportion: Some(proportion),
        confidence_interval: Some((proportion - plan.epsilon, proportion + plan.epsilon)),
        comparisons_made: comparisons,
    })
}

/// One sampled query of a document-to-document comparison.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DocCompareEntry {
    pub query_offset: usize,
    pub query_len: usize,
    pub query_excerpt: String,
    pub report: ScanReport,
}

/// Draw `n_per_len` random passages of each length in
/// `{min_len, min_len+step, ..., max_len}` from `doc_a` and scan `doc_b` for
/// each with a fresh sampling plan (random grid phase per query). Entries
/// come back sorted by their best hit distance, misses last.
#[allow(clippy::too_many_arguments)]
pub fn doc_compare(
    doc_a: &Document,
    doc_b: &Document,
    n: usize,
    n_per_len: usize,
    min_len: usize,
    max_len: usize,
    step: usize,
    alpha: f64,
    epsilon: f64,
    threshold: f64,
    seed: u64,
) -> Result<Vec<DocCompareEntry>> {
    if min_len > max_len || step == 0 || min_len < n {
        return Err(Error::InvalidLengthGrid {
            min: min_len,
            max: max_len,
            step,
        });
    }
    let a_chars: Vec<char> = doc_a.normalized.chars().collect();
    let b_len = doc_b.char_len();
    if a_chars.len() < max_len || b_len < max_len {
        return Err(Error::DocumentShorterThanQuery {
            doc_len: a_chars.len().min(b_len),
            query_len: max_len,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut entries = Vec::new();
    let mut len = min_len;
    while len <= max_len {
        let plan = make_plan(b_len, len, alpha, epsilon)?;
        for _ in 0..n_per_len {
            let offset = rng.random_range(0..=a_chars.len() - len);
            let excerpt: String = a_chars[offset..offset + len].iter().collect();
            let passage = Document::from_normalized(
                format!("{}#{}", doc_a.id, offset),
                excerpt.clone(),
                doc_a.script,
            );
            let query = Query::new(passage, n)?;
            let plan = plan.with_phase(rng.random_range(0..plan.stride.max(1)));
            let report = scan_sampled(&query, doc_b, &plan, threshold)?;
            entries.push(DocCompareEntry {
                query_offset: offset,
                query_len: len,
                query_excerpt: excerpt,
                report,
            });
        }
        len += step;
    }

    entries.sort_by(|x, y| {
        let bx = x.report.best_distance().unwrap_or(f64::INFINITY);
        let by = y.report.best_distance().unwrap_or(f64::INFINITY);
        bx.total_cmp(&by)
            .then(x.query_len.cmp(&y.query_len))
            .then(x.query_offset.cmp(&y.query_offset))
    });
    Ok(entries)
}
