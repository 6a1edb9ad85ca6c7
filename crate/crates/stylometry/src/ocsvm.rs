//! One-class nu-SVM with an RBF kernel.
//!
//! Training solves the dual quadratic program
//!
//! ```text
//!   min_a  1/2 sum_ij a_i a_j k(x_i, x_j)
//!   s.t.   0 <= a_i <= 1/(nu l),   sum_i a_i = 1
//! ```
//!
//! by pairwise coordinate descent: repeatedly pick the maximal violating
//! pair, optimize the two multipliers analytically under the shared sum
//! constraint and box bounds, and stop when the KKT violation falls below
//! the tolerance. The decision value of a point is
//! `sum_i a_i k(x_i, x) - rho`; negative means outlier.

use serde::{Deserialize, Serialize};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::features::{FeatureVector, VectorKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Rbf,
}

/// Kernel choice and parameters. Only the Gaussian RBF is supported.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub kind: KernelKind,
    pub gamma: f64,
}

impl KernelSpec {
    pub fn rbf(gamma: f64) -> Result<Self> {
        if !gamma.is_finite() || gamma <= 0.0 {
            return Err(Error::InvalidGamma(gamma));
        }
        Ok(Self {
            kind: KernelKind::Rbf,
            gamma,
        })
    }
}

/// Training parameters. `nu` bounds the outlier fraction from above and the
/// support-vector fraction from below; `tol` is the KKT tolerance; `seed`
/// fixes the sweep order used to break ties between violating pairs.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TrainConfig {
    pub nu: f64,
    pub tol: f64,
    pub max_passes: usize,
    pub seed: u64,
}

impl TrainConfig {
    pub fn new(nu: f64) -> Result<Self> {
        let cfg = Self {
            nu,
            tol: 1e-6,
            max_passes: 200_000,
            seed: 0,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_max_passes(mut self, max_passes: usize) -> Self {
        self.max_passes = max_passes;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !self.nu.is_finite() || self.nu <= 0.0 {
            return Err(Error::InvalidNu(self.nu));
        }
        if self.nu > 1.0 {
            return Err(Error::InfeasibleNu(self.nu));
        }
        if !self.tol.is_finite() || self.tol <= 0.0 {
            return Err(Error::InvalidTolerance(self.tol));
        }
        Ok(())
    }
}

/// A trained one-class SVM: the support vectors (training points with
/// nonzero multiplier), their multipliers, the offset rho, and the kernel.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OcsvmModel {
    pub support_vectors: Vec<FeatureVector>,
    pub alphas: Vec<f64>,
    pub rho: f64,
    pub kernel: KernelSpec,
    pub nu: f64,
    pub l: usize,
    pub space_id: String,
}

/// Diagnostics from one training run; `alphas` holds the multiplier of every
/// training point, including the zeros dropped from the model.
#[derive(Debug, Clone)]
pub struct TrainReport {
    pub steps: usize,
    pub kkt_violation: f64,
    pub objective: f64,
    pub alphas: Vec<f64>,
    pub rho_fallback: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Prediction {
    Inlier,
    Outlier,
}

impl Prediction {
    pub fn sign(self) -> i32 {
        match self {
            Prediction::Inlier => 1,
            Prediction::Outlier => -1,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Prediction::Inlier => "inlier",
            Prediction::Outlier => "outlier",
        }
    }
}

impl std::fmt::Display for Prediction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Gaussian RBF kernel: exp(-gamma ||x - y||^2). Equal inputs give exactly 1.
pub fn rbf_kernel(x: &FeatureVector, y: &FeatureVector, gamma: f64) -> Result<f64> {
    if !gamma.is_finite() || gamma <= 0.0 {
        return Err(Error::InvalidGamma(gamma));
    }
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    Ok(rbf(&x.values, &y.values, gamma))
}

fn rbf(x: &[f64], y: &[f64], gamma: f64) -> f64 {
    let sq: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let d = a - b;
            d * d
        })
        .sum();
    (-gamma * sq).exp()
}

/// Train a one-class SVM. See the module docs for the program being solved.
pub fn train(x: &[FeatureVector], cfg: &TrainConfig, kernel: &KernelSpec) -> Result<OcsvmModel> {
    train_with_report(x, cfg, kernel).map(|(model, _)| model)
}

/// As [`train`], also returning solver diagnostics.
pub fn train_with_report(
    x: &[FeatureVector],
    cfg: &TrainConfig,
    kernel: &KernelSpec,
) -> Result<(OcsvmModel, TrainReport)> {
    cfg.validate()?;
    if !kernel.gamma.is_finite() || kernel.gamma <= 0.0 {
        return Err(Error::InvalidGamma(kernel.gamma));
    }
    let l = x.len();
    if l == 0 {
        return Err(Error::EmptyTrainingSet);
    }
    let dim = x[0].len();
    let space_id = x[0].space_id.clone();
    for v in x {
        if v.len() != dim {
            return Err(Error::DimensionMismatch {
                left: dim,
                right: v.len(),
            });
        }
        if v.space_id != space_id {
            return Err(Error::SpaceMismatch {
                left: space_id,
                right: v.space_id.clone(),
            });
        }
    }

    let c = 1.0 / (cfg.nu * l as f64);

    // Full Gram matrix; training sets here are small.
    let mut gram = vec![0.0f64; l * l];
    for i in 0..l {
        for j in 0..=i {
            let k = rbf(&x[i].values, &x[j].values, kernel.gamma);
            gram[i * l + j] = k;
            gram[j * l + i] = k;
        }
    }

    // Uniform start: always feasible since 1/l <= 1/(nu l) for nu <= 1.
    let mut alpha = vec![1.0 / l as f64; l];
    let mut grad: Vec<f64> = (0..l)
        .map(|i| (0..l).map(|j| gram[i * l + j] * alpha[j]).sum())
        .collect();

    // Seeded sweep order used only to break exact ties between candidates.
    let mut order: Vec<usize> = (0..l).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    order.shuffle(&mut rng);

    let select = |alpha: &[f64], grad: &[f64]| -> Option<(usize, usize, f64)> {
        let mut up: Option<usize> = None; // argmax grad over alpha > 0
        let mut down: Option<usize> = None; // argmin grad over alpha < c
        for &k in &order {
            if alpha[k] > 0.0 && up.is_none_or(|u| grad[k] > grad[u]) {
                up = Some(k);
            }
            if alpha[k] < c && down.is_none_or(|d| grad[k] < grad[d]) {
                down = Some(k);
            }
        }
        match (up, down) {
            (Some(i), Some(j)) => Some((i, j, grad[i] - grad[j])),
            _ => None,
        }
    };

    let mut steps = 0usize;
    let mut violation;
    loop {
        let Some((i, j, v)) = select(&alpha, &grad) else {
            violation = 0.0; // every multiplier pinned; nothing can move
            break;
        };
        violation = v;
        if violation <= cfg.tol {
            break;
        }
        if steps >= cfg.max_passes {
            return Err(Error::NonConvergence { steps, violation });
        }

        // Move delta from a_i to a_j, clipped to the box.
        let eta = gram[i * l + i] + gram[j * l + j] - 2.0 * gram[i * l + j];
        let max_delta = alpha[i].min(c - alpha[j]);
        let delta = if eta > 1e-300 {
            (violation / eta).min(max_delta)
        } else {
            max_delta
        };
        alpha[i] -= delta;
        alpha[j] += delta;
        if alpha[i] < 1e-12 {
            alpha[i] = 0.0;
        }
        if alpha[j] > c - 1e-12 {
            alpha[j] = c;
        }
        for k in 0..l {
            grad[k] += delta * (gram[j * l + k] - gram[i * l + k]);
        }
        steps += 1;
    }

    // rho: mean decision input over free support vectors; if none are free,
    // the midpoint between the largest value among bound SVs and the
    // smallest among zero-multiplier points.
    let free: Vec<usize> = (0..l)
        .filter(|&i| alpha[i] > cfg.tol && alpha[i] < c - cfg.tol)
        .collect();
    let (rho, rho_fallback) = if !free.is_empty() {
        (
            free.iter().map(|&i| grad[i]).sum::<f64>() / free.len() as f64,
            false,
        )
    } else {
        let lo = (0..l)
            .filter(|&i| alpha[i] >= c - cfg.tol)
            .map(|i| grad[i])
            .fold(f64::NEG_INFINITY, f64::max);
        let hi = (0..l)
            .filter(|&i| alpha[i] <= cfg.tol)
            .map(|i| grad[i])
            .fold(f64::INFINITY, f64::min);
        let lo = if lo.is_finite() { lo } else { hi };
        let hi = if hi.is_finite() { hi } else { lo };
        ((lo + hi) / 2.0, true)
    };

    let objective = 0.5 * alpha.iter().zip(&grad).map(|(a, g)| a * g).sum::<f64>();

    let mut support_vectors = Vec::new();
    let mut kept = Vec::new();
    for i in 0..l {
        if alpha[i] > cfg.tol {
            support_vectors.push(x[i].clone());
            kept.push(alpha[i]);
        }
    }

    let model = OcsvmModel {
        support_vectors,
        alphas: kept,
        rho,
        kernel: *kernel,
        nu: cfg.nu,
        l,
        space_id,
    };
    let report = TrainReport {
        steps,
        kkt_violation: violation.max(0.0),
        objective,
        alphas: alpha,
        rho_fallback,
    };
    Ok((model, report))
}

/// The signed distance from the hyperplane: `sum_i a_i k(x_i, x) - rho`.
/// Negative values denote points classified outside the training class.
pub fn decision_value(model: &OcsvmModel, x: &FeatureVector) -> Result<f64> {
    let dim = model
        .support_vectors
        .first()
        .map(|v| v.len())
        .unwrap_or(x.len());
    if x.len() != dim {
        return Err(Error::DimensionMismatch {
            left: dim,
            right: x.len(),
        });
    }
    let sum: f64 = model
        .support_vectors
        .iter()
        .zip(&model.alphas)
        .map(|(sv, a)| a * rbf(&sv.values, &x.values, model.kernel.gamma))
        .sum();
    Ok(sum - model.rho)
}

/// Sign of the decision value; an exact zero counts as an inlier.
pub fn predict(model: &OcsvmModel, x: &FeatureVector) -> Result<Prediction> {
    let d = decision_value(model, x)?;
    Ok(if d >= 0.0 {
        Prediction::Inlier
    } else {
        Prediction::Outlier
    })
}

/// One evaluated cell of a parameter grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridCell {
    pub nu: f64,
    pub gamma: f64,
    pub score: Option<f64>,
    pub error: Option<String>,
}

/// The winning cell plus the full per-cell record.
#[derive(Debug, Clone)]
pub struct GridSearchOutcome {
    pub config: TrainConfig,
    pub kernel: KernelSpec,
    pub score: f64,
    pub weak_scoring: bool,
    pub cells: Vec<GridCell>,
}

/// Conventional nu grid for the CLI.
pub fn default_nu_grid() -> Vec<f64> {
    vec![0.05, 0.1, 0.2, 0.3, 0.5]
}

/// Conventional gamma grid, scaled by 1/dimensionality.
pub fn default_gamma_grid(dim: usize) -> Vec<f64> {
    [0.01, 0.1, 1.0, 10.0]
        .iter()
        .map(|g| g / dim.max(1) as f64)
        .collect()
}

/// Train one model per (nu, gamma) pair and score it on the holdout sets:
/// the fraction of `holdout_in` predicted inlier plus the fraction of
/// `holdout_out` predicted outlier. With both holdouts empty the score falls
/// back to the fraction of training points accepted minus nu, which is a
/// weak criterion and flagged as such. Ties go to the smaller nu, then the
/// smaller gamma. Per-cell training failures are recorded, not fatal.
pub fn grid_search(
    x_train: &[FeatureVector],
    holdout_in: &[FeatureVector],
    holdout_out: &[FeatureVector],
    nu_grid: &[f64],
    gamma_grid: &[f64],
    base: &TrainConfig,
) -> Result<GridSearchOutcome> {
    if nu_grid.is_empty() || gamma_grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let mut nus = nu_grid.to_vec();
    let mut gammas = gamma_grid.to_vec();
    nus.sort_by(f64::total_cmp);
    gammas.sort_by(f64::total_cmp);

    let weak_scoring = holdout_in.is_empty() && holdout_out.is_empty();
    let mut cells = Vec::with_capacity(nus.len() * gammas.len());
    let mut best: Option<(f64, TrainConfig, KernelSpec)> = None;

    for &nu in &nus {
        for &gamma in &gammas {
            let outcome = (|| -> Result<f64> {
                let cfg = TrainConfig { nu, ..*base };
                cfg.validate()?;
                let kernel = KernelSpec::rbf(gamma)?;
                let model = train(x_train, &cfg, &kernel)?;
                let frac = |set: &[FeatureVector], want: Prediction| -> Result<f64> {
                    if set.is_empty() {
                        return Ok(0.0);
                    }
                    let mut hits = 0usize;
                    for v in set {
                        if predict(&model, v)? == want {
                            hits += 1;
                        }
                    }
                    Ok(hits as f64 / set.len() as f64)
                };
                if weak_scoring {
                    Ok(frac(x_train, Prediction::Inlier)? - nu)
                } else {
                    Ok(frac(holdout_in, Prediction::Inlier)?
                        + frac(holdout_out, Prediction::Outlier)?)
                }
            })();
            match outcome {
                Ok(score) => {
                    cells.push(GridCell {
                        nu,
                        gamma,
                        score: Some(score),
                        error: None,
                    });
                    if best.as_ref().is_none_or(|(s, _, _)| score > *s) {
                        best = Some((score, TrainConfig { nu, ..*base }, KernelSpec::rbf(gamma)?));
                    }
                }
                Err(e) => cells.push(GridCell {
                    nu,
                    gamma,
                    score: None,
                    error: Some(e.to_string()),
                }),
            }
        }
    }

    let (score, config, kernel) = best.ok_or(Error::AllCellsFailed)?;
    Ok(GridSearchOutcome {
        config,
        kernel,
        score,
        weak_scoring,
        cells,
    })
}

/// The on-disk shape of a trained model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PersistedOcsvm {
    pub nu: f64,
    pub gamma: f64,
    pub rho: f64,
    pub l: usize,
    pub support_vectors: Vec<Vec<f64>>,
    pub alphas: Vec<f64>,
    pub space_id: String,
}

impl From<&OcsvmModel> for PersistedOcsvm {
    fn from(m: &OcsvmModel) -> Self {
        Self {
            nu: m.nu,
            gamma: m.kernel.gamma,
            rho: m.rho,
            l: m.l,
            support_vectors: m.support_vectors.iter().map(|v| v.values.clone()).collect(),
            alphas: m.alphas.clone(),
            space_id: m.space_id.clone(),
        }
    }
}

impl PersistedOcsvm {
    pub fn into_model(self) -> Result<OcsvmModel> {
        let kernel = KernelSpec::rbf(self.gamma)?;
        let support_vectors = self
            .support_vectors
            .into_iter()
            .map(|values| FeatureVector::new(self.space_id.clone(), values, VectorKind::Raw))
            .collect::<Result<Vec<_>>>()?;
        Ok(OcsvmModel {
            support_vectors,
            alphas: self.alphas,
            rho: self.rho,
            kernel,
            nu: self.nu,
            l: self.l,
            space_id: self.space_id,
        })
    }
}
