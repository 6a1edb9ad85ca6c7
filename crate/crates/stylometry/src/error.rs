use thiserror::Error;

/// Errors shared across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    // corpus
    #[error("duplicate document id `{0}` in corpus")]
    DuplicateDocumentId(String),
    #[error("corpus mixes scripts: `{0}` does not match the corpus script")]
    MixedScripts(String),
    #[error("chunk window {window} exceeds document length {len}")]
    WindowTooLarge { window: usize, len: usize },
    #[error("chunk stride must be >= 1")]
    ZeroStride,
    #[error("chunk window must be >= 1")]
    ZeroWindow,
    #[error("empty corpus")]
    EmptyCorpus,

    // features
    #[error("document `{id}` has {len} characters, need at least {needed}")]
    DocumentTooShort {
        id: String,
        len: usize,
        needed: usize,
    },
    #[error("n-gram order must be >= 2, got {0}")]
    InvalidOrder(usize),
    #[error("context `{context}` was never observed; conditional probability is undefined")]
    UndefinedContext { context: String },
    #[error("context length {got} does not match model order (expected {expected})")]
    ContextLength { got: usize, expected: usize },
    #[error("model order {model_n} does not match feature space order {space_n}")]
    OrderMismatch { model_n: usize, space_n: usize },
    #[error("empty n-gram model")]
    EmptyModel,
    #[error("vocabulary must be sorted and free of duplicates")]
    UnsortedVocab,
    #[error("feature vector value at index {0} is not finite")]
    NonFiniteValue(usize),
    #[error("n-gram feature vector value at index {0} is negative")]
    NegativeValue(usize),

    // metrics
    #[error("distribution mass at key `{0}` is negative")]
    NegativeMass(String),
    #[error("distribution masses sum to {0}, expected 1 within 1e-9")]
    MassSum(f64),
    #[error("duplicate support key `{0}`")]
    DuplicateSupportKey(String),
    #[error("empty distribution support")]
    EmptySupport,

    // ocsvm
    #[error("kernel gamma must be positive, got {0}")]
    InvalidGamma(f64),
    #[error("nu must be positive, got {0}")]
    InvalidNu(f64),
    #[error("nu = {0} makes the dual constraints infeasible (requires nu <= 1)")]
    InfeasibleNu(f64),
    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
    #[error("vector dimensionality mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("training vectors belong to different feature spaces (`{left}` vs `{right}`)")]
    SpaceMismatch { left: String, right: String },
    #[error("empty training set")]
    EmptyTrainingSet,
    #[error("solver did not converge after {steps} steps (KKT violation {violation:.3e} > tol)")]
    NonConvergence { steps: usize, violation: f64 },
    #[error("empty parameter grid")]
    EmptyGrid,
    #[error("no grid cell trained successfully")]
    AllCellsFailed,

    // intertext
    #[error("alpha must be in (0, 2], got {0}")]
    InvalidAlpha(f64),
    #[error("epsilon must be positive, got {0}")]
    InvalidEpsilon(f64),
    #[error("threshold must be positive and finite, got {0}")]
    InvalidThreshold(f64),
    #[error("document length {doc_len} is shorter than query length {query_len}")]
    DocumentShorterThanQuery { doc_len: usize, query_len: usize },
    #[error("sampling plan yields no valid offsets for this document/query pair")]
    PlanMismatch,
    #[error("invalid length grid: min {min}, max {max}, step {step}")]
    InvalidLengthGrid { min: usize, max: usize, step: usize },

    // io / serialization
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for solver failures (non-convergence, infeasible constraints)
    /// rather than bad inputs. The CLI maps these to a distinct exit code.
    pub fn is_convergence_failure(&self) -> bool {
        matches!(
            self,
            Error::NonConvergence { .. } | Error::AllCellsFailed | Error::InfeasibleNu(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
