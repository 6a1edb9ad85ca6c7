//! Stylometry toolkit: character n-gram probability features, tf-idf,
//! Bhattacharyya distances, a one-class nu-SVM for authorship attribution,
//! and sampled intertextuality search with Hoeffding-bound guarantees.
//!
//! The pipeline, end to end:
//!
//! 1. [`corpus`] — load and normalize raw texts (Latin or transliterated
//!    Greek) into [`corpus::Document`]s.
//! 2. [`features`] — count character n-grams, derive probability features
//!    or tf-idf scores, and vectorize against a corpus-wide
//!    [`features::FeatureSpace`].
//! 3. [`metrics`] — compare gram distributions by Bhattacharyya distance.
//! 4. [`ocsvm`] — train a one-class SVM on one author's undisputed texts
//!    and score disputed ones by their signed distance from the hyperplane.
//! 5. [`intertext`] — search a document for passages close to a query,
//!    either exhaustively or on an evenly spaced Hoeffding sample.
//!
//! ```
//! use stylometry::corpus::{Document, NormalizationOptions, Script};
//! use stylometry::features::{build_ngram_model, gram_distribution};
//! use stylometry::metrics::bhattacharyya_distance;
//!
//! let opts = NormalizationOptions::default();
//! let (a, _) = Document::new("a", "Arma virumque cano, 1.2", Script::Latin, &opts);
//! let (b, _) = Document::new("b", "arma gravi numero", Script::Latin, &opts);
//! assert_eq!(a.normalized, "arma virumque cano");
//!
//! let da = gram_distribution(&build_ngram_model(&a, 2)?)?;
//! let db = gram_distribution(&build_ngram_model(&b, 2)?)?;
//! let d = bhattacharyya_distance(&da, &db);
//! assert!(d > 0.0 && d.is_finite());
//! assert_eq!(bhattacharyya_distance(&da, &da), 0.0);
//! # Ok::<(), stylometry::Error>(())
//! ```

pub mod corpus;
pub mod digest;
pub mod error;
pub mod features;
pub mod intertext;
pub mod metrics;
pub mod ocsvm;

pub use error::{Error, Result};
