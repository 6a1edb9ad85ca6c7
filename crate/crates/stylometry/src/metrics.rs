//! Distances between discrete probability distributions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A discrete probability distribution over string keys. The support is kept
/// sorted so that sums run in a fixed order and comparisons are exactly
/// symmetric. Masses are renormalized to sum to 1 at construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteDistribution {
    support: Vec<String>,
    mass: Vec<f64>,
}

impl DiscreteDistribution {
    /// Build from key/mass pairs. Masses must be nonnegative and sum to 1
    /// within 1e-9; they are then renormalized exactly.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (String, f64)>) -> Result<Self> {
        let mut pairs: Vec<(String, f64)> = pairs.into_iter().collect();
        if pairs.is_empty() {
            return Err(Error::EmptySupport);
        }
        pairs.sort_by(|a, b| a.0.cmp(&b.0));
        for w in pairs.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::DuplicateSupportKey(w[0].0.clone()));
            }
        }
        let mut total = 0.0;
        for (k, m) in &pairs {
            if *m < 0.0 || !m.is_finite() {
                return Err(Error::NegativeMass(k.clone()));
            }
            total += m;
        }
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::MassSum(total));
        }
        let (support, mass) = pairs
            .into_iter()
            .map(|(k, m)| (k, m / total))
            .unzip();
        Ok(Self { support, mass })
    }

    pub fn support(&self) -> &[String] {
        &self.support
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    /// Mass at `key`, 0 when the key is not in the support.
    pub fn get(&self, key: &str) -> f64 {
        match self.support.binary_search_by(|k| k.as_str().cmp(key)) {
            Ok(i) => self.mass[i],
            Err(_) => 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }
}

/// Overlap between two distributions: sum over the union support of
/// sqrt(p(x) q(x)). Lies in [0, 1]; 1 for identical distributions, 0 for
/// disjoint supports. Keys missing from one side contribute nothing.
pub fn bhattacharyya_coefficient(p: &DiscreteDistribution, q: &DiscreteDistribution) -> f64 {
    let mut sum = 0.0;
    let mut i = 0;
    let mut j = 0;
    while i < p.support.len() && j < q.support.len() {
        match p.support[i].cmp(&q.support[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                sum += (p.mass[i] * q.mass[j]).sqrt();
                i += 1;
                j += 1;
            }
        }
    }
    sum.min(1.0)
}

/// Bhattacharyya distance: -ln of the coefficient. Returns +infinity when the
/// supports are disjoint; callers comparing against finite thresholds will
/// then never accept the pair.
pub fn bhattacharyya_distance(p: &DiscreteDistribution, q: &DiscreteDistribution) -> f64 {
    let bc = bhattacharyya_coefficient(p, q);
    if bc <= 0.0 {
        f64::INFINITY
    } else {
        -bc.ln()
    }
}
