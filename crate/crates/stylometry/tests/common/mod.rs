//! Shared generators and oracles for the integration test suites.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// A character-level order-2 Markov text source with a randomly drawn
/// transition table. Two sources built from different seeds have distinct
/// tables, which is what the attribution experiments need.
pub struct MarkovSource {
    alphabet: Vec<char>,
    cumulative: Vec<Vec<f64>>,
}

impl MarkovSource {
    pub fn random(alphabet: &[char], seed: u64) -> Self {
        use rand::SeedableRng;
        let k = alphabet.len();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut cumulative = Vec::with_capacity(k * k);
        for ctx in 0..k * k {
            let prev = ctx % k;
            let mut acc = 0.0;
            let row: Vec<f64> = (0..k)
                .map(|next| {
                    let u: f64 = rng.random();
                    // squared draws skew the rows so sources differ sharply
                    let mut w = u * u + 0.01;
                    if alphabet[prev] == ' ' && alphabet[next] == ' ' {
                        w = 0.0; // no double spaces
                    }
                    acc += w;
                    acc
                })
                .collect();
            cumulative.push(row);
        }
        Self {
            alphabet: alphabet.to_vec(),
            cumulative,
        }
    }

    pub fn generate(&self, len: usize, rng: &mut ChaCha8Rng) -> String {
        let k = self.alphabet.len();
        let non_space: Vec<usize> = (0..k).filter(|&i| self.alphabet[i] != ' ').collect();
        let mut prev1 = non_space[rng.random_range(0..non_space.len())];
        let mut prev2 = non_space[rng.random_range(0..non_space.len())];
        let mut out = String::with_capacity(len);
        out.push(self.alphabet[prev1]);
        if len > 1 {
            out.push(self.alphabet[prev2]);
        }
        for _ in 2..len {
            let row = &self.cumulative[prev1 * k + prev2];
            let total = *row.last().unwrap();
            let draw = rng.random::<f64>() * total;
            let next = row.iter().position(|&c| draw < c).unwrap_or(k - 1);
            out.push(self.alphabet[next]);
            prev1 = prev2;
            prev2 = next;
        }
        out
    }
}

pub fn test_alphabet() -> Vec<char> {
    vec!['a', 'b', 'c', 'd', 'e', 'f', 'g', 'h', ' ']
}

/// Standard normal draws via Box-Muller.
pub fn gaussian_vector(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    (0..dim)
        .map(|_| {
            let u1: f64 = rng.random::<f64>().max(1e-300);
            let u2: f64 = rng.random();
            (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
        })
        .collect()
}

/// 1/2 a' K a.
pub fn dual_objective(gram: &[Vec<f64>], alpha: &[f64]) -> f64 {
    let l = alpha.len();
    let mut obj = 0.0;
    for i in 0..l {
        for j in 0..l {
            obj += alpha[i] * alpha[j] * gram[i][j];
        }
    }
    0.5 * obj
}

/// Brute-force minimization of the one-class dual over the feasible set
/// {0 <= a_i <= c, sum a = 1} for 2..=4 points: enumerate a grid over the
/// free coordinates (the last takes the slack) and refine around the best
/// point a few times. The objective is convex, so refinement homes in on
/// the global minimum.
pub fn brute_force_dual_min(gram: &[Vec<f64>], c: f64) -> (Vec<f64>, f64) {
    let l = gram.len();
    assert!((2..=4).contains(&l), "oracle supports 2..=4 points");
    let free = l - 1;
    let top = c.min(1.0);
    let divisions = 20usize;

    let mut lo = vec![0.0; free];
    let mut hi = vec![top; free];
    let mut best_alpha: Vec<f64> = Vec::new();
    let mut best_obj = f64::INFINITY;

    for _stage in 0..5 {
        let steps: Vec<f64> = (0..free)
            .map(|d| (hi[d] - lo[d]) / divisions as f64)
            .collect();
        let mut idx = vec![0usize; free];
        'grid: loop {
            let mut a = vec![0.0; l];
            let mut sum = 0.0;
            for d in 0..free {
                a[d] = lo[d] + steps[d] * idx[d] as f64;
                sum += a[d];
            }
            let last = 1.0 - sum;
            if (-1e-12..=c + 1e-12).contains(&last) {
                a[l - 1] = last.clamp(0.0, c);
                let obj = dual_objective(gram, &a);
                if obj < best_obj {
                    best_obj = obj;
                    best_alpha = a;
                }
            }
            let mut d = 0;
            loop {
                idx[d] += 1;
                if idx[d] <= divisions {
                    break;
                }
                idx[d] = 0;
                d += 1;
                if d == free {
                    break 'grid;
                }
            }
        }
        assert!(
            !best_alpha.is_empty(),
            "no feasible grid point found (c = {c})"
        );
        for d in 0..free {
            let w = 2.0 * steps[d].max(1e-15);
            lo[d] = (best_alpha[d] - w).max(0.0);
            hi[d] = (best_alpha[d] + w).min(top);
        }
    }
    (best_alpha, best_obj)
}
