/// Truncated, normalised Poisson probabilities `P(N = k)` for
/// `k in left..left + weights.len()`.
#[derive(Debug, Clone, PartialEq)]
pub struct PoissonWeights {
    pub left: usize,
    pub weights: Vec<f64>,
}

impl PoissonWeights {
    pub fn right(&self) -> usize {
        self.left + self.weights.len() - 1
    }

    /// Weight of `k`, zero outside the window.
    pub fn get(&self, k: usize) -> f64 {
        if k < self.left {
            return 0.0;
        }
        self.weights.get(k - self.left).copied().unwrap_or(0.0)
    }
}

/// Poisson weights for mean `lambda`, dropping at most `epsilon` of mass.
///
/// Starts at the mode with weight 1 and walks outwards with the ratio
/// recurrences, so nothing underflows for large `lambda`. A side is cut once
/// a geometric bound on its remaining tail falls below `epsilon / 2` of the
/// mass collected so far.
pub fn poisson_weights(lambda: f64, epsilon: f64) -> PoissonWeights {
    assert!(lambda >= 0.0 && lambda.is_finite(), "invalid Poisson mean {lambda}");
    if lambda == 0.0 {
        return PoissonWeights { left: 0, weights: vec![1.0] };
    }
    let mode = lambda.floor() as usize;
    let half = epsilon / 2.0;

    let mut right = vec![1.0];
    let mut total = 1.0;
    let mut k = mode;
    loop {
        let w = *right.last().unwrap() * lambda / (k + 1) as f64;
        k += 1;
        right.push(w);
        total += w;
        let r = lambda / (k + 1) as f64;
        if r < 1.0 && w * r / (1.0 - r) < half * total {
            break;
        }
    }

    let mut left = Vec::new();
    let mut k = mode;
    let mut w = 1.0;
    while k > 0 {
        w *= k as f64 / lambda;
        k -= 1;
        left.push(w);
        total += w;
        let q = k as f64 / lambda;
        if q < 1.0 && w * q / (1.0 - q) < half * total {
            break;
        }
    }

    let mut weights: Vec<f64> = left.into_iter().rev().chain(right).collect();
    let sum: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= sum;
    }
    PoissonWeights { left: k, weights }
}
