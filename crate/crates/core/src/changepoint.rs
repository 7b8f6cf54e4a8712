//! Single change point in the mean of a sorted score list.
//!
//! Extension 1 removes every candidate whose score is "similar" to the top
//! score. The cut is the split of the list into two constant-mean segments
//! with the least total squared error, accepted only if it beats the
//! no-change fit by more than a penalty of `β · Var(s)`. The penalty scales
//! with the data, so the cut is invariant to rescaling the scores.

use crate::error::{Error, Result};

/// Scores sorted in descending order.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoreSeries(Vec<f64>);

impl ScoreSeries {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidInput("score series is empty".into()));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidInput(
                "scores must be finite and nonnegative".into(),
            ));
        }
        if values.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidInput("scores must be sorted descending".into()));
        }
        Ok(ScoreSeries(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChangePointDetector {
    /// Multiplier `β` of the series variance used as the change penalty.
    pub penalty_factor: f64,
}

impl Default for ChangePointDetector {
    fn default() -> Self {
        ChangePointDetector {
            penalty_factor: 1.0,
        }
    }
}

/// Spread below which a series counts as constant.
const FLAT: f64 = 1e-12;

impl ChangePointDetector {
    pub fn new(penalty_factor: f64) -> Self {
        ChangePointDetector { penalty_factor }
    }

    /// Number of leading elements before the first change in mean, in
    /// `1..=len`. Returns 1 when no split beats the penalized no-change fit,
    /// and `len` when every score equals the top one.
    pub fn first_mean_change(&self, series: &ScoreSeries) -> usize {
        self.cut(series.values())
    }

    /// Same as [`first_mean_change`](Self::first_mean_change) on a raw slice,
    /// which must be nonempty.
    pub fn cut(&self, s: &[f64]) -> usize {
        let n = s.len();
        assert!(n > 0, "change point of an empty series");
        if n == 1 {
            return 1;
        }
        let (lo, hi) = s
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        if hi - lo <= FLAT {
            return n;
        }

        // prefix[c] / suffix[c]: squared error of s[..c] / s[c..] about its mean
        let mut prefix = vec![0.0; n + 1];
        let (mut mean, mut m2) = (0.0, 0.0);
        for (k, &v) in s.iter().enumerate() {
            let count = (k + 1) as f64;
            let delta = v - mean;
            mean += delta / count;
            m2 += delta * (v - mean);
            prefix[k + 1] = m2;
        }
        let total = prefix[n];
        let mut suffix = vec![0.0; n + 1];
        let (mut mean, mut m2) = (0.0, 0.0);
        for (k, &v) in s.iter().enumerate().rev() {
            let count = (n - k) as f64;
            let delta = v - mean;
            mean += delta / count;
            m2 += delta * (v - mean);
            suffix[k] = m2;
        }

        let penalty = self.penalty_factor * total / n as f64;
        let mut best = (f64::INFINITY, 1);
        for c in 1..n {
            let cost = prefix[c] + suffix[c];
            if cost < best.0 {
                best = (cost, c);
            }
        }
        if best.0 + penalty < total {
            best.1
        } else {
            1
        }
    }
}

/// [`ChangePointDetector::first_mean_change`] with the default penalty.
pub fn first_mean_change(series: &ScoreSeries) -> usize {
    ChangePointDetector::default().first_mean_change(series)
}
