//! Ranked mass partitions with dust, size-biased permutation and the plug-in
//! α-diversity estimate.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::random::{RngStream, StableIndex};

/// Default truncation tolerance on the residual mass.
pub const DEFAULT_TRUNC: f64 = 1e-10;

const SLACK: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MassPartition {
    weights: Vec<f64>,
    dust: f64,
    trunc_tol: f64,
}

impl MassPartition {
    /// Builds from weights already in any order; records the deficit
    /// 1 − dust − Σ weights in the truncation tolerance.
    pub fn new(weights: Vec<f64>, dust: f64, trunc_tol: f64) -> Result<Self> {
        let mut mp = rank(&weights, dust, false)?;
        mp.trunc_tol = mp.trunc_tol.max(trunc_tol);
        Ok(mp)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn dust(&self) -> f64 {
        self.dust
    }

    pub fn trunc_tol(&self) -> f64 {
        self.trunc_tol
    }

    pub fn largest(&self) -> f64 {
        self.weights.first().copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().sum::<f64>() + self.dust
    }

    /// Mass missing because of truncation.
    pub fn deficit(&self) -> f64 {
        (1.0 - self.total()).max(0.0)
    }

    /// Weights then dust, comma separated, 17 significant digits.
    pub fn csv_row(&self) -> String {
        let mut parts: Vec<String> = self.weights.iter().map(|&w| crate::fmt_num(w)).collect();
        parts.push(crate::fmt_num(self.dust));
        parts.join(",")
    }

    /// JSON array of the weights followed by the dust.
    pub fn json_array(&self) -> String {
        format!("[{}]", self.csv_row())
    }
}

/// Decreasing rearrangement. With `fold_dust` the dust becomes an ordinary
/// weight and the output dust is 0.
pub fn rank(weights: &[f64], dust: f64, fold_dust: bool) -> Result<MassPartition> {
    if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) || !(dust >= 0.0) {
        return Err(Error::Parameter("weights and dust must be finite and >= 0".into()));
    }
    let total: f64 = weights.iter().sum::<f64>() + dust;
    if total > 1.0 + SLACK {
        return Err(Error::Consistency(format!("total mass {total} exceeds 1")));
    }
    let mut w: Vec<f64> = weights.iter().copied().filter(|&x| x > 0.0).collect();
    let mut d = dust;
    if fold_dust && dust > 0.0 {
        w.push(dust);
        d = 0.0;
    }
    w.sort_by(|a, b| b.total_cmp(a));
    Ok(MassPartition { weights: w, dust: d, trunc_tol: DEFAULT_TRUNC.max(1.0 - total) })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SizeBiasedSequence {
    pub picks: Vec<f64>,
    pub residual: f64,
}

/// Picks the weights one by one without replacement, each with probability
/// proportional to its size among those left.
pub fn size_biased_permutation(mp: &MassPartition, rng: &mut RngStream) -> Result<SizeBiasedSequence> {
    if mp.dust > mp.trunc_tol {
        return Err(Error::Unsupported(format!(
            "size-biased permutation needs a proper partition, dust {} exceeds tolerance {}",
            mp.dust, mp.trunc_tol
        )));
    }
    let mut left = mp.weights.clone();
    let mut picks = Vec::with_capacity(left.len());
    while !left.is_empty() {
        let total: f64 = left.iter().sum();
        let target = rng.uniform() * total;
        let mut acc = 0.0;
        let mut idx = left.len() - 1;
        for (i, &w) in left.iter().enumerate() {
            acc += w;
            if target < acc {
                idx = i;
                break;
            }
        }
        picks.push(left.remove(idx));
    }
    let residual = (1.0 - picks.iter().sum::<f64>()).max(0.0);
    Ok(SizeBiasedSequence { picks, residual })
}

/// K_n / n^α.
pub fn alpha_diversity_estimate(block_count: usize, n: usize, alpha: StableIndex) -> f64 {
    block_count as f64 / (n as f64).powf(alpha.get())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rank_examples() {
        let a = rank(&[0.2, 0.5], 0.3, true).unwrap();
        assert_eq!(a.weights(), &[0.5, 0.3, 0.2]);
        assert_eq!(a.dust(), 0.0);
        let b = rank(&[0.2, 0.5], 0.3, false).unwrap();
        assert_eq!(b.weights(), &[0.5, 0.2]);
        assert_eq!(b.dust(), 0.3);
        let c = rank(&[], 1.0, false).unwrap();
        assert!(c.weights().is_empty());
        assert_eq!(c.dust(), 1.0);
        let d = rank(&[0.6, 0.4], 0.0, false).unwrap();
        assert_eq!(d.weights(), &[0.6, 0.4]);
        assert!(matches!(rank(&[0.7, 0.5], 0.0, false), Err(Error::Consistency(_))));
        assert!(rank(&[-0.1], 0.0, false).is_err());
    }

    #[test]
    fn serialization() {
        let mp = rank(&[0.25, 0.75], 0.0, false).unwrap();
        assert_eq!(mp.csv_row(), "7.5000000000000000e-1,2.5000000000000000e-1,0.0000000000000000e0");
        assert!(mp.json_array().starts_with("[7.5"));
    }

    #[test]
    fn size_biased_examples() {
        let mut rng = RngStream::new(1, 0);
        let one = rank(&[1.0], 0.0, false).unwrap();
        assert_eq!(size_biased_permutation(&one, &mut rng).unwrap().picks, vec![1.0]);
        let dusty = rank(&[0.5], 0.5, false).unwrap();
        assert!(matches!(size_biased_permutation(&dusty, &mut rng), Err(Error::Unsupported(_))));
        // two equal atoms: first pick is each with probability 1/2; tag them apart
        let halves = rank(&[0.5 + 1e-12, 0.5 - 1e-12], 0.0, false).unwrap();
        let n = 10_000;
        let first_big = (0..n)
            .filter(|_| size_biased_permutation(&halves, &mut rng).unwrap().picks[0] > 0.5)
            .count();
        let r = crate::verify::chi_square_pmf(&[first_big as u64, (n - first_big) as u64], &[0.5, 0.5]).unwrap();
        assert!(r.passed());
    }

    #[test]
    fn diversity_formula() {
        let a = StableIndex::new(0.01).unwrap();
        let v = alpha_diversity_estimate(1000, 1000, a);
        assert!((v - 1000f64.powf(0.99)).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn rank_idempotent(ws in prop::collection::vec(0.0f64..1.0, 0..20)) {
            let s: f64 = ws.iter().sum::<f64>() + 1e-3;
            let w: Vec<f64> = ws.iter().map(|x| x / s).collect();
            let once = rank(&w, 1e-3 / s, false).unwrap();
            let twice = rank(once.weights(), once.dust(), false).unwrap();
            prop_assert_eq!(once.weights(), twice.weights());
            prop_assert_eq!(once.dust(), twice.dust());
            prop_assert!(once.weights().windows(2).all(|p| p[0] >= p[1]));
        }

        #[test]
        fn rank_ignores_input_order(ws in prop::collection::vec(0.0f64..1.0, 1..20), seed in 0u64..1000) {
            let s: f64 = ws.iter().sum::<f64>();
            let w: Vec<f64> = ws.iter().map(|x| x / s).collect();
            let mut shuffled = w.clone();
            let mut rng = RngStream::new(seed, 0);
            for i in (1..shuffled.len()).rev() {
                let j = (rng.uniform() * (i + 1) as f64) as usize;
                shuffled.swap(i, j);
            }
            prop_assert_eq!(rank(&w, 0.0, false).unwrap(), rank(&shuffled, 0.0, false).unwrap());
        }

        #[test]
        fn size_biased_preserves_weights(ws in prop::collection::vec(0.001f64..1.0, 1..30), seed in 0u64..1000) {
            let s: f64 = ws.iter().sum();
            let w: Vec<f64> = ws.iter().map(|x| x / s).collect();
            let mp = rank(&w, 0.0, false).unwrap();
            let mut rng = RngStream::new(seed, 1);
            let sb = size_biased_permutation(&mp, &mut rng).unwrap();
            let mut picks = sb.picks.clone();
            picks.sort_by(|a, b| b.total_cmp(a));
            prop_assert_eq!(&picks[..], mp.weights());
            prop_assert!(sb.residual >= 0.0 && sb.residual < 1e-9);
        }
    }
}
