use std::collections::HashMap;

use crate::error::{param, Result};
use crate::partitions::SetPartition;

/// Largest n accepted by the oracle (Bell(7) = 877 partitions).
pub const EPPF_MAX_N: usize = 7;

/// PD(α,θ) EPPF at the given block sizes.
pub fn pd_eppf(alpha: f64, theta: f64, sizes: &[usize]) -> f64 {
    let n: usize = sizes.iter().sum();
    let k = sizes.len();
    let mut num = 1.0;
    for i in 1..k {
        num *= theta + i as f64 * alpha;
    }
    for &s in sizes {
        for j in 1..s {
            num *= j as f64 - alpha;
        }
    }
    let mut den = 1.0;
    for j in 1..n {
        den *= theta + j as f64;
    }
    num / den
}

/// Every set partition of [n] with its exact PD(α,θ) probability, keyed by
/// restricted growth string in lexicographic order.
pub fn eppf_oracle(alpha: f64, theta: f64, n: usize) -> Result<Vec<(SetPartition, f64)>> {
    if !(0.0..1.0).contains(&alpha) {
        return param(format!("alpha must lie in [0,1), got {alpha}"));
    }
    if !(theta > -alpha) || (alpha == 0.0 && theta <= 0.0) {
        return param(format!("theta must exceed -alpha, got {theta}"));
    }
    if n == 0 || n > EPPF_MAX_N {
        return param(format!("oracle supports 1 <= n <= {EPPF_MAX_N}, got {n}"));
    }
    let mut out = Vec::new();
    let mut labels = vec![0usize; n];
    loop {
        let part = SetPartition::from_labels(&labels);
        let p = pd_eppf(alpha, theta, &part.block_sizes());
        out.push((part, p));
        // next restricted growth string
        let mut i = n - 1;
        loop {
            if i == 0 {
                return Ok(out);
            }
            let max_prefix = labels[..i].iter().copied().max().unwrap();
            if labels[i] <= max_prefix {
                labels[i] += 1;
                labels[i + 1..].iter_mut().for_each(|l| *l = 0);
                break;
            }
            i -= 1;
        }
    }
}

/// Total variation distance between the oracle pmf and the empirical law of
/// `samples`.
pub fn tv_to_oracle(oracle: &[(SetPartition, f64)], samples: &[SetPartition]) -> f64 {
    let mut counts: HashMap<Vec<u8>, usize> = HashMap::new();
    for s in samples {
        *counts.entry(s.rgs()).or_default() += 1;
    }
    let n = samples.len() as f64;
    let mut tv = 0.0;
    let mut seen = 0usize;
    for (part, p) in oracle {
        let c = counts.get(&part.rgs()).copied().unwrap_or(0);
        seen += c;
        tv += (c as f64 / n - p).abs();
    }
    // samples outside the oracle's support
    tv += (samples.len() - seen) as f64 / n;
    tv / 2.0
}
