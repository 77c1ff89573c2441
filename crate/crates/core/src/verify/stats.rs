use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{param, Result};

pub const DEFAULT_SIGNIFICANCE: f64 = 0.001;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TestReport {
    pub identity_id: String,
    pub statistic: f64,
    pub p_value: f64,
    pub n_samples: usize,
    pub seed: u64,
    pub verdict: Verdict,
    pub notes: String,
}

impl TestReport {
    pub fn new(id: &str, statistic: f64, p_value: f64, n_samples: usize, seed: u64, significance: f64) -> Self {
        let verdict = if p_value > significance { Verdict::Pass } else { Verdict::Fail };
        TestReport {
            identity_id: id.to_string(),
            statistic,
            p_value,
            n_samples,
            seed,
            verdict,
            notes: String::new(),
        }
    }

    pub fn with_notes(mut self, notes: impl Into<String>) -> Self {
        self.notes = notes.into();
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

/// P(K > λ) for the Kolmogorov distribution.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.0 {
        // small-λ form of the cdf converges fast here
        let c = -std::f64::consts::PI.powi(2) / (8.0 * lambda * lambda);
        let mut s = 0.0;
        for k in 1..=20 {
            let j = (2 * k - 1) as f64;
            s += (c * j * j).exp();
        }
        let cdf = (2.0 * std::f64::consts::PI).sqrt() / lambda * s;
        return (1.0 - cdf).clamp(0.0, 1.0);
    }
    let mut s = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        s += if k % 2 == 1 { term } else { -term };
        if term < 1e-300 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}

/// One-sample KS statistic and asymptotic p-value against a continuous cdf.
pub fn ks_one_sample<F: Fn(f64) -> f64>(xs: &[f64], cdf: F) -> (f64, f64) {
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in v.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    (d, kolmogorov_sf(n.sqrt() * d))
}

/// Two-sample KS statistic and asymptotic p-value.
pub fn ks_two_sample_stat(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let mut a = xs.to_vec();
    let mut b = ys.to_vec();
    a.sort_by(|p, q| p.total_cmp(q));
    b.sort_by(|p, q| p.total_cmp(q));
    let (n, m) = (a.len(), b.len());
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let x = a[i].min(b[j]);
        while i < n && a[i] <= x {
            i += 1;
        }
        while j < m && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let ne = (n * m) as f64 / (n + m) as f64;
    (d, kolmogorov_sf(ne.sqrt() * d))
}

pub fn ks_two_sample(xs: &[f64], ys: &[f64]) -> Result<TestReport> {
    if xs.is_empty() || ys.is_empty() {
        return param("KS test needs two nonempty samples");
    }
    let (d, p) = ks_two_sample_stat(xs, ys);
    Ok(TestReport::new("ks-two-sample", d, p, xs.len().min(ys.len()), 0, DEFAULT_SIGNIFICANCE))
}

/// Pearson χ² of observed counts against a pmf, pooling adjacent cells
/// until every expected count is at least 5.
pub fn chi_square_pmf(observed: &[u64], pmf: &[f64]) -> Result<TestReport> {
    if observed.len() != pmf.len() || observed.is_empty() {
        return param("observed counts and pmf must have the same nonzero length");
    }
    let total_p: f64 = pmf.iter().sum();
    if (total_p - 1.0).abs() > 1e-9 || pmf.iter().any(|&p| p < 0.0) {
        return param(format!("pmf must be nonnegative and sum to 1, sums to {total_p}"));
    }
    let n: u64 = observed.iter().sum();
    let nf = n as f64;
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let (mut o, mut e) = (0.0, 0.0);
    for (&c, &p) in observed.iter().zip(pmf) {
        o += c as f64;
        e += p * nf;
        if e >= 5.0 {
            cells.push((o, e));
            o = 0.0;
            e = 0.0;
        }
    }
    if o > 0.0 || e > 0.0 {
        match cells.last_mut() {
            Some(last) => {
                last.0 += o;
                last.1 += e;
            }
            None => cells.push((o, e)),
        }
    }
    let stat: f64 = cells.iter().filter(|c| c.1 > 0.0).map(|&(o, e)| (o - e).powi(2) / e).sum();
    let p = if cells.len() < 2 {
        1.0
    } else {
        ChiSquared::new((cells.len() - 1) as f64).map(|d| d.sf(stat)).unwrap_or(0.0)
    };
    Ok(TestReport::new("chi-square", stat, p, n as usize, 0, DEFAULT_SIGNIFICANCE)
        .with_notes(format!("{} cells after pooling", cells.len())))
}

/// Pearson χ² homogeneity test of two count vectors over the same cells,
/// pooling adjacent cells until both expected counts reach 5.
pub fn chi_square_two_sample(a: &[u64], b: &[u64]) -> Result<TestReport> {
    if a.len() != b.len() || a.is_empty() {
        return param("count vectors must have the same nonzero length");
    }
    let na: u64 = a.iter().sum();
    let nb: u64 = b.iter().sum();
    if na == 0 || nb == 0 {
        return param("both samples must be nonempty");
    }
    let fa = na as f64 / (na + nb) as f64;
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let (mut ca, mut cb) = (0.0, 0.0);
    for (&x, &y) in a.iter().zip(b) {
        ca += x as f64;
        cb += y as f64;
        let pooled = ca + cb;
        if pooled * fa.min(1.0 - fa) >= 5.0 {
            cells.push((ca, cb));
            ca = 0.0;
            cb = 0.0;
        }
    }
    if ca + cb > 0.0 {
        match cells.last_mut() {
            Some(last) => {
                last.0 += ca;
                last.1 += cb;
            }
            None => cells.push((ca, cb)),
        }
    }
    let stat: f64 = cells
        .iter()
        .map(|&(x, y)| {
            let t = x + y;
            let (ea, eb) = (t * fa, t * (1.0 - fa));
            (x - ea).powi(2) / ea + (y - eb).powi(2) / eb
        })
        .sum();
    let p = if cells.len() < 2 {
        1.0
    } else {
        ChiSquared::new((cells.len() - 1) as f64).map(|d| d.sf(stat)).unwrap_or(0.0)
    };
    Ok(TestReport::new("chi-square-two-sample", stat, p, (na + nb) as usize, 0, DEFAULT_SIGNIFICANCE)
        .with_notes(format!("{} cells after pooling", cells.len())))
}

/// Counts of samples in the bins cut by sorted `edges`, with one cell below
/// the first edge and one above the last.
pub fn bin_counts(samples: &[f64], edges: &[f64]) -> Vec<u64> {
    let mut counts = vec![0u64; edges.len() + 1];
    for &x in samples {
        let k = edges.partition_point(|&e| e <= x);
        counts[k] += 1;
    }
    counts
}

/// Sample mean and its standard error.
pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (v / n).sqrt())
}

pub fn correlation(xs: &[f64], ys: &[f64]) -> f64 {
    let (mx, _) = mean_and_se(xs);
    let (my, _) = mean_and_se(ys);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx).powi(2);
        syy += (y - my).powi(2);
    }
    sxy / (sxx * syy).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{beta_variate, RngStream};

    #[test]
    fn identical_samples() {
        let xs: Vec<f64> = (0..100).map(|i| i as f64 * 0.37 % 1.0).collect();
        let r = ks_two_sample(&xs, &xs).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
        assert!(ks_two_sample(&[], &xs).is_err());
    }

    #[test]
    fn kolmogorov_values() {
        // classical critical values
        assert!((kolmogorov_sf(1.3581) - 0.05).abs() < 1e-3);
        assert!((kolmogorov_sf(1.9495) - 0.001).abs() < 1e-4);
        assert!((kolmogorov_sf(0.5) - 0.9639).abs() < 1e-3);
        // the two series agree where they meet
        let a = kolmogorov_sf(0.999999);
        let b = kolmogorov_sf(1.000001);
        assert!((a - b).abs() < 1e-5);
    }

    #[test]
    fn calibration_and_power() {
        let mut fails = 0;
        for rep in 0..100 {
            let mut rng = RngStream::new(100 + rep, 0);
            let xs: Vec<f64> = (0..10_000).map(|_| rng.uniform()).collect();
            let ys: Vec<f64> = (0..10_000).map(|_| rng.uniform()).collect();
            if ks_two_sample_stat(&xs, &ys).1 <= 0.001 {
                fails += 1;
            }
        }
        assert!(fails <= 1);
        let mut rng = RngStream::new(99, 0);
        let xs: Vec<f64> = (0..10_000).map(|_| rng.uniform()).collect();
        let ys: Vec<f64> = (0..10_000).map(|_| beta_variate(2.0, 2.0, &mut rng)).collect();
        assert!(ks_two_sample_stat(&xs, &ys).1 < 1e-6);
    }

    #[test]
    fn chi_square_basics() {
        let pmf = [0.25, 0.25, 0.5];
        let r = chi_square_pmf(&[250, 250, 500], &pmf).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert!(r.passed());
        assert!(chi_square_pmf(&[1, 2], &[0.5, 0.6]).is_err());
        let bad = chi_square_pmf(&[400, 100, 500], &pmf).unwrap();
        assert!(!bad.passed());
    }

    #[test]
    fn bins() {
        assert_eq!(bin_counts(&[0.1, 0.5, 0.5, 2.0], &[0.2, 0.5, 1.0]), vec![1, 0, 2, 1]);
    }
}
