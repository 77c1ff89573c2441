//! Registry of distributional identities. Each entry samples both sides with
//! independent draws and compares them by a two-sample test.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::Serialize;

use super::stats::{chi_square_two_sample, ks_two_sample_stat, TestReport, DEFAULT_SIGNIFICANCE};
use crate::error::{param, Error, Result};
use crate::partitions::sample_partition;
use crate::random::{beta_variate, gamma_variate, gg_total, stable_variate, tilted_variate, RngStream, StableIndex, ZetaSpec};
use crate::sticks::{r_path, StickKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum IdentityId {
    /// τ_α(γ_{θ/α}) ≐ γ_θ
    PyProp21GammaTotalMass,
    /// ζ^{1/α}γ₁/τ_α(ζ) ≐ (γ′₁+ζ)^{1/α} − ζ^{1/α}
    Keydd,
    /// γ₁/τ_α(ζ) ≐ ((γ′₁+ζ)/ζ)^{1/α} − 1
    Keydd2,
    /// S_{α,θ} ≐ S_{α,θ+α}·β^{−1}_{θ+α,1−α}
    PpyFundid,
    /// S_{α,θ} ≐ S_{α,θ+1}·β^{−1/α}_{(θ+α)/α,(1−α)/α}
    JamesFundid,
    /// γ^{1/α}_{(θ+α)/α} ≐ γ_{θ+α}/S_{α,θ+α}
    Gammaid,
    /// γ₁/S_{α,θ} ≐ β_{θ+α,1−α}·γ₁/S_{α,θ+α}
    Biascase1,
    /// EPG(α, γ₁+ζ) = PG(α, ζ), compared through K_n
    RecursiveEpgPg,
    /// (R₁, R₂) given ζ against ratios of ranked stable jumps given Δ₁^{−α} = ζ
    RkJumpCorrespondence,
    /// P_{α,2}(q) ≐ U·P_{α,1}(q) + (1−U)·P′_{α,1}(q)
    PAlpha2UniformMixture,
}

impl IdentityId {
    pub const ALL: [IdentityId; 10] = [
        IdentityId::PyProp21GammaTotalMass,
        IdentityId::Keydd,
        IdentityId::Keydd2,
        IdentityId::PpyFundid,
        IdentityId::JamesFundid,
        IdentityId::Gammaid,
        IdentityId::Biascase1,
        IdentityId::RecursiveEpgPg,
        IdentityId::RkJumpCorrespondence,
        IdentityId::PAlpha2UniformMixture,
    ];

    pub fn name(self) -> &'static str {
        match self {
            IdentityId::PyProp21GammaTotalMass => "PY-prop21-gamma-total-mass",
            IdentityId::Keydd => "keydd",
            IdentityId::Keydd2 => "keydd2",
            IdentityId::PpyFundid => "PPY-fundid",
            IdentityId::JamesFundid => "James-fundid",
            IdentityId::Gammaid => "gammaid",
            IdentityId::Biascase1 => "biascase1",
            IdentityId::RecursiveEpgPg => "recursive-EPG-PG",
            IdentityId::RkJumpCorrespondence => "Rk-jump-correspondence",
            IdentityId::PAlpha2UniformMixture => "P-alpha2-uniform-mixture",
        }
    }

    /// Position in the registry; also the stream id used by the suite.
    pub fn index(self) -> u64 {
        IdentityId::ALL.iter().position(|&i| i == self).unwrap() as u64
    }

    /// Why the identity cannot be run at these parameters, if it cannot.
    pub fn inapplicable(self, p: &IdentityParams) -> Option<String> {
        let zeta_zero = p.zeta.is_zero();
        match self {
            IdentityId::PyProp21GammaTotalMass if p.theta <= 0.0 => Some("both sides vanish when theta = 0".into()),
            IdentityId::PyProp21GammaTotalMass if p.theta < 0.0 => Some("needs theta >= 0".into()),
            IdentityId::Keydd2 | IdentityId::RkJumpCorrespondence if zeta_zero => Some("needs zeta > 0".into()),
            _ => None,
        }
    }
}

impl fmt::Display for IdentityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for IdentityId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        // "PY-prop21" is accepted as a short form
        if s == "PY-prop21" {
            return Ok(IdentityId::PyProp21GammaTotalMass);
        }
        IdentityId::ALL
            .iter()
            .copied()
            .find(|i| i.name() == s)
            .ok_or_else(|| Error::UnknownIdentity(s.to_string()))
    }
}

#[derive(Clone, Debug)]
pub struct IdentityParams {
    pub alpha: f64,
    pub theta: f64,
    pub zeta: ZetaSpec,
    /// Added to the right-hand side's parameter (θ, or ζ) for negative controls.
    pub rhs_shift: f64,
    /// Evaluation point for the bridge mixture identity.
    pub q: f64,
    /// Partition size for the EPG/PG comparison.
    pub partition_n: usize,
    pub significance: f64,
}

impl IdentityParams {
    pub fn new(alpha: f64, theta: f64, zeta: ZetaSpec) -> Self {
        IdentityParams { alpha, theta, zeta, rhs_shift: 0.0, q: 0.3, partition_n: 30, significance: DEFAULT_SIGNIFICANCE }
    }

    pub fn with_shift(mut self, shift: f64) -> Self {
        self.rhs_shift = shift;
        self
    }

    fn validate(&self) -> Result<()> {
        StableIndex::new(self.alpha)?;
        self.zeta.validate()?;
        if !(self.theta > -self.alpha) {
            return param(format!("theta must exceed -alpha, got {}", self.theta));
        }
        if !(self.q > 0.0 && self.q < 1.0) {
            return param(format!("q must lie in (0,1), got {}", self.q));
        }
        if self.partition_n == 0 {
            return param("partition_n must be >= 1");
        }
        if !(self.significance > 0.0 && self.significance < 1.0) {
            return param("significance must lie in (0,1)");
        }
        Ok(())
    }
}

// S_{α,θ}
fn s_at(a: f64, theta: f64, rng: &mut RngStream) -> f64 {
    let zeta = gamma_variate((theta + a) / a, rng);
    let eps = gamma_variate((1.0 - a) / a, rng);
    gg_total(a, zeta + eps, rng) / zeta.powf(1.0 / a)
}

// PD(α,θ) bridge at q from independent increments of τ_α.
fn pd_bridge_at(a: f64, theta: f64, q: f64, rng: &mut RngStream) -> f64 {
    let (left, right) = if theta == 0.0 {
        (q.powf(1.0 / a) * stable_variate(a, rng), (1.0 - q).powf(1.0 / a) * stable_variate(a, rng))
    } else {
        let z = gamma_variate(theta / a, rng);
        (gg_total(a, z * q, rng), gg_total(a, z * (1.0 - q), rng))
    };
    left / (left + right)
}

// Ratios Δ₂/Δ₁, Δ₃/Δ₂ of the ranked jumps of an α-stable subordinator given
// Δ₁^{−α} = ζ, from a Poisson scatter of the levels Δ^{−α} on (ζ, ζ+L).
fn jump_ratios(a: f64, zeta: f64, rng: &mut RngStream) -> (f64, f64) {
    const LEVEL_SPAN: f64 = 40.0;
    let poisson = Poisson::new(LEVEL_SPAN).unwrap();
    loop {
        let count = poisson.sample(rng) as usize;
        if count < 2 {
            continue;
        }
        let (mut x1, mut x2) = (f64::INFINITY, f64::INFINITY);
        for _ in 0..count {
            let x = zeta + LEVEL_SPAN * rng.uniform();
            if x < x1 {
                x2 = x1;
                x1 = x;
            } else if x < x2 {
                x2 = x;
            }
        }
        return ((zeta / x1).powf(1.0 / a), (x1 / x2).powf(1.0 / a));
    }
}

fn shifted(zeta: &ZetaSpec, shift: f64) -> ZetaSpec {
    if shift == 0.0 {
        return zeta.clone();
    }
    let base = zeta.clone();
    ZetaSpec::Custom(Arc::new(move |rng: &mut RngStream| base.draw(rng) + shift))
}

fn ks_report(id: IdentityId, lhs: &[f64], rhs: &[f64], p: &IdentityParams, seed: u64) -> TestReport {
    let (d, pv) = ks_two_sample_stat(lhs, rhs);
    TestReport::new(id.name(), d, pv, lhs.len(), seed, p.significance)
}

fn both<F, G>(n: usize, rng: &mut RngStream, mut lhs: F, mut rhs: G) -> (Vec<f64>, Vec<f64>)
where
    F: FnMut(&mut RngStream) -> f64,
    G: FnMut(&mut RngStream) -> f64,
{
    let mut left_rng = rng.derive(0);
    let mut right_rng = rng.derive(1);
    let l = (0..n).map(|_| lhs(&mut left_rng)).collect();
    let r = (0..n).map(|_| rhs(&mut right_rng)).collect();
    (l, r)
}

/// Runs one registered identity by name.
pub fn run_identity(id: &str, params: &IdentityParams, n_samples: usize, rng: &mut RngStream) -> Result<TestReport> {
    run_identity_id(id.parse()?, params, n_samples, rng)
}

pub fn run_identity_id(id: IdentityId, p: &IdentityParams, n_samples: usize, rng: &mut RngStream) -> Result<TestReport> {
    p.validate()?;
    if n_samples < 2 {
        return param("n_samples must be >= 2");
    }
    if let Some(reason) = id.inapplicable(p) {
        return param(format!("{id} not applicable: {reason}"));
    }
    let a = p.alpha;
    let inv = 1.0 / a;
    let th = p.theta;
    let sh = p.rhs_shift;
    let n = n_samples;
    let seed = rng.seed();
    let report = match id {
        IdentityId::PyProp21GammaTotalMass => {
            let (l, r) = both(n, rng, |g| gg_total(a, gamma_variate(th / a, g), g), |g| gamma_variate(th + sh, g));
            ks_report(id, &l, &r, p, seed)
        }
        IdentityId::Keydd => {
            let rz = shifted(&p.zeta, sh);
            let (l, r) = both(
                n,
                rng,
                |g| {
                    let z = p.zeta.draw(g);
                    g.exp1() / tilted_variate(a, z, g)
                },
                |g| {
                    let z = rz.draw(g);
                    (g.exp1() + z).powf(inv) - z.powf(inv)
                },
            );
            ks_report(id, &l, &r, p, seed)
        }
        IdentityId::Keydd2 => {
            let rz = shifted(&p.zeta, sh);
            let (l, r) = both(
                n,
                rng,
                |g| {
                    let z = p.zeta.draw(g);
                    g.exp1() / gg_total(a, z, g)
                },
                |g| {
                    let z = rz.draw(g);
                    ((g.exp1() + z) / z).powf(inv) - 1.0
                },
            );
            ks_report(id, &l, &r, p, seed)
        }
        IdentityId::PpyFundid => {
            let t = th + sh;
            let (l, r) = both(n, rng, |g| s_at(a, th, g), |g| s_at(a, t + a, g) / beta_variate(t + a, 1.0 - a, g));
            ks_report(id, &l, &r, p, seed)
        }
        IdentityId::JamesFundid => {
            let t = th + sh;
            let (l, r) = both(
                n,
                rng,
                |g| s_at(a, th, g),
                |g| s_at(a, t + 1.0, g) * beta_variate((t + a) / a, (1.0 - a) / a, g).powf(-inv),
            );
            ks_report(id, &l, &r, p, seed)
        }
        IdentityId::Gammaid => {
            let t = th + sh;
            let (l, r) = both(
                n,
                rng,
                |g| gamma_variate((th + a) / a, g).powf(inv),
                |g| gamma_variate(t + a, g) / s_at(a, t + a, g),
            );
            ks_report(id, &l, &r, p, seed)
        }
        IdentityId::Biascase1 => {
            let t = th + sh;
            let (l, r) = both(
                n,
                rng,
                |g| g.exp1() / s_at(a, th, g),
                |g| beta_variate(t + a, 1.0 - a, g) * g.exp1() / s_at(a, t + a, g),
            );
            ks_report(id, &l, &r, p, seed)
        }
        IdentityId::RecursiveEpgPg => {
            let m = p.partition_n;
            let base = p.zeta.clone();
            let epg = StickKind::epg(a, ZetaSpec::Custom(Arc::new(move |g: &mut RngStream| g.exp1() + base.draw(g))))?;
            let pg = StickKind::pg(a, shifted(&p.zeta, sh))?;
            let mut counts = [vec![0u64; m + 1], vec![0u64; m + 1]];
            for (side, kind) in [&epg, &pg].into_iter().enumerate() {
                let mut g = rng.derive(side as u64);
                for _ in 0..n {
                    counts[side][sample_partition(kind, m, &mut g)?.block_count()] += 1;
                }
            }
            let r = chi_square_two_sample(&counts[0], &counts[1])?;
            TestReport::new(id.name(), r.statistic, r.p_value, n, seed, p.significance)
                .with_notes(format!("block counts of [{m}]; {}", r.notes))
        }
        IdentityId::RkJumpCorrespondence => {
            let kind = StickKind::pg(a, p.zeta.clone())?;
            let rz = shifted(&p.zeta, sh);
            let mut g = rng.derive(0);
            let mut lhs = [Vec::with_capacity(n), Vec::with_capacity(n)];
            for _ in 0..n {
                let rs = r_path(&kind, 2, &mut g)?.1;
                lhs[0].push(rs[0]);
                lhs[1].push(rs[1]);
            }
            let mut g = rng.derive(1);
            let mut rhs = [Vec::with_capacity(n), Vec::with_capacity(n)];
            for _ in 0..n {
                let (r1, r2) = jump_ratios(a, rz.draw(&mut g), &mut g);
                rhs[0].push(r1);
                rhs[1].push(r2);
            }
            let (d1, p1) = ks_two_sample_stat(&lhs[0], &rhs[0]);
            let (d2, p2) = ks_two_sample_stat(&lhs[1], &rhs[1]);
            // Bonferroni over the two coordinates
            TestReport::new(id.name(), d1.max(d2), (2.0 * p1.min(p2)).min(1.0), n, seed, p.significance)
                .with_notes("KS on R_1 and R_2, Bonferroni-combined")
        }
        IdentityId::PAlpha2UniformMixture => {
            let q = p.q;
            let (l, r) = both(
                n,
                rng,
                |g| pd_bridge_at(a, 2.0 + sh, q, g),
                |g| {
                    let u = g.uniform();
                    u * pd_bridge_at(a, 1.0, q, g) + (1.0 - u) * pd_bridge_at(a, 1.0, q, g)
                },
            );
            ks_report(id, &l, &r, p, seed).with_notes(format!("q = {q}"))
        }
    };
    Ok(if sh != 0.0 { report.with_notes(format!("negative control, rhs shift {sh}")) } else { report })
}

/// One line of a suite run: a report, or the reason the identity was skipped.
#[derive(Clone, Debug, Serialize)]
pub struct SuiteEntry {
    pub identity_id: String,
    pub report: Option<TestReport>,
    pub skipped: Option<String>,
}

/// Runs every registered identity on its own stream `(seed, index)`, in
/// parallel on at most `threads` workers; entries come back in registry order.
pub fn run_suite(params: &IdentityParams, n_samples: usize, seed: u64, threads: usize) -> Result<Vec<SuiteEntry>> {
    params.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::Parameter(format!("cannot start worker pool: {e}")))?;
    pool.install(|| {
        IdentityId::ALL
            .par_iter()
            .map(|&id| {
                if let Some(reason) = id.inapplicable(params) {
                    return Ok(SuiteEntry { identity_id: id.name().into(), report: None, skipped: Some(reason) });
                }
                let mut rng = RngStream::task_stream(seed, id.index());
                let report = run_identity_id(id, params, n_samples, &mut rng)?;
                Ok(SuiteEntry { identity_id: id.name().into(), report: Some(report), skipped: None })
            })
            .collect()
    })
}

/// Failures tolerated among `runs` test-runs: one per started hundred.
pub fn failure_budget(runs: usize) -> usize {
    runs.div_ceil(100)
}

/// True when the failed reports stay within the multiple-testing budget.
pub fn within_budget(reports: &[TestReport]) -> bool {
    reports.iter().filter(|r| !r.passed()).count() <= failure_budget(reports.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for id in IdentityId::ALL {
            assert_eq!(id.name().parse::<IdentityId>().unwrap(), id);
        }
        assert_eq!("PY-prop21".parse::<IdentityId>().unwrap(), IdentityId::PyProp21GammaTotalMass);
        assert!(matches!("nope".parse::<IdentityId>(), Err(Error::UnknownIdentity(_))));
    }

    #[test]
    fn py_prop21_passes() {
        let p = IdentityParams::new(0.5, 1.0, ZetaSpec::Zero);
        let r = run_identity("PY-prop21", &p, 100_000, &mut RngStream::new(1, 0)).unwrap();
        assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn keydd2_and_its_control() {
        let p = IdentityParams::new(0.5, 0.0, ZetaSpec::Const(2.0));
        let r = run_identity("keydd2", &p, 100_000, &mut RngStream::new(2, 0)).unwrap();
        assert!(r.passed(), "{r:?}");
        let bad = run_identity("keydd2", &p.clone().with_shift(1.0), 100_000, &mut RngStream::new(2, 0)).unwrap();
        assert!(bad.p_value < 1e-4, "{bad:?}");
    }

    #[test]
    fn inapplicable_cases() {
        let p = IdentityParams::new(0.5, 0.0, ZetaSpec::Zero);
        assert!(run_identity("keydd2", &p, 100, &mut RngStream::new(3, 0)).is_err());
        assert!(run_identity("PY-prop21-gamma-total-mass", &p, 100, &mut RngStream::new(3, 0)).is_err());
        assert!(run_identity("keydd", &p, 1000, &mut RngStream::new(3, 0)).is_ok());
    }

    #[test]
    fn jump_ratios_are_ordered() {
        let mut rng = RngStream::new(4, 0);
        for _ in 0..1000 {
            let (r1, r2) = jump_ratios(0.4, 1.5, &mut rng);
            assert!(r1 > 0.0 && r1 < 1.0 && r2 > 0.0 && r2 < 1.0);
        }
    }

    #[test]
    fn budget() {
        assert_eq!(failure_budget(10), 1);
        assert_eq!(failure_budget(100), 1);
        assert_eq!(failure_budget(101), 2);
    }
}
