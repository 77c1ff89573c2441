//! Diversity chains built from (e_k, ε_{α,k}, ζ) primitives: the V-chain,
//! the stick-breaking W-chain, the EPG q-chain and the bridge chain with
//! exponential waiting times.
//!
//! Every chain is anchored at its last state, drawn as a tilted stable given
//! the path, and run downwards through the exact multiplicative relations.

use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::bridges::{build_bridge, compose_simple, Bridge, SimpleBridge};
use crate::densities::stable_density;
use crate::error::{param, Error, Result};
use crate::quad::QuadratureConfig;
use crate::random::{beta_variate, gamma_variate, gg_total, tilted_variate, RngStream, StableIndex, ZetaSpec};
use crate::sticks::StickKind;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ChainKind {
    V,
    W,
    Q,
}

impl std::str::FromStr for ChainKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "v" | "V" => Ok(ChainKind::V),
            "w" | "W" => Ok(ChainKind::W),
            "q" | "Q" => Ok(ChainKind::Q),
            _ => param(format!("chain kind must be v, w or q, got '{s}'")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChainState {
    pub k: usize,
    pub t_hat: f64,
    /// t_hat^{−α}
    pub diversity: f64,
    /// ζ_{α,k}, ζ_k or ζ̃_{α,k}
    pub aux: f64,
    /// V_k, W_k or q_{α,k}; none at k = 0
    pub factor: Option<f64>,
    /// E_k for the q-chain
    pub waiting_time: Option<f64>,
}

impl ChainState {
    /// k, T_hat, diversity, factor, waiting_time (empty cells when absent).
    pub fn csv_row(&self) -> String {
        let opt = |x: Option<f64>| x.map(crate::fmt_num).unwrap_or_default();
        format!(
            "{},{},{},{},{}",
            self.k,
            crate::fmt_num(self.t_hat),
            crate::fmt_num(self.diversity),
            opt(self.factor),
            opt(self.waiting_time)
        )
    }
}

pub const CHAIN_CSV_HEADER: &str = "k,T_hat,diversity,factor,waiting_time";

fn check(alpha: f64, zeta: &ZetaSpec, steps: usize) -> Result<()> {
    StableIndex::new(alpha)?;
    zeta.validate()?;
    if steps == 0 {
        return param("steps must be >= 1");
    }
    Ok(())
}

// Runs T_{k−1} = T_k·ratio_k downwards from the anchor T_n.
fn assemble(alpha: f64, anchor: f64, aux: &[f64], factors: &[f64], ratio: impl Fn(f64) -> f64, waits: Option<&[f64]>) -> Vec<ChainState> {
    let n = factors.len();
    let mut t = vec![0.0; n + 1];
    t[n] = anchor;
    for k in (1..=n).rev() {
        t[k - 1] = t[k] * ratio(factors[k - 1]);
    }
    (0..=n)
        .map(|k| ChainState {
            k,
            t_hat: t[k],
            diversity: t[k].powf(-alpha),
            aux: aux[k],
            factor: if k == 0 { None } else { Some(factors[k - 1]) },
            waiting_time: match (k, waits) {
                (0, _) | (_, None) => None,
                (k, Some(w)) => Some(w[k - 1]),
            },
        })
        .collect()
}

/// ζ_{α,k} = ζ_{α,k−1} + e_k + ε_{α,k}, V_k = (e_k + ζ_{α,k−1})/ζ_{α,k},
/// T̂_{k−1} = T̂_k·V_k^{−1/α}.
pub fn run_v_chain(alpha: f64, zeta: &ZetaSpec, steps: usize, rng: &mut RngStream) -> Result<Vec<ChainState>> {
    check(alpha, zeta, steps)?;
    let shape = (1.0 - alpha) / alpha;
    let mut aux = vec![zeta.draw(rng)];
    let mut factors = Vec::with_capacity(steps);
    for _ in 0..steps {
        let prev = *aux.last().unwrap();
        let e = rng.exp1();
        let eps = gamma_variate(shape, rng);
        let next = prev + e + eps;
        factors.push((e + prev) / next);
        aux.push(next);
    }
    let anchor = tilted_variate(alpha, aux[steps], rng);
    Ok(assemble(alpha, anchor, &aux, &factors, |v| v.powf(-1.0 / alpha), None))
}

/// PG sticks W_k = 1 − β_{1−α,α}(1 − (ζ_{k−1}/ζ_k)^{1/α}) with ζ_k = ζ_{k−1} + e_k;
/// T̂_{(k−1)α} = T̂_{kα}/W_k.
pub fn run_w_chain(alpha: f64, zeta: &ZetaSpec, steps: usize, rng: &mut RngStream) -> Result<Vec<ChainState>> {
    check(alpha, zeta, steps)?;
    let mut aux = vec![zeta.draw(rng)];
    let mut factors = Vec::with_capacity(steps);
    for _ in 0..steps {
        let prev = *aux.last().unwrap();
        let next = prev + rng.exp1();
        let r = (prev / next).powf(1.0 / alpha);
        factors.push(1.0 - beta_variate(1.0 - alpha, alpha, rng) * (1.0 - r));
        aux.push(next);
    }
    let anchor = tilted_variate(alpha, aux[steps], rng);
    Ok(assemble(alpha, anchor, &aux, &factors, |w| 1.0 / w, None))
}

/// ζ̃_0 = ζ, q_k = ζ̃_{k−1}/(ζ̃_{k−1} + ε_{k−1}), ζ̃_k = ζ̃_{k−1} + ε_{k−1} + e_k,
/// S̃_{k−1} = S̃_k·q_k^{−1/α}, waiting times E_k = τ_α(e_k + ε_{k−1}).
pub fn run_q_chain(alpha: f64, zeta: &ZetaSpec, steps: usize, rng: &mut RngStream) -> Result<Vec<ChainState>> {
    check(alpha, zeta, steps)?;
    let path = q_path(alpha, zeta.draw(rng), steps, rng);
    let anchor = tilted_variate(alpha, path.anchor_zeta(), rng);
    Ok(assemble(alpha, anchor, &path.aux, &path.qs, |q| q.powf(-1.0 / alpha), Some(&path.waits)))
}

struct QPath {
    aux: Vec<f64>,
    eps: Vec<f64>,
    qs: Vec<f64>,
    waits: Vec<f64>,
}

impl QPath {
    // ζ̃_{n−1} + ε_{n−1}
    fn anchor_zeta(&self) -> f64 {
        let n = self.qs.len();
        self.aux[n - 1] + self.eps[n - 1]
    }
}

fn q_path(alpha: f64, zeta0: f64, steps: usize, rng: &mut RngStream) -> QPath {
    let shape = (1.0 - alpha) / alpha;
    let mut path = QPath { aux: vec![zeta0], eps: Vec::new(), qs: Vec::new(), waits: Vec::new() };
    for _ in 0..steps {
        let prev = *path.aux.last().unwrap();
        let eps = gamma_variate(shape, rng);
        let e = rng.exp1();
        path.qs.push(if prev + eps > 0.0 { prev / (prev + eps) } else { 0.0 });
        path.waits.push(gg_total(alpha, e + eps, rng));
        path.eps.push(eps);
        path.aux.push(prev + eps + e);
    }
    path
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CrossLink {
    pub t0: f64,
    pub t1: f64,
    pub t_alpha: f64,
    pub v1: f64,
    pub w1: f64,
}

/// First step of the V- and W-chains from shared draws ζ' = e₁ + ζ, ε_α,
/// τ_α(ζ') and τ_α(ε_α):
/// T̂₀ = (τ(ζ')+τ(ε))/ζ'^{1/α}, T̂₁ = (τ(ζ')+τ(ε))/(ζ'+ε)^{1/α},
/// V₁ = ζ'/(ζ'+ε), W₁ = τ(ζ')/(τ(ζ')+τ(ε)), T̂_{α,α} = τ(ζ')/ζ'^{1/α}.
pub fn cross_link(alpha: f64, zeta: &ZetaSpec, rng: &mut RngStream) -> Result<CrossLink> {
    check(alpha, zeta, 1)?;
    let z = zeta.draw(rng) + rng.exp1();
    let eps = gamma_variate((1.0 - alpha) / alpha, rng);
    let tz = gg_total(alpha, z, rng);
    let te = gg_total(alpha, eps, rng);
    let inv = 1.0 / alpha;
    Ok(CrossLink {
        t0: (tz + te) / z.powf(inv),
        t1: (tz + te) / (z + eps).powf(inv),
        t_alpha: tz / z.powf(inv),
        v1: z / (z + eps),
        w1: tz / (tz + te),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BridgeStep {
    pub k: usize,
    /// EPG(α, ζ̃_k) bridge
    pub bridge: Bridge,
    /// the simple bridge λ̃_{k+1} linking this step to the next; none at k = n
    pub link: Option<SimpleBridge>,
    /// E_k, none at k = 0
    pub waiting_time: Option<f64>,
}

/// F_n is a PG(α, ζ̃_{n−1}+ε_{n−1}) bridge; F_{k−1} = F_k ∘ λ̃_k.
pub fn bdgm_chain(alpha: f64, zeta: &ZetaSpec, steps: usize, trunc: f64, rng: &mut RngStream) -> Result<Vec<BridgeStep>> {
    check(alpha, zeta, steps)?;
    let path = q_path(alpha, zeta.draw(rng), steps, rng);
    let links: Vec<SimpleBridge> = path.qs.iter().map(|&q| SimpleBridge { q, atom: rng.uniform() }).collect();
    let top = build_bridge(&StickKind::pg(alpha, ZetaSpec::Const(path.anchor_zeta()))?, trunc, rng)?;
    let mut out = Vec::with_capacity(steps + 1);
    let mut current = top;
    for k in (0..=steps).rev() {
        let next = if k > 0 { Some(compose_simple(&current, &links[k - 1])) } else { None };
        out.push(BridgeStep {
            k,
            bridge: current,
            link: links.get(k).copied(),
            waiting_time: if k == 0 { None } else { Some(path.waits[k - 1]) },
        });
        match next {
            Some(b) => current = b,
            None => break,
        }
    }
    out.reverse();
    Ok(out)
}

/// Conditional density of T̂₁ (V) or T̂_{α,α} (W) at s given T̂₀ = t.
pub fn transition_density(kind: ChainKind, alpha: f64, t: f64, s: f64, cfg: &QuadratureConfig) -> Result<f64> {
    StableIndex::new(alpha)?;
    if !(s > 0.0 && t > 0.0) {
        return param("t and s must be positive");
    }
    if s >= t {
        return Err(Error::Domain(format!("transition density needs s < t, got s={s}, t={t}")));
    }
    let ft = stable_density(alpha, t, cfg)?;
    let fs = stable_density(alpha, s, cfg)?;
    let ratio = s / t;
    match kind {
        ChainKind::V => {
            let b = (1.0 - alpha) / alpha;
            let c = 2.0 * alpha.ln() - ln_gamma(b);
            Ok(c.exp() * ratio.powf(alpha - 1.0) * (1.0 - ratio.powf(alpha)).powf(b - 1.0) * fs / (t * t * ft))
        }
        ChainKind::W => {
            let c = alpha.ln() - ln_gamma(1.0 - alpha);
            Ok(c.exp() * (t - s).powf(-alpha) * fs / (t * ft))
        }
        ChainKind::Q => Err(Error::Unsupported("transition density is given for the V and W chains".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::integrate;
    use crate::verify::{correlation, ks_one_sample, ks_two_sample_stat};
    use statrs::distribution::{Beta, ContinuousCDF, Exp};

    fn beta_cdf(a: f64, b: f64) -> impl Fn(f64) -> f64 {
        let d = Beta::new(a, b).unwrap();
        move |x| d.cdf(x)
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn telescoping() {
        let mut rng = RngStream::new(1, 0);
        for _ in 0..200 {
            let zeta = ZetaSpec::GammaShape(1.5);
            let v = run_v_chain(0.4, &zeta, 20, &mut rng).unwrap();
            let prod: f64 = v[1..].iter().map(|s| s.factor.unwrap().powf(-1.0 / 0.4)).product();
            assert!(rel(v[0].t_hat, v[20].t_hat * prod) < 1e-12);
            let w = run_w_chain(0.4, &zeta, 20, &mut rng).unwrap();
            let prod: f64 = w[1..].iter().map(|s| s.factor.unwrap()).product();
            assert!(rel(w[20].t_hat, w[0].t_hat * prod) < 1e-12);
            let q = run_q_chain(0.4, &zeta, 20, &mut rng).unwrap();
            let prod: f64 = q[1..].iter().map(|s| s.factor.unwrap()).product();
            assert!(rel(q[0].diversity, q[20].diversity * prod) < 1e-12);
            for s in v.iter().chain(&w).chain(&q).skip(1) {
                if let Some(f) = s.factor {
                    assert!(f > 0.0 && f < 1.0);
                }
            }
        }
    }

    #[test]
    fn v_chain_zero_zeta_betas() {
        let alpha = 0.5;
        let mut rng = RngStream::new(2, 0);
        let runs: Vec<Vec<ChainState>> = (0..50_000).map(|_| run_v_chain(alpha, &ZetaSpec::Zero, 3, &mut rng).unwrap()).collect();
        for k in 1..=3 {
            let col: Vec<f64> = runs.iter().map(|r| r[k].factor.unwrap()).collect();
            let a = (alpha + k as f64 - 1.0) / alpha;
            assert!(ks_one_sample(&col, beta_cdf(a, (1.0 - alpha) / alpha)).1 > 0.001, "k={k}");
        }
        let a: Vec<f64> = runs.iter().map(|r| r[1].factor.unwrap()).collect();
        let b: Vec<f64> = runs.iter().map(|r| r[3].factor.unwrap()).collect();
        assert!(correlation(&a, &b).abs() < 3.0 / (runs.len() as f64).sqrt());
    }

    #[test]
    fn w_chain_zero_zeta_betas() {
        let alpha = 0.3;
        let mut rng = RngStream::new(3, 0);
        let runs: Vec<Vec<ChainState>> = (0..50_000).map(|_| run_w_chain(alpha, &ZetaSpec::Zero, 3, &mut rng).unwrap()).collect();
        for k in 1..=3 {
            let col: Vec<f64> = runs.iter().map(|r| r[k].factor.unwrap()).collect();
            assert!(ks_one_sample(&col, beta_cdf(k as f64 * alpha, 1.0 - alpha)).1 > 0.001, "k={k}");
        }
    }

    #[test]
    fn w_chain_first_state_is_shifted_pd_total() {
        let (alpha, theta) = (0.5, 1.0);
        let a = StableIndex::new(alpha).unwrap();
        let mut rng = RngStream::new(4, 0);
        let xs: Vec<f64> = (0..20_000)
            .map(|_| run_w_chain(alpha, &ZetaSpec::GammaShape(theta / alpha), 1, &mut rng).unwrap()[1].t_hat)
            .collect();
        let ys: Vec<f64> = (0..20_000).map(|_| crate::random::sample_poly_tilted_stable(a, theta + alpha, &mut rng).unwrap()).collect();
        assert!(ks_two_sample_stat(&xs, &ys).1 > 0.001);
    }

    #[test]
    fn q_chain_pd_embedding() {
        let (alpha, theta) = (0.5, 0.5);
        let mut rng = RngStream::new(5, 0);
        let runs: Vec<Vec<ChainState>> = (0..30_000)
            .map(|_| run_q_chain(alpha, &ZetaSpec::GammaShape((theta + alpha) / alpha), 3, &mut rng).unwrap())
            .collect();
        for l in 0..3 {
            let col: Vec<f64> = runs.iter().map(|r| r[l + 1].factor.unwrap()).collect();
            let a = (theta + l as f64 + alpha) / alpha;
            assert!(ks_one_sample(&col, beta_cdf(a, (1.0 - alpha) / alpha)).1 > 0.001, "l={l}");
        }
        let waits: Vec<f64> = runs.iter().map(|r| r[2].waiting_time.unwrap()).collect();
        let e = Exp::new(1.0).unwrap();
        assert!(ks_one_sample(&waits, |x| e.cdf(x)).1 > 0.001);
    }

    #[test]
    fn cross_link_identities() {
        let mut rng = RngStream::new(6, 0);
        for _ in 0..500 {
            let c = cross_link(0.6, &ZetaSpec::GammaShape(2.0), &mut rng).unwrap();
            assert!(rel(c.t0, c.t1 * c.v1.powf(-1.0 / 0.6)) < 1e-12);
            assert!(rel(c.t0, c.t_alpha / c.w1) < 1e-12);
        }
    }

    #[test]
    fn bdgm_links_are_exact() {
        let mut rng = RngStream::new(7, 0);
        let steps = bdgm_chain(0.5, &ZetaSpec::GammaShape(2.0), 4, 1e-4, &mut rng).unwrap();
        assert_eq!(steps.len(), 5);
        for k in 1..=4 {
            let lower = &steps[k - 1].bridge;
            let upper = &steps[k].bridge;
            let link = steps[k - 1].link.unwrap();
            for i in 0..=1000 {
                let y = i as f64 / 1000.0;
                let direct = upper.eval(link.eval(y)).unwrap();
                assert!((lower.eval(y).unwrap() - direct).abs() < 1e-12);
            }
        }
        assert!(steps[0].waiting_time.is_none() && steps[4].link.is_none());
    }

    #[test]
    fn transition_densities_normalize() {
        let cfg = QuadratureConfig::default();
        // rounding of s near t leaves noise around 1e-9 in the outer integrand
        let outer = QuadratureConfig { abs_tol: 1e-9, rel_tol: 1e-8, max_subdivisions: 4000 };
        for &alpha in &[0.3, 0.5, 0.7] {
            let t: f64 = 1.0;
            // s = t − x^{1/(1−α)} removes the (t−s)^{−α} endpoint singularity
            let m = 1.0 / (1.0 - alpha);
            let w = integrate(
                |x| {
                    if x <= 0.0 {
                        return 0.0;
                    }
                    let s = t - x.powf(m);
                    if s <= 0.0 {
                        return 0.0;
                    }
                    if s >= t {
                        // the transformed integrand is flat as x → 0
                        return alpha * m / (ln_gamma(1.0 - alpha).exp() * t);
                    }
                    transition_density(ChainKind::W, alpha, t, s, &cfg).unwrap() * m * x.powf(m - 1.0)
                },
                0.0,
                t.powf(1.0 - alpha),
                &outer,
            )
            .unwrap();
            assert!((w - 1.0).abs() < 1e-6, "W alpha={alpha}: {w}");
            // s = t(1 − y^{1/b})^{1/α} removes the (1 − (s/t)^α)^{b−1} singularity
            let b = (1.0 - alpha) / alpha;
            let v = integrate(
                |y| {
                    if y <= 0.0 || y >= 1.0 {
                        return 0.0;
                    }
                    let w = y.powf(1.0 / b);
                    let s = t * (1.0 - w).powf(1.0 / alpha);
                    if s <= 0.0 || s >= t {
                        return 0.0;
                    }
                    let jac = t / (alpha * b) * (1.0 - w).powf(1.0 / alpha - 1.0) * w / y;
                    transition_density(ChainKind::V, alpha, t, s, &cfg).unwrap() * jac
                },
                0.0,
                1.0,
                &outer,
            )
            .unwrap();
            assert!((v - 1.0).abs() < 1e-6, "V alpha={alpha}: {v}");
        }
        assert!(matches!(transition_density(ChainKind::V, 0.5, 1.0, 1.5, &cfg), Err(Error::Domain(_))));
    }

    #[test]
    fn v_chain_ratio_and_tree_start() {
        let (alpha, theta) = (0.5, 1.0);
        let mut rng = RngStream::new(8, 0);
        let runs: Vec<Vec<ChainState>> = (0..30_000)
            .map(|_| run_v_chain(alpha, &ZetaSpec::GammaShape(theta / alpha), 3, &mut rng).unwrap())
            .collect();
        for k in 1..=3 {
            let col: Vec<f64> = runs.iter().map(|r| r[k - 1].aux / r[k].aux).collect();
            assert!(ks_one_sample(&col, beta_cdf((theta + k as f64 - 1.0) / alpha, 1.0 / alpha)).1 > 0.001, "k={k}");
        }
        // PD(α, 1−α) start
        let runs: Vec<Vec<ChainState>> = (0..30_000)
            .map(|_| run_v_chain(alpha, &ZetaSpec::GammaShape((1.0 - alpha) / alpha), 3, &mut rng).unwrap())
            .collect();
        for k in 1..=3 {
            let col: Vec<f64> = runs.iter().map(|r| r[k].factor.unwrap()).collect();
            assert!(ks_one_sample(&col, beta_cdf(k as f64 / alpha, (1.0 - alpha) / alpha)).1 > 0.001, "k={k}");
        }
    }

    #[test]
    fn q1_matches_closed_form() {
        let alpha = 0.4;
        let cfg = QuadratureConfig::default();
        let mut rng = RngStream::new(9, 0);
        let qs: Vec<f64> = (0..50_000).map(|_| run_q_chain(alpha, &ZetaSpec::Const(1.0), 1, &mut rng).unwrap()[1].factor.unwrap()).collect();
        let edges: Vec<f64> = (0..=20).map(|i| i as f64 / 20.0).collect();
        let mut probs: Vec<f64> = edges
            .windows(2)
            .map(|w| integrate(|v| if v <= 0.0 || v >= 1.0 { 0.0 } else { crate::densities::q1_density(alpha, 1.0, v).unwrap() }, w[0], w[1], &cfg).unwrap())
            .collect();
        let total: f64 = probs.iter().sum();
        assert!((total - 1.0).abs() < 1e-8);
        probs.iter_mut().for_each(|p| *p /= total);
        let report = crate::verify::chi_square_pmf(&crate::verify::bin_counts(&qs, &edges[1..edges.len() - 1]), &probs).unwrap();
        assert!(report.passed(), "{report:?}");
    }

    #[test]
    fn w_transition_by_window_conditioning() {
        let (alpha, t) = (0.5, 1.0);
        let delta = 0.05 * t;
        let cfg = QuadratureConfig::default();
        let mut rng = RngStream::new(10, 0);
        let mut ratios = Vec::new();
        while ratios.len() < 5000 {
            let run = run_w_chain(alpha, &ZetaSpec::Zero, 1, &mut rng).unwrap();
            if (run[0].t_hat - t).abs() < delta {
                ratios.push(run[1].t_hat / run[0].t_hat);
            }
        }
        let edges = [0.0, 0.2, 0.4, 0.55, 0.7, 0.8, 0.9, 0.95, 1.0];
        let m = 1.0 / (1.0 - alpha);
        // bin mass in r = s/t, with 1 − r = x^m near the singular end
        let probs: Vec<f64> = edges
            .windows(2)
            .map(|w| {
                integrate(
                    |x| {
                        let s = t - x.powf(m);
                        if x <= 0.0 || s <= 0.0 || s >= t {
                            return 0.0;
                        }
                        transition_density(ChainKind::W, alpha, t, s, &cfg).unwrap() * m * x.powf(m - 1.0)
                    },
                    (t * (1.0 - w[1])).powf(1.0 - alpha),
                    (t * (1.0 - w[0])).powf(1.0 - alpha),
                    &QuadratureConfig { abs_tol: 1e-10, rel_tol: 1e-8, max_subdivisions: 4000 },
                )
                .unwrap()
            })
            .collect();
        let total: f64 = probs.iter().sum();
        let probs: Vec<f64> = probs.iter().map(|p| p / total).collect();
        let report = crate::verify::chi_square_pmf(&crate::verify::bin_counts(&ratios, &edges[1..edges.len() - 1]), &probs).unwrap();
        assert!(report.passed(), "{report:?}");
    }

    #[test]
    fn bdgm_pd_embedding_first_pick() {
        let (alpha, theta) = (0.5, 0.5);
        let mut rng = RngStream::new(11, 0);
        let runs: Vec<Vec<f64>> = (0..3000)
            .map(|_| {
                let chain = bdgm_chain(alpha, &ZetaSpec::GammaShape((theta + alpha) / alpha), 3, 1e-3, &mut rng).unwrap();
                chain.iter().map(|s| s.bridge.first_pick(&mut rng)).collect()
            })
            .collect();
        for k in 0..=3 {
            let col: Vec<f64> = runs.iter().map(|r| r[k]).collect();
            assert!(ks_one_sample(&col, beta_cdf(0.5, 1.0 + k as f64)).1 > 0.001, "k={k}");
        }
        let e = Exp::new(1.0).unwrap();
        let mut waits = Vec::new();
        for _ in 0..2000 {
            let chain = bdgm_chain(0.5, &ZetaSpec::Const(1.0), 2, 1e-2, &mut rng).unwrap();
            waits.push(chain[1].waiting_time.unwrap());
        }
        assert!(ks_one_sample(&waits, |x| e.cdf(x)).1 > 0.001);
    }
}
