//! Densities, survival functions, Laplace exponents and moments.

use std::f64::consts::PI;

use statrs::function::gamma::{gamma, ln_gamma};

use crate::error::{param, Error, Result};
use crate::quad::{integrate, integrate_to_inf, QuadratureConfig};
use crate::random::{RngStream, ZetaSpec};

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        param(format!("alpha must lie in (0,1), got {alpha}"))
    }
}

/// ψ_α(ω) = (1+ω)^α − 1, or ψ_{α,ζ}(ω) = (ζ^{1/α}+ω)^α − ζ when ζ is given.
pub fn psi(alpha: f64, omega: f64, zeta: Option<f64>) -> f64 {
    match zeta {
        None => (1.0 + omega).powf(alpha) - 1.0,
        Some(z) => (z.powf(1.0 / alpha) + omega).powf(alpha) - z,
    }
}

/// ∫_a^∞ f split as [a, a+1] plus an exponential change of variable on the
/// rest, which copes with stretched-exponential tails. The integrand must
/// vanish at infinity.
pub(crate) fn integrate_tail<F: Fn(f64) -> f64>(f: F, a: f64, cfg: &QuadratureConfig) -> Result<f64> {
    let head = integrate(&f, a, a + 1.0, cfg)?;
    let tail = integrate_to_inf(
        |u| {
            let e = u.exp();
            if !e.is_finite() {
                return 0.0;
            }
            let v = f(a + e);
            // far tail: power factor overflows while the exponential factor is 0
            if v == 0.0 || !v.is_finite() {
                0.0
            } else {
                v * e
            }
        },
        0.0,
        cfg,
    )?;
    Ok(head + tail)
}

/// ∫_0^1 r^{p−1} g(r) dr, with t = r^p removing the endpoint singularity when p < 1.
fn integrate_power_head<G: Fn(f64) -> f64>(p: f64, g: G, cfg: &QuadratureConfig) -> Result<f64> {
    if p < 1.0 {
        integrate(|t| g(t.powf(1.0 / p)), 0.0, 1.0, cfg).map(|v| v / p)
    } else {
        integrate(|r| r.powf(p - 1.0) * g(r), 0.0, 1.0, cfg)
    }
}

#[inline]
fn ln_zolotarev(alpha: f64, u: f64) -> f64 {
    let one_m = 1.0 - alpha;
    (alpha / one_m) * (alpha * u).sin().ln() + ((one_m * u).sin()).ln() - u.sin().ln() / one_m
}

fn series_switch(alpha: f64) -> f64 {
    40f64.powf(1.0 / alpha)
}

// Large-x expansions of the density and survival function.
fn stable_tail_series(alpha: f64, x: f64, survival: bool) -> f64 {
    let mut sum = 0.0;
    let mut ln_fact = 0.0;
    for k in 1..200 {
        let kf = k as f64;
        ln_fact += kf.ln();
        let ka = kf * alpha;
        let ln_mag = if survival {
            ln_gamma(ka) - ln_fact - ka * x.ln()
        } else {
            ln_gamma(ka + 1.0) - ln_fact - (ka + 1.0) * x.ln()
        };
        let term = ln_mag.exp() * (kf * PI * alpha).sin();
        sum += if k % 2 == 1 { term } else { -term };
        if ln_mag.exp() < 1e-18 * sum.abs() {
            break;
        }
    }
    sum / PI
}

/// f_α(x), the density of S_α, by Zolotarev's integral.
pub fn stable_density(alpha: f64, x: f64, cfg: &QuadratureConfig) -> Result<f64> {
    check_alpha(alpha)?;
    if !(x > 0.0) {
        return if x == 0.0 { Ok(0.0) } else { param("stable density needs x >= 0") };
    }
    if x >= series_switch(alpha) {
        return Ok(stable_tail_series(alpha, x, false));
    }
    let one_m = 1.0 - alpha;
    let ln_c = -(alpha / one_m) * x.ln();
    let c = ln_c.exp();
    let integrand = |u: f64| {
        let la = ln_zolotarev(alpha, u);
        let a = la.exp();
        if !a.is_finite() {
            return 0.0;
        }
        (la - c * a).exp()
    };
    let v = integrate(integrand, 0.0, PI, cfg)?;
    Ok(alpha / one_m * (-x.ln() / one_m).exp() * v / PI)
}

/// P(S_α ≤ x).
pub fn stable_cdf(alpha: f64, x: f64, cfg: &QuadratureConfig) -> Result<f64> {
    check_alpha(alpha)?;
    if x <= 0.0 {
        return Ok(0.0);
    }
    if x >= series_switch(alpha) {
        return Ok(1.0 - stable_tail_series(alpha, x, true));
    }
    let c = (-(alpha / (1.0 - alpha)) * x.ln()).exp();
    let v = integrate(|u| (-c * ln_zolotarev(alpha, u).exp()).exp(), 0.0, PI, cfg)?;
    Ok((v / PI).clamp(0.0, 1.0))
}

/// Density of T = τ_α(ζ)/ζ^{1/α}: f_α(s)e^{−(sζ^{1/α}−ζ)}.
pub fn tilted_stable_density(alpha: f64, zeta: f64, s: f64, cfg: &QuadratureConfig) -> Result<f64> {
    if zeta < 0.0 {
        return param("zeta must be >= 0");
    }
    let f = stable_density(alpha, s, cfg)?;
    Ok(f * (-(s * zeta.powf(1.0 / alpha) - zeta)).exp())
}

/// E[S_{α,θ}^{−δ}] = Γ((θ+δ)/α+1)/Γ(θ+δ+1) · Γ(θ+1)/Γ(θ/α+1).
pub fn neg_moment(alpha: f64, theta: f64, delta: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !(theta > -alpha) || !(theta + delta > -alpha) {
        return param(format!("need theta > -alpha and theta + delta > -alpha, got theta={theta}, delta={delta}"));
    }
    Ok((ln_gamma((theta + delta) / alpha + 1.0) - ln_gamma(theta + delta + 1.0) + ln_gamma(theta + 1.0)
        - ln_gamma(theta / alpha + 1.0))
    .exp())
}

/// Density of γ₁/τ_α(ζ) given ζ: αζ(y+1)^{α−1}e^{−ζ((y+1)^α−1)}.
pub fn density_exp_over_tau(alpha: f64, zeta: f64, y: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !(zeta > 0.0) || !(y >= 0.0) {
        return param("need zeta > 0 and y >= 0");
    }
    Ok(alpha * zeta * (y + 1.0).powf(alpha - 1.0) * (-zeta * psi(alpha, y, None)).exp())
}

/// P(γ₁/τ_α(ζ) > y) = e^{−ζψ_α(y)}.
pub fn survival_exp_over_tau(alpha: f64, zeta: f64, y: f64) -> f64 {
    (-zeta * psi(alpha, y, None)).exp()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SurvivalForm {
    /// α/Γ(θ/α) ∫_y^∞ e^{−s^α}(s−y)^{θ−1} ds, θ ≥ 0
    First,
    /// 1/Γ((θ+α)/α) ∫_{y^α}^∞ e^{−r}(r^{1/α}−y)^θ dr, θ > −α
    Second,
}

/// 𝕊_{α,θ}(y) = P(E_{α,θ} > y) where E_{α,θ} = γ₁/S_{α,θ}.
pub fn survival_s(alpha: f64, theta: f64, y: f64, cfg: &QuadratureConfig, form: SurvivalForm) -> Result<f64> {
    check_alpha(alpha)?;
    if !(theta > -alpha) || !(y >= 0.0) {
        return param(format!("need theta > -alpha and y >= 0, got theta={theta}, y={y}"));
    }
    if y == 0.0 {
        return Ok(1.0);
    }
    if theta == 0.0 {
        return Ok((-y.powf(alpha)).exp());
    }
    match form {
        SurvivalForm::First => {
            if theta < 0.0 {
                return Err(Error::Domain("first survival form needs theta >= 0".into()));
            }
            // s = y + r
            let g = |r: f64| (-(y + r).powf(alpha)).exp();
            let head = integrate_power_head(theta, g, cfg)?;
            let tail = integrate_tail(|r| r.powf(theta - 1.0) * g(r), 1.0, cfg)?;
            Ok(alpha * (head + tail) / gamma(theta / alpha))
        }
        SurvivalForm::Second => {
            // r = (v+y)^α, so dr = α(v+y)^{α−1} dv and the weight is v^θ
            let g = |v: f64| alpha * (-(v + y).powf(alpha)).exp() * (v + y).powf(alpha - 1.0);
            let head = integrate_power_head(theta + 1.0, g, cfg)?;
            let tail = integrate_tail(|v| v.powf(theta) * g(v), 1.0, cfg)?;
            Ok((head + tail) / gamma((theta + alpha) / alpha))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EForm {
    /// integral over r ∈ (0,∞) of e^{−(r+1)^α y^α} r^{θ−1}(1+r)^{α−1}
    I,
    /// integral over v ∈ (1,∞) of e^{−v y^α}(v^{1/α}−1)^{θ−1}
    II,
    /// c·𝕊_{α,θ−1}(y) with c = θΓ((θ−1)/α+1)/Γ(θ/α+1), θ > 1−α
    III,
}

/// Unnormalized density of E_{α,θ} = γ₁/S_{α,θ} by one of the three forms.
pub fn density_e_raw(alpha: f64, theta: f64, y: f64, cfg: &QuadratureConfig, form: EForm) -> Result<f64> {
    check_alpha(alpha)?;
    if !(y > 0.0) {
        return if y == 0.0 { Ok(0.0) } else { param("y must be >= 0") };
    }
    if form != EForm::III && theta == 0.0 {
        return Ok(alpha * y.powf(alpha - 1.0) * (-y.powf(alpha)).exp());
    }
    let ya = y.powf(alpha);
    match form {
        EForm::I => {
            if theta < 0.0 {
                return Err(Error::Domain("form (i) needs theta >= 0".into()));
            }
            let g = |r: f64| (-(r + 1.0).powf(alpha) * ya).exp() * (1.0 + r).powf(alpha - 1.0);
            let head = integrate_power_head(theta, g, cfg)?;
            let tail = integrate_tail(|r| r.powf(theta - 1.0) * g(r), 1.0, cfg)?;
            Ok(y.powf(theta + alpha - 1.0) * alpha * alpha / gamma(theta / alpha) * (head + tail))
        }
        EForm::II => {
            if theta < 0.0 {
                return Err(Error::Domain("form (ii) needs theta >= 0".into()));
            }
            let ia = 1.0 / alpha;
            // near v = 1 factor out (v−1)^{θ−1}, the remaining ratio is smooth
            let ratio = |v: f64| {
                let d = v - 1.0;
                if d < 1e-12 {
                    ia
                } else {
                    ((v.powf(ia) - 1.0) / d).max(f64::MIN_POSITIVE)
                }
            };
            let g = |d: f64| (-(1.0 + d) * ya).exp() * ratio(1.0 + d).powf(theta - 1.0);
            let head = integrate_power_head(theta, g, cfg)?;
            let tail = integrate_to_inf(|v| (-v * ya).exp() * (v.powf(ia) - 1.0).powf(theta - 1.0), 2.0, cfg)?;
            Ok(y.powf(theta + alpha - 1.0) * alpha / gamma(theta / alpha) * (head + tail))
        }
        EForm::III => {
            let base = theta - 1.0;
            if !(base > -alpha) {
                return Err(Error::Domain("form (iii) needs theta > 1 - alpha".into()));
            }
            let c = (theta.ln() + ln_gamma(base / alpha + 1.0) - ln_gamma(theta / alpha + 1.0)).exp();
            Ok(c * survival_s(alpha, base, y, cfg, SurvivalForm::Second)?)
        }
    }
}

/// ∫_0^∞ of the raw density, used as the normalizer.
pub fn density_e_mass(alpha: f64, theta: f64, cfg: &QuadratureConfig, form: EForm) -> Result<f64> {
    let outer = QuadratureConfig { rel_tol: cfg.rel_tol.max(1e-9), abs_tol: cfg.abs_tol.max(1e-11), ..*cfg };
    let f = |y: f64| density_e_raw(alpha, theta, y, cfg, form).unwrap_or(f64::NAN);
    let p = if form == EForm::III { 1.0 } else { theta + alpha };
    let head = integrate_power_head(p, |y| if y == 0.0 { 0.0 } else { f(y) / y.powf(p - 1.0) }, &outer)?;
    let tail = integrate_tail(f, 1.0, &outer)?;
    Ok(head + tail)
}

/// Density of E_{α,θ}, each form renormalized by its computed integral.
pub fn density_e(alpha: f64, theta: f64, y: f64, cfg: &QuadratureConfig, form: EForm) -> Result<f64> {
    let mass = density_e_mass(alpha, theta, cfg, form)?;
    log::debug!("density_e form {form:?} at alpha={alpha}, theta={theta}: raw mass {mass}");
    Ok(density_e_raw(alpha, theta, y, cfg, form)? / mass)
}

/// Δ_{α,1}: density of S_α/S_{α,1}.
pub fn delta_density(alpha: f64, x: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if x < 0.0 {
        return param("x must be >= 0");
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let xa = x.powf(alpha);
    let (s, c) = (PI * alpha).sin_cos();
    let angle = s.atan2(c + xa);
    let denom = (x.powf(2.0 * alpha) + 2.0 * xa * c + 1.0).powf(1.0 / (2.0 * alpha));
    Ok((angle / alpha).sin() / (PI * denom))
}

/// Ω_{α,1}(y|q): density of P_{α,1}(q).
pub fn omega_density(alpha: f64, q: f64, y: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !(q > 0.0 && q < 1.0) {
        return param("q must lie in (0,1)");
    }
    if !(y > 0.0 && y < 1.0) {
        return Ok(0.0);
    }
    let scale = ((1.0 - q) / q).powf(1.0 / alpha);
    Ok(delta_density(alpha, scale * y / (1.0 - y))? / ((1.0 - y) * q.powf(1.0 / alpha)))
}

/// ρ_{α,θ}(p) = Γ((1+θ)/α)/(Γ((θ+α)/α)Γ((1−α)/α)) · p^{1/α}(1−p)^{θ/α}.
pub fn rho(alpha: f64, theta: f64, p: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !(theta > -alpha) {
        return param("theta must exceed -alpha");
    }
    if !(0.0..=1.0).contains(&p) {
        return Ok(0.0);
    }
    let lc = ln_gamma((1.0 + theta) / alpha) - ln_gamma((theta + alpha) / alpha) - ln_gamma((1.0 - alpha) / alpha);
    Ok((lc + p.ln() / alpha + (1.0 - p).ln() * theta / alpha).exp())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SpecialDensity {
    Delta,
    Omega { q: f64 },
    Rho { theta: f64 },
}

pub fn special_density(which: SpecialDensity, alpha: f64, x: f64) -> Result<f64> {
    match which {
        SpecialDensity::Delta => delta_density(alpha, x),
        SpecialDensity::Omega { q } => omega_density(alpha, q, x),
        SpecialDensity::Rho { theta } => rho(alpha, theta, x),
    }
}

/// Density of q_{α,1} = ζ/(ζ+ε_α) for fixed ζ > 0.
pub fn q1_density(alpha: f64, zeta: f64, v: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !(zeta > 0.0) {
        return param("zeta must be > 0");
    }
    if !(v > 0.0 && v < 1.0) {
        return Ok(0.0);
    }
    let a = (1.0 - alpha) / alpha;
    Ok((a * zeta.ln() - ln_gamma(a) - v.ln() / alpha + (a - 1.0) * (1.0 - v).ln() - (zeta / v - zeta)).exp())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MixKind {
    PG,
    EPG,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HValue {
    pub value: f64,
    /// Monte Carlo standard error; zero for closed forms
    pub se: f64,
}

/// The tilt h with PG(α,ζ) or EPG(α,ζ) total-mass density h(s)f_α(s).
pub fn h_mixing(alpha: f64, zeta: &ZetaSpec, s: f64, kind: MixKind, rng: &mut RngStream, mc_samples: usize) -> Result<HValue> {
    check_alpha(alpha)?;
    zeta.validate()?;
    if !(s > 0.0) {
        return param("s must be > 0");
    }
    let ia = 1.0 / alpha;
    let at = |z: f64| -> f64 {
        let e = (-(s * z.powf(ia) - z)).exp();
        match kind {
            MixKind::PG => e,
            MixKind::EPG => s * ia * z.powf(ia - 1.0) * e,
        }
    };
    let exact = |value| Ok(HValue { value, se: 0.0 });
    match (zeta, kind) {
        (ZetaSpec::Zero, MixKind::PG) => exact(1.0),
        (ZetaSpec::Zero, MixKind::EPG) => {
            Err(Error::Unsupported("EPG(α,0) is a point mass; its total mass has no density".into()))
        }
        (ZetaSpec::Const(v), MixKind::EPG) if *v == 0.0 => {
            Err(Error::Unsupported("EPG(α,0) is a point mass; its total mass has no density".into()))
        }
        (ZetaSpec::Const(v), _) => exact(at(*v)),
        (ZetaSpec::GammaShape(a), MixKind::PG) => {
            exact((alpha.ln() + ln_gamma(alpha * a) - ln_gamma(*a) - alpha * a * s.ln()).exp())
        }
        (ZetaSpec::GammaShape(a), MixKind::EPG) => {
            let g = alpha * a + 1.0 - alpha;
            exact((ln_gamma(g) - ln_gamma(*a) + (1.0 - g) * s.ln()).exp())
        }
        (ZetaSpec::Custom(_), _) => {
            if mc_samples < 2 {
                return param("Monte Carlo h needs at least 2 samples");
            }
            let xs: Vec<f64> = (0..mc_samples).map(|_| at(zeta.draw(rng))).collect();
            let (m, se) = crate::verify::mean_and_se(&xs);
            Ok(HValue { value: m, se })
        }
    }
}
