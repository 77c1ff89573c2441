//! Seedable streams and the base variates: uniform, exponential, gamma, beta,
//! positive stable and exponentially tilted stable.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{param, Result};

/// A reproducible random stream keyed by `(seed, stream_id)`.
///
/// Backed by the ChaCha20 block counter, so streams with different ids are
/// disjoint keystreams under the same key.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    inner: ChaCha20Rng,
}

fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut inner = ChaCha20Rng::seed_from_u64(seed);
        inner.set_stream(stream_id);
        RngStream { seed, stream_id, inner }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Position of the internal block counter, in 32-bit words.
    pub fn counter(&self) -> u128 {
        self.inner.get_word_pos()
    }

    /// Fresh stream for sub-task `task`, same seed, hashed stream id.
    pub fn derive(&self, task: u64) -> RngStream {
        RngStream::new(self.seed, mix64(self.stream_id ^ mix64(task.wrapping_add(1))))
    }

    /// Stream id used for task `task` under a top-level seed.
    pub fn task_stream(seed: u64, task: u64) -> RngStream {
        RngStream::new(seed, mix64(mix64(seed) ^ task))
    }

    /// Uniform on the open interval (0,1).
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        ((self.inner.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    #[inline]
    pub fn exp1(&mut self) -> f64 {
        -self.uniform().ln()
    }

    #[inline]
    pub fn normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.inner)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }
    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }
    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.inner.fill_bytes(dest)
    }
    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> std::result::Result<(), rand::Error> {
        self.inner.try_fill_bytes(dest)
    }
}

/// Stable index α, strictly inside (0,1).
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct StableIndex(f64);

impl StableIndex {
    pub fn new(alpha: f64) -> Result<Self> {
        if alpha > 0.0 && alpha < 1.0 {
            Ok(StableIndex(alpha))
        } else {
            param(format!("alpha must lie in (0,1), got {alpha}"))
        }
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }
}

impl fmt::Display for StableIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub type ZetaSampler = Arc<dyn Fn(&mut RngStream) -> f64 + Send + Sync>;

/// Law of the mixing variable ζ ≥ 0.
#[derive(Clone)]
pub enum ZetaSpec {
    Zero,
    Const(f64),
    GammaShape(f64),
    Custom(ZetaSampler),
}

impl fmt::Debug for ZetaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ZetaSpec::Zero => write!(f, "Zero"),
            ZetaSpec::Const(v) => write!(f, "Const({v})"),
            ZetaSpec::GammaShape(a) => write!(f, "GammaShape({a})"),
            ZetaSpec::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

impl fmt::Display for ZetaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ZetaSpec::Zero => write!(f, "zero"),
            ZetaSpec::Const(v) => write!(f, "const:{v}"),
            ZetaSpec::GammaShape(a) => write!(f, "gamma:{a}"),
            ZetaSpec::Custom(_) => write!(f, "custom"),
        }
    }
}

impl ZetaSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ZetaSpec::Const(v) if !(v >= 0.0 && v.is_finite()) => {
                param(format!("const zeta must be finite and >= 0, got {v}"))
            }
            ZetaSpec::GammaShape(a) if !(a > 0.0 && a.is_finite()) => {
                param(format!("gamma shape must be > 0, got {a}"))
            }
            _ => Ok(()),
        }
    }

    /// Parse `zero`, `const:<v>` or `gamma:<a>`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let spec = if s == "zero" {
            ZetaSpec::Zero
        } else if let Some(v) = s.strip_prefix("const:") {
            ZetaSpec::Const(v.parse().map_err(|_| crate::Error::Parameter(format!("bad zeta value in '{s}'")))?)
        } else if let Some(a) = s.strip_prefix("gamma:") {
            ZetaSpec::GammaShape(a.parse().map_err(|_| crate::Error::Parameter(format!("bad gamma shape in '{s}'")))?)
        } else {
            return param(format!("zeta spec must be zero | const:<v> | gamma:<a>, got '{s}'"));
        };
        spec.validate()?;
        Ok(spec)
    }

    /// One draw of ζ.
    pub fn draw(&self, rng: &mut RngStream) -> f64 {
        match self {
            ZetaSpec::Zero => 0.0,
            ZetaSpec::Const(v) => *v,
            ZetaSpec::GammaShape(a) => gamma_variate(*a, rng),
            ZetaSpec::Custom(f) => f(rng),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, ZetaSpec::Zero) || matches!(self, ZetaSpec::Const(v) if *v == 0.0)
    }
}

// Marsaglia-Tsang for shape >= 1; returns log of the variate so that tiny
// shapes can be boosted without underflow.
fn ln_gamma_variate(shape: f64, rng: &mut RngStream) -> f64 {
    if shape < 1.0 {
        let boosted = ln_gamma_variate(shape + 1.0, rng);
        return boosted + rng.uniform().ln() / shape;
    }
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let x = rng.normal();
        let t = 1.0 + c * x;
        if t <= 0.0 {
            continue;
        }
        let v = t * t * t;
        let u = rng.uniform();
        let x2 = x * x;
        if u < 1.0 - 0.0331 * x2 * x2 || u.ln() < 0.5 * x2 + d * (1.0 - v + v.ln()) {
            return d.ln() + v.ln();
        }
    }
}

#[inline]
pub(crate) fn gamma_variate(shape: f64, rng: &mut RngStream) -> f64 {
    ln_gamma_variate(shape, rng).exp()
}

#[inline]
pub(crate) fn beta_variate(a: f64, b: f64, rng: &mut RngStream) -> f64 {
    let la = ln_gamma_variate(a, rng);
    let lb = ln_gamma_variate(b, rng);
    // a/(a+b) computed from logs
    let d = lb - la;
    if d > 0.0 {
        let e = (-d).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + d.exp())
    }
}

/// γ_shape with unit scale.
pub fn sample_gamma(shape: f64, rng: &mut RngStream) -> Result<f64> {
    if !(shape > 0.0 && shape.is_finite()) {
        return param(format!("gamma shape must be > 0, got {shape}"));
    }
    Ok(gamma_variate(shape, rng))
}

/// β_{a,b}.
pub fn sample_beta(a: f64, b: f64, rng: &mut RngStream) -> Result<f64> {
    if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
        return param(format!("beta parameters must be > 0, got ({a}, {b})"));
    }
    Ok(beta_variate(a, b, rng))
}

/// Zolotarev's function, in log form.
#[inline]
fn ln_zolotarev(alpha: f64, u: f64) -> f64 {
    let one_m = 1.0 - alpha;
    (alpha / one_m) * (alpha * u).sin().ln() + ((one_m * u).sin()).ln() - u.sin().ln() / one_m
}

#[inline]
pub(crate) fn stable_variate(alpha: f64, rng: &mut RngStream) -> f64 {
    let u = PI * rng.uniform();
    let e = rng.exp1();
    (((1.0 - alpha) / alpha) * (ln_zolotarev(alpha, u) - e.ln())).exp()
}

/// Positive stable S_α with E e^{-ωS} = e^{-ω^α}.
pub fn sample_stable(alpha: StableIndex, rng: &mut RngStream) -> f64 {
    stable_variate(alpha.get(), rng)
}

/// τ_α(ζ): generalized gamma subordinator evaluated at time ζ.
pub(crate) fn gg_total(alpha: f64, zeta: f64, rng: &mut RngStream) -> f64 {
    if zeta <= 0.0 {
        return 0.0;
    }
    let blocks = zeta.ceil().max(1.0) as u64;
    let scale = (zeta / blocks as f64).powf(1.0 / alpha);
    let mut total = 0.0;
    for _ in 0..blocks {
        loop {
            let x = scale * stable_variate(alpha, rng);
            if rng.uniform() <= (-x).exp() {
                total += x;
                break;
            }
        }
    }
    total
}

#[inline]
pub(crate) fn tilted_variate(alpha: f64, zeta: f64, rng: &mut RngStream) -> f64 {
    if zeta <= 0.0 {
        stable_variate(alpha, rng)
    } else {
        gg_total(alpha, zeta, rng) / zeta.powf(1.0 / alpha)
    }
}

/// T = τ_α(ζ)/ζ^{1/α}, density f_α(s)e^{-(sζ^{1/α}-ζ)}; S_α when ζ = 0.
pub fn sample_tilted_stable(alpha: StableIndex, zeta: f64, rng: &mut RngStream) -> Result<f64> {
    if !(zeta >= 0.0 && zeta.is_finite()) {
        return param(format!("zeta must be finite and >= 0, got {zeta}"));
    }
    Ok(tilted_variate(alpha.get(), zeta, rng))
}

/// τ_α(ζ) directly.
pub fn sample_gg_total(alpha: StableIndex, zeta: f64, rng: &mut RngStream) -> Result<f64> {
    if !(zeta >= 0.0 && zeta.is_finite()) {
        return param(format!("zeta must be finite and >= 0, got {zeta}"));
    }
    Ok(gg_total(alpha.get(), zeta, rng))
}

/// S_{α,θ}, the stable law polynomially tilted by s^{-θ}, for θ > -α.
///
/// Drawn as τ_α(ε+ζ)/ζ^{1/α} with ζ ~ γ_{(θ+α)/α}, ε ~ γ_{(1-α)/α}.
pub fn sample_poly_tilted_stable(alpha: StableIndex, theta: f64, rng: &mut RngStream) -> Result<f64> {
    let a = alpha.get();
    if !(theta > -a) {
        return param(format!("theta must exceed -alpha, got {theta}"));
    }
    let zeta = gamma_variate((theta + a) / a, rng);
    let eps = gamma_variate((1.0 - a) / a, rng);
    Ok(gg_total(a, zeta + eps, rng) / zeta.powf(1.0 / a))
}
