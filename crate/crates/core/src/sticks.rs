//! Lazily extendable stick-breaking streams: GEM(α,θ), PG(α,ζ) and EPG(α,ζ).
//!
//! PG sticks follow 1−W_k = β^{(k)}_{1−α,α}(1−R_k) with R_k = (ζ_{k−1}/ζ_k)^{1/α}
//! and ζ_k = ζ_{k−1} + e_k, ζ_0 = ζ. EPG streams carry the PG(α, ε_α+ζ) sticks
//! together with the simple-bridge dust q = ζ/(ζ+ε_α); the EPG masses are
//! obtained by merging the sticks that fall in the simple bridge's atom.

use crate::error::{param, Error, Result};
use crate::mass_partition::{rank, MassPartition};
use crate::random::{beta_variate, RngStream, StableIndex, ZetaSpec};

/// Hard cap on the number of sticks generated when truncating.
pub const MAX_STICKS: usize = 20_000_000;

#[derive(Clone, Debug)]
pub enum StickKind {
    /// GEM(α,θ); α = 0 is allowed here (Dirichlet sticks)
    PD { alpha: f64, theta: f64 },
    PG { alpha: StableIndex, zeta: ZetaSpec },
    EPG { alpha: StableIndex, zeta: ZetaSpec },
}

impl StickKind {
    pub fn pd(alpha: f64, theta: f64) -> Result<Self> {
        let k = StickKind::PD { alpha, theta };
        k.validate()?;
        Ok(k)
    }

    pub fn pg(alpha: f64, zeta: ZetaSpec) -> Result<Self> {
        zeta.validate()?;
        Ok(StickKind::PG { alpha: StableIndex::new(alpha)?, zeta })
    }

    pub fn epg(alpha: f64, zeta: ZetaSpec) -> Result<Self> {
        zeta.validate()?;
        Ok(StickKind::EPG { alpha: StableIndex::new(alpha)?, zeta })
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            StickKind::PD { alpha, theta } => {
                if !(*alpha >= 0.0 && *alpha < 1.0) {
                    return param(format!("PD alpha must lie in [0,1), got {alpha}"));
                }
                if !(*theta > -alpha) || (*alpha == 0.0 && *theta <= 0.0) {
                    return param(format!("PD theta must exceed -alpha (and be > 0 when alpha = 0), got {theta}"));
                }
                Ok(())
            }
            StickKind::PG { zeta, .. } | StickKind::EPG { zeta, .. } => zeta.validate(),
        }
    }

    pub fn alpha(&self) -> f64 {
        match self {
            StickKind::PD { alpha, .. } => *alpha,
            StickKind::PG { alpha, .. } | StickKind::EPG { alpha, .. } => alpha.get(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StickState {
    pub k: usize,
    /// the ζ draw, fixed for the whole stream
    pub zeta: f64,
    /// ζ_k for PG, ζ_k + ε_α for EPG
    pub zeta_k: f64,
    pub eps_alpha: Option<f64>,
    pub sticks: Vec<f64>,
    /// ∏_{l≤k} W_l
    pub product: f64,
}

impl StickState {
    /// Draws ζ (and ε_α for EPG) once for the stream.
    pub fn init(kind: &StickKind, rng: &mut RngStream) -> Result<Self> {
        kind.validate()?;
        let (zeta, zeta_k, eps_alpha) = match kind {
            StickKind::PD { .. } => (0.0, 0.0, None),
            StickKind::PG { zeta, .. } => {
                let z = zeta.draw(rng);
                (z, z, None)
            }
            StickKind::EPG { alpha, zeta } => {
                let a = alpha.get();
                let z = zeta.draw(rng);
                let e = crate::random::gamma_variate((1.0 - a) / a, rng);
                (z, z + e, Some(e))
            }
        };
        if !(zeta >= 0.0 && zeta.is_finite()) {
            return Err(Error::Parameter(format!("zeta draw must be finite and >= 0, got {zeta}")));
        }
        Ok(StickState { k: 0, zeta, zeta_k, eps_alpha, sticks: Vec::new(), product: 1.0 })
    }

    /// Simple-bridge dust q = ζ/(ζ+ε_α) for EPG streams.
    pub fn epg_q(&self) -> Option<f64> {
        self.eps_alpha.map(|e| if self.zeta + e > 0.0 { self.zeta / (self.zeta + e) } else { 0.0 })
    }
}

// One PG step from ζ_{k−1}; returns (W_k, ζ_k, R_k).
#[inline]
fn pg_step(alpha: f64, zeta_prev: f64, rng: &mut RngStream) -> (f64, f64, f64) {
    let zeta_next = zeta_prev + rng.exp1();
    let r = (zeta_prev / zeta_next).powf(1.0 / alpha);
    let b = beta_variate(1.0 - alpha, alpha, rng);
    (1.0 - b * (1.0 - r), zeta_next, r)
}

/// Advances the stream one stick; returns W_k.
pub fn next_stick(state: &mut StickState, kind: &StickKind, rng: &mut RngStream) -> f64 {
    let k = state.k + 1;
    let w = match kind {
        StickKind::PD { alpha, theta } => {
            let kf = k as f64;
            1.0 - beta_variate(1.0 - alpha, theta + kf * alpha, rng)
        }
        StickKind::PG { alpha, .. } | StickKind::EPG { alpha, .. } => {
            let (w, z, _) = pg_step(alpha.get(), state.zeta_k, rng);
            state.zeta_k = z;
            w
        }
    };
    state.k = k;
    state.sticks.push(w);
    state.product *= w;
    w
}

/// A kind together with its running state.
#[derive(Clone, Debug)]
pub struct StickStream {
    kind: StickKind,
    state: StickState,
}

impl StickStream {
    pub fn new(kind: StickKind, rng: &mut RngStream) -> Result<Self> {
        let state = StickState::init(&kind, rng)?;
        Ok(StickStream { kind, state })
    }

    pub fn kind(&self) -> &StickKind {
        &self.kind
    }

    pub fn state(&self) -> &StickState {
        &self.state
    }

    /// Residual mass ∏ W_l.
    pub fn residual(&self) -> f64 {
        self.state.product
    }

    pub fn next_stick(&mut self, rng: &mut RngStream) -> f64 {
        next_stick(&mut self.state, &self.kind, rng)
    }

    /// Next size-biased weight P̃_k = (1−W_k)∏_{l<k}W_l.
    pub fn next_weight(&mut self, rng: &mut RngStream) -> f64 {
        let before = self.state.product;
        let w = self.next_stick(rng);
        (1.0 - w) * before
    }

    /// Weights until the residual drops below `eps` (or the stick cap).
    pub fn weights_until(&mut self, eps: f64, rng: &mut RngStream) -> Vec<f64> {
        let mut out = Vec::new();
        while self.state.product >= eps && out.len() < MAX_STICKS {
            out.push(self.next_weight(rng));
        }
        if self.state.product >= eps {
            log::warn!("stick cap {MAX_STICKS} reached with residual {}", self.state.product);
        }
        out
    }
}

/// Ranked masses of the kind, truncated once the residual is below `eps`.
/// For EPG the sticks flagged by independent Bernoulli(1−q) coins are merged
/// into one mass.
pub fn stick_stream_to_partition(kind: &StickKind, eps: f64, rng: &mut RngStream) -> Result<MassPartition> {
    if !(eps > 0.0 && eps < 1.0) {
        return param("truncation tolerance must lie in (0,1)");
    }
    let mut stream = StickStream::new(kind.clone(), rng)?;
    let weights = stream.weights_until(eps, rng);
    let residual = stream.residual();
    let weights = match stream.state.epg_q() {
        None => weights,
        Some(q) => {
            let mut merged = 0.0;
            let mut kept = Vec::with_capacity(weights.len());
            for w in weights {
                if rng.uniform() < 1.0 - q {
                    merged += w;
                } else {
                    kept.push(w);
                }
            }
            if merged > 0.0 {
                kept.push(merged);
            }
            kept
        }
    };
    let mut mp = rank(&weights, 0.0, false)?;
    if residual > mp.trunc_tol() {
        mp = MassPartition::new(mp.weights().to_vec(), 0.0, residual)?;
    }
    Ok(mp)
}

/// ζ_0..ζ_k and R_1..R_k of a PG stream.
pub fn r_path(kind: &StickKind, k: usize, rng: &mut RngStream) -> Result<(Vec<f64>, Vec<f64>)> {
    let alpha = match kind {
        StickKind::PG { alpha, .. } => alpha.get(),
        _ => return Err(Error::Unsupported("R sequence is defined for PG kinds".into())),
    };
    if k == 0 {
        return param("k must be >= 1");
    }
    let state = StickState::init(kind, rng)?;
    let mut zetas = vec![state.zeta];
    let mut rs = Vec::with_capacity(k);
    for _ in 0..k {
        let prev = *zetas.last().unwrap();
        let (_, z, r) = pg_step(alpha, prev, rng);
        zetas.push(z);
        rs.push(r);
    }
    Ok((zetas, rs))
}

/// R_1..R_k of a PG stream.
pub fn r_sequence(kind: &StickKind, k: usize, rng: &mut RngStream) -> Result<Vec<f64>> {
    r_path(kind, k, rng).map(|p| p.1)
}
