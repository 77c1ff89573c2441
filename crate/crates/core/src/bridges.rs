//! Exchangeable bridges on [0,1]: evaluation, right-continuous inverse,
//! composition and the PG/EPG/flow/posterior/fragmentation constructions.

use serde::Serialize;

use crate::error::{param, Error, Result};
use crate::mass_partition::{rank, MassPartition};
use crate::random::{gamma_variate, RngStream, ZetaSpec};
use crate::sticks::{StickKind, StickStream};

const MASS_SLACK: f64 = 1e-9;

/// F(y) = dust·y + Σ_{u_k ≤ y} p_k. Atoms are kept sorted by location.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Bridge {
    atoms: Vec<(f64, f64)>,
    dust: f64,
    #[serde(skip)]
    cum: Vec<f64>,
}

/// q·y + (1−q)·1{atom ≤ y}.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SimpleBridge {
    pub q: f64,
    pub atom: f64,
}

impl SimpleBridge {
    pub fn new(q: f64, atom: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&q) || !(0.0..=1.0).contains(&atom) {
            return param(format!("simple bridge needs q and atom in [0,1], got ({q}, {atom})"));
        }
        Ok(SimpleBridge { q, atom })
    }

    pub fn eval(&self, y: f64) -> f64 {
        self.q * y + if self.atom <= y { 1.0 - self.q } else { 0.0 }
    }

    pub fn to_bridge(&self) -> Bridge {
        let atoms = if self.q < 1.0 { vec![(self.atom, 1.0 - self.q)] } else { vec![] };
        Bridge::from_parts(atoms, self.q)
    }
}

impl Bridge {
    pub fn new(atoms: Vec<(f64, f64)>, dust: f64) -> Result<Self> {
        if atoms.iter().any(|&(u, p)| !(0.0..=1.0).contains(&u) || !(p > 0.0)) || !(dust >= 0.0) {
            return param("atoms need locations in [0,1] and positive weights; dust must be >= 0");
        }
        let total: f64 = atoms.iter().map(|a| a.1).sum::<f64>() + dust;
        if total > 1.0 + MASS_SLACK {
            return Err(Error::Consistency(format!("bridge mass {total} exceeds 1")));
        }
        Ok(Bridge::from_parts(atoms, dust))
    }

    fn from_parts(mut atoms: Vec<(f64, f64)>, dust: f64) -> Self {
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut cum = Vec::with_capacity(atoms.len() + 1);
        cum.push(0.0);
        let mut acc = 0.0;
        for &(_, p) in &atoms {
            acc += p;
            cum.push(acc);
        }
        Bridge { atoms, dust, cum }
    }

    /// The uniform bridge y ↦ y.
    pub fn identity() -> Self {
        Bridge::from_parts(Vec::new(), 1.0)
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn dust(&self) -> f64 {
        self.dust
    }

    pub fn atom_mass(&self) -> f64 {
        *self.cum.last().unwrap()
    }

    /// Mass lost to truncation, 1 − F(1).
    pub fn deficit(&self) -> f64 {
        (1.0 - self.dust - self.atom_mass()).max(0.0)
    }

    pub fn eval(&self, y: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&y) {
            return param(format!("bridge argument must lie in [0,1], got {y}"));
        }
        Ok(self.eval_unchecked(y))
    }

    #[inline]
    fn eval_unchecked(&self, y: f64) -> f64 {
        let j = self.atoms.partition_point(|a| a.0 <= y);
        self.dust * y + self.cum[j]
    }

    // inf{y : F(y) ≥ t} (strict = false) or inf{y : F(y) > t} (strict = true); 1 if never reached
    fn crossing(&self, t: f64, strict: bool) -> f64 {
        let hit = |v: f64| if strict { v > t } else { v >= t };
        let d = self.dust;
        let k = self.atoms.len();
        // first atom index whose inclusive value meets the target
        let (mut lo, mut hi) = (0usize, k);
        while lo < hi {
            let mid = (lo + hi) / 2;
            if hit(d * self.atoms[mid].0 + self.cum[mid + 1]) {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        let left = if lo == 0 { 0.0 } else { self.atoms[lo - 1].0 };
        let right = if lo == k { 1.0 } else { self.atoms[lo].0 };
        if d > 0.0 {
            let y0 = ((t - self.cum[lo]) / d).max(left);
            if y0 < right || (lo == k && y0 <= 1.0) {
                return y0;
            }
        } else if lo == 0 && hit(self.cum[0]) {
            return 0.0;
        }
        right
    }

    /// Right-continuous inverse inf{v : F(v) > r}.
    pub fn quantile(&self, r: f64) -> f64 {
        self.crossing(r, true)
    }

    /// inf{v : F(v) ≥ u}; the point where an outer atom at u lands under composition.
    pub fn first_reach(&self, u: f64) -> f64 {
        self.crossing(u, false)
    }

    /// Ranked atom masses with the bridge dust.
    pub fn mass_partition(&self) -> Result<MassPartition> {
        let w: Vec<f64> = self.atoms.iter().map(|a| a.1).collect();
        let mp = rank(&w, self.dust, false)?;
        if self.deficit() > mp.trunc_tol() {
            MassPartition::new(mp.weights().to_vec(), mp.dust(), self.deficit())
        } else {
            Ok(mp)
        }
    }

    /// Mass of one atom picked with probability proportional to its weight
    /// (dust and truncation deficit excluded).
    pub fn first_pick(&self, rng: &mut RngStream) -> f64 {
        let total = self.atom_mass();
        if total <= 0.0 {
            return 0.0;
        }
        let t = rng.uniform() * total;
        let j = self.cum.partition_point(|&c| c <= t).clamp(1, self.atoms.len());
        self.atoms[j - 1].1
    }

    pub fn largest_atom(&self) -> f64 {
        self.atoms.iter().map(|a| a.1).fold(0.0, f64::max)
    }

    /// Atom masses in location order, then dust, as JSON `{atoms, dust}`.
    pub fn to_json(&self) -> String {
        let atoms: Vec<String> = self
            .atoms
            .iter()
            .map(|&(u, p)| format!("[{},{}]", crate::fmt_num(u), crate::fmt_num(p)))
            .collect();
        format!("{{\"atoms\":[{}],\"dust\":{}}}", atoms.join(","), crate::fmt_num(self.dust))
    }
}

/// outer ∘ inner. Outer atoms landing in an inner atom's jump are merged
/// into that atom.
pub fn compose(outer: &Bridge, inner: &Bridge) -> Bridge {
    let mut atoms: Vec<(f64, f64)> = Vec::with_capacity(outer.atoms.len() + inner.atoms.len());
    let reach = inner.dust + inner.atom_mass();
    for &(u, p) in &outer.atoms {
        if u <= reach {
            atoms.push((inner.first_reach(u), p));
        }
    }
    if outer.dust > 0.0 {
        for &(v, w) in &inner.atoms {
            atoms.push((v, outer.dust * w));
        }
    }
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
    for (u, p) in atoms {
        match merged.last_mut() {
            Some(last) if last.0 == u => last.1 += p,
            _ => merged.push((u, p)),
        }
    }
    Bridge::from_parts(merged, outer.dust * inner.dust)
}

pub fn compose_simple(outer: &Bridge, inner: &SimpleBridge) -> Bridge {
    compose(outer, &inner.to_bridge())
}

fn bridge_from_weights(weights: Vec<f64>, rng: &mut RngStream) -> Bridge {
    let atoms = weights.into_iter().filter(|&w| w > 0.0).map(|w| (rng.uniform(), w)).collect();
    Bridge::from_parts(atoms, 0.0)
}

/// The bridge of a stick kind with iid uniform atom locations, truncated
/// once the residual mass is below `trunc`. EPG bridges are built as the
/// PG(α, ε_α+ζ) bridge composed with the simple bridge λ.
pub fn build_bridge(kind: &StickKind, trunc: f64, rng: &mut RngStream) -> Result<Bridge> {
    if !(trunc > 0.0 && trunc < 1.0) {
        return param("truncation tolerance must lie in (0,1)");
    }
    let mut stream = StickStream::new(kind.clone(), rng)?;
    let q = stream.state().epg_q();
    let weights = stream.weights_until(trunc, rng);
    let base = bridge_from_weights(weights, rng);
    Ok(match q {
        None => base,
        Some(q) => {
            let lambda = SimpleBridge { q, atom: rng.uniform() };
            compose_simple(&base, &lambda)
        }
    })
}

/// The EPG bridge in the two-term form
/// (1−P†)·Q_{α,ζ}(y) + P†·1{U₁ ≤ y}, built from the same draws as
/// [`build_bridge`] would use, so both forms can be compared pathwise.
pub fn epg_bridge_pair(alpha: f64, zeta: &ZetaSpec, trunc: f64, rng: &mut RngStream) -> Result<(Bridge, Bridge)> {
    let kind = StickKind::epg(alpha, zeta.clone())?;
    let composed = build_bridge(&kind, trunc, &mut rng.clone())?;
    // replay the same draws
    let mut stream = StickStream::new(kind, rng)?;
    let q = stream.state().epg_q().expect("EPG stream");
    let weights = stream.weights_until(trunc, rng);
    let base = bridge_from_weights(weights, rng);
    let u1 = rng.uniform();
    let lo = q * u1;
    let hi = lo + 1.0 - q;
    let mut big = 0.0;
    let mut rest = Vec::new();
    for &(u, p) in base.atoms() {
        if u >= lo && u <= hi {
            big += p;
        } else {
            // the location λ^{-1} assigns outside the jump
            let y = if u < lo { u / q } else { (u - (1.0 - q)) / q };
            rest.push((y, p));
        }
    }
    let mut atoms = rest;
    if big > 0.0 {
        atoms.push((u1, big));
    }
    Ok((composed, Bridge::from_parts(atoms, 0.0)))
}

/// Simple-bridge dusts q_{α,1..n} of the EPG q-chain started at a ζ draw.
pub(crate) fn q_factors(alpha: f64, zeta0: f64, n: usize, rng: &mut RngStream) -> Vec<f64> {
    let shape = (1.0 - alpha) / alpha;
    let mut z = zeta0;
    let mut qs = Vec::with_capacity(n);
    for _ in 0..n {
        let eps = gamma_variate(shape, rng);
        qs.push(if z + eps > 0.0 { z / (z + eps) } else { 0.0 });
        z += eps + rng.exp1();
    }
    qs
}

/// Λ^{(n)} = λ̃_n ∘ ⋯ ∘ λ̃_1 with the q-chain dusts and iid uniform atoms.
pub fn flow_bridge(alpha: f64, zeta: &ZetaSpec, n: usize, rng: &mut RngStream) -> Result<Bridge> {
    crate::random::StableIndex::new(alpha)?;
    zeta.validate()?;
    if n == 0 {
        return param("flow needs n >= 1");
    }
    let z0 = zeta.draw(rng);
    let qs = q_factors(alpha, z0, n, rng);
    let mut flow = Bridge::identity();
    for q in qs {
        let lambda = SimpleBridge { q, atom: rng.uniform() };
        flow = compose(&lambda.to_bridge(), &flow);
    }
    Ok(flow)
}

/// Dirichlet(θ/α+k, (n₁−α)/α, …, (n_k−α)/α) masses; the first coordinate is dust.
pub fn posterior_bridge(alpha: f64, theta: f64, block_sizes: &[usize], rng: &mut RngStream) -> Result<Bridge> {
    crate::random::StableIndex::new(alpha)?;
    if !(theta > -alpha) {
        return param("theta must exceed -alpha");
    }
    if block_sizes.iter().any(|&n| n == 0) {
        return param("block sizes must be >= 1");
    }
    let k = block_sizes.len() as f64;
    let g0 = gamma_variate(theta / alpha + k, rng);
    let gs: Vec<f64> = block_sizes.iter().map(|&n| gamma_variate((n as f64 - alpha) / alpha, rng)).collect();
    let total = g0 + gs.iter().sum::<f64>();
    let atoms = gs.into_iter().map(|g| (rng.uniform(), g / total)).collect();
    Ok(Bridge::from_parts(atoms, g0 / total))
}

/// Σ_k (1−W_{k,δ})∏_{l<k}W_{l,δ} P^{(k)}_{α,−αδ} with GEM(αδ,θ) weights and
/// iid PD(α,−αδ) bridges. PD(α,−α) is the point mass at a uniform location.
pub fn pitman_frag_bridge(alpha: f64, theta: f64, delta: f64, trunc: f64, rng: &mut RngStream) -> Result<Bridge> {
    crate::random::StableIndex::new(alpha)?;
    if !(0.0..=1.0).contains(&delta) {
        return param("delta must lie in [0,1]");
    }
    if !(trunc > 0.0 && trunc < 1.0) {
        return param("truncation tolerance must lie in (0,1)");
    }
    let outer = StickKind::pd(alpha * delta, theta)?;
    let inner = if delta < 1.0 { Some(StickKind::pd(alpha, -alpha * delta)?) } else { None };
    let mut stream = StickStream::new(outer, rng)?;
    let mut atoms = Vec::new();
    for w in stream.weights_until(trunc, rng) {
        match &inner {
            None => atoms.push((rng.uniform(), w)),
            Some(kind) => {
                let b = build_bridge(kind, trunc, rng)?;
                atoms.extend(b.atoms().iter().map(|&(u, p)| (u, w * p)));
            }
        }
    }
    Ok(Bridge::from_parts(atoms, 0.0))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NtrPath {
    pub zeta: f64,
    /// Poisson jump times in (0, horizon]
    pub times: Vec<f64>,
    /// ∏_{l≤k} R_l after the k-th jump
    pub levels: Vec<f64>,
}

impl NtrPath {
    /// Σ(t), starting from 1.
    pub fn level_at(&self, t: f64) -> f64 {
        let k = self.times.partition_point(|&s| s <= t);
        if k == 0 {
            1.0
        } else {
            self.levels[k - 1]
        }
    }
}

/// Multiplicative step process with unit-rate Poisson jump times and
/// levels ∏ R_l from a PG(α,ζ) R-sequence.
pub fn ntr_fragmenter(alpha: f64, zeta: &ZetaSpec, horizon: f64, rng: &mut RngStream) -> Result<NtrPath> {
    crate::random::StableIndex::new(alpha)?;
    zeta.validate()?;
    if !(horizon > 0.0) {
        return param("horizon must be > 0");
    }
    let z0 = zeta.draw(rng);
    let mut z = z0;
    let mut level = 1.0;
    let mut t = rng.exp1();
    let (mut times, mut levels) = (Vec::new(), Vec::new());
    while t <= horizon {
        let next = z + rng.exp1();
        level *= (z / next).powf(1.0 / alpha);
        z = next;
        times.push(t);
        levels.push(level);
        t += rng.exp1();
    }
    Ok(NtrPath { zeta: z0, times, levels })
}
