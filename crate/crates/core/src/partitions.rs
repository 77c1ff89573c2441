//! Random set partitions of [n]: CRP and lazy-stick sampling, the EPG
//! coagulation scheme, COAG/FRAG on mass partitions, merge-size pmf and
//! projection through a discrete base measure.

use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::bridges::SimpleBridge;
use crate::error::{param, Error, Result};
use crate::mass_partition::{rank, MassPartition};
use crate::random::{gamma_variate, RngStream, StableIndex, ZetaSpec};
use crate::sticks::{StickKind, StickStream};

/// Partition of {1..n}. Blocks keep the order they were built in; use
/// [`SetPartition::rgs`] for an order-free key.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SetPartition {
    n: usize,
    blocks: Vec<Vec<usize>>,
}

impl SetPartition {
    /// Checks disjointness and cover of {1..n}.
    pub fn new(n: usize, mut blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = vec![false; n + 1];
        for b in &mut blocks {
            if b.is_empty() {
                return param("blocks must be nonempty");
            }
            b.sort_unstable();
            for &i in b.iter() {
                if i == 0 || i > n || seen[i] {
                    return Err(Error::Consistency(format!("element {i} is out of range or repeated")));
                }
                seen[i] = true;
            }
        }
        if seen[1..].iter().any(|s| !s) {
            return Err(Error::Consistency("blocks do not cover [n]".into()));
        }
        Ok(SetPartition { n, blocks })
    }

    /// Element i+1 goes to block `labels[i]`; blocks are numbered by first
    /// appearance.
    pub fn from_labels(labels: &[usize]) -> Self {
        let mut index = std::collections::HashMap::new();
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        for (i, &l) in labels.iter().enumerate() {
            let j = *index.entry(l).or_insert_with(|| {
                blocks.push(Vec::new());
                blocks.len() - 1
            });
            blocks[j].push(i + 1);
        }
        SetPartition { n: labels.len(), blocks }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.len()).collect()
    }

    /// Restricted growth string: entry i is the index of the block of i+1,
    /// blocks numbered by their least element.
    pub fn rgs(&self) -> Vec<u8> {
        let mut owner = vec![0usize; self.n];
        for (j, b) in self.blocks.iter().enumerate() {
            for &i in b {
                owner[i - 1] = j;
            }
        }
        let mut relabel = vec![u8::MAX; self.blocks.len()];
        let mut next = 0u8;
        owner
            .iter()
            .map(|&j| {
                if relabel[j] == u8::MAX {
                    relabel[j] = next;
                    next = next.saturating_add(1);
                }
                relabel[j]
            })
            .collect()
    }

    /// Blocks ordered by least element.
    pub fn canonical(&self) -> SetPartition {
        let mut blocks = self.blocks.clone();
        blocks.sort_by_key(|b| b[0]);
        SetPartition { n: self.n, blocks }
    }

    pub fn to_json(&self) -> String {
        serde_json_lite(&self.blocks)
    }

    /// n, K_n, then block sizes.
    pub fn csv_row(&self) -> String {
        let mut parts = vec![self.n.to_string(), self.blocks.len().to_string()];
        parts.extend(self.blocks.iter().map(|b| b.len().to_string()));
        parts.join(",")
    }
}

fn serde_json_lite(blocks: &[Vec<usize>]) -> String {
    let inner: Vec<String> = blocks
        .iter()
        .map(|b| format!("[{}]", b.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",")))
        .collect();
    format!("[{}]", inner.join(","))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MergeOutcome {
    pub input_blocks: usize,
    pub merged_count: usize,
    pub output: SetPartition,
}

// CRP for PD(α,θ). An existing table is proposed in proportion to its size
// (a uniform earlier customer) and accepted with probability (n_j−α)/n_j.
fn crp(alpha: f64, theta: f64, n: usize, rng: &mut RngStream) -> Vec<usize> {
    let mut table_of = Vec::with_capacity(n);
    let mut sizes: Vec<usize> = Vec::new();
    for i in 0..n {
        let seated = i as f64;
        let k = sizes.len() as f64;
        let open = if i == 0 { 1.0 } else { (theta + k * alpha) / (seated + theta) };
        let t = if rng.uniform() < open {
            sizes.push(0);
            sizes.len() - 1
        } else {
            loop {
                let c = ((rng.uniform() * seated) as usize).min(i - 1);
                let j = table_of[c];
                let nj = sizes[j] as f64;
                if alpha == 0.0 || rng.uniform() * nj < nj - alpha {
                    break j;
                }
            }
        };
        sizes[t] += 1;
        table_of.push(t);
    }
    table_of
}

// Blocks in order of first appearance carry a size-biased permutation of
// the weights, so block j can be given the j-th stick: customer i joins block
// j with probability P̃_j or opens block K+1 with the residual mass. Only K_n
// sticks are ever drawn. EPG blocks flagged with probability 1−q share one
// label.
fn lazy_sticks(kind: &StickKind, n: usize, rng: &mut RngStream) -> Result<Vec<usize>> {
    let mut stream = StickStream::new(kind.clone(), rng)?;
    let q = stream.state().epg_q();
    const MERGED: usize = usize::MAX;
    let mut cum: Vec<f64> = Vec::new();
    let mut block_label: Vec<usize> = Vec::new();
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let u = rng.uniform();
        let j = cum.partition_point(|&c| c <= u);
        if j == cum.len() {
            let w = stream.next_weight(rng);
            cum.push(cum.last().copied().unwrap_or(0.0) + w);
            let flagged = matches!(q, Some(q) if rng.uniform() < 1.0 - q);
            block_label.push(if flagged { MERGED } else { j });
        }
        labels.push(block_label[j]);
    }
    Ok(labels)
}

/// A partition of [n] with the kind's EPPF. PD uses the CRP; PG and EPG use
/// lazily extended stick streams, which is exact and needs no truncation.
pub fn sample_partition(kind: &StickKind, n: usize, rng: &mut RngStream) -> Result<SetPartition> {
    kind.validate()?;
    if n == 0 {
        return param("n must be >= 1");
    }
    let labels = match kind {
        StickKind::PD { alpha, theta } => crp(*alpha, *theta, n, rng),
        _ => lazy_sticks(kind, n, rng)?,
    };
    Ok(SetPartition::from_labels(&labels))
}

/// Draws (ε_α, ζ), a PG(α, ε_α+ζ) partition, one uniform per block, and
/// merges the blocks whose uniform the simple bridge's inverse sends to its
/// atom. The merged set, if nonempty, becomes the first block.
pub fn epg_coag_partition(alpha: f64, zeta: &ZetaSpec, n: usize, rng: &mut RngStream) -> Result<(SetPartition, MergeOutcome)> {
    StableIndex::new(alpha)?;
    zeta.validate()?;
    if n == 0 {
        return param("n must be >= 1");
    }
    let z = zeta.draw(rng);
    let eps = gamma_variate((1.0 - alpha) / alpha, rng);
    let total = z + eps;
    let q = if total > 0.0 { z / total } else { 0.0 };
    let input = sample_partition(&StickKind::pg(alpha, ZetaSpec::Const(total))?, n, rng)?;
    let lambda = SimpleBridge::new(q, rng.uniform())?.to_bridge();
    let atom = lambda.atoms().first().map(|a| a.0);
    let mut merged: Vec<usize> = Vec::new();
    let mut rest: Vec<Vec<usize>> = Vec::new();
    let mut merged_count = 0;
    for b in input.blocks() {
        let u = rng.uniform();
        if Some(lambda.quantile(u)) == atom {
            merged.extend_from_slice(b);
            merged_count += 1;
        } else {
            rest.push(b.clone());
        }
    }
    let mut blocks = Vec::with_capacity(rest.len() + 1);
    if merged_count > 0 {
        blocks.push(merged);
    }
    blocks.extend(rest);
    let output = SetPartition::new(n, blocks)?;
    let outcome = MergeOutcome { input_blocks: input.block_count(), merged_count, output: output.clone() };
    Ok((output, outcome))
}

fn ln_choose(b: usize, j: usize) -> f64 {
    ln_gamma(b as f64 + 1.0) - ln_gamma(j as f64 + 1.0) - ln_gamma((b - j) as f64 + 1.0)
}

/// Law of the number of merged blocks given K_n = b, for PD(α,1+θ) blocks
/// merged by q ~ Beta((θ+α)/α,(1−α)/α). At α = 0 this is Binomial(b, 1/(θ+1)).
pub fn merge_size_pmf(alpha: f64, theta: f64, b: usize) -> Result<Vec<f64>> {
    if !(0.0..1.0).contains(&alpha) {
        return param(format!("alpha must lie in [0,1), got {alpha}"));
    }
    if !(theta > -alpha) || (alpha == 0.0 && theta <= 0.0) {
        return param(format!("theta must exceed -alpha, got {theta}"));
    }
    let pmf: Vec<f64> = if alpha == 0.0 {
        let p = 1.0 / (theta + 1.0);
        (0..=b)
            .map(|j| (ln_choose(b, j) + j as f64 * p.ln() + (b - j) as f64 * (-p).ln_1p()).exp())
            .collect()
    } else {
        let a = 1.0 / alpha;
        let head = ln_gamma((1.0 + theta) * a) - ln_gamma((theta + alpha) * a) - ln_gamma((1.0 - alpha) * a)
            - ln_gamma((1.0 + theta) * a + b as f64);
        (0..=b)
            .map(|j| {
                let jf = j as f64;
                (ln_choose(b, j) + head + ln_gamma((theta + alpha) * a + (b - j) as f64) + ln_gamma(a + jf - 1.0))
                    .exp()
            })
            .collect()
    };
    Ok(pmf)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SplitCheck {
    /// merge_size_pmf(α, 1−2α, b) on 1..b−1, renormalized
    pub restricted: Vec<f64>,
    /// the β-splitting kernel on 1..b−1, normalized
    pub kernel: Vec<f64>,
    pub max_rel_dev: f64,
}

/// Compares the restricted merge-size pmf at θ = 1−2α with the β-splitting
/// kernel ∝ Γ(β+j+1)Γ(β+b−j+1)/(j!(b−j)!), β = (1−α)/α − 1. At α = 0 the
/// kernel is C(b,j)/(2^b−2).
pub fn beta_splitting_check(alpha: f64, b: usize) -> Result<SplitCheck> {
    if b < 2 {
        return param("b must be >= 2");
    }
    let pmf = merge_size_pmf(alpha, 1.0 - 2.0 * alpha, b)?;
    let inner = &pmf[1..b];
    let s: f64 = inner.iter().sum();
    let restricted: Vec<f64> = inner.iter().map(|p| p / s).collect();
    let ln_kernel: Vec<f64> = (1..b)
        .map(|j| {
            if alpha == 0.0 {
                ln_choose(b, j)
            } else {
                let beta = (1.0 - alpha) / alpha - 1.0;
                ln_gamma(beta + j as f64 + 1.0) + ln_gamma(beta + (b - j) as f64 + 1.0)
                    - ln_gamma(j as f64 + 1.0)
                    - ln_gamma((b - j) as f64 + 1.0)
            }
        })
        .collect();
    let top = ln_kernel.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let raw: Vec<f64> = ln_kernel.iter().map(|l| (l - top).exp()).collect();
    let total: f64 = raw.iter().sum();
    let kernel: Vec<f64> = raw.iter().map(|k| k / total).collect();
    let max_rel_dev = restricted.iter().zip(&kernel).map(|(r, k)| ((r - k) / k).abs()).fold(0.0, f64::max);
    Ok(SplitCheck { restricted, kernel, max_rel_dev })
}

fn require_proper(mp: &MassPartition) -> Result<()> {
    if mp.dust() > mp.trunc_tol() {
        return param(format!("mass partition has dust {} above tolerance {}", mp.dust(), mp.trunc_tol()));
    }
    Ok(())
}

/// Each weight joins the merged block independently with probability 1−q.
pub fn coag_mass(mp: &MassPartition, simple: &SimpleBridge, rng: &mut RngStream) -> Result<MassPartition> {
    require_proper(mp)?;
    let mut merged = 0.0;
    let mut kept = Vec::with_capacity(mp.weights().len() + 1);
    for &w in mp.weights() {
        if rng.uniform() < 1.0 - simple.q {
            merged += w;
        } else {
            kept.push(w);
        }
    }
    if merged > 0.0 {
        kept.push(merged);
    }
    MassPartition::new(kept, mp.dust(), mp.trunc_tol())
}

/// Index of a weight chosen with probability proportional to its size.
pub fn size_biased_index(mp: &MassPartition, rng: &mut RngStream) -> Result<usize> {
    let w = mp.weights();
    if w.is_empty() {
        return param("mass partition has no weights");
    }
    let total: f64 = w.iter().sum();
    let t = rng.uniform() * total;
    let mut acc = 0.0;
    for (i, &x) in w.iter().enumerate() {
        acc += x;
        if t < acc {
            return Ok(i);
        }
    }
    Ok(w.len() - 1)
}

/// Replaces the weight at `pick_index` by its split along `fragmenting`.
pub fn frag_mass(mp: &MassPartition, pick_index: usize, fragmenting: &MassPartition) -> Result<MassPartition> {
    require_proper(fragmenting)?;
    let picked = match mp.weights().get(pick_index) {
        Some(&p) => p,
        None => return param(format!("pick index {pick_index} out of range")),
    };
    let mut out: Vec<f64> = mp.weights().iter().enumerate().filter(|&(i, _)| i != pick_index).map(|(_, &w)| w).collect();
    out.extend(fragmenting.weights().iter().map(|&f| picked * f));
    let tol = mp.trunc_tol() + picked * fragmenting.trunc_tol();
    let mp2 = rank(&out, mp.dust(), false)?;
    MassPartition::new(mp2.weights().to_vec(), mp2.dust(), tol)
}

/// Base-atom index for each of `k` blocks, drawn from `probs`.
pub fn draw_base_labels(probs: &[f64], k: usize, rng: &mut RngStream) -> Result<Vec<usize>> {
    let total: f64 = probs.iter().sum();
    if probs.is_empty() || probs.iter().any(|p| !(*p >= 0.0)) || (total - 1.0).abs() > 1e-9 {
        return param("base weights must be nonnegative and sum to 1");
    }
    Ok((0..k)
        .map(|_| {
            let t = rng.uniform() * total;
            let mut acc = 0.0;
            probs.iter().position(|&p| {
                acc += p;
                t < acc
            })
            .unwrap_or(probs.len() - 1)
        })
        .collect())
}

/// Merges blocks that carry the same base-atom label.
pub fn discrete_base_project(p: &SetPartition, labels: &[usize]) -> Result<SetPartition> {
    if labels.len() != p.block_count() {
        return param(format!("need one label per block: {} labels for {} blocks", labels.len(), p.block_count()));
    }
    let mut per_element = vec![0usize; p.n()];
    for (b, &l) in p.blocks().iter().zip(labels) {
        for &i in b {
            per_element[i - 1] = l;
        }
    }
    Ok(SetPartition::from_labels(&per_element))
}
