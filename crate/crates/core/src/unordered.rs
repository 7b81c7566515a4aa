//! Products over abstract index sets as nets over finite subsets: the
//! Cauchy-style criterion, positive/negative index splitting, countable
//! support, cofinal chains, decompositions, and the equivalence suite.
//!
//! Convergence of the net forces countable support, so the index universe is
//! realized as the naturals, the nonzero integers, or an explicit finite
//! set. Net convergence is decided analytically from the sign-split of the
//! log terms: the worst complement subset keeps exactly the positive (or
//! exactly the negative) log terms, so the criterion reduces to both
//! one-sided tail sums settling. No subset enumeration is involved.

use std::collections::HashSet;

use rand::rngs::SmallRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{rel_dev, NeumaierSum};
use crate::seq::{parse_seq, PosSeq, SeqExpr};
use crate::verdict::{classify_log_window, Verdict, VerdictKind};

/// The realized index universe.
#[derive(Clone, Debug)]
pub enum Universe {
    Naturals,
    NonzeroIntegers,
    Explicit(Vec<i64>),
}

impl Universe {
    /// Index at 1-based enumeration position, if realized.
    pub fn index_at(&self, position: u64) -> Option<i64> {
        match self {
            Universe::Naturals => Some(position as i64),
            Universe::NonzeroIntegers => {
                let k = position.div_ceil(2) as i64;
                Some(if position % 2 == 1 { k } else { -k })
            }
            Universe::Explicit(indices) => indices.get(position as usize - 1).copied(),
        }
    }

    pub fn contains(&self, index: i64) -> bool {
        match self {
            Universe::Naturals => index >= 1,
            Universe::NonzeroIntegers => index != 0,
            Universe::Explicit(indices) => indices.contains(&index),
        }
    }

    /// Number of indices when the universe is finite.
    pub fn len(&self) -> Option<u64> {
        match self {
            Universe::Explicit(indices) => Some(indices.len() as u64),
            _ => None,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == Some(0)
    }

    pub fn is_finite(&self) -> bool {
        self.len().is_some()
    }
}

#[derive(Clone)]
enum FamilySource {
    Expr(std::sync::Arc<SeqExpr>),
    Explicit(std::sync::Arc<Vec<(i64, f64)>>),
    Seq(PosSeq),
}

/// A collection of positive reals indexed by an abstract set.
#[derive(Clone)]
pub struct IndexedFamily {
    universe: Universe,
    source: FamilySource,
}

impl IndexedFamily {
    /// Rule-based family over the naturals or the nonzero integers; the
    /// expression variable `n` takes the (possibly negative) index value.
    pub fn from_expr_str(universe: Universe, text: &str) -> Result<Self> {
        if matches!(universe, Universe::Explicit(_)) {
            return Err(Error::InvalidInput(
                "explicit universes take explicit values".into(),
            ));
        }
        Ok(IndexedFamily {
            universe,
            source: FamilySource::Expr(std::sync::Arc::new(parse_seq(text)?)),
        })
    }

    /// Finite family from explicit `(index, value)` pairs.
    pub fn from_pairs(pairs: Vec<(i64, f64)>) -> Result<Self> {
        let mut seen = HashSet::new();
        for &(i, v) in &pairs {
            if !seen.insert(i) {
                return Err(Error::InvalidInput(format!("duplicate index {i}")));
            }
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::eval_signed(
                    i,
                    format!("non-positive value {v}"),
                ));
            }
        }
        let universe = Universe::Explicit(pairs.iter().map(|&(i, _)| i).collect());
        Ok(IndexedFamily {
            universe,
            source: FamilySource::Explicit(std::sync::Arc::new(pairs)),
        })
    }

    /// View an ordinary positive sequence as a family over the naturals.
    pub fn from_seq(seq: PosSeq) -> Self {
        IndexedFamily {
            universe: Universe::Naturals,
            source: FamilySource::Seq(seq),
        }
    }

    pub fn universe(&self) -> &Universe {
        &self.universe
    }

    pub fn term(&self, index: i64) -> Result<f64> {
        if !self.universe.contains(index) {
            return Err(Error::eval_signed(index, "index outside the universe"));
        }
        let v = match &self.source {
            FamilySource::Expr(e) => e.eval(index as f64),
            FamilySource::Explicit(pairs) => {
                pairs
                    .iter()
                    .find(|&&(i, _)| i == index)
                    .map(|&(_, v)| v)
                    .ok_or_else(|| Error::eval_signed(index, "index outside the universe"))?
            }
            FamilySource::Seq(s) => {
                if index < 1 {
                    return Err(Error::eval_signed(index, "index outside the universe"));
                }
                s.term(index as u64)?
            }
        };
        if !v.is_finite() {
            return Err(Error::eval_signed(index, format!("non-finite value {v}")));
        }
        if v <= 0.0 {
            return Err(Error::eval_signed(index, format!("non-positive value {v}")));
        }
        Ok(v)
    }

    pub fn log_term(&self, index: i64) -> Result<f64> {
        Ok(self.term(index)?.ln())
    }

    fn log_at_position(&self, position: u64) -> Result<f64> {
        let index = self
            .universe
            .index_at(position)
            .ok_or_else(|| Error::eval(position, "position beyond the finite universe"))?;
        self.log_term(index)
    }

    fn realized_positions(&self, horizon: u64) -> u64 {
        match self.universe.len() {
            Some(len) => len.min(horizon),
            None => horizon,
        }
    }
}

/// A finite subset of the index universe.
#[derive(Clone, Debug)]
pub struct FiniteSubset(Vec<i64>);

impl FiniteSubset {
    pub fn new(mut indices: Vec<i64>) -> Result<Self> {
        indices.sort_unstable();
        for w in indices.windows(2) {
            if w[0] == w[1] {
                return Err(Error::InvalidInput(format!("duplicate index {}", w[0])));
            }
        }
        Ok(FiniteSubset(indices))
    }

    pub fn indices(&self) -> &[i64] {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// `prod_{i in E} a_i` in the log domain; the empty product is 1.
pub fn net_partial(fam: &IndexedFamily, subset: &FiniteSubset) -> Result<f64> {
    let mut acc = NeumaierSum::new();
    for &i in subset.indices() {
        acc.add(fam.log_term(i)?);
    }
    Ok(acc.value().exp())
}

/// One-sided log-mass trajectories over the enumeration.
struct SignSplit {
    positions: u64,
    pos_total: f64,
    neg_total: f64,
    window_pos: Vec<f64>,
    window_neg: Vec<f64>,
}

fn sign_split(fam: &IndexedFamily, horizon: u64) -> Result<SignSplit> {
    let positions = fam.realized_positions(horizon);
    let window_from = positions - positions / 2;
    let mut pos = NeumaierSum::new();
    let mut neg = NeumaierSum::new();
    let mut window_pos = Vec::with_capacity((positions / 2 + 1) as usize);
    let mut window_neg = Vec::with_capacity((positions / 2 + 1) as usize);
    for t in 1..=positions {
        let l = fam.log_at_position(t)?;
        if l > 0.0 {
            pos.add(l);
        } else {
            neg.add(l);
        }
        if t >= window_from {
            window_pos.push(pos.value());
            window_neg.push(neg.value());
        }
    }
    Ok(SignSplit {
        positions,
        pos_total: pos.value(),
        neg_total: neg.value(),
        window_pos,
        window_neg,
    })
}

fn finite_family_verdict(fam: &IndexedFamily, eps: f64) -> Result<Verdict> {
    let len = fam.universe.len().expect("finite universe");
    let mut acc = NeumaierSum::new();
    for t in 1..=len {
        acc.add(fam.log_at_position(t)?);
    }
    Ok(Verdict {
        kind: VerdictKind::Converges,
        limit_estimate: Some(acc.value().exp()),
        liminf_estimate: None,
        limsup_estimate: None,
        n_used: len,
        eps,
        evidence: "finite index set; finite products converge by convention".into(),
    })
}

/// Net convergence verdict via the complement-subset criterion.
///
/// The worst finite subset of a complement keeps exactly the positive (or
/// exactly the negative) log terms, so the net converges precisely when both
/// one-sided log masses settle.
pub fn unordered_converges(fam: &IndexedFamily, eps: f64, horizon: u64) -> Result<Verdict> {
    if fam.universe.is_finite() {
        return finite_family_verdict(fam, eps);
    }
    let split = sign_split(fam, horizon)?;
    let vp = classify_log_window(&split.window_pos, split.positions, eps);
    let vm = classify_log_window(&split.window_neg, split.positions, eps);
    let pos_settled = vp.kind == VerdictKind::Converges;
    let neg_settled = vm.kind == VerdictKind::Converges;
    let evidence = format!(
        "positive log mass {:.6e} ({}), negative log mass {:.6e} ({})",
        split.pos_total,
        if pos_settled { "settled" } else { "unbounded" },
        split.neg_total,
        if neg_settled { "settled" } else { "unbounded" },
    );

    let kind = match (pos_settled, neg_settled) {
        (true, true) => VerdictKind::Converges,
        (false, true) => VerdictKind::DivergesToInfinity,
        (true, false) => VerdictKind::DivergesToZero,
        (false, false) => VerdictKind::Oscillates,
    };
    let total = split.pos_total + split.neg_total;
    Ok(Verdict {
        kind,
        limit_estimate: if kind == VerdictKind::Converges {
            Some(total.exp())
        } else {
            None
        },
        // realized extremes of subset products: all-negative and
        // all-positive complements
        liminf_estimate: if kind == VerdictKind::Oscillates {
            Some(split.neg_total.exp())
        } else {
            None
        },
        limsup_estimate: if kind == VerdictKind::Oscillates {
            Some(split.pos_total.exp())
        } else {
            None
        },
        n_used: split.positions,
        eps,
        evidence,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SplitReport {
    /// Verdict for the product over `I1 = {i : a_i > 1}`.
    pub over_one: Verdict,
    /// Verdict for the product over `I2 = {i : a_i < 1}`.
    pub under_one: Verdict,
    /// Whole-net verdict.
    pub net: Verdict,
    /// `prod_I = prod_I1 * prod_I2` within relative 1e-9, when all converge.
    pub identity_ok: Option<bool>,
    pub identity_rel_dev: Option<f64>,
}

/// Convergence over the positive and negative index classes separately,
/// with the product identity check.
pub fn split_convergence(fam: &IndexedFamily, eps: f64, horizon: u64) -> Result<SplitReport> {
    let net = unordered_converges(fam, eps, horizon)?;
    if fam.universe.is_finite() {
        let len = fam.universe.len().unwrap();
        let mut p = NeumaierSum::new();
        let mut m = NeumaierSum::new();
        for t in 1..=len {
            let l = fam.log_at_position(t)?;
            if l > 0.0 {
                p.add(l);
            } else {
                m.add(l);
            }
        }
        let mk = |value: f64, what: &str| Verdict {
            kind: VerdictKind::Converges,
            limit_estimate: Some(value),
            liminf_estimate: None,
            limsup_estimate: None,
            n_used: len,
            eps,
            evidence: format!("finite {what} class"),
        };
        let over = mk(p.value().exp(), "I1");
        let under = mk(m.value().exp(), "I2");
        let dev = rel_dev(
            over.limit_estimate.unwrap() * under.limit_estimate.unwrap(),
            net.limit_estimate.unwrap(),
        );
        return Ok(SplitReport {
            over_one: over,
            under_one: under,
            net,
            identity_ok: Some(dev <= 1e-9),
            identity_rel_dev: Some(dev),
        });
    }

    let split = sign_split(fam, horizon)?;
    let over_one = {
        let v = classify_log_window(&split.window_pos, split.positions, eps);
        Verdict {
            kind: if v.kind == VerdictKind::Converges {
                VerdictKind::Converges
            } else {
                VerdictKind::DivergesToInfinity
            },
            limit_estimate: if v.kind == VerdictKind::Converges {
                Some(split.pos_total.exp())
            } else {
                None
            },
            liminf_estimate: None,
            limsup_estimate: None,
            n_used: split.positions,
            eps,
            evidence: format!("product over I1; positive log mass {:.6e}", split.pos_total),
        }
    };
    let under_one = {
        let v = classify_log_window(&split.window_neg, split.positions, eps);
        Verdict {
            kind: if v.kind == VerdictKind::Converges {
                VerdictKind::Converges
            } else {
                VerdictKind::DivergesToZero
            },
            limit_estimate: if v.kind == VerdictKind::Converges {
                Some(split.neg_total.exp())
            } else {
                None
            },
            liminf_estimate: None,
            limsup_estimate: None,
            n_used: split.positions,
            eps,
            evidence: format!("product over I2; negative log mass {:.6e}", split.neg_total),
        }
    };

    let (identity_ok, identity_rel_dev) = match (
        &over_one.limit_estimate,
        &under_one.limit_estimate,
        &net.limit_estimate,
    ) {
        (Some(a), Some(b), Some(p)) => {
            let dev = rel_dev(a * b, *p);
            (Some(dev <= 1e-9), Some(dev))
        }
        _ => (None, None),
    };
    Ok(SplitReport {
        over_one,
        under_one,
        net,
        identity_ok,
        identity_rel_dev,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SupportEntry {
    pub n: u32,
    /// Size of `G_n = {i : a_i < 1 - 1/n}` up to the horizon.
    pub g_size: u64,
    /// Size of `H_n = {i : a_i > 1 + 1/n}` up to the horizon.
    pub h_size: u64,
    /// Whether no new member appeared in the second half of the scan.
    pub g_stable: bool,
    pub h_stable: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SupportReport {
    pub horizon: u64,
    pub entries: Vec<SupportEntry>,
    pub note: String,
}

/// Realized sizes of the threshold sets `G_n` and `H_n`; for a convergent
/// net these are finite, which makes the support countable.
pub fn countable_support(fam: &IndexedFamily, horizon: u64, grid: &[u32]) -> Result<SupportReport> {
    let positions = fam.realized_positions(horizon);
    let mut entries: Vec<SupportEntry> = grid
        .iter()
        .map(|&n| SupportEntry {
            n,
            g_size: 0,
            h_size: 0,
            g_stable: true,
            h_stable: true,
        })
        .collect();
    let mut g_last = vec![0u64; grid.len()];
    let mut h_last = vec![0u64; grid.len()];

    for t in 1..=positions {
        let index = fam.universe.index_at(t).unwrap();
        let a = fam.term(index)?;
        for (k, &n) in grid.iter().enumerate() {
            let gap = 1.0 / n as f64;
            if a < 1.0 - gap {
                entries[k].g_size += 1;
                g_last[k] = t;
            }
            if a > 1.0 + gap {
                entries[k].h_size += 1;
                h_last[k] = t;
            }
        }
    }
    for (k, e) in entries.iter_mut().enumerate() {
        e.g_stable = g_last[k] <= positions / 2;
        e.h_stable = h_last[k] <= positions / 2;
    }
    let any_growing = entries.iter().any(|e| !e.g_stable || !e.h_stable);
    Ok(SupportReport {
        horizon: positions,
        entries,
        note: if any_growing {
            "some threshold sets still grow in the second half of the scan; finiteness not certified"
                .into()
        } else {
            "all threshold sets stabilized within the first half of the scan".into()
        },
    })
}

/// Cofinal chains of finite subsets, described by position rules.
#[derive(Clone, Debug)]
pub enum ChainRule {
    /// `F_t` = the first `t` enumerated positions.
    Prefix,
    /// Even positions up to `2t` plus odd positions up to `t`.
    EvensOdds,
    /// Residue classes advancing at staggered speeds.
    Mod(u32),
    /// Explicit increasing chain of index sets.
    Explicit(Vec<Vec<i64>>),
}

impl ChainRule {
    pub fn parse(text: &str) -> Result<Self> {
        if text == "prefix" {
            return Ok(ChainRule::Prefix);
        }
        if text == "evens-odds" {
            return Ok(ChainRule::EvensOdds);
        }
        if let Some(k) = text.strip_prefix("mod:") {
            let k: u32 = k
                .parse()
                .map_err(|_| Error::InvalidInput(format!("bad chain rule `{text}`")))?;
            if k < 2 {
                return Err(Error::InvalidInput("mod chain needs k >= 2".into()));
            }
            return Ok(ChainRule::Mod(k));
        }
        Err(Error::InvalidInput(format!(
            "unknown chain rule `{text}` (expected prefix, evens-odds, or mod:k)"
        )))
    }

    /// Positions newly added at step `t`.
    fn delta(&self, t: u64) -> Vec<u64> {
        match self {
            ChainRule::Prefix => vec![t],
            ChainRule::EvensOdds => {
                let mut d = vec![2 * t];
                if t % 2 == 1 {
                    d.push(t);
                }
                d
            }
            ChainRule::Mod(k) => {
                let k = *k as u64;
                let mut d = Vec::new();
                for r in 0..k {
                    // residue class r (positions r+1, r+1+k, ...) advances
                    // r+1 positions per step
                    let hi = (r + 1) * t;
                    let lo = (r + 1) * (t - 1);
                    let m_min = if lo <= r { 0 } else { (lo - r - 1) / k + 1 };
                    let mut p = r + 1 + m_min * k;
                    while p <= hi {
                        d.push(p);
                        p += k;
                    }
                }
                d
            }
            ChainRule::Explicit(_) => unreachable!("explicit chains handled separately"),
        }
    }
}

/// Limit of the net along a cofinal chain of finite subsets.
pub fn cofinal_chain_limit(
    fam: &IndexedFamily,
    chain: &ChainRule,
    steps: u64,
    eps: f64,
) -> Result<Verdict> {
    if let ChainRule::Explicit(sets) = chain {
        return explicit_chain_limit(fam, sets, eps);
    }
    if steps < 16 {
        return Err(Error::InvalidInput("chain needs at least 16 steps".into()));
    }
    let mut acc = NeumaierSum::new();
    let mut window = Vec::with_capacity((steps / 2 + 1) as usize);
    let window_from = steps - steps / 2;
    let mut seen = 0u64;
    for t in 1..=steps {
        for p in chain.delta(t) {
            // finite universes simply stop growing
            if let Some(len) = fam.universe.len() {
                if p > len {
                    continue;
                }
            }
            acc.add(fam.log_at_position(p)?);
            seen += 1;
        }
        if t >= window_from {
            window.push(acc.value());
        }
    }
    let mut v = classify_log_window(&window, steps, eps);
    v.evidence = format!("{} positions realized along the chain; {}", seen, v.evidence);
    Ok(v)
}

fn explicit_chain_limit(fam: &IndexedFamily, sets: &[Vec<i64>], eps: f64) -> Result<Verdict> {
    if sets.is_empty() {
        return Err(Error::InvalidInput("empty chain".into()));
    }
    let mut acc = NeumaierSum::new();
    let mut current: HashSet<i64> = HashSet::new();
    let mut window = Vec::new();
    for (t, set) in sets.iter().enumerate() {
        for &i in set {
            if !current.contains(&i) {
                acc.add(fam.log_term(i)?);
            }
        }
        let next: HashSet<i64> = set.iter().copied().collect();
        if !current.is_subset(&next) {
            return Err(Error::InvalidInput(format!(
                "chain is not increasing at step {}",
                t + 1
            )));
        }
        current = next;
        window.push(acc.value());
    }
    // cofinality check up to the realized cover
    let max_pos_covered = current.len() as u64;
    let mut missing = None;
    for t in 1..=max_pos_covered {
        if let Some(idx) = fam.universe.index_at(t) {
            if !current.contains(&idx) {
                missing = Some(idx);
                break;
            }
        }
    }
    let mut v = classify_log_window(&window, sets.len() as u64, eps);
    if let Some(idx) = missing {
        v.kind = VerdictKind::Inconclusive;
        v.evidence = format!("chain is not cofinal up to the horizon: index {idx} never enters");
        v.limit_estimate = None;
    }
    Ok(v)
}

/// Partition rules assigning each enumerated position to a block.
#[derive(Clone, Debug)]
pub enum PartitionRule {
    /// Everything in one block: the ordered product.
    Single,
    /// Residue classes mod k.
    Mod(u32),
    /// Block 1 = odd positions, block i = positions `2^(i-1) * odd`.
    /// Isolating one sign class this way witnesses divergence for
    /// conditionally structured families.
    IsolateOdds,
    Explicit(Vec<Vec<i64>>),
}

impl PartitionRule {
    pub fn parse(text: &str) -> Result<Self> {
        if text == "single" {
            return Ok(PartitionRule::Single);
        }
        if text == "isolate-odds" {
            return Ok(PartitionRule::IsolateOdds);
        }
        if let Some(k) = text.strip_prefix("mod:") {
            let k: u32 = k
                .parse()
                .map_err(|_| Error::InvalidInput(format!("bad partition rule `{text}`")))?;
            if k < 2 {
                return Err(Error::InvalidInput("mod partition needs k >= 2".into()));
            }
            return Ok(PartitionRule::Mod(k));
        }
        Err(Error::InvalidInput(format!(
            "unknown partition rule `{text}` (expected single, mod:k, or isolate-odds)"
        )))
    }

    /// Block id (1-based) of an enumerated position.
    fn block_of(&self, position: u64) -> u32 {
        match self {
            PartitionRule::Single => 1,
            PartitionRule::Mod(k) => ((position - 1) % *k as u64) as u32 + 1,
            PartitionRule::IsolateOdds => position.trailing_zeros() + 1,
            PartitionRule::Explicit(_) => unreachable!("explicit partitions handled separately"),
        }
    }

    fn block_count(&self, positions: u64) -> u32 {
        match self {
            PartitionRule::Single => 1,
            PartitionRule::Mod(k) => *k,
            PartitionRule::IsolateOdds => 64 - positions.leading_zeros(),
            PartitionRule::Explicit(blocks) => blocks.len() as u32,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BlockReport {
    pub block: u32,
    pub members_used: u64,
    pub inner_log: f64,
    pub inner_value: f64,
    pub converged: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct DecompositionReport {
    pub blocks: Vec<BlockReport>,
    pub outer_value: Option<f64>,
    pub net_value: Option<f64>,
    pub rel_dev: Option<f64>,
    pub pass: Option<bool>,
    pub diverging_block: Option<u32>,
}

/// Iterated product over a partition into blocks. Every position up to the
/// horizon is bucketed into its block, so the outer product regroups exactly
/// the net's terms; each block additionally classifies its own partial-sum
/// trajectory, which is what witnesses divergence of an inner product.
pub fn decomposition_check(
    fam: &IndexedFamily,
    partition: &PartitionRule,
    eps: f64,
    horizon: u64,
) -> Result<DecompositionReport> {
    if let PartitionRule::Explicit(blocks) = partition {
        return explicit_decomposition(fam, blocks, eps, horizon);
    }
    let net = unordered_converges(fam, eps, horizon)?;
    let positions = fam.realized_positions(horizon);
    let nblocks = partition.block_count(positions) as usize;

    let mut sums: Vec<NeumaierSum> = vec![NeumaierSum::new(); nblocks];
    let mut trajectories: Vec<Vec<f64>> = vec![Vec::new(); nblocks];
    let mut members = vec![0u64; nblocks];
    for p in 1..=positions {
        let b = partition.block_of(p) as usize - 1;
        let l = fam.log_at_position(p)?;
        sums[b].add(l);
        trajectories[b].push(sums[b].value());
        members[b] += 1;
    }

    let mut blocks = Vec::with_capacity(nblocks);
    let mut outer = NeumaierSum::new();
    let mut diverging_block = None;
    for b in 0..nblocks {
        let traj = &trajectories[b];
        let window = &traj[traj.len() / 2..];
        let converged = if traj.len() < 16 {
            true // tiny realized blocks count as finite products
        } else {
            classify_log_window(window, members[b], eps).kind == VerdictKind::Converges
        };
        let inner_log = sums[b].value();
        blocks.push(BlockReport {
            block: b as u32 + 1,
            members_used: members[b],
            inner_log,
            inner_value: inner_log.exp(),
            converged,
        });
        if !converged && diverging_block.is_none() {
            diverging_block = Some(b as u32 + 1);
        }
        outer.add(inner_log);
    }

    let outer_value = if diverging_block.is_none() {
        Some(outer.value().exp())
    } else {
        None
    };
    let net_value = net.limit_estimate;
    let (rel, pass) = match (outer_value, net_value) {
        (Some(o), Some(p)) => {
            let d = rel_dev(o, p);
            (Some(d), Some(d <= eps))
        }
        _ => (None, None),
    };
    Ok(DecompositionReport {
        blocks,
        outer_value,
        net_value,
        rel_dev: rel,
        pass,
        diverging_block,
    })
}

fn explicit_decomposition(
    fam: &IndexedFamily,
    block_sets: &[Vec<i64>],
    eps: f64,
    horizon: u64,
) -> Result<DecompositionReport> {
    let mut seen = HashSet::new();
    for (b, set) in block_sets.iter().enumerate() {
        for &i in set {
            if !seen.insert(i) {
                return Err(Error::InvalidInput(format!(
                    "blocks overlap at index {i} (block {})",
                    b + 1
                )));
            }
        }
    }
    let net = unordered_converges(fam, eps, horizon)?;
    let mut outer = NeumaierSum::new();
    let mut blocks = Vec::new();
    for (b, set) in block_sets.iter().enumerate() {
        let mut inner = NeumaierSum::new();
        for &i in set {
            inner.add(fam.log_term(i)?);
        }
        outer.add(inner.value());
        blocks.push(BlockReport {
            block: b as u32 + 1,
            members_used: set.len() as u64,
            inner_log: inner.value(),
            inner_value: inner.value().exp(),
            converged: true,
        });
    }
    let outer_value = Some(outer.value().exp());
    let (rel, pass) = match (outer_value, net.limit_estimate) {
        (Some(o), Some(p)) => {
            let d = rel_dev(o, p);
            (Some(d), Some(d <= eps))
        }
        _ => (None, None),
    };
    Ok(DecompositionReport {
        blocks,
        outer_value,
        net_value: net.limit_estimate,
        rel_dev: rel,
        pass,
        diverging_block: None,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct RouteReport {
    pub name: String,
    pub converges: bool,
    /// The route's product value: the raw product for raw routes, the mmod
    /// product for mmod routes.
    pub value: Option<f64>,
    /// True when `value` is the mmod product rather than the raw one.
    pub mmod_valued: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub net: Verdict,
    pub routes: Vec<RouteReport>,
    pub all_routes_agree: bool,
    /// Largest relative spread among the raw-product route values.
    pub max_value_spread: Option<f64>,
    /// Largest relative spread among the mmod-product route values.
    pub max_mmod_value_spread: Option<f64>,
}

fn chain_route(
    fam: &IndexedFamily,
    mmod_terms: bool,
    steps: u64,
    eps: f64,
    value_tol: f64,
) -> Result<RouteReport> {
    let rules = [ChainRule::Prefix, ChainRule::EvensOdds, ChainRule::Mod(3)];
    let mut values = Vec::new();
    let mut all_converge = true;
    let mut details = Vec::new();
    for rule in &rules {
        let v = if mmod_terms {
            chain_limit_mmod(fam, rule, steps, eps)?
        } else {
            cofinal_chain_limit(fam, rule, steps, eps)?
        };
        details.push(format!("{rule:?}: {:?}", v.kind));
        if let Some(l) = v.limit_estimate {
            values.push(l);
        }
        all_converge &= v.kind == VerdictKind::Converges;
    }
    let spread = pairwise_spread(&values);
    let agree = values.len() == rules.len() && spread.is_some_and(|s| s <= value_tol);
    Ok(RouteReport {
        name: if mmod_terms {
            "cofinal chains (mmod terms)".into()
        } else {
            "cofinal chains (raw terms)".into()
        },
        converges: all_converge && agree,
        value: if all_converge && agree {
            values.first().copied()
        } else {
            None
        },
        mmod_valued: mmod_terms,
        detail: details.join("; "),
    })
}

fn chain_limit_mmod(
    fam: &IndexedFamily,
    chain: &ChainRule,
    steps: u64,
    eps: f64,
) -> Result<Verdict> {
    let mut acc = NeumaierSum::new();
    let mut window = Vec::with_capacity((steps / 2 + 1) as usize);
    let window_from = steps - steps / 2;
    for t in 1..=steps {
        for p in chain.delta(t) {
            if let Some(len) = fam.universe.len() {
                if p > len {
                    continue;
                }
            }
            acc.add(fam.log_at_position(p)?.abs());
        }
        if t >= window_from {
            window.push(acc.value());
        }
    }
    Ok(classify_log_window(&window, steps, eps))
}

fn pairwise_spread(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if lo > 0.0 {
        Some((hi - lo) / lo)
    } else {
        Some(f64::INFINITY)
    }
}

/// A biased but exhaustive enumeration: consume `ratio` odd positions per
/// even position. Prefixes of such enumerations realize genuinely different
/// finite subsets, which is what distinguishes rearrangement-stable families
/// from conditionally structured ones.
fn biased_enumeration_route(
    fam: &IndexedFamily,
    ratio: u64,
    horizon: u64,
    eps: f64,
    label: u32,
) -> Result<RouteReport> {
    let mut acc = NeumaierSum::new();
    let mut window = Vec::with_capacity((horizon / 2 + 1) as usize);
    let window_from = horizon - horizon / 2;
    let mut next_odd = 1u64;
    let mut next_even = 2u64;
    let realized = fam.realized_positions(horizon * 2 + 4);
    let mut t = 0u64;
    while t < horizon {
        for _ in 0..ratio {
            if next_odd <= realized {
                acc.add(fam.log_at_position(next_odd)?);
                next_odd += 2;
                t += 1;
                if t >= window_from {
                    window.push(acc.value());
                }
                if t >= horizon {
                    break;
                }
            }
        }
        if t >= horizon {
            break;
        }
        if next_even <= realized {
            acc.add(fam.log_at_position(next_even)?);
            next_even += 2;
            t += 1;
            if t >= window_from {
                window.push(acc.value());
            }
        } else if next_odd > realized {
            break;
        }
    }
    let v = classify_log_window(&window, t, eps);
    Ok(RouteReport {
        name: format!("enumeration {label} (odd:even = {ratio}:1)"),
        converges: v.kind == VerdictKind::Converges,
        value: v.limit_estimate,
        mmod_valued: false,
        detail: format!("{:?}", v.kind),
    })
}

/// The equivalence suite: net convergence of the mmod and raw products,
/// sampled cofinal chains on both term families, sampled decompositions,
/// and random biased enumerations, each reporting converges-or-not plus a
/// value. All routes must agree for a well-behaved family.
pub fn equivalence_suite(
    fam: &IndexedFamily,
    eps: f64,
    horizon: u64,
    seed: u64,
    enumerations: u32,
    value_tol: f64,
) -> Result<SuiteReport> {
    let net = unordered_converges(fam, eps, horizon)?;
    let mut routes = Vec::new();

    // (a) the mmod net: sum of |log| must settle
    {
        let split = sign_split(fam, horizon)?;
        let window_abs: Vec<f64> = split
            .window_pos
            .iter()
            .zip(&split.window_neg)
            .map(|(p, m)| p - m)
            .collect();
        let v = classify_log_window(&window_abs, split.positions, eps);
        routes.push(RouteReport {
            name: "unordered mmod product".into(),
            converges: v.kind == VerdictKind::Converges,
            value: v
                .limit_estimate
                .map(|_| (split.pos_total - split.neg_total).exp()),
            mmod_valued: true,
            detail: format!("{:?}", v.kind),
        });
    }
    // (b) the raw net
    routes.push(RouteReport {
        name: "unordered product".into(),
        converges: net.kind == VerdictKind::Converges,
        value: net.limit_estimate,
        mmod_valued: false,
        detail: format!("{:?}", net.kind),
    });
    // (c)/(d) sampled cofinal chains
    routes.push(chain_route(fam, true, horizon, eps, value_tol)?);
    routes.push(chain_route(fam, false, horizon, eps, value_tol)?);
    // (e) sampled decompositions
    {
        let parts = [
            PartitionRule::Single,
            PartitionRule::Mod(3),
            PartitionRule::IsolateOdds,
        ];
        let mut ok = true;
        let mut details = Vec::new();
        let mut value = None;
        for p in &parts {
            let d = decomposition_check(fam, p, value_tol, horizon)?;
            match (d.diverging_block, d.pass) {
                (Some(b), _) => {
                    ok = false;
                    details.push(format!("{p:?}: block {b} diverges"));
                }
                (None, Some(true)) => {
                    value = d.outer_value;
                    details.push(format!("{p:?}: ok"));
                }
                (None, other) => {
                    ok = false;
                    details.push(format!("{p:?}: mismatch ({other:?})"));
                }
            }
        }
        routes.push(RouteReport {
            name: "iterated decompositions".into(),
            converges: ok,
            value: if ok { value } else { None },
            mmod_valued: false,
            detail: details.join("; "),
        });
    }
    // (f) random biased enumerations
    {
        let mut rng = SmallRng::seed_from_u64(seed);
        let mut vals = Vec::new();
        let mut all = true;
        let mut details = Vec::new();
        for k in 0..enumerations {
            let ratio = rng.gen_range(2..=3);
            let r = biased_enumeration_route(fam, ratio, horizon, eps, k + 1)?;
            if let Some(v) = r.value {
                vals.push(v);
            }
            all &= r.converges;
            details.push(format!("#{}: {}", k + 1, r.detail));
        }
        let spread = pairwise_spread(&vals);
        let agree =
            vals.len() == enumerations as usize && spread.is_some_and(|s| s <= value_tol);
        routes.push(RouteReport {
            name: format!("{enumerations} random enumerations"),
            converges: all && agree,
            value: if all && agree { vals.first().copied() } else { None },
            mmod_valued: false,
            detail: details.join("; "),
        });
    }

    let first = routes[0].converges;
    let all_routes_agree = routes.iter().all(|r| r.converges == first);
    let raw_values: Vec<f64> = routes
        .iter()
        .filter(|r| !r.mmod_valued)
        .filter_map(|r| r.value)
        .collect();
    let mmod_values: Vec<f64> = routes
        .iter()
        .filter(|r| r.mmod_valued)
        .filter_map(|r| r.value)
        .collect();
    Ok(SuiteReport {
        net,
        routes,
        all_routes_agree,
        max_value_spread: pairwise_spread(&raw_values),
        max_mmod_value_spread: pairwise_spread(&mmod_values),
    })
}
