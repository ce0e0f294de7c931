//! Null modification: trimming a null set from a set so that its partial
//! averages never exceed a target, plus the extensions to pairwise disjoint
//! sequences and finite chains.
//!
//! The trimming pass walks `n = 1, 2, …` and, whenever `n` is a member of
//! the source set, keeps it only if doing so leaves the running average at
//! or below the target; otherwise `n` moves to the removed part. With the
//! target equal to the upper Cesàro limit of the source, the removed part is
//! a null set and the kept part has the same upper limit.

use crate::chains::Chain;
use crate::density::{density_profile, exact_charge, Charge, EstimatorConfig, Provenance};
use crate::error::Error;
use crate::rational::{format_rat, Rat, Target};
use crate::sets::{SequentialRule, SetExpr, StreamSet};

struct TrimRule {
    source: SetExpr,
    target: Target,
}

impl SequentialRule for TrimRule {
    fn step(&mut self, n: u64, members_so_far: u64) -> Result<bool, Error> {
        if !self.source.contains(n)? {
            return Ok(false);
        }
        // keep n unless the average including it would exceed the target
        Ok(!self.target.lt_average(members_so_far + 1, n)?)
    }
}

/// Output of a null modification.
#[derive(Debug, Clone)]
pub struct NullModResult {
    /// The kept part, with `ν_N` at or below the target for every `N`.
    pub kept: SetExpr,
    /// The removed part (`source \ kept`).
    pub removed: SetExpr,
    pub source: SetExpr,
    pub target: Rat,
    /// True when the target was not the source's exact charge; nullity of
    /// the removed part is then advisory, not guaranteed.
    pub heuristic: bool,
}

/// Decomposes `source` into `kept ⊔ removed` per the streaming trim with an
/// exact rational target in [0,1].
///
/// When the target equals the source's exact charge, the kept part carries
/// that charge; for any other target the result is labelled heuristic.
pub fn null_modify(source: &SetExpr, target: Rat) -> Result<NullModResult, Error> {
    let t = Target::from_rat(target.clone())?;
    let label = format!("trim({}, {})", source, format_rat(&target));
    let rule = TrimRule { source: source.clone(), target: t };
    let exact = exact_charge(source);
    let is_exact_target = matches!(&exact, Some(c) if c.value == target);
    let mut stream = StreamSet::new(label, Box::new(rule));
    if is_exact_target {
        // charges survive removal of a null set
        stream = stream.with_charge(Charge::new(target.clone(), Provenance::DerivedRule));
    }
    let kept = SetExpr::stream(stream);
    let removed = SetExpr::difference(source.clone(), kept.clone());
    Ok(NullModResult {
        kept,
        removed,
        source: source.clone(),
        target,
        heuristic: !is_exact_target,
    })
}

/// Verification report for a null modification.
#[derive(Debug, Clone)]
pub struct NullModReport {
    pub horizon: u64,
    /// First `n` where `kept ⊔ removed` fails to reproduce the source.
    pub decomposition_failure: Option<u64>,
    /// First `N` where `ν_N(kept)` exceeds the target.
    pub domination_failure: Option<u64>,
    /// Heuristic upper estimate for the removed part's density.
    pub removed_upper_est: Rat,
    /// Whether the removed part's estimate stays within the tolerance.
    pub nullity_pass: bool,
    pub heuristic: bool,
}

impl NullModReport {
    pub fn all_pass(&self) -> bool {
        self.decomposition_failure.is_none()
            && self.domination_failure.is_none()
            && self.nullity_pass
    }
}

/// Streams the decomposition up to `horizon`, checking disjoint union and
/// target domination exactly, and estimating the removed part's density
/// against `null_tolerance`. A failed nullity estimate is reported, never
/// asserted: the construction only guarantees a null remainder when the
/// target is the exact upper limit.
pub fn verify_nullmod(
    result: &NullModResult,
    horizon: u64,
    null_tolerance: &Rat,
) -> Result<NullModReport, Error> {
    let t = Target::from_rat(result.target.clone())?;
    let mut decomposition_failure = None;
    let mut domination_failure = None;
    let mut kept_count = 0u64;
    for n in 1..=horizon {
        let in_src = result.source.contains(n)?;
        let in_kept = result.kept.contains(n)?;
        let in_removed = result.removed.contains(n)?;
        if decomposition_failure.is_none() {
            let reproduces = (in_kept || in_removed) == in_src
                && !(in_kept && in_removed)
                && (!in_kept || in_src);
            if !reproduces {
                decomposition_failure = Some(n);
            }
        }
        if in_kept {
            kept_count += 1;
        }
        if domination_failure.is_none() && t.lt_average(kept_count, n)? {
            domination_failure = Some(n);
        }
    }
    let mut cfg = EstimatorConfig::with_horizon(horizon);
    cfg.base_n = cfg.base_n.min(horizon);
    let removed_profile = density_profile(&result.removed, &cfg)?;
    let nullity_pass = removed_profile.upper_est <= *null_tolerance;
    Ok(NullModReport {
        horizon,
        decomposition_failure,
        domination_failure,
        removed_upper_est: removed_profile.upper_est,
        nullity_pass,
        heuristic: result.heuristic,
    })
}

/// One row of the emitted decision stream.
#[derive(Debug, Clone, Copy)]
pub struct StreamRow {
    pub n: u64,
    pub in_source: bool,
    pub in_kept: bool,
    pub in_removed: bool,
    pub kept_count: u64,
}

/// Materializes the first `limit` decisions (CSV fodder for the CLI).
pub fn decision_stream(result: &NullModResult, limit: u64) -> Result<Vec<StreamRow>, Error> {
    let mut rows = Vec::with_capacity(limit as usize);
    let mut kept_count = 0u64;
    for n in 1..=limit {
        let in_source = result.source.contains(n)?;
        let in_kept = result.kept.contains(n)?;
        if in_kept {
            kept_count += 1;
        }
        rows.push(StreamRow {
            n,
            in_source,
            in_kept,
            in_removed: in_source && !in_kept,
            kept_count,
        });
    }
    Ok(rows)
}

/// Null-modifies a pairwise disjoint family so the partial averages of each
/// member, and hence of every partial union, stay at or below their charges.
///
/// Processing the partial-union chain element by element reduces to trimming
/// each member with its own exact charge: earlier removals are disjoint from
/// later members, so each step's difference set is the member itself.
pub fn modify_disjoint_sequence(
    sets: &[SetExpr],
    horizon: u64,
) -> Result<Vec<NullModResult>, Error> {
    let charges: Vec<Rat> = sets
        .iter()
        .map(|e| {
            exact_charge(e)
                .map(|c| c.value)
                .ok_or_else(|| Error::MissingCharge(e.to_string()))
        })
        .collect::<Result<_, _>>()?;
    verify_pairwise_disjoint(sets, horizon)?;
    sets.iter()
        .zip(charges)
        .map(|(e, c)| null_modify(e, c))
        .collect()
}

pub fn verify_pairwise_disjoint(sets: &[SetExpr], horizon: u64) -> Result<(), Error> {
    for n in 1..=horizon {
        let mut owner: Option<usize> = None;
        for (i, e) in sets.iter().enumerate() {
            if e.contains(n)? {
                if let Some(j) = owner {
                    return Err(Error::DisjointViolation { n, i: j, j: i });
                }
                owner = Some(i);
            }
        }
    }
    Ok(())
}

/// Two-sided null modification of a finite chain with exact charges: the
/// one-sided trim applied to the complement chain (which adds a null set to
/// each element), then to the result (which removes one). The output chain
/// preserves inclusion order and the original charges, each element differs
/// from its source by a null set, and `ν_N` never exceeds the charge.
pub fn modify_chain_two_sided(chain: &Chain, horizon: u64) -> Result<Chain, Error> {
    let charges = chain
        .charges()
        .ok_or_else(|| Error::MissingCharge("chain".into()))?
        .to_vec();
    let elements = chain.elements().to_vec();
    if elements.is_empty() {
        return Chain::verify(vec![], horizon);
    }

    // complement chain, increasing: A_m^c ⊂ … ⊂ A_1^c
    let comp: Vec<SetExpr> =
        elements.iter().rev().map(|e| SetExpr::complement(e.clone())).collect();
    let comp_charges: Vec<Rat> =
        charges.iter().rev().map(|c| Rat::from_integer(1) - c).collect();
    let trimmed_comp = one_sided(&comp, &comp_charges)?;

    // complement back: grows each original element by a null set
    let grown: Vec<SetExpr> =
        trimmed_comp.iter().rev().map(|e| SetExpr::complement(e.clone())).collect();
    let shrunk = one_sided(&grown, &charges)?;

    Chain::verify(shrunk, horizon)?.with_charges(charges)
}

/// One-sided modification of an increasing chain: trims each consecutive
/// difference with the charge gap as its target and accumulates the kept
/// parts, so `ν_N` of every output element stays at or below its charge.
fn one_sided(elements: &[SetExpr], charges: &[Rat]) -> Result<Vec<SetExpr>, Error> {
    let mut out: Vec<SetExpr> = Vec::with_capacity(elements.len());
    let mut kept_union: Option<SetExpr> = None;
    let mut prev_elem: Option<&SetExpr> = None;
    let mut prev_charge = Rat::from_integer(0);
    for (e, charge) in elements.iter().zip(charges) {
        let diff = match prev_elem {
            None => e.clone(),
            Some(prev) => SetExpr::difference(e.clone(), prev.clone()),
        };
        let gap = charge.clone() - &prev_charge;
        let step = null_modify_raw(&diff, gap)?;
        let merged = match kept_union {
            None => step.kept,
            Some(acc) => SetExpr::union(acc, step.kept),
        };
        out.push(merged.clone());
        kept_union = Some(merged);
        prev_elem = Some(e);
        prev_charge = charge.clone();
    }
    Ok(out)
}

/// Trim without charge bookkeeping, for internal chain steps whose targets
/// come from chain charges rather than the rule system.
fn null_modify_raw(source: &SetExpr, target: Rat) -> Result<NullModResult, Error> {
    let t = Target::from_rat(target.clone())?;
    let label = format!("trim({}, {})", source, format_rat(&target));
    let rule = TrimRule { source: source.clone(), target: t };
    let kept = SetExpr::stream(StreamSet::new(label, Box::new(rule)));
    let removed = SetExpr::difference(source.clone(), kept.clone());
    Ok(NullModResult {
        kept,
        removed,
        source: source.clone(),
        target,
        heuristic: false,
    })
}
