//! Inclusion-ordered chains of sets: construction with order evidence,
//! union/intersection closures, uniform-convergence certificates, range
//! densification, the `d_ν` pseudo-metric and budgeted saturation.

use serde_json::{json, Value};

use crate::constructions::midpoint_with_charge;
use crate::density::{
    density_profile, exact_charge, rat_json, EstimatorConfig,
};
use crate::error::Error;
use crate::rational::{average, Rat};
use crate::sets::{subset_symbolic, subset_upto, SetExpr};

/// How an adjacent inclusion was established.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderEvidence {
    Symbolic,
    VerifiedTo(u64),
}

/// A finite chain, ordered by inclusion, with per-pair order evidence and
/// optional exact charges. Infinite chains are represented by a finite
/// prefix plus an optional limit element standing for the union of the tail.
#[derive(Debug, Clone)]
pub struct Chain {
    elements: Vec<SetExpr>,
    evidence: Vec<OrderEvidence>,
    charges: Option<Vec<Rat>>,
    limit: Option<SetExpr>,
}

impl Chain {
    /// Builds a chain from inclusion-ordered elements, verifying each
    /// adjacent pair symbolically or by streaming up to `horizon`.
    pub fn verify(elements: Vec<SetExpr>, horizon: u64) -> Result<Self, Error> {
        let mut evidence = Vec::new();
        for (i, pair) in elements.windows(2).enumerate() {
            if subset_symbolic(&pair[0], &pair[1]) == Some(true) {
                evidence.push(OrderEvidence::Symbolic);
            } else {
                match subset_upto(&pair[0], &pair[1], horizon)? {
                    None => evidence.push(OrderEvidence::VerifiedTo(horizon)),
                    Some(n) => return Err(Error::OrderViolation { i, j: i + 1, n }),
                }
            }
        }
        Ok(Chain { elements, evidence, charges: None, limit: None })
    }

    /// Attaches caller-supplied charges (one per element, non-decreasing).
    pub fn with_charges(mut self, charges: Vec<Rat>) -> Result<Self, Error> {
        if charges.len() != self.elements.len() {
            return Err(Error::invalid("one charge per element"));
        }
        for (i, w) in charges.windows(2).enumerate() {
            if w[0] > w[1] {
                return Err(Error::ChargeOrder(i + 1));
            }
        }
        self.charges = Some(charges);
        Ok(self)
    }

    /// Derives every charge through the exact rule system.
    pub fn with_derived_charges(self) -> Result<Self, Error> {
        let charges = self
            .elements
            .iter()
            .map(|e| {
                exact_charge(e)
                    .map(|c| c.value)
                    .ok_or_else(|| Error::MissingCharge(e.to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        self.with_charges(charges)
    }

    /// Declares a limit element containing every chain element.
    pub fn with_limit(mut self, limit: SetExpr, horizon: u64) -> Result<Self, Error> {
        if let Some(last) = self.elements.last() {
            if let Some(n) = subset_upto(last, &limit, horizon)? {
                return Err(Error::SubsetViolation { n });
            }
        }
        self.limit = Some(limit);
        Ok(self)
    }

    pub fn elements(&self) -> &[SetExpr] {
        &self.elements
    }

    pub fn evidence(&self) -> &[OrderEvidence] {
        &self.evidence
    }

    pub fn charges(&self) -> Option<&[Rat]> {
        self.charges.as_deref()
    }

    pub fn limit(&self) -> Option<&SetExpr> {
        self.limit.as_ref()
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    fn require_charges(&self) -> Result<&[Rat], Error> {
        self.charges.as_deref().ok_or_else(|| Error::MissingCharge("chain".into()))
    }
}

/// Which closures to apply.
#[derive(Debug, Clone, Copy, Default)]
pub struct ClosureSelector {
    pub union: bool,
    pub intersection: bool,
}

/// Closes a finite chain under unions and/or intersections.
///
/// For a finite chain every prefix union and suffix intersection is
/// set-equal to an existing element, so this adds at most the declared limit
/// element (for the union side) and otherwise records that the closure
/// candidates were absorbed. The result is re-verified totally ordered.
pub fn chain_closures(
    chain: &Chain,
    selector: ClosureSelector,
    horizon: u64,
) -> Result<Chain, Error> {
    if chain.is_empty() {
        return Ok(chain.clone());
    }
    let mut elements = chain.elements.to_vec();
    let mut charges = chain.charges.clone();

    if selector.intersection {
        let mut candidate = elements[0].clone();
        for e in &elements[1..] {
            candidate = SetExpr::intersection(candidate, e.clone());
        }
        // set-equal to the first element for any verified chain
        if !set_equal(&candidate, &elements[0], horizon)? {
            elements.insert(0, candidate);
            charges = None;
        }
    }

    if selector.union {
        let union_all = match chain.limit.clone() {
            Some(limit) => limit,
            None => {
                let mut candidate = elements[0].clone();
                for e in &elements[1..] {
                    candidate = SetExpr::union(candidate, e.clone());
                }
                candidate
            }
        };
        let last = elements.last().expect("nonempty");
        if !set_equal(&union_all, last, horizon)? {
            if let (Some(cs), Some(c)) = (&mut charges, exact_charge(&union_all)) {
                cs.push(c.value);
            } else {
                charges = None;
            }
            elements.push(union_all);
        }
    }

    let out = Chain::verify(elements, horizon)?;
    match charges {
        Some(cs) => out.with_charges(cs),
        None => Ok(out),
    }
}

fn set_equal(a: &SetExpr, b: &SetExpr, horizon: u64) -> Result<bool, Error> {
    Ok(subset_upto(a, b, horizon)?.is_none() && subset_upto(b, a, horizon)?.is_none())
}

/// Outcome of the uniform-convergence search.
#[derive(Debug, Clone)]
pub enum Certificate {
    /// All elements stay within ε of their charges from `n_star` through the
    /// horizon (a finite computation cannot certify beyond it).
    Certified { n_star: u64, horizon: u64, checkpoints: usize },
    Failed { element: usize, at: u64, value: Rat, charge: Rat },
}

impl Certificate {
    pub fn is_certified(&self) -> bool {
        matches!(self, Certificate::Certified { .. })
    }

    pub fn to_json(&self) -> Value {
        match self {
            Certificate::Certified { n_star, horizon, checkpoints } => json!({
                "certified": true,
                "scope": "VERIFIED-TO-HORIZON",
                "n_star": n_star,
                "horizon": horizon,
                "checkpoints": checkpoints,
            }),
            Certificate::Failed { element, at, value, charge } => json!({
                "certified": false,
                "element": element,
                "at": at,
                "value": rat_json(value),
                "charge": rat_json(charge),
            }),
        }
    }
}

/// Searches the checkpoint schedule for the least `N*` such that every chain
/// element keeps `|ν_N - ν| < ε` at every schedule point in `[N*, horizon]`.
pub fn uniform_convergence_certificate(
    chain: &Chain,
    eps: &Rat,
    cfg: &EstimatorConfig,
) -> Result<Certificate, Error> {
    cfg.validate()?;
    let charges = chain.require_charges()?;
    let mut checkpoints = cfg.schedule();
    for e in chain.elements() {
        checkpoints.extend(e.structural_checkpoints(cfg.horizon));
    }
    checkpoints.sort_unstable();
    checkpoints.dedup();
    checkpoints.retain(|&n| n >= 1);

    // last_bad = latest checkpoint where some element misses its charge by >= eps
    let mut last_bad: Option<(usize, u64, Rat)> = None;
    for (i, (e, charge)) in chain.elements().iter().zip(charges).enumerate() {
        let counts = crate::density::counts_at(e, &checkpoints)?;
        for (&n, &c) in checkpoints.iter().zip(&counts) {
            let v = average(c, n);
            if (v.clone() - charge).abs() >= *eps {
                match &last_bad {
                    Some((_, at, _)) if *at >= n => {}
                    _ => last_bad = Some((i, n, v)),
                }
            }
        }
    }

    match last_bad {
        None => Ok(Certificate::Certified {
            n_star: checkpoints[0],
            horizon: cfg.horizon,
            checkpoints: checkpoints.len(),
        }),
        Some((element, at, value)) => {
            // the certificate starts at the first checkpoint past every failure
            match checkpoints.iter().copied().find(|&n| n > at) {
                Some(n_star) => Ok(Certificate::Certified {
                    n_star,
                    horizon: cfg.horizon,
                    checkpoints: checkpoints.len(),
                }),
                None => Ok(Certificate::Failed {
                    element,
                    at,
                    value,
                    charge: charges[element].clone(),
                }),
            }
        }
    }
}

/// Inserts midpoint sets into every adjacent charge gap larger than ε until
/// the chain's charges are ε-dense in [0,1]. The chain must have exact
/// charges and carry the empty set (charge 0) and ℕ (charge 1) at its ends.
pub fn densify_range(chain: &Chain, eps: &Rat) -> Result<Chain, Error> {
    if eps <= &Rat::from_integer(0) {
        return Err(Error::invalid("ε must be positive"));
    }
    let charges = chain.require_charges()?.to_vec();
    if charges.first() != Some(&Rat::from_integer(0))
        || charges.last() != Some(&Rat::from_integer(1))
    {
        return Err(Error::invalid(
            "adjoin an empty element (charge 0) and a full element (charge 1) first",
        ));
    }
    let mut elements = chain.elements.to_vec();
    let mut charges = charges;
    let mut evidence = chain.evidence.to_vec();

    let mut i = 0;
    while i + 1 < elements.len() {
        let gap = charges[i + 1].clone() - &charges[i];
        if gap > *eps {
            let mid_charge = (charges[i].clone() + &charges[i + 1]) / Rat::from_integer(2);
            let mid =
                midpoint_with_charge(&elements[i], &elements[i + 1], Some(mid_charge.clone()));
            elements.insert(i + 1, mid);
            charges.insert(i + 1, mid_charge);
            // midpoints sit between their endpoints by construction
            evidence.insert(i + 1, OrderEvidence::Symbolic);
            evidence[i] = OrderEvidence::Symbolic;
            // re-examine the left half of the split gap
            continue;
        }
        i += 1;
    }

    Ok(Chain { elements, evidence, charges: Some(charges), limit: chain.limit.clone() })
}

/// The pseudo-metric `d_ν(A, B) = ν⁺(A △ B)`: exact when the symmetric
/// difference has an exact charge, otherwise the heuristic profile estimate.
#[derive(Debug, Clone)]
pub struct DNu {
    pub value: Rat,
    pub exact: bool,
}

pub fn d_nu(a: &SetExpr, b: &SetExpr, cfg: &EstimatorConfig) -> Result<DNu, Error> {
    if a == b {
        return Ok(DNu { value: Rat::from_integer(0), exact: true });
    }
    let diff = SetExpr::symm_diff(a.clone(), b.clone());
    if let Some(c) = exact_charge(&diff) {
        return Ok(DNu { value: c.value, exact: true });
    }
    let profile = density_profile(&diff, cfg)?;
    Ok(DNu { value: profile.upper_est, exact: false })
}

/// Enumerates interpolating sets between each adjacent pair `B ⊂ C`:
/// `B ∪ {x_1}`, `B ∪ {x_1, x_2}`, … where `x_i` lists `C \ B` in increasing
/// order. At most `budget` sets per pair; the scan for difference elements
/// stops at `scan_horizon`.
pub fn saturate_chain(
    chain: &Chain,
    budget: usize,
    scan_horizon: u64,
) -> Result<Vec<SetExpr>, Error> {
    let mut out = Vec::new();
    for pair in chain.elements.windows(2) {
        let (lo, hi) = (&pair[0], &pair[1]);
        let mut taken = Vec::new();
        for n in 1..=scan_horizon {
            if taken.len() >= budget {
                break;
            }
            if hi.contains(n)? && !lo.contains(n)? {
                taken.push(n);
                out.push(SetExpr::union(lo.clone(), SetExpr::finite(taken.clone())?));
            }
        }
    }
    Ok(out)
}
