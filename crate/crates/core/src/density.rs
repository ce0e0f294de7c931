//! Partial averages, upper/lower Cesàro limit estimation and the exact
//! charge rule system.

use num_traits::Signed;
use serde_json::{json, Value};

use crate::error::Error;
use crate::rational::{average, format_rat, to_f64, Rat};
use crate::sets::{NullFamily, SetExpr};
use crate::MAX_HORIZON;

/// Where an exact charge came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    ClosedForm,
    PeriodCount,
    RegisteredNull,
    BlockFormula,
    DerivedRule,
}

impl Provenance {
    pub fn as_str(&self) -> &'static str {
        match self {
            Provenance::ClosedForm => "closed-form",
            Provenance::PeriodCount => "period-count",
            Provenance::RegisteredNull => "registered-null",
            Provenance::BlockFormula => "block-formula",
            Provenance::DerivedRule => "derived-rule",
        }
    }
}

/// An exact charge value in [0,1] with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct Charge {
    pub value: Rat,
    pub provenance: Provenance,
}

impl Charge {
    pub fn new(value: Rat, provenance: Provenance) -> Self {
        debug_assert!(!value.is_negative() && value <= Rat::from_integer(1));
        Charge { value, provenance }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "num": self.value.numer().to_string(),
            "den": self.value.denom().to_string(),
            "approx": to_f64(&self.value),
            "provenance": self.provenance.as_str(),
        })
    }
}

impl std::fmt::Display for Charge {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} ({})", format_rat(&self.value), self.provenance.as_str())
    }
}

/// `ν_N(A) = |A ∩ {1..N}| / N` as an exact rational.
pub fn partial_average(expr: &SetExpr, n: u64) -> Result<Rat, Error> {
    if n == 0 {
        return Err(Error::invalid("partial averages need N >= 1"));
    }
    Ok(average(expr.prefix_count(n)?, n))
}

// ---------------------------------------------------------------------------
// Exact charges
// ---------------------------------------------------------------------------

/// Cap on the lcm used for period counting.
const PERIOD_CAP: u64 = 1_000_000;

/// Applies the charge rule system: structured closed forms, registered null
/// families, null absorption, complement and dilation arithmetic, residue
/// algebra period counts and block closed forms. Returns `None` (never a
/// guess) when no rule fires.
pub fn exact_charge(expr: &SetExpr) -> Option<Charge> {
    match expr {
        SetExpr::Finite(_) => Some(Charge::new(Rat::from_integer(0), Provenance::ClosedForm)),
        SetExpr::Residue { m, .. } => {
            Some(Charge::new(Rat::new(1, *m as i128), Provenance::ClosedForm))
        }
        SetExpr::NullFamily(_) => {
            Some(Charge::new(Rat::from_integer(0), Provenance::RegisteredNull))
        }
        SetExpr::Blocks(spec) => {
            spec.limit().map(|v| Charge::new(v, Provenance::BlockFormula))
        }
        // Exactly one of each pair {2k-1, 2k} is a member, so ν_N over even N
        // is 1/2 exactly, whatever the base set is.
        SetExpr::Interleave(_) => Some(Charge::new(Rat::new(1, 2), Provenance::ClosedForm)),
        SetExpr::Complement(a) => exact_charge(a).map(|c| {
            Charge::new(Rat::from_integer(1) - c.value, Provenance::DerivedRule)
        }),
        SetExpr::Dilate { factor, inner } => exact_charge(inner).map(|c| {
            Charge::new(c.value / Rat::from_integer(*factor as i128), Provenance::DerivedRule)
        }),
        SetExpr::Stream(s) => s.declared_charge().cloned(),
        SetExpr::Predicate(_) => None,
        SetExpr::Union(..)
        | SetExpr::Intersection(..)
        | SetExpr::Difference(..)
        | SetExpr::SymmDiff(..) => boolean_charge(expr),
    }
}

/// Membership of the null ideal, decided structurally: registered null
/// families, finite sets, declared-null streams, and closures of those under
/// union, subset-forming operations and dilation. Linear in the tree size.
pub fn is_null(expr: &SetExpr) -> bool {
    match expr {
        SetExpr::Finite(_) => true,
        SetExpr::NullFamily(_) => true,
        SetExpr::Residue { .. } | SetExpr::Interleave(_) => false,
        SetExpr::Blocks(_) => false, // infinitely many one-runs
        SetExpr::Stream(s) => {
            matches!(s.declared_charge(), Some(c) if c.value == Rat::from_integer(0))
        }
        SetExpr::Predicate(_) => false,
        SetExpr::Union(a, b) | SetExpr::SymmDiff(a, b) => is_null(a) && is_null(b),
        SetExpr::Intersection(a, b) => is_null(a) || is_null(b),
        SetExpr::Difference(a, _) => is_null(a),
        SetExpr::Dilate { inner, .. } => is_null(inner),
        SetExpr::Complement(a) => is_conull(a),
    }
}

/// Charge-1 detection, the complement-side twin of [`is_null`].
fn is_conull(expr: &SetExpr) -> bool {
    match expr {
        SetExpr::Residue { m: 1, .. } => true,
        SetExpr::Complement(a) => is_null(a),
        SetExpr::Union(a, b) => is_conull(a) || is_conull(b),
        SetExpr::Intersection(a, b) => is_conull(a) && is_conull(b),
        SetExpr::Difference(a, b) => is_conull(a) && is_null(b),
        SetExpr::SymmDiff(a, b) => {
            (is_conull(a) && is_null(b)) || (is_null(a) && is_conull(b))
        }
        SetExpr::Stream(s) => {
            matches!(s.declared_charge(), Some(c) if c.value == Rat::from_integer(1))
        }
        _ => false,
    }
}

fn boolean_charge(expr: &SetExpr) -> Option<Charge> {
    use SetExpr::*;

    // Identical operands resolve set-theoretically.
    match expr {
        Union(a, b) | Intersection(a, b) if a == b => return exact_charge(a),
        Difference(a, b) | SymmDiff(a, b) if a == b => {
            return Some(Charge::new(Rat::from_integer(0), Provenance::DerivedRule))
        }
        _ => {}
    }

    // Symmetric differences against a modification of the same set reduce
    // exactly: X △ (X \ F) = X ∩ F and X △ (X ∪ G) = G \ X.
    if let SymmDiff(a, b) = expr {
        for (x, y) in [(a, b), (b, a)] {
            if let Difference(x2, f) = y.as_ref() {
                if x2 == x {
                    return boolean_charge(&SetExpr::intersection(
                        x.as_ref().clone(),
                        f.as_ref().clone(),
                    ));
                }
            }
            if let Union(x2, g) = y.as_ref() {
                if x2 == x {
                    return boolean_charge(&SetExpr::difference(
                        g.as_ref().clone(),
                        x.as_ref().clone(),
                    ));
                }
            }
        }
    }

    // Null absorption: a null operand never moves a charge.
    match expr {
        Union(a, b) | SymmDiff(a, b) => {
            if is_null(a) {
                if let Some(c) = exact_charge(b) {
                    return Some(Charge::new(c.value, Provenance::DerivedRule));
                }
            }
            if is_null(b) {
                if let Some(c) = exact_charge(a) {
                    return Some(Charge::new(c.value, Provenance::DerivedRule));
                }
            }
        }
        Intersection(a, b) => {
            if is_null(a) || is_null(b) {
                return Some(Charge::new(Rat::from_integer(0), Provenance::DerivedRule));
            }
        }
        Difference(a, b) => {
            if is_null(a) {
                return Some(Charge::new(Rat::from_integer(0), Provenance::DerivedRule));
            }
            if is_null(b) {
                if let Some(c) = exact_charge(a) {
                    return Some(Charge::new(c.value, Provenance::DerivedRule));
                }
            }
        }
        _ => {}
    }

    // Residue algebra: the indicator of a boolean tree over residue classes
    // is periodic, so one period determines the charge exactly.
    if let Some(period) = period_modulus(expr) {
        let mut count = 0u64;
        for n in 1..=period {
            if expr.contains(n).expect("residue trees cannot fail") {
                count += 1;
            }
        }
        return Some(Charge::new(
            Rat::new(count as i128, period as i128),
            Provenance::PeriodCount,
        ));
    }

    None
}

/// The period of a boolean tree whose leaves are all residue classes, capped
/// at [`PERIOD_CAP`]; `None` if the tree has other leaves or the lcm blows up.
fn period_modulus(expr: &SetExpr) -> Option<u64> {
    match expr {
        SetExpr::Residue { m, .. } => Some(*m),
        SetExpr::Complement(a) => period_modulus(a),
        SetExpr::Union(a, b)
        | SetExpr::Intersection(a, b)
        | SetExpr::Difference(a, b)
        | SetExpr::SymmDiff(a, b) => {
            let (pa, pb) = (period_modulus(a)?, period_modulus(b)?);
            let l = num_integer::lcm(pa, pb);
            (l <= PERIOD_CAP).then_some(l)
        }
        _ => None,
    }
}

/// Exact upper and lower Cesàro limits when both have closed forms.
pub fn closed_form_limits(expr: &SetExpr) -> Option<(Rat, Rat)> {
    if let SetExpr::Blocks(spec) = expr {
        return Some(spec.limits());
    }
    exact_charge(expr).map(|c| (c.value.clone(), c.value))
}

// ---------------------------------------------------------------------------
// Density profiles
// ---------------------------------------------------------------------------

/// Checkpoint schedule and estimation parameters.
#[derive(Debug, Clone)]
pub struct EstimatorConfig {
    pub base_n: u64,
    pub growth_ratio: Rat,
    pub burn_in_fraction: Rat,
    pub trailing_window: usize,
    pub tolerance: Rat,
    pub horizon: u64,
    pub include_structural_checkpoints: bool,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            base_n: 64,
            growth_ratio: Rat::new(5, 4),
            burn_in_fraction: Rat::new(1, 5),
            trailing_window: 20,
            tolerance: Rat::new(1, 1000),
            horizon: 1_000_000,
            include_structural_checkpoints: true,
        }
    }
}

impl EstimatorConfig {
    pub fn with_horizon(horizon: u64) -> Self {
        EstimatorConfig { horizon, ..Default::default() }
    }

    pub fn validate(&self) -> Result<(), Error> {
        if self.growth_ratio <= Rat::from_integer(1) {
            return Err(Error::invalid("growth ratio must exceed 1"));
        }
        if self.burn_in_fraction.is_negative() || self.burn_in_fraction >= Rat::from_integer(1) {
            return Err(Error::invalid("burn-in fraction must lie in [0,1)"));
        }
        if self.horizon < self.base_n {
            return Err(Error::invalid("horizon must be at least the base checkpoint"));
        }
        if self.horizon > MAX_HORIZON {
            return Err(Error::HorizonOverflow(self.horizon as u128));
        }
        Ok(())
    }

    /// Geometric checkpoints from `base_n` to `horizon`.
    pub fn schedule(&self) -> Vec<u64> {
        let mut out = Vec::new();
        let mut n = self.base_n.min(self.horizon).max(1);
        while n < self.horizon {
            out.push(n);
            let grown = (Rat::from_integer(n as i128) * &self.growth_ratio).floor();
            let grown = grown.to_integer().max(n as i128 + 1) as u64;
            n = grown.min(self.horizon);
        }
        out.push(self.horizon);
        out
    }

    /// First horizon that counts toward the estimates.
    pub fn burn_in_cutoff(&self) -> u64 {
        let cut = Rat::from_integer(self.horizon as i128) * &self.burn_in_fraction;
        cut.ceil().to_integer() as u64
    }
}

/// Checkpointed partial averages with upper/lower estimates.
///
/// The estimates are the max/min of the post-burn-in checkpoint values; when
/// an exact charge exists it is folded in, so `lower <= ν <= upper` always
/// holds for sets with known charges, and the profile is labelled exact
/// rather than heuristic.
#[derive(Debug, Clone)]
pub struct DensityProfile {
    pub checkpoints: Vec<u64>,
    pub counts: Vec<u64>,
    pub values: Vec<Rat>,
    pub lower_est: Rat,
    pub upper_est: Rat,
    pub oscillation: Rat,
    pub converged: bool,
    pub horizon: u64,
    pub exact: Option<Charge>,
}

impl DensityProfile {
    pub fn is_heuristic(&self) -> bool {
        self.exact.is_none()
    }

    /// `N,count,nu_N` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("N,count,nu_N\n");
        for ((n, c), v) in self.checkpoints.iter().zip(&self.counts).zip(&self.values) {
            out.push_str(&format!("{},{},{:.12}\n", n, c, to_f64(v)));
        }
        out
    }

    pub fn to_json(&self) -> Value {
        json!({
            "horizon": self.horizon,
            "status": if self.is_heuristic() { "HEURISTIC" } else { "EXACT" },
            "exact_charge": self.exact.as_ref().map(|c| c.to_json()),
            "lower_est": rat_json(&self.lower_est),
            "upper_est": rat_json(&self.upper_est),
            "oscillation": rat_json(&self.oscillation),
            "converged": self.converged,
            "checkpoints": self.checkpoints.len(),
        })
    }
}

pub fn rat_json(r: &Rat) -> Value {
    json!({
        "num": r.numer().to_string(),
        "den": r.denom().to_string(),
        "approx": to_f64(r),
    })
}

/// Evaluates `ν_N` along the checkpoint schedule (merged with structural
/// checkpoints supplied by the expression) and estimates the upper and lower
/// Cesàro limits from the post-burn-in values.
pub fn density_profile(expr: &SetExpr, cfg: &EstimatorConfig) -> Result<DensityProfile, Error> {
    cfg.validate()?;
    let mut checkpoints = cfg.schedule();
    if cfg.include_structural_checkpoints {
        checkpoints.extend(expr.structural_checkpoints(cfg.horizon));
        checkpoints.sort_unstable();
        checkpoints.dedup();
    }
    checkpoints.retain(|&n| n >= 1);

    let counts = counts_at(expr, &checkpoints)?;
    let values: Vec<Rat> =
        checkpoints.iter().zip(&counts).map(|(&n, &c)| average(c, n)).collect();

    let cutoff = cfg.burn_in_cutoff();
    let post: Vec<&Rat> = checkpoints
        .iter()
        .zip(&values)
        .filter(|(&n, _)| n >= cutoff)
        .map(|(_, v)| v)
        .collect();
    let post = if post.is_empty() { values.iter().collect() } else { post };

    let mut upper = post.iter().max().map(|v| (*v).clone()).unwrap();
    let mut lower = post.iter().min().map(|v| (*v).clone()).unwrap();

    let exact = exact_charge(expr);
    if let Some(c) = &exact {
        if c.value < lower {
            lower = c.value.clone();
        }
        if c.value > upper {
            upper = c.value.clone();
        }
    }

    let window = values.len().saturating_sub(cfg.trailing_window);
    let tail = &values[window..];
    let osc = match (tail.iter().max(), tail.iter().min()) {
        (Some(mx), Some(mn)) => mx - mn,
        _ => Rat::from_integer(0),
    };
    let converged = osc < cfg.tolerance;

    Ok(DensityProfile {
        checkpoints,
        counts,
        values,
        lower_est: lower,
        upper_est: upper,
        oscillation: osc,
        converged,
        horizon: cfg.horizon,
        exact,
    })
}

/// Counts at each checkpoint: closed-form per checkpoint when available,
/// otherwise one cumulative streaming pass.
pub(crate) fn counts_at(expr: &SetExpr, checkpoints: &[u64]) -> Result<Vec<u64>, Error> {
    if expr.has_fast_count() {
        return checkpoints.iter().map(|&n| expr.prefix_count(n)).collect();
    }
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut count = 0u64;
    let mut next = 0usize;
    let last = *checkpoints.last().unwrap_or(&0);
    for n in 1..=last {
        if expr.contains(n)? {
            count += 1;
        }
        while next < checkpoints.len() && checkpoints[next] == n {
            out.push(count);
            next += 1;
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Gap functions
// ---------------------------------------------------------------------------

/// Result of a bounded forward search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gap {
    Found(u64),
    /// Provably no such index exists.
    Unbounded,
    /// Search stopped after `lookahead` steps.
    Exhausted { lookahead: u64 },
}

pub const DEFAULT_LOOKAHEAD: u64 = 10_000_000;

/// `P_A(N)`: least `k > 0` with `I_A(N+k) = 1`.
pub fn gap_to_member(expr: &SetExpr, n: u64, lookahead: u64) -> Result<Gap, Error> {
    match expr {
        SetExpr::Residue { r, m } => {
            let rem = (n + 1) % m;
            let k = (r + m - rem) % m + 1;
            Ok(Gap::Found(k))
        }
        SetExpr::Finite(v) => match v.iter().find(|&&x| x > n) {
            Some(&x) => Ok(Gap::Found(x - n)),
            None => Ok(Gap::Unbounded),
        },
        SetExpr::Complement(inner) => gap_to_absence(inner, n, lookahead),
        _ => scan_gap(expr, n, lookahead, true),
    }
}

/// `Q_A(N)`: least `k > 0` with `I_A(N+k) = 0`.
pub fn gap_to_absence(expr: &SetExpr, n: u64, lookahead: u64) -> Result<Gap, Error> {
    match expr {
        SetExpr::Residue { m: 1, .. } => Ok(Gap::Unbounded),
        SetExpr::Residue { r, m } => {
            if (n + 1) % m == *r {
                Ok(Gap::Found(2))
            } else {
                Ok(Gap::Found(1))
            }
        }
        SetExpr::Finite(_) => Ok(scan_finite_absence(expr, n)),
        SetExpr::Complement(inner) => gap_to_member(inner, n, lookahead),
        _ => scan_gap(expr, n, lookahead, false),
    }
}

fn scan_finite_absence(expr: &SetExpr, n: u64) -> Gap {
    // A finite set always has a gap just past its largest run.
    let mut k = 1;
    loop {
        match expr.contains(n + k) {
            Ok(false) => return Gap::Found(k),
            Ok(true) => k += 1,
            Err(_) => unreachable!("finite membership cannot fail"),
        }
    }
}

fn scan_gap(expr: &SetExpr, n: u64, lookahead: u64, member: bool) -> Result<Gap, Error> {
    for k in 1..=lookahead {
        if expr.contains(n + k)? == member {
            return Ok(Gap::Found(k));
        }
    }
    Ok(Gap::Exhausted { lookahead })
}

// ---------------------------------------------------------------------------
// Dilation check
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct DilationReport {
    pub factor: u64,
    pub checkpoints_checked: usize,
    pub first_failure: Option<u64>,
}

impl DilationReport {
    pub fn passed(&self) -> bool {
        self.first_failure.is_none()
    }
}

/// Verifies `ν_{kN}(kA) = ν_N(A) / k` exactly at every schedule checkpoint.
pub fn dilate_density_check(
    expr: &SetExpr,
    factor: u64,
    cfg: &EstimatorConfig,
) -> Result<DilationReport, Error> {
    cfg.validate()?;
    let dilated = SetExpr::dilate(factor, expr.clone())?;
    let mut checked = 0;
    let mut first_failure = None;
    for n in cfg.schedule() {
        let lhs = dilated.prefix_count(factor * n)?;
        let rhs = expr.prefix_count(n)?;
        checked += 1;
        if lhs != rhs {
            first_failure = Some(n);
            break;
        }
    }
    Ok(DilationReport { factor, checkpoints_checked: checked, first_failure })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;
    use crate::sets::parser::parse;
    use crate::sets::BlockRule;

    #[test]
    fn partial_averages() {
        let e = parse("residue(0 mod 3)").unwrap();
        assert_eq!(partial_average(&e, 10).unwrap(), rat(3, 10));
        assert_eq!(partial_average(&SetExpr::odds(), 7).unwrap(), rat(4, 7));
        assert_eq!(partial_average(&SetExpr::naturals(), 5).unwrap(), rat(1, 1));
    }

    #[test]
    fn block_boundary_averages_are_exact() {
        // runs 2^(n-1): at even boundaries the average is exactly 2/3
        let spec = crate::sets::BlockSpec::new(BlockRule::Geometric { scale: 1, base: 2 }).unwrap();
        let e = SetExpr::Blocks(std::sync::Arc::new(spec));
        for k in 1..=10u32 {
            let z2k = (1u64 << (2 * k)) - 1;
            assert_eq!(partial_average(&e, z2k).unwrap(), rat(2, 3));
        }
    }

    #[test]
    fn charge_rules() {
        let c = exact_charge(&parse("residue(0 mod 7)").unwrap()).unwrap();
        assert_eq!(c.value, rat(1, 7));
        assert_eq!(c.provenance, Provenance::ClosedForm);

        let c = exact_charge(&parse("residue(0 mod 2) | residue(0 mod 3)").unwrap()).unwrap();
        assert_eq!(c.value, rat(2, 3));
        assert_eq!(c.provenance, Provenance::PeriodCount);

        let c = exact_charge(&parse("blocks(n^2)").unwrap()).unwrap();
        assert_eq!(c.value, rat(1, 2));
        assert_eq!(c.provenance, Provenance::BlockFormula);

        let c = exact_charge(&parse("~powers(2)").unwrap()).unwrap();
        assert_eq!(c.value, rat(1, 1));

        // geometric blocks have no Cesàro limit
        assert!(exact_charge(&parse("blocks(2^(n-1))").unwrap()).is_none());
        // and neither does the doubled version
        assert!(exact_charge(&parse("dilate(2, blocks(2^(n-1)))").unwrap()).is_none());
        // the intersection defining it is also unavailable
        let bc = parse("residue(0 mod 2) & interleave(blocks(2^(n-1)))").unwrap();
        assert!(exact_charge(&bc).is_none());
    }

    #[test]
    fn null_absorption() {
        let c = exact_charge(&parse("residue(1 mod 2) \\ {1}").unwrap()).unwrap();
        assert_eq!(c.value, rat(1, 2));
        let c = exact_charge(&parse("residue(0 mod 3) | squares").unwrap()).unwrap();
        assert_eq!(c.value, rat(1, 3));
        let c = exact_charge(&parse("squares & blocks(2^(n-1))").unwrap()).unwrap();
        assert_eq!(c.value, rat(0, 1));
        let c = exact_charge(&parse("primes ^ residue(0 mod 5)").unwrap()).unwrap();
        assert_eq!(c.value, rat(1, 5));
        // dyadic family member: dilate(8, odds minus {1}) has charge 1/16
        let c = exact_charge(&parse("dilate(8, residue(1 mod 2) \\ {1})").unwrap()).unwrap();
        assert_eq!(c.value, rat(1, 16));
    }

    #[test]
    fn symm_diff_pattern_rules() {
        let odds = SetExpr::odds();
        let trimmed = parse("residue(1 mod 2) \\ {1}").unwrap();
        let d = SetExpr::symm_diff(odds.clone(), trimmed);
        let c = exact_charge(&d).unwrap();
        assert_eq!(c.value, rat(0, 1));

        let grown = SetExpr::union(odds.clone(), SetExpr::squares());
        let d = SetExpr::symm_diff(odds, grown);
        assert_eq!(exact_charge(&d).unwrap().value, rat(0, 1));
    }

    #[test]
    fn period_cap_blocks_huge_lcms() {
        // lcm(2^21-ish) via dilated residues is out of reach of the period rule
        let mut e = SetExpr::residue(0, 1024).unwrap();
        e = SetExpr::union(e, SetExpr::residue(1, 2048).unwrap());
        assert!(exact_charge(&e).is_some());
        let f = SetExpr::union(
            SetExpr::residue(0, 999_983).unwrap(),
            SetExpr::residue(1, 999_979).unwrap(),
        );
        assert!(exact_charge(&f).is_none());
    }

    #[test]
    fn schedule_is_strictly_increasing() {
        let cfg = EstimatorConfig::with_horizon(100_000);
        let s = cfg.schedule();
        assert!(s.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(*s.last().unwrap(), 100_000);
        assert_eq!(s[0], 64);
    }

    #[test]
    fn residue_profile_converges() {
        let cfg = EstimatorConfig::with_horizon(100_000);
        let p = density_profile(&SetExpr::odds(), &cfg).unwrap();
        assert!(p.converged);
        assert!(!p.is_heuristic());
        let half = rat(1, 2);
        assert!((p.upper_est.clone() - &half).abs() < rat(1, 1000));
        assert!((p.lower_est.clone() - &half).abs() < rat(1, 1000));
        assert!(p.lower_est <= half && half <= p.upper_est);
    }

    #[test]
    fn squares_profile_is_small_and_sandwiches_zero() {
        let cfg = EstimatorConfig::with_horizon(1_000_000);
        let p = density_profile(&SetExpr::squares(), &cfg).unwrap();
        assert!(p.upper_est <= rat(2, 1000));
        assert_eq!(p.lower_est, rat(0, 1)); // exact charge folded in
    }

    #[test]
    fn geometric_blocks_profile_straddles() {
        let e = parse("blocks(2^(n-1))").unwrap();
        let cfg = EstimatorConfig::with_horizon(1_000_000);
        let p = density_profile(&e, &cfg).unwrap();
        assert!(p.is_heuristic());
        assert!(p.upper_est >= rat(66, 100) && p.upper_est <= rat(6675, 10000));
        assert!(p.lower_est >= rat(3325, 10000) && p.lower_est <= rat(34, 100));
        assert!(!p.converged);
    }

    #[test]
    fn gap_functions() {
        let r5 = parse("residue(0 mod 5)").unwrap();
        assert_eq!(gap_to_member(&r5, 7, 100).unwrap(), Gap::Found(3));
        assert_eq!(gap_to_absence(&SetExpr::naturals(), 17, 100).unwrap(), Gap::Unbounded);
        assert_eq!(
            gap_to_absence(&SetExpr::complement(SetExpr::empty()), 17, 100).unwrap(),
            Gap::Unbounded
        );
        let f = SetExpr::finite(vec![3, 9]).unwrap();
        assert_eq!(gap_to_member(&f, 4, 100).unwrap(), Gap::Found(5));
        assert_eq!(gap_to_member(&f, 9, 100).unwrap(), Gap::Unbounded);
        // bounded-search marker
        let sq = SetExpr::squares();
        assert_eq!(gap_to_member(&sq, 100, 10).unwrap(), Gap::Exhausted { lookahead: 10 });
        assert_eq!(gap_to_member(&sq, 100, 25).unwrap(), Gap::Found(21));
    }

    #[test]
    fn gap_matches_scan_for_residues() {
        for m in 1..=6u64 {
            for r in 0..m {
                let e = SetExpr::residue(r, m).unwrap();
                for n in 0..50u64 {
                    let fast = gap_to_member(&e, n, 1000).unwrap();
                    let slow = scan_gap(&e, n, 1000, true).unwrap();
                    assert_eq!(fast, slow, "P r={r} m={m} n={n}");
                    let fast = gap_to_absence(&e, n, 1000).unwrap();
                    let slow = scan_gap(&e, n, 1000, false).unwrap();
                    if m == 1 {
                        assert_eq!(fast, Gap::Unbounded);
                    } else {
                        assert_eq!(fast, slow, "Q r={r} m={m} n={n}");
                    }
                }
            }
        }
    }

    #[test]
    fn power_blocks_gap_formula() {
        // at the even boundary Z_{2N}, the next member is (2N+1)^q + 1 ahead
        for q in [1u32, 2, 3] {
            let e = SetExpr::blocks(BlockRule::Power { exponent: q }).unwrap();
            let spec = match &e {
                SetExpr::Blocks(s) => s.clone(),
                _ => unreachable!(),
            };
            for big_n in 1..=6u64 {
                let z2n = spec.boundary(2 * big_n as usize).unwrap() as u64;
                let expect = (2 * big_n + 1).pow(q) + 1;
                assert_eq!(
                    gap_to_member(&e, z2n, expect + 10).unwrap(),
                    Gap::Found(expect),
                    "q={q} N={big_n}"
                );
            }
        }
    }

    #[test]
    fn dilation_check_passes() {
        let cfg = EstimatorConfig { horizon: 10_000, ..Default::default() };
        let r = dilate_density_check(&SetExpr::odds(), 2, &cfg).unwrap();
        assert!(r.passed());
        let r = dilate_density_check(&SetExpr::squares(), 3, &cfg).unwrap();
        assert!(r.passed());
        let blocks = parse("blocks(2^(n-1))").unwrap();
        let cfg = EstimatorConfig { horizon: 100_000, ..Default::default() };
        let r = dilate_density_check(&blocks, 2, &cfg).unwrap();
        assert!(r.passed());
    }

    #[test]
    fn symm_diff_dominates_value_gap() {
        // ν_N(A △ B) >= |ν_N(A) - ν_N(B)| as exact integers
        let pairs = [
            ("residue(0 mod 2)", "residue(0 mod 4)"),
            ("residue(0 mod 3)", "squares"),
            ("blocks(2^(n-1))", "residue(0 mod 2)"),
        ];
        for (sa, sb) in pairs {
            let a = parse(sa).unwrap();
            let b = parse(sb).unwrap();
            let d = SetExpr::symm_diff(a.clone(), b.clone());
            for n in (100..=5000u64).step_by(331) {
                let ca = a.prefix_count(n).unwrap() as i64;
                let cb = b.prefix_count(n).unwrap() as i64;
                let cd = d.prefix_count(n).unwrap() as i64;
                assert!(cd >= (ca - cb).abs(), "{sa} vs {sb} at {n}");
            }
        }
    }
}
