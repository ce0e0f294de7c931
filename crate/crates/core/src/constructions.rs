//! Factories for the named set families: greedy target-density sets, the
//! dyadic family, midpoint sets and the example catalog.

use crate::density::{exact_charge, Charge, Provenance};
use crate::error::Error;
use crate::rational::{format_rat, Rat, Target, FIXED_BITS};
use crate::sets::{subset_upto, BlockRule, SequentialRule, SetExpr, StreamSet};

/// Greedy construction: 1 is always a member, and `n >= 2` joins exactly
/// when the partial average so far is strictly below the target.
///
/// The decision stream is memoized, so membership is consistent across calls
/// and across cache segment boundaries.
struct GreedyRule {
    target: Target,
}

impl SequentialRule for GreedyRule {
    fn step(&mut self, n: u64, members_so_far: u64) -> Result<bool, Error> {
        if n == 1 {
            return Ok(true);
        }
        self.target.gt_average(members_so_far, n - 1)
    }
}

fn greedy_label(target: &Target) -> String {
    match target {
        Target::Exact { .. } => format!("greedy({})", format_rat(&target.as_rat())),
        Target::Fixed { num } => format!("greedy(0x{num:x}/2^{FIXED_BITS})"),
    }
}

/// The greedy set for a target density given as an exact rational in [0,1].
pub fn greedy_target_rat(s: Rat) -> Result<SetExpr, Error> {
    greedy_target(Target::from_rat(s)?)
}

/// The greedy set for any comparison target (exact rational or 96-bit
/// fixed-point approximation of an irrational).
///
/// The declared charge equals the target; for fixed-point targets that is
/// the dyadic truncation of the intended real.
pub fn greedy_target(target: Target) -> Result<SetExpr, Error> {
    let label = greedy_label(&target);
    let charge = Charge::new(target.as_rat(), Provenance::ClosedForm);
    let set = StreamSet::new(label, Box::new(GreedyRule { target })).with_charge(charge);
    Ok(SetExpr::stream(set))
}

/// Greedy target from an `f64` in [0,1], rounded to 96 fixed-point bits.
pub fn greedy_target_f64(s: f64) -> Result<SetExpr, Error> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::TargetRange(format!("{s}")));
    }
    let num = (s * (1u128 << FIXED_BITS) as f64) as u128;
    greedy_target(Target::from_fixed_bits(num.min(1u128 << FIXED_BITS))?)
}

/// The dyadic family member `{2^k * m : m odd, m >= 3}` with exact charge
/// `2^-(k+1)`.
pub fn dyadic_family(k: u32) -> Result<SetExpr, Error> {
    if k > 60 {
        return Err(Error::invalid("dyadic index must be <= 60"));
    }
    let odds_ge_3 = SetExpr::difference(SetExpr::odds(), SetExpr::finite(vec![1])?);
    SetExpr::dilate(1u64 << k, odds_ge_3)
}

/// Union of the dyadic family for `k <= max_k` (all of ℕ except powers of
/// two, up to the truncation).
pub fn dyadic_union(max_k: u32) -> Result<SetExpr, Error> {
    let mut out = dyadic_family(0)?;
    for k in 1..=max_k {
        out = SetExpr::union(out, dyadic_family(k)?);
    }
    Ok(out)
}

/// Midpoint membership: all of the lower set plus every second element of
/// `upper \ lower` in increasing order.
struct MidpointRule {
    lower: SetExpr,
    upper: SetExpr,
    diff_seen: u64,
}

impl SequentialRule for MidpointRule {
    fn step(&mut self, n: u64, _members: u64) -> Result<bool, Error> {
        if self.lower.contains(n)? {
            return Ok(true);
        }
        if self.upper.contains(n)? {
            self.diff_seen += 1;
            return Ok(self.diff_seen % 2 == 0);
        }
        Ok(false)
    }
}

/// Builds the midpoint set between `lower ⊆ upper`, verifying the inclusion
/// up to `verify_horizon`. When both endpoint charges are exact the result
/// carries the derived charge `(ν(lower) + ν(upper)) / 2`.
pub fn midpoint_set(
    lower: &SetExpr,
    upper: &SetExpr,
    verify_horizon: u64,
) -> Result<SetExpr, Error> {
    if let Some(n) = subset_upto(lower, upper, verify_horizon)? {
        return Err(Error::SubsetViolation { n });
    }
    let lo_charge = exact_charge(lower);
    let hi_charge = exact_charge(upper);
    let declared = match (lo_charge, hi_charge) {
        (Some(lo), Some(hi)) => {
            if lo.value > hi.value {
                return Err(Error::invalid("endpoint charges are out of order"));
            }
            Some((lo.value + hi.value) / Rat::from_integer(2))
        }
        _ => None,
    };
    Ok(midpoint_with_charge(lower, upper, declared))
}

/// Midpoint set with a caller-supplied charge (used when endpoint charges
/// are carried by a chain rather than derivable from the expressions).
pub fn midpoint_with_charge(
    lower: &SetExpr,
    upper: &SetExpr,
    charge: Option<Rat>,
) -> SetExpr {
    let label = format!("midpoint({lower}, {upper})");
    let rule = MidpointRule { lower: lower.clone(), upper: upper.clone(), diff_seen: 0 };
    let mut set = StreamSet::new(label, Box::new(rule));
    if let Some(v) = charge {
        set = set.with_charge(Charge::new(v, Provenance::DerivedRule));
    }
    SetExpr::stream(set)
}

/// The named example catalog: multiples, geometric and power blocks, the
/// interleaved pair and its intersection, the null families and the dyadic
/// family.
pub fn catalog() -> Vec<(String, SetExpr)> {
    let mut out: Vec<(String, SetExpr)> = Vec::new();
    for m in 2..=12u64 {
        out.push((format!("multiples-{m}"), SetExpr::residue(0, m).unwrap()));
    }
    let geometric = SetExpr::blocks(BlockRule::Geometric { scale: 1, base: 2 }).unwrap();
    out.push(("blocks-geometric".into(), geometric.clone()));
    out.push(("b".into(), SetExpr::evens()));
    let c = SetExpr::interleave(geometric.clone());
    out.push(("c".into(), c.clone()));
    out.push(("b-and-c".into(), SetExpr::intersection(SetExpr::evens(), c)));
    for q in 1..=3u32 {
        out.push((
            format!("blocks-power-{q}"),
            SetExpr::blocks(BlockRule::Power { exponent: q }).unwrap(),
        ));
    }
    out.push(("squares".into(), SetExpr::squares()));
    out.push(("cubes".into(), SetExpr::cubes()));
    out.push(("powers-2".into(), SetExpr::powers(2).unwrap()));
    out.push(("primes".into(), SetExpr::primes()));
    for k in 0..=20u32 {
        out.push((format!("dyadic-{k}"), dyadic_family(k).unwrap()));
    }
    out.push(("dyadic-union-20".into(), dyadic_union(20).unwrap()));
    out
}

pub fn catalog_get(name: &str) -> Option<SetExpr> {
    catalog().into_iter().find(|(n, _)| n == name).map(|(_, e)| e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::partial_average;
    use crate::rational::rat;

    /// Direct transcription of the greedy construction, kept separate from
    /// the stream implementation as an oracle.
    fn greedy_oracle(num: u64, den: u64, upto: u64) -> Vec<bool> {
        let mut member = vec![false; upto as usize + 1];
        member[1] = true;
        let mut count = 1u64;
        for n in 1..upto {
            // decide membership of n+1 from the average over 1..=n
            if (count as u128) * (den as u128) < (n as u128) * (num as u128) {
                member[(n + 1) as usize] = true;
                count += 1;
            }
        }
        member
    }

    #[test]
    fn greedy_matches_direct_simulation() {
        for (num, den) in [(1u64, 2u64), (1, 3), (2, 5), (0, 1), (1, 1), (7, 9)] {
            let e = greedy_target_rat(rat(num as i128, den as i128)).unwrap();
            let oracle = greedy_oracle(num, den, 3000);
            for n in 1..=3000u64 {
                assert_eq!(
                    e.contains(n).unwrap(),
                    oracle[n as usize],
                    "target {num}/{den} at {n}"
                );
            }
        }
    }

    #[test]
    fn greedy_zero_and_one() {
        let zero = greedy_target_rat(rat(0, 1)).unwrap();
        assert!(zero.contains(1).unwrap());
        assert_eq!(zero.prefix_count(10_000).unwrap(), 1); // stays {1}
        let one = greedy_target_rat(rat(1, 1)).unwrap();
        assert_eq!(one.prefix_count(10_000).unwrap(), 9_999); // misses only 2
        assert!(!one.contains(2).unwrap());
    }

    #[test]
    fn greedy_charge_is_target() {
        let e = greedy_target_rat(rat(2, 5)).unwrap();
        let c = exact_charge(&e).unwrap();
        assert_eq!(c.value, rat(2, 5));
        assert_eq!(c.provenance, Provenance::ClosedForm);
    }

    #[test]
    fn dyadic_members_and_charges() {
        let d0 = dyadic_family(0).unwrap();
        assert!(d0.contains(3).unwrap() && d0.contains(5).unwrap());
        assert!(!d0.contains(1).unwrap() && !d0.contains(2).unwrap());
        assert_eq!(exact_charge(&d0).unwrap().value, rat(1, 2));

        let d1 = dyadic_family(1).unwrap();
        assert!(d1.contains(6).unwrap() && d1.contains(10).unwrap() && d1.contains(14).unwrap());
        assert!(!d1.contains(4).unwrap() && !d1.contains(8).unwrap());
        assert_eq!(exact_charge(&d1).unwrap().value, rat(1, 4));

        for k in 0..=10u32 {
            let dk = dyadic_family(k).unwrap();
            assert_eq!(exact_charge(&dk).unwrap().value, rat(1, 1 << (k + 1)));
        }
    }

    #[test]
    fn dyadic_union_misses_only_powers_of_two() {
        let d = dyadic_union(20).unwrap();
        let p2 = SetExpr::powers(2).unwrap();
        for n in 1..=3000u64 {
            assert_eq!(d.contains(n).unwrap(), !p2.contains(n).unwrap(), "n={n}");
        }
    }

    #[test]
    fn midpoint_basic_cases() {
        // empty vs naturals: every second element
        let m = midpoint_set(&SetExpr::empty(), &SetExpr::naturals(), 1000).unwrap();
        assert_eq!(m.prefix_count(1000).unwrap(), 500);
        let c = exact_charge(&m).unwrap();
        assert_eq!(c.value, rat(1, 2));

        // B = C: midpoint equals B
        let odds = SetExpr::odds();
        let m = midpoint_set(&odds, &odds, 1000).unwrap();
        for n in 1..=500 {
            assert_eq!(m.contains(n).unwrap(), odds.contains(n).unwrap());
        }

        // multiples of 4 inside evens: expected charge 3/8
        let m = midpoint_set(
            &SetExpr::residue(0, 4).unwrap(),
            &SetExpr::evens(),
            10_000,
        )
        .unwrap();
        assert_eq!(exact_charge(&m).unwrap().value, rat(3, 8));
        let v = partial_average(&m, 100_000).unwrap();
        assert!((v - rat(3, 8)).abs() < rat(1, 100));
    }

    #[test]
    fn midpoint_rejects_non_subset() {
        let err = midpoint_set(&SetExpr::evens(), &SetExpr::residue(0, 4).unwrap(), 100);
        assert!(matches!(err, Err(Error::SubsetViolation { n: 2 })));
    }

    #[test]
    fn midpoint_is_sandwiched() {
        let lo = SetExpr::residue(0, 6).unwrap();
        let hi = SetExpr::residue(0, 3).unwrap();
        let m = midpoint_set(&lo, &hi, 5000).unwrap();
        assert_eq!(subset_upto(&lo, &m, 5000).unwrap(), None);
        assert_eq!(subset_upto(&m, &hi, 5000).unwrap(), None);
    }

    #[test]
    fn catalog_names_resolve() {
        assert!(catalog_get("multiples-3").is_some());
        assert!(catalog_get("b-and-c").is_some());
        assert!(catalog_get("dyadic-20").is_some());
        assert!(catalog_get("nope").is_none());
        assert_eq!(
            exact_charge(&catalog_get("multiples-3").unwrap()).unwrap().value,
            rat(1, 3)
        );
    }

    #[test]
    fn interleave_parity_inside_catalog_c() {
        let c = catalog_get("c").unwrap();
        // over even horizons the average is exactly 1/2
        for big_n in [10u64, 100, 1000, 10_000] {
            assert_eq!(partial_average(&c, 2 * big_n).unwrap(), rat(1, 2));
        }
    }

    #[test]
    fn b_and_c_equals_doubled_blocks() {
        let bc = catalog_get("b-and-c").unwrap();
        let geometric = SetExpr::blocks(BlockRule::Geometric { scale: 1, base: 2 }).unwrap();
        let doubled = SetExpr::dilate(2, geometric).unwrap();
        for n in 1..=10_000u64 {
            assert_eq!(bc.contains(n).unwrap(), doubled.contains(n).unwrap(), "n={n}");
        }
    }
}
