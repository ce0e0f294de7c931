//! Symbolic subsets of ℕ with decidable membership, exact prefix counting
//! and a small expression DSL.

pub mod blocks;
pub mod parser;
pub mod primes;
pub mod serialize;
pub mod stream;

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use crate::error::Error;
use crate::MAX_HORIZON;
pub use blocks::{BlockRule, BlockSpec};
pub use stream::{SequentialRule, StreamSet};

/// Structured null families with closed-form counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NullFamily {
    Squares,
    Cubes,
    /// Powers of a base `b >= 2`, including `b^0 = 1`.
    Powers(u64),
    Primes,
}

/// An opaque membership oracle. The constructor is a promise that the
/// function is pure; results are cached per argument.
pub struct PredicateSet {
    label: String,
    oracle: Box<dyn Fn(u64) -> Result<bool, String> + Send + Sync>,
    cache: Mutex<HashMap<u64, bool>>,
}

impl std::fmt::Debug for PredicateSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PredicateSet").field("label", &self.label).finish()
    }
}

impl PredicateSet {
    pub fn label(&self) -> &str {
        &self.label
    }

    fn contains(&self, n: u64) -> Result<bool, Error> {
        if let Some(&hit) = self.cache.lock().unwrap().get(&n) {
            return Ok(hit);
        }
        let v = (self.oracle)(n).map_err(|msg| Error::Oracle { n, msg })?;
        self.cache.lock().unwrap().insert(n, v);
        Ok(v)
    }
}

/// A symbolic, lazily evaluable subset of ℕ (naturals excluding 0).
///
/// Values are immutable and cheap to clone; memoizing variants synchronize
/// their caches internally, so expressions may be shared across threads.
#[derive(Debug, Clone)]
pub enum SetExpr {
    /// Strictly increasing list of positive integers.
    Finite(Arc<Vec<u64>>),
    /// `{ n >= 1 : n ≡ r (mod m) }` with `0 <= r < m`.
    Residue { r: u64, m: u64 },
    Blocks(Arc<BlockSpec>),
    NullFamily(NullFamily),
    /// From a base set A, the set holding exactly one of `{2k-1, 2k}` per
    /// pair: `2k` when `k ∈ A`, else `2k-1`.
    Interleave(Arc<SetExpr>),
    /// `{ k * n : n ∈ inner }`.
    Dilate { factor: u64, inner: Arc<SetExpr> },
    Union(Arc<SetExpr>, Arc<SetExpr>),
    Intersection(Arc<SetExpr>, Arc<SetExpr>),
    Difference(Arc<SetExpr>, Arc<SetExpr>),
    SymmDiff(Arc<SetExpr>, Arc<SetExpr>),
    Complement(Arc<SetExpr>),
    /// Memoized decision stream (greedy sets, null modifications, midpoints).
    Stream(Arc<StreamSet>),
    Predicate(Arc<PredicateSet>),
}

impl SetExpr {
    pub fn finite(mut elems: Vec<u64>) -> Result<Self, Error> {
        if elems.iter().any(|&x| x == 0) {
            return Err(Error::invalid("finite sets hold positive integers"));
        }
        elems.sort_unstable();
        elems.dedup();
        Ok(SetExpr::Finite(Arc::new(elems)))
    }

    pub fn empty() -> Self {
        SetExpr::Finite(Arc::new(Vec::new()))
    }

    /// The whole of ℕ, as the residue class 0 mod 1.
    pub fn naturals() -> Self {
        SetExpr::Residue { r: 0, m: 1 }
    }

    pub fn residue(r: u64, m: u64) -> Result<Self, Error> {
        if m == 0 {
            return Err(Error::invalid("modulus must be >= 1"));
        }
        if r >= m {
            return Err(Error::invalid(format!("residue {r} must be < modulus {m}")));
        }
        Ok(SetExpr::Residue { r, m })
    }

    pub fn evens() -> Self {
        SetExpr::Residue { r: 0, m: 2 }
    }

    pub fn odds() -> Self {
        SetExpr::Residue { r: 1, m: 2 }
    }

    pub fn blocks(rule: BlockRule) -> Result<Self, Error> {
        Ok(SetExpr::Blocks(Arc::new(BlockSpec::new(rule)?)))
    }

    pub fn squares() -> Self {
        SetExpr::NullFamily(NullFamily::Squares)
    }

    pub fn cubes() -> Self {
        SetExpr::NullFamily(NullFamily::Cubes)
    }

    pub fn powers(base: u64) -> Result<Self, Error> {
        if base < 2 {
            return Err(Error::invalid("powers need base >= 2"));
        }
        Ok(SetExpr::NullFamily(NullFamily::Powers(base)))
    }

    pub fn primes() -> Self {
        SetExpr::NullFamily(NullFamily::Primes)
    }

    pub fn interleave(base: SetExpr) -> Self {
        SetExpr::Interleave(Arc::new(base))
    }

    pub fn dilate(factor: u64, inner: SetExpr) -> Result<Self, Error> {
        if factor == 0 {
            return Err(Error::invalid("dilation factor must be >= 1"));
        }
        Ok(SetExpr::Dilate { factor, inner: Arc::new(inner) })
    }

    pub fn union(a: SetExpr, b: SetExpr) -> Self {
        SetExpr::Union(Arc::new(a), Arc::new(b))
    }

    pub fn intersection(a: SetExpr, b: SetExpr) -> Self {
        SetExpr::Intersection(Arc::new(a), Arc::new(b))
    }

    pub fn difference(a: SetExpr, b: SetExpr) -> Self {
        SetExpr::Difference(Arc::new(a), Arc::new(b))
    }

    pub fn symm_diff(a: SetExpr, b: SetExpr) -> Self {
        SetExpr::SymmDiff(Arc::new(a), Arc::new(b))
    }

    pub fn complement(a: SetExpr) -> Self {
        SetExpr::Complement(Arc::new(a))
    }

    pub fn stream(set: StreamSet) -> Self {
        SetExpr::Stream(Arc::new(set))
    }

    pub fn predicate(
        label: impl Into<String>,
        oracle: impl Fn(u64) -> Result<bool, String> + Send + Sync + 'static,
    ) -> Self {
        SetExpr::Predicate(Arc::new(PredicateSet {
            label: label.into(),
            oracle: Box::new(oracle),
            cache: Mutex::new(HashMap::new()),
        }))
    }

    /// Indicator `I_A(n)` for `n >= 1`.
    pub fn contains(&self, n: u64) -> Result<bool, Error> {
        if n == 0 {
            return Err(Error::invalid("membership is defined for n >= 1"));
        }
        match self {
            SetExpr::Finite(v) => Ok(v.binary_search(&n).is_ok()),
            SetExpr::Residue { r, m } => Ok(n % m == *r),
            SetExpr::Blocks(spec) => spec.contains(n),
            SetExpr::NullFamily(fam) => fam.contains(n),
            SetExpr::Interleave(base) => {
                if n % 2 == 0 {
                    base.contains(n / 2)
                } else {
                    Ok(!base.contains((n + 1) / 2)?)
                }
            }
            SetExpr::Dilate { factor, inner } => {
                if n % factor != 0 {
                    Ok(false)
                } else {
                    inner.contains(n / factor)
                }
            }
            SetExpr::Union(a, b) => Ok(a.contains(n)? || b.contains(n)?),
            SetExpr::Intersection(a, b) => Ok(a.contains(n)? && b.contains(n)?),
            SetExpr::Difference(a, b) => Ok(a.contains(n)? && !b.contains(n)?),
            SetExpr::SymmDiff(a, b) => Ok(a.contains(n)? != b.contains(n)?),
            SetExpr::Complement(a) => Ok(!a.contains(n)?),
            SetExpr::Stream(s) => s.contains(n),
            SetExpr::Predicate(p) => p.contains(n),
        }
    }

    /// `|A ∩ {1..N}|`, using a closed-form count where the variant has one
    /// and a single streaming pass otherwise.
    pub fn prefix_count(&self, n: u64) -> Result<u64, Error> {
        if n > MAX_HORIZON {
            return Err(Error::HorizonOverflow(n as u128));
        }
        if n == 0 {
            return Ok(0);
        }
        match self {
            SetExpr::Finite(v) => Ok(v.partition_point(|&x| x <= n) as u64),
            SetExpr::Residue { r, m } => {
                if *r == 0 {
                    Ok(n / m)
                } else if n < *r {
                    Ok(0)
                } else {
                    Ok((n - r) / m + 1)
                }
            }
            SetExpr::Blocks(spec) => spec.count(n),
            SetExpr::NullFamily(fam) => fam.count(n),
            SetExpr::Interleave(base) => {
                let mut c = n / 2;
                if n % 2 == 1 && !base.contains((n + 1) / 2)? {
                    c += 1;
                }
                Ok(c)
            }
            SetExpr::Dilate { factor, inner } => inner.prefix_count(n / factor),
            SetExpr::Complement(a) => Ok(n - a.prefix_count(n)?),
            SetExpr::Stream(s) => s.count(n),
            _ => {
                let mut c = 0u64;
                for k in 1..=n {
                    if self.contains(k)? {
                        c += 1;
                    }
                }
                Ok(c)
            }
        }
    }

    /// Whether `prefix_count` avoids a per-call streaming pass.
    pub fn has_fast_count(&self) -> bool {
        match self {
            SetExpr::Finite(_)
            | SetExpr::Residue { .. }
            | SetExpr::Blocks(_)
            | SetExpr::NullFamily(_)
            | SetExpr::Stream(_) => true,
            SetExpr::Interleave(base) => base.has_fast_count(),
            SetExpr::Dilate { inner, .. } => inner.has_fast_count(),
            SetExpr::Complement(a) => a.has_fast_count(),
            SetExpr::Union(..)
            | SetExpr::Intersection(..)
            | SetExpr::Difference(..)
            | SetExpr::SymmDiff(..)
            | SetExpr::Predicate(_) => false,
        }
    }

    /// Horizons where this expression's density is structurally interesting
    /// (block boundaries, perfect powers), capped at the largest 512 per
    /// variant. Used to enrich checkpoint schedules.
    pub fn structural_checkpoints(&self, horizon: u64) -> Vec<u64> {
        const CAP: usize = 512;
        fn capped(mut v: Vec<u64>) -> Vec<u64> {
            if v.len() > CAP {
                v = v.split_off(v.len() - CAP);
            }
            v
        }
        match self {
            SetExpr::Blocks(spec) => capped(spec.boundaries_upto(horizon).unwrap_or_default()),
            SetExpr::NullFamily(NullFamily::Squares) => {
                capped((1..=horizon.isqrt()).map(|m| m * m).collect())
            }
            SetExpr::NullFamily(NullFamily::Cubes) => {
                capped((1..=icbrt(horizon)).map(|m| m * m * m).collect())
            }
            SetExpr::NullFamily(NullFamily::Powers(b)) => {
                let mut v = vec![];
                let mut p = 1u64;
                while p <= horizon {
                    v.push(p);
                    match p.checked_mul(*b) {
                        Some(next) => p = next,
                        None => break,
                    }
                }
                capped(v)
            }
            SetExpr::NullFamily(NullFamily::Primes) => vec![],
            SetExpr::Interleave(base) => capped(
                base.structural_checkpoints(horizon / 2)
                    .into_iter()
                    .map(|c| c * 2)
                    .collect(),
            ),
            SetExpr::Dilate { factor, inner } => capped(
                inner
                    .structural_checkpoints(horizon / factor)
                    .into_iter()
                    .map(|c| c * factor)
                    .collect(),
            ),
            SetExpr::Complement(a) => a.structural_checkpoints(horizon),
            SetExpr::Union(a, b)
            | SetExpr::Intersection(a, b)
            | SetExpr::Difference(a, b)
            | SetExpr::SymmDiff(a, b) => {
                let mut v = a.structural_checkpoints(horizon);
                v.extend(b.structural_checkpoints(horizon));
                v.sort_unstable();
                v.dedup();
                capped(v)
            }
            _ => vec![],
        }
    }
}

fn icbrt(n: u64) -> u64 {
    let mut r = (n as f64).cbrt() as u64;
    while r > 0 && (r as u128) * (r as u128) * (r as u128) > n as u128 {
        r -= 1;
    }
    while ((r + 1) as u128) * ((r + 1) as u128) * ((r + 1) as u128) <= n as u128 {
        r += 1;
    }
    r
}

impl NullFamily {
    fn contains(&self, n: u64) -> Result<bool, Error> {
        match self {
            NullFamily::Squares => {
                let s = n.isqrt();
                Ok(s * s == n)
            }
            NullFamily::Cubes => {
                let c = icbrt(n);
                Ok(c * c * c == n)
            }
            NullFamily::Powers(b) => {
                let mut m = n;
                while m % b == 0 {
                    m /= b;
                }
                Ok(m == 1)
            }
            NullFamily::Primes => primes::is_prime(n),
        }
    }

    fn count(&self, n: u64) -> Result<u64, Error> {
        match self {
            NullFamily::Squares => Ok(n.isqrt()),
            NullFamily::Cubes => Ok(icbrt(n)),
            NullFamily::Powers(b) => {
                let mut c = 0u64;
                let mut p = 1u64;
                while p <= n {
                    c += 1;
                    match p.checked_mul(*b) {
                        Some(next) => p = next,
                        None => break,
                    }
                }
                Ok(c)
            }
            NullFamily::Primes => primes::count_upto(n),
        }
    }
}

/// First `n <= horizon` in `a` but not in `b`, or `None` when
/// `a ∩ {1..horizon} ⊆ b`.
pub fn subset_upto(a: &SetExpr, b: &SetExpr, horizon: u64) -> Result<Option<u64>, Error> {
    if horizon > MAX_HORIZON {
        return Err(Error::HorizonOverflow(horizon as u128));
    }
    if subset_symbolic(a, b) == Some(true) {
        return Ok(None);
    }
    for n in 1..=horizon {
        if a.contains(n)? && !b.contains(n)? {
            return Ok(Some(n));
        }
    }
    Ok(None)
}

/// Structural subset proofs for the few shapes the spec calls out:
/// residue-class divisibility, finite lists against anything decidable, and
/// syntactically identical expressions.
pub fn subset_symbolic(a: &SetExpr, b: &SetExpr) -> Option<bool> {
    if a == b {
        return Some(true);
    }
    match (a, b) {
        (SetExpr::Residue { r: ra, m: ma }, SetExpr::Residue { r: rb, m: mb }) => {
            Some(ma % mb == 0 && ra % mb == *rb)
        }
        (SetExpr::Finite(elems), _) => {
            let mut all = true;
            for &x in elems.iter() {
                match b.contains(x) {
                    Ok(true) => {}
                    Ok(false) => {
                        all = false;
                        break;
                    }
                    Err(_) => return None,
                }
            }
            Some(all)
        }
        (_, SetExpr::Residue { r: 0, m: 1 }) => Some(true),
        _ => None,
    }
}

impl PartialEq for SetExpr {
    fn eq(&self, other: &Self) -> bool {
        use SetExpr::*;
        match (self, other) {
            (Finite(a), Finite(b)) => a == b,
            (Residue { r: r1, m: m1 }, Residue { r: r2, m: m2 }) => r1 == r2 && m1 == m2,
            (Blocks(a), Blocks(b)) => a == b,
            (NullFamily(a), NullFamily(b)) => a == b,
            (Interleave(a), Interleave(b)) => a == b,
            (Dilate { factor: f1, inner: a }, Dilate { factor: f2, inner: b }) => {
                f1 == f2 && a == b
            }
            (Union(a1, b1), Union(a2, b2))
            | (Intersection(a1, b1), Intersection(a2, b2))
            | (Difference(a1, b1), Difference(a2, b2))
            | (SymmDiff(a1, b1), SymmDiff(a2, b2)) => a1 == a2 && b1 == b2,
            (Complement(a), Complement(b)) => a == b,
            (Stream(a), Stream(b)) => a.label() == b.label(),
            (Predicate(a), Predicate(b)) => a.label == b.label,
            _ => false,
        }
    }
}
impl Eq for SetExpr {}

#[cfg(test)]
mod tests {
    use super::*;

    fn streaming_count(e: &SetExpr, n: u64) -> u64 {
        (1..=n).filter(|&k| e.contains(k).unwrap()).count() as u64
    }

    #[test]
    fn residue_membership_and_count() {
        let e = SetExpr::residue(0, 3).unwrap();
        assert!(e.contains(9).unwrap());
        assert!(!e.contains(10).unwrap());
        assert_eq!(e.prefix_count(10).unwrap(), 3);
        let odd = SetExpr::odds();
        assert_eq!(odd.prefix_count(7).unwrap(), 4);
        for m in 1..=7u64 {
            for r in 0..m {
                let e = SetExpr::residue(r, m).unwrap();
                for n in 1..200 {
                    assert_eq!(e.prefix_count(n).unwrap(), streaming_count(&e, n));
                }
            }
        }
    }

    #[test]
    fn dilate_membership() {
        let doubled_squares = SetExpr::dilate(2, SetExpr::squares()).unwrap();
        assert!(doubled_squares.contains(8).unwrap()); // 8 = 2*4
        assert!(!doubled_squares.contains(4).unwrap()); // 2 not a square
        assert!(doubled_squares.contains(2).unwrap()); // 2 = 2*1
    }

    #[test]
    fn dilate_count_law() {
        let inner = SetExpr::odds();
        let e = SetExpr::dilate(3, inner.clone()).unwrap();
        for n in 1..300u64 {
            assert_eq!(e.prefix_count(3 * n).unwrap(), inner.prefix_count(n).unwrap());
        }
    }

    #[test]
    fn interleave_picks_one_per_pair() {
        let spec = SetExpr::blocks(BlockRule::Geometric { scale: 1, base: 2 }).unwrap();
        let c = SetExpr::interleave(spec);
        for k in 1..=2000u64 {
            let lo = c.contains(2 * k - 1).unwrap();
            let hi = c.contains(2 * k).unwrap();
            assert!(lo != hi, "exactly one of the pair must be in the set (k={k})");
        }
        assert_eq!(c.prefix_count(4000).unwrap(), 2000);
        for n in 1..500 {
            assert_eq!(c.prefix_count(n).unwrap(), streaming_count(&c, n));
        }
    }

    #[test]
    fn null_family_counts() {
        assert_eq!(SetExpr::squares().prefix_count(1_000_000).unwrap(), 1000);
        assert_eq!(SetExpr::cubes().prefix_count(1000).unwrap(), 10);
        let p2 = SetExpr::powers(2).unwrap();
        assert!(p2.contains(1).unwrap());
        assert!(p2.contains(1024).unwrap());
        assert!(!p2.contains(24).unwrap());
        assert_eq!(p2.prefix_count(1024).unwrap(), 11); // 1,2,4,...,1024
        for n in 1..2000 {
            assert_eq!(p2.prefix_count(n).unwrap(), streaming_count(&p2, n));
            let sq = SetExpr::squares();
            assert_eq!(sq.prefix_count(n).unwrap(), streaming_count(&sq, n));
            let cb = SetExpr::cubes();
            assert_eq!(cb.prefix_count(n).unwrap(), streaming_count(&cb, n));
        }
    }

    #[test]
    fn boolean_ops_stream() {
        let a = SetExpr::residue(0, 2).unwrap();
        let b = SetExpr::residue(0, 3).unwrap();
        let u = SetExpr::union(a.clone(), b.clone());
        assert_eq!(u.prefix_count(6).unwrap(), 4); // {2,3,4,6}
        let i = SetExpr::intersection(a.clone(), b.clone());
        assert_eq!(i.prefix_count(12).unwrap(), 2); // {6,12}
        let d = SetExpr::difference(a.clone(), b.clone());
        assert_eq!(d.prefix_count(6).unwrap(), 2); // {2,4}
        let s = SetExpr::symm_diff(a, b);
        assert_eq!(s.prefix_count(6).unwrap(), 3); // {2,3,4}
    }

    #[test]
    fn complement_count() {
        let e = SetExpr::complement(SetExpr::powers(2).unwrap());
        assert_eq!(e.prefix_count(8).unwrap(), 8 - 4); // remove 1,2,4,8
        assert!(e.has_fast_count());
    }

    #[test]
    fn subset_checks() {
        let r4 = SetExpr::residue(0, 4).unwrap();
        let r2 = SetExpr::residue(0, 2).unwrap();
        assert_eq!(subset_upto(&r4, &r2, 10_000).unwrap(), None);
        assert_eq!(subset_upto(&r2, &r4, 10_000).unwrap(), Some(2));
        assert_eq!(subset_symbolic(&r4, &r2), Some(true));
        assert_eq!(subset_symbolic(&r2, &r4), Some(false));
        let f12 = SetExpr::finite(vec![1, 2]).unwrap();
        let f123 = SetExpr::finite(vec![1, 2, 3]).unwrap();
        assert_eq!(subset_upto(&f12, &f123, 10).unwrap(), None);
    }

    #[test]
    fn predicate_caches_and_propagates_errors() {
        let e = SetExpr::predicate("fails-at-5", |n| {
            if n == 5 {
                Err("oracle failure".into())
            } else {
                Ok(n % 2 == 0)
            }
        });
        assert!(e.contains(4).unwrap());
        assert!(matches!(e.contains(5), Err(Error::Oracle { n: 5, .. })));
    }

    #[test]
    fn count_increments_are_indicators() {
        let exprs = vec![
            SetExpr::residue(2, 5).unwrap(),
            SetExpr::blocks(BlockRule::Power { exponent: 2 }).unwrap(),
            SetExpr::squares(),
            SetExpr::union(SetExpr::odds(), SetExpr::squares()),
        ];
        for e in exprs {
            let mut prev = 0;
            for n in 1..=500u64 {
                let c = e.prefix_count(n).unwrap();
                let step = c - prev;
                assert_eq!(step == 1, e.contains(n).unwrap());
                assert!(step <= 1);
                prev = c;
            }
        }
    }

    #[test]
    fn zero_is_rejected() {
        assert!(SetExpr::naturals().contains(0).is_err());
        assert!(SetExpr::finite(vec![0]).is_err());
        assert!(SetExpr::residue(3, 3).is_err());
        assert!(SetExpr::dilate(0, SetExpr::odds()).is_err());
    }
}
