//! Run-length block sets: `z_1` zeroes followed by `z_2` ones, `z_3` zeroes
//! and so on. Membership and prefix counts are block-boundary arithmetic on
//! the cached partial sums `Z_j = z_1 + … + z_j`.

use std::sync::Mutex;

use crate::error::Error;
use crate::rational::Rat;

/// Rule generating the run lengths `z_n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BlockRule {
    /// `z_n = scale * base^(n-1)`, scale >= 1, base >= 1.
    Geometric { scale: u64, base: u64 },
    /// `z_n = n^exponent`, exponent >= 1.
    Power { exponent: u32 },
    /// Explicit prefix followed by a repeating tail.
    Explicit { prefix: Vec<u64>, tail: Vec<u64> },
}

/// Cap on cached block boundaries; horizons needing more error out.
const MAX_CACHED_BLOCKS: usize = 1 << 22;

#[derive(Debug)]
struct SumCache {
    /// `(Z_j, ones among 1..=Z_j)`, index 0 holding `(Z_1, 0)`.
    sums: Vec<(u128, u128)>,
}

#[derive(Debug)]
pub struct BlockSpec {
    rule: BlockRule,
    cache: Mutex<SumCache>,
    /// For `Explicit`: run length and ones count of one parity-aligned period.
    period: Option<(u128, u128)>,
}

impl PartialEq for BlockSpec {
    fn eq(&self, other: &Self) -> bool {
        self.rule == other.rule
    }
}
impl Eq for BlockSpec {}

impl BlockSpec {
    pub fn new(rule: BlockRule) -> Result<Self, Error> {
        match &rule {
            BlockRule::Geometric { scale, base } => {
                if *scale == 0 || *base == 0 {
                    return Err(Error::invalid("geometric blocks need scale >= 1 and base >= 1"));
                }
            }
            BlockRule::Power { exponent } => {
                if *exponent == 0 {
                    return Err(Error::invalid("power blocks need exponent >= 1"));
                }
            }
            BlockRule::Explicit { prefix, tail } => {
                if tail.is_empty() {
                    return Err(Error::invalid("explicit blocks need a non-empty repeating tail"));
                }
                for (i, &z) in prefix.iter().enumerate() {
                    if z == 0 && i > 0 {
                        return Err(Error::invalid("z_n must be >= 1 for n >= 2"));
                    }
                }
                if tail.iter().any(|&z| z == 0) {
                    return Err(Error::invalid("tail run lengths must be >= 1"));
                }
            }
        }
        let period = match &rule {
            BlockRule::Explicit { prefix, tail } => {
                // A tail of odd length flips block parity each repetition, so
                // the parity-aligned period is two repetitions.
                let reps = if tail.len() % 2 == 0 { 1 } else { 2 };
                let mut len = 0u128;
                let mut ones = 0u128;
                for rep in 0..reps {
                    for (j, &z) in tail.iter().enumerate() {
                        let idx = prefix.len() + rep * tail.len() + j + 1; // 1-based
                        len += z as u128;
                        if idx % 2 == 0 {
                            ones += z as u128;
                        }
                    }
                }
                Some((len, ones))
            }
            BlockRule::Geometric { scale, base: 1 } => Some((2 * *scale as u128, *scale as u128)),
            _ => None,
        };
        Ok(BlockSpec {
            rule,
            cache: Mutex::new(SumCache { sums: Vec::new() }),
            period,
        })
    }

    pub fn rule(&self) -> &BlockRule {
        &self.rule
    }

    /// Run length `z_j` (1-based).
    pub fn run_length(&self, j: usize) -> u128 {
        match &self.rule {
            BlockRule::Geometric { scale, base } => {
                let mut z = *scale as u128;
                for _ in 1..j {
                    z = z.saturating_mul(*base as u128);
                }
                z
            }
            BlockRule::Power { exponent } => (j as u128).saturating_pow(*exponent),
            BlockRule::Explicit { prefix, tail } => {
                if j <= prefix.len() {
                    prefix[j - 1] as u128
                } else {
                    tail[(j - prefix.len() - 1) % tail.len()] as u128
                }
            }
        }
    }

    /// Extends the boundary cache until `Z_j >= limit` (or the cap is hit).
    fn ensure_sums(&self, limit: u128) -> Result<(), Error> {
        let mut cache = self.cache.lock().unwrap();
        loop {
            let (last_z, last_ones) = cache.sums.last().copied().unwrap_or((0, 0));
            if last_z >= limit {
                return Ok(());
            }
            let j = cache.sums.len() + 1;
            if j > MAX_CACHED_BLOCKS {
                return Err(Error::HorizonOverflow(limit));
            }
            let z = self.run_length(j);
            let ones = if j % 2 == 0 { last_ones + z } else { last_ones };
            cache.sums.push((last_z + z, ones));
        }
    }

    /// Partial sum `Z_j`.
    pub fn boundary(&self, j: usize) -> Result<u128, Error> {
        {
            let cache = self.cache.lock().unwrap();
            if j == 0 {
                return Ok(0);
            }
            if j <= cache.sums.len() {
                return Ok(cache.sums[j - 1].0);
            }
        }
        // Grow until index j exists.
        loop {
            let have = self.cache.lock().unwrap().sums.len();
            if have >= j {
                return Ok(self.cache.lock().unwrap().sums[j - 1].0);
            }
            let target = {
                let cache = self.cache.lock().unwrap();
                cache.sums.last().map(|&(z, _)| z + 1).unwrap_or(1)
            };
            self.ensure_sums(target)?;
        }
    }

    /// All boundaries `Z_j <= limit` (for checkpoint schedules).
    pub fn boundaries_upto(&self, limit: u64) -> Result<Vec<u64>, Error> {
        self.ensure_sums(limit as u128 + 1)?;
        let cache = self.cache.lock().unwrap();
        Ok(cache
            .sums
            .iter()
            .map(|&(z, _)| z)
            .take_while(|&z| z <= limit as u128)
            .map(|z| z as u64)
            .collect())
    }

    /// Membership of `n >= 1`: inside an even-indexed run.
    pub fn contains(&self, n: u64) -> Result<bool, Error> {
        let n = n as u128;
        if let Some((plen, _)) = self.period {
            if let Some(prefix_end) = self.explicit_prefix_end() {
                if n > prefix_end {
                    let off = (n - prefix_end - 1) % plen + 1;
                    return self.scan_period_contains(prefix_end, off);
                }
            }
        }
        self.ensure_sums(n)?;
        let cache = self.cache.lock().unwrap();
        let j = cache.sums.partition_point(|&(z, _)| z < n); // first block with Z_j >= n
        Ok((j + 1) % 2 == 0)
    }

    /// Count of members in `1..=n`.
    pub fn count(&self, n: u64) -> Result<u64, Error> {
        let n = n as u128;
        if let Some((plen, pones)) = self.period {
            if let Some(prefix_end) = self.explicit_prefix_end() {
                if n > prefix_end {
                    let (_, prefix_ones) = self.prefix_totals()?;
                    let rest = n - prefix_end;
                    let full = rest / plen;
                    let rem = rest % plen;
                    let rem_ones = self.scan_period_count(prefix_end, rem)?;
                    return Ok((prefix_ones + full * pones + rem_ones) as u64);
                }
            }
        }
        self.ensure_sums(n)?;
        let cache = self.cache.lock().unwrap();
        let j = cache.sums.partition_point(|&(z, _)| z < n);
        // Blocks 1..=j-1 are complete; block j+1 (1-based) holds n.
        let (prev_z, prev_ones) = if j == 0 { (0, 0) } else { cache.sums[j - 1] };
        let inside = if (j + 1) % 2 == 0 { n - prev_z } else { 0 };
        Ok((prev_ones + inside) as u64)
    }

    /// End of the parity-aligned non-periodic part, if the rule is periodic.
    fn explicit_prefix_end(&self) -> Option<u128> {
        match &self.rule {
            BlockRule::Explicit { prefix, .. } => {
                let mut z = 0u128;
                for (j, &p) in prefix.iter().enumerate() {
                    let _ = j;
                    z += p as u128;
                }
                Some(z)
            }
            BlockRule::Geometric { base: 1, .. } => Some(0),
            _ => None,
        }
    }

    fn prefix_totals(&self) -> Result<(u128, u128), Error> {
        match &self.rule {
            BlockRule::Explicit { prefix, .. } => {
                let mut z = 0u128;
                let mut ones = 0u128;
                for (j, &p) in prefix.iter().enumerate() {
                    z += p as u128;
                    if (j + 1) % 2 == 0 {
                        ones += p as u128;
                    }
                }
                Ok((z, ones))
            }
            BlockRule::Geometric { base: 1, .. } => Ok((0, 0)),
            _ => unreachable!("prefix_totals only called for periodic rules"),
        }
    }

    /// Walks one period starting after `prefix_end` and reports membership of
    /// the position `off` (1-based within the period).
    fn scan_period_contains(&self, prefix_end: u128, off: u128) -> Result<bool, Error> {
        let start_block = self.blocks_before_period();
        let mut pos = 0u128;
        let mut j = start_block;
        loop {
            j += 1;
            let z = self.run_length_abs(j, prefix_end);
            if off <= pos + z {
                return Ok(j % 2 == 0);
            }
            pos += z;
        }
    }

    fn scan_period_count(&self, prefix_end: u128, rem: u128) -> Result<u128, Error> {
        let start_block = self.blocks_before_period();
        let mut pos = 0u128;
        let mut ones = 0u128;
        let mut j = start_block;
        while pos < rem {
            j += 1;
            let z = self.run_length_abs(j, prefix_end);
            let take = z.min(rem - pos);
            if j % 2 == 0 {
                ones += take;
            }
            pos += take;
        }
        Ok(ones)
    }

    fn blocks_before_period(&self) -> usize {
        match &self.rule {
            BlockRule::Explicit { prefix, .. } => prefix.len(),
            BlockRule::Geometric { base: 1, .. } => 0,
            _ => 0,
        }
    }

    fn run_length_abs(&self, j: usize, _prefix_end: u128) -> u128 {
        self.run_length(j)
    }

    /// Exact upper and lower Cesàro limits when a closed form exists, and the
    /// limit itself when the two coincide.
    ///
    /// Geometric growth with base b >= 2 oscillates between 1/(b+1) and
    /// b/(b+1); power-law runs average to 1/2; eventually periodic runs
    /// average to ones-per-period over the period length.
    pub fn limits(&self) -> (Rat, Rat) {
        match &self.rule {
            BlockRule::Geometric { base, .. } if *base >= 2 => {
                let b = *base as i128;
                (Rat::new(1, b + 1), Rat::new(b, b + 1))
            }
            BlockRule::Geometric { .. } => (Rat::new(1, 2), Rat::new(1, 2)),
            BlockRule::Power { .. } => (Rat::new(1, 2), Rat::new(1, 2)),
            BlockRule::Explicit { .. } => {
                let (plen, pones) = self.period.expect("explicit rules are periodic");
                let v = Rat::new(pones as i128, plen as i128);
                (v, v)
            }
        }
    }

    /// The Cesàro limit, when the upper and lower closed forms coincide.
    pub fn limit(&self) -> Option<Rat> {
        let (lo, hi) = self.limits();
        (lo == hi).then_some(lo)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(spec: &BlockSpec, upto: u64) -> Vec<bool> {
        // Expand runs directly from the rule.
        let mut out = vec![false; upto as usize + 1];
        let mut pos = 0u128;
        let mut j = 0usize;
        while pos < upto as u128 {
            j += 1;
            let z = spec.run_length(j);
            for _ in 0..z {
                pos += 1;
                if pos > upto as u128 {
                    break;
                }
                out[pos as usize] = j % 2 == 0;
            }
        }
        out
    }

    fn check_against_brute(spec: &BlockSpec, upto: u64) {
        let b = brute(spec, upto);
        let mut cnt = 0u64;
        for n in 1..=upto {
            let m = spec.contains(n).unwrap();
            assert_eq!(m, b[n as usize], "membership mismatch at {n}");
            if m {
                cnt += 1;
            }
            assert_eq!(spec.count(n).unwrap(), cnt, "count mismatch at {n}");
        }
    }

    #[test]
    fn geometric_doubling_pattern() {
        // runs 1,2,4,8,...: pattern 0,1,1,0,0,0,0,1,...
        let spec = BlockSpec::new(BlockRule::Geometric { scale: 1, base: 2 }).unwrap();
        assert!(!spec.contains(1).unwrap());
        assert!(spec.contains(2).unwrap());
        assert!(spec.contains(3).unwrap());
        assert!(!spec.contains(4).unwrap());
        assert!(!spec.contains(7).unwrap());
        assert!(spec.contains(8).unwrap());
        check_against_brute(&spec, 3000);
    }

    #[test]
    fn power_rule_and_limits() {
        let spec = BlockSpec::new(BlockRule::Power { exponent: 2 }).unwrap();
        check_against_brute(&spec, 2000);
        assert_eq!(spec.limit(), Some(Rat::new(1, 2)));
    }

    #[test]
    fn explicit_periodic_counts() {
        let spec = BlockSpec::new(BlockRule::Explicit { prefix: vec![2, 3], tail: vec![1, 4, 2] })
            .unwrap();
        check_against_brute(&spec, 2000);
        // tail length 3 (odd): period is two repetitions, 14 long,
        // even-indexed runs alternate across the two copies.
        let (lo, hi) = spec.limits();
        assert_eq!(lo, hi);
    }

    #[test]
    fn constant_runs() {
        let spec = BlockSpec::new(BlockRule::Geometric { scale: 3, base: 1 }).unwrap();
        check_against_brute(&spec, 500);
        assert_eq!(spec.limit(), Some(Rat::new(1, 2)));
    }

    #[test]
    fn geometric_limits() {
        let spec = BlockSpec::new(BlockRule::Geometric { scale: 1, base: 2 }).unwrap();
        let (lo, hi) = spec.limits();
        assert_eq!(lo, Rat::new(1, 3));
        assert_eq!(hi, Rat::new(2, 3));
        assert_eq!(spec.limit(), None);
    }

    #[test]
    fn boundaries() {
        let spec = BlockSpec::new(BlockRule::Geometric { scale: 1, base: 2 }).unwrap();
        assert_eq!(spec.boundaries_upto(100).unwrap(), vec![1, 3, 7, 15, 31, 63]);
        assert_eq!(spec.boundary(5).unwrap(), 31);
    }

    #[test]
    fn rejects_bad_rules() {
        assert!(BlockSpec::new(BlockRule::Geometric { scale: 0, base: 2 }).is_err());
        assert!(BlockSpec::new(BlockRule::Power { exponent: 0 }).is_err());
        assert!(BlockSpec::new(BlockRule::Explicit { prefix: vec![1], tail: vec![] }).is_err());
        assert!(BlockSpec::new(BlockRule::Explicit { prefix: vec![1, 0], tail: vec![1] }).is_err());
    }
}
