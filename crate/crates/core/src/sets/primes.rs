//! Prime counting backed by a process-wide segmented sieve cache.

use std::sync::{Mutex, OnceLock};

use crate::error::Error;

struct PrimeCache {
    /// Primes up to `limit`, ascending.
    primes: Vec<u64>,
    limit: u64,
}

fn cache() -> &'static Mutex<PrimeCache> {
    static CACHE: OnceLock<Mutex<PrimeCache>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(PrimeCache { primes: Vec::new(), limit: 1 }))
}

const SEGMENT: u64 = 1 << 18;
const MAX_SIEVE: u64 = 1 << 33;

/// Extends the cached prime list to cover `limit`.
fn extend(cache: &mut PrimeCache, limit: u64) {
    if cache.limit >= limit {
        return;
    }
    if cache.primes.is_empty() {
        // Base sieve to a small bound covering sqrt of any realistic limit.
        let base = 1 << 17;
        let mut is_comp = vec![false; base + 1];
        for i in 2..=base {
            if !is_comp[i] {
                cache.primes.push(i as u64);
                let mut j = i * i;
                while j <= base {
                    is_comp[j] = true;
                    j += i;
                }
            }
        }
        cache.limit = base as u64;
        if cache.limit >= limit {
            return;
        }
    }
    while cache.limit < limit {
        let lo = cache.limit + 1;
        let hi = (lo + SEGMENT - 1).min(limit.max(lo));
        // Make sure base primes cover sqrt(hi).
        let need = (hi as f64).sqrt() as u64 + 2;
        if cache.primes.last().copied().unwrap_or(0) < need {
            grow_base(cache, need);
        }
        let mut seg = vec![false; (hi - lo + 1) as usize];
        for &p in cache.primes.iter() {
            if p * p > hi {
                break;
            }
            let mut start = p * p;
            if start < lo {
                start = lo.div_ceil(p) * p;
            }
            let mut j = start;
            while j <= hi {
                seg[(j - lo) as usize] = true;
                j += p;
            }
        }
        for (off, &comp) in seg.iter().enumerate() {
            let n = lo + off as u64;
            if !comp && n >= 2 && n > cache.primes.last().copied().unwrap_or(0) {
                cache.primes.push(n);
            }
        }
        cache.limit = hi;
    }
}

fn grow_base(cache: &mut PrimeCache, need: u64) {
    let bound = need.max(cache.limit) as usize;
    let mut is_comp = vec![false; bound + 1];
    let mut primes = Vec::new();
    for i in 2..=bound {
        if !is_comp[i] {
            primes.push(i as u64);
            let mut j = i * i;
            while j <= bound {
                is_comp[j] = true;
                j += i;
            }
        }
    }
    cache.primes = primes;
    cache.limit = bound as u64;
}

pub fn is_prime(n: u64) -> Result<bool, Error> {
    if n < 2 {
        return Ok(false);
    }
    if n > MAX_SIEVE {
        return Err(Error::HorizonOverflow(n as u128));
    }
    let mut c = cache().lock().unwrap();
    extend(&mut c, n);
    Ok(c.primes.binary_search(&n).is_ok())
}

/// Number of primes `<= n`.
pub fn count_upto(n: u64) -> Result<u64, Error> {
    if n < 2 {
        return Ok(0);
    }
    if n > MAX_SIEVE {
        return Err(Error::HorizonOverflow(n as u128));
    }
    let mut c = cache().lock().unwrap();
    extend(&mut c, n);
    Ok(c.primes.partition_point(|&p| p <= n) as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trial_division(n: u64) -> bool {
        if n < 2 {
            return false;
        }
        let mut d = 2;
        while d * d <= n {
            if n % d == 0 {
                return false;
            }
            d += 1;
        }
        true
    }

    #[test]
    fn matches_trial_division() {
        let mut cnt = 0;
        for n in 1..=10_000u64 {
            let expect = trial_division(n);
            assert_eq!(is_prime(n).unwrap(), expect, "n={n}");
            if expect {
                cnt += 1;
            }
            assert_eq!(count_upto(n).unwrap(), cnt);
        }
        assert_eq!(cnt, 1229); // pi(10^4)
    }

    #[test]
    fn crosses_segments() {
        // force several segment extensions
        assert!(count_upto(600_000).unwrap() > 0);
        assert_eq!(count_upto(1_000_000).unwrap(), 78_498);
    }
}
