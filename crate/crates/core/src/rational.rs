//! Exact rational arithmetic helpers.
//!
//! Counts are 63-bit integers; every hot-path comparison between a partial
//! average `count / N` and a rational threshold is a u128 cross
//! multiplication, never a float.

use num_rational::Ratio;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::Error;

/// Exact rational with 128-bit components.
pub type Rat = Ratio<i128>;

pub fn rat(num: i128, den: i128) -> Rat {
    Ratio::new(num, den)
}

/// `count / n` as an exact rational.
pub fn average(count: u64, n: u64) -> Rat {
    Ratio::new(count as i128, n as i128)
}

pub fn to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Parses `p`, `p/q` or a decimal literal like `0.25` into an exact rational.
pub fn parse_rat(text: &str) -> Result<Rat, Error> {
    let s = text.trim();
    let bad = || Error::invalid(format!("cannot parse `{s}` as a rational"));
    if let Some((p, q)) = s.split_once('/') {
        let p: i128 = p.trim().parse().map_err(|_| bad())?;
        let q: i128 = q.trim().parse().map_err(|_| bad())?;
        if q == 0 {
            return Err(Error::invalid("zero denominator"));
        }
        return Ok(Ratio::new(p, q));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let int: i128 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
        if frac.is_empty() || frac.len() > 27 || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let digits: i128 = frac.parse().map_err(|_| bad())?;
        let scale = 10i128.pow(frac.len() as u32);
        let sign = if s.starts_with('-') { -1 } else { 1 };
        return Ok(Ratio::new(int * scale + sign * digits, scale));
    }
    let p: i128 = s.parse().map_err(|_| bad())?;
    Ok(Ratio::from_integer(p))
}

/// Renders `p/q` (or `p` when integral).
pub fn format_rat(r: &Rat) -> String {
    if r.is_integer() {
        format!("{}", r.numer())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Number of fixed-point fraction bits used for irrational comparison targets.
pub const FIXED_BITS: u32 = 96;

/// A comparison target in [0,1]: either an exact rational or a dyadic
/// fixed-point value with 96 fraction bits. Two fixed targets closer than
/// 2^-96 are indistinguishable; the fixed form keeps `count * 2^96` inside
/// u128 for every horizon up to 2^32.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    Exact { num: u64, den: u64 },
    Fixed { num: u128 },
}

impl Target {
    pub fn from_rat(r: Rat) -> Result<Self, Error> {
        if r.is_negative() || r > Rat::from_integer(1) {
            return Err(Error::TargetRange(format_rat(&r)));
        }
        let (num, den) = (*r.numer(), *r.denom());
        if den > u64::MAX as i128 || num > u64::MAX as i128 {
            return Err(Error::TargetPrecision(format_rat(&r)));
        }
        Ok(Target::Exact { num: num as u64, den: den as u64 })
    }

    /// Dyadic target `num / 2^96`; `num` must not exceed 2^96.
    pub fn from_fixed_bits(num: u128) -> Result<Self, Error> {
        if num > 1u128 << FIXED_BITS {
            return Err(Error::TargetRange(format!("{num}/2^{FIXED_BITS}")));
        }
        Ok(Target::Fixed { num })
    }

    /// Strict `count / n < target`, exact.
    pub fn gt_average(&self, count: u64, n: u64) -> Result<bool, Error> {
        match *self {
            Target::Exact { num, den } => {
                Ok((count as u128) * (den as u128) < (n as u128) * (num as u128))
            }
            Target::Fixed { num } => {
                if count > u32::MAX as u64 || n > u32::MAX as u64 {
                    return Err(Error::HorizonOverflow(n as u128));
                }
                Ok((count as u128) << FIXED_BITS < (n as u128) * num)
            }
        }
    }

    /// Strict `count / n > target`, exact.
    pub fn lt_average(&self, count: u64, n: u64) -> Result<bool, Error> {
        match *self {
            Target::Exact { num, den } => {
                Ok((count as u128) * (den as u128) > (n as u128) * (num as u128))
            }
            Target::Fixed { num } => {
                if count > u32::MAX as u64 || n > u32::MAX as u64 {
                    return Err(Error::HorizonOverflow(n as u128));
                }
                Ok((count as u128) << FIXED_BITS > (n as u128) * num)
            }
        }
    }

    /// The target as a rational (exact for `Exact`, dyadic truncation for `Fixed`).
    pub fn as_rat(&self) -> Rat {
        match *self {
            Target::Exact { num, den } => Ratio::new(num as i128, den as i128),
            Target::Fixed { num } => Ratio::new(num as i128, 1i128 << FIXED_BITS),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Target::Exact { .. })
    }
}

/// |a/n - p/q| < eps, exact cross multiplication.
pub fn average_within(count: u64, n: u64, value: &Rat, eps: &Rat) -> bool {
    let diff = (average(count, n) - value).abs();
    diff < *eps
}

/// |a/n - p/q| <= bound, exact.
pub fn average_within_closed(count: u64, n: u64, value: &Rat, bound: &Rat) -> bool {
    let diff = (average(count, n) - value).abs();
    diff <= *bound
}

pub fn is_zero(r: &Rat) -> bool {
    r.is_zero()
}
