use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_integer::Integer;

use crate::{Error, Result};

/// Non-negative exact fraction, always stored in lowest terms.
///
/// Used for conductance values (so ties and equality are exact) and for the
/// diffusion parameters `phi` and `tau`, which callers may give as `p/q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Ratio {
    num: u64,
    den: u64,
}

impl Ratio {
    pub const ZERO: Ratio = Ratio { num: 0, den: 1 };
    pub const ONE: Ratio = Ratio { num: 1, den: 1 };

    pub fn new(num: u64, den: u64) -> Result<Self> {
        if den == 0 {
            return Err(Error::input("ratio with zero denominator"));
        }
        Ok(Self::reduced(num, den))
    }

    fn reduced(num: u64, den: u64) -> Self {
        if num == 0 {
            return Self::ZERO;
        }
        let g = num.gcd(&den);
        Ratio {
            num: num / g,
            den: den / g,
        }
    }

    pub fn numer(&self) -> u64 {
        self.num
    }

    pub fn denom(&self) -> u64 {
        self.den
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    /// `ceil(1 / self)`; `None` for zero.
    pub fn ceil_recip(&self) -> Option<u64> {
        if self.num == 0 {
            None
        } else {
            Some(self.den.div_ceil(self.num))
        }
    }

    pub fn checked_mul(self, other: Ratio) -> Option<Ratio> {
        let num = self.num as u128 * other.num as u128;
        let den = self.den as u128 * other.den as u128;
        let g = num.gcd(&den).max(1);
        let (num, den) = (num / g, den / g);
        Some(Ratio::reduced(num.try_into().ok()?, den.try_into().ok()?))
    }

    /// `self * value <= bound`, evaluated exactly.
    pub fn scaled_le(&self, value: u64, bound: u64) -> bool {
        self.num as u128 * value as u128 <= bound as u128 * self.den as u128
    }
}

impl Ord for Ratio {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.num as u128 * other.den as u128).cmp(&(other.num as u128 * self.den as u128))
    }
}

impl PartialOrd for Ratio {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// Accepts `p/q`, plain integers, and finite decimals such as `0.333`
/// (converted exactly to `333/1000`).
impl FromStr for Ratio {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::input(format!("not a ratio: {s:?}"));
        if let Some((p, q)) = s.split_once('/') {
            let p: u64 = p.trim().parse().map_err(|_| bad())?;
            let q: u64 = q.trim().parse().map_err(|_| bad())?;
            return Ratio::new(p, q);
        }
        let (int, frac) = s.split_once('.').unwrap_or((s, ""));
        if (int.is_empty() && frac.is_empty())
            || !int.bytes().all(|b| b.is_ascii_digit())
            || !frac.bytes().all(|b| b.is_ascii_digit())
            || frac.len() > 18
        {
            return Err(bad());
        }
        let int: u64 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
        let den = 10u64.pow(frac.len() as u32);
        let frac: u64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
        let num = int
            .checked_mul(den)
            .and_then(|x| x.checked_add(frac))
            .ok_or_else(bad)?;
        Ratio::new(num, den)
    }
}
