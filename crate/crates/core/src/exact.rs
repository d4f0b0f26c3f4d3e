//! Exact rational arithmetic for objectives and bounds.
//!
//! Public results are reported as [`ExactValue`] (a reduced `i128` ratio).
//! Inside the search every objective over one dataset and one λ shares the
//! denominator `N · den(λ)`, so values are carried as integer [`Score`] units
//! and compared without any rounding.

use std::fmt;
use std::ops::{Add, AddAssign, Sub};
use std::str::FromStr;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct ExactValue(Ratio<i128>);

impl ExactValue {
    pub const ZERO: ExactValue = ExactValue(Ratio::new_raw(0, 1));

    pub fn new(numer: i128, denom: i128) -> Result<Self> {
        if denom == 0 {
            return Err(Error::Usage("zero denominator".into()));
        }
        Ok(ExactValue(Ratio::new(numer, denom)))
    }

    /// Panics on a zero denominator.
    pub fn ratio(numer: i128, denom: i128) -> Self {
        ExactValue(Ratio::new(numer, denom))
    }

    pub fn integer(v: i128) -> Self {
        ExactValue(Ratio::from_integer(v))
    }

    pub fn numer(&self) -> i128 {
        *self.0.numer()
    }

    pub fn denom(&self) -> i128 {
        *self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn floor(&self) -> i128 {
        Integer::div_floor(&self.numer(), &self.denom())
    }

    pub fn mul_int(&self, k: i128) -> Self {
        ExactValue(self.0 * k)
    }

    pub fn checked_div(&self, other: &ExactValue) -> Option<ExactValue> {
        if other.is_zero() {
            None
        } else {
            Some(ExactValue(self.0 / other.0))
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// Decimal rendering truncated toward zero after `digits` places.
    pub fn to_decimal_string(&self, digits: usize) -> String {
        let neg = self.numer() < 0;
        let n = self.numer().unsigned_abs();
        let d = self.denom().unsigned_abs();
        let mut out = String::new();
        if neg {
            out.push('-');
        }
        out.push_str(&(n / d).to_string());
        if digits > 0 {
            out.push('.');
            let mut rem = n % d;
            for _ in 0..digits {
                rem *= 10;
                out.push(char::from(b'0' + (rem / d) as u8));
                rem %= d;
            }
        }
        out
    }

    /// Parses a decimal (`0.005`, `-1.25`, `3`) or a fraction (`1/200`).
    pub fn parse(text: &str) -> Result<Self> {
        let s = text.trim();
        let bad = || Error::Usage(format!("cannot parse {text:?} as an exact rational"));
        if let Some((n, d)) = s.split_once('/') {
            let n: i128 = n.trim().parse().map_err(|_| bad())?;
            let d: i128 = d.trim().parse().map_err(|_| bad())?;
            return ExactValue::new(n, d).map_err(|_| bad());
        }
        let (neg, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s.strip_prefix('+').unwrap_or(s)),
        };
        let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(bad());
        }
        if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        if frac_part.len() > 30 {
            return Err(bad());
        }
        let digits = format!("{int_part}{frac_part}");
        let numer: i128 = digits.parse().map_err(|_| bad())?;
        let denom = 10i128.pow(frac_part.len() as u32);
        let v = ExactValue::ratio(numer, denom);
        Ok(if neg { ExactValue(-v.0) } else { v })
    }
}

impl FromStr for ExactValue {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExactValue::parse(s)
    }
}

impl Add for ExactValue {
    type Output = ExactValue;
    fn add(self, rhs: ExactValue) -> ExactValue {
        ExactValue(self.0 + rhs.0)
    }
}

impl Sub for ExactValue {
    type Output = ExactValue;
    fn sub(self, rhs: ExactValue) -> ExactValue {
        ExactValue(self.0 - rhs.0)
    }
}

impl fmt::Display for ExactValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.denom() == 1 {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

impl fmt::Debug for ExactValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for ExactValue {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ExactValue {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        ExactValue::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// An objective-like quantity in units of `1 / (N · den(λ))`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Debug)]
pub struct Score(pub i128);

impl Score {
    pub const ZERO: Score = Score(0);
}

impl Add for Score {
    type Output = Score;
    #[inline]
    fn add(self, rhs: Score) -> Score {
        Score(self.0 + rhs.0)
    }
}

impl AddAssign for Score {
    #[inline]
    fn add_assign(&mut self, rhs: Score) {
        self.0 += rhs.0;
    }
}

impl Sub for Score {
    type Output = Score;
    #[inline]
    fn sub(self, rhs: Score) -> Score {
        Score(self.0 - rhs.0)
    }
}

/// Conversion between sample counts, leaf counts and [`Score`] units for a
/// fixed sample count `N` and regularization `λ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Scale {
    n: u64,
    lambda: ExactValue,
    per_mistake: i128,
    per_leaf: i128,
    denom: i128,
}

impl Scale {
    pub fn new(n: usize, lambda: ExactValue) -> Result<Self> {
        if n == 0 {
            return Err(Error::Usage("sample count must be positive".into()));
        }
        if lambda.numer() < 0 {
            return Err(Error::Usage(format!("lambda must be nonnegative, got {lambda}")));
        }
        let n128 = n as i128;
        let per_mistake = lambda.denom();
        let per_leaf = lambda
            .numer()
            .checked_mul(n128)
            .ok_or_else(|| Error::Usage("lambda too large to represent".into()))?;
        let denom = n128
            .checked_mul(per_mistake)
            .filter(|d| d.checked_mul(1 << 40).is_some())
            .ok_or_else(|| Error::Usage("lambda denominator too large to represent".into()))?;
        Ok(Scale {
            n: n as u64,
            lambda,
            per_mistake,
            per_leaf,
            denom,
        })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n as usize
    }

    #[inline]
    pub fn lambda(&self) -> ExactValue {
        self.lambda
    }

    /// `k / N` in units.
    #[inline]
    pub fn samples(&self, k: usize) -> Score {
        Score(k as i128 * self.per_mistake)
    }

    /// `λ · h` in units.
    #[inline]
    pub fn leaves(&self, h: u32) -> Score {
        Score(h as i128 * self.per_leaf)
    }

    #[inline]
    pub fn lambda_units(&self) -> Score {
        Score(self.per_leaf)
    }

    pub fn to_exact(&self, s: Score) -> ExactValue {
        ExactValue::ratio(s.0, self.denom)
    }

    /// `None` when `v` is not a multiple of the unit.
    pub fn from_exact(&self, v: ExactValue) -> Option<Score> {
        let scaled = v.numer().checked_mul(self.denom)?;
        if scaled % v.denom() == 0 {
            Some(Score(scaled / v.denom()))
        } else {
            None
        }
    }

    /// `⌊s / λ⌋`; `None` when `λ = 0`.
    pub fn floor_div_lambda(&self, s: Score) -> Option<i128> {
        if self.per_leaf == 0 {
            None
        } else {
            Some(Integer::div_floor(&s.0, &self.per_leaf))
        }
    }
}
