//! Rational rotation numbers and continued-fraction approximants.

use alloc::format;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use num_integer::Integer;

use crate::error::{Error, Result};

/// Reduced fraction `p/q` with `0 <= p <= q`, `q >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RationalFrequency {
    p: u64,
    q: u64,
}

impl RationalFrequency {
    /// Requires an already reduced fraction in `[0, 1]`.
    pub fn new(p: u64, q: u64) -> Result<Self> {
        if q == 0 {
            return Err(Error::InvalidFrequency(format!("{p}/{q}: zero denominator")));
        }
        if p > q {
            return Err(Error::InvalidFrequency(format!("{p}/{q}: outside [0, 1]")));
        }
        if p.gcd(&q) != 1 {
            return Err(Error::InvalidFrequency(format!("{p}/{q}: not reduced")));
        }
        Ok(Self { p, q })
    }

    /// Reduces `p/q` first.
    pub fn reduced(p: u64, q: u64) -> Result<Self> {
        if q == 0 {
            return Err(Error::InvalidFrequency(format!("{p}/{q}: zero denominator")));
        }
        let g = p.gcd(&q).max(1);
        Self::new(p / g, q / g)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn qsize(&self) -> usize {
        self.q as usize
    }

    pub fn alpha(&self) -> f64 {
        self.p as f64 / self.q as f64
    }
}

impl fmt::Display for RationalFrequency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.p, self.q)
    }
}

impl FromStr for RationalFrequency {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s.split_once('/').ok_or_else(|| Error::InvalidFrequency(format!("{s}: expected p/q")))?;
        let p = a.trim().parse::<u64>().map_err(|_| Error::InvalidFrequency(format!("{s}: bad numerator")))?;
        let q = b.trim().parse::<u64>().map_err(|_| Error::InvalidFrequency(format!("{s}: bad denominator")))?;
        Self::new(p, q)
    }
}

/// Convergents of `[0; a1, a2, ...]`, starting from `1/a1`.
///
/// Denominators are strictly increasing as long as the quotients are positive.
pub fn convergents(quotients: &[u64]) -> Result<Vec<RationalFrequency>> {
    if quotients.contains(&0) {
        return Err(Error::InvalidArgument("partial quotients must be positive".into()));
    }
    let (mut h0, mut h1) = (1u64, 0u64);
    let (mut k0, mut k1) = (0u64, 1u64);
    let mut out = Vec::with_capacity(quotients.len());
    for &a in quotients {
        let h = a
            .checked_mul(h1)
            .and_then(|x| x.checked_add(h0))
            .ok_or_else(|| Error::InvalidArgument("convergent overflow".into()))?;
        let k = a
            .checked_mul(k1)
            .and_then(|x| x.checked_add(k0))
            .ok_or_else(|| Error::InvalidArgument("convergent overflow".into()))?;
        (h0, h1) = (h1, h);
        (k0, k1) = (k1, k);
        out.push(RationalFrequency::new(h, k)?);
    }
    Ok(out)
}

/// Irrational rotation numbers in `(0, 1)` reachable through convergents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IrrationalTarget {
    /// `(√5 − 1)/2 = [0; 1, 1, 1, ...]`
    Golden,
    /// `√2 − 1 = [0; 2, 2, 2, ...]`
    Sqrt2,
    /// `e − 2 = [0; 1, 2, 1, 1, 4, 1, 1, 6, ...]`
    EBased,
    /// `[0; a1, a2, ...]`, used as given (no repetition).
    Custom(Vec<u64>),
}

impl IrrationalTarget {
    pub fn partial_quotients(&self, depth: usize) -> Vec<u64> {
        match self {
            Self::Golden => alloc::vec![1; depth],
            Self::Sqrt2 => alloc::vec![2; depth],
            Self::EBased => (0..depth).map(|i| if i % 3 == 1 { 2 * (i as u64 / 3 + 1) } else { 1 }).collect(),
            Self::Custom(a) => a.iter().copied().take(depth).collect(),
        }
    }

    pub fn convergents(&self, depth: usize) -> Result<Vec<RationalFrequency>> {
        convergents(&self.partial_quotients(depth))
    }

    /// Floating-point value, from a deep convergent.
    pub fn value(&self) -> f64 {
        let a = self.partial_quotients(40);
        a.iter().rev().fold(0.0, |acc, &x| 1.0 / (x as f64 + acc))
    }
}

impl FromStr for IrrationalTarget {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "golden" => Ok(Self::Golden),
            "sqrt2" => Ok(Self::Sqrt2),
            "e-based" => Ok(Self::EBased),
            _ => Err(Error::InvalidArgument(format!("unknown irrational target {s}"))),
        }
    }
}
