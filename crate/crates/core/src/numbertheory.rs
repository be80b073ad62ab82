//! Farey sequences, cumulative totients, Franel sums and Hall-number
//! component counts on a truncated butterfly.
//!
//! Farey sequences here hold the reduced fractions of `(0, 1]`, so the
//! order-`n` sequence has `Φ(n) = Σ_{j≤n} φ(j)` terms.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::butterfly::ButterflyDataset;
use crate::error::{Error, Result};
use crate::rational::RationalFrequency;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FareySequence {
    pub order: u64,
    /// Increasing.
    pub fractions: Vec<RationalFrequency>,
}

impl FareySequence {
    pub fn len(&self) -> usize {
        self.fractions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fractions.is_empty()
    }

    /// `bc − ad` for each adjacent pair `a/b < c/d`.
    pub fn neighbor_determinants(&self) -> Vec<i128> {
        self.fractions
            .windows(2)
            .map(|w| w[0].q() as i128 * w[1].p() as i128 - w[0].p() as i128 * w[1].q() as i128)
            .collect()
    }
}

fn check_order(n: u64) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument("order must be at least 1".into()));
    }
    Ok(())
}

/// Farey fractions of order `n` in `(0, 1]`, by the neighbor recurrence: after
/// `a/b < c/d`, the next term is `(kc − a)/(kd − b)` with `k = ⌊(n + b)/d⌋`.
pub fn farey(n: u64) -> Result<FareySequence> {
    check_order(n)?;
    let (mut a, mut b, mut c, mut d) = (0u64, 1u64, 1u64, n);
    let mut fractions = Vec::new();
    loop {
        fractions.push(RationalFrequency::new(c, d)?);
        if c == d {
            break;
        }
        let k = (n + b) / d;
        let (e, f) = (k * c - a, k * d - b);
        (a, b, c, d) = (c, d, e, f);
    }
    Ok(FareySequence { order: n, fractions })
}

/// `φ(0..=n)` by sieve (`φ(0) = 0`).
pub fn totients(n: u64) -> Vec<u64> {
    let n = n as usize;
    let mut phi: Vec<u64> = (0..=n as u64).collect();
    for i in 2..=n {
        if phi[i] == i as u64 {
            for m in (i..=n).step_by(i) {
                phi[m] -= phi[m] / i as u64;
            }
        }
    }
    phi
}

/// `Φ(n) = Σ_{j=1}^{n} φ(j)`
pub fn phi_cumulative(n: u64) -> Result<u64> {
    check_order(n)?;
    Ok(totients(n).iter().sum())
}

/// `Σ_j (r_j − j/Φ(n))²` over the order-`n` Farey fractions, exactly.
pub fn franel_sum(n: u64) -> Result<BigRational> {
    let seq = farey(n)?;
    let total = BigInt::from(seq.len() as u64);
    let mut sum = BigRational::zero();
    for (i, r) in seq.fractions.iter().enumerate() {
        let diff = BigRational::new(BigInt::from(r.p()), BigInt::from(r.q()))
            - BigRational::new(BigInt::from(i as u64 + 1), total.clone());
        sum += &diff * &diff;
    }
    Ok(sum)
}

/// The same sum accumulated in floating point.
pub fn franel_sum_f64(n: u64) -> Result<f64> {
    let seq = farey(n)?;
    let total = seq.len() as f64;
    Ok(seq
        .fractions
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let d = r.alpha() - (i + 1) as f64 / total;
            d * d
        })
        .sum())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FranelRow {
    pub n: u64,
    pub sum: f64,
    pub n_times_sum: f64,
}

/// Rows `n = 1..=n_max`, each from the exact sum.
pub fn franel_table(n_max: u64) -> Result<Vec<FranelRow>> {
    check_order(n_max)?;
    (1..=n_max)
        .map(|n| {
            let sum = franel_sum(n)?.to_f64().ok_or(Error::NonFinite("franel sum"))?;
            Ok(FranelRow { n, sum, n_times_sum: n as f64 * sum })
        })
        .collect()
}

/// Hall-number-`k` components of a truncated butterfly against `Φ(2k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentCount {
    pub k: i64,
    pub q_max: u64,
    pub beta: f64,
    pub predicted: u64,
    pub observed: usize,
    /// Fractions in each component, increasing.
    pub members: Vec<Vec<RationalFrequency>>,
    /// Fractions whose hall-`k` gap was at or below the dataset width threshold.
    pub excluded: Vec<RationalFrequency>,
}

fn by_value(a: &RationalFrequency, b: &RationalFrequency) -> Ordering {
    (a.p() as u128 * b.q() as u128).cmp(&(b.p() as u128 * a.q() as u128))
}

/// Counts components of open gaps with Hall number `k`.
///
/// Truncation model: fractions are taken in increasing order; the hall-`k`
/// gaps at two consecutive fractions belong to the same component when their
/// energy intervals overlap, so that the straight-line interpolation between
/// them sweeps a connected region. A fraction without an open hall-`k` gap
/// separates components.
pub fn component_count(dataset: &ButterflyDataset, k: i64) -> Result<ComponentCount> {
    if k <= 0 {
        return Err(Error::InvalidArgument("hall number must be positive".into()));
    }
    let mut rows: Vec<_> = dataset.rows.iter().collect();
    rows.sort_by(|a, b| by_value(&a.freq, &b.freq));
    let mut excluded = Vec::new();
    let slots: Vec<Option<(f64, f64)>> = rows
        .iter()
        .map(|r| {
            let g = r.gaps.iter().find(|g| g.n == k)?;
            if g.open {
                Some((g.lo, g.hi))
            } else {
                excluded.push(r.freq);
                None
            }
        })
        .collect();
    let mut members: Vec<Vec<RationalFrequency>> = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    for (row, slot) in rows.iter().zip(&slots) {
        match (slot, prev) {
            (Some(cur), Some(p)) if cur.0.max(p.0) < cur.1.min(p.1) => {
                members.last_mut().expect("open component").push(row.freq);
            }
            (Some(_), _) => members.push(vec![row.freq]),
            (None, _) => {}
        }
        prev = *slot;
    }
    Ok(ComponentCount {
        k,
        q_max: dataset.q_max,
        beta: dataset.beta,
        predicted: phi_cumulative(2 * k as u64)?,
        observed: members.len(),
        members,
        excluded,
    })
}
