//! Hofstadter butterfly over all fractions with bounded denominator, and gap
//! persistence across coupling.
//!
//! Rows are `0/1` followed by every reduced `p/q ∈ (0, 1]` with `q ≤ Q`,
//! ordered by `(q, p)`, so a dataset has `Φ(Q) + 1` rows. Parallel batches
//! live in the companion crate; [`compute_row`] is the unit of work.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{check_positive, Error, Result};
use crate::numbertheory::farey;
use crate::rational::RationalFrequency;
use crate::spectrum::{bands, gap_label, gaps_of, Band, GapRecord, GapTrack};

/// Butterfly rows in dataset order.
pub fn fractions(q_max: u64) -> Result<Vec<RationalFrequency>> {
    let mut out = Vec::new();
    out.push(RationalFrequency::new(0, 1)?);
    out.extend(farey(q_max)?.fractions);
    out.sort_by_key(|f| (f.q(), f.p()));
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ButterflyRow {
    pub freq: RationalFrequency,
    pub bands: Vec<Band>,
    /// All `q − 1` inter-band intervals; closed ones carry `open = false`.
    pub gaps: Vec<GapRecord>,
    /// Set when the fraction failed; bands and gaps are then empty.
    pub error: Option<String>,
}

impl ButterflyRow {
    pub fn open_gaps(&self) -> impl Iterator<Item = &GapRecord> {
        self.gaps.iter().filter(|g| g.open)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ButterflyDataset {
    pub beta: f64,
    pub q_max: u64,
    pub min_width: f64,
    pub rows: Vec<ButterflyRow>,
}

impl ButterflyDataset {
    pub fn band_count(&self) -> usize {
        self.rows.iter().map(|r| r.bands.len()).sum()
    }

    pub fn row(&self, freq: RationalFrequency) -> Option<&ButterflyRow> {
        self.rows.iter().find(|r| r.freq == freq)
    }
}

/// Spectrum and gaps at one fraction. Failures are recorded, not returned.
pub fn compute_row(freq: RationalFrequency, beta: f64, min_width: f64) -> ButterflyRow {
    let result = bands(freq, beta).and_then(|bs| {
        let gaps = gaps_of(&bs, min_width)?;
        Ok((bs.bands, gaps))
    });
    match result {
        Ok((bands, gaps)) => ButterflyRow { freq, bands, gaps, error: None },
        Err(e) => ButterflyRow { freq, bands: Vec::new(), gaps: Vec::new(), error: Some(e.to_string()) },
    }
}

/// Whole dataset on the calling thread.
pub fn compute_butterfly(q_max: u64, beta: f64, min_width: f64) -> Result<ButterflyDataset> {
    validate(q_max, beta)?;
    let rows = fractions(q_max)?.into_iter().map(|f| compute_row(f, beta, min_width)).collect();
    Ok(ButterflyDataset { beta, q_max, min_width, rows })
}

pub fn validate(q_max: u64, beta: f64) -> Result<()> {
    if q_max == 0 {
        return Err(Error::InvalidArgument("denominator bound must be at least 1".into()));
    }
    check_positive(beta)
}

/// Gap tracks for every label with `|n| ≤ max_hall` at each fraction.
#[derive(Debug, Clone, PartialEq)]
pub struct PersistenceReport {
    pub betas: Vec<f64>,
    pub tracks: Vec<GapTrack>,
    /// `(track index, β index)` with width below the threshold, excluding
    /// the central gap of even `q`, which closes at every coupling.
    pub flags: Vec<(usize, usize)>,
}

impl PersistenceReport {
    pub fn is_excluded(track: &GapTrack) -> bool {
        let q = track.freq.q() as i64;
        q % 2 == 0 && track.label.0 * q + track.label.1 * track.freq.p() as i64 == q / 2
    }
}

pub fn persistence_sweep(
    freqs: &[RationalFrequency],
    betas: &[f64],
    max_hall: i64,
    min_width: f64,
) -> Result<PersistenceReport> {
    if betas.is_empty() || betas.iter().any(|&b| !(b > 0.0 && b <= 1.0)) {
        return Err(Error::InvalidArgument("coupling grid must be non-empty and lie in (0, 1]".into()));
    }
    let mut tracks = Vec::new();
    for &freq in freqs {
        let q = freq.q() as i64;
        let mut labelled = Vec::new();
        for j in 1..q {
            let (m, n) = gap_label(j, freq)?;
            if n.abs() <= max_hall {
                labelled.push((j as usize, (m, n)));
            }
        }
        let mut widths = alloc::vec![Vec::with_capacity(betas.len()); labelled.len()];
        for &b in betas {
            let bs = bands(freq, b)?;
            for (k, (j, _)) in labelled.iter().enumerate() {
                let (lo, hi) = bs.gap_interval(*j).expect("gap index below q");
                widths[k].push((hi - lo).max(0.0));
            }
        }
        for ((_, label), w) in labelled.into_iter().zip(widths) {
            let open = w.iter().map(|&x| x > min_width).collect();
            tracks.push(GapTrack { freq, label, betas: betas.to_vec(), widths: w, open });
        }
    }
    let mut flags = Vec::new();
    for (t, track) in tracks.iter().enumerate() {
        if PersistenceReport::is_excluded(track) {
            continue;
        }
        for (b, open) in track.open.iter().enumerate() {
            if !open {
                flags.push((t, b));
            }
        }
    }
    Ok(PersistenceReport { betas: betas.to_vec(), tracks, flags })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::DEFAULT_MIN_WIDTH;

    #[test]
    fn small_dataset() {
        let d = compute_butterfly(3, 1.0, DEFAULT_MIN_WIDTH).unwrap();
        let names: Vec<String> = d.rows.iter().map(|r| r.freq.to_string()).collect();
        assert_eq!(names, ["0/1", "1/1", "1/2", "1/3", "2/3"]);
        let open: Vec<usize> = d.rows.iter().map(|r| r.open_gaps().count()).collect();
        assert_eq!(open, [0, 0, 0, 2, 2]);
        assert_eq!(d.band_count(), 1 + 1 + 2 + 3 + 3);
    }

    #[test]
    fn half_central_flagged_but_excluded() {
        let f = RationalFrequency::new(1, 2).unwrap();
        let r = persistence_sweep(&[f], &[0.3, 1.0], 3, DEFAULT_MIN_WIDTH).unwrap();
        assert_eq!(r.tracks.len(), 1);
        assert!(r.tracks[0].open.iter().all(|o| !o));
        assert!(PersistenceReport::is_excluded(&r.tracks[0]));
        assert!(r.flags.is_empty());
    }
}
