//! Bands, gaps, integrated density of states and gap labels at `α = p/q`.
//!
//! Everything rests on the Chambers decomposition
//! `det(E − H(θ₁, θ₂)) = P(E) + c₁ cos(qθ₁) + c₂ cos(qθ₂)` with `P` monic of
//! degree `q`, `c₂ = −2β^q` and `|c₁| = 2`. The spectrum is
//! `{E : |P(E)| ≤ |c₁| + |c₂|}`; its band edges are the eigenvalues of `H` at
//! the four phases with `qθ ∈ {0, π}²`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::DMatrix;
#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::algebra::hamiltonian_matrix;
use crate::error::{check_positive, Error, Result};
use crate::quad::{bisect, integrate1};
use crate::rational::RationalFrequency;
use crate::C64;

/// Default threshold separating open from closed gaps.
pub const DEFAULT_MIN_WIDTH: f64 = 1e-9;

/// Inter-band intervals narrower than this (times `1 + β`) are below the
/// accuracy of the edges and are reported as touching.
pub const TOUCH_TOLERANCE: f64 = 1e-12;

fn potential(freq: RationalFrequency, theta1: f64) -> Vec<f64> {
    let alpha = freq.alpha();
    (0..freq.qsize()).map(|j| 2.0 * (theta1 + 2.0 * PI * j as f64 * alpha).cos()).collect()
}

/// `tr Π_j [[E − a_j, −β²], [1, 0]]` with `a_j = 2cos(θ₁ + 2πjα)`.
pub fn transfer_trace(freq: RationalFrequency, beta: f64, theta1: f64, e: f64) -> f64 {
    let b2 = beta * beta;
    let mut m = [[1.0, 0.0], [0.0, 1.0]];
    for a in potential(freq, theta1) {
        let t = [[e - a, -b2], [1.0, 0.0]];
        m = [
            [t[0][0] * m[0][0] + t[0][1] * m[1][0], t[0][0] * m[0][1] + t[0][1] * m[1][1]],
            [t[1][0] * m[0][0] + t[1][1] * m[1][0], t[1][0] * m[0][1] + t[1][1] * m[1][1]],
        ];
    }
    m[0][0] + m[1][1]
}

fn reference_phase(freq: RationalFrequency) -> f64 {
    PI / (2.0 * freq.q() as f64)
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_add(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len().max(b.len())];
    for (i, x) in a.iter().enumerate() {
        out[i] += x;
    }
    for (i, x) in b.iter().enumerate() {
        out[i] += x;
    }
    out
}

/// Second-order jet in `(z, β)`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Jet2 {
    pub v: f64,
    pub dz: f64,
    pub db: f64,
    pub dzz: f64,
    pub dzb: f64,
    pub dbb: f64,
}

impl Jet2 {
    fn constant(v: f64) -> Self {
        Self { v, ..Self::default() }
    }

    fn add(self, o: Self) -> Self {
        Self {
            v: self.v + o.v,
            dz: self.dz + o.dz,
            db: self.db + o.db,
            dzz: self.dzz + o.dzz,
            dzb: self.dzb + o.dzb,
            dbb: self.dbb + o.dbb,
        }
    }

    fn mul(self, o: Self) -> Self {
        Self {
            v: self.v * o.v,
            dz: self.dz * o.v + self.v * o.dz,
            db: self.db * o.v + self.v * o.db,
            dzz: self.dzz * o.v + 2.0 * self.dz * o.dz + self.v * o.dzz,
            dzb: self.dzb * o.v + self.dz * o.db + self.db * o.dz + self.v * o.dzb,
            dbb: self.dbb * o.v + 2.0 * self.db * o.db + self.v * o.dbb,
        }
    }
}

/// `P(z)` together with its first and second partials in `(z, β)`.
pub fn chambers_jet(freq: RationalFrequency, beta: f64, z: f64) -> Jet2 {
    let hop = Jet2 { v: -beta * beta, db: -2.0 * beta, dbb: -2.0, ..Jet2::default() };
    let one = Jet2::constant(1.0);
    let zero = Jet2::default();
    let mut m = [[one, zero], [zero, one]];
    for a in potential(freq, reference_phase(freq)) {
        let d = Jet2 { v: z - a, dz: 1.0, ..Jet2::default() };
        m = [[d.mul(m[0][0]).add(hop.mul(m[1][0])), d.mul(m[0][1]).add(hop.mul(m[1][1]))], [m[0][0], m[0][1]]];
    }
    m[0][0].add(m[1][1])
}

/// Chambers decomposition of `det(E − H(θ₁, θ₂))` at fixed `(p/q, β)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChambersData {
    pub freq: RationalFrequency,
    pub beta: f64,
    /// Coefficients of `P`, lowest degree first; `poly[q] = 1`.
    pub poly: Vec<f64>,
    pub c1: f64,
    pub c2: f64,
    /// Largest relative phase-independence residual found during validation.
    pub residual: f64,
}

impl ChambersData {
    pub fn q(&self) -> usize {
        self.freq.qsize()
    }

    /// `P(E)`, evaluated through the transfer product (stable for large `q`).
    pub fn eval(&self, e: f64) -> f64 {
        transfer_trace(self.freq, self.beta, reference_phase(self.freq), e)
    }

    /// `P(E) + c₁cos(qθ₁) + c₂cos(qθ₂)`
    pub fn det(&self, e: f64, theta1: f64, theta2: f64) -> f64 {
        let q = self.freq.q() as f64;
        self.eval(e) + self.c1 * (q * theta1).cos() + self.c2 * (q * theta2).cos()
    }

    /// Half-width `|c₁| + |c₂|` of the admissible range of `P` on the spectrum.
    pub fn radius(&self) -> f64 {
        self.c1.abs() + self.c2.abs()
    }
}

fn dense_det(freq: RationalFrequency, beta: f64, e: f64, t1: f64, t2: f64) -> C64 {
    let q = freq.qsize();
    let h = hamiltonian_matrix(freq, t1, t2, beta);
    let m = DMatrix::<C64>::identity(q, q) * C64::from(e) - h;
    m.determinant()
}

pub fn chambers(freq: RationalFrequency, beta: f64) -> Result<ChambersData> {
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::NonPositiveCoupling(beta));
    }
    let q = freq.qsize();
    let b2 = beta * beta;
    // Polynomial 2×2 transfer product at the reference phase.
    let one = vec![1.0];
    let mut m = [[one.clone(), Vec::new()], [Vec::new(), one]];
    for a in potential(freq, reference_phase(freq)) {
        let d = vec![-a, 1.0];
        let top0 = poly_add(&poly_mul(&d, &m[0][0]), &poly_mul(&[-b2], &m[1][0]));
        let top1 = poly_add(&poly_mul(&d, &m[0][1]), &poly_mul(&[-b2], &m[1][1]));
        m = [[top0, top1], [m[0][0].clone(), m[0][1].clone()]];
    }
    let mut poly = poly_add(&m[0][0], &m[1][1]);
    poly.resize(q + 1, 0.0);
    let c1 = 0.5 * (transfer_trace(freq, beta, 0.0, 0.0) - transfer_trace(freq, beta, PI / q as f64, 0.0));
    let c2 = -2.0 * beta.powi(q as i32);
    let mut ch = ChambersData { freq, beta, poly, c1, c2, residual: 0.0 };

    let mut worst = 0.0f64;
    let scale_e = 2.0 + 2.0 * beta;
    for &e in &[-0.83 * scale_e, 0.11, 0.57 * scale_e] {
        for i in 0..5 {
            for k in 0..5 {
                let t1 = 0.173 + 1.217 * i as f64;
                let t2 = 0.419 + 1.309 * k as f64;
                let d = dense_det(freq, beta, e, t1, t2);
                let model = ch.det(e, t1, t2);
                let scale = 1.0 + ch.eval(e).abs() + ch.radius();
                worst = worst.max((d.re - model).abs().max(d.im.abs()) / scale);
            }
        }
    }
    ch.residual = worst;
    if !(worst <= 1e-10) {
        return Err(Error::ChambersResidual(worst));
    }
    Ok(ch)
}

/// Closed energy interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Band {
    pub lo: f64,
    pub hi: f64,
}

impl Band {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Where an energy sits relative to a band set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    Below,
    /// Inside band `k` (0-based).
    Band(usize),
    /// Strictly inside the `j`-th gap, between bands `j − 1` and `j`.
    Gap(usize),
    Above,
}

/// The `q` Chambers bands of `h(β)` at `p/q`, sorted, possibly touching.
#[derive(Debug, Clone, PartialEq)]
pub struct BandSet {
    pub chambers: ChambersData,
    pub bands: Vec<Band>,
}

fn polish_edge(ch: &ChambersData, e0: f64, t1: f64, t2: f64) -> Result<f64> {
    let f = |e: f64| ch.det(e, t1, t2);
    let delta = 1e-9 * (1.0 + e0.abs());
    let (lo, hi) = (e0 - delta, e0 + delta);
    let (flo, fhi) = (f(lo), f(hi));
    if !(flo.is_finite() && fhi.is_finite()) {
        return Err(Error::RootFinding { lo, hi, reason: "non-finite characteristic polynomial" });
    }
    if flo.signum() == fhi.signum() {
        // Double root (touching bands) or a root resolved below the bracket.
        return Ok(e0);
    }
    bisect(f, lo, hi, 1e-15 * (1.0 + e0.abs())).ok_or(Error::RootFinding { lo, hi, reason: "lost sign change" })
}

pub fn band_edges(ch: &ChambersData) -> Result<BandSet> {
    let q = ch.q();
    let h = PI / q as f64;
    let corners = [(0.0, 0.0), (0.0, h), (h, 0.0), (h, h)];
    let mut lo = vec![(f64::INFINITY, 0usize); q];
    let mut hi = vec![(f64::NEG_INFINITY, 0usize); q];
    for (c, &(t1, t2)) in corners.iter().enumerate() {
        let mut ev: Vec<f64> =
            hamiltonian_matrix(ch.freq, t1, t2, ch.beta).symmetric_eigen().eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        for k in 0..q {
            if ev[k] < lo[k].0 {
                lo[k] = (ev[k], c);
            }
            if ev[k] > hi[k].0 {
                hi[k] = (ev[k], c);
            }
        }
    }
    let mut edges = Vec::with_capacity(2 * q);
    for k in 0..q {
        let (t1, t2) = corners[lo[k].1];
        edges.push(polish_edge(ch, lo[k].0, t1, t2)?);
        let (t1, t2) = corners[hi[k].1];
        edges.push(polish_edge(ch, hi[k].0, t1, t2)?);
    }
    // Exact E ↦ −E symmetry, then monotone order. Inter-band intervals below
    // the edge accuracy are treated as touching and made exactly equal.
    let n = edges.len();
    let sym: Vec<f64> = (0..n).map(|i| 0.5 * (edges[i] - edges[n - 1 - i])).collect();
    let mut edges = sym;
    let snap = TOUCH_TOLERANCE * (1.0 + ch.beta);
    for i in 0..n - 1 {
        let limit = if i % 2 == 1 { snap } else { 0.0 };
        if edges[i] > edges[i + 1] - limit {
            let m = 0.5 * (edges[i] + edges[i + 1]);
            edges[i] = m;
            edges[i + 1] = m;
            edges[n - 1 - i] = -m;
            edges[n - 2 - i] = -m;
        }
    }
    let bands = (0..q).map(|k| Band { lo: edges[2 * k] + 0.0, hi: edges[2 * k + 1] + 0.0 }).collect();
    Ok(BandSet { chambers: ch.clone(), bands })
}

/// Bands of `h(β)` at `p/q`.
pub fn bands(freq: RationalFrequency, beta: f64) -> Result<BandSet> {
    band_edges(&chambers(freq, beta)?)
}

/// Merges touching or overlapping intervals of a sorted list.
pub fn merge_intervals(bands: &[Band]) -> Vec<Band> {
    let mut out: Vec<Band> = Vec::new();
    for b in bands {
        match out.last_mut() {
            Some(last) if b.lo <= last.hi => last.hi = last.hi.max(b.hi),
            _ => out.push(*b),
        }
    }
    out
}

fn distance_to(set: &[Band], x: f64) -> f64 {
    set.iter()
        .map(|b| {
            if x < b.lo {
                b.lo - x
            } else if x > b.hi {
                x - b.hi
            } else {
                0.0
            }
        })
        .fold(f64::INFINITY, f64::min)
}

fn directed_hausdorff(a: &[Band], b: &[Band]) -> f64 {
    let mut worst = 0.0f64;
    for ia in a {
        worst = worst.max(distance_to(b, ia.lo)).max(distance_to(b, ia.hi));
        for w in b.windows(2) {
            let mid = 0.5 * (w[0].hi + w[1].lo);
            if mid > ia.lo && mid < ia.hi {
                worst = worst.max(distance_to(b, mid));
            }
        }
    }
    worst
}

/// Hausdorff distance between two finite unions of closed intervals.
pub fn hausdorff(a: &[Band], b: &[Band]) -> f64 {
    let a = merge_intervals(a);
    let b = merge_intervals(b);
    directed_hausdorff(&a, &b).max(directed_hausdorff(&b, &a))
}

/// Distribution function of `a cos φ₁ + b cos φ₂` for independent uniform phases.
pub fn phase_sum_cdf(a: f64, b: f64, y: f64) -> f64 {
    let (a, b) = (a.abs().max(b.abs()), a.abs().min(b.abs()));
    if y <= -(a + b) {
        return 0.0;
    }
    if y >= a + b {
        return 1.0;
    }
    if a == 0.0 {
        return if y >= 0.0 { 1.0 } else { 0.0 };
    }
    if b < 1e-300 {
        return 1.0 - (y / a).clamp(-1.0, 1.0).acos() / PI;
    }
    let inner = |s: f64| 1.0 - (s / b).clamp(-1.0, 1.0).acos() / PI;
    let mut cuts = vec![0.0, PI];
    for c in [(y - b) / a, (y + b) / a] {
        if c > -1.0 && c < 1.0 {
            cuts.push(c.acos());
        }
    }
    cuts.sort_by(|x, y| x.total_cmp(y));
    let mut total = 0.0;
    for w in cuts.windows(2) {
        if w[1] > w[0] {
            total += integrate1(|t| inner(y - a * t.cos()), w[0], w[1], 1e-15, 1e-14);
        }
    }
    (total / PI).clamp(0.0, 1.0)
}

impl BandSet {
    pub fn freq(&self) -> RationalFrequency {
        self.chambers.freq
    }

    pub fn beta(&self) -> f64 {
        self.chambers.beta
    }

    pub fn len(&self) -> usize {
        self.bands.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bands.is_empty()
    }

    /// The spectrum as a union of disjoint intervals.
    pub fn union(&self) -> Vec<Band> {
        merge_intervals(&self.bands)
    }

    pub fn locate(&self, e: f64) -> Location {
        let first = self.bands[0];
        let last = self.bands[self.len() - 1];
        if e < first.lo {
            return Location::Below;
        }
        if e > last.hi {
            return Location::Above;
        }
        for (k, b) in self.bands.iter().enumerate() {
            if e >= b.lo && e <= b.hi {
                return Location::Band(k);
            }
            if k + 1 < self.len() && e > b.hi && e < self.bands[k + 1].lo {
                return Location::Gap(k + 1);
            }
        }
        Location::Above
    }

    /// Euclidean distance from a complex energy to the spectrum.
    pub fn distance(&self, z: C64) -> f64 {
        distance_to(&self.bands, z.re).hypot(z.im)
    }

    /// The `j`-th inter-band interval `(b_{j−1}, a_j)`, `1 ≤ j ≤ q−1`.
    pub fn gap_interval(&self, j: usize) -> Option<(f64, f64)> {
        if j == 0 || j >= self.len() {
            return None;
        }
        Some((self.bands[j - 1].hi, self.bands[j].lo))
    }

    pub fn scaled(&self, s: f64) -> Vec<Band> {
        let mut out: Vec<Band> = self
            .bands
            .iter()
            .map(|b| if s >= 0.0 { Band { lo: s * b.lo, hi: s * b.hi } } else { Band { lo: s * b.hi, hi: s * b.lo } })
            .collect();
        out.sort_by(|x, y| x.lo.total_cmp(&y.lo));
        out
    }

    fn band_orientation(&self, k: usize) -> f64 {
        let b = self.bands[k];
        (self.chambers.eval(b.hi) - self.chambers.eval(b.lo)).signum()
    }

    /// Fraction of the phase torus on which the `k`-th eigenvalue is `≤ e`.
    pub fn band_fraction(&self, k: usize, e: f64) -> f64 {
        let b = self.bands[k];
        if e <= b.lo {
            return 0.0;
        }
        if e >= b.hi {
            return 1.0;
        }
        let y = self.band_orientation(k) * self.chambers.eval(e);
        phase_sum_cdf(self.chambers.c1, self.chambers.c2, y)
    }

    /// Energy in band `k` carrying half of its density of states (`P(E) = 0`).
    pub fn ids_midpoint(&self, k: usize) -> f64 {
        let b = self.bands[k];
        if b.width() <= 0.0 {
            return b.lo;
        }
        let ch = &self.chambers;
        bisect(|e| ch.eval(e), b.lo, b.hi, 1e-15).unwrap_or(0.5 * (b.lo + b.hi))
    }
}

/// Integrated density of states `N(E)`: weight `1/q` per band, exact `j/q` on gaps.
pub fn ids(bands: &BandSet, e: f64) -> f64 {
    let q = bands.len() as f64;
    match bands.locate(e) {
        Location::Below => 0.0,
        Location::Above => 1.0,
        Location::Gap(j) => j as f64 / q,
        Location::Band(k) => (k as f64 + bands.band_fraction(k, e)) / q,
    }
}

/// Solves `j/q = m + n·p/q` with `|n| ≤ q/2`; the even-`q` tie `n = ±q/2` is
/// resolved to `+q/2`.
pub fn gap_label(j: i64, freq: RationalFrequency) -> Result<(i64, i64)> {
    let q = freq.q() as i64;
    let p = freq.p() as i64;
    if j < 1 || j > q - 1 {
        return Err(Error::GapIndex { j, max: q - 1 });
    }
    let half = q / 2;
    for n in (-half..=half).rev() {
        if (n * p - j).rem_euclid(q) == 0 && (q % 2 == 1 || n != -half || half == 0) {
            return Ok(((j - n * p) / q, n));
        }
    }
    Err(Error::GapIndex { j, max: q - 1 })
}

/// One inter-band interval with its density-of-states label.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapRecord {
    pub freq: RationalFrequency,
    pub beta: f64,
    pub lo: f64,
    pub hi: f64,
    /// Numerator of the IDS value `j/q` on the gap.
    pub j: i64,
    pub m: i64,
    pub n: i64,
    /// Width above the `min_width` threshold.
    pub open: bool,
}

impl GapRecord {
    pub fn width(&self) -> f64 {
        (self.hi - self.lo).max(0.0)
    }

    pub fn hall(&self) -> i64 {
        self.n
    }

    pub fn ids_value(&self) -> f64 {
        self.j as f64 / self.freq.q() as f64
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    /// Even-`q` central gap, which never opens.
    pub fn is_central(&self) -> bool {
        let q = self.freq.q() as i64;
        q % 2 == 0 && 2 * self.j == q
    }
}

/// Every inter-band interval of a band set, flagged open when wider than `min_width`.
pub fn gaps_of(bands: &BandSet, min_width: f64) -> Result<Vec<GapRecord>> {
    let freq = bands.freq();
    if bands.beta() == 0.0 {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for j in 1..bands.len() {
        let (lo, hi) = bands.gap_interval(j).expect("index in range");
        let (m, n) = gap_label(j as i64, freq)?;
        out.push(GapRecord { freq, beta: bands.beta(), lo, hi, j: j as i64, m, n, open: hi - lo > min_width });
    }
    Ok(out)
}

pub fn gaps(freq: RationalFrequency, beta: f64, min_width: f64) -> Result<Vec<GapRecord>> {
    if beta == 0.0 {
        return Ok(Vec::new());
    }
    check_positive(beta)?;
    gaps_of(&bands(freq, beta)?, min_width)
}

/// Hausdorff distance between `Sp h(β)` and `β·Sp h(1/β)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualReport {
    pub freq: RationalFrequency,
    pub beta: f64,
    pub distance: f64,
}

pub fn dual_check(freq: RationalFrequency, beta: f64) -> Result<DualReport> {
    check_positive(beta)?;
    let direct = bands(freq, beta)?;
    let dual = bands(freq, 1.0 / beta)?;
    let distance = hausdorff(&direct.bands, &dual.scaled(beta));
    Ok(DualReport { freq, beta, distance })
}

/// Width of one labelled gap along a coupling grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GapTrack {
    pub freq: RationalFrequency,
    pub label: (i64, i64),
    pub betas: Vec<f64>,
    pub widths: Vec<f64>,
    pub open: Vec<bool>,
}

/// Gap index `j` carrying label `(m, n)` at `p/q`, if the label is realized.
pub fn label_index(label: (i64, i64), freq: RationalFrequency) -> Result<i64> {
    let (m, n) = label;
    let q = freq.q() as i64;
    let j = m * q + n * freq.p() as i64;
    let err = Error::LabelNotRealizable { m, n, p: freq.p(), q: freq.q() };
    if j < 1 || j > q - 1 {
        return Err(err);
    }
    if gap_label(j, freq)? != label {
        return Err(err);
    }
    Ok(j)
}

pub fn track_gap(label: (i64, i64), freq: RationalFrequency, betas: &[f64], min_width: f64) -> Result<GapTrack> {
    let j = label_index(label, freq)? as usize;
    if betas.iter().any(|&b| !(b > 0.0 && b <= 1.0)) {
        return Err(Error::InvalidArgument("coupling grid must lie in (0, 1]".into()));
    }
    if betas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("coupling grid must be strictly increasing".into()));
    }
    let mut widths = Vec::with_capacity(betas.len());
    let mut open = Vec::with_capacity(betas.len());
    for &b in betas {
        let bs = bands(freq, b)?;
        let (lo, hi) = bs.gap_interval(j).expect("label index in range");
        let w = (hi - lo).max(0.0);
        widths.push(w);
        open.push(w > min_width);
    }
    Ok(GapTrack { freq, label, betas: betas.to_vec(), widths, open })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(p: u64, q: u64) -> RationalFrequency {
        RationalFrequency::new(p, q).unwrap()
    }

    #[test]
    fn scalar_chambers() {
        let ch = chambers(f(1, 1), 0.3).unwrap();
        assert!((ch.poly[0]).abs() < 1e-15 && (ch.poly[1] - 1.0).abs() < 1e-15);
        assert!((ch.c1 + 2.0).abs() < 1e-14 && (ch.c2 + 0.6).abs() < 1e-14);
    }

    #[test]
    fn half_chambers() {
        let ch = chambers(f(1, 2), 0.5).unwrap();
        assert!((ch.poly[0] + 2.5).abs() < 1e-14 && ch.poly[1].abs() < 1e-14 && (ch.poly[2] - 1.0).abs() < 1e-14);
        let bs = band_edges(&ch).unwrap();
        let e = 2.0 * 1.25f64.sqrt();
        assert!((bs.bands[0].lo + e).abs() < 1e-12 && (bs.bands[1].hi - e).abs() < 1e-12);
        assert_eq!(bs.bands[0].hi, bs.bands[1].lo);
        assert!(bs.bands[0].hi.abs() < 1e-12);
    }

    #[test]
    fn c1_magnitude_two() {
        for q in 1..=13u64 {
            for p in 0..=q {
                if let Ok(fr) = RationalFrequency::new(p, q) {
                    for beta in [0.0, 0.3, 1.7] {
                        let ch = chambers(fr, beta).unwrap();
                        assert!((ch.c1.abs() - 2.0).abs() < 1e-9, "{fr} {beta} {}", ch.c1);
                    }
                }
            }
        }
    }

    #[test]
    fn free_case_tiles_interval() {
        let bs = bands(f(2, 5), 0.0).unwrap();
        let u = bs.union();
        assert_eq!(u.len(), 1);
        assert!((u[0].lo + 2.0).abs() < 1e-12 && (u[0].hi - 2.0).abs() < 1e-12);
        assert!(gaps(f(2, 5), 0.0, DEFAULT_MIN_WIDTH).unwrap().is_empty());
    }

    #[test]
    fn labels() {
        assert_eq!(gap_label(1, f(1, 3)).unwrap(), (0, 1));
        assert_eq!(gap_label(2, f(1, 3)).unwrap(), (1, -1));
        let got: Vec<_> = (1..5).map(|j| gap_label(j, f(2, 5)).unwrap()).collect();
        assert_eq!(got, [(1, -2), (0, 1), (1, -1), (0, 2)]);
        assert_eq!(gap_label(1, f(1, 2)).unwrap(), (0, 1));
        assert_eq!(gap_label(2, f(3, 4)).unwrap().1, 2);
        assert!(gap_label(0, f(1, 3)).is_err());
        assert!(gap_label(3, f(1, 3)).is_err());
    }

    #[test]
    fn cdf_limits() {
        assert_eq!(phase_sum_cdf(2.0, 0.5, -3.0), 0.0);
        assert_eq!(phase_sum_cdf(2.0, 0.5, 3.0), 1.0);
        assert!((phase_sum_cdf(2.0, 0.5, 0.0) - 0.5).abs() < 1e-13);
        let y = 0.7;
        assert!((phase_sum_cdf(2.0, 0.5, y) + phase_sum_cdf(2.0, 0.5, -y) - 1.0).abs() < 1e-13);
        // b → 0 limit
        assert!((phase_sum_cdf(2.0, 1e-12, 1.0) - (1.0 - 0.5f64.acos() / PI)).abs() < 1e-9);
    }

    #[test]
    fn track_rejects_bad_labels() {
        assert!(track_gap((0, 3), f(2, 5), &[0.5], DEFAULT_MIN_WIDTH).is_err());
        assert!(track_gap((1, -1), f(1, 2), &[0.5], DEFAULT_MIN_WIDTH).is_err());
        assert!(track_gap((0, 1), f(1, 2), &[0.5, 0.4], DEFAULT_MIN_WIDTH).is_err());
        let t = track_gap((0, 1), f(1, 2), &[0.2, 0.6, 1.0], DEFAULT_MIN_WIDTH).unwrap();
        assert!(t.widths.iter().all(|&w| w == 0.0));
    }
}
