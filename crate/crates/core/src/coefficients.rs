//! Double-indexed coefficient sheets `x_{p,qe}` on a window `|p|, |qe| ≤ P`,
//! and the linear system they satisfy:
//!
//! ```text
//! cos(παqe)(x_{p+1,qe} + x_{p−1,qe}) + β cos(παp)(x_{p,qe+1} + x_{p,qe−1}) = s x_{p,qe}
//! sin(παqe)(x_{p+1,qe} − x_{p−1,qe}) − β sin(παp)(x_{p,qe+1} − x_{p,qe−1}) = 0
//! ```
//!
//! The resolvent coefficients `c_{p,qe}(z) = τ((h − z)⁻¹ w_{p,qe})` solve it
//! away from the origin; at the origin the first equation reads
//! `(…) − z c₀₀ = 1`. Sign convention: `c₀₀ = τ((h − z)⁻¹) = −g0`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::algebra::{expi, hamiltonian_matrix, PhaseGrid};
use crate::error::{check_positive, check_subcritical, Error, Result};
use crate::quad::integrate_vec_breaks;
use crate::rational::RationalFrequency;
use crate::spectrum::bands;
use crate::{CMat, C64};

/// What a sheet holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SheetKind {
    /// `c_{p,qe}(z)`
    C,
    /// `d = (R⁺ + R⁻)/2`
    D,
    /// `φ = c − d`
    Phi,
    /// Solution supported on `p ≥ 1`
    RPlus,
    /// Solution supported on `p ≤ −1`
    RMinus,
}

impl SheetKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::C => "c",
            Self::D => "d",
            Self::Phi => "phi",
            Self::RPlus => "R+",
            Self::RMinus => "R-",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSheet {
    pub kind: SheetKind,
    pub freq: RationalFrequency,
    pub beta: f64,
    pub z: f64,
    pub radius: usize,
    values: Vec<f64>,
    /// Largest imaginary part dropped when the entries were computed as traces.
    pub imag_max: f64,
}

impl CoefficientSheet {
    pub fn zeros(kind: SheetKind, freq: RationalFrequency, beta: f64, z: f64, radius: usize) -> Self {
        let n = 2 * radius + 1;
        Self { kind, freq, beta, z, radius, values: vec![0.0; n * n], imag_max: 0.0 }
    }

    fn index(&self, p: i64, qe: i64) -> Option<usize> {
        let r = self.radius as i64;
        if p.abs() > r || qe.abs() > r {
            return None;
        }
        Some(((p + r) * (2 * r + 1) + (qe + r)) as usize)
    }

    /// Entry at `(p, qe)`; zero outside the window.
    pub fn get(&self, p: i64, qe: i64) -> f64 {
        self.index(p, qe).map_or(0.0, |i| self.values[i])
    }

    pub fn set(&mut self, p: i64, qe: i64, v: f64) {
        if let Some(i) = self.index(p, qe) {
            self.values[i] = v;
        }
    }

    /// `(p, qe, value)` in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (i64, i64, f64)> + '_ {
        let r = self.radius as i64;
        (-r..=r).flat_map(move |p| (-r..=r).map(move |qe| (p, qe, self.get(p, qe))))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    fn same_setting(&self, o: &Self) -> bool {
        self.freq == o.freq && self.beta == o.beta && self.z == o.z && self.radius == o.radius
    }
}

fn ensure_outside(freq: RationalFrequency, beta: f64, z: f64) -> Result<()> {
    let bs = bands(freq, beta)?;
    let dist = bs.distance(C64::new(z, 0.0));
    if dist < 1e-8 {
        return Err(Error::NearSpectrum { z, dist });
    }
    Ok(())
}

/// Floquet data of the period-`q` Jacobi operator
/// `(Hψ)_n = 2cos(θ₁ + 2πnα)ψ_n + β(ψ_{n−1} + ψ_{n+1})` on `ℓ²(ℤ)` at a real
/// energy outside its spectrum.
///
/// `ψ₊` decays as `n → +∞`, `ψ₋` as `n → −∞`; both are stored on one period
/// `n = −1..=q` and extended by `ψ±(n + q) = μ± ψ±(n)`, so no product of
/// transfer matrices is ever propagated in its unstable direction.
#[derive(Debug, Clone)]
pub struct LatticeGreen {
    q: usize,
    plus: Vec<f64>,
    minus: Vec<f64>,
    mu_plus: f64,
    wronskian: f64,
}

impl LatticeGreen {
    pub fn new(freq: RationalFrequency, beta: f64, theta1: f64, z: f64) -> Result<Self> {
        check_positive(beta)?;
        let q = freq.qsize();
        let alpha = freq.alpha();
        let pot: Vec<f64> = (0..q).map(|n| 2.0 * (theta1 + 2.0 * PI * alpha * n as f64).cos()).collect();
        // (ψ_{n+1}, ψ_n) = T_n (ψ_n, ψ_{n−1}), T_n = [[(z − V_n)/β, −1], [1, 0]]
        let mut m = [[1.0, 0.0], [0.0, 1.0]];
        for v in &pot {
            let t = (z - v) / beta;
            m = [[t * m[0][0] - m[1][0], t * m[0][1] - m[1][1]], m[0]];
            let s = m.iter().flatten().fold(0.0f64, |a, x| a.max(x.abs()));
            for x in m.iter_mut().flatten() {
                *x /= s;
            }
        }
        let tr = m[0][0] + m[1][1];
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        let disc = tr * tr - 4.0 * det;
        if !(disc > 0.0) {
            return Err(Error::NearSpectrum { z, dist: 0.0 });
        }
        let big = 0.5 * (tr + tr.signum() * disc.sqrt());
        let small = det / big;
        let eigvec = |nu: f64| {
            let a = [m[0][1], nu - m[0][0]];
            let b = [nu - m[1][1], m[1][0]];
            if a[0].hypot(a[1]) >= b[0].hypot(b[1]) {
                a
            } else {
                b
            }
        };
        let step = |psi_n: f64, psi_nb: f64, v: f64| ((z - v) * psi_n - beta * psi_nb) / beta;
        // ψ₋ forward from (ψ(0), ψ(−1)); index n + 1.
        let e = eigvec(big);
        let mut minus = vec![0.0; q + 2];
        minus[1] = e[0];
        minus[0] = e[1];
        for n in 0..q {
            minus[n + 2] = step(minus[n + 1], minus[n], pot[n]);
        }
        // ψ₊ backward from (ψ(q), ψ(q−1)).
        let e = eigvec(small);
        let mut plus = vec![0.0; q + 2];
        plus[q + 1] = e[0];
        plus[q] = e[1];
        for n in (0..q).rev() {
            // β ψ_{n−1} = (z − V_n) ψ_n − β ψ_{n+1}
            plus[n] = step(plus[n + 1], plus[n + 2], pot[n]);
        }
        let ratio = |psi: &[f64]| {
            if psi[1].abs() >= psi[0].abs() {
                psi[q + 1] / psi[1]
            } else {
                psi[q] / psi[0]
            }
        };
        let mu_plus = ratio(&plus);
        let mu_minus = ratio(&minus);
        let wronskian = beta * (minus[1] * plus[2] - minus[2] * plus[1]);
        if !(mu_plus.abs() < 1.0 && mu_minus.abs() > 1.0 && wronskian.is_finite() && wronskian != 0.0) {
            return Err(Error::NearSpectrum { z, dist: 0.0 });
        }
        Ok(Self { q, plus, minus, mu_plus, wronskian })
    }

    /// `⟨δ_n, (H − z)⁻¹ δ_m⟩`
    pub fn entry(&self, n: i64, m: i64) -> f64 {
        let (lo, hi) = if n <= m { (n, m) } else { (m, n) };
        let q = self.q as i64;
        let (klo, rlo) = (lo.div_euclid(q), lo.rem_euclid(q) as usize);
        let (khi, rhi) = (hi.div_euclid(q), hi.rem_euclid(q) as usize);
        self.minus[rlo + 1] * self.plus[rhi + 1] * self.mu_plus.powi((khi - klo) as i32) / self.wronskian
    }
}

/// `c_{p,qe}(z) = τ((h(β) − z)⁻¹ w_{p,qe})` for `|p|, |qe| ≤ radius`.
///
/// The `θ₂` average is done exactly: it turns the `q × q` resolvent into the
/// Green's function of the lattice operator, so that
/// `c_{p,qe} = ⟨ (1/q) Σ_a λ^{−p qe} e^{ip(θ₁ + 2π(a+qe)α)} G(a, a+qe) ⟩_{θ₁}`
/// with the remaining `θ₁` average done by adaptive quadrature. This stays
/// accurate arbitrarily close to the spectrum.
pub fn coefficient_sheet(freq: RationalFrequency, beta: f64, z: f64, radius: usize) -> Result<CoefficientSheet> {
    check_positive(beta)?;
    ensure_outside(freq, beta, z)?;
    let q = freq.qsize();
    let alpha = freq.alpha();
    let r = radius as i64;
    let n = 2 * radius + 1;
    let mut failure = None;
    // λ^{−p qe}, row-major in (p, qe)
    let phase: Vec<C64> = (-r..=r).flat_map(|p| (-r..=r).map(move |qe| expi(-PI * alpha * (p * qe) as f64))).collect();
    let mut sums = vec![C64::new(0.0, 0.0); n];
    let integrand = |t1: f64, out: &mut [f64]| {
        let g = match LatticeGreen::new(freq, beta, t1, z) {
            Ok(g) => g,
            Err(e) => {
                out.iter_mut().for_each(|x| *x = 0.0);
                failure = Some(e);
                return;
            }
        };
        let diag: Vec<C64> = (0..q).map(|b| expi(t1 + 2.0 * PI * alpha * b as f64)).collect();
        let (re, im) = out.split_at_mut(n * n);
        for qe in -r..=r {
            let col = (qe + r) as usize;
            sums.iter_mut().for_each(|s| *s = C64::new(0.0, 0.0));
            for a in 0..q as i64 {
                let gv = g.entry(a, a + qe) / q as f64;
                let d = diag[(a + qe).rem_euclid(q as i64) as usize];
                let mut dp = d.conj().powi(r as i32) * gv;
                for s in sums.iter_mut() {
                    *s += dp;
                    dp *= d;
                }
            }
            for (pi, s) in sums.iter().enumerate() {
                let i = pi * n + col;
                let v = s * phase[i];
                re[i] = v.re;
                im[i] = v.im;
            }
        }
    };
    // band edges are attained at qθ₁ ∈ πℤ, where the integrand is sharpest
    let breaks: Vec<f64> = (0..=2 * q).map(|k| PI * k as f64 / q as f64).collect();
    let v = integrate_vec_breaks(integrand, 2 * n * n, &breaks, 1e-12, 1e-11);
    if let Some(e) = failure {
        return Err(e);
    }
    let mut sheet = CoefficientSheet::zeros(SheetKind::C, freq, beta, z, radius);
    let mut imag_max = 0.0f64;
    for i in 0..n * n {
        let (re, im) = (v[i] / (2.0 * PI), v[n * n + i] / (2.0 * PI));
        if !(re.is_finite() && im.is_finite()) {
            return Err(Error::NonFinite("coefficient sheet"));
        }
        sheet.values[i] = re;
        imag_max = imag_max.max(im.abs());
    }
    sheet.imag_max = imag_max;
    Ok(sheet)
}

/// The same sheet as a normalized matrix trace over a uniform reduced phase
/// grid of `grid × grid` points. Needs `q·grid > 2·radius` so that no
/// monomial in the window aliases to the identity; converges slowly when
/// `z` is close to the spectrum.
pub fn coefficient_sheet_on_grid(
    freq: RationalFrequency,
    beta: f64,
    z: f64,
    radius: usize,
    grid: usize,
) -> Result<CoefficientSheet> {
    ensure_outside(freq, beta, z)?;
    let q = freq.qsize();
    let grid = PhaseGrid::reduced(freq, grid)?;
    if q * grid.n1 <= 2 * radius {
        return Err(Error::InvalidArgument(format!(
            "phase grid {} too coarse for window {radius} at q = {q}",
            grid.n1
        )));
    }
    let alpha = freq.alpha();
    let r = radius as i64;
    let n = 2 * radius + 1;
    let mut acc = vec![C64::new(0.0, 0.0); n * n];
    let ident = CMat::identity(q, q);
    for (t1, t2) in grid.points() {
        let m = hamiltonian_matrix(freq, t1, t2, beta) - &ident * C64::from(z);
        let res = m.try_inverse().ok_or(Error::NonFinite("resolvent"))?;
        // diag[b] = e^{i(θ₁ + 2πbα)}, so (u^p)_{bb} = diag[b]^p.
        let diag: Vec<C64> = (0..q).map(|b| expi(t1 + 2.0 * PI * b as f64 * alpha)).collect();
        for qe in -r..=r {
            let step = qe.rem_euclid(q as i64) as usize;
            let shift = expi(qe as f64 * t2);
            // pairs (R_{a,b}, diag[b]) with b = a + qe mod q
            let pairs: Vec<(C64, C64)> = (0..q)
                .map(|a| {
                    let b = (a + step) % q;
                    (res[(a, b)], diag[b])
                })
                .collect();
            for p in -r..=r {
                let pref = expi(-PI * alpha * (p * qe) as f64) * shift;
                let mut tr = C64::new(0.0, 0.0);
                for &(rab, d) in &pairs {
                    tr += rab * d.powi(p as i32);
                }
                acc[((p + r) as usize) * n + (qe + r) as usize] += pref * tr;
            }
        }
    }
    let scale = 1.0 / (grid.len() * q) as f64;
    let mut sheet = CoefficientSheet::zeros(SheetKind::C, freq, beta, z, radius);
    let mut imag_max = 0.0f64;
    for (i, v) in acc.iter().enumerate() {
        let v = v * scale;
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::NonFinite("coefficient sheet"));
        }
        sheet.values[i] = v.re;
        imag_max = imag_max.max(v.im.abs());
    }
    sheet.imag_max = imag_max;
    Ok(sheet)
}

/// Residuals of both equations of the system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residual21 {
    /// Max over interior points except the origin.
    pub off_origin: f64,
    /// `LHS − s x₀₀` of the first equation at the origin (1 for `c` and `d`, 0 for `φ`).
    pub origin_first: f64,
    /// Second equation at the origin.
    pub origin_second: f64,
}

impl Residual21 {
    /// Max residual including the homogeneous origin row.
    pub fn with_origin(&self) -> f64 {
        self.off_origin.max(self.origin_first.abs()).max(self.origin_second.abs())
    }
}

fn equations(x: &CoefficientSheet, alpha: f64, beta: f64, s: f64, p: i64, qe: i64) -> (f64, f64) {
    let a = PI * alpha * qe as f64;
    let b = PI * alpha * p as f64;
    let e1 = a.cos() * (x.get(p + 1, qe) + x.get(p - 1, qe)) + beta * b.cos() * (x.get(p, qe + 1) + x.get(p, qe - 1))
        - s * x.get(p, qe);
    let e2 = a.sin() * (x.get(p + 1, qe) - x.get(p - 1, qe)) - beta * b.sin() * (x.get(p, qe + 1) - x.get(p, qe - 1));
    (e1, e2)
}

/// Evaluates the system at every `(p, qe)` with `|p|, |qe| ≤ P − 1`.
pub fn residual_21(sheet: &CoefficientSheet, beta: f64, s: f64) -> Residual21 {
    let r = sheet.radius as i64 - 1;
    let alpha = sheet.freq.alpha();
    let mut worst = 0.0f64;
    let (o1, o2) = equations(sheet, alpha, beta, s, 0, 0);
    for p in -r..=r {
        for qe in -r..=r {
            if p == 0 && qe == 0 {
                continue;
            }
            let (e1, e2) = equations(sheet, alpha, beta, s, p, qe);
            worst = worst.max(e1.abs()).max(e2.abs());
        }
    }
    Residual21 { off_origin: worst, origin_first: o1, origin_second: o2 }
}

/// The solutions supported on `p ≥ 1` (`R⁺`) and `p ≤ −1` (`R⁻`).
///
/// `R⁺` is seeded with `x_{1,0} = 1` and marched column by column: inside
/// the sector `|qe| < p` the combination `cos(παqe)·(first) + sin(παqe)·(second)`
/// of the equations at `(p, qe)` gives
/// `x_{p+1,qe} = s cos(παqe) x_{p,qe} − cos(2παqe) x_{p−1,qe}
///  − β[cos(πα(qe+p)) x_{p,qe+1} + cos(πα(qe−p)) x_{p,qe−1}]`,
/// and on the sector boundary `x_{p+1,±p} = −β x_{p,±(p−1)}`. The march
/// never crosses the diagonals `p = ±qe`. `R⁻_{p,qe} = R⁺_{−p,qe}`.
pub fn recursion_r(
    freq: RationalFrequency,
    beta: f64,
    z: f64,
    radius: usize,
) -> Result<(CoefficientSheet, CoefficientSheet)> {
    check_subcritical(beta)?;
    ensure_outside(freq, beta, z)?;
    if radius < 1 {
        return Err(Error::InvalidArgument("window radius must be at least 1".into()));
    }
    let alpha = freq.alpha();
    let r = radius as i64;
    let mut plus = CoefficientSheet::zeros(SheetKind::RPlus, freq, beta, z, radius);
    plus.set(1, 0, 1.0);
    for p in 1..r {
        for qe in -p..=p {
            let v = if qe.abs() < p {
                let a = PI * alpha * qe as f64;
                let b = PI * alpha * p as f64;
                z * a.cos() * plus.get(p, qe)
                    - (2.0 * a).cos() * plus.get(p - 1, qe)
                    - beta * ((a + b).cos() * plus.get(p, qe + 1) + (a - b).cos() * plus.get(p, qe - 1))
            } else {
                -beta * plus.get(p, qe - qe.signum())
            };
            if !v.is_finite() {
                return Err(Error::InvalidArgument(format!("recursion broke down at ({}, {qe})", p + 1)));
            }
            plus.set(p + 1, qe, v);
        }
    }
    let mut minus = CoefficientSheet::zeros(SheetKind::RMinus, freq, beta, z, radius);
    for (p, qe, v) in plus.entries().collect::<Vec<_>>() {
        minus.set(-p, qe, v);
    }
    Ok((plus, minus))
}

/// `d = (R⁺ + R⁻)/2`
pub fn build_d(plus: &CoefficientSheet, minus: &CoefficientSheet) -> Result<CoefficientSheet> {
    if !plus.same_setting(minus) {
        return Err(Error::InvalidArgument("R+ and R- sheets differ in setting".into()));
    }
    let mut d = CoefficientSheet::zeros(SheetKind::D, plus.freq, plus.beta, plus.z, plus.radius);
    for (i, v) in d.values.iter_mut().enumerate() {
        *v = 0.5 * (plus.values[i] + minus.values[i]);
    }
    Ok(d)
}

/// `φ = c − d`
pub fn build_phi(c: &CoefficientSheet, d: &CoefficientSheet) -> Result<CoefficientSheet> {
    if !c.same_setting(d) {
        return Err(Error::InvalidArgument("c and d sheets differ in setting".into()));
    }
    let mut phi = CoefficientSheet::zeros(SheetKind::Phi, c.freq, c.beta, c.z, c.radius);
    for (i, v) in phi.values.iter_mut().enumerate() {
        *v = c.values[i] - d.values[i];
    }
    phi.imag_max = c.imag_max;
    Ok(phi)
}

/// Fitted exponential rate along the line `qe = slope·p + offset`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayEstimate {
    pub slope: i64,
    pub offset: i64,
    /// `exp` of the least-squares slope of `log|x|` against `|p|`; 0 for an all-zero line.
    pub rate: f64,
    /// RMS residual of the log-linear fit.
    pub residual: f64,
    /// `|p|` range used.
    pub window: (i64, i64),
    pub points: usize,
}

/// Entries below this fraction of the sheet maximum are treated as roundoff.
pub const DECAY_FLOOR: f64 = 1e-13;

/// Log-linear least-squares fit of `log|x|` against `|p|` over every entry of
/// the line `qe = slope·p + offset` inside the window (both signs of `p`),
/// the estimate of `limsup |x|^{1/|p|}`. Along lines off the axis the entries
/// oscillate through near-zeros, which makes tail-only fits on small windows
/// unreliable.
pub fn decay_rate(sheet: &CoefficientSheet, slope: i64, offset: i64) -> Result<DecayEstimate> {
    if slope != 1 && slope != -1 {
        return Err(Error::InvalidArgument("slope must be 1 or -1".into()));
    }
    let r = sheet.radius as i64;
    let floor = DECAY_FLOOR * sheet.max_abs();
    let mut pts = Vec::new();
    let mut any_nonzero = false;
    for p in -r..=r {
        let qe = slope * p + offset;
        if qe.abs() > r {
            continue;
        }
        let v = sheet.get(p, qe).abs();
        if v > 0.0 {
            any_nonzero = true;
        }
        if v > floor {
            pts.push((p.abs() as f64, v.ln()));
        }
    }
    let window = if pts.is_empty() {
        (0, 0)
    } else {
        pts.iter().fold((r, 0), |(lo, hi), p| (lo.min(p.0 as i64), hi.max(p.0 as i64)))
    };
    if !any_nonzero {
        return Ok(DecayEstimate { slope, offset, rate: 0.0, residual: 0.0, window, points: 0 });
    }
    if pts.len() < 4 {
        return Err(Error::InvalidArgument(format!(
            "line qe = {slope}p + {offset} has only {} usable points",
            pts.len()
        )));
    }
    let m = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let k = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    let c = (sy - k * sx) / m;
    let residual = (pts.iter().map(|p| (p.1 - c - k * p.0).powi(2)).sum::<f64>() / m).sqrt();
    Ok(DecayEstimate { slope, offset, rate: k.exp(), residual, window, points: pts.len() })
}

/// `(|c₀₀|, |c₀₁|)` at the sheet's energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VanishingProbe {
    pub z: f64,
    pub c00: f64,
    pub c01: f64,
}

impl VanishingProbe {
    pub fn both_below(&self, tol: f64) -> bool {
        self.c00.abs() < tol && self.c01.abs() < tol
    }
}

pub fn vanishing_probe(c: &CoefficientSheet) -> VanishingProbe {
    VanishingProbe { z: c.z, c00: c.get(0, 0), c01: c.get(0, 1) }
}

/// Outcome of imposing `c₀₀ = c₀₁ = 0` on a sheet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticVanishing {
    /// Max `|φ|` on the cross `|p| + |qe| ≤ 1`.
    pub cross_max: f64,
    /// `φ` at `(1,1), (1,−1), (−1,1), (−1,−1)`; not forced by the vanishing conditions.
    pub corners: [f64; 4],
}

/// Zeros `c₀₀`, `c₀,±1`, sets `c_{±1,0} = 1/2` as forced by the origin row and
/// the symmetry `c_{p,qe} = c_{|p|,|qe|}`, and returns `φ = c − d` near the origin.
pub fn synthetic_vanishing(c: &CoefficientSheet, d: &CoefficientSheet) -> Result<SyntheticVanishing> {
    let mut cs = c.clone();
    cs.set(0, 0, 0.0);
    cs.set(0, 1, 0.0);
    cs.set(0, -1, 0.0);
    cs.set(1, 0, 0.5);
    cs.set(-1, 0, 0.5);
    let phi = build_phi(&cs, d)?;
    let cross = [(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)];
    let cross_max = cross.iter().fold(0.0f64, |m, &(p, qe)| m.max(phi.get(p, qe).abs()));
    let corners = [phi.get(1, 1), phi.get(1, -1), phi.get(-1, 1), phi.get(-1, -1)];
    Ok(SyntheticVanishing { cross_max, corners })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(p: u64, q: u64) -> RationalFrequency {
        RationalFrequency::new(p, q).unwrap()
    }

    #[test]
    fn far_field_moments() {
        let c = coefficient_sheet(f(1, 3), 0.5, 10.0, 6).unwrap();
        // c00 = −Σ τ(h^k)/z^{k+1}
        assert!((c.get(0, 0) + 0.1025).abs() < 1e-4);
        assert!(c.imag_max < 1e-10);
        for (p, qe, v) in c.entries() {
            assert!((v - c.get(-p, -qe)).abs() < 1e-12);
            assert!((v - c.get(p.abs(), qe.abs())).abs() < 1e-12);
        }
        let r = residual_21(&c, 0.5, 10.0);
        assert!(r.off_origin < 1e-10);
        assert!((r.origin_first - 1.0).abs() < 1e-10);
    }

    #[test]
    fn lattice_green_matches_truncation() {
        let fr = f(2, 5);
        let (beta, t1, z) = (0.7, 0.3, 0.05);
        let g = LatticeGreen::new(fr, beta, t1, z).unwrap();
        let n = 301usize;
        let off = 150i64;
        let mut h = nalgebra::DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            let site = i as i64 - off;
            h[(i, i)] = 2.0 * (t1 + 2.0 * PI * fr.alpha() * site as f64).cos() - z;
            if i + 1 < n {
                h[(i, i + 1)] = beta;
                h[(i + 1, i)] = beta;
            }
        }
        let inv = h.try_inverse().unwrap();
        for (a, b) in [(0i64, 0i64), (0, 3), (2, -9), (-4, 11), (7, 7)] {
            let direct = inv[((a + off) as usize, (b + off) as usize)];
            assert!((direct - g.entry(a, b)).abs() < 1e-12, "{a} {b}: {direct} vs {}", g.entry(a, b));
        }
    }

    #[test]
    fn lattice_route_matches_grid_route() {
        let fr = f(3, 8);
        let a = coefficient_sheet(fr, 0.5, 3.2, 6).unwrap();
        let b = coefficient_sheet_on_grid(fr, 0.5, 3.2, 6, 48).unwrap();
        for (p, qe, v) in a.entries() {
            assert!((v - b.get(p, qe)).abs() < 1e-11, "({p},{qe})");
        }
    }

    #[test]
    fn recursion_structure() {
        let (rp, rm) = recursion_r(f(5, 8), 0.5, 3.0, 12).unwrap();
        for (p, qe, v) in rp.entries() {
            if p <= 0 || qe.abs() >= p {
                assert_eq!(v, 0.0);
            }
            assert_eq!(rm.get(-p, qe), v);
        }
        assert!(residual_21(&rp, 0.5, 3.0).off_origin < 1e-8);
        let d = build_d(&rp, &rm).unwrap();
        assert_eq!(d.get(1, 0), 0.5);
        let rd = residual_21(&d, 0.5, 3.0);
        assert!(rd.off_origin < 1e-8 && (rd.origin_first - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_line_sentinel() {
        let s = CoefficientSheet::zeros(SheetKind::D, f(1, 3), 0.5, 3.0, 8);
        assert_eq!(decay_rate(&s, 1, 0).unwrap().rate, 0.0);
        let r = residual_21(&s, 0.5, 3.0);
        assert_eq!(r.with_origin(), 0.0);
    }
}
