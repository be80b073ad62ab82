//! The function `L(β, z) = τ(log|h(β) − z|)`, its derivatives and critical points.
//!
//! Four independent evaluation routes:
//! * transfer: Schrödinger cocycle `[[E − 2βcos 2π(θ + nα), −1], [1, 0]]`,
//!   exact monodromy over one period at rational `α`;
//! * Thouless: `∫ log|E − x| dN(x)` against a piecewise-linear IDS;
//! * trace: eigen-decomposition of `h(β)` on a phase grid ([`PhaseSpectra`]);
//! * Chambers: `(1/q) E_φ log|P(z) + c₁cos φ₁ + c₂cos φ₂|` with the inner
//!   phase average in closed form ([`chambers_surface`]). This route stays
//!   accurate in gaps far narrower than any phase grid can resolve.

use alloc::vec::Vec;
use core::f64::consts::PI;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::algebra::{build_rep, hamiltonian_matrix, PhaseGrid};
use crate::error::{check_positive, Error, Result};
use crate::quad::integrate;
use crate::rational::RationalFrequency;
use crate::spectrum::{chambers_jet, transfer_trace, BandSet, GapRecord, Location};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Transfer,
    Thouless,
    Trace,
    Chambers,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovValue {
    pub beta: f64,
    pub z: C64,
    pub value: f64,
    pub method: Method,
}

/// Rotation number for the transfer route.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Rotation {
    Rational(RationalFrequency),
    Irrational(f64),
}

type M2 = [[C64; 2]; 2];

fn m2_mul(a: &M2, b: &M2) -> M2 {
    [
        [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
        [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
    ]
}

fn m2_norm(a: &M2) -> f64 {
    a.iter().flatten().fold(0.0, |m, z| m.max(z.norm()))
}

/// `log` of the spectral radius of `s·a`, where `log_s` is tracked separately.
fn log_spectral_radius(a: &M2, log_s: f64) -> f64 {
    let t = a[0][0] + a[1][1];
    let d = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    let disc = (t * t - d * 4.0).sqrt();
    let r = ((t + disc) * 0.5).norm().max(((t - disc) * 0.5).norm());
    log_s + r.ln()
}

fn cocycle(beta: f64, e: C64, x: f64) -> M2 {
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    [[e - 2.0 * beta * (2.0 * PI * x).cos(), -one], [one, zero]]
}

pub fn lyapunov_transfer(
    rot: Rotation,
    beta: f64,
    e: C64,
    theta_samples: usize,
    n_steps: usize,
) -> Result<LyapunovValue> {
    if !(beta >= 0.0) || theta_samples == 0 {
        return Err(Error::InvalidArgument("need beta >= 0 and at least one phase sample".into()));
    }
    let value = match rot {
        Rotation::Rational(freq) => {
            let q = freq.qsize();
            if n_steps < q {
                return Err(Error::InvalidArgument("n_steps must be at least q".into()));
            }
            let alpha = freq.alpha();
            let mut acc = 0.0;
            // The period-averaged exponent depends on θ only through qθ.
            for i in 0..theta_samples {
                let theta = i as f64 / (theta_samples * q) as f64;
                let mut m: M2 = [[C64::new(1.0, 0.0), C64::new(0.0, 0.0)], [C64::new(0.0, 0.0), C64::new(1.0, 0.0)]];
                let mut log_s = 0.0;
                for n in 0..q {
                    m = m2_mul(&cocycle(beta, e, theta + n as f64 * alpha), &m);
                    let nm = m2_norm(&m);
                    if nm > 1e100 {
                        for x in m.iter_mut().flatten() {
                            *x /= nm;
                        }
                        log_s += nm.ln();
                    }
                }
                acc += log_spectral_radius(&m, log_s);
            }
            acc / (theta_samples * q) as f64
        }
        Rotation::Irrational(alpha) => {
            if n_steps == 0 {
                return Err(Error::InvalidArgument("n_steps must be positive".into()));
            }
            let mut acc = 0.0;
            for i in 0..theta_samples {
                let theta = i as f64 / theta_samples as f64;
                let mut v = [C64::new(1.0, 0.0), C64::new(0.5, 0.0)];
                let mut log_growth = 0.0;
                for n in 0..n_steps {
                    let t = cocycle(beta, e, theta + n as f64 * alpha);
                    v = [t[0][0] * v[0] + t[0][1] * v[1], t[1][0] * v[0] + t[1][1] * v[1]];
                    let nv = v[0].norm().hypot(v[1].norm());
                    v = [v[0] / nv, v[1] / nv];
                    log_growth += nv.ln();
                }
                acc += log_growth / n_steps as f64;
            }
            acc / theta_samples as f64
        }
    };
    if !value.is_finite() {
        return Err(Error::NonFinite("lyapunov_transfer"));
    }
    Ok(LyapunovValue { beta, z: e, value, method: Method::Transfer })
}

/// Nodes per band for the piecewise-linear IDS in the Thouless integral.
pub const THOULESS_NODES: usize = 65;

// Re[(x − z) log(x − z) − (x − z)], a primitive of log|x − z| in x.
fn log_primitive(x: f64, z: C64) -> f64 {
    let w = C64::new(x, 0.0) - z;
    if w.norm() == 0.0 {
        return 0.0;
    }
    (w * w.ln() - w).re
}

/// Thouless formula `L(z) = ∫ log|z − x| dN(x)` with `N` linear between
/// edge-clustered nodes and each piece integrated in closed form.
pub fn lyapunov_thouless(bands: &BandSet, z: C64) -> LyapunovValue {
    let q = bands.len() as f64;
    let mut total = 0.0;
    for (k, b) in bands.bands.iter().enumerate() {
        if b.width() <= 0.0 {
            total += (C64::new(b.lo, 0.0) - z).norm().ln() / q;
            continue;
        }
        let mid = 0.5 * (b.lo + b.hi);
        let half = 0.5 * b.width();
        let mut prev_x = b.lo;
        let mut prev_n = 0.0;
        let mut prev_f = log_primitive(prev_x, z);
        for i in 1..THOULESS_NODES {
            let x = if i == THOULESS_NODES - 1 {
                b.hi
            } else {
                mid - half * (PI * i as f64 / (THOULESS_NODES - 1) as f64).cos()
            };
            let n = bands.band_fraction(k, x);
            let f = log_primitive(x, z);
            if x > prev_x {
                total += (n - prev_n) / (x - prev_x) * (f - prev_f) / q;
            }
            prev_x = x;
            prev_n = n;
            prev_f = f;
        }
    }
    LyapunovValue { beta: bands.beta(), z, value: total, method: Method::Thouless }
}

/// Eigen-decomposition of `h(β)` at every point of a reduced phase grid, with
/// `v` expressed in each eigenbasis. Every trace quantity below is an
/// average of `(1/q)·Σ` over this cache.
#[derive(Debug, Clone)]
pub struct PhaseSpectra {
    pub freq: RationalFrequency,
    pub beta: f64,
    pub grid: PhaseGrid,
    evals: Vec<f64>,
    vmat: Vec<C64>,
}

/// Phase-grid resolution per axis used when none is requested.
pub const DEFAULT_TRACE_GRID: usize = 64;

impl PhaseSpectra {
    pub fn new(freq: RationalFrequency, beta: f64, n: usize) -> Result<Self> {
        check_positive(beta)?;
        let grid = PhaseGrid::reduced(freq, n)?;
        let q = freq.qsize();
        let mut evals = Vec::with_capacity(grid.len() * q);
        let mut vmat = Vec::with_capacity(grid.len() * q * q);
        for (t1, t2) in grid.points() {
            let eig = hamiltonian_matrix(freq, t1, t2, beta).symmetric_eigen();
            let rep = build_rep(freq, t1, t2)?;
            let vt = eig.eigenvectors.adjoint() * &rep.v * &eig.eigenvectors;
            evals.extend(eig.eigenvalues.iter().copied());
            for j in 0..q {
                for k in 0..q {
                    vmat.push(vt[(j, k)]);
                }
            }
        }
        if evals.iter().any(|e| !e.is_finite()) {
            return Err(Error::NonFinite("phase spectra"));
        }
        Ok(Self { freq, beta, grid, evals, vmat })
    }

    fn q(&self) -> usize {
        self.freq.qsize()
    }

    fn norm(&self) -> f64 {
        1.0 / (self.grid.len() * self.q()) as f64
    }

    /// `τ(log|h − z|)`
    pub fn lyapunov(&self, z: C64) -> f64 {
        self.evals.iter().map(|&e| (C64::new(e, 0.0) - z).norm().ln()).sum::<f64>() * self.norm()
    }

    /// `g0 = τ((z − h)⁻¹) = ∂L/∂z`
    pub fn g0(&self, z: C64) -> C64 {
        self.evals.iter().map(|&e| (z - e).inv()).sum::<C64>() * self.norm()
    }

    /// `g1 = τ((h − z)⁻¹ v)`, so that `∂L/∂β = 2 Re g1`.
    pub fn g1(&self, z: C64) -> C64 {
        let q = self.q();
        let mut acc = C64::new(0.0, 0.0);
        for (i, &e) in self.evals.iter().enumerate() {
            let (phase, j) = (i / q, i % q);
            acc += self.vmat[phase * q * q + j * q + j] / (e - z);
        }
        acc * self.norm()
    }

    /// Second partials `(∂²L/∂z², ∂²L/∂z∂β, ∂²L/∂β²)` at real `z`:
    /// `−τ(R²)`, `τ(R²W)`, `−τ((RW)²)` with `R = (z − h)⁻¹`, `W = v + v*`.
    pub fn hessian_terms(&self, z: f64) -> (f64, f64, f64) {
        let q = self.q();
        let (mut d2z, mut dzb, mut d2b) = (0.0, 0.0, 0.0);
        for phase in 0..self.grid.len() {
            let ev = &self.evals[phase * q..(phase + 1) * q];
            let vm = &self.vmat[phase * q * q..(phase + 1) * q * q];
            for j in 0..q {
                let rj = 1.0 / (z - ev[j]);
                let wjj = 2.0 * vm[j * q + j].re;
                d2z -= rj * rj;
                dzb += rj * rj * wjj;
                for k in 0..q {
                    let wjk = vm[j * q + k] + vm[k * q + j].conj();
                    d2b -= wjk.norm_sqr() * rj / (z - ev[k]);
                }
            }
        }
        let s = self.norm();
        (d2z * s, dzb * s, d2b * s)
    }
}

fn ensure_off_spectrum(bands: &BandSet, z: C64, min_dist: f64) -> Result<()> {
    let dist = bands.distance(z);
    if dist < min_dist {
        return Err(Error::NearSpectrum { z: z.re, dist });
    }
    Ok(())
}

/// Trace route: `τ(log|h − z|)` from the phase-grid eigenvalues.
pub fn lyapunov_trace(cache: &PhaseSpectra, bands: &BandSet, z: C64) -> Result<LyapunovValue> {
    ensure_off_spectrum(bands, z, 1e-8)?;
    let value = cache.lyapunov(z);
    if !value.is_finite() {
        return Err(Error::NonFinite("lyapunov_trace"));
    }
    Ok(LyapunovValue { beta: cache.beta, z, value, method: Method::Trace })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientRecord {
    pub beta: f64,
    pub z: f64,
    /// `τ((z − h)⁻¹)`
    pub g0: f64,
    /// `τ((h − z)⁻¹ v)`
    pub g1: f64,
    /// Largest imaginary part discarded from `g0`, `g1`.
    pub imag_residue: f64,
}

fn ensure_in_gap(bands: &BandSet, z: f64) -> Result<()> {
    match bands.locate(z) {
        Location::Gap(_) | Location::Below | Location::Above => {
            ensure_off_spectrum(bands, C64::new(z, 0.0), EDGE_DISTANCE)
        }
        Location::Band(_) => Err(Error::NotInGap { z }),
    }
}

/// Minimum distance to the spectrum accepted by gradient and Hessian evaluation.
pub const EDGE_DISTANCE: f64 = 1e-6;

pub fn gradient(cache: &PhaseSpectra, bands: &BandSet, z: f64) -> Result<GradientRecord> {
    ensure_in_gap(bands, z)?;
    let zc = C64::new(z, 0.0);
    let g0 = cache.g0(zc);
    let g1 = cache.g1(zc);
    Ok(GradientRecord { beta: cache.beta, z, g0: g0.re, g1: g1.re, imag_residue: g0.im.abs().max(g1.im.abs()) })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HessianRecord {
    pub beta: f64,
    pub z: f64,
    pub d2z: f64,
    pub dzb: f64,
    pub d2b: f64,
}

impl HessianRecord {
    pub fn det(&self) -> f64 {
        self.d2z * self.d2b - self.dzb * self.dzb
    }

    pub fn diagonal_negative(&self) -> bool {
        self.d2z < 0.0 && self.d2b < 0.0
    }

    /// Negative definite: the sign pattern of a strict local maximum.
    pub fn negative_definite(&self) -> bool {
        self.diagonal_negative() && self.det() > 0.0
    }
}

pub fn hessian(cache: &PhaseSpectra, bands: &BandSet, z: f64) -> Result<HessianRecord> {
    ensure_in_gap(bands, z)?;
    let (d2z, dzb, d2b) = cache.hessian_terms(z);
    Ok(HessianRecord { beta: cache.beta, z, d2z, dzb, d2b })
}

/// `L` and its first and second partials in `(z, β)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceJet {
    pub l: f64,
    pub dz: f64,
    pub db: f64,
    pub dzz: f64,
    pub dzb: f64,
    pub dbb: f64,
}

impl SurfaceJet {
    pub fn g0(&self) -> f64 {
        self.dz
    }

    pub fn g1(&self) -> f64 {
        0.5 * self.db
    }

    pub fn hessian(&self, beta: f64, z: f64) -> HessianRecord {
        HessianRecord { beta, z, d2z: self.dzz, dzb: self.dzb, d2b: self.dbb }
    }
}

/// Chambers route for real `z` off the spectrum.
///
/// With `D = P(z) + a cos φ₁ + b cos φ₂`, `a = |c₁|`, `b = 2β^q`, the average
/// over `φ₁` is done in closed form (`E log|A + a cos φ| = log((|A| + r)/2)`,
/// `E 1/(A + a cos φ) = sgn A / r`, `E 1/(A + a cos φ)² = |A| / r³`,
/// `r = √(A² − a²)`), and the `φ₂` average by adaptive quadrature.
pub fn chambers_surface(freq: RationalFrequency, beta: f64, z: f64) -> Result<SurfaceJet> {
    if !(beta >= 0.0 && beta.is_finite() && z.is_finite()) {
        return Err(Error::InvalidArgument("chambers_surface needs finite beta >= 0 and z".into()));
    }
    let q = freq.qsize();
    let qf = q as f64;
    let a = 0.5 * (transfer_trace(freq, beta, 0.0, 0.0) - transfer_trace(freq, beta, PI / qf, 0.0));
    let a = a.abs();
    let p = chambers_jet(freq, beta, z);
    let b = 2.0 * beta.powi(q as i32);
    let b1 = 2.0 * qf * beta.powi(q as i32 - 1);
    let b2 = if q >= 2 { 2.0 * qf * (qf - 1.0) * beta.powi(q as i32 - 2) } else { 0.0 };
    if !(p.v.abs() > a + b) {
        return Err(Error::NearSpectrum { z, dist: 0.0 });
    }
    let integrand = |phi: f64| {
        let c = phi.cos();
        let big_a = p.v + b * c;
        let abs_a = big_a.abs();
        let r = ((abs_a - a) * (abs_a + a)).sqrt();
        let i1 = big_a.signum() / r;
        let i2 = abs_a / (r * r * r);
        let d_b = p.db + b1 * c;
        let d_bb = p.dbb + b2 * c;
        [
            (0.5 * (abs_a + r)).ln(),
            p.dz * i1,
            d_b * i1,
            p.dzz * i1 - p.dz * p.dz * i2,
            p.dzb * i1 - p.dz * d_b * i2,
            d_bb * i1 - d_b * d_b * i2,
        ]
    };
    let v = integrate(integrand, 0.0, PI, 1e-15, 1e-13);
    let s = 1.0 / (PI * qf);
    let jet = SurfaceJet { l: v[0] * s, dz: v[1] * s, db: v[2] * s, dzz: v[3] * s, dzb: v[4] * s, dbb: v[5] * s };
    if ![jet.l, jet.dz, jet.db, jet.dzz, jet.dzb, jet.dbb].iter().all(|x| x.is_finite()) {
        return Err(Error::NonFinite("chambers_surface"));
    }
    Ok(jet)
}

/// `L(β, z)` by the Chambers route.
pub fn lyapunov_chambers(freq: RationalFrequency, beta: f64, z: f64) -> Result<LyapunovValue> {
    let jet = chambers_surface(freq, beta, z)?;
    Ok(LyapunovValue { beta, z: C64::new(z, 0.0), value: jet.l, method: Method::Chambers })
}

/// Central differences of the Chambers-route `L`: `(∂L/∂z, ½∂L/∂β)`.
pub fn fd_gradient(freq: RationalFrequency, beta: f64, z: f64, h: f64) -> Result<(f64, f64)> {
    let l = |b: f64, x: f64| chambers_surface(freq, b, x).map(|j| j.l);
    let dz = (l(beta, z + h)? - l(beta, z - h)?) / (2.0 * h);
    let db = (l(beta + h, z)? - l(beta - h, z)?) / (2.0 * h);
    Ok((dz, 0.5 * db))
}

/// Central-difference Hessian of the Chambers-route `L`.
pub fn fd_hessian(freq: RationalFrequency, beta: f64, z: f64, h: f64) -> Result<HessianRecord> {
    // fourth-order central stencils; the second-order ones leave ~1e-4
    // relative truncation at h = 1e-3 near band edges
    const D2: [(i32, f64); 5] = [(-2, -1.0), (-1, 16.0), (0, -30.0), (1, 16.0), (2, -1.0)];
    const D1: [(i32, f64); 4] = [(-2, 1.0), (-1, -8.0), (1, 8.0), (2, -1.0)];
    let l = |b: f64, x: f64| chambers_surface(freq, b, x).map(|j| j.l);
    let (mut d2z, mut d2b, mut dzb) = (0.0, 0.0, 0.0);
    for (k, w) in D2 {
        d2z += w * l(beta, z + k as f64 * h)?;
        d2b += w * l(beta + k as f64 * h, z)?;
    }
    for (i, wi) in D1 {
        for (k, wk) in D1 {
            dzb += wi * wk * l(beta + i as f64 * h, z + k as f64 * h)?;
        }
    }
    let h2 = h * h;
    Ok(HessianRecord { beta, z, d2z: d2z / (12.0 * h2), dzb: dzb / (144.0 * h2), d2b: d2b / (12.0 * h2) })
}

/// Result of locating the zero of `g0` inside one gap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalPoint {
    pub gap: GapRecord,
    pub s_star: f64,
    /// `g1(s*)`, corrected to first order for the residual `g0(s_star)`;
    /// its absolute value is the margin.
    pub g1: f64,
    /// `g0` sampled across the gap decreased strictly.
    pub monotone: bool,
    pub hessian: HessianRecord,
}

impl CriticalPoint {
    pub fn margin(&self) -> f64 {
        self.g1.abs()
    }
}

/// Newton on `g0` using `∂g0/∂z` from the surface jet, falling back to
/// bisection whenever a step leaves the bracket or stalls.
fn newton_in_bracket(freq: RationalFrequency, beta: f64, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64> {
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let jet = chambers_surface(freq, beta, x)?;
        if jet.dz == 0.0 {
            return Ok(x);
        }
        if jet.dz > 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - jet.dz / jet.dzz;
        let next = if newton > lo && newton < hi && jet.dzz < 0.0 { newton } else { 0.5 * (lo + hi) };
        if (next - x).abs() < tol || hi - lo < tol {
            return Ok(next);
        }
        x = next;
    }
    Err(Error::RootFinding { lo, hi, reason: "no convergence" })
}

/// Finds the unique root `s*` of `g0 = ∂L/∂z` in an open gap by safeguarded Newton and
/// evaluates `g1 = ½∂L/∂β` there (Chambers route throughout).
pub fn critical_scan(gap: &GapRecord) -> Result<CriticalPoint> {
    if !gap.open {
        return Err(Error::NotInGap { z: gap.midpoint() });
    }
    let (freq, beta) = (gap.freq, gap.beta);
    let g0 = |z: f64| chambers_surface(freq, beta, z).map(|j| j.dz).unwrap_or(f64::NAN);
    let width = gap.hi - gap.lo;
    let mut off = (1e-6f64).min(width / 8.0);
    let mut bracket = None;
    for _ in 0..8 {
        let (lo, hi) = (gap.lo + off, gap.hi - off);
        let (glo, ghi) = (g0(lo), g0(hi));
        if glo > 0.0 && ghi < 0.0 {
            bracket = Some((lo, hi));
            break;
        }
        off /= 10.0;
    }
    let (lo, hi) = bracket.ok_or(Error::RootFinding { lo: gap.lo, hi: gap.hi, reason: "no sign change of g0" })?;
    let s_star = newton_in_bracket(freq, beta, lo, hi, (1e-12f64).min(width * 1e-6))?;
    let mut prev = f64::INFINITY;
    let mut monotone = true;
    for i in 0..=10 {
        let t = i as f64 / 10.0;
        let x = lo + (hi - lo) * (0.5 - 0.5 * (PI * t).cos());
        let g = g0(x);
        if !(g < prev) {
            monotone = false;
        }
        prev = g;
    }
    let jet = chambers_surface(freq, beta, s_star)?;
    // g1 at the exact root: in narrow gaps g1 is nearly proportional to g0
    // with a steep slope, so g1(s_star) alone would carry the root error.
    let g1 = jet.g1() - 0.5 * jet.dzb * jet.dz / jet.dzz;
    Ok(CriticalPoint { gap: *gap, s_star, g1, monotone, hessian: jet.hessian(beta, s_star) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::{bands, gaps, DEFAULT_MIN_WIDTH};

    fn f(p: u64, q: u64) -> RationalFrequency {
        RationalFrequency::new(p, q).unwrap()
    }

    #[test]
    fn free_transfer() {
        let v = lyapunov_transfer(Rotation::Rational(f(0, 1)), 0.0, C64::new(3.0, 0.0), 16, 1).unwrap();
        assert!((v.value - ((3.0 + 5f64.sqrt()) / 2.0).ln()).abs() < 1e-12);
        let v = lyapunov_transfer(Rotation::Rational(f(2, 5)), 0.0, C64::new(1.0, 0.0), 16, 5).unwrap();
        assert!(v.value.abs() < 1e-10);
    }

    #[test]
    fn routes_agree_in_gap() {
        let fr = f(1, 3);
        let beta = 0.5;
        let bs = bands(fr, beta).unwrap();
        let gap = gaps(fr, beta, DEFAULT_MIN_WIDTH).unwrap()[0];
        let z = gap.midpoint();
        let cache = PhaseSpectra::new(fr, beta, 48).unwrap();
        let tr = lyapunov_trace(&cache, &bs, C64::new(z, 0.0)).unwrap().value;
        let ch = lyapunov_chambers(fr, beta, z).unwrap().value;
        let tf = lyapunov_transfer(Rotation::Rational(fr), beta, C64::new(z, 0.0), 256, 3).unwrap().value;
        let th = lyapunov_thouless(&bs, C64::new(z, 0.0)).value;
        assert!((tr - ch).abs() < 1e-10, "{tr} {ch}");
        assert!((tf - ch).abs() < 1e-10, "{tf} {ch}");
        assert!((th - ch).abs() < 2e-3, "{th} {ch}");
        let jet = chambers_surface(fr, beta, z).unwrap();
        assert!((cache.g0(C64::new(z, 0.0)).re - jet.g0()).abs() < 1e-9);
        assert!((cache.g1(C64::new(z, 0.0)).re - jet.g1()).abs() < 1e-9);
        let (a, b, c) = cache.hessian_terms(z);
        assert!((a - jet.dzz).abs() < 1e-8 && (b - jet.dzb).abs() < 1e-8 && (c - jet.dbb).abs() < 1e-8);
    }

    #[test]
    fn critical_point_in_first_gap() {
        let g = gaps(f(1, 3), 0.5, DEFAULT_MIN_WIDTH).unwrap()[0];
        let cp = critical_scan(&g).unwrap();
        assert!(cp.s_star > g.lo && cp.s_star < g.hi && cp.monotone);
        assert!(cp.margin() > 1e-8);
    }
}
