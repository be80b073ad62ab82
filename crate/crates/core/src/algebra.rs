//! Finite-dimensional representations of the rotation algebra at `α = p/q`.
//!
//! Convention: `u = diag(e^{i(θ₁ + 2πjα)})` and `v = e^{iθ₂} S` with
//! `S e_j = e_{j+1 mod q}`, so that `u v = e^{2πiα} v u`. The tracial state is
//! the normalized matrix trace averaged over `(θ₁, θ₂)`.
//!
//! With this commutation sign and the standardized monomials
//! `w_{pq} = λ^{-pq} u^p v^q`, `λ = e^{iπα}`, the distinguished elements
//! `𝕌 = β^{-1/2}u + β^{1/2}v`, `𝕍 = w_{-1,1}` satisfy
//! `𝕌𝕍 = λ²𝕍𝕌`, `𝕌*𝕍 = λ⁻²𝕍𝕌*` and `𝕌*𝕌 = λ̄𝕍 + λ𝕍* + γ` with
//! `γ = β + 1/β`, and `h(β) = β^{1/2}(𝕌 + 𝕌*)`. The same relations are often written with `λ` and `λ̄`
//! exchanged, which corresponds to the opposite commutation sign.

use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::DMatrix;
#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{check_positive, check_subcritical, Error, Result};
use crate::rational::RationalFrequency;
use crate::{CMat, C64};

pub(crate) fn expi(x: f64) -> C64 {
    C64::new(x.cos(), x.sin())
}

/// `e^{iπα}`
pub fn lambda(freq: RationalFrequency) -> C64 {
    expi(PI * freq.alpha())
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

fn one_norm(m: &CMat) -> f64 {
    (0..m.ncols()).map(|j| m.column(j).iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

fn identity(q: usize) -> CMat {
    DMatrix::identity(q, q)
}

/// A `q × q` unitary pair `(u, v)` at phases `(θ₁, θ₂)`.
#[derive(Debug, Clone)]
pub struct RotationRep {
    pub freq: RationalFrequency,
    pub theta1: f64,
    pub theta2: f64,
    pub u: CMat,
    pub v: CMat,
}

pub fn build_rep(freq: RationalFrequency, theta1: f64, theta2: f64) -> Result<RotationRep> {
    let q = freq.qsize();
    if q == 0 {
        return Err(Error::InvalidFrequency("zero denominator".into()));
    }
    let alpha = freq.alpha();
    let mut u = CMat::zeros(q, q);
    let mut v = CMat::zeros(q, q);
    let shift = expi(theta2);
    for j in 0..q {
        u[(j, j)] = expi(theta1 + 2.0 * PI * j as f64 * alpha);
        v[((j + 1) % q, j)] = shift;
    }
    Ok(RotationRep { freq, theta1, theta2, u, v })
}

impl RotationRep {
    pub fn q(&self) -> usize {
        self.freq.qsize()
    }

    /// `w_{p,qe} = λ^{-p·qe} u^p v^qe`, built entrywise.
    pub fn monomial(&self, p: i64, qe: i64) -> CMat {
        monomial(self, p, qe)
    }
}

/// Standardized monomial `w_{p,qe} = e^{-i π α p qe} u^p v^qe`.
pub fn monomial(rep: &RotationRep, p: i64, qe: i64) -> CMat {
    let q = rep.q();
    let alpha = rep.freq.alpha();
    let pref = expi(-PI * alpha * (p as f64) * (qe as f64) + qe as f64 * rep.theta2);
    let mut w = CMat::zeros(q, q);
    let step = qe.rem_euclid(q as i64) as usize;
    for a in 0..q {
        let b = (a + step) % q;
        w[(b, a)] = pref * expi(p as f64 * (rep.theta1 + 2.0 * PI * b as f64 * alpha));
    }
    w
}

/// Uniform phase grid. `cell` divides the torus side: `θ = 2πj/(cell·n)`.
///
/// Traces of algebra elements depend on the phases only through `(qθ₁, qθ₂)`,
/// so the reduced grid with `cell = q` reproduces the full-torus trapezoid
/// rule with `q·n` points per axis at `1/q²` of the cost.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PhaseGrid {
    pub n1: usize,
    pub n2: usize,
    pub cell: u64,
}

impl PhaseGrid {
    pub fn torus(n1: usize, n2: usize) -> Result<Self> {
        if n1 == 0 || n2 == 0 {
            return Err(Error::InvalidArgument("phase grid sizes must be positive".into()));
        }
        Ok(Self { n1, n2, cell: 1 })
    }

    pub fn reduced(freq: RationalFrequency, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("phase grid size must be positive".into()));
        }
        Ok(Self { n1: n, n2: n, cell: freq.q() })
    }

    /// Reduced grid resolving monomials up to `window` in each index.
    pub fn for_window(freq: RationalFrequency, window: usize) -> Self {
        let q = freq.qsize();
        let n = (4 * (window + q)).div_ceil(q).max(16);
        Self { n1: n, n2: n, cell: freq.q() }
    }

    pub fn len(&self) -> usize {
        self.n1 * self.n2
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn points(&self) -> Vec<(f64, f64)> {
        let s1 = 2.0 * PI / (self.cell as f64 * self.n1 as f64);
        let s2 = 2.0 * PI / (self.cell as f64 * self.n2 as f64);
        let mut out = Vec::with_capacity(self.len());
        for j in 0..self.n1 {
            for k in 0..self.n2 {
                out.push((j as f64 * s1, k as f64 * s2));
            }
        }
        out
    }
}

/// `τ(a) = average over the grid of (1/q)·tr a(θ)`.
pub fn trace_tau<F>(freq: RationalFrequency, grid: &PhaseGrid, mut family: F) -> Result<C64>
where
    F: FnMut(&RotationRep) -> Result<CMat>,
{
    let q = freq.qsize() as f64;
    let mut acc = C64::new(0.0, 0.0);
    for (t1, t2) in grid.points() {
        let rep = build_rep(freq, t1, t2)?;
        let m = family(&rep)?;
        let tr = m.trace();
        if !(tr.re.is_finite() && tr.im.is_finite()) {
            return Err(Error::NonFinite("trace_tau"));
        }
        acc += tr / q;
    }
    Ok(acc / grid.len() as f64)
}

/// `h(β) = u + u* + β(v + v*)`
pub fn hamiltonian(rep: &RotationRep, beta: f64) -> Result<CMat> {
    check_positive(beta)?;
    Ok(hamiltonian_matrix(rep.freq, rep.theta1, rep.theta2, beta))
}

/// `h(β)` at the given phases without the `β > 0` check (`β = 0` allowed).
pub fn hamiltonian_matrix(freq: RationalFrequency, theta1: f64, theta2: f64, beta: f64) -> CMat {
    let q = freq.qsize();
    let alpha = freq.alpha();
    let mut h = CMat::zeros(q, q);
    let hop = expi(theta2) * beta;
    for j in 0..q {
        h[(j, j)] += C64::new(2.0 * (theta1 + 2.0 * PI * j as f64 * alpha).cos(), 0.0);
        let k = (j + 1) % q;
        h[(k, j)] += hop;
        h[(j, k)] += hop.conj();
    }
    h
}

/// `(𝕌, 𝕍) = (β^{-1/2}u + β^{1/2}v, w_{-1,1})`
pub fn build_uv(rep: &RotationRep, beta: f64) -> Result<(CMat, CMat)> {
    check_positive(beta)?;
    let s = beta.sqrt();
    let big_u = &rep.u / C64::from(s) + &rep.v * C64::from(s);
    Ok((big_u, monomial(rep, -1, 1)))
}

fn checked_inverse(m: CMat) -> Result<(CMat, f64)> {
    let n1 = one_norm(&m);
    let inv = m.try_inverse().ok_or(Error::NearSingular(f64::INFINITY))?;
    let cond = n1 * one_norm(&inv);
    if !cond.is_finite() || cond > 1e12 {
        return Err(Error::NearSingular(cond));
    }
    Ok((inv, cond))
}

/// Images of the generators under the automorphism
/// `ρ_β(u) = v u v (uv + β)⁻¹(v*u* + β)`, `ρ_β(v) = v (uv + β)⁻¹(v*u* + β)`.
pub fn rho_beta_images(rep: &RotationRep, beta: f64) -> Result<(CMat, CMat)> {
    check_subcritical(beta)?;
    let q = rep.q();
    let b = identity(q) * C64::from(beta);
    let (u, v) = (&rep.u, &rep.v);
    let (inv, _) = checked_inverse(u * v + &b)?;
    let tail = inv * (v.adjoint() * u.adjoint() + &b);
    let rv = v * &tail;
    let ru = v * u * &rv;
    Ok((ru, rv))
}

/// Images of the generators under the conjugate-linear automorphism
/// `σ_β = σ ∘ ρ_β` with `σ(u) = u*`, `σ(v) = v`:
/// `σ_β(u) = v u* v (u*v + β)⁻¹(v*u + β)`, `σ_β(v) = v (u*v + β)⁻¹(v*u + β)`.
///
/// Values on other elements follow from the extension rule
/// `σ_β(c·a·b) = c̄·σ_β(a)·σ_β(b)`.
pub fn sigma_beta_images(rep: &RotationRep, beta: f64) -> Result<(CMat, CMat)> {
    check_subcritical(beta)?;
    let q = rep.q();
    let b = identity(q) * C64::from(beta);
    let (u, v) = (&rep.u, &rep.v);
    let (inv, _) = checked_inverse(u.adjoint() * v + &b)?;
    let tail = inv * (v.adjoint() * u + &b);
    let sv = v * &tail;
    let su = v * u.adjoint() * &sv;
    Ok((su, sv))
}

/// Max-norm residuals of the algebraic identities at one representation.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct IdentityResiduals {
    /// `uv − e^{2πiα}vu`
    pub commutation: f64,
    /// `u*u − 1`, `v*v − 1`
    pub unitarity: f64,
    /// `h(β) − β^{1/2}(𝕌 + 𝕌*)`
    pub hamiltonian_split: f64,
    /// `𝕌𝕍 − λ²𝕍𝕌` and `𝕌*𝕍 − λ⁻²𝕍𝕌*`
    pub uv_relations: f64,
    /// `𝕌*𝕌 − (λ̄𝕍 + λ𝕍* + γ)`
    pub uu_star: f64,
    /// `ρ_β(u) + βρ_β(v) − (u* + βv)`
    pub rho_identity: f64,
    /// `ρ_β` images unitary and satisfying the commutation relation
    pub rho_automorphism: f64,
    /// `σ_β(u) + βσ_β(v) − (u + βv)`
    pub sigma_identity: f64,
    /// `σ_β(𝕌) − 𝕌`
    pub sigma_fixes_u: f64,
    /// `σ_β(𝕍) − 𝕍*`
    pub sigma_adjoints_v: f64,
    /// `σ_β` images unitary and satisfying the conjugated commutation relation
    pub sigma_antiautomorphism: f64,
}

impl IdentityResiduals {
    pub fn max(&self) -> f64 {
        [
            self.commutation,
            self.unitarity,
            self.hamiltonian_split,
            self.uv_relations,
            self.uu_star,
            self.rho_identity,
            self.rho_automorphism,
            self.sigma_identity,
            self.sigma_fixes_u,
            self.sigma_adjoints_v,
            self.sigma_antiautomorphism,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

fn unitarity_residual(m: &CMat) -> f64 {
    max_abs(&(m.adjoint() * m - identity(m.nrows())))
}

/// Evaluates every finite-dimensional identity at `rep` for `β ∈ (0, 1)`.
pub fn identity_residuals(rep: &RotationRep, beta: f64) -> Result<IdentityResiduals> {
    check_subcritical(beta)?;
    let q = rep.q();
    let (u, v) = (&rep.u, &rep.v);
    let lam = lambda(rep.freq);
    let lam2 = lam * lam;
    let ident = identity(q);
    let cb = C64::from(beta);
    let rho_phase = lam2;

    let commutation = max_abs(&(u * v - v * u * rho_phase));
    let unitarity = unitarity_residual(u).max(unitarity_residual(v));

    let h = hamiltonian(rep, beta)?;
    let (bu, bv) = build_uv(rep, beta)?;
    let hamiltonian_split = max_abs(&(&h - (&bu + bu.adjoint()) * C64::from(beta.sqrt())));
    let uv_relations =
        max_abs(&(&bu * &bv - &bv * &bu * lam2)).max(max_abs(&(bu.adjoint() * &bv - &bv * bu.adjoint() / lam2)));
    let gamma = beta + 1.0 / beta;
    let uu_star = max_abs(&(bu.adjoint() * &bu - (&bv * lam.conj() + bv.adjoint() * lam + &ident * C64::from(gamma))));

    let (ru, rv) = rho_beta_images(rep, beta)?;
    let rho_identity = max_abs(&(&ru + &rv * cb - (u.adjoint() + v * cb)));
    let rho_automorphism =
        unitarity_residual(&ru).max(unitarity_residual(&rv)).max(max_abs(&(&ru * &rv - &rv * &ru * rho_phase)));

    let (su, sv) = sigma_beta_images(rep, beta)?;
    let sigma_identity = max_abs(&(&su + &sv * cb - (u + v * cb)));
    let s = beta.sqrt();
    let sigma_u = &su / C64::from(s) + &sv * C64::from(s);
    let sigma_fixes_u = max_abs(&(sigma_u - &bu));
    // 𝕍 = λ u* v, so σ_β(𝕍) = λ̄ σ_β(u)* σ_β(v).
    let sigma_v = su.adjoint() * &sv * lam.conj();
    let sigma_adjoints_v = max_abs(&(sigma_v - bv.adjoint()));
    let sigma_antiautomorphism =
        unitarity_residual(&su).max(unitarity_residual(&sv)).max(max_abs(&(&su * &sv - &sv * &su * rho_phase.conj())));

    Ok(IdentityResiduals {
        commutation,
        unitarity,
        hamiltonian_split,
        uv_relations,
        uu_star,
        rho_identity,
        rho_automorphism,
        sigma_identity,
        sigma_fixes_u,
        sigma_adjoints_v,
        sigma_antiautomorphism,
    })
}

/// Partial sums of `(u*v + β)⁻¹ = Σ_{n≥0} (−β)ⁿ (v*u)^{n+1}`.
#[derive(Debug, Clone)]
pub struct NeumannReport {
    /// Sum of the terms `n = 0..=n_terms`.
    pub partial: CMat,
    /// Max-norm distance of each partial sum to the direct inverse.
    pub errors: Vec<f64>,
    /// Geometric ratio fitted to the errors above the roundoff floor.
    pub observed_ratio: f64,
    /// Smallest `C` with `errors[n] <= C βⁿ` above the roundoff floor.
    pub constant: f64,
}

pub fn neumann_inverse(rep: &RotationRep, beta: f64, n_terms: usize) -> Result<NeumannReport> {
    check_subcritical(beta)?;
    let q = rep.q();
    let (u, v) = (&rep.u, &rep.v);
    let (exact, _) = checked_inverse(u.adjoint() * v + identity(q) * C64::from(beta))?;
    let y = v.adjoint() * u;
    let mut power = y.clone();
    let mut coeff = 1.0;
    let mut partial = CMat::zeros(q, q);
    let mut errors = Vec::with_capacity(n_terms + 1);
    for _ in 0..=n_terms {
        partial += &power * C64::from(coeff);
        errors.push(max_abs(&(&partial - &exact)));
        power = &power * &y;
        coeff *= -beta;
    }
    let floor = 1e-13;
    let pts: Vec<(f64, f64)> =
        errors.iter().enumerate().filter(|(_, &e)| e > floor).map(|(n, &e)| (n as f64, e.ln())).collect();
    let observed_ratio = if pts.len() >= 2 {
        let m = pts.len() as f64;
        let sx: f64 = pts.iter().map(|p| p.0).sum();
        let sy: f64 = pts.iter().map(|p| p.1).sum();
        let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
        ((m * sxy - sx * sy) / (m * sxx - sx * sx)).exp()
    } else {
        0.0
    };
    let constant = errors
        .iter()
        .enumerate()
        .filter(|(_, &e)| e > floor)
        .map(|(n, &e)| e / beta.powi(n as i32))
        .fold(0.0, f64::max);
    Ok(NeumannReport { partial, errors, observed_ratio, constant })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(p: u64, q: u64) -> RationalFrequency {
        RationalFrequency::new(p, q).unwrap()
    }

    #[test]
    fn scalar_case() {
        let r = build_rep(f(0, 1), 0.3, 1.2).unwrap();
        assert!((r.u[(0, 0)] - expi(0.3)).norm() < 1e-15);
        assert!((r.v[(0, 0)] - expi(1.2)).norm() < 1e-15);
        let h = hamiltonian(&r, 0.7).unwrap();
        assert!((h[(0, 0)].re - (2.0 * 0.3f64.cos() + 1.4 * 1.2f64.cos())).abs() < 1e-14);
    }

    #[test]
    fn commutation_one_third() {
        let r = build_rep(f(1, 3), 0.0, 0.0).unwrap();
        let ph = expi(2.0 * PI / 3.0);
        assert!(max_abs(&(&r.u * &r.v - &r.v * &r.u * ph)) <= 1e-12);
        let r = build_rep(f(5, 8), 0.7, 1.1).unwrap();
        assert!(unitarity_residual(&r.u) <= 1e-12 && unitarity_residual(&r.v) <= 1e-12);
    }

    #[test]
    fn monomials_match_products() {
        let r = build_rep(f(2, 5), 0.4, 0.9).unwrap();
        let lam = lambda(r.freq);
        for (p, qe) in [(0i64, 0i64), (1, 1), (2, -3), (-1, 1), (-2, -2), (7, 4)] {
            let up = if p >= 0 { r.u.pow(p as u32) } else { r.u.adjoint().pow((-p) as u32) };
            let vq = if qe >= 0 { r.v.pow(qe as u32) } else { r.v.adjoint().pow((-qe) as u32) };
            let direct = up * vq * lam.powi(-(p * qe) as i32);
            assert!(max_abs(&(direct - monomial(&r, p, qe))) < 1e-12, "{p} {qe}");
            let w = monomial(&r, p, qe);
            assert!(max_abs(&(w.adjoint() - monomial(&r, -p, -qe))) < 1e-12);
        }
        assert!(max_abs(&(monomial(&r, 0, 0) - identity(5))) == 0.0);
    }

    #[test]
    fn monomial_half() {
        let r = build_rep(f(1, 2), 0.2, 0.5).unwrap();
        let want = &r.u * &r.v * expi(-PI / 2.0);
        assert!(max_abs(&(monomial(&r, 1, 1) - want)) < 1e-14);
        let prod = monomial(&r, 1, 1) * monomial(&r, -1, -1);
        assert!(max_abs(&(prod - identity(2))) < 1e-12);
    }

    #[test]
    fn tau_basics() {
        let fr = f(1, 5);
        let g = PhaseGrid::torus(8, 8).unwrap();
        let one = trace_tau(fr, &g, |r| Ok(identity(r.q()))).unwrap();
        assert!((one - C64::from(1.0)).norm() < 1e-15);
        let w = trace_tau(fr, &g, |r| Ok(monomial(r, 2, 3))).unwrap();
        assert!(w.norm() < 1e-12);
        let h2 = trace_tau(f(2, 7), &PhaseGrid::reduced(f(2, 7), 4).unwrap(), |r| {
            let h = hamiltonian(r, 0.5)?;
            Ok(&h * &h)
        })
        .unwrap();
        assert!((h2 - C64::from(2.5)).norm() < 1e-12);
    }

    #[test]
    fn relations_hold() {
        for (fr, beta) in [(f(1, 3), 0.5), (f(2, 5), 0.7), (f(2, 5), 0.3), (f(1, 4), 0.6)] {
            let r = build_rep(fr, 0.37, 1.91).unwrap();
            let res = identity_residuals(&r, beta).unwrap();
            assert!(res.max() <= 1e-10, "{fr} {beta} {res:?}");
        }
    }

    #[test]
    fn printed_lambda_sign_fails() {
        // The relation with λ in place of λ̄ does not hold for uv = e^{2πiα}vu.
        let r = build_rep(f(2, 5), 0.3, 1.1).unwrap();
        let (bu, bv) = build_uv(&r, 0.7).unwrap();
        let lam = lambda(r.freq);
        assert!(max_abs(&(&bu * &bv - &bv * &bu / (lam * lam))) > 0.1);
    }

    #[test]
    fn uu_star_spectrum_at_one() {
        let r = build_rep(f(3, 7), 0.2, 0.9).unwrap();
        let (bu, _) = build_uv(&r, 1.0).unwrap();
        let m = bu.adjoint() * &bu;
        let ev = m.symmetric_eigen().eigenvalues;
        assert!(ev.iter().all(|&e| (-1e-12..=4.0 + 1e-12).contains(&e)));
    }

    #[test]
    fn neumann_rate() {
        let r = build_rep(f(1, 3), 0.4, 0.8).unwrap();
        let rep = neumann_inverse(&r, 0.5, 40).unwrap();
        assert!(*rep.errors.last().unwrap() <= 2.0 * 0.5f64.powi(40));
        assert!((rep.observed_ratio - 0.5).abs() < 0.05);
        let rep = neumann_inverse(&r, 0.1, 10).unwrap();
        assert!(*rep.errors.last().unwrap() <= 1e-9);
        let rep = neumann_inverse(&r, 0.5, 0).unwrap();
        assert!(rep.errors[0] <= 0.5 / 0.5 + 1e-12);
        assert!(neumann_inverse(&r, 1.0, 3).is_err());
    }

    #[test]
    fn hamiltonian_bounds() {
        let fr = f(5, 8);
        for k in 0..100 {
            let t1 = 0.0628 * k as f64;
            let t2 = 1.3 + 0.047 * k as f64;
            let h = hamiltonian_matrix(fr, t1, t2, 1.0);
            assert!(max_abs(&(&h - h.adjoint())) < 1e-15);
            let ev = h.symmetric_eigen().eigenvalues;
            assert!(ev.iter().all(|e| e.abs() <= 4.0 + 1e-12));
        }
        let r = build_rep(fr, 0.0, 0.0).unwrap();
        assert!(hamiltonian(&r, 0.0).is_err());
    }
}
