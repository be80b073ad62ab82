//! Quick invariant suite behind `harper selftest`.

use std::f64::consts::PI;

use harper_core::algebra::{build_rep, hamiltonian_matrix, identity_residuals};
use harper_core::butterfly::{fractions, persistence_sweep};
use harper_core::coefficients::{build_d, coefficient_sheet, recursion_r, residual_21};
use harper_core::lyapunov::{
    chambers_surface, critical_scan, fd_gradient, hessian, lyapunov_thouless, lyapunov_trace, lyapunov_transfer,
    PhaseSpectra, Rotation, DEFAULT_TRACE_GRID,
};
use harper_core::numbertheory::{farey, franel_sum, phi_cumulative};
use harper_core::spectrum::{bands, gaps, hausdorff, ids, Band, DEFAULT_MIN_WIDTH};
use harper_core::{RationalFrequency, C64};

use crate::batch::compute_dataset;
use crate::formats::{dataset_file, default_dataset_config};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

type Outcome = Result<String, String>;
type Entry = (&'static str, fn() -> Outcome);

fn f(p: u64, q: u64) -> RationalFrequency {
    RationalFrequency::new(p, q).expect("reduced literal")
}

fn reduced(q: u64) -> impl Iterator<Item = RationalFrequency> {
    (1..q).filter_map(move |p| RationalFrequency::new(p, q).ok())
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn verdict(worst: f64, tol: f64, what: &str) -> Outcome {
    let line = format!("{what} {worst:.3e} (tolerance {tol:.0e})");
    if worst <= tol {
        Ok(line)
    } else {
        Err(line)
    }
}

fn algebra() -> Outcome {
    let mut worst = 0.0f64;
    for q in 2..=8 {
        for fr in reduced(q) {
            for (t1, t2) in [(0.3, 1.1), (2.0, 5.5)] {
                let rep = build_rep(fr, t1, t2).map_err(err)?;
                worst = worst.max(identity_residuals(&rep, 0.5).map_err(err)?.max());
            }
        }
    }
    verdict(worst, 1e-10, "max identity residual")
}

fn spectrum_oracle() -> Outcome {
    let mut worst = 0.0f64;
    for q in 2..=8 {
        for fr in reduced(q) {
            let bs = bands(fr, 0.5).map_err(err)?;
            let n = 16;
            let mut edges = vec![Band { lo: f64::INFINITY, hi: f64::NEG_INFINITY }; q as usize];
            for a in 0..n {
                for b in 0..n {
                    let t = |k: usize| 2.0 * PI * k as f64 / (n * q as usize) as f64;
                    let h = hamiltonian_matrix(fr, t(a), t(b), 0.5);
                    let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
                    ev.sort_by(f64::total_cmp);
                    for (k, e) in ev.into_iter().enumerate() {
                        edges[k].lo = edges[k].lo.min(e);
                        edges[k].hi = edges[k].hi.max(e);
                    }
                }
            }
            worst = worst.max(hausdorff(&bs.bands, &edges));
        }
    }
    verdict(worst, 1e-6, "Hausdorff distance to dense eigensolve")
}

fn labels() -> Outcome {
    let mut worst = 0.0f64;
    for q in 2..=13 {
        for fr in reduced(q) {
            let bs = bands(fr, 0.5).map_err(err)?;
            for g in gaps(fr, 0.5, DEFAULT_MIN_WIDTH).map_err(err)?.iter().filter(|g| g.open) {
                if (g.j - g.n * fr.p() as i64).rem_euclid(q as i64) != 0 {
                    return Err(format!("label of gap {} at {fr} breaks the congruence", g.j));
                }
                worst = worst.max((ids(&bs, g.midpoint()) - g.ids_value()).abs());
            }
        }
    }
    let hall: Vec<i64> = gaps(f(2, 5), 0.5, DEFAULT_MIN_WIDTH).map_err(err)?.iter().map(|g| g.n).collect();
    if hall != [-2, 1, -1, 2] {
        return Err(format!("Hall sequence at 2/5 is {hall:?}"));
    }
    verdict(worst, 1e-10, "max |IDS - j/q| in gaps")
}

fn lyapunov_routes() -> Outcome {
    let mut flat = 0.0f64;
    let mut spread = 0.0f64;
    for fr in [f(2, 5), f(5, 8)] {
        for beta in [0.5, 1.0] {
            let bs = bands(fr, beta).map_err(err)?;
            for k in 0..bs.len() {
                let e = C64::new(bs.ids_midpoint(k), 0.0);
                flat = flat
                    .max(lyapunov_transfer(Rotation::Rational(fr), beta, e, 256, fr.qsize()).map_err(err)?.value.abs());
            }
            let cache = PhaseSpectra::new(fr, beta, DEFAULT_TRACE_GRID).map_err(err)?;
            let top = bs.bands.last().map(|b| b.hi).unwrap_or(0.0);
            for z in [C64::new(top + 0.5, 0.0), C64::new(0.2, 0.3)] {
                let a = lyapunov_transfer(Rotation::Rational(fr), beta, z, 256, fr.qsize()).map_err(err)?.value;
                let b = lyapunov_thouless(&bs, z).value;
                let c = lyapunov_trace(&cache, &bs, z).map_err(err)?.value;
                spread = spread.max((a - b).abs()).max((a - c).abs()).max((b - c).abs());
            }
        }
    }
    if flat > 5e-3 {
        return Err(format!("|L| = {flat:.3e} on the spectrum"));
    }
    verdict(spread, 2e-3, &format!("flatness {flat:.3e}; three-route spread"))
}

fn gap_midpoints(freqs: &[RationalFrequency], betas: &[f64]) -> Result<Vec<(RationalFrequency, f64, f64)>, String> {
    let mut pts = Vec::new();
    for &fr in freqs {
        for &beta in betas {
            for g in gaps(fr, beta, DEFAULT_MIN_WIDTH).map_err(err)?.iter().filter(|g| g.width() > 0.05) {
                pts.push((fr, beta, g.midpoint()));
            }
        }
    }
    Ok(pts)
}

fn gradient_fd() -> Outcome {
    let mut worst = 0.0f64;
    for (fr, beta, z) in gap_midpoints(&[f(1, 3), f(2, 5), f(5, 8)], &[0.5, 0.7])? {
        let jet = chambers_surface(fr, beta, z).map_err(err)?;
        let (dz, half_db) = fd_gradient(fr, beta, z, 1e-4).map_err(err)?;
        worst = worst.max((jet.g0() - dz).abs()).max((jet.g1() - half_db).abs());
    }
    verdict(worst, 1e-6, "max |analytic - finite difference|")
}

fn hessian_signs() -> Outcome {
    let mut bad = Vec::new();
    let pts = gap_midpoints(&[f(1, 3), f(2, 5), f(3, 5)], &[0.3, 0.5, 0.7])?;
    for &(fr, beta, z) in &pts {
        let bs = bands(fr, beta).map_err(err)?;
        let cache = PhaseSpectra::new(fr, beta, DEFAULT_TRACE_GRID).map_err(err)?;
        let h = hessian(&cache, &bs, z).map_err(err)?;
        if !h.negative_definite() {
            bad.push(format!("{fr} beta={beta} z={z:.4} d2z={:.3e} d2b={:.3e} det={:.3e}", h.d2z, h.d2b, h.det()));
        }
    }
    if bad.is_empty() {
        Ok(format!("negative definite at all {} gap midpoints", pts.len()))
    } else {
        Err(format!("{} of {} points not negative definite, first: {}", bad.len(), pts.len(), bad[0]))
    }
}

fn margins() -> Outcome {
    let mut worst = f64::INFINITY;
    let mut count = 0;
    for q in [3, 5, 8] {
        for fr in reduced(q) {
            for beta in [0.3, 0.7, 1.0] {
                for g in gaps(fr, beta, DEFAULT_MIN_WIDTH).map_err(err)?.iter().filter(|g| g.open) {
                    let cp = critical_scan(g).map_err(err)?;
                    if !cp.monotone {
                        return Err(format!("g0 not monotone in gap {} at {fr}, beta={beta}", g.j));
                    }
                    worst = worst.min(cp.margin());
                    count += 1;
                }
            }
        }
    }
    if worst > 1e-8 {
        Ok(format!("min |g1(s*)| {worst:.3e} over {count} gaps"))
    } else {
        Err(format!("min |g1(s*)| {worst:.3e} over {count} gaps"))
    }
}

fn persistence() -> Outcome {
    let betas: Vec<f64> = (0..5).map(|i| 0.05 + 0.95 * i as f64 / 4.0).collect();
    let r = persistence_sweep(&[f(3, 5), f(5, 8), f(8, 13)], &betas, 3, 1e-9).map_err(err)?;
    if r.flags.is_empty() {
        Ok(format!("{} tracks open on {} couplings", r.tracks.len(), betas.len()))
    } else {
        Err(format!("{} closure flags", r.flags.len()))
    }
}

fn coefficients() -> Outcome {
    let fr = f(5, 8);
    let beta = 0.5;
    let z = gaps(fr, beta, DEFAULT_MIN_WIDTH)
        .map_err(err)?
        .into_iter()
        .max_by(|a, b| a.width().total_cmp(&b.width()))
        .map(|g| g.midpoint())
        .ok_or("no gap")?;
    let c = coefficient_sheet(fr, beta, z, 6).map_err(err)?;
    let (plus, minus) = recursion_r(fr, beta, z, 6).map_err(err)?;
    let d = build_d(&plus, &minus).map_err(err)?;
    if d.get(1, 0) != 0.5 || plus.entries().any(|(p, _, v)| p <= 0 && v != 0.0) {
        return Err("support or normalization broken".into());
    }
    let c00 = (c.get(0, 0) + chambers_surface(fr, beta, z).map_err(err)?.g0()).abs();
    if c00 > 1e-9 {
        return Err(format!("|c00 + g0| = {c00:.3e}"));
    }
    let res = residual_21(&c, beta, z).off_origin.max(residual_21(&plus, beta, z).off_origin);
    verdict(res.max(c.imag_max), 1e-8, "system residual")
}

fn number_theory() -> Outcome {
    for n in 1..=50 {
        let s = farey(n).map_err(err)?;
        if s.neighbor_determinants().iter().any(|&d| d != 1) || s.len() as u64 != phi_cumulative(n).map_err(err)? {
            return Err(format!("Farey order {n}"));
        }
    }
    let phis: Vec<u64> = [2, 4, 6].iter().map(|&n| phi_cumulative(n).unwrap_or(0)).collect();
    if phis != [2, 6, 12] {
        return Err(format!("cumulative totients {phis:?}"));
    }
    // 2/144 in lowest terms
    if franel_sum(3).map_err(err)?.to_string() != "1/72" {
        return Err("franel_sum(3) != 2/144".into());
    }
    Ok("Farey determinants, Phi(2,4,6) = 2,6,12, franel_sum(3) = 2/144".into())
}

fn determinism() -> Outcome {
    let config = default_dataset_config(7, 0.9);
    let a = compute_dataset(7, 0.9, DEFAULT_MIN_WIDTH, 1).map_err(err)?;
    let b = compute_dataset(7, 0.9, DEFAULT_MIN_WIDTH, 3).map_err(err)?;
    let rows = fractions(7).map_err(err)?.len();
    if dataset_file(&config, &a) == dataset_file(&config, &b) {
        Ok(format!("{rows} rows identical for 1 and 3 workers"))
    } else {
        Err("datasets differ between worker counts".into())
    }
}

pub fn run_all() -> Vec<Check> {
    let suite: [Entry; 12] = [
        ("algebra-identities", algebra),
        ("spectrum-dense-oracle", spectrum_oracle),
        ("gap-labels", labels),
        ("lyapunov-routes", lyapunov_routes),
        ("gradient-finite-differences", gradient_fd),
        ("hessian-sign-structure", hessian_signs),
        ("critical-margins", margins),
        ("gap-persistence", persistence),
        ("coefficient-system", coefficients),
        ("number-theory", number_theory),
        ("batch-determinism", determinism),
        ("duality", duality),
    ];
    suite
        .into_iter()
        .map(|(name, check)| match check() {
            Ok(detail) => Check { name, pass: true, detail },
            Err(detail) => Check { name, pass: false, detail },
        })
        .collect()
}

fn duality() -> Outcome {
    let mut worst = 0.0f64;
    for fr in [f(1, 3), f(3, 7)] {
        for beta in [0.4, 2.5] {
            worst = worst.max(harper_core::spectrum::dual_check(fr, beta).map_err(err)?.distance);
        }
    }
    verdict(worst, 1e-9, "Hausdorff distance to the dual spectrum")
}
