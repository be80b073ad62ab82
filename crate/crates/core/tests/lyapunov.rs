use harper_core::lyapunov::{
    chambers_surface, critical_scan, fd_gradient, fd_hessian, gradient, hessian, lyapunov_chambers, lyapunov_thouless,
    lyapunov_trace, lyapunov_transfer, PhaseSpectra, Rotation, DEFAULT_TRACE_GRID,
};
use harper_core::spectrum::{bands, gaps, DEFAULT_MIN_WIDTH};
use harper_core::{RationalFrequency, C64};

fn f(p: u64, q: u64) -> RationalFrequency {
    RationalFrequency::new(p, q).unwrap()
}

fn reduced(q: u64) -> Vec<RationalFrequency> {
    (1..q).filter_map(|p| RationalFrequency::new(p, q).ok()).collect()
}

#[test]
fn routes_agree_off_spectrum() {
    let mut checked = 0;
    for fr in [f(2, 5), f(3, 8), f(5, 13)] {
        for beta in [0.3, 0.6, 0.9] {
            let bs = bands(fr, beta).unwrap();
            let cache = PhaseSpectra::new(fr, beta, DEFAULT_TRACE_GRID).unwrap();
            let top = bs.bands.last().unwrap().hi;
            let mut zs: Vec<f64> = gaps(fr, beta, DEFAULT_MIN_WIDTH)
                .unwrap()
                .iter()
                .filter(|g| g.width() > 0.05)
                .map(|g| g.midpoint())
                .collect();
            zs.extend([top + 0.1, top + 1.0, -top - 0.5]);
            for z in zs {
                let zc = C64::new(z, 0.0);
                let tf = lyapunov_transfer(Rotation::Rational(fr), beta, zc, 256, fr.qsize()).unwrap().value;
                let th = lyapunov_thouless(&bs, zc).value;
                let tr = lyapunov_trace(&cache, &bs, zc).unwrap().value;
                let ch = lyapunov_chambers(fr, beta, z).unwrap().value;
                assert!((tf - th).abs() < 2e-3 && (tf - tr).abs() < 2e-3 && (th - tr).abs() < 2e-3, "{fr} {beta} {z}");
                assert!((tf - ch).abs() < 1e-9, "{fr} {beta} {z}: {tf} {ch}");
                checked += 1;
            }
        }
    }
    assert!(checked >= 30);
}

#[test]
fn complex_energies() {
    let fr = f(3, 5);
    let bs = bands(fr, 0.5).unwrap();
    let cache = PhaseSpectra::new(fr, 0.5, 48).unwrap();
    for z in [C64::new(0.1, 0.4), C64::new(-1.5, 0.05), C64::new(3.0, -1.0)] {
        let tf = lyapunov_transfer(Rotation::Rational(fr), 0.5, z, 256, 5).unwrap().value;
        let th = lyapunov_thouless(&bs, z).value;
        assert!((tf - th).abs() < 2e-3, "{z}: {tf} {th}");
        let tr = lyapunov_trace(&cache, &bs, z).unwrap().value;
        assert!((tf - tr).abs() < 2e-3, "{z}: {tf} {tr}");
    }
}

#[test]
fn flat_on_bands() {
    for beta in [0.25, 0.5, 0.75, 1.0] {
        for q in [5, 8, 13] {
            for fr in reduced(q) {
                let bs = bands(fr, beta).unwrap();
                for k in 0..bs.len() {
                    let e = C64::new(bs.ids_midpoint(k), 0.0);
                    let l = lyapunov_transfer(Rotation::Rational(fr), beta, e, 256, fr.qsize()).unwrap().value;
                    assert!(l.abs() <= 5e-3, "{fr} {beta} band {k}: {l}");
                }
            }
        }
    }
}

#[test]
fn positive_exponent_off_spectrum() {
    // L > 0 away from the spectrum, growing like log|z|
    let fr = f(5, 8);
    for z in [3.5, 5.0, 20.0] {
        let l = lyapunov_chambers(fr, 0.7, z).unwrap().value;
        assert!(l > 0.0);
        assert!((l - z.ln()).abs() < 2.0 / z);
    }
}

#[test]
fn gradient_matches_finite_differences() {
    for (fr, beta) in [(f(1, 3), 0.5), (f(2, 5), 0.7), (f(3, 8), 0.4), (f(5, 13), 0.9)] {
        let bs = bands(fr, beta).unwrap();
        let cache = PhaseSpectra::new(fr, beta, DEFAULT_TRACE_GRID).unwrap();
        for g in gaps(fr, beta, DEFAULT_MIN_WIDTH).unwrap().iter().filter(|g| g.width() > 0.1) {
            let z = g.midpoint();
            let (dz, half_db) = fd_gradient(fr, beta, z, 1e-4).unwrap();
            let grad = gradient(&cache, &bs, z).unwrap();
            let jet = chambers_surface(fr, beta, z).unwrap();
            assert!((grad.g0 - dz).abs() < 1e-6, "{fr} {beta} {z}: {} vs {dz}", grad.g0);
            assert!((grad.g1 - half_db).abs() < 1e-6, "{fr} {beta} {z}: {} vs {half_db}", grad.g1);
            assert!((jet.g0() - grad.g0).abs() < 1e-8 && (jet.g1() - grad.g1).abs() < 1e-8);
            assert!(grad.imag_residue < 1e-12);
        }
    }
}

#[test]
fn hessian_diagonal_and_finite_differences() {
    for (fr, beta) in [(f(1, 3), 0.5), (f(2, 5), 0.3), (f(2, 5), 0.7), (f(5, 8), 0.6)] {
        let bs = bands(fr, beta).unwrap();
        let cache = PhaseSpectra::new(fr, beta, DEFAULT_TRACE_GRID).unwrap();
        for g in gaps(fr, beta, DEFAULT_MIN_WIDTH).unwrap().iter().filter(|g| g.width() > 0.1) {
            let z = g.midpoint();
            let h = hessian(&cache, &bs, z).unwrap();
            assert!(h.diagonal_negative(), "{fr} {beta} {z}: {h:?}");
            let fd = fd_hessian(fr, beta, z, 1e-3).unwrap();
            let scale = h.d2z.abs().max(h.d2b.abs());
            for (a, b) in [(h.d2z, fd.d2z), (h.dzb, fd.dzb), (h.d2b, fd.d2b)] {
                assert!((a - b).abs() <= 1e-4 * scale, "{fr} {beta} {z}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn gradient_rejects_band_energies() {
    let fr = f(2, 5);
    let bs = bands(fr, 0.5).unwrap();
    let cache = PhaseSpectra::new(fr, 0.5, 16).unwrap();
    let inside = 0.5 * (bs.bands[2].lo + bs.bands[2].hi);
    assert!(gradient(&cache, &bs, inside).is_err());
    assert!(gradient(&cache, &bs, bs.bands[2].hi + 1e-9).is_err());
}

#[test]
fn critical_points_across_couplings() {
    for fr in reduced(5) {
        for beta in [0.2, 0.5, 1.0] {
            for g in gaps(fr, beta, DEFAULT_MIN_WIDTH).unwrap().into_iter().filter(|g| g.open) {
                let cp = critical_scan(&g).unwrap();
                assert!(cp.s_star > g.lo && cp.s_star < g.hi);
                assert!(cp.monotone);
                assert!(cp.margin() > 1e-8, "{fr} {beta} j={}", g.j);
                assert!(chambers_surface(fr, beta, cp.s_star).unwrap().g0().abs() < 1e-6);
            }
        }
    }
}
