use harper_core::coefficients::{
    build_d, build_phi, coefficient_sheet, coefficient_sheet_on_grid, decay_rate, recursion_r, residual_21,
    synthetic_vanishing, vanishing_probe, CoefficientSheet, SheetKind,
};
use harper_core::lyapunov::{chambers_surface, gradient, PhaseSpectra, DEFAULT_TRACE_GRID};
use harper_core::spectrum::{bands, gaps, GapRecord, DEFAULT_MIN_WIDTH};
use harper_core::RationalFrequency;
use proptest::prelude::*;

fn f(p: u64, q: u64) -> RationalFrequency {
    RationalFrequency::new(p, q).unwrap()
}

fn widest_gap(fr: RationalFrequency, beta: f64) -> GapRecord {
    gaps(fr, beta, DEFAULT_MIN_WIDTH).unwrap().into_iter().max_by(|a, b| a.width().total_cmp(&b.width())).unwrap()
}

#[test]
fn c_sheet_real_and_solves_system() {
    let fr = f(5, 8);
    let beta = 0.5;
    for g in gaps(fr, beta, DEFAULT_MIN_WIDTH).unwrap().iter().filter(|g| g.width() > 1e-3) {
        let z = g.midpoint();
        let c = coefficient_sheet(fr, beta, z, 8).unwrap();
        assert!(c.imag_max <= 1e-10);
        let r = residual_21(&c, beta, z);
        assert!(r.off_origin <= 1e-8, "z={z}: {}", r.off_origin);
        // the origin row carries the resolvent-identity inhomogeneity
        assert!((r.origin_first - 1.0).abs() <= 1e-8);
        assert!(r.origin_second.abs() <= 1e-8);
        for (p, qe, v) in c.entries() {
            assert!((v - c.get(-p, -qe)).abs() <= 1e-10);
        }
    }
}

#[test]
fn grid_route_agrees_away_from_edges() {
    let fr = f(2, 5);
    for z in [3.5, -4.0] {
        let a = coefficient_sheet(fr, 0.6, z, 5).unwrap();
        let b = coefficient_sheet_on_grid(fr, 0.6, z, 5, 64).unwrap();
        for (p, qe, v) in a.entries() {
            assert!((v - b.get(p, qe)).abs() < 1e-10, "({p},{qe})");
        }
    }
    assert!(coefficient_sheet_on_grid(fr, 0.6, 3.5, 6, 2).is_err());
}

#[test]
fn c00_matches_lyapunov_gradient() {
    for (fr, beta) in [(f(1, 3), 0.5), (f(3, 5), 0.8), (f(5, 8), 0.5), (f(5, 13), 0.3)] {
        let bs = bands(fr, beta).unwrap();
        let cache = PhaseSpectra::new(fr, beta, DEFAULT_TRACE_GRID).unwrap();
        let top = bs.bands.last().unwrap().hi;
        let mut zs: Vec<f64> = gaps(fr, beta, DEFAULT_MIN_WIDTH)
            .unwrap()
            .iter()
            .filter(|g| g.width() > 1e-2)
            .map(|g| g.midpoint())
            .collect();
        zs.push(top + 0.7);
        for z in zs {
            let c00 = coefficient_sheet(fr, beta, z, 2).unwrap().get(0, 0);
            let exact = chambers_surface(fr, beta, z).unwrap().g0();
            assert!((c00 + exact).abs() <= 1e-9, "{fr} {beta} {z}: {c00} {exact}");
            // the phase grid resolves only gaps that are wide against its spacing
            if bs.distance(harper_core::C64::new(z, 0.0)) > 0.05 {
                let g0 = gradient(&cache, &bs, z).unwrap().g0;
                assert!((c00 + g0).abs() <= 1e-9, "{fr} {beta} {z}: {c00} {g0}");
            }
        }
    }
}

#[test]
fn inside_spectrum_rejected() {
    let fr = f(2, 5);
    let bs = bands(fr, 0.5).unwrap();
    let z = 0.5 * (bs.bands[0].lo + bs.bands[0].hi);
    assert!(coefficient_sheet(fr, 0.5, z, 4).is_err());
    assert!(recursion_r(fr, 0.5, z, 4).is_err());
}

#[test]
fn far_field_decay() {
    let c = coefficient_sheet(f(1, 3), 0.5, 10.0, 12).unwrap();
    for slope in [1, -1] {
        for k in -2..=2 {
            let e = decay_rate(&c, slope, k).unwrap();
            assert!(e.rate <= 0.3, "slope {slope} k {k}: {}", e.rate);
        }
    }
}

#[test]
fn recursion_support_and_normalization() {
    let fr = f(5, 8);
    let beta = 0.5;
    let z = widest_gap(fr, beta).midpoint();
    let (plus, minus) = recursion_r(fr, beta, z, 12).unwrap();
    for (p, qe, v) in plus.entries() {
        if p <= 0 || qe.abs() >= p {
            assert_eq!(v, 0.0, "R+ at ({p},{qe})");
        }
        assert_eq!(minus.get(-p, qe), v);
    }
    assert!(residual_21(&plus, beta, z).off_origin <= 1e-8);
    assert!(residual_21(&minus, beta, z).off_origin <= 1e-8);
    let d = build_d(&plus, &minus).unwrap();
    assert_eq!(d.kind, SheetKind::D);
    assert_eq!(d.get(1, 0), 0.5);
    for (p, qe, v) in d.entries() {
        assert_eq!(v, d.get(p.abs(), qe.abs()));
        if qe.abs() >= p.abs() {
            assert_eq!(v, 0.0);
        }
    }
    let r = residual_21(&d, beta, z);
    assert!(r.off_origin <= 1e-8);
    assert!((r.origin_first - 1.0).abs() <= 1e-12);
}

#[test]
fn phi_solves_full_system() {
    for (fr, beta) in [(f(5, 8), 0.5), (f(3, 5), 0.3), (f(8, 13), 0.7)] {
        let z = widest_gap(fr, beta).midpoint();
        let c = coefficient_sheet(fr, beta, z, 12).unwrap();
        let (plus, minus) = recursion_r(fr, beta, z, 12).unwrap();
        let d = build_d(&plus, &minus).unwrap();
        let phi = build_phi(&c, &d).unwrap();
        for (p, qe, v) in phi.entries() {
            assert_eq!(v, c.get(p, qe) - d.get(p, qe));
        }
        let r = residual_21(&phi, beta, z);
        assert!(r.with_origin() <= 1e-8, "{fr}: {r:?}");
        let e = decay_rate(&phi, -1, 0).unwrap();
        assert!(e.rate < 1.0);
    }
}

#[test]
fn decay_bounded_by_coupling() {
    for q in [5u64, 8, 13] {
        let fr = [f(3, 5), f(5, 8), f(8, 13)][[5, 8, 13].iter().position(|&x| x == q).unwrap()];
        for beta in [0.3, 0.5, 0.7] {
            let z = widest_gap(fr, beta).midpoint();
            let (plus, minus) = recursion_r(fr, beta, z, 12).unwrap();
            let d = build_d(&plus, &minus).unwrap();
            for sheet in [&d, &plus, &minus] {
                for slope in [1, -1] {
                    for k in -2..=2 {
                        let e = decay_rate(sheet, slope, k).unwrap();
                        assert!(
                            e.rate <= beta + 0.05,
                            "{fr} {beta} {} slope {slope} k {k}: {}",
                            sheet.kind.name(),
                            e.rate
                        );
                    }
                }
            }
        }
    }
}

#[test]
fn decay_sentinel_and_errors() {
    let s = CoefficientSheet::zeros(SheetKind::C, f(1, 2), 0.5, 5.0, 6);
    let e = decay_rate(&s, 1, 0).unwrap();
    assert_eq!(e.rate, 0.0);
    assert!(decay_rate(&s, 2, 0).is_err());
    assert_eq!(residual_21(&s, 0.5, 5.0).with_origin(), 0.0);
}

#[test]
fn probe_never_vanishes_across_gaps() {
    let fr = f(5, 8);
    let beta = 0.5;
    let mut worst = f64::INFINITY;
    for g in gaps(fr, beta, DEFAULT_MIN_WIDTH).unwrap().iter().filter(|g| g.open) {
        let n = 41;
        for i in 1..n {
            let z = g.lo + (g.hi - g.lo) * i as f64 / n as f64;
            let c = coefficient_sheet(fr, beta, z, 2).unwrap();
            let probe = vanishing_probe(&c);
            assert!(!probe.both_below(1e-8));
            worst = worst.min(probe.c00.abs().max(probe.c01.abs()));
        }
    }
    assert!(worst > 1e-8);
    let far = vanishing_probe(&coefficient_sheet(f(1, 3), 0.5, 10.0, 2).unwrap());
    assert!((far.c00 + 0.1025).abs() < 1e-4);
}

#[test]
fn synthetic_vanishing_zeroes_cross() {
    let fr = f(5, 8);
    let beta = 0.5;
    let z = widest_gap(fr, beta).midpoint();
    let c = coefficient_sheet(fr, beta, z, 6).unwrap();
    let (plus, minus) = recursion_r(fr, beta, z, 6).unwrap();
    let d = build_d(&plus, &minus).unwrap();
    let s = synthetic_vanishing(&c, &d).unwrap();
    assert!(s.cross_max <= 1e-8);
    assert!(s.corners.iter().all(|v| v.is_finite()));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn c_sheet_symmetric(p in 1u64..8, q in 2u64..9, beta in 0.1f64..1.0, z in 4.5f64..8.0) {
        prop_assume!(num_integer::gcd(p, q) == 1 && p < q);
        let c = coefficient_sheet(f(p, q), beta, z, 4).unwrap();
        for (a, b, v) in c.entries() {
            prop_assert!((v - c.get(-a, -b)).abs() <= 1e-10);
            prop_assert!((v - c.get(a.abs(), b.abs())).abs() <= 1e-10);
        }
    }

    #[test]
    fn recursion_support_exact(beta in 0.05f64..0.95, z in 4.5f64..8.0) {
        let (plus, _) = recursion_r(f(3, 7), beta, z, 7).unwrap();
        for (p, qe, v) in plus.entries() {
            if p <= 0 || qe.abs() >= p {
                prop_assert_eq!(v, 0.0);
            }
        }
    }
}
