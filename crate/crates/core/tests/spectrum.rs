use std::f64::consts::PI;

use harper_core::spectrum::{bands, dual_check, gaps, gaps_of, hausdorff, ids, Band, DEFAULT_MIN_WIDTH};
use harper_core::{CMat, RationalFrequency, C64};
use nalgebra::SymmetricEigen;

fn harper(p: u64, q: u64, beta: f64, t1: f64, t2: f64) -> Vec<f64> {
    let n = q as usize;
    let mut h = CMat::zeros(n, n);
    for j in 0..n {
        h[(j, j)] += C64::from(2.0 * (t1 + 2.0 * PI * (p * j as u64) as f64 / q as f64).cos());
        let hop = C64::from_polar(beta, t2);
        h[((j + 1) % n, j)] += hop;
        h[(j, (j + 1) % n)] += hop.conj();
    }
    let mut ev: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Band `k` = range of the `k`-th eigenvalue over a `grid × grid` torus grid.
fn dense_bands(p: u64, q: u64, beta: f64, grid: usize) -> Vec<Band> {
    let n = q as usize;
    let mut lo = vec![f64::INFINITY; n];
    let mut hi = vec![f64::NEG_INFINITY; n];
    for a in 0..grid {
        for b in 0..grid {
            let ev = harper(p, q, beta, 2.0 * PI * a as f64 / grid as f64, 2.0 * PI * b as f64 / grid as f64);
            for k in 0..n {
                lo[k] = lo[k].min(ev[k]);
                hi[k] = hi[k].max(ev[k]);
            }
        }
    }
    lo.into_iter().zip(hi).map(|(lo, hi)| Band { lo, hi }).collect()
}

fn fractions(q_max: u64) -> Vec<RationalFrequency> {
    (1..=q_max).flat_map(|q| (1..q.max(2)).filter_map(move |p| RationalFrequency::new(p, q).ok())).collect()
}

#[test]
fn edges_match_dense_eigensolve() {
    let mut worst = 0.0f64;
    for f in fractions(13) {
        for beta in [0.25, 0.5, 1.0] {
            let ours = bands(f, beta).unwrap();
            let dense = dense_bands(f.p(), f.q(), beta, 32);
            worst = worst.max(hausdorff(&ours.bands, &dense));
            for (a, b) in ours.bands.iter().zip(&dense) {
                worst = worst.max((a.lo - b.lo).abs()).max((a.hi - b.hi).abs());
            }
        }
    }
    assert!(worst <= 1e-6, "worst edge distance {worst:e}");
}

#[test]
fn gap_value_counts_eigenvalues() {
    for f in fractions(8) {
        let bs = bands(f, 0.7).unwrap();
        for g in gaps_of(&bs, DEFAULT_MIN_WIDTH).unwrap().into_iter().filter(|g| g.open) {
            assert!((ids(&bs, g.midpoint()) - g.j as f64 / f.q() as f64).abs() <= 1e-10);
            for (t1, t2) in [(0.1, 0.2), (1.3, 4.0), (2.9, 0.7)] {
                let below = harper(f.p(), f.q(), 0.7, t1, t2).iter().filter(|&&e| e < g.midpoint()).count();
                assert_eq!(below as i64, g.j);
            }
        }
    }
}

#[test]
fn ids_inside_bands_matches_counting() {
    let f = RationalFrequency::new(2, 5).unwrap();
    let beta = 0.8;
    let bs = bands(f, beta).unwrap();
    let n = 200;
    for k in 0..5 {
        let e = 0.3 * bs.bands[k].lo + 0.7 * bs.bands[k].hi;
        let mut count = 0usize;
        // the spectrum depends on the phases only through qθ
        for a in 0..n {
            for b in 0..n {
                let t1 = 2.0 * PI * (a as f64 + 0.5) / (n as f64 * 5.0);
                let t2 = 2.0 * PI * (b as f64 + 0.5) / (n as f64 * 5.0);
                count += harper(2, 5, beta, t1, t2).iter().filter(|&&x| x < e).count();
            }
        }
        let oracle = count as f64 / (5 * n * n) as f64;
        assert!((ids(&bs, e) - oracle).abs() < 2e-3, "band {k}: {} vs {oracle}", ids(&bs, e));
    }
}

#[test]
fn labels_satisfy_congruence() {
    for f in fractions(13) {
        for beta in [0.3, 1.0] {
            for g in gaps(f, beta, DEFAULT_MIN_WIDTH).unwrap() {
                let q = f.q() as i64;
                assert_eq!((g.j - g.n * f.p() as i64).rem_euclid(q), 0);
                assert_eq!(g.j, g.m * q + g.n * f.p() as i64);
                assert!(2 * g.n.abs() <= q);
            }
        }
    }
}

#[test]
fn two_fifths_hall_sequence() {
    let f = RationalFrequency::new(2, 5).unwrap();
    let halls: Vec<i64> = gaps(f, 1.0, DEFAULT_MIN_WIDTH).unwrap().iter().map(|g| g.n).collect();
    assert_eq!(halls, [-2, 1, -1, 2]);
}

#[test]
fn even_denominator_central_gap_touches() {
    for f in [(1u64, 2u64), (1, 4), (3, 4), (1, 6), (3, 8)] {
        let f = RationalFrequency::new(f.0, f.1).unwrap();
        let gs = gaps(f, 0.6, DEFAULT_MIN_WIDTH).unwrap();
        let central = gs.iter().find(|g| 2 * g.j == f.q() as i64).unwrap();
        assert!(!central.open);
        assert!(gs.iter().filter(|g| !g.is_central()).all(|g| g.open));
    }
}

#[test]
fn duality_scales_bands() {
    for f in fractions(8) {
        for beta in [0.4, 0.9] {
            assert!(dual_check(f, beta).unwrap().distance < 1e-9);
        }
    }
}
