use harper_core::butterfly::compute_butterfly;
use harper_core::numbertheory::{
    component_count, farey, franel_sum, franel_sum_f64, franel_table, phi_cumulative, totients,
};
use harper_core::spectrum::DEFAULT_MIN_WIDTH;
use num_bigint::BigInt;
use num_integer::gcd;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use proptest::prelude::*;

fn brute_farey(n: u64) -> Vec<(u64, u64)> {
    let mut v: Vec<(u64, u64)> =
        (1..=n).flat_map(|q| (1..=q).map(move |p| (p, q))).filter(|&(p, q)| gcd(p, q) == 1).collect();
    v.sort_by(|a, b| (a.0 * b.1).cmp(&(b.0 * a.1)));
    v
}

#[test]
fn farey_matches_enumeration() {
    for n in 1..=40 {
        let got: Vec<_> = farey(n).unwrap().fractions.iter().map(|f| (f.p(), f.q())).collect();
        assert_eq!(got, brute_farey(n), "order {n}");
    }
}

#[test]
fn neighbor_determinants_are_one() {
    for n in 1..=200 {
        let s = farey(n).unwrap();
        assert!(s.neighbor_determinants().iter().all(|&d| d == 1), "order {n}");
        assert_eq!(s.len() as u64, phi_cumulative(n).unwrap());
    }
}

#[test]
fn cumulative_totients() {
    assert_eq!(phi_cumulative(2).unwrap(), 2);
    assert_eq!(phi_cumulative(4).unwrap(), 6);
    assert_eq!(phi_cumulative(6).unwrap(), 12);
    let phi = totients(300);
    for (n, &t) in phi.iter().enumerate().skip(1) {
        let count = (1..=n as u64).filter(|&k| gcd(k, n as u64) == 1).count() as u64;
        assert_eq!(t, count, "phi({n})");
    }
}

#[test]
fn franel_exact_and_float() {
    assert_eq!(franel_sum(3).unwrap(), BigRational::new(BigInt::from(2), BigInt::from(144)));
    for n in 1..=100u64 {
        let exact = franel_sum(n).unwrap();
        assert!((exact.to_f64().unwrap() - franel_sum_f64(n).unwrap()).abs() <= 1e-12, "order {n}");
    }
    // independent exact evaluation for a few orders
    for n in [4u64, 7, 12] {
        let fr = brute_farey(n);
        let total = BigInt::from(fr.len());
        let mut sum = BigRational::zero();
        for (i, &(p, q)) in fr.iter().enumerate() {
            let d = BigRational::new(p.into(), q.into()) - BigRational::new(BigInt::from(i + 1), total.clone());
            sum += &d * &d;
        }
        assert_eq!(franel_sum(n).unwrap(), sum);
    }
    let table = franel_table(30).unwrap();
    assert_eq!(table.len(), 30);
    for row in &table {
        assert!((row.n_times_sum - row.n as f64 * row.sum).abs() < 1e-15);
    }
}

/// Connected components of the hall-`k` gap region on an energy raster, one
/// column per fraction in increasing order, 4-connectivity.
fn raster_components(q_max: u64, k: i64, rows: usize) -> usize {
    let d = compute_butterfly(q_max, 1.0, DEFAULT_MIN_WIDTH).unwrap();
    let mut cols: Vec<_> = d.rows.iter().collect();
    cols.sort_by(|a, b| (a.freq.p() * b.freq.q()).cmp(&(b.freq.p() * a.freq.q())));
    let energy = |i: usize| -4.0 + 8.0 * (i as f64 + 0.5) / rows as f64;
    let grid: Vec<Vec<bool>> = cols
        .iter()
        .map(|r| {
            let g = r.gaps.iter().find(|g| g.n == k && g.open);
            (0..rows).map(|i| g.is_some_and(|g| g.lo < energy(i) && energy(i) < g.hi)).collect()
        })
        .collect();
    let mut seen = vec![vec![false; rows]; grid.len()];
    let mut count = 0;
    for c in 0..grid.len() {
        for r in 0..rows {
            if !grid[c][r] || seen[c][r] {
                continue;
            }
            count += 1;
            let mut stack = vec![(c, r)];
            seen[c][r] = true;
            while let Some((x, y)) = stack.pop() {
                let mut nb = Vec::new();
                if x > 0 {
                    nb.push((x - 1, y));
                }
                if x + 1 < grid.len() {
                    nb.push((x + 1, y));
                }
                if y > 0 {
                    nb.push((x, y - 1));
                }
                if y + 1 < rows {
                    nb.push((x, y + 1));
                }
                for (a, b) in nb {
                    if grid[a][b] && !seen[a][b] {
                        seen[a][b] = true;
                        stack.push((a, b));
                    }
                }
            }
        }
    }
    count
}

#[test]
fn component_counts_against_raster() {
    for k in [1i64, 2] {
        let mut last = 0;
        for q_max in 1..=12 {
            let d = compute_butterfly(q_max, 1.0, DEFAULT_MIN_WIDTH).unwrap();
            let c = component_count(&d, k).unwrap();
            assert_eq!(c.predicted, phi_cumulative(2 * k as u64).unwrap());
            assert!(c.observed as u64 <= c.predicted, "k={k} Q={q_max}: {}", c.observed);
            assert!(c.observed >= last, "k={k} Q={q_max}");
            assert_eq!(c.members.len(), c.observed);
            last = c.observed;
            assert_eq!(raster_components(q_max, k, 4000), c.observed, "k={k} Q={q_max}");
        }
        assert!(last > 0);
    }
    let d = compute_butterfly(10, 1.0, DEFAULT_MIN_WIDTH).unwrap();
    assert_eq!(component_count(&d, 1).unwrap().observed, 2);
    assert!(component_count(&d, 0).is_err());
}

proptest! {
    #[test]
    fn farey_neighbors_unimodular(n in 1u64..120) {
        let s = farey(n).unwrap();
        for w in s.fractions.windows(2) {
            prop_assert_eq!(w[0].q() * w[1].p(), w[0].p() * w[1].q() + 1);
            prop_assert!(w[0].q() + w[1].q() > n);
        }
    }
}
