//! Adaptive Gauss–Kronrod quadrature and bracketing root finding.

use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;

// 7-point Gauss / 15-point Kronrod nodes on [-1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

fn gk15<F: FnMut(f64, &mut [f64])>(f: &mut F, dim: usize, a: f64, b: f64) -> (Vec<f64>, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut f1 = vec![0.0; dim];
    let mut f2 = vec![0.0; dim];
    f(c, &mut f1);
    let mut k: Vec<f64> = f1.iter().map(|v| WGK[7] * v).collect();
    let mut g: Vec<f64> = f1.iter().map(|v| WG[3] * v).collect();
    for j in 0..7 {
        let dx = h * XGK[j];
        f(c - dx, &mut f1);
        f(c + dx, &mut f2);
        for i in 0..dim {
            let s = f1[i] + f2[i];
            k[i] += WGK[j] * s;
            if j % 2 == 1 {
                g[i] += WG[j / 2] * s;
            }
        }
    }
    let mut err = 0.0f64;
    for i in 0..dim {
        k[i] *= h;
        err = err.max((k[i] - g[i] * h).abs());
    }
    (k, err)
}

struct Segment {
    lo: f64,
    hi: f64,
    value: Vec<f64>,
    err: f64,
}

impl PartialEq for Segment {
    fn eq(&self, o: &Self) -> bool {
        self.err.total_cmp(&o.err).is_eq()
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, o: &Self) -> Option<core::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Segment {
    fn cmp(&self, o: &Self) -> core::cmp::Ordering {
        self.err.total_cmp(&o.err)
    }
}

/// Integrates `f: ℝ → ℝ^dim` over `[a, b]` by globally adaptive GK15
/// bisection until the summed error estimate is below
/// `max(abs_tol, rel_tol * max|I|)`. `f` writes its value into the slice.
pub fn integrate_vec<F: FnMut(f64, &mut [f64])>(
    f: F,
    dim: usize,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Vec<f64> {
    integrate_vec_breaks(f, dim, &[a, b], abs_tol, rel_tol)
}

/// [`integrate_vec`] over `[breaks[0], breaks[last]]`, starting from the
/// partition given by the increasing `breaks`. Points where `f` is nearly
/// singular belong in `breaks`.
pub fn integrate_vec_breaks<F: FnMut(f64, &mut [f64])>(
    mut f: F,
    dim: usize,
    breaks: &[f64],
    abs_tol: f64,
    rel_tol: f64,
) -> Vec<f64> {
    let mut total = vec![0.0; dim];
    let mut total_err = 0.0;
    let mut heap = BinaryHeap::new();
    for w in breaks.windows(2) {
        let (value, err) = gk15(&mut f, dim, w[0], w[1]);
        for (t, v) in total.iter_mut().zip(&value) {
            *t += v;
        }
        total_err += err;
        heap.push(Segment { lo: w[0], hi: w[1], value, err });
    }
    for _ in 0..4000 {
        let scale = total.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if total_err <= abs_tol.max(rel_tol * scale) {
            break;
        }
        let Some(seg) = heap.pop() else { break };
        let mid = 0.5 * (seg.lo + seg.hi);
        if !(mid > seg.lo && mid < seg.hi) {
            heap.push(seg);
            break;
        }
        let (v1, e1) = gk15(&mut f, dim, seg.lo, mid);
        let (v2, e2) = gk15(&mut f, dim, mid, seg.hi);
        for i in 0..dim {
            total[i] += v1[i] + v2[i] - seg.value[i];
        }
        total_err += e1 + e2 - seg.err;
        heap.push(Segment { lo: seg.lo, hi: mid, value: v1, err: e1 });
        heap.push(Segment { lo: mid, hi: seg.hi, value: v2, err: e2 });
    }
    // re-sum to shed drift from the running updates
    let mut exact = vec![0.0; dim];
    for s in heap.iter() {
        for (t, v) in exact.iter_mut().zip(&s.value) {
            *t += v;
        }
    }
    exact
}

/// Fixed-size form of [`integrate_vec`].
pub fn integrate<const N: usize, F: FnMut(f64) -> [f64; N]>(
    mut f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> [f64; N] {
    let v = integrate_vec(|x, out| out.copy_from_slice(&f(x)), N, a, b, abs_tol, rel_tol);
    let mut r = [0.0; N];
    r.copy_from_slice(&v);
    r
}

/// Scalar convenience wrapper around [`integrate`].
pub fn integrate1<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> f64 {
    integrate(|x| [f(x)], a, b, abs_tol, rel_tol)[0]
}

/// Bisection for a sign change of `f` on `[lo, hi]`. Stops when the bracket is
/// below `tol` or stops shrinking in floating point.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64, tol: f64) -> Option<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Some(lo);
    }
    if fhi == 0.0 {
        return Some(hi);
    }
    if flo.signum() == fhi.signum() || flo.is_nan() || fhi.is_nan() {
        return None;
    }
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= tol || !(mid > lo && mid < hi) {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Some(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}
