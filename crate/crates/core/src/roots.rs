//! Scalar root bracketing and minimisation helpers.

/// Bisection on `[lo, hi]` given the sign of `f` just inside each end.
/// The endpoints themselves are never evaluated, so they may sit on poles.
pub fn bisect_signed(mut f: impl FnMut(f64) -> f64, mut lo: f64, mut hi: f64, lo_negative: bool) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = f(mid);
        if v == 0.0 {
            return mid;
        }
        if (v < 0.0) == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 4.0 * f64::EPSILON * mid.abs().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Golden-section search for a minimiser of `f` on the open interval
/// `(lo, hi)`; assumes unimodality inside the bracket.
pub fn golden_section_min(mut f: impl FnMut(f64) -> f64, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Minimiser of `f` on `(lo, hi)`: coarse scan of `samples` interior
/// points, then golden-section refinement around the best sample.
pub fn scan_then_refine_min(mut f: impl FnMut(f64) -> f64, lo: f64, hi: f64, samples: usize, tol: f64) -> (f64, f64) {
    let step = (hi - lo) / (samples + 1) as f64;
    let mut best = (lo + step, f64::INFINITY);
    let mut best_idx = 1;
    for i in 1..=samples {
        let x = lo + step * i as f64;
        let v = f(x);
        if v < best.1 {
            best = (x, v);
            best_idx = i;
        }
    }
    let a = lo + step * (best_idx - 1) as f64;
    let b = lo + step * (best_idx + 1) as f64;
    let refined = golden_section_min(&mut f, a, b, tol);
    if refined.1 <= best.1 {
        refined
    } else {
        best
    }
}
