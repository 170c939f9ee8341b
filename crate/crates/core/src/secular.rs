//! The transcendental secular equation of the impurity ring,
//!
//! `F(θ) = a·sinθ·(2cos Nθ − 2cosh Ng) − b·sin Nθ`,
//!
//! evaluated with a common factor `e^{-L}`, `L = max(|Im Nθ|, N|g|)`, removed
//! so that nothing overflows for large `Ng` or deep bound states. The HN ring
//! has `a = 1, b = V0`; the SSH ring reuses the same form with `a = t'` and a
//! θ-dependent `b`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::HnParams;
use crate::roots::{bisect_signed, scan_then_refine_min};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Scaled secular value: the true value is `value · e^{log_scale}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Secular {
    pub value: Complex64,
    pub derivative: Complex64,
    /// Sum of the moduli of the individual terms, on the same scale as
    /// `value`; `|value| / magnitude` is the relative defect.
    pub magnitude: f64,
    pub log_scale: f64,
}

impl Secular {
    pub fn unscaled(&self) -> Complex64 {
        self.value * self.log_scale.exp()
    }

    pub fn relative(&self) -> f64 {
        if self.magnitude == 0.0 {
            self.value.norm()
        } else {
            self.value.norm() / self.magnitude
        }
    }

    /// Relative defect produced by rounding `theta` to double precision
    /// alone; it exceeds any fixed bound where `F` is steep (large `|V0|`
    /// with roots pressed against the poles of the coupling term).
    pub fn rounding_floor(&self, theta: Complex64) -> f64 {
        let d = self.derivative.norm() * theta.norm().max(1.0) * f64::EPSILON;
        if self.magnitude == 0.0 { d } else { d / self.magnitude }
    }

    /// Whether `theta` is a root to within `tol` or, where that is
    /// unattainable, to within a few roundings of `theta`.
    pub fn accepts(&self, theta: Complex64, tol: f64) -> bool {
        self.relative() <= tol.max(4.0 * self.rounding_floor(theta))
    }
}

/// Coefficients of the two terms of the secular function at one θ.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Terms {
    pub lead: f64,
    pub coupling: Complex64,
    pub coupling_derivative: Complex64,
}

fn sin_scaled(w: Complex64, l: f64) -> Complex64 {
    if w.im.abs() < 300.0 {
        w.sin() * (-l).exp()
    } else {
        ((I * w - l).exp() - (-I * w - l).exp()) / (2.0 * I)
    }
}

fn cos_scaled(w: Complex64, l: f64) -> Complex64 {
    if w.im.abs() < 300.0 {
        w.cos() * (-l).exp()
    } else {
        ((I * w - l).exp() + (-I * w - l).exp()) / 2.0
    }
}

fn sinh_scaled(y: f64, l: f64) -> f64 {
    if y.abs() < 300.0 {
        y.sinh() * (-l).exp()
    } else {
        y.signum() * 0.5 * (y.abs() - l).exp()
    }
}

fn cosh_scaled(y: f64, l: f64) -> f64 {
    if y.abs() < 300.0 {
        y.cosh() * (-l).exp()
    } else {
        0.5 * (y.abs() - l).exp()
    }
}

pub(crate) fn secular_general(n: usize, g: f64, theta: Complex64, terms: Terms) -> Secular {
    let nf = n as f64;
    let nt = theta * nf;
    let l = nt.im.abs().max(nf * g.abs());
    // 2cos x − 2cosh y = −4(sin²(x/2) + sinh²(y/2)); avoids cancellation
    // when both sides are close to 2.
    let sh = sin_scaled(nt / 2.0, l / 2.0);
    let shy = sinh_scaled(nf * g.abs() / 2.0, l / 2.0);
    let bracket = -4.0 * (sh * sh + shy * shy);
    let sin_n = sin_scaled(nt, l);
    let cos_n = cos_scaled(nt, l);
    let cosh_n = cosh_scaled(nf * g.abs(), l);
    let (s, c) = (theta.sin(), theta.cos());
    let value = terms.lead * s * bracket - terms.coupling * sin_n;
    let derivative = terms.lead * (c * bracket - 2.0 * nf * s * sin_n)
        - terms.coupling * nf * cos_n
        - terms.coupling_derivative * sin_n;
    let magnitude =
        terms.lead.abs() * s.norm() * (2.0 * cos_n.norm() + 2.0 * cosh_n) + terms.coupling.norm() * sin_n.norm();
    Secular {
        value,
        derivative,
        magnitude,
        log_scale: l,
    }
}

pub(crate) fn hn_terms(v0: Complex64) -> Terms {
    Terms {
        lead: 1.0,
        coupling: v0,
        coupling_derivative: Complex64::new(0.0, 0.0),
    }
}

/// Scaled HN secular function and its θ-derivative.
pub fn secular_scaled(p: &HnParams, theta: Complex64) -> Secular {
    secular_general(p.n, p.g, theta, hn_terms(p.v0))
}

/// `sinθ·(2cos Nθ − 2cosh Ng) − V0·sin Nθ`. May overflow to infinity for
/// very large `Ng` or `|Im θ|`; use [`secular_scaled`] when that matters.
pub fn evaluate_secular(p: &HnParams, theta: Complex64) -> Complex64 {
    secular_scaled(p, theta).unscaled()
}

/// `(2cos Nθ − 2cosh Ng) / sin Nθ` for real θ.
pub fn f1(theta: f64, n: usize, g: f64) -> Result<f64> {
    let nf = n as f64;
    let s = (nf * theta).sin();
    if s.abs() <= 4.0 * f64::EPSILON * nf.max(1.0) {
        return Err(Error::Pole(format!("f1 has a pole at theta = {theta}")));
    }
    let h = (nf * theta / 2.0).sin();
    let sh = (nf * g.abs() / 2.0).sinh();
    Ok(-4.0 * (h * h + sh * sh) / s)
}

/// `V0 / sinθ` for real θ.
pub fn f2(theta: f64, v0: f64) -> Result<f64> {
    let s = theta.sin();
    if s.abs() <= 4.0 * f64::EPSILON {
        return Err(Error::Pole(format!("f2 has a pole at theta = {theta}")));
    }
    Ok(v0 / s)
}

/// All real roots of the secular equation in `(0, π)` for real `V0`, a
/// tangential double root being listed twice.
///
/// Writing `F = sin Nθ·(h(θ) − V0)` with `h = sinθ·f1(θ)`: `h > 0` where
/// `sin Nθ < 0` and `h < 0` where `sin Nθ > 0`, so only the intervals
/// `(jπ/N, (j+1)π/N)` of one parity can hold roots for a given sign of
/// `V0`. On each of them `u = sign(V0)·h` blows up at the ends (except at
/// `θ = 0` and `θ = π`, where it has a finite limit), and its minimum splits
/// the interval into two sign-change brackets.
pub fn real_theta_bracketed_solve(p: &HnParams) -> Result<Vec<f64>> {
    p.validate()?;
    if p.v0.im != 0.0 {
        return Err(Error::InvalidParameter(format!(
            "bracketed real solve needs real V0, got {}",
            p.v0
        )));
    }
    let v0 = p.v0.re;
    let sign = if v0 < 0.0 { -1.0 } else { 1.0 };
    let target = v0.abs();
    let n = p.n;
    let nf = n as f64;
    let hermitian = p.g == 0.0;
    let sh2 = (nf * p.g.abs() / 2.0).sinh().powi(2);
    let u = |t: f64| -> f64 {
        match f1(t, n, p.g) {
            Ok(v) => sign * t.sin() * v,
            Err(_) => f64::INFINITY,
        }
    };
    // Limits of u at θ → 0 (negative V0 only) and θ → π.
    let u_zero = 4.0 * sh2 / nf;
    let u_pi = if n.is_multiple_of(2) { 4.0 * sh2 / nf } else { 4.0 * (1.0 + sh2) / nf };
    // Ends at cos Nθ = 1 (even j) are exact roots when g = 0 and u → 0 there.
    let end_root = |j: usize| hermitian && j.is_multiple_of(2);
    let f = |t: f64| secular_scaled(p, Complex64::new(t, 0.0)).value.re;
    let mut roots = Vec::new();
    let mut j = if sign > 0.0 { 1 } else { 0 };
    while j < n {
        let a = j as f64 * PI / nf;
        let b = if j + 1 == n { PI } else { (j + 1) as f64 * PI / nf };
        if end_root(j) && j > 0 && sign < 0.0 {
            roots.push(a);
        }
        if end_root(j + 1) && j + 1 < n && sign > 0.0 {
            roots.push(b);
        }
        let tol = 1e-15 * (b - a).max(1.0);
        let (tmin, umin) = scan_then_refine_min(u, a, b, 32, tol);
        j += 2;
        if (target - umin).abs() <= 1e-13 * target {
            // Tangency: a double root at the minimum.
            roots.extend([tmin, tmin]);
            continue;
        }
        if !(target > umin) {
            continue;
        }
        let jj = j - 2;
        let left = if jj == 0 { u_zero > target } else { !end_root(jj) };
        let right = if jj + 1 == n { u_pi > target } else { !end_root(jj + 1) };
        // F = −|sin Nθ|·(u − |V0|): negative near the ends, positive at tmin.
        if left {
            roots.push(bisect_signed(f, a, tmin, true));
        }
        if right {
            roots.push(bisect_signed(f, tmin, b, false));
        }
    }
    roots.sort_by(f64::total_cmp);
    Ok(roots)
}

/// Outermost root `θ0 + iy` (`θ0 = 0` for `V0 > 0`, `π` for `V0 < 0`) of
/// the secular equation with real nonzero `V0`: the bound state, whose
/// energy `±2cosh y` lies furthest out on the real axis. Band states may sit
/// on the same line closer in, so the largest-`y` sign change is taken.
/// `None` when there is no sign change.
pub fn bound_state_theta(p: &HnParams) -> Option<Complex64> {
    if p.v0.im != 0.0 || p.v0.re == 0.0 {
        return None;
    }
    let v0 = p.v0.re;
    let theta0 = if v0 > 0.0 { 0.0 } else { PI };
    let b = |y: f64| secular_scaled(p, Complex64::new(theta0, y)).value.im;
    // Beyond 2cosh y = |V0| + 2cosh g + 2 the lead term dominates.
    let y_max = ((v0.abs() + 2.0 * p.g.cosh() + 2.0) / 2.0).acosh() + 1.0;
    let samples = 64 * p.n.max(8);
    let step = y_max / samples as f64;
    let mut hi_val = b(y_max);
    for i in (0..samples).rev() {
        let (lo, hi) = (i as f64 * step, (i + 1) as f64 * step);
        // y = 0 is always a root; probe just above it.
        let lo_val = if i == 0 { b(lo + 1e-3 * step) } else { b(lo) };
        if lo_val == 0.0 && i > 0 {
            return Some(Complex64::new(theta0, lo));
        }
        if (lo_val < 0.0) != (hi_val < 0.0) {
            let y = bisect_signed(b, if i == 0 { 1e-3 * step } else { lo }, hi, lo_val < 0.0);
            return Some(Complex64::new(theta0, y));
        }
        hi_val = lo_val;
    }
    None
}
