//! Quantities derived from eigenmodes: participation ratios, real/complex
//! spectrum classification, localization direction, and the critical
//! impurity strength at which the bulk spectrum turns fully real.

use num_complex::Complex64;

use crate::characteristic::{theta_real_tolerance, ModeSolution, RootKind};
use crate::dense::vec_norm;
use crate::error::{Error, Result};
use crate::model::HnParams;
use crate::secular::real_theta_bracketed_solve;

/// Default absolute tolerance on `|Im ε|` for calling an energy real.
pub const REALNESS_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumReport {
    /// Real bulk energies.
    pub n_real: usize,
    /// Non-real bulk energies, counted in conjugate pairs.
    pub n_complex_pairs: usize,
    pub bound_state: bool,
    /// Every bulk energy is real.
    pub fully_real: bool,
    pub max_imag_abs: f64,
    /// Bulk energies that are real *and* inside the PBC band `(−2, 2)`,
    /// i.e. real θ. Energies such as `−2cosh y` (θ = π + iy) are real but
    /// not band states.
    pub n_real_theta: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Left,
    Right,
    Flat,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalizationProfile {
    pub direction: Direction,
    /// Least-squares slope of `ln|ψ_n|` over `n ∈ [N/4, 3N/4]`.
    pub fitted_slope: f64,
    pub theta_imag_abs: f64,
}

/// `Σ|ψ|⁴ / (Σ|ψ|²)²`.
pub fn ipr(amplitudes: &[Complex64]) -> Result<f64> {
    let scale = vec_norm(amplitudes);
    if !(scale > 0.0) {
        return Err(Error::InvalidInput("IPR of a zero vector".into()));
    }
    let (mut s2, mut s4) = (0.0, 0.0);
    for z in amplitudes {
        let a = (z / scale).norm_sqr();
        s2 += a;
        s4 += a * a;
    }
    Ok(s4 / (s2 * s2))
}

/// Mean IPR over the modes, optionally leaving out the bound state.
pub fn average_ipr(modes: &[ModeSolution], exclude_bound: bool) -> Result<f64> {
    let mut total = 0.0;
    let mut count = 0usize;
    for m in modes {
        if exclude_bound && m.root.kind == RootKind::Bound {
            continue;
        }
        total += ipr(&m.amplitudes)?;
        count += 1;
    }
    if count == 0 {
        return Err(Error::InvalidInput("no modes to average".into()));
    }
    Ok(total / count as f64)
}

fn report(bulk: impl Iterator<Item = Complex64>, bound_state: bool, tol: f64) -> SpectrumReport {
    let (mut n_real, mut n_complex, mut n_real_theta) = (0, 0, 0);
    let mut max_imag: f64 = 0.0;
    for e in bulk {
        max_imag = max_imag.max(e.im.abs());
        if e.im.abs() <= tol {
            n_real += 1;
            if e.re.abs() < 2.0 {
                n_real_theta += 1;
            }
        } else {
            n_complex += 1;
        }
    }
    SpectrumReport {
        n_real,
        n_complex_pairs: n_complex / 2,
        bound_state,
        fully_real: n_complex == 0,
        max_imag_abs: max_imag,
        n_real_theta,
    }
}

/// Classification of an exact HN spectrum; the bound state is the root
/// labelled [`RootKind::Bound`].
pub fn classify_spectrum(modes: &[ModeSolution], tol: f64) -> SpectrumReport {
    let bound = modes.iter().any(|m| m.root.kind == RootKind::Bound);
    let bulk = modes.iter().filter(|m| m.root.kind != RootKind::Bound).map(|m| m.energy);
    let mut r = report(bulk, bound, tol);
    r.n_real_theta = modes
        .iter()
        .filter(|m| m.root.kind != RootKind::Bound && m.root.theta.im == 0.0)
        .count();
    r
}

/// Index of the impurity bound state in a bare eigenvalue list: the
/// eigenvalue furthest out in the direction of `sign(Re V0)`.
pub fn bound_state_index(values: &[Complex64], v0: Complex64) -> Option<usize> {
    if v0 == Complex64::new(0.0, 0.0) || values.is_empty() {
        return None;
    }
    let sign = if v0.re >= 0.0 { 1.0 } else { -1.0 };
    let mut best = 0;
    for (i, e) in values.iter().enumerate() {
        if sign * e.re > sign * values[best].re {
            best = i;
        }
    }
    Some(best)
}

/// Classification of a bare eigenvalue list (e.g. from the dense oracle).
pub fn classify_eigenvalues(values: &[Complex64], v0: Complex64, tol: f64) -> SpectrumReport {
    let bound = bound_state_index(values, v0);
    let bulk = values
        .iter()
        .enumerate()
        .filter(move |(i, _)| Some(*i) != bound)
        .map(|(_, e)| *e);
    report(bulk, bound.is_some(), tol)
}

/// Least-squares slope of `ln|ψ_n|` for `n` in `[N/4, 3N/4]`.
pub fn fitted_log_slope(amplitudes: &[Complex64]) -> f64 {
    let n = amplitudes.len();
    let pts: Vec<(f64, f64)> = (n.div_ceil(4)..=(3 * n) / 4)
        .filter(|&k| k < n && amplitudes[k].norm() > 0.0)
        .map(|k| (k as f64, amplitudes[k].norm().ln()))
        .collect();
    if pts.len() < 2 {
        return 0.0;
    }
    let m = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let (mx, my) = (sx / m, sy / m);
    let (num, den) = pts
        .iter()
        .fold((0.0, 0.0), |a, p| (a.0 + (p.0 - mx) * (p.1 - my), a.1 + (p.0 - mx) * (p.0 - mx)));
    num / den
}

/// Decay direction of a bulk mode: `Right` when `|Im θ| > |g|`, `Left`
/// when smaller, `Flat` within the θ tolerance. For `g > 0` the fitted
/// slope of `ln|ψ_n|` is ≈ `|g| − |Im θ|`; for `g < 0` it is mirrored.
pub fn localization_direction(mode: &ModeSolution, g: f64) -> LocalizationProfile {
    let ti = mode.root.theta.im.abs();
    let tol = theta_real_tolerance(g);
    let direction = if (ti - g.abs()).abs() <= tol {
        Direction::Flat
    } else if ti > g.abs() {
        Direction::Right
    } else {
        Direction::Left
    };
    LocalizationProfile {
        direction,
        fitted_slope: fitted_log_slope(&mode.amplitudes),
        theta_imag_abs: ti,
    }
}

/// `2 sinh(N|g|)`.
pub fn critical_v0_hn(n: usize, g: f64) -> f64 {
    2.0 * (n as f64 * g.abs()).sinh()
}

/// `2 min(1, |t'|) sinh(N|g|)`.
pub fn critical_v0_ssh(n: usize, g: f64, t_prime: f64) -> Result<f64> {
    if t_prime == 0.0 || !t_prime.is_finite() {
        return Err(Error::InvalidParameter("t' must be finite and nonzero".into()));
    }
    Ok(2.0 * t_prime.abs().min(1.0) * (n as f64 * g.abs()).sinh())
}

/// Final bisection bracket `[lower, upper]` of the exact transition: the
/// bulk is fully real (N − 1 real roots) at `upper` but not at `lower`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalBracket {
    pub lower: f64,
    pub upper: f64,
}

fn all_bulk_real(n: usize, g: f64, v0: f64) -> Result<bool> {
    let p = HnParams::new(n, g, v0)?;
    Ok(real_theta_bracketed_solve(&p)?.len() == n - 1)
}

/// Bisection for the smallest `V0` at which `N − 1` real roots exist,
/// narrowed to `rel_tol` relative width.
pub fn exact_critical_bracket(n: usize, g: f64, rel_tol: f64) -> Result<CriticalBracket> {
    if g == 0.0 || !g.is_finite() {
        return Err(Error::InvalidParameter("exact critical V0 needs finite g != 0".into()));
    }
    HnParams::new(n, g, 0.0)?;
    let g = g.abs();
    let mut hi = critical_v0_hn(n, g);
    if !all_bulk_real(n, g, hi)? {
        return Err(Error::NumericalFailure(format!(
            "bulk not fully real at V0 = 2sinh(Ng) = {hi} (N={n}, g={g})"
        )));
    }
    let mut lo = 0.0;
    while hi - lo > rel_tol * hi {
        let mid = 0.5 * (lo + hi);
        if all_bulk_real(n, g, mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(CriticalBracket { lower: lo, upper: hi })
}

/// Smallest `V0` with a fully real bulk spectrum, to 1e−9 relative.
pub fn exact_critical_v0(n: usize, g: f64) -> Result<f64> {
    Ok(exact_critical_bracket(n, g, 1e-9)?.upper)
}
