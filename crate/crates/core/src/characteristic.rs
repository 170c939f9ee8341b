//! Exact solution of the impurity Hatano-Nelson ring.
//!
//! With `ψ_n = α1 z1^n + α2 z2^n`, `z1,2 = e^{g ± iθ}`, the boundary rows
//! reduce to the secular equation in θ. Multiplying by `2iβ^{N+1}`
//! (`β = e^{iθ}`) and dividing out the trivial factor `β² − 1` leaves the
//! palindromic polynomial
//!
//! `Q(β) = β^{2N} + 1 − 2cosh(Ng)·β^N − V0·(β + β³ + … + β^{2N−1})`,
//!
//! whose `2N` roots come in reciprocal pairs `β, 1/β` (the same θ up to
//! sign). Roots are taken from the companion matrix, paired, polished by
//! Newton on the scaled secular function, and for large `Ng` merged with the
//! bracketed real solve and the bound-state solve.

use std::f64::consts::PI;

use log::warn;
use num_complex::Complex64;

use crate::dense::{dense_eigenvalues, eigen_residual, inverse_iteration, lex_cmp, vec_norm, CMatrix};
use crate::error::{Error, Result};
use crate::model::{build_hn_matrix, HnParams};
use crate::secular::{bound_state_theta, hn_terms, real_theta_bracketed_solve, secular_general, Secular, Terms};

/// Above this `N|g|` roots come from one-dimensional solvers instead of the
/// companion matrix.
pub const LARGE_NG: f64 = 25.0;

/// Largest relative secular defect accepted for a returned root.
pub const ROOT_RESIDUAL_TOL: f64 = 1e-8;

/// Relative tolerance on the product `β β'` of a reciprocal pair.
const PAIRING_TOL: f64 = 1e-3;

/// Residual bound `‖(H − ε)ψ‖ ≤ tol·‖H‖_F` for reconstructed modes.
pub const MODE_RESIDUAL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RootKind {
    Bulk,
    Bound,
    Nonphysical,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaRoot {
    /// Canonical representative: `Im θ > 0`, or real in `[0, π]`.
    pub theta: Complex64,
    pub beta: Complex64,
    /// Relative secular defect `|F| / Σ|terms|`.
    pub residual: f64,
    pub kind: RootKind,
}

impl ThetaRoot {
    pub fn is_real(&self) -> bool {
        self.theta.im == 0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeSolution {
    pub root: ThetaRoot,
    pub energy: Complex64,
    /// Coefficients of `z1^n` and `z2^n` (for a confluent root, of `z^n`
    /// and `n z^n`) in the normalised amplitudes.
    pub alpha1: Complex64,
    pub alpha2: Complex64,
    /// Unit-norm amplitudes; the largest component is real and positive.
    pub amplitudes: Vec<Complex64>,
    /// `‖(H − ε)ψ‖`.
    pub residual: f64,
    /// Whether inverse iteration was needed to meet the residual bound.
    pub refined: bool,
}

/// Imaginary parts below this are treated as exactly real.
pub fn theta_real_tolerance(g: f64) -> f64 {
    1e-8 * g.abs().max(1.0)
}

pub fn theta_to_energy(theta: Complex64) -> Complex64 {
    2.0 * theta.cos()
}

/// Coefficients `c_0 … c_{2N}` (ascending powers of β) of `Q(β)`.
pub fn characteristic_polynomial(p: &HnParams) -> Vec<Complex64> {
    let n = p.n;
    let mut q = vec![Complex64::new(0.0, 0.0); 2 * n + 1];
    q[0] += 1.0;
    q[2 * n] += 1.0;
    q[n] -= 2.0 * p.cosh_ng();
    for j in 0..n {
        q[2 * j + 1] -= p.v0;
    }
    q
}

pub(crate) fn wrap_pi(x: f64) -> f64 {
    let mut r = x.rem_euclid(2.0 * PI);
    if r > PI {
        r -= 2.0 * PI;
    }
    r
}

/// Canonical representative of `±θ + 2πm`.
pub(crate) fn canonical_theta(theta: Complex64, real_tol: f64) -> Complex64 {
    let mut t = if theta.im < 0.0 { -theta } else { theta };
    t.re = wrap_pi(t.re);
    if t.im.abs() <= real_tol {
        Complex64::new(t.re.abs(), 0.0)
    } else {
        t
    }
}

pub(crate) fn classify(theta: Complex64, v0: Complex64, real_tol: f64) -> RootKind {
    let near = |x: f64| (theta - Complex64::new(x, 0.0)).norm() <= real_tol;
    if near(0.0) || near(PI) {
        return RootKind::Nonphysical;
    }
    if v0 == Complex64::new(0.0, 0.0) || theta.im == 0.0 {
        return RootKind::Bulk;
    }
    let anchor = if v0.re >= 0.0 { 0.0 } else { PI };
    if (theta.re - anchor).abs() <= real_tol {
        RootKind::Bound
    } else {
        RootKind::Bulk
    }
}

/// Newton iteration on a scaled secular function; returns the iterate with
/// the smallest relative defect.
pub(crate) fn polish(mut eval: impl FnMut(Complex64) -> Secular, start: Complex64, iterations: usize) -> (Complex64, f64) {
    let mut t = start;
    let mut s = eval(t);
    let mut best = (t, s.relative());
    for _ in 0..iterations {
        if best.1 < 1e-15 || s.derivative.norm() == 0.0 {
            break;
        }
        let step = s.value / s.derivative;
        if !(step.re.is_finite() && step.im.is_finite()) {
            break;
        }
        t -= step;
        s = eval(t);
        let r = s.relative();
        if r < best.1 {
            best = (t, r);
        }
        if step.norm() <= 4.0 * f64::EPSILON * t.norm().max(1.0) {
            break;
        }
    }
    best
}

/// Roots of a monic polynomial (ascending coefficients) from its companion
/// matrix.
pub(crate) fn companion_roots(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    let deg = coeffs.len() - 1;
    let lead = coeffs[deg];
    let mut m = CMatrix::zeros(deg, deg);
    for j in 0..deg {
        m[(0, j)] = -coeffs[deg - 1 - j] / lead;
    }
    for i in 1..deg {
        m[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    dense_eigenvalues(&m)
}

/// Pairs each root with the partner closest to its reciprocal and returns
/// one θ per pair (the average of the two estimates).
pub(crate) fn pair_reciprocal(betas: &[Complex64]) -> Result<Vec<Complex64>> {
    let m = betas.len();
    let mut candidates = Vec::with_capacity(m * (m - 1) / 2);
    for i in 0..m {
        for j in i + 1..m {
            candidates.push(((betas[i] * betas[j]).ln().norm(), i, j));
        }
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut used = vec![false; m];
    let mut thetas = Vec::with_capacity(m / 2);
    for (cost, i, j) in candidates {
        if used[i] || used[j] {
            continue;
        }
        if !(cost <= PAIRING_TOL) {
            return Err(Error::NumericalFailure(format!(
                "no reciprocal partner for beta = {} (best log-distance {cost:.3e})",
                betas[i]
            )));
        }
        used[i] = true;
        used[j] = true;
        let ti = -Complex64::new(0.0, 1.0) * betas[i].ln();
        let mut tj = Complex64::new(0.0, 1.0) * betas[j].ln();
        tj.re = ti.re + wrap_pi(tj.re - ti.re);
        thetas.push((ti + tj) / 2.0);
    }
    if thetas.len() * 2 != m {
        return Err(Error::NumericalFailure("unpaired polynomial roots".into()));
    }
    Ok(thetas)
}

fn hn_eval(p: &HnParams) -> impl Fn(Complex64) -> Secular + '_ {
    let terms: Terms = hn_terms(p.v0);
    move |t| secular_general(p.n, p.g, t, terms)
}

fn make_root(p: &HnParams, theta: Complex64) -> ThetaRoot {
    let tol = theta_real_tolerance(p.g);
    let mut t = canonical_theta(theta, tol);
    let mut residual = hn_eval(p)(t).relative();
    if t.im == 0.0 && !hn_eval(p)(t).accepts(t, ROOT_RESIDUAL_TOL) {
        // Snapping to the real axis may cost accuracy; repolish along it.
        let (r, res) = polish(hn_eval(p), t, 8);
        t = Complex64::new(r.re, 0.0);
        residual = res.min(hn_eval(p)(t).relative());
    }
    ThetaRoot {
        theta: t,
        beta: (Complex64::new(0.0, 1.0) * t).exp(),
        residual,
        kind: classify(t, p.v0, tol),
    }
}

fn polynomial_thetas(p: &HnParams) -> Result<Vec<Complex64>> {
    let betas = companion_roots(&characteristic_polynomial(p))?;
    let seeds = pair_reciprocal(&betas)?;
    let tol = theta_real_tolerance(p.g);
    Ok(seeds
        .into_iter()
        .map(|s| canonical_theta(polish(hn_eval(p), canonical_theta(s, tol), 30).0, tol))
        .collect())
}

/// Complex root near `2πk/N + ig` from the exact rewriting of the secular
/// equation as a quadratic in `X = e^{-iNθ}`,
///
/// `(sinθ − iV0/2)X² − 2cosh(Ng)·sinθ·X + (sinθ + iV0/2) = 0`,
///
/// iterated as `θ = (2πk + i ln X₊(θ)) / N` with the larger root `X₊`. The
/// map contracts like `1/N`, and `cosh Ng` is kept factored out so nothing
/// overflows.
fn fixed_point_theta(p: &HnParams, k: usize) -> Option<Complex64> {
    let nf = p.n as f64;
    let ng = nf * p.g.abs();
    let log_cosh = ng + (0.5 + 0.5 * (-2.0 * ng).exp()).ln();
    let inv_c2 = (-2.0 * log_cosh).exp();
    let i = Complex64::new(0.0, 1.0);
    let phase = 2.0 * PI * k as f64;
    let mut t = Complex64::new(phase / nf, p.g.abs());
    for _ in 0..200 {
        let s = t.sin();
        let v = p.v0 / 2.0 * (-log_cosh).exp();
        let root = ((1.0 - inv_c2) * s * s - v * v).sqrt();
        let num = if (s + root).norm() >= (s - root).norm() { s + root } else { s - root };
        let den = s - i * p.v0 / 2.0;
        if num.norm() == 0.0 || den.norm() == 0.0 {
            return None;
        }
        // Re θ = (2πk − arg X)/N: pick the branch of arg X closest to the
        // current iterate so the sequence stays on root k.
        let mut log_x = log_cosh + (num / den).ln();
        let target = phase - nf * t.re;
        log_x.im += 2.0 * PI * ((target - log_x.im) / (2.0 * PI)).round();
        let next = (phase + i * log_x) / nf;
        if !(next.re.is_finite() && next.im.is_finite()) {
            return None;
        }
        let done = (next - t).norm() <= 1e-15 * next.norm().max(1.0);
        t = next;
        if done {
            break;
        }
    }
    Some(t)
}

/// Equal up to `Re θ → Re θ + 2π` (canonical forms meet at `Re θ = ±π`).
fn same_root(a: Complex64, b: Complex64) -> bool {
    let d = Complex64::new(wrap_pi(a.re - b.re), a.im - b.im);
    d.norm() <= 1e-7 * a.norm().max(b.norm()).max(1.0)
}

/// Root set for large `N|g|`, where the polynomial coefficients span too
/// many orders of magnitude: real roots by bracketing, the bound root by a
/// one-dimensional solve, and the complex roots from the fixed-point map.
fn large_ng_thetas(p: &HnParams) -> Vec<Complex64> {
    let tol = theta_real_tolerance(p.g);
    let mut accepted: Vec<Complex64> = Vec::with_capacity(p.n);
    if p.v0.im == 0.0 {
        if let Ok(real) = real_theta_bracketed_solve(p) {
            accepted.extend(real.into_iter().map(|t| Complex64::new(t, 0.0)));
        }
    }
    accepted.extend(bound_state_theta(p));
    for k in 0..p.n {
        let Some(seed) = fixed_point_theta(p, k) else { continue };
        let t = canonical_theta(polish(hn_eval(p), seed, 30).0, tol);
        // θ = 0 and π always solve F = 0; they are the factor β² − 1 that
        // the polynomial divides out.
        let trivial = t.norm() < 1e-6 || (t - PI).norm() < 1e-6;
        if trivial || !hn_eval(p)(t).accepts(t, ROOT_RESIDUAL_TOL) {
            continue;
        }
        if accepted.iter().all(|a| !same_root(*a, t)) {
            accepted.push(t);
        }
    }
    accepted
}

/// The `N` canonical roots of the secular equation, ordered by (Re θ, Im θ).
pub fn solve_thetas(p: &HnParams) -> Result<Vec<ThetaRoot>> {
    p.validate()?;
    let n = p.n;
    let large = n as f64 * p.g.abs() > LARGE_NG;
    let thetas: Vec<Complex64> = if p.v0 == Complex64::new(0.0, 0.0) {
        (0..n)
            .map(|k| Complex64::new(2.0 * PI * k as f64 / n as f64, p.g))
            .collect()
    } else if large {
        large_ng_thetas(p)
    } else {
        match polynomial_thetas(p) {
            Ok(t) => t,
            Err(e) => {
                warn!("polynomial route failed ({e}); retrying with one-dimensional solvers");
                large_ng_thetas(p)
            }
        }
    };
    if thetas.len() != n {
        return Err(Error::NumericalFailure(format!(
            "found {} of {n} roots (N={n}, g={}, V0={})",
            thetas.len(),
            p.g,
            p.v0
        )));
    }
    let mut roots: Vec<ThetaRoot> = thetas.into_iter().map(|t| make_root(p, t)).collect();
    roots.sort_by(|a, b| lex_cmp(&a.theta, &b.theta));
    // Band states can also sit on the bound state's line Re θ ∈ {0, π};
    // only the outermost one (extreme energy) is the bound state.
    let outermost = roots
        .iter()
        .enumerate()
        .filter(|(_, r)| r.kind == RootKind::Bound)
        .max_by(|a, b| a.1.theta.im.total_cmp(&b.1.theta.im))
        .map(|(i, _)| i);
    for (i, r) in roots.iter_mut().enumerate() {
        if r.kind == RootKind::Bound && Some(i) != outermost {
            r.kind = RootKind::Bulk;
        }
    }
    if let Some(worst) = roots.iter().find(|r| !hn_eval(p)(r.theta).accepts(r.theta, ROOT_RESIDUAL_TOL)) {
        return Err(Error::NumericalFailure(format!(
            "root theta = {} has relative secular residual {:.3e}",
            worst.theta, worst.residual
        )));
    }
    let bound = roots.iter().filter(|r| r.kind == RootKind::Bound).count();
    if p.v0 != Complex64::new(0.0, 0.0) && p.v0.im == 0.0 && bound != 1 {
        warn!("expected one bound root, found {bound} (N={n}, g={}, V0={})", p.g, p.v0);
    }
    Ok(roots)
}

/// Null vector of a 2×2 system built from one of its rows, or `None` when
/// the row is negligible.
fn row_null_vector(row: [Complex64; 2], scale: f64) -> Option<[Complex64; 2]> {
    let norm = (row[0].norm_sqr() + row[1].norm_sqr()).sqrt();
    if !(norm > 1e-13 * scale) {
        return None;
    }
    Some([row[1] / norm, -row[0] / norm])
}

/// Builds the eigenvector `c0·u + c1·v` from two bulk solutions `u, v` by
/// imposing the two boundary rows of `H − ε`. `which` picks the basis
/// vector when both boundary rows vanish (two-dimensional null space).
fn combine_boundary(
    h: &CMatrix,
    energy: Complex64,
    u: &[Complex64],
    v: &[Complex64],
    which: usize,
) -> ([Complex64; 2], Vec<Complex64>) {
    let n = u.len();
    let row_at = |x: &[Complex64], r: usize| -> Complex64 {
        (0..n).map(|j| h[(r, j)] * x[j]).sum::<Complex64>() - energy * x[r]
    };
    let rows = [[row_at(u, 0), row_at(v, 0)], [row_at(u, n - 1), row_at(v, n - 1)]];
    let hscale = h.max_abs() + energy.norm();
    let scale = hscale * (vec_norm(u) + vec_norm(v));
    let build = |c: [Complex64; 2]| -> Vec<Complex64> { u.iter().zip(v).map(|(a, b)| c[0] * a + c[1] * b).collect() };
    let mut best: Option<([Complex64; 2], Vec<Complex64>, f64)> = None;
    for row in rows {
        if let Some(c) = row_null_vector(row, scale) {
            let psi = build(c);
            let nrm = vec_norm(&psi);
            if nrm == 0.0 {
                continue;
            }
            let r = eigen_residual(h, energy, &psi) / nrm;
            if best.as_ref().is_none_or(|b| r < b.2) {
                best = Some((c, psi, r));
            }
        }
    }
    match best {
        Some((c, psi, _)) => (c, psi),
        None => {
            let one = Complex64::new(1.0, 0.0);
            let zero = Complex64::new(0.0, 0.0);
            let c = if which.is_multiple_of(2) { [one, zero] } else { [zero, one] };
            (c, build(c))
        }
    }
}

/// `(Hψ)_k / ψ_k`, the eigenvalue read off a single row.
pub(crate) fn row_energy(h: &CMatrix, psi: &[Complex64], k: usize) -> Option<Complex64> {
    if psi[k].norm() == 0.0 {
        return None;
    }
    let hk: Complex64 = h.row(k).iter().zip(psi).map(|(a, b)| a * b).sum();
    Some(hk / psi[k])
}

/// Scales to unit norm and rotates the largest component onto the positive
/// real axis; returns the applied factor.
pub(crate) fn fix_gauge(psi: &mut [Complex64]) -> Complex64 {
    let norm = vec_norm(psi);
    let mut k = 0;
    for (i, z) in psi.iter().enumerate() {
        if z.norm() > psi[k].norm() * (1.0 + 1e-12) {
            k = i;
        }
    }
    let phase = if psi[k].norm() > 0.0 { psi[k].conj() / psi[k].norm() } else { Complex64::new(1.0, 0.0) };
    let factor = phase / norm;
    psi.iter_mut().for_each(|z| *z *= factor);
    factor
}

pub(crate) fn reconstruct_in(h: &CMatrix, p: &HnParams, root: &ThetaRoot, which: usize) -> Result<ModeSolution> {
    let n = p.n;
    let theta = root.theta;
    let mut energy = theta_to_energy(theta);
    let n_ref = if p.g > 0.0 { (n - 1) as f64 } else { 0.0 };
    let envelope = |k: usize| (p.g * (k as f64 - n_ref)).exp();
    let (u, v): (Vec<Complex64>, Vec<Complex64>) = if root.kind == RootKind::Nonphysical {
        // Confluent root: z = ±e^g is a double root of the bulk recursion,
        // so the bulk solutions are z^n and n·z^n.
        let sign: f64 = if theta.re.abs() < PI / 2.0 { 1.0 } else { -1.0 };
        let u: Vec<Complex64> = (0..n)
            .map(|k| Complex64::new(envelope(k) * sign.powi(k as i32), 0.0))
            .collect();
        let v = u.iter().enumerate().map(|(k, z)| z * k as f64).collect();
        (u, v)
    } else {
        let beta = root.beta;
        (
            (0..n).map(|k| envelope(k) * beta.powu(k as u32)).collect(),
            (0..n).map(|k| envelope(k) * beta.powu((n - 1 - k) as u32)).collect(),
        )
    };
    let (c, mut psi) = combine_boundary(h, energy, &u, &v, which);
    if vec_norm(&psi) == 0.0 {
        return Err(Error::NumericalFailure(format!("vanishing eigenvector at theta = {theta}")));
    }
    if root.kind == RootKind::Bound {
        // 2cos(iy) amplifies the rounding of y by ~y; the impurity row gives
        // the same energy as V0 plus a small correction.
        energy = row_energy(h, &psi, 0).unwrap_or(energy);
    }
    let factor = fix_gauge(&mut psi);
    let back = factor * (-p.g * n_ref).exp();
    let alpha1 = c[0] * back;
    let alpha2 = if root.kind == RootKind::Nonphysical {
        c[1] * back
    } else {
        c[1] * back * root.beta.powu((n - 1) as u32)
    };
    let hnorm = h.frobenius_norm();
    let mut residual = eigen_residual(h, energy, &psi);
    let mut refined = false;
    if !(residual <= MODE_RESIDUAL_TOL * hnorm) {
        let mut improved = inverse_iteration(h, energy, &psi, 3)?;
        fix_gauge(&mut improved);
        let r = eigen_residual(h, energy, &improved);
        if r < residual {
            psi = improved;
            residual = r;
            refined = true;
        }
    }
    if !(residual <= MODE_RESIDUAL_TOL * hnorm) {
        return Err(Error::NumericalFailure(format!(
            "eigenvector residual {residual:.3e} exceeds bound at theta = {theta}"
        )));
    }
    Ok(ModeSolution {
        root: *root,
        energy,
        alpha1,
        alpha2,
        amplitudes: psi,
        residual,
        refined,
    })
}

/// Amplitudes `ψ_n = α1 z1^n + α2 z2^n` for one root.
pub fn reconstruct_eigenstate(p: &HnParams, root: &ThetaRoot) -> Result<ModeSolution> {
    if root.kind == RootKind::Nonphysical {
        return Err(Error::InvalidInput(format!("theta = {} is a nonphysical root", root.theta)));
    }
    let h = build_hn_matrix(p)?;
    reconstruct_in(&h, p, root, 0)
}

/// Full exact eigensystem, ordered lexicographically by energy.
pub fn solve_hn(p: &HnParams) -> Result<Vec<ModeSolution>> {
    let roots = solve_thetas(p)?;
    let h = build_hn_matrix(p)?;
    let mut modes = Vec::with_capacity(roots.len());
    for (i, root) in roots.iter().enumerate() {
        // Repeated roots (only at V0 = 0, g = 0) get independent vectors.
        let which = roots[..i].iter().filter(|r| (r.theta - root.theta).norm() < 1e-12).count();
        modes.push(reconstruct_in(&h, p, root, which)?);
    }
    modes.sort_by(|a, b| lex_cmp(&a.energy, &b.energy));
    Ok(modes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::{dense_eigensolve, match_spectra, vec_dot};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn energies(modes: &[ModeSolution]) -> Vec<Complex64> {
        modes.iter().map(|m| m.energy).collect()
    }

    fn horner(q: &[Complex64], x: Complex64) -> Complex64 {
        q.iter().rev().fold(c(0.0, 0.0), |acc, &a| acc * x + a)
    }

    #[test]
    fn polynomial_equals_cleared_secular_function() {
        // Q(β)·(β² − 1) = 2iβ^{N+1}·F(θ), evaluated independently.
        let p = HnParams::with_complex_v0(5, 0.3, c(2.0, -0.4)).unwrap();
        let q = characteristic_polynomial(&p);
        for t in [c(0.4, 0.1), c(2.0, -0.3), c(-1.2, 0.5)] {
            let beta = (c(0.0, 1.0) * t).exp();
            let lhs = horner(&q, beta) * (beta * beta - 1.0);
            let nf = p.n as f64;
            let f = t.sin() * (2.0 * (t * nf).cos() - 2.0 * p.cosh_ng()) - p.v0 * (t * nf).sin();
            let rhs = 2.0 * c(0.0, 1.0) * beta.powu(p.n as u32 + 1) * f;
            assert!((lhs - rhs).norm() < 1e-10 * rhs.norm());
        }
    }

    #[test]
    fn polynomial_is_palindromic() {
        let p = HnParams::new(9, 0.8, 3.3).unwrap();
        let q = characteristic_polynomial(&p);
        for j in 0..q.len() {
            assert_eq!(q[j], q[q.len() - 1 - j]);
        }
    }

    #[test]
    fn two_site_ring() {
        let p = HnParams::new(2, 0.0, 1.0).unwrap();
        let got = energies(&solve_hn(&p).unwrap());
        let s = 17f64.sqrt();
        let want = vec![c((1.0 - s) / 2.0, 0.0), c((1.0 + s) / 2.0, 0.0)];
        assert!(match_spectra(&got, &want).unwrap().max_distance < 1e-12);
    }

    #[test]
    fn pbc_limit() {
        let p = HnParams::new(14, 1.0, 0.0).unwrap();
        let roots = solve_thetas(&p).unwrap();
        assert_eq!(roots.len(), 14);
        for r in &roots {
            assert!((r.theta.im - 1.0).abs() < 1e-10);
            assert_eq!(r.kind, RootKind::Bulk);
        }
        for m in solve_hn(&p).unwrap() {
            for a in &m.amplitudes {
                assert!((a.norm() - 1.0 / 14f64.sqrt()).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn hermitian_degenerate_pbc() {
        let p = HnParams::new(6, 0.0, 0.0).unwrap();
        let modes = solve_hn(&p).unwrap();
        let h = build_hn_matrix(&p).unwrap();
        let want = dense_eigensolve(&h, false).unwrap().values;
        assert!(match_spectra(&energies(&modes), &want).unwrap().max_distance < 1e-12);
        // Degenerate pairs must be linearly independent.
        for i in 0..modes.len() {
            for j in i + 1..modes.len() {
                let ov = vec_dot(&modes[i].amplitudes, &modes[j].amplitudes).norm();
                assert!(ov < 1.0 - 1e-6, "modes {i} and {j} coincide");
            }
        }
    }

    #[test]
    fn matches_dense_oracle_with_eigenvectors() {
        let p = HnParams::new(6, 0.5, 10.0).unwrap();
        let modes = solve_hn(&p).unwrap();
        let h = build_hn_matrix(&p).unwrap();
        let dense = dense_eigensolve(&h, true).unwrap();
        let m = match_spectra(&energies(&modes), &dense.values).unwrap();
        assert!(m.max_distance < 1e-8);
        for (i, &j) in m.pairing.iter().enumerate() {
            let ov = vec_dot(&modes[i].amplitudes, &dense.vector(j).unwrap()).norm();
            assert!(ov > 1.0 - 1e-6, "mode {i}: overlap {ov}");
        }
    }

    #[test]
    fn strong_impurity_real_spectrum() {
        let p = HnParams::new(14, 1.0, 2e6).unwrap();
        let roots = solve_thetas(&p).unwrap();
        assert_eq!(roots.iter().filter(|r| r.kind == RootKind::Bound).count(), 1);
        let bulk: Vec<_> = roots.iter().filter(|r| r.kind == RootKind::Bulk).collect();
        assert_eq!(bulk.len(), 13);
        assert!(bulk.iter().all(|r| r.is_real()));
        let bound = roots.iter().find(|r| r.kind == RootKind::Bound).unwrap();
        assert_eq!(bound.theta.re, 0.0);
    }

    #[test]
    fn trace_and_conjugation() {
        for (n, g, v0) in [(14, 1.0, 7e5), (10, 0.7, 50.0), (9, -0.4, 3.0)] {
            let p = HnParams::new(n, g, v0).unwrap();
            let e = energies(&solve_hn(&p).unwrap());
            let sum: Complex64 = e.iter().sum();
            assert!((sum - v0).norm() <= 1e-6 * v0.abs());
            let conj: Vec<_> = e.iter().map(|z| z.conj()).collect();
            assert!(match_spectra(&e, &conj).unwrap().max_distance <= 1e-7 * v0.max(1.0));
        }
    }

    #[test]
    fn large_ng_uses_one_dimensional_solvers() {
        for (n, g, v0) in [(40, 1.5, 0.5), (40, 1.0, 2.35e13), (33, -1.5, 3.1e21)] {
            let p = HnParams::new(n, g, v0).unwrap();
            let modes = solve_hn(&p).unwrap();
            assert_eq!(modes.len(), n);
            let sum: Complex64 = modes.iter().map(|m| m.energy).sum();
            assert!((sum - v0).norm() <= 1e-6 * v0.max(1.0), "N={n} g={g} V0={v0}");
            assert!(modes.iter().all(|m| m.root.residual <= ROOT_RESIDUAL_TOL));
        }
    }

    #[test]
    fn tangent_double_root_is_counted_twice() {
        // N ≡ 3 (mod 4) with large Ng puts the f1 minimum at π/2, so
        // V0 = 2sinh(Ng) is exactly tangent there.
        let p = HnParams::new(27, 1.0, 2.0 * 27f64.sinh()).unwrap();
        let roots = solve_thetas(&p).unwrap();
        assert_eq!(roots.len(), 27);
        assert_eq!(roots.iter().filter(|r| r.is_real()).count(), 26);
    }

    #[test]
    fn steep_roots_near_poles_are_accepted() {
        // Weak g and large |V0| press real roots against jπ/N, where one ulp
        // in θ already leaves a relative defect above the fixed tolerance.
        for (n, g, v0) in [(46, -0.015677356716933488, 93507942.44572617), (43, 0.054219994598636134, -3491137.2530529117)] {
            let p = HnParams::new(n, g, v0).unwrap();
            let modes = solve_hn(&p).unwrap();
            let dense = dense_eigenvalues(&build_hn_matrix(&p).unwrap()).unwrap();
            let d = match_spectra(&energies(&modes), &dense).unwrap().max_distance;
            assert!(d <= 1e-7 * v0.abs(), "N={n}: {d}");
        }
    }

    #[test]
    fn nonphysical_root_is_rejected_by_reconstruction() {
        let p = HnParams::new(4, 0.2, 1.0).unwrap();
        let root = ThetaRoot {
            theta: c(0.0, 0.0),
            beta: c(1.0, 0.0),
            residual: 0.0,
            kind: RootKind::Nonphysical,
        };
        assert!(matches!(reconstruct_eigenstate(&p, &root), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn canonical_forms() {
        let tol = 1e-8;
        assert_eq!(canonical_theta(c(-0.5, 0.0), tol), c(0.5, 0.0));
        assert_eq!(canonical_theta(c(0.5, -1.0), tol), c(-0.5, 1.0));
        let t = canonical_theta(c(0.5 + 2.0 * PI, 1.0), tol);
        assert!((t - c(0.5, 1.0)).norm() < 1e-14);
        assert!(theta_to_energy(c(PI / 2.0, 0.0)).norm() < 1e-15);
    }
}
