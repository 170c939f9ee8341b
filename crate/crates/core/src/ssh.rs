//! The impurity SSH ring reduced to an effective HN ring.
//!
//! Eliminating the B sublattice turns the A amplitudes into an HN chain with
//! energy `(E² − 1 − t'²)/t'` and impurity `E·V0/t'`, so every SSH mode is a
//! root of
//!
//! `t'·sinθ·(2cos Nθ − 2cosh Ng) − E·V0·sin Nθ = 0`,  `E² = 1 + t'² + 2t'cosθ`.

use std::f64::consts::PI;

use log::warn;
use num_complex::Complex64;

use crate::characteristic::{
    canonical_theta, classify, companion_roots, fix_gauge, pair_reciprocal, polish, reconstruct_in,
    theta_real_tolerance, ThetaRoot, ROOT_RESIDUAL_TOL,
};
use crate::dense::{dense_eigenvalues, eigen_residual, inverse_iteration, lex_cmp, normalize, CMatrix};
use crate::error::{Error, Result};
use crate::model::{build_hn_matrix, build_ssh_matrix, Branch, HnParams, SshParams};
use crate::observables::{bound_state_index, critical_v0_ssh};
use crate::roots::{bisect_signed, golden_section_min};
use crate::secular::{secular_general, Secular, Terms};

/// Residual bound on returned modes, relative to `‖H‖_F`.
pub const SSH_MODE_RESIDUAL_TOL: f64 = 1e-7;

/// `|E|` below this (in units of `1 + |t'|`) is treated as an exact zero
/// mode, where the B-sublattice recovery formula is singular.
pub const ZERO_MODE_TOL: f64 = 1e-8;

/// A gap counts as closed when the refined minimum of `|E|` is below this.
pub const GAP_CLOSING_TOL: f64 = 1e-2;

const SEED_ITERATIONS: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeSource {
    /// Root of the squared secular polynomial, polished on the exact equation.
    Secular,
    /// Seeded from a dense eigenvalue, then polished on the exact equation.
    OracleSeeded,
    /// Exact zero mode taken from the null space of the dense matrix.
    NullSpace,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SshMode {
    pub theta: Complex64,
    pub branch: Branch,
    pub energy: Complex64,
    pub amplitudes_a: Vec<Complex64>,
    pub amplitudes_b: Vec<Complex64>,
    /// `‖(H − E)ψ‖` for the interleaved, unit-norm vector.
    pub residual: f64,
    pub source: ModeSource,
}

impl SshMode {
    /// Interleaved amplitudes in the `(0A, 0B, 1A, 1B, ...)` basis.
    pub fn amplitudes(&self) -> Vec<Complex64> {
        self.amplitudes_a
            .iter()
            .zip(&self.amplitudes_b)
            .flat_map(|(a, b)| [*a, *b])
            .collect()
    }
}

/// Effective HN impurity and energy `(E·V0/t', (E² − t'² − 1)/t')`.
pub fn reduce_ssh_to_hn(energy: Complex64, p: &SshParams) -> Result<(Complex64, Complex64)> {
    if p.t_prime == 0.0 || !p.t_prime.is_finite() {
        return Err(Error::InvalidParameter("t' must be finite and nonzero".into()));
    }
    let tp = p.t_prime;
    Ok((energy * p.v0 / tp, (energy * energy - tp * tp - 1.0) / tp))
}

/// `branch · sqrt(1 + t'² + 2t'cosθ)` with the principal square root.
pub fn ssh_energy_from_theta(theta: Complex64, t_prime: f64, branch: Branch) -> Complex64 {
    branch.sign() * (1.0 + t_prime * t_prime + 2.0 * t_prime * theta.cos()).sqrt()
}

fn branch_of(energy: Complex64, theta: Complex64, t_prime: f64) -> Branch {
    let plus = ssh_energy_from_theta(theta, t_prime, Branch::Plus);
    if (energy - plus).norm() <= (energy + plus).norm() {
        Branch::Plus
    } else {
        Branch::Minus
    }
}

/// Scaled SSH secular function at θ with the energy `E` held on a given
/// branch; the derivative includes `dE/dθ = −t'sinθ/E`.
pub fn ssh_secular_scaled(p: &SshParams, theta: Complex64, energy: Complex64) -> Secular {
    let de = if energy.norm() > 0.0 {
        -p.t_prime * theta.sin() / energy
    } else {
        Complex64::new(0.0, 0.0)
    };
    let terms = Terms {
        lead: p.t_prime,
        coupling: energy * p.v0,
        coupling_derivative: de * p.v0,
    };
    secular_general(p.n, p.g, theta, terms)
}

/// Coefficients (ascending powers of β, degree 4N) of the squared secular
/// equation with the factor `(β² − 1)²` removed:
///
/// `t'²(β^{2N} + 1 − 2Cβ^N)² − V0²·β(t' + (1 + t'²)β + t'β²)·S(β)²`,
/// `S(β) = 1 + β² + … + β^{2N−2}`.
pub fn ssh_squared_polynomial(p: &SshParams) -> Vec<Complex64> {
    let n = p.n;
    let tp = p.t_prime;
    let zero = Complex64::new(0.0, 0.0);
    let mut q = vec![zero; 2 * n + 1];
    q[0] += 1.0;
    q[2 * n] += 1.0;
    q[n] -= 2.0 * p.cosh_ng();
    let mut s = vec![zero; 2 * n - 1];
    for j in 0..n {
        s[2 * j] += 1.0;
    }
    let s2 = convolve(&s, &s);
    let quad = [zero, Complex64::new(tp, 0.0), Complex64::new(1.0 + tp * tp, 0.0), Complex64::new(tp, 0.0)];
    let coupling = convolve(&quad, &s2);
    let mut r: Vec<Complex64> = convolve(&q, &q).into_iter().map(|c| c * tp * tp).collect();
    let v2 = p.v0 * p.v0;
    for (k, c) in coupling.into_iter().enumerate() {
        r[k] -= v2 * c;
    }
    r
}

fn convolve(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    theta: Complex64,
    energy: Complex64,
    residual: f64,
}

/// Newton polish on the unsquared equation, keeping `E` continuous along
/// the iteration, then re-picking the branch with the smaller defect.
fn polish_on_branch(p: &SshParams, theta: Complex64, energy: Complex64) -> Candidate {
    let tp = p.t_prime;
    let mut prev = energy;
    let eval = |t: Complex64| {
        let mut e = ssh_energy_from_theta(t, tp, Branch::Plus);
        if (e + prev).norm() < (e - prev).norm() {
            e = -e;
        }
        prev = e;
        ssh_secular_scaled(p, t, e)
    };
    let tol = theta_real_tolerance(p.g);
    let (t, _) = polish(eval, theta, SEED_ITERATIONS);
    let t = canonical_theta(t, tol);
    let cand = best_branch(p, t);
    // Newton in θ can wander to a neighbouring root, or stall near the
    // branch point E = 0; also polish in E and keep the converged result
    // that stays closest to the seed.
    let alt = polish_in_energy(p, energy);
    let converged = |c: &Candidate| ssh_secular_scaled(p, c.theta, c.energy).accepts(c.theta, ROOT_RESIDUAL_TOL);
    match (converged(&cand), converged(&alt)) {
        (true, true) => {
            if (alt.energy - energy).norm() < (cand.energy - energy).norm() {
                alt
            } else {
                cand
            }
        }
        (true, false) => cand,
        (false, true) => alt,
        (false, false) => {
            if alt.residual < cand.residual || !cand.residual.is_finite() {
                alt
            } else {
                cand
            }
        }
    }
}

/// `arccos z` as `−i·ln(z ± sqrt(z² − 1))`, taking the larger of the two
/// products so that nothing cancels for large `|z|` (deep bound states).
pub(crate) fn stable_acos(z: Complex64) -> Complex64 {
    let w = ((z - 1.0) * (z + 1.0)).sqrt();
    let u = if (z + w).norm() >= (z - w).norm() { z + w } else { z - w };
    -Complex64::new(0.0, 1.0) * u.ln()
}

fn theta_of_energy(p: &SshParams, energy: Complex64) -> Complex64 {
    let tp = p.t_prime;
    canonical_theta(stable_acos((energy * energy - 1.0 - tp * tp) / (2.0 * tp)), theta_real_tolerance(p.g))
}

/// Newton iteration in `E` instead of θ. Near `E = 0` the map θ ↦ E has a
/// square-root branch point, which stalls Newton in θ but is harmless in `E`.
fn polish_in_energy(p: &SshParams, energy: Complex64) -> Candidate {
    let tp = p.t_prime;
    let sin_n = |t: Complex64| {
        let probe = Terms {
            lead: 0.0,
            coupling: Complex64::new(-1.0, 0.0),
            coupling_derivative: Complex64::new(0.0, 0.0),
        };
        secular_general(p.n, p.g, t, probe).value
    };
    let mut e = energy;
    let mut best: Option<Candidate> = None;
    for _ in 0..SEED_ITERATIONS {
        let t = theta_of_energy(p, e);
        let fixed = Terms {
            lead: tp,
            coupling: e * p.v0,
            coupling_derivative: Complex64::new(0.0, 0.0),
        };
        let s = secular_general(p.n, p.g, t, fixed);
        let r = s.relative();
        if best.is_none_or(|b| r < b.residual || !b.residual.is_finite()) {
            best = Some(Candidate { theta: t, energy: e, residual: r });
        }
        if r < 1e-15 {
            break;
        }
        let dtheta = -e / (tp * t.sin());
        let df = s.derivative * dtheta - p.v0 * sin_n(t);
        let step = s.value / df;
        if !(step.re.is_finite() && step.im.is_finite()) || step.norm() <= 4.0 * f64::EPSILON * e.norm() {
            break;
        }
        e -= step;
    }
    best.expect("at least one iteration")
}

fn best_branch(p: &SshParams, theta: Complex64) -> Candidate {
    let plus = ssh_energy_from_theta(theta, p.t_prime, Branch::Plus);
    let rp = ssh_secular_scaled(p, theta, plus).relative();
    let rm = ssh_secular_scaled(p, theta, -plus).relative();
    if rp <= rm {
        Candidate { theta, energy: plus, residual: rp }
    } else {
        Candidate { theta, energy: -plus, residual: rm }
    }
}

fn same_theta(a: Complex64, b: Complex64) -> bool {
    (a - b).norm() <= 1e-7 * a.norm().max(1.0)
}

/// Gives the second of two coincident roots the opposite branch when that
/// branch also satisfies the equation (both `±E` share one θ).
fn split_coincident(p: &SshParams, cands: &mut [Candidate]) {
    for i in 0..cands.len() {
        for j in 0..i {
            if same_theta(cands[i].theta, cands[j].theta) && (cands[i].energy - cands[j].energy).norm() <= 1e-9 * (1.0 + cands[j].energy.norm()) {
                let flipped = -cands[j].energy;
                let r = ssh_secular_scaled(p, cands[i].theta, flipped).relative();
                if r <= ROOT_RESIDUAL_TOL {
                    cands[i].energy = flipped;
                    cands[i].residual = r;
                }
            }
        }
    }
}

fn check_candidates(p: &SshParams, cands: &[Candidate]) -> Result<()> {
    if cands.len() != 2 * p.n {
        return Err(Error::NumericalFailure(format!("{} SSH roots, expected {}", cands.len(), 2 * p.n)));
    }
    for (i, c) in cands.iter().enumerate() {
        if !ssh_secular_scaled(p, c.theta, c.energy).accepts(c.theta, ROOT_RESIDUAL_TOL) {
            return Err(Error::NumericalFailure(format!(
                "SSH root theta = {} has relative residual {:.3e}",
                c.theta, c.residual
            )));
        }
        for d in &cands[..i] {
            if same_theta(c.theta, d.theta) && (c.energy - d.energy).norm() <= 1e-9 * (1.0 + c.energy.norm()) {
                return Err(Error::NumericalFailure(format!("duplicate SSH root at theta = {}", c.theta)));
            }
        }
    }
    Ok(())
}

fn polynomial_candidates(p: &SshParams) -> Result<Vec<Candidate>> {
    let betas = companion_roots(&ssh_squared_polynomial(p))?;
    let seeds = pair_reciprocal(&betas)?;
    let tol = theta_real_tolerance(p.g);
    let mut cands: Vec<Candidate> = seeds
        .into_iter()
        .map(|s| {
            let t = canonical_theta(s, tol);
            let start = best_branch(p, t);
            polish_on_branch(p, t, start.energy)
        })
        .collect();
    split_coincident(p, &mut cands);
    check_candidates(p, &cands)?;
    Ok(cands)
}

fn oracle_candidates(p: &SshParams, h: &CMatrix) -> Result<Vec<Candidate>> {
    let mut cands: Vec<Candidate> = dense_eigenvalues(h)?
        .into_iter()
        .map(|e| {
            let t = theta_of_energy(p, e);
            let mut c = polish_on_branch(p, t, e);
            // Keep the seed's sign when both branches fit equally well.
            let other = ssh_secular_scaled(p, c.theta, -c.energy).relative();
            if other <= ROOT_RESIDUAL_TOL && (-c.energy - e).norm() < (c.energy - e).norm() {
                c.energy = -c.energy;
                c.residual = other;
            }
            c
        })
        .collect();
    split_coincident(p, &mut cands);
    match check_candidates(p, &cands) {
        Ok(()) => Ok(cands),
        Err(err) if p.v0.im == 0.0 => {
            // At huge V0 the dense eigenvalues carry absolute errors ~ε·V0,
            // and neighbouring band seeds can polish onto one root. Keep the
            // complex roots and take the real ones from a sign-change scan.
            warn!("dense seeding inconsistent ({err}); scanning the real θ axis");
            let mut merged: Vec<Candidate> = Vec::new();
            for c in cands.into_iter().filter(|c| c.theta.im != 0.0 && ssh_secular_scaled(p, c.theta, c.energy).accepts(c.theta, ROOT_RESIDUAL_TOL)) {
                if !merged.iter().any(|d| same_theta(c.theta, d.theta) && (c.energy - d.energy).norm() <= 1e-9 * (1.0 + c.energy.norm())) {
                    merged.push(c);
                }
            }
            merged.extend(real_axis_candidates(p));
            check_candidates(p, &merged)?;
            Ok(merged)
        }
        Err(err) => Err(err),
    }
}

/// Real-θ roots on both branches from sign changes of the (real) secular
/// function on a fine grid over `(0, π)`, refined by bisection. Local
/// extrema of `|F|` are refined too, so close root pairs that fall between
/// two samples (or touch zero tangentially) are not lost.
fn real_axis_candidates(p: &SshParams) -> Vec<Candidate> {
    let samples = 64 * p.n;
    let step = PI / samples as f64;
    let mut roots = Vec::new();
    for branch in [Branch::Plus, Branch::Minus] {
        let eval = |t: f64| {
            let theta = Complex64::new(t, 0.0);
            ssh_secular_scaled(p, theta, ssh_energy_from_theta(theta, p.t_prime, branch))
        };
        let f = |t: f64| eval(t).value.re;
        let pts: Vec<(f64, f64)> = (0..samples)
            .map(|j| {
                let t = (j as f64 + 0.5) * step;
                (t, f(t))
            })
            .collect();
        for j in 1..samples {
            let (a, fa) = pts[j - 1];
            let (b, fb) = pts[j];
            if fb == 0.0 {
                roots.push((b, branch));
            } else if fa != 0.0 && (fa < 0.0) != (fb < 0.0) {
                roots.push((bisect_signed(f, a, b, fa < 0.0), branch));
            }
            if j + 1 < samples {
                let fc = pts[j + 1].1;
                let same_sign = (fa < 0.0) == (fb < 0.0) && (fb < 0.0) == (fc < 0.0);
                if same_sign && fb.abs() < fa.abs() && fb.abs() <= fc.abs() {
                    let sign = fb.signum();
                    let (tm, vm) = golden_section_min(|t| sign * f(t), a, pts[j + 1].0, 1e-15);
                    if vm < 0.0 {
                        roots.push((bisect_signed(f, a, tm, sign < 0.0), branch));
                        roots.push((bisect_signed(f, tm, pts[j + 1].0, sign >= 0.0), branch));
                    } else if eval(tm).relative() <= ROOT_RESIDUAL_TOL {
                        roots.push((tm, branch));
                        roots.push((tm, branch));
                    }
                }
            }
        }
    }
    roots
        .into_iter()
        .map(|(t, branch)| {
            let theta = Complex64::new(t, 0.0);
            let energy = ssh_energy_from_theta(theta, p.t_prime, branch);
            Candidate {
                theta,
                energy,
                residual: ssh_secular_scaled(p, theta, energy).relative(),
            }
        })
        .collect()
}

/// For real `V0`, roots with `Re θ` at 0 or π up to rounding give real
/// energies; rounding in `Re θ` is amplified by `sinh(Im θ)` in `cos θ`, so
/// such roots are snapped and their energy recomputed as a real number.
fn snap_to_axis_lines(p: &SshParams, cands: Vec<Candidate>) -> Vec<Candidate> {
    let tol = theta_real_tolerance(p.g);
    cands
        .into_iter()
        .map(|c| {
            if c.theta.im == 0.0 {
                return c;
            }
            let anchor = if c.theta.re.abs() <= tol {
                0.0
            } else if (c.theta.re - PI).abs() <= tol {
                PI
            } else {
                return c;
            };
            let cos = if anchor == 0.0 { c.theta.im.cosh() } else { -c.theta.im.cosh() };
            let e2 = 1.0 + p.t_prime * p.t_prime + 2.0 * p.t_prime * cos;
            if e2 < 0.0 {
                return c;
            }
            let energy = Complex64::new(e2.sqrt().copysign(c.energy.re), 0.0);
            let theta = Complex64::new(anchor, c.theta.im);
            let residual = ssh_secular_scaled(p, theta, energy).relative();
            if residual <= ROOT_RESIDUAL_TOL.max(c.residual) {
                Candidate { theta, energy, residual }
            } else {
                c
            }
        })
        .collect()
}

fn pbc_candidates(p: &SshParams) -> Vec<Candidate> {
    let tol = theta_real_tolerance(p.g);
    (0..p.n)
        .flat_map(|k| {
            let t = canonical_theta(Complex64::new(2.0 * PI * k as f64 / p.n as f64, p.g), tol);
            let e = ssh_energy_from_theta(t, p.t_prime, Branch::Plus);
            [e, -e].map(|energy| Candidate { theta: t, energy, residual: 0.0 })
        })
        .collect()
}

fn interleave(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    a.iter().zip(b).flat_map(|(x, y)| [*x, *y]).collect()
}

fn split(psi: &[Complex64]) -> (Vec<Complex64>, Vec<Complex64>) {
    (psi.iter().step_by(2).copied().collect(), psi.iter().skip(1).step_by(2).copied().collect())
}

fn null_space_mode(h: &CMatrix, cand: &Candidate, which: usize) -> Result<SshMode> {
    let dim = h.rows();
    // Deterministic, non-symmetric start so that repeated zero modes pick
    // up different components.
    let start: Vec<Complex64> = (0..dim)
        .map(|k| Complex64::new(1.0 + 0.1 * k as f64, 0.05 * ((k + which) % 3) as f64))
        .collect();
    let mut psi = inverse_iteration(h, cand.energy, &start, 4)?;
    fix_gauge(&mut psi);
    let residual = eigen_residual(h, cand.energy, &psi);
    let (a, b) = split(&psi);
    Ok(SshMode {
        theta: cand.theta,
        branch: Branch::Plus,
        energy: cand.energy,
        amplitudes_a: a,
        amplitudes_b: b,
        residual,
        source: ModeSource::NullSpace,
    })
}

fn reconstruct_mode(p: &SshParams, h: &CMatrix, cand: &Candidate, which: usize, source: ModeSource) -> Result<SshMode> {
    let n = p.n;
    let tp = p.t_prime;
    let e = cand.energy;
    let scale = 1.0 + tp.abs();
    if e.norm() <= ZERO_MODE_TOL * scale {
        return null_space_mode(h, cand, which);
    }
    let (veff, _) = reduce_ssh_to_hn(e, p)?;
    let hp = HnParams::with_complex_v0(n, p.g, veff)?;
    let tol = theta_real_tolerance(p.g);
    let root = ThetaRoot {
        theta: cand.theta,
        beta: (Complex64::new(0.0, 1.0) * cand.theta).exp(),
        residual: cand.residual,
        kind: classify(cand.theta, veff, tol),
    };
    let hn = build_hn_matrix(&hp)?;
    let hnorm = h.frobenius_norm();
    let mut psi = match reconstruct_in(&hn, &hp, &root, which) {
        Ok(mode) => {
            let a = mode.amplitudes;
            let eg = p.g.exp();
            let b: Vec<Complex64> = (0..n).map(|k| (eg * a[k] + tp * a[(k + 1) % n]) / e).collect();
            interleave(&a, &b)
        }
        Err(err) => {
            warn!("effective HN reconstruction failed ({err}); using inverse iteration");
            vec![Complex64::new(0.0, 0.0); 2 * n]
        }
    };
    if normalize(&mut psi) == 0.0 {
        psi = inverse_iteration(h, e, &[], 4)?;
    }
    fix_gauge(&mut psi);
    let mut residual = eigen_residual(h, e, &psi);
    if !(residual <= 1e-8 * hnorm) {
        let mut improved = inverse_iteration(h, e, &psi, 3)?;
        fix_gauge(&mut improved);
        let r = eigen_residual(h, e, &improved);
        if r < residual || !residual.is_finite() {
            psi = improved;
            residual = r;
        }
    }
    if !(residual <= SSH_MODE_RESIDUAL_TOL * hnorm) {
        return Err(Error::NumericalFailure(format!(
            "SSH eigenvector residual {residual:.3e} exceeds bound at theta = {}",
            cand.theta
        )));
    }
    let (a, b) = split(&psi);
    Ok(SshMode {
        theta: cand.theta,
        branch: branch_of(e, cand.theta, tp),
        energy: e,
        amplitudes_a: a,
        amplitudes_b: b,
        residual,
        source,
    })
}

/// All `2N` modes of the impurity SSH ring, ordered lexicographically by
/// energy. Roots come from the squared secular polynomial; where that route
/// is unreliable (large `Ng`, or a failed consistency check) the roots are
/// seeded from dense eigenvalues instead. Either way every returned θ is a
/// polished root of the exact, unsquared equation.
pub fn solve_ssh_exact(p: &SshParams) -> Result<Vec<SshMode>> {
    p.validate()?;
    let h = build_ssh_matrix(p)?.into_inner();
    let large = p.n as f64 * p.g.abs() > SSH_LARGE_NG;
    let (cands, source) = if p.v0 == Complex64::new(0.0, 0.0) {
        (pbc_candidates(p), ModeSource::Secular)
    } else if large {
        (oracle_candidates(p, &h)?, ModeSource::OracleSeeded)
    } else {
        match polynomial_candidates(p) {
            Ok(c) => (c, ModeSource::Secular),
            Err(e) => {
                warn!("squared-polynomial route failed ({e}); seeding from dense eigenvalues");
                (oracle_candidates(p, &h)?, ModeSource::OracleSeeded)
            }
        }
    };
    let cands = if p.v0.im == 0.0 {
        let snapped = snap_to_axis_lines(p, cands.clone());
        if check_candidates(p, &snapped).is_ok() {
            snapped
        } else {
            cands
        }
    } else {
        cands
    };
    let mut modes = Vec::with_capacity(cands.len());
    for (i, c) in cands.iter().enumerate() {
        let which = cands[..i]
            .iter()
            .filter(|d| same_theta(d.theta, c.theta) && (d.energy - c.energy).norm() < 1e-12 * (1.0 + c.energy.norm()))
            .count()
            + cands[..i].iter().filter(|d| d.energy.norm() <= ZERO_MODE_TOL * (1.0 + p.t_prime.abs())).count();
        modes.push(reconstruct_mode(p, &h, c, which, source)?);
    }
    modes.sort_by(|a, b| lex_cmp(&a.energy, &b.energy));
    Ok(modes)
}

/// Above this `N|g|` the squared polynomial is too badly scaled to seed the
/// roots and dense eigenvalues are used as seeds.
pub const SSH_LARGE_NG: f64 = 12.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapScanRow {
    pub t_prime: f64,
    pub min_abs_e: f64,
    pub closing: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapScan {
    /// One row per grid point, in grid order.
    pub rows: Vec<GapScanRow>,
    /// Golden-section refinements of the interior local grid minima.
    pub minima: Vec<GapScanRow>,
}

/// Smallest `|E|` among the band states at one `t'` (dense oracle). The
/// bound state is excluded; in the strong-impurity regime the chiral zero
/// mode of the remaining open chain is excluded as well.
pub fn min_abs_energy(p: &SshParams, t_prime: f64) -> Result<f64> {
    let q = p.set_t_prime(t_prime);
    q.validate()?;
    let values = dense_eigenvalues(&*build_ssh_matrix(&q)?)?;
    let mut mags: Vec<(usize, f64)> = values.iter().map(|e| e.norm()).enumerate().collect();
    if let Some(b) = bound_state_index(&values, q.v0) {
        mags.retain(|&(i, _)| i != b);
    }
    mags.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    let strong = q.v0.norm() > critical_v0_ssh(q.n, q.g, t_prime)?;
    let skip = usize::from(strong);
    mags.get(skip)
        .map(|m| m.1)
        .ok_or_else(|| Error::InvalidInput("too few modes for a gap scan".into()))
}

/// Golden-section refinement of every interior local minimum of a scanned
/// `|E|` curve; `values[i]` belongs to `grid[i]`.
pub fn refine_gap_minima(p: &SshParams, grid: &[f64], values: &[f64]) -> Result<Vec<GapScanRow>> {
    let mut out = Vec::new();
    for i in 1..grid.len().saturating_sub(1) {
        if values[i] <= values[i - 1] && values[i] < values[i + 1] {
            let mut failure = None;
            let (t, v) = golden_section_min(
                |t| {
                    min_abs_energy(p, t).unwrap_or_else(|e| {
                        failure.get_or_insert(e);
                        f64::INFINITY
                    })
                },
                grid[i - 1],
                grid[i + 1],
                1e-10,
            );
            if let Some(e) = failure {
                return Err(e);
            }
            let (t, v) = if v <= values[i] { (t, v) } else { (grid[i], values[i]) };
            out.push(GapScanRow {
                t_prime: t,
                min_abs_e: v,
                closing: v < GAP_CLOSING_TOL,
            });
        }
    }
    Ok(out)
}

/// Scan of `min |E|` over `t'` with refined minima. A grid row is flagged as
/// closing when its own value, or the refined minimum it brackets, is below
/// [`GAP_CLOSING_TOL`].
pub fn gap_scan(p: &SshParams, grid: &[f64]) -> Result<GapScan> {
    if grid.is_empty() {
        return Err(Error::InvalidInput("empty t' grid".into()));
    }
    let values = grid.iter().map(|&t| min_abs_energy(p, t)).collect::<Result<Vec<_>>>()?;
    assemble_gap_scan(p, grid, &values)
}

/// Builds a [`GapScan`] from precomputed grid values (e.g. evaluated in
/// parallel by the caller).
pub fn assemble_gap_scan(p: &SshParams, grid: &[f64], values: &[f64]) -> Result<GapScan> {
    if grid.len() != values.len() {
        return Err(Error::InvalidInput("grid and values differ in length".into()));
    }
    let minima = refine_gap_minima(p, grid, values)?;
    let rows = grid
        .iter()
        .zip(values)
        .enumerate()
        .map(|(i, (&t, &v))| {
            let near = minima.iter().any(|m| {
                m.closing && i > 0 && i + 1 < grid.len() && m.t_prime >= grid[i - 1] && m.t_prime <= grid[i + 1]
                    && v <= values[i - 1].min(values[i + 1])
            });
            GapScanRow {
                t_prime: t,
                min_abs_e: v,
                closing: v < GAP_CLOSING_TOL || near,
            }
        })
        .collect();
    Ok(GapScan { rows, minima })
}
