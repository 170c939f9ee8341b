//! Spectral topology: PBC winding numbers, the Green's-function response
//! `ν = ∂ln G/∂ln V0`, the impurity strength at which a reference energy
//! joins the spectrum, and continuity-matched spectral flow.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::dense::{dense_eigenvalues, green_element, lex_cmp, min_cost_assignment};
use crate::error::{Error, Result};
use crate::model::{hn_dispersion, ssh_dispersion, ssh_index, Branch, Model, Sublattice};
use crate::roots::golden_section_min;
use crate::secular::{secular_general, Terms};
use crate::ssh::stable_acos;

/// Reference energies closer than this to the PBC spectrum are rejected.
pub const ON_SPECTRUM_TOL: f64 = 1e-6;

/// Default finite-difference step in `ln V0`.
pub const DEFAULT_REL_STEP: f64 = 1e-3;

const MAX_K_POINTS: usize = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindingResult {
    pub er: Complex64,
    pub winding: i64,
    pub n_k_used: usize,
}

/// Which Green's-function element the response is taken from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ResponseElement {
    /// The element linking the two neighbours of the impurity — the ends
    /// of the open chain left behind by a strong impurity: HN `(N−1, 1)`,
    /// SSH `((N−1)B, 0B)`.
    #[default]
    ImpurityNeighbours,
    /// HN `(0, N−1)`, SSH `(0B, (N−1)B)`.
    Literal,
}

impl ResponseElement {
    /// `(row, col)` in the model's basis.
    pub fn indices(self, model: &Model) -> (usize, usize) {
        let n = model.cells();
        match (self, model) {
            (ResponseElement::ImpurityNeighbours, Model::Hn(_)) => (n - 1, 1 % n),
            (ResponseElement::Literal, Model::Hn(_)) => (0, n - 1),
            (ResponseElement::ImpurityNeighbours, Model::Ssh(_)) => {
                (ssh_index(n - 1, Sublattice::B), ssh_index(0, Sublattice::B))
            }
            (ResponseElement::Literal, Model::Ssh(_)) => (ssh_index(0, Sublattice::B), ssh_index(n - 1, Sublattice::B)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NuSeries {
    pub er: Complex64,
    pub v0_grid: Vec<f64>,
    pub nu_values: Vec<Complex64>,
    pub vc_closed_form: Complex64,
}

impl NuSeries {
    /// Grid interval `(V0_i, V0_{i+1})` with the largest `|Δ Re ν|`.
    pub fn jump(&self) -> Option<(f64, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for i in 0..self.nu_values.len().saturating_sub(1) {
            let d = (self.nu_values[i + 1].re - self.nu_values[i].re).abs();
            if best.is_none_or(|b| d > b.1) {
                best = Some((i, d));
            }
        }
        best.map(|(i, _)| (self.v0_grid[i], self.v0_grid[i + 1]))
    }

    /// Median of `Re ν` over grid points with `lo ≤ V0 ≤ hi`.
    pub fn median_re(&self, lo: f64, hi: f64) -> Option<f64> {
        let mut v: Vec<f64> = self
            .v0_grid
            .iter()
            .zip(&self.nu_values)
            .filter(|(x, _)| **x >= lo && **x <= hi)
            .map(|(_, n)| n.re)
            .collect();
        if v.is_empty() {
            return None;
        }
        v.sort_by(f64::total_cmp);
        let m = v.len();
        Some(if m % 2 == 1 { v[m / 2] } else { 0.5 * (v[m / 2 - 1] + v[m / 2]) })
    }
}

fn pbc_det(model: &Model, k: f64, er: Complex64) -> Complex64 {
    match model {
        Model::Hn(p) => hn_dispersion(p, k) - er,
        Model::Ssh(p) => {
            let e = ssh_dispersion(p, k, Branch::Plus);
            e * e - er * er
        }
    }
}

fn pbc_distance_at(model: &Model, k: f64, er: Complex64) -> f64 {
    match model {
        Model::Hn(p) => (hn_dispersion(p, k) - er).norm(),
        Model::Ssh(p) => {
            let e = ssh_dispersion(p, k, Branch::Plus);
            (e - er).norm().min((e + er).norm())
        }
    }
}

/// Distance from `er` to the PBC spectrum (all bands).
pub fn pbc_distance(model: &Model, er: Complex64) -> f64 {
    let samples = 512;
    let step = 2.0 * PI / samples as f64;
    let (mut best_k, mut best) = (0.0, f64::INFINITY);
    for j in 0..samples {
        let k = j as f64 * step;
        let d = pbc_distance_at(model, k, er);
        if d < best {
            best = d;
            best_k = k;
        }
    }
    let (_, refined) = golden_section_min(|k| pbc_distance_at(model, k, er), best_k - step, best_k + step, 1e-13);
    best.min(refined)
}

/// Winding of `det(H(k) − E_r)` around the origin, in the `e^{−ikn}` Bloch
/// convention (k traversed downwards), which counts the PBC loop around an
/// enclosed `E_r` as +1 for `g > 0`.
pub fn pbc_winding(model: &Model, er: Complex64, n_k: usize) -> Result<WindingResult> {
    model.validate()?;
    let distance = pbc_distance(model, er);
    if !(distance > ON_SPECTRUM_TOL) {
        return Err(Error::OnSpectrum { distance });
    }
    let mut n_k = n_k.max(8);
    loop {
        let mut total = 0.0;
        let mut max_step: f64 = 0.0;
        let mut prev = pbc_det(model, 0.0, er);
        for j in 1..=n_k {
            let k = -2.0 * PI * j as f64 / n_k as f64;
            let cur = pbc_det(model, k, er);
            let d = (cur / prev).arg();
            max_step = max_step.max(d.abs());
            total += d;
            prev = cur;
        }
        let raw = total / (2.0 * PI);
        let winding = raw.round();
        // Phase increments must be well resolved for the principal-branch
        // sum to follow the continuous phase.
        if (raw - winding).abs() <= 1e-6 && max_step <= PI / 8.0 {
            return Ok(WindingResult {
                er,
                winding: winding as i64,
                n_k_used: n_k,
            });
        }
        if n_k >= MAX_K_POINTS {
            return Err(Error::NumericalFailure(format!(
                "winding did not converge at nK = {n_k} (raw {raw}, max phase step {max_step:.3})"
            )));
        }
        n_k *= 2;
    }
}

fn log_green(model: &Model, er: Complex64, v0: f64, element: ResponseElement) -> Result<Complex64> {
    let m = model.set_v0(Complex64::new(v0, 0.0));
    let (row, col) = element.indices(&m);
    let g = green_element(&*m.matrix()?, er, row, col)?;
    if g.value == Complex64::new(0.0, 0.0) {
        return Err(Error::NumericalFailure(format!("Green's element vanishes at V0 = {v0:e}")));
    }
    Ok(g.value.ln())
}

/// `(ln G(V0 e^{h}) − ln G(V0 e^{−h})) / 2h`, with the difference of
/// logarithms taken on the branch continuous between the two points. The
/// step is halved (up to six times) while the forward and centred
/// estimates disagree by more than 1e−3.
pub fn nu_log_derivative(model: &Model, er: Complex64, v0: f64, rel_step: f64, element: ResponseElement) -> Result<Complex64> {
    model.validate()?;
    if !(v0 > 0.0 && v0.is_finite()) {
        return Err(Error::InvalidInput(format!("V0 must be positive, got {v0}")));
    }
    if !(rel_step > 0.0 && rel_step.is_finite()) {
        return Err(Error::InvalidInput(format!("relative step must be positive, got {rel_step}")));
    }
    let centre = log_green(model, er, v0, element)?;
    let diff = |a: Complex64, b: Complex64| {
        // Imaginary parts differ by the phase change, taken in (−π, π].
        let d = a - b;
        Complex64::new(d.re, (d.im + PI).rem_euclid(2.0 * PI) - PI)
    };
    let mut h = rel_step;
    let mut result = Complex64::new(0.0, 0.0);
    for _ in 0..7 {
        let up = log_green(model, er, v0 * h.exp(), element)?;
        let down = log_green(model, er, v0 * (-h).exp(), element)?;
        result = diff(up, down) / (2.0 * h);
        let forward = diff(up, centre) / h;
        if (forward - result).norm() <= 1e-3 {
            break;
        }
        h *= 0.5;
    }
    Ok(result)
}

/// Response along a grid of impurity strengths, with the closed-form
/// critical value attached.
pub fn nu_sweep(model: &Model, er: Complex64, v0_grid: &[f64], element: ResponseElement) -> Result<NuSeries> {
    validate_grid(v0_grid)?;
    let nu_values = v0_grid
        .iter()
        .map(|&v| nu_log_derivative(model, er, v, DEFAULT_REL_STEP, element))
        .collect::<Result<Vec<_>>>()?;
    Ok(NuSeries {
        er,
        v0_grid: v0_grid.to_vec(),
        nu_values,
        vc_closed_form: critical_v0_for_energy(model, er)?,
    })
}

pub(crate) fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.len() < 2 {
        return Err(Error::InvalidInput("grid needs at least two points".into()));
    }
    if grid.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::InvalidInput("grid values must be positive and finite".into()));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput("grid must be strictly increasing".into()));
    }
    Ok(())
}

/// `sinθ(2cos Nθ − 2cosh Ng)/sin Nθ`, evaluated with a common scale factor
/// removed from numerator and denominator.
fn hn_ratio(n: usize, g: f64, theta: Complex64) -> Result<Complex64> {
    let zero = Complex64::new(0.0, 0.0);
    let num = secular_general(n, g, theta, Terms { lead: 1.0, coupling: zero, coupling_derivative: zero });
    let den = secular_general(n, g, theta, Terms { lead: 0.0, coupling: Complex64::new(-1.0, 0.0), coupling_derivative: zero });
    if !(den.value.norm() > 1e-12 * num.magnitude.max(f64::MIN_POSITIVE)) {
        return Err(Error::DegenerateReference(format!("sin(N·theta) vanishes at theta = {theta}")));
    }
    Ok(num.value / den.value)
}

/// Impurity strength at which `E_r` becomes an eigenvalue. HN:
/// `θ = arccos(E_r/2)`, `V_c = sinθ(2cos Nθ − 2cosh Ng)/sin Nθ`. SSH:
/// `cosθ = (E_r² − t'² − 1)/(2t')`, `V_c = t'·(same ratio)/E_r`. The ratio
/// is odd/odd in θ, so the arccos branch does not matter.
pub fn critical_v0_for_energy(model: &Model, er: Complex64) -> Result<Complex64> {
    model.validate()?;
    match model {
        Model::Hn(p) => hn_ratio(p.n, p.g, stable_acos(er / 2.0)),
        Model::Ssh(p) => {
            if er.norm() == 0.0 {
                return Err(Error::InvalidReference("E_r = 0 is not allowed for the SSH model".into()));
            }
            let tp = p.t_prime;
            let theta = stable_acos((er * er - tp * tp - 1.0) / (2.0 * tp));
            Ok(tp * hn_ratio(p.n, p.g, theta)? / er)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralFlow {
    /// `0` followed by the requested grid.
    pub v0_grid: Vec<f64>,
    /// `trajectories[mode][point]`; modes are ordered by their energy at
    /// `V0 = 0`.
    pub trajectories: Vec<Vec<Complex64>>,
}

/// Eigenvalue paths from `V0 = 0` through the grid, matched between
/// neighbouring points by a minimum-cost assignment. A match is ambiguous —
/// and reported as such — when some eigenvalue is equally close to two
/// distinct eigenvalues at the next point.
pub fn spectral_flow(model: &Model, v0_grid: &[f64]) -> Result<SpectralFlow> {
    model.validate()?;
    validate_grid(v0_grid)?;
    let mut grid = Vec::with_capacity(v0_grid.len() + 1);
    grid.push(0.0);
    grid.extend_from_slice(v0_grid);
    let mut current = dense_eigenvalues(&*model.set_v0(Complex64::new(0.0, 0.0)).matrix()?)?;
    current.sort_by(lex_cmp);
    let mut trajectories: Vec<Vec<Complex64>> = current.iter().map(|&e| vec![e]).collect();
    for &v0 in v0_grid {
        let next = dense_eigenvalues(&*model.set_v0(Complex64::new(v0, 0.0)).matrix()?)?;
        let cost: Vec<Vec<f64>> = current.iter().map(|a| next.iter().map(|b| (a - b).norm()).collect()).collect();
        let pairing = min_cost_assignment(&cost);
        let scale = next.iter().map(|z| z.norm()).fold(1.0, f64::max);
        for (i, &j) in pairing.iter().enumerate() {
            let d = cost[i][j];
            let tie = cost[i].iter().enumerate().any(|(k, &dk)| {
                k != j && (dk - d).abs() <= 1e-9 * d.max(1e-300) && (next[k] - next[j]).norm() > 1e-9 * scale
            });
            if tie {
                return Err(Error::BranchAmbiguity { v0 });
            }
        }
        current = pairing.iter().map(|&j| next[j]).collect();
        for (t, e) in trajectories.iter_mut().zip(&current) {
            t.push(*e);
        }
    }
    Ok(SpectralFlow { v0_grid: grid, trajectories })
}

/// `count` log-spaced points from `start` to `stop` inclusive.
pub fn log_grid(start: f64, stop: f64, count: usize) -> Result<Vec<f64>> {
    if !(start > 0.0 && stop > start && start.is_finite() && stop.is_finite()) || count < 2 {
        return Err(Error::InvalidInput(format!(
            "log grid needs 0 < start < stop and count >= 2 (got {start}, {stop}, {count})"
        )));
    }
    let (a, b) = (start.log10(), stop.log10());
    Ok((0..count)
        .map(|i| {
            if i + 1 == count {
                stop
            } else if i == 0 {
                start
            } else {
                10f64.powf(a + (b - a) * i as f64 / (count - 1) as f64)
            }
        })
        .collect())
}
