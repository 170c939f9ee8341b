//! Brute-force dense backend used to validate every exact result: general
//! complex eigendecomposition, resolvent elements through linear solves, and
//! optimal matching between two spectra.

mod assignment;
mod eigen;
mod lu;
mod matrix;

pub use assignment::min_cost_assignment;
pub use lu::{equilibrated_condition, Lu};
pub use matrix::{normalize, vec_dot, vec_norm, CMatrix};

use std::cmp::Ordering;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest dimension the dense backend accepts.
pub const MAX_DENSE_DIM: usize = 128;

/// Condition estimate above which a resolvent solve is refused.
pub const GREEN_CONDITION_LIMIT: f64 = 1e12;

/// Eigenvalues sorted lexicographically by (Re, Im); optional unit-norm
/// right eigenvectors stored as the matching columns.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub values: Vec<Complex64>,
    pub vectors: Option<CMatrix>,
}

impl EigenDecomposition {
    pub fn vector(&self, k: usize) -> Option<Vec<Complex64>> {
        self.vectors.as_ref().map(|v| v.column(k))
    }
}

/// Optimal bijection between two spectra.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumMatch {
    /// `pairing[i]` is the index in `b` matched to `a[i]`.
    pub pairing: Vec<usize>,
    pub max_distance: f64,
    pub mean_distance: f64,
}

/// Resolvent element together with the conditioning of the solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreenValue {
    pub value: Complex64,
    pub condition: f64,
}

pub fn lex_cmp(a: &Complex64, b: &Complex64) -> Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

/// Complete eigensystem of a general complex matrix.
pub fn dense_eigensolve(m: &CMatrix, want_vectors: bool) -> Result<EigenDecomposition> {
    if !m.is_square() {
        return Err(Error::InvalidInput("eigensolve needs a square matrix".into()));
    }
    if m.rows() > MAX_DENSE_DIM {
        return Err(Error::InvalidInput(format!(
            "dimension {} exceeds dense limit {MAX_DENSE_DIM}",
            m.rows()
        )));
    }
    let (values, vectors) = eigen::eig_general(m, want_vectors)?;
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| lex_cmp(&values[i], &values[j]));
    let sorted_values = order.iter().map(|&i| values[i]).collect();
    let sorted_vectors = vectors.map(|v| CMatrix::from_fn(v.rows(), v.cols(), |r, c| v[(r, order[c])]));
    Ok(EigenDecomposition {
        values: sorted_values,
        vectors: sorted_vectors,
    })
}

/// Eigenvalues only, sorted lexicographically.
pub fn dense_eigenvalues(m: &CMatrix) -> Result<Vec<Complex64>> {
    Ok(dense_eigensolve(m, false)?.values)
}

/// Element `[(E_r - H)^{-1}]_{row, col}`.
pub fn green_element(m: &CMatrix, er: Complex64, row: usize, col: usize) -> Result<GreenValue> {
    let n = m.rows();
    if row >= n || col >= n {
        return Err(Error::InvalidInput(format!("index ({row}, {col}) out of range for dim {n}")));
    }
    let a = resolvent_operator(m, er);
    let condition = equilibrated_condition(&a)?;
    if !(condition <= GREEN_CONDITION_LIMIT) {
        return Err(Error::IllConditioned { estimate: condition });
    }
    let lu = Lu::factor(&a)?;
    let mut e = vec![Complex64::new(0.0, 0.0); n];
    e[col] = Complex64::new(1.0, 0.0);
    let x = lu.solve(&e);
    Ok(GreenValue {
        value: x[row],
        condition,
    })
}

/// `E_r I - H`.
pub fn resolvent_operator(m: &CMatrix, er: Complex64) -> CMatrix {
    let mut a = m.clone();
    for z in (0..m.rows()).flat_map(|i| (0..m.cols()).map(move |j| (i, j))) {
        a[z] = -a[z];
    }
    for i in 0..m.rows() {
        a[(i, i)] += er;
    }
    a
}

/// Minimum-cost bijection between two multisets under |a_i - b_j|.
pub fn match_spectra(a: &[Complex64], b: &[Complex64]) -> Result<SpectrumMatch> {
    if a.len() != b.len() {
        return Err(Error::InvalidInput(format!(
            "spectra differ in size ({} vs {})",
            a.len(),
            b.len()
        )));
    }
    if a.is_empty() {
        return Ok(SpectrumMatch {
            pairing: Vec::new(),
            max_distance: 0.0,
            mean_distance: 0.0,
        });
    }
    let cost: Vec<Vec<f64>> = a.iter().map(|x| b.iter().map(|y| (x - y).norm()).collect()).collect();
    let pairing = min_cost_assignment(&cost);
    let dists: Vec<f64> = pairing.iter().enumerate().map(|(i, &j)| cost[i][j]).collect();
    Ok(SpectrumMatch {
        max_distance: dists.iter().copied().fold(0.0, f64::max),
        mean_distance: dists.iter().sum::<f64>() / dists.len() as f64,
        pairing,
    })
}

/// Residual `||M v - lambda v||` for a candidate eigenpair.
pub fn eigen_residual(m: &CMatrix, lambda: Complex64, v: &[Complex64]) -> f64 {
    let mv = m.mul_vec(v);
    let r: Vec<Complex64> = mv.iter().zip(v).map(|(a, b)| a - lambda * b).collect();
    vec_norm(&r)
}

/// Inverse iteration towards the eigenvector of `m` closest to `lambda`,
/// started from `start`. Returns a unit vector.
pub fn inverse_iteration(m: &CMatrix, lambda: Complex64, start: &[Complex64], steps: usize) -> Result<Vec<Complex64>> {
    let n = m.rows();
    let scale = m.max_abs().max(1.0);
    let mut shift = lambda;
    let lu = loop {
        match Lu::factor(&m.shifted(shift)) {
            Ok(lu) => break lu,
            Err(Error::IllConditioned { .. }) => {
                shift += Complex64::new(f64::EPSILON * scale, f64::EPSILON * scale);
            }
            Err(e) => return Err(e),
        }
    };
    let mut x: Vec<Complex64> = if vec_norm(start) > 0.0 {
        start.to_vec()
    } else {
        vec![Complex64::new(1.0, 0.0); n]
    };
    normalize(&mut x);
    for _ in 0..steps {
        let mut y = lu.solve(&x);
        if !y.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            break;
        }
        normalize(&mut y);
        x = y;
    }
    Ok(x)
}
