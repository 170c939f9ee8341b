//! Parameter records, dense real-space Hamiltonians and PBC dispersions for
//! the impurity Hatano-Nelson ring and the impurity non-reciprocal SSH ring.
//!
//! Conventions: hopping `e^{-g}` carries amplitude from site `n+1` to `n`,
//! `e^{g}` from `n` to `n+1`. The SSH basis is ordered `(0A, 0B, 1A, 1B, ...)`
//! and the impurity always sits on site 0 (sublattice A for SSH).

use std::ops::Deref;

use num_complex::Complex64;

use crate::dense::CMatrix;
use crate::error::{Error, Result};

/// Largest HN ring and SSH cell count supported by the dense routines.
pub const MAX_HN_SITES: usize = 64;
pub const MAX_SSH_CELLS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HnParams {
    pub n: usize,
    /// Energy unit, fixed to 1.
    pub t: f64,
    pub g: f64,
    pub v0: Complex64,
}

impl HnParams {
    pub fn new(n: usize, g: f64, v0: f64) -> Result<Self> {
        Self::with_complex_v0(n, g, Complex64::new(v0, 0.0))
    }

    pub fn with_complex_v0(n: usize, g: f64, v0: Complex64) -> Result<Self> {
        let p = Self { n, t: 1.0, g, v0 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidParameter(format!("N must be at least 2, got {}", self.n)));
        }
        if self.n > MAX_HN_SITES {
            return Err(Error::InvalidParameter(format!("N = {} exceeds {MAX_HN_SITES}", self.n)));
        }
        if self.t != 1.0 {
            return Err(Error::InvalidParameter("t is the energy unit and must be 1".into()));
        }
        if !self.g.is_finite() {
            return Err(Error::InvalidParameter("g must be finite".into()));
        }
        if !(self.v0.re.is_finite() && self.v0.im.is_finite()) {
            return Err(Error::InvalidParameter("V0 must be finite".into()));
        }
        Ok(())
    }

    pub fn set_v0(&self, v0: Complex64) -> Self {
        Self { v0, ..*self }
    }

    /// `cosh(N g)`, the PBC boundary term of the secular equation.
    pub fn cosh_ng(&self) -> f64 {
        (self.n as f64 * self.g).cosh()
    }

    pub fn v0_is_real(&self) -> bool {
        self.v0.im == 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SshParams {
    pub n: usize,
    pub t: f64,
    pub t_prime: f64,
    pub g: f64,
    pub v0: Complex64,
}

impl SshParams {
    pub fn new(n: usize, g: f64, t_prime: f64, v0: f64) -> Result<Self> {
        Self::with_complex_v0(n, g, t_prime, Complex64::new(v0, 0.0))
    }

    pub fn with_complex_v0(n: usize, g: f64, t_prime: f64, v0: Complex64) -> Result<Self> {
        let p = Self { n, t: 1.0, t_prime, g, v0 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidParameter(format!("N must be at least 2, got {}", self.n)));
        }
        if self.n > MAX_SSH_CELLS {
            return Err(Error::InvalidParameter(format!("N = {} exceeds {MAX_SSH_CELLS}", self.n)));
        }
        if self.t != 1.0 {
            return Err(Error::InvalidParameter("t is the energy unit and must be 1".into()));
        }
        if self.t_prime == 0.0 || !self.t_prime.is_finite() {
            return Err(Error::InvalidParameter("t' must be finite and nonzero".into()));
        }
        if !self.g.is_finite() {
            return Err(Error::InvalidParameter("g must be finite".into()));
        }
        if !(self.v0.re.is_finite() && self.v0.im.is_finite()) {
            return Err(Error::InvalidParameter("V0 must be finite".into()));
        }
        Ok(())
    }

    pub fn set_v0(&self, v0: Complex64) -> Self {
        Self { v0, ..*self }
    }

    pub fn set_t_prime(&self, t_prime: f64) -> Self {
        Self { t_prime, ..*self }
    }

    pub fn cosh_ng(&self) -> f64 {
        (self.n as f64 * self.g).cosh()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sublattice {
    A,
    B,
}

/// Position of `(cell, sublattice)` in the SSH basis.
pub fn ssh_index(cell: usize, sub: Sublattice) -> usize {
    2 * cell
        + match sub {
            Sublattice::A => 0,
            Sublattice::B => 1,
        }
}

/// Either lattice, for operations that treat both uniformly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Model {
    Hn(HnParams),
    Ssh(SshParams),
}

impl Model {
    pub fn v0(&self) -> Complex64 {
        match self {
            Model::Hn(p) => p.v0,
            Model::Ssh(p) => p.v0,
        }
    }

    pub fn set_v0(&self, v0: Complex64) -> Model {
        match self {
            Model::Hn(p) => Model::Hn(p.set_v0(v0)),
            Model::Ssh(p) => Model::Ssh(p.set_v0(v0)),
        }
    }

    pub fn cells(&self) -> usize {
        match self {
            Model::Hn(p) => p.n,
            Model::Ssh(p) => p.n,
        }
    }

    pub fn g(&self) -> f64 {
        match self {
            Model::Hn(p) => p.g,
            Model::Ssh(p) => p.g,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Model::Hn(p) => p.n,
            Model::Ssh(p) => 2 * p.n,
        }
    }

    pub fn matrix(&self) -> Result<LatticeMatrix> {
        match self {
            Model::Hn(p) => build_hn_matrix(p),
            Model::Ssh(p) => build_ssh_matrix(p),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Model::Hn(p) => p.validate(),
            Model::Ssh(p) => p.validate(),
        }
    }
}

/// Dense real-space Hamiltonian of one lattice instance.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeMatrix {
    matrix: CMatrix,
}

impl LatticeMatrix {
    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn into_inner(self) -> CMatrix {
        self.matrix
    }
}

impl Deref for LatticeMatrix {
    type Target = CMatrix;

    fn deref(&self) -> &CMatrix {
        &self.matrix
    }
}

pub fn build_hn_matrix(p: &HnParams) -> Result<LatticeMatrix> {
    p.validate()?;
    let n = p.n;
    let left = Complex64::new((-p.g).exp(), 0.0);
    let right = Complex64::new(p.g.exp(), 0.0);
    let mut m = CMatrix::zeros(n, n);
    for site in 0..n {
        let next = (site + 1) % n;
        m[(site, next)] += left;
        m[(next, site)] += right;
    }
    m[(0, 0)] += p.v0;
    Ok(LatticeMatrix { matrix: m })
}

pub fn build_ssh_matrix(p: &SshParams) -> Result<LatticeMatrix> {
    p.validate()?;
    let n = p.n;
    let left = Complex64::new((-p.g).exp(), 0.0);
    let right = Complex64::new(p.g.exp(), 0.0);
    let inter = Complex64::new(p.t_prime, 0.0);
    let mut m = CMatrix::zeros(2 * n, 2 * n);
    for cell in 0..n {
        let a = ssh_index(cell, Sublattice::A);
        let b = ssh_index(cell, Sublattice::B);
        let a_next = ssh_index((cell + 1) % n, Sublattice::A);
        m[(a, b)] += left;
        m[(b, a)] += right;
        m[(b, a_next)] += inter;
        m[(a_next, b)] += inter;
    }
    m[(0, 0)] += p.v0;
    Ok(LatticeMatrix { matrix: m })
}

/// PBC band `e^{-g} e^{ik} + e^{g} e^{-ik} = 2 cos(k + i g)`.
pub fn hn_dispersion(p: &HnParams, k: f64) -> Complex64 {
    2.0 * Complex64::new(k, p.g).cos()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Branch {
        match self {
            Branch::Plus => Branch::Minus,
            Branch::Minus => Branch::Plus,
        }
    }
}

/// PBC SSH bands `±sqrt(h_x^2 + h_y^2)` with
/// `h_x = t' cos k + cosh g`, `h_y = t' sin k - i sinh g`.
pub fn ssh_dispersion(p: &SshParams, k: f64, branch: Branch) -> Complex64 {
    let hx = Complex64::new(p.t_prime * k.cos() + p.g.cosh(), 0.0);
    let hy = Complex64::new(p.t_prime * k.sin(), -p.g.sinh());
    branch.sign() * (hx * hx + hy * hy).sqrt()
}
