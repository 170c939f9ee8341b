use num_complex::Complex64;

use super::matrix::CMatrix;
use crate::error::{Error, Result};

/// LU factorisation with partial pivoting, `P A = L U`.
#[derive(Debug, Clone)]
pub struct Lu {
    lu: CMatrix,
    perm: Vec<usize>,
}

impl Lu {
    pub fn factor(a: &CMatrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::InvalidInput("LU of a non-square matrix".into()));
        }
        let n = a.rows();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, lu[(i, k)].norm()))
                .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if pmax == 0.0 {
                return Err(Error::IllConditioned { estimate: f64::INFINITY });
            }
            if p != k {
                perm.swap(p, k);
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = tmp;
                }
            }
            let pivot = lu[(k, k)];
            for i in k + 1..n {
                let f = lu[(i, k)] / pivot;
                lu[(i, k)] = f;
                if f == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in k + 1..n {
                    let u = lu[(k, j)];
                    lu[(i, j)] -= f * u;
                }
            }
        }
        Ok(Self { lu, perm })
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.dim();
        assert_eq!(b.len(), n);
        let mut x: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let s: Complex64 = (0..i).map(|j| self.lu[(i, j)] * x[j]).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let s: Complex64 = (i + 1..n).map(|j| self.lu[(i, j)] * x[j]).sum();
            x[i] = (x[i] - s) / self.lu[(i, i)];
        }
        x
    }

    pub fn inverse(&self) -> CMatrix {
        let n = self.dim();
        let mut inv = CMatrix::zeros(n, n);
        let mut e = vec![Complex64::new(0.0, 0.0); n];
        for j in 0..n {
            e.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
            e[j] = Complex64::new(1.0, 0.0);
            for (i, v) in self.solve(&e).into_iter().enumerate() {
                inv[(i, j)] = v;
            }
        }
        inv
    }
}

/// 1-norm condition number of `a` after scaling every row to unit maximum
/// modulus. Row scaling leaves the solution of `A x = b` unchanged up to the
/// right-hand side, so this measures the conditioning that actually limits
/// the solve rather than the spread of entry magnitudes.
pub fn equilibrated_condition(a: &CMatrix) -> Result<f64> {
    let n = a.rows();
    let mut scaled = a.clone();
    for i in 0..n {
        let m = a.row(i).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if m == 0.0 {
            return Ok(f64::INFINITY);
        }
        for j in 0..n {
            scaled[(i, j)] /= m;
        }
    }
    let lu = match Lu::factor(&scaled) {
        Ok(lu) => lu,
        Err(Error::IllConditioned { .. }) => return Ok(f64::INFINITY),
        Err(e) => return Err(e),
    };
    let inv = lu.inverse();
    let est = scaled.norm_one() * inv.norm_one();
    Ok(if est.is_finite() { est } else { f64::INFINITY })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn solves_small_system() {
        let a = CMatrix::from_rows(&[
            vec![c(0.0, 0.0), c(2.0, 1.0), c(1.0, 0.0)],
            vec![c(1.0, 0.0), c(1.0, 0.0), c(0.0, -1.0)],
            vec![c(3.0, 0.0), c(0.0, 0.0), c(1.0, 1.0)],
        ]);
        let b = vec![c(1.0, 0.0), c(0.0, 2.0), c(-1.0, 0.5)];
        let x = Lu::factor(&a).unwrap().solve(&b);
        let r = a.mul_vec(&x);
        for (ri, bi) in r.iter().zip(&b) {
            assert!((ri - bi).norm() < 1e-14);
        }
    }

    #[test]
    fn singular_matrix_is_reported() {
        let a = CMatrix::from_rows(&[vec![c(1.0, 0.0), c(2.0, 0.0)], vec![c(2.0, 0.0), c(4.0, 0.0)]]);
        assert!(matches!(Lu::factor(&a), Err(Error::IllConditioned { .. })));
        assert!(equilibrated_condition(&a).unwrap().is_infinite());
    }

    #[test]
    fn row_scaling_does_not_inflate_condition() {
        let mut a = CMatrix::identity(3);
        a[(0, 0)] = c(1e14, 0.0);
        let cond = equilibrated_condition(&a).unwrap();
        assert!((cond - 1.0).abs() < 1e-12);
    }
}
