//! General complex eigensolver: diagonal balancing, Householder reduction to
//! upper Hessenberg form, then the single-shift complex QR iteration with
//! Givens bulge chasing. Right eigenvectors come from back-substitution on
//! the triangular Schur factor.

use num_complex::Complex64;

use super::matrix::{normalize, CMatrix};
use crate::error::{Error, Result};

const RADIX: f64 = 2.0;

#[inline]
fn cabs1(z: Complex64) -> f64 {
    z.re.abs() + z.im.abs()
}

/// Diagonal similarity `A <- D^{-1} A D` that equalises row and column
/// norms. Returns the diagonal of `D`.
pub(crate) fn balance(a: &mut CMatrix) -> Vec<f64> {
    let n = a.rows();
    let mut scale = vec![1.0; n];
    let sqrdx = RADIX * RADIX;
    loop {
        let mut done = true;
        for i in 0..n {
            let mut r = 0.0;
            let mut c = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[(j, i)].norm();
                    r += a[(i, j)].norm();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / RADIX;
            while c < g {
                f *= RADIX;
                c *= sqrdx;
            }
            g = r * RADIX;
            while c > g {
                f /= RADIX;
                c /= sqrdx;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                scale[i] *= f;
                let inv = 1.0 / f;
                for j in 0..n {
                    a[(i, j)] *= inv;
                    a[(j, i)] *= f;
                }
            }
        }
        if done {
            break;
        }
    }
    scale
}

/// Reduces `a` to upper Hessenberg form in place and returns the unitary
/// `Q` with `A_in = Q H Q^H`.
pub(crate) fn hessenberg(a: &mut CMatrix) -> CMatrix {
    let n = a.rows();
    let mut q = CMatrix::identity(n);
    if n < 3 {
        return q;
    }
    for k in 0..n - 2 {
        let mut u: Vec<Complex64> = (k + 1..n).map(|i| a[(i, k)]).collect();
        let tail: f64 = u[1..].iter().map(|z| z.norm_sqr()).sum();
        if tail == 0.0 {
            continue;
        }
        let xnorm = (tail + u[0].norm_sqr()).sqrt();
        let phase = if u[0].norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            u[0] / u[0].norm()
        };
        u[0] += phase * xnorm;
        let unorm2: f64 = u.iter().map(|z| z.norm_sqr()).sum();
        let beta = 2.0 / unorm2;

        // left: A <- P A
        for j in 0..n {
            let s: Complex64 = u
                .iter()
                .enumerate()
                .map(|(m, um)| um.conj() * a[(k + 1 + m, j)])
                .sum();
            let s = s * beta;
            for (m, um) in u.iter().enumerate() {
                a[(k + 1 + m, j)] -= s * um;
            }
        }
        // right: A <- A P, Q <- Q P
        for mat in [&mut *a, &mut q] {
            for i in 0..n {
                let s: Complex64 = u
                    .iter()
                    .enumerate()
                    .map(|(m, um)| mat[(i, k + 1 + m)] * um)
                    .sum();
                let s = s * beta;
                for (m, um) in u.iter().enumerate() {
                    mat[(i, k + 1 + m)] -= s * um.conj();
                }
            }
        }
        for i in k + 2..n {
            a[(i, k)] = Complex64::new(0.0, 0.0);
        }
    }
    q
}

/// Rotation `G = [[c, s], [-conj(s), c]]` with `G [x; y] = [rho; 0]`.
fn givens(x: Complex64, y: Complex64) -> (f64, Complex64) {
    if y == Complex64::new(0.0, 0.0) {
        return (1.0, Complex64::new(0.0, 0.0));
    }
    let ax = x.norm();
    let ay = y.norm();
    if ax == 0.0 {
        return (0.0, y.conj() / ay);
    }
    let r = ax.hypot(ay);
    let phase = x / ax;
    (ax / r, phase * y.conj() / r)
}

fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let half = (a - d) * 0.5;
    let root = (half * half + b * c).sqrt();
    let mid = (a + d) * 0.5;
    let m1 = mid + root;
    let m2 = mid - root;
    if (m1 - d).norm() <= (m2 - d).norm() {
        m1
    } else {
        m2
    }
}

/// Unitary rotation of rows/columns `k, k+1` that makes the 2×2 diagonal
/// block at `k` upper triangular.
fn split_two_by_two(h: &mut CMatrix, z: &mut CMatrix, k: usize) {
    let n = h.rows();
    let (a, b, c, d) = (h[(k, k)], h[(k, k + 1)], h[(k + 1, k)], h[(k + 1, k + 1)]);
    let lambda = wilkinson_shift(a, b, c, d);
    // Eigenvector for lambda from whichever row of (B − λ) is larger.
    let r1 = (b, lambda - a);
    let r2 = (lambda - d, c);
    let (x, y) = if r1.0.norm() + r1.1.norm() >= r2.0.norm() + r2.1.norm() { r1 } else { r2 };
    let nrm = x.norm().hypot(y.norm());
    if nrm == 0.0 {
        h[(k + 1, k)] = Complex64::new(0.0, 0.0);
        return;
    }
    // Q = [[x, -conj(y)], [y, conj(x)]] / nrm has the eigenvector as column 0.
    let (x, y) = (x / nrm, y / nrm);
    for j in 0..n {
        let (p, q) = (h[(k, j)], h[(k + 1, j)]);
        h[(k, j)] = x.conj() * p + y.conj() * q;
        h[(k + 1, j)] = -y * p + x * q;
    }
    for i in 0..n {
        let (p, q) = (h[(i, k)], h[(i, k + 1)]);
        h[(i, k)] = p * x + q * y;
        h[(i, k + 1)] = -p * y.conj() + q * x.conj();
        let (p, q) = (z[(i, k)], z[(i, k + 1)]);
        z[(i, k)] = p * x + q * y;
        z[(i, k + 1)] = -p * y.conj() + q * x.conj();
    }
    h[(k + 1, k)] = Complex64::new(0.0, 0.0);
}

/// Complex Schur decomposition of an upper Hessenberg matrix. On return `h`
/// is upper triangular and `z` has been right-multiplied by the accumulated
/// unitary transformation.
pub(crate) fn schur_in_place(h: &mut CMatrix, z: &mut CMatrix) -> Result<()> {
    let n = h.rows();
    if n <= 1 {
        return Ok(());
    }
    let eps = f64::EPSILON;
    let smlnum = f64::MIN_POSITIVE * (n as f64 / eps);
    let max_total = 60 * n.max(10);
    let mut total = 0usize;
    let mut ihi = n - 1;
    let mut its = 0usize;

    while ihi > 0 {
        // look for a negligible subdiagonal entry
        let mut l = ihi;
        while l > 0 {
            let sub = cabs1(h[(l, l - 1)]);
            if sub <= smlnum {
                break;
            }
            let mut tst = cabs1(h[(l - 1, l - 1)]) + cabs1(h[(l, l)]);
            if tst == 0.0 {
                if l >= 2 {
                    tst += h[(l - 1, l - 2)].re.abs();
                }
                if l < ihi {
                    tst += h[(l + 1, l)].re.abs();
                }
            }
            if sub <= eps * tst {
                let up = cabs1(h[(l - 1, l)]);
                let ab = sub.max(up);
                let ba = sub.min(up);
                let diff = cabs1(h[(l - 1, l - 1)] - h[(l, l)]);
                let aa = cabs1(h[(l, l)]).max(diff);
                let bb = cabs1(h[(l, l)]).min(diff);
                let s = aa + ab;
                if ba * (ab / s) <= smlnum.max(eps * (bb * (aa / s))) {
                    break;
                }
            }
            l -= 1;
        }
        if l > 0 {
            h[(l, l - 1)] = Complex64::new(0.0, 0.0);
        }
        if l == ihi {
            ihi -= 1;
            its = 0;
            continue;
        }

        if l + 1 == ihi {
            // A 2×2 block is triangularised directly: nearly scalar blocks
            // (degenerate pairs of normal matrices) stall the shifted step.
            split_two_by_two(h, z, l);
            ihi = l.saturating_sub(1);
            its = 0;
            if l == 0 {
                break;
            }
            continue;
        }

        its += 1;
        total += 1;
        if total > max_total {
            return Err(Error::NumericalFailure(format!(
                "QR iteration did not converge (active block {l}..{ihi} of {n})"
            )));
        }

        let shift = if its % 20 == 10 {
            h[(l, l)] + 0.75 * h[(l + 1, l)].re.abs()
        } else if its.is_multiple_of(20) {
            h[(ihi, ihi)] + 0.75 * h[(ihi, ihi - 1)].re.abs()
        } else {
            wilkinson_shift(
                h[(ihi - 1, ihi - 1)],
                h[(ihi - 1, ihi)],
                h[(ihi, ihi - 1)],
                h[(ihi, ihi)],
            )
        };

        for k in l..ihi {
            let (x, y, first_col) = if k == l {
                (h[(l, l)] - shift, h[(l + 1, l)], l)
            } else {
                (h[(k, k - 1)], h[(k + 1, k - 1)], k - 1)
            };
            let (c, s) = givens(x, y);
            for j in first_col..n {
                let a = h[(k, j)];
                let b = h[(k + 1, j)];
                h[(k, j)] = c * a + s * b;
                h[(k + 1, j)] = -s.conj() * a + c * b;
            }
            if k > l {
                h[(k + 1, k - 1)] = Complex64::new(0.0, 0.0);
            }
            let last = (k + 2).min(ihi);
            for i in 0..=last {
                let a = h[(i, k)];
                let b = h[(i, k + 1)];
                h[(i, k)] = a * c + b * s.conj();
                h[(i, k + 1)] = -a * s + b * c;
            }
            for i in 0..n {
                let a = z[(i, k)];
                let b = z[(i, k + 1)];
                z[(i, k)] = a * c + b * s.conj();
                z[(i, k + 1)] = -a * s + b * c;
            }
        }
    }
    for i in 1..n {
        for j in 0..i {
            h[(i, j)] = Complex64::new(0.0, 0.0);
        }
    }
    Ok(())
}

/// Right eigenvectors of an upper triangular matrix, as columns.
fn triangular_eigenvectors(t: &CMatrix) -> CMatrix {
    let n = t.rows();
    let eps = f64::EPSILON;
    let smin = (eps * t.max_abs()).max(f64::MIN_POSITIVE * (n as f64 / eps));
    let mut y = CMatrix::zeros(n, n);
    for k in 0..n {
        let lambda = t[(k, k)];
        let mut col = vec![Complex64::new(0.0, 0.0); k + 1];
        col[k] = Complex64::new(1.0, 0.0);
        for j in (0..k).rev() {
            let s: Complex64 = (j + 1..=k).map(|m| t[(j, m)] * col[m]).sum();
            let mut d = t[(j, j)] - lambda;
            if d.norm() < smin {
                d = Complex64::new(smin, 0.0);
            }
            col[j] = -s / d;
            let big = col[j].norm();
            if big > 1e100 {
                for v in col.iter_mut() {
                    *v /= big;
                }
            }
        }
        for (i, v) in col.into_iter().enumerate() {
            y[(i, k)] = v;
        }
    }
    y
}

/// Eigenvalues (and optionally unit-norm right eigenvectors as columns) of
/// a general square complex matrix, unsorted.
pub(crate) fn eig_general(
    m: &CMatrix,
    want_vectors: bool,
) -> Result<(Vec<Complex64>, Option<CMatrix>)> {
    assert!(m.is_square());
    let n = m.rows();
    if m.as_slice().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidInput("matrix has non-finite entries".into()));
    }
    if n == 0 {
        return Ok((Vec::new(), want_vectors.then(|| CMatrix::zeros(0, 0))));
    }
    let mut a = m.clone();
    let scale = balance(&mut a);
    let mut z = hessenberg(&mut a);
    schur_in_place(&mut a, &mut z)?;
    let values: Vec<Complex64> = (0..n).map(|i| a[(i, i)]).collect();
    if !want_vectors {
        return Ok((values, None));
    }
    let y = triangular_eigenvectors(&a);
    let mut vectors = z.matmul(&y);
    for k in 0..n {
        let mut col: Vec<Complex64> = (0..n).map(|i| vectors[(i, k)] * scale[i]).collect();
        normalize(&mut col);
        for (i, v) in col.into_iter().enumerate() {
            vectors[(i, k)] = v;
        }
    }
    Ok((values, Some(vectors)))
}
