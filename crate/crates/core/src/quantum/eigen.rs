//! Dense Hermitian eigendecomposition by cyclic complex Jacobi rotations,
//! plus the singular-value machinery built on it.
//!
//! All state dimensions in this crate are small (tens), and the protocol
//! checks demand 1e-10 accuracy on reconstructions. Jacobi sweeps converge
//! to machine precision on Hermitian input regardless of degeneracies, which
//! general-purpose bidiagonalization SVDs do not guarantee on complex
//! matrices.

use nalgebra::{DMatrix, DVector};

use super::C64;

const MAX_SWEEPS: usize = 64;

/// Eigendecomposition of a Hermitian matrix: eigenvalues sorted
/// nonincreasing with matching orthonormal eigenvector columns.
pub fn hermitian_eigen(matrix: &DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let n = matrix.nrows();
    assert_eq!(n, matrix.ncols(), "hermitian_eigen needs a square matrix");
    // Hermitize to wash out representation error in the input.
    let mut a = DMatrix::from_fn(n, n, |r, c| {
        (matrix[(r, c)] + matrix[(c, r)].conj()) * C64::from(0.5)
    });
    let mut vectors: DMatrix<C64> = DMatrix::identity(n, n);

    let scale = a.iter().map(|x| x.norm()).fold(0.0f64, f64::max).max(1.0);
    let tol = 1e-15 * scale;

    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(a[(p, q)].norm());
            }
        }
        if off <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let magnitude = apq.norm();
                if magnitude <= tol {
                    continue;
                }
                let phase = apq / C64::from(magnitude);
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let tau = (aqq - app) / (2.0 * magnitude);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let cs = C64::from(c);
                let s_phase = phase * C64::from(s);

                // A <- J† A J with J = I except
                // J[p,p]=c, J[p,q]=s·phase, J[q,p]=-s·conj(phase), J[q,q]=c.
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * cs - akq * s_phase.conj();
                    a[(k, q)] = akp * s_phase + akq * cs;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = apk * cs - aqk * s_phase;
                    a[(q, k)] = apk * s_phase.conj() + aqk * cs;
                }
                for k in 0..n {
                    let vkp = vectors[(k, p)];
                    let vkq = vectors[(k, q)];
                    vectors[(k, p)] = vkp * cs - vkq * s_phase.conj();
                    vectors[(k, q)] = vkp * s_phase + vkq * cs;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &k| a[(k, k)].re.total_cmp(&a[(i, i)].re));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| a[(i, i)].re).collect();
    let columns: Vec<DVector<C64>> = order
        .iter()
        .map(|&i| vectors.column(i).into_owned())
        .collect();
    (eigenvalues, DMatrix::from_columns(&columns))
}

/// Eigenvalues only, sorted nonincreasing.
pub fn hermitian_eigenvalues(matrix: &DMatrix<C64>) -> Vec<f64> {
    hermitian_eigen(matrix).0
}

/// Singular value decomposition M = U Σ V† by one-sided complex Jacobi:
/// column rotations orthogonalize M·V, so small singular values keep high
/// relative accuracy (no Gram squaring). Returns singular values above
/// `cutoff` (sorted nonincreasing) with the matching columns of U and V.
pub fn singular_decomposition(
    matrix: &DMatrix<C64>,
    cutoff: f64,
) -> (Vec<f64>, Vec<DVector<C64>>, Vec<DVector<C64>>) {
    let (rows, cols) = matrix.shape();
    let mut w = matrix.clone();
    let mut v: DMatrix<C64> = DMatrix::identity(cols, cols);

    // Columns whose squared norm falls below this carry no representable
    // singular value; skipping their pairs keeps the arithmetic away from
    // subnormals.
    let negligible = {
        let scale = w.norm().max(f64::MIN_POSITIVE);
        (1e-16 * scale).powi(2)
    };

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..cols {
            for q in (p + 1)..cols {
                let mut app = 0.0f64;
                let mut aqq = 0.0f64;
                let mut apq = C64::new(0.0, 0.0);
                for r in 0..rows {
                    app += w[(r, p)].norm_sqr();
                    aqq += w[(r, q)].norm_sqr();
                    apq += w[(r, p)].conj() * w[(r, q)];
                }
                if app <= negligible || aqq <= negligible {
                    continue;
                }
                let magnitude = apq.norm();
                if magnitude <= 1e-15 * (app * aqq).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = apq / C64::from(magnitude);
                let tau = (aqq - app) / (2.0 * magnitude);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let cs = C64::from(c);
                let s_phase = phase * C64::from(s);
                for r in 0..rows {
                    let wp = w[(r, p)];
                    let wq = w[(r, q)];
                    w[(r, p)] = wp * cs - wq * s_phase.conj();
                    w[(r, q)] = wp * s_phase + wq * cs;
                }
                for r in 0..cols {
                    let vp = v[(r, p)];
                    let vq = v[(r, q)];
                    v[(r, p)] = vp * cs - vq * s_phase.conj();
                    v[(r, q)] = vp * s_phase + vq * cs;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut order: Vec<(f64, usize)> = (0..cols).map(|i| (w.column(i).norm(), i)).collect();
    order.sort_by(|a, b| b.0.total_cmp(&a.0));

    let mut values = Vec::new();
    let mut left = Vec::new();
    let mut right = Vec::new();
    for (sigma, i) in order {
        if sigma <= cutoff {
            break;
        }
        values.push(sigma);
        left.push(w.column(i).into_owned() / C64::from(sigma));
        right.push(v.column(i).into_owned());
    }
    (values, left, right)
}

/// Sum of absolute eigenvalues of a Hermitian matrix (its trace norm).
pub fn hermitian_trace_norm(matrix: &DMatrix<C64>) -> f64 {
    hermitian_eigenvalues(matrix).iter().map(|l| l.abs()).sum()
}
