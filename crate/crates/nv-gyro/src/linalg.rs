//! Minimal 3x3 real/complex linear algebra and a cyclic-Jacobi symmetric
//! eigensolver.
//!
//! Everything in this crate lives in a fixed three-dimensional Hilbert space,
//! so the types are plain fixed-size arrays and the routines are written out
//! directly instead of pulling in a general-purpose matrix library.

use crate::error::{Error, Result};
use num_complex::Complex;

/// Double-precision complex scalar.
pub type C64 = Complex<f64>;
/// Real 3-vector.
pub type RVec3 = [f64; 3];
/// Complex amplitude triple.
pub type CVec3 = [C64; 3];
/// Real 3x3 matrix, row-major.
pub type RMat3 = [[f64; 3]; 3];
/// Complex 3x3 matrix, row-major.
pub type CMat3 = [[C64; 3]; 3];

/// One full turn; every dynamical phase in this crate is `TAU * frequency * t`.
pub const TAU: f64 = std::f64::consts::TAU;

/// Unit complex number `exp(i * phi)`.
pub fn cis(phi: f64) -> C64 {
    C64::new(phi.cos(), phi.sin())
}

/// Real identity matrix.
pub fn r_identity() -> RMat3 {
    [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
}

/// Complex identity matrix.
pub fn c_identity() -> CMat3 {
    let mut m = c_zeros();
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = C64::new(1.0, 0.0);
    }
    m
}

/// Complex zero matrix.
pub fn c_zeros() -> CMat3 {
    [[C64::new(0.0, 0.0); 3]; 3]
}

/// Promote a real matrix to a complex one.
pub fn rmat_to_cmat(m: &RMat3) -> CMat3 {
    let mut out = c_zeros();
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = C64::new(m[i][j], 0.0);
        }
    }
    out
}

/// Real matrix transpose.
pub fn rmat_transpose(m: &RMat3) -> RMat3 {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = m[j][i];
        }
    }
    out
}

/// Real matrix product.
pub fn rmat_mul(a: &RMat3, b: &RMat3) -> RMat3 {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let mut s = 0.0;
            for (k, bk) in b.iter().enumerate() {
                s += a[i][k] * bk[j];
            }
            out[i][j] = s;
        }
    }
    out
}

/// Real matrix times real vector.
pub fn rmat_vec(m: &RMat3, v: &RVec3) -> RVec3 {
    let mut out = [0.0; 3];
    for i in 0..3 {
        out[i] = m[i][0] * v[0] + m[i][1] * v[1] + m[i][2] * v[2];
    }
    out
}

/// Complex matrix product.
pub fn cmat_mul(a: &CMat3, b: &CMat3) -> CMat3 {
    let mut out = c_zeros();
    for i in 0..3 {
        for j in 0..3 {
            let mut s = C64::new(0.0, 0.0);
            for (k, bk) in b.iter().enumerate() {
                s += a[i][k] * bk[j];
            }
            out[i][j] = s;
        }
    }
    out
}

/// Conjugate transpose.
pub fn cmat_adjoint(m: &CMat3) -> CMat3 {
    let mut out = c_zeros();
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = m[j][i].conj();
        }
    }
    out
}

/// Complex matrix times complex vector.
pub fn cmat_vec(m: &CMat3, v: &CVec3) -> CVec3 {
    let mut out = [C64::new(0.0, 0.0); 3];
    for i in 0..3 {
        out[i] = m[i][0] * v[0] + m[i][1] * v[1] + m[i][2] * v[2];
    }
    out
}

/// Entrywise difference a - b.
pub fn cmat_sub(a: &CMat3, b: &CMat3) -> CMat3 {
    let mut out = c_zeros();
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = a[i][j] - b[i][j];
        }
    }
    out
}

/// Scale every entry by a complex factor.
pub fn cmat_scale(m: &CMat3, s: C64) -> CMat3 {
    let mut out = c_zeros();
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = s * m[i][j];
        }
    }
    out
}

/// Largest entry magnitude of a complex matrix.
pub fn cmat_max_abs(m: &CMat3) -> f64 {
    let mut best = 0.0_f64;
    for row in m {
        for e in row {
            best = best.max(e.norm());
        }
    }
    best
}

/// Frobenius norm of a real matrix.
pub fn rmat_fro(m: &RMat3) -> f64 {
    let mut s = 0.0;
    for row in m {
        for e in row {
            s += e * e;
        }
    }
    s.sqrt()
}

/// Hermitian inner product `<a|b>` (conjugate-linear in the first slot).
pub fn cdot(a: &CVec3, b: &CVec3) -> C64 {
    a[0].conj() * b[0] + a[1].conj() * b[1] + a[2].conj() * b[2]
}

/// Euclidean norm of a complex 3-vector.
pub fn cvec_norm(v: &CVec3) -> f64 {
    (v[0].norm_sqr() + v[1].norm_sqr() + v[2].norm_sqr()).sqrt()
}

/// Largest componentwise magnitude of the difference of two complex vectors.
pub fn cvec_max_abs_diff(a: &CVec3, b: &CVec3) -> f64 {
    let mut best = 0.0_f64;
    for i in 0..3 {
        best = best.max((a[i] - b[i]).norm());
    }
    best
}

/// Uniform grid of `n >= 1` points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let step = (hi - lo) / ((n - 1) as f64);
    (0..n)
        .map(|i| if i == n - 1 { hi } else { lo + step * i as f64 })
        .collect()
}

/// Solve `a x = b` for a real 3x3 system by Gaussian elimination with
/// partial pivoting. Returns `None` when the matrix is numerically singular.
pub fn solve3(a: &RMat3, b: &RVec3) -> Option<RVec3> {
    let mut m = *a;
    let mut rhs = *b;
    for col in 0..3 {
        let mut piv = col;
        for row in col + 1..3 {
            if m[row][col].abs() > m[piv][col].abs() {
                piv = row;
            }
        }
        if m[piv][col].abs() < f64::MIN_POSITIVE * 8.0 {
            return None;
        }
        if piv != col {
            m.swap(piv, col);
            rhs.swap(piv, col);
        }
        let pivot_row = m[col];
        for row in col + 1..3 {
            let f = m[row][col] / pivot_row[col];
            for (entry, pivot) in m[row].iter_mut().zip(&pivot_row).skip(col) {
                *entry -= f * pivot;
            }
            rhs[row] -= f * rhs[col];
        }
    }
    let mut x = [0.0; 3];
    for col in (0..3).rev() {
        let mut s = rhs[col];
        for k in col + 1..3 {
            s -= m[col][k] * x[k];
        }
        x[col] = s / m[col][col];
    }
    Some(x)
}

/// Sweep budget for the Jacobi eigensolver; a symmetric 3x3 converges
/// quadratically and needs about five sweeps, so hitting the cap means the
/// input carried NaN/Inf.
const MAX_JACOBI_SWEEPS: usize = 32;

/// Relative off-diagonal threshold declaring convergence. Well below the
/// 1e-11 * ||M|| residual the eigensystem consumers require, comfortably
/// above what double precision can always reach (~1e-16 relative).
const JACOBI_REL_TOL: f64 = 1e-15;

/// Eigenvalues (ascending) and orthonormal eigenvector columns of a real
/// symmetric 3x3 matrix, computed by cyclic Jacobi rotations.
///
/// Each returned eigenvector is sign-fixed so that its largest-magnitude
/// component is positive, giving a deterministic decomposition for CSV
/// output and cross-run comparisons.
pub fn sym_eigen3(m: &RMat3) -> Result<(RVec3, RMat3)> {
    let mut a = *m;
    let mut v = r_identity();
    let fro = rmat_fro(&a);
    if !fro.is_finite() {
        return Err(Error::InvalidParams(
            "eigensolver input contains non-finite entries".into(),
        ));
    }
    let threshold = JACOBI_REL_TOL * fro;

    let mut converged = false;
    let mut off = 0.0;
    for _ in 0..MAX_JACOBI_SWEEPS {
        off = (a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2]).sqrt();
        if off <= threshold {
            converged = true;
            break;
        }
        for (p, q) in [(0usize, 1usize), (0, 2), (1, 2)] {
            let apq = a[p][q];
            if apq == 0.0 {
                continue;
            }
            // Rotation angle chosen to annihilate a[p][q] (smaller-root
            // tangent for numerical stability).
            let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
            let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
            let c = 1.0 / (t * t + 1.0).sqrt();
            let s = t * c;

            let app = a[p][p];
            let aqq = a[q][q];
            a[p][p] = app - t * apq;
            a[q][q] = aqq + t * apq;
            a[p][q] = 0.0;
            a[q][p] = 0.0;
            let r = 3 - p - q;
            let arp = a[r][p];
            let arq = a[r][q];
            a[r][p] = c * arp - s * arq;
            a[p][r] = a[r][p];
            a[r][q] = s * arp + c * arq;
            a[q][r] = a[r][q];
            for row in &mut v {
                let vip = row[p];
                let viq = row[q];
                row[p] = c * vip - s * viq;
                row[q] = s * vip + c * viq;
            }
        }
    }
    if !converged {
        return Err(Error::EigenConvergence {
            sweeps: MAX_JACOBI_SWEEPS,
            off,
        });
    }

    // Sort eigenvalues ascending, carrying eigenvector columns along.
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| a[i][i].partial_cmp(&a[j][j]).expect("finite eigenvalues"));
    let mut lambdas = [0.0; 3];
    let mut vectors = [[0.0; 3]; 3];
    for (dst, &src) in order.iter().enumerate() {
        lambdas[dst] = a[src][src];
        for row in 0..3 {
            vectors[row][dst] = v[row][src];
        }
    }

    // Deterministic sign: largest-magnitude component positive.
    for col in 0..3 {
        let mut arg = 0;
        for (row, vec_row) in vectors.iter().enumerate().skip(1) {
            if vec_row[col].abs() > vectors[arg][col].abs() {
                arg = row;
            }
        }
        if vectors[arg][col] < 0.0 {
            for row in vectors.iter_mut() {
                row[col] = -row[col];
            }
        }
    }
    Ok((lambdas, vectors))
}
