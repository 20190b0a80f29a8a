//! Small dense linear algebra used across the crate.
//!
//! Everything here is sized for the problems we actually solve (systems of
//! dimension ≤ 12): exact Gaussian elimination over the rationals for polytope
//! work, LU with partial pivoting over ℂ for Newton steps, and a cyclic Jacobi
//! eigensolver for Hermitian matrices. Correctness over speed throughout.

// Matrix kernels read better with explicit row/column indices.
#![allow(clippy::needless_range_loop)]

use alloc::vec;
use alloc::vec::Vec;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
// Supplies f64 math methods when building without std; shadowed by the
// inherent methods otherwise.
#[cfg_attr(feature = "std", allow(unused_imports))]
use num_traits::Float;

/// Reduced row echelon form in place. Returns the pivot column of each row
/// that received one, in row order.
fn rref(m: &mut [Vec<BigRational>]) -> Vec<usize> {
    let rows = m.len();
    if rows == 0 {
        return Vec::new();
    }
    let cols = m[0].len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        // Largest-free pivoting is pointless over exact rationals; take the
        // first nonzero entry.
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].clone();
        for x in m[r].iter_mut() {
            *x = &*x / &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..cols {
                    let sub = &m[r][j] * &f;
                    m[i][j] = &m[i][j] - sub;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows {
            break;
        }
    }
    pivots
}

/// Rank of a rational matrix.
pub fn rational_rank(a: &[Vec<BigRational>]) -> usize {
    let mut m: Vec<Vec<BigRational>> = a.to_vec();
    rref(&mut m).len()
}

/// Unique solution of the square system `a x = b`, or `None` when `a` is
/// singular.
pub fn rational_solve(a: &[Vec<BigRational>], b: &[BigRational]) -> Option<Vec<BigRational>> {
    let n = a.len();
    let mut m: Vec<Vec<BigRational>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    let pivots = rref(&mut m);
    if pivots.len() != n || pivots.iter().any(|&c| c >= n) {
        return None;
    }
    Some(m.iter().map(|row| row[n].clone()).collect())
}

/// Basis of the kernel of a rational matrix (columns indexed `0..cols`).
pub fn rational_kernel(a: &[Vec<BigRational>], cols: usize) -> Vec<Vec<BigRational>> {
    let mut m: Vec<Vec<BigRational>> = a.to_vec();
    let pivots = rref(&mut m);
    let mut basis = Vec::new();
    for free in 0..cols {
        if pivots.contains(&free) {
            continue;
        }
        let mut v = vec![BigRational::zero(); cols];
        v[free] = BigRational::one();
        for (row, &pc) in pivots.iter().enumerate() {
            v[pc] = -m[row][free].clone();
        }
        basis.push(v);
    }
    basis
}

/// Clears denominators and common factors, producing a primitive integer
/// vector pointing the same way.
pub fn primitive_direction(v: &[BigRational]) -> Vec<BigInt> {
    let mut denom_lcm = BigInt::one();
    for x in v {
        denom_lcm = num_integer::lcm(denom_lcm, x.denom().clone());
    }
    let ints: Vec<BigInt> = v.iter().map(|x| (x * &denom_lcm).to_integer()).collect();
    let mut g = BigInt::zero();
    for x in &ints {
        g = num_integer::gcd(g, x.abs());
    }
    if g.is_zero() {
        return ints;
    }
    ints.into_iter().map(|x| x / &g).collect()
}

/// LU decomposition with partial pivoting; solves `a x = b` over ℂ.
/// Returns `None` when a pivot collapses below `tiny`.
pub fn complex_solve(a: &[Vec<Complex64>], b: &[Complex64]) -> Option<Vec<Complex64>> {
    let n = a.len();
    let mut m: Vec<Vec<Complex64>> = a.to_vec();
    let mut rhs: Vec<Complex64> = b.to_vec();
    let tiny = 1e-300;
    for c in 0..n {
        let (p, mag) = (c..n)
            .map(|i| (i, m[i][c].norm()))
            .max_by(|x, y| x.1.partial_cmp(&y.1).unwrap())
            .unwrap();
        if mag < tiny {
            return None;
        }
        m.swap(c, p);
        rhs.swap(c, p);
        for i in c + 1..n {
            let f = m[i][c] / m[c][c];
            for j in c..n {
                let s = m[c][j];
                m[i][j] -= f * s;
            }
            let s = rhs[c];
            rhs[i] -= f * s;
        }
    }
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    for i in (0..n).rev() {
        let mut acc = rhs[i];
        for j in i + 1..n {
            acc -= m[i][j] * x[j];
        }
        x[i] = acc / m[i][i];
    }
    Some(x)
}

/// Determinant via LU with partial pivoting.
pub fn complex_det(a: &[Vec<Complex64>]) -> Complex64 {
    let n = a.len();
    let mut m: Vec<Vec<Complex64>> = a.to_vec();
    let mut det = Complex64::new(1.0, 0.0);
    for c in 0..n {
        let (p, mag) = (c..n)
            .map(|i| (i, m[i][c].norm()))
            .max_by(|x, y| x.1.partial_cmp(&y.1).unwrap())
            .unwrap();
        if mag == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if p != c {
            m.swap(c, p);
            det = -det;
        }
        det *= m[c][c];
        for i in c + 1..n {
            let f = m[i][c] / m[c][c];
            for j in c..n {
                let s = m[c][j];
                m[i][j] -= f * s;
            }
        }
    }
    det
}

/// Eigendecomposition of a Hermitian matrix by cyclic Jacobi sweeps.
///
/// Returns eigenvalues in ascending order with matching orthonormal
/// eigenvectors (columns of the second return value).
pub fn hermitian_eigen(a: &[Vec<Complex64>]) -> (Vec<f64>, Vec<Vec<Complex64>>) {
    let n = a.len();
    let mut m: Vec<Vec<Complex64>> = a.to_vec();
    // Accumulated unitary, starts as identity.
    let mut v: Vec<Vec<Complex64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0))
                .collect()
        })
        .collect();
    let norm: f64 = m
        .iter()
        .flat_map(|row| row.iter().map(|x| x.norm_sqr()))
        .sum::<f64>()
        .sqrt();
    if norm == 0.0 {
        return (vec![0.0; n], v);
    }
    let off = |m: &[Vec<Complex64>]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += m[i][j].norm_sqr();
                }
            }
        }
        s
    };
    for _sweep in 0..200 {
        if off(&m).sqrt() <= 1e-15 * norm {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p][q];
                if apq.norm() <= 1e-18 * norm {
                    continue;
                }
                let app = m[p][p].re;
                let aqq = m[q][q].re;
                let phase = apq / apq.norm();
                let tau = (aqq - app) / (2.0 * apq.norm());
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // Columns: col_p <- c*col_p - s*conj(phase)*col_q,
                //          col_q <- s*phase*col_p + c*col_q.
                let cp = Complex64::new(c, 0.0);
                let sp = phase * s;
                for i in 0..n {
                    let mp = m[i][p];
                    let mq = m[i][q];
                    m[i][p] = cp * mp - sp.conj() * mq;
                    m[i][q] = sp * mp + cp * mq;
                }
                for j in 0..n {
                    let mp = m[p][j];
                    let mq = m[q][j];
                    m[p][j] = cp * mp - sp * mq;
                    m[q][j] = sp.conj() * mp + cp * mq;
                }
                for i in 0..n {
                    let vp = v[i][p];
                    let vq = v[i][q];
                    v[i][p] = cp * vp - sp.conj() * vq;
                    v[i][q] = sp * vp + cp * vq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[i][i].re.partial_cmp(&m[j][j].re).unwrap());
    let eigs: Vec<f64> = order.iter().map(|&i| m[i][i].re).collect();
    let vecs: Vec<Vec<Complex64>> = (0..n)
        .map(|i| order.iter().map(|&j| v[i][j]).collect())
        .collect();
    (eigs, vecs)
}

/// Singular values (ascending) of a square complex matrix together with the
/// right-singular vector of the smallest one, via the Hermitian matrix AᴴA.
pub fn singular_values(a: &[Vec<Complex64>]) -> (Vec<f64>, Vec<Complex64>) {
    let n = a.len();
    let mut ata = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    for i in 0..n {
        for j in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..n {
                acc += a[k][i].conj() * a[k][j];
            }
            ata[i][j] = acc;
        }
    }
    let (eigs, vecs) = hermitian_eigen(&ata);
    let svs: Vec<f64> = eigs.iter().map(|&e| e.max(0.0).sqrt()).collect();
    let kernel_dir: Vec<Complex64> = (0..n).map(|i| vecs[i][0]).collect();
    (svs, kernel_dir)
}

/// Minimum-norm least-squares solution of Ax = b via the spectral
/// decomposition of AᴴA, discarding singular directions below
/// rel_cut × σ_max. Accepts rectangular row-major A (m rows, n columns,
/// b of length m). Suits rank-deficient Newton systems, where components
/// along a near-kernel would otherwise make the step drift.
pub fn pseudo_solve(a: &[Vec<Complex64>], b: &[Complex64], rel_cut: f64) -> Vec<Complex64> {
    let m = a.len();
    let n = a.first().map_or(0, Vec::len);
    let zero = Complex64::new(0.0, 0.0);
    let mut ata = vec![vec![zero; n]; n];
    let mut rhs = vec![zero; n];
    for i in 0..n {
        for j in 0..n {
            let mut acc = zero;
            for k in 0..m {
                acc += a[k][i].conj() * a[k][j];
            }
            ata[i][j] = acc;
        }
        let mut acc = zero;
        for k in 0..m {
            acc += a[k][i].conj() * b[k];
        }
        rhs[i] = acc;
    }
    let (eigs, vecs) = hermitian_eigen(&ata);
    let smax2 = eigs.last().copied().unwrap_or(0.0).max(0.0);
    let cut2 = rel_cut * rel_cut * smax2;
    let mut x = vec![zero; n];
    for (idx, &s2) in eigs.iter().enumerate() {
        if s2 <= cut2 || s2 <= 0.0 {
            continue;
        }
        let mut c = zero;
        for k in 0..n {
            c += vecs[k][idx].conj() * rhs[k];
        }
        c /= s2;
        for k in 0..n {
            x[k] += vecs[k][idx] * c;
        }
    }
    x
}
