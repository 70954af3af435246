//! Cyclic Jacobi diagonalization for small Hermitian matrices.
//!
//! A Hermitian `H = A + iB` is handled through its real symmetric embedding
//! `[[A, −B], [B, A]]`, whose spectrum is that of `H` with every eigenvalue
//! doubled. The embedding commutes with functional calculus, so `f(H)` is
//! read off the blocks of `f` applied to the embedding.

use num_complex::Complex64;

const OFF_TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 100;

/// Eigen-decomposition of a real symmetric `n × n` matrix (row-major).
/// Returns eigenvalues and the orthogonal matrix whose columns are eigenvectors.
pub(crate) fn symmetric_eigen(a: &[f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut a = a.to_vec();
    let mut v = vec![0.0; n * n];
    (0..n).for_each(|i| v[i * n + i] = 1.0);
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j] * a[i * n + j])
            .sum::<f64>()
            .sqrt();
        if off < OFF_TOL {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k * n + p], a[k * n + q]);
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p * n + k], a[q * n + k]);
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[k * n + p], v[k * n + q]);
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    ((0..n).map(|i| a[i * n + i]).collect(), v)
}

fn embed(h: &[Complex64], n: usize) -> Vec<f64> {
    let m = 2 * n;
    let mut e = vec![0.0; m * m];
    for i in 0..n {
        for j in 0..n {
            let z = h[i * n + j];
            e[i * m + j] = z.re;
            e[(i + n) * m + j + n] = z.re;
            e[i * m + j + n] = -z.im;
            e[(i + n) * m + j] = z.im;
        }
    }
    e
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub(crate) fn hermitian_eigenvalues(h: &[Complex64], n: usize) -> Vec<f64> {
    let (mut vals, _) = symmetric_eigen(&embed(h, n), 2 * n);
    vals.sort_by(f64::total_cmp);
    // each eigenvalue appears twice in the embedding
    vals.into_iter().step_by(2).collect()
}

/// `f(H)` for a Hermitian `H`.
pub(crate) fn hermitian_apply(h: &[Complex64], n: usize, f: impl Fn(f64) -> f64) -> Vec<Complex64> {
    let m = 2 * n;
    let (vals, vecs) = symmetric_eigen(&embed(h, n), m);
    let fv: Vec<f64> = vals.iter().map(|&x| f(x)).collect();
    let entry = |i: usize, j: usize| -> f64 {
        (0..m)
            .map(|k| vecs[i * m + k] * fv[k] * vecs[j * m + k])
            .sum()
    };
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..n {
            out[i * n + j] = Complex64::new(entry(i, j), entry(i + n, j));
        }
    }
    out
}

pub(crate) fn matmul(a: &[Complex64], b: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == Complex64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..n {
                out[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    out
}
