//! Dense 16x16 complex operators and a Hermitian Jacobi eigensolver.
//!
//! The register lives in a fixed 16-dimensional space, so operators are
//! plain `[[Complex64; 16]; 16]` arrays; no sparse or generic machinery.
//! The eigensolver is a cyclic Jacobi iteration, which is robust and
//! exact-enough for the at-most-6x6 symmetry blocks it is applied to.

use num_complex::Complex64;

use crate::basis::DIM;
use crate::error::SimError;

/// A 16x16 complex operator in the product basis, entries in rad/s.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator16 {
    pub entries: [[Complex64; DIM]; DIM],
}

impl Operator16 {
    pub fn zero() -> Self {
        Operator16 {
            entries: [[Complex64::ZERO; DIM]; DIM],
        }
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i][j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.entries[i][j] = v;
    }

    /// Adds `v` to entry `(i, j)` and `conj(v)` to `(j, i)`.
    pub fn add_hermitian_pair(&mut self, i: usize, j: usize, v: Complex64) {
        if i == j {
            self.entries[i][i] += v;
        } else {
            self.entries[i][j] += v;
            self.entries[j][i] += v.conj();
        }
    }

    /// Largest deviation `|M[i][j] - conj(M[j][i])|`.
    pub fn hermiticity_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..DIM {
            for j in 0..DIM {
                worst = worst.max((self.entries[i][j] - self.entries[j][i].conj()).norm());
            }
        }
        worst
    }

    pub fn max_abs_entry(&self) -> f64 {
        let mut m = 0.0f64;
        for row in &self.entries {
            for v in row {
                m = m.max(v.norm());
            }
        }
        m
    }

    pub fn trace(&self) -> Complex64 {
        (0..DIM).map(|i| self.entries[i][i]).sum()
    }

    /// Matrix-vector product `M v`.
    pub fn apply(&self, v: &[Complex64; DIM]) -> [Complex64; DIM] {
        let mut out = [Complex64::ZERO; DIM];
        for (i, row) in self.entries.iter().enumerate() {
            let mut acc = Complex64::ZERO;
            for (m, &c) in row.iter().zip(v.iter()) {
                acc += m * c;
            }
            out[i] = acc;
        }
        out
    }
}

/// Eigenpairs of a Hermitian matrix: `values[k]` belongs to the k-th
/// column of `vectors`.
#[derive(Debug, Clone)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    /// `vectors[row][k]` is component `row` of eigenvector `k`.
    pub vectors: Vec<Vec<Complex64>>,
}

const MAX_SWEEPS: usize = 60;

/// Diagonalizes a Hermitian matrix by cyclic Jacobi rotations.
///
/// Convergence: all off-diagonal magnitudes below `1e-13 * max|entry|`
/// of the input. Eigenpairs are returned sorted by ascending eigenvalue.
/// Non-convergence cannot happen for Hermitian input of this size and is
/// treated as a fatal internal error.
pub fn hermitian_eigen(matrix: &[Vec<Complex64>]) -> Result<EigenPairs, SimError> {
    let n = matrix.len();
    debug_assert!(matrix.iter().all(|row| row.len() == n));
    let mut a: Vec<Vec<Complex64>> = matrix.to_vec();
    let mut v: Vec<Vec<Complex64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        Complex64::ONE
                    } else {
                        Complex64::ZERO
                    }
                })
                .collect()
        })
        .collect();

    let scale = a
        .iter()
        .flatten()
        .map(|c| c.norm())
        .fold(0.0f64, f64::max);
    if scale == 0.0 || n == 1 {
        return Ok(sorted_pairs(&a, &v));
    }
    let tol = 1e-13 * scale;

    for _sweep in 0..MAX_SWEEPS {
        let mut off = 0.0f64;
        for p in 0..n - 1 {
            for q in p + 1..n {
                off = off.max(a[p][q].norm());
            }
        }
        if off < tol {
            return Ok(sorted_pairs(&a, &v));
        }

        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a[p][q];
                let mag = apq.norm();
                if mag < tol {
                    continue;
                }
                // Phase so that conj(f) * a[p][q] is real positive, then a
                // real rotation angle as in the classical Jacobi scheme.
                let f = apq / mag;
                let app = a[p][p].re;
                let aqq = a[q][q].re;
                let theta = (aqq - app) / (2.0 * mag);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (theta * theta + 1.0).sqrt())
                } else {
                    -1.0 / (-theta + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let sf = s * f;
                let sfc = sf.conj();

                // Columns p and q of both a and v: right-multiply by the
                // rotation; rows of a follow from hermiticity.
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = akp * c - akq * sfc;
                    a[k][q] = akp * sf + akq * c;
                    let vkp = v[k][p];
                    let vkq = v[k][q];
                    v[k][p] = vkp * c - vkq * sfc;
                    v[k][q] = vkp * sf + vkq * c;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = apk * c - aqk * sf;
                    a[q][k] = apk * sfc + aqk * c;
                }
                // Diagonal entries stay real; clamp the rotated pivot pair.
                a[p][p] = Complex64::new(a[p][p].re, 0.0);
                a[q][q] = Complex64::new(a[q][q].re, 0.0);
                a[p][q] = Complex64::ZERO;
                a[q][p] = Complex64::ZERO;
            }
        }
    }
    Err(SimError::EigenConvergence(MAX_SWEEPS))
}

fn sorted_pairs(a: &[Vec<Complex64>], v: &[Vec<Complex64>]) -> EigenPairs {
    let n = a.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i][i].re.partial_cmp(&a[j][j].re).unwrap());
    let values = order.iter().map(|&k| a[k][k].re).collect();
    let vectors = (0..n)
        .map(|row| order.iter().map(|&k| v[row][k]).collect())
        .collect();
    EigenPairs { values, vectors }
}

/// Diagonalizes a full 16x16 Hermitian operator.
pub fn hermitian_eigen16(op: &Operator16) -> Result<EigenPairs, SimError> {
    let rows: Vec<Vec<Complex64>> = op.entries.iter().map(|r| r.to_vec()).collect();
    hermitian_eigen(&rows)
}
