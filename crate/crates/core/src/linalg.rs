//! Small dense complex matrices.
//!
//! Everything in this crate lives in dimension 2^n with n <= 12, so a plain
//! row-major `Vec<Complex64>` is both the simplest and the fastest sensible
//! representation. The only nontrivial routine is a cyclic Jacobi
//! eigensolver for Hermitian matrices, which is all the spectral machinery
//! the witness decomposition and density-matrix checks need.

use num_complex::Complex64;

/// Square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(dim: usize) -> Self {
        CMatrix { dim, data: vec![Complex64::new(0.0, 0.0); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Rank-one projector |v><v| (v need not be normalized; caller's duty).
    pub fn outer(v: &[Complex64]) -> Self {
        let dim = v.len();
        Self::from_fn(dim, |i, j| v[i] * v[j].conj())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&mut self, c: Complex64) {
        for x in &mut self.data {
            *x *= c;
        }
    }

    /// self += c * other
    pub fn add_scaled(&mut self, c: Complex64, other: &CMatrix) {
        assert_eq!(self.dim, other.dim);
        for (x, y) in self.data.iter_mut().zip(&other.data) {
            *x += c * y;
        }
    }

    pub fn mul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, other.dim);
        let dim = self.dim;
        let mut out = CMatrix::zeros(dim);
        for i in 0..dim {
            for k in 0..dim {
                let a = self[(i, k)];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                let orow = other.row(k);
                let out_row = &mut out.data[i * dim..(i + 1) * dim];
                for (o, b) in out_row.iter_mut().zip(orow) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.dim, v.len());
        self.data
            .chunks_exact(self.dim)
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn hermiticity_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for j in i..self.dim {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn kron(&self, other: &CMatrix) -> CMatrix {
        let (da, db) = (self.dim, other.dim);
        CMatrix::from_fn(da * db, |i, j| {
            self[(i / db, j / db)] * other[(i % db, j % db)]
        })
    }

    /// Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.
    ///
    /// Returns eigenvalues in ascending order and the matching orthonormal
    /// eigenvectors as the columns of the returned matrix.
    pub fn eigh(&self) -> (Vec<f64>, CMatrix) {
        let dim = self.dim;
        let mut a = self.clone();
        let mut v = CMatrix::identity(dim);
        let scale = self.frobenius_norm().max(1.0);
        let stop = (1e-14 * scale).powi(2) * (dim * dim) as f64;

        for _sweep in 0..100 {
            let off: f64 = (0..dim)
                .flat_map(|p| ((p + 1)..dim).map(move |q| (p, q)))
                .map(|(p, q)| a[(p, q)].norm_sqr())
                .sum();
            if off <= stop {
                break;
            }
            for p in 0..dim {
                for q in (p + 1)..dim {
                    let apq = a[(p, q)];
                    let norm = apq.norm();
                    if norm <= 1e-300 {
                        continue;
                    }
                    let phase = apq / norm;
                    let app = a[(p, p)].re;
                    let aqq = a[(q, q)].re;
                    // Zero out the (p, q) entry of the phase-reduced real
                    // 2x2 block [[app, norm], [norm, aqq]].
                    let tau = (aqq - app) / (2.0 * norm);
                    let t = if tau >= 0.0 {
                        -1.0 / (tau + (1.0 + tau * tau).sqrt())
                    } else {
                        1.0 / (-tau + (1.0 + tau * tau).sqrt())
                    };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = t * c;
                    // Right-multiply columns p, q of `a` and `v` by
                    // R = [[c, -s], [s e^{-i phi}, c e^{-i phi}]],
                    // then left-multiply rows p, q of `a` by R^H.
                    let sp = phase.conj() * s;
                    let cp = phase.conj() * c;
                    for i in 0..dim {
                        let aip = a[(i, p)];
                        let aiq = a[(i, q)];
                        a[(i, p)] = c * aip + sp * aiq;
                        a[(i, q)] = -s * aip + cp * aiq;
                        let vip = v[(i, p)];
                        let viq = v[(i, q)];
                        v[(i, p)] = c * vip + sp * viq;
                        v[(i, q)] = -s * vip + cp * viq;
                    }
                    let sip = phase * s;
                    let cip = phase * c;
                    for j in 0..dim {
                        let apj = a[(p, j)];
                        let aqj = a[(q, j)];
                        a[(p, j)] = c * apj + sip * aqj;
                        a[(q, j)] = -s * apj + cip * aqj;
                    }
                }
            }
        }

        let mut order: Vec<usize> = (0..dim).collect();
        let eigs: Vec<f64> = (0..dim).map(|i| a[(i, i)].re).collect();
        order.sort_by(|&i, &j| eigs[i].partial_cmp(&eigs[j]).unwrap());
        let values: Vec<f64> = order.iter().map(|&i| eigs[i]).collect();
        let vectors = CMatrix::from_fn(dim, |i, j| v[(i, order[j])]);
        (values, vectors)
    }

    /// Column `j` as an owned vector.
    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.dim).map(|i| self[(i, j)]).collect()
    }

    /// Positive-semidefiniteness up to `tol`: attempts a Cholesky
    /// factorization of self + tol I, which succeeds exactly when the
    /// smallest eigenvalue is at least -tol (up to rounding). Much cheaper
    /// than a full eigendecomposition for the larger dimensions.
    pub fn is_psd_within(&self, tol: f64) -> bool {
        let dim = self.dim;
        let mut l = self.clone();
        for i in 0..dim {
            l[(i, i)] += Complex64::new(tol, 0.0);
        }
        for j in 0..dim {
            let mut pivot = l[(j, j)].re;
            for k in 0..j {
                pivot -= l[(j, k)].norm_sqr();
            }
            if pivot < -tol * 1e-3 {
                return false;
            }
            let pivot = pivot.max(0.0).sqrt();
            l[(j, j)] = Complex64::new(pivot, 0.0);
            if pivot == 0.0 {
                // singular direction: the whole column must vanish too
                for i in (j + 1)..dim {
                    let mut v = l[(i, j)];
                    for k in 0..j {
                        v -= l[(i, k)] * l[(j, k)].conj();
                    }
                    if v.norm() > tol.sqrt() * 10.0 {
                        return false;
                    }
                    l[(i, j)] = Complex64::new(0.0, 0.0);
                }
                continue;
            }
            for i in (j + 1)..dim {
                let mut v = l[(i, j)];
                for k in 0..j {
                    v -= l[(i, k)] * l[(j, k)].conj();
                }
                l[(i, j)] = v / pivot;
            }
        }
        true
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.dim + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.dim + j]
    }
}
