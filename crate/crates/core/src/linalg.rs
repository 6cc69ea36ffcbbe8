//! Small dense complex matrices (dimension 2, 4, 8 or 16) and a Hermitian
//! eigenvalue solver.
//!
//! Everything here is row-major and allocation-light; the largest operator
//! ever built is the 16×16 four-qubit collision unitary.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Largest supported Hilbert-space dimension (four qubits).
pub const MAX_DIM: usize = 16;

/// Tolerance for algebraic identities (Hermiticity, unitarity, traces).
pub const ALGEBRAIC_TOL: f64 = 1e-12;

pub const fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self {
            dim,
            data: vec![C64::new(0.0, 0.0); dim * dim],
        })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        let mut m = Self::zeros(dim)?;
        for i in 0..dim {
            m.data[i * dim + i] = C64::new(1.0, 0.0);
        }
        Ok(m)
    }

    /// Builds a matrix from row-major entries; `entries.len()` must be a
    /// supported square size.
    pub fn from_row_major(entries: Vec<C64>) -> Result<Self> {
        let dim = (entries.len() as f64).sqrt().round() as usize;
        if dim * dim != entries.len() {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        check_dim(dim)?;
        Ok(Self { dim, data: entries })
    }

    pub fn from_rows<const N: usize>(rows: [[C64; N]; N]) -> Result<Self> {
        Self::from_row_major(rows.iter().flatten().copied().collect())
    }

    pub fn from_real_rows<const N: usize>(rows: [[f64; N]; N]) -> Result<Self> {
        Self::from_row_major(rows.iter().flatten().map(|&v| c(v, 0.0)).collect())
    }

    /// Rank-one projector `|ψ⟩⟨ψ|` (not normalised).
    pub fn outer(ket: &[C64]) -> Result<Self> {
        let dim = ket.len();
        let mut m = Self::zeros(dim)?;
        for i in 0..dim {
            for j in 0..dim {
                m.data[i * dim + j] = ket[i] * ket[j].conj();
            }
        }
        Ok(m)
    }

    pub fn diagonal(diag: &[f64]) -> Result<Self> {
        let mut m = Self::zeros(diag.len())?;
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * diag.len() + i] = c(d, 0.0);
        }
        Ok(m)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.data[row * self.dim + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: C64) {
        self.data[row * self.dim + col] = value;
    }

    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut data = vec![C64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                data[j * n + i] = self.data[i * n + j].conj();
            }
        }
        Self { dim: n, data }
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&v| v * factor).collect(),
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Matrix product; panics on mismatched dimensions (use [`Self::try_mul`]
    /// where the shapes are not known statically).
    pub fn matmul(&self, rhs: &Self) -> Self {
        self.try_mul(rhs).expect("matrix dimensions must agree")
    }

    pub fn try_mul(&self, rhs: &Self) -> Result<Self> {
        self.same_dim(rhs)?;
        let n = self.dim;
        let mut data = vec![C64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let row = &rhs.data[k * n..(k + 1) * n];
                let out = &mut data[i * n..(i + 1) * n];
                for (o, &b) in out.iter_mut().zip(row) {
                    *o += a * b;
                }
            }
        }
        Ok(Self { dim: n, data })
    }

    /// `U · self · U†`.
    pub fn conjugate_by(&self, u: &Self) -> Result<Self> {
        Ok(u.try_mul(self)?.matmul(&u.adjoint()))
    }

    /// Kronecker product; `self` is the left (more significant) factor.
    pub fn kron(&self, rhs: &Self) -> Result<Self> {
        let (n, m) = (self.dim, rhs.dim);
        if n * m > MAX_DIM {
            return Err(Error::DimensionOverflow(n * m));
        }
        let dim = n * m;
        let mut data = vec![C64::new(0.0, 0.0); dim * dim];
        for i in 0..n {
            for j in 0..n {
                let a = self.data[i * n + j];
                for k in 0..m {
                    for l in 0..m {
                        data[(i * m + k) * dim + j * m + l] = a * rhs.data[k * m + l];
                    }
                }
            }
        }
        Ok(Self { dim, data })
    }

    /// Largest elementwise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.dim != other.dim {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.max_abs_diff(&self.adjoint()) <= tol
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        let id = Self::identity(self.dim).expect("dimension already validated");
        self.adjoint().matmul(self).max_abs_diff(&id) <= tol
    }

    /// Equality up to a global phase, within `tol` elementwise.
    pub fn approx_eq_up_to_phase(&self, other: &Self, tol: f64) -> bool {
        if self.dim != other.dim {
            return false;
        }
        // Align on the largest entry of `other`.
        let (idx, _) = other
            .data
            .iter()
            .enumerate()
            .fold((0, 0.0), |best, (i, v)| if v.norm() > best.1 { (i, v.norm()) } else { best });
        let (a, b) = (self.data[idx], other.data[idx]);
        if b.norm() == 0.0 {
            return self.data.iter().all(|v| v.norm() <= tol);
        }
        if a.norm() == 0.0 {
            return false;
        }
        let phase = (a / b) / (a / b).norm();
        self.max_abs_diff(&other.scale(phase)) <= tol
    }

    pub(crate) fn same_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        Ok(())
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{}) [", self.dim, self.dim)?;
        for i in 0..self.dim {
            write!(f, "  ")?;
            for j in 0..self.dim {
                let v = self.get(i, j);
                write!(f, "{:+.6}{:+.6}i  ", v.re, v.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "matrix dimensions must agree");
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "matrix dimensions must agree");
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim > MAX_DIM {
        return Err(Error::DimensionOverflow(dim));
    }
    if dim < 2 || !dim.is_power_of_two() {
        return Err(Error::UnsupportedDimension(dim));
    }
    Ok(())
}

/// Eigenvalues of a Hermitian matrix, sorted ascending.
///
/// Closed form for 2×2; cyclic complex Jacobi rotations otherwise. Only the
/// Hermitian part of the input is used.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Vec<f64> {
    let mut values = if m.dim() == 2 {
        let a = m.get(0, 0).re;
        let d = m.get(1, 1).re;
        let b = (m.get(0, 1) + m.get(1, 0).conj()) * 0.5;
        let mean = 0.5 * (a + d);
        let radius = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
        vec![mean - radius, mean + radius]
    } else {
        jacobi_eigenvalues(m)
    };
    values.sort_by(|a, b| a.total_cmp(b));
    values
}

fn jacobi_eigenvalues(m: &ComplexMatrix) -> Vec<f64> {
    let n = m.dim();
    // Work on the Hermitian part so tiny asymmetries cannot stall convergence.
    let mut a: Vec<C64> = vec![C64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..n {
            a[i * n + j] = (m.get(i, j) + m.get(j, i).conj()) * 0.5;
        }
    }
    let frob: f64 = a.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    let threshold = (frob * 1e-17).max(f64::MIN_POSITIVE);

    for _sweep in 0..64 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= threshold {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                let mag = apq.norm();
                if mag <= threshold * 1e-3 {
                    continue;
                }
                // G = diag(1, e^{-iφ}) on (p, q) makes the pivot real and
                // positive; a real Givens rotation then annihilates it.
                // A ← G† A G, touching only rows and columns p and q.
                let phase = apq / mag;
                let app = a[p * n + p].re;
                let aqq = a[q * n + q].re;
                let theta = (aqq - app) / (2.0 * mag);
                let t = if theta == 0.0 {
                    1.0
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let cs = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * cs;
                let g_qp = -phase.conj() * sn;
                let g_qq = phase.conj() * cs;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = akp * cs + akq * g_qp;
                    a[k * n + q] = akp * sn + akq * g_qq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = apk * cs + aqk * g_qp.conj();
                    a[q * n + k] = apk * sn + aqk * g_qq.conj();
                }
            }
        }
    }
    (0..n).map(|i| a[i * n + i].re).collect()
}

/// Sum of absolute eigenvalues of a Hermitian matrix.
pub fn trace_norm(m: &ComplexMatrix) -> f64 {
    hermitian_eigenvalues(m).iter().map(|v| v.abs()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_hermitian(dim: usize, seed: u64) -> ComplexMatrix {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut m = ComplexMatrix::zeros(dim).unwrap();
        for i in 0..dim {
            m.set(i, i, c(rng.random_range(-1.0..1.0), 0.0));
            for j in (i + 1)..dim {
                let v = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                m.set(i, j, v);
                m.set(j, i, v.conj());
            }
        }
        m
    }

    #[test]
    fn kron_of_identities() {
        let i2 = ComplexMatrix::identity(2).unwrap();
        assert_eq!(i2.kron(&i2).unwrap(), ComplexMatrix::identity(4).unwrap());
    }

    #[test]
    fn kron_rejects_overflow() {
        let i16 = ComplexMatrix::identity(16).unwrap();
        let i2 = ComplexMatrix::identity(2).unwrap();
        assert!(matches!(i16.kron(&i2), Err(Error::DimensionOverflow(32))));
    }

    #[test]
    fn unsupported_dimensions() {
        assert!(ComplexMatrix::zeros(3).is_err());
        assert!(ComplexMatrix::zeros(1).is_err());
        assert!(ComplexMatrix::from_row_major(vec![c(1.0, 0.0); 5]).is_err());
    }

    #[test]
    fn two_by_two_closed_form() {
        let m = ComplexMatrix::from_rows([[c(2.0, 0.0), c(0.0, -1.0)], [c(0.0, 1.0), c(2.0, 0.0)]]).unwrap();
        let ev = hermitian_eigenvalues(&m);
        assert!((ev[0] - 1.0).abs() < 1e-15 && (ev[1] - 3.0).abs() < 1e-15);
    }

    #[test]
    fn jacobi_matches_trace_and_determinant_invariants() {
        for (dim, seed) in [(4, 1), (4, 2), (8, 3), (16, 4), (16, 5)] {
            let m = random_hermitian(dim, seed);
            let ev = jacobi_eigenvalues(&m);
            let tr: f64 = ev.iter().sum();
            assert!((tr - m.trace().re).abs() < 1e-12, "trace mismatch for dim {dim}");
            let sq: f64 = ev.iter().map(|v| v * v).sum();
            let frob: f64 = m.entries().iter().map(|v| v.norm_sqr()).sum();
            assert!((sq - frob).abs() < 1e-11, "Frobenius mismatch for dim {dim}");
            // Each eigenvalue must make (M - λ I) singular: check via
            // the characteristic polynomial through a shifted trace identity.
            let cube: f64 = ev.iter().map(|v| v * v * v).sum();
            let m3 = m.matmul(&m).matmul(&m);
            assert!((cube - m3.trace().re).abs() < 1e-10);
        }
    }

    #[test]
    fn jacobi_on_known_spectrum() {
        // Unitarily rotated diag(-1, 0.25, 0.5, 2).
        let d = ComplexMatrix::diagonal(&[-1.0, 0.25, 0.5, 2.0]).unwrap();
        let h = random_hermitian(4, 9);
        // Cayley transform gives a unitary from a Hermitian matrix.
        let id = ComplexMatrix::identity(4).unwrap();
        let i_h = h.scale(c(0.0, 1.0));
        let num = &id - &i_h;
        let den = &id + &i_h;
        let den_inv = invert_gauss_jordan(&den);
        let u = num.matmul(&den_inv);
        assert!(u.is_unitary(1e-10));
        let rotated = d.conjugate_by(&u).unwrap();
        let ev = hermitian_eigenvalues(&rotated);
        for (got, want) in ev.iter().zip([-1.0, 0.25, 0.5, 2.0]) {
            assert!((got - want).abs() < 1e-10, "{got} vs {want}");
        }
    }

    fn invert_gauss_jordan(m: &ComplexMatrix) -> ComplexMatrix {
        // Gauss-Jordan; test-only helper.
        let n = m.dim();
        let mut a = m.entries().to_vec();
        let mut inv = ComplexMatrix::identity(n).unwrap().entries().to_vec();
        for col in 0..n {
            let pivot = (col..n).max_by(|&x, &y| a[x * n + col].norm().total_cmp(&a[y * n + col].norm())).unwrap();
            for k in 0..n {
                a.swap(col * n + k, pivot * n + k);
                inv.swap(col * n + k, pivot * n + k);
            }
            let p = a[col * n + col];
            for k in 0..n {
                a[col * n + k] /= p;
                inv[col * n + k] /= p;
            }
            for r in 0..n {
                if r != col {
                    let f = a[r * n + col];
                    for k in 0..n {
                        let (ack, ick) = (a[col * n + k], inv[col * n + k]);
                        a[r * n + k] -= f * ack;
                        inv[r * n + k] -= f * ick;
                    }
                }
            }
        }
        ComplexMatrix::from_row_major(inv).unwrap()
    }

    #[test]
    fn phase_insensitive_equality() {
        let x = ComplexMatrix::from_real_rows([[0.0, 1.0], [1.0, 0.0]]).unwrap();
        let y = x.scale(c(0.0, -1.0));
        assert!(x.approx_eq_up_to_phase(&y, 1e-14));
        assert!(x.max_abs_diff(&y) > 1.0);
    }
}
