//! Dense complex matrices for one- and two-qubit operators.
//!
//! Everything here works on small square matrices (dimension 2 to 16) stored
//! row-major. The two-qubit helpers assume the Kronecker convention in which
//! qubit A is the slow index: basis order |00>, |01>, |10>, |11>.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use nalgebra::{DMatrix, Matrix4};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Elementwise tolerance for `M = M†`.
pub const HERMITICITY_TOL: f64 = 1e-12;
/// Smallest eigenvalue still accepted as positive semidefinite.
pub const PSD_SLACK: f64 = 1e-10;
/// Accuracy target for Hermitian eigenvalues.
pub const EIG_TOL: f64 = 1e-10;
/// Allowed deviation of a density matrix trace from one.
pub const TRACE_TOL: f64 = 1e-12;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub(crate) const I: Complex64 = Complex64::new(0.0, 1.0);

/// One of the two qubits of a bipartite state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Subsystem {
    A,
    B,
}

impl Subsystem {
    pub fn other(self) -> Self {
        match self {
            Subsystem::A => Subsystem::B,
            Subsystem::B => Subsystem::A,
        }
    }
}

/// Square complex matrix with row-major storage.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "matrix dimension must be positive");
        Self {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    /// Builds a matrix from row-major entries. Fails when the entry count is
    /// not a perfect square.
    pub fn from_row_major(data: Vec<Complex64>) -> Result<Self> {
        let dim = (data.len() as f64).sqrt().round() as usize;
        if dim == 0 || dim * dim != data.len() {
            return Err(Error::Dimension(format!(
                "{} entries do not form a square matrix",
                data.len()
            )));
        }
        Ok(Self { dim, data })
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 || rows.iter().any(|r| r.len() != dim) {
            return Err(Error::Dimension("rows do not form a square matrix".into()));
        }
        Ok(Self {
            dim,
            data: rows
                .iter()
                .flat_map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)))
                .collect(),
        })
    }

    pub fn diagonal(entries: &[f64]) -> Self {
        let mut m = Self::zeros(entries.len());
        for (i, &x) in entries.iter().enumerate() {
            m[(i, i)] = Complex64::new(x, 0.0);
        }
        m
    }

    /// Projector |ψ><ψ| (no normalization applied).
    pub fn outer(psi: &[Complex64]) -> Self {
        let dim = psi.len();
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = psi[i] * psi[j].conj();
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    /// `self += s * other`
    pub fn add_scaled(&mut self, s: f64, other: &Self) {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b * s;
        }
    }

    /// Computes `u * self * u†`.
    pub fn conjugated_by(&self, u: &Self) -> Self {
        &(u * self) * &u.adjoint()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest elementwise deviation from `M = M†`.
    pub fn hermiticity_error(&self) -> f64 {
        let n = self.dim;
        let mut err = 0.0f64;
        for i in 0..n {
            for j in i..n {
                err = err.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        err
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_error() <= tol
    }

    /// Frobenius inner product style `tr(self * other)`.
    pub fn trace_product(&self, other: &Self) -> Complex64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let n = self.dim;
        let mut acc = ZERO;
        for i in 0..n {
            for k in 0..n {
                acc += self[(i, k)] * other[(k, i)];
            }
        }
        acc
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.dim + j]
    }
}

impl<'a> Mul<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let n = self.dim;
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        out
    }
}

impl<'a> Add<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        let mut out = self.clone();
        out.add_scaled(1.0, rhs);
        out
    }
}

impl<'a> Sub<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        let mut out = self.clone();
        out.add_scaled(-1.0, rhs);
        out
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{})", self.dim, self.dim)?;
        for i in 0..self.dim {
            let row: Vec<String> = (0..self.dim)
                .map(|j| {
                    let z = self[(i, j)];
                    format!("{:+.6}{:+.6}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// Pauli operator labels, with the identity at index 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn matrix(self) -> ComplexMatrix {
        let data = match self {
            Pauli::I => vec![ONE, ZERO, ZERO, ONE],
            Pauli::X => vec![ZERO, ONE, ONE, ZERO],
            Pauli::Y => vec![ZERO, -I, I, ZERO],
            Pauli::Z => vec![ONE, ZERO, ZERO, -ONE],
        };
        ComplexMatrix { dim: 2, data }
    }
}

/// Kronecker product with `a` as the slow index.
pub fn tensor_product(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (na, nb) = (a.dim, b.dim);
    let n = na * nb;
    let mut out = ComplexMatrix::zeros(n);
    for i in 0..na {
        for j in 0..na {
            let aij = a[(i, j)];
            if aij == ZERO {
                continue;
            }
            for k in 0..nb {
                for l in 0..nb {
                    out[(i * nb + k, j * nb + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

/// A unit-trace Hermitian positive semidefinite matrix.
///
/// Construction through [`DensityMatrix::new`] checks all three properties.
/// Channel outputs in the negative-weight regime may be slightly (or, for
/// strongly non-Markovian depolarizing noise, substantially) non-positive;
/// those are built with [`DensityMatrix::from_matrix_unchecked`] and can be
/// inspected with [`DensityMatrix::min_eigenvalue`].
#[derive(Clone, PartialEq)]
pub struct DensityMatrix(ComplexMatrix);

impl DensityMatrix {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        let tr = m.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL * m.dim() as f64 || tr.im.abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let herr = m.hermiticity_error();
        if herr > HERMITICITY_TOL {
            return Err(Error::InvalidState(format!(
                "not Hermitian (deviation {herr:e})"
            )));
        }
        let rho = Self(m);
        let min = rho.min_eigenvalue();
        if min < -PSD_SLACK {
            return Err(Error::InvalidState(format!(
                "not positive semidefinite (min eigenvalue {min:e})"
            )));
        }
        Ok(rho)
    }

    pub fn from_matrix_unchecked(m: ComplexMatrix) -> Self {
        Self(m)
    }

    /// Normalizes `psi` and returns its projector.
    pub fn from_pure(psi: &[Complex64]) -> Result<Self> {
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidState("zero or non-finite state vector".into()));
        }
        let normalized: Vec<Complex64> = psi.iter().map(|z| z / norm).collect();
        Ok(Self(ComplexMatrix::outer(&normalized)))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self(ComplexMatrix::identity(dim).scale(1.0 / dim as f64))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues_unchecked(&self.0)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    pub fn purity(&self) -> f64 {
        self.0.trace_product(&self.0).re
    }
}

impl fmt::Debug for DensityMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DensityMatrix {:?}", self.0)
    }
}

fn assert_two_qubit(m: &ComplexMatrix) {
    assert_eq!(m.dim(), 4, "two-qubit operator expected");
}

/// Reduced state after tracing out `traced`.
pub fn partial_trace(rho: &DensityMatrix, traced: Subsystem) -> DensityMatrix {
    let m = rho.matrix();
    assert_two_qubit(m);
    let mut out = ComplexMatrix::zeros(2);
    for i in 0..2 {
        for j in 0..2 {
            out[(i, j)] = match traced {
                Subsystem::B => m[(2 * i, 2 * j)] + m[(2 * i + 1, 2 * j + 1)],
                Subsystem::A => m[(i, j)] + m[(2 + i, 2 + j)],
            };
        }
    }
    DensityMatrix(out)
}

/// Partial transpose of a two-qubit operator with respect to `sub`.
pub fn partial_transpose(m: &ComplexMatrix, sub: Subsystem) -> ComplexMatrix {
    assert_two_qubit(m);
    let mut out = ComplexMatrix::zeros(4);
    for a in 0..2 {
        for b in 0..2 {
            for a2 in 0..2 {
                for b2 in 0..2 {
                    let (r, c) = match sub {
                        Subsystem::A => (2 * a2 + b, 2 * a + b2),
                        Subsystem::B => (2 * a + b2, 2 * a2 + b),
                    };
                    out[(r, c)] = m[(2 * a + b, 2 * a2 + b2)];
                }
            }
        }
    }
    out
}

/// Ascending real eigenvalues of a Hermitian matrix.
///
/// Rejects inputs whose Hermiticity error exceeds [`HERMITICITY_TOL`] scaled
/// by the matrix magnitude.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Result<Vec<f64>> {
    let scale = m.as_slice().iter().map(|z| z.norm()).fold(1.0, f64::max);
    let err = m.hermiticity_error();
    if err > HERMITICITY_TOL * scale {
        return Err(Error::NotHermitian(err));
    }
    Ok(hermitian_eigenvalues_unchecked(m))
}

pub(crate) fn hermitian_eigenvalues_unchecked(m: &ComplexMatrix) -> Vec<f64> {
    let mut eig: Vec<f64> = match m.dim() {
        2 => {
            // closed form for the 2x2 case, heavily used by the discord optimizer
            let a = m[(0, 0)].re;
            let d = m[(1, 1)].re;
            let b = m[(0, 1)];
            let mean = 0.5 * (a + d);
            let half = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
            vec![mean - half, mean + half]
        }
        4 => {
            let mat = Matrix4::from_fn(|i, j| hermitize(m, i, j));
            mat.symmetric_eigenvalues().iter().copied().collect()
        }
        n => {
            let mat = DMatrix::from_fn(n, n, |i, j| hermitize(m, i, j));
            mat.symmetric_eigenvalues().iter().copied().collect()
        }
    };
    eig.sort_by(|a, b| a.total_cmp(b));
    eig
}

// Average the two triangles so the solver sees an exactly Hermitian input.
fn hermitize(m: &ComplexMatrix, i: usize, j: usize) -> Complex64 {
    if i == j {
        Complex64::new(m[(i, i)].re, 0.0)
    } else {
        (m[(i, j)] + m[(j, i)].conj()) * 0.5
    }
}

/// `-Σ λ log₂ λ` over a spectrum; non-positive entries contribute zero.
pub fn shannon_entropy_bits(spectrum: &[f64]) -> f64 {
    spectrum
        .iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| -x * x.log2())
        .sum::<f64>()
        .max(0.0)
}

/// Binary entropy `h(x)` in bits, clamped to the unit interval.
pub fn binary_entropy(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    let y = 1.0 - x;
    (-x * x.log2() - y * y.log2()).max(0.0)
}

/// Von Neumann entropy in bits.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    shannon_entropy_bits(&rho.eigenvalues())
}
