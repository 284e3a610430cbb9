//! Small dense complex matrices (3×3 single qutrit, 9×9 qutrit pair).
//!
//! Single-qutrit indices follow the level order `|2⟩, |1⟩, |0⟩ → 0, 1, 2`,
//! so the ground state `|0⟩` sits at index 2. Two-qutrit indices are
//! lexicographic: `(a, b) → 3a + b`.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tol;

pub type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Index of the physical level `|label⟩` (`label ∈ {0, 1, 2}`, `0` = ground).
pub const fn level_index(label: usize) -> usize {
    2 - label
}

/// Index of `|a b⟩` in the two-qutrit product basis, from physical labels.
pub const fn pair_index(label_a: usize, label_b: usize) -> usize {
    3 * level_index(label_a) + level_index(label_b)
}

/// Square complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "matrix dimension must be positive");
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

    /// Builds a matrix from row-major entries. Panics if `data.len()` is not
    /// a perfect square.
    pub fn from_vec(data: Vec<C64>) -> Self {
        let dim = (data.len() as f64).sqrt().round() as usize;
        assert!(
            dim >= 1 && dim * dim == data.len(),
            "entry count {} is not a positive square",
            data.len()
        );
        Self { dim, data }
    }

    pub fn from_real(dim: usize, data: &[f64]) -> Self {
        assert_eq!(data.len(), dim * dim);
        Self {
            dim,
            data: data.iter().map(|&x| C64::new(x, 0.0)).collect(),
        }
    }

    pub fn from_diag(diag: &[C64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let d: Vec<C64> = diag.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::from_diag(&d)
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn outer(ket: &[C64]) -> Self {
        let dim = ket.len();
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = ket[i] * ket[j].conj();
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[C64] {
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

    pub fn transpose(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(j, i)] = self[(i, j)];
            }
        }
        out
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn scale_c(&self, s: C64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    /// `Tr(self · other)` without forming the product.
    pub fn trace_product(&self, other: &Self) -> C64 {
        assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut acc = ZERO;
        for i in 0..n {
            for k in 0..n {
                acc += self[(i, k)] * other[(k, i)];
            }
        }
        acc
    }

    /// Squared Frobenius norm `Σ |m_ij|²`. Equals `Tr(m²)` for Hermitian `m`.
    pub fn frobenius_sq(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `‖self - other‖_max`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `‖m - m†‖_max`.
    pub fn hermitian_deviation(&self) -> f64 {
        let n = self.dim;
        let mut dev: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_deviation() <= tol
    }

    /// Applies `v ↦ m v`.
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.dim);
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    fn check_dim(&self, expected: usize) -> Result<()> {
        if self.dim != expected {
            return Err(Error::DimensionMismatch {
                expected,
                actual: self.dim,
            });
        }
        Ok(())
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.data[r * self.dim + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.data[r * self.dim + c]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim);
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim);
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim);
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

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{}) [", self.dim, self.dim)?;
        for i in 0..self.dim {
            write!(f, " ")?;
            for j in 0..self.dim {
                let z = self[(i, j)];
                write!(f, " {:+.6}{:+.6}i", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Kronecker product `a ⊗ b`.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (na, nb) = (a.dim, b.dim);
    let n = na * nb;
    let mut out = ComplexMatrix::zeros(n);
    for i in 0..na {
        for j in 0..na {
            let aij = a[(i, j)];
            for k in 0..nb {
                for l in 0..nb {
                    out[(i * nb + k, j * nb + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Real eigenvalues of a Hermitian matrix, ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub values: Vec<f64>,
}

impl Spectrum {
    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        *self.values.last().expect("spectrum is never empty")
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn abs_sum(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).sum()
    }
}

/// Eigenvalues of a Hermitian matrix by cyclic complex Jacobi rotations.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Result<Spectrum> {
    let deviation = m.hermitian_deviation();
    if deviation > tol::HERMITIAN {
        return Err(Error::NonHermitianInput { deviation });
    }
    Ok(jacobi_eigenvalues(m))
}

fn jacobi_eigenvalues(m: &ComplexMatrix) -> Spectrum {
    let n = m.dim;
    // Work on the exactly Hermitian part so rounding asymmetry cannot grow.
    let mut a = m.clone();
    for i in 0..n {
        a[(i, i)] = C64::new(a[(i, i)].re, 0.0);
        for j in (i + 1)..n {
            let avg = (a[(i, j)] + a[(j, i)].conj()) * 0.5;
            a[(i, j)] = avg;
            a[(j, i)] = avg.conj();
        }
    }
    let threshold = tol::JACOBI_OFF_DIAG * a.frobenius_sq().sqrt().max(1.0);

    for _ in 0..tol::JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .map(|(i, j)| 2.0 * a[(i, j)].norm_sqr())
            .sum();
        if off.sqrt() < threshold {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, p, q);
            }
        }
    }

    let mut values: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    values.sort_by(|x, y| x.total_cmp(y));
    Spectrum { values }
}

/// One Jacobi rotation `a ← J† a J` annihilating `a[p][q]`.
///
/// `J = D R` where `D = diag(1, e^{-iφ})` makes the pivot real and `R` is the
/// classical real rotation in the `(p, q)` plane.
fn rotate(a: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let r = apq.norm();
    if r == 0.0 {
        return;
    }
    let n = a.dim;
    let phase = apq / r; // e^{iφ}
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let theta = (aqq - app) / (2.0 * r);
    let t = if theta >= 0.0 {
        1.0 / (theta + (1.0 + theta * theta).sqrt())
    } else {
        -1.0 / (-theta + (1.0 + theta * theta).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    // J entries restricted to the (p, q) block.
    let jpp = C64::new(c, 0.0);
    let jpq = C64::new(s, 0.0);
    let jqp = -phase.conj() * s;
    let jqq = phase.conj() * c;

    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * jpp + akq * jqp;
        a[(k, q)] = akp * jpq + akq * jqq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = jpp.conj() * apk + jqp.conj() * aqk;
        a[(q, k)] = jpq.conj() * apk + jqq.conj() * aqk;
    }
    a[(p, q)] = ZERO;
    a[(q, p)] = ZERO;
    a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
}

/// Transpose on the second qutrit: `((i,k),(j,l)) ↦ ((i,l),(j,k))`.
pub fn partial_transpose_second(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    m.check_dim(9)?;
    let mut out = ComplexMatrix::zeros(9);
    for i in 0..3 {
        for k in 0..3 {
            for j in 0..3 {
                for l in 0..3 {
                    out[(3 * i + l, 3 * j + k)] = m[(3 * i + k, 3 * j + l)];
                }
            }
        }
    }
    Ok(out)
}

/// Exchanges the two qutrits: `((i,k),(j,l)) ↦ ((k,i),(l,j))`.
pub fn swap_qutrits(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    m.check_dim(9)?;
    let mut out = ComplexMatrix::zeros(9);
    for i in 0..3 {
        for k in 0..3 {
            for j in 0..3 {
                for l in 0..3 {
                    out[(3 * k + i, 3 * l + j)] = m[(3 * i + k, 3 * j + l)];
                }
            }
        }
    }
    Ok(out)
}

/// `Tr|m|` for Hermitian `m`: the sum of absolute eigenvalues.
pub fn trace_norm(m: &ComplexMatrix) -> Result<f64> {
    Ok(hermitian_eigenvalues(m)?.abs_sum())
}

/// Validated density matrix: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(mat: ComplexMatrix) -> Result<Self> {
        let dev = mat.hermitian_deviation();
        if dev > tol::HERMITIAN {
            return Err(Error::InvalidState(format!(
                "not Hermitian (deviation {dev:.3e})"
            )));
        }
        let tr = mat.trace();
        if (tr - ONE).norm() > tol::UNIT_TRACE {
            return Err(Error::InvalidState(format!(
                "trace {:.12} + {:.3e}i is not 1",
                tr.re, tr.im
            )));
        }
        let min = jacobi_eigenvalues(&mat).min();
        if min < tol::PSD_FLOOR {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {min:.3e}"
            )));
        }
        Ok(Self { mat })
    }

    /// Wraps a matrix known to be a state by construction (channel outputs,
    /// factory states). Callers in this crate test the invariants instead of
    /// paying for an eigen-solve on every step.
    pub(crate) fn from_trusted(mat: ComplexMatrix) -> Self {
        Self { mat }
    }

    /// `|ψ⟩⟨ψ|` for a ket normalized on the fly.
    pub fn pure(ket: &[C64]) -> Self {
        let norm = ket.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        assert!(norm > 0.0, "cannot normalize the zero vector");
        let v: Vec<C64> = ket.iter().map(|z| z / norm).collect();
        Self::from_trusted(ComplexMatrix::outer(&v))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self::from_trusted(ComplexMatrix::identity(dim).scale(1.0 / dim as f64))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.dim
    }

    pub fn spectrum(&self) -> Spectrum {
        jacobi_eigenvalues(&self.mat)
    }
}

/// `Tr ρ²`.
pub fn purity(rho: &DensityMatrix) -> f64 {
    rho.mat.frobenius_sq()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_hermitian(dim: usize, entries: &[(f64, f64)]) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(dim);
        let mut it = entries.iter().cycle();
        for i in 0..dim {
            let &(d, _) = it.next().unwrap();
            m[(i, i)] = c(d, 0.0);
            for j in (i + 1)..dim {
                let &(re, im) = it.next().unwrap();
                m[(i, j)] = c(re, im);
                m[(j, i)] = c(re, -im);
            }
        }
        m
    }

    fn basis(dim: usize, i: usize) -> Vec<C64> {
        let mut v = vec![ZERO; dim];
        v[i] = ONE;
        v
    }

    #[test]
    fn level_and_pair_indices() {
        assert_eq!(level_index(0), 2);
        assert_eq!(level_index(2), 0);
        assert_eq!(pair_index(0, 0), 8);
        assert_eq!(pair_index(2, 1), 1);
    }

    #[test]
    fn tensor_identity() {
        let i9 = tensor(&ComplexMatrix::identity(3), &ComplexMatrix::identity(3));
        assert_eq!(i9, ComplexMatrix::identity(9));
    }

    #[test]
    fn tensor_basis_projector() {
        let a = ComplexMatrix::from_real_diag(&[1.0, 0.0, 0.0]);
        let b = ComplexMatrix::from_real_diag(&[0.0, 1.0, 0.0]);
        let t = tensor(&a, &b);
        for i in 0..9 {
            for j in 0..9 {
                let expected = if i == 1 && j == 1 { 1.0 } else { 0.0 };
                assert_eq!(t[(i, j)], c(expected, 0.0));
            }
        }
    }

    #[test]
    fn eigenvalues_diagonal_and_identity() {
        let s = hermitian_eigenvalues(&ComplexMatrix::from_real_diag(&[3.0, 1.0, 2.0])).unwrap();
        assert_eq!(s.values, vec![1.0, 2.0, 3.0]);
        let s = hermitian_eigenvalues(&ComplexMatrix::identity(9)).unwrap();
        assert!(s.values.iter().all(|&v| (v - 1.0).abs() < 1e-15));
    }

    #[test]
    fn eigenvalues_reject_non_hermitian() {
        let mut m = ComplexMatrix::identity(3);
        m[(0, 1)] = c(1.0, 0.0);
        assert!(matches!(
            hermitian_eigenvalues(&m),
            Err(Error::NonHermitianInput { .. })
        ));
        assert!(trace_norm(&m).is_err());
    }

    #[test]
    fn eigenvalues_of_complex_two_by_two_block() {
        // [[2, i], [-i, 2]] has eigenvalues 1 and 3.
        let mut m = ComplexMatrix::from_real_diag(&[2.0, 2.0, 5.0]);
        m[(0, 1)] = c(0.0, 1.0);
        m[(1, 0)] = c(0.0, -1.0);
        let s = hermitian_eigenvalues(&m).unwrap();
        let expected = [1.0, 3.0, 5.0];
        for (v, e) in s.values.iter().zip(expected) {
            assert!((v - e).abs() < 1e-14, "{v} vs {e}");
        }
    }

    #[test]
    fn partial_transpose_of_identity_and_involution() {
        let i9 = ComplexMatrix::identity(9);
        assert_eq!(partial_transpose_second(&i9).unwrap(), i9);
        let m = random_hermitian(9, &[(0.3, 0.1), (-0.2, 0.7), (0.5, -0.4), (0.9, 0.0)]);
        let twice = partial_transpose_second(&partial_transpose_second(&m).unwrap()).unwrap();
        assert_eq!(twice, m);
    }

    #[test]
    fn partial_transpose_rejects_wrong_dim() {
        assert!(matches!(
            partial_transpose_second(&ComplexMatrix::identity(3)),
            Err(Error::DimensionMismatch {
                expected: 9,
                actual: 3
            })
        ));
    }

    #[test]
    fn partial_transpose_of_product_transposes_second_factor() {
        let rho = DensityMatrix::pure(&[c(1.0, 0.0), c(0.0, 1.0), c(0.5, 0.5)]);
        let sigma = DensityMatrix::pure(&[c(0.2, -0.3), c(1.0, 0.0), c(0.0, 0.7)]);
        let prod = tensor(rho.matrix(), sigma.matrix());
        let pt = partial_transpose_second(&prod).unwrap();
        let expected = tensor(rho.matrix(), &sigma.matrix().transpose());
        assert!(pt.max_abs_diff(&expected) < 1e-15);
        assert!(hermitian_eigenvalues(&pt).unwrap().min() > -1e-12);
    }

    #[test]
    fn trace_norm_examples() {
        assert_eq!(trace_norm(&ComplexMatrix::zeros(3)).unwrap(), 0.0);
        let d = ComplexMatrix::from_real_diag(&[1.0, -1.0, 0.0]);
        assert!((trace_norm(&d).unwrap() - 2.0).abs() < 1e-15);

        let s = 0.5f64.sqrt();
        let a = DensityMatrix::pure(&[c(s, 0.0), c(0.0, s), ZERO]);
        let b = DensityMatrix::pure(&[c(s, 0.0), c(0.0, -s), ZERO]);
        let diff = a.matrix() - b.matrix();
        assert!((trace_norm(&diff).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn purity_examples() {
        assert!((purity(&DensityMatrix::pure(&basis(9, 8))) - 1.0).abs() < 1e-15);
        assert!((purity(&DensityMatrix::maximally_mixed(9)) - 1.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn density_matrix_validation() {
        assert!(DensityMatrix::new(ComplexMatrix::identity(3).scale(1.0 / 3.0)).is_ok());
        assert!(matches!(
            DensityMatrix::new(ComplexMatrix::identity(3)),
            Err(Error::InvalidState(_))
        ));
        assert!(DensityMatrix::new(ComplexMatrix::from_real_diag(&[1.5, -0.5, 0.0])).is_err());
        let mut m = ComplexMatrix::from_real_diag(&[0.5, 0.5, 0.0]);
        m[(0, 1)] = c(0.1, 0.0);
        assert!(DensityMatrix::new(m).is_err());
    }

    fn hermitian_strategy(dim: usize) -> impl Strategy<Value = ComplexMatrix> {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dim * dim)
            .prop_map(move |e| random_hermitian(dim, &e))
    }

    fn square_strategy(dim: usize) -> impl Strategy<Value = ComplexMatrix> {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dim * dim)
            .prop_map(|e| ComplexMatrix::from_vec(e.into_iter().map(|(r, i)| c(r, i)).collect()))
    }

    proptest! {
        #[test]
        fn eigenvalue_moments_match_traces(m in prop_oneof![hermitian_strategy(3), hermitian_strategy(9)]) {
            let s = hermitian_eigenvalues(&m).unwrap();
            prop_assert!(s.values.windows(2).all(|w| w[0] <= w[1]));
            let sum: f64 = s.values.iter().sum();
            let sum_sq: f64 = s.values.iter().map(|v| v * v).sum();
            prop_assert!((sum - m.trace().re).abs() < tol::EIG_MOMENTS);
            prop_assert!((sum_sq - (&m * &m).trace().re).abs() < tol::EIG_MOMENTS);
        }

        #[test]
        fn tensor_trace_factorizes(a in square_strategy(3), b in square_strategy(3)) {
            let t = tensor(&a, &b);
            // Direct double loop over the diagonal as the oracle.
            let mut direct = ZERO;
            for i in 0..3 {
                for k in 0..3 {
                    direct += a[(i, i)] * b[(k, k)];
                }
            }
            prop_assert!((t.trace() - direct).norm() < 1e-12);
            prop_assert!((t.trace() - a.trace() * b.trace()).norm() < 1e-12);
        }

        #[test]
        fn tensor_is_bilinear_and_associative(
            a in square_strategy(3), b in square_strategy(3), c2 in square_strategy(3), s in -2.0f64..2.0
        ) {
            // Four-loop construction as the reference.
            let mut direct = ComplexMatrix::zeros(9);
            for i in 0..3 { for j in 0..3 { for k in 0..3 { for l in 0..3 {
                direct[(3 * i + k, 3 * j + l)] = (a[(i, j)] * s + c2[(i, j)]) * b[(k, l)];
            }}}}
            let lin = &tensor(&a, &b).scale(s) + &tensor(&c2, &b);
            prop_assert!(lin.max_abs_diff(&direct) < 1e-12);

            let left = tensor(&tensor(&a, &b), &c2);
            let right = tensor(&a, &tensor(&b, &c2));
            prop_assert!(left.max_abs_diff(&right) < 1e-15);
        }

        #[test]
        fn partial_transpose_preserves_trace_and_hermiticity(m in hermitian_strategy(9)) {
            let pt = partial_transpose_second(&m).unwrap();
            prop_assert_eq!(pt.trace(), m.trace());
            prop_assert_eq!(pt.hermitian_deviation(), 0.0);
        }
    }
}
