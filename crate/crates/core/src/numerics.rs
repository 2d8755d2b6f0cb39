//! Small dense complex linear algebra.
//!
//! Dimensions in this crate stay in the tens, so everything is a plain
//! row-major `Vec<Complex64>` with no blocking or BLAS.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Numerical thresholds shared by every module.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Max entry of `U†U − I` for a matrix to count as unitary.
    pub unitary: f64,
    /// Allowed deviation of a squared norm (or probability sum) from one.
    pub norm: f64,
    /// A probability at or below this is a possibilistic zero.
    pub zero: f64,
    /// Probabilities in `(zero, zero_guard)` are too close to call.
    pub zero_guard: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            unitary: 1e-10,
            norm: 1e-12,
            zero: 1e-9,
            zero_guard: 1e-6,
        }
    }
}

/// Residual norm below which a seed vector is treated as already spanned.
pub const COMPLETION_RESIDUAL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericsError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("basis is not orthonormal (max Gram deviation {deviation:e})")]
    NonOrthonormalBasis { deviation: f64 },
    #[error("matrix is not unitary (max |U†U − I| = {deviation:e})")]
    NonUnitary { deviation: f64 },
    #[error("vector is not normalized (|‖v‖² − 1| = {deviation:e})")]
    NotNormalized { deviation: f64 },
    #[error("fixed columns are not orthonormal (max Gram deviation {deviation:e})")]
    NotOrthonormal { deviation: f64 },
    #[error("{columns} fixed columns for dimension {dim}")]
    Overconstrained { columns: usize, dim: usize },
    #[error("column index {index} listed twice or out of range for dimension {dim}")]
    BadColumnIndex { index: usize, dim: usize },
    #[error("could not complete basis: only {found} of {needed} free columns found")]
    CompletionFailed { found: usize, needed: usize },
}

pub type Result<T> = std::result::Result<T, NumericsError>;

/// A state vector (or any column vector) of complex amplitudes.
#[derive(Clone, Debug, PartialEq)]
pub struct CVector(Vec<Complex64>);

impl CVector {
    pub fn new(entries: Vec<Complex64>) -> Self {
        CVector(entries)
    }

    pub fn zeros(dim: usize) -> Self {
        CVector(vec![Complex64::new(0.0, 0.0); dim])
    }

    /// Standard basis vector `e_index`.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut v = CVector::zeros(dim);
        v.0[index] = Complex64::new(1.0, 0.0);
        v
    }

    pub fn from_real(entries: &[f64]) -> Self {
        CVector(entries.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.0
    }

    pub fn into_entries(self) -> Vec<Complex64> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Complex64> {
        self.0.iter()
    }

    /// `⟨self|other⟩`, conjugate-linear in `self`.
    pub fn inner(&self, other: &CVector) -> Complex64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(&self, factor: Complex64) -> CVector {
        CVector(self.0.iter().map(|z| z * factor).collect())
    }

    pub fn normalized(&self) -> CVector {
        self.scale(Complex64::new(1.0 / self.norm(), 0.0))
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm_sqr() - 1.0).abs() <= tol
    }

    pub fn check_normalized(&self, tol: f64) -> Result<()> {
        let deviation = (self.norm_sqr() - 1.0).abs();
        if deviation <= tol {
            Ok(())
        } else {
            Err(NumericsError::NotNormalized { deviation })
        }
    }

    /// Largest entrywise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &CVector) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Tensor product `self ⊗ other` with `other` as the fast index.
    pub fn kron(&self, other: &CVector) -> CVector {
        let mut out = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.0 {
            for b in &other.0 {
                out.push(a * b);
            }
        }
        CVector(out)
    }

    /// Whether `self` and `other` are the same ray: `|⟨self|other⟩|` is one
    /// within `tol` (both assumed normalized).
    pub fn same_ray(&self, other: &CVector, tol: f64) -> bool {
        self.dim() == other.dim() && 1.0 - self.inner(other).norm() <= tol
    }
}

impl Index<usize> for CVector {
    type Output = Complex64;
    fn index(&self, i: usize) -> &Complex64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for CVector {
    fn index_mut(&mut self, i: usize) -> &mut Complex64 {
        &mut self.0[i]
    }
}

impl Add for &CVector {
    type Output = CVector;
    fn add(self, rhs: &CVector) -> CVector {
        CVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &CVector {
    type Output = CVector;
    fn sub(self, rhs: &CVector) -> CVector {
        CVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl fmt::Display for CVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, z) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            if z.im == 0.0 {
                write!(f, "{:.6}", z.re)?;
            } else {
                write!(f, "{:.6}{:+.6}i", z.re, z.im)?;
            }
        }
        write!(f, ")")
    }
}

fn complex_to_pair(z: &Complex64) -> [f64; 2] {
    [z.re, z.im]
}

impl Serialize for CVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = self.0.iter().map(complex_to_pair).collect();
        pairs.serialize(s)
    }
}

impl<'de> Deserialize<'de> for CVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let pairs: Vec<[f64; 2]> = Vec::deserialize(d)?;
        if pairs.is_empty() {
            return Err(D::Error::custom("vector must have at least one entry"));
        }
        Ok(CVector(
            pairs.into_iter().map(|[re, im]| Complex64::new(re, im)).collect(),
        ))
    }
}

/// Dense row-major complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = CMatrix::zeros(dim, dim);
        for i in 0..dim {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Builds a matrix from row-major rows. Panics on ragged input.
    pub fn from_rows(rows: Vec<Vec<Complex64>>) -> Self {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == n_cols), "ragged matrix rows");
        CMatrix {
            rows: n_rows,
            cols: n_cols,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        CMatrix::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect())
                .collect(),
        )
    }

    /// Square matrix whose `k`-th column is `columns[k]`.
    pub fn from_columns(columns: &[CVector]) -> Self {
        let dim = columns.first().map_or(0, CVector::dim);
        let mut m = CMatrix::zeros(dim, columns.len());
        for (j, c) in columns.iter().enumerate() {
            assert_eq!(c.dim(), dim, "column length mismatch");
            for i in 0..dim {
                m[(i, j)] = c[i];
            }
        }
        m
    }

    pub fn diagonal(entries: &[Complex64]) -> Self {
        let mut m = CMatrix::zeros(entries.len(), entries.len());
        for (i, z) in entries.iter().enumerate() {
            m[(i, i)] = *z;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn column(&self, j: usize) -> CVector {
        CVector::new((0..self.rows).map(|i| self[(i, j)]).collect())
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn adjoint(&self) -> CMatrix {
        let mut out = CMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn matmul(&self, rhs: &CMatrix) -> Result<CMatrix> {
        if self.cols != rhs.rows {
            return Err(NumericsError::DimensionMismatch {
                expected: self.cols,
                found: rhs.rows,
            });
        }
        let mut out = CMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs[(k, j)];
                }
            }
        }
        Ok(out)
    }

    /// Plain matrix-vector product, no unitarity check.
    pub fn mul_vec(&self, v: &CVector) -> Result<CVector> {
        if self.cols != v.dim() {
            return Err(NumericsError::DimensionMismatch {
                expected: self.cols,
                found: v.dim(),
            });
        }
        Ok(CVector::new(
            (0..self.rows)
                .map(|i| self.row(i).iter().zip(v.iter()).map(|(a, b)| a * b).sum())
                .collect(),
        ))
    }

    /// `max |(U†U − I)_ij|`; infinite for non-square input.
    pub fn unitarity_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let gram = self
            .adjoint()
            .matmul(self)
            .expect("adjoint dimensions always agree");
        max_identity_deviation(&gram)
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_deviation() <= tol
    }

    pub fn check_unitary(&self, tol: f64) -> Result<()> {
        let deviation = self.unitarity_deviation();
        if deviation <= tol {
            Ok(())
        } else {
            Err(NumericsError::NonUnitary { deviation })
        }
    }

    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        if self.rows != other.rows || self.cols != other.cols {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.rows * other.rows, self.cols * other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self[(i, j)];
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        out[(i * other.rows + k, j * other.cols + l)] = a * other[(k, l)];
                    }
                }
            }
        }
        out
    }

    /// Rows as nested vectors (used by serialization).
    pub fn to_rows(&self) -> Vec<Vec<Complex64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        self.matmul(rhs).expect("matrix dimensions must agree")
    }
}

impl Serialize for CMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> = (0..self.rows)
            .map(|i| self.row(i).iter().map(complex_to_pair).collect())
            .collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for CMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows: Vec<Vec<[f64; 2]>> = Vec::deserialize(d)?;
        let n_cols = rows.first().map_or(0, Vec::len);
        if rows.is_empty() || n_cols == 0 {
            return Err(D::Error::custom("matrix must be non-empty"));
        }
        if let Some(bad) = rows.iter().position(|r| r.len() != n_cols) {
            return Err(D::Error::custom(format!(
                "row {bad} has {} entries, expected {n_cols}",
                rows[bad].len()
            )));
        }
        Ok(CMatrix::from_rows(
            rows.into_iter()
                .map(|r| r.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
                .collect(),
        ))
    }
}

fn max_identity_deviation(gram: &CMatrix) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..gram.rows() {
        for j in 0..gram.cols() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((gram[(i, j)] - Complex64::new(target, 0.0)).norm());
        }
    }
    worst
}

/// Max deviation of the Gram matrix of `vectors` from the identity.
pub fn gram_deviation(vectors: &[CVector]) -> f64 {
    let n = vectors.len();
    let mut gram = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            gram[(i, j)] = vectors[i].inner(&vectors[j]);
        }
    }
    max_identity_deviation(&gram)
}

/// Born-rule outcome probabilities `|⟨basis_k|state⟩|²`, clamped to `[0, 1]`.
pub fn born_probabilities(state: &CVector, basis: &[CVector], tol: &Tolerances) -> Result<Vec<f64>> {
    let dim = state.dim();
    if basis.len() != dim {
        return Err(NumericsError::DimensionMismatch {
            expected: dim,
            found: basis.len(),
        });
    }
    if let Some(bad) = basis.iter().find(|b| b.dim() != dim) {
        return Err(NumericsError::DimensionMismatch {
            expected: dim,
            found: bad.dim(),
        });
    }
    state.check_normalized(tol.norm)?;
    let deviation = gram_deviation(basis);
    if deviation > tol.unitary {
        return Err(NumericsError::NonOrthonormalBasis { deviation });
    }
    Ok(basis
        .iter()
        .map(|b| b.inner(state).norm_sqr().clamp(0.0, 1.0))
        .collect())
}

/// `U·v` after checking dimensions and unitarity.
pub fn apply_unitary(u: &CMatrix, v: &CVector, tol: &Tolerances) -> Result<CVector> {
    if !u.is_square() {
        return Err(NumericsError::DimensionMismatch {
            expected: u.rows(),
            found: u.cols(),
        });
    }
    if u.cols() != v.dim() {
        return Err(NumericsError::DimensionMismatch {
            expected: u.cols(),
            found: v.dim(),
        });
    }
    u.check_unitary(tol.unitary)?;
    u.mul_vec(v)
}

/// Builds a `dim × dim` unitary whose listed columns are the given vectors.
///
/// Free columns are filled in ascending index order from standard basis
/// seeds `e_0, e_1, …`, each orthogonalized (two passes of modified
/// Gram-Schmidt) against the fixed columns and the free columns accepted so
/// far. Seeds with residual norm below [`COMPLETION_RESIDUAL`] are skipped.
/// The output depends only on the input, so repeated calls are bit-identical.
pub fn complete_to_unitary(
    dim: usize,
    fixed_columns: &[(usize, CVector)],
    tol: &Tolerances,
) -> Result<CMatrix> {
    if fixed_columns.len() > dim {
        return Err(NumericsError::Overconstrained {
            columns: fixed_columns.len(),
            dim,
        });
    }
    let mut slots: Vec<Option<CVector>> = vec![None; dim];
    for (index, v) in fixed_columns {
        if *index >= dim || slots[*index].is_some() {
            return Err(NumericsError::BadColumnIndex { index: *index, dim });
        }
        if v.dim() != dim {
            return Err(NumericsError::DimensionMismatch {
                expected: dim,
                found: v.dim(),
            });
        }
        slots[*index] = Some(v.clone());
    }
    let fixed: Vec<CVector> = fixed_columns.iter().map(|(_, v)| v.clone()).collect();
    let deviation = gram_deviation(&fixed);
    if deviation > tol.unitary {
        return Err(NumericsError::NotOrthonormal { deviation });
    }

    let needed = dim - fixed.len();
    let mut spanned = fixed;
    let mut free = Vec::with_capacity(needed);
    for seed in 0..dim {
        if free.len() == needed {
            break;
        }
        let mut candidate = CVector::basis(dim, seed);
        for _ in 0..2 {
            for q in &spanned {
                let overlap = q.inner(&candidate);
                candidate = &candidate - &q.scale(overlap);
            }
        }
        if candidate.norm() < COMPLETION_RESIDUAL {
            continue;
        }
        let unit = candidate.normalized();
        spanned.push(unit.clone());
        free.push(unit);
    }
    if free.len() != needed {
        return Err(NumericsError::CompletionFailed {
            found: free.len(),
            needed,
        });
    }

    let mut free = free.into_iter();
    let columns: Vec<CVector> = slots
        .into_iter()
        .map(|slot| slot.unwrap_or_else(|| free.next().expect("counted above")))
        .collect();
    Ok(CMatrix::from_columns(&columns))
}

/// The 50:50 beamsplitter `(1/√2)[[1, 1], [−1, 1]]`.
pub fn beamsplitter_5050() -> CMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    CMatrix::from_real_rows(&[&[h, h], &[-h, h]])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn born_eigenstate() {
        let basis = [CVector::basis(2, 0), CVector::basis(2, 1)];
        let p = born_probabilities(&CVector::basis(2, 0), &basis, &tol()).unwrap();
        assert_eq!(p, vec![1.0, 0.0]);
    }

    #[test]
    fn born_equal_superposition() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let basis = [CVector::basis(2, 0), CVector::basis(2, 1)];
        let p = born_probabilities(&CVector::from_real(&[h, h]), &basis, &tol()).unwrap();
        assert!((p[0] - 0.5).abs() < 1e-15 && (p[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn born_rejects_bad_basis() {
        let basis = [CVector::basis(2, 0), CVector::from_real(&[0.6, 0.8])];
        let err = born_probabilities(&CVector::basis(2, 0), &basis, &tol()).unwrap_err();
        assert!(matches!(err, NumericsError::NonOrthonormalBasis { .. }));
        let err = born_probabilities(&CVector::basis(3, 0), &basis, &tol()).unwrap_err();
        assert!(matches!(err, NumericsError::DimensionMismatch { .. }));
    }

    #[test]
    fn beamsplitter_on_second_port() {
        let out = apply_unitary(&beamsplitter_5050(), &CVector::basis(2, 1), &tol()).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!(out.max_abs_diff(&CVector::from_real(&[h, h])) < 1e-15);
    }

    #[test]
    fn apply_rejects_non_unitary() {
        let m = CMatrix::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]);
        let err = apply_unitary(&m, &CVector::basis(2, 0), &tol()).unwrap_err();
        assert!(matches!(err, NumericsError::NonUnitary { .. }));
    }

    #[test]
    fn identity_is_a_no_op() {
        let v = CVector::new(vec![Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)]);
        assert_eq!(apply_unitary(&CMatrix::identity(2), &v, &tol()).unwrap(), v);
    }

    #[test]
    fn canonical_completion_of_standard_columns() {
        let u = complete_to_unitary(2, &[(0, CVector::basis(2, 0))], &tol()).unwrap();
        assert_eq!(u, CMatrix::identity(2));
        let u = complete_to_unitary(
            3,
            &[(0, CVector::basis(3, 0)), (1, CVector::basis(3, 1))],
            &tol(),
        )
        .unwrap();
        assert_eq!(u, CMatrix::identity(3));
    }

    #[test]
    fn completion_errors() {
        let e0 = CVector::basis(2, 0);
        let err = complete_to_unitary(2, &[(0, e0.clone()), (1, e0.clone())], &tol()).unwrap_err();
        assert!(matches!(err, NumericsError::NotOrthonormal { .. }));
        let err = complete_to_unitary(
            1,
            &[(0, CVector::basis(1, 0)), (1, CVector::basis(1, 0))],
            &tol(),
        )
        .unwrap_err();
        assert!(matches!(err, NumericsError::Overconstrained { .. }));
        let err = complete_to_unitary(2, &[(2, e0)], &tol()).unwrap_err();
        assert!(matches!(err, NumericsError::BadColumnIndex { .. }));
    }

    #[test]
    fn completion_with_dense_column() {
        let b = CVector::new(vec![
            Complex64::new(0.0, 0.0),
            Complex64::new(0.6, 0.0),
            Complex64::new(0.0, 0.8),
        ]);
        let fixed = [(0, CVector::basis(3, 0)), (1, b.clone())];
        let u = complete_to_unitary(3, &fixed, &tol()).unwrap();
        assert!(u.unitarity_deviation() <= 1e-10);
        assert_eq!(u.column(1), b);
        assert_eq!(u.column(0), CVector::basis(3, 0));
        let again = complete_to_unitary(3, &fixed, &tol()).unwrap();
        assert_eq!(u, again);
    }

    #[test]
    fn serde_encoding_is_re_im_pairs() {
        let v = CVector::new(vec![Complex64::new(1.0, -2.0)]);
        assert_eq!(serde_json::to_string(&v).unwrap(), "[[1.0,-2.0]]");
        let m: CMatrix = serde_json::from_str("[[[1,0],[0,0]],[[0,0],[1,0]]]").unwrap();
        assert_eq!(m, CMatrix::identity(2));
        assert!(serde_json::from_str::<CMatrix>("[[[1,0]],[[0,0],[1,0]]]").is_err());
    }
}
