//! Dense complex matrices for small multipartite operators.
//!
//! Subsystem ordering is row-major: for local dimensions `[d_1, ..., d_N]` the
//! basis state `|i_1 ... i_N>` has flat index `((i_1 d_2 + i_2) d_3 + ...) + i_N`,
//! so party 0 is the most significant digit.

mod eig;
mod json;

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::config::Tolerances;
use crate::error::{Error, Result};

pub use eig::{hermitian_eig, Spectrum};
pub use json::MatrixJson;

pub type C64 = Complex64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Argument(format!("{} entries for a {rows}x{cols} matrix", data.len())));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from real rows. Panics on ragged input.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let n = rows.len();
        let m = rows.first().map_or(0, |r| r.len());
        assert!(rows.iter().all(|r| r.len() == m), "ragged rows");
        Self::from_fn(n, m, |i, j| C64::new(rows[i][j], 0.0))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = C64::new(d, 0.0);
        }
        m
    }

    /// `|psi><psi|`.
    pub fn outer(psi: &[C64]) -> Self {
        Self::from_fn(psi.len(), psi.len(), |i, j| psi[i] * psi[j].conj())
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

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn scale_complex(&self, s: C64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch");
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// Largest |m_ij - conj(m_ji)|, or infinity for non-square input.
    pub fn hermiticity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in i..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// `(m + m†) / 2`.
    pub fn hermitian_part(&self) -> Self {
        assert!(self.is_square(), "hermitian part of a non-square matrix");
        Self::from_fn(self.rows, self.cols, |i, j| (self[(i, j)] + self[(j, i)].conj()) * 0.5)
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.data[k * other.cols + j];
                }
            }
        }
        out
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len(), "matrix-vector shape mismatch");
        (0..self.rows).map(|i| (0..self.cols).map(|j| self[(i, j)] * v[j]).sum()).collect()
    }

    /// `<v| m |v>`.
    pub fn expectation(&self, v: &[C64]) -> C64 {
        let mv = self.apply(v);
        v.iter().zip(&mv).map(|(a, b)| a.conj() * b).sum()
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        assert!(i < self.rows && j < self.cols, "index ({i},{j}) out of bounds");
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        assert!(i < self.rows && j < self.cols, "index ({i},{j}) out of bounds");
        &mut self.data[i * self.cols + j]
    }
}

impl<'a> Add<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "add shape mismatch");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl<'a> Sub<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "sub shape mismatch");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl<'a> Mul<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:>9.5}{:+.5}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Kronecker product, `(a ⊗ b)[(i·rb+k),(j·cb+l)] = a[i,j]·b[k,l]`.
pub fn tensor_product(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (rb, cb) = (b.rows, b.cols);
    let mut out = ComplexMatrix::zeros(a.rows * rb, a.cols * cb);
    for i in 0..a.rows {
        for j in 0..a.cols {
            let aij = a[(i, j)];
            if aij == ZERO {
                continue;
            }
            for k in 0..rb {
                for l in 0..cb {
                    out[(i * rb + k, j * cb + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Kronecker product of a non-empty list, left to right.
pub fn tensor_product_all(factors: &[&ComplexMatrix]) -> ComplexMatrix {
    let (first, rest) = factors.split_first().expect("empty tensor product");
    rest.iter().fold((*first).clone(), |acc, m| tensor_product(&acc, m))
}

/// Kronecker product of state vectors.
pub fn kron_vectors(factors: &[Vec<C64>]) -> Vec<C64> {
    let mut out = vec![ONE];
    for f in factors {
        let mut next = Vec::with_capacity(out.len() * f.len());
        for a in &out {
            for b in f {
                next.push(a * b);
            }
        }
        out = next;
    }
    out
}

/// `Tr(a·b)`, real part. Both operands are expected to be Hermitian.
pub fn hs_inner(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    if !a.is_square() || (a.rows, a.cols) != (b.rows, b.cols) {
        return Err(Error::Argument(format!(
            "hs_inner shape mismatch: {}x{} vs {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    let n = a.rows;
    let mut acc = ZERO;
    for i in 0..n {
        for j in 0..n {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    Ok(acc.re)
}

/// Positional weights for the row-major subsystem layout.
pub(crate) fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

pub(crate) fn digits(mut index: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for k in (0..dims.len()).rev() {
        out[k] = index % dims[k];
        index /= dims[k];
    }
    out
}

fn check_dims(m: &ComplexMatrix, dims: &[usize]) -> Result<usize> {
    if dims.is_empty() || dims.iter().any(|&d| d < 2) {
        return Err(Error::Argument(format!("local dimensions must be >= 2, got {dims:?}")));
    }
    let total: usize = dims.iter().product();
    if !m.is_square() || m.rows != total {
        return Err(Error::Argument(format!("{}x{} matrix does not match dims {dims:?}", m.rows, m.cols)));
    }
    Ok(total)
}

/// Transposes the indices of subsystem `party`, leaving the others untouched.
pub fn partial_transpose_matrix(m: &ComplexMatrix, dims: &[usize], party: usize) -> Result<ComplexMatrix> {
    let n = check_dims(m, dims)?;
    if party >= dims.len() {
        return Err(Error::Index(format!("party {party} of {} subsystems", dims.len())));
    }
    let stride = strides(dims)[party];
    let d = dims[party];
    let digit = |i: usize| (i / stride) % d;
    let mut out = ComplexMatrix::zeros(n, n);
    for r in 0..n {
        let dr = digit(r);
        for c in 0..n {
            let dc = digit(c);
            let r2 = r - dr * stride + dc * stride;
            let c2 = c - dc * stride + dr * stride;
            out[(r2, c2)] = m[(r, c)];
        }
    }
    Ok(out)
}

/// Traces out every subsystem not listed in `keep`. The kept subsystems stay
/// in their original relative order.
pub fn partial_trace_matrix(m: &ComplexMatrix, dims: &[usize], keep: &[usize]) -> Result<(ComplexMatrix, Vec<usize>)> {
    let n = check_dims(m, dims)?;
    if keep.is_empty() {
        return Err(Error::Argument("partial trace needs at least one kept subsystem".into()));
    }
    let mut kept = keep.to_vec();
    kept.sort_unstable();
    if kept.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Argument(format!("duplicate subsystem in {keep:?}")));
    }
    if let Some(&bad) = kept.iter().find(|&&k| k >= dims.len()) {
        return Err(Error::Index(format!("subsystem {bad} of {}", dims.len())));
    }
    let out_dims: Vec<usize> = kept.iter().map(|&k| dims[k]).collect();
    let out_n: usize = out_dims.iter().product();
    let out_strides = strides(&out_dims);
    let traced: Vec<usize> = (0..dims.len()).filter(|k| !kept.contains(k)).collect();

    let all_digits: Vec<Vec<usize>> = (0..n).map(|i| digits(i, dims)).collect();
    let reduced: Vec<usize> =
        all_digits.iter().map(|dg| kept.iter().zip(&out_strides).map(|(&k, &s)| dg[k] * s).sum()).collect();

    let mut out = ComplexMatrix::zeros(out_n, out_n);
    for r in 0..n {
        for c in 0..n {
            if traced.iter().all(|&t| all_digits[r][t] == all_digits[c][t]) {
                out[(reduced[r], reduced[c])] += m[(r, c)];
            }
        }
    }
    Ok((out, out_dims))
}

/// A validated state: Hermitian, unit trace and positive semidefinite.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    matrix: ComplexMatrix,
    dims: Vec<usize>,
}

impl DensityOperator {
    pub fn new(matrix: ComplexMatrix, dims: Vec<usize>) -> Result<Self> {
        Self::with_tolerances(matrix, dims, Tolerances::global())
    }

    pub fn with_tolerances(matrix: ComplexMatrix, dims: Vec<usize>, tol: &Tolerances) -> Result<Self> {
        check_dims(&matrix, &dims)?;
        let defect = matrix.hermiticity_defect();
        if defect > tol.hermitian {
            return Err(Error::Validation(format!("not Hermitian (defect {defect:.3e})")));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > tol.trace || tr.im.abs() > tol.trace {
            return Err(Error::Validation(format!("trace is {tr}, expected 1")));
        }
        let spectrum = hermitian_eig(&matrix)?;
        let min = spectrum.min_eigenvalue();
        if min < -tol.psd_floor {
            return Err(Error::Validation(format!("not positive semidefinite (eigenvalue {min:.3e})")));
        }
        Ok(Self { matrix, dims })
    }

    /// Skips validation; callers guarantee the invariants by construction.
    pub(crate) fn from_parts_unchecked(matrix: ComplexMatrix, dims: Vec<usize>) -> Self {
        debug_assert_eq!(matrix.rows(), dims.iter().product::<usize>());
        Self { matrix, dims }
    }

    /// `|psi><psi|` for a normalised vector.
    pub fn pure(psi: &[C64], dims: Vec<usize>) -> Result<Self> {
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::Argument(format!("state vector has squared norm {norm}")));
        }
        Self::new(ComplexMatrix::outer(psi), dims)
    }

    pub fn maximally_mixed(dims: Vec<usize>) -> Self {
        let n: usize = dims.iter().product();
        Self::from_parts_unchecked(ComplexMatrix::identity(n).scale(1.0 / n as f64), dims)
    }

    /// Convex combination. Weights must be non-negative and sum to one.
    pub fn mixture(parts: &[(f64, &DensityOperator)]) -> Result<Self> {
        let (_, first) = parts.first().ok_or_else(|| Error::Argument("empty mixture".into()))?;
        let dims = first.dims.clone();
        let mut total = 0.0;
        let mut acc = ComplexMatrix::zeros(first.dim(), first.dim());
        for (w, rho) in parts {
            if rho.dims != dims {
                return Err(Error::Argument("mixture of states with different dims".into()));
            }
            if *w < 0.0 {
                return Err(Error::Argument(format!("negative mixture weight {w}")));
            }
            total += w;
            acc = &acc + &rho.matrix.scale(*w);
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Argument(format!("mixture weights sum to {total}")));
        }
        Ok(Self::from_parts_unchecked(acc, dims))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Total Hilbert-space dimension.
    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn parties(&self) -> usize {
        self.dims.len()
    }

    pub fn purity(&self) -> f64 {
        hs_inner(&self.matrix, &self.matrix).expect("square")
    }

    pub fn partial_transpose(&self, party: usize) -> Result<ComplexMatrix> {
        partial_transpose_matrix(&self.matrix, &self.dims, party)
    }

    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityOperator> {
        let (m, dims) = partial_trace_matrix(&self.matrix, &self.dims, keep)?;
        Ok(Self::from_parts_unchecked(m, dims))
    }

    /// Smallest eigenvalue of the partial transpose on `party`.
    pub fn min_partial_transpose_eigenvalue(&self, party: usize) -> Result<f64> {
        Ok(hermitian_eig(&self.partial_transpose(party)?)?.min_eigenvalue())
    }

    pub fn is_ppt(&self, party: usize) -> Result<bool> {
        Ok(self.min_partial_transpose_eigenvalue(party)? >= -Tolerances::global().psd_floor)
    }

    pub fn tensor(&self, other: &DensityOperator) -> DensityOperator {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self::from_parts_unchecked(tensor_product(&self.matrix, &other.matrix), dims)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn sigma_x() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]])
    }

    fn sigma_z() -> ComplexMatrix {
        ComplexMatrix::from_real_diagonal(&[1.0, -1.0])
    }

    fn sigma_y() -> ComplexMatrix {
        ComplexMatrix::new(2, 2, vec![ZERO, C64::new(0.0, -1.0), C64::new(0.0, 1.0), ZERO]).unwrap()
    }

    fn phi_plus() -> DensityOperator {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        DensityOperator::pure(&[c(s), ZERO, ZERO, c(s)], vec![2, 2]).unwrap()
    }

    #[test]
    fn kron_identity_and_diagonal() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(tensor_product(&i2, &i2), ComplexMatrix::identity(4));
        assert_eq!(tensor_product(&sigma_z(), &sigma_z()), ComplexMatrix::from_real_diagonal(&[1.0, -1.0, -1.0, 1.0]));
    }

    #[test]
    fn kron_xx_flips_both_bits() {
        let xx = tensor_product(&sigma_x(), &sigma_x());
        let ket00 = vec![ONE, ZERO, ZERO, ZERO];
        assert_eq!(xx.apply(&ket00), vec![ZERO, ZERO, ZERO, ONE]);
    }

    #[test]
    fn partial_transpose_examples() {
        let mixed = DensityOperator::maximally_mixed(vec![2, 2]);
        assert_eq!(mixed.partial_transpose(0).unwrap(), *mixed.matrix());

        let pt = phi_plus().partial_transpose(1).unwrap();
        let ev = hermitian_eig(&pt).unwrap().eigenvalues;
        let expected = [0.5, 0.5, 0.5, -0.5];
        for (a, b) in ev.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12, "{ev:?}");
        }
    }

    #[test]
    fn partial_transpose_rejects_bad_party() {
        assert!(matches!(phi_plus().partial_transpose(2), Err(Error::Index(_))));
    }

    #[test]
    fn partial_trace_of_bell_state() {
        let reduced = phi_plus().partial_trace(&[0]).unwrap();
        assert!(reduced.matrix().max_abs_diff(&ComplexMatrix::identity(2).scale(0.5)) < 1e-15);
        assert_eq!(reduced.dims(), &[2]);
    }

    #[test]
    fn partial_trace_errors() {
        assert!(matches!(phi_plus().partial_trace(&[]), Err(Error::Argument(_))));
        assert!(matches!(phi_plus().partial_trace(&[0, 0]), Err(Error::Argument(_))));
        assert!(matches!(phi_plus().partial_trace(&[3]), Err(Error::Index(_))));
    }

    #[test]
    fn partial_trace_of_product_recovers_factor() {
        let a = DensityOperator::new(ComplexMatrix::from_real_rows(&[&[0.7, 0.2], &[0.2, 0.3]]), vec![2]).unwrap();
        let b = DensityOperator::maximally_mixed(vec![3]);
        let ab = a.tensor(&b);
        assert!(ab.partial_trace(&[0]).unwrap().matrix().max_abs_diff(a.matrix()) < 1e-15);
        assert!(ab.partial_trace(&[1]).unwrap().matrix().max_abs_diff(b.matrix()) < 1e-15);
    }

    #[test]
    fn partial_trace_of_w_state_pair() {
        let s = 1.0 / 3f64.sqrt();
        let mut psi = vec![ZERO; 8];
        psi[4] = c(s);
        psi[2] = c(s);
        psi[1] = c(s);
        let w = DensityOperator::pure(&psi, vec![2, 2, 2]).unwrap();
        let r = w.partial_trace(&[0]).unwrap();
        let expected = ComplexMatrix::from_real_diagonal(&[2.0 / 3.0, 1.0 / 3.0]);
        assert!(r.matrix().max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn hs_inner_examples() {
        assert_eq!(hs_inner(&sigma_x(), &sigma_y()).unwrap(), 0.0);
        let paulis = [ComplexMatrix::identity(2), sigma_x(), sigma_y(), sigma_z()];
        for (i, a) in paulis.iter().enumerate() {
            for (j, b) in paulis.iter().enumerate() {
                let expected = if i == j { 2.0 } else { 0.0 };
                assert_eq!(hs_inner(a, b).unwrap(), expected);
            }
        }
        let mixed = DensityOperator::maximally_mixed(vec![2, 2]);
        // four diagonal entries of 1/4 squared
        let oracle: f64 = (0..4).map(|i| mixed.matrix()[(i, i)].re.powi(2)).sum();
        assert!((hs_inner(mixed.matrix(), mixed.matrix()).unwrap() - oracle).abs() < 1e-15);
        assert!((oracle - 0.25).abs() < 1e-15);
        assert!(hs_inner(&sigma_x(), &ComplexMatrix::identity(4)).is_err());
    }

    #[test]
    fn density_operator_validation() {
        let not_unit = ComplexMatrix::identity(4);
        assert!(matches!(DensityOperator::new(not_unit, vec![2, 2]), Err(Error::Validation(_))));
        let not_psd = ComplexMatrix::from_real_diagonal(&[1.5, -0.5]);
        assert!(matches!(DensityOperator::new(not_psd, vec![2]), Err(Error::Validation(_))));
        let wrong_dims = ComplexMatrix::identity(4).scale(0.25);
        assert!(matches!(DensityOperator::new(wrong_dims, vec![2, 3]), Err(Error::Argument(_))));
    }
}
