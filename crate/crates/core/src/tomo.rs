//! Tomographic operator bases and extended correlation tensors.
//!
//! Every basis starts with the identity and continues with traceless Hermitian
//! operators normalised to `Tr(λ_i λ_j) = 2δ_ij`. For `d > 2` the generalised
//! Gell-Mann matrices are ordered as
//!
//! 1. symmetric real pairs `E_jk + E_kj` for `j < k` in row-major order,
//! 2. antisymmetric imaginary pairs `-i E_jk + i E_kj` in the same order,
//! 3. diagonal members `sqrt(2/(l(l+1))) (Σ_{j<l} E_jj - l E_ll)`, `l = 1..d-1`.
//!
//! For `d = 2` this yields `(1, σ_x, σ_y, σ_z)`, and for `d = 3` it is the
//! labelling under which the Horodecki bound-entangled family has correlation
//! entries at `(1,1)..(6,6)`, `(8,2)`, `(8,7)` and `(8,8)`.

use std::io::Write;

use crate::densop::{digits, hs_inner, ComplexMatrix, DensityOperator, C64, ONE, ZERO};
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct TomographicBasis {
    d: usize,
    ops: Vec<ComplexMatrix>,
}

impl TomographicBasis {
    /// Pauli basis for qubits, Gell-Mann basis otherwise.
    pub fn for_dim(d: usize) -> Result<Self> {
        if d == 2 {
            Ok(pauli_basis())
        } else {
            gellmann_basis(d)
        }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn ops(&self) -> &[ComplexMatrix] {
        &self.ops
    }

    pub fn op(&self, i: usize) -> &ComplexMatrix {
        &self.ops[i]
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// `Tr(λ_i²)`: `d` for the identity, 2 otherwise.
    pub fn norm_sq(&self, i: usize) -> f64 {
        if i == 0 {
            self.d as f64
        } else {
            2.0
        }
    }
}

pub fn pauli_basis() -> TomographicBasis {
    let i = C64::new(0.0, 1.0);
    let ops = vec![
        ComplexMatrix::identity(2),
        ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]),
        ComplexMatrix::new(2, 2, vec![ZERO, -i, i, ZERO]).expect("2x2"),
        ComplexMatrix::from_real_diagonal(&[1.0, -1.0]),
    ];
    TomographicBasis { d: 2, ops }
}

pub fn gellmann_basis(d: usize) -> Result<TomographicBasis> {
    if d < 2 {
        return Err(Error::Argument(format!("Gell-Mann basis needs d >= 2, got {d}")));
    }
    let mut ops = vec![ComplexMatrix::identity(d)];
    let pairs: Vec<(usize, usize)> = (0..d).flat_map(|j| ((j + 1)..d).map(move |k| (j, k))).collect();
    for &(j, k) in &pairs {
        let mut m = ComplexMatrix::zeros(d, d);
        m[(j, k)] = ONE;
        m[(k, j)] = ONE;
        ops.push(m);
    }
    for &(j, k) in &pairs {
        let mut m = ComplexMatrix::zeros(d, d);
        m[(j, k)] = C64::new(0.0, -1.0);
        m[(k, j)] = C64::new(0.0, 1.0);
        ops.push(m);
    }
    for l in 1..d {
        let norm = (2.0 / (l * (l + 1)) as f64).sqrt();
        let diag: Vec<f64> = (0..d)
            .map(|j| match j.cmp(&l) {
                std::cmp::Ordering::Less => norm,
                std::cmp::Ordering::Equal => -(l as f64) * norm,
                std::cmp::Ordering::Greater => 0.0,
            })
            .collect();
        ops.push(ComplexMatrix::from_real_diagonal(&diag));
    }
    Ok(TomographicBasis { d, ops })
}

/// Normalisation in which tensor entries are reported.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Convention {
    /// Plain traces `Tr(ρ λ_μ1 ⊗ ... ⊗ λ_μN)`.
    RawMoment,
    /// Bipartite equal-dimension view in which entries with both indices
    /// non-zero are multiplied by `d/(2(d-1))`.
    QuditScaled,
}

/// Correlation tensor including identity components.
///
/// Entries are stored as raw moments; the convention only affects what
/// [`get`](Self::get) and [`iter`](Self::iter) report.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtendedCorrelationTensor {
    dims: Vec<usize>,
    values: Vec<f64>,
    convention: Convention,
}

impl ExtendedCorrelationTensor {
    pub fn from_raw(dims: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        let expected: usize = dims.iter().map(|d| d * d).product();
        if values.len() != expected || dims.iter().any(|&d| d < 2) {
            return Err(Error::Argument(format!("{} values for a tensor over dims {dims:?}", values.len())));
        }
        Ok(Self { dims, values, convention: Convention::RawMoment })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Number of index values per slot (`d_k²`).
    pub fn shape(&self) -> Vec<usize> {
        self.dims.iter().map(|d| d * d).collect()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    pub fn with_convention(mut self, convention: Convention) -> Result<Self> {
        if convention == Convention::QuditScaled && !(self.dims.len() == 2 && self.dims[0] == self.dims[1]) {
            return Err(Error::Argument(format!(
                "QuditScaled needs two parties of equal dimension, got {:?}",
                self.dims
            )));
        }
        self.convention = convention;
        Ok(self)
    }

    pub fn flat_index(&self, index: &[usize]) -> Result<usize> {
        if index.len() != self.dims.len() {
            return Err(Error::Index(format!("{}-slot index for a {}-party tensor", index.len(), self.dims.len())));
        }
        let mut flat = 0;
        for (&mu, &d) in index.iter().zip(&self.dims) {
            if mu >= d * d {
                return Err(Error::Index(format!("index {index:?} out of range for dims {:?}", self.dims)));
            }
            flat = flat * d * d + mu;
        }
        Ok(flat)
    }

    pub fn multi_index(&self, flat: usize) -> Vec<usize> {
        digits(flat, &self.shape())
    }

    /// Factor applied to the raw moment at `index` under the current convention.
    pub fn scale_factor(&self, index: &[usize]) -> f64 {
        match self.convention {
            Convention::RawMoment => 1.0,
            Convention::QuditScaled => {
                if index.iter().all(|&m| m >= 1) {
                    let d = self.dims[0] as f64;
                    d / (2.0 * (d - 1.0))
                } else {
                    1.0
                }
            }
        }
    }

    pub fn raw(&self, index: &[usize]) -> Result<f64> {
        Ok(self.values[self.flat_index(index)?])
    }

    pub fn get(&self, index: &[usize]) -> Result<f64> {
        Ok(self.raw(index)? * self.scale_factor(index))
    }

    pub fn raw_values(&self) -> &[f64] {
        &self.values
    }

    /// `(multi-index, value)` pairs in row-major order, in the tensor's convention.
    pub fn iter(&self) -> impl Iterator<Item = (Vec<usize>, f64)> + '_ {
        (0..self.values.len()).map(move |flat| {
            let idx = self.multi_index(flat);
            let v = self.values[flat] * self.scale_factor(&idx);
            (idx, v)
        })
    }

    /// Writes `mu_1,...,mu_N,value` with a header row.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let header: Vec<String> = (1..=self.dims.len()).map(|k| format!("mu_{k}")).collect();
        writeln!(w, "{},value", header.join(","))?;
        for (idx, v) in self.iter() {
            let cols: Vec<String> = idx.iter().map(|m| m.to_string()).collect();
            writeln!(w, "{},{}", cols.join(","), v + 0.0)?;
        }
        Ok(())
    }

    /// Correlation block `T_ij`, `i, j >= 1`, of a bipartite tensor, in the tensor's convention.
    pub fn correlation_block(&self) -> Result<Vec<Vec<f64>>> {
        if self.dims.len() != 2 {
            return Err(Error::Argument("correlation block needs a bipartite tensor".into()));
        }
        let (na, nb) = (self.dims[0] * self.dims[0], self.dims[1] * self.dims[1]);
        (1..na).map(|i| (1..nb).map(|j| self.get(&[i, j])).collect()).collect()
    }
}

/// Which index tuples a sum of squares runs over.
#[derive(Clone, Debug, Default, PartialEq)]
pub enum IndexFilter {
    /// Every slot non-zero (pure correlations).
    #[default]
    Correlations,
    /// Everything except the all-zero normalisation entry.
    NonTrivial,
    Explicit(Vec<Vec<usize>>),
}

pub fn state_to_tensor(rho: &DensityOperator, convention: Convention) -> Result<ExtendedCorrelationTensor> {
    let t = operator_tensor(rho.matrix(), rho.dims())?;
    t.with_convention(convention)
}

/// Raw moments `Tr(m λ_μ1 ⊗ ... ⊗ λ_μN)` of any operator, real parts.
pub fn operator_tensor(m: &ComplexMatrix, dims: &[usize]) -> Result<ExtendedCorrelationTensor> {
    let n: usize = dims.iter().product();
    if !m.is_square() || m.rows() != n {
        return Err(Error::Argument(format!("operator of side {} does not match dims {dims:?}", m.rows())));
    }
    let bases = dims.iter().map(|&d| TomographicBasis::for_dim(d)).collect::<Result<Vec<_>>>()?;
    let state_digits: Vec<Vec<usize>> = (0..n).map(|i| digits(i, dims)).collect();
    // Non-zero entries of m, reused for every basis element.
    let entries: Vec<(usize, usize, C64)> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter_map(|(i, j)| {
            let v = m[(i, j)];
            (v != ZERO).then_some((i, j, v))
        })
        .collect();
    let shape: Vec<usize> = dims.iter().map(|d| d * d).collect();
    let total: usize = shape.iter().product();
    let mut values = Vec::with_capacity(total);
    for flat in 0..total {
        let mu = digits(flat, &shape);
        // Tr(m O) = Σ_ij m_ij O_ji, O = ⊗ λ_μk
        let mut acc = ZERO;
        for &(i, j, v) in &entries {
            let mut o = ONE;
            for (k, basis) in bases.iter().enumerate() {
                o *= basis.op(mu[k])[(state_digits[j][k], state_digits[i][k])];
                if o == ZERO {
                    break;
                }
            }
            acc += v * o;
        }
        values.push(acc.re);
    }
    ExtendedCorrelationTensor::from_raw(dims.to_vec(), values)
}

/// `Σ_μ c_μ λ_μ1 ⊗ ... ⊗ λ_μN` for coefficients laid out like a tensor.
pub fn operator_from_coefficients(dims: &[usize], coefficients: &[f64]) -> Result<ComplexMatrix> {
    let shape: Vec<usize> = dims.iter().map(|d| d * d).collect();
    if coefficients.len() != shape.iter().product::<usize>() {
        return Err(Error::Argument("coefficient count does not match dims".into()));
    }
    let bases = dims.iter().map(|&d| TomographicBasis::for_dim(d)).collect::<Result<Vec<_>>>()?;
    let n: usize = dims.iter().product();
    let state_digits: Vec<Vec<usize>> = (0..n).map(|i| digits(i, dims)).collect();
    let mut out = ComplexMatrix::zeros(n, n);
    for (flat, &c) in coefficients.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        let mu = digits(flat, &shape);
        for i in 0..n {
            for j in 0..n {
                let mut o = C64::new(c, 0.0);
                for (k, basis) in bases.iter().enumerate() {
                    o *= basis.op(mu[k])[(state_digits[i][k], state_digits[j][k])];
                    if o == ZERO {
                        break;
                    }
                }
                out[(i, j)] += o;
            }
        }
    }
    Ok(out)
}

/// Operator reconstructed from a correlation tensor. Positivity is reported,
/// not enforced.
#[derive(Clone, Debug)]
pub struct Reconstruction {
    pub matrix: ComplexMatrix,
    pub dims: Vec<usize>,
    pub min_eigenvalue: f64,
}

impl Reconstruction {
    pub fn is_psd(&self) -> bool {
        self.min_eigenvalue >= -crate::config::Tolerances::global().psd_floor
    }

    pub fn into_density(self) -> Result<DensityOperator> {
        DensityOperator::new(self.matrix, self.dims)
    }
}

/// `ρ = Σ_μ T_μ ⊗_k λ_μk / Tr(λ_μk²)`.
pub fn tensor_to_state(t: &ExtendedCorrelationTensor) -> Result<Reconstruction> {
    if t.convention() != Convention::RawMoment {
        return Err(Error::Argument("tensor_to_state expects RawMoment entries".into()));
    }
    let bases = t.dims().iter().map(|&d| TomographicBasis::for_dim(d)).collect::<Result<Vec<_>>>()?;
    let coefficients: Vec<f64> = t
        .raw_values()
        .iter()
        .enumerate()
        .map(|(flat, &v)| {
            let idx = t.multi_index(flat);
            let norm: f64 = idx.iter().zip(&bases).map(|(&m, b)| b.norm_sq(m)).product();
            v / norm
        })
        .collect();
    let matrix = operator_from_coefficients(t.dims(), &coefficients)?;
    let min_eigenvalue = crate::densop::hermitian_eig(&matrix)?.min_eigenvalue();
    Ok(Reconstruction { matrix, dims: t.dims().to_vec(), min_eigenvalue })
}

pub fn sum_of_squares(t: &ExtendedCorrelationTensor, filter: &IndexFilter) -> Result<f64> {
    match filter {
        IndexFilter::Correlations => Ok(t.iter().filter(|(i, _)| i.iter().all(|&m| m >= 1)).map(|(_, v)| v * v).sum()),
        IndexFilter::NonTrivial => Ok(t.iter().filter(|(i, _)| i.iter().any(|&m| m >= 1)).map(|(_, v)| v * v).sum()),
        IndexFilter::Explicit(list) => list.iter().map(|i| t.get(i).map(|v| v * v)).sum(),
    }
}

/// Human label for an index tuple: `0xyz` letters for qubits, dotted numbers otherwise.
pub fn index_label(index: &[usize], dims: &[usize]) -> String {
    if dims.iter().all(|&d| d == 2) {
        index.iter().map(|&m| ['0', 'x', 'y', 'z'][m]).collect()
    } else {
        index.iter().map(|m| m.to_string()).collect::<Vec<_>>().join(".")
    }
}

/// Inverse of [`index_label`]; also accepts dotted numbers for qubits.
pub fn parse_index_label(label: &str, dims: &[usize]) -> Result<Vec<usize>> {
    let idx: Vec<usize> = if label.contains('.') || dims.iter().any(|&d| d != 2) {
        label
            .split('.')
            .map(|s| s.trim().parse().map_err(|_| Error::Parse(format!("bad index `{label}`"))))
            .collect::<Result<_>>()?
    } else {
        label
            .chars()
            .map(|c| match c {
                '0' | 'I' | 'i' => Ok(0),
                'x' | 'X' | '1' => Ok(1),
                'y' | 'Y' | '2' => Ok(2),
                'z' | 'Z' | '3' => Ok(3),
                _ => Err(Error::Parse(format!("bad Pauli label `{label}`"))),
            })
            .collect::<Result<_>>()?
    };
    if idx.len() != dims.len() || idx.iter().zip(dims).any(|(&m, &d)| m >= d * d) {
        return Err(Error::Index(format!("index `{label}` does not fit dims {dims:?}")));
    }
    Ok(idx)
}

/// Checks the basis invariants; returns the largest violation found.
pub fn basis_defect(basis: &TomographicBasis) -> f64 {
    let mut worst = 0.0f64;
    for (i, a) in basis.ops().iter().enumerate() {
        if i >= 1 {
            worst = worst.max(a.trace().norm());
            worst = worst.max(a.hermiticity_defect());
            for z in a.data() {
                if z.re != 0.0 && z.im != 0.0 {
                    worst = worst.max(z.re.abs().min(z.im.abs()));
                }
            }
        }
        for (j, b) in basis.ops().iter().enumerate().skip(1) {
            if i >= 1 {
                let expected = if i == j { 2.0 } else { 0.0 };
                worst = worst.max((hs_inner(a, b).expect("same shape") - expected).abs());
            }
        }
    }
    worst
}
