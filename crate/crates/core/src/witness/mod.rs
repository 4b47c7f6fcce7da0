//! Linear witnesses and quadratic identifiers built from `δ = ρ − ρ₀`.
//!
//! All tensors here are raw moments. A linear witness with coefficients `c_μ`
//! detects `ρ` when `Σ c_μ T_μ(ρ)` exceeds the largest value the same sum
//! takes on a separable state. The quadratic identifier replaces `c_μ T_μ` by
//! `w_μ T_μ²` with `w_μ ∝ D_μ²`; its separable bound `max Σ w_μ T_μ(ρ) T_μ(σ)`
//! depends on `ρ`.

mod seesaw;

use std::collections::BTreeMap;

use serde::Serialize;

pub use seesaw::{
    basis_coefficients, correlation_singular_value_bound, effective_operator, max_product_overlap,
    max_product_overlap_with, max_singular_value, see_saw, see_saw_lower_bound, two_qubit_sphere_bound, OverlapBounds,
    SeeSawConfig, SeeSawRun, UpperBoundSource,
};

use crate::config::Tolerances;
use crate::densop::{ComplexMatrix, DensityOperator};
use crate::error::{Error, Result};
use crate::states::{self, FamilySpec};
use crate::tomo::{
    index_label, operator_from_coefficients, operator_tensor, state_to_tensor, Convention, ExtendedCorrelationTensor,
};

/// Raw-moment tensor of `ρ − ρ₀`. Entries below the vanishing tolerance are
/// stored as exact zeros and play no further role.
#[derive(Clone, Debug, PartialEq)]
pub struct DeltaTensor {
    tensor: ExtendedCorrelationTensor,
}

impl DeltaTensor {
    pub fn from_tensor(t: ExtendedCorrelationTensor) -> Result<Self> {
        let tol = Tolerances::global().vanishing;
        let mut values = t.raw_values().to_vec();
        values[0] = 0.0;
        for v in &mut values {
            if v.abs() < tol {
                *v = 0.0;
            }
        }
        Ok(Self { tensor: ExtendedCorrelationTensor::from_raw(t.dims().to_vec(), values)? })
    }

    pub fn dims(&self) -> &[usize] {
        self.tensor.dims()
    }

    pub fn values(&self) -> &[f64] {
        self.tensor.raw_values()
    }

    pub fn get(&self, index: &[usize]) -> Result<f64> {
        self.tensor.raw(index)
    }

    pub fn tensor(&self) -> &ExtendedCorrelationTensor {
        &self.tensor
    }

    /// Index tuples with a non-zero entry, in flat order.
    pub fn relevant(&self) -> Vec<(Vec<usize>, f64)> {
        self.tensor.iter().filter(|(_, v)| *v != 0.0).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.values().iter().all(|&v| v == 0.0)
    }

    /// Unit for normalised coefficients: the smallest magnitude among entries
    /// within a factor 1000 of the largest.
    fn unit(&self) -> f64 {
        let max = self.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        self.values().iter().map(|v| v.abs()).filter(|&a| a > 0.0 && a >= 1e-3 * max).fold(max, f64::min)
    }
}

pub fn delta_tensor(rho: &DensityOperator, rho0: &DensityOperator) -> Result<DeltaTensor> {
    if rho.dims() != rho0.dims() {
        return Err(Error::Argument(format!("dims {:?} and {:?} differ", rho.dims(), rho0.dims())));
    }
    delta_tensor_from_matrix(rho, rho0.matrix())
}

/// Like [`delta_tensor`] for a reference that need not be positive, such as a
/// closest-PPT candidate whose own spectrum went negative. It must still be
/// Hermitian with unit trace.
pub fn delta_tensor_from_matrix(rho: &DensityOperator, rho0: &ComplexMatrix) -> Result<DeltaTensor> {
    let tol = Tolerances::global();
    if !rho0.is_square() || rho0.rows() != rho.dim() {
        return Err(Error::Argument(format!("reference of side {} does not match dims {:?}", rho0.rows(), rho.dims())));
    }
    if !rho0.is_hermitian(tol.hermitian) || (rho0.trace().re - 1.0).abs() > tol.trace {
        return Err(Error::Validation("reference operator must be Hermitian with unit trace".into()));
    }
    let diff = rho.matrix() - rho0;
    DeltaTensor::from_tensor(operator_tensor(&diff, rho.dims())?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundProvenance {
    ClosedForm,
    SeeSaw,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Entangled,
    Inconclusive,
}

impl Verdict {
    pub fn from_comparison(value: f64, bound: f64) -> Self {
        if value > bound + Tolerances::global().detection_margin {
            Verdict::Entangled
        } else {
            Verdict::Inconclusive
        }
    }

    pub fn is_entangled(self) -> bool {
        self == Verdict::Entangled
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Term {
    pub index: Vec<usize>,
    pub label: String,
    pub contribution: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DetectionReport {
    pub value: f64,
    pub bound_used: f64,
    pub verdict: Verdict,
    pub terms: Vec<Term>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub extras: BTreeMap<String, f64>,
}

impl DetectionReport {
    pub fn new(value: f64, bound_used: f64, terms: Vec<Term>) -> Self {
        // + 0.0 turns a negative zero into a plain zero for the JSON output
        let (value, bound_used) = (value + 0.0, bound_used + 0.0);
        Self { value, bound_used, verdict: Verdict::from_comparison(value, bound_used), terms, extras: BTreeMap::new() }
    }

    pub fn to_json(&self, pretty: bool) -> String {
        if pretty {
            serde_json::to_string_pretty(self).expect("report serialises")
        } else {
            serde_json::to_string(self).expect("report serialises")
        }
    }
}

fn terms_from(dims: &[usize], items: impl Iterator<Item = (Vec<usize>, f64)>) -> Vec<Term> {
    items.map(|(index, contribution)| Term { label: index_label(&index, dims), index, contribution }).collect()
}

/// Interval check for a closed-form bound against the numerical bracket.
fn accept_closed_form(bound: f64, lower: f64, upper: f64) -> Result<()> {
    let slack = 1e-6 * bound.abs().max(1.0);
    if bound < lower - slack || bound > upper + slack {
        return Err(Error::Validation(format!(
            "closed-form bound {bound} lies outside the computed interval [{lower}, {upper}]"
        )));
    }
    Ok(())
}

/// `Σ c_μ T_μ ≤ bound` for separable states, with `c_μ = D_μ / unit`.
#[derive(Clone, Debug)]
pub struct LinearWitness {
    delta: DeltaTensor,
    coefficients: Vec<f64>,
    pub bound_lower: f64,
    pub bound_upper: f64,
    pub provenance: BoundProvenance,
}

impl LinearWitness {
    pub fn delta(&self) -> &DeltaTensor {
        &self.delta
    }

    pub fn dims(&self) -> &[usize] {
        self.delta.dims()
    }

    /// Coefficients in tensor layout.
    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn terms(&self) -> Vec<(Vec<usize>, f64)> {
        self.coefficients
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(flat, &c)| (self.delta.tensor.multi_index(flat), c))
            .collect()
    }

    /// Operator `W` with `Tr(W ρ) = Σ c_μ T_μ(ρ)`.
    pub fn operator(&self) -> Result<ComplexMatrix> {
        Ok(operator_from_coefficients(self.dims(), &self.coefficients)?.hermitian_part())
    }

    pub fn with_closed_form_bound(mut self, bound: f64) -> Result<Self> {
        accept_closed_form(bound, self.bound_lower, self.bound_upper)?;
        self.bound_lower = bound;
        self.bound_upper = bound;
        self.provenance = BoundProvenance::ClosedForm;
        Ok(self)
    }

    pub fn evaluate_tensor(&self, t: &ExtendedCorrelationTensor) -> Result<DetectionReport> {
        if t.dims() != self.dims() {
            return Err(Error::Argument("tensor dims do not match the witness".into()));
        }
        let items: Vec<(Vec<usize>, f64)> = self
            .terms()
            .into_iter()
            .map(|(idx, c)| {
                let v = t.raw(&idx).expect("same dims");
                (idx, c * v)
            })
            .collect();
        let value = items.iter().map(|(_, x)| x).sum();
        let mut report = DetectionReport::new(value, self.bound_upper, terms_from(self.dims(), items.into_iter()));
        report.extras.insert("bound_lower".into(), self.bound_lower);
        Ok(report)
    }

    pub fn evaluate(&self, rho: &DensityOperator) -> Result<DetectionReport> {
        self.evaluate_tensor(&state_to_tensor(rho, Convention::RawMoment)?)
    }
}

pub fn build_linear(rho: &DensityOperator, rho0: &DensityOperator) -> Result<LinearWitness> {
    if rho.dims() != rho0.dims() {
        return Err(Error::Argument(format!("dims {:?} and {:?} differ", rho.dims(), rho0.dims())));
    }
    build_linear_with(rho, rho0.matrix(), &SeeSawConfig::default())
}

/// [`build_linear`] against a Hermitian unit-trace reference matrix.
pub fn build_linear_with(rho: &DensityOperator, rho0: &ComplexMatrix, cfg: &SeeSawConfig) -> Result<LinearWitness> {
    let delta = delta_tensor_from_matrix(rho, rho0)?;
    if delta.is_zero() {
        let coefficients = vec![0.0; delta.values().len()];
        return Ok(LinearWitness {
            delta,
            coefficients,
            bound_lower: 0.0,
            bound_upper: 0.0,
            provenance: BoundProvenance::ClosedForm,
        });
    }
    let unit = delta.unit();
    let coefficients: Vec<f64> = delta.values().iter().map(|v| v / unit).collect();
    let mut w =
        LinearWitness { delta, coefficients, bound_lower: 0.0, bound_upper: 0.0, provenance: BoundProvenance::SeeSaw };
    let bounds = max_product_overlap_with(&w.operator()?, w.dims(), cfg)?;
    w.bound_lower = bounds.lower;
    w.bound_upper = bounds.upper;
    Ok(w)
}

/// `Σ w_μ T_μ² > max_σ Σ w_μ T_μ T_μ(σ)` with `w_μ = (D_μ / unit)²`.
#[derive(Clone, Debug)]
pub struct QuadraticIdentifier {
    delta: DeltaTensor,
    weights: Vec<f64>,
    target: ExtendedCorrelationTensor,
    cfg: SeeSawConfig,
    pub bound_lower: f64,
    pub bound_upper: f64,
    pub provenance: BoundProvenance,
}

impl QuadraticIdentifier {
    pub fn delta(&self) -> &DeltaTensor {
        &self.delta
    }

    pub fn dims(&self) -> &[usize] {
        self.delta.dims()
    }

    /// Weights in tensor layout.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Non-zero weights as `(index, weight)`, in flat order.
    pub fn nonzero_weights(&self) -> Vec<(Vec<usize>, f64)> {
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, w)| **w > 0.0)
            .map(|(flat, &w)| (self.target.multi_index(flat), w))
            .collect()
    }

    /// Raw tensor of the state the identifier was built for.
    pub fn target(&self) -> &ExtendedCorrelationTensor {
        &self.target
    }

    pub fn value_for(&self, t: &ExtendedCorrelationTensor) -> f64 {
        self.weights.iter().zip(t.raw_values()).map(|(w, v)| w * v * v).sum()
    }

    /// Operator `W_t` with `Tr(W_t σ) = Σ w_μ T_μ(t) T_μ(σ)`.
    pub fn operator_for(&self, t: &ExtendedCorrelationTensor) -> Result<ComplexMatrix> {
        let coefficients: Vec<f64> = self.weights.iter().zip(t.raw_values()).map(|(w, v)| w * v).collect();
        Ok(operator_from_coefficients(self.dims(), &coefficients)?.hermitian_part())
    }

    pub fn with_closed_form_bound(mut self, bound: f64) -> Result<Self> {
        accept_closed_form(bound, self.bound_lower, self.bound_upper)?;
        self.bound_lower = bound;
        self.bound_upper = bound;
        self.provenance = BoundProvenance::ClosedForm;
        Ok(self)
    }

    fn report_with_bound(&self, t: &ExtendedCorrelationTensor, lower: f64, upper: f64) -> DetectionReport {
        let items = self.nonzero_weights().into_iter().map(|(idx, w)| {
            let v = t.raw(&idx).expect("same dims");
            (idx, w * v * v)
        });
        let terms = terms_from(self.dims(), items);
        let value = terms.iter().map(|t| t.contribution).sum();
        let mut report = DetectionReport::new(value, upper, terms);
        report.extras.insert("bound_lower".into(), lower);
        report
    }

    /// Report for the state the identifier was built from.
    pub fn report(&self) -> DetectionReport {
        self.report_with_bound(&self.target, self.bound_lower, self.bound_upper)
    }

    /// Evaluates another state; the separable bound is recomputed for it.
    pub fn evaluate(&self, rho: &DensityOperator) -> Result<DetectionReport> {
        if rho.dims() != self.dims() {
            return Err(Error::Argument("state dims do not match the identifier".into()));
        }
        let t = state_to_tensor(rho, Convention::RawMoment)?;
        if t == self.target {
            return Ok(self.report());
        }
        let (lower, upper) = self.bounds_for(&t)?;
        Ok(self.report_with_bound(&t, lower, upper))
    }

    pub fn bounds_for(&self, t: &ExtendedCorrelationTensor) -> Result<(f64, f64)> {
        if self.weights.iter().all(|&w| w == 0.0) {
            return Ok((0.0, 0.0));
        }
        let b = max_product_overlap_with(&self.operator_for(t)?, self.dims(), &self.cfg)?;
        Ok((b.lower, b.upper))
    }
}

pub fn build_quadratic(rho: &DensityOperator, rho0: &DensityOperator) -> Result<QuadraticIdentifier> {
    if rho.dims() != rho0.dims() {
        return Err(Error::Argument(format!("dims {:?} and {:?} differ", rho.dims(), rho0.dims())));
    }
    build_quadratic_with(rho, rho0.matrix(), &SeeSawConfig::default())
}

/// [`build_quadratic`] against a Hermitian unit-trace reference matrix.
pub fn build_quadratic_with(
    rho: &DensityOperator,
    rho0: &ComplexMatrix,
    cfg: &SeeSawConfig,
) -> Result<QuadraticIdentifier> {
    let delta = delta_tensor_from_matrix(rho, rho0)?;
    let weights: Vec<f64> = if delta.is_zero() {
        vec![0.0; delta.values().len()]
    } else {
        let unit = delta.unit();
        delta.values().iter().map(|v| (v / unit) * (v / unit)).collect()
    };
    let target = state_to_tensor(rho, Convention::RawMoment)?;
    let mut q = QuadraticIdentifier {
        delta,
        weights,
        target,
        cfg: cfg.clone(),
        bound_lower: 0.0,
        bound_upper: 0.0,
        provenance: BoundProvenance::SeeSaw,
    };
    if q.delta.is_zero() {
        q.provenance = BoundProvenance::ClosedForm;
        return Ok(q);
    }
    let (lower, upper) = q.bounds_for(&q.target)?;
    q.bound_lower = lower;
    q.bound_upper = upper;
    Ok(q)
}

fn near(a: f64, b: f64) -> bool {
    (a - b).abs() < 1e-12
}

/// Known separable bound of the linear witness built against
/// [`closest_separable_family`](crate::closest::closest_separable_family).
pub fn closed_form_linear_bound(family: &FamilySpec) -> Option<f64> {
    match family {
        FamilySpec::Werner { p } if *p > 1.0 / 3.0 => Some(1.0),
        FamilySpec::BellDiagonal { probs, .. } if probs.iter().any(|&p| p > 0.5) => Some(1.0),
        FamilySpec::ColoredNoise { p } if near(*p, 2.0 / 3.0) => Some(5f64.sqrt()),
        FamilySpec::WState => Some(23.0 / 3.0),
        _ => None,
    }
}

/// Known separable bound of the quadratic identifier, in raw-moment units.
/// Isotropic: `T_max = p/(d−1)` in the qudit-scaled convention.
pub fn closed_form_quadratic_bound(family: &FamilySpec) -> Option<f64> {
    match family {
        FamilySpec::Werner { p } if *p > 1.0 / 3.0 => Some(*p),
        FamilySpec::Isotropic { d, p } if *p > 1.0 / (*d as f64 + 1.0) => {
            let d = *d as f64;
            let s = d / (2.0 * (d - 1.0));
            Some(p / (d - 1.0) / (s * s))
        }
        FamilySpec::ColoredNoise { p } if near(*p, 2.0 / 3.0) => Some(35.0 / 13.0),
        FamilySpec::WState => Some(29.0 / 3.0),
        _ => None,
    }
}

/// `Σ_{i,j≥1} T_ij²` against the largest singular value of the correlation
/// block, both in the qudit-scaled convention.
pub fn sum_squares_criterion(rho: &DensityOperator) -> Result<DetectionReport> {
    let dims = rho.dims();
    if dims.len() != 2 || dims[0] != dims[1] {
        return Err(Error::Argument(format!("sum-of-squares criterion needs two equal parties, got {dims:?}")));
    }
    let t = state_to_tensor(rho, Convention::QuditScaled)?;
    let block = t.correlation_block()?;
    let items = t.iter().filter(|(idx, v)| idx.iter().all(|&m| m >= 1) && *v != 0.0).map(|(idx, v)| (idx, v * v));
    let terms = terms_from(dims, items);
    let value = terms.iter().map(|t| t.contribution).sum();
    Ok(DetectionReport::new(value, max_singular_value(&block), terms))
}

/// Sign patterns `(s_x, s_y, s_z)` for `s_x T_xx + s_y T_yy + s_z T_zz > 1`.
pub const BELL_DIAGONAL_SIGNS: [[f64; 3]; 4] =
    [[-1.0, 1.0, 1.0], [1.0, -1.0, 1.0], [1.0, 1.0, -1.0], [-1.0, -1.0, -1.0]];

pub fn bell_diagonal_criteria(t: &ExtendedCorrelationTensor) -> Result<DetectionReport> {
    if t.dims() != [2, 2] {
        return Err(Error::Argument("Bell-diagonal criteria need a two-qubit tensor".into()));
    }
    let tol = Tolerances::global().local_average;
    for k in 1..4 {
        let (a, b) = (t.raw(&[k, 0])?, t.raw(&[0, k])?);
        if a.abs() > tol || b.abs() > tol {
            return Err(Error::Precondition(format!(
                "local averages T_{0}0 = {a}, T_0{0} = {b} do not vanish; not Bell-diagonal",
                index_label(&[k], &[2])
            )));
        }
    }
    let diag = [t.raw(&[1, 1])?, t.raw(&[2, 2])?, t.raw(&[3, 3])?];
    let values: Vec<f64> = BELL_DIAGONAL_SIGNS.iter().map(|s| s.iter().zip(&diag).map(|(a, b)| a * b).sum()).collect();
    let best = (0..4).fold(0, |b, k| if values[k] > values[b] { k } else { b });
    let terms = terms_from(&[2, 2], (1..4).map(|k| (vec![k, k], BELL_DIAGONAL_SIGNS[best][k - 1] * diag[k - 1])));
    let mut report = DetectionReport::new(values[best], 1.0, terms);
    for (k, v) in values.iter().enumerate() {
        report.extras.insert(format!("inequality_{}", k + 1), *v);
    }
    report.extras.insert("abs_sum".into(), diag.iter().map(|v| v.abs()).sum());
    Ok(report)
}

/// Change `ρ − ρ₀` of the Bell-diagonal closed form for Bell index `j`,
/// i.e. `(2/3) p_j (|ψ_j⟩⟨ψ_j| − 1/4)`, as a tensor.
pub fn bell_diagonal_delta(probs: [f64; 4], j: usize) -> Result<DeltaTensor> {
    let rho = states::bell_diagonal(probs)?;
    let rho0 = crate::closest::closest_separable_family(&FamilySpec::BellDiagonal { probs, j: Some(j) })?;
    delta_tensor(&rho, &rho0)
}

/// `(index, coefficient)` of `T_xx + T_zz − T_z0 + T_0z`, separable bound 3/2.
pub const MOTIVATING_TERMS: [([usize; 2], f64); 4] = [([1, 1], 1.0), ([3, 3], 1.0), ([3, 0], -1.0), ([0, 3], 1.0)];
pub const MOTIVATING_BOUND: f64 = 1.5;

pub fn motivating_witness(t: &ExtendedCorrelationTensor) -> f64 {
    motivating_witness_partial(t, &MOTIVATING_TERMS.map(|(i, _)| i))
}

/// Sum over the listed terms only.
pub fn motivating_witness_partial(t: &ExtendedCorrelationTensor, measured: &[[usize; 2]]) -> f64 {
    MOTIVATING_TERMS
        .iter()
        .filter(|(idx, _)| measured.contains(idx))
        .map(|(idx, c)| c * t.raw(idx).expect("two-qubit tensor"))
        .sum()
}

pub fn motivating_witness_operator() -> ComplexMatrix {
    let mut coefficients = vec![0.0; 16];
    for (idx, c) in MOTIVATING_TERMS {
        coefficients[idx[0] * 4 + idx[1]] = c;
    }
    operator_from_coefficients(&[2, 2], &coefficients).expect("16 coefficients")
}
