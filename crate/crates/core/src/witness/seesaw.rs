//! Maximum of `Tr(K ρ_1 ⊗ ... ⊗ ρ_N)` over product states.
//!
//! The see-saw only ever finds achievable values, so it gives a lower bound on
//! the separable maximum. Upper bounds come from the largest eigenvalue of `K`,
//! from the correlation-block singular value for bipartite correlation-only
//! operators, and for two qubits from a branch-and-bound over the Bloch sphere.
//! Partial transposition maps product states to product states, so the
//! largest eigenvalue of every single-party partial transpose of `K` is an
//! upper bound as well.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::densop::{digits, hermitian_eig, partial_transpose_matrix, ComplexMatrix, C64, ZERO};
use crate::error::{Error, Result};
use crate::states::random_pure_vector;
use crate::tomo::{operator_tensor, TomographicBasis};

#[derive(Clone, Debug)]
pub struct SeeSawConfig {
    pub starts: usize,
    /// Stop a run once a full sweep improves the objective by less than this.
    pub tolerance: f64,
    pub max_sweeps: usize,
    pub seed: u64,
}

impl Default for SeeSawConfig {
    fn default() -> Self {
        Self { starts: 64, tolerance: 1e-11, max_sweeps: 500, seed: 0x005E_E5A3 }
    }
}

#[derive(Clone, Debug)]
pub struct SeeSawRun {
    pub value: f64,
    /// One normalised vector per party.
    pub states: Vec<Vec<C64>>,
    /// Objective at the start and after every single-party update.
    pub trace: Vec<f64>,
    pub sweeps: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum UpperBoundSource {
    Eigenvalue,
    PartialTransposeEigenvalue,
    CorrelationSingularValue,
    BlochSphereSearch,
}

#[derive(Clone, Debug)]
pub struct OverlapBounds {
    pub lower: f64,
    pub upper: f64,
    pub upper_source: UpperBoundSource,
    pub maximizer: Vec<Vec<C64>>,
}

fn check_operator(k: &ComplexMatrix, dims: &[usize]) -> Result<()> {
    let n: usize = dims.iter().product();
    if dims.is_empty() || dims.iter().any(|&d| d < 2) || !k.is_square() || k.rows() != n {
        return Err(Error::Argument(format!("operator of side {} does not match dims {dims:?}", k.rows())));
    }
    let tol = crate::config::Tolerances::global().eig_input_hermitian;
    if !k.is_hermitian(tol * k.frobenius_norm().max(1.0)) {
        return Err(Error::Validation("witness operator is not Hermitian".into()));
    }
    Ok(())
}

/// Operator on `party` obtained by contracting `k` with the other parties' vectors.
pub fn effective_operator(k: &ComplexMatrix, dims: &[usize], states: &[Vec<C64>], party: usize) -> ComplexMatrix {
    let n = k.rows();
    let d = dims[party];
    let mut local = Vec::with_capacity(n);
    let mut weight = Vec::with_capacity(n);
    for r in 0..n {
        let dg = digits(r, dims);
        let w: C64 = dg.iter().enumerate().filter(|(m, _)| *m != party).map(|(m, &i)| states[m][i]).product();
        local.push(dg[party]);
        weight.push(w);
    }
    let mut out = ComplexMatrix::zeros(d, d);
    for r in 0..n {
        let wr = weight[r].conj();
        if wr == ZERO {
            continue;
        }
        for c in 0..n {
            let kc = k[(r, c)];
            if kc != ZERO {
                out[(local[r], local[c])] += wr * weight[c] * kc;
            }
        }
    }
    out.hermitian_part()
}

fn product_expectation(k: &ComplexMatrix, states: &[Vec<C64>]) -> f64 {
    let psi = crate::densop::kron_vectors(states);
    k.expectation(&psi).re
}

/// One see-saw run from the given starting product state.
pub fn see_saw(k: &ComplexMatrix, dims: &[usize], initial: Vec<Vec<C64>>, cfg: &SeeSawConfig) -> Result<SeeSawRun> {
    check_operator(k, dims)?;
    if initial.len() != dims.len() || initial.iter().zip(dims).any(|(v, &d)| v.len() != d) {
        return Err(Error::Argument("initial product state does not match dims".into()));
    }
    let mut states = initial;
    let mut value = product_expectation(k, &states);
    let mut trace = vec![value];
    let mut sweeps = 0;
    while sweeps < cfg.max_sweeps {
        sweeps += 1;
        let before = value;
        for party in 0..dims.len() {
            let eff = effective_operator(k, dims, &states, party);
            let spectrum = hermitian_eig(&eff)?;
            let candidate = spectrum.max_eigenvalue();
            // keep the current vector when it is already optimal to within roundoff
            if candidate > value || party == 0 && sweeps == 1 {
                states[party] = spectrum.vector(0);
                value = candidate;
            }
            trace.push(value);
        }
        if value - before < cfg.tolerance {
            break;
        }
    }
    Ok(SeeSawRun { value, states, trace, sweeps })
}

/// Best see-saw value over `cfg.starts` random starting points.
pub fn see_saw_lower_bound(k: &ComplexMatrix, dims: &[usize], cfg: &SeeSawConfig) -> Result<SeeSawRun> {
    check_operator(k, dims)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut best: Option<SeeSawRun> = None;
    for _ in 0..cfg.starts.max(1) {
        let init: Vec<Vec<C64>> = dims.iter().map(|&d| random_pure_vector(d, &mut rng)).collect();
        let run = see_saw(k, dims, init, cfg)?;
        if best.as_ref().is_none_or(|b| run.value > b.value) {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one start"))
}

pub fn max_product_overlap(k: &ComplexMatrix, dims: &[usize]) -> Result<OverlapBounds> {
    max_product_overlap_with(k, dims, &SeeSawConfig::default())
}

pub fn max_product_overlap_with(k: &ComplexMatrix, dims: &[usize], cfg: &SeeSawConfig) -> Result<OverlapBounds> {
    let best = see_saw_lower_bound(k, dims, cfg)?;
    let mut upper = hermitian_eig(k)?.max_eigenvalue();
    let mut upper_source = UpperBoundSource::Eigenvalue;
    for party in 0..dims.len() {
        let pt = hermitian_eig(&partial_transpose_matrix(k, dims, party)?)?.max_eigenvalue();
        if pt < upper {
            upper = pt;
            upper_source = UpperBoundSource::PartialTransposeEigenvalue;
        }
    }
    if let Some(sv) = correlation_singular_value_bound(k, dims)? {
        if sv < upper {
            upper = sv;
            upper_source = UpperBoundSource::CorrelationSingularValue;
        }
    }
    let settled = upper - best.value <= 1e-12 * upper.abs().max(1.0);
    if let Some(sphere) = if settled { None } else { two_qubit_sphere_bound(k, dims)? } {
        if sphere < upper {
            upper = sphere;
            upper_source = UpperBoundSource::BlochSphereSearch;
        }
    }
    Ok(OverlapBounds { lower: best.value, upper: upper.max(best.value), upper_source, maximizer: best.states })
}

/// Expansion coefficients `c_μ` with `K = Σ c_μ λ_μ1 ⊗ ... ⊗ λ_μN`.
pub fn basis_coefficients(k: &ComplexMatrix, dims: &[usize]) -> Result<Vec<f64>> {
    let t = operator_tensor(k, dims)?;
    let bases = dims.iter().map(|&d| TomographicBasis::for_dim(d)).collect::<Result<Vec<_>>>()?;
    Ok(t.raw_values()
        .iter()
        .enumerate()
        .map(|(flat, &v)| {
            let idx = t.multi_index(flat);
            v / idx.iter().zip(&bases).map(|(&m, b)| b.norm_sq(m)).product::<f64>()
        })
        .collect())
}

/// Largest singular value of a real matrix given as rows.
pub fn max_singular_value(rows: &[Vec<f64>]) -> f64 {
    if rows.is_empty() || rows[0].is_empty() {
        return 0.0;
    }
    let n = rows.len();
    let gram =
        ComplexMatrix::from_fn(n, n, |i, j| C64::new(rows[i].iter().zip(&rows[j]).map(|(a, b)| a * b).sum(), 0.0));
    hermitian_eig(&gram).expect("Gram matrix is Hermitian").max_eigenvalue().max(0.0).sqrt()
}

/// For a bipartite operator without local terms, `c_00 + σ_max(C) |a| |b|`
/// where `|a|² = 2(d-1)/d` is the Bloch length of a pure qudit state.
pub fn correlation_singular_value_bound(k: &ComplexMatrix, dims: &[usize]) -> Result<Option<f64>> {
    if dims.len() != 2 {
        return Ok(None);
    }
    let c = basis_coefficients(k, dims)?;
    let (na, nb) = (dims[0] * dims[0], dims[1] * dims[1]);
    let scale = c.iter().map(|x| x.abs()).fold(0.0, f64::max).max(1.0);
    let local = (1..na).any(|i| c[i * nb].abs() > 1e-12 * scale) || (1..nb).any(|j| c[j].abs() > 1e-12 * scale);
    if local {
        return Ok(None);
    }
    let block: Vec<Vec<f64>> = (1..na).map(|i| (1..nb).map(|j| c[i * nb + j]).collect()).collect();
    let bloch = |d: usize| (2.0 * (d as f64 - 1.0) / d as f64).sqrt();
    Ok(Some(c[0] + max_singular_value(&block) * bloch(dims[0]) * bloch(dims[1])))
}

type Vec3 = [f64; 3];

fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm(a: &Vec3) -> f64 {
    dot(a, a).sqrt()
}

fn normalized(a: Vec3) -> Vec3 {
    let n = norm(&a);
    [a[0] / n, a[1] / n, a[2] / n]
}

/// `max_a c00 + cA·a + |cB + Cᵀa|` over unit Bloch vectors `a`.
struct BlochProblem {
    c00: f64,
    ca: Vec3,
    cb: Vec3,
    /// `c[i][j]` multiplies `a_i b_j`.
    c: [[f64; 3]; 3],
    /// Spectral norm of `c`.
    c_norm: f64,
    ca_norm: f64,
}

impl BlochProblem {
    fn v(&self, a: &Vec3) -> Vec3 {
        let mut v = self.cb;
        for (j, vj) in v.iter_mut().enumerate() {
            *vj += (0..3).map(|i| self.c[i][j] * a[i]).sum::<f64>();
        }
        v
    }

    fn value(&self, a: &Vec3) -> f64 {
        self.c00 + dot(&self.ca, a) + norm(&self.v(a))
    }

    /// Upper bound of the objective on the spherical region within chord
    /// distance `r` of the unit vector `m`.
    fn region_bound(&self, m: &Vec3, r: f64) -> (f64, f64) {
        let v = self.v(m);
        let nv = norm(&v);
        let g = self.c00 + dot(&self.ca, m) + nv;
        let lipschitz = g + (self.ca_norm + self.c_norm) * r;
        if nv <= 0.0 {
            return (g, lipschitz);
        }
        let mut u = self.ca;
        for (i, ui) in u.iter_mut().enumerate() {
            *ui += (0..3).map(|j| self.c[i][j] * v[j] / nv).sum::<f64>();
        }
        let s = dot(&u, m);
        let tangential = (dot(&u, &u) - s * s).max(0.0).sqrt();
        // g(m+Δ) - g(m) <= |u_T| δ + (-s/2 + |C|²/(2|v|)) δ² with δ = |Δ| <= r
        let curvature = -s / 2.0 + self.c_norm * self.c_norm / (2.0 * nv);
        let step = if curvature < 0.0 { (-tangential / (2.0 * curvature)).min(r) } else { r };
        let second_order = g + tangential * step + curvature * step * step;
        (g, lipschitz.min(second_order))
    }
}

struct Region {
    vertices: [Vec3; 3],
    upper: f64,
}

impl PartialEq for Region {
    fn eq(&self, other: &Self) -> bool {
        self.upper.total_cmp(&other.upper) == Ordering::Equal
    }
}
impl Eq for Region {}
impl PartialOrd for Region {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Region {
    fn cmp(&self, other: &Self) -> Ordering {
        self.upper.total_cmp(&other.upper)
    }
}

const SPHERE_BUDGET: usize = 60_000;

/// Certified maximum over product states of a two-qubit operator, by
/// branch-and-bound over spherical triangles of the first qubit's Bloch sphere
/// (the second qubit is optimised in closed form).
pub fn two_qubit_sphere_bound(k: &ComplexMatrix, dims: &[usize]) -> Result<Option<f64>> {
    if dims != [2, 2] {
        return Ok(None);
    }
    let coeff = basis_coefficients(k, dims)?;
    let at = |i: usize, j: usize| coeff[i * 4 + j];
    let mut c = [[0.0; 3]; 3];
    for (i, row) in c.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate() {
            *x = at(i + 1, j + 1);
        }
    }
    let c_norm = max_singular_value(&c.iter().map(|r| r.to_vec()).collect::<Vec<_>>());
    let ca = [at(1, 0), at(2, 0), at(3, 0)];
    let problem = BlochProblem { c00: at(0, 0), ca, cb: [at(0, 1), at(0, 2), at(0, 3)], c, c_norm, ca_norm: norm(&ca) };

    let scale = coeff.iter().map(|x| x.abs()).sum::<f64>().max(1e-300);
    let target_gap = 1e-11 * scale;

    let mut lower = f64::NEG_INFINITY;
    let mut heap = BinaryHeap::new();
    let push = |vertices: [Vec3; 3], lower: &mut f64, heap: &mut BinaryHeap<Region>| {
        let center = normalized([
            vertices[0][0] + vertices[1][0] + vertices[2][0],
            vertices[0][1] + vertices[1][1] + vertices[2][1],
            vertices[0][2] + vertices[1][2] + vertices[2][2],
        ]);
        let r =
            vertices.iter().map(|v| norm(&[v[0] - center[0], v[1] - center[1], v[2] - center[2]])).fold(0.0, f64::max);
        let (g, upper) = problem.region_bound(&center, r);
        *lower = lower.max(g);
        for v in &vertices {
            *lower = lower.max(problem.value(v));
        }
        if upper >= *lower {
            heap.push(Region { vertices, upper });
        }
    };

    for sx in [1.0, -1.0] {
        for sy in [1.0, -1.0] {
            for sz in [1.0, -1.0] {
                push([[sx, 0.0, 0.0], [0.0, sy, 0.0], [0.0, 0.0, sz]], &mut lower, &mut heap);
            }
        }
    }

    let mut pops = 0;
    while let Some(top) = heap.peek() {
        if top.upper - lower <= target_gap || pops >= SPHERE_BUDGET {
            break;
        }
        let region = heap.pop().expect("peeked");
        pops += 1;
        let [a, b, c] = region.vertices;
        let mid = |p: &Vec3, q: &Vec3| normalized([p[0] + q[0], p[1] + q[1], p[2] + q[2]]);
        let (ab, bc, ca) = (mid(&a, &b), mid(&b, &c), mid(&c, &a));
        for tri in [[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]] {
            push(tri, &mut lower, &mut heap);
        }
    }
    let upper = heap.peek().map_or(lower, |r| r.upper.max(lower));
    // absorb floating-point error in the bound evaluation
    Ok(Some(upper + 1e-13 * scale))
}
