//! Early-stopping evaluation of a quadratic identifier.
//!
//! Every term `w_μ T_μ²` is non-negative, so the running sum can only grow and
//! the first time it exceeds the separable bound the remaining settings need
//! not be measured.

use std::io::Write;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::Serialize;

use crate::config::Tolerances;
use crate::densop::{hermitian_eig, kron_vectors, DensityOperator, C64};
use crate::error::{Error, Result};
use crate::tomo::{index_label, state_to_tensor, Convention, TomographicBasis};
use crate::witness::QuadraticIdentifier;

#[derive(Clone, Debug, Default, PartialEq)]
pub enum OrderPolicy {
    /// Largest weight first; ties keep tensor order.
    #[default]
    DescendingWeight,
    /// Tensor (row-major index) order.
    GivenOrder,
    Random(u64),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PlanStep {
    pub index: Vec<usize>,
    pub weight: f64,
}

/// Settings to measure, in order, with the bound the running sum must beat.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementPlan {
    dims: Vec<usize>,
    steps: Vec<PlanStep>,
    bound: f64,
}

impl MeasurementPlan {
    pub fn new(dims: Vec<usize>, steps: Vec<PlanStep>, bound: f64) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for s in &steps {
            if s.weight <= 0.0 || !s.weight.is_finite() {
                return Err(Error::Argument(format!("plan weight {} must be positive", s.weight)));
            }
            if s.index.len() != dims.len() || s.index.iter().zip(&dims).any(|(&m, &d)| m >= d * d) {
                return Err(Error::Index(format!("setting {:?} does not fit dims {dims:?}", s.index)));
            }
            if !seen.insert(s.index.clone()) {
                return Err(Error::Argument(format!("setting {:?} appears twice", s.index)));
            }
        }
        Ok(Self { dims, steps, bound })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn steps(&self) -> &[PlanStep] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    /// The quadratic bound depends on the state; use this when running the
    /// plan on a state other than the one the identifier was built for.
    pub fn with_bound(mut self, bound: f64) -> Self {
        self.bound = bound;
        self
    }
}

pub fn make_plan(q: &QuadraticIdentifier, policy: &OrderPolicy) -> MeasurementPlan {
    let mut steps: Vec<PlanStep> =
        q.nonzero_weights().into_iter().map(|(index, weight)| PlanStep { index, weight }).collect();
    match policy {
        OrderPolicy::DescendingWeight => steps.sort_by(|a, b| b.weight.total_cmp(&a.weight)),
        OrderPolicy::GivenOrder => {}
        OrderPolicy::Random(seed) => steps.shuffle(&mut ChaCha8Rng::seed_from_u64(*seed)),
    }
    MeasurementPlan { dims: q.dims().to_vec(), steps, bound: q.bound_upper }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RunVerdict {
    Entangled,
    Pending,
    ExhaustedInconclusive,
}

impl std::fmt::Display for RunVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RunVerdict::Entangled => "Entangled",
            RunVerdict::Pending => "Pending",
            RunVerdict::ExhaustedInconclusive => "ExhaustedInconclusive",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepRecord {
    pub step: usize,
    pub index: Vec<usize>,
    pub label: String,
    pub t_estimate: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub std_error: Option<f64>,
    pub contribution: f64,
    pub partial_sum: f64,
    pub verdict: RunVerdict,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IncrementalRun {
    pub partial_sum: f64,
    pub bound: f64,
    pub steps: Vec<StepRecord>,
    pub verdict: RunVerdict,
    pub plan_len: usize,
}

impl IncrementalRun {
    /// Number of settings consumed.
    pub fn settings_used(&self) -> usize {
        self.steps.len()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "step,mu_indices,T_estimate,contribution,partial_sum,bound,verdict")?;
        for s in &self.steps {
            let idx: Vec<String> = s.index.iter().map(|m| m.to_string()).collect();
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                s.step,
                idx.join("."),
                s.t_estimate + 0.0,
                s.contribution + 0.0,
                s.partial_sum + 0.0,
                self.bound + 0.0,
                s.verdict
            )?;
        }
        Ok(())
    }
}

/// Step-by-step accumulation against a plan; callers feed one estimate per setting.
#[derive(Clone, Debug)]
pub struct Session<'a> {
    plan: &'a MeasurementPlan,
    partial_sum: f64,
    steps: Vec<StepRecord>,
    verdict: RunVerdict,
}

impl<'a> Session<'a> {
    pub fn new(plan: &'a MeasurementPlan) -> Self {
        let verdict = Self::classify(plan, 0.0, 0);
        Self { plan, partial_sum: 0.0, steps: Vec::new(), verdict }
    }

    fn classify(plan: &MeasurementPlan, partial: f64, used: usize) -> RunVerdict {
        if partial > plan.bound + Tolerances::global().detection_margin {
            RunVerdict::Entangled
        } else if used == plan.len() {
            RunVerdict::ExhaustedInconclusive
        } else {
            RunVerdict::Pending
        }
    }

    /// Next setting to measure, or `None` once the run is decided.
    pub fn next_setting(&self) -> Option<&'a PlanStep> {
        match self.verdict {
            RunVerdict::Pending => self.plan.steps.get(self.steps.len()),
            _ => None,
        }
    }

    /// Records a measured value; `contribution` must be non-negative.
    pub fn record(&mut self, t_estimate: f64, std_error: Option<f64>, contribution: f64) -> Result<RunVerdict> {
        let step = self.next_setting().ok_or_else(|| Error::Precondition("session already decided".into()))?;
        if contribution < 0.0 || contribution.is_nan() {
            return Err(Error::Argument(format!("contribution {contribution} is negative")));
        }
        self.partial_sum += contribution;
        let verdict = Self::classify(self.plan, self.partial_sum, self.steps.len() + 1);
        self.steps.push(StepRecord {
            step: self.steps.len() + 1,
            index: step.index.clone(),
            label: index_label(&step.index, &self.plan.dims),
            t_estimate,
            std_error,
            contribution,
            partial_sum: self.partial_sum,
            verdict,
        });
        self.verdict = verdict;
        Ok(verdict)
    }

    pub fn verdict(&self) -> RunVerdict {
        self.verdict
    }

    pub fn finish(self) -> IncrementalRun {
        IncrementalRun {
            partial_sum: self.partial_sum,
            bound: self.plan.bound,
            steps: self.steps,
            verdict: self.verdict,
            plan_len: self.plan.len(),
        }
    }
}

fn check_dims(plan: &MeasurementPlan, rho: &DensityOperator) -> Result<()> {
    if plan.dims != rho.dims() {
        return Err(Error::Index(format!("plan dims {:?} do not match state dims {:?}", plan.dims, rho.dims())));
    }
    Ok(())
}

/// Uses exact correlations of `rho`.
pub fn run_exact(plan: &MeasurementPlan, rho: &DensityOperator) -> Result<IncrementalRun> {
    check_dims(plan, rho)?;
    let t = state_to_tensor(rho, Convention::RawMoment)?;
    let mut session = Session::new(plan);
    while let Some(step) = session.next_setting() {
        let v = t.raw(&step.index)?;
        session.record(v, None, step.weight * v * v)?;
    }
    Ok(session.finish())
}

#[derive(Clone, Debug, PartialEq)]
pub struct ShotModel {
    pub shots_per_setting: u64,
    pub seed: u64,
    /// Number of standard errors subtracted from `|T̂|` before squaring.
    pub z: f64,
}

impl ShotModel {
    pub fn new(shots_per_setting: u64, seed: u64, z: f64) -> Result<Self> {
        if shots_per_setting == 0 {
            return Err(Error::Argument("at least one shot per setting is needed".into()));
        }
        if z.is_nan() || z < 0.0 {
            return Err(Error::Argument(format!("confidence z = {z} must be non-negative")));
        }
        Ok(Self { shots_per_setting, seed, z })
    }
}

/// Outcome values and exact probabilities of one product setting.
#[derive(Clone, Debug)]
pub struct OutcomeDistribution {
    pub values: Vec<f64>,
    pub probabilities: Vec<f64>,
}

impl OutcomeDistribution {
    pub fn mean(&self) -> f64 {
        self.values.iter().zip(&self.probabilities).map(|(v, p)| v * p).sum()
    }

    fn range(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Counts for `n` shots, drawn as a chain of binomials.
    fn sample_counts(&self, n: u64, rng: &mut ChaCha8Rng) -> Vec<u64> {
        let mut counts = vec![0; self.values.len()];
        let mut left = n;
        let mut mass = 1.0;
        for (k, &p) in self.probabilities.iter().enumerate() {
            if left == 0 {
                break;
            }
            if k + 1 == self.probabilities.len() || mass <= p {
                counts[k] = left;
                break;
            }
            let q = (p / mass).clamp(0.0, 1.0);
            let c = Binomial::new(left, q).expect("probability in [0, 1]").sample(rng);
            counts[k] = c;
            left -= c;
            mass -= p;
        }
        counts
    }
}

/// Eigenvalues and eigenvectors of one basis operator.
type Eigenpairs = (Vec<f64>, Vec<Vec<C64>>);

/// Per-party eigen-decomposition of the basis operators, shared by all settings.
struct LocalSpectra {
    /// `spectra[party][mu] = (eigenvalues, eigenvectors)`.
    spectra: Vec<Vec<Eigenpairs>>,
}

impl LocalSpectra {
    fn new(dims: &[usize]) -> Result<Self> {
        let spectra = dims
            .iter()
            .map(|&d| {
                let basis = TomographicBasis::for_dim(d)?;
                basis
                    .ops()
                    .iter()
                    .map(|op| {
                        let s = hermitian_eig(op)?;
                        let vectors = (0..d).map(|k| s.vector(k)).collect();
                        Ok((s.eigenvalues, vectors))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { spectra })
    }

    fn distribution(&self, rho: &DensityOperator, index: &[usize]) -> OutcomeDistribution {
        let dims = rho.dims();
        let total: usize = dims.iter().product();
        let mut values = Vec::with_capacity(total);
        let mut probabilities = Vec::with_capacity(total);
        for outcome in 0..total {
            let ks = crate::densop::digits(outcome, dims);
            let mut value = 1.0;
            let mut factors = Vec::with_capacity(dims.len());
            for (party, &k) in ks.iter().enumerate() {
                let (vals, vecs) = &self.spectra[party][index[party]];
                value *= vals[k];
                factors.push(vecs[k].clone());
            }
            let e = kron_vectors(&factors);
            values.push(value);
            probabilities.push(rho.matrix().expectation(&e).re.max(0.0));
        }
        let norm: f64 = probabilities.iter().sum();
        for p in &mut probabilities {
            *p /= norm;
        }
        OutcomeDistribution { values, probabilities }
    }
}

/// Exact outcome distributions for every setting of a plan, reusable across
/// many simulated runs.
pub struct SampledExperiment<'a> {
    plan: &'a MeasurementPlan,
    distributions: Vec<OutcomeDistribution>,
}

impl<'a> SampledExperiment<'a> {
    pub fn new(plan: &'a MeasurementPlan, rho: &DensityOperator) -> Result<Self> {
        check_dims(plan, rho)?;
        let spectra = LocalSpectra::new(rho.dims())?;
        let distributions = plan.steps.iter().map(|s| spectra.distribution(rho, &s.index)).collect();
        Ok(Self { plan, distributions })
    }

    pub fn distributions(&self) -> &[OutcomeDistribution] {
        &self.distributions
    }

    pub fn run(&self, model: &ShotModel) -> Result<IncrementalRun> {
        let mut rng = ChaCha8Rng::seed_from_u64(model.seed);
        let n = model.shots_per_setting;
        let nf = n as f64;
        let mut session = Session::new(self.plan);
        let mut k = 0;
        while let Some(step) = session.next_setting() {
            let dist = &self.distributions[k];
            k += 1;
            let counts = dist.sample_counts(n, &mut rng);
            let mean = counts.iter().zip(&dist.values).map(|(&c, v)| c as f64 * v).sum::<f64>() / nf;
            let r = dist.range();
            let variance = if n > 1 {
                counts.iter().zip(&dist.values).map(|(&c, v)| c as f64 * (v - mean) * (v - mean)).sum::<f64>()
                    / (nf - 1.0)
            } else {
                r * r
            };
            // R²/n keeps the error from collapsing when every shot agrees
            let se = ((variance + r * r / nf) / nf).sqrt();
            let shrunk = (mean.abs() - model.z * se).max(0.0);
            session.record(mean, Some(se), step.weight * shrunk * shrunk)?;
        }
        Ok(session.finish())
    }
}

/// Simulates `shots_per_setting` measurements of each setting.
pub fn run_sampled(plan: &MeasurementPlan, rho: &DensityOperator, model: &ShotModel) -> Result<IncrementalRun> {
    SampledExperiment::new(plan, rho)?.run(model)
}
