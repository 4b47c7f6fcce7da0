//! Detection for family members and parameter sweeps over a family.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::Serialize;

use crate::closest::{closest_ppt, closest_separable_family};
use crate::densop::{ComplexMatrix, DensityOperator};
use crate::error::{Error, Result};
use crate::states::FamilySpec;
use crate::tomo::{state_to_tensor, Convention};
use crate::witness::{
    bell_diagonal_criteria, build_linear_with, build_quadratic_with, closed_form_linear_bound,
    closed_form_quadratic_bound, sum_squares_criterion, BoundProvenance, DetectionReport, LinearWitness,
    QuadraticIdentifier, SeeSawConfig,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Linear,
    Quadratic,
    SumSquares,
    BellDiagonal,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(Mode::Linear),
            "quadratic" => Ok(Mode::Quadratic),
            "sumsq" => Ok(Mode::SumSquares),
            "belldiag" => Ok(Mode::BellDiagonal),
            _ => Err(Error::Parse(format!("unknown mode `{s}` (linear, quadratic, sumsq, belldiag)"))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Linear => "linear",
            Mode::Quadratic => "quadratic",
            Mode::SumSquares => "sumsq",
            Mode::BellDiagonal => "belldiag",
        })
    }
}

/// Where `ρ₀` comes from.
#[derive(Clone, Debug)]
pub enum Reference {
    /// The family's closed-form closest separable state if there is one,
    /// otherwise the closest PPT candidate.
    Auto,
    ClosestPpt,
    Family(FamilySpec),
    Matrix(ComplexMatrix),
}

/// A resolved reference; `family` is set when the family's closed-form bounds apply.
#[derive(Clone, Debug)]
pub struct ResolvedReference {
    pub rho0: ComplexMatrix,
    pub source: &'static str,
    pub family: Option<FamilySpec>,
}

pub fn resolve_reference(
    rho: &DensityOperator,
    family: Option<&FamilySpec>,
    reference: &Reference,
) -> Result<ResolvedReference> {
    let ppt = || -> Result<ResolvedReference> {
        let r = closest_ppt(rho, rho.parties() - 1)?;
        Ok(ResolvedReference { rho0: r.rho0, source: "closest_ppt", family: family.cloned() })
    };
    match reference {
        Reference::Auto => match family.map(closest_separable_family) {
            Some(Ok(rho0)) => Ok(ResolvedReference {
                rho0: rho0.into_matrix(),
                source: "family_closed_form",
                family: family.cloned(),
            }),
            _ => ppt(),
        },
        Reference::ClosestPpt => ppt(),
        Reference::Family(f) => {
            let rho0 = closest_separable_family(f)?;
            let applies = family == Some(f);
            Ok(ResolvedReference {
                rho0: rho0.into_matrix(),
                source: "family_closed_form",
                family: if applies { Some(f.clone()) } else { None },
            })
        }
        Reference::Matrix(m) => Ok(ResolvedReference { rho0: m.clone(), source: "matrix", family: None }),
    }
}

/// Linear witness against the reference, with the family's closed-form bound
/// when one is known for that reference.
pub fn linear_for(rho: &DensityOperator, reference: &ResolvedReference, cfg: &SeeSawConfig) -> Result<LinearWitness> {
    if let Some(FamilySpec::Isotropic { .. }) = reference.family {
        return Err(Error::Argument(
            "the isotropic linear witness depends on basis sign conventions; use the quadratic mode".into(),
        ));
    }
    let w = build_linear_with(rho, &reference.rho0, cfg)?;
    match reference.family.as_ref().and_then(closed_form_linear_bound) {
        Some(b) if w.provenance == BoundProvenance::SeeSaw => w.with_closed_form_bound(b),
        _ => Ok(w),
    }
}

pub fn quadratic_for(
    rho: &DensityOperator,
    reference: &ResolvedReference,
    cfg: &SeeSawConfig,
) -> Result<QuadraticIdentifier> {
    let q = build_quadratic_with(rho, &reference.rho0, cfg)?;
    match reference.family.as_ref().and_then(closed_form_quadratic_bound) {
        Some(b) if q.provenance == BoundProvenance::SeeSaw => q.with_closed_form_bound(b),
        _ => Ok(q),
    }
}

/// One detection run in the given mode.
pub fn detect(
    rho: &DensityOperator,
    family: Option<&FamilySpec>,
    reference: &Reference,
    mode: Mode,
    cfg: &SeeSawConfig,
) -> Result<DetectionReport> {
    match mode {
        Mode::SumSquares => sum_squares_criterion(rho),
        Mode::BellDiagonal => bell_diagonal_criteria(&state_to_tensor(rho, Convention::RawMoment)?),
        Mode::Linear => {
            let r = resolve_reference(rho, family, reference)?;
            linear_for(rho, &r, cfg)?.evaluate(rho)
        }
        Mode::Quadratic => {
            let r = resolve_reference(rho, family, reference)?;
            Ok(quadratic_for(rho, &r, cfg)?.report())
        }
    }
}

/// `name=lo:hi:n`, `n` evenly spaced points including both ends.
#[derive(Clone, Debug, PartialEq)]
pub struct ScanRange {
    pub param: String,
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl ScanRange {
    pub fn points(&self) -> Vec<f64> {
        match self.n {
            0 => vec![],
            1 => vec![self.lo],
            n => (0..n).map(|i| self.lo + (self.hi - self.lo) * i as f64 / (n - 1) as f64).collect(),
        }
    }
}

impl FromStr for ScanRange {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("expected name=lo:hi:n, got `{s}`"));
        let (param, range) = s.split_once('=').ok_or_else(bad)?;
        let parts: Vec<&str> = range.split(':').collect();
        if parts.len() != 3 || param.is_empty() {
            return Err(bad());
        }
        let lo = parts[0].parse().map_err(|_| bad())?;
        let hi = parts[1].parse().map_err(|_| bad())?;
        let n = parts[2].parse().map_err(|_| bad())?;
        Ok(Self { param: param.to_string(), lo, hi, n })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub param: f64,
    pub value: f64,
    pub bound: f64,
    pub detected: bool,
}

/// Applies `f` to every item, in parallel when the `parallel` feature is on.
/// Output order matches input order.
pub fn par_map<T, R, F>(items: Vec<T>, f: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.into_iter().map(f).collect()
    }
}

/// Detection at every point of `range`, with the reference chosen per point.
pub fn run_sweep(family: &FamilySpec, range: &ScanRange, mode: Mode, cfg: &SeeSawConfig) -> Result<Vec<SweepRow>> {
    family.with_param(&range.param, range.lo)?;
    let rows = par_map(range.points(), |x| -> Result<SweepRow> {
        let member = family.with_param(&range.param, x)?;
        let rho = member.state()?;
        let r = detect(&rho, Some(&member), &Reference::Auto, mode, cfg)?;
        Ok(SweepRow { param: x, value: r.value, bound: r.bound_used, detected: r.verdict.is_entangled() })
    });
    rows.into_iter().collect()
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], mut w: W) -> Result<()> {
    writeln!(w, "param,value,bound,detected")?;
    for r in rows {
        writeln!(w, "{},{},{},{}", r.param, r.value + 0.0, r.bound + 0.0, r.detected)?;
    }
    Ok(())
}
