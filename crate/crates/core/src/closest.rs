//! Closest PPT state by spectral clipping of the partial transpose, and the
//! known closest separable states of the standard families.

use serde::Serialize;

use crate::config::Tolerances;
use crate::densop::{hermitian_eig, partial_transpose_matrix, ComplexMatrix, DensityOperator, MatrixJson};
use crate::error::{Error, Result};
use crate::states::{self, FamilySpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectionPath {
    /// The input already had a positive partial transpose.
    Unchanged,
    /// A single clip-and-shift pass sufficed.
    OneShot,
    /// The shift made kept eigenvalues negative; they were clipped again.
    Iterative,
}

#[derive(Clone, Debug)]
pub struct PptProjectionResult {
    pub rho0: ComplexMatrix,
    pub dims: Vec<usize>,
    /// Shift added to the kept eigenvalues.
    pub lambda: f64,
    pub is_psd: bool,
    pub hs_distance: f64,
    /// Number of shift computations; 0 when the input was returned unchanged.
    pub iterations: usize,
    pub path: ProjectionPath,
}

impl PptProjectionResult {
    pub fn into_state(self) -> Result<DensityOperator> {
        if !self.is_psd {
            return Err(Error::Validation("closest PPT candidate is not positive semidefinite".into()));
        }
        DensityOperator::new(self.rho0, self.dims)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "rho0": MatrixJson::from_matrix(&self.rho0, &self.dims),
            "lambda": self.lambda + 0.0,
            "is_psd": self.is_psd,
            "hs_distance": self.hs_distance,
            "iterations": self.iterations,
            "path": self.path,
        })
    }
}

/// Hilbert-Schmidt projection onto states whose partial transpose on `party` is PSD.
///
/// Diagonalise `ρ^Γ = V D V†`, zero the negative eigenvalues, shift the rest by
/// `λ = (1 - Σ kept)/#kept`, and transpose back. When the shift pushes a kept
/// eigenvalue below zero that eigenvalue is dropped too and `λ` recomputed,
/// which converges to the Euclidean projection of the spectrum onto the simplex.
pub fn closest_ppt(rho: &DensityOperator, party: usize) -> Result<PptProjectionResult> {
    let tol = Tolerances::global();
    let pt = rho.partial_transpose(party)?;
    let spectrum = hermitian_eig(&pt)?;
    if spectrum.min_eigenvalue() >= -tol.psd_floor {
        return Ok(PptProjectionResult {
            rho0: rho.matrix().clone(),
            dims: rho.dims().to_vec(),
            lambda: 0.0,
            is_psd: true,
            hs_distance: 0.0,
            iterations: 0,
            path: ProjectionPath::Unchanged,
        });
    }

    let values = &spectrum.eigenvalues;
    let mut kept: Vec<bool> = values.iter().map(|&d| d >= 0.0).collect();
    let mut iterations = 0;
    let lambda = loop {
        iterations += 1;
        let count = kept.iter().filter(|&&k| k).count();
        let sum: f64 = values.iter().zip(&kept).filter(|(_, &k)| k).map(|(d, _)| d).sum();
        let lambda = (1.0 - sum) / count as f64;
        let mut changed = false;
        for (k, &d) in kept.iter_mut().zip(values) {
            if *k && d + lambda < 0.0 {
                *k = false;
                changed = true;
            }
        }
        if !changed {
            break lambda;
        }
    };
    let clipped: Vec<f64> = values.iter().zip(&kept).map(|(&d, &k)| if k { d + lambda } else { 0.0 }).collect();
    let rho0 = partial_transpose_matrix(&spectrum.reconstruct_with(&clipped), rho.dims(), party)?.hermitian_part();
    let is_psd = hermitian_eig(&rho0)?.min_eigenvalue() >= -tol.psd_floor;
    let hs_distance = (rho.matrix() - &rho0).frobenius_norm();
    Ok(PptProjectionResult {
        rho0,
        dims: rho.dims().to_vec(),
        lambda,
        is_psd,
        hs_distance,
        iterations,
        path: if iterations == 1 { ProjectionPath::OneShot } else { ProjectionPath::Iterative },
    })
}

/// `sqrt(Tr((a - b)²))`.
pub fn hs_distance(a: &DensityOperator, b: &DensityOperator) -> Result<f64> {
    if a.dims() != b.dims() {
        return Err(Error::Argument(format!("dims {:?} vs {:?}", a.dims(), b.dims())));
    }
    Ok((a.matrix() - b.matrix()).frobenius_norm())
}

/// The closed-form closest separable state of a family member.
///
/// * Werner: `ρ` itself for `p <= 1/3`, otherwise the fixed state with
///   diagonal `(1/3, 1/6, 1/6, 1/3)` and coherence `1/6` between `|00>` and `|11>`.
/// * Bell-diagonal: `ρ` itself when every weight is at most 1/2, otherwise
///   `ρ - (2/3) p_j (|ψ_j><ψ_j| - 1/4)` for the selected Bell index `j`
///   (default: the largest weight).
/// * Isotropic: the isotropic state with `p = 1/(d+1)` once `p` exceeds it.
/// * W: `(23/63)|W><W| + (40/63)·1/8`.
pub fn closest_separable_family(family: &FamilySpec) -> Result<DensityOperator> {
    let rho = family.state()?;
    match family {
        FamilySpec::Werner { p } => {
            if *p <= 1.0 / 3.0 {
                Ok(rho)
            } else {
                let (third, sixth) = (1.0 / 3.0, 1.0 / 6.0);
                let m = ComplexMatrix::from_real_rows(&[
                    &[third, 0.0, 0.0, sixth],
                    &[0.0, sixth, 0.0, 0.0],
                    &[0.0, 0.0, sixth, 0.0],
                    &[sixth, 0.0, 0.0, third],
                ]);
                Ok(DensityOperator::from_parts_unchecked(m, vec![2, 2]))
            }
        }
        FamilySpec::BellDiagonal { probs, j } => {
            let argmax = (0..4).fold(0, |best, k| if probs[k] > probs[best] { k } else { best }) + 1;
            let j = j.unwrap_or(argmax);
            if !(1..=4).contains(&j) {
                return Err(Error::Argument(format!("Bell index {j} not in 1..=4")));
            }
            if probs.iter().all(|&p| p <= 0.5) {
                return Ok(rho);
            }
            let psi = ComplexMatrix::outer(&states::bell_vector(j)?);
            let shift = &psi - &ComplexMatrix::identity(4).scale(0.25);
            let m = rho.matrix() - &shift.scale(2.0 / 3.0 * probs[j - 1]);
            Ok(DensityOperator::from_parts_unchecked(m, vec![2, 2]))
        }
        FamilySpec::Isotropic { d, p } => {
            let threshold = 1.0 / (*d as f64 + 1.0);
            if *p <= threshold {
                Ok(rho)
            } else {
                states::isotropic(*d, threshold)
            }
        }
        FamilySpec::WState => {
            let w = ComplexMatrix::outer(&states::w_vector());
            let m = &w.scale(23.0 / 63.0) + &ComplexMatrix::identity(8).scale(40.0 / 63.0 / 8.0);
            Ok(DensityOperator::from_parts_unchecked(m, vec![2, 2, 2]))
        }
        other => Err(Error::Argument(format!("no closed-form closest separable state for family `{}`", other.name()))),
    }
}
