//! Cyclic Jacobi eigensolver for Hermitian matrices.

use std::cmp::Ordering;

use super::{ComplexMatrix, C64, ZERO};
use crate::config::Tolerances;
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;

/// Eigen-decomposition `m = V diag(e) V†` with eigenvalues in descending order.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors stored as columns.
    pub eigenvectors: ComplexMatrix,
}

impl Spectrum {
    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(f64::NAN)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(f64::NAN)
    }

    pub fn vector(&self, k: usize) -> Vec<C64> {
        self.eigenvectors.column(k)
    }

    /// `V diag(values) V†` with the given replacement eigenvalues.
    pub fn reconstruct_with(&self, values: &[f64]) -> ComplexMatrix {
        assert_eq!(values.len(), self.eigenvalues.len());
        let v = &self.eigenvectors;
        let n = v.rows();
        ComplexMatrix::from_fn(n, n, |i, j| {
            values.iter().enumerate().filter(|(_, &e)| e != 0.0).map(|(k, &e)| v[(i, k)] * v[(j, k)].conj() * e).sum()
        })
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.reconstruct_with(&self.eigenvalues)
    }
}

pub fn hermitian_eig(m: &ComplexMatrix) -> Result<Spectrum> {
    if !m.is_square() {
        return Err(Error::Validation(format!("eigensolver needs a square matrix, got {}x{}", m.rows(), m.cols())));
    }
    let defect = m.hermiticity_defect();
    let tol = Tolerances::global().eig_input_hermitian;
    if defect > tol * m.frobenius_norm().max(1.0) {
        return Err(Error::Validation(format!("matrix is not Hermitian (defect {defect:.3e})")));
    }
    let n = m.rows();
    let mut a = m.hermitian_part();
    let mut v = ComplexMatrix::identity(n);
    let scale = a.frobenius_norm();

    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|p| ((p + 1)..n).map(move |q| (p, q)))
            .map(|(p, q)| a[(p, q)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let mut pairs: Vec<(f64, Vec<C64>)> = (0..n).map(|k| (a[(k, k)].re, normalize_phase(v.column(k)))).collect();
    let tie = 1e-12 * scale.max(1.0);
    pairs.sort_by(|x, y| {
        if (x.0 - y.0).abs() <= tie {
            lexicographic_desc(&x.1, &y.1)
        } else {
            y.0.partial_cmp(&x.0).unwrap_or(Ordering::Equal)
        }
    });

    let eigenvalues = pairs.iter().map(|p| p.0).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, n, |i, k| pairs[k].1[i]);
    Ok(Spectrum { eigenvalues, eigenvectors })
}

/// One complex Jacobi rotation annihilating `a[p,q]`.
///
/// The phase of `a[p,q]` is removed by `diag(1, e^{-iφ})` first, leaving a real
/// symmetric 2x2 block handled by the classical rotation.
fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let r = apq.norm();
    if r < f64::MIN_POSITIVE {
        return;
    }
    let phase_conj = (apq / r).conj();
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let zeta = (aqq - app) / (2.0 * r);
    let t = if zeta == 0.0 { 1.0 } else { zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt()) };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    // U restricted to (p,q)
    let upp = C64::new(c, 0.0);
    let upq = C64::new(s, 0.0);
    let uqp = phase_conj * (-s);
    let uqq = phase_conj * c;

    let n = a.rows();
    for k in 0..n {
        let (akp, akq) = (a[(k, p)], a[(k, q)]);
        a[(k, p)] = akp * upp + akq * uqp;
        a[(k, q)] = akp * upq + akq * uqq;
        let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
        v[(k, p)] = vkp * upp + vkq * uqp;
        v[(k, q)] = vkp * upq + vkq * uqq;
    }
    for k in 0..n {
        let (apk, aqk) = (a[(p, k)], a[(q, k)]);
        a[(p, k)] = upp.conj() * apk + uqp.conj() * aqk;
        a[(q, k)] = upq.conj() * apk + uqq.conj() * aqk;
    }
    a[(p, q)] = ZERO;
    a[(q, p)] = ZERO;
    a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
}

/// Rotates the global phase so the first non-negligible component is real positive.
fn normalize_phase(mut x: Vec<C64>) -> Vec<C64> {
    let largest = x.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if let Some(lead) = x.iter().find(|z| z.norm() > 1e-10 * largest.max(f64::MIN_POSITIVE)).copied() {
        let phase = lead.conj() / lead.norm();
        for z in &mut x {
            *z *= phase;
        }
    }
    x
}

fn lexicographic_desc(x: &[C64], y: &[C64]) -> Ordering {
    for (a, b) in x.iter().zip(y) {
        let ord = b.re.partial_cmp(&a.re).unwrap_or(Ordering::Equal);
        if ord != Ordering::Equal && (a.re - b.re).abs() > 1e-12 {
            return ord;
        }
        let ord = b.im.partial_cmp(&a.im).unwrap_or(Ordering::Equal);
        if ord != Ordering::Equal && (a.im - b.im).abs() > 1e-12 {
            return ord;
        }
    }
    Ordering::Equal
}
