//! Numerical tolerances shared by every module.
//!
//! The process-wide record is read once from the `WITNESSKIT_TOL` environment
//! variable. A bare number overrides the detection margin; otherwise the
//! variable is a comma separated list of `field=value` pairs, e.g.
//! `WITNESSKIT_TOL=psd_floor=1e-8,detection_margin=1e-7`.

use std::sync::OnceLock;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// Hermiticity check for density operators.
    pub hermitian: f64,
    /// Hermiticity accepted on input to the eigensolver.
    pub eig_input_hermitian: f64,
    /// |Tr ρ − 1|.
    pub trace: f64,
    /// Eigenvalues above `-psd_floor` count as non-negative.
    pub psd_floor: f64,
    /// Tensor entries below this magnitude are treated as vanishing.
    pub vanishing: f64,
    /// An identifier reports entanglement only when value > bound + margin.
    pub detection_margin: f64,
    /// Single-party averages below this are treated as zero.
    pub local_average: f64,
    /// Probability vectors must sum to one within this.
    pub probability_sum: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            hermitian: 1e-10,
            eig_input_hermitian: 1e-8,
            trace: 1e-10,
            psd_floor: 1e-9,
            vanishing: 1e-12,
            detection_margin: 1e-9,
            local_average: 1e-9,
            probability_sum: 1e-12,
        }
    }
}

impl Tolerances {
    /// The process-wide record, initialised from `WITNESSKIT_TOL` on first use.
    pub fn global() -> &'static Tolerances {
        static GLOBAL: OnceLock<Tolerances> = OnceLock::new();
        GLOBAL.get_or_init(|| match std::env::var("WITNESSKIT_TOL") {
            Ok(spec) => Tolerances::parse_override(&spec).unwrap_or_else(|e| {
                eprintln!("ignoring WITNESSKIT_TOL: {e}");
                Tolerances::default()
            }),
            Err(_) => Tolerances::default(),
        })
    }

    pub fn parse_override(spec: &str) -> Result<Tolerances> {
        let mut tol = Tolerances::default();
        let spec = spec.trim();
        if spec.is_empty() {
            return Ok(tol);
        }
        if let Ok(margin) = spec.parse::<f64>() {
            tol.detection_margin = check_positive("detection_margin", margin)?;
            return Ok(tol);
        }
        for pair in spec.split(',') {
            let (key, value) =
                pair.split_once('=').ok_or_else(|| Error::Parse(format!("expected field=value, got `{pair}`")))?;
            let value: f64 = value.trim().parse().map_err(|_| Error::Parse(format!("bad number `{value}`")))?;
            let key = key.trim();
            let value = check_positive(key, value)?;
            match key {
                "hermitian" => tol.hermitian = value,
                "eig_input_hermitian" => tol.eig_input_hermitian = value,
                "trace" => tol.trace = value,
                "psd_floor" => tol.psd_floor = value,
                "vanishing" => tol.vanishing = value,
                "detection_margin" => tol.detection_margin = value,
                "local_average" => tol.local_average = value,
                "probability_sum" => tol.probability_sum = value,
                other => return Err(Error::Parse(format!("unknown tolerance `{other}`"))),
            }
        }
        Ok(tol)
    }
}

fn check_positive(key: &str, value: f64) -> Result<f64> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(Error::Parse(format!("tolerance `{key}` must be a finite non-negative number")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bare_number_sets_margin() {
        let t = Tolerances::parse_override("1e-6").unwrap();
        assert_eq!(t.detection_margin, 1e-6);
        assert_eq!(t.psd_floor, Tolerances::default().psd_floor);
    }

    #[test]
    fn pairs_override_fields() {
        let t = Tolerances::parse_override("psd_floor=1e-7, trace=1e-8").unwrap();
        assert_eq!(t.psd_floor, 1e-7);
        assert_eq!(t.trace, 1e-8);
    }

    #[test]
    fn rejects_unknown_and_negative() {
        assert!(Tolerances::parse_override("nope=1").is_err());
        assert!(Tolerances::parse_override("trace=-1").is_err());
        assert!(Tolerances::parse_override("trace").is_err());
    }
}
