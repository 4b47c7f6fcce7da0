//! State families used throughout, plus seeded random generators.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::densop::{kron_vectors, ComplexMatrix, DensityOperator, C64, ZERO};
use crate::error::{Error, Result};

fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn check_unit(name: &str, x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::Argument(format!("{name} = {x} outside [0, 1]")))
    }
}

/// The four Bell states in the order `φ+, φ-, ψ+, ψ-`.
pub fn bell_vector(j: usize) -> Result<Vec<C64>> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let v = match j {
        1 => [s, 0.0, 0.0, s],
        2 => [s, 0.0, 0.0, -s],
        3 => [0.0, s, s, 0.0],
        4 => [0.0, s, -s, 0.0],
        _ => return Err(Error::Argument(format!("Bell state index {j} not in 1..=4"))),
    };
    Ok(v.iter().map(|&x| real(x)).collect())
}

pub fn werner(p: f64) -> Result<DensityOperator> {
    check_unit("p", p)?;
    let phi = ComplexMatrix::outer(&bell_vector(1)?);
    let m = &phi.scale(p) + &ComplexMatrix::identity(4).scale((1.0 - p) / 4.0);
    Ok(DensityOperator::from_parts_unchecked(m, vec![2, 2]))
}

pub fn bell_diagonal(probs: [f64; 4]) -> Result<DensityOperator> {
    if probs.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
        return Err(Error::Argument(format!("Bell-diagonal weights {probs:?} outside [0, 1]")));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > crate::config::Tolerances::global().probability_sum {
        return Err(Error::Argument(format!("Bell-diagonal weights sum to {total}")));
    }
    let mut m = ComplexMatrix::zeros(4, 4);
    for (j, &p) in probs.iter().enumerate() {
        m = &m + &ComplexMatrix::outer(&bell_vector(j + 1)?).scale(p);
    }
    Ok(DensityOperator::from_parts_unchecked(m, vec![2, 2]))
}

/// `(1/√d) Σ_j |jj>`.
pub fn max_entangled_vector(d: usize) -> Vec<C64> {
    let mut psi = vec![ZERO; d * d];
    let s = 1.0 / (d as f64).sqrt();
    for j in 0..d {
        psi[j * d + j] = real(s);
    }
    psi
}

pub fn isotropic(d: usize, p: f64) -> Result<DensityOperator> {
    if d < 2 {
        return Err(Error::Argument(format!("isotropic state needs d >= 2, got {d}")));
    }
    check_unit("p", p)?;
    let n = d * d;
    let proj = ComplexMatrix::outer(&max_entangled_vector(d));
    let m = &proj.scale(p) + &ComplexMatrix::identity(n).scale((1.0 - p) / n as f64);
    Ok(DensityOperator::from_parts_unchecked(m, vec![d, d]))
}

/// Horodecki's 3x3 PPT family, basis order `|00>, |01>, ..., |22>`.
pub fn horodecki_3x3(a: f64) -> Result<DensityOperator> {
    check_unit("a", a)?;
    let b = (1.0 + a) / 2.0;
    let c = (1.0 - a * a).sqrt() / 2.0;
    let mut m = ComplexMatrix::zeros(9, 9);
    for i in [0, 1, 2, 3, 4, 5, 7] {
        m[(i, i)] = real(a);
    }
    for (i, j) in [(0, 4), (0, 8), (4, 8)] {
        m[(i, j)] = real(a);
        m[(j, i)] = real(a);
    }
    m[(6, 6)] = real(b);
    m[(8, 8)] = real(b);
    m[(6, 8)] = real(c);
    m[(8, 6)] = real(c);
    Ok(DensityOperator::from_parts_unchecked(m.scale(1.0 / (8.0 * a + 1.0)), vec![3, 3]))
}

/// `p |φ+><φ+| + (1-p) |01><01|`.
pub fn colored_noise(p: f64) -> Result<DensityOperator> {
    check_unit("p", p)?;
    let phi = ComplexMatrix::outer(&bell_vector(1)?);
    let mut noise = ComplexMatrix::zeros(4, 4);
    noise[(1, 1)] = real(1.0);
    let m = &phi.scale(p) + &noise.scale(1.0 - p);
    Ok(DensityOperator::from_parts_unchecked(m, vec![2, 2]))
}

pub fn w_vector() -> Vec<C64> {
    let s = 1.0 / 3f64.sqrt();
    let mut psi = vec![ZERO; 8];
    for i in [4, 2, 1] {
        psi[i] = real(s);
    }
    psi
}

pub fn w_state() -> DensityOperator {
    DensityOperator::from_parts_unchecked(ComplexMatrix::outer(&w_vector()), vec![2, 2, 2])
}

/// Computational basis state `|i_1 ... i_N>`.
pub fn basis_state(dims: &[usize], digits: &[usize]) -> Result<DensityOperator> {
    if dims.len() != digits.len() || digits.iter().zip(dims).any(|(&i, &d)| i >= d) || dims.iter().any(|&d| d < 2) {
        return Err(Error::Argument(format!("basis state {digits:?} does not fit dims {dims:?}")));
    }
    let n: usize = dims.iter().product();
    let flat = digits.iter().zip(dims).fold(0, |acc, (&i, &d)| acc * d + i);
    let mut m = ComplexMatrix::zeros(n, n);
    m[(flat, flat)] = real(1.0);
    Ok(DensityOperator::from_parts_unchecked(m, dims.to_vec()))
}

fn gaussian_vector(d: usize, rng: &mut ChaCha8Rng) -> Vec<C64> {
    let v: Vec<C64> = (0..d).map(|_| C64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / norm).collect()
}

/// Haar-distributed pure state of dimension `d`.
pub fn random_pure_vector(d: usize, rng: &mut ChaCha8Rng) -> Vec<C64> {
    gaussian_vector(d, rng)
}

/// Ginibre ensemble: `G G† / Tr(G G†)` with a square complex Gaussian `G`.
pub fn random_state(dims: &[usize], seed: u64) -> Result<DensityOperator> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_state_with(dims, &mut rng)
}

pub fn random_state_with(dims: &[usize], rng: &mut ChaCha8Rng) -> Result<DensityOperator> {
    check_dims(dims)?;
    let n: usize = dims.iter().product();
    let g = ComplexMatrix::from_fn(n, n, |_, _| {
        C64::new(StandardNormal.sample(&mut *rng), StandardNormal.sample(&mut *rng))
    });
    let gg = &g * &g.adjoint();
    let tr = gg.trace().re;
    Ok(DensityOperator::from_parts_unchecked(gg.scale(1.0 / tr).hermitian_part(), dims.to_vec()))
}

/// Product of independent Haar-random pure states.
pub fn random_product_state(dims: &[usize], seed: u64) -> Result<DensityOperator> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_product_state_with(dims, &mut rng)
}

pub fn random_product_state_with(dims: &[usize], rng: &mut ChaCha8Rng) -> Result<DensityOperator> {
    check_dims(dims)?;
    let factors: Vec<Vec<C64>> = dims.iter().map(|&d| random_pure_vector(d, rng)).collect();
    Ok(DensityOperator::from_parts_unchecked(ComplexMatrix::outer(&kron_vectors(&factors)), dims.to_vec()))
}

/// Random convex mixture of `terms` pure product states with Dirichlet(1) weights.
pub fn random_separable_state(dims: &[usize], terms: usize, seed: u64) -> Result<DensityOperator> {
    check_dims(dims)?;
    if terms == 0 {
        return Err(Error::Argument("separable mixture needs at least one term".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights = dirichlet(terms, &mut rng);
    let n: usize = dims.iter().product();
    let mut acc = ComplexMatrix::zeros(n, n);
    for w in weights {
        let prod = random_product_state_with(dims, &mut rng)?;
        acc = &acc + &prod.matrix().scale(w);
    }
    Ok(DensityOperator::from_parts_unchecked(acc, dims.to_vec()))
}

/// Uniform point on the probability simplex.
pub fn dirichlet(k: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let gamma = Gamma::new(1.0, 1.0).expect("valid shape");
    let draws: Vec<f64> = (0..k).map(|_| gamma.sample(rng)).collect();
    let total: f64 = draws.iter().sum();
    draws.into_iter().map(|x| x / total).collect()
}

/// Bell-diagonal state with uniformly random weights.
pub fn random_bell_diagonal(seed: u64) -> ([f64; 4], DensityOperator) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = dirichlet(4, &mut rng);
    // last weight absorbs rounding so the sum is exact
    let probs = [w[0], w[1], w[2], (1.0 - w[0] - w[1] - w[2]).max(0.0)];
    let rho = bell_diagonal(probs).expect("weights on the simplex");
    (probs, rho)
}

pub fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    rng.random::<f64>()
}

fn check_dims(dims: &[usize]) -> Result<()> {
    if dims.is_empty() || dims.iter().any(|&d| d < 2) {
        Err(Error::Argument(format!("local dimensions must be >= 2, got {dims:?}")))
    } else {
        Ok(())
    }
}

/// A named state family with its parameters.
///
/// Text form: `family:werner?p=0.5`, `family:belldiag?p=0.7,0.1,0.1,0.1&j=1`,
/// `family:isotropic?d=3&p=0.5`, `family:horodecki?a=0.3`,
/// `family:colored?p=0.66`, `family:w`, `family:ket?digits=11` (the `family:`
/// prefix is optional).
#[derive(Clone, Debug, PartialEq)]
pub enum FamilySpec {
    Werner {
        p: f64,
    },
    /// `j` selects which Bell state describes the closest separable state.
    BellDiagonal {
        probs: [f64; 4],
        j: Option<usize>,
    },
    Isotropic {
        d: usize,
        p: f64,
    },
    Horodecki {
        a: f64,
    },
    ColoredNoise {
        p: f64,
    },
    WState,
    Ket {
        dims: Vec<usize>,
        digits: Vec<usize>,
    },
}

impl FamilySpec {
    pub fn state(&self) -> Result<DensityOperator> {
        match self {
            FamilySpec::Werner { p } => werner(*p),
            FamilySpec::BellDiagonal { probs, .. } => bell_diagonal(*probs),
            FamilySpec::Isotropic { d, p } => isotropic(*d, *p),
            FamilySpec::Horodecki { a } => horodecki_3x3(*a),
            FamilySpec::ColoredNoise { p } => colored_noise(*p),
            FamilySpec::WState => Ok(w_state()),
            FamilySpec::Ket { dims, digits } => basis_state(dims, digits),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            FamilySpec::Werner { .. } => "werner",
            FamilySpec::BellDiagonal { .. } => "belldiag",
            FamilySpec::Isotropic { .. } => "isotropic",
            FamilySpec::Horodecki { .. } => "horodecki",
            FamilySpec::ColoredNoise { .. } => "colored",
            FamilySpec::WState => "w",
            FamilySpec::Ket { .. } => "ket",
        }
    }

    /// The scalar parameter a sweep varies, if the family has one.
    pub fn with_param(&self, name: &str, value: f64) -> Result<FamilySpec> {
        let mut out = self.clone();
        match (&mut out, name) {
            (FamilySpec::Werner { p }, "p")
            | (FamilySpec::Isotropic { p, .. }, "p")
            | (FamilySpec::ColoredNoise { p }, "p") => *p = value,
            (FamilySpec::Horodecki { a }, "a") => *a = value,
            _ => return Err(Error::Argument(format!("family `{}` has no scalar parameter `{name}`", self.name()))),
        }
        Ok(out)
    }
}

impl fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilySpec::Werner { p } => write!(f, "family:werner?p={p}"),
            FamilySpec::BellDiagonal { probs, j } => {
                write!(f, "family:belldiag?p={},{},{},{}", probs[0], probs[1], probs[2], probs[3])?;
                if let Some(j) = j {
                    write!(f, "&j={j}")?;
                }
                Ok(())
            }
            FamilySpec::Isotropic { d, p } => write!(f, "family:isotropic?d={d}&p={p}"),
            FamilySpec::Horodecki { a } => write!(f, "family:horodecki?a={a}"),
            FamilySpec::ColoredNoise { p } => write!(f, "family:colored?p={p}"),
            FamilySpec::WState => write!(f, "family:w"),
            FamilySpec::Ket { dims, digits } => {
                let dg: String = digits.iter().map(|d| d.to_string()).collect();
                let dm: Vec<String> = dims.iter().map(|d| d.to_string()).collect();
                write!(f, "family:ket?digits={dg}&dims={}", dm.join(","))
            }
        }
    }
}

impl FromStr for FamilySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let body = s.trim().strip_prefix("family:").unwrap_or(s.trim());
        let (name, query) = body.split_once('?').unwrap_or((body, ""));
        let params: Vec<(&str, &str)> = query
            .split('&')
            .filter(|kv| !kv.is_empty())
            .map(|kv| kv.split_once('=').ok_or_else(|| Error::Parse(format!("expected key=value in `{kv}`"))))
            .collect::<Result<_>>()?;
        let lookup = |key: &str| params.iter().find(|(k, _)| *k == key).map(|(_, v)| *v);
        let number = |key: &str| -> Result<f64> {
            let raw = lookup(key).ok_or_else(|| Error::Parse(format!("family `{name}` needs `{key}`")))?;
            raw.parse().map_err(|_| Error::Parse(format!("bad number `{raw}` for `{key}`")))
        };
        let unknown = |allowed: &[&str]| -> Result<()> {
            match params.iter().find(|(k, _)| !allowed.contains(k)) {
                Some((k, _)) => Err(Error::Parse(format!("unknown parameter `{k}` for family `{name}`"))),
                None => Ok(()),
            }
        };
        let spec = match name.to_ascii_lowercase().as_str() {
            "werner" => {
                unknown(&["p"])?;
                FamilySpec::Werner { p: number("p")? }
            }
            "belldiag" | "bell-diagonal" | "bell_diagonal" => {
                unknown(&["p", "j"])?;
                let raw = lookup("p").ok_or_else(|| Error::Parse("belldiag needs `p=p1,p2,p3,p4`".into()))?;
                let v: Vec<f64> = raw
                    .split(',')
                    .map(|x| x.trim().parse().map_err(|_| Error::Parse(format!("bad weight `{x}`"))))
                    .collect::<Result<_>>()?;
                let probs: [f64; 4] =
                    v.try_into().map_err(|_| Error::Parse("belldiag needs exactly four weights".into()))?;
                let j = match lookup("j") {
                    Some(j) => Some(j.parse().map_err(|_| Error::Parse(format!("bad Bell index `{j}`")))?),
                    None => None,
                };
                FamilySpec::BellDiagonal { probs, j }
            }
            "isotropic" | "iso" => {
                unknown(&["d", "p"])?;
                let d = number("d")?;
                if d.fract() != 0.0 || d < 2.0 {
                    return Err(Error::Parse(format!("bad dimension `{d}`")));
                }
                FamilySpec::Isotropic { d: d as usize, p: number("p")? }
            }
            "horodecki" => {
                unknown(&["a"])?;
                FamilySpec::Horodecki { a: number("a")? }
            }
            "colored" | "colored-noise" | "colored_noise" => {
                unknown(&["p"])?;
                FamilySpec::ColoredNoise { p: number("p")? }
            }
            "w" | "wstate" | "w-state" => {
                unknown(&[])?;
                FamilySpec::WState
            }
            "ket" => {
                unknown(&["digits", "dims"])?;
                let raw = lookup("digits").ok_or_else(|| Error::Parse("ket needs `digits`".into()))?;
                let digits: Vec<usize> = raw
                    .chars()
                    .map(|c| c.to_digit(10).map(|d| d as usize).ok_or_else(|| Error::Parse(format!("bad digit `{c}`"))))
                    .collect::<Result<_>>()?;
                let dims = match lookup("dims") {
                    Some(raw) => raw
                        .split(',')
                        .map(|x| x.trim().parse().map_err(|_| Error::Parse(format!("bad dimension `{x}`"))))
                        .collect::<Result<_>>()?,
                    None => vec![2; digits.len()],
                };
                FamilySpec::Ket { dims, digits }
            }
            other => return Err(Error::Parse(format!("unknown family `{other}`"))),
        };
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Tolerances;
    use crate::densop::hermitian_eig;
    use crate::tomo::{state_to_tensor, sum_of_squares, Convention, IndexFilter};

    fn revalidate(rho: &DensityOperator) {
        DensityOperator::with_tolerances(rho.matrix().clone(), rho.dims().to_vec(), &Tolerances::default())
            .expect("factory output is a density operator");
    }

    #[test]
    fn werner_examples() {
        assert!(
            werner(0.0).unwrap().matrix().max_abs_diff(DensityOperator::maximally_mixed(vec![2, 2]).matrix()) < 1e-15
        );
        let phi = ComplexMatrix::outer(&bell_vector(1).unwrap());
        assert!(werner(1.0).unwrap().matrix().max_abs_diff(&phi) < 1e-15);
        let min = werner(1.0 / 3.0).unwrap().min_partial_transpose_eigenvalue(1).unwrap();
        assert!(min.abs() < 1e-15);
        let t = state_to_tensor(&werner(0.5).unwrap(), Convention::RawMoment).unwrap();
        assert!((t.get(&[1, 1]).unwrap() - 0.5).abs() < 1e-15);
        assert!((t.get(&[2, 2]).unwrap() + 0.5).abs() < 1e-15);
        assert!((t.get(&[3, 3]).unwrap() - 0.5).abs() < 1e-15);
        assert!(werner(1.5).is_err());
    }

    #[test]
    fn werner_pt_spectrum_oracle() {
        // eigenvalues of the partial transpose are (1+p)/4 (x3) and (1-3p)/4
        for k in 0..=10 {
            let p = k as f64 / 10.0;
            let ev = hermitian_eig(&werner(p).unwrap().partial_transpose(0).unwrap()).unwrap().eigenvalues;
            assert!((ev[0] - (1.0 + p) / 4.0).abs() < 1e-14);
            assert!((ev[3] - (1.0 - 3.0 * p) / 4.0).abs() < 1e-14);
        }
    }

    #[test]
    fn bell_diagonal_examples() {
        let t = state_to_tensor(&bell_diagonal([1.0, 0.0, 0.0, 0.0]).unwrap(), Convention::RawMoment).unwrap();
        let diag: Vec<f64> = (1..4).map(|k| t.get(&[k, k]).unwrap()).collect();
        assert!(diag.iter().zip([1.0, -1.0, 1.0]).all(|(a, b)| (a - b).abs() < 1e-15));
        let t = state_to_tensor(&bell_diagonal([0.25; 4]).unwrap(), Convention::RawMoment).unwrap();
        assert!(sum_of_squares(&t, &IndexFilter::NonTrivial).unwrap() < 1e-28);
        // each Bell state has its own sign pattern
        let expected = [[1.0, -1.0, 1.0], [-1.0, 1.0, 1.0], [1.0, 1.0, -1.0], [-1.0, -1.0, -1.0]];
        for (j, signs) in expected.iter().enumerate() {
            let mut probs = [0.0; 4];
            probs[j] = 1.0;
            let t = state_to_tensor(&bell_diagonal(probs).unwrap(), Convention::RawMoment).unwrap();
            for k in 1..4 {
                assert!((t.get(&[k, k]).unwrap() - signs[k - 1]).abs() < 1e-15);
                assert!(t.get(&[k, 0]).unwrap().abs() < 1e-15 && t.get(&[0, k]).unwrap().abs() < 1e-15);
            }
        }
        assert!(bell_diagonal([0.5, 0.5, 0.5, -0.5]).is_err());
        assert!(bell_diagonal([0.5, 0.1, 0.1, 0.1]).is_err());
    }

    #[test]
    fn isotropic_examples() {
        for k in 0..=10 {
            let p = k as f64 / 10.0;
            assert!(isotropic(2, p).unwrap().matrix().max_abs_diff(werner(p).unwrap().matrix()) < 1e-12);
        }
        let t = state_to_tensor(&isotropic(3, 1.0).unwrap(), Convention::QuditScaled).unwrap();
        assert!((sum_of_squares(&t, &IndexFilter::Correlations).unwrap() - 2.0).abs() < 1e-12);
        for d in 2..=4 {
            let p = 0.6;
            let t = state_to_tensor(&isotropic(d, p).unwrap(), Convention::QuditScaled).unwrap();
            for (idx, v) in t.iter().filter(|(i, _)| i.iter().all(|&m| m >= 1)) {
                if idx[0] == idx[1] {
                    assert!((v.abs() - p / (d as f64 - 1.0)).abs() < 1e-12);
                } else {
                    assert!(v.abs() < 1e-12);
                }
            }
        }
        assert!(isotropic(1, 0.5).is_err());
    }

    #[test]
    fn horodecki_examples() {
        let h0 = horodecki_3x3(0.0).unwrap();
        assert!((h0.purity() - 1.0).abs() < 1e-12);
        let t = state_to_tensor(&horodecki_3x3(0.5).unwrap(), Convention::QuditScaled).unwrap();
        assert!((t.get(&[1, 1]).unwrap() - 0.15).abs() < 1e-12);
        for k in 0..=100 {
            let rho = horodecki_3x3(k as f64 / 100.0).unwrap();
            revalidate(&rho);
            assert!(rho.is_ppt(1).unwrap(), "a = {}", k as f64 / 100.0);
        }
    }

    #[test]
    fn colored_noise_examples() {
        let t = state_to_tensor(&colored_noise(2.0 / 3.0).unwrap(), Convention::RawMoment).unwrap();
        assert!((t.get(&[3, 3]).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!((t.get(&[3, 0]).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!((t.get(&[0, 3]).unwrap() + 1.0 / 3.0).abs() < 1e-15);
        assert!((colored_noise(0.0).unwrap().purity() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn w_state_examples() {
        let w = w_state();
        assert!((w.purity() - 1.0).abs() < 1e-14);
        let t = state_to_tensor(&w, Convention::RawMoment).unwrap();
        assert!((t.get(&[3, 0, 0]).unwrap() - 1.0 / 3.0).abs() < 1e-14);
        assert!((t.get(&[0, 1, 1]).unwrap() - 2.0 / 3.0).abs() < 1e-14);
        assert!((t.get(&[3, 3, 3]).unwrap() + 1.0).abs() < 1e-14);
        let m = w.partial_trace(&[2]).unwrap();
        assert!(m.matrix().max_abs_diff(&ComplexMatrix::from_real_diagonal(&[2.0 / 3.0, 1.0 / 3.0])) < 1e-14);
    }

    #[test]
    fn every_factory_output_validates() {
        for rho in [
            werner(0.3).unwrap(),
            bell_diagonal([0.1, 0.2, 0.3, 0.4]).unwrap(),
            isotropic(4, 0.7).unwrap(),
            colored_noise(0.4).unwrap(),
            w_state(),
            basis_state(&[2, 3], &[1, 2]).unwrap(),
            random_state(&[2, 3], 1).unwrap(),
            random_product_state(&[3, 3], 2).unwrap(),
            random_separable_state(&[2, 2, 2], 5, 3).unwrap(),
        ] {
            revalidate(&rho);
        }
    }

    #[test]
    fn seeded_generators_are_deterministic() {
        assert_eq!(random_state(&[2, 2], 9).unwrap(), random_state(&[2, 2], 9).unwrap());
        assert_ne!(random_state(&[2, 2], 9).unwrap(), random_state(&[2, 2], 10).unwrap());
        let (p, _) = random_bell_diagonal(4);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn family_text_round_trip() {
        for text in [
            "family:werner?p=0.5",
            "family:belldiag?p=0.7,0.1,0.1,0.1&j=1",
            "family:isotropic?d=3&p=0.5",
            "family:horodecki?a=0.3",
            "family:colored?p=0.25",
            "family:w",
        ] {
            let spec: FamilySpec = text.parse().unwrap();
            assert_eq!(spec.to_string(), text);
        }
        let ket: FamilySpec = "ket?digits=11".parse().unwrap();
        assert_eq!(ket, FamilySpec::Ket { dims: vec![2, 2], digits: vec![1, 1] });
        assert!("family:werner".parse::<FamilySpec>().is_err());
        assert!("family:werner?q=1".parse::<FamilySpec>().is_err());
        assert!("family:nope?p=1".parse::<FamilySpec>().is_err());
        assert!("family:werner?p=2".parse::<FamilySpec>().unwrap().state().is_err());
    }
}
