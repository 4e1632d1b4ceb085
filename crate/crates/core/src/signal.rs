//! Mixed support-set signal model.
//!
//! Node `l` observes `y_l = A_l x_l + w_l` with `x_l = z_c,l + z_p,l`: a common
//! part whose support is shared by every node (values are per node) and a
//! private part with its own support. The two supports may overlap, in which
//! case the values add.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::rng::{label, StreamSeed};
use crate::support::SupportSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignalKind {
    /// Nonzeros drawn from a standard Gaussian.
    Gaussian,
    /// Nonzeros set to one.
    Binary,
}

impl fmt::Display for SignalKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SignalKind::Gaussian => "gaussian",
            SignalKind::Binary => "binary",
        })
    }
}

impl FromStr for SignalKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(SignalKind::Gaussian),
            "binary" => Ok(SignalKind::Binary),
            other => Err(Error::Parse(format!("unknown signal kind '{other}' (gaussian|binary)"))),
        }
    }
}

/// Signal-to-measurement-noise ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Smnr {
    Clean,
    Db(f64),
}

impl fmt::Display for Smnr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Smnr::Clean => f.write_str("clean"),
            Smnr::Db(db) => write!(f, "{db}"),
        }
    }
}

impl FromStr for Smnr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("clean") {
            return Ok(Smnr::Clean);
        }
        s.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .map(Smnr::Db)
            .ok_or_else(|| Error::Parse(format!("SMNR must be a number of dB or 'clean', got '{s}'")))
    }
}

impl Serialize for Smnr {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Smnr::Clean => serializer.serialize_str("clean"),
            Smnr::Db(db) => serializer.serialize_f64(*db),
        }
    }
}

impl<'de> Deserialize<'de> for Smnr {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Num(v) => Ok(Smnr::Db(v)),
            Raw::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    /// Ambient dimension N.
    pub n: usize,
    /// Node count L.
    pub nodes: usize,
    pub k_common: usize,
    /// Private sparsity used by every node unless overridden per node.
    pub k_private: usize,
    pub k_private_per_node: Option<Vec<usize>>,
    pub kind: SignalKind,
    pub smnr: Smnr,
    /// Fraction of measurements α = M / N.
    pub alpha: f64,
}

impl ModelParams {
    /// Measurement count `M = α N`, which must be integral.
    pub fn measurements(&self) -> Result<usize> {
        measurements_for(self.alpha, self.n)
    }

    pub fn k_private_of(&self, node: usize) -> usize {
        self.k_private_per_node
            .as_ref()
            .map_or(self.k_private, |ks| ks[node])
    }

    /// `K_max` of a node: common plus private sparsity.
    pub fn k_max_of(&self, node: usize) -> usize {
        self.k_common + self.k_private_of(node)
    }

    pub fn validate(&self) -> Result<usize> {
        if self.n == 0 || self.nodes == 0 {
            return Err(Error::invalid("N and L must be positive"));
        }
        if let Some(ks) = &self.k_private_per_node {
            if ks.len() != self.nodes {
                return Err(Error::invalid(format!(
                    "{} per-node private sparsities given for {} nodes",
                    ks.len(),
                    self.nodes
                )));
            }
        }
        let m = self.measurements()?;
        let worst = (0..self.nodes).map(|l| self.k_max_of(l)).max().unwrap_or(0);
        if worst > m {
            return Err(Error::invalid(format!(
                "K_common + K_private = {worst} exceeds M = {m}"
            )));
        }
        Ok(m)
    }
}

/// `M = α N` when that is an integer in `1..=N`.
pub fn measurements_for(alpha: f64, n: usize) -> Result<usize> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::invalid(format!("alpha = {alpha} outside (0, 1]")));
    }
    let exact = alpha * n as f64;
    let m = exact.round();
    if (exact - m).abs() > 1e-9 * n as f64 || m < 1.0 {
        return Err(Error::invalid(format!(
            "alpha = {alpha} gives non-integral M = {exact} for N = {n}"
        )));
    }
    Ok(m as usize)
}

/// One sensor's data.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeProblem {
    pub a: DenseMatrix,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub common: SupportSet,
    pub private: SupportSet,
    /// Realized measurement noise `w`.
    pub noise: Vec<f64>,
    pub noise_variance: f64,
}

impl NodeProblem {
    /// True support `T_common ∪ T_private`.
    pub fn support(&self) -> SupportSet {
        self.common.union(&self.private)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    pub problems: Vec<NodeProblem>,
    pub seed: u64,
}

impl Ensemble {
    pub fn nodes(&self) -> usize {
        self.problems.len()
    }

    pub fn common(&self) -> &SupportSet {
        &self.problems[0].common
    }
}

pub(crate) fn gaussian_entries(m: usize, n: usize, rng: &mut impl Rng) -> Vec<f64> {
    let dist = Normal::new(0.0, (1.0 / m as f64).sqrt()).expect("positive variance");
    (0..m * n).map(|_| dist.sample(rng)).collect()
}

/// Gaussian `M x N` matrix with entry variance `1/M`, columns scaled to unit norm.
pub fn generate_sensing_matrix(m: usize, n: usize, rng: &mut impl Rng) -> Result<DenseMatrix> {
    if m == 0 || m > n {
        return Err(Error::invalid(format!("need 1 <= M <= N, got M = {m}, N = {n}")));
    }
    let mut data = gaussian_entries(m, n, rng);
    for col in data.chunks_exact_mut(m) {
        let nrm = col.iter().map(|v| v * v).sum::<f64>().sqrt();
        col.iter_mut().for_each(|v| *v /= nrm);
    }
    DenseMatrix::from_column_major(m, n, data)
}

/// Uniformly random `k`-subset of `0..n`.
pub fn draw_support(n: usize, k: usize, rng: &mut impl Rng) -> Result<SupportSet> {
    if k > n {
        return Err(Error::invalid(format!("cannot draw {k} indices out of {n}")));
    }
    Ok(SupportSet::from_unique(rand::seq::index::sample(rng, n, k).into_vec()))
}

/// Noise variance for the requested SMNR, using the expected signal energy.
pub fn calibrate_noise(params: &ModelParams) -> Result<f64> {
    noise_variance(params, params.k_private)
}

pub(crate) fn noise_variance(params: &ModelParams, k_private: usize) -> Result<f64> {
    let db = match params.smnr {
        Smnr::Clean => return Ok(0.0),
        Smnr::Db(db) => db,
    };
    let linear = 10f64.powf(db / 10.0);
    if !(linear.is_finite() && linear > 0.0) {
        return Err(Error::invalid(format!("SMNR {db} dB is not a positive ratio")));
    }
    let m = params.measurements()? as f64;
    Ok(expected_energy(params.kind, params.k_common, k_private, params.n) / (linear * m))
}

/// `E{‖x‖²}` for one node.
pub fn expected_energy(kind: SignalKind, k_common: usize, k_private: usize, n: usize) -> f64 {
    let (kc, kp) = (k_common as f64, k_private as f64);
    match kind {
        SignalKind::Gaussian => kc + kp,
        // Expected overlap is kc·kp/n and each overlapping entry holds 2.
        SignalKind::Binary => kc + kp + 2.0 * kc * kp / n as f64,
    }
}

fn draw_values(kind: SignalKind, support: &SupportSet, x: &mut [f64], rng: &mut impl Rng) {
    for i in support.iter() {
        x[i] += match kind {
            SignalKind::Gaussian => StandardNormal.sample(rng),
            SignalKind::Binary => 1.0,
        };
    }
}

/// Draws one node's private support, coefficients and noise for a given
/// sensing matrix and common support.
pub fn generate_node(
    a: DenseMatrix,
    common: &SupportSet,
    kind: SignalKind,
    k_private: usize,
    noise_variance: f64,
    rng: &mut impl Rng,
) -> Result<NodeProblem> {
    let n = a.cols();
    a.check_support(common)?;
    let private = draw_support(n, k_private, rng)?;
    let mut x = vec![0.0; n];
    draw_values(kind, common, &mut x, rng);
    draw_values(kind, &private, &mut x, rng);
    let noise: Vec<f64> = if noise_variance > 0.0 {
        let dist = Normal::new(0.0, noise_variance.sqrt()).expect("finite variance");
        (0..a.rows()).map(|_| dist.sample(rng)).collect()
    } else {
        vec![0.0; a.rows()]
    };
    let mut y = a.mul_vec(&x);
    y.iter_mut().zip(&noise).for_each(|(yi, wi)| *yi += wi);
    Ok(NodeProblem {
        a,
        x,
        y,
        common: common.clone(),
        private,
        noise,
        noise_variance,
    })
}

/// One sensing matrix per node, node `l` drawn from `seed/l`.
pub fn generate_matrices(params: &ModelParams, seed: StreamSeed) -> Result<Vec<DenseMatrix>> {
    let m = params.validate()?;
    (0..params.nodes)
        .map(|l| generate_sensing_matrix(m, params.n, &mut seed.child(l as u64).rng()))
        .collect()
}

/// Signals and measurements for given matrices. The common support comes
/// from `seed/COMMON`, node `l`'s private part and noise from `seed/l`.
pub fn generate_realization(params: &ModelParams, matrices: &[DenseMatrix], seed: StreamSeed) -> Result<Ensemble> {
    let m = params.validate()?;
    if matrices.len() != params.nodes || matrices.iter().any(|a| a.rows() != m || a.cols() != params.n) {
        return Err(Error::invalid(format!(
            "expected {} matrices of size {m} x {}",
            params.nodes, params.n
        )));
    }
    let common = draw_support(params.n, params.k_common, &mut seed.child(label::COMMON).rng())?;
    let problems = matrices
        .iter()
        .enumerate()
        .map(|(l, a)| {
            let kp = params.k_private_of(l);
            let variance = noise_variance(params, kp)?;
            generate_node(a.clone(), &common, params.kind, kp, variance, &mut seed.child(l as u64).rng())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Ensemble {
        problems,
        seed: seed.value(),
    })
}

/// Full ensemble from one master seed: matrices from `seed/MATRIX`, signals
/// from `seed/SIGNAL`.
pub fn generate_ensemble(params: &ModelParams, seed: u64) -> Result<Ensemble> {
    let root = StreamSeed::new(seed);
    let matrices = generate_matrices(params, root.child(label::MATRIX))?;
    let mut e = generate_realization(params, &matrices, root.child(label::SIGNAL))?;
    e.seed = seed;
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(kind: SignalKind, kc: usize, kp: usize) -> ModelParams {
        ModelParams {
            n: 100,
            nodes: 4,
            k_common: kc,
            k_private: kp,
            k_private_per_node: None,
            kind,
            smnr: Smnr::Db(20.0),
            alpha: 0.3,
        }
    }

    #[test]
    fn matrix_columns_unit_norm_and_reproducible() {
        let seed = StreamSeed::new(3);
        let a = generate_sensing_matrix(25, 60, &mut seed.rng()).unwrap();
        for j in 0..60 {
            let nrm = a.column(j).iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!((nrm - 1.0).abs() < 1e-12);
        }
        let b = generate_sensing_matrix(25, 60, &mut seed.rng()).unwrap();
        assert_eq!(a, b);
        assert!(generate_sensing_matrix(61, 60, &mut seed.rng()).is_err());
    }

    #[test]
    fn raw_entry_variance_is_one_over_m() {
        let raw = gaussian_entries(250, 500, &mut StreamSeed::new(11).rng());
        let mean = raw.iter().sum::<f64>() / raw.len() as f64;
        let var = raw.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (raw.len() - 1) as f64;
        assert!((var * 250.0 - 1.0).abs() < 0.1, "variance {var}");
    }

    #[test]
    fn calibration_examples() {
        let mut p = params(SignalKind::Gaussian, 10, 10);
        p.smnr = Smnr::Clean;
        assert_eq!(calibrate_noise(&p).unwrap(), 0.0);

        let p = ModelParams {
            n: 500,
            alpha: 0.15,
            ..params(SignalKind::Gaussian, 10, 10)
        };
        let v = calibrate_noise(&p).unwrap();
        assert!((v - 20.0 / (100.0 * 75.0)).abs() < 1e-15);

        assert!((expected_energy(SignalKind::Binary, 10, 10, 500) - 20.4).abs() < 1e-12);
    }

    #[test]
    fn expected_energy_matches_monte_carlo() {
        for kind in [SignalKind::Gaussian, SignalKind::Binary] {
            let mut rng = StreamSeed::new(99).child(kind as u64).rng();
            let draws = 100_000;
            let mut total = 0.0;
            for _ in 0..draws {
                let common = draw_support(500, 10, &mut rng).unwrap();
                let mut x = vec![0.0; 500];
                draw_values(kind, &common, &mut x, &mut rng);
                let private = draw_support(500, 10, &mut rng).unwrap();
                draw_values(kind, &private, &mut x, &mut rng);
                total += x.iter().map(|v| v * v).sum::<f64>();
            }
            let empirical = total / draws as f64;
            let analytic = expected_energy(kind, 10, 10, 500);
            assert!((empirical / analytic - 1.0).abs() < 0.02, "{kind}: {empirical} vs {analytic}");
        }
    }

    #[test]
    fn empirical_smnr_within_tolerance() {
        let p = params(SignalKind::Gaussian, 5, 5);
        let variance = calibrate_noise(&p).unwrap();
        let m = p.measurements().unwrap();
        let a = generate_sensing_matrix(m, p.n, &mut StreamSeed::new(1).rng()).unwrap();
        let mut rng = StreamSeed::new(2).rng();
        let (mut sig, mut noise) = (0.0, 0.0);
        for _ in 0..10_000 {
            let common = draw_support(p.n, p.k_common, &mut rng).unwrap();
            let node = generate_node(a.clone(), &common, p.kind, p.k_private, variance, &mut rng).unwrap();
            sig += node.x.iter().map(|v| v * v).sum::<f64>();
            noise += node.noise.iter().map(|v| v * v).sum::<f64>();
        }
        let db = 10.0 * (sig / noise).log10();
        assert!((db - 20.0).abs() < 0.2, "empirical SMNR {db}");
    }

    #[test]
    fn binary_overlap_adds() {
        let a = DenseMatrix::identity(6);
        let common = SupportSet::new([0, 1, 2, 3, 4, 5], 6).unwrap();
        let node = generate_node(a, &common, SignalKind::Binary, 1, 0.0, &mut StreamSeed::new(5).rng()).unwrap();
        let j = node.private.iter().next().unwrap();
        assert_eq!(node.x[j], 2.0);
        assert_eq!(node.x.iter().filter(|&&v| v == 1.0).count(), 5);
    }

    #[test]
    fn ensemble_structure() {
        let p = params(SignalKind::Gaussian, 4, 3);
        let e = generate_ensemble(&p, 17).unwrap();
        assert_eq!(e.nodes(), 4);
        for node in &e.problems {
            assert_eq!(&node.common, e.common());
            assert_eq!(node.common.len(), 4);
            assert_eq!(node.private.len(), 3);
            let support: Vec<usize> = (0..p.n).filter(|&i| node.x[i] != 0.0).collect();
            assert_eq!(support, node.support().as_slice());
            let kl = node.support().len();
            assert!((4..=7).contains(&kl));
        }
        assert_ne!(e.problems[0].a, e.problems[1].a);
        assert_eq!(e, generate_ensemble(&p, 17).unwrap());
        assert_ne!(e, generate_ensemble(&p, 18).unwrap());
    }

    #[test]
    fn degenerate_models() {
        let e = generate_ensemble(&params(SignalKind::Gaussian, 5, 0), 1).unwrap();
        for node in &e.problems {
            assert_eq!(node.support(), *e.common());
        }
        let e = generate_ensemble(&params(SignalKind::Gaussian, 0, 5), 1).unwrap();
        assert!(e.common().is_empty());
        assert_ne!(e.problems[0].private, e.problems[1].private);
    }

    #[test]
    fn parameter_validation() {
        let mut p = params(SignalKind::Gaussian, 10, 10);
        p.alpha = 0.155;
        let err = p.validate().unwrap_err().to_string();
        assert!(err.contains("0.155"), "{err}");
        p.alpha = 0.1;
        assert!(p.validate().is_err(), "K_max 20 > M 10");
        assert!("inf".parse::<Smnr>().is_err());
        assert_eq!("clean".parse::<Smnr>().unwrap(), Smnr::Clean);
        assert_eq!(" 20 ".parse::<Smnr>().unwrap(), Smnr::Db(20.0));
    }
}
