use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::distributed::DEFAULT_ROUND_CAP;
use crate::error::{Error, Result};
use crate::network::TopologySpec;
use crate::signal::{measurements_for, ModelParams, SignalKind, Smnr};

/// `Q` sensing-matrix trials by `P` signal trials; `[Q, P]` in TOML.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trials(pub usize, pub usize);

impl Trials {
    pub fn matrices(&self) -> usize {
        self.0
    }

    pub fn signals(&self) -> usize {
        self.1
    }
}

impl fmt::Display for Trials {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.0, self.1)
    }
}

impl FromStr for Trials {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("trials must look like Q,P, got '{s}'"));
        let (q, p) = s.split_once(',').ok_or_else(bad)?;
        Ok(Trials(q.trim().parse().map_err(|_| bad())?, p.trim().parse().map_err(|_| bad())?))
    }
}

/// Topology entry that expands to every ring degree `0..L-1`.
pub const DEGREE_SWEEP: &str = "sweep";

/// A sweep over α for a set of algorithms and topologies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub n: usize,
    pub nodes: usize,
    pub k_common: usize,
    pub k_private: usize,
    pub signal: SignalKind,
    pub smnr: Smnr,
    pub alpha: Vec<f64>,
    /// Names from the scheme registry.
    pub algorithms: Vec<String>,
    /// `ring:d`, `rand:d`, `watts:q,p` or `sweep`.
    pub topology: Vec<String>,
    pub trials: Trials,
    pub seed: u64,
    pub max_rounds: usize,
    /// Algorithm whose run time normalizes the timing table.
    pub timing_baseline: String,
    pub out: PathBuf,
}

/// α from 0.10 to 0.25 in steps of 0.01, keeping values with integral `αN`.
pub fn default_alpha_grid(n: usize) -> Vec<f64> {
    (10..=25)
        .map(|i| i as f64 / 100.0)
        .filter(|&a| measurements_for(a, n).is_ok())
        .collect()
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            name: "custom".into(),
            n: 500,
            nodes: 10,
            k_common: 10,
            k_private: 10,
            signal: SignalKind::Gaussian,
            smnr: Smnr::Db(20.0),
            alpha: default_alpha_grid(500),
            algorithms: vec!["diomp".into(), "disp".into(), "difrogs".into()],
            topology: vec!["ring:2".into()],
            trials: Trials(10, 10),
            seed: 1,
            max_rounds: DEFAULT_ROUND_CAP,
            timing_baseline: "sp".into(),
            out: PathBuf::from("results"),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Model parameters at one α.
    pub fn model(&self, alpha: f64) -> ModelParams {
        ModelParams {
            n: self.n,
            nodes: self.nodes,
            k_common: self.k_common,
            k_private: self.k_private,
            k_private_per_node: None,
            kind: self.signal,
            smnr: self.smnr,
            alpha,
        }
    }

    /// Topology entries with `sweep` expanded.
    pub fn topologies(&self) -> Result<Vec<TopologySpec>> {
        let mut out = Vec::new();
        for entry in &self.topology {
            if entry.trim() == DEGREE_SWEEP {
                out.extend((0..self.nodes).map(TopologySpec::Ring));
            } else {
                out.push(entry.parse()?);
            }
        }
        Ok(out)
    }

    /// Checks everything that can be checked without running.
    pub fn validate(&self) -> Result<()> {
        let cfg = |msg: String| Error::Config(msg);
        if self.alpha.is_empty() {
            return Err(cfg("alpha list is empty".into()));
        }
        if self.algorithms.is_empty() {
            return Err(cfg("algorithm list is empty".into()));
        }
        if self.trials.matrices() == 0 || self.trials.signals() == 0 {
            return Err(cfg(format!("trials {} must both be at least 1", self.trials)));
        }
        if self.k_common + self.k_private == 0 {
            return Err(cfg("k_common + k_private must be at least 1".into()));
        }
        if self.max_rounds == 0 {
            return Err(cfg("max_rounds must be at least 1".into()));
        }
        for &alpha in &self.alpha {
            self.model(alpha)
                .validate()
                .map_err(|e| cfg(format!("alpha {alpha}: {e}")))?;
        }
        let topologies = self.topologies()?;
        if topologies.is_empty() {
            return Err(cfg("topology list is empty".into()));
        }
        // Build once with a throwaway generator to surface parameter errors.
        let mut rng = crate::rng::StreamSeed::new(0).rng();
        for t in &topologies {
            t.build(self.nodes, &mut rng)
                .map_err(|e| cfg(format!("topology {t}: {e}")))?;
        }
        Ok(())
    }
}

/// Built-in configurations named after the figures they reproduce.
pub fn presets() -> Vec<(&'static str, &'static str, ExperimentConfig)> {
    let base = ExperimentConfig::default();
    let distributed = || vec!["diomp".to_string(), "disp".into(), "difrogs".into()];
    let all = || {
        ["omp", "sp", "frogs", "diomp", "disp", "difrogs"]
            .map(String::from)
            .to_vec()
    };
    let comparison = |name: &str, signal, smnr| ExperimentConfig {
        name: name.into(),
        signal,
        smnr,
        algorithms: all(),
        topology: vec!["ring:2".into(), "ring:9".into()],
        out: PathBuf::from(format!("results/{name}")),
        ..base.clone()
    };
    vec![
        (
            "fig2",
            "inner/outer iteration counts of DiSP and DiFROGS across ring degrees",
            ExperimentConfig {
                name: "fig2".into(),
                alpha: vec![0.10, 0.15, 0.20, 0.25],
                algorithms: vec!["disp".into(), "difrogs".into()],
                topology: vec![DEGREE_SWEEP.into()],
                out: PathBuf::from("results/fig2"),
                ..base.clone()
            },
        ),
        (
            "fig3",
            "SRER vs alpha for ring degrees 0..L-1, Gaussian, 20 dB",
            ExperimentConfig {
                name: "fig3".into(),
                algorithms: distributed(),
                topology: vec![DEGREE_SWEEP.into()],
                out: PathBuf::from("results/fig3"),
                ..base.clone()
            },
        ),
        (
            "fig4",
            "fixed C_2 against random C_2,rand, Gaussian, 20 dB",
            ExperimentConfig {
                name: "fig4".into(),
                algorithms: distributed(),
                topology: vec!["ring:2".into(), "rand:2".into()],
                out: PathBuf::from("results/fig4"),
                ..base.clone()
            },
        ),
        ("fig5", "local, C_2 and joint, Gaussian, clean", comparison("fig5", SignalKind::Gaussian, Smnr::Clean)),
        ("fig6", "local, C_2 and joint, Gaussian, 20 dB", comparison("fig6", SignalKind::Gaussian, Smnr::Db(20.0))),
        ("fig7", "local, C_2 and joint, binary, clean", comparison("fig7", SignalKind::Binary, Smnr::Clean)),
        ("fig8", "local, C_2 and joint, binary, 20 dB", comparison("fig8", SignalKind::Binary, Smnr::Db(20.0))),
        (
            "net100",
            "100-node Watts-Strogatz network (q = 3, p = 0.3), Gaussian, 20 dB",
            ExperimentConfig {
                name: "net100".into(),
                nodes: 100,
                algorithms: all(),
                topology: vec!["watts:3,0.3".into()],
                trials: Trials(2, 2),
                out: PathBuf::from("results/net100"),
                ..base
            },
        ),
    ]
}

pub fn preset(name: &str) -> Option<ExperimentConfig> {
    presets().into_iter().find(|(n, _, _)| *n == name).map(|(_, _, c)| c)
}
