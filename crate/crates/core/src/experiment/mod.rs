//! Monte-Carlo sweeps over α, algorithms and topologies.
//!
//! For every α the runner draws `Q` sets of sensing matrices and, for each,
//! `P` signal realizations. Every (algorithm, topology) cell sees the same
//! realizations. Random streams are keyed by
//! `(seed, α index, q, p, node)`, so adding algorithms, topologies or α
//! values never changes the data an existing cell sees.

mod config;
mod output;

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use config::{default_alpha_grid, preset, presets, ExperimentConfig, Trials, DEGREE_SWEEP};
pub use output::{
    emit_csv, emit_plotdata, emit_timing, timing_ratios, write_csv, TimingRow, CSV_HEADER,
};

use crate::distributed::{Limits, Scheme, SchemeRegistry};
use crate::error::Result;
use crate::metrics::{MetricsAccumulator, Moments};
use crate::network::{ring_topology, Topology, TopologySpec};
use crate::rng::{label, StreamSeed};
use crate::signal::{generate_matrices, generate_realization, Ensemble};

/// Topology label used for algorithms that do not communicate.
pub const LOCAL_LABEL: &str = "local";

/// One aggregated (α, algorithm, topology) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub alpha: f64,
    pub algorithm: String,
    pub topology: String,
    pub smnr_db: String,
    pub signal: String,
    pub srer_db: f64,
    pub asce: f64,
    pub outer_mean: f64,
    pub outer_std: f64,
    pub inner_mean: f64,
    pub inner_std: f64,
    pub realizations: u64,
    pub wall_seconds: f64,
    /// Simulations stopped by the round cap.
    #[serde(skip)]
    pub capped_runs: u64,
}

#[derive(Debug, Clone, Default, PartialEq)]
struct CellStats {
    metrics: MetricsAccumulator,
    outer: Moments,
    inner: Moments,
    seconds: f64,
    capped_runs: u64,
}

impl CellStats {
    fn merge(&mut self, other: &CellStats) {
        self.metrics.merge(&other.metrics);
        self.outer.merge(&other.outer);
        self.inner.merge(&other.inner);
        self.seconds += other.seconds;
        self.capped_runs += other.capped_runs;
    }
}

struct Cell<'a> {
    scheme: &'a dyn Scheme,
    topology: Option<TopologySpec>,
}

impl Cell<'_> {
    fn label(&self) -> String {
        self.topology.map_or_else(|| LOCAL_LABEL.to_string(), |t| t.to_string())
    }
}

fn topology_key(spec: &TopologySpec) -> u64 {
    // FNV-1a over the label, so keys do not depend on list position.
    spec.to_string()
        .bytes()
        .fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x100_0000_01b3))
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    run_experiment_with(config, &SchemeRegistry::default())
}

pub fn run_experiment_with(config: &ExperimentConfig, registry: &SchemeRegistry) -> Result<Vec<ResultRow>> {
    config.validate()?;
    let specs = config.topologies()?;
    let mut cells = Vec::new();
    for name in &config.algorithms {
        let scheme = registry.get(name)?;
        if scheme.is_distributed() {
            cells.extend(specs.iter().map(|&t| Cell { scheme, topology: Some(t) }));
        } else {
            cells.push(Cell { scheme, topology: None });
        }
    }
    // Deterministic topologies are shared by every realization.
    let fixed: Vec<Option<Topology>> = cells
        .iter()
        .map(|c| match c.topology {
            None => ring_topology(config.nodes, 0).map(Some),
            Some(TopologySpec::Ring(d)) => ring_topology(config.nodes, d).map(Some),
            Some(_) => Ok(None),
        })
        .collect::<Result<_>>()?;

    let root = StreamSeed::new(config.seed);
    let limits = Limits {
        max_rounds: config.max_rounds,
    };
    let mut rows = Vec::with_capacity(config.alpha.len() * cells.len());
    for (ai, &alpha) in config.alpha.iter().enumerate() {
        let params = config.model(alpha);
        let per_matrix_set: Vec<Vec<CellStats>> = (0..config.trials.matrices())
            .into_par_iter()
            .map(|q| -> Result<Vec<CellStats>> {
                let idx = [ai as u64, q as u64];
                let matrices = generate_matrices(&params, root.child(label::MATRIX).path(&idx))?;
                let mut stats = vec![CellStats::default(); cells.len()];
                for p in 0..config.trials.signals() {
                    let key = [ai as u64, q as u64, p as u64];
                    let ensemble = generate_realization(&params, &matrices, root.child(label::SIGNAL).path(&key))?;
                    for (ci, cell) in cells.iter().enumerate() {
                        let topology = match (&fixed[ci], cell.topology) {
                            (Some(t), _) => t.clone(),
                            (None, Some(spec)) => {
                                let seed = root.child(label::TOPOLOGY).child(topology_key(&spec)).path(&key);
                                spec.build(config.nodes, &mut seed.rng())?
                            }
                            (None, None) => unreachable!("local cells use a fixed topology"),
                        };
                        run_cell(cell.scheme, &ensemble, &topology, limits, &mut stats[ci])?;
                    }
                }
                Ok(stats)
            })
            .collect::<Result<_>>()?;

        for (ci, cell) in cells.iter().enumerate() {
            let mut total = CellStats::default();
            for part in &per_matrix_set {
                total.merge(&part[ci]);
            }
            rows.push(ResultRow {
                alpha,
                algorithm: cell.scheme.name().to_string(),
                topology: cell.label(),
                smnr_db: config.smnr.to_string(),
                signal: config.signal.to_string(),
                srer_db: total.metrics.srer_db()?,
                asce: total.metrics.asce()?,
                outer_mean: total.outer.mean(),
                outer_std: total.outer.std(),
                inner_mean: total.inner.mean(),
                inner_std: total.inner.std(),
                realizations: total.metrics.count,
                wall_seconds: total.seconds,
                capped_runs: total.capped_runs,
            });
        }
    }
    Ok(rows)
}

fn run_cell(
    scheme: &dyn Scheme,
    ensemble: &Ensemble,
    topology: &Topology,
    limits: Limits,
    stats: &mut CellStats,
) -> Result<()> {
    let start = Instant::now();
    let sim = scheme.run(ensemble, topology, limits)?;
    stats.seconds += start.elapsed().as_secs_f64();
    if !sim.converged {
        stats.capped_runs += 1;
    }
    for (node, problem) in sim.nodes.iter().zip(&ensemble.problems) {
        stats
            .metrics
            .add(&problem.x, &node.result.estimate, &problem.support(), &node.result.support)?;
        stats.outer.add(node.rounds as f64);
        stats.inner.add(node.mean_inner_iterations());
    }
    Ok(())
}
