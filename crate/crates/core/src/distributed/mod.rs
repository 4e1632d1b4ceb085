//! Distributed greedy pursuit over a network of sensing nodes.
//!
//! Nodes exchange only support-sets. Each scheme runs every node in
//! synchronous lockstep: all nodes post their support to a message board,
//! then all read their in-neighbors' posts, vote, and rerun their local
//! solver. Nobody reads the board while it is being written.
//!
//! * [`DiOmp`] grows the voted common support by one index per round and runs
//!   exactly `K_c` rounds.
//! * [`ParallelScheme`] (DiSP, DiFROGS) votes the full `K_c` common support
//!   every round, reverts to the previous estimate whenever the residual
//!   grows, and stops a node once its residual stops improving and its
//!   neighbors' supports stop changing. Converged nodes freeze and keep
//!   broadcasting their final support until every node has converged.
//! * [`Local`] runs a solver at every node with no communication.

mod trace;

use std::fmt;

pub use trace::{RoundTrace, TraceRecord, TRACE_CSV_HEADER};

use crate::error::{Error, Result};
use crate::network::Topology;
use crate::pursuit::{mod_omp, Frogs, Omp, Pursuit, PursuitResult, SubspacePursuit};
use crate::signal::{Ensemble, NodeProblem};
use crate::support::{max_scores, supp_accumulate, ScoreVector, SupportSet};

pub const DEFAULT_ROUND_CAP: usize = 50;

/// Majority vote over received supports: the `q` indices reported most
/// often, ties to the lower index. Always returns exactly `q` indices, padding
/// with unreported ones if fewer than `q` indices received any vote.
pub fn vote<'a>(n: usize, received: impl IntoIterator<Item = &'a SupportSet>, q: usize) -> Result<SupportSet> {
    let mut scores = ScoreVector::zeros(n);
    for support in received {
        supp_accumulate(&mut scores, support)?;
    }
    max_scores(&scores, q)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// Communication rounds after initialization before a run is aborted.
    pub max_rounds: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            max_rounds: DEFAULT_ROUND_CAP,
        }
    }
}

/// Per-node result of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeOutcome {
    pub result: PursuitResult,
    /// Communication rounds this node took part in before stopping.
    pub rounds: usize,
    /// Local solver invocations, initialization included.
    pub solver_runs: usize,
    /// Inner iterations summed over all solver invocations.
    pub inner_iterations: usize,
    pub converged: bool,
}

impl NodeOutcome {
    /// Average inner iterations per solver invocation.
    pub fn mean_inner_iterations(&self) -> f64 {
        self.inner_iterations as f64 / self.solver_runs as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    pub nodes: Vec<NodeOutcome>,
    pub trace: RoundTrace,
    /// Rounds executed network-wide.
    pub rounds: usize,
    /// False when the round cap stopped the run.
    pub converged: bool,
}

/// A network-level recovery algorithm.
pub trait Scheme: Send + Sync + fmt::Debug {
    fn name(&self) -> &'static str;

    /// Whether results depend on the topology.
    fn is_distributed(&self) -> bool {
        true
    }

    fn run(&self, ensemble: &Ensemble, topology: &Topology, limits: Limits) -> Result<Simulation>;
}

/// Per-node view used by the engines.
struct NodeContext<'a> {
    problem: &'a NodeProblem,
    k_max: usize,
    truth: SupportSet,
    in_external: &'a [usize],
}

fn contexts<'a>(ensemble: &'a Ensemble, topology: &'a Topology) -> Result<Vec<NodeContext<'a>>> {
    if ensemble.nodes() != topology.nodes() {
        return Err(Error::invalid(format!(
            "ensemble has {} nodes but topology has {}",
            ensemble.nodes(),
            topology.nodes()
        )));
    }
    Ok(ensemble
        .problems
        .iter()
        .enumerate()
        .map(|(l, p)| NodeContext {
            problem: p,
            k_max: p.common.len() + p.private.len(),
            truth: p.support(),
            in_external: topology.in_external(l),
        })
        .collect())
}

fn record(trace: &mut RoundTrace, node: usize, round: usize, ctx: &NodeContext, r: &PursuitResult, inner: usize) {
    trace.push(TraceRecord {
        node,
        round,
        eta: r.residual_norm,
        support_overlap: r.support.intersection_len(&ctx.truth),
        inner_iters: inner,
    });
}

/// Independent local recovery; the topology is ignored.
#[derive(Debug)]
pub struct Local {
    solver: Box<dyn Pursuit>,
}

impl Local {
    pub fn new(solver: Box<dyn Pursuit>) -> Self {
        Self { solver }
    }
}

impl Scheme for Local {
    fn name(&self) -> &'static str {
        self.solver.name()
    }

    fn is_distributed(&self) -> bool {
        false
    }

    fn run(&self, ensemble: &Ensemble, topology: &Topology, _limits: Limits) -> Result<Simulation> {
        let ctxs = contexts(ensemble, topology)?;
        let mut trace = RoundTrace::default();
        let mut nodes = Vec::with_capacity(ctxs.len());
        for (l, ctx) in ctxs.iter().enumerate() {
            let p = ctx.problem;
            let result = self.solver.solve(&p.a, ctx.k_max, &p.y, &SupportSet::empty())?;
            record(&mut trace, l, 0, ctx, &result, result.iterations);
            nodes.push(NodeOutcome {
                rounds: 0,
                solver_runs: 1,
                inner_iterations: result.iterations,
                converged: true,
                result,
            });
        }
        Ok(Simulation {
            nodes,
            trace,
            rounds: 0,
            converged: true,
        })
    }
}

/// Distributed OMP: round `k` seeds modOMP with a `k`-index voted support.
#[derive(Debug, Clone, Copy, Default)]
pub struct DiOmp;

impl Scheme for DiOmp {
    fn name(&self) -> &'static str {
        "diomp"
    }

    fn run(&self, ensemble: &Ensemble, topology: &Topology, _limits: Limits) -> Result<Simulation> {
        let ctxs = contexts(ensemble, topology)?;
        let n = ensemble.problems.first().map_or(0, |p| p.a.cols());
        let k_common = ensemble.problems.first().map_or(0, |p| p.common.len());
        let mut trace = RoundTrace::default();
        let mut current = Vec::with_capacity(ctxs.len());
        let mut inner = Vec::with_capacity(ctxs.len());
        for (l, ctx) in ctxs.iter().enumerate() {
            let r = mod_omp(&ctx.problem.a, ctx.k_max, &ctx.problem.y, &SupportSet::empty())?;
            record(&mut trace, l, 0, ctx, &r, r.iterations);
            inner.push(r.iterations);
            current.push(r);
        }
        for k in 1..=k_common {
            let board: Vec<SupportSet> = current.iter().map(|r| r.support.clone()).collect();
            for (l, ctx) in ctxs.iter().enumerate() {
                let received = std::iter::once(&board[l]).chain(ctx.in_external.iter().map(|&j| &board[j]));
                let seed = vote(n, received, k)?;
                let r = mod_omp(&ctx.problem.a, ctx.k_max, &ctx.problem.y, &seed)?;
                record(&mut trace, l, k, ctx, &r, r.iterations);
                inner[l] += r.iterations;
                current[l] = r;
            }
        }
        let nodes = current
            .into_iter()
            .zip(inner)
            .map(|(result, inner_iterations)| NodeOutcome {
                result,
                rounds: k_common,
                solver_runs: k_common + 1,
                inner_iterations,
                converged: true,
            })
            .collect();
        Ok(Simulation {
            nodes,
            trace,
            rounds: k_common,
            converged: true,
        })
    }
}

/// State of one node in a [`ParallelScheme`] run.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeState {
    pub current: PursuitResult,
    /// Best-so-far ("old") estimate.
    pub previous: PursuitResult,
    /// Latest supports from external in-neighbors, in topology order.
    pub received: Vec<SupportSet>,
    pub received_old: Vec<SupportSet>,
    pub round: usize,
    pub converged: bool,
    solver_runs: usize,
    inner_iterations: usize,
}

impl NodeState {
    fn new(initial: PursuitResult, in_degree: usize) -> Self {
        Self {
            previous: initial.clone(),
            inner_iterations: initial.iterations,
            current: initial,
            received: vec![SupportSet::empty(); in_degree],
            received_old: vec![SupportSet::empty(); in_degree],
            round: 0,
            converged: false,
            solver_runs: 1,
        }
    }

    /// Revert rule, then remember the state this round starts from.
    fn begin_round(&mut self) {
        if self.current.residual_norm > self.previous.residual_norm {
            self.current = self.previous.clone();
        }
        self.previous = self.current.clone();
        self.received_old.clone_from(&self.received);
    }

    /// Support put on the message board.
    fn broadcast(&self) -> &SupportSet {
        &self.previous.support
    }

    /// Estimate the node stands behind after the latest round: the old one
    /// once converged, otherwise whichever the revert rule would keep.
    pub fn reported(&self) -> &PursuitResult {
        if self.converged || self.current.residual_norm > self.previous.residual_norm {
            &self.previous
        } else {
            &self.current
        }
    }
}

/// DiSP / DiFROGS: full-cardinality voting with a revert rule around a
/// local solver.
#[derive(Debug)]
pub struct ParallelScheme {
    name: &'static str,
    solver: Box<dyn Pursuit>,
}

impl ParallelScheme {
    pub fn new(name: &'static str, solver: Box<dyn Pursuit>) -> Self {
        Self { name, solver }
    }

    pub fn disp() -> Self {
        Self::new("disp", Box::new(SubspacePursuit::default()))
    }

    pub fn difrogs() -> Self {
        Self::new("difrogs", Box::new(Frogs::default()))
    }
}

impl Scheme for ParallelScheme {
    fn name(&self) -> &'static str {
        self.name
    }

    fn run(&self, ensemble: &Ensemble, topology: &Topology, limits: Limits) -> Result<Simulation> {
        let ctxs = contexts(ensemble, topology)?;
        let n = ensemble.problems.first().map_or(0, |p| p.a.cols());
        let k_common = ensemble.problems.first().map_or(0, |p| p.common.len());
        let mut trace = RoundTrace::default();
        let mut states = Vec::with_capacity(ctxs.len());
        for (l, ctx) in ctxs.iter().enumerate() {
            let r = self.solver.solve(&ctx.problem.a, ctx.k_max, &ctx.problem.y, &SupportSet::empty())?;
            record(&mut trace, l, 0, ctx, &r, r.iterations);
            states.push(NodeState::new(r, ctx.in_external.len()));
        }

        let mut round = 0;
        while round < limits.max_rounds && !states.iter().all(|s| s.converged) {
            round += 1;
            let board: Vec<SupportSet> = states
                .iter_mut()
                .map(|s| {
                    if !s.converged {
                        s.begin_round();
                    }
                    s.broadcast().clone()
                })
                .collect();
            for (l, (ctx, s)) in ctxs.iter().zip(states.iter_mut()).enumerate() {
                if s.converged {
                    record(&mut trace, l, round, ctx, s.reported(), 0);
                    continue;
                }
                s.received = ctx.in_external.iter().map(|&j| board[j].clone()).collect();
                let seed = vote(n, std::iter::once(&board[l]).chain(&s.received), k_common)?;
                let r = self.solver.solve(&ctx.problem.a, ctx.k_max, &ctx.problem.y, &seed)?;
                let inner = r.iterations;
                s.current = r;
                s.round = round;
                s.solver_runs += 1;
                s.inner_iterations += inner;
                s.converged =
                    s.current.residual_norm >= s.previous.residual_norm && s.received == s.received_old;
                record(&mut trace, l, round, ctx, s.reported(), inner);
            }
        }

        let converged = states.iter().all(|s| s.converged);
        let nodes = states
            .into_iter()
            .map(|s| NodeOutcome {
                result: s.reported().clone(),
                rounds: s.round,
                solver_runs: s.solver_runs,
                inner_iterations: s.inner_iterations,
                converged: s.converged,
            })
            .collect();
        Ok(Simulation {
            nodes,
            trace,
            rounds: round,
            converged,
        })
    }
}

/// Name-indexed collection of schemes.
#[derive(Debug)]
pub struct SchemeRegistry {
    entries: Vec<Box<dyn Scheme>>,
}

impl Default for SchemeRegistry {
    /// Local `omp`, `sp`, `frogs` and distributed `diomp`, `disp`, `difrogs`.
    fn default() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(Local::new(Box::new(Omp))));
        r.register(Box::new(Local::new(Box::new(SubspacePursuit::default()))));
        r.register(Box::new(Local::new(Box::new(Frogs::default()))));
        r.register(Box::new(DiOmp));
        r.register(Box::new(ParallelScheme::disp()));
        r.register(Box::new(ParallelScheme::difrogs()));
        r
    }
}

impl SchemeRegistry {
    pub fn empty() -> Self {
        Self { entries: Vec::new() }
    }

    pub fn register(&mut self, scheme: Box<dyn Scheme>) {
        self.entries.retain(|s| s.name() != scheme.name());
        self.entries.push(scheme);
    }

    pub fn get(&self, name: &str) -> Result<&dyn Scheme> {
        self.entries
            .iter()
            .find(|s| s.name() == name)
            .map(|s| s.as_ref())
            .ok_or_else(|| {
                Error::invalid(format!(
                    "unknown algorithm '{name}' (known: {})",
                    self.names().join(", ")
                ))
            })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.iter().map(|s| s.name()).collect()
    }
}

/// Runs the named scheme from the default registry.
pub fn simulate(ensemble: &Ensemble, topology: &Topology, algorithm: &str, limits: Limits) -> Result<Simulation> {
    SchemeRegistry::default().get(algorithm)?.run(ensemble, topology, limits)
}
