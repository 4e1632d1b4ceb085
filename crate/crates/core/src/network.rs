//! Directed node connectivity.
//!
//! Every node counts as its own in- and out-neighbor; the stored edge lists
//! hold only external edges.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    out_edges: Vec<Vec<usize>>,
    in_edges: Vec<Vec<usize>>,
}

impl Topology {
    /// Builds a topology from external out-edge lists. Self-loops and
    /// duplicates are rejected.
    pub fn from_out_edges(out: Vec<Vec<usize>>) -> Result<Self> {
        let nodes = out.len();
        let mut out_edges = Vec::with_capacity(nodes);
        let mut in_edges = vec![Vec::new(); nodes];
        for (l, targets) in out.into_iter().enumerate() {
            let set: BTreeSet<usize> = targets.iter().copied().collect();
            if set.len() != targets.len() {
                return Err(Error::invalid(format!("node {l} has duplicate out-edges")));
            }
            if let Some(&bad) = set.iter().find(|&&t| t == l || t >= nodes) {
                return Err(Error::invalid(format!("node {l} has invalid out-edge to {bad}")));
            }
            for &t in &set {
                in_edges[t].push(l);
            }
            out_edges.push(set.into_iter().collect());
        }
        Ok(Self { out_edges, in_edges })
    }

    pub fn nodes(&self) -> usize {
        self.out_edges.len()
    }

    /// External out-neighbors of `l`, ascending.
    pub fn out_external(&self, l: usize) -> &[usize] {
        &self.out_edges[l]
    }

    /// External in-neighbors of `l`, ascending.
    pub fn in_external(&self, l: usize) -> &[usize] {
        &self.in_edges[l]
    }

    /// `L_out(l)`, including `l`.
    pub fn out_neighbors(&self, l: usize) -> Vec<usize> {
        with_self(&self.out_edges[l], l)
    }

    /// `L_in(l)`, including `l`.
    pub fn in_neighbors(&self, l: usize) -> Vec<usize> {
        with_self(&self.in_edges[l], l)
    }

    /// Number of directed external edges.
    pub fn edge_count(&self) -> usize {
        self.out_edges.iter().map(Vec::len).sum()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.out_edges
            .iter()
            .enumerate()
            .flat_map(|(l, ts)| ts.iter().map(move |&t| (l, t)))
    }

    /// True when the edge set of `self` is contained in that of `other`.
    pub fn is_subgraph_of(&self, other: &Topology) -> bool {
        self.nodes() == other.nodes()
            && self.edges().all(|(l, t)| other.out_edges[l].binary_search(&t).is_ok())
    }

    /// Adjacency-list text, one `node: out1 out2 ...` line per node with
    /// 0-based external out-neighbors.
    pub fn to_adjacency_text(&self) -> String {
        self.to_string()
    }

    pub fn parse_adjacency_text(text: &str) -> Result<Self> {
        let mut out = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (head, tail) = line
                .split_once(':')
                .ok_or_else(|| Error::Parse(format!("line {}: missing ':'", lineno + 1)))?;
            let node: usize = head
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("line {}: bad node id '{}'", lineno + 1, head.trim())))?;
            if node != out.len() {
                return Err(Error::Parse(format!(
                    "line {}: expected node {}, found {node}",
                    lineno + 1,
                    out.len()
                )));
            }
            let targets = tail
                .split_whitespace()
                .map(|t| {
                    t.parse()
                        .map_err(|_| Error::Parse(format!("line {}: bad neighbor '{t}'", lineno + 1)))
                })
                .collect::<Result<Vec<usize>>>()?;
            out.push(targets);
        }
        Topology::from_out_edges(out).map_err(|e| Error::Parse(e.to_string()))
    }
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (l, ts) in self.out_edges.iter().enumerate() {
            write!(f, "{l}:")?;
            for t in ts {
                write!(f, " {t}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

fn with_self(edges: &[usize], l: usize) -> Vec<usize> {
    let pos = edges.partition_point(|&t| t < l);
    let mut v = Vec::with_capacity(edges.len() + 1);
    v.extend_from_slice(&edges[..pos]);
    v.push(l);
    v.extend_from_slice(&edges[pos..]);
    v
}

/// `C_d`: node `l` sends to `l+1, ..., l+d` (mod L).
pub fn ring_topology(nodes: usize, degree: usize) -> Result<Topology> {
    if nodes == 0 || degree >= nodes {
        return Err(Error::invalid(format!(
            "ring degree {degree} needs 0 <= d <= L-1 with L = {nodes}"
        )));
    }
    Topology::from_out_edges(
        (0..nodes)
            .map(|l| (1..=degree).map(|j| (l + j) % nodes).collect())
            .collect(),
    )
}

/// `C_{d,rand}`: the `C_1` ring plus `d-1` distinct random out-edges per node.
pub fn random_topology(nodes: usize, degree: usize, rng: &mut impl Rng) -> Result<Topology> {
    if degree < 2 || degree >= nodes {
        return Err(Error::invalid(format!(
            "random degree {degree} needs 2 <= d <= L-1 with L = {nodes}"
        )));
    }
    let out = (0..nodes)
        .map(|l| {
            let next = (l + 1) % nodes;
            // Candidates are all nodes except self and the ring successor.
            let pool: Vec<usize> = (0..nodes).filter(|&t| t != l && t != next).collect();
            let mut targets: Vec<usize> = rand::seq::index::sample(rng, pool.len(), degree - 1)
                .into_iter()
                .map(|i| pool[i])
                .collect();
            targets.push(next);
            targets
        })
        .collect();
    Topology::from_out_edges(out)
}

/// Watts-Strogatz small world with two-way links.
///
/// Starts from a lattice where each node links to `q` neighbors per side,
/// then rewires the far endpoint of each lattice edge with probability `p`.
/// A rewired endpoint is redrawn until it avoids self-loops and duplicates;
/// a node already linked to every other node keeps its edge.
pub fn watts_strogatz(nodes: usize, q: usize, p: f64, rng: &mut impl Rng) -> Result<Topology> {
    if q == 0 || 2 * q > nodes.saturating_sub(1) {
        return Err(Error::invalid(format!(
            "Watts-Strogatz q = {q} needs 1 <= q <= (L-1)/2 with L = {nodes}"
        )));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!("rewire probability {p} outside [0, 1]")));
    }
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); nodes];
    for u in 0..nodes {
        for j in 1..=q {
            let v = (u + j) % nodes;
            adj[u].insert(v);
            adj[v].insert(u);
        }
    }
    for j in 1..=q {
        for u in 0..nodes {
            let v = (u + j) % nodes;
            if !adj[u].contains(&v) || adj[u].len() == nodes - 1 || !rng.random_bool(p) {
                continue;
            }
            let w = loop {
                let w = rng.random_range(0..nodes);
                if w != u && !adj[u].contains(&w) {
                    break w;
                }
            };
            adj[u].remove(&v);
            adj[v].remove(&u);
            adj[u].insert(w);
            adj[w].insert(u);
        }
    }
    Topology::from_out_edges(adj.into_iter().map(|s| s.into_iter().collect()).collect())
}

/// Topology family named on the command line: `ring:d`, `rand:d`, `watts:q,p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TopologySpec {
    Ring(usize),
    Random(usize),
    Watts { q: usize, p: f64 },
}

impl TopologySpec {
    pub fn build(&self, nodes: usize, rng: &mut impl Rng) -> Result<Topology> {
        match *self {
            TopologySpec::Ring(d) => ring_topology(nodes, d),
            TopologySpec::Random(d) => random_topology(nodes, d, rng),
            TopologySpec::Watts { q, p } => watts_strogatz(nodes, q, p, rng),
        }
    }

    /// Whether `build` draws random numbers.
    pub fn is_random(&self) -> bool {
        !matches!(self, TopologySpec::Ring(_))
    }
}

impl fmt::Display for TopologySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TopologySpec::Ring(d) => write!(f, "ring:{d}"),
            TopologySpec::Random(d) => write!(f, "rand:{d}"),
            TopologySpec::Watts { q, p } => write!(f, "watts:{q},{p}"),
        }
    }
}

impl FromStr for TopologySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("bad topology '{s}' (ring:d | rand:d | watts:q,p)"));
        let (kind, arg) = s.trim().split_once(':').ok_or_else(bad)?;
        match kind {
            "ring" => arg.parse().map(TopologySpec::Ring).map_err(|_| bad()),
            "rand" => arg.parse().map(TopologySpec::Random).map_err(|_| bad()),
            "watts" => {
                let (q, p) = arg.split_once(',').ok_or_else(bad)?;
                Ok(TopologySpec::Watts {
                    q: q.trim().parse().map_err(|_| bad())?,
                    p: p.trim().parse().map_err(|_| bad())?,
                })
            }
            _ => Err(bad()),
        }
    }
}
