use std::io::{self, Write};

/// State a node reports at the end of one round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub node: usize,
    /// 0 is the initialization.
    pub round: usize,
    pub eta: f64,
    /// `|T̂ ∩ T|` against the node's true support.
    pub support_overlap: usize,
    /// Inner iterations spent by the local solver this round; 0 when frozen.
    pub inner_iters: usize,
}

/// Append-only per-node, per-round log of a simulation.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RoundTrace {
    records: Vec<TraceRecord>,
}

pub const TRACE_CSV_HEADER: &str = "run_id,node,round,eta,support_overlap,inner_iters";

impl RoundTrace {
    pub(crate) fn push(&mut self, record: TraceRecord) {
        self.records.push(record);
    }

    pub fn records(&self) -> &[TraceRecord] {
        &self.records
    }

    /// Records of one node in round order.
    pub fn node(&self, node: usize) -> impl Iterator<Item = &TraceRecord> + '_ {
        self.records.iter().filter(move |r| r.node == node)
    }

    /// Highest round index present.
    pub fn last_round(&self) -> usize {
        self.records.iter().map(|r| r.round).max().unwrap_or(0)
    }

    /// Writes records as CSV rows, preceded by the header when `header` is set.
    pub fn write_csv(&self, run_id: u64, header: bool, out: &mut impl Write) -> io::Result<()> {
        if header {
            writeln!(out, "{TRACE_CSV_HEADER}")?;
        }
        for r in &self.records {
            writeln!(
                out,
                "{run_id},{},{},{:e},{},{}",
                r.node, r.round, r.eta, r.support_overlap, r.inner_iters
            )?;
        }
        Ok(())
    }
}
