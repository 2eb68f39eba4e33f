//! Exhaustive search over assignments of inner blocks to programmable blocks.
//!
//! Inner blocks are visited in id order and each is assigned either to
//! "unassigned" (value 0) or to bin `1..=k+1`, where `k` bins are already
//! open. Opening bin `k+1` only when bins `1..=k` are non-empty removes the
//! symmetry between empty bins. A leaf is feasible when every open bin has
//! at least two members and fits. The objective is the number of inner
//! blocks left after replacement (unassigned blocks plus bins), smallest
//! first; among equal totals, more blocks covered wins. Because values are
//! tried in increasing order the first optimal leaf found is the
//! lexicographically least assignment vector, which makes the answer
//! canonical.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use super::{Algorithm, FitConfig, Partition, PartitionResult};
use crate::error::PartitionError;
use crate::netlist::{BlockId, Design, Topology};

/// Default per-design budget.
pub const DEFAULT_BUDGET: Duration = Duration::from_secs(60);

/// Nodes visited between two clock reads.
const CLOCK_STRIDE: u64 = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExhaustiveOptions {
    /// Give up after this long and return the best assignment found so far,
    /// flagged as non-optimal.
    pub budget: Option<Duration>,
    /// Prune subtrees that cannot beat the incumbent. Never changes the
    /// result, only the time taken.
    pub bound: bool,
}

impl Default for ExhaustiveOptions {
    fn default() -> Self {
        ExhaustiveOptions {
            budget: Some(DEFAULT_BUDGET),
            bound: true,
        }
    }
}

/// A net restricted to the inner blocks, as bitmasks over inner indices.
#[derive(Debug, Clone, Copy)]
struct Net {
    /// Bit of the inner source block, or 0 for sensors.
    src: u64,
    /// Inner consumers.
    consumers: u64,
    /// Consumed by a primary output too.
    outer: bool,
}

struct Search<'a> {
    nets: Vec<Net>,
    /// Strict inner descendants / ancestors per inner block.
    desc: Vec<u64>,
    anc: Vec<u64>,
    /// Direct inner successors per inner block.
    succ: Vec<u64>,
    cfg: FitConfig,
    opts: &'a ExhaustiveOptions,
    n: usize,
    assign: Vec<u8>,
    bins: Vec<u64>,
    covered: usize,
    /// `(total inner after, covered)` of the incumbent.
    best: (usize, usize),
    best_assign: Vec<u8>,
    nodes: u64,
    fit_tests: u64,
    start: Instant,
    timed_out: bool,
}

impl Search<'_> {
    fn fits(&mut self, bin: u64) -> bool {
        self.fit_tests += 1;
        let (mut indegree, mut outdegree) = (0, 0);
        for net in &self.nets {
            if net.src & bin == 0 {
                if net.consumers & bin != 0 {
                    indegree += 1;
                    if indegree > self.cfg.iface.i {
                        return false;
                    }
                }
            } else if net.outer || net.consumers & !bin != 0 {
                outdegree += 1;
                if outdegree > self.cfg.iface.o {
                    return false;
                }
            }
        }
        !self.cfg.convex || self.convex(bin)
    }

    fn convex(&self, bin: u64) -> bool {
        let (mut d, mut a) = (0u64, 0u64);
        let mut rest = bin;
        while rest != 0 {
            let j = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            d |= self.desc[j];
            a |= self.anc[j];
        }
        d & a & !bin == 0
    }

    /// Contracting every bin to one node leaves the inner graph acyclic.
    fn contracted_acyclic(&self) -> bool {
        let full = if self.n == 64 { u64::MAX } else { (1u64 << self.n) - 1 };
        let assigned = self.bins.iter().fold(0, |a, b| a | b);
        let mut nodes = self.bins.clone();
        let mut rest = full & !assigned;
        while rest != 0 {
            nodes.push(rest & rest.wrapping_neg());
            rest &= rest - 1;
        }
        let out: Vec<u64> = nodes
            .iter()
            .map(|&m| {
                let mut o = 0;
                let mut r = m;
                while r != 0 {
                    o |= self.succ[r.trailing_zeros() as usize];
                    r &= r - 1;
                }
                o & !m
            })
            .collect();
        // Kahn's algorithm on the contracted graph.
        let mut indeg: Vec<usize> = nodes
            .iter()
            .map(|&m| out.iter().filter(|&&o| o & m != 0).count())
            .collect();
        let mut ready: Vec<usize> = (0..nodes.len()).filter(|&k| indeg[k] == 0).collect();
        let mut done = 0;
        while let Some(k) = ready.pop() {
            done += 1;
            for (j, &m) in nodes.iter().enumerate() {
                if j != k && out[k] & m != 0 {
                    indeg[j] -= 1;
                    if indeg[j] == 0 {
                        ready.push(j);
                    }
                }
            }
        }
        done == nodes.len()
    }

    fn leaf(&mut self) {
        let objective = (self.n - self.covered + self.bins.len(), self.covered);
        if !better(objective, self.best) {
            return;
        }
        for k in 0..self.bins.len() {
            let bin = self.bins[k];
            if bin.count_ones() < 2 || !self.fits(bin) {
                return;
            }
        }
        if self.cfg.convex && self.bins.len() > 1 && !self.contracted_acyclic() {
            return;
        }
        self.best = objective;
        self.best_assign.copy_from_slice(&self.assign);
    }

    fn dfs(&mut self, pos: usize) {
        if self.timed_out {
            return;
        }
        self.nodes += 1;
        if self.nodes % CLOCK_STRIDE == 0 {
            if let Some(budget) = self.opts.budget {
                if self.start.elapsed() >= budget {
                    self.timed_out = true;
                    return;
                }
            }
        }
        if pos == self.n {
            self.leaf();
            return;
        }
        let remaining = self.n - pos;
        if self.opts.bound {
            // Best case: every remaining block joins a bin that is already
            // open, or a single new one if none is.
            let open = self.bins.len().max(usize::from(remaining > 0));
            let bound = (pos - self.covered + open, self.covered + remaining);
            if !better(bound, self.best) {
                return;
            }
            let singles = self.bins.iter().filter(|b| b.count_ones() == 1).count();
            if singles > remaining {
                return;
            }
        }
        let bit = 1u64 << pos;

        self.assign[pos] = 0;
        self.dfs(pos + 1);

        self.covered += 1;
        for k in 0..self.bins.len() {
            self.assign[pos] = (k + 1) as u8;
            self.bins[k] |= bit;
            self.dfs(pos + 1);
            self.bins[k] &= !bit;
        }
        self.assign[pos] = (self.bins.len() + 1) as u8;
        self.bins.push(bit);
        self.dfs(pos + 1);
        self.bins.pop();
        self.covered -= 1;
        self.assign[pos] = 0;
    }
}

/// `(total, covered)`: fewer blocks after replacement, then more covered.
fn better(a: (usize, usize), b: (usize, usize)) -> bool {
    a.0 < b.0 || (a.0 == b.0 && a.1 > b.1)
}

/// Largest inner-block count the bitmask search supports.
pub const MAX_INNER: usize = 64;

pub fn exhaustive(
    d: &Design,
    cfg: FitConfig,
    opts: &ExhaustiveOptions,
) -> Result<PartitionResult, PartitionError> {
    let start = Instant::now();
    let topo = Topology::new(d)?;
    let inner = topo.inner();
    let n = inner.len();
    let all_unassigned = |optimal: bool| PartitionResult {
        algorithm: Algorithm::Exhaustive,
        iface: cfg.iface,
        partitions: Vec::new(),
        unassigned: inner.iter().map(|&b| topo.id(b).clone()).collect(),
        elapsed: start.elapsed(),
        optimal,
        fit_tests: 0,
    };
    if n == 0 {
        return Ok(all_unassigned(true));
    }
    if n > MAX_INNER {
        return Ok(all_unassigned(false));
    }

    let mut bit_of = vec![0u64; topo.len()];
    for (j, &b) in inner.iter().enumerate() {
        bit_of[b] = 1 << j;
    }
    let mut nets = Vec::new();
    for b in 0..topo.len() {
        for consumers in topo.fanout(b) {
            let mut net = Net {
                src: bit_of[b],
                consumers: 0,
                outer: false,
            };
            for &(t, _) in consumers {
                if bit_of[t] != 0 {
                    net.consumers |= bit_of[t];
                } else {
                    net.outer = true;
                }
            }
            if net.src != 0 || net.consumers != 0 {
                nets.push(net);
            }
        }
    }
    // Level order visits drivers first; paths between inner blocks only pass
    // through inner blocks.
    let mut desc_all = vec![0u64; topo.len()];
    for &b in topo.level_order().iter().rev() {
        let mut m = 0;
        for t in topo.succs(b) {
            m |= bit_of[t] | desc_all[t];
        }
        desc_all[b] = m;
    }
    let mut anc_all = vec![0u64; topo.len()];
    for &b in topo.level_order() {
        let mut m = 0;
        for s in topo.preds(b) {
            m |= bit_of[s] | anc_all[s];
        }
        anc_all[b] = m;
    }

    let mut search = Search {
        nets,
        desc: inner.iter().map(|&b| desc_all[b]).collect(),
        anc: inner.iter().map(|&b| anc_all[b]).collect(),
        succ: inner
            .iter()
            .map(|&b| topo.succs(b).fold(0, |m, t| m | bit_of[t]))
            .collect(),
        cfg,
        opts,
        n,
        assign: vec![0; n],
        bins: Vec::new(),
        covered: 0,
        best: (n, 0),
        best_assign: vec![0; n],
        nodes: 0,
        fit_tests: 0,
        start,
        timed_out: false,
    };
    search.dfs(0);

    let nbins = search.best.0 + search.best.1 - n;
    let mut groups: Vec<Vec<BlockId>> = vec![Vec::new(); nbins];
    let mut unassigned = BTreeSet::new();
    for (j, &v) in search.best_assign.iter().enumerate() {
        let id = topo.id(inner[j]).clone();
        if v == 0 {
            unassigned.insert(id);
        } else {
            groups[v as usize - 1].push(id);
        }
    }
    Ok(PartitionResult {
        algorithm: Algorithm::Exhaustive,
        iface: cfg.iface,
        partitions: groups.into_iter().map(Partition::new).collect(),
        unassigned,
        elapsed: start.elapsed(),
        optimal: !search.timed_out,
        fit_tests: search.fit_tests,
    })
}
