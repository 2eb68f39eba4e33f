//! Partitioning inner blocks onto i/o-limited programmable blocks.
//!
//! Partition in/out degrees count distinct nets, not edges: one external
//! output port feeding two members is one input, and one member output port
//! consumed by two outside blocks is one output.

mod aggregate;
mod exhaustive;
mod paredown;

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use serde::{Deserialize, Serialize};

pub use aggregate::aggregate;
pub use exhaustive::{exhaustive, ExhaustiveOptions, DEFAULT_BUDGET};
pub use paredown::{paredown, paredown_traced, PareDownMode, PareStep};

use crate::error::PartitionError;
use crate::netlist::{BlockId, Design, ProgIface, Topology};

/// A non-empty set of inner blocks.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Partition {
    members: BTreeSet<BlockId>,
}

impl Partition {
    pub fn new<I: IntoIterator<Item = BlockId>>(members: I) -> Self {
        Partition {
            members: members.into_iter().collect(),
        }
    }

    pub fn members(&self) -> &BTreeSet<BlockId> {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, b: &BlockId) -> bool {
        self.members.contains(b)
    }

    pub fn without(&self, b: &BlockId) -> Partition {
        let mut members = self.members.clone();
        members.remove(b);
        Partition { members }
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.members.iter().map(BlockId::as_str).collect();
        f.write_str(&names.join(","))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PartitionIO {
    pub indegree: usize,
    pub outdegree: usize,
}

impl PartitionIO {
    pub fn sum(&self) -> usize {
        self.indegree + self.outdegree
    }
}

/// Fit predicate configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FitConfig {
    pub iface: ProgIface,
    /// Also require convexity. Off by default.
    pub convex: bool,
}

impl FitConfig {
    pub fn new(iface: ProgIface) -> Self {
        FitConfig {
            iface,
            convex: false,
        }
    }

    pub fn convex(mut self, on: bool) -> Self {
        self.convex = on;
        self
    }
}

/// Index-level membership view used by the algorithms.
pub(crate) fn io_of(topo: &Topology, member: &[bool]) -> PartitionIO {
    let mut sources: Vec<(usize, usize)> = Vec::new();
    let mut outdegree = 0;
    for b in (0..topo.len()).filter(|&b| member[b]) {
        sources.extend(topo.drivers(b).iter().copied().filter(|&(s, _)| !member[s]));
        outdegree += topo
            .fanout(b)
            .iter()
            .filter(|consumers| consumers.iter().any(|&(t, _)| !member[t]))
            .count();
    }
    sources.sort_unstable();
    sources.dedup();
    PartitionIO {
        indegree: sources.len(),
        outdegree,
    }
}

/// Partitions already committed, each contracted to a single node when
/// testing convexity. A candidate that is convex in this contracted graph
/// keeps the graph acyclic once it is contracted too.
#[derive(Debug, Clone)]
pub(crate) struct Committed {
    group: Vec<u32>,
    parts: Vec<Vec<usize>>,
}

impl Committed {
    pub(crate) fn new(n: usize) -> Self {
        Committed {
            group: vec![0; n],
            parts: Vec::new(),
        }
    }

    pub(crate) fn add(&mut self, members: &[usize]) {
        self.parts.push(members.to_vec());
        let g = self.parts.len() as u32;
        for &b in members {
            self.group[b] = g;
        }
    }
}

/// True iff no path leaves the member set and comes back.
pub(crate) fn convex_of(topo: &Topology, member: &[bool]) -> bool {
    convex_given(topo, member, None)
}

/// Convexity in the graph where every committed partition is one node.
pub(crate) fn convex_given(topo: &Topology, member: &[bool], committed: Option<&Committed>) -> bool {
    let mut seen = vec![false; topo.len()];
    let mut expanded = vec![false; committed.map_or(0, |c| c.parts.len())];
    let mut stack: Vec<usize> = Vec::new();
    for b in (0..topo.len()).filter(|&b| member[b]) {
        for t in topo.succs(b) {
            if !member[t] && !seen[t] {
                seen[t] = true;
                stack.push(t);
            }
        }
    }
    while let Some(x) = stack.pop() {
        if let Some(c) = committed {
            let g = c.group[x] as usize;
            if g > 0 && !expanded[g - 1] {
                expanded[g - 1] = true;
                for &y in &c.parts[g - 1] {
                    if !seen[y] {
                        seen[y] = true;
                        stack.push(y);
                    }
                }
            }
        }
        for t in topo.succs(x) {
            if member[t] {
                return false;
            }
            if !seen[t] {
                seen[t] = true;
                stack.push(t);
            }
        }
    }
    true
}

pub(crate) fn fits_io(io: PartitionIO, iface: ProgIface) -> bool {
    io.indegree <= iface.i && io.outdegree <= iface.o
}

pub(crate) fn is_border_of(topo: &Topology, member: &[bool], b: usize) -> bool {
    let all_out_leave = topo.fanout(b).iter().flatten().all(|&(t, _)| !member[t]);
    let all_in_enter = topo.drivers(b).iter().all(|&(s, _)| !member[s]);
    all_out_leave || all_in_enter
}

fn member_mask(topo: &Topology, p: &Partition) -> Result<Vec<bool>, PartitionError> {
    let mut member = vec![false; topo.len()];
    for b in p.members() {
        match topo.index_of(b) {
            Some(i) if topo.class(i).is_inner() => member[i] = true,
            _ => return Err(PartitionError::NotInner(b.clone())),
        }
    }
    Ok(member)
}

pub fn partition_io(d: &Design, p: &Partition) -> Result<PartitionIO, PartitionError> {
    let topo = Topology::new(d)?;
    let member = member_mask(&topo, p)?;
    Ok(io_of(&topo, &member))
}

pub fn is_convex(d: &Design, p: &Partition) -> Result<bool, PartitionError> {
    let topo = Topology::new(d)?;
    let member = member_mask(&topo, p)?;
    Ok(convex_of(&topo, &member))
}

pub fn partition_fits(d: &Design, p: &Partition, cfg: FitConfig) -> Result<bool, PartitionError> {
    let topo = Topology::new(d)?;
    let member = member_mask(&topo, p)?;
    Ok(fits_io(io_of(&topo, &member), cfg.iface) && (!cfg.convex || convex_of(&topo, &member)))
}

pub fn border_blocks(d: &Design, p: &Partition) -> Result<BTreeSet<BlockId>, PartitionError> {
    if p.is_empty() {
        return Err(PartitionError::Empty);
    }
    let topo = Topology::new(d)?;
    let member = member_mask(&topo, p)?;
    Ok((0..topo.len())
        .filter(|&b| member[b] && is_border_of(&topo, &member, b))
        .map(|b| topo.id(b).clone())
        .collect())
}

/// Rank of a border block plus the keys that order removal among equal
/// ranks. `Ord` sorts the block to remove first to the front.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankValue {
    pub block: BlockId,
    /// Change in the partition's `indegree + outdegree` if the block leaves.
    pub rank: i64,
    pub own_indegree: usize,
    pub own_outdegree: usize,
    pub level: u32,
}

impl Ord for RankValue {
    fn cmp(&self, other: &Self) -> Ordering {
        self.rank
            .cmp(&other.rank)
            .then(other.own_indegree.cmp(&self.own_indegree))
            .then(other.own_outdegree.cmp(&self.own_outdegree))
            .then(other.level.cmp(&self.level))
            .then(self.block.cmp(&other.block))
    }
}

impl PartialOrd for RankValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub(crate) fn rank_of(topo: &Topology, member: &mut [bool], b: usize) -> RankValue {
    let before = io_of(topo, member).sum() as i64;
    member[b] = false;
    let after = io_of(topo, member).sum() as i64;
    member[b] = true;
    let mut single = vec![false; topo.len()];
    single[b] = true;
    let own = io_of(topo, &single);
    RankValue {
        block: topo.id(b).clone(),
        rank: after - before,
        own_indegree: own.indegree,
        own_outdegree: own.outdegree,
        level: topo.level(b),
    }
}

pub fn rank_block(d: &Design, p: &Partition, b: &BlockId) -> Result<RankValue, PartitionError> {
    let topo = Topology::new(d)?;
    let mut member = member_mask(&topo, p)?;
    let bi = topo
        .index_of(b)
        .filter(|&i| member[i] && is_border_of(&topo, &member, i))
        .ok_or_else(|| PartitionError::NotBorder(b.clone()))?;
    Ok(rank_of(&topo, &mut member, bi))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Paredown,
    Exhaustive,
    Aggregate,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Paredown => "paredown",
            Algorithm::Exhaustive => "exhaustive",
            Algorithm::Aggregate => "aggregate",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "paredown" => Ok(Algorithm::Paredown),
            "exhaustive" => Ok(Algorithm::Exhaustive),
            "aggregate" => Ok(Algorithm::Aggregate),
            _ => Err(format!("unknown algorithm {s:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartitionResult {
    pub algorithm: Algorithm,
    pub iface: ProgIface,
    pub partitions: Vec<Partition>,
    pub unassigned: BTreeSet<BlockId>,
    pub elapsed: Duration,
    /// False when a search budget ran out before optimality was proven.
    pub optimal: bool,
    /// Number of fit-predicate evaluations performed.
    pub fit_tests: u64,
}

impl PartitionResult {
    pub fn covered(&self) -> usize {
        self.partitions.iter().map(Partition::len).sum()
    }

    pub fn programmable(&self) -> usize {
        self.partitions.len()
    }

    pub fn total_inner_after(&self) -> usize {
        self.unassigned.len() + self.partitions.len()
    }

    pub fn report(&self) -> PartitionReport {
        PartitionReport {
            algorithm: self.algorithm,
            iface: self.iface,
            partitions: self
                .partitions
                .iter()
                .map(|p| p.members().iter().map(|b| b.to_string()).collect())
                .collect(),
            unassigned: self.unassigned.iter().map(|b| b.to_string()).collect(),
            covered: self.covered(),
            programmable: self.programmable(),
            total_inner_after: self.total_inner_after(),
            elapsed_ms: self.elapsed.as_secs_f64() * 1e3,
            optimal: self.optimal,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.report()).expect("report serializes")
    }
}

/// JSON export shape of a [`PartitionResult`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionReport {
    pub algorithm: Algorithm,
    pub iface: ProgIface,
    pub partitions: Vec<Vec<String>>,
    pub unassigned: Vec<String>,
    pub covered: usize,
    pub programmable: usize,
    pub total_inner_after: usize,
    pub elapsed_ms: f64,
    pub optimal: bool,
}

impl PartitionReport {
    /// Rebuilds the result. Fit-test statistics are not exported.
    pub fn into_result(self) -> Result<PartitionResult, crate::error::NetlistError> {
        let ids = |v: Vec<String>| v.into_iter().map(BlockId::new).collect::<Result<Vec<_>, _>>();
        Ok(PartitionResult {
            algorithm: self.algorithm,
            iface: self.iface,
            partitions: self
                .partitions
                .into_iter()
                .map(|p| ids(p).map(Partition::new))
                .collect::<Result<_, _>>()?,
            unassigned: ids(self.unassigned)?.into_iter().collect(),
            elapsed: Duration::from_secs_f64(self.elapsed_ms / 1e3),
            optimal: self.optimal,
            fit_tests: 0,
        })
    }
}

/// Checks the structural invariants every algorithm must uphold:
/// disjoint partitions of at least two members that each fit, and an exact
/// cover of the inner blocks by partitions plus unassigned blocks. With
/// `cfg.convex`, contracting all partitions must also leave the design
/// acyclic.
pub fn verify_result(d: &Design, r: &PartitionResult, cfg: FitConfig) -> Result<(), String> {
    let topo = Topology::new(d).map_err(|e| e.to_string())?;
    let inner: BTreeSet<BlockId> = topo.inner().into_iter().map(|i| topo.id(i).clone()).collect();
    let mut seen: BTreeSet<BlockId> = BTreeSet::new();
    let mut committed = Committed::new(topo.len());
    for p in &r.partitions {
        if p.len() < 2 {
            return Err(format!("partition {{{p}}} has fewer than two members"));
        }
        for b in p.members() {
            if !seen.insert(b.clone()) {
                return Err(format!("{b} appears twice"));
            }
        }
        let member = member_mask(&topo, p).map_err(|e| e.to_string())?;
        let io = io_of(&topo, &member);
        if !fits_io(io, cfg.iface) {
            return Err(format!("partition {{{p}}} does not fit: {io:?}"));
        }
        if cfg.convex {
            if !convex_of(&topo, &member) {
                return Err(format!("partition {{{p}}} is not convex"));
            }
            if !convex_given(&topo, &member, Some(&committed)) {
                return Err(format!("partition {{{p}}} closes a cycle with earlier partitions"));
            }
            let idx: Vec<usize> = (0..topo.len()).filter(|&b| member[b]).collect();
            committed.add(&idx);
        }
    }
    for b in &r.unassigned {
        if !seen.insert(b.clone()) {
            return Err(format!("{b} is both assigned and unassigned"));
        }
    }
    if seen != inner {
        return Err("partitions and unassigned blocks do not cover the inner set exactly".into());
    }
    Ok(())
}
