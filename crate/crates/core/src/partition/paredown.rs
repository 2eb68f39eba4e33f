//! PareDown decomposition: start from every remaining inner block and pare
//! away the least-rank border block until the candidate fits.

use std::cmp::Reverse;
use std::collections::BTreeSet;
use std::time::Instant;

use super::{
    convex_given, fits_io, Algorithm, Committed, FitConfig, Partition, PartitionIO, PartitionResult, RankValue,
};
use crate::error::PartitionError;
use crate::netlist::{BlockId, Design, Topology};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PareDownMode {
    /// When a candidate pares down to nothing, give up and return the
    /// partitions found so far.
    Strict,
    /// When a single block cannot fit on its own, leave it unassigned and
    /// continue with the rest.
    #[default]
    Resilient,
}

/// One observable step of a PareDown run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PareStep {
    /// The candidate was tested against the fit predicate.
    Test {
        candidate: Vec<BlockId>,
        io: PartitionIO,
        fits: bool,
    },
    /// Border blocks ranked (in removal-priority order) and the first removed.
    Remove { ranked: Vec<RankValue> },
    /// A fitting candidate of two or more blocks became a partition.
    Record(Vec<BlockId>),
    /// A fitting single block was left as a pre-defined block.
    Singleton(BlockId),
    /// A single block that does not fit on its own.
    Unfittable(BlockId),
}

/// Incrementally maintained candidate partition.
struct Candidate<'a> {
    topo: &'a Topology,
    net_base: &'a [usize],
    net_total: &'a [u32],
    member: Vec<bool>,
    size: usize,
    cons_in: Vec<u32>,
    in_from_members: Vec<u32>,
    out_to_members: Vec<u32>,
    io: PartitionIO,
}

/// `(counts as input, counts as output)` for one net.
fn contrib(src_member: bool, cons_in: u32, total: u32) -> (i64, i64) {
    let input = !src_member && cons_in > 0;
    let output = src_member && cons_in < total;
    (i64::from(input), i64::from(output))
}

fn diff(after: (i64, i64), before: (i64, i64)) -> (i64, i64) {
    (after.0 - before.0, after.1 - before.1)
}

impl<'a> Candidate<'a> {
    fn new(topo: &'a Topology, net_base: &'a [usize], net_total: &'a [u32], member: Vec<bool>) -> Self {
        let n = topo.len();
        let mut cons_in = vec![0u32; net_total.len()];
        let mut in_from_members = vec![0u32; n];
        let mut out_to_members = vec![0u32; n];
        for b in (0..n).filter(|&b| member[b]) {
            for &(s, sp) in topo.drivers(b) {
                cons_in[net_base[s] + sp] += 1;
                if member[s] {
                    in_from_members[b] += 1;
                    out_to_members[s] += 1;
                }
            }
        }
        let mut c = Candidate {
            topo,
            net_base,
            net_total,
            size: member.iter().filter(|&&m| m).count(),
            member,
            cons_in,
            in_from_members,
            out_to_members,
            io: PartitionIO::default(),
        };
        c.io = super::io_of(topo, &c.member);
        c
    }

    fn is_border(&self, b: usize) -> bool {
        self.in_from_members[b] == 0 || self.out_to_members[b] == 0
    }

    /// Driver nets of `b` with the number of `b`'s inputs each one feeds.
    fn driver_nets(&self, b: usize) -> Vec<(usize, usize, u32)> {
        let mut nets: Vec<(usize, usize)> = self.topo.drivers(b).to_vec();
        nets.sort_unstable();
        let mut out: Vec<(usize, usize, u32)> = Vec::with_capacity(nets.len());
        for (s, sp) in nets {
            match out.last_mut() {
                Some(last) if last.0 == s && last.1 == sp => last.2 += 1,
                _ => out.push((s, sp, 1)),
            }
        }
        out
    }

    /// Change of `(indegree, outdegree)` if `b` left the candidate.
    fn delta(&self, b: usize) -> (i64, i64) {
        let mut delta = (0, 0);
        let mut add = |d: (i64, i64)| {
            delta.0 += d.0;
            delta.1 += d.1;
        };
        for port in 0..self.topo.fanout(b).len() {
            let net = self.net_base[b] + port;
            let (c, t) = (self.cons_in[net], self.net_total[net]);
            add(diff(contrib(false, c, t), contrib(true, c, t)));
        }
        for (s, sp, k) in self.driver_nets(b) {
            let net = self.net_base[s] + sp;
            let (c, t) = (self.cons_in[net], self.net_total[net]);
            add(diff(contrib(self.member[s], c - k, t), contrib(self.member[s], c, t)));
        }
        delta
    }

    fn rank(&self, b: usize) -> i64 {
        let (i, o) = self.delta(b);
        i + o
    }

    fn remove(&mut self, b: usize) {
        debug_assert!(self.member[b]);
        let (di, dout) = self.delta(b);
        self.io.indegree = (self.io.indegree as i64 + di) as usize;
        self.io.outdegree = (self.io.outdegree as i64 + dout) as usize;
        self.member[b] = false;
        self.size -= 1;
        for &(s, sp) in self.topo.drivers(b) {
            self.cons_in[self.net_base[s] + sp] -= 1;
            if self.member[s] {
                self.out_to_members[s] -= 1;
            }
        }
        for &(t, _) in self.topo.fanout(b).iter().flatten() {
            if self.member[t] {
                self.in_from_members[t] -= 1;
            }
        }
        debug_assert_eq!(self.io, super::io_of(self.topo, &self.member));
    }

    fn fits(&self, cfg: FitConfig, committed: &Committed) -> bool {
        fits_io(self.io, cfg.iface) && (!cfg.convex || convex_given(self.topo, &self.member, Some(committed)))
    }

    fn members(&self) -> Vec<usize> {
        (0..self.topo.len()).filter(|&b| self.member[b]).collect()
    }
}

struct Own {
    indegree: Vec<usize>,
    outdegree: Vec<usize>,
}

pub fn paredown(d: &Design, cfg: FitConfig, mode: PareDownMode) -> Result<PartitionResult, PartitionError> {
    run(d, cfg, mode, None)
}

/// PareDown that also records every test, removal and decision.
pub fn paredown_traced(
    d: &Design,
    cfg: FitConfig,
    mode: PareDownMode,
) -> Result<(PartitionResult, Vec<PareStep>), PartitionError> {
    let mut steps = Vec::new();
    let r = run(d, cfg, mode, Some(&mut steps))?;
    Ok((r, steps))
}

fn run(
    d: &Design,
    cfg: FitConfig,
    mode: PareDownMode,
    mut trace: Option<&mut Vec<PareStep>>,
) -> Result<PartitionResult, PartitionError> {
    let start = Instant::now();
    let topo = Topology::new(d)?;
    let n = topo.len();
    let mut net_base = Vec::with_capacity(n + 1);
    let mut net_total = Vec::new();
    for b in 0..n {
        net_base.push(net_total.len());
        net_total.extend(topo.fanout(b).iter().map(|c| c.len() as u32));
    }
    let own = Own {
        indegree: (0..n)
            .map(|b| {
                let mut v = topo.drivers(b).to_vec();
                v.sort_unstable();
                v.dedup();
                v.len()
            })
            .collect(),
        outdegree: (0..n)
            .map(|b| topo.fanout(b).iter().filter(|c| !c.is_empty()).count())
            .collect(),
    };
    let ids = |v: &[usize]| v.iter().map(|&b| topo.id(b).clone()).collect::<Vec<_>>();

    let mut remaining = vec![false; n];
    for b in topo.inner() {
        remaining[b] = true;
    }
    let mut left = remaining.iter().filter(|&&r| r).count();
    let mut partitions = Vec::new();
    let mut unassigned: BTreeSet<BlockId> = BTreeSet::new();
    let mut fit_tests = 0u64;
    let mut committed = Committed::new(n);

    'outer: while left > 0 {
        let mut cand = Candidate::new(&topo, &net_base, &net_total, remaining.clone());
        loop {
            fit_tests += 1;
            let fits = cand.fits(cfg, &committed);
            if let Some(t) = trace.as_deref_mut() {
                t.push(PareStep::Test {
                    candidate: ids(&cand.members()),
                    io: cand.io,
                    fits,
                });
            }
            if fits {
                let members = cand.members();
                for &b in &members {
                    remaining[b] = false;
                }
                left -= members.len();
                if members.len() >= 2 {
                    if let Some(t) = trace.as_deref_mut() {
                        t.push(PareStep::Record(ids(&members)));
                    }
                    committed.add(&members);
                    partitions.push(Partition::new(ids(&members)));
                } else {
                    let b = topo.id(members[0]).clone();
                    if let Some(t) = trace.as_deref_mut() {
                        t.push(PareStep::Singleton(b.clone()));
                    }
                    unassigned.insert(b);
                }
                break;
            }
            if cand.size == 1 {
                let b = cand.members()[0];
                if let Some(t) = trace.as_deref_mut() {
                    t.push(PareStep::Unfittable(topo.id(b).clone()));
                }
                match mode {
                    PareDownMode::Strict => break 'outer,
                    PareDownMode::Resilient => {
                        remaining[b] = false;
                        left -= 1;
                        unassigned.insert(topo.id(b).clone());
                        break;
                    }
                }
            }
            let mut ranked: Vec<(i64, Reverse<usize>, Reverse<usize>, Reverse<u32>, usize)> = cand
                .members()
                .into_iter()
                .filter(|&b| cand.is_border(b))
                .map(|b| {
                    (
                        cand.rank(b),
                        Reverse(own.indegree[b]),
                        Reverse(own.outdegree[b]),
                        Reverse(topo.level(b)),
                        b,
                    )
                })
                .collect();
            assert!(!ranked.is_empty(), "non-empty candidate without border blocks");
            ranked.sort_unstable();
            if let Some(t) = trace.as_deref_mut() {
                t.push(PareStep::Remove {
                    ranked: ranked
                        .iter()
                        .map(|&(rank, Reverse(i), Reverse(o), Reverse(level), b)| RankValue {
                            block: topo.id(b).clone(),
                            rank,
                            own_indegree: i,
                            own_outdegree: o,
                            level,
                        })
                        .collect(),
                });
            }
            cand.remove(ranked[0].4);
        }
    }
    for b in (0..n).filter(|&b| remaining[b]) {
        unassigned.insert(topo.id(b).clone());
    }
    Ok(PartitionResult {
        algorithm: Algorithm::Paredown,
        iface: cfg.iface,
        partitions,
        unassigned,
        elapsed: start.elapsed(),
        optimal: false,
        fit_tests,
    })
}
