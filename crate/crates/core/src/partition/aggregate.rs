//! Greedy aggregation baseline: grow a partition from a seed by adding
//! adjacent blocks while the fit predicate holds.

use std::collections::BTreeSet;
use std::time::Instant;

use super::{convex_given, fits_io, io_of, Committed, Algorithm, FitConfig, Partition, PartitionResult};
use crate::error::PartitionError;
use crate::netlist::{BlockClass, BlockId, Design, Topology};

pub fn aggregate(d: &Design, cfg: FitConfig) -> Result<PartitionResult, PartitionError> {
    let start = Instant::now();
    let topo = Topology::new(d)?;
    let n = topo.len();
    let mut visited = vec![false; n];
    for (b, v) in visited.iter_mut().enumerate() {
        *v = !topo.class(b).is_inner();
    }
    let fed_by_sensor = |b: usize| topo.preds(b).any(|s| topo.class(s) == BlockClass::Sensor);
    let mut fit_tests = 0u64;
    let mut partitions = Vec::new();
    let mut unassigned = BTreeSet::new();
    let mut committed = Committed::new(n);

    loop {
        // Seed: lowest-level unvisited block driven by a sensor, else the
        // lowest-level unvisited block at all.
        let candidates = topo.level_order().iter().copied().filter(|&b| !visited[b]);
        let seed = candidates
            .clone()
            .find(|&b| fed_by_sensor(b))
            .or_else(|| candidates.clone().next());
        let Some(seed) = seed else { break };

        let mut member = vec![false; n];
        member[seed] = true;
        visited[seed] = true;
        let mut size = 1;
        loop {
            let mut succ: BTreeSet<usize> = BTreeSet::new();
            let mut pred: BTreeSet<usize> = BTreeSet::new();
            for b in (0..n).filter(|&b| member[b]) {
                succ.extend(topo.succs(b).filter(|&t| !visited[t]));
                pred.extend(topo.preds(b).filter(|&s| !visited[s]));
            }
            let mut added = None;
            for c in succ.iter().chain(pred.difference(&succ)).copied() {
                member[c] = true;
                fit_tests += 1;
                let ok = fits_io(io_of(&topo, &member), cfg.iface)
                    && (!cfg.convex || convex_given(&topo, &member, Some(&committed)));
                if ok {
                    added = Some(c);
                    break;
                }
                member[c] = false;
            }
            match added {
                Some(c) => {
                    visited[c] = true;
                    size += 1;
                }
                None => break,
            }
        }
        let idx: Vec<usize> = (0..n).filter(|&b| member[b]).collect();
        let ids: Vec<BlockId> = idx.iter().map(|&b| topo.id(b).clone()).collect();
        if size >= 2 {
            committed.add(&idx);
            partitions.push(Partition::new(ids));
        } else {
            unassigned.extend(ids);
        }
    }
    Ok(PartitionResult {
        algorithm: Algorithm::Aggregate,
        iface: cfg.iface,
        partitions,
        unassigned,
        elapsed: start.elapsed(),
        optimal: false,
        fit_tests,
    })
}
