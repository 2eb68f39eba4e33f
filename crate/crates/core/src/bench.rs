//! Benchmark harness: run partitioners over a suite of designs and
//! summarize by inner-block count.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Duration;

use crate::error::PartitionError;
use crate::netlist::{inner_blocks, Design, ProgIface};
use crate::parallel::map_jobs;
use crate::partition::{
    aggregate, exhaustive, paredown, Algorithm, ExhaustiveOptions, FitConfig, PareDownMode, PartitionResult,
};
use crate::randgen::{generate_design, GenParams};

pub const CSV_HEADER: &str = "name,inner_original,algo,total_after,prog_count,elapsed_ms,optimal";

#[derive(Debug, Clone)]
pub struct BenchCase {
    pub name: String,
    pub design: Design,
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub fit: FitConfig,
    pub algorithms: Vec<Algorithm>,
    pub exhaustive: ExhaustiveOptions,
    pub mode: PareDownMode,
    /// Worker threads; 1 forces serial execution.
    pub jobs: usize,
}

impl BenchConfig {
    pub fn new(iface: ProgIface) -> Self {
        BenchConfig {
            fit: FitConfig::new(iface),
            algorithms: vec![Algorithm::Exhaustive, Algorithm::Paredown],
            exhaustive: ExhaustiveOptions::default(),
            mode: PareDownMode::default(),
            jobs: 0,
        }
    }
}

/// One algorithm on one design.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub name: String,
    pub inner_original: usize,
    pub algo: Algorithm,
    pub total_after: usize,
    pub prog_count: usize,
    pub covered: usize,
    pub elapsed: Duration,
    pub optimal: bool,
    pub fit_tests: u64,
}

impl BenchRecord {
    fn from_result(case: &BenchCase, inner: usize, r: &PartitionResult) -> Self {
        BenchRecord {
            name: case.name.clone(),
            inner_original: inner,
            algo: r.algorithm,
            total_after: r.total_inner_after(),
            prog_count: r.programmable(),
            covered: r.covered(),
            elapsed: r.elapsed,
            optimal: r.optimal,
            fit_tests: r.fit_tests,
        }
    }

    pub fn elapsed_ms(&self) -> f64 {
        self.elapsed.as_secs_f64() * 1e3
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{:.3},{}",
            self.name,
            self.inner_original,
            self.algo.name(),
            self.total_after,
            self.prog_count,
            self.elapsed_ms(),
            self.optimal
        )
    }
}

/// All records of one design.
#[derive(Debug, Clone)]
pub struct DesignRun {
    pub name: String,
    pub inner_original: usize,
    pub records: Vec<BenchRecord>,
}

impl DesignRun {
    pub fn record(&self, algo: Algorithm) -> Option<&BenchRecord> {
        self.records.iter().find(|r| r.algo == algo)
    }

    /// `total(paredown) - total(exhaustive)`, when exhaustive finished.
    pub fn block_overhead(&self) -> Option<i64> {
        let ex = self.record(Algorithm::Exhaustive).filter(|r| r.optimal)?;
        let pd = self.record(Algorithm::Paredown)?;
        Some(pd.total_after as i64 - ex.total_after as i64)
    }
}

pub fn run_algorithm(
    d: &Design,
    algo: Algorithm,
    cfg: &BenchConfig,
) -> Result<PartitionResult, PartitionError> {
    match algo {
        Algorithm::Paredown => paredown(d, cfg.fit, cfg.mode),
        Algorithm::Exhaustive => exhaustive(d, cfg.fit, &cfg.exhaustive),
        Algorithm::Aggregate => aggregate(d, cfg.fit),
    }
}

fn run_case(case: &BenchCase, cfg: &BenchConfig) -> Result<DesignRun, PartitionError> {
    let inner = inner_blocks(&case.design).len();
    let mut records = Vec::with_capacity(cfg.algorithms.len());
    for &algo in &cfg.algorithms {
        let r = run_algorithm(&case.design, algo, cfg)?;
        records.push(BenchRecord::from_result(case, inner, &r));
    }
    Ok(DesignRun {
        name: case.name.clone(),
        inner_original: inner,
        records,
    })
}

/// Runs every case, `cfg.jobs` at a time; results keep the case order.
pub fn run_bench(cases: &[BenchCase], cfg: &BenchConfig) -> Result<Vec<DesignRun>, PartitionError> {
    map_jobs(cases, cfg.jobs, |c| run_case(c, cfg)).into_iter().collect()
}

/// `per_size` generated designs for each inner count in `sizes`. Design `k`
/// of size `n` uses seed `base_seed + 1000 * n + k`.
pub fn sweep_cases(sizes: impl IntoIterator<Item = usize>, per_size: usize, base_seed: u64) -> Vec<BenchCase> {
    let mut out = Vec::new();
    for n in sizes {
        for k in 0..per_size {
            let seed = base_seed + 1000 * n as u64 + k as u64;
            let design = generate_design(&GenParams::new(seed, n)).expect("valid generator parameters");
            out.push(BenchCase {
                name: format!("gen_n{n}_s{seed}"),
                design,
            });
        }
    }
    out
}

pub fn records_csv(runs: &[DesignRun]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in runs.iter().flat_map(|r| &r.records) {
        s.push_str(&r.csv_row());
        s.push('\n');
    }
    s
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AlgoMeans {
    pub total: f64,
    pub prog: f64,
    pub elapsed_ms: f64,
    /// Designs the means are taken over.
    pub count: usize,
}

/// Means for one inner-block count.
#[derive(Debug, Clone, PartialEq)]
pub struct SizeSummary {
    pub inner_original: usize,
    pub designs: usize,
    /// Exhaustive means over designs where it finished within budget.
    pub exhaustive: Option<AlgoMeans>,
    pub paredown: Option<AlgoMeans>,
    pub aggregate: Option<AlgoMeans>,
    /// Mean of `total(paredown) - total(exhaustive)` over designs where
    /// exhaustive finished.
    pub block_overhead: Option<f64>,
    /// `block_overhead / exhaustive.total`, as a percentage.
    pub percent_overhead: Option<f64>,
}

fn means<'a>(records: impl Iterator<Item = &'a BenchRecord>) -> Option<AlgoMeans> {
    let mut m = AlgoMeans::default();
    for r in records {
        m.total += r.total_after as f64;
        m.prog += r.prog_count as f64;
        m.elapsed_ms += r.elapsed_ms();
        m.count += 1;
    }
    if m.count == 0 {
        return None;
    }
    let n = m.count as f64;
    m.total /= n;
    m.prog /= n;
    m.elapsed_ms /= n;
    Some(m)
}

pub fn summarize(runs: &[DesignRun]) -> Vec<SizeSummary> {
    let mut by_size: BTreeMap<usize, Vec<&DesignRun>> = BTreeMap::new();
    for r in runs {
        by_size.entry(r.inner_original).or_default().push(r);
    }
    by_size
        .into_iter()
        .map(|(n, group)| {
            let complete: Vec<&DesignRun> = group.iter().copied().filter(|r| r.block_overhead().is_some()).collect();
            let exhaustive = means(complete.iter().filter_map(|r| r.record(Algorithm::Exhaustive)));
            let overheads: Vec<i64> = complete.iter().filter_map(|r| r.block_overhead()).collect();
            let block_overhead =
                (!overheads.is_empty()).then(|| overheads.iter().sum::<i64>() as f64 / overheads.len() as f64);
            let percent_overhead = match (block_overhead, exhaustive) {
                (Some(o), Some(e)) if e.total > 0.0 => Some(100.0 * o / e.total),
                (Some(_), Some(_)) => Some(0.0),
                _ => None,
            };
            SizeSummary {
                inner_original: n,
                designs: group.len(),
                exhaustive,
                paredown: means(group.iter().filter_map(|r| r.record(Algorithm::Paredown))),
                aggregate: means(group.iter().filter_map(|r| r.record(Algorithm::Aggregate))),
                block_overhead,
                percent_overhead,
            }
        })
        .collect()
}

fn cell(v: Option<f64>, digits: usize) -> String {
    match v {
        Some(x) => format!("{x:.digits$}"),
        None => "--".into(),
    }
}

/// Plain-text table with one row per inner-block count.
pub fn summary_table(rows: &[SizeSummary]) -> String {
    let mut s = String::new();
    writeln!(
        s,
        "{:>6} {:>7} | {:>9} {:>9} {:>11} | {:>9} {:>9} {:>11} | {:>8} {:>6}",
        "inner", "designs", "ex.total", "ex.prog", "ex.ms", "pd.total", "pd.prog", "pd.ms", "overhead", "%"
    )
    .unwrap();
    for r in rows {
        let ex = r.exhaustive;
        let pd = r.paredown;
        writeln!(
            s,
            "{:>6} {:>7} | {:>9} {:>9} {:>11} | {:>9} {:>9} {:>11} | {:>8} {:>6}",
            r.inner_original,
            r.designs,
            cell(ex.map(|m| m.total), 2),
            cell(ex.map(|m| m.prog), 2),
            cell(ex.map(|m| m.elapsed_ms), 3),
            cell(pd.map(|m| m.total), 2),
            cell(pd.map(|m| m.prog), 2),
            cell(pd.map(|m| m.elapsed_ms), 3),
            cell(r.block_overhead, 2),
            cell(r.percent_overhead, 1),
        )
        .unwrap();
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two() -> ProgIface {
        ProgIface::new(2, 2).unwrap()
    }

    #[test]
    fn csv_header_is_stable() {
        assert_eq!(CSV_HEADER, "name,inner_original,algo,total_after,prog_count,elapsed_ms,optimal");
    }

    #[test]
    fn bundled_designs_have_no_overhead() {
        let cases: Vec<BenchCase> = crate::fixtures::all()
            .into_iter()
            .map(|(name, design)| BenchCase {
                name: name.into(),
                design,
            })
            .collect();
        let runs = run_bench(&cases, &BenchConfig::new(two())).unwrap();
        for r in &runs {
            assert_eq!(r.block_overhead(), Some(0), "{}", r.name);
        }
    }

    #[test]
    fn percent_overhead_uses_bucket_means() {
        let rec = |name: &str, algo, total| BenchRecord {
            name: name.into(),
            inner_original: 5,
            algo,
            total_after: total,
            prog_count: 1,
            covered: 0,
            elapsed: Duration::ZERO,
            optimal: true,
            fit_tests: 0,
        };
        let run = |name: &str, ex, pd| DesignRun {
            name: name.into(),
            inner_original: 5,
            records: vec![rec(name, Algorithm::Exhaustive, ex), rec(name, Algorithm::Paredown, pd)],
        };
        let s = summarize(&[run("a", 2, 2), run("b", 4, 6)]);
        assert_eq!(s[0].block_overhead, Some(1.0));
        // Mean overhead 1 over mean exhaustive total 3, not the mean of 0% and 50%.
        let pct = s[0].percent_overhead.unwrap();
        assert!((pct - 100.0 / 3.0).abs() < 1e-9, "{pct}");
    }

    #[test]
    fn serial_and_parallel_agree() {
        let cases = sweep_cases(3..=6, 4, 11);
        let mut cfg = BenchConfig::new(two());
        cfg.jobs = 1;
        let a = run_bench(&cases, &cfg).unwrap();
        cfg.jobs = 4;
        let b = run_bench(&cases, &cfg).unwrap();
        let key = |runs: &[DesignRun]| -> Vec<(String, usize, usize)> {
            runs.iter()
                .flat_map(|r| &r.records)
                .map(|r| (r.name.clone(), r.total_after, r.prog_count))
                .collect()
        };
        assert_eq!(key(&a), key(&b));
    }
}
