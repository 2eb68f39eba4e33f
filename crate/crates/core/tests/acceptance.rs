//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use bsynth::behavior::{behavior_catalog, eval_combinational, step_sequential, SeqState};
use bsynth::bench::{run_bench, summarize, sweep_cases, BenchConfig, DesignRun, SizeSummary};
use bsynth::codegen::{synthesis_config, synthesize};
use bsynth::fixtures;
use bsynth::netlist::{id, inner_blocks, BlockKind, Design, Function, PortRef, ProgIface};
use bsynth::partition::{
    exhaustive, paredown, paredown_traced, Algorithm, ExhaustiveOptions, FitConfig, PareDownMode, PareStep,
    PartitionResult,
};
use bsynth::randgen::{generate_design, generate_stimulus, GenParams};
use bsynth::sim::{check_expectations, run_simulation};
use bsynth::{parse_design, serialize_design};

type Outcome = Result<String, String>;

fn two() -> ProgIface {
    ProgIface::new(2, 2).unwrap()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

// ---------------------------------------------------------------- 1

fn podium_trace() -> Outcome {
    let d = fixtures::podium_timer_3();
    let start = Instant::now();
    let (pd, steps) = paredown_traced(&d, FitConfig::new(two()), PareDownMode::Resilient).map_err(|e| e.to_string())?;
    let ex = exhaustive(&d, FitConfig::new(two()), &ExhaustiveOptions::default()).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();

    let removals: Vec<_> = steps
        .iter()
        .filter_map(|s| match s {
            PareStep::Remove { ranked } => Some(ranked),
            _ => None,
        })
        .collect();
    let tests: Vec<_> = steps
        .iter()
        .filter_map(|s| match s {
            PareStep::Test { io, .. } => Some(*io),
            _ => None,
        })
        .collect();
    let border = |k: usize| -> BTreeSet<String> { removals[k].iter().map(|r| r.block.to_string()).collect() };
    let names = |v: &[&str]| -> BTreeSet<String> { v.iter().map(|s| s.to_string()).collect() };

    ensure(removals.len() == 5, || format!("{} removals", removals.len()))?;
    let order: Vec<&str> = removals.iter().map(|r| r[0].block.as_str()).collect();
    ensure(order == ["9", "8", "7", "6", "7"], || format!("removal order {order:?}"))?;
    ensure(border(0) == names(&["2", "8", "9"]), || format!("initial border {:?}", border(0)))?;
    ensure(removals[0][0].rank < removals[0][1].rank, || "node 9 not strictly least".into())?;
    ensure(border(1) == names(&["2", "8"]), || format!("second border {:?}", border(1)))?;
    ensure(
        removals[1][0].rank == removals[1][1].rank && removals[1][0].own_indegree > removals[1][1].own_indegree,
        || "2 and 8 do not tie with 8's indegree greater".into(),
    )?;
    ensure(tests[0].outdegree == 3 && tests[2].outdegree == 4, || {
        format!("output requirements {} then {}", tests[0].outdegree, tests[2].outdegree)
    })?;
    let parts: Vec<BTreeSet<String>> = pd
        .partitions
        .iter()
        .map(|p| p.members().iter().map(|b| b.to_string()).collect())
        .collect();
    ensure(parts == vec![names(&["1", "2", "3", "4", "5"]), names(&["6", "8", "9"])], || {
        format!("partitions {parts:?}")
    })?;
    ensure(pd.unassigned == [id("7")].into_iter().collect(), || format!("unassigned {:?}", pd.unassigned))?;
    ensure((pd.total_inner_after(), pd.programmable()) == (3, 2), || {
        format!("paredown total {} prog {}", pd.total_inner_after(), pd.programmable())
    })?;
    ensure(ex.optimal && (ex.total_inner_after(), ex.programmable()) == (3, 3), || {
        format!("exhaustive total {} prog {}", ex.total_inner_after(), ex.programmable())
    })?;
    ensure(elapsed < Duration::from_secs(1), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "removals 9,8,7,6,7; paredown 3/2, exhaustive 3/3 in {:.1} ms",
        elapsed.as_secs_f64() * 1e3
    ))
}

// ---------------------------------------------------------------- 2, 3, 4

const SWEEP_SIZES: std::ops::RangeInclusive<usize> = 3..=11;
const SWEEP_PER_SIZE: usize = 1000;

struct Sweep {
    cases: Vec<bsynth::bench::BenchCase>,
    runs: Vec<DesignRun>,
    summary: Vec<SizeSummary>,
    elapsed: Duration,
}

fn run_sweep() -> Sweep {
    let cases = sweep_cases(SWEEP_SIZES, SWEEP_PER_SIZE, 0);
    let mut cfg = BenchConfig::new(two());
    cfg.exhaustive.budget = Some(Duration::from_secs(20));
    let start = Instant::now();
    let runs = run_bench(&cases, &cfg).expect("generated designs partition");
    let elapsed = start.elapsed();
    let summary = summarize(&runs);
    Sweep {
        cases,
        runs,
        summary,
        elapsed,
    }
}

fn overhead(sweep: &Sweep) -> Outcome {
    let mut worst_blocks: f64 = 0.0;
    let mut worst_pct: f64 = 0.0;
    for s in &sweep.summary {
        ensure(s.designs >= 200, || format!("n={}: only {} designs", s.inner_original, s.designs))?;
        let (Some(o), Some(p)) = (s.block_overhead, s.percent_overhead) else {
            return Err(format!("n={}: exhaustive never finished", s.inner_original));
        };
        ensure(o <= 1.0, || format!("n={}: mean block overhead {o:.3} > 1.0", s.inner_original))?;
        ensure(p <= 20.0, || format!("n={}: mean overhead {p:.2}% > 20%", s.inner_original))?;
        worst_blocks = worst_blocks.max(o);
        worst_pct = worst_pct.max(p);
    }
    let time = |n: usize| {
        sweep
            .summary
            .iter()
            .find(|s| s.inner_original == n)
            .and_then(|s| s.exhaustive)
            .map(|m| m.elapsed_ms)
            .unwrap_or(f64::NAN)
    };
    let times: Vec<f64> = (6..=11).map(time).collect();
    ensure(times.windows(2).all(|w| w[1] > w[0]), || format!("exhaustive mean times not increasing: {times:?}"))?;
    let growth = times[5] / times[0];
    ensure(growth >= 100.0, || format!("exhaustive time grew only {growth:.1}x from n=6 to n=11"))?;
    Ok(format!(
        "{} designs, worst overhead {worst_blocks:.2} blocks / {worst_pct:.1}%, exhaustive n=6 {:.3} ms -> n=11 {:.1} ms ({growth:.0}x), sweep {:.1} s",
        sweep.runs.len(),
        times[0],
        times[5],
        sweep.elapsed.as_secs_f64()
    ))
}

fn dominance(sweep: &Sweep) -> Outcome {
    let mut checked = 0;
    for r in &sweep.runs {
        let (Some(ex), Some(pd)) = (r.record(Algorithm::Exhaustive), r.record(Algorithm::Paredown)) else {
            return Err(format!("{}: missing record", r.name));
        };
        if !ex.optimal {
            continue;
        }
        checked += 1;
        ensure(ex.covered >= pd.covered && ex.total_after <= pd.total_after, || {
            format!(
                "{}: exhaustive covered {} total {}, paredown covered {} total {}",
                r.name, ex.covered, ex.total_after, pd.covered, pd.total_after
            )
        })?;
    }
    Ok(format!("{checked} designs, zero violations"))
}

/// Unpruned enumeration of every assignment of inner blocks to
/// {unassigned, bin 1..n}, with its own net-counted fit test. Keeps the
/// first assignment with the fewest blocks after replacement, then the most
/// covered.
fn naive_optimum(d: &Design, iface: ProgIface) -> (usize, BTreeSet<BTreeSet<String>>) {
    let inner: Vec<String> = inner_blocks(d).iter().map(|b| b.to_string()).collect();
    let n = inner.len();
    let index: BTreeMap<&str, usize> = inner.iter().enumerate().map(|(k, b)| (b.as_str(), k)).collect();
    // net -> consumers, where a net is (source block, source port)
    let mut nets: BTreeMap<(String, usize), Vec<String>> = BTreeMap::new();
    for e in d.edges() {
        nets.entry((e.src.block.to_string(), e.src.port))
            .or_default()
            .push(e.dst.block.to_string());
    }
    let inside = |b: &str, mask: u32| index.get(b).is_some_and(|&k| mask >> k & 1 == 1);
    let fits: Vec<bool> = (0..1u32 << n)
        .map(|mask| {
            let mut ins = 0;
            let mut outs = 0;
            for ((src, _), consumers) in &nets {
                if inside(src, mask) {
                    outs += usize::from(consumers.iter().any(|c| !inside(c, mask)));
                } else {
                    ins += usize::from(consumers.iter().any(|c| inside(c, mask)));
                }
            }
            ins <= iface.i && outs <= iface.o
        })
        .collect();

    let mut best: Option<(usize, usize, Vec<usize>)> = None;
    let mut assign = vec![0usize; n];
    loop {
        let mut bins = vec![0u32; n + 1];
        for (k, &a) in assign.iter().enumerate() {
            bins[a] |= 1 << k;
        }
        let valid = bins[1..]
            .iter()
            .all(|&m| m == 0 || (m.count_ones() >= 2 && fits[m as usize]));
        if valid {
            let covered = n - bins[0].count_ones() as usize;
            let parts = bins[1..].iter().filter(|&&m| m != 0).count();
            let total = n - covered + parts;
            let better = match &best {
                None => true,
                Some((t, c, _)) => total < *t || (total == *t && covered > *c),
            };
            if better {
                best = Some((total, covered, assign.clone()));
            }
        }
        // next vector in lexicographic order
        let mut k = n;
        loop {
            if k == 0 {
                let (_, covered, a) = best.expect("all-unassigned is always valid");
                let mut groups: BTreeMap<usize, BTreeSet<String>> = BTreeMap::new();
                for (b, &bin) in a.iter().enumerate() {
                    if bin != 0 {
                        groups.entry(bin).or_default().insert(inner[b].clone());
                    }
                }
                return (covered, groups.into_values().collect());
            }
            k -= 1;
            if assign[k] < n {
                assign[k] += 1;
                break;
            }
            assign[k] = 0;
        }
    }
}

fn oracle(sweep: &Sweep) -> Outcome {
    let mut checked = 0;
    for (case, run) in sweep.cases.iter().zip(&sweep.runs) {
        if run.inner_original > 6 {
            continue;
        }
        let r = exhaustive(&case.design, FitConfig::new(two()), &ExhaustiveOptions::default())
            .map_err(|e| e.to_string())?;
        let got: BTreeSet<BTreeSet<String>> = r
            .partitions
            .iter()
            .map(|p| p.members().iter().map(|b| b.to_string()).collect())
            .collect();
        let (covered, parts) = naive_optimum(&case.design, two());
        ensure(r.optimal && r.covered() == covered && got == parts, || {
            format!("{}: pruned {} {:?}, naive {} {:?}", case.name, r.covered(), got, covered, parts)
        })?;
        checked += 1;
    }
    Ok(format!("{checked} designs with n <= 6, zero mismatches"))
}

// ---------------------------------------------------------------- 5

/// Every block fits alone (two distinct inputs) but no two blocks share
/// the same input pair, so every union needs at least three inputs.
fn adversarial_lut3(sensors: usize) -> Design {
    let mut d = Design::new("adversarial_lut3");
    let s: Vec<String> = (0..sensors).map(|k| format!("s{k:02}")).collect();
    for name in &s {
        d.add_block(id(name), BlockKind::Sensor("in".into())).unwrap();
    }
    let mut k = 0;
    for a in 0..sensors {
        for b in a + 1..sensors {
            let blk = format!("x{k:03}");
            let out = format!("z{k:03}");
            d.add_block(id(&blk), BlockKind::Compute(Function::Lut3(0xE8))).unwrap();
            d.add_block(id(&out), BlockKind::Output("out".into())).unwrap();
            d.connect(PortRef::new(id(&s[a]), 0), PortRef::new(id(&blk), 0));
            d.connect(PortRef::new(id(&s[a]), 0), PortRef::new(id(&blk), 1));
            d.connect(PortRef::new(id(&s[b]), 0), PortRef::new(id(&blk), 2));
            d.connect(PortRef::new(id(&blk), 0), PortRef::new(id(&out), 0));
            k += 1;
        }
    }
    d
}

fn scaling() -> Outcome {
    let big = generate_design(&GenParams::new(465, 465)).map_err(|e| e.to_string())?;
    ensure(inner_blocks(&big).len() == 465, || "generator size".into())?;
    let start = Instant::now();
    let r = paredown(&big, FitConfig::new(two()), PareDownMode::Resilient).map_err(|e| e.to_string())?;
    let big_time = start.elapsed();
    ensure(big_time < Duration::from_secs(80), || format!("465 blocks took {big_time:?}"))?;

    let adv = adversarial_lut3(10);
    let n = inner_blocks(&adv).len() as u64;
    let a = paredown(&adv, FitConfig::new(two()), PareDownMode::Resilient).map_err(|e| e.to_string())?;
    let bound = n * (n + 1) / 2;
    ensure(a.partitions.is_empty(), || "adversarial design produced a partition".into())?;
    ensure(a.fit_tests <= bound, || format!("{} fit tests > {bound}", a.fit_tests))?;

    let mut random_checked = 0;
    for seed in 0..50u64 {
        let d = generate_design(&GenParams::new(seed, 40).only(&["lut3"])).map_err(|e| e.to_string())?;
        let r = paredown(&d, FitConfig::new(two()), PareDownMode::Resilient).map_err(|e| e.to_string())?;
        ensure(r.fit_tests <= 40 * 41 / 2, || format!("lut3 seed {seed}: {} fit tests", r.fit_tests))?;
        random_checked += 1;
    }
    Ok(format!(
        "465 blocks in {:.1} ms ({} fit tests, total {}); adversarial n={n}: {} fit tests <= {bound}; {random_checked} random lut3 designs within bound",
        big_time.as_secs_f64() * 1e3,
        r.fit_tests,
        r.total_inner_after(),
        a.fit_tests
    ))
}

// ---------------------------------------------------------------- 6

fn equivalence() -> Outcome {
    let ifaces = [two(), ProgIface::new(3, 2).unwrap(), ProgIface::new(2, 3).unwrap(), ProgIface::new(4, 4).unwrap()];
    let (mut designs, mut scripts, mut programs) = (0, 0, 0);
    for seed in 0..1000u64 {
        let n = 3 + (seed % 18) as usize;
        let d = generate_design(&GenParams::new(seed, n)).map_err(|e| e.to_string())?;
        let iface = ifaces[(seed % 4) as usize];
        let r: PartitionResult =
            paredown(&d, synthesis_config(iface), PareDownMode::Resilient).map_err(|e| e.to_string())?;
        let syn = synthesize(&d, &r).map_err(|e| format!("seed {seed}: {e}"))?;
        programs += syn.programs.len();
        for k in 0..3 {
            let s = generate_stimulus(&d, seed * 31 + k, 2 * n, 25);
            let a = run_simulation(&d, &s).map_err(|e| e.to_string())?.output_trace();
            let b = run_simulation(&syn.design, &s).map_err(|e| e.to_string())?.output_trace();
            if let Some(diff) = a.first_difference(&b) {
                return Err(format!("seed {seed} stimulus {k}: {diff}"));
            }
            scripts += 1;
        }
        designs += 1;
    }
    Ok(format!("{designs} designs, {programs} programs, {scripts} stimulus runs, zero differences"))
}

// ---------------------------------------------------------------- 7

fn behavior_suite() -> Outcome {
    let mut checks = 0;
    for (width, masks) in [(2usize, 16u32), (3, 256)] {
        for mask in 0..masks {
            let def = behavior_catalog(&format!("lut{width}:{mask}")).map_err(|e| e.to_string())?;
            for pattern in 0..1u32 << width {
                let inputs: Vec<bool> = (0..width).map(|k| pattern >> k & 1 == 1).collect();
                let got = eval_combinational(&def, &inputs).map_err(|e| e.to_string())?;
                let want = mask >> pattern & 1 == 1;
                ensure(got == vec![want], || format!("lut{width}:{mask:#x} pattern {pattern:0width$b}"))?;
                checks += 1;
            }
        }
    }

    // Replays (time, inputs) steps and returns the output after each.
    let replay = |tag: &str, steps: &[(u64, &[bool])]| -> Result<Vec<bool>, String> {
        let def = behavior_catalog(tag).map_err(|e| e.to_string())?;
        let mut state = SeqState::init(&def, &vec![false; def.inputs]).map_err(|e| e.to_string())?;
        let mut outs = Vec::new();
        for &(t, inputs) in steps {
            let (next, out, _) = step_sequential(&def, &state, inputs, t).map_err(|e| e.to_string())?;
            state = next;
            outs.push(out[0]);
        }
        Ok(outs)
    };
    let toggle = replay("toggle", &[(1, &[true]), (2, &[false]), (3, &[true])])?;
    ensure(toggle == [true, true, false], || format!("toggle {toggle:?}"))?;
    let trip = replay("trip", &[(1, &[true, true])])?;
    ensure(trip == [false], || "trip reset priority".into())?;
    let trip = replay("trip", &[(1, &[true, false]), (2, &[false, false]), (3, &[false, true])])?;
    ensure(trip == [true, true, false], || format!("trip {trip:?}"))?;

    let pulse = behavior_catalog("pulse:3").map_err(|e| e.to_string())?;
    let state = SeqState::init(&pulse, &[false]).map_err(|e| e.to_string())?;
    let (mut state, out, timers) = step_sequential(&pulse, &state, &[true], 2).map_err(|e| e.to_string())?;
    ensure(out == [true] && timers.len() == 1 && timers[0].at == 5, || "pulse:3 at t=2".into())?;
    ensure(state.fire(timers[0].token) && !state.output(), || "pulse timer clears".into())?;

    let delay = behavior_catalog("delay:2").map_err(|e| e.to_string())?;
    let state = SeqState::init(&delay, &[false]).map_err(|e| e.to_string())?;
    let (state, out, t1) = step_sequential(&delay, &state, &[true], 1).map_err(|e| e.to_string())?;
    let (mut state, _, t2) = step_sequential(&delay, &state, &[false], 2).map_err(|e| e.to_string())?;
    ensure(out == [false] && t1[0].at == 3 && t2[0].at == 4, || "delay:2 timers".into())?;
    state.fire(t1[0].token);
    ensure(state.output(), || "delay passes 1 at t=3".into())?;
    state.fire(t2[0].token);
    ensure(!state.output(), || "delay passes 0 at t=4".into())?;

    let garage = fixtures::garage();
    let night = fixtures::night();
    let trace = run_simulation(&garage, &night).map_err(|e| e.to_string())?;
    let report = check_expectations(&trace, &night).map_err(|e| e.to_string())?;
    ensure(report.all_passed() && !night.expects.is_empty(), || "garage expectations".into())?;
    ensure(trace.to_csv().ends_with("10,z,out0,1\n"), || "garage trace does not end with led=1".into())?;
    Ok(format!(
        "{checks} lut truth-table checks, toggle/trip/pulse/delay scenarios, garage night {} expectations",
        report.outcomes.len()
    ))
}

// ---------------------------------------------------------------- 8

fn round_trip() -> Outcome {
    let mut with_programs = 0;
    for seed in 0..1000u64 {
        let n = 1 + (seed % 30) as usize;
        let d = generate_design(&GenParams::new(seed, n)).map_err(|e| e.to_string())?;
        let r = paredown(&d, synthesis_config(two()), PareDownMode::Resilient).map_err(|e| e.to_string())?;
        let rewritten = synthesize(&d, &r).map_err(|e| e.to_string())?.design;
        for (label, design) in [("original", &d), ("rewritten", &rewritten)] {
            let text = serialize_design(design);
            let back = parse_design(&text).map_err(|e| format!("seed {seed} {label}: {e}"))?;
            ensure(&back == design, || format!("seed {seed} {label}: parse(serialize(d)) != d"))?;
            ensure(serialize_design(&back) == text, || format!("seed {seed} {label}: text changed"))?;
        }
        if !rewritten.programs().is_empty() {
            with_programs += 1;
        }
    }
    ensure(with_programs > 0, || "no rewritten design carried a progdef".into())?;
    Ok(format!("1000 designs and their rewrites ({with_programs} with progdefs), zero violations"))
}

fn main() {
    let sweep = run_sweep();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("1 podium trace", Box::new(podium_trace)),
        ("2 overhead", Box::new(|| overhead(&sweep))),
        ("3 dominance", Box::new(|| dominance(&sweep))),
        ("4 exhaustive oracle", Box::new(|| oracle(&sweep))),
        ("5 paredown scaling", Box::new(scaling)),
        ("6 synthesis equivalence", Box::new(equivalence)),
        ("7 behavior and simulator", Box::new(behavior_suite)),
        ("8 format round-trip", Box::new(round_trip)),
    ];
    let mut failed = 0;
    for (name, check) in &criteria {
        match check() {
            Ok(detail) => println!("PASS criterion {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {name}: {why}");
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
