use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, ensure, Context, Result};
use bsynth::bench::{records_csv, run_bench, summarize, summary_table, sweep_cases, BenchCase, BenchConfig};
use bsynth::codegen::{emit_c, synthesis_config, synthesize};
use bsynth::design_io::DesignIoError;
use bsynth::netlist::{compute_levels, inner_blocks, BlockClass};
use bsynth::partition::{aggregate, exhaustive, paredown, Algorithm, ExhaustiveOptions, FitConfig, PareDownMode};
use bsynth::randgen::{generate_design, generate_stimulus, GenParams};
use bsynth::sim::{check_expectations, run_simulation};
use bsynth::{fixtures, parse_design, parse_stimulus, serialize_design, Design, PartitionResult, ProgIface};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "bsynth", version, about = "Partition block networks onto i/o-limited programmable blocks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a design against the structural rules and print a summary.
    Validate { design: PathBuf },
    /// Simulate a design and write its trace as CSV.
    Simulate {
        design: PathBuf,
        #[arg(long)]
        stimulus: PathBuf,
        /// Trace CSV destination; standard output when omitted.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Partition the inner blocks and print the result as JSON.
    Partition {
        design: PathBuf,
        #[command(flatten)]
        part: PartArgs,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Partition, merge and rewrite; writes C sources and the new design.
    Synth {
        design: PathBuf,
        #[command(flatten)]
        part: PartArgs,
        #[arg(long, short, default_value = "synth_out")]
        out_dir: PathBuf,
    },
    /// Generate a random design.
    Gen {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of inner blocks.
        #[arg(long, short, default_value_t = 8)]
        n: usize,
        #[arg(long)]
        sensors: Option<usize>,
        #[arg(long)]
        outputs: Option<usize>,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Simulate a design and its synthesized rewrite and compare output traces.
    Equiv {
        design: PathBuf,
        /// Stimulus script; a random one is generated when omitted.
        #[arg(long)]
        stimulus: Option<PathBuf>,
        #[command(flatten)]
        part: PartArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run partitioners over a suite and report CSV plus a summary table.
    Bench(BenchArgs),
}

#[derive(Args, Clone)]
struct PartArgs {
    #[arg(long, default_value = "paredown")]
    algo: Algorithm,
    #[arg(long, short, default_value_t = 2)]
    inputs: usize,
    #[arg(long = "outputs", default_value_t = 2)]
    outputs: usize,
    /// Only accept partitions that keep the rewritten design acyclic.
    #[arg(long)]
    convex: bool,
    #[arg(long, value_enum, default_value_t = Mode::Resilient)]
    mode: Mode,
    /// Exhaustive search budget in seconds; 0 disables the limit.
    #[arg(long, default_value_t = 60.0)]
    budget: f64,
}

#[derive(Args)]
struct BenchArgs {
    /// Directory of .ebk designs. Without it, and without --sizes, the
    /// bundled designs are used.
    suite: Option<PathBuf>,
    /// Generated sweep over inner-block counts, e.g. `3-11` or `465`.
    #[arg(long, conflicts_with = "suite")]
    sizes: Option<String>,
    #[arg(long, default_value_t = 200)]
    per_size: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_delimiter = ',', default_value = "exhaustive,paredown")]
    algos: Vec<Algorithm>,
    #[arg(long, short, default_value_t = 2)]
    inputs: usize,
    #[arg(long = "outputs", default_value_t = 2)]
    outputs: usize,
    #[arg(long)]
    convex: bool,
    #[arg(long, value_enum, default_value_t = Mode::Resilient)]
    mode: Mode,
    #[arg(long, default_value_t = 60.0)]
    budget: f64,
    /// Worker threads; 0 picks one per core, 1 runs serially.
    #[arg(long, short, default_value_t = 0)]
    jobs: usize,
    /// Per-record CSV destination; standard output when omitted.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Resilient,
    Strict,
}

impl From<Mode> for PareDownMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Resilient => PareDownMode::Resilient,
            Mode::Strict => PareDownMode::Strict,
        }
    }
}

fn budget(secs: f64) -> Result<Option<Duration>> {
    ensure!(secs >= 0.0 && secs.is_finite(), "budget must be a non-negative number of seconds");
    Ok((secs > 0.0).then(|| Duration::from_secs_f64(secs)))
}

impl PartArgs {
    fn fit(&self) -> Result<FitConfig> {
        Ok(FitConfig::new(ProgIface::new(self.inputs, self.outputs)?).convex(self.convex))
    }

    fn run(&self, d: &Design, fit: FitConfig) -> Result<PartitionResult> {
        let r = match self.algo {
            Algorithm::Paredown => paredown(d, fit, self.mode.into())?,
            Algorithm::Aggregate => aggregate(d, fit)?,
            Algorithm::Exhaustive => {
                let opts = ExhaustiveOptions {
                    budget: budget(self.budget)?,
                    bound: true,
                };
                exhaustive(d, fit, &opts)?
            }
        };
        Ok(r)
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_design(path: &Path) -> Result<Design> {
    match parse_design(&read(path)?) {
        Ok(d) => Ok(d),
        Err(DesignIoError::Invalid(vs)) => {
            for v in &vs {
                eprintln!("violation: {v}");
            }
            bail!("{}: {} rule violation(s)", path.display(), vs.len())
        }
        Err(e) => Err(e).with_context(|| format!("parsing {}", path.display())),
    }
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_validate(path: &Path) -> Result<()> {
    let d = load_design(path)?;
    let levels = compute_levels(&d)?;
    let count = |c: BlockClass| d.blocks().values().filter(|k| k.class() == c).count();
    let depth = levels.level.values().max().copied().unwrap_or(0);
    println!(
        "{}: valid; {} sensors, {} outputs, {} compute, {} programmable, {} edges, depth {}",
        d.name,
        count(BlockClass::Sensor),
        count(BlockClass::Output),
        count(BlockClass::Compute),
        count(BlockClass::Programmable),
        d.edges().len(),
        depth
    );
    Ok(())
}

fn cmd_simulate(design: &Path, stimulus: &Path, output: Option<&Path>) -> Result<()> {
    let d = load_design(design)?;
    let s = parse_stimulus(&read(stimulus)?).with_context(|| format!("parsing {}", stimulus.display()))?;
    let trace = run_simulation(&d, &s)?;
    write_or_print(output, &trace.to_csv())?;
    let report = check_expectations(&trace, &s)?;
    let failed: Vec<_> = report.failures().collect();
    for f in &failed {
        let x = &f.expectation;
        eprintln!(
            "expectation failed: at {} {}.out{} expected {} got {}",
            x.time,
            x.port.block,
            x.port.port,
            u8::from(x.value),
            u8::from(f.actual)
        );
    }
    ensure!(failed.is_empty(), "{} of {} expectations failed", failed.len(), report.outcomes.len());
    if !report.outcomes.is_empty() {
        eprintln!("{} expectations passed", report.outcomes.len());
    }
    Ok(())
}

fn cmd_partition(design: &Path, part: &PartArgs, output: Option<&Path>) -> Result<()> {
    let d = load_design(design)?;
    let r = part.run(&d, part.fit()?)?;
    let mut json = r.to_json();
    json.push('\n');
    write_or_print(output, &json)
}

/// Partitions with convexity forced on and builds the rewritten design.
fn synth_design(d: &Design, part: &PartArgs) -> Result<(PartitionResult, bsynth::codegen::Synthesis)> {
    if !part.convex {
        eprintln!("note: synthesis always partitions with --convex");
    }
    let fit = synthesis_config(ProgIface::new(part.inputs, part.outputs)?);
    let r = part.run(d, fit)?;
    let s = synthesize(d, &r)?;
    Ok((r, s))
}

fn cmd_synth(design: &Path, part: &PartArgs, out_dir: &Path) -> Result<()> {
    let d = load_design(design)?;
    let (r, s) = synth_design(&d, part)?;
    fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    for p in &s.programs {
        fs::write(out_dir.join(format!("{}.c", p.id)), emit_c(p))?;
    }
    fs::write(out_dir.join(format!("{}.ebk", s.design.name)), serialize_design(&s.design))?;
    fs::write(out_dir.join("partition.json"), r.to_json() + "\n")?;
    println!(
        "{} inner blocks -> {} ({} programs, {} unassigned); wrote {}",
        inner_blocks(&d).len(),
        r.total_inner_after(),
        r.programmable(),
        r.unassigned.len(),
        out_dir.display()
    );
    Ok(())
}

fn cmd_gen(seed: u64, n: usize, sensors: Option<usize>, outputs: Option<usize>, output: Option<&Path>) -> Result<()> {
    let mut p = GenParams::new(seed, n);
    if let Some(k) = sensors {
        p = p.sensors(k);
    }
    if let Some(k) = outputs {
        p = p.outputs(k);
    }
    let d = generate_design(&p)?;
    write_or_print(output, &serialize_design(&d))
}

fn cmd_equiv(design: &Path, stimulus: Option<&Path>, part: &PartArgs, seed: u64) -> Result<()> {
    let d = load_design(design)?;
    let s = match stimulus {
        Some(p) => parse_stimulus(&read(p)?).with_context(|| format!("parsing {}", p.display()))?,
        None => {
            let n = d.blocks().len();
            generate_stimulus(&d, seed, 2 * n, 25)
        }
    };
    let (_, synth) = synth_design(&d, part)?;
    let a = run_simulation(&d, &s)?.output_trace();
    let b = run_simulation(&synth.design, &s)?.output_trace();
    if let Some(diff) = a.first_difference(&b) {
        bail!("traces differ: {diff}");
    }
    println!("traces identical ({} output records, {} programs)", a.records.len(), synth.programs.len());
    Ok(())
}

fn parse_sizes(spec: &str) -> Result<Vec<usize>> {
    let (lo, hi) = match spec.split_once('-') {
        Some((a, b)) => (a.trim().parse::<usize>()?, b.trim().parse::<usize>()?),
        None => {
            let n = spec.trim().parse::<usize>()?;
            (n, n)
        }
    };
    ensure!(lo >= 1 && lo <= hi, "bad size range `{spec}`");
    Ok((lo..=hi).collect())
}

fn suite_cases(dir: &Path) -> Result<Vec<BenchCase>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .map(|e| e.map(|e| e.path()))
        .collect::<Result<_, _>>()?;
    paths.retain(|p| p.extension().is_some_and(|e| e == "ebk"));
    paths.sort();
    paths
        .iter()
        .map(|p| {
            let name = p.file_stem().unwrap_or_default().to_string_lossy().into_owned();
            Ok(BenchCase {
                name,
                design: load_design(p)?,
            })
        })
        .collect()
}

fn cmd_bench(a: &BenchArgs) -> Result<()> {
    ensure!(!a.algos.is_empty(), "at least one algorithm is required");
    let cases = match (&a.suite, &a.sizes) {
        (Some(dir), _) => suite_cases(dir)?,
        (None, Some(spec)) => sweep_cases(parse_sizes(spec)?, a.per_size, a.seed),
        (None, None) => fixtures::all()
            .into_iter()
            .map(|(name, design)| BenchCase {
                name: name.to_string(),
                design,
            })
            .collect(),
    };
    ensure!(!cases.is_empty(), "empty suite");
    let mut cfg = BenchConfig::new(ProgIface::new(a.inputs, a.outputs)?);
    cfg.fit = cfg.fit.convex(a.convex);
    cfg.algorithms = a.algos.clone();
    cfg.exhaustive.budget = budget(a.budget)?;
    cfg.mode = a.mode.into();
    cfg.jobs = a.jobs;
    let runs = run_bench(&cases, &cfg)?;
    let csv = records_csv(&runs);
    match &a.csv {
        Some(p) => {
            fs::write(p, csv).with_context(|| format!("writing {}", p.display()))?;
            print!("{}", summary_table(&summarize(&runs)));
        }
        None => {
            print!("{csv}");
            eprint!("{}", summary_table(&summarize(&runs)));
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Validate { design } => cmd_validate(&design),
        Command::Simulate { design, stimulus, output } => cmd_simulate(&design, &stimulus, output.as_deref()),
        Command::Partition { design, part, output } => cmd_partition(&design, &part, output.as_deref()),
        Command::Synth { design, part, out_dir } => cmd_synth(&design, &part, &out_dir),
        Command::Gen {
            seed,
            n,
            sensors,
            outputs,
            output,
        } => cmd_gen(seed, n, sensors, outputs, output.as_deref()),
        Command::Equiv {
            design,
            stimulus,
            part,
            seed,
        } => cmd_equiv(&design, stimulus.as_deref(), &part, seed),
        Command::Bench(a) => cmd_bench(&a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
