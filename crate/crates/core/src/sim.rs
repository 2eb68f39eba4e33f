//! Wave-based discrete-event simulation.
//!
//! At t=0 sensors take their initial values and every block is evaluated
//! once in level order; sequential blocks latch their inputs without seeing
//! an edge. After that, each wave pops every event pending at the current
//! time (sensor sets first, then timer expiries, each in block order),
//! applies them, and evaluates affected blocks in non-decreasing level
//! order, each at most once. Timers that expire at the current time are
//! handled by a later wave at the same time.
//!
//! The trace records, per time, the ports whose value differs from the end of
//! the previous time. Output blocks appear as if they had an `out0` port
//! mirroring their input.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::behavior::{eval_combinational, BehaviorDef, SeqState};
use crate::codegen::{MergedProgram, Operand};
use crate::design_io::{Expectation, StimulusScript};
use crate::error::SimError;
use crate::netlist::{BlockClass, BlockId, BlockKind, Design, Function, Topology};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TraceRecord {
    pub time: u64,
    /// Index into [`SimTrace::blocks`].
    pub block: usize,
    pub port: usize,
    pub value: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SimStats {
    pub waves: u64,
    pub evaluations: u64,
    /// Most evaluations of any one block within one wave. Wave semantics
    /// keep this at 1.
    pub max_evals_per_wave: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimTrace {
    pub horizon: u64,
    /// Block ids in index order.
    pub blocks: Vec<BlockId>,
    pub outputs: BTreeSet<usize>,
    /// Every port value after the initialization wave, as `(block, port)`.
    pub initial: BTreeMap<(usize, usize), bool>,
    /// Changes ordered by `(time, block id, port)`.
    pub records: Vec<TraceRecord>,
    /// Input value of every output block at the horizon.
    pub final_outputs: BTreeMap<BlockId, bool>,
    pub stats: SimStats,
}

/// The part of a trace visible at primary outputs, comparable across a
/// design and its synthesized version.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputTrace {
    pub initial: BTreeMap<BlockId, bool>,
    pub records: Vec<(u64, BlockId, bool)>,
    pub final_outputs: BTreeMap<BlockId, bool>,
}

impl OutputTrace {
    /// Human-readable description of the first difference, if any.
    pub fn first_difference(&self, other: &OutputTrace) -> Option<String> {
        if self.initial != other.initial {
            return Some(format!("initial values differ: {:?} vs {:?}", self.initial, other.initial));
        }
        for (k, (a, b)) in self.records.iter().zip(&other.records).enumerate() {
            if a != b {
                return Some(format!("record {k}: {a:?} vs {b:?}"));
            }
        }
        if self.records.len() != other.records.len() {
            return Some(format!("{} records vs {}", self.records.len(), other.records.len()));
        }
        if self.final_outputs != other.final_outputs {
            return Some("final output values differ".into());
        }
        None
    }
}

impl SimTrace {
    pub fn block_name(&self, index: usize) -> &BlockId {
        &self.blocks[index]
    }

    /// Value of a port at time `t`: its last change at or before `t`, else
    /// its initial value. `None` for unknown ports.
    pub fn value_at(&self, block: &BlockId, port: usize, t: u64) -> Option<bool> {
        let b = self.blocks.binary_search(block).ok()?;
        let mut v = *self.initial.get(&(b, port))?;
        for r in &self.records {
            if r.time > t {
                break;
            }
            if r.block == b && r.port == port {
                v = r.value;
            }
        }
        Some(v)
    }

    pub fn output_trace(&self) -> OutputTrace {
        OutputTrace {
            initial: self
                .initial
                .iter()
                .filter(|((b, _), _)| self.outputs.contains(b))
                .map(|(&(b, _), &v)| (self.blocks[b].clone(), v))
                .collect(),
            records: self
                .records
                .iter()
                .filter(|r| self.outputs.contains(&r.block))
                .map(|r| (r.time, self.blocks[r.block].clone(), r.value))
                .collect(),
            final_outputs: self.final_outputs.clone(),
        }
    }

    /// `time,block,port,value` rows in trace order, followed by the final
    /// output values at the horizon.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("time,block,port,value\n");
        for r in &self.records {
            writeln!(s, "{},{},out{},{}", r.time, self.blocks[r.block], r.port, u8::from(r.value)).unwrap();
        }
        for (b, v) in &self.final_outputs {
            writeln!(s, "{},{},out0,{}", self.horizon, b, u8::from(*v)).unwrap();
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpectationOutcome {
    pub expectation: Expectation,
    pub actual: bool,
}

impl ExpectationOutcome {
    pub fn passed(&self) -> bool {
        self.actual == self.expectation.value
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ExpectationReport {
    pub outcomes: Vec<ExpectationOutcome>,
}

impl ExpectationReport {
    pub fn all_passed(&self) -> bool {
        self.outcomes.iter().all(ExpectationOutcome::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ExpectationOutcome> {
        self.outcomes.iter().filter(|o| !o.passed())
    }
}

/// Compares every `expect` of the script against the trace.
pub fn check_expectations(trace: &SimTrace, s: &StimulusScript) -> Result<ExpectationReport, SimError> {
    let mut outcomes = Vec::with_capacity(s.expects.len());
    for x in &s.expects {
        let actual = trace
            .value_at(&x.port.block, x.port.port, x.time)
            .ok_or_else(|| SimError::UnknownPort(format!("{}.out{}", x.port.block, x.port.port)))?;
        outcomes.push(ExpectationOutcome {
            expectation: x.clone(),
            actual,
        });
    }
    Ok(ExpectationReport { outcomes })
}

/// Program with operands resolved to statement indices.
struct Compiled {
    defs: Vec<BehaviorDef>,
    args: Vec<Vec<Src>>,
    outputs: Vec<usize>,
}

#[derive(Clone, Copy)]
enum Src {
    In(usize),
    Var(usize),
}

impl Compiled {
    fn new(p: &MergedProgram) -> Self {
        let index = |b: &BlockId| p.statement_index(b).expect("checked program");
        Compiled {
            defs: p.statements.iter().map(|s| BehaviorDef::of(s.function)).collect(),
            args: p
                .statements
                .iter()
                .map(|s| {
                    s.args
                        .iter()
                        .map(|a| match a {
                            Operand::Input(k) => Src::In(*k),
                            Operand::Var(b) => Src::Var(index(b)),
                        })
                        .collect()
                })
                .collect(),
            outputs: p.outputs.iter().map(|o| index(&o.block)).collect(),
        }
    }
}

enum Node {
    Sensor,
    Output,
    Comb(BehaviorDef),
    Seq(BehaviorDef, SeqState),
    Prog {
        code: Box<Compiled>,
        vars: Vec<bool>,
        states: Vec<Option<SeqState>>,
    },
}

/// Event key; the derived order is the pop order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct Event {
    time: u64,
    /// 0 for sensor sets, 1 for timers.
    class: u8,
    block: usize,
    /// Directive index for sensor sets, statement index for timers.
    sub: u64,
    token: u64,
}

struct Sim<'a> {
    topo: &'a Topology,
    nodes: Vec<Node>,
    values: Vec<Vec<bool>>,
    queue: BTreeSet<Event>,
    sensor_values: Vec<bool>,
    horizon: u64,
    stats: SimStats,
    evals_this_wave: Vec<u32>,
    touched_this_wave: Vec<usize>,
}

fn step_seq(def: &BehaviorDef, st: &mut SeqState, inputs: &[bool], now: u64) -> (bool, Vec<(u64, u64)>) {
    let (out, timers) = st.step(def, inputs, now).expect("arity checked by validation");
    (out[0], timers.into_iter().map(|t| (t.at, t.token)).collect())
}

impl Sim<'_> {
    fn inputs(&self, b: usize) -> Vec<bool> {
        self.topo
            .drivers(b)
            .iter()
            .map(|&(s, p)| self.values[s][p])
            .collect()
    }

    fn schedule(&mut self, b: usize, sub: u64, timers: Vec<(u64, u64)>) {
        for (at, token) in timers {
            if at <= self.horizon {
                self.queue.insert(Event {
                    time: at,
                    class: 1,
                    block: b,
                    sub,
                    token,
                });
            }
        }
    }

    /// Runs every statement of a program; returns the new output values.
    fn run_program(&mut self, b: usize, inputs: &[bool], now: u64, init: bool) -> Vec<bool> {
        let Node::Prog { code, vars, states } = &mut self.nodes[b] else {
            unreachable!("programmable node")
        };
        let mut requests = Vec::new();
        for k in 0..code.defs.len() {
            let args: Vec<bool> = code.args[k]
                .iter()
                .map(|s| match *s {
                    Src::In(i) => inputs[i],
                    Src::Var(j) => vars[j],
                })
                .collect();
            let def = &code.defs[k];
            vars[k] = if def.function.is_sequential() {
                if init {
                    let st = SeqState::init(def, &args).expect("arity checked");
                    let out = st.output();
                    states[k] = Some(st);
                    out
                } else {
                    let st = states[k].as_mut().expect("initialized");
                    let (out, timers) = step_seq(def, st, &args, now);
                    requests.extend(timers.into_iter().map(|t| (k as u64, t)));
                    out
                }
            } else {
                eval_combinational(def, &args).expect("arity checked")[0]
            };
        }
        let outs = code.outputs.iter().map(|&j| vars[j]).collect();
        for (k, t) in requests {
            self.schedule(b, k, vec![t]);
        }
        outs
    }

    /// Evaluates block `b`; returns its new output values.
    fn evaluate(&mut self, b: usize, now: u64, init: bool) -> Vec<bool> {
        let inputs = self.inputs(b);
        match &mut self.nodes[b] {
            Node::Sensor => vec![self.sensor_values[b]],
            Node::Output => inputs,
            Node::Comb(def) => eval_combinational(def, &inputs).expect("arity checked"),
            Node::Seq(def, st) => {
                if init {
                    *st = SeqState::init(def, &inputs).expect("arity checked");
                    vec![st.output()]
                } else {
                    let (out, timers) = step_seq(def, st, &inputs, now);
                    self.schedule(b, 0, timers);
                    vec![out]
                }
            }
            Node::Prog { .. } => self.run_program(b, &inputs, now, init),
        }
    }

    fn count_eval(&mut self, b: usize) {
        if self.evals_this_wave[b] == 0 {
            self.touched_this_wave.push(b);
        }
        self.evals_this_wave[b] += 1;
        self.stats.evaluations += 1;
        self.stats.max_evals_per_wave = self.stats.max_evals_per_wave.max(self.evals_this_wave[b]);
    }

    fn end_wave(&mut self) {
        for b in self.touched_this_wave.drain(..) {
            self.evals_this_wave[b] = 0;
        }
        self.stats.waves += 1;
    }

    fn mark_consumers(&self, b: usize, port: usize, dirty: &mut BTreeSet<(u32, usize)>) {
        // Output blocks mirror their input on a port nobody consumes.
        for &(t, _) in self.topo.fanout(b).get(port).into_iter().flatten() {
            dirty.insert((self.topo.level(t), t));
        }
    }

    /// Writes new output values; marks consumers of changed ports dirty.
    fn set_outputs(&mut self, b: usize, outs: Vec<bool>, dirty: &mut BTreeSet<(u32, usize)>) {
        for (p, v) in outs.into_iter().enumerate() {
            if self.values[b][p] != v {
                self.values[b][p] = v;
                self.mark_consumers(b, p, dirty);
            }
        }
    }

    fn wave(&mut self, now: u64, batch: Vec<Event>, script: &StimulusScript, sensor_index: &[usize]) {
        let mut dirty: BTreeSet<(u32, usize)> = BTreeSet::new();
        for ev in batch {
            let b = ev.block;
            if ev.class == 0 {
                let set = &script.events[ev.sub as usize];
                let s = sensor_index[ev.sub as usize];
                self.sensor_values[s] = set.value;
                if self.values[s][0] != set.value {
                    self.values[s][0] = set.value;
                    self.mark_consumers(s, 0, &mut dirty);
                }
                continue;
            }
            match &mut self.nodes[b] {
                Node::Seq(_, st) => {
                    if st.fire(ev.token) {
                        let v = st.output();
                        self.set_outputs(b, vec![v], &mut dirty);
                    }
                }
                Node::Prog { states, .. } => {
                    let st = states[ev.sub as usize].as_mut().expect("initialized");
                    if st.fire(ev.token) {
                        dirty.insert((self.topo.level(b), b));
                    }
                }
                _ => unreachable!("timer on a block without timers"),
            }
        }
        while let Some((_, b)) = dirty.pop_first() {
            self.count_eval(b);
            let outs = self.evaluate(b, now, false);
            self.set_outputs(b, outs, &mut dirty);
        }
        self.end_wave();
    }
}

fn build_node(d: &Design, kind: &BlockKind) -> Node {
    match kind {
        BlockKind::Sensor(_) => Node::Sensor,
        BlockKind::Output(_) => Node::Output,
        BlockKind::Compute(f) => node_for(*f),
        BlockKind::Programmable(p) => {
            let prog = d.program(p).expect("validated");
            Node::Prog {
                code: Box::new(Compiled::new(prog)),
                vars: vec![false; prog.statements.len()],
                states: vec![None; prog.statements.len()],
            }
        }
    }
}

fn node_for(f: Function) -> Node {
    let def = BehaviorDef::of(f);
    if f.is_sequential() {
        Node::Seq(def, SeqState::default())
    } else {
        Node::Comb(def)
    }
}

/// Simulates `d` under `s` up to the script's horizon.
pub fn run_simulation(d: &Design, s: &StimulusScript) -> Result<SimTrace, SimError> {
    let topo = Topology::new(d)?;
    let n = topo.len();
    let horizon = s.horizon();
    if let Some(last) = s.last_event().filter(|&l| l > horizon) {
        return Err(SimError::HorizonBeforeEvent { horizon, last });
    }
    let sensor = |b: &BlockId| -> Result<usize, SimError> {
        topo.index_of(b)
            .filter(|&i| topo.class(i) == BlockClass::Sensor)
            .ok_or_else(|| SimError::NotASensor(b.to_string()))
    };
    let mut sensor_values = vec![false; n];
    for (b, v) in &s.inits {
        sensor_values[sensor(b)?] = *v;
    }
    let sensor_index: Vec<usize> = s.events.iter().map(|e| sensor(&e.sensor)).collect::<Result<_, _>>()?;
    for x in &s.expects {
        let known = topo.index_of(&x.port.block).is_some_and(|b| {
            let outs = topo.fanout(b).len();
            x.port.port < outs || (topo.class(b) == BlockClass::Output && x.port.port == 0)
        });
        if !known {
            return Err(SimError::UnknownPort(format!("{}.out{}", x.port.block, x.port.port)));
        }
    }

    let blocks: Vec<BlockId> = (0..n).map(|b| topo.id(b).clone()).collect();
    let nodes: Vec<Node> = blocks.iter().map(|b| build_node(d, &d.blocks()[b])).collect();
    let values: Vec<Vec<bool>> = (0..n)
        .map(|b| {
            let outs = topo.fanout(b).len();
            vec![false; if topo.class(b) == BlockClass::Output { 1 } else { outs }]
        })
        .collect();
    let mut queue = BTreeSet::new();
    for (k, e) in s.events.iter().enumerate() {
        queue.insert(Event {
            time: e.time,
            class: 0,
            block: sensor_index[k],
            sub: k as u64,
            token: 0,
        });
    }
    let mut sim = Sim {
        topo: &topo,
        nodes,
        values,
        queue,
        sensor_values,
        horizon,
        stats: SimStats::default(),
        evals_this_wave: vec![0; n],
        touched_this_wave: Vec::new(),
    };

    for &b in topo.level_order() {
        sim.count_eval(b);
        let outs = sim.evaluate(b, 0, true);
        sim.values[b] = outs;
    }
    sim.end_wave();
    let initial: BTreeMap<(usize, usize), bool> = (0..n)
        .flat_map(|b| sim.values[b].iter().enumerate().map(move |(p, &v)| ((b, p), v)).collect::<Vec<_>>())
        .collect();

    let mut records = Vec::new();
    let mut committed = sim.values.clone();
    while let Some(first) = sim.queue.first().copied() {
        let now = first.time;
        if now > horizon {
            break;
        }
        while sim.queue.first().is_some_and(|e| e.time == now) {
            let mut batch = Vec::new();
            while sim.queue.first().is_some_and(|e| e.time == now) {
                batch.push(sim.queue.pop_first().expect("non-empty"));
            }
            sim.wave(now, batch, s, &sensor_index);
        }
        for b in 0..n {
            for p in 0..sim.values[b].len() {
                if sim.values[b][p] != committed[b][p] {
                    committed[b][p] = sim.values[b][p];
                    records.push(TraceRecord {
                        time: now,
                        block: b,
                        port: p,
                        value: sim.values[b][p],
                    });
                }
            }
        }
    }

    let outputs: BTreeSet<usize> = (0..n).filter(|&b| topo.class(b) == BlockClass::Output).collect();
    let final_outputs = outputs.iter().map(|&b| (blocks[b].clone(), sim.values[b][0])).collect();
    Ok(SimTrace {
        horizon,
        blocks,
        outputs,
        initial,
        records,
        final_outputs,
        stats: sim.stats,
    })
}
