//! Block-network model: blocks, ports, connections, validation and levels.
//!
//! A [`Design`] is a plain value. Algorithms that need fast adjacency work on
//! a [`Topology`], an index built once from a validated design.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::codegen::MergedProgram;
use crate::error::NetlistError;

/// Identifier of a block. Restricted to `[A-Za-z0-9_]+` so that it can be
/// spliced into generated C identifiers.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct BlockId(String);

impl BlockId {
    pub fn new(id: impl Into<String>) -> Result<Self, NetlistError> {
        let id = id.into();
        if id.is_empty() || !id.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(NetlistError::BadIdentifier(id));
        }
        Ok(BlockId(id))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for BlockId {
    type Error = NetlistError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        BlockId::new(s)
    }
}

impl From<BlockId> for String {
    fn from(id: BlockId) -> String {
        id.0
    }
}

impl FromStr for BlockId {
    type Err = NetlistError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        BlockId::new(s)
    }
}

impl fmt::Display for BlockId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::borrow::Borrow<str> for BlockId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

/// Builds a [`BlockId`], panicking on an invalid identifier. Meant for tests
/// and fixtures.
pub fn id(s: &str) -> BlockId {
    BlockId::new(s).expect("valid block identifier")
}

/// Pre-defined compute functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Function {
    And2,
    Or2,
    Not,
    /// Two-input truth table; bit `k` of the mask is the output for input
    /// pattern `k = in1*2 + in0`.
    Lut2(u8),
    /// Three-input truth table indexed by `in2*4 + in1*2 + in0`.
    Lut3(u8),
    Toggle,
    /// `in0` is the trigger, `in1` the reset.
    Trip,
    Pulse(u64),
    Delay(u64),
}

/// Every function tag, in canonical order. Parameters are placeholders.
pub const FUNCTION_TAGS: [&str; 9] = [
    "and2", "or2", "not", "lut2", "lut3", "toggle", "trip", "pulse", "delay",
];

impl Function {
    pub fn tag(self) -> &'static str {
        match self {
            Function::And2 => "and2",
            Function::Or2 => "or2",
            Function::Not => "not",
            Function::Lut2(_) => "lut2",
            Function::Lut3(_) => "lut3",
            Function::Toggle => "toggle",
            Function::Trip => "trip",
            Function::Pulse(_) => "pulse",
            Function::Delay(_) => "delay",
        }
    }

    pub fn inputs(self) -> usize {
        match self {
            Function::Not | Function::Toggle | Function::Pulse(_) | Function::Delay(_) => 1,
            Function::And2 | Function::Or2 | Function::Lut2(_) | Function::Trip => 2,
            Function::Lut3(_) => 3,
        }
    }

    pub fn outputs(self) -> usize {
        1
    }

    pub fn is_sequential(self) -> bool {
        matches!(
            self,
            Function::Toggle | Function::Trip | Function::Pulse(_) | Function::Delay(_)
        )
    }

    /// Whether the function may schedule timers.
    pub fn uses_timer(self) -> bool {
        matches!(self, Function::Pulse(_) | Function::Delay(_))
    }
}

impl fmt::Display for Function {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Function::Lut2(m) | Function::Lut3(m) => write!(f, "{}:0x{:X}", self.tag(), m),
            Function::Pulse(d) | Function::Delay(d) => write!(f, "{}:{}", self.tag(), d),
            _ => f.write_str(self.tag()),
        }
    }
}

fn parse_int(s: &str) -> Option<u64> {
    match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16).ok(),
        None => s.parse().ok(),
    }
}

/// Truth-table masks additionally accept bare hex digits (`lut2:b`) when the
/// token is not a decimal number.
fn parse_mask(s: &str) -> Option<u64> {
    parse_int(s).or_else(|| {
        if !s.is_empty() && s.chars().all(|c| c.is_ascii_hexdigit()) {
            u64::from_str_radix(s, 16).ok()
        } else {
            None
        }
    })
}

impl FromStr for Function {
    type Err = NetlistError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (tag, param) = match s.split_once(':') {
            Some((t, p)) => (t, Some(p)),
            None => (s, None),
        };
        let unknown = || NetlistError::UnknownFunction(s.to_string());
        let num = |max: u64, parse: fn(&str) -> Option<u64>| -> Result<u64, NetlistError> {
            let p = param.ok_or_else(|| NetlistError::BadParameter(s.to_string()))?;
            match parse(p) {
                Some(v) if v <= max => Ok(v),
                _ => Err(NetlistError::BadParameter(s.to_string())),
            }
        };
        let no_param = |f: Function| -> Result<Function, NetlistError> {
            match param {
                None => Ok(f),
                Some(_) => Err(NetlistError::BadParameter(s.to_string())),
            }
        };
        match tag {
            "and2" => no_param(Function::And2),
            "or2" => no_param(Function::Or2),
            "not" => no_param(Function::Not),
            "toggle" => no_param(Function::Toggle),
            "trip" => no_param(Function::Trip),
            "lut2" => Ok(Function::Lut2(num(0xF, parse_mask)? as u8)),
            "lut3" => Ok(Function::Lut3(num(0xFF, parse_mask)? as u8)),
            "pulse" => Ok(Function::Pulse(num(u64::MAX, parse_int)?)),
            "delay" => Ok(Function::Delay(num(u64::MAX, parse_int)?)),
            _ => Err(unknown()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BlockClass {
    Sensor,
    Output,
    Compute,
    Programmable,
}

impl BlockClass {
    /// Inner blocks are neither primary inputs nor primary outputs.
    pub fn is_inner(self) -> bool {
        matches!(self, BlockClass::Compute | BlockClass::Programmable)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum BlockKind {
    /// A sensor with a free-form tag such as `contact` or `light`.
    Sensor(String),
    /// An output (LED, buzzer, relay...) with a free-form tag.
    Output(String),
    Compute(Function),
    /// A programmable block running the named program.
    Programmable(String),
}

impl BlockKind {
    pub fn class(&self) -> BlockClass {
        match self {
            BlockKind::Sensor(_) => BlockClass::Sensor,
            BlockKind::Output(_) => BlockClass::Output,
            BlockKind::Compute(_) => BlockClass::Compute,
            BlockKind::Programmable(_) => BlockClass::Programmable,
        }
    }
}

impl fmt::Display for BlockKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BlockKind::Sensor(t) => write!(f, "sensor.{t}"),
            BlockKind::Output(t) => write!(f, "output.{t}"),
            BlockKind::Compute(func) => write!(f, "compute.{func}"),
            BlockKind::Programmable(p) => write!(f, "prog:{p}"),
        }
    }
}

/// One port of one block. Whether it is an input or output port is implied by
/// where it appears in an [`Edge`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PortRef {
    pub block: BlockId,
    pub port: usize,
}

impl PortRef {
    pub fn new(block: BlockId, port: usize) -> Self {
        PortRef { block, port }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub src: PortRef,
    pub dst: PortRef,
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}.out{} -> {}.in{}",
            self.src.block, self.src.port, self.dst.block, self.dst.port
        )
    }
}

/// Programmable interface: how many inputs and outputs a programmable block
/// offers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProgIface {
    pub i: usize,
    pub o: usize,
}

impl ProgIface {
    pub fn new(i: usize, o: usize) -> Result<Self, NetlistError> {
        if i == 0 || o == 0 {
            return Err(NetlistError::BadIface { i, o });
        }
        Ok(ProgIface { i, o })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Design {
    pub name: String,
    blocks: BTreeMap<BlockId, BlockKind>,
    edges: BTreeSet<Edge>,
    programs: BTreeMap<String, MergedProgram>,
}

impl Design {
    pub fn new(name: impl Into<String>) -> Self {
        Design {
            name: name.into(),
            blocks: BTreeMap::new(),
            edges: BTreeSet::new(),
            programs: BTreeMap::new(),
        }
    }

    pub fn add_block(&mut self, id: BlockId, kind: BlockKind) -> Result<(), NetlistError> {
        if self.blocks.contains_key(&id) {
            return Err(NetlistError::DuplicateBlock(id));
        }
        self.blocks.insert(id, kind);
        Ok(())
    }

    /// Adds an edge without checking it; see [`validate_design`].
    pub fn connect(&mut self, src: PortRef, dst: PortRef) {
        self.edges.insert(Edge { src, dst });
    }

    pub fn add_program(&mut self, program: MergedProgram) -> Result<(), NetlistError> {
        if self.programs.contains_key(&program.id) {
            return Err(NetlistError::DuplicateProgram(program.id));
        }
        self.programs.insert(program.id.clone(), program);
        Ok(())
    }

    /// Removes a block together with every edge touching it.
    pub fn remove_block(&mut self, id: &BlockId) -> Option<BlockKind> {
        let kind = self.blocks.remove(id)?;
        self.edges.retain(|e| &e.src.block != id && &e.dst.block != id);
        Some(kind)
    }

    pub fn blocks(&self) -> &BTreeMap<BlockId, BlockKind> {
        &self.blocks
    }

    pub fn edges(&self) -> &BTreeSet<Edge> {
        &self.edges
    }

    pub fn programs(&self) -> &BTreeMap<String, MergedProgram> {
        &self.programs
    }

    pub fn kind(&self, id: &BlockId) -> Option<&BlockKind> {
        self.blocks.get(id)
    }

    pub fn program(&self, name: &str) -> Option<&MergedProgram> {
        self.programs.get(name)
    }

    /// `(inputs, outputs)` of a block, `None` for unknown blocks or
    /// programmable blocks whose program is missing.
    pub fn arity(&self, id: &BlockId) -> Option<(usize, usize)> {
        match self.blocks.get(id)? {
            BlockKind::Sensor(_) => Some((0, 1)),
            BlockKind::Output(_) => Some((1, 0)),
            BlockKind::Compute(f) => Some((f.inputs(), f.outputs())),
            BlockKind::Programmable(p) => {
                let prog = self.programs.get(p)?;
                Some((prog.inputs.len(), prog.outputs.len()))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rule {
    UnknownBlock,
    PortOutOfRange,
    MultiplyDrivenInput,
    UndrivenInput,
    Cycle,
    MissingProgram,
    UnusedProgram,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rule::UnknownBlock => "unknown block",
            Rule::PortOutOfRange => "port out of range",
            Rule::MultiplyDrivenInput => "multiply driven input",
            Rule::UndrivenInput => "undriven input",
            Rule::Cycle => "cycle",
            Rule::MissingProgram => "missing program",
            Rule::UnusedProgram => "unused program",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub rule: Rule,
    pub subject: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.rule, self.subject)
    }
}

/// Checks every structural rule of a design. An empty list means the design
/// is valid.
pub fn validate_design(d: &Design) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut violate = |rule, subject: String| out.push(Violation { rule, subject });

    for (bid, kind) in &d.blocks {
        if let BlockKind::Programmable(p) = kind {
            if !d.programs.contains_key(p) {
                violate(Rule::MissingProgram, format!("{bid} runs undefined program {p}"));
            }
        }
    }
    let used: BTreeSet<&str> = d
        .blocks
        .values()
        .filter_map(|k| match k {
            BlockKind::Programmable(p) => Some(p.as_str()),
            _ => None,
        })
        .collect();
    for p in d.programs.keys() {
        if !used.contains(p.as_str()) {
            violate(Rule::UnusedProgram, format!("program {p} is not instantiated"));
        }
    }

    let mut drivers: BTreeMap<&PortRef, usize> = BTreeMap::new();
    let mut structurally_ok = true;
    for e in &d.edges {
        let src_arity = d.arity(&e.src.block);
        let dst_arity = d.arity(&e.dst.block);
        for (p, arity) in [(&e.src, src_arity), (&e.dst, dst_arity)] {
            if !d.blocks.contains_key(&p.block) {
                violate(Rule::UnknownBlock, format!("{e} references {}", p.block));
                structurally_ok = false;
            } else if arity.is_none() {
                structurally_ok = false;
            }
        }
        if let Some((_, outs)) = src_arity {
            if e.src.port >= outs {
                violate(Rule::PortOutOfRange, format!("{e}: {} has {outs} outputs", e.src.block));
                structurally_ok = false;
            }
        }
        if let Some((ins, _)) = dst_arity {
            if e.dst.port >= ins {
                violate(Rule::PortOutOfRange, format!("{e}: {} has {ins} inputs", e.dst.block));
                structurally_ok = false;
            }
        }
        *drivers.entry(&e.dst).or_default() += 1;
    }
    for (port, n) in &drivers {
        if *n > 1 {
            violate(
                Rule::MultiplyDrivenInput,
                format!("{}.in{} has {n} drivers", port.block, port.port),
            );
        }
    }
    for bid in d.blocks.keys() {
        if let Some((ins, _)) = d.arity(bid) {
            for k in 0..ins {
                let p = PortRef::new(bid.clone(), k);
                if !drivers.contains_key(&p) {
                    violate(Rule::UndrivenInput, format!("{bid}.in{k}"));
                }
            }
        }
    }
    if structurally_ok {
        if let Err(cyc) = topo_order(d) {
            let names: Vec<String> = cyc.iter().map(|b| b.to_string()).collect();
            violate(Rule::Cycle, format!("through {}", names.join(", ")));
        }
    }
    out
}

/// Kahn's algorithm over block ids. On failure returns the blocks left on or
/// downstream of a cycle.
fn topo_order(d: &Design) -> Result<Vec<BlockId>, Vec<BlockId>> {
    let mut indeg: BTreeMap<&BlockId, usize> = d.blocks.keys().map(|b| (b, 0)).collect();
    let mut succ: BTreeMap<&BlockId, Vec<&BlockId>> = BTreeMap::new();
    for e in &d.edges {
        if let Some(n) = indeg.get_mut(&e.dst.block) {
            *n += 1;
        }
        succ.entry(&e.src.block).or_default().push(&e.dst.block);
    }
    let mut ready: VecDeque<&BlockId> = indeg
        .iter()
        .filter(|(_, n)| **n == 0)
        .map(|(b, _)| *b)
        .collect();
    let mut order = Vec::with_capacity(d.blocks.len());
    while let Some(b) = ready.pop_front() {
        order.push(b.clone());
        for s in succ.get(b).into_iter().flatten() {
            if let Some(n) = indeg.get_mut(*s) {
                *n -= 1;
                if *n == 0 {
                    ready.push_back(s);
                }
            }
        }
    }
    if order.len() == d.blocks.len() {
        Ok(order)
    } else {
        Err(indeg
            .into_iter()
            .filter(|(_, n)| *n > 0)
            .map(|(b, _)| b.clone())
            .collect())
    }
}

/// Longest-path distance from any sensor.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LevelMap {
    pub level: BTreeMap<BlockId, u32>,
}

impl LevelMap {
    pub fn get(&self, b: &BlockId) -> Option<u32> {
        self.level.get(b).copied()
    }
}

/// Sensors sit at level 0; every other driven block sits one above its
/// highest driver.
pub fn compute_levels(d: &Design) -> Result<LevelMap, NetlistError> {
    let order = topo_order(d).map_err(|_| NetlistError::Cyclic)?;
    let mut level: BTreeMap<BlockId, u32> = BTreeMap::new();
    let mut preds: BTreeMap<&BlockId, Vec<&BlockId>> = BTreeMap::new();
    for e in &d.edges {
        preds.entry(&e.dst.block).or_default().push(&e.src.block);
    }
    for b in order {
        let l = preds
            .get(&b)
            .into_iter()
            .flatten()
            .map(|p| level[*p] + 1)
            .max()
            .unwrap_or(0);
        level.insert(b, l);
    }
    Ok(LevelMap { level })
}

pub fn inner_blocks(d: &Design) -> BTreeSet<BlockId> {
    d.blocks
        .iter()
        .filter(|(_, k)| k.class().is_inner())
        .map(|(b, _)| b.clone())
        .collect()
}

/// Dense adjacency index over a valid design. Block indices follow the
/// lexicographic id order.
#[derive(Debug, Clone)]
pub struct Topology {
    ids: Vec<BlockId>,
    index: HashMap<BlockId, usize>,
    class: Vec<BlockClass>,
    /// Per block, per input port: the driving `(block, output port)`.
    drivers: Vec<Vec<(usize, usize)>>,
    /// Per block, per output port: consuming `(block, input port)` pairs.
    fanout: Vec<Vec<Vec<(usize, usize)>>>,
    levels: Vec<u32>,
    /// Blocks ordered by `(level, id)`.
    order: Vec<usize>,
}

impl Topology {
    pub fn new(d: &Design) -> Result<Self, NetlistError> {
        let violations = validate_design(d);
        if !violations.is_empty() {
            return Err(NetlistError::Invalid(violations));
        }
        let ids: Vec<BlockId> = d.blocks.keys().cloned().collect();
        let index: HashMap<BlockId, usize> =
            ids.iter().enumerate().map(|(i, b)| (b.clone(), i)).collect();
        let class = d.blocks.values().map(BlockKind::class).collect();
        let mut drivers: Vec<Vec<(usize, usize)>> = Vec::with_capacity(ids.len());
        let mut fanout: Vec<Vec<Vec<(usize, usize)>>> = Vec::with_capacity(ids.len());
        for b in &ids {
            let (ins, outs) = d.arity(b).expect("validated");
            drivers.push(vec![(usize::MAX, 0); ins]);
            fanout.push(vec![Vec::new(); outs]);
        }
        for e in &d.edges {
            let s = index[&e.src.block];
            let t = index[&e.dst.block];
            drivers[t][e.dst.port] = (s, e.src.port);
            fanout[s][e.src.port].push((t, e.dst.port));
        }
        let lm = compute_levels(d)?;
        let levels: Vec<u32> = ids.iter().map(|b| lm.level[b]).collect();
        let mut order: Vec<usize> = (0..ids.len()).collect();
        order.sort_by_key(|&i| (levels[i], i));
        Ok(Topology {
            ids,
            index,
            class,
            drivers,
            fanout,
            levels,
            order,
        })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn id(&self, i: usize) -> &BlockId {
        &self.ids[i]
    }

    pub fn index_of(&self, b: &BlockId) -> Option<usize> {
        self.index.get(b).copied()
    }

    pub fn class(&self, i: usize) -> BlockClass {
        self.class[i]
    }

    pub fn drivers(&self, i: usize) -> &[(usize, usize)] {
        &self.drivers[i]
    }

    pub fn fanout(&self, i: usize) -> &[Vec<(usize, usize)>] {
        &self.fanout[i]
    }

    pub fn level(&self, i: usize) -> u32 {
        self.levels[i]
    }

    /// Every block, ordered by non-decreasing level then id.
    pub fn level_order(&self) -> &[usize] {
        &self.order
    }

    /// Inner block indices in id order.
    pub fn inner(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.class[i].is_inner()).collect()
    }

    /// Distinct predecessor blocks.
    pub fn preds(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        let mut v: Vec<usize> = self.drivers[i].iter().map(|&(s, _)| s).collect();
        v.sort_unstable();
        v.dedup();
        v.into_iter()
    }

    /// Distinct successor blocks.
    pub fn succs(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        let mut v: Vec<usize> = self.fanout[i].iter().flatten().map(|&(t, _)| t).collect();
        v.sort_unstable();
        v.dedup();
        v.into_iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain() -> Design {
        let mut d = Design::new("chain");
        d.add_block(id("s"), BlockKind::Sensor("button".into())).unwrap();
        d.add_block(id("a"), BlockKind::Compute(Function::Not)).unwrap();
        d.add_block(id("b"), BlockKind::Compute(Function::Toggle)).unwrap();
        d.add_block(id("z"), BlockKind::Output("led".into())).unwrap();
        d.connect(PortRef::new(id("s"), 0), PortRef::new(id("a"), 0));
        d.connect(PortRef::new(id("a"), 0), PortRef::new(id("b"), 0));
        d.connect(PortRef::new(id("b"), 0), PortRef::new(id("z"), 0));
        d
    }

    fn compute(d: &mut Design, b: &str, f: Function) {
        d.add_block(id(b), BlockKind::Compute(f)).unwrap();
    }

    fn wire(d: &mut Design, s: &str, t: &str, port: usize) {
        d.connect(PortRef::new(id(s), 0), PortRef::new(id(t), port));
    }

    #[test]
    fn well_formed_chain_is_valid() {
        assert!(validate_design(&chain()).is_empty());
    }

    #[test]
    fn two_cycle_is_reported() {
        let mut d = Design::new("cyc");
        compute(&mut d, "a", Function::Not);
        compute(&mut d, "b", Function::Not);
        wire(&mut d, "a", "b", 0);
        wire(&mut d, "b", "a", 0);
        let v = validate_design(&d);
        assert!(v.iter().any(|v| v.rule == Rule::Cycle), "{v:?}");
    }

    #[test]
    fn multiply_driven_input_is_reported() {
        let mut d = chain();
        d.add_block(id("s2"), BlockKind::Sensor("x".into())).unwrap();
        wire(&mut d, "s2", "a", 0);
        let v = validate_design(&d);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].rule, Rule::MultiplyDrivenInput);
        assert!(v[0].subject.contains("a.in0"));
    }

    #[test]
    fn undriven_and_out_of_range_ports() {
        let mut d = Design::new("x");
        d.add_block(id("s"), BlockKind::Sensor("x".into())).unwrap();
        compute(&mut d, "g", Function::And2);
        wire(&mut d, "s", "g", 0);
        wire(&mut d, "s", "g", 5);
        let rules: Vec<Rule> = validate_design(&d).into_iter().map(|v| v.rule).collect();
        assert!(rules.contains(&Rule::UndrivenInput));
        assert!(rules.contains(&Rule::PortOutOfRange));
    }

    #[test]
    fn chain_levels() {
        let lm = compute_levels(&chain()).unwrap();
        assert_eq!(lm.get(&id("s")), Some(0));
        assert_eq!(lm.get(&id("a")), Some(1));
        assert_eq!(lm.get(&id("b")), Some(2));
    }

    #[test]
    fn level_takes_longest_driver() {
        let mut d = Design::new("m");
        for s in ["s1", "s3"] {
            d.add_block(id(s), BlockKind::Sensor("x".into())).unwrap();
        }
        compute(&mut d, "a", Function::Not);
        compute(&mut d, "c", Function::And2);
        wire(&mut d, "s1", "a", 0);
        wire(&mut d, "a", "c", 0);
        wire(&mut d, "s3", "c", 1);
        assert_eq!(compute_levels(&d).unwrap().get(&id("c")), Some(2));
    }

    #[test]
    fn diamond_with_detour_levels() {
        // s->a, s->b, a->c, b->c, a->d->c. Paths into c: s-a-c (2), s-b-c (2),
        // s-a-d-c (3).
        let mut d = Design::new("diamond");
        d.add_block(id("s"), BlockKind::Sensor("x".into())).unwrap();
        compute(&mut d, "a", Function::Not);
        compute(&mut d, "b", Function::Not);
        compute(&mut d, "d", Function::Not);
        compute(&mut d, "c", Function::Lut3(0x96));
        wire(&mut d, "s", "a", 0);
        wire(&mut d, "s", "b", 0);
        wire(&mut d, "a", "c", 0);
        wire(&mut d, "b", "c", 1);
        wire(&mut d, "a", "d", 0);
        wire(&mut d, "d", "c", 2);
        let lm = compute_levels(&d).unwrap();
        assert_eq!(lm.get(&id("c")), Some(3));
        assert_eq!(lm.get(&id("d")), Some(2));
    }

    #[test]
    fn inner_blocks_are_compute_only() {
        let inner = inner_blocks(&chain());
        assert_eq!(inner.into_iter().collect::<Vec<_>>(), vec![id("a"), id("b")]);
        let mut d = Design::new("io");
        d.add_block(id("s"), BlockKind::Sensor("x".into())).unwrap();
        d.add_block(id("z"), BlockKind::Output("x".into())).unwrap();
        wire(&mut d, "s", "z", 0);
        assert!(inner_blocks(&d).is_empty());
    }

    #[test]
    fn function_text_round_trip() {
        for s in ["and2", "lut2:0xB", "lut3:0x80", "pulse:3", "delay:0", "trip"] {
            let f: Function = s.parse().unwrap();
            assert_eq!(f.to_string(), s);
        }
        assert_eq!("lut2:11".parse::<Function>().unwrap(), Function::Lut2(0xB));
        assert!("lut2:0x1F".parse::<Function>().is_err());
        assert!("nand".parse::<Function>().is_err());
        assert!("and2:3".parse::<Function>().is_err());
    }

    #[test]
    fn bad_identifiers_are_rejected() {
        assert!(BlockId::new("a-b").is_err());
        assert!(BlockId::new("").is_err());
        assert!(BlockId::new("n_01").is_ok());
    }
}
