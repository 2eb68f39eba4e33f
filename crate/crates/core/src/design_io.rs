//! Line-oriented text formats: `.ebk` designs and `.stim` stimulus scripts.
//!
//! Design grammar (tokens are whitespace separated, `#` starts a comment):
//!
//! ```text
//! design <name>
//! block <id> sensor.<tag> | output.<tag> | compute.<func>[:<param>] | prog:<progdef>
//! connect <id>.out<k> -> <id>.in<k>
//! progdef <name>
//! input <k> <id>.out<p>
//! output <k> <id>.out<p>
//! stmt <level> <member> <func>[:<param>] <arg>...     # arg: x<k> | v_<member>
//! end
//! ```
//!
//! Stimulus grammar:
//!
//! ```text
//! init <sensor> <0|1>
//! at <t> set <sensor> <0|1>
//! run until <t>
//! expect <t> <block>.out<k> == <0|1>
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::codegen::{MergedProgram, Operand, Statement};
use crate::error::ParseError;
use crate::netlist::{validate_design, BlockId, BlockKind, Design, Function, PortRef, Violation};

#[derive(Debug, Error)]
pub enum DesignIoError {
    #[error("syntax error at {0}")]
    Syntax(#[from] ParseError),
    #[error("invalid design: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
}

struct Line<'a> {
    number: usize,
    tokens: Vec<(usize, &'a str)>,
}

impl<'a> Line<'a> {
    fn err(&self, token: usize, message: impl Into<String>) -> ParseError {
        let column = self.tokens.get(token).map(|t| t.0).unwrap_or(1);
        ParseError {
            line: self.number,
            column,
            message: message.into(),
        }
    }

    fn tok(&self, k: usize) -> Result<&'a str, ParseError> {
        self.tokens
            .get(k)
            .map(|t| t.1)
            .ok_or_else(|| self.err(self.tokens.len().saturating_sub(1), "unexpected end of line"))
    }

    fn expect_len(&self, n: usize) -> Result<(), ParseError> {
        if self.tokens.len() > n {
            return Err(self.err(n, format!("unexpected token {:?}", self.tokens[n].1)));
        }
        if self.tokens.len() < n {
            return Err(self.err(self.tokens.len().saturating_sub(1), "missing tokens"));
        }
        Ok(())
    }
}

fn lines(text: &str) -> impl Iterator<Item = Line<'_>> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let content = raw.split('#').next().unwrap_or("");
        let mut tokens = Vec::new();
        let mut start = None;
        for (pos, ch) in content.char_indices() {
            match (ch.is_whitespace(), start) {
                (false, None) => start = Some(pos),
                (true, Some(s)) => {
                    tokens.push((s + 1, &content[s..pos]));
                    start = None;
                }
                _ => {}
            }
        }
        if let Some(s) = start {
            tokens.push((s + 1, &content[s..]));
        }
        (!tokens.is_empty()).then_some(Line {
            number: i + 1,
            tokens,
        })
    })
}

fn block_id(line: &Line, k: usize) -> Result<BlockId, ParseError> {
    let t = line.tok(k)?;
    BlockId::new(t).map_err(|e| line.err(k, e.to_string()))
}

fn number(line: &Line, k: usize) -> Result<u64, ParseError> {
    let t = line.tok(k)?;
    t.parse().map_err(|_| line.err(k, format!("expected a non-negative integer, got {t:?}")))
}

fn bit(line: &Line, k: usize) -> Result<bool, ParseError> {
    match line.tok(k)? {
        "0" => Ok(false),
        "1" => Ok(true),
        t => Err(line.err(k, format!("expected 0 or 1, got {t:?}"))),
    }
}

/// Parses `<id>.<dir><k>`.
fn port(line: &Line, k: usize, dir: &str) -> Result<PortRef, ParseError> {
    let t = line.tok(k)?;
    let bad = || line.err(k, format!("expected <block>.{dir}<k>, got {t:?}"));
    let (b, p) = t.rsplit_once('.').ok_or_else(bad)?;
    let idx = p.strip_prefix(dir).ok_or_else(bad)?.parse().map_err(|_| bad())?;
    let b = BlockId::new(b).map_err(|e| line.err(k, e.to_string()))?;
    Ok(PortRef::new(b, idx))
}

fn function(line: &Line, k: usize) -> Result<Function, ParseError> {
    line.tok(k)?.parse().map_err(|e: crate::error::NetlistError| line.err(k, e.to_string()))
}

fn tag(line: &Line, k: usize, s: &str) -> Result<String, ParseError> {
    if s.is_empty() || !s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
        return Err(line.err(k, format!("bad tag {s:?}")));
    }
    Ok(s.to_string())
}

fn block_kind(line: &Line, k: usize) -> Result<BlockKind, ParseError> {
    let t = line.tok(k)?;
    if let Some(rest) = t.strip_prefix("sensor.") {
        Ok(BlockKind::Sensor(tag(line, k, rest)?))
    } else if let Some(rest) = t.strip_prefix("output.") {
        Ok(BlockKind::Output(tag(line, k, rest)?))
    } else if t.starts_with("compute.") {
        let f = t["compute.".len()..]
            .parse()
            .map_err(|e: crate::error::NetlistError| line.err(k, e.to_string()))?;
        Ok(BlockKind::Compute(f))
    } else if let Some(rest) = t.strip_prefix("prog:") {
        Ok(BlockKind::Programmable(tag(line, k, rest)?))
    } else {
        Err(line.err(k, format!("unknown block kind {t:?}")))
    }
}

#[derive(Default)]
struct ProgBuilder {
    id: String,
    inputs: BTreeMap<usize, PortRef>,
    outputs: BTreeMap<usize, PortRef>,
    statements: Vec<Statement>,
}

fn dense(line: &Line, map: BTreeMap<usize, PortRef>, what: &str) -> Result<Vec<PortRef>, ParseError> {
    for (expect, k) in map.keys().enumerate() {
        if *k != expect {
            return Err(line.err(0, format!("{what} indices must be 0..n without gaps")));
        }
    }
    Ok(map.into_values().collect())
}

/// Parses and validates a design.
pub fn parse_design(text: &str) -> Result<Design, DesignIoError> {
    let mut design: Option<Design> = None;
    let mut prog: Option<(ProgBuilder, usize)> = None;
    let mut last_line = 0;

    for line in lines(text) {
        last_line = line.number;
        let head = line.tok(0)?;
        if let Some((pb, _)) = prog.as_mut() {
            match head {
                "input" | "output" => {
                    line.expect_len(3)?;
                    let k = number(&line, 1)? as usize;
                    let p = port(&line, 2, "out")?;
                    let map = if head == "input" { &mut pb.inputs } else { &mut pb.outputs };
                    if map.insert(k, p).is_some() {
                        return Err(line.err(1, format!("duplicate {head} {k}")).into());
                    }
                }
                "stmt" => {
                    let level = number(&line, 1)? as u32;
                    let target = block_id(&line, 2)?;
                    let function = function(&line, 3)?;
                    let mut args = Vec::new();
                    for k in 4..line.tokens.len() {
                        let a = line.tokens[k].1;
                        let op = if let Some(v) = a.strip_prefix("v_") {
                            Operand::Var(BlockId::new(v).map_err(|e| line.err(k, e.to_string()))?)
                        } else if let Some(x) = a.strip_prefix('x') {
                            Operand::Input(x.parse().map_err(|_| line.err(k, format!("bad operand {a:?}")))?)
                        } else {
                            return Err(line.err(k, format!("bad operand {a:?}")).into());
                        };
                        args.push(op);
                    }
                    pb.statements.push(Statement {
                        level,
                        target,
                        function,
                        args,
                    });
                }
                "end" => {
                    line.expect_len(1)?;
                    let (pb, _) = prog.take().expect("inside progdef");
                    let program = MergedProgram {
                        id: pb.id,
                        inputs: dense(&line, pb.inputs, "input")?,
                        outputs: dense(&line, pb.outputs, "output")?,
                        statements: pb.statements,
                    };
                    if let Err(msg) = program.check() {
                        return Err(line.err(0, msg).into());
                    }
                    let d = design.as_mut().expect("progdef only after design");
                    d.add_program(program).map_err(|e| line.err(0, e.to_string()))?;
                }
                other => {
                    return Err(line.err(0, format!("unexpected {other:?} inside progdef")).into());
                }
            }
            continue;
        }
        if head == "design" {
            line.expect_len(2)?;
            if design.is_some() {
                return Err(line.err(0, "second design header").into());
            }
            let name = block_id(&line, 1)?;
            design = Some(Design::new(name.as_str()));
            continue;
        }
        let Some(d) = design.as_mut() else {
            return Err(line.err(0, "expected `design <name>` header").into());
        };
        match head {
            "block" => {
                line.expect_len(3)?;
                let b = block_id(&line, 1)?;
                let kind = block_kind(&line, 2)?;
                d.add_block(b, kind).map_err(|e| line.err(1, e.to_string()))?;
            }
            "connect" => {
                line.expect_len(4)?;
                let src = port(&line, 1, "out")?;
                if line.tok(2)? != "->" {
                    return Err(line.err(2, "expected `->`").into());
                }
                let dst = port(&line, 3, "in")?;
                d.connect(src, dst);
            }
            "progdef" => {
                line.expect_len(2)?;
                let name = tag(&line, 1, line.tok(1)?)?;
                prog = Some((
                    ProgBuilder {
                        id: name,
                        ..Default::default()
                    },
                    line.number,
                ));
            }
            other => return Err(line.err(0, format!("unknown directive {other:?}")).into()),
        }
    }
    if let Some((_, start)) = prog {
        return Err(ParseError {
            line: start,
            column: 1,
            message: "progdef without `end`".into(),
        }
        .into());
    }
    let d = design.ok_or(ParseError {
        line: last_line.max(1),
        column: 1,
        message: "missing `design <name>` header".into(),
    })?;
    let violations = validate_design(&d);
    if !violations.is_empty() {
        return Err(DesignIoError::Invalid(violations));
    }
    Ok(d)
}

fn operand(op: &Operand) -> String {
    match op {
        Operand::Input(k) => format!("x{k}"),
        Operand::Var(b) => format!("v_{b}"),
    }
}

/// Canonical text: blocks by id, edges by (source, destination), then
/// program definitions by name.
pub fn serialize_design(d: &Design) -> String {
    let mut s = String::new();
    writeln!(s, "design {}", d.name).unwrap();
    for (b, kind) in d.blocks() {
        writeln!(s, "block {b} {kind}").unwrap();
    }
    for e in d.edges() {
        writeln!(s, "connect {e}").unwrap();
    }
    for p in d.programs().values() {
        writeln!(s, "progdef {}", p.id).unwrap();
        for (k, src) in p.inputs.iter().enumerate() {
            writeln!(s, "input {k} {}.out{}", src.block, src.port).unwrap();
        }
        for (k, src) in p.outputs.iter().enumerate() {
            writeln!(s, "output {k} {}.out{}", src.block, src.port).unwrap();
        }
        for st in &p.statements {
            write!(s, "stmt {} {} {}", st.level, st.target, st.function).unwrap();
            for a in &st.args {
                write!(s, " {}", operand(a)).unwrap();
            }
            s.push('\n');
        }
        s.push_str("end\n");
    }
    s
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetEvent {
    pub time: u64,
    pub sensor: BlockId,
    pub value: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expectation {
    pub time: u64,
    pub port: PortRef,
    pub value: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct StimulusScript {
    /// Initial sensor values; sensors not listed start at 0.
    pub inits: Vec<(BlockId, bool)>,
    pub events: Vec<SetEvent>,
    pub expects: Vec<Expectation>,
    /// Explicit `run until` horizon.
    pub until: Option<u64>,
}

impl StimulusScript {
    /// Simulation end time: the explicit horizon, else the latest event or
    /// expectation time.
    pub fn horizon(&self) -> u64 {
        self.until.unwrap_or_else(|| {
            let e = self.events.iter().map(|e| e.time);
            let x = self.expects.iter().map(|e| e.time);
            e.chain(x).max().unwrap_or(0)
        })
    }

    pub fn last_event(&self) -> Option<u64> {
        self.events.iter().map(|e| e.time).max()
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (b, v) in &self.inits {
            writeln!(s, "init {b} {}", u8::from(*v)).unwrap();
        }
        for e in &self.events {
            writeln!(s, "at {} set {} {}", e.time, e.sensor, u8::from(e.value)).unwrap();
        }
        for x in &self.expects {
            writeln!(s, "expect {} {}.out{} == {}", x.time, x.port.block, x.port.port, u8::from(x.value))
                .unwrap();
        }
        if let Some(t) = self.until {
            writeln!(s, "run until {t}").unwrap();
        }
        s
    }
}

pub fn parse_stimulus(text: &str) -> Result<StimulusScript, ParseError> {
    let mut script = StimulusScript::default();
    let mut last_time: BTreeMap<BlockId, u64> = BTreeMap::new();
    let mut until_line = None;
    for line in lines(text) {
        match line.tok(0)? {
            "init" => {
                line.expect_len(3)?;
                script.inits.push((block_id(&line, 1)?, bit(&line, 2)?));
            }
            "at" => {
                line.expect_len(5)?;
                let time = number(&line, 1)?;
                if line.tok(2)? != "set" {
                    return Err(line.err(2, "expected `set`"));
                }
                let sensor = block_id(&line, 3)?;
                let value = bit(&line, 4)?;
                if let Some(&prev) = last_time.get(&sensor) {
                    if time < prev {
                        return Err(line.err(
                            1,
                            format!("decreasing time for sensor {sensor}: {time} after {prev}"),
                        ));
                    }
                }
                last_time.insert(sensor.clone(), time);
                script.events.push(SetEvent { time, sensor, value });
            }
            "run" => {
                line.expect_len(3)?;
                if line.tok(1)? != "until" {
                    return Err(line.err(1, "expected `until`"));
                }
                if script.until.is_some() {
                    return Err(line.err(0, "duplicate `run until`"));
                }
                script.until = Some(number(&line, 2)?);
                until_line = Some(line.number);
            }
            "expect" => {
                line.expect_len(5)?;
                let time = number(&line, 1)?;
                let p = port(&line, 2, "out")?;
                if line.tok(3)? != "==" {
                    return Err(line.err(3, "expected `==`"));
                }
                script.expects.push(Expectation {
                    time,
                    port: p,
                    value: bit(&line, 4)?,
                });
            }
            other => return Err(line.err(0, format!("unknown directive {other:?}"))),
        }
    }
    if let (Some(until), Some(line)) = (script.until, until_line) {
        let last = script
            .events
            .iter()
            .map(|e| e.time)
            .chain(script.expects.iter().map(|x| x.time))
            .max();
        if let Some(last) = last.filter(|&l| l > until) {
            return Err(ParseError {
                line,
                column: 1,
                message: format!("horizon {until} is before the last event at {last}"),
            });
        }
    }
    Ok(script)
}
