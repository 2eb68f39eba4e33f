//! Merging a partition into one program, rewriting the design around the
//! resulting programmable blocks, and emitting C text.
//!
//! Variables are namespaced by member id: `v_<id>` holds a member's output,
//! `s_<id>` its stored state bit and `l_<id>_<k>` its latched input `k`.
//! External inputs are `x<k>` in program text and `input[k]` in C.

mod c;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

pub use c::emit_c;

use crate::error::{CodegenError, NetlistError, PartitionError};
use crate::netlist::{compute_levels, BlockId, BlockKind, Design, Function, LevelMap, PortRef, ProgIface};
use crate::partition::{is_convex, partition_io, FitConfig, Partition, PartitionResult};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Operand {
    /// External input `k` of the programmable block.
    Input(usize),
    /// Output of an earlier statement.
    Var(BlockId),
}

impl fmt::Display for Operand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Operand::Input(k) => write!(f, "x{k}"),
            Operand::Var(b) => write!(f, "v_{b}"),
        }
    }
}

/// One member block's behavior inside a merged program.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Statement {
    /// Level of the member in the original design.
    pub level: u32,
    /// The member block; the statement assigns `v_<target>`.
    pub target: BlockId,
    pub function: Function,
    pub args: Vec<Operand>,
}

impl Statement {
    /// State slot name, for sequential functions.
    pub fn state_slot(&self) -> Option<String> {
        self.function.is_sequential().then(|| format!("s_{}", self.target))
    }
}

impl fmt::Display for Statement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let args: Vec<String> = self.args.iter().map(Operand::to_string).collect();
        write!(f, "v_{} = {}({})", self.target, self.function, args.join(", "))
    }
}

/// Level-ordered statement list for one programmable block.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MergedProgram {
    pub id: String,
    /// External source port behind each input index.
    pub inputs: Vec<PortRef>,
    /// Member port behind each output index.
    pub outputs: Vec<PortRef>,
    pub statements: Vec<Statement>,
}

impl MergedProgram {
    pub fn iface(&self) -> (usize, usize) {
        (self.inputs.len(), self.outputs.len())
    }

    /// `(slot name, initial value)` for every sequential member.
    pub fn state_slots(&self) -> Vec<(String, bool)> {
        self.statements
            .iter()
            .filter_map(|s| s.state_slot().map(|n| (n, false)))
            .collect()
    }

    pub fn statement_index(&self, target: &BlockId) -> Option<usize> {
        self.statements.iter().position(|s| &s.target == target)
    }

    /// Checks that the program is self-consistent: levels never decrease,
    /// every member is assigned once, arguments only read inputs or earlier
    /// statements, and every output names a statement.
    pub fn check(&self) -> Result<(), String> {
        if self.statements.is_empty() {
            return Err(format!("program {} has no statements", self.id));
        }
        let mut assigned: BTreeSet<&BlockId> = BTreeSet::new();
        let mut prev: Option<&Statement> = None;
        for st in &self.statements {
            if let Some(p) = prev {
                if (st.level, &st.target) <= (p.level, &p.target) {
                    return Err(format!(
                        "statement for {} is out of (level, id) order after {}",
                        st.target, p.target
                    ));
                }
            }
            if st.args.len() != st.function.inputs() {
                return Err(format!(
                    "{} takes {} arguments, statement for {} has {}",
                    st.function.tag(),
                    st.function.inputs(),
                    st.target,
                    st.args.len()
                ));
            }
            for a in &st.args {
                match a {
                    Operand::Input(k) if *k >= self.inputs.len() => {
                        return Err(format!("statement for {} reads x{k}, program has {} inputs", st.target, self.inputs.len()));
                    }
                    Operand::Var(v) if !assigned.contains(v) => {
                        return Err(format!("statement for {} reads v_{v} before it is assigned", st.target));
                    }
                    _ => {}
                }
            }
            if !assigned.insert(&st.target) {
                return Err(format!("{} is assigned twice", st.target));
            }
            prev = Some(st);
        }
        for out in &self.outputs {
            match self.statements.iter().find(|s| s.target == out.block) {
                Some(s) if out.port < s.function.outputs() => {}
                _ => return Err(format!("output {}.out{} is not produced by the program", out.block, out.port)),
            }
        }
        let member: BTreeSet<&BlockId> = self.statements.iter().map(|s| &s.target).collect();
        for i in &self.inputs {
            if member.contains(&i.block) {
                return Err(format!("input {}.out{} is produced inside the program", i.block, i.port));
            }
        }
        Ok(())
    }
}

/// Merges the members of `p` into one program called `id`.
///
/// Refuses partitions that are too small, do not fit `iface`, contain a
/// programmable block, or are not convex.
pub fn merge_partition(
    d: &Design,
    p: &Partition,
    levels: &LevelMap,
    iface: ProgIface,
    id: &str,
) -> Result<MergedProgram, CodegenError> {
    if p.len() < 2 {
        return Err(CodegenError::TooSmall);
    }
    let mut functions: BTreeMap<&BlockId, Function> = BTreeMap::new();
    for b in p.members() {
        match d.kind(b) {
            Some(BlockKind::Compute(f)) => {
                functions.insert(b, *f);
            }
            Some(BlockKind::Programmable(_)) => return Err(CodegenError::NestedProgram(b.clone())),
            _ => return Err(PartitionError::NotInner(b.clone()).into()),
        }
    }
    let io = partition_io(d, p)?;
    if io.indegree > iface.i || io.outdegree > iface.o {
        return Err(CodegenError::DoesNotFit {
            members: p.to_string(),
            indegree: io.indegree,
            outdegree: io.outdegree,
            i: iface.i,
            o: iface.o,
        });
    }
    if !is_convex(d, p)? {
        return Err(CodegenError::NonConvex(p.to_string()));
    }

    let mut driver: BTreeMap<(&BlockId, usize), &PortRef> = BTreeMap::new();
    let mut inputs: BTreeSet<&PortRef> = BTreeSet::new();
    let mut outputs: BTreeSet<&PortRef> = BTreeSet::new();
    for e in d.edges() {
        let src_in = p.contains(&e.src.block);
        let dst_in = p.contains(&e.dst.block);
        if dst_in {
            driver.insert((&e.dst.block, e.dst.port), &e.src);
            if !src_in {
                inputs.insert(&e.src);
            }
        }
        if src_in && !dst_in {
            outputs.insert(&e.src);
        }
    }
    let inputs: Vec<PortRef> = inputs.into_iter().cloned().collect();
    let input_index: BTreeMap<&PortRef, usize> = inputs.iter().enumerate().map(|(k, p)| (p, k)).collect();

    let mut order: Vec<(u32, &BlockId)> = p
        .members()
        .iter()
        .map(|b| (levels.get(b).expect("levels cover every block"), b))
        .collect();
    order.sort();
    let statements = order
        .into_iter()
        .map(|(level, b)| {
            let f = functions[b];
            let args = (0..f.inputs())
                .map(|k| {
                    let src = driver[&(b, k)];
                    if p.contains(&src.block) {
                        Operand::Var(src.block.clone())
                    } else {
                        Operand::Input(input_index[src])
                    }
                })
                .collect();
            Statement {
                level,
                target: b.clone(),
                function: f,
                args,
            }
        })
        .collect();
    let program = MergedProgram {
        id: id.to_string(),
        inputs,
        outputs: outputs.into_iter().cloned().collect(),
        statements,
    };
    debug_assert_eq!(program.check(), Ok(()));
    Ok(program)
}

/// Picks `P1`, `P2`, ... skipping names already used by blocks or programs.
fn fresh_ids(d: &Design, count: usize) -> Vec<String> {
    let mut out = Vec::with_capacity(count);
    let mut k = 1;
    while out.len() < count {
        let name = format!("P{k}");
        k += 1;
        if d.blocks().contains_key(name.as_str()) || d.programs().contains_key(&name) {
            continue;
        }
        out.push(name);
    }
    out
}

/// Merges every partition of `result`, naming programs `P1`, `P2`, ... in
/// partition order.
pub fn merge_all(d: &Design, result: &PartitionResult) -> Result<Vec<MergedProgram>, CodegenError> {
    let levels = compute_levels(d)?;
    let names = fresh_ids(d, result.partitions.len());
    result
        .partitions
        .iter()
        .zip(&names)
        .map(|(p, name)| merge_partition(d, p, &levels, result.iface, name))
        .collect()
}

/// Replaces each partition by a programmable block running its program.
/// The block takes the program's id. Unassigned blocks are untouched.
pub fn rewrite_design(
    d: &Design,
    result: &PartitionResult,
    programs: &[MergedProgram],
) -> Result<Design, CodegenError> {
    if programs.len() != result.partitions.len() {
        return Err(CodegenError::Mismatch {
            programs: programs.len(),
            partitions: result.partitions.len(),
        });
    }
    // Member output port -> programmable block output port.
    let mut exported: BTreeMap<&PortRef, PortRef> = BTreeMap::new();
    let mut owner: BTreeMap<&BlockId, usize> = BTreeMap::new();
    for (k, (part, prog)) in result.partitions.iter().zip(programs).enumerate() {
        let pid = BlockId::new(prog.id.as_str())?;
        for (j, out) in prog.outputs.iter().enumerate() {
            exported.insert(out, PortRef::new(pid.clone(), j));
        }
        for b in part.members() {
            if owner.insert(b, k).is_some() {
                return Err(PartitionError::NotInner(b.clone()).into());
            }
        }
        let members: BTreeSet<&BlockId> = prog.statements.iter().map(|s| &s.target).collect();
        if members != part.members().iter().collect() {
            return Err(CodegenError::Mismatch {
                programs: programs.len(),
                partitions: result.partitions.len(),
            });
        }
    }
    let map_src = |src: &PortRef| -> Result<PortRef, CodegenError> {
        if owner.contains_key(&src.block) {
            exported.get(src).cloned().ok_or_else(|| {
                CodegenError::NonConvex(format!("{}.out{} is used outside but not exported", src.block, src.port))
            })
        } else {
            Ok(src.clone())
        }
    };

    let mut out = Design::new(d.name.clone());
    for (b, kind) in d.blocks() {
        if !owner.contains_key(b) {
            out.add_block(b.clone(), kind.clone())?;
        }
    }
    for prog in d.programs().values() {
        out.add_program(prog.clone())?;
    }
    for prog in programs {
        let pid = BlockId::new(prog.id.as_str())?;
        out.add_block(pid.clone(), BlockKind::Programmable(prog.id.clone()))?;
        for (k, src) in prog.inputs.iter().enumerate() {
            out.connect(map_src(src)?, PortRef::new(pid.clone(), k));
        }
        out.add_program(prog.clone())?;
    }
    for e in d.edges() {
        if owner.contains_key(&e.dst.block) {
            continue;
        }
        out.connect(map_src(&e.src)?, e.dst.clone());
    }
    let violations = crate::netlist::validate_design(&out);
    if !violations.is_empty() {
        if violations.iter().any(|v| v.rule == crate::netlist::Rule::Cycle) {
            return Err(CodegenError::NonConvex(
                "contracting the partitions creates a cycle".into(),
            ));
        }
        return Err(NetlistError::Invalid(violations).into());
    }
    Ok(out)
}

/// Partition result, merged programs and rewritten design in one step.
#[derive(Debug, Clone)]
pub struct Synthesis {
    pub programs: Vec<MergedProgram>,
    pub design: Design,
}

pub fn synthesize(d: &Design, result: &PartitionResult) -> Result<Synthesis, CodegenError> {
    let programs = merge_all(d, result)?;
    let design = rewrite_design(d, result, &programs)?;
    Ok(Synthesis { programs, design })
}

/// Fit configuration that synthesis requires: the partitioner's interface
/// with convexity switched on.
pub fn synthesis_config(iface: ProgIface) -> FitConfig {
    FitConfig::new(iface).convex(true)
}
