//! C text for one merged program.
//!
//! The runtime contract of the emitted file:
//!
//! * `input[]` and `output[]` are provided by the runtime.
//! * `on_init()` runs once with valid inputs; `on_wake()` runs whenever an
//!   input changes; `on_timer(id)` runs when timer `id` expires.
//! * `set_timer(id, ticks)` arms timer `id`, replacing any pending expiry of
//!   the same id. `queue_timer(id, ticks)` queues one more expiry of `id`
//!   behind those already pending.
//!
//! Timer ids are statement indices.

use std::fmt::Write as _;

use super::{MergedProgram, Operand, Statement};
use crate::netlist::Function;

fn arg(op: &Operand) -> String {
    match op {
        Operand::Input(k) => format!("input[{k}]"),
        Operand::Var(b) => format!("v_{b}"),
    }
}

fn lut_expr(mask: u8, args: &[String]) -> String {
    let index: Vec<String> = args
        .iter()
        .enumerate()
        .map(|(k, a)| if k == 0 { a.clone() } else { format!("({a} << {k})") })
        .collect();
    format!("(0x{mask:X} >> ({})) & 1", index.join(" | "))
}

fn combinational(st: &Statement, args: &[String]) -> Option<String> {
    Some(match st.function {
        Function::And2 => format!("{} && {}", args[0], args[1]),
        Function::Or2 => format!("{} || {}", args[0], args[1]),
        Function::Not => format!("!{}", args[0]),
        Function::Lut2(m) | Function::Lut3(m) => lut_expr(m, args),
        _ => return None,
    })
}

fn rose(t: &str, k: usize, a: &str) -> String {
    format!("{a} && !l_{t}_{k}")
}

fn wake_body(out: &mut String, index: usize, st: &Statement) {
    let t = st.target.as_str();
    let args: Vec<String> = st.args.iter().map(arg).collect();
    if let Some(expr) = combinational(st, &args) {
        writeln!(out, "    v_{t} = {expr};").unwrap();
        return;
    }
    match st.function {
        Function::Toggle => {
            writeln!(out, "    if ({}) s_{t} = !s_{t};", rose(t, 0, &args[0])).unwrap();
        }
        Function::Trip => {
            writeln!(out, "    if ({}) s_{t} = 0;", rose(t, 1, &args[1])).unwrap();
            writeln!(out, "    else if ({}) s_{t} = 1;", rose(t, 0, &args[0])).unwrap();
        }
        Function::Pulse(d) => {
            writeln!(out, "    if ({}) {{", rose(t, 0, &args[0])).unwrap();
            writeln!(out, "        s_{t} = 1;").unwrap();
            writeln!(out, "        set_timer({index}, {d});").unwrap();
            writeln!(out, "    }}").unwrap();
        }
        Function::Delay(d) => {
            writeln!(out, "    if ({} != l_{t}_0) {{", args[0]).unwrap();
            writeln!(out, "        q_{t}[q_{t}_tail] = {};", args[0]).unwrap();
            writeln!(out, "        q_{t}_tail = (q_{t}_tail + 1) % DELAY_QUEUE_LEN;").unwrap();
            writeln!(out, "        queue_timer({index}, {d});").unwrap();
            writeln!(out, "    }}").unwrap();
        }
        _ => unreachable!("combinational handled above"),
    }
    latch(out, st, &args);
    writeln!(out, "    v_{t} = s_{t};").unwrap();
}

fn latch(out: &mut String, st: &Statement, args: &[String]) {
    for (k, a) in args.iter().enumerate() {
        writeln!(out, "    l_{}_{k} = {a};", st.target).unwrap();
    }
}

fn write_outputs(out: &mut String, prog: &MergedProgram) {
    for (k, p) in prog.outputs.iter().enumerate() {
        writeln!(out, "    output[{k}] = v_{};", p.block).unwrap();
    }
}

/// Deterministic C source for `prog`.
pub fn emit_c(prog: &MergedProgram) -> String {
    let (i, o) = prog.iface();
    let uses = |pred: fn(&Function) -> bool| prog.statements.iter().any(|s| pred(&s.function));
    let has_pulse = uses(|f| matches!(f, Function::Pulse(_)));
    let has_delay = uses(|f| matches!(f, Function::Delay(_)));

    let mut out = String::new();
    writeln!(out, "/* program {}: {i} inputs, {o} outputs */", prog.id).unwrap();
    for (k, p) in prog.inputs.iter().enumerate() {
        writeln!(out, "/* input[{k}] <- {}.out{} */", p.block, p.port).unwrap();
    }
    for (k, p) in prog.outputs.iter().enumerate() {
        writeln!(out, "/* output[{k}] -> {}.out{} */", p.block, p.port).unwrap();
    }
    out.push('\n');
    if has_delay {
        out.push_str("#define DELAY_QUEUE_LEN 16\n\n");
    }
    writeln!(out, "extern unsigned char input[{i}];").unwrap();
    writeln!(out, "extern unsigned char output[{o}];").unwrap();
    if has_pulse {
        out.push_str("extern void set_timer(unsigned id, unsigned long ticks);\n");
    }
    if has_delay {
        out.push_str("extern void queue_timer(unsigned id, unsigned long ticks);\n");
    }
    out.push('\n');

    for st in &prog.statements {
        writeln!(out, "static unsigned char v_{} = 0;", st.target).unwrap();
    }
    for st in prog.statements.iter().filter(|s| s.function.is_sequential()) {
        let t = &st.target;
        writeln!(out, "static unsigned char s_{t} = 0;").unwrap();
        for k in 0..st.args.len() {
            writeln!(out, "static unsigned char l_{t}_{k} = 0;").unwrap();
        }
        if matches!(st.function, Function::Delay(_)) {
            writeln!(out, "static unsigned char q_{t}[DELAY_QUEUE_LEN];").unwrap();
            writeln!(out, "static unsigned char q_{t}_head = 0;").unwrap();
            writeln!(out, "static unsigned char q_{t}_tail = 0;").unwrap();
        }
    }
    out.push('\n');

    out.push_str("void on_init(void)\n{\n");
    for st in &prog.statements {
        let args: Vec<String> = st.args.iter().map(arg).collect();
        match combinational(st, &args) {
            Some(expr) => writeln!(out, "    v_{} = {expr};", st.target).unwrap(),
            None => {
                latch(&mut out, st, &args);
                writeln!(out, "    v_{t} = s_{t};", t = st.target).unwrap();
            }
        }
    }
    write_outputs(&mut out, prog);
    out.push_str("}\n\n");

    out.push_str("void on_wake(void)\n{\n");
    for (index, st) in prog.statements.iter().enumerate() {
        wake_body(&mut out, index, st);
    }
    write_outputs(&mut out, prog);
    out.push_str("}\n\n");

    out.push_str("void on_timer(unsigned id)\n{\n    switch (id) {\n");
    for (index, st) in prog.statements.iter().enumerate() {
        let t = &st.target;
        match st.function {
            Function::Pulse(_) => {
                writeln!(out, "    case {index}:\n        s_{t} = 0;\n        break;").unwrap();
            }
            Function::Delay(_) => {
                writeln!(
                    out,
                    "    case {index}:\n        s_{t} = q_{t}[q_{t}_head];\n        \
                     q_{t}_head = (q_{t}_head + 1) % DELAY_QUEUE_LEN;\n        break;"
                )
                .unwrap();
            }
            _ => {}
        }
    }
    out.push_str("    default:\n        break;\n    }\n    on_wake();\n}\n");
    out
}
