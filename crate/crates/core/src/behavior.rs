//! Evaluable definitions of the pre-defined block functions.
//!
//! Sequential semantics (all edges are rising edges measured against the
//! inputs latched at the previous evaluation):
//!
//! * `toggle`: an edge on `in0` flips the stored bit.
//! * `trip`: an edge on `in1` (reset) clears the bit and wins over a
//!   simultaneous edge on `in0` (trigger), which sets it.
//! * `pulse:D`: an edge on `in0` sets the bit and arms a timer at `now + D`
//!   that clears it. A new edge supersedes any armed timer.
//! * `delay:D`: every change of `in0` to `v` queues a timer at `now + D`
//!   that sets the bit to `v`. Queued timers fire in expiry order.
//!
//! The block output is always the stored bit, initially 0.

use std::collections::BTreeMap;

use crate::error::BehaviorError;
use crate::netlist::Function;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BehaviorKind {
    Combinational,
    Sequential,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BehaviorDef {
    pub function: Function,
    pub kind: BehaviorKind,
    pub inputs: usize,
    pub outputs: usize,
}

impl BehaviorDef {
    pub fn of(function: Function) -> Self {
        BehaviorDef {
            function,
            kind: if function.is_sequential() {
                BehaviorKind::Sequential
            } else {
                BehaviorKind::Combinational
            },
            inputs: function.inputs(),
            outputs: function.outputs(),
        }
    }

    /// Number of stored state bits.
    pub fn state_bits(&self) -> usize {
        match self.kind {
            BehaviorKind::Combinational => 0,
            BehaviorKind::Sequential => 1,
        }
    }

    fn check_arity(&self, got: usize) -> Result<(), BehaviorError> {
        if got != self.inputs {
            return Err(BehaviorError::Arity {
                tag: self.function.tag(),
                expected: self.inputs,
                got,
            });
        }
        Ok(())
    }
}

/// Looks up a function tag such as `and2`, `lut3:0x80` or `pulse:3`.
pub fn behavior_catalog(tag: &str) -> Result<BehaviorDef, crate::error::NetlistError> {
    Ok(BehaviorDef::of(tag.parse()?))
}

fn lut(mask: u8, inputs: &[bool]) -> bool {
    let index = inputs
        .iter()
        .enumerate()
        .fold(0u32, |acc, (k, &b)| acc | (u32::from(b) << k));
    (mask >> index) & 1 == 1
}

pub fn eval_combinational(def: &BehaviorDef, inputs: &[bool]) -> Result<Vec<bool>, BehaviorError> {
    def.check_arity(inputs.len())?;
    let out = match def.function {
        Function::And2 => inputs[0] && inputs[1],
        Function::Or2 => inputs[0] || inputs[1],
        Function::Not => !inputs[0],
        Function::Lut2(m) | Function::Lut3(m) => lut(m, inputs),
        _ => return Err(BehaviorError::NotCombinational(def.function.tag())),
    };
    Ok(vec![out])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PendingTimer {
    pub expiry: u64,
    pub value: bool,
}

/// A timer the owner of the state must deliver back through
/// [`SeqState::fire`] at time `at`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TimerRequest {
    pub token: u64,
    pub at: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SeqState {
    initialized: bool,
    latched: Vec<bool>,
    stored: bool,
    pending: BTreeMap<u64, PendingTimer>,
    next_token: u64,
}

impl SeqState {
    /// Latches the current inputs so that no edge is seen at start-up.
    pub fn init(def: &BehaviorDef, inputs: &[bool]) -> Result<Self, BehaviorError> {
        if def.kind != BehaviorKind::Sequential {
            return Err(BehaviorError::NotSequential(def.function.tag()));
        }
        def.check_arity(inputs.len())?;
        Ok(SeqState {
            initialized: true,
            latched: inputs.to_vec(),
            ..Default::default()
        })
    }

    pub fn output(&self) -> bool {
        self.stored
    }

    pub fn latched(&self) -> &[bool] {
        &self.latched
    }

    pub fn pending(&self) -> impl Iterator<Item = (u64, PendingTimer)> + '_ {
        self.pending.iter().map(|(&k, &v)| (k, v))
    }

    fn arm(&mut self, at: u64, value: bool) -> TimerRequest {
        let token = self.next_token;
        self.next_token += 1;
        self.pending.insert(token, PendingTimer { expiry: at, value });
        TimerRequest { token, at }
    }

    /// Evaluates one step in place, returning the outputs and any new timers.
    pub fn step(
        &mut self,
        def: &BehaviorDef,
        inputs: &[bool],
        now: u64,
    ) -> Result<(Vec<bool>, Vec<TimerRequest>), BehaviorError> {
        if !self.initialized {
            return Err(BehaviorError::Uninitialized);
        }
        if def.kind != BehaviorKind::Sequential {
            return Err(BehaviorError::NotSequential(def.function.tag()));
        }
        def.check_arity(inputs.len())?;
        let rose = |k: usize| inputs[k] && !self.latched[k];
        let mut timers = Vec::new();
        match def.function {
            Function::Toggle => {
                if rose(0) {
                    self.stored = !self.stored;
                }
            }
            Function::Trip => {
                if rose(1) {
                    self.stored = false;
                } else if rose(0) {
                    self.stored = true;
                }
            }
            Function::Pulse(d) => {
                if rose(0) {
                    self.stored = true;
                    self.pending.clear();
                    timers.push(self.arm(now.saturating_add(d), false));
                }
            }
            Function::Delay(d) => {
                if inputs[0] != self.latched[0] {
                    timers.push(self.arm(now.saturating_add(d), inputs[0]));
                }
            }
            _ => unreachable!("checked sequential above"),
        }
        self.latched.copy_from_slice(inputs);
        Ok((vec![self.stored], timers))
    }

    /// Applies the effect of an expired timer. Returns `false` when the token
    /// was superseded and nothing changed.
    pub fn fire(&mut self, token: u64) -> bool {
        match self.pending.remove(&token) {
            Some(t) => {
                self.stored = t.value;
                true
            }
            None => false,
        }
    }
}

/// Functional form of [`SeqState::step`].
pub fn step_sequential(
    def: &BehaviorDef,
    state: &SeqState,
    inputs: &[bool],
    now: u64,
) -> Result<(SeqState, Vec<bool>, Vec<TimerRequest>), BehaviorError> {
    let mut next = state.clone();
    let (out, timers) = next.step(def, inputs, now)?;
    Ok((next, out, timers))
}
