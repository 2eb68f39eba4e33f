//! Seeded random designs and stimulus scripts.
//!
//! Inner blocks get a random strict order; each input of an inner block is
//! wired to a uniformly chosen sensor or earlier inner block, so every
//! generated design is acyclic by construction. Inner outputs nobody reads
//! are wired to output blocks.

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::design_io::{SetEvent, StimulusScript};
use crate::error::GenError;
use crate::netlist::{BlockId, BlockKind, Design, Function, PortRef, FUNCTION_TAGS};

/// Largest pulse/delay duration drawn.
pub const MAX_DURATION: u64 = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct GenParams {
    pub seed: u64,
    pub n_inner: usize,
    /// Defaults to `max(2, n_inner / 3)`.
    pub n_sensors: Option<usize>,
    /// Defaults to `max(2, n_inner / 3)`.
    pub n_outputs: Option<usize>,
    /// Weight per entry of [`FUNCTION_TAGS`].
    pub weights: [f64; 9],
}

impl GenParams {
    pub fn new(seed: u64, n_inner: usize) -> Self {
        GenParams {
            seed,
            n_inner,
            n_sensors: None,
            n_outputs: None,
            weights: [1.0; 9],
        }
    }

    /// Puts all weight on the given function tags.
    pub fn only(mut self, tags: &[&str]) -> Self {
        for (k, t) in FUNCTION_TAGS.iter().enumerate() {
            self.weights[k] = if tags.contains(t) { 1.0 } else { 0.0 };
        }
        self
    }

    pub fn sensors(mut self, n: usize) -> Self {
        self.n_sensors = Some(n);
        self
    }

    pub fn outputs(mut self, n: usize) -> Self {
        self.n_outputs = Some(n);
        self
    }

    fn default_count(&self) -> usize {
        (self.n_inner / 3).max(2)
    }
}

fn name(prefix: char, k: usize, count: usize) -> BlockId {
    let width = count.max(1).to_string().len();
    BlockId::new(format!("{prefix}{k:0width$}")).expect("generated identifiers are valid")
}

fn draw_function(rng: &mut ChaCha8Rng, tag: &str) -> Function {
    match tag {
        "and2" => Function::And2,
        "or2" => Function::Or2,
        "not" => Function::Not,
        "lut2" => Function::Lut2(rng.gen_range(0..16)),
        "lut3" => Function::Lut3(rng.gen()),
        "toggle" => Function::Toggle,
        "trip" => Function::Trip,
        "pulse" => Function::Pulse(rng.gen_range(0..=MAX_DURATION)),
        "delay" => Function::Delay(rng.gen_range(0..=MAX_DURATION)),
        _ => unreachable!("tag from FUNCTION_TAGS"),
    }
}

pub fn generate_design(params: &GenParams) -> Result<Design, GenError> {
    let n = params.n_inner;
    if n == 0 {
        return Err(GenError::NoInner);
    }
    if params.weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
        return Err(GenError::BadWeights);
    }
    let pick = WeightedIndex::new(params.weights).map_err(|_| GenError::BadWeights)?;
    let n_sensors = params.n_sensors.unwrap_or_else(|| params.default_count());
    let n_outputs = params.n_outputs.unwrap_or_else(|| params.default_count());
    if n_sensors == 0 {
        return Err(GenError::NoSensors);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut d = Design::new(format!("gen_{}_{}", params.seed, n));

    let sensors: Vec<BlockId> = (0..n_sensors).map(|k| name('s', k, n_sensors)).collect();
    for s in &sensors {
        d.add_block(s.clone(), BlockKind::Sensor("in".into())).expect("fresh id");
    }
    let mut inner: Vec<BlockId> = (0..n).map(|k| name('n', k, n)).collect();
    inner.shuffle(&mut rng);

    let mut consumed = vec![false; n];
    for pos in 0..n {
        let tag = FUNCTION_TAGS[pick.sample(&mut rng)];
        let f = draw_function(&mut rng, tag);
        d.add_block(inner[pos].clone(), BlockKind::Compute(f)).expect("fresh id");
        for port in 0..f.inputs() {
            let k = rng.gen_range(0..n_sensors + pos);
            let src = if k < n_sensors {
                sensors[k].clone()
            } else {
                consumed[k - n_sensors] = true;
                inner[k - n_sensors].clone()
            };
            d.connect(PortRef::new(src, 0), PortRef::new(inner[pos].clone(), port));
        }
    }

    let dangling: Vec<usize> = (0..n).filter(|&k| !consumed[k]).collect();
    let total_outputs = n_outputs.max(dangling.len());
    for k in 0..total_outputs {
        let o = name('o', k, total_outputs);
        d.add_block(o.clone(), BlockKind::Output("out".into())).expect("fresh id");
        let src = match dangling.get(k) {
            Some(&j) => inner[j].clone(),
            None => inner[rng.gen_range(0..n)].clone(),
        };
        d.connect(PortRef::new(src, 0), PortRef::new(o, 0));
    }
    Ok(d)
}

/// Random stimulus: random initial values for every sensor, `n_events`
/// sets at times `1..=span`, and horizon `span + 2 * MAX_DURATION + 1`,
/// which leaves room for timers armed near the last event.
pub fn generate_stimulus(d: &Design, seed: u64, n_events: usize, span: u64) -> StimulusScript {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sensors: Vec<&BlockId> = d
        .blocks()
        .iter()
        .filter(|(_, k)| matches!(k, BlockKind::Sensor(_)))
        .map(|(b, _)| b)
        .collect();
    let mut script = StimulusScript {
        until: Some(span + 2 * MAX_DURATION + 1),
        ..Default::default()
    };
    if sensors.is_empty() {
        return script;
    }
    for s in &sensors {
        script.inits.push(((*s).clone(), rng.gen()));
    }
    let mut events: Vec<SetEvent> = (0..n_events)
        .map(|_| SetEvent {
            time: rng.gen_range(1..=span.max(1)),
            sensor: sensors[rng.gen_range(0..sensors.len())].clone(),
            value: rng.gen(),
        })
        .collect();
    events.sort_by_key(|e| e.time);
    script.events = events;
    script
}
