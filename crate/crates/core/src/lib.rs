//! Synthesis of block networks onto i/o-limited programmable blocks.
//!
//! A [`Design`] is a DAG of sensor, compute, programmable and output
//! blocks. The crate validates and levels designs, simulates them with
//! wave semantics, partitions their inner (compute) blocks with exhaustive
//! search, the PareDown heuristic or a greedy baseline, and merges each
//! partition into a program that replaces it in a rewritten design.
//!
//! ```
//! use bsynth::fixtures::reference_design;
//! use bsynth::netlist::ProgIface;
//! use bsynth::partition::{paredown, FitConfig, PareDownMode};
//!
//! let d = reference_design();
//! let cfg = FitConfig::new(ProgIface::new(2, 2).unwrap());
//! let r = paredown(&d, cfg, PareDownMode::Resilient).unwrap();
//! assert_eq!(r.total_inner_after(), 2);
//! ```

pub mod behavior;
pub mod bench;
pub mod codegen;
pub mod design_io;
pub mod error;
pub mod fixtures;
pub mod netlist;
pub mod parallel;
pub mod partition;
pub mod randgen;
pub mod sim;

pub use design_io::{parse_design, parse_stimulus, serialize_design, StimulusScript};
pub use netlist::{BlockId, Design, ProgIface};
pub use partition::{FitConfig, Partition, PartitionResult};
