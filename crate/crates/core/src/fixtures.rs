//! Small bundled designs used by tests, benches and the CLI suite.

use crate::design_io::{parse_design, parse_stimulus, StimulusScript};
use crate::netlist::Design;

macro_rules! bundled {
    ($($(#[$doc:meta])* $name:ident => $file:literal;)*) => {
        $(
            $(#[$doc])*
            pub fn $name() -> Design {
                parse_design(include_str!(concat!("../designs/", $file)))
                    .expect(concat!("bundled design ", $file, " parses"))
            }
        )*

        /// Every bundled design with its name.
        pub fn all() -> Vec<(&'static str, Design)> {
            vec![$((stringify!($name), $name())),*]
        }
    };
}

bundled! {
    /// Sensors s1..s3; a = and2(s1, s2), b = not(a), c = or2(a, s3).
    reference_design => "reference.ebk";
    /// Door contact and light sensor driving an and2 and a led.
    garage => "garage.ebk";
    /// s -> a -> b -> z.
    chain2 => "chain2.ebk";
    /// s -> a -> b -> c -> z.
    chain3 => "chain3.ebk";
    /// One net fans out to three blocks that reconverge.
    convergence => "convergence.ebk";
    /// a feeds b both directly and through x, so {a, b} is not convex.
    detour => "detour.ebk";
    /// Nine numbered compute nodes on which PareDown removes 9, 8, 7, 6 and
    /// then splits off {1..5} and {6, 8, 9}.
    podium_timer_3 => "podium_timer_3.ebk";
    /// PareDown meets a block that cannot fit on its own while other blocks
    /// remain to be partitioned.
    unfittable_then_pair => "unfittable_then_pair.ebk";
}

pub fn night() -> StimulusScript {
    parse_stimulus(include_str!("../designs/night.stim")).expect("bundled stimulus parses")
}

pub fn reference_stimulus() -> StimulusScript {
    parse_stimulus(include_str!("../designs/reference.stim")).expect("bundled stimulus parses")
}
