//! Batch front end: spec files in, verdicts and certificates out.

pub mod report;
pub mod run;
pub mod spec;

pub use report::{Record, Report, Verdict};
pub use run::{run, Options};
pub use spec::{parse, read, SpecError, SpecFile};

/// Built-in scenarios, by name.
pub const DEMOS: [(&str, &str); 4] = [
    ("demo-sets", include_str!("../demos/sets.eps")),
    ("demo-sets2", include_str!("../demos/sets2.eps")),
    ("demo-eff", include_str!("../demos/eff_hilbertian.eps")),
    ("demo-epsilon-rules", include_str!("../demos/epsilon_rules.eps")),
];

pub fn demo(name: &str) -> Option<&'static str> {
    DEMOS.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}
