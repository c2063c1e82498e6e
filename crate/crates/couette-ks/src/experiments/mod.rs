//! Experiment recipes: shear sweeps, decay-rate fits and the comparison of
//! the parabolic and elliptic chemo-attractant models.

mod compare;
mod decay;
mod sweep;

pub use compare::{pp_vs_pe, pp_vs_pe_dirs, Comparison, ComparisonRow, RunBundle};
pub use decay::{decay_fit, decay_fit_dir, envelope_lp_exponent, DecayReport};
pub use sweep::{
    locate_critical_mass, summarize, suppression_sweep, CriticalMass, Predicate, SweepRow,
    SweepSpec, SweepSummary, SweptParameter,
};
