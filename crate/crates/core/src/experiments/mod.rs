//! Verification suites built from the lower layers. Each suite returns a
//! report whose `assertions` record every checked claim with its measured
//! witness; failures are reported, never raised, so callers see the numbers.

pub mod cloner;
pub mod degradation;
pub mod lemmas;
pub mod no_broadcast;
pub mod nonadditivity;
pub mod tradeoff;

use serde::{Deserialize, Serialize};

pub use cloner::{
    cloner_marginal_closed_form, cloner_shrinking_factor, universal_cloner, ClonerReport, CLONER_MAX_COPIES,
    CLONER_MAX_DIM,
};
pub use degradation::{partial_swap_channel, run_degradation_demo, DegradationConfig, DegradationReport};
pub use lemmas::{
    check_broadcast_complementarity, check_fidelity_perturbation_lemma, check_monotonicity, ComplementarityVerdict,
    LemmaReport, MonotonicityReport,
};
pub use no_broadcast::{
    run_classical_control, run_no_broadcast_sweep, ClassicalControlReport, NoBroadcastConfig, NoBroadcastReport,
    DISTURBANCE_BUCKETS,
};
pub use nonadditivity::{
    run_nonadditivity, Construction, NonadditivityConfig, NonadditivityRecord, NonadditivityReport,
};
pub use tradeoff::{run_tradeoff_sweep, TradeoffConfig, TradeoffRecord, TradeoffReport};

/// One checked claim.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    pub name: String,
    pub pass: bool,
    /// The measured quantity the verdict is based on.
    pub witness: f64,
}

impl Assertion {
    pub fn new(name: impl Into<String>, pass: bool, witness: f64) -> Self {
        Self {
            name: name.into(),
            pass,
            witness,
        }
    }

    /// Passes when `witness <= bound`.
    pub fn at_most(name: impl Into<String>, witness: f64, bound: f64) -> Self {
        Self::new(name, witness <= bound, witness)
    }

    /// Passes when `witness > bound`.
    pub fn above(name: impl Into<String>, witness: f64, bound: f64) -> Self {
        Self::new(name, witness > bound, witness)
    }
}

pub fn all_pass(assertions: &[Assertion]) -> bool {
    assertions.iter().all(|a| a.pass)
}
