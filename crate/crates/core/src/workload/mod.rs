//! Transaction workloads: seeded stochastic generators and adversarial
//! sequences.

mod adversary;
mod stochastic;

pub use adversary::{
    epoch_burst_seq, fwf_killer_seq, run_adaptive, AdaptiveRun, Adversary, AdversaryStep, Thm3Adversary,
};
pub use stochastic::{gen_stochastic, ValueParams, WorkloadKind, WorkloadSpec};
