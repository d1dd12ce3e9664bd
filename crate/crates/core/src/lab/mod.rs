//! Experiment definitions: indicators, test corpora, sweeps and their classification.

mod classify;
mod corpus;
mod experiments;
mod foundations;
mod indicator;
mod record;

pub use classify::{classify_boundedness, Verdict, BOUNDED_SLOPE, DIVERGENT_SLOPE};
pub use corpus::{make_corpus, random_trig_polynomial, CorpusContext, CorpusKind, CorpusMember, CorpusSpec};
pub use experiments::{
    run_kernel_decay, run_lemma_suite, run_multiplier_scan, run_strichartz_scan, strichartz_expectation, Expectation,
    KernelConfig, KernelLeaf, LemmaCheck, LemmaConfig, MultiplierConfig, StrichartzConfig, Tolerance,
};
pub use foundations::{derivative_decay, kernel_l1_mass, orthogonality_defect, partition_defect, round_trip_error};
pub use indicator::{make_indicator, smooth_step, IndicatorShape, IndicatorSpec};
pub use record::ResultRecord;
