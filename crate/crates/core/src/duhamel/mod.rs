//! Duhamel iteration: the Picard maps of the local theory and the
//! semi-analytic second iterate behind the norm-inflation experiment.

mod inflation;
mod kernel;
mod picard;

pub use inflation::{
    inflation_experiment, phase_coherence, second_iterate_hat, FrequencyInterval,
    InflationConfig, InflationReport, InflationRow, PhaseDiagnostics, QuadPoints,
    resonance_q1, upsilon_boxes,
    DEFAULT_EPS0, SUP_TIME_GRID,
};
pub use kernel::{duhamel_kernel, KERNEL_SERIES_GUARD};
pub use picard::{
    picard_contraction_probe, picard_map, ContractionProbe, PicardIterate, ProbeRow,
    MIN_POINTS_PER_DELTA,
};
