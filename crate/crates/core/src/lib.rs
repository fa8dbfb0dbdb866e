//! Deterministic ray-traced radio coverage: scene geometry, multipath field
//! computation (reflections and edge diffraction), antenna patterns, link
//! budgets, and service-level coverage analysis.

pub mod antenna;
pub mod em;
pub mod error;
pub mod appio;
pub mod geom;
pub mod radiomap;
pub mod service;
pub mod tracer;

#[cfg(test)]
pub(crate) mod testutil;

pub use antenna::{AntennaConfig, Orientation, Polarization};
pub use appio::{
    load_config, parse_config, read_field, render_heatmap, run_pipeline, write_field, write_png,
    DeploymentConfig, FieldFile, FieldFormat, FieldMeta, RenderOptions, RunManifest, RunOptions,
};
pub use error::{
    ConfigError, EmError, FieldIoError, RunError, SceneError, ServiceError, TraceError,
};
pub use geom::{load_scene, Hit, Ray, Scene, Vec3};
pub use radiomap::{
    assemble_fields, build_grid, compute_tx_field, noise_power_dbm, validate_transmitters,
    CoverageFields, RadioGrid, Transmitter, TxField, NO_DATA,
};
pub use service::{
    coverage_report, empirical_cdf, macro_diversity, spectral_efficiency, threshold_mask,
    throughput, throughput_field, Ecdf, MacroDiversityReport, ServiceReport, ServiceThreshold,
    ServiceThresholds, ThresholdMask, ThroughputField,
};
pub use tracer::{
    path_gain, trace_all, trace_diffraction, trace_los, trace_reflections, Combining, Emitter,
    Interaction, InteractionKind, LinkTrace, PropagationPath, TracerConfig, TxTracer,
};
