//! Error types shared across the crate.
//!
//! Errors are grouped by pipeline stage so the CLI can map them onto its
//! documented exit codes (config → 1, scene → 2, anything else → 3).

use thiserror::Error;

/// Scene loading / validation failures.
#[derive(Debug, Error)]
pub enum SceneError {
    #[error("scene parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("scene i/o error reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("scene validation error: {0}")]
    Validation(String),
}

/// Deployment-config failures (parsing or semantic validation).
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("config i/o error reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("config validation error: {0}")]
    Validation(String),
}

/// Physics-layer failures (out-of-range material frequency, off-cone
/// diffraction directions, and similar precondition violations).
#[derive(Debug, Error)]
pub enum EmError {
    #[error("frequency {0:.3e} Hz outside the supported 1..=100 GHz material model range")]
    FrequencyRange(f64),
    #[error("direction pair violates the diffraction cone by {0:.3e} rad")]
    OffKellerCone(f64),
    #[error("invalid geometry: {0}")]
    Geometry(String),
}

/// Path-tracing failures (invalid tracer configuration or a physics-layer
/// error raised while evaluating path amplitudes).
#[derive(Debug, Error)]
pub enum TraceError {
    #[error("tracer config error: {0}")]
    Config(String),
    #[error(transparent)]
    Em(#[from] EmError),
}

/// Service-analysis failures (degenerate inputs such as a field with no
/// valid cells).
#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("service analysis error: {0}")]
    Analysis(String),
}

/// Field-file export/import failures.
#[derive(Debug, Error)]
pub enum FieldIoError {
    #[error("field i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed field file {path}: {reason}")]
    Format { path: String, reason: String },
}

/// Top-level pipeline failure, tagged by stage.
#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Scene(#[from] SceneError),
    #[error("trace: {0}")]
    Trace(#[from] TraceError),
    #[error("service: {0}")]
    Service(#[from] ServiceError),
    #[error("field i/o: {0}")]
    FieldIo(#[from] FieldIoError),
    #[error("render: {0}")]
    Render(String),
    #[error("runtime error: {0}")]
    Runtime(String),
}
