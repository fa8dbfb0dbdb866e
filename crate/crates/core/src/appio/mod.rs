//! Application shell: deployment configuration, pipeline orchestration,
//! field import/export, and raster heatmap rendering.

pub mod config;
pub mod export;
pub mod pipeline;
pub mod render;

pub use config::{load_config, parse_config, DeploymentConfig, GridConfig, TransmitterConfig};
pub use export::{read_field, write_field, FieldFile, FieldFormat, FieldMeta};
pub use pipeline::{run_pipeline, RunManifest, RunOptions};
pub use render::{render_heatmap, write_png, RenderOptions};
