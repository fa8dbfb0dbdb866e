//! End-to-end run orchestration: scene → grid → per-transmitter sweeps →
//! assembled fields → throughput → service reports → exported artifacts,
//! closed by a manifest that is written exactly once, after everything else.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{ConfigError, FieldIoError, RunError};
use crate::geom::load_scene;
use crate::radiomap::{assemble_fields, build_grid, compute_tx_field, TxField};
use crate::service::{coverage_report, macro_diversity, throughput_field};
use crate::tracer::Combining;

use super::config::DeploymentConfig;
use super::export::{write_field, FieldFile, FieldFormat, FieldMeta};

/// Fallback rate target for the margin analysis when no threshold is
/// labelled "URLLC".
const DEFAULT_URLLC_RATE: f64 = 100.0e6;

/// Invocation-time knobs layered over the config file.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Overrides the config's `output-dir`.
    pub out_dir: Option<PathBuf>,
    pub format: FieldFormat,
    /// Overrides the config's `combining`.
    pub combining: Option<Combining>,
    /// Worker count for the sweep; `None` uses the ambient rayon pool.
    pub threads: Option<usize>,
    /// Suppress the per-site progress lines on stderr.
    pub quiet: bool,
}

/// Resolved grid placement echoed into the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct GridEcho {
    pub region: [f64; 4],
    pub nx: usize,
    pub ny: usize,
    pub spacing: f64,
    pub origin_x: f64,
    pub origin_y: f64,
    pub rx_height: f64,
    pub valid_cells: usize,
}

/// Run record: what produced the artifacts and from which inputs.
///
/// The embedded `config` is the fully resolved document (defaults included),
/// and `config-sha256` hashes exactly that echo, so two manifests agree on
/// the hash iff the effective configuration was identical.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct RunManifest {
    pub engine_version: String,
    pub config_sha256: String,
    pub combining: Combining,
    pub field_format: FieldFormat,
    pub noise_dbm: f64,
    pub grid: GridEcho,
    pub wall_time_s: f64,
    pub truncation_warnings: Vec<String>,
    /// Artifact file names relative to the output directory, in write order;
    /// the manifest itself (`manifest.json`) is not listed.
    pub outputs: Vec<String>,
    pub config: DeploymentConfig,
}

/// Execute the full pipeline for one configuration and scene.
pub fn run_pipeline(
    cfg: &DeploymentConfig,
    scene_path: &Path,
    opts: &RunOptions,
) -> Result<RunManifest, RunError> {
    let t0 = Instant::now();
    cfg.validate()?;
    let scene = load_scene(scene_path)?;

    let region = match cfg.grid.region {
        Some(r) => r,
        None => {
            let (lo, hi) = scene.bounds().ok_or_else(|| {
                ConfigError::Validation(
                    "scene has no geometry to bound the grid; set grid.region".into(),
                )
            })?;
            [lo.x, lo.y, hi.x, hi.y]
        }
    };
    let grid = build_grid(
        [region[0], region[1]],
        [region[2], region[3]],
        cfg.grid.spacing,
        cfg.grid.rx_height,
        &scene,
    )?;
    let txs = cfg.to_transmitters();
    let noise_dbm = cfg.noise_dbm();
    let combining = opts.combining.unwrap_or(cfg.combining);

    let sweep = || -> Result<Vec<TxField>, RunError> {
        txs.iter()
            .enumerate()
            .map(|(k, tx)| {
                if !opts.quiet {
                    eprintln!("[{}/{}] tracing site '{}'", k + 1, txs.len(), tx.site_id);
                }
                compute_tx_field(tx, k, &grid, &scene, &cfg.tracer, combining)
                    .map_err(RunError::from)
            })
            .collect()
    };
    let per_tx = match opts.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| RunError::Runtime(format!("thread pool: {e}")))?
            .install(sweep)?,
        None => sweep()?,
    };

    let truncation_warnings: Vec<String> = txs
        .iter()
        .zip(&per_tx)
        .filter(|(_, f)| f.truncated_links > 0)
        .map(|(tx, f)| {
            format!(
                "site '{}': {} links hit the {}-path budget; weakest paths dropped",
                tx.site_id, f.truncated_links, cfg.tracer.max_paths_per_link
            )
        })
        .collect();

    let fields = assemble_fields(&per_tx, &txs, noise_dbm);
    let rates = throughput_field(&fields, cfg.bandwidth_hz)?;
    let thresholds = cfg.service_thresholds()?;
    let service = coverage_report(&rates, &thresholds)?;
    let urllc_rate = thresholds
        .entries()
        .iter()
        .find(|t| t.label == "URLLC")
        .map_or(DEFAULT_URLLC_RATE, |t| t.rate_bps);
    let diversity = macro_diversity(&fields, urllc_rate, cfg.bandwidth_hz)?;

    // Artifacts, written only now that every stage has succeeded.
    let out_dir = opts
        .out_dir
        .clone()
        .unwrap_or_else(|| PathBuf::from(&cfg.output_dir));
    std::fs::create_dir_all(&out_dir).map_err(|source| FieldIoError::Io {
        path: out_dir.display().to_string(),
        source,
    })?;

    let meta = FieldMeta {
        nx: grid.nx,
        ny: grid.ny,
        spacing: grid.spacing,
        origin_x: grid.origin.x,
        origin_y: grid.origin.y,
    };
    let best_tx: Vec<f64> = (0..grid.cells())
        .map(|c| if grid.valid[c] { f64::from(fields.best_tx[c]) } else { f64::NAN })
        .collect();
    let planes: [(&str, &[f64]); 4] = [
        ("path_gain", &fields.max_path_gain_db),
        ("rss", &fields.max_rss_dbm),
        ("sinr", &fields.max_sinr_db),
        ("best_tx", &best_tx),
    ];
    let mut outputs = Vec::new();
    for (stem, values) in planes {
        let name = format!("{stem}.{}", opts.format.extension());
        let field = FieldFile { meta, values: values.to_vec() };
        write_field(&out_dir.join(&name), &field, opts.format)?;
        outputs.push(name);
    }
    for (name, json) in [
        ("service_report.json", to_json(&service.to_doc())?),
        ("macro_diversity.json", to_json(&diversity.to_doc())?),
    ] {
        std::fs::write(out_dir.join(name), json).map_err(|source| FieldIoError::Io {
            path: out_dir.join(name).display().to_string(),
            source,
        })?;
        outputs.push(name.to_string());
    }

    let manifest = RunManifest {
        engine_version: env!("CARGO_PKG_VERSION").to_string(),
        config_sha256: sha256_hex(cfg.canonical_json().as_bytes()),
        combining,
        field_format: opts.format,
        noise_dbm,
        grid: GridEcho {
            region,
            nx: grid.nx,
            ny: grid.ny,
            spacing: grid.spacing,
            origin_x: grid.origin.x,
            origin_y: grid.origin.y,
            rx_height: grid.rx_height,
            valid_cells: grid.valid_count(),
        },
        wall_time_s: t0.elapsed().as_secs_f64(),
        truncation_warnings,
        outputs,
        config: cfg.clone(),
    };
    let path = out_dir.join("manifest.json");
    std::fs::write(&path, to_json(&manifest)?).map_err(|source| FieldIoError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(manifest)
}

fn to_json<T: Serialize>(value: &T) -> Result<String, RunError> {
    serde_json::to_string_pretty(value).map_err(|e| RunError::Runtime(format!("serialize: {e}")))
}

fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut s = String::with_capacity(64);
    for b in digest {
        s.push_str(&format!("{b:02x}"));
    }
    s
}
