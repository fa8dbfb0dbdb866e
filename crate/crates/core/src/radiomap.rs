//! Receiver grid construction and field assembly: sweep every transmitter
//! over the grid, combine multipath into per-cell path gain, then derive
//! RSS, SINR, and best / second-best server association.
//!
//! Cells are independent, so the per-transmitter sweep parallelises freely;
//! each cell writes only its own slot and path amplitudes are summed in the
//! tracer's fixed order, which keeps field arrays bitwise identical across
//! thread counts.

use rayon::prelude::*;
use std::sync::atomic::{AtomicUsize, Ordering};

use crate::antenna::{AntennaConfig, Orientation};
use crate::em::K_B;
use crate::error::{ConfigError, TraceError};
use crate::geom::{Scene, Vec3};
use crate::tracer::{path_gain, Combining, Emitter, TracerConfig, TxTracer};

/// In-memory marker for cells excluded from analysis (inside buildings).
/// Exports translate it to the file format's documented sentinel.
pub const NO_DATA: f64 = f64::NAN;

/// A base station site.
#[derive(Debug, Clone)]
pub struct Transmitter {
    pub site_id: String,
    /// Antenna reference point (e.g. a rooftop corner), metres.
    pub position: Vec3,
    pub power_dbm: f64,
    pub carrier_hz: f64,
    pub antenna: AntennaConfig,
    pub orientation: Orientation,
}

impl Transmitter {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !self.power_dbm.is_finite() {
            return Err(ConfigError::Validation(format!(
                "transmitter '{}': power must be finite, got {}",
                self.site_id, self.power_dbm
            )));
        }
        if !(self.carrier_hz.is_finite() && self.carrier_hz > 0.0) {
            return Err(ConfigError::Validation(format!(
                "transmitter '{}': carrier must be positive, got {}",
                self.site_id, self.carrier_hz
            )));
        }
        self.antenna.validate()?;
        self.orientation.validate()?;
        Ok(())
    }

    /// Tracer-facing view of this site. `index` is the site's position in
    /// the deployment list and tags every path it produces.
    pub fn emitter(&self, index: usize) -> Emitter {
        Emitter {
            index,
            position: self.position,
            carrier_hz: self.carrier_hz,
            antenna: self.antenna,
            orientation: self.orientation,
        }
    }
}

/// Check deployment-wide transmitter invariants: at least one site, unique
/// ids, per-site validity, and a single shared carrier.
pub fn validate_transmitters(txs: &[Transmitter]) -> Result<(), ConfigError> {
    if txs.is_empty() {
        return Err(ConfigError::Validation("at least one transmitter is required".into()));
    }
    for tx in txs {
        tx.validate()?;
    }
    for pair in txs.windows(2) {
        if pair[0].carrier_hz != pair[1].carrier_hz {
            return Err(ConfigError::Validation(format!(
                "all transmitters must share one carrier: '{}' at {} Hz vs '{}' at {} Hz",
                pair[0].site_id, pair[0].carrier_hz, pair[1].site_id, pair[1].carrier_hz
            )));
        }
    }
    let mut ids: Vec<&str> = txs.iter().map(|t| t.site_id.as_str()).collect();
    ids.sort_unstable();
    if let Some(dup) = ids.windows(2).find(|w| w[0] == w[1]) {
        return Err(ConfigError::Validation(format!("duplicate site_id '{}'", dup[0])));
    }
    Ok(())
}

/// Regular receiver grid over a ground rectangle.
///
/// Cell (i, j) has its centre at `origin + (i·spacing, j·spacing, rx_height)`
/// and linear index `j·nx + i` (row-major, x fastest).
#[derive(Debug, Clone)]
pub struct RadioGrid {
    pub origin: Vec3,
    pub nx: usize,
    pub ny: usize,
    pub spacing: f64,
    pub rx_height: f64,
    /// Per-cell flag; false inside building volumes.
    pub valid: Vec<bool>,
}

impl RadioGrid {
    pub fn cells(&self) -> usize {
        self.nx * self.ny
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.nx && j < self.ny);
        j * self.nx + i
    }

    pub fn cell_center(&self, i: usize, j: usize) -> Vec3 {
        Vec3::new(
            self.origin.x + i as f64 * self.spacing,
            self.origin.y + j as f64 * self.spacing,
            self.origin.z + self.rx_height,
        )
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|v| **v).count()
    }
}

/// Lay a grid over the rectangle `[min_xy, max_xy]` at ground level.
///
/// The cell count per axis is `floor(extent / spacing)` and centres start
/// half a cell in from the rectangle edge, so a 10 m extent at 2 m spacing
/// gives 5 cells centred at 1, 3, 5, 7, 9. Cells whose centre falls inside
/// a closed scene volume are marked invalid.
pub fn build_grid(
    min_xy: [f64; 2],
    max_xy: [f64; 2],
    spacing: f64,
    rx_height: f64,
    scene: &Scene,
) -> Result<RadioGrid, ConfigError> {
    if !(spacing.is_finite() && spacing > 0.0) {
        return Err(ConfigError::Validation(format!("grid spacing must be > 0, got {spacing}")));
    }
    let cells_along = |lo: f64, hi: f64| -> usize {
        let extent = hi - lo;
        if extent <= 0.0 {
            return 0;
        }
        (extent / spacing + 1e-9).floor() as usize
    };
    let nx = cells_along(min_xy[0], max_xy[0]);
    let ny = cells_along(min_xy[1], max_xy[1]);
    if nx == 0 || ny == 0 {
        return Err(ConfigError::Validation(format!(
            "region {min_xy:?}..{max_xy:?} at spacing {spacing} m contains no cells"
        )));
    }
    let mut grid = RadioGrid {
        origin: Vec3::new(min_xy[0] + spacing / 2.0, min_xy[1] + spacing / 2.0, 0.0),
        nx,
        ny,
        spacing,
        rx_height,
        valid: vec![true; nx * ny],
    };
    for j in 0..ny {
        for i in 0..nx {
            if scene.contains_point(grid.cell_center(i, j)) {
                let idx = grid.index(i, j);
                grid.valid[idx] = false;
            }
        }
    }
    Ok(grid)
}

/// Thermal noise power in dBm: `10·log10(k_B·T·1000) + 10·log10(B) + NF`.
pub fn noise_power_dbm(bandwidth_hz: f64, noise_figure_db: f64, temperature_k: f64) -> f64 {
    debug_assert!(bandwidth_hz > 0.0, "bandwidth must be positive");
    debug_assert!(temperature_k > 0.0, "temperature must be positive");
    let per_hz_dbm = 10.0 * (K_B * temperature_k * 1000.0).log10();
    per_hz_dbm + 10.0 * bandwidth_hz.log10() + noise_figure_db
}

/// One transmitter's sweep over the grid.
#[derive(Debug, Clone)]
pub struct TxField {
    /// Path gain in dB per cell; [`NO_DATA`] on invalid cells, −∞ where no
    /// path reaches the cell.
    pub path_gain_db: Vec<f64>,
    /// Number of links whose path list hit the per-link budget.
    pub truncated_links: usize,
}

/// Trace every valid cell for one transmitter. Parallelised over cells via
/// the ambient rayon pool; output is identical for any worker count.
pub fn compute_tx_field(
    tx: &Transmitter,
    tx_index: usize,
    grid: &RadioGrid,
    scene: &Scene,
    cfg: &TracerConfig,
    combining: Combining,
) -> Result<TxField, TraceError> {
    let tracer = TxTracer::new(&tx.emitter(tx_index), scene, cfg)?;
    let truncated = AtomicUsize::new(0);
    let nx = grid.nx;
    let mut path_gain_db = vec![NO_DATA; grid.cells()];
    path_gain_db
        .par_iter_mut()
        .enumerate()
        .for_each(|(idx, slot)| {
            if !grid.valid[idx] {
                return;
            }
            let center = grid.cell_center(idx % nx, idx / nx);
            let link = tracer.trace(center);
            if link.truncated {
                truncated.fetch_add(1, Ordering::Relaxed);
            }
            *slot = 10.0 * path_gain(&link.paths, combining).log10();
        });
    Ok(TxField { path_gain_db, truncated_links: truncated.into_inner() })
}

/// Assembled per-cell coverage products.
///
/// Per-transmitter planes are stored back to back: the value for cell `c`
/// and transmitter `t` sits at `t·cells + c`.
#[derive(Debug, Clone)]
pub struct CoverageFields {
    pub n_tx: usize,
    pub cells: usize,
    pub noise_dbm: f64,
    /// Per-tx planes, dB.
    pub path_gain_db: Vec<f64>,
    /// Per-tx planes, dBm.
    pub rss_dbm: Vec<f64>,
    /// Per-tx planes, dB.
    pub sinr_db: Vec<f64>,
    /// Per-cell: serving (best-SINR) transmitter, −1 when no signal.
    pub best_tx: Vec<i32>,
    /// Per-cell: runner-up transmitter, −1 when fewer than two reach it.
    pub second_tx: Vec<i32>,
    /// Per-cell maxima over transmitters.
    pub max_rss_dbm: Vec<f64>,
    pub max_sinr_db: Vec<f64>,
    pub max_path_gain_db: Vec<f64>,
}

impl CoverageFields {
    pub fn plane<'a>(field: &'a [f64], t: usize, cells: usize) -> &'a [f64] {
        &field[t * cells..(t + 1) * cells]
    }
}

/// Combine per-transmitter sweeps into RSS / SINR fields and server choice.
///
/// SINR for transmitter t treats every other site as full-power co-channel
/// interference: `sinr_t = s_t / (Σ_{t'≠t} s_{t'} + n)` in linear power.
/// Ties in the arg-max go to the lowest transmitter index.
pub fn assemble_fields(
    per_tx: &[TxField],
    transmitters: &[Transmitter],
    noise_dbm: f64,
) -> CoverageFields {
    assert_eq!(per_tx.len(), transmitters.len());
    assert!(!per_tx.is_empty(), "assemble_fields requires at least one transmitter");
    let n_tx = per_tx.len();
    let cells = per_tx[0].path_gain_db.len();
    for f in per_tx {
        assert_eq!(f.path_gain_db.len(), cells, "all sweeps must share the grid");
    }

    let noise_lin = 10f64.powf(noise_dbm / 10.0);
    let mut out = CoverageFields {
        n_tx,
        cells,
        noise_dbm,
        path_gain_db: vec![NO_DATA; n_tx * cells],
        rss_dbm: vec![NO_DATA; n_tx * cells],
        sinr_db: vec![NO_DATA; n_tx * cells],
        best_tx: vec![-1; cells],
        second_tx: vec![-1; cells],
        max_rss_dbm: vec![NO_DATA; cells],
        max_sinr_db: vec![NO_DATA; cells],
        max_path_gain_db: vec![NO_DATA; cells],
    };

    for c in 0..cells {
        if per_tx[0].path_gain_db[c].is_nan() {
            continue; // invalid cell: every field keeps NO_DATA
        }
        // Linear RSS per transmitter (0 when no path reaches the cell).
        let mut rss_lin = vec![0.0f64; n_tx];
        let mut total = 0.0;
        for t in 0..n_tx {
            let pg = per_tx[t].path_gain_db[c];
            let rss = transmitters[t].power_dbm + pg;
            out.path_gain_db[t * cells + c] = pg;
            out.rss_dbm[t * cells + c] = rss;
            rss_lin[t] = 10f64.powf(rss / 10.0); // −∞ dBm → 0 linear
            total += rss_lin[t];
        }
        let (mut best, mut second) = (-1i32, -1i32);
        let (mut best_sinr, mut second_sinr) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        for t in 0..n_tx {
            let interference = total - rss_lin[t];
            let sinr = rss_lin[t] / (interference + noise_lin);
            let sinr_db = 10.0 * sinr.log10();
            out.sinr_db[t * cells + c] = sinr_db;
            if rss_lin[t] > 0.0 {
                // Strict '>' keeps the lowest index on ties.
                if sinr_db > best_sinr {
                    second = best;
                    second_sinr = best_sinr;
                    best = t as i32;
                    best_sinr = sinr_db;
                } else if sinr_db > second_sinr {
                    second = t as i32;
                    second_sinr = sinr_db;
                }
            }
        }
        out.best_tx[c] = best;
        out.second_tx[c] = second;
        let fold_max = |field: &[f64]| {
            (0..n_tx).fold(f64::NEG_INFINITY, |m, t| m.max(field[t * cells + c]))
        };
        out.max_rss_dbm[c] = fold_max(&out.rss_dbm);
        out.max_sinr_db[c] = fold_max(&out.sinr_db);
        out.max_path_gain_db[c] = fold_max(&out.path_gain_db);
    }
    out
}
