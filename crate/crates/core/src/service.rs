//! Service-level analysis over coverage fields: Shannon spectral efficiency
//! and throughput mapping, threshold coverage with empirical CDFs, and
//! macro-diversity margins between the best and second-best server.
//!
//! Everything here is a pure transformation of immutable arrays with a fixed
//! accumulation order, so reports are reproducible bit for bit.

use serde::{Deserialize, Serialize};

use crate::error::ServiceError;
use crate::radiomap::{CoverageFields, NO_DATA};

/// Quantile levels included in margin summaries.
const SUMMARY_QUANTILES: [f64; 5] = [0.10, 0.25, 0.50, 0.75, 0.90];

/// Maximum number of points kept when a CDF is serialized.
const CDF_EXPORT_POINTS: usize = 512;

/// Shannon spectral efficiency `C = log2(1 + sinr)` in bit/s/Hz.
///
/// `sinr` is linear (not dB) and must be nonnegative; zero signal maps to
/// exactly zero efficiency.
pub fn spectral_efficiency(sinr_linear: f64) -> f64 {
    debug_assert!(
        sinr_linear.is_nan() || sinr_linear >= 0.0,
        "SINR must be nonnegative, got {sinr_linear}"
    );
    (1.0 + sinr_linear).log2()
}

/// Achievable rate `R = B·C` in bit/s for bandwidth `B` in Hz.
pub fn throughput(c_bits_per_hz: f64, bandwidth_hz: f64) -> f64 {
    debug_assert!(bandwidth_hz > 0.0, "bandwidth must be positive");
    bandwidth_hz * c_bits_per_hz
}

/// Per-cell achievable rate of the serving (best-SINR) link.
#[derive(Debug, Clone)]
pub struct ThroughputField {
    /// bit/s per cell; NaN on invalid cells, exactly 0 where no signal
    /// reaches the cell.
    pub rate_bps: Vec<f64>,
    pub bandwidth_hz: f64,
}

/// Map assembled coverage fields to serving-link throughput.
pub fn throughput_field(
    fields: &CoverageFields,
    bandwidth_hz: f64,
) -> Result<ThroughputField, ServiceError> {
    if !(bandwidth_hz.is_finite() && bandwidth_hz > 0.0) {
        return Err(ServiceError::Analysis(format!(
            "bandwidth must be positive, got {bandwidth_hz}"
        )));
    }
    let rate_bps = fields
        .max_sinr_db
        .iter()
        .map(|&sinr_db| {
            if sinr_db.is_nan() {
                NO_DATA
            } else {
                // −∞ dB (no signal) → 0 linear → R = 0 exactly.
                throughput(spectral_efficiency(10f64.powf(sinr_db / 10.0)), bandwidth_hz)
            }
        })
        .collect();
    Ok(ThroughputField { rate_bps, bandwidth_hz })
}

/// One named minimum-rate service target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct ServiceThreshold {
    pub label: String,
    pub rate_bps: f64,
}

/// An ascending list of service targets.
#[derive(Debug, Clone, PartialEq)]
pub struct ServiceThresholds {
    entries: Vec<ServiceThreshold>,
}

impl ServiceThresholds {
    /// Build a threshold set; entries are sorted ascending by rate.
    /// Rates must be positive and finite, labels unique and non-empty.
    pub fn new(mut entries: Vec<ServiceThreshold>) -> Result<Self, ServiceError> {
        if entries.is_empty() {
            return Err(ServiceError::Analysis("at least one threshold is required".into()));
        }
        for e in &entries {
            if !(e.rate_bps.is_finite() && e.rate_bps > 0.0) {
                return Err(ServiceError::Analysis(format!(
                    "threshold '{}': rate must be positive, got {}",
                    e.label, e.rate_bps
                )));
            }
            if e.label.is_empty() {
                return Err(ServiceError::Analysis("threshold labels must be non-empty".into()));
            }
        }
        let mut labels: Vec<&str> = entries.iter().map(|e| e.label.as_str()).collect();
        labels.sort_unstable();
        if let Some(dup) = labels.windows(2).find(|w| w[0] == w[1]) {
            return Err(ServiceError::Analysis(format!("duplicate threshold label '{}'", dup[0])));
        }
        entries.sort_by(|a, b| a.rate_bps.total_cmp(&b.rate_bps));
        Ok(Self { entries })
    }

    /// Default service classes. Both XR targets in circulation are kept as
    /// distinct labelled entries — a conservative 30 Mbps floor ("XR-min")
    /// and the 1.7 Gbps premium target ("XR-premium") — so reports always
    /// say which one a number refers to.
    pub fn presets() -> Self {
        Self::new(vec![
            ServiceThreshold { label: "XR-min".into(), rate_bps: 30.0e6 },
            ServiceThreshold { label: "URLLC".into(), rate_bps: 100.0e6 },
            ServiceThreshold { label: "V2X".into(), rate_bps: 700.0e6 },
            ServiceThreshold { label: "XR-premium".into(), rate_bps: 1.7e9 },
        ])
        .expect("presets are valid")
    }

    pub fn entries(&self) -> &[ServiceThreshold] {
        &self.entries
    }
}

/// Inclusive coverage mask for one rate target.
#[derive(Debug, Clone)]
pub struct ThresholdMask {
    /// Per-cell flag; false on invalid cells.
    pub mask: Vec<bool>,
    pub covered: usize,
    pub valid: usize,
    /// covered / valid.
    pub fraction: f64,
}

/// Fraction of valid cells whose rate meets the target, boundary inclusive:
/// a cell at exactly the threshold counts as covered.
pub fn threshold_mask(field: &ThroughputField, rate_bps: f64) -> Result<ThresholdMask, ServiceError> {
    if !(rate_bps.is_finite() && rate_bps > 0.0) {
        return Err(ServiceError::Analysis(format!(
            "rate threshold must be positive, got {rate_bps}"
        )));
    }
    let mut covered = 0usize;
    let mut valid = 0usize;
    let mask: Vec<bool> = field
        .rate_bps
        .iter()
        .map(|&r| {
            if r.is_nan() {
                return false;
            }
            valid += 1;
            let hit = r >= rate_bps;
            covered += hit as usize;
            hit
        })
        .collect();
    if valid == 0 {
        return Err(ServiceError::Analysis("field has no valid cells".into()));
    }
    Ok(ThresholdMask { mask, covered, valid, fraction: covered as f64 / valid as f64 })
}

/// Empirical distribution of a sample set.
///
/// The full sorted sample is kept so evaluation is exact; only serialization
/// downsamples (to at most [`CDF_EXPORT_POINTS`] step points).
#[derive(Debug, Clone, PartialEq)]
pub struct Ecdf {
    values: Vec<f64>,
}

impl Ecdf {
    /// Build from samples, ignoring NaN entries. Errors when nothing is left.
    pub fn from_samples<I: IntoIterator<Item = f64>>(samples: I) -> Result<Self, ServiceError> {
        let mut values: Vec<f64> = samples.into_iter().filter(|v| !v.is_nan()).collect();
        if values.is_empty() {
            return Err(ServiceError::Analysis("empirical CDF needs at least one sample".into()));
        }
        values.sort_unstable_by(f64::total_cmp);
        Ok(Self { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        *self.values.last().unwrap()
    }

    /// Right-continuous CDF: fraction of samples ≤ `x`.
    pub fn eval(&self, x: f64) -> f64 {
        self.values.partition_point(|v| *v <= x) as f64 / self.values.len() as f64
    }

    /// Inclusive survival fraction: samples ≥ `x`, over the sample count.
    ///
    /// Equals `1 − eval(x)` everywhere except exactly at sample values,
    /// where the inclusive convention matches [`threshold_mask`].
    pub fn fraction_at_least(&self, x: f64) -> f64 {
        let below = self.values.partition_point(|v| *v < x);
        (self.values.len() - below) as f64 / self.values.len() as f64
    }

    /// Step points `(value, eval(value))` for serialization, at most
    /// `max_points` of them; the largest sample always closes the list
    /// with cumulative fraction 1.
    pub fn points(&self, max_points: usize) -> Vec<(f64, f64)> {
        assert!(max_points >= 2, "need room for at least the extremes");
        let n = self.values.len();
        let picks = max_points.min(n);
        let mut out: Vec<(f64, f64)> = Vec::with_capacity(picks);
        for k in 0..picks {
            // Evenly spaced order statistics, first and last inclusive.
            let idx = if picks == 1 { 0 } else { k * (n - 1) / (picks - 1) };
            let v = self.values[idx];
            let p = (v, self.eval(v));
            if out.last() != Some(&p) {
                out.push(p);
            }
        }
        out
    }
}

/// Empirical CDF of per-cell rate over valid cells.
pub fn empirical_cdf(field: &ThroughputField) -> Result<Ecdf, ServiceError> {
    Ecdf::from_samples(field.rate_bps.iter().copied())
}

/// Coverage for one threshold.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoverageEntry {
    pub label: String,
    pub rate_bps: f64,
    /// Valid cells meeting the rate, inclusive.
    pub covered_cells: usize,
    pub fraction: f64,
}

/// Fraction of cells between two consecutive thresholds (`hi` of `None`
/// means "above the top threshold").
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BandEntry {
    pub lo_label: String,
    pub lo_rate_bps: f64,
    pub hi_label: Option<String>,
    pub hi_rate_bps: Option<f64>,
    pub fraction: f64,
}

/// Threshold coverage, rate bands, and the throughput CDF for one field.
#[derive(Debug, Clone)]
pub struct ServiceReport {
    pub bandwidth_hz: f64,
    pub valid_cells: usize,
    /// One entry per threshold, ascending by rate.
    pub coverage: Vec<CoverageEntry>,
    /// Cells below the lowest threshold, as a fraction of valid cells.
    pub below_lowest_fraction: f64,
    /// Consecutive bands; together with `below_lowest_fraction` they
    /// partition the field (sum 1), and alone they sum to the lowest
    /// threshold's coverage.
    pub bands: Vec<BandEntry>,
    pub cdf: Ecdf,
}

/// Classify a throughput field against a threshold set.
pub fn coverage_report(
    field: &ThroughputField,
    thresholds: &ServiceThresholds,
) -> Result<ServiceReport, ServiceError> {
    let entries = thresholds.entries();
    let masks: Vec<ThresholdMask> = entries
        .iter()
        .map(|t| threshold_mask(field, t.rate_bps))
        .collect::<Result<_, _>>()?;
    let valid_cells = masks[0].valid;

    let coverage: Vec<CoverageEntry> = entries
        .iter()
        .zip(&masks)
        .map(|(t, m)| CoverageEntry {
            label: t.label.clone(),
            rate_bps: t.rate_bps,
            covered_cells: m.covered,
            fraction: m.fraction,
        })
        .collect();

    let mut bands = Vec::with_capacity(entries.len());
    for k in 0..entries.len() {
        let (hi_label, hi_rate_bps, fraction) = match entries.get(k + 1) {
            Some(next) => (
                Some(next.label.clone()),
                Some(next.rate_bps),
                masks[k].fraction - masks[k + 1].fraction,
            ),
            None => (None, None, masks[k].fraction),
        };
        bands.push(BandEntry {
            lo_label: entries[k].label.clone(),
            lo_rate_bps: entries[k].rate_bps,
            hi_label,
            hi_rate_bps,
            fraction,
        });
    }

    Ok(ServiceReport {
        bandwidth_hz: field.bandwidth_hz,
        valid_cells,
        coverage,
        below_lowest_fraction: 1.0 - masks[0].fraction,
        bands,
        cdf: empirical_cdf(field)?,
    })
}

impl ServiceReport {
    /// Human-readable summary: per-threshold coverage, the band partition,
    /// and a compact CDF table. Fractions are printed to 4 decimals.
    pub fn render_text(&self) -> String {
        use std::fmt::Write;
        let mut s = String::new();
        let _ = writeln!(s, "service coverage ({} valid cells, B = {} Hz)", self.valid_cells, self.bandwidth_hz);
        for c in &self.coverage {
            let _ = writeln!(
                s,
                "  >= {:>12} bit/s  {:<12} {:.4}  ({} cells)",
                format_rate(c.rate_bps),
                c.label,
                c.fraction,
                c.covered_cells
            );
        }
        let _ = writeln!(s, "  rate bands:");
        let _ = writeln!(
            s,
            "    below {:<12} {:.4}",
            self.bands[0].lo_label, self.below_lowest_fraction
        );
        for b in &self.bands {
            let hi = b.hi_label.as_deref().unwrap_or("-");
            let _ = writeln!(s, "    {:<12} .. {:<12} {:.4}", b.lo_label, hi, b.fraction);
        }
        let _ = writeln!(s, "  throughput CDF ({} points):", self.cdf.points(16).len());
        for (rate, frac) in self.cdf.points(16) {
            let _ = writeln!(s, "    {:>12} bit/s  {:.4}", format_rate(rate), frac);
        }
        s
    }

    /// Serde-friendly mirror with the CDF downsampled for export.
    pub fn to_doc(&self) -> ServiceReportDoc {
        ServiceReportDoc {
            bandwidth_hz: self.bandwidth_hz,
            valid_cells: self.valid_cells,
            coverage: self.coverage.clone(),
            below_lowest_fraction: self.below_lowest_fraction,
            bands: self.bands.clone(),
            cdf: self
                .cdf
                .points(CDF_EXPORT_POINTS)
                .into_iter()
                .map(|(rate_bps, fraction)| CdfPoint { rate_bps, fraction })
                .collect(),
        }
    }
}

fn format_rate(r: f64) -> String {
    if r >= 1e9 {
        format!("{:.3}G", r / 1e9)
    } else if r >= 1e6 {
        format!("{:.3}M", r / 1e6)
    } else {
        format!("{r:.0}")
    }
}

/// One serialized CDF step.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CdfPoint {
    pub rate_bps: f64,
    pub fraction: f64,
}

/// Machine-readable [`ServiceReport`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ServiceReportDoc {
    pub bandwidth_hz: f64,
    pub valid_cells: usize,
    pub coverage: Vec<CoverageEntry>,
    pub below_lowest_fraction: f64,
    pub bands: Vec<BandEntry>,
    pub cdf: Vec<CdfPoint>,
}

/// Best-to-second-best SINR margins on cells meeting a rate target.
#[derive(Debug, Clone)]
pub struct MacroDiversityReport {
    /// False for single-transmitter deployments, where the margin between
    /// the two strongest servers does not exist.
    pub available: bool,
    pub urllc_rate_bps: f64,
    /// Cells meeting the rate target (the margin's domain).
    pub defined_cells: usize,
    /// Per-cell margin in dB: NaN outside the domain, +∞ where only one
    /// transmitter reaches the cell.
    pub margin_db: Vec<f64>,
    pub finite_cells: usize,
    /// Fraction of defined cells with an infinite (censored) margin.
    pub censored_fraction: f64,
    /// Fractions of defined cells with margin ≤ 3 dB / ≤ 6 dB, and with a
    /// finite margin above 6 dB. `within_6_db` includes `within_3_db`;
    /// `within_6_db + above_6_db + censored_fraction = 1`.
    pub within_3_db: f64,
    pub within_6_db: f64,
    pub above_6_db: f64,
    /// `(level, margin)` order-statistic quantiles over finite margins only;
    /// censored cells are reported through `censored_fraction`, never folded
    /// into quantiles.
    pub quantiles: Vec<(f64, f64)>,
    /// CDF over finite margins; absent when no defined cell has one.
    pub cdf: Option<Ecdf>,
}

/// Margin analysis between the best and second-best server.
///
/// For every valid cell whose serving-link rate meets `urllc_rate_bps`, the
/// margin is the best SINR minus the second-best SINR in dB. A deployment
/// with fewer than two transmitters yields `available = false` and an empty
/// domain rather than an error.
pub fn macro_diversity(
    fields: &CoverageFields,
    urllc_rate_bps: f64,
    bandwidth_hz: f64,
) -> Result<MacroDiversityReport, ServiceError> {
    if !(urllc_rate_bps.is_finite() && urllc_rate_bps > 0.0) {
        return Err(ServiceError::Analysis(format!(
            "rate target must be positive, got {urllc_rate_bps}"
        )));
    }
    let rates = throughput_field(fields, bandwidth_hz)?;
    let available = fields.n_tx >= 2;

    let mut margin_db = vec![NO_DATA; fields.cells];
    let mut defined = 0usize;
    let mut censored = 0usize;
    let mut within3 = 0usize;
    let mut within6 = 0usize;
    let mut finite: Vec<f64> = Vec::new();
    if available {
        for c in 0..fields.cells {
            let r = rates.rate_bps[c];
            if r.is_nan() || r < urllc_rate_bps {
                continue;
            }
            defined += 1;
            let m = match fields.second_tx[c] {
                -1 => f64::INFINITY,
                t => fields.max_sinr_db[c] - fields.sinr_db[t as usize * fields.cells + c],
            };
            margin_db[c] = m;
            if m.is_finite() {
                finite.push(m);
                within3 += (m <= 3.0) as usize;
                within6 += (m <= 6.0) as usize;
            } else {
                censored += 1;
            }
        }
    }

    finite.sort_unstable_by(f64::total_cmp);
    let frac = |k: usize| if defined == 0 { 0.0 } else { k as f64 / defined as f64 };
    let quantiles = SUMMARY_QUANTILES
        .iter()
        .filter(|_| !finite.is_empty())
        .map(|&q| (q, order_statistic(&finite, q)))
        .collect();

    Ok(MacroDiversityReport {
        available,
        urllc_rate_bps,
        defined_cells: defined,
        finite_cells: finite.len(),
        censored_fraction: frac(censored),
        within_3_db: frac(within3),
        within_6_db: frac(within6),
        above_6_db: frac(finite.len() - within6),
        cdf: if finite.is_empty() { None } else { Some(Ecdf { values: finite }) },
        quantiles,
        margin_db,
    })
}

/// Type-1 (lower order statistic) quantile of a sorted nonempty slice.
fn order_statistic(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    let rank = ((q * n as f64).ceil() as usize).clamp(1, n);
    sorted[rank - 1]
}

impl MacroDiversityReport {
    pub fn render_text(&self) -> String {
        use std::fmt::Write;
        let mut s = String::new();
        if !self.available {
            let _ = writeln!(s, "macro-diversity unavailable: deployment has a single transmitter");
            return s;
        }
        let _ = writeln!(
            s,
            "macro-diversity margins on {} cells meeting {} bit/s",
            self.defined_cells,
            format_rate(self.urllc_rate_bps)
        );
        if self.defined_cells == 0 {
            let _ = writeln!(s, "  no cell meets the rate target");
            return s;
        }
        let _ = writeln!(s, "  margin <= 3 dB        {:.4}", self.within_3_db);
        let _ = writeln!(s, "  margin <= 6 dB        {:.4}", self.within_6_db);
        let _ = writeln!(s, "  margin  > 6 dB        {:.4}", self.above_6_db);
        let _ = writeln!(s, "  censored (single path) {:.4}", self.censored_fraction);
        for (q, m) in &self.quantiles {
            let _ = writeln!(s, "  q{:02.0}  {m:.3} dB", q * 100.0);
        }
        s
    }

    pub fn to_doc(&self) -> MacroDiversityDoc {
        MacroDiversityDoc {
            available: self.available,
            urllc_rate_bps: self.urllc_rate_bps,
            defined_cells: self.defined_cells,
            finite_cells: self.finite_cells,
            censored_fraction: self.censored_fraction,
            within_3_db: self.within_3_db,
            within_6_db: self.within_6_db,
            above_6_db: self.above_6_db,
            quantiles: self.quantiles.clone(),
            cdf: self
                .cdf
                .as_ref()
                .map(|c| {
                    c.points(CDF_EXPORT_POINTS)
                        .into_iter()
                        .map(|(margin_db, fraction)| MarginCdfPoint { margin_db, fraction })
                        .collect()
                })
                .unwrap_or_default(),
        }
    }
}

/// One serialized margin-CDF step.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MarginCdfPoint {
    pub margin_db: f64,
    pub fraction: f64,
}

/// Machine-readable [`MacroDiversityReport`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MacroDiversityDoc {
    pub available: bool,
    pub urllc_rate_bps: f64,
    pub defined_cells: usize,
    pub finite_cells: usize,
    pub censored_fraction: f64,
    pub within_3_db: f64,
    pub within_6_db: f64,
    pub above_6_db: f64,
    pub quantiles: Vec<(f64, f64)>,
    pub cdf: Vec<MarginCdfPoint>,
}
