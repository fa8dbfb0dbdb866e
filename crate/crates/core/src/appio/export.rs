//! Field-file import/export.
//!
//! A field is one scalar per grid cell, row-major (x fastest). Two on-disk
//! forms carry identical information:
//!
//! * **binary** — a 64-byte little-endian header followed by `nx·ny` f64
//!   values. Header layout (offsets in bytes):
//!   `0..8` magic `"RAYCOVRF"`, `8..12` version (u32, currently 1),
//!   `12..16` reserved (zero), `16..24` nx (u64), `24..32` ny (u64),
//!   `32..40` spacing (f64, m), `40..48` origin x (f64), `48..56` origin y
//!   (f64), `56..64` the no-data sentinel (canonical NaN).
//! * **csv** — a `# raycover-field …` metadata line carrying the same
//!   header fields, a `x,y,value` column line, then one row per cell with
//!   the cell-centre coordinates. Values print in shortest round-trip form,
//!   so csv → binary conversion is lossless.

use std::fmt;
use std::io::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::error::FieldIoError;

pub const FIELD_MAGIC: [u8; 8] = *b"RAYCOVRF";
pub const FIELD_VERSION: u32 = 1;
const HEADER_LEN: usize = 64;

/// Grid placement shared by every field of one run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldMeta {
    pub nx: usize,
    pub ny: usize,
    /// Cell pitch in metres.
    pub spacing: f64,
    /// Centre of cell (0, 0).
    pub origin_x: f64,
    pub origin_y: f64,
}

impl FieldMeta {
    pub fn cells(&self) -> usize {
        self.nx * self.ny
    }
}

/// One scalar field with its grid placement.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldFile {
    pub meta: FieldMeta,
    /// Row-major, `meta.cells()` long; NaN marks no-data cells.
    pub values: Vec<f64>,
}

/// On-disk representation choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FieldFormat {
    #[default]
    Csv,
    Binary,
}

impl FieldFormat {
    pub fn extension(self) -> &'static str {
        match self {
            FieldFormat::Csv => "csv",
            FieldFormat::Binary => "bin",
        }
    }
}

impl fmt::Display for FieldFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FieldFormat::Csv => "csv",
            FieldFormat::Binary => "binary",
        })
    }
}

impl FromStr for FieldFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(FieldFormat::Csv),
            "binary" => Ok(FieldFormat::Binary),
            other => Err(format!("unknown field format '{other}' (csv|binary)")),
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> FieldIoError + '_ {
    move |source| FieldIoError::Io { path: path.display().to_string(), source }
}

fn format_err(path: &Path, reason: impl Into<String>) -> FieldIoError {
    FieldIoError::Format { path: path.display().to_string(), reason: reason.into() }
}

fn check_shape(path: &Path, field: &FieldFile) -> Result<(), FieldIoError> {
    if field.values.len() != field.meta.cells() {
        return Err(format_err(
            path,
            format!(
                "value count {} does not match {}x{} grid",
                field.values.len(),
                field.meta.nx,
                field.meta.ny
            ),
        ));
    }
    Ok(())
}

/// Write `field` to `path` in the requested format.
pub fn write_field(path: &Path, field: &FieldFile, format: FieldFormat) -> Result<(), FieldIoError> {
    match format {
        FieldFormat::Csv => write_csv(path, field),
        FieldFormat::Binary => write_binary(path, field),
    }
}

/// Read a field file, recognising the format from its leading bytes.
pub fn read_field(path: &Path) -> Result<FieldFile, FieldIoError> {
    let bytes = std::fs::read(path).map_err(io_err(path))?;
    if bytes.len() >= FIELD_MAGIC.len() && bytes[..FIELD_MAGIC.len()] == FIELD_MAGIC {
        parse_binary(path, &bytes)
    } else {
        let text = std::str::from_utf8(&bytes)
            .map_err(|_| format_err(path, "neither a binary field nor utf-8 csv"))?;
        parse_csv(path, text)
    }
}

pub fn write_binary(path: &Path, field: &FieldFile) -> Result<(), FieldIoError> {
    check_shape(path, field)?;
    let mut buf = Vec::with_capacity(HEADER_LEN + 8 * field.values.len());
    buf.extend_from_slice(&FIELD_MAGIC);
    buf.extend_from_slice(&FIELD_VERSION.to_le_bytes());
    buf.extend_from_slice(&0u32.to_le_bytes());
    buf.extend_from_slice(&(field.meta.nx as u64).to_le_bytes());
    buf.extend_from_slice(&(field.meta.ny as u64).to_le_bytes());
    buf.extend_from_slice(&field.meta.spacing.to_le_bytes());
    buf.extend_from_slice(&field.meta.origin_x.to_le_bytes());
    buf.extend_from_slice(&field.meta.origin_y.to_le_bytes());
    buf.extend_from_slice(&f64::NAN.to_le_bytes());
    debug_assert_eq!(buf.len(), HEADER_LEN);
    for v in &field.values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    std::fs::write(path, buf).map_err(io_err(path))
}

pub fn read_binary(path: &Path) -> Result<FieldFile, FieldIoError> {
    let bytes = std::fs::read(path).map_err(io_err(path))?;
    parse_binary(path, &bytes)
}

fn parse_binary(path: &Path, bytes: &[u8]) -> Result<FieldFile, FieldIoError> {
    if bytes.len() < HEADER_LEN {
        return Err(format_err(path, format!("header truncated at {} bytes", bytes.len())));
    }
    let f64_at = |off: usize| f64::from_le_bytes(bytes[off..off + 8].try_into().unwrap());
    let u64_at = |off: usize| u64::from_le_bytes(bytes[off..off + 8].try_into().unwrap());
    if bytes[..8] != FIELD_MAGIC {
        return Err(format_err(path, "bad magic"));
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
    if version != FIELD_VERSION {
        return Err(format_err(path, format!("unsupported version {version}")));
    }
    let meta = FieldMeta {
        nx: u64_at(16) as usize,
        ny: u64_at(24) as usize,
        spacing: f64_at(32),
        origin_x: f64_at(40),
        origin_y: f64_at(48),
    };
    if !f64_at(56).is_nan() {
        return Err(format_err(path, "no-data sentinel must be NaN"));
    }
    let want = HEADER_LEN + 8 * meta.cells();
    if bytes.len() != want {
        return Err(format_err(
            path,
            format!("expected {want} bytes for a {}x{} grid, found {}", meta.nx, meta.ny, bytes.len()),
        ));
    }
    let values = bytes[HEADER_LEN..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(FieldFile { meta, values })
}

pub fn write_csv(path: &Path, field: &FieldFile) -> Result<(), FieldIoError> {
    check_shape(path, field)?;
    let m = &field.meta;
    let mut buf = Vec::new();
    // Infallible Vec writes; errors surface on the final fs write.
    let _ = writeln!(
        buf,
        "# raycover-field v{FIELD_VERSION} nx={} ny={} spacing={} origin-x={} origin-y={} no-data=NaN",
        m.nx, m.ny, m.spacing, m.origin_x, m.origin_y
    );
    let _ = writeln!(buf, "x,y,value");
    for j in 0..m.ny {
        for i in 0..m.nx {
            let x = m.origin_x + i as f64 * m.spacing;
            let y = m.origin_y + j as f64 * m.spacing;
            let _ = writeln!(buf, "{x},{y},{}", field.values[j * m.nx + i]);
        }
    }
    std::fs::write(path, buf).map_err(io_err(path))
}

pub fn read_csv(path: &Path) -> Result<FieldFile, FieldIoError> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    parse_csv(path, &text)
}

fn parse_csv(path: &Path, text: &str) -> Result<FieldFile, FieldIoError> {
    let mut lines = text.lines();
    let meta_line = lines
        .next()
        .ok_or_else(|| format_err(path, "empty file"))?;
    let tag = format!("# raycover-field v{FIELD_VERSION} ");
    let rest = meta_line
        .strip_prefix(&tag)
        .ok_or_else(|| format_err(path, format!("missing metadata line (expected '{tag}…')")))?;

    let mut nx = None;
    let mut ny = None;
    let mut spacing = None;
    let mut origin_x = None;
    let mut origin_y = None;
    for kv in rest.split_whitespace() {
        let (key, value) = kv
            .split_once('=')
            .ok_or_else(|| format_err(path, format!("malformed metadata entry '{kv}'")))?;
        let usize_of = || value.parse::<usize>().map_err(|_| format_err(path, format!("malformed metadata value '{kv}'")));
        let f64_of = || value.parse::<f64>().map_err(|_| format_err(path, format!("malformed metadata value '{kv}'")));
        match key {
            "nx" => nx = Some(usize_of()?),
            "ny" => ny = Some(usize_of()?),
            "spacing" => spacing = Some(f64_of()?),
            "origin-x" => origin_x = Some(f64_of()?),
            "origin-y" => origin_y = Some(f64_of()?),
            "no-data" => {}
            other => return Err(format_err(path, format!("unknown metadata key '{other}'"))),
        }
    }
    let missing = |name: &str| format_err(path, format!("metadata key '{name}' missing"));
    let meta = FieldMeta {
        nx: nx.ok_or_else(|| missing("nx"))?,
        ny: ny.ok_or_else(|| missing("ny"))?,
        spacing: spacing.ok_or_else(|| missing("spacing"))?,
        origin_x: origin_x.ok_or_else(|| missing("origin-x"))?,
        origin_y: origin_y.ok_or_else(|| missing("origin-y"))?,
    };

    match lines.next() {
        Some("x,y,value") => {}
        other => return Err(format_err(path, format!("expected 'x,y,value' header, got {other:?}"))),
    }
    let mut values = Vec::with_capacity(meta.cells());
    for (k, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let value = line
            .rsplit_once(',')
            .ok_or_else(|| format_err(path, format!("row {k}: not a csv row: '{line}'")))?
            .1;
        let v = value
            .parse::<f64>()
            .map_err(|_| format_err(path, format!("row {k}: bad value '{value}'")))?;
        values.push(v);
    }
    if values.len() != meta.cells() {
        return Err(format_err(
            path,
            format!("{} rows for a {}x{} grid", values.len(), meta.nx, meta.ny),
        ));
    }
    Ok(FieldFile { meta, values })
}
