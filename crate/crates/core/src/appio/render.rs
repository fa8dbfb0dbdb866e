//! Raster heatmaps of scalar fields: one pixel block per grid cell, a
//! linear palette between configurable dB bounds, transmitter markers, and
//! an embedded colour-bar legend with bitmap numerals.

use std::path::Path;

use image::{Rgb, RgbImage};

use crate::error::RunError;

use super::export::FieldFile;

const NO_DATA_COLOR: Rgb<u8> = Rgb([128, 128, 128]);
const MARKER_COLOR: Rgb<u8> = Rgb([230, 32, 32]);
const BACKGROUND: Rgb<u8> = Rgb([255, 255, 255]);
const TEXT_COLOR: Rgb<u8> = Rgb([0, 0, 0]);

const LEGEND_PAD: u32 = 4;
const LEGEND_BAR_W: u32 = 12;
const LEGEND_TEXT_W: u32 = 44;

/// Rendering knobs. Values outside `[db_min, db_max]` clamp to the palette
/// ends; NaN cells use a reserved neutral grey.
#[derive(Debug, Clone)]
pub struct RenderOptions {
    pub db_min: f64,
    pub db_max: f64,
    /// Square pixels per grid cell.
    pub cell_px: u32,
    /// Transmitter positions in world x, y (metres).
    pub markers: Vec<(f64, f64)>,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions { db_min: -120.0, db_max: -40.0, cell_px: 4, markers: Vec::new() }
    }
}

/// Five-anchor gradient, dark blue → yellow, linearly interpolated.
fn palette(t: f64) -> Rgb<u8> {
    const ANCHORS: [[f64; 3]; 5] = [
        [13.0, 8.0, 135.0],
        [126.0, 3.0, 168.0],
        [204.0, 71.0, 120.0],
        [248.0, 149.0, 64.0],
        [240.0, 249.0, 33.0],
    ];
    let t = t.clamp(0.0, 1.0) * (ANCHORS.len() - 1) as f64;
    let k = (t.floor() as usize).min(ANCHORS.len() - 2);
    let f = t - k as f64;
    let mix = |a: f64, b: f64| (a + (b - a) * f).round() as u8;
    Rgb([
        mix(ANCHORS[k][0], ANCHORS[k + 1][0]),
        mix(ANCHORS[k][1], ANCHORS[k + 1][1]),
        mix(ANCHORS[k][2], ANCHORS[k + 1][2]),
    ])
}

/// 5×7 glyphs for legend labels; bit 4 is the leftmost column.
fn glyph(c: char) -> [u8; 7] {
    match c {
        '0' => [0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E],
        '1' => [0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E],
        '2' => [0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F],
        '3' => [0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E],
        '4' => [0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02],
        '5' => [0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E],
        '6' => [0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E],
        '7' => [0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08],
        '8' => [0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E],
        '9' => [0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C],
        '-' => [0x00, 0x00, 0x00, 0x1F, 0x00, 0x00, 0x00],
        '.' => [0x00, 0x00, 0x00, 0x00, 0x00, 0x0C, 0x0C],
        _ => [0; 7],
    }
}

fn draw_text(img: &mut RgbImage, x0: u32, y0: u32, text: &str) {
    for (k, c) in text.chars().enumerate() {
        let rows = glyph(c);
        for (dy, row) in rows.iter().enumerate() {
            for dx in 0..5u32 {
                if row & (0x10 >> dx) != 0 {
                    let (x, y) = (x0 + k as u32 * 6 + dx, y0 + dy as u32);
                    if x < img.width() && y < img.height() {
                        img.put_pixel(x, y, TEXT_COLOR);
                    }
                }
            }
        }
    }
}

/// Render a field to pixels. Row 0 of the grid sits at the bottom of the
/// image (north up).
pub fn render_heatmap(field: &FieldFile, opts: &RenderOptions) -> Result<RgbImage, RunError> {
    let m = &field.meta;
    if field.values.len() != m.cells() || m.nx == 0 || m.ny == 0 {
        return Err(RunError::Render(format!(
            "field shape mismatch: {} values for a {}x{} grid",
            field.values.len(),
            m.nx,
            m.ny
        )));
    }
    if opts.cell_px == 0 {
        return Err(RunError::Render("cell-px must be at least 1".into()));
    }
    if !(opts.db_min.is_finite() && opts.db_max.is_finite() && opts.db_max > opts.db_min) {
        return Err(RunError::Render(format!(
            "colour scale needs db-min < db-max, got [{}, {}]",
            opts.db_min, opts.db_max
        )));
    }

    let px = opts.cell_px;
    let grid_w = m.nx as u32 * px;
    let grid_h = m.ny as u32 * px;
    let h = grid_h.max(2 * 9 + 2); // room for the two legend labels
    let w = grid_w + LEGEND_PAD + LEGEND_BAR_W + LEGEND_PAD + LEGEND_TEXT_W;
    let mut img = RgbImage::from_pixel(w, h, BACKGROUND);

    // Cells.
    for j in 0..m.ny {
        for i in 0..m.nx {
            let v = field.values[j * m.nx + i];
            let color = if v.is_nan() {
                NO_DATA_COLOR
            } else {
                palette((v - opts.db_min) / (opts.db_max - opts.db_min))
            };
            let (bx, by) = (i as u32 * px, (m.ny - 1 - j) as u32 * px);
            for dy in 0..px {
                for dx in 0..px {
                    img.put_pixel(bx + dx, by + dy, color);
                }
            }
        }
    }

    // Transmitter markers: a cross centred on the containing cell.
    for &(x, y) in &opts.markers {
        let fi = (x - m.origin_x) / m.spacing;
        let fj = (y - m.origin_y) / m.spacing;
        let (i, j) = (fi.round() as i64, fj.round() as i64);
        if i < 0 || j < 0 || i >= m.nx as i64 || j >= m.ny as i64 {
            continue;
        }
        let cx = i as u32 * px + px / 2;
        let cy = (m.ny as u32 - 1 - j as u32) * px + px / 2;
        let r = (px as i64).max(3);
        for d in -r..=r {
            for (mx, my) in [(cx as i64 + d, cy as i64), (cx as i64, cy as i64 + d)] {
                if mx >= 0 && my >= 0 && (mx as u32) < grid_w && (my as u32) < grid_h {
                    img.put_pixel(mx as u32, my as u32, MARKER_COLOR);
                }
            }
        }
    }

    // Legend: colour bar spanning the full height, max at the top.
    let bar_x = grid_w + LEGEND_PAD;
    for y in 0..h {
        let t = 1.0 - y as f64 / (h - 1) as f64;
        let color = palette(t);
        for dx in 0..LEGEND_BAR_W {
            img.put_pixel(bar_x + dx, y, color);
        }
    }
    let text_x = bar_x + LEGEND_BAR_W + LEGEND_PAD;
    draw_text(&mut img, text_x, 1, &format!("{:.1}", opts.db_max));
    draw_text(&mut img, text_x, h - 8, &format!("{:.1}", opts.db_min));

    Ok(img)
}

/// Encode to PNG on disk.
pub fn write_png(path: &Path, img: &RgbImage) -> Result<(), RunError> {
    img.save_with_format(path, image::ImageFormat::Png)
        .map_err(|e| RunError::Render(format!("writing {}: {e}", path.display())))
}
