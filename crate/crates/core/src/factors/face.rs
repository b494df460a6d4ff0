use alloc::string::String;
use alloc::vec::Vec;

use super::FactorError;
use crate::raster::{Channels, RasterImage};

pub const FACE_COLS: usize = 64;
pub const FACE_ROWS: usize = 32;
pub const FACE_CELLS: usize = FACE_COLS * FACE_ROWS;
/// Dark to light.
pub const RAMP: &[u8; 10] = b"@%#*+=-:. ";
pub const DEFAULT_FACE_THRESHOLD: f64 = 0.85;

/// A 64x32 ASCII-art rendering of a face, one ramp character per cell.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FaceTemplate {
    cells: Vec<u8>,
}

impl FaceTemplate {
    /// Builds a template from exactly 2048 ramp characters in row-major order.
    pub fn from_cells(cells: Vec<u8>) -> Result<Self, FactorError> {
        if cells.len() != FACE_CELLS || cells.iter().any(|c| !RAMP.contains(c)) {
            return Err(FactorError::InvalidTemplate);
        }
        Ok(FaceTemplate { cells })
    }

    /// Builds a template from 32 rows of 64 ramp characters.
    pub fn from_rows<'a>(rows: impl IntoIterator<Item = &'a str>) -> Result<Self, FactorError> {
        let mut cells = Vec::with_capacity(FACE_CELLS);
        let mut count = 0;
        for row in rows {
            if row.len() != FACE_COLS {
                return Err(FactorError::InvalidTemplate);
            }
            cells.extend_from_slice(row.as_bytes());
            count += 1;
        }
        if count != FACE_ROWS {
            return Err(FactorError::InvalidTemplate);
        }
        Self::from_cells(cells)
    }

    /// Every cell set to `c`.
    pub fn uniform(c: u8) -> Result<Self, FactorError> {
        Self::from_cells(alloc::vec![c; FACE_CELLS])
    }

    pub fn cells(&self) -> &[u8] {
        &self.cells
    }

    pub fn rows(&self) -> impl Iterator<Item = &str> {
        // Ramp characters are ASCII.
        self.cells
            .chunks(FACE_COLS)
            .map(|r| core::str::from_utf8(r).expect("ascii"))
    }

    /// The 32 rows joined by newlines, no trailing newline.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(FACE_ROWS * (FACE_COLS + 1));
        for (i, row) in self.rows().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            out.push_str(row);
        }
        out
    }
}

impl core::fmt::Debug for FaceTemplate {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str("FaceTemplate(64x32)")
    }
}

/// Renders an image as a 64x32 ASCII template.
///
/// The image is cut into cells of `width/64` x `height/32` pixels (leftover
/// right/bottom pixels are ignored); each cell's mean R, G, B is converted to
/// luma `round(0.299R + 0.587G + 0.114B)` and binned as `RAMP[min(luma/25.6, 9)]`.
/// Alpha is ignored.
pub fn face_to_template(image: &RasterImage) -> Result<FaceTemplate, FactorError> {
    let (w, h) = (image.width(), image.height());
    if (w as usize) < FACE_COLS || (h as usize) < FACE_ROWS {
        return Err(FactorError::ImageTooSmall {
            width: w,
            height: h,
        });
    }
    let cw = w / FACE_COLS as u32;
    let ch = h / FACE_ROWS as u32;
    let n = u64::from(cw) * u64::from(ch);

    let mut cells = Vec::with_capacity(FACE_CELLS);
    for row in 0..FACE_ROWS as u32 {
        for col in 0..FACE_COLS as u32 {
            let mut sum = [0u64; 3];
            for y in row * ch..(row + 1) * ch {
                for x in col * cw..(col + 1) * cw {
                    let px = image.rgb(x, y);
                    for c in 0..3 {
                        sum[c] += u64::from(px[c]);
                    }
                }
            }
            // Integer form of round(0.299 R + 0.587 G + 0.114 B) over channel means.
            let num = 299 * sum[0] + 587 * sum[1] + 114 * sum[2];
            let den = 1000 * n;
            let luma = (2 * num + den) / (2 * den);
            let index = ((luma * 10) / 256).min(9) as usize;
            cells.push(RAMP[index]);
        }
    }
    Ok(FaceTemplate { cells })
}

/// Paints `template` as gray `scale`x`scale` blocks that render back to the
/// same template. Produces a `64*scale` x `32*scale` RGB image.
pub fn render_template(template: &FaceTemplate, scale: u32) -> RasterImage {
    let scale = scale.max(1);
    let (w, h) = (FACE_COLS as u32 * scale, FACE_ROWS as u32 * scale);
    let mut samples = Vec::with_capacity(w as usize * h as usize * 3);
    for y in 0..h {
        for x in 0..w {
            let cell = template.cells[(y / scale) as usize * FACE_COLS + (x / scale) as usize];
            let index = RAMP
                .iter()
                .position(|&c| c == cell)
                .expect("ramp character") as u32;
            // Middle of the bin: luma * 10 / 256 == index.
            let gray = ((index * 256 + 128) / 10) as u8;
            samples.extend_from_slice(&[gray; 3]);
        }
    }
    RasterImage::new(w, h, Channels::Rgb, samples).expect("consistent dimensions")
}

/// Fraction of cells holding the same character.
pub fn match_face(a: &FaceTemplate, b: &FaceTemplate) -> f64 {
    let equal = a.cells.iter().zip(&b.cells).filter(|(x, y)| x == y).count();
    equal as f64 / FACE_CELLS as f64
}
