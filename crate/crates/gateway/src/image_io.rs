//! 8-bit RGB/RGBA non-interlaced PNG in and out. Nothing else is accepted:
//! lossy formats would destroy the embedded bits.

use std::io::Cursor;
use std::path::Path;

use fourfa_core::raster::{Channels, RasterError, RasterImage};
use png::{BitDepth, ColorType, Transformations};

#[derive(Debug, thiserror::Error)]
pub enum ImageError {
    #[error("not a readable PNG: {0}")]
    Decode(#[from] png::DecodingError),
    #[error("PNG encoding failed: {0}")]
    Encode(#[from] png::EncodingError),
    #[error("unsupported PNG: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Raster(#[from] RasterError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

pub fn decode_png(bytes: &[u8]) -> Result<RasterImage, ImageError> {
    let mut decoder = png::Decoder::new(Cursor::new(bytes));
    decoder.set_transformations(Transformations::IDENTITY);
    let mut reader = decoder.read_info()?;
    let info = reader.info();
    if info.interlaced {
        return Err(ImageError::Unsupported(
            "interlaced images are not supported".into(),
        ));
    }
    let channels = match (info.color_type, info.bit_depth) {
        (ColorType::Rgb, BitDepth::Eight) => Channels::Rgb,
        (ColorType::Rgba, BitDepth::Eight) => Channels::Rgba,
        (color, depth) => {
            return Err(ImageError::Unsupported(format!(
                "{color:?} at {depth:?} bits; need 8-bit RGB or RGBA"
            )))
        }
    };
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| ImageError::Unsupported("image too large".into()))?;
    let mut buf = vec![0; size];
    let frame = reader.next_frame(&mut buf)?;
    buf.truncate(frame.buffer_size());
    Ok(RasterImage::new(frame.width, frame.height, channels, buf)?)
}

pub fn encode_png(image: &RasterImage) -> Result<Vec<u8>, ImageError> {
    let mut out = Vec::new();
    {
        let mut encoder = png::Encoder::new(&mut out, image.width(), image.height());
        encoder.set_color(match image.channels() {
            Channels::Rgb => ColorType::Rgb,
            Channels::Rgba => ColorType::Rgba,
        });
        encoder.set_depth(BitDepth::Eight);
        let mut writer = encoder.write_header()?;
        writer.write_image_data(image.samples())?;
        writer.finish()?;
    }
    Ok(out)
}

pub fn read_png(path: &Path) -> Result<RasterImage, ImageError> {
    let bytes = std::fs::read(path).map_err(|source| ImageError::Io {
        path: path.display().to_string(),
        source,
    })?;
    decode_png(&bytes)
}

pub fn write_png(path: &Path, image: &RasterImage) -> Result<(), ImageError> {
    let bytes = encode_png(image)?;
    std::fs::write(path, bytes).map_err(|source| ImageError::Io {
        path: path.display().to_string(),
        source,
    })
}
