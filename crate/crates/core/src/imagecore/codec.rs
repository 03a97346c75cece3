use std::io::Cursor;
use std::path::Path;

use image::{DynamicImage, ImageReader, RgbImage};

use super::Image;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ImageFormat {
    Png,
    Jpeg,
}

impl ImageFormat {
    pub fn from_path(path: &Path) -> Option<Self> {
        let ext = path.extension()?.to_str()?.to_ascii_lowercase();
        match ext.as_str() {
            "png" => Some(Self::Png),
            "jpg" | "jpeg" => Some(Self::Jpeg),
            _ => None,
        }
    }
}

fn from_dynamic(img: DynamicImage) -> Image {
    // Grayscale is replicated and alpha dropped.
    let rgb = img.into_rgb8();
    let (w, h) = rgb.dimensions();
    let data = rgb.into_raw().into_iter().map(|b| f32::from(b) / 255.0).collect();
    Image::from_raw(w as usize, h as usize, data)
}

/// Decodes PNG or JPEG bytes.
pub fn decode_image(bytes: &[u8]) -> Result<Image> {
    decode_with_context(bytes, Path::new("<memory>"))
}

fn decode_with_context(bytes: &[u8], path: &Path) -> Result<Image> {
    let reader = ImageReader::new(Cursor::new(bytes))
        .with_guessed_format()
        .map_err(|e| Error::io(path, e))?;
    match reader.format() {
        Some(image::ImageFormat::Png | image::ImageFormat::Jpeg) => {}
        other => {
            return Err(Error::Decode {
                path: path.to_path_buf(),
                message: format!("unsupported format {other:?}"),
            })
        }
    }
    let img = reader.decode().map_err(|e| Error::Decode {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    Ok(from_dynamic(img))
}

pub fn decode_file(path: &Path) -> Result<Image> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_with_context(&bytes, path)
}

/// Reads width and height from the file header without decoding pixels.
pub fn probe_dimensions(path: &Path) -> Result<(usize, usize)> {
    let decode_err = |message: String| Error::Decode {
        path: path.to_path_buf(),
        message,
    };
    let reader = ImageReader::open(path)
        .map_err(|e| Error::io(path, e))?
        .with_guessed_format()
        .map_err(|e| Error::io(path, e))?;
    if !matches!(reader.format(), Some(image::ImageFormat::Png | image::ImageFormat::Jpeg)) {
        return Err(decode_err("not a PNG or JPEG file".into()));
    }
    let (w, h) = reader.into_dimensions().map_err(|e| decode_err(e.to_string()))?;
    Ok((w as usize, h as usize))
}

fn to_rgb8(img: &Image) -> RgbImage {
    let bytes = img
        .data()
        .iter()
        .map(|&v| (v * 255.0).round_ties_even().clamp(0.0, 255.0) as u8)
        .collect();
    RgbImage::from_raw(img.width() as u32, img.height() as u32, bytes).expect("buffer size matches dimensions")
}

pub fn encode_image(img: &Image, format: ImageFormat) -> Result<Vec<u8>> {
    let rgb = to_rgb8(img);
    let mut buf = Cursor::new(Vec::new());
    let res = match format {
        ImageFormat::Png => rgb.write_to(&mut buf, image::ImageFormat::Png),
        ImageFormat::Jpeg => {
            let enc = image::codecs::jpeg::JpegEncoder::new_with_quality(&mut buf, 95);
            rgb.write_with_encoder(enc)
        }
    };
    res.map_err(|e| Error::Encode(e.to_string()))?;
    Ok(buf.into_inner())
}

/// Encodes by file extension and writes to `path`.
pub fn write_image(img: &Image, path: &Path) -> Result<()> {
    let format = ImageFormat::from_path(path)
        .ok_or_else(|| Error::invalid(format!("{}: unsupported output extension", path.display())))?;
    let bytes = encode_image(img, format)?;
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}
