//! PNG/JPEG raster I/O. Outputs are always lossless PNG, 8-bit by default
//! or 16-bit on request.

use std::path::Path;

use image::{DynamicImage, ImageBuffer, ImageFormat, Luma, LumaA, Rgb, Rgba};

use crate::error::{Error, Result};
use crate::grid::ImageGrid;

fn image_err(path: &Path, source: image::ImageError) -> Error {
    match source {
        image::ImageError::IoError(source) => Error::Io {
            path: path.to_path_buf(),
            source,
        },
        source => Error::Image {
            path: path.to_path_buf(),
            source,
        },
    }
}

fn grid_from<T: Copy + Into<f64>>(w: u32, h: u32, channels: usize, raw: &[T], max: f64) -> Result<ImageGrid> {
    ImageGrid::new(
        h as usize,
        w as usize,
        channels,
        raw.iter().map(|&v| v.into() / max).collect(),
    )
}

/// Reads a PNG or JPEG into unit-range samples, keeping its channel layout.
pub fn read_image(path: &Path) -> Result<ImageGrid> {
    let img = image::open(path).map_err(|e| image_err(path, e))?;
    let (w, h) = (img.width(), img.height());
    match img {
        DynamicImage::ImageLuma8(b) => grid_from(w, h, 1, b.as_raw(), 255.0),
        DynamicImage::ImageLumaA8(b) => grid_from(w, h, 2, b.as_raw(), 255.0),
        DynamicImage::ImageRgb8(b) => grid_from(w, h, 3, b.as_raw(), 255.0),
        DynamicImage::ImageRgba8(b) => grid_from(w, h, 4, b.as_raw(), 255.0),
        DynamicImage::ImageLuma16(b) => grid_from(w, h, 1, b.as_raw(), 65535.0),
        DynamicImage::ImageLumaA16(b) => grid_from(w, h, 2, b.as_raw(), 65535.0),
        DynamicImage::ImageRgb16(b) => grid_from(w, h, 3, b.as_raw(), 65535.0),
        DynamicImage::ImageRgba16(b) => grid_from(w, h, 4, b.as_raw(), 65535.0),
        other => {
            let b = other.to_rgba32f();
            grid_from(w, h, 4, b.as_raw(), 1.0)
        }
    }
}

fn quantize<T: TryFrom<u32>>(v: f64, max: f64) -> T {
    let q = (v.clamp(0.0, 1.0) * max).round() as u32;
    T::try_from(q).ok().expect("quantized sample fits")
}

/// Encodes a grid as PNG; `deep` selects 16 bits per sample.
pub fn write_png(path: &Path, img: &ImageGrid, deep: bool) -> Result<()> {
    let (w, h) = (img.width() as u32, img.height() as u32);
    let dynamic = if deep {
        let raw: Vec<u16> = img.data().iter().map(|&v| quantize(v, 65535.0)).collect();
        match img.channels() {
            1 => ImageBuffer::<Luma<u16>, _>::from_raw(w, h, raw).map(DynamicImage::ImageLuma16),
            2 => ImageBuffer::<LumaA<u16>, _>::from_raw(w, h, raw).map(DynamicImage::ImageLumaA16),
            3 => ImageBuffer::<Rgb<u16>, _>::from_raw(w, h, raw).map(DynamicImage::ImageRgb16),
            _ => ImageBuffer::<Rgba<u16>, _>::from_raw(w, h, raw).map(DynamicImage::ImageRgba16),
        }
    } else {
        let raw: Vec<u8> = img.data().iter().map(|&v| quantize(v, 255.0)).collect();
        match img.channels() {
            1 => ImageBuffer::<Luma<u8>, _>::from_raw(w, h, raw).map(DynamicImage::ImageLuma8),
            2 => ImageBuffer::<LumaA<u8>, _>::from_raw(w, h, raw).map(DynamicImage::ImageLumaA8),
            3 => ImageBuffer::<Rgb<u8>, _>::from_raw(w, h, raw).map(DynamicImage::ImageRgb8),
            _ => ImageBuffer::<Rgba<u8>, _>::from_raw(w, h, raw).map(DynamicImage::ImageRgba8),
        }
    }
    .expect("buffer length matches the grid");
    dynamic
        .save_with_format(path, ImageFormat::Png)
        .map_err(|e| image_err(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn png_round_trip_8_and_16_bit() {
        let dir = tempfile::tempdir().unwrap();
        let img = ImageGrid::from_fn(5, 7, 3, |m, n, c| ((m * 7 + n) * 3 + c) as f64 / 104.0);
        for (deep, step) in [(false, 255.0), (true, 65535.0)] {
            let path = dir.path().join(format!("x{deep}.png"));
            write_png(&path, &img, deep).unwrap();
            let back = read_image(&path).unwrap();
            assert_eq!(back.shape(), img.shape());
            for (a, b) in back.data().iter().zip(img.data()) {
                assert!((a - b).abs() <= 0.5 / step + 1e-12);
            }
        }
        for ch in [1, 2, 4] {
            let g = ImageGrid::filled(3, 4, ch, 0.5);
            let path = dir.path().join(format!("c{ch}.png"));
            write_png(&path, &g, false).unwrap();
            assert_eq!(read_image(&path).unwrap().channels(), ch);
        }
    }

    #[test]
    fn missing_file_is_io_error() {
        let err = read_image(Path::new("/nonexistent/none.png")).unwrap_err();
        assert!(err.is_io());
    }
}
