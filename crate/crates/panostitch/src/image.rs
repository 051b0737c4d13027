//! Pixel buffers, binary PGM/PPM I/O, grayscale conversion, megapixel-tier
//! resizing and sub-pixel sampling.
//!
//! Two raster types are shared by the whole pipeline: [`Image`] is the 8-bit
//! interleaved carrier that enters and leaves the program, [`GrayImageF`] is
//! the `[0,1]` luminance plane that feature detection, seam finding and gain
//! estimation work on.

use std::fmt;
use std::fs;
use std::io;
use std::path::Path;

use thiserror::Error;

/// Errors from raster construction and PGM/PPM file handling.
#[derive(Debug, Error)]
pub enum ImageError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("unsupported maxval {0} (only 255 is supported)")]
    UnsupportedMaxval(u32),
    #[error("truncated payload: expected {expected} bytes, found {found}")]
    TruncatedPayload { expected: usize, found: usize },
    #[error("invalid image: {0}")]
    InvalidImage(String),
}

/// Interleaved 8-bit raster with 1 (gray) or 3 (RGB) channels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Image {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<u8>,
}

impl Image {
    /// Builds an image from raw interleaved samples.
    ///
    /// Fails unless `width, height >= 1`, `channels` is 1 or 3 and
    /// `data.len() == width * height * channels`.
    pub fn new(
        width: usize,
        height: usize,
        channels: usize,
        data: Vec<u8>,
    ) -> Result<Self, ImageError> {
        if width == 0 || height == 0 {
            return Err(ImageError::InvalidImage(format!(
                "zero dimension {width}x{height}"
            )));
        }
        if channels != 1 && channels != 3 {
            return Err(ImageError::InvalidImage(format!(
                "unsupported channel count {channels}"
            )));
        }
        let expected = width * height * channels;
        if data.len() != expected {
            return Err(ImageError::InvalidImage(format!(
                "data length {} does not match {width}x{height}x{channels}",
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }

    /// Constant-valued image.
    pub fn filled(width: usize, height: usize, channels: usize, value: u8) -> Self {
        Self::new(
            width,
            height,
            channels,
            vec![value; width * height * channels],
        )
        .expect("filled image dimensions must be valid")
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [u8] {
        &mut self.data
    }

    /// Samples of pixel (x, y); one byte for gray, three for RGB.
    pub fn pixel(&self, x: usize, y: usize) -> &[u8] {
        let i = (y * self.width + x) * self.channels;
        &self.data[i..i + self.channels]
    }

    pub fn set_pixel(&mut self, x: usize, y: usize, value: &[u8]) {
        let i = (y * self.width + x) * self.channels;
        self.data[i..i + self.channels].copy_from_slice(value);
    }

    /// Returns an RGB copy; gray input is replicated across channels.
    pub fn to_rgb(&self) -> Image {
        if self.channels == 3 {
            return self.clone();
        }
        let mut data = Vec::with_capacity(self.width * self.height * 3);
        for &v in &self.data {
            data.extend_from_slice(&[v, v, v]);
        }
        Image {
            width: self.width,
            height: self.height,
            channels: 3,
            data,
        }
    }

    /// Bilinear sample of a 3-channel image at (x, y), or `None` outside
    /// `[0, w-1] x [0, h-1]`. See [`GrayImageF::bilinear_sample`] for the
    /// sampling rule.
    pub fn bilinear_sample_rgb(&self, x: f64, y: f64) -> Option<[f64; 3]> {
        assert_eq!(self.channels, 3, "bilinear_sample_rgb needs an RGB image");
        let (x0, y0, fx, fy) = bilinear_setup(x, y, self.width, self.height)?;
        let x1 = (x0 + 1).min(self.width - 1);
        let y1 = (y0 + 1).min(self.height - 1);
        let mut out = [0.0; 3];
        for (c, slot) in out.iter_mut().enumerate() {
            let p00 = self.data[(y0 * self.width + x0) * 3 + c] as f64;
            let p10 = self.data[(y0 * self.width + x1) * 3 + c] as f64;
            let p01 = self.data[(y1 * self.width + x0) * 3 + c] as f64;
            let p11 = self.data[(y1 * self.width + x1) * 3 + c] as f64;
            let top = p00 + (p10 - p00) * fx;
            let bot = p01 + (p11 - p01) * fx;
            *slot = top + (bot - top) * fy;
        }
        Some(out)
    }

    /// Bilinear resample to `out_w x out_h` with pixel-center alignment.
    pub fn resized(&self, out_w: usize, out_h: usize) -> Image {
        assert!(out_w >= 1 && out_h >= 1);
        let sx = self.width as f64 / out_w as f64;
        let sy = self.height as f64 / out_h as f64;
        let mut data = vec![0u8; out_w * out_h * self.channels];
        for oy in 0..out_h {
            let y = center_mapped(oy, sy, self.height);
            let y0 = y.floor() as usize;
            let y1 = (y0 + 1).min(self.height - 1);
            let fy = y - y0 as f64;
            for ox in 0..out_w {
                let x = center_mapped(ox, sx, self.width);
                let x0 = x.floor() as usize;
                let x1 = (x0 + 1).min(self.width - 1);
                let fx = x - x0 as f64;
                for c in 0..self.channels {
                    let p00 = self.data[(y0 * self.width + x0) * self.channels + c] as f64;
                    let p10 = self.data[(y0 * self.width + x1) * self.channels + c] as f64;
                    let p01 = self.data[(y1 * self.width + x0) * self.channels + c] as f64;
                    let p11 = self.data[(y1 * self.width + x1) * self.channels + c] as f64;
                    let top = p00 + (p10 - p00) * fx;
                    let bot = p01 + (p11 - p01) * fx;
                    let v = top + (bot - top) * fy;
                    data[(oy * out_w + ox) * self.channels + c] = v.round().clamp(0.0, 255.0) as u8;
                }
            }
        }
        Image {
            width: out_w,
            height: out_h,
            channels: self.channels,
            data,
        }
    }
}

impl fmt::Display for Image {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}x{} image", self.width, self.height, self.channels)
    }
}

/// Single-channel luminance raster with samples in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImageF {
    width: usize,
    height: usize,
    data: Vec<f32>,
}

impl GrayImageF {
    pub fn new(width: usize, height: usize, data: Vec<f32>) -> Self {
        assert_eq!(data.len(), width * height, "sample count mismatch");
        debug_assert!(
            data.iter().all(|v| (0.0..=1.0).contains(v)),
            "luminance out of [0,1]"
        );
        Self {
            width,
            height,
            data,
        }
    }

    pub fn filled(width: usize, height: usize, value: f32) -> Self {
        Self::new(width, height, vec![value; width * height])
    }

    /// Builds a raster from a generator, clamping samples into `[0, 1]`.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f32) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y).clamp(0.0, 1.0));
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize) -> f32 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: f32) {
        self.data[y * self.width + x] = v;
    }

    /// Bilinear interpolation of the four neighbours of (x, y).
    ///
    /// Defined on `[0, w-1] x [0, h-1]`; anything outside returns `None`,
    /// which warping turns into mask holes.
    pub fn bilinear_sample(&self, x: f64, y: f64) -> Option<f32> {
        let (x0, y0, fx, fy) = bilinear_setup(x, y, self.width, self.height)?;
        let x1 = (x0 + 1).min(self.width - 1);
        let y1 = (y0 + 1).min(self.height - 1);
        let p00 = self.at(x0, y0) as f64;
        let p10 = self.at(x1, y0) as f64;
        let p01 = self.at(x0, y1) as f64;
        let p11 = self.at(x1, y1) as f64;
        let top = p00 + (p10 - p00) * fx;
        let bot = p01 + (p11 - p01) * fx;
        Some((top + (bot - top) * fy) as f32)
    }

    /// Bilinear resample with pixel-center alignment.
    pub fn resized(&self, out_w: usize, out_h: usize) -> GrayImageF {
        assert!(out_w >= 1 && out_h >= 1);
        let sx = self.width as f64 / out_w as f64;
        let sy = self.height as f64 / out_h as f64;
        let mut data = Vec::with_capacity(out_w * out_h);
        for oy in 0..out_h {
            let y = center_mapped(oy, sy, self.height);
            let y0 = y.floor() as usize;
            let y1 = (y0 + 1).min(self.height - 1);
            let fy = (y - y0 as f64) as f32;
            for ox in 0..out_w {
                let x = center_mapped(ox, sx, self.width);
                let x0 = x.floor() as usize;
                let x1 = (x0 + 1).min(self.width - 1);
                let fx = (x - x0 as f64) as f32;
                let top = self.at(x0, y0) + (self.at(x1, y0) - self.at(x0, y0)) * fx;
                let bot = self.at(x0, y1) + (self.at(x1, y1) - self.at(x0, y1)) * fx;
                data.push((top + (bot - top) * fy).clamp(0.0, 1.0));
            }
        }
        GrayImageF {
            width: out_w,
            height: out_h,
            data,
        }
    }
}

/// Maps an output pixel index to a source coordinate, pixel-center aligned.
fn center_mapped(o: usize, scale: f64, src_dim: usize) -> f64 {
    ((o as f64 + 0.5) * scale - 0.5).clamp(0.0, (src_dim - 1) as f64)
}

fn bilinear_setup(x: f64, y: f64, w: usize, h: usize) -> Option<(usize, usize, f64, f64)> {
    if !x.is_finite() || !y.is_finite() {
        return None;
    }
    if x < 0.0 || y < 0.0 || x > (w - 1) as f64 || y > (h - 1) as f64 {
        return None;
    }
    let x0 = (x.floor() as usize).min(w - 1);
    let y0 = (y.floor() as usize).min(h - 1);
    Some((x0, y0, x - x0 as f64, y - y0 as f64))
}

/// Loads a binary PGM ("P5") or PPM ("P6") file with maxval 255.
///
/// Header whitespace may be any run of ASCII whitespace and `#` comment
/// lines after the magic are skipped. Pixel bytes are copied verbatim.
pub fn load_image(path: impl AsRef<Path>) -> Result<Image, ImageError> {
    let bytes = fs::read(path)?;
    decode_pnm(&bytes)
}

/// Decodes PNM bytes; see [`load_image`].
pub fn decode_pnm(bytes: &[u8]) -> Result<Image, ImageError> {
    if bytes.len() < 2 {
        return Err(ImageError::MalformedHeader(
            "file shorter than magic".into(),
        ));
    }
    let channels = match &bytes[..2] {
        b"P5" => 1,
        b"P6" => 3,
        other => {
            return Err(ImageError::MalformedHeader(format!(
                "unknown magic {:?}",
                String::from_utf8_lossy(other)
            )))
        }
    };
    let mut pos = 2;
    let width = read_header_uint(bytes, &mut pos)?;
    let height = read_header_uint(bytes, &mut pos)?;
    let maxval = read_header_uint(bytes, &mut pos)?;
    if maxval != 255 {
        return Err(ImageError::UnsupportedMaxval(maxval as u32));
    }
    if width == 0 || height == 0 {
        return Err(ImageError::MalformedHeader(format!(
            "zero dimension {width}x{height}"
        )));
    }
    // Exactly one whitespace byte separates the header from the payload.
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        _ => {
            return Err(ImageError::MalformedHeader(
                "missing whitespace before payload".into(),
            ))
        }
    }
    let expected = width * height * channels;
    let payload = &bytes[pos.min(bytes.len())..];
    if payload.len() < expected {
        return Err(ImageError::TruncatedPayload {
            expected,
            found: payload.len(),
        });
    }
    Image::new(width, height, channels, payload[..expected].to_vec())
}

fn read_header_uint(bytes: &[u8], pos: &mut usize) -> Result<usize, ImageError> {
    // Skip whitespace and '#' comment lines.
    loop {
        match bytes.get(*pos) {
            Some(b) if b.is_ascii_whitespace() => *pos += 1,
            Some(b'#') => {
                while let Some(b) = bytes.get(*pos) {
                    *pos += 1;
                    if *b == b'\n' {
                        break;
                    }
                }
            }
            _ => break,
        }
    }
    let start = *pos;
    while matches!(bytes.get(*pos), Some(b) if b.is_ascii_digit()) {
        *pos += 1;
    }
    if *pos == start {
        return Err(ImageError::MalformedHeader(format!(
            "expected integer at byte {start}"
        )));
    }
    let token = std::str::from_utf8(&bytes[start..*pos]).expect("digits are utf-8");
    token
        .parse::<usize>()
        .map_err(|_| ImageError::MalformedHeader(format!("integer {token} out of range")))
}

/// Writes `image` as binary PGM (1 channel) or PPM (3 channels), maxval 255.
pub fn save_image(image: &Image, path: impl AsRef<Path>) -> Result<(), ImageError> {
    fs::write(path, encode_pnm(image))?;
    Ok(())
}

/// Encodes to PNM bytes; see [`save_image`].
pub fn encode_pnm(image: &Image) -> Vec<u8> {
    let magic = if image.channels() == 1 { "P5" } else { "P6" };
    let mut out = format!("{magic}\n{} {}\n255\n", image.width(), image.height()).into_bytes();
    out.extend_from_slice(image.data());
    out
}

/// Converts to `[0, 1]` luminance: gray maps v/255, RGB uses the
/// 0.299/0.587/0.114 luma weights.
pub fn to_gray(image: &Image) -> GrayImageF {
    let mut data = Vec::with_capacity(image.width() * image.height());
    match image.channels() {
        1 => data.extend(image.data().iter().map(|&v| v as f32 / 255.0)),
        _ => {
            for px in image.data().chunks_exact(3) {
                let y = 0.299 * px[0] as f32 + 0.587 * px[1] as f32 + 0.114 * px[2] as f32;
                data.push((y / 255.0).clamp(0.0, 1.0));
            }
        }
    }
    GrayImageF::new(image.width(), image.height(), data)
}

/// Shrinks `image` so its pixel count is at most `megapix` million.
///
/// `megapix <= 0` disables resizing. Otherwise the applied scale is
/// `min(1, sqrt(megapix * 1e6 / (w * h)))` — never an upscale — and the
/// output dimensions are `round(dim * scale)` clamped to at least 1.
/// Returns the resized image and the scale.
pub fn resize_to_megapix(image: &Image, megapix: f64) -> (Image, f64) {
    if megapix <= 0.0 {
        return (image.clone(), 1.0);
    }
    let pixels = (image.width() * image.height()) as f64;
    let scale = (megapix * 1e6 / pixels).sqrt().min(1.0);
    if scale >= 1.0 {
        return (image.clone(), 1.0);
    }
    let out_w = ((image.width() as f64 * scale).round() as usize).max(1);
    let out_h = ((image.height() as f64 * scale).round() as usize).max(1);
    (image.resized(out_w, out_h), scale)
}
