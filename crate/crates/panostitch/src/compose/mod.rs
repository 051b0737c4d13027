//! Panorama composition: homography chaining, multi-tier warping, seam
//! assignment, gain compensation and feather blending.
//!
//! Everything here works in two coordinate frames. The *reference frame* is
//! the pixel frame of the reference image at some tier scale; warped corner
//! coordinates live there and may be negative. The *canvas frame* is the
//! reference frame translated so the joint bounding box of all warped
//! images starts at (0, 0); [`CanvasLayout::offset`] records the
//! translation. Each warped image occupies a rectangular layer within the
//! canvas, and per-image rasters (warp masks, seam masks) are stored at
//! layer size with the layer's canvas origin alongside.

mod blend;
mod gain;
mod seam;
mod warp;

pub use blend::{blend_feather, render_seam_lines, render_weight_overlay};
pub use gain::{apply_gains, estimate_gains};
pub use seam::find_seams;
pub use warp::{chain_to_reference, compute_canvas, scale_homography, warp_color, warp_gray};

use thiserror::Error;

use crate::image::{GrayImageF, Image};

/// Errors from composition.
#[derive(Debug, Error)]
pub enum ComposeError {
    #[error("image {image} has no homography path to the reference")]
    SpanFailed { image: usize },
    #[error("warp out of range: an image corner maps to infinity")]
    WarpOutOfRange,
    #[error("homography became numerically degenerate")]
    Degenerate,
    #[error("no layer covers any canvas pixel")]
    EmptyCoverage,
}

/// Binary raster; used for warp validity and seam ownership.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    width: usize,
    height: usize,
    data: Vec<bool>,
}

impl Mask {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![false; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
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

    #[inline]
    pub fn at(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: bool) {
        self.data[y * self.width + x] = v;
    }

    pub fn data(&self) -> &[bool] {
        &self.data
    }

    /// Number of set pixels.
    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }
}

/// A grayscale image warped onto the canvas: pixel data, the validity mask
/// (on where a source sample existed), and the layer's canvas origin.
#[derive(Debug, Clone)]
pub struct WarpedGray {
    pub image: GrayImageF,
    pub mask: Mask,
    pub origin: (i64, i64),
}

/// An RGB image warped onto the canvas; see [`WarpedGray`].
#[derive(Debug, Clone)]
pub struct WarpedColor {
    pub image: Image,
    pub mask: Mask,
    pub origin: (i64, i64),
}

/// Canvas dimensions and the placement of every image's layer on it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanvasLayout {
    pub width: usize,
    pub height: usize,
    /// Per-image layer top-left corner, in canvas coordinates.
    pub origins: Vec<(i64, i64)>,
    /// Per-image layer dimensions.
    pub sizes: Vec<(usize, usize)>,
    /// Reference-frame coordinates of canvas pixel (0, 0) — the global
    /// minimum corner before translation.
    pub offset: (i64, i64),
}
