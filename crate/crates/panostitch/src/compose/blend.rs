//! Feather blending across seams, plus the two diagnostic overlays.

use super::seam::{canvas_mask, seed_distance};
use super::{CanvasLayout, Mask, WarpedColor};
use crate::image::Image;

/// Overlay colors, assigned to images by their position in the kept list.
const PALETTE: [[u8; 3]; 6] = [
    [255, 0, 0],
    [0, 255, 0],
    [0, 0, 255],
    [255, 255, 0],
    [255, 0, 255],
    [0, 255, 255],
];

/// Canvas-sized feather weights for one layer: 1 on the layer's seam
/// region, ramping linearly to 0 at chessboard distance `radius` from it,
/// and 0 outside the layer's warp mask.
fn weight_raster(layer: &WarpedColor, seam: &Mask, w: usize, h: usize, radius: usize) -> Vec<f64> {
    let seam_cm = canvas_mask(seam, layer.origin, w, h);
    let dist = seed_distance(&seam_cm, w, h);
    let r = radius as f64;
    let mut out = vec![0.0f64; w * h];
    for ly in 0..layer.image.height() {
        for lx in 0..layer.image.width() {
            if !layer.mask.at(lx, ly) {
                continue;
            }
            let cx = layer.origin.0 + lx as i64;
            let cy = layer.origin.1 + ly as i64;
            if cx < 0 || cy < 0 || cx as usize >= w || cy as usize >= h {
                continue;
            }
            let p = cy as usize * w + cx as usize;
            let d = f64::from(dist[p].min(radius as u32));
            out[p] = (r - d) / r;
        }
    }
    out
}

/// Blends the warped layers into the final panorama.
///
/// Each image's weight is 1 on its own seam region and decays linearly to 0
/// over `feather_radius` pixels beyond it (zero outside the image's warp
/// mask), so images hand over smoothly across seams. The output pixel is
/// the weight-normalized average, rounded half away from zero; a covered
/// pixel whose weights all vanish falls back to its seam owner's value, and
/// uncovered pixels stay black.
pub fn blend_feather(
    layers: &[WarpedColor],
    seams: &[Mask],
    layout: &CanvasLayout,
    feather_radius: usize,
) -> Image {
    let n = layers.len();
    assert_eq!(seams.len(), n, "one seam mask per layer");
    assert!(feather_radius >= 1, "feather radius is at least 1");
    let (w, h) = (layout.width, layout.height);

    let mut num = vec![[0.0f64; 3]; w * h];
    let mut den = vec![0.0f64; w * h];
    let mut owner_value: Vec<Option<[u8; 3]>> = vec![None; w * h];

    for (layer, seam) in layers.iter().zip(seams) {
        let weights = weight_raster(layer, seam, w, h, feather_radius);
        for ly in 0..layer.image.height() {
            for lx in 0..layer.image.width() {
                if !layer.mask.at(lx, ly) {
                    continue;
                }
                let cx = layer.origin.0 + lx as i64;
                let cy = layer.origin.1 + ly as i64;
                if cx < 0 || cy < 0 || cx as usize >= w || cy as usize >= h {
                    continue;
                }
                let p = cy as usize * w + cx as usize;
                let px = layer.image.pixel(lx, ly);
                let px = [px[0], px[1], px[2]];
                if lx < seam.width() && ly < seam.height() && seam.at(lx, ly) {
                    owner_value[p] = Some(px);
                }
                let wgt = weights[p];
                if wgt > 0.0 {
                    den[p] += wgt;
                    for c in 0..3 {
                        num[p][c] += wgt * f64::from(px[c]);
                    }
                }
            }
        }
    }

    let mut data = vec![0u8; w * h * 3];
    for p in 0..w * h {
        if den[p] > 0.0 {
            for c in 0..3 {
                data[p * 3 + c] = (num[p][c] / den[p]).round().clamp(0.0, 255.0) as u8;
            }
        } else if let Some(px) = owner_value[p] {
            data[p * 3..p * 3 + 3].copy_from_slice(&px);
        }
    }
    Image::new(w, h, 3, data).expect("buffer matches canvas dimensions")
}

/// Canvas-wide seam ownership: the index of the seam mask covering each
/// pixel, or -1.
fn owner_map(seams: &[Mask], origins: &[(i64, i64)], w: usize, h: usize) -> Vec<i32> {
    let mut owner = vec![-1i32; w * h];
    for (i, (seam, &origin)) in seams.iter().zip(origins).enumerate() {
        let cm = canvas_mask(seam, origin, w, h);
        for (o, &on) in owner.iter_mut().zip(&cm) {
            if on {
                *o = i as i32;
            }
        }
    }
    owner
}

/// Copies the panorama and paints every pixel where two different seam
/// owners meet (4-adjacency) pure red.
pub fn render_seam_lines(panorama: &Image, seams: &[Mask], layout: &CanvasLayout) -> Image {
    let (w, h) = (panorama.width(), panorama.height());
    assert_eq!(
        (layout.width, layout.height),
        (w, h),
        "panorama matches the canvas"
    );
    assert_eq!(panorama.channels(), 3, "panorama is RGB");
    let owner = owner_map(seams, &layout.origins, w, h);

    let mut out = panorama.clone();
    for y in 0..h {
        for x in 0..w {
            let o = owner[y * w + x];
            if o < 0 {
                continue;
            }
            let mut boundary = false;
            if x > 0 {
                let q = owner[y * w + x - 1];
                boundary |= q >= 0 && q != o;
            }
            if x + 1 < w {
                let q = owner[y * w + x + 1];
                boundary |= q >= 0 && q != o;
            }
            if y > 0 {
                let q = owner[(y - 1) * w + x];
                boundary |= q >= 0 && q != o;
            }
            if y + 1 < h {
                let q = owner[(y + 1) * w + x];
                boundary |= q >= 0 && q != o;
            }
            if boundary {
                out.set_pixel(x, y, &[255, 0, 0]);
            }
        }
    }
    out
}

/// Visualizes the blend weights: each image's contribution is tinted with
/// its palette color, weight-normalized, and composited at 50% opacity over
/// the blended panorama.
pub fn render_weight_overlay(
    layers: &[WarpedColor],
    seams: &[Mask],
    layout: &CanvasLayout,
    feather_radius: usize,
) -> Image {
    let n = layers.len();
    assert_eq!(seams.len(), n, "one seam mask per layer");
    let (w, h) = (layout.width, layout.height);
    let panorama = blend_feather(layers, seams, layout, feather_radius);

    let mut num = vec![[0.0f64; 3]; w * h];
    let mut den = vec![0.0f64; w * h];
    for (k, (layer, seam)) in layers.iter().zip(seams).enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let weights = weight_raster(layer, seam, w, h, feather_radius);
        for (p, &wgt) in weights.iter().enumerate() {
            if wgt > 0.0 {
                den[p] += wgt;
                for c in 0..3 {
                    num[p][c] += wgt * f64::from(color[c]);
                }
            }
        }
    }

    let mut out = panorama.clone();
    for y in 0..h {
        for x in 0..w {
            let p = y * w + x;
            if den[p] <= 0.0 {
                continue;
            }
            let base = panorama.pixel(x, y);
            let mut px = [0u8; 3];
            for c in 0..3 {
                let tint = num[p][c] / den[p];
                px[c] = (0.5 * f64::from(base[c]) + 0.5 * tint)
                    .round()
                    .clamp(0.0, 255.0) as u8;
            }
            out.set_pixel(x, y, &px);
        }
    }
    out
}
