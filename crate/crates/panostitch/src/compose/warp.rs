//! Homography chaining across the spanning tree, tier rescaling, canvas
//! layout and inverse-mapped bilinear warping.

use nalgebra::Matrix3;

use super::{CanvasLayout, ComposeError, Mask, WarpedColor, WarpedGray};
use crate::graph::{MatchGraph, Subset};
use crate::image::{GrayImageF, Image};
use crate::matching::{Homography, HOMOGENEOUS_W_MIN};

/// Applies a raw projective matrix to a point, without requiring the
/// normalized-homography invariants. `None` when the point maps to (or
/// numerically near) the line at infinity.
fn apply_raw(m: &Matrix3<f64>, x: f64, y: f64) -> Option<(f64, f64)> {
    let u = m[(0, 0)] * x + m[(0, 1)] * y + m[(0, 2)];
    let v = m[(1, 0)] * x + m[(1, 1)] * y + m[(1, 2)];
    let w = m[(2, 0)] * x + m[(2, 1)] * y + m[(2, 2)];
    if w.abs() <= HOMOGENEOUS_W_MIN {
        return None;
    }
    Some((u / w, v / w))
}

/// Chains pairwise homographies into one mapping per kept image onto the
/// reference frame.
///
/// Builds a maximum-confidence spanning tree over the kept images with
/// Prim's algorithm, starting at the reference; only pairs that carry a
/// homography are usable as tree edges, and equal-confidence candidates are
/// broken toward the lower index pair. Each image's mapping is the product
/// of edge homographies along its tree path, inverting edges traversed
/// against their stored direction (a stored pair `(i, j)` maps image `j`
/// into image `i`).
///
/// The result is aligned with `subset.kept`; the reference slot holds the
/// identity. Fails when some kept image cannot be reached through
/// homography-bearing edges.
pub fn chain_to_reference(
    graph: &MatchGraph,
    subset: &Subset,
) -> Result<Vec<Homography>, ComposeError> {
    let kept = &subset.kept;
    let k = kept.len();
    assert!(k >= 2, "a subset holds at least two images");
    let ref_pos = kept
        .iter()
        .position(|&v| v == subset.reference)
        .expect("reference image is a member of the subset");

    let mut acc: Vec<Option<Matrix3<f64>>> = vec![None; k];
    acc[ref_pos] = Some(Matrix3::identity());
    let mut in_tree = vec![false; k];
    in_tree[ref_pos] = true;

    for _ in 1..k {
        // Best frontier edge: maximum confidence, ties to the lower (i, j).
        let mut best: Option<(f64, usize, usize, usize, usize)> = None;
        for up in 0..k {
            if !in_tree[up] {
                continue;
            }
            for vp in 0..k {
                if in_tree[vp] {
                    continue;
                }
                let pair = graph.pair(kept[up], kept[vp]);
                if pair.homography.is_none() {
                    continue;
                }
                let replaces = match best {
                    None => true,
                    Some((conf, pi, pj, _, _)) => {
                        pair.confidence > conf
                            || (pair.confidence == conf && (pair.i, pair.j) < (pi, pj))
                    }
                };
                if replaces {
                    best = Some((pair.confidence, pair.i, pair.j, up, vp));
                }
            }
        }
        let Some((_, _, _, up, vp)) = best else {
            let unreachable = kept
                .iter()
                .zip(&in_tree)
                .find(|(_, &t)| !t)
                .map(|(&img, _)| img)
                .expect("an unreached image exists when no frontier edge does");
            return Err(ComposeError::SpanFailed { image: unreachable });
        };

        let pair = graph.pair(kept[up], kept[vp]);
        let stored = pair
            .homography
            .as_ref()
            .expect("frontier edges carry homographies")
            .matrix();
        // The stored matrix maps j into i; orient it child-to-parent.
        let step = if kept[up] == pair.i {
            *stored
        } else {
            stored.try_inverse().ok_or(ComposeError::Degenerate)?
        };
        let parent = acc[up].expect("tree members have accumulated matrices");
        acc[vp] = Some(parent * step);
        in_tree[vp] = true;
    }

    acc.into_iter()
        .map(|m| {
            Homography::from_matrix(m.expect("all kept images were reached"))
                .map_err(|_| ComposeError::Degenerate)
        })
        .collect()
}

/// Rescales a homography between resolution tiers.
///
/// `s_src` is the factor applied to the source image's coordinates and
/// `s_dst` the factor applied to the destination's: the result is
/// `D · H · S⁻¹` with `S = diag(s_src, s_src, 1)` and
/// `D = diag(s_dst, s_dst, 1)`, renormalized so the bottom-right entry is 1.
pub fn scale_homography(h: &Homography, s_src: f64, s_dst: f64) -> Homography {
    assert!(
        s_src > 0.0 && s_dst > 0.0,
        "tier scale factors are positive"
    );
    let s_inv = Matrix3::new(1.0 / s_src, 0.0, 0.0, 0.0, 1.0 / s_src, 0.0, 0.0, 0.0, 1.0);
    let d = Matrix3::new(s_dst, 0.0, 0.0, 0.0, s_dst, 0.0, 0.0, 0.0, 1.0);
    Homography::from_matrix(d * h.matrix() * s_inv)
        .expect("diagonal scaling keeps the bottom-right entry at 1 and the matrix invertible")
}

/// Computes the canvas bounding box and per-image layer placement.
///
/// The four corner pixel centers of every image are pushed through its
/// homography; the joint bounds (floored minima, ceiled maxima) fix the
/// canvas size, each image's layer origin is the floor of its own minimum
/// corner, and everything is translated so the global minimum lands at
/// (0, 0). Fails when a corner maps to infinity.
pub fn compute_canvas(
    homographies: &[Homography],
    dims: &[(usize, usize)],
) -> Result<CanvasLayout, ComposeError> {
    assert_eq!(homographies.len(), dims.len(), "one homography per image");
    assert!(!dims.is_empty(), "at least one image");

    let mut bounds = Vec::with_capacity(dims.len());
    for (h, &(w, hgt)) in homographies.iter().zip(dims) {
        assert!(w >= 1 && hgt >= 1, "images are non-empty");
        let xm = (w - 1) as f64;
        let ym = (hgt - 1) as f64;
        let corners = [(0.0, 0.0), (xm, 0.0), (0.0, ym), (xm, ym)];
        let (mut min_x, mut min_y) = (f64::INFINITY, f64::INFINITY);
        let (mut max_x, mut max_y) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        for (cx, cy) in corners {
            let (x, y) = h.apply(cx, cy).ok_or(ComposeError::WarpOutOfRange)?;
            min_x = min_x.min(x);
            min_y = min_y.min(y);
            max_x = max_x.max(x);
            max_y = max_y.max(y);
        }
        bounds.push((
            min_x.floor() as i64,
            min_y.floor() as i64,
            max_x.ceil() as i64,
            max_y.ceil() as i64,
        ));
    }

    let gx = bounds.iter().map(|b| b.0).min().expect("non-empty");
    let gy = bounds.iter().map(|b| b.1).min().expect("non-empty");
    let gx_max = bounds.iter().map(|b| b.2).max().expect("non-empty");
    let gy_max = bounds.iter().map(|b| b.3).max().expect("non-empty");

    let origins = bounds.iter().map(|b| (b.0 - gx, b.1 - gy)).collect();
    let sizes = bounds
        .iter()
        .map(|b| ((b.2 - b.0 + 1) as usize, (b.3 - b.1 + 1) as usize))
        .collect();

    Ok(CanvasLayout {
        width: (gx_max - gx + 1) as usize,
        height: (gy_max - gy + 1) as usize,
        origins,
        sizes,
        offset: (gx, gy),
    })
}

/// Back-projection matrix for one layer: maps layer pixel coordinates to
/// source image coordinates through the inverse homography.
fn layer_to_source(
    h: &Homography,
    layout: &CanvasLayout,
    index: usize,
) -> Result<Matrix3<f64>, ComposeError> {
    let inv = h.matrix().try_inverse().ok_or(ComposeError::Degenerate)?;
    let (ox, oy) = layout.origins[index];
    let (gx, gy) = layout.offset;
    // Layer pixel (lx, ly) sits at reference coordinates (lx + ox + gx, …).
    let shift = Matrix3::new(
        1.0,
        0.0,
        (ox + gx) as f64,
        0.0,
        1.0,
        (oy + gy) as f64,
        0.0,
        0.0,
        1.0,
    );
    Ok(inv * shift)
}

/// Warps a grayscale image onto its canvas layer by inverse mapping: every
/// layer pixel is back-projected through the homography and bilinearly
/// sampled; the mask records where a valid sample existed.
pub fn warp_gray(
    src: &GrayImageF,
    h: &Homography,
    layout: &CanvasLayout,
    index: usize,
) -> Result<WarpedGray, ComposeError> {
    let back = layer_to_source(h, layout, index)?;
    let (lw, lh) = layout.sizes[index];
    let mut image = GrayImageF::filled(lw, lh, 0.0);
    let mut mask = Mask::new(lw, lh);
    for ly in 0..lh {
        for lx in 0..lw {
            let Some((sx, sy)) = apply_raw(&back, lx as f64, ly as f64) else {
                continue;
            };
            if let Some(v) = src.bilinear_sample(sx, sy) {
                image.set(lx, ly, v);
                mask.set(lx, ly, true);
            }
        }
    }
    Ok(WarpedGray {
        image,
        mask,
        origin: layout.origins[index],
    })
}

/// Warps an RGB image onto its canvas layer; see [`warp_gray`].
pub fn warp_color(
    src: &Image,
    h: &Homography,
    layout: &CanvasLayout,
    index: usize,
) -> Result<WarpedColor, ComposeError> {
    let back = layer_to_source(h, layout, index)?;
    let (lw, lh) = layout.sizes[index];
    let mut data = vec![0u8; lw * lh * 3];
    let mut mask = Mask::new(lw, lh);
    for ly in 0..lh {
        for lx in 0..lw {
            let Some((sx, sy)) = apply_raw(&back, lx as f64, ly as f64) else {
                continue;
            };
            if let Some(rgb) = src.bilinear_sample_rgb(sx, sy) {
                let at = (ly * lw + lx) * 3;
                for c in 0..3 {
                    data[at + c] = rgb[c].round().clamp(0.0, 255.0) as u8;
                }
                mask.set(lx, ly, true);
            }
        }
    }
    Ok(WarpedColor {
        image: Image::new(lw, lh, 3, data).expect("buffer matches layer dimensions"),
        mask,
        origin: layout.origins[index],
    })
}
