//! Seam assignment: a Voronoi-style partition of the covered canvas, built
//! at the low tier and carried up to the final tier.

use super::{CanvasLayout, ComposeError, Mask, WarpedGray};

/// Chessboard distance from every cell to the nearest seed (`true`) cell,
/// by the classic two-pass sweep. Cells unreachable because there are no
/// seeds at all stay at `u32::MAX`.
pub(super) fn seed_distance(seeds: &[bool], w: usize, h: usize) -> Vec<u32> {
    assert_eq!(seeds.len(), w * h, "seed raster matches dimensions");
    let mut d = vec![u32::MAX; w * h];
    for (dp, &s) in d.iter_mut().zip(seeds) {
        if s {
            *dp = 0;
        }
    }
    for y in 0..h {
        for x in 0..w {
            let p = y * w + x;
            let mut m = d[p];
            if x > 0 {
                m = m.min(d[p - 1].saturating_add(1));
            }
            if y > 0 {
                let up = p - w;
                m = m.min(d[up].saturating_add(1));
                if x > 0 {
                    m = m.min(d[up - 1].saturating_add(1));
                }
                if x + 1 < w {
                    m = m.min(d[up + 1].saturating_add(1));
                }
            }
            d[p] = m;
        }
    }
    for y in (0..h).rev() {
        for x in (0..w).rev() {
            let p = y * w + x;
            let mut m = d[p];
            if x + 1 < w {
                m = m.min(d[p + 1].saturating_add(1));
            }
            if y + 1 < h {
                let down = p + w;
                m = m.min(d[down].saturating_add(1));
                if x + 1 < w {
                    m = m.min(d[down + 1].saturating_add(1));
                }
                if x > 0 {
                    m = m.min(d[down - 1].saturating_add(1));
                }
            }
            d[p] = m;
        }
    }
    d
}

/// Chessboard distance from every cell to the nearest `false` cell, where
/// everything outside the raster also counts as `false` — so a fully set
/// raster still ramps down toward its edges.
pub(super) fn border_distance(mask: &[bool], w: usize, h: usize) -> Vec<u32> {
    assert_eq!(mask.len(), w * h, "mask raster matches dimensions");
    let (pw, ph) = (w + 2, h + 2);
    let mut seeds = vec![true; pw * ph];
    for y in 0..h {
        for x in 0..w {
            seeds[(y + 1) * pw + (x + 1)] = !mask[y * w + x];
        }
    }
    let dist = seed_distance(&seeds, pw, ph);
    let mut out = vec![0u32; w * h];
    for y in 0..h {
        for x in 0..w {
            out[y * w + x] = dist[(y + 1) * pw + (x + 1)];
        }
    }
    out
}

/// Places a layer-local mask onto a canvas-sized boolean raster.
pub(super) fn canvas_mask(mask: &Mask, origin: (i64, i64), w: usize, h: usize) -> Vec<bool> {
    let mut out = vec![false; w * h];
    for y in 0..mask.height() {
        for x in 0..mask.width() {
            if !mask.at(x, y) {
                continue;
            }
            let cx = origin.0 + x as i64;
            let cy = origin.1 + y as i64;
            if cx >= 0 && cy >= 0 && (cx as usize) < w && (cy as usize) < h {
                out[cy as usize * w + cx as usize] = true;
            }
        }
    }
    out
}

/// Partitions the covered canvas among the images, one seam mask per image
/// at its final-tier layer bounds.
///
/// At the low tier every covered pixel is assigned to the image whose mask
/// boundary is farthest away in chessboard distance (ties to the lower
/// index) — a Voronoi-style split that keeps each image's best-supported
/// interior. That ownership map is upscaled to the final tier by nearest
/// neighbor (`tier_ratio` = low reference scale / final reference scale),
/// re-intersected with the final warp masks, and pixels orphaned by the
/// intersection are re-assigned to the covering image with the nearest
/// surviving region (again ties to the lower index).
///
/// The resulting masks are pairwise disjoint, each a subset of its warp
/// mask, and together they cover exactly the union of the warp masks.
pub fn find_seams(
    low_layers: &[WarpedGray],
    low_layout: &CanvasLayout,
    final_masks: &[Mask],
    final_layout: &CanvasLayout,
    tier_ratio: f64,
) -> Result<Vec<Mask>, ComposeError> {
    let n = low_layers.len();
    assert_eq!(final_masks.len(), n, "one final mask per layer");
    assert_eq!(low_layout.origins.len(), n, "low layout covers every layer");
    assert_eq!(
        final_layout.origins.len(),
        n,
        "final layout covers every layer"
    );
    assert!(tier_ratio > 0.0, "tier ratio is positive");

    let (wl, hl) = (low_layout.width, low_layout.height);
    let (wf, hf) = (final_layout.width, final_layout.height);

    // Low-tier Voronoi assignment.
    let mut owner_low = vec![-1i32; wl * hl];
    let mut best = vec![0u32; wl * hl];
    for (i, layer) in low_layers.iter().enumerate() {
        let cm = canvas_mask(&layer.mask, low_layout.origins[i], wl, hl);
        let dist = border_distance(&cm, wl, hl);
        for p in 0..wl * hl {
            if cm[p] && dist[p] > best[p] {
                best[p] = dist[p];
                owner_low[p] = i as i32;
            }
        }
    }
    if owner_low.iter().all(|&o| o < 0) {
        return Err(ComposeError::EmptyCoverage);
    }

    let fin_cm: Vec<Vec<bool>> = (0..n)
        .map(|i| canvas_mask(&final_masks[i], final_layout.origins[i], wf, hf))
        .collect();

    // Nearest-neighbor upscale, re-intersected with the final warp masks.
    let mut owner = vec![-1i32; wf * hf];
    for y in 0..hf {
        for x in 0..wf {
            let rx = (x as i64 + final_layout.offset.0) as f64 * tier_ratio;
            let ry = (y as i64 + final_layout.offset.1) as f64 * tier_ratio;
            let lx = (rx - low_layout.offset.0 as f64)
                .round()
                .clamp(0.0, (wl - 1) as f64) as usize;
            let ly = (ry - low_layout.offset.1 as f64)
                .round()
                .clamp(0.0, (hl - 1) as f64) as usize;
            let cand = owner_low[ly * wl + lx];
            if cand >= 0 && fin_cm[cand as usize][y * wf + x] {
                owner[y * wf + x] = cand;
            }
        }
    }

    // Re-completion: covered pixels orphaned by the intersection go to the
    // covering image whose surviving region is nearest.
    let covered: Vec<bool> = (0..wf * hf).map(|p| fin_cm.iter().any(|m| m[p])).collect();
    if (0..wf * hf).any(|p| covered[p] && owner[p] < 0) {
        let mut best_d = vec![u32::MAX; wf * hf];
        let mut fix = vec![-1i32; wf * hf];
        for (i, cm) in fin_cm.iter().enumerate() {
            let seeds: Vec<bool> = owner.iter().map(|&o| o == i as i32).collect();
            if !seeds.iter().any(|&s| s) {
                continue;
            }
            let dist = seed_distance(&seeds, wf, hf);
            for p in 0..wf * hf {
                if covered[p] && owner[p] < 0 && cm[p] && dist[p] < best_d[p] {
                    best_d[p] = dist[p];
                    fix[p] = i as i32;
                }
            }
        }
        for (o, &f) in owner.iter_mut().zip(&fix) {
            if f >= 0 {
                *o = f;
            }
        }
        // A covered pixel can remain orphaned only if every image covering
        // it lost its entire region; fall back to the lowest such index.
        for p in 0..wf * hf {
            if covered[p] && owner[p] < 0 {
                owner[p] = fin_cm
                    .iter()
                    .position(|m| m[p])
                    .expect("pixel is covered by some image") as i32;
            }
        }
    }

    // Slice the canvas ownership back into per-layer masks.
    let mut out = Vec::with_capacity(n);
    for (i, fm) in final_masks.iter().enumerate() {
        let (ox, oy) = final_layout.origins[i];
        out.push(Mask::from_fn(fm.width(), fm.height(), |x, y| {
            let cx = ox + x as i64;
            let cy = oy + y as i64;
            cx >= 0
                && cy >= 0
                && (cx as usize) < wf
                && (cy as usize) < hf
                && owner[cy as usize * wf + cx as usize] == i as i32
        }));
    }
    Ok(out)
}
