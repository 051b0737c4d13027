//! Exposure equalization: per-image multiplicative gains estimated from
//! overlap statistics at the low tier, applied at the final tier.

use nalgebra::{DMatrix, DVector};

use super::{WarpedColor, WarpedGray};
use crate::image::Image;

struct Overlap {
    i: usize,
    j: usize,
    count: f64,
    mean_i: f64,
    mean_j: f64,
}

/// Mean intensities of two layers over their common footprint.
fn overlap_stats(a: &WarpedGray, b: &WarpedGray, i: usize, j: usize) -> Option<Overlap> {
    let x0 = a.origin.0.max(b.origin.0);
    let y0 = a.origin.1.max(b.origin.1);
    let x1 = (a.origin.0 + a.image.width() as i64).min(b.origin.0 + b.image.width() as i64);
    let y1 = (a.origin.1 + a.image.height() as i64).min(b.origin.1 + b.image.height() as i64);
    if x1 <= x0 || y1 <= y0 {
        return None;
    }
    let mut count = 0u64;
    let (mut sum_i, mut sum_j) = (0.0f64, 0.0f64);
    for cy in y0..y1 {
        for cx in x0..x1 {
            let (ax, ay) = ((cx - a.origin.0) as usize, (cy - a.origin.1) as usize);
            let (bx, by) = ((cx - b.origin.0) as usize, (cy - b.origin.1) as usize);
            if a.mask.at(ax, ay) && b.mask.at(bx, by) {
                count += 1;
                sum_i += f64::from(a.image.at(ax, ay));
                sum_j += f64::from(b.image.at(bx, by));
            }
        }
    }
    if count == 0 {
        return None;
    }
    Some(Overlap {
        i,
        j,
        count: count as f64,
        mean_i: sum_i / count as f64,
        mean_j: sum_j / count as f64,
    })
}

/// Estimates one multiplicative gain per image so that overlapping regions
/// agree in brightness, with a prior pulling every gain toward 1.
///
/// Minimizes `Σ_pairs N_ij (g_i μ_ij − g_j μ_ji)² + Σ_i (N_i/σ²)(g_i − 1)²`
/// where `N_ij` is the overlap pixel count, `μ_ij` the mean intensity of
/// image `i` over that overlap, `N_i = Σ_j N_ij`, and `σ² = 100 ×` the mean
/// overlap size. The normal equations are solved by Cholesky (LU as a
/// fallback). Without any overlap — or if the solve misbehaves — all gains
/// are 1. Gains are always positive and finite.
pub fn estimate_gains(layers: &[WarpedGray]) -> Vec<f64> {
    let n = layers.len();
    if n == 0 {
        return Vec::new();
    }
    let mut overlaps = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if let Some(o) = overlap_stats(&layers[i], &layers[j], i, j) {
                overlaps.push(o);
            }
        }
    }
    if overlaps.is_empty() {
        return vec![1.0; n];
    }

    let sigma2 = 100.0 * overlaps.iter().map(|o| o.count).sum::<f64>() / overlaps.len() as f64;
    let mut a = DMatrix::<f64>::zeros(n, n);
    let mut b = DVector::<f64>::zeros(n);
    let mut n_total = vec![0.0f64; n];
    for o in &overlaps {
        n_total[o.i] += o.count;
        n_total[o.j] += o.count;
        a[(o.i, o.i)] += o.count * o.mean_i * o.mean_i;
        a[(o.j, o.j)] += o.count * o.mean_j * o.mean_j;
        a[(o.i, o.j)] -= o.count * o.mean_i * o.mean_j;
        a[(o.j, o.i)] -= o.count * o.mean_i * o.mean_j;
    }
    for i in 0..n {
        if n_total[i] == 0.0 {
            // No overlap anywhere: pin this image to unit gain.
            a[(i, i)] = 1.0;
            b[i] = 1.0;
        } else {
            a[(i, i)] += n_total[i] / sigma2;
            b[i] = n_total[i] / sigma2;
        }
    }

    let solved = a
        .clone()
        .cholesky()
        .map(|c| c.solve(&b))
        .or_else(|| a.lu().solve(&b));
    match solved {
        Some(g) if g.iter().all(|&v| v.is_finite() && v > 0.0) => g.iter().copied().collect(),
        _ => vec![1.0; n],
    }
}

/// Applies a gain to a warped layer: every channel value becomes
/// `clamp(round(gain · v), 0, 255)`.
pub fn apply_gains(layer: &WarpedColor, gain: f64) -> WarpedColor {
    assert!(
        gain.is_finite() && gain > 0.0,
        "gains are positive and finite"
    );
    let data = layer
        .image
        .data()
        .iter()
        .map(|&v| (gain * f64::from(v)).round().clamp(0.0, 255.0) as u8)
        .collect();
    WarpedColor {
        image: Image::new(
            layer.image.width(),
            layer.image.height(),
            layer.image.channels(),
            data,
        )
        .expect("dimensions are unchanged"),
        mask: layer.mask.clone(),
        origin: layer.origin,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compose::Mask;
    use crate::image::GrayImageF;
    use approx::assert_abs_diff_eq;

    fn full_layer(image: GrayImageF, origin: (i64, i64)) -> WarpedGray {
        let mask = Mask::from_fn(image.width(), image.height(), |_, _| true);
        WarpedGray {
            image,
            mask,
            origin,
        }
    }

    /// Texture with values in [0.2, 0.5], leaving headroom for a 1.3×
    /// brightening without clamping.
    fn dim_texture(seed: u64, w: usize, h: usize) -> GrayImageF {
        let t = crate::testutil::textured_gray(seed, w, h);
        GrayImageF::from_fn(w, h, |x, y| t.at(x, y) * 0.3 + 0.2)
    }

    fn scaled(img: &GrayImageF, factor: f32) -> GrayImageF {
        GrayImageF::from_fn(img.width(), img.height(), |x, y| img.at(x, y) * factor)
    }

    #[test]
    fn single_layer_gets_unit_gain() {
        let layers = [full_layer(dim_texture(1, 30, 20), (0, 0))];
        assert_eq!(estimate_gains(&layers), vec![1.0]);
    }

    #[test]
    fn disjoint_layers_get_unit_gains() {
        let layers = [
            full_layer(dim_texture(2, 20, 20), (0, 0)),
            full_layer(dim_texture(3, 20, 20), (100, 0)),
        ];
        assert_eq!(estimate_gains(&layers), vec![1.0, 1.0]);
    }

    #[test]
    fn identical_layers_keep_unit_gains() {
        let img = dim_texture(4, 30, 24);
        let layers = [full_layer(img.clone(), (0, 0)), full_layer(img, (0, 0))];
        let gains = estimate_gains(&layers);
        assert_abs_diff_eq!(gains[0], 1.0, epsilon = 1e-6);
        assert_abs_diff_eq!(gains[1], 1.0, epsilon = 1e-6);
    }

    #[test]
    fn gains_cancel_a_brightness_ratio() {
        let base = dim_texture(5, 40, 30);
        let bright = scaled(&base, 1.3);
        let layers = [full_layer(base.clone(), (0, 0)), full_layer(bright, (0, 0))];
        let gains = estimate_gains(&layers);

        // The ratio undoes the brightening within 5%.
        let ratio = gains[1] / gains[0];
        assert!(
            (ratio * 1.3 - 1.0).abs() < 0.05,
            "gain ratio {ratio} does not cancel the 1.3× factor"
        );

        // Post-gain mean intensities agree within 2%.
        let mean: f64 = (0..30)
            .flat_map(|y| (0..40).map(move |x| (x, y)))
            .map(|(x, y)| f64::from(base.at(x, y)))
            .sum::<f64>()
            / 1200.0;
        let a = gains[0] * mean;
        let b = gains[1] * mean * 1.3;
        assert!(
            (a - b).abs() / a.max(b) < 0.02,
            "post-gain means differ: {a} vs {b}"
        );
    }

    #[test]
    fn gains_follow_a_permutation_of_the_layers() {
        let base = dim_texture(6, 30, 30);
        let layers = [
            full_layer(scaled(&base, 0.9), (0, 0)),
            full_layer(base.clone(), (15, 0)),
            full_layer(scaled(&base, 1.15), (30, 0)),
        ];
        let forward = estimate_gains(&layers);
        let reversed_layers = [layers[2].clone(), layers[1].clone(), layers[0].clone()];
        let reversed = estimate_gains(&reversed_layers);
        for k in 0..3 {
            assert_abs_diff_eq!(forward[k], reversed[2 - k], epsilon = 1e-9);
        }
        assert!(forward.iter().all(|&g| g.is_finite() && g > 0.0));
    }

    fn color_layer(values: &[u8]) -> WarpedColor {
        let w = values.len();
        let data = values.iter().flat_map(|&v| [v, v, v]).collect();
        WarpedColor {
            image: Image::new(w, 1, 3, data).unwrap(),
            mask: Mask::from_fn(w, 1, |_, _| true),
            origin: (0, 0),
        }
    }

    #[test]
    fn unit_gain_leaves_pixels_untouched() {
        let layer = color_layer(&[0, 3, 100, 200, 255]);
        let out = apply_gains(&layer, 1.0);
        assert_eq!(out.image.data(), layer.image.data());
        assert_eq!(out.origin, layer.origin);
    }

    #[test]
    fn gains_round_and_clamp() {
        let layer = color_layer(&[3, 100, 200]);
        let doubled = apply_gains(&layer, 2.0);
        assert_eq!(doubled.image.pixel(0, 0), [6, 6, 6]);
        assert_eq!(doubled.image.pixel(1, 0), [200, 200, 200]);
        assert_eq!(doubled.image.pixel(2, 0), [255, 255, 255]);

        let halved = apply_gains(&layer, 0.5);
        // 1.5 rounds away from zero.
        assert_eq!(halved.image.pixel(0, 0), [2, 2, 2]);
        assert_eq!(halved.image.pixel(1, 0), [50, 50, 50]);
        assert_eq!(halved.image.pixel(2, 0), [100, 100, 100]);
    }
}
