//! Corner detection and binary description on an image pyramid.
//!
//! Detection is a 16-pixel segment test (contiguous arc brighter or darker
//! than the center) with 3x3 non-maximum suppression, rescored with a Harris
//! corner measure. Each surviving keypoint gets an intensity-centroid
//! orientation and a 256-bit descriptor of pairwise intensity comparisons,
//! with the sampling pattern steered by that orientation so descriptors stay
//! comparable under in-plane rotation.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::image::GrayImageF;

/// Default segment-test contrast threshold (20 gray levels of 255).
pub const DEFAULT_FAST_THRESHOLD: f32 = 20.0 / 255.0;
/// Default minimum arc length of the segment test.
pub const DEFAULT_FAST_ARC: usize = 9;
/// Default keypoint budget for [`detect_and_compute`].
pub const DEFAULT_MAX_FEATURES: usize = 500;
/// Border a keypoint must keep from its pyramid level's edges so the rotated
/// descriptor patch (radius 15, up to 15*sqrt(2) after steering) and the
/// orientation disk stay inside the level.
pub const DESCRIPTOR_MARGIN: usize = 22;

const PYRAMID_LEVELS: usize = 8;
const PYRAMID_SCALE_FACTOR: f64 = 1.2;
const MIN_PYRAMID_DIM: usize = 32;
const PATCH_RADIUS: i32 = 15;
const HARRIS_BLOCK: usize = 7;
const HARRIS_K: f64 = 0.04;

/// Errors from feature detection and description.
#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("image {width}x{height} too small (need min dimension {min})")]
    ImageTooSmall {
        width: usize,
        height: usize,
        min: usize,
    },
    #[error("{what} at ({x}, {y}) leaves the image")]
    OutOfBounds { what: &'static str, x: f32, y: f32 },
}

/// A detected corner, in the coordinate frame of the image handed to
/// [`detect_and_compute`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Keypoint {
    /// Sub-pixel x in the input frame.
    pub x: f32,
    /// Sub-pixel y in the input frame.
    pub y: f32,
    /// Harris corner strength, clamped to be non-negative.
    pub response: f32,
    /// Pyramid level the corner was detected on.
    pub octave: usize,
    /// Orientation in radians, in `[0, 2*pi)`.
    pub angle: f32,
}

/// 256 binary intensity comparisons packed LSB-first: bit `k` lives in byte
/// `k / 8` at position `k % 8`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Descriptor(pub [u8; 32]);

impl Descriptor {
    /// Value of bit `k`.
    pub fn bit(&self, k: usize) -> bool {
        (self.0[k / 8] >> (k % 8)) & 1 == 1
    }
}

/// The 256 point pairs compared by [`compute_descriptor`].
///
/// Pairs are drawn uniformly over the 31x31 patch from a seeded generator
/// and pulled back onto the radius-15 disk, so every run of the program uses
/// the same layout without shipping a constant table.
#[derive(Debug, Clone)]
pub struct SamplingPattern {
    pairs: Vec<[(i32, i32); 2]>,
}

impl SamplingPattern {
    /// Generates the pattern for a seed. Same seed, same pairs.
    pub fn new(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let draw_point = |rng: &mut ChaCha8Rng| {
            let dx = rng.random_range(-PATCH_RADIUS..=PATCH_RADIUS);
            let dy = rng.random_range(-PATCH_RADIUS..=PATCH_RADIUS);
            clamp_to_disk(dx, dy, PATCH_RADIUS)
        };
        let pairs = (0..256)
            .map(|_| [draw_point(&mut rng), draw_point(&mut rng)])
            .collect();
        Self { pairs }
    }

    pub fn pairs(&self) -> &[[(i32, i32); 2]] {
        &self.pairs
    }
}

impl Default for SamplingPattern {
    /// The pattern every pipeline stage uses (seed 42).
    fn default() -> Self {
        Self::new(42)
    }
}

fn clamp_to_disk(dx: i32, dy: i32, radius: i32) -> (i32, i32) {
    let norm = ((dx * dx + dy * dy) as f64).sqrt();
    if norm <= radius as f64 {
        return (dx, dy);
    }
    let s = radius as f64 / norm;
    (
        (dx as f64 * s).round() as i32,
        (dy as f64 * s).round() as i32,
    )
}

/// Keypoints plus their descriptors; the two lists are index-aligned.
#[derive(Debug, Clone, Default)]
pub struct ImageFeatures {
    pub keypoints: Vec<Keypoint>,
    pub descriptors: Vec<Descriptor>,
}

impl ImageFeatures {
    pub fn len(&self) -> usize {
        self.keypoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keypoints.is_empty()
    }
}

/// Builds a scale pyramid: level `k` has dimensions `input / scale_factor^k`
/// (rounded half-up, floor 1), each bilinearly downsampled from the input.
///
/// Levels beyond the first whose smaller dimension would drop below 32
/// pixels are omitted. Returns `(level, scale)` tuples where `scale =
/// scale_factor^k` maps level coordinates back to the input frame.
pub fn build_pyramid(
    gray: &GrayImageF,
    n_levels: usize,
    scale_factor: f64,
) -> Vec<(GrayImageF, f64)> {
    assert!(n_levels >= 1, "pyramid needs at least one level");
    assert!(scale_factor > 1.0, "scale factor must shrink the image");
    let mut levels = vec![(gray.clone(), 1.0)];
    for k in 1..n_levels {
        let scale = scale_factor.powi(k as i32);
        let w = ((gray.width() as f64 / scale).round() as usize).max(1);
        let h = ((gray.height() as f64 / scale).round() as usize).max(1);
        if w.min(h) < MIN_PYRAMID_DIM {
            break;
        }
        levels.push((gray.resized(w, h), scale));
    }
    levels
}

/// Offsets of the 16-pixel circle of radius 3, clockwise from 12 o'clock.
const CIRCLE: [(i32, i32); 16] = [
    (0, -3),
    (1, -3),
    (2, -2),
    (3, -1),
    (3, 0),
    (3, 1),
    (2, 2),
    (1, 3),
    (0, 3),
    (-1, 3),
    (-2, 2),
    (-3, 1),
    (-3, 0),
    (-3, -1),
    (-2, -2),
    (-1, -3),
];

/// Segment-test corners with 3x3 non-maximum suppression on the score.
///
/// A pixel is a corner when at least `arc` contiguous circle pixels are all
/// brighter than `center + threshold` or all darker than `center -
/// threshold`; its score is the summed absolute contrast over the qualifying
/// run. A corner survives suppression unless an 8-neighbour has a higher
/// score, or an equal score and smaller `(y, x)`. The 3-pixel border is
/// never scanned.
pub fn detect_fast(
    gray: &GrayImageF,
    threshold: f32,
    arc: usize,
) -> Result<Vec<(usize, usize, f32)>, FeatureError> {
    let raw = detect_fast_raw(gray, threshold, arc)?;
    let (w, h) = (gray.width(), gray.height());
    let mut scores = vec![f32::NEG_INFINITY; w * h];
    for &(x, y, s) in &raw {
        scores[y * w + x] = s;
    }
    let survives = |x: usize, y: usize, s: f32| {
        for dy in -1i64..=1 {
            for dx in -1i64..=1 {
                if dx == 0 && dy == 0 {
                    continue;
                }
                let (nx, ny) = ((x as i64 + dx) as usize, (y as i64 + dy) as usize);
                if nx >= w || ny >= h {
                    continue;
                }
                let ns = scores[ny * w + nx];
                if ns > s || (ns == s && (ny, nx) < (y, x)) {
                    return false;
                }
            }
        }
        true
    };
    Ok(raw
        .into_iter()
        .filter(|&(x, y, s)| survives(x, y, s))
        .collect())
}

/// [`detect_fast`] without the suppression step: every pixel passing the
/// segment test, in row-major order.
pub fn detect_fast_raw(
    gray: &GrayImageF,
    threshold: f32,
    arc: usize,
) -> Result<Vec<(usize, usize, f32)>, FeatureError> {
    let (w, h) = (gray.width(), gray.height());
    if w.min(h) < 7 {
        return Err(FeatureError::ImageTooSmall {
            width: w,
            height: h,
            min: 7,
        });
    }
    let mut out = Vec::new();
    for y in 3..h - 3 {
        for x in 3..w - 3 {
            let center = gray.at(x, y);
            let mut ring = [0.0f32; 16];
            for (i, &(dx, dy)) in CIRCLE.iter().enumerate() {
                ring[i] = gray.at(
                    (x as i64 + dx as i64) as usize,
                    (y as i64 + dy as i64) as usize,
                );
            }
            if let Some(score) = segment_score(&ring, center, threshold, arc) {
                out.push((x, y, score));
            }
        }
    }
    Ok(out)
}

/// Best summed contrast over any circular run of >= `arc` same-side pixels,
/// or `None` when no such run exists.
fn segment_score(ring: &[f32; 16], center: f32, threshold: f32, arc: usize) -> Option<f32> {
    let bright: Vec<bool> = ring.iter().map(|&v| v > center + threshold).collect();
    let dark: Vec<bool> = ring.iter().map(|&v| v < center - threshold).collect();
    let mut best: Option<f32> = None;
    for flags in [&bright, &dark] {
        if let Some(s) = best_run_sum(flags, ring, center, arc) {
            best = Some(best.map_or(s, |b: f32| b.max(s)));
        }
    }
    best
}

fn best_run_sum(flags: &[bool], ring: &[f32; 16], center: f32, arc: usize) -> Option<f32> {
    let n = flags.len();
    if flags.iter().all(|&f| f) {
        return Some(ring.iter().map(|&v| (v - center).abs()).sum());
    }
    let mut best: Option<f32> = None;
    for start in 0..n {
        // Maximal runs only: start where the previous position is off.
        if !flags[start] || flags[(start + n - 1) % n] {
            continue;
        }
        let mut len = 0;
        let mut sum = 0.0f32;
        while flags[(start + len) % n] {
            sum += (ring[(start + len) % n] - center).abs();
            len += 1;
        }
        if len >= arc {
            best = Some(best.map_or(sum, |b: f32| b.max(sum)));
        }
    }
    best
}

/// Harris corner measure `det(M) - k * trace(M)^2` of the structure tensor
/// of central-difference gradients over a `block`-sized window at (x, y).
///
/// Negative for edges, positive for corners, zero on constant patches. The
/// window plus one pixel of gradient support must fit inside the image.
pub fn harris_response(
    gray: &GrayImageF,
    x: usize,
    y: usize,
    block: usize,
    k: f64,
) -> Result<f32, FeatureError> {
    let r = (block / 2) as i64;
    let (w, h) = (gray.width() as i64, gray.height() as i64);
    let (xi, yi) = (x as i64, y as i64);
    if xi - r - 1 < 0 || yi - r - 1 < 0 || xi + r + 1 >= w || yi + r + 1 >= h {
        return Err(FeatureError::OutOfBounds {
            what: "structure tensor window",
            x: x as f32,
            y: y as f32,
        });
    }
    let (mut a, mut b, mut c) = (0.0f64, 0.0f64, 0.0f64);
    for dy in -r..=r {
        for dx in -r..=r {
            let (px, py) = ((xi + dx) as usize, (yi + dy) as usize);
            let ix = (gray.at(px + 1, py) as f64 - gray.at(px - 1, py) as f64) / 2.0;
            let iy = (gray.at(px, py + 1) as f64 - gray.at(px, py - 1) as f64) / 2.0;
            a += ix * ix;
            b += iy * iy;
            c += ix * iy;
        }
    }
    let det = a * b - c * c;
    let trace = a + b;
    Ok((det - k * trace * trace) as f32)
}

/// Intensity-centroid orientation: `atan2(m01, m10)` over the disk of
/// radius `radius` centred on the (rounded) keypoint, mapped to `[0, 2*pi)`.
///
/// A featureless disk has zero moments and reports angle 0.
pub fn orientation(gray: &GrayImageF, x: f32, y: f32, radius: i32) -> Result<f32, FeatureError> {
    let (cx, cy) = (x.round() as i64, y.round() as i64);
    let (w, h) = (gray.width() as i64, gray.height() as i64);
    let r = radius as i64;
    if cx - r < 0 || cy - r < 0 || cx + r >= w || cy + r >= h {
        return Err(FeatureError::OutOfBounds {
            what: "orientation disk",
            x,
            y,
        });
    }
    let (mut m10, mut m01) = (0.0f64, 0.0f64);
    for v in -r..=r {
        for u in -r..=r {
            if u * u + v * v > r * r {
                continue;
            }
            let i = gray.at((cx + u) as usize, (cy + v) as usize) as f64;
            m10 += u as f64 * i;
            m01 += v as f64 * i;
        }
    }
    let angle = m01.atan2(m10).rem_euclid(TAU) as f32;
    // Guard the float edge where the f64 remainder rounds up to 2*pi in f32.
    Ok(if angle >= std::f32::consts::TAU {
        0.0
    } else {
        angle
    })
}

/// 256-bit descriptor of a keypoint: each pattern pair is rotated by the
/// keypoint angle, both endpoints sampled nearest-neighbour, and bit `k` is
/// set when the first sample is darker than the second.
///
/// Coordinates are interpreted in `gray`'s own frame, so callers working on
/// a pyramid level pass level coordinates. The keypoint must keep
/// [`DESCRIPTOR_MARGIN`] pixels of border.
pub fn compute_descriptor(
    gray: &GrayImageF,
    kp: &Keypoint,
    pattern: &SamplingPattern,
) -> Result<Descriptor, FeatureError> {
    let (w, h) = (gray.width() as i64, gray.height() as i64);
    let (cx, cy) = (kp.x.round() as i64, kp.y.round() as i64);
    let m = DESCRIPTOR_MARGIN as i64;
    if cx - m < 0 || cy - m < 0 || cx + m >= w || cy + m >= h {
        return Err(FeatureError::OutOfBounds {
            what: "descriptor patch",
            x: kp.x,
            y: kp.y,
        });
    }
    let (sin, cos) = (kp.angle as f64).sin_cos();
    let sample = |dx: i32, dy: i32| -> f32 {
        let rx = kp.x as f64 + dx as f64 * cos - dy as f64 * sin;
        let ry = kp.y as f64 + dx as f64 * sin + dy as f64 * cos;
        gray.at(rx.round() as usize, ry.round() as usize)
    };
    let mut bytes = [0u8; 32];
    for (k, [(x1, y1), (x2, y2)]) in pattern.pairs().iter().enumerate() {
        if sample(*x1, *y1) < sample(*x2, *y2) {
            bytes[k / 8] |= 1 << (k % 8);
        }
    }
    Ok(Descriptor(bytes))
}

/// Full detection: pyramid, segment test, Harris rescoring, per-level
/// budgets proportional to level area, a global top-`max_features` cut
/// (ties broken by lower y, then x, then octave), orientation and
/// descriptors. Keypoint coordinates are reported in the input frame.
///
/// The image's smaller dimension must be at least 64 pixels.
pub fn detect_and_compute(
    gray: &GrayImageF,
    max_features: usize,
) -> Result<ImageFeatures, FeatureError> {
    if gray.width().min(gray.height()) < 64 {
        return Err(FeatureError::ImageTooSmall {
            width: gray.width(),
            height: gray.height(),
            min: 64,
        });
    }
    let pattern = SamplingPattern::default();
    let pyramid = build_pyramid(gray, PYRAMID_LEVELS, PYRAMID_SCALE_FACTOR);
    let total_area: f64 = pyramid
        .iter()
        .map(|(lvl, _)| (lvl.width() * lvl.height()) as f64)
        .sum();

    struct Candidate {
        lx: usize,
        ly: usize,
        response: f32,
        octave: usize,
    }

    let mut candidates: Vec<Candidate> = Vec::new();
    for (octave, (level, _)) in pyramid.iter().enumerate() {
        let (w, h) = (level.width(), level.height());
        let margin_ok = |x: usize, y: usize| {
            x >= DESCRIPTOR_MARGIN
                && y >= DESCRIPTOR_MARGIN
                && x + DESCRIPTOR_MARGIN < w
                && y + DESCRIPTOR_MARGIN < h
        };
        let mut level_candidates: Vec<Candidate> =
            detect_fast(level, DEFAULT_FAST_THRESHOLD, DEFAULT_FAST_ARC)?
                .into_iter()
                .filter(|&(x, y, _)| margin_ok(x, y))
                .map(|(x, y, _)| Candidate {
                    lx: x,
                    ly: y,
                    response: harris_response(level, x, y, HARRIS_BLOCK, HARRIS_K)
                        .expect("margin guarantees the Harris window fits")
                        .max(0.0),
                    octave,
                })
                .collect();
        let area = (w * h) as f64;
        let budget = ((max_features as f64 * area / total_area).round() as usize).max(1);
        level_candidates.sort_by(|a, b| {
            b.response
                .total_cmp(&a.response)
                .then(a.ly.cmp(&b.ly))
                .then(a.lx.cmp(&b.lx))
        });
        level_candidates.truncate(budget);
        candidates.extend(level_candidates);
    }

    // Global cut in the input frame.
    let mut scored: Vec<(f32, f32, Candidate)> = candidates
        .into_iter()
        .map(|c| {
            let s = pyramid[c.octave].1;
            ((c.lx as f64 * s) as f32, (c.ly as f64 * s) as f32, c)
        })
        .collect();
    scored.sort_by(|(ax, ay, a), (bx, by, b)| {
        b.response
            .total_cmp(&a.response)
            .then(ay.total_cmp(by))
            .then(ax.total_cmp(bx))
            .then(a.octave.cmp(&b.octave))
    });
    scored.truncate(max_features);

    let mut features = ImageFeatures::default();
    for (x, y, c) in scored {
        let level = &pyramid[c.octave].0;
        let angle = orientation(level, c.lx as f32, c.ly as f32, PATCH_RADIUS)
            .expect("margin guarantees the orientation disk fits");
        let level_kp = Keypoint {
            x: c.lx as f32,
            y: c.ly as f32,
            response: c.response,
            octave: c.octave,
            angle,
        };
        let descriptor = compute_descriptor(level, &level_kp, &pattern)
            .expect("margin guarantees the descriptor patch fits");
        features.keypoints.push(Keypoint { x, y, ..level_kp });
        features.descriptors.push(descriptor);
    }
    Ok(features)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::textured_gray as textured;
    use std::f32::consts::FRAC_PI_2;

    #[test]
    fn pyramid_single_level_is_the_input() {
        let gray = GrayImageF::filled(100, 80, 0.25);
        let levels = build_pyramid(&gray, 1, 1.2);
        assert_eq!(levels.len(), 1);
        assert_eq!(levels[0].0, gray);
        assert_eq!(levels[0].1, 1.0);
    }

    #[test]
    fn pyramid_level_dimensions_round_half_up() {
        let gray = GrayImageF::filled(640, 480, 0.25);
        let levels = build_pyramid(&gray, 8, 1.2);
        assert_eq!(levels.len(), 8);
        // 640 / 1.2 = 533.33, 480 / 1.2 = 400.
        assert_eq!((levels[1].0.width(), levels[1].0.height()), (533, 400));
        assert!((levels[1].1 - 1.2).abs() < 1e-12);
    }

    #[test]
    fn pyramid_drops_levels_below_min_dimension() {
        let gray = GrayImageF::filled(40, 40, 0.25);
        let levels = build_pyramid(&gray, 8, 2.0);
        // Level 1 would be 20x20 < 32.
        assert_eq!(levels.len(), 1);
    }

    #[test]
    fn fast_ignores_constant_images() {
        let gray = GrayImageF::filled(32, 32, 0.7);
        assert!(detect_fast(&gray, DEFAULT_FAST_THRESHOLD, 9)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn fast_rejects_tiny_images() {
        let gray = GrayImageF::filled(6, 32, 0.7);
        assert!(matches!(
            detect_fast(&gray, DEFAULT_FAST_THRESHOLD, 9),
            Err(FeatureError::ImageTooSmall { min: 7, .. })
        ));
    }

    #[test]
    fn fast_maximal_threshold_finds_nothing() {
        let img = textured(5, 64, 64);
        assert!(detect_fast(&img, 1.0, 9).unwrap().is_empty());
    }

    #[test]
    fn fast_finds_square_corners_not_edge_midpoints() {
        let mut gray = GrayImageF::filled(64, 64, 0.0);
        for y in 22..42 {
            for x in 22..42 {
                gray.set(x, y, 1.0);
            }
        }
        let detections = detect_fast(&gray, DEFAULT_FAST_THRESHOLD, 9).unwrap();
        assert!(!detections.is_empty());
        let corners = [(22.0, 22.0), (41.0, 22.0), (22.0, 41.0), (41.0, 41.0)];
        for &(cx, cy) in &corners {
            let hit = detections
                .iter()
                .any(|&(x, y, _)| (x as f32 - cx).abs() <= 2.0 && (y as f32 - cy).abs() <= 2.0);
            assert!(hit, "no detection near corner ({cx}, {cy})");
        }
        // Straight edges must stay quiet away from the corners.
        for &(mx, my) in &[(31.5, 22.0), (31.5, 41.0), (22.0, 31.5), (41.0, 31.5)] {
            let near_mid = detections
                .iter()
                .any(|&(x, y, _)| (x as f32 - mx).abs() <= 2.0 && (y as f32 - my).abs() <= 2.0);
            assert!(
                !near_mid,
                "unexpected detection at edge midpoint ({mx}, {my})"
            );
        }
    }

    #[test]
    fn harris_zero_on_constant_patch() {
        let gray = GrayImageF::filled(16, 16, 0.3);
        assert_eq!(harris_response(&gray, 8, 8, 7, 0.04).unwrap(), 0.0);
    }

    #[test]
    fn harris_prefers_corners_over_edges() {
        let corner = GrayImageF::from_fn(16, 16, |x, y| if x >= 8 && y >= 8 { 1.0 } else { 0.0 });
        let edge = GrayImageF::from_fn(16, 16, |x, _| if x >= 8 { 1.0 } else { 0.0 });
        let corner_score = harris_response(&corner, 8, 8, 7, 0.04).unwrap();
        let edge_score = harris_response(&edge, 8, 8, 7, 0.04).unwrap();
        assert!(corner_score > edge_score);
        // An ideal step edge has one zero eigenvalue: det 0, -k*trace^2 <= 0.
        assert!(edge_score <= 0.0);
    }

    #[test]
    fn harris_checks_window_bounds() {
        let gray = GrayImageF::filled(16, 16, 0.3);
        assert!(matches!(
            harris_response(&gray, 2, 8, 7, 0.04),
            Err(FeatureError::OutOfBounds { .. })
        ));
    }

    #[test]
    fn orientation_of_uniform_patch_is_zero() {
        let gray = GrayImageF::filled(64, 64, 0.5);
        assert_eq!(orientation(&gray, 32.0, 32.0, 15).unwrap(), 0.0);
    }

    #[test]
    fn orientation_follows_gradient_axes() {
        let along_x = GrayImageF::from_fn(64, 64, |x, _| x as f32 / 128.0);
        assert!(orientation(&along_x, 32.0, 32.0, 15).unwrap().abs() < 1e-6);
        let along_y = GrayImageF::from_fn(64, 64, |_, y| y as f32 / 128.0);
        let angle = orientation(&along_y, 32.0, 32.0, 15).unwrap();
        assert!((angle - FRAC_PI_2).abs() < 1e-6);
    }

    #[test]
    fn descriptor_of_constant_image_is_all_zero() {
        let gray = GrayImageF::filled(64, 64, 0.5);
        let kp = Keypoint {
            x: 32.0,
            y: 32.0,
            response: 0.0,
            octave: 0,
            angle: 0.0,
        };
        let d = compute_descriptor(&gray, &kp, &SamplingPattern::default()).unwrap();
        assert_eq!(d.0, [0u8; 32]);
    }

    #[test]
    fn descriptor_is_deterministic() {
        let img = textured(9, 64, 64);
        let kp = Keypoint {
            x: 32.0,
            y: 32.0,
            response: 0.0,
            octave: 0,
            angle: 1.25,
        };
        let pattern = SamplingPattern::default();
        let a = compute_descriptor(&img, &kp, &pattern).unwrap();
        let b = compute_descriptor(&img, &kp, &pattern).unwrap();
        assert_eq!(a, b);
        assert_eq!(
            SamplingPattern::new(42).pairs(),
            SamplingPattern::new(42).pairs()
        );
    }

    #[test]
    fn descriptor_margin_is_enforced() {
        let img = textured(9, 64, 64);
        let kp = Keypoint {
            x: 10.0,
            y: 32.0,
            response: 0.0,
            octave: 0,
            angle: 0.0,
        };
        assert!(matches!(
            compute_descriptor(&img, &kp, &SamplingPattern::default()),
            Err(FeatureError::OutOfBounds { .. })
        ));
    }

    #[test]
    fn steering_cancels_a_quarter_turn() {
        let img = textured(13, 64, 64);
        // Rotate the whole image a quarter turn about its center (31.5, 31.5):
        // destination (x, y) pulls from source (y, 63 - x).
        let rotated = GrayImageF::from_fn(64, 64, |x, y| img.at(y, 63 - x));
        let pattern = SamplingPattern::default();

        let angle = orientation(&img, 32.0, 32.0, 15).unwrap();
        let kp = Keypoint {
            x: 32.0,
            y: 32.0,
            response: 0.0,
            octave: 0,
            angle,
        };
        let original = compute_descriptor(&img, &kp, &pattern).unwrap();

        // (32, 32) lands on (31, 32) under the quarter turn.
        let kp_rot = Keypoint {
            x: 31.0,
            y: 32.0,
            response: 0.0,
            octave: 0,
            angle: (angle + FRAC_PI_2).rem_euclid(std::f32::consts::TAU),
        };
        let turned = compute_descriptor(&rotated, &kp_rot, &pattern).unwrap();

        let distance: u32 = original
            .0
            .iter()
            .zip(turned.0.iter())
            .map(|(a, b)| (a ^ b).count_ones())
            .sum();
        assert!(distance <= 64, "descriptor drifted by {distance} bits");
    }

    #[test]
    fn detect_and_compute_on_constant_image_is_empty() {
        let gray = GrayImageF::filled(128, 128, 0.4);
        let features = detect_and_compute(&gray, 500).unwrap();
        assert!(features.is_empty());
    }

    #[test]
    fn detect_and_compute_rejects_small_images() {
        let gray = GrayImageF::filled(63, 128, 0.4);
        assert!(matches!(
            detect_and_compute(&gray, 500),
            Err(FeatureError::ImageTooSmall { min: 64, .. })
        ));
    }

    #[test]
    fn detect_and_compute_respects_budget_and_margins() {
        let img = textured(3, 256, 200);
        for budget in [10, 120] {
            let features = detect_and_compute(&img, budget).unwrap();
            assert_eq!(features.keypoints.len(), features.descriptors.len());
            assert!(features.len() <= budget);
            assert!(!features.is_empty());
            for kp in &features.keypoints {
                assert!(kp.x >= 0.0 && kp.x < 256.0 && kp.y >= 0.0 && kp.y < 200.0);
                assert!((0.0..std::f32::consts::TAU).contains(&kp.angle));
                assert!(kp.response >= 0.0);
            }
        }
    }

    #[test]
    fn detect_and_compute_is_deterministic() {
        let img = textured(17, 256, 200);
        let a = detect_and_compute(&img, 300).unwrap();
        let b = detect_and_compute(&img, 300).unwrap();
        assert_eq!(a.keypoints, b.keypoints);
        assert_eq!(a.descriptors, b.descriptors);
    }

    #[test]
    fn fast_is_shift_equivariant() {
        // Texture embedded well inside a constant canvas, then shifted.
        let tex = textured(23, 48, 48);
        let place = |ox: usize, oy: usize| {
            GrayImageF::from_fn(128, 128, |x, y| {
                if (ox..ox + 48).contains(&x) && (oy..oy + 48).contains(&y) {
                    tex.at(x - ox, y - oy)
                } else {
                    0.5
                }
            })
        };
        let base = place(20, 24);
        let moved = place(25, 27);
        let mut a = detect_fast(&base, DEFAULT_FAST_THRESHOLD, 9).unwrap();
        let mut b = detect_fast(&moved, DEFAULT_FAST_THRESHOLD, 9).unwrap();
        assert!(!a.is_empty());
        for d in &mut a {
            d.0 += 5;
            d.1 += 3;
        }
        a.sort_by_key(|p| (p.0, p.1));
        b.sort_by_key(|p| (p.0, p.1));
        assert_eq!(a.len(), b.len());
        for (p, q) in a.iter().zip(&b) {
            assert_eq!((p.0, p.1), (q.0, q.1));
            assert!((p.2 - q.2).abs() < 1e-6);
        }
    }

    #[test]
    fn checkerboard_keypoints_sit_on_cell_corners() {
        // 32-px cells; the interior 4-cell junctions are the only corners.
        let board =
            GrayImageF::from_fn(
                512,
                512,
                |x, y| {
                    if (x / 32 + y / 32) % 2 == 0 {
                        1.0
                    } else {
                        0.0
                    }
                },
            );
        let features = detect_and_compute(&board, 500).unwrap();
        assert!(
            features.len() >= 100,
            "only {} keypoints on the checkerboard",
            features.len()
        );
        // A binary-sharp junction never shows 9 contiguous strictly-brighter
        // or strictly-darker ring pixels, so detections only appear once
        // pyramid resampling softens the edges — every hit carries the
        // localization error of its own level's pixel size.
        for kp in &features.keypoints {
            let dx = (kp.x / 32.0).round() * 32.0 - kp.x;
            let dy = (kp.y / 32.0).round() * 32.0 - kp.y;
            let dist = (dx * dx + dy * dy).sqrt();
            let tolerance = 4.0 * 1.2f32.powi(kp.octave as i32);
            assert!(
                dist <= tolerance,
                "keypoint ({}, {}) at level {} is {dist:.2} px from the nearest cell corner",
                kp.x,
                kp.y,
                kp.octave
            );
        }
    }
}
