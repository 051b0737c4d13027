//! Descriptor matching and robust pairwise homography estimation.
//!
//! Candidate correspondences come from brute-force Hamming matching with a
//! cross-check; a homography is then fit by RANSAC over normalized-DLT
//! minimal samples. The pair's quality is summarized by
//! `inliers / (8 + 0.3 * matches)`, and downstream stages treat a pair as
//! trustworthy when that score reaches the confidence threshold.

use nalgebra::{DMatrix, Matrix3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::features::{Descriptor, ImageFeatures, Keypoint};

/// When the homogeneous w of a transformed point is at most this, the point
/// has no finite image and mapping it reports failure.
pub const HOMOGENEOUS_W_MIN: f64 = 1e-9;

/// Triangles thinner than this area mark a sample as collinear.
const COLLINEAR_AREA_MIN: f64 = 1e-6;

/// Errors from homography estimation.
#[derive(Debug, Error)]
pub enum MatchError {
    #[error("need at least 4 correspondences, got {0}")]
    InsufficientMatches(usize),
    #[error("degenerate point configuration")]
    DegenerateConfiguration,
    #[error("no homography reached 4 inliers")]
    NoConsensus,
}

/// A correspondence between descriptor `query_idx` of image A and
/// `train_idx` of image B, with their Hamming distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Match {
    pub query_idx: usize,
    pub train_idx: usize,
    pub distance: u32,
}

/// Number of differing bits between two descriptors, in `[0, 256]`.
pub fn hamming(a: &Descriptor, b: &Descriptor) -> u32 {
    a.0.iter()
        .zip(b.0.iter())
        .map(|(x, y)| (x ^ y).count_ones())
        .sum()
}

/// Nearest-neighbour matching of every query descriptor against all train
/// descriptors (ties: lowest train index).
///
/// With `cross_check` on, a pair survives only when the query is also the
/// train descriptor's nearest neighbour (ties: lowest query index), which
/// makes the result one-to-one. Output is ordered by query index.
pub fn match_brute_force(
    desc_a: &[Descriptor],
    desc_b: &[Descriptor],
    cross_check: bool,
) -> Vec<Match> {
    if desc_a.is_empty() || desc_b.is_empty() {
        return Vec::new();
    }
    let nearest = |d: &Descriptor, pool: &[Descriptor]| -> (usize, u32) {
        pool.iter()
            .enumerate()
            .map(|(k, p)| (hamming(d, p), k))
            .min()
            .map(|(dist, k)| (k, dist))
            .expect("pool is non-empty")
    };
    let reverse: Vec<usize> = if cross_check {
        desc_b.iter().map(|d| nearest(d, desc_a).0).collect()
    } else {
        Vec::new()
    };
    let mut out = Vec::new();
    for (a, d) in desc_a.iter().enumerate() {
        let (b, distance) = nearest(d, desc_b);
        if !cross_check || reverse[b] == a {
            out.push(Match {
                query_idx: a,
                train_idx: b,
                distance,
            });
        }
    }
    out
}

/// An invertible 3x3 projective transform, kept normalized so the
/// bottom-right element is 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Homography {
    m: Matrix3<f64>,
}

impl Homography {
    /// Wraps a matrix, dividing through by its bottom-right element.
    ///
    /// Fails when that element is (near) zero or the matrix is not
    /// invertible.
    pub fn from_matrix(m: Matrix3<f64>) -> Result<Self, MatchError> {
        let w = m[(2, 2)];
        if w.abs() < 1e-12 {
            return Err(MatchError::DegenerateConfiguration);
        }
        let m = m / w;
        if m.determinant().abs() <= 1e-12 {
            return Err(MatchError::DegenerateConfiguration);
        }
        Ok(Self { m })
    }

    pub fn identity() -> Self {
        Self {
            m: Matrix3::identity(),
        }
    }

    /// Builds a pure translation by (tx, ty).
    pub fn translation(tx: f64, ty: f64) -> Self {
        Self {
            m: Matrix3::new(1.0, 0.0, tx, 0.0, 1.0, ty, 0.0, 0.0, 1.0),
        }
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.m
    }

    /// Element at `(row, col)`.
    pub fn at(&self, row: usize, col: usize) -> f64 {
        self.m[(row, col)]
    }

    /// Maps (x, y); `None` when the homogeneous w vanishes (point at
    /// infinity).
    pub fn apply(&self, x: f64, y: f64) -> Option<(f64, f64)> {
        let w = self.m[(2, 0)] * x + self.m[(2, 1)] * y + self.m[(2, 2)];
        if w.abs() <= HOMOGENEOUS_W_MIN {
            return None;
        }
        let u = (self.m[(0, 0)] * x + self.m[(0, 1)] * y + self.m[(0, 2)]) / w;
        let v = (self.m[(1, 0)] * x + self.m[(1, 1)] * y + self.m[(1, 2)]) / w;
        Some((u, v))
    }

    /// The inverse transform, renormalized; `None` if its bottom-right
    /// element vanishes (the inverse maps the origin's row to infinity).
    pub fn inverse(&self) -> Option<Homography> {
        let inv = self.m.try_inverse()?;
        Homography::from_matrix(inv).ok()
    }
}

/// Conditioned points plus the similarity transform that produced them.
type NormalizedPoints = (Vec<(f64, f64)>, Matrix3<f64>);

/// Translates a point set's centroid to the origin and scales it so the
/// mean distance from the origin is sqrt(2). Returns the conditioned points
/// and the transform that produced them.
fn hartley_normalize(points: &[(f64, f64)]) -> Option<NormalizedPoints> {
    let n = points.len() as f64;
    let (cx, cy) = points
        .iter()
        .fold((0.0, 0.0), |(sx, sy), &(x, y)| (sx + x, sy + y));
    let (cx, cy) = (cx / n, cy / n);
    let mean_dist = points
        .iter()
        .map(|&(x, y)| ((x - cx).powi(2) + (y - cy).powi(2)).sqrt())
        .sum::<f64>()
        / n;
    if mean_dist < 1e-12 {
        return None;
    }
    let s = std::f64::consts::SQRT_2 / mean_dist;
    let t = Matrix3::new(s, 0.0, -s * cx, 0.0, s, -s * cy, 0.0, 0.0, 1.0);
    let normalized = points
        .iter()
        .map(|&(x, y)| (s * (x - cx), s * (y - cy)))
        .collect();
    Some((normalized, t))
}

/// Least-squares homography from `src` to `dst` via the direct linear
/// transform on Hartley-normalized points.
///
/// The 2n x 9 homogeneous system is solved by SVD (the right singular
/// vector of the smallest singular value); a rank check rejects degenerate
/// configurations such as collinear point sets.
pub fn estimate_homography_dlt(
    src: &[(f64, f64)],
    dst: &[(f64, f64)],
) -> Result<Homography, MatchError> {
    let n = src.len().min(dst.len());
    if n < 4 || src.len() != dst.len() {
        return Err(MatchError::InsufficientMatches(n));
    }
    let (src_n, t_src) = hartley_normalize(src).ok_or(MatchError::DegenerateConfiguration)?;
    let (dst_n, t_dst) = hartley_normalize(dst).ok_or(MatchError::DegenerateConfiguration)?;

    // Pad to at least 9 rows with zeros so the full right-singular basis
    // (including the null direction) is available.
    let rows = (2 * n).max(9);
    let mut a = DMatrix::<f64>::zeros(rows, 9);
    for (k, (&(x, y), &(u, v))) in src_n.iter().zip(dst_n.iter()).enumerate() {
        a[(2 * k, 0)] = -x;
        a[(2 * k, 1)] = -y;
        a[(2 * k, 2)] = -1.0;
        a[(2 * k, 6)] = u * x;
        a[(2 * k, 7)] = u * y;
        a[(2 * k, 8)] = u;
        a[(2 * k + 1, 3)] = -x;
        a[(2 * k + 1, 4)] = -y;
        a[(2 * k + 1, 5)] = -1.0;
        a[(2 * k + 1, 6)] = v * x;
        a[(2 * k + 1, 7)] = v * y;
        a[(2 * k + 1, 8)] = v;
    }
    let svd = a.svd(false, true);
    let v_t = svd.v_t.expect("v_t was requested");
    let sv = &svd.singular_values;

    let mut sorted: Vec<f64> = sv.iter().copied().collect();
    sorted.sort_by(|p, q| q.total_cmp(p));
    // A unique solution needs rank exactly 8: the second-smallest singular
    // value must be healthy while the smallest spans the null direction.
    if sorted[0] <= 0.0 || sorted[7] / sorted[0] < 1e-9 {
        return Err(MatchError::DegenerateConfiguration);
    }
    let i_min = (0..sv.len())
        .min_by(|&p, &q| sv[p].total_cmp(&sv[q]))
        .expect("at least one singular value");
    let h = v_t.row(i_min);
    let h_hat = Matrix3::new(h[0], h[1], h[2], h[3], h[4], h[5], h[6], h[7], h[8]);
    let t_dst_inv = t_dst
        .try_inverse()
        .expect("normalization transforms are invertible");
    Homography::from_matrix(t_dst_inv * h_hat * t_src)
}

/// Euclidean distance between `H * src` and `dst`, infinite when the
/// transformed point has no finite image.
pub fn reprojection_error(h: &Homography, src: (f64, f64), dst: (f64, f64)) -> f64 {
    match h.apply(src.0, src.1) {
        Some((u, v)) => ((u - dst.0).powi(2) + (v - dst.1).powi(2)).sqrt(),
        None => f64::INFINITY,
    }
}

fn triangle_area(a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> f64 {
    ((b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0)).abs() / 2.0
}

fn has_collinear_triple(pts: &[(f64, f64); 4]) -> bool {
    for a in 0..2 {
        for b in a + 1..3 {
            for c in b + 1..4 {
                if triangle_area(pts[a], pts[b], pts[c]) < COLLINEAR_AREA_MIN {
                    return true;
                }
            }
        }
    }
    false
}

fn draw_distinct_4(rng: &mut ChaCha8Rng, n: usize) -> [usize; 4] {
    let mut out = [0usize; 4];
    let mut k = 0;
    while k < 4 {
        let candidate = rng.random_range(0..n);
        if !out[..k].contains(&candidate) {
            out[k] = candidate;
            k += 1;
        }
    }
    out
}

/// Robust homography fit over matched keypoints, mapping B (train) points
/// into A's (query) frame. Returns the model and its inlier mask.
///
/// Each iteration draws 4 distinct matches from a generator seeded with
/// `seed` (so results are reproducible), skips collinear samples, fits a
/// minimal DLT and counts matches with reprojection error below `thresh`.
/// The loop exits early once the best inlier ratio makes further samples
/// pointless at 99.9% confidence. The best model is refined by a DLT over
/// all of its inliers and the mask is recomputed once against that fit;
/// if refinement fails or drops below 4 inliers, the minimal-sample model
/// stands.
pub fn ransac_homography(
    matches: &[Match],
    kps_a: &[Keypoint],
    kps_b: &[Keypoint],
    thresh: f64,
    max_iters: usize,
    seed: u64,
) -> Result<(Homography, Vec<bool>), MatchError> {
    let n = matches.len();
    if n < 4 {
        return Err(MatchError::InsufficientMatches(n));
    }
    let src: Vec<(f64, f64)> = matches
        .iter()
        .map(|m| {
            let kp = &kps_b[m.train_idx];
            (kp.x as f64, kp.y as f64)
        })
        .collect();
    let dst: Vec<(f64, f64)> = matches
        .iter()
        .map(|m| {
            let kp = &kps_a[m.query_idx];
            (kp.x as f64, kp.y as f64)
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best_count = 0usize;
    let mut best_mask = vec![false; n];
    let mut best_h: Option<Homography> = None;
    let mut it = 0usize;
    while it < max_iters {
        it += 1;
        let sample = draw_distinct_4(&mut rng, n);
        let s = sample.map(|k| src[k]);
        let d = sample.map(|k| dst[k]);
        if has_collinear_triple(&s) || has_collinear_triple(&d) {
            continue;
        }
        let Ok(h) = estimate_homography_dlt(&s, &d) else {
            continue;
        };
        let mask: Vec<bool> = src
            .iter()
            .zip(dst.iter())
            .map(|(&sp, &dp)| reprojection_error(&h, sp, dp) < thresh)
            .collect();
        let count = mask.iter().filter(|&&b| b).count();
        if count > best_count {
            best_count = count;
            best_mask = mask;
            best_h = Some(h);
        }
        // Stop once enough samples have been seen to contain an
        // all-inlier draw with 99.9% probability.
        if best_count > 0 {
            let r4 = (best_count as f64 / n as f64).powi(4);
            if r4 >= 1.0 || it as f64 >= (0.001f64).ln() / (1.0 - r4).ln() {
                break;
            }
        }
    }
    if best_count < 4 {
        return Err(MatchError::NoConsensus);
    }
    let h = best_h.expect("a best model exists when best_count >= 4");

    // Refine on the full consensus set.
    let in_src: Vec<_> = (0..n).filter(|&k| best_mask[k]).map(|k| src[k]).collect();
    let in_dst: Vec<_> = (0..n).filter(|&k| best_mask[k]).map(|k| dst[k]).collect();
    if let Ok(refined) = estimate_homography_dlt(&in_src, &in_dst) {
        let mask: Vec<bool> = src
            .iter()
            .zip(dst.iter())
            .map(|(&sp, &dp)| reprojection_error(&refined, sp, dp) < thresh)
            .collect();
        if mask.iter().filter(|&&b| b).count() >= 4 {
            return Ok((refined, mask));
        }
    }
    Ok((h, best_mask))
}

/// Match quality score: `inliers / (8 + 0.3 * matches)`.
///
/// Scores at or above 1.0 mark a pair as belonging to the same scene; the
/// ceiling for fully-inlier pairs approaches 1/0.3.
pub fn pair_confidence(num_inliers: usize, num_matches: usize) -> f64 {
    num_inliers as f64 / (8.0 + 0.3 * num_matches as f64)
}

/// Knobs shared by all pairwise matching runs.
#[derive(Debug, Clone, Copy)]
pub struct MatchParams {
    /// Reprojection error below which a match counts as an inlier (pixels).
    pub ransac_thresh: f64,
    /// Iteration cap for the RANSAC loop.
    pub ransac_iters: usize,
    /// Global seed; each pair derives its own stream from it.
    pub seed: u64,
}

impl Default for MatchParams {
    fn default() -> Self {
        Self {
            ransac_thresh: 3.0,
            ransac_iters: 2000,
            seed: 0,
        }
    }
}

/// Everything known about one image pair after matching.
#[derive(Debug, Clone)]
pub struct PairMatchResult {
    /// First image index (always the smaller).
    pub i: usize,
    /// Second image index.
    pub j: usize,
    /// Cross-checked matches; `query_idx` indexes image i, `train_idx`
    /// image j.
    pub matches: Vec<Match>,
    /// Per-match inlier flag under `homography`.
    pub inlier_mask: Vec<bool>,
    /// Maps points of image j into image i's frame; present iff at least 4
    /// inliers were found.
    pub homography: Option<Homography>,
    pub num_inliers: usize,
    /// `pair_confidence(num_inliers, matches.len())`.
    pub confidence: f64,
}

/// Per-pair RANSAC seed: mixing the indices in keeps pairs decorrelated
/// while letting parallel and serial schedules agree bit-for-bit.
fn pair_seed(seed: u64, i: usize, j: usize) -> u64 {
    seed ^ (i as u64 * 10007 + j as u64)
}

/// Matches image `i` against image `j` end to end: brute-force matching,
/// RANSAC (skipped or failed fits degrade to zero inliers instead of
/// erroring), and the confidence score.
pub fn match_pair(
    i: usize,
    j: usize,
    feat_a: &ImageFeatures,
    feat_b: &ImageFeatures,
    params: &MatchParams,
) -> PairMatchResult {
    let matches = match_brute_force(&feat_a.descriptors, &feat_b.descriptors, true);
    let mut homography = None;
    let mut inlier_mask = vec![false; matches.len()];
    let mut num_inliers = 0;
    if matches.len() >= 4 {
        if let Ok((h, mask)) = ransac_homography(
            &matches,
            &feat_a.keypoints,
            &feat_b.keypoints,
            params.ransac_thresh,
            params.ransac_iters,
            pair_seed(params.seed, i, j),
        ) {
            num_inliers = mask.iter().filter(|&&b| b).count();
            homography = Some(h);
            inlier_mask = mask;
        }
    }
    let confidence = pair_confidence(num_inliers, matches.len());
    PairMatchResult {
        i,
        j,
        matches,
        inlier_mask,
        homography,
        num_inliers,
        confidence,
    }
}
