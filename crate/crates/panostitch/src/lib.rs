//! Panorama stitching from overlapping photographs.
//!
//! The pipeline detects oriented binary features on a downscaled copy of
//! every input, matches descriptors between all pairs, estimates pairwise
//! homographies with RANSAC, keeps the images that belong to the same scene,
//! chains homographies to a reference view, and composites the result with
//! seam assignment, gain compensation and feather blending.
//!
//! Each stage is usable on its own — see the `examples/` directory — and
//! [`pipeline::run_pipeline`] drives them end to end the same way the
//! `panostitch` binary does.

pub mod compose;
pub mod features;
pub mod graph;
pub mod image;
pub mod matching;
pub mod pipeline;

#[cfg(test)]
pub(crate) mod testutil;

pub use compose::{
    apply_gains, blend_feather, chain_to_reference, compute_canvas, estimate_gains, find_seams,
    render_seam_lines, render_weight_overlay, scale_homography, warp_color, warp_gray,
    CanvasLayout, ComposeError, Mask, WarpedColor, WarpedGray,
};
pub use features::{
    build_pyramid, detect_and_compute, Descriptor, FeatureError, ImageFeatures, Keypoint,
    SamplingPattern,
};
pub use graph::{
    build_match_graph, choose_reference, dot_string, export_dot, select_subset, GraphError,
    MatchGraph, Subset,
};
pub use image::{
    encode_pnm, load_image, resize_to_megapix, save_image, to_gray, GrayImageF, Image, ImageError,
};
pub use matching::{
    estimate_homography_dlt, hamming, match_brute_force, match_pair, pair_confidence,
    ransac_homography, reprojection_error, Homography, Match, MatchError, MatchParams,
    PairMatchResult,
};
pub use pipeline::{
    parse_args, run_pipeline, Draw, PipelineError, StitchConfig, StitchReport, TierScales, USAGE,
};
