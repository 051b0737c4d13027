//! End-to-end stitching: the configuration surface, command-line parsing,
//! and the staged pipeline behind the `panostitch` binary.

use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;
use thiserror::Error;

use crate::compose::{
    apply_gains, blend_feather, chain_to_reference, compute_canvas, estimate_gains, find_seams,
    render_seam_lines, render_weight_overlay, scale_homography, warp_color, warp_gray,
    CanvasLayout, Mask, WarpedColor, WarpedGray,
};
use crate::features::{detect_and_compute, ImageFeatures, DEFAULT_MAX_FEATURES};
use crate::graph::{build_match_graph, export_dot, select_subset, GraphError, MatchGraph, Subset};
use crate::image::{load_image, resize_to_megapix, save_image, to_gray, GrayImageF, Image};
use crate::matching::{Homography, MatchParams};

/// One-line summary of the command-line surface.
pub const USAGE: &str = "Usage: panostitch <input>... -o <output> \
[--final-megapix F] [--medium-megapix F] [--low-megapix F] [--conf-thresh F] \
[--ransac-thresh F] [--ransac-iters N] [--seed N] [--max-features N] \
[--feather-radius N] [--draw none|lines|weights] [--dot-out PATH] [--verbose]";

/// Diagnostic overlay burned into the output image.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Draw {
    /// Plain panorama.
    #[default]
    None,
    /// Red lines where seam regions meet.
    Lines,
    /// Per-image blend weights tinted over the panorama.
    Weights,
}

/// Full parameter surface of the stitcher. `Default` fills every tuning
/// parameter; `inputs` and `output` must be supplied by the caller.
#[derive(Debug, Clone)]
pub struct StitchConfig {
    pub inputs: Vec<PathBuf>,
    pub output: PathBuf,
    /// Blend-tier budget in megapixels; ≤ 0 keeps native resolution.
    pub final_megapix: f64,
    /// Feature-tier budget in megapixels; ≤ 0 keeps native resolution.
    pub medium_megapix: f64,
    /// Seam/gain-tier budget in megapixels; ≤ 0 keeps native resolution.
    pub low_megapix: f64,
    /// Minimum pairwise confidence for two images to stitch together.
    pub conf_thresh: f64,
    /// RANSAC inlier threshold in medium-tier pixels.
    pub ransac_thresh: f64,
    /// RANSAC iteration cap.
    pub ransac_iters: usize,
    /// Master random seed.
    pub seed: u64,
    /// Feature budget per image.
    pub max_features: usize,
    /// Feather band width in final-tier pixels.
    pub feather_radius: usize,
    pub draw: Draw,
    /// Optional path for a DOT dump of the match graph.
    pub dot_out: Option<PathBuf>,
    /// Extra per-image and per-pair diagnostics on standard error.
    pub verbose: bool,
}

impl Default for StitchConfig {
    fn default() -> Self {
        Self {
            inputs: Vec::new(),
            output: PathBuf::new(),
            final_megapix: -1.0,
            medium_megapix: 0.6,
            low_megapix: 0.1,
            conf_thresh: 1.0,
            ransac_thresh: 3.0,
            ransac_iters: 2000,
            seed: 0,
            max_features: DEFAULT_MAX_FEATURES,
            feather_radius: 15,
            draw: Draw::None,
            dot_out: None,
            verbose: false,
        }
    }
}

/// Pipeline failures, each tied to a process exit code.
#[derive(Debug, Error)]
pub enum PipelineError {
    /// Bad command line or configuration (exit 2).
    #[error("{0}")]
    Usage(String),
    /// The inputs cannot be stitched (exit 3).
    #[error("{0}")]
    NothingToStitch(String),
    /// Reading an input or writing an output failed (exit 4).
    #[error("{0}")]
    Io(String),
}

impl PipelineError {
    /// Process exit code for this failure.
    pub fn exit_code(&self) -> u8 {
        match self {
            PipelineError::Usage(_) => 2,
            PipelineError::NothingToStitch(_) => 3,
            PipelineError::Io(_) => 4,
        }
    }
}

/// Resize factors applied to one input, relative to its native size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TierScales {
    /// Feature tier.
    pub medium: f64,
    /// Seam and gain tier.
    pub low: f64,
    /// Blend tier (1.0 when stitching at native resolution).
    pub full: f64,
}

/// Everything the pipeline computed, beyond the files it wrote.
#[derive(Debug, Clone)]
pub struct StitchReport {
    pub graph: MatchGraph,
    pub subset: Subset,
    /// Per-input tier scales, aligned with the config's input list.
    pub scales: Vec<TierScales>,
    /// Per-image gains, aligned with `subset.kept`.
    pub gains: Vec<f64>,
    /// Blend-tier canvas layout, aligned with `subset.kept`.
    pub layout: CanvasLayout,
    /// Blend-tier warp coverage masks, aligned with `subset.kept`.
    pub masks: Vec<Mask>,
    /// Blend-tier seam regions, aligned with `subset.kept`.
    pub seams: Vec<Mask>,
    /// The image written to the output path, overlay included.
    pub panorama: Image,
}

fn usage_error(msg: impl Into<String>) -> PipelineError {
    PipelineError::Usage(msg.into())
}

/// Checks the cross-parameter invariants shared by the parser and the
/// pipeline entry point.
fn validate(config: &StitchConfig) -> Result<(), PipelineError> {
    for (name, v) in [
        ("--final-megapix", config.final_megapix),
        ("--medium-megapix", config.medium_megapix),
        ("--low-megapix", config.low_megapix),
    ] {
        if v.is_nan() {
            return Err(usage_error(format!("invalid value 'NaN' for {name}")));
        }
    }
    if config.medium_megapix > 0.0
        && config.low_megapix > 0.0
        && config.medium_megapix < config.low_megapix
    {
        return Err(usage_error(format!(
            "--medium-megapix ({}) must be at least --low-megapix ({})",
            config.medium_megapix, config.low_megapix
        )));
    }
    if config.conf_thresh.is_nan() || config.conf_thresh < 0.0 {
        return Err(usage_error("--conf-thresh must be non-negative"));
    }
    if config.ransac_thresh.is_nan() || config.ransac_thresh <= 0.0 {
        return Err(usage_error("--ransac-thresh must be positive"));
    }
    if config.ransac_iters == 0 {
        return Err(usage_error("--ransac-iters must be at least 1"));
    }
    if config.max_features == 0 {
        return Err(usage_error("--max-features must be at least 1"));
    }
    if config.feather_radius == 0 {
        return Err(usage_error("--feather-radius must be at least 1"));
    }
    Ok(())
}

/// Parses command-line arguments (without the program name).
pub fn parse_args<S: AsRef<str>>(args: &[S]) -> Result<StitchConfig, PipelineError> {
    fn value<'a, S: AsRef<str>>(
        it: &mut std::slice::Iter<'a, S>,
        flag: &str,
    ) -> Result<&'a str, PipelineError> {
        it.next()
            .map(|s| s.as_ref())
            .ok_or_else(|| usage_error(format!("flag {flag} needs a value")))
    }
    fn numeric<T: std::str::FromStr>(raw: &str, flag: &str) -> Result<T, PipelineError> {
        raw.parse()
            .map_err(|_| usage_error(format!("invalid value '{raw}' for {flag}")))
    }

    let mut config = StitchConfig::default();
    let mut output_seen = false;
    let mut it = args.iter();
    while let Some(arg) = it.next() {
        let arg = arg.as_ref();
        match arg {
            "-o" => {
                config.output = PathBuf::from(value(&mut it, arg)?);
                output_seen = true;
            }
            "--final-megapix" => config.final_megapix = numeric(value(&mut it, arg)?, arg)?,
            "--medium-megapix" => config.medium_megapix = numeric(value(&mut it, arg)?, arg)?,
            "--low-megapix" => config.low_megapix = numeric(value(&mut it, arg)?, arg)?,
            "--conf-thresh" => config.conf_thresh = numeric(value(&mut it, arg)?, arg)?,
            "--ransac-thresh" => config.ransac_thresh = numeric(value(&mut it, arg)?, arg)?,
            "--ransac-iters" => config.ransac_iters = numeric(value(&mut it, arg)?, arg)?,
            "--seed" => config.seed = numeric(value(&mut it, arg)?, arg)?,
            "--max-features" => config.max_features = numeric(value(&mut it, arg)?, arg)?,
            "--feather-radius" => config.feather_radius = numeric(value(&mut it, arg)?, arg)?,
            "--draw" => {
                config.draw = match value(&mut it, arg)? {
                    "none" => Draw::None,
                    "lines" => Draw::Lines,
                    "weights" => Draw::Weights,
                    other => {
                        return Err(usage_error(format!("invalid value '{other}' for --draw")))
                    }
                };
            }
            "--dot-out" => config.dot_out = Some(PathBuf::from(value(&mut it, arg)?)),
            "--verbose" => config.verbose = true,
            flag if flag.starts_with('-') && flag.len() > 1 => {
                return Err(usage_error(format!("unknown flag {flag}")));
            }
            path => config.inputs.push(PathBuf::from(path)),
        }
    }

    if config.inputs.len() < 2 {
        return Err(usage_error("need at least 2 input images"));
    }
    if !output_seen {
        return Err(usage_error("missing required -o <output>"));
    }
    validate(&config)?;
    Ok(config)
}

/// One image resized to the three working resolutions.
struct Tiers {
    medium_gray: GrayImageF,
    low_gray: GrayImageF,
    full_rgb: Image,
    scales: TierScales,
}

fn log_stage(name: &str, start: Instant) {
    eprintln!(
        "stage {name}: {:.1} ms",
        start.elapsed().as_secs_f64() * 1000.0
    );
}

fn stitch_failed(e: impl std::fmt::Display) -> PipelineError {
    PipelineError::NothingToStitch(e.to_string())
}

/// Runs the full pipeline: load, resize to the three tiers, features on the
/// medium tier, all-pairs matching, optional DOT export, subset selection,
/// homography chaining and warping at the low and blend tiers, seam
/// finding, gain compensation, feather blending, optional overlay, output.
///
/// Each stage logs one timing line to standard error. The same config and
/// inputs produce byte-identical outputs, regardless of thread count.
pub fn run_pipeline(config: &StitchConfig) -> Result<StitchReport, PipelineError> {
    validate(config)?;
    if config.inputs.len() < 2 {
        return Err(usage_error("need at least 2 input images"));
    }
    if config.output.as_os_str().is_empty() {
        return Err(usage_error("missing required -o <output>"));
    }

    // Load and build the resolution tiers.
    let stage = Instant::now();
    let mut originals = Vec::with_capacity(config.inputs.len());
    for path in &config.inputs {
        let img =
            load_image(path).map_err(|e| PipelineError::Io(format!("{}: {e}", path.display())))?;
        originals.push(img);
    }
    let names: Vec<String> = config
        .inputs
        .iter()
        .map(|p| p.display().to_string())
        .collect();
    let tiers: Vec<Tiers> = originals
        .par_iter()
        .map(|img| {
            let (medium, s_med) = resize_to_megapix(img, config.medium_megapix);
            let (low, s_low) = resize_to_megapix(img, config.low_megapix);
            let (full, s_full) = resize_to_megapix(img, config.final_megapix);
            Tiers {
                medium_gray: to_gray(&medium),
                low_gray: to_gray(&low),
                full_rgb: full.to_rgb(),
                scales: TierScales {
                    medium: s_med,
                    low: s_low,
                    full: s_full,
                },
            }
        })
        .collect();
    drop(originals);
    log_stage("resize", stage);

    // Features on the medium tier. Images too small for the detector get
    // empty feature sets and drop out naturally at subset selection.
    let stage = Instant::now();
    let features: Vec<ImageFeatures> = tiers
        .par_iter()
        .map(|tier| detect_and_compute(&tier.medium_gray, config.max_features).unwrap_or_default())
        .collect();
    log_stage("features", stage);
    if config.verbose {
        for (i, f) in features.iter().enumerate() {
            eprintln!("  image {i}: {} features", f.len());
        }
    }

    // All-pairs matching.
    let stage = Instant::now();
    let params = MatchParams {
        ransac_thresh: config.ransac_thresh,
        ransac_iters: config.ransac_iters,
        seed: config.seed,
    };
    let graph = build_match_graph(&features, names, &params).map_err(|e| match e {
        GraphError::TooFewImages(_) => usage_error(e.to_string()),
        other => stitch_failed(other),
    })?;
    log_stage("match", stage);
    if config.verbose {
        for pair in graph.pairs() {
            eprintln!(
                "  pair {}-{}: {} matches, {} inliers, confidence {:.4}",
                pair.i,
                pair.j,
                pair.matches.len(),
                pair.num_inliers,
                pair.confidence
            );
        }
    }

    // The DOT dump is written before subsetting so it is still available
    // when nothing is stitchable.
    if let Some(path) = &config.dot_out {
        export_dot(&graph, config.conf_thresh, path)
            .map_err(|e| PipelineError::Io(format!("{}: {e}", path.display())))?;
    }

    let stage = Instant::now();
    let subset = select_subset(&graph, config.conf_thresh).map_err(stitch_failed)?;
    log_stage("subset", stage);
    if config.verbose {
        eprintln!(
            "  kept {:?} of {} images, reference {}",
            subset.kept,
            graph.len(),
            subset.reference
        );
    }

    // Chain homographies at the medium tier, then bridge them to the low
    // and blend tiers through each image's scale factors.
    let stage = Instant::now();
    let h_medium = chain_to_reference(&graph, &subset).map_err(stitch_failed)?;
    let reference = subset.reference;
    let tier_h = |pick: fn(&TierScales) -> f64| -> Vec<Homography> {
        subset
            .kept
            .iter()
            .zip(&h_medium)
            .map(|(&k, h)| {
                scale_homography(
                    h,
                    pick(&tiers[k].scales) / tiers[k].scales.medium,
                    pick(&tiers[reference].scales) / tiers[reference].scales.medium,
                )
            })
            .collect()
    };
    let h_low = tier_h(|s| s.low);
    let h_full = tier_h(|s| s.full);
    let low_dims: Vec<(usize, usize)> = subset
        .kept
        .iter()
        .map(|&k| (tiers[k].low_gray.width(), tiers[k].low_gray.height()))
        .collect();
    let full_dims: Vec<(usize, usize)> = subset
        .kept
        .iter()
        .map(|&k| (tiers[k].full_rgb.width(), tiers[k].full_rgb.height()))
        .collect();
    let low_layout = compute_canvas(&h_low, &low_dims).map_err(stitch_failed)?;
    let full_layout = compute_canvas(&h_full, &full_dims).map_err(stitch_failed)?;
    let low_layers: Vec<WarpedGray> = subset
        .kept
        .par_iter()
        .enumerate()
        .map(|(pos, &k)| warp_gray(&tiers[k].low_gray, &h_low[pos], &low_layout, pos))
        .collect::<Result<_, _>>()
        .map_err(stitch_failed)?;
    let full_layers: Vec<WarpedColor> = subset
        .kept
        .par_iter()
        .enumerate()
        .map(|(pos, &k)| warp_color(&tiers[k].full_rgb, &h_full[pos], &full_layout, pos))
        .collect::<Result<_, _>>()
        .map_err(stitch_failed)?;
    log_stage("warp", stage);

    // Seams at the low tier, carried up to the blend tier.
    let stage = Instant::now();
    let final_masks: Vec<Mask> = full_layers.iter().map(|l| l.mask.clone()).collect();
    let tier_ratio = tiers[reference].scales.low / tiers[reference].scales.full;
    let seams = find_seams(
        &low_layers,
        &low_layout,
        &final_masks,
        &full_layout,
        tier_ratio,
    )
    .map_err(stitch_failed)?;
    log_stage("seam", stage);

    // Gains from low-tier overlaps, applied at the blend tier.
    let stage = Instant::now();
    let gains = estimate_gains(&low_layers);
    let full_layers: Vec<WarpedColor> = full_layers
        .iter()
        .zip(&gains)
        .map(|(layer, &g)| apply_gains(layer, g))
        .collect();
    log_stage("gain", stage);
    if config.verbose {
        eprintln!("  gains: {gains:?}");
    }

    // Blend, overlay, write.
    let stage = Instant::now();
    let panorama = blend_feather(&full_layers, &seams, &full_layout, config.feather_radius);
    let output = match config.draw {
        Draw::None => panorama,
        Draw::Lines => render_seam_lines(&panorama, &seams, &full_layout),
        Draw::Weights => {
            render_weight_overlay(&full_layers, &seams, &full_layout, config.feather_radius)
        }
    };
    log_stage("blend", stage);

    save_image(&output, &config.output)
        .map_err(|e| PipelineError::Io(format!("{}: {e}", config.output.display())))?;

    Ok(StitchReport {
        graph,
        subset,
        scales: tiers.into_iter().map(|t| t.scales).collect(),
        gains,
        layout: full_layout,
        masks: final_masks,
        seams,
        panorama: output,
    })
}
