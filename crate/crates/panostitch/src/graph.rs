//! The all-pairs match graph: pairwise confidences, selection of the
//! stitchable image group, reference choice, and DOT export.
//!
//! Images are nodes; every unordered pair carries its match result and the
//! confidence score. Stitching keeps the largest group of images connected
//! by edges at or above the confidence threshold, so unrelated frames (a
//! stray photo in the input set) drop out instead of corrupting the result.

use std::fs;
use std::path::Path;

use rayon::prelude::*;
use thiserror::Error;

use crate::features::ImageFeatures;
use crate::matching::{match_pair, MatchParams, PairMatchResult};

/// Errors from graph construction, subsetting and export.
#[derive(Debug, Error)]
pub enum GraphError {
    #[error("need at least 2 images, got {0}")]
    TooFewImages(usize),
    #[error("nothing to stitch: no group of 2+ images is connected at confidence {threshold}")]
    NothingToStitch { threshold: f64 },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Pairwise match results and confidences for a set of images.
#[derive(Debug, Clone)]
pub struct MatchGraph {
    n: usize,
    names: Vec<String>,
    /// One entry per unordered pair, ordered by (i, then j).
    pairs: Vec<PairMatchResult>,
    /// Row-major n x n confidence matrix; symmetric, zero diagonal.
    conf: Vec<f64>,
}

impl MatchGraph {
    /// Assembles a graph from per-pair results (any order); `names` are the
    /// display labels used by DOT export.
    ///
    /// Panics unless exactly one result per unordered pair is present.
    pub fn from_pairs(names: Vec<String>, mut pairs: Vec<PairMatchResult>) -> Self {
        let n = names.len();
        assert!(n >= 2, "a match graph needs at least 2 images");
        assert_eq!(
            pairs.len(),
            n * (n - 1) / 2,
            "expected one result per unordered pair"
        );
        pairs.sort_by_key(|p| (p.i, p.j));
        let mut conf = vec![0.0; n * n];
        for (slot, p) in pairs.iter().enumerate() {
            assert!(p.i < p.j && p.j < n, "pair ({}, {}) out of range", p.i, p.j);
            assert_eq!(
                slot,
                pair_slot(n, p.i, p.j),
                "duplicate or missing pair ({}, {})",
                p.i,
                p.j
            );
            conf[p.i * n + p.j] = p.confidence;
            conf[p.j * n + p.i] = p.confidence;
        }
        Self {
            n,
            names,
            pairs,
            conf,
        }
    }

    /// Number of images.
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn pairs(&self) -> &[PairMatchResult] {
        &self.pairs
    }

    /// The match result of an unordered pair (`i != j`).
    pub fn pair(&self, i: usize, j: usize) -> &PairMatchResult {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        &self.pairs[pair_slot(self.n, a, b)]
    }

    /// Confidence between two images; zero on the diagonal.
    pub fn confidence(&self, i: usize, j: usize) -> f64 {
        self.conf[i * self.n + j]
    }
}

/// Index of pair (i, j), i < j, in lexicographic pair order.
fn pair_slot(n: usize, i: usize, j: usize) -> usize {
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

/// Matches every unordered image pair (in parallel) and assembles the
/// graph. `names` must align with `features`.
pub fn build_match_graph(
    features: &[ImageFeatures],
    names: Vec<String>,
    params: &MatchParams,
) -> Result<MatchGraph, GraphError> {
    let n = features.len();
    if n < 2 {
        return Err(GraphError::TooFewImages(n));
    }
    assert_eq!(names.len(), n, "one name per image");
    let index_pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    // Per-pair seeds are derived from the indices, so the schedule cannot
    // change the results.
    let pairs: Vec<PairMatchResult> = index_pairs
        .par_iter()
        .map(|&(i, j)| match_pair(i, j, &features[i], &features[j], params))
        .collect();
    Ok(MatchGraph::from_pairs(names, pairs))
}

/// The images worth stitching, plus the chosen reference frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subset {
    /// Original image indices, sorted ascending; always 2 or more.
    pub kept: Vec<usize>,
    /// The member all others are warped onto.
    pub reference: usize,
}

/// Keeps the largest group of images mutually connected through edges with
/// confidence at or above `conf_threshold` (ties between equal-sized groups
/// go to the one containing the smallest index), and picks its reference.
///
/// Fails when no group of at least 2 images survives.
pub fn select_subset(graph: &MatchGraph, conf_threshold: f64) -> Result<Subset, GraphError> {
    let n = graph.len();
    // Flood connected components over thresholded edges.
    let mut component = vec![usize::MAX; n];
    let mut n_components = 0;
    for start in 0..n {
        if component[start] != usize::MAX {
            continue;
        }
        let id = n_components;
        n_components += 1;
        let mut stack = vec![start];
        component[start] = id;
        while let Some(v) = stack.pop() {
            for (u, comp) in component.iter_mut().enumerate() {
                if u != v && *comp == usize::MAX && graph.confidence(v, u) >= conf_threshold {
                    *comp = id;
                    stack.push(u);
                }
            }
        }
    }
    // Components are discovered in order of their smallest member, so the
    // first largest one wins ties.
    let mut sizes = vec![0usize; n_components];
    for &c in &component {
        sizes[c] += 1;
    }
    let best = (0..n_components)
        .max_by_key(|&c| (sizes[c], std::cmp::Reverse(c)))
        .expect("at least one component");
    if sizes[best] < 2 {
        return Err(GraphError::NothingToStitch {
            threshold: conf_threshold,
        });
    }
    let kept: Vec<usize> = (0..n).filter(|&v| component[v] == best).collect();
    let reference = choose_reference(graph, &kept);
    Ok(Subset { kept, reference })
}

/// The subset member with the largest sum of confidences to the other
/// members (ties: lowest index) — the most central image, which keeps
/// warps at the panorama edges mild.
pub fn choose_reference(graph: &MatchGraph, subset: &[usize]) -> usize {
    let score = |&v: &usize| -> f64 {
        subset
            .iter()
            .filter(|&&u| u != v)
            .map(|&u| graph.confidence(v, u))
            .sum()
    };
    let mut best = subset[0];
    let mut best_score = score(&best);
    for &v in &subset[1..] {
        let s = score(&v);
        if s > best_score {
            best = v;
            best_score = s;
        }
    }
    best
}

/// Renders the graph in DOT notation: one node per image and one edge per
/// pair with confidence at or above `conf_threshold`, labelled
/// `Nm=<matches> Ni=<inliers> C=<confidence>` with the confidence printed
/// to 4 decimals, rounding half up.
pub fn dot_string(graph: &MatchGraph, conf_threshold: f64) -> String {
    let mut out = String::from("graph matches {\n");
    for (i, name) in graph.names().iter().enumerate() {
        out.push_str(&format!("\"{i}\" [label=\"{name}\"];\n"));
    }
    for p in graph.pairs() {
        if p.confidence >= conf_threshold {
            out.push_str(&format!(
                "\"{}\" -- \"{}\" [label=\"Nm={} Ni={} C={}\"];\n",
                p.i,
                p.j,
                p.matches.len(),
                p.num_inliers,
                format_conf(p.confidence)
            ));
        }
    }
    out.push_str("}\n");
    out
}

/// Fixed-point 4-decimal formatting with half-up rounding (the default
/// float formatter rounds half to even, which would bite on exact .5s).
fn format_conf(c: f64) -> String {
    let scaled = (c * 10000.0 + 0.5).floor() as u64;
    format!("{}.{:04}", scaled / 10000, scaled % 10000)
}

/// Writes [`dot_string`] to a file.
pub fn export_dot(
    graph: &MatchGraph,
    conf_threshold: f64,
    path: impl AsRef<Path>,
) -> Result<(), GraphError> {
    fs::write(path, dot_string(graph, conf_threshold))?;
    Ok(())
}
