//! Pairwise match graph construction and Graphviz export.
//!
//! Matches four images against each other — three overlapping crops of one
//! scene plus one pure-noise frame — prints the resulting graph in DOT
//! format, and shows which images survive subset selection. Pipe the output
//! into `dot -Tpng` to visualize it.
//!
//! Run with: `cargo run --example match_graph_dot`

use std::error::Error;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use panostitch::{
    build_match_graph, choose_reference, detect_and_compute, dot_string, select_subset, to_gray,
    Image, MatchParams,
};

fn main() -> Result<(), Box<dyn Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let (sw, sh) = (800usize, 450usize);
    let mut source = Image::filled(sw, sh, 3, 96);
    for _ in 0..120 {
        let rw = rng.random_range(12..150);
        let rh = rng.random_range(12..110);
        let x0 = rng.random_range(0..sw - rw);
        let y0 = rng.random_range(0..sh - rh);
        let color: [u8; 3] = [rng.random(), rng.random(), rng.random()];
        for y in y0..y0 + rh {
            for x in x0..x0 + rw {
                source.set_pixel(x, y, &color);
            }
        }
    }

    // Three 450-wide crops shifted by 175 px each, plus unrelated noise.
    let mut images = Vec::new();
    for x_start in [0usize, 175, 350] {
        let mut data = Vec::new();
        for y in 0..sh {
            for x in x_start..x_start + 450 {
                data.extend_from_slice(source.pixel(x, y));
            }
        }
        images.push(Image::new(450, sh, 3, data).expect("crop dimensions are valid"));
    }
    let noise = Image::new(
        450,
        sh,
        3,
        (0..450 * sh * 3).map(|_| rng.random()).collect(),
    )
    .expect("noise dimensions are valid");
    images.push(noise);

    let features = images
        .iter()
        .map(|img| detect_and_compute(&to_gray(img), 400))
        .collect::<Result<Vec<_>, _>>()?;

    let names = vec![
        "left".to_owned(),
        "middle".to_owned(),
        "right".to_owned(),
        "noise".to_owned(),
    ];
    let graph = build_match_graph(&features, names, &MatchParams::default())?;

    // Edges below this confidence are considered coincidence.
    let conf_threshold = 1.0;
    println!("{}", dot_string(&graph, conf_threshold));

    let subset = select_subset(&graph, conf_threshold)?;
    eprintln!("kept images: {:?}", subset.kept);
    eprintln!(
        "reference:   image {} (highest total confidence: {:.3})",
        subset.reference,
        subset
            .kept
            .iter()
            .map(|&j| graph.confidence(subset.reference, j))
            .sum::<f64>()
    );
    eprintln!("re-chosen:   {}", choose_reference(&graph, &subset.kept));
    Ok(())
}
