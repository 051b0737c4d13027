//! End-to-end stitch of three synthetic crops through the library API.
//!
//! Generates a textured source image, cuts three overlapping crops, writes
//! them to disk, runs the full pipeline on the files, and reports what was
//! estimated along the way.
//!
//! Run with: `cargo run --example stitch`

use std::error::Error;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use panostitch::{run_pipeline, save_image, Image, StitchConfig};

/// A deterministic pile of colored rectangles over a mid-gray ground.
fn textured_source(seed: u64, width: usize, height: usize) -> Image {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut img = Image::filled(width, height, 3, 128);
    for _ in 0..width * height / 3000 {
        let rw = rng.random_range(8..width / 3);
        let rh = rng.random_range(8..height / 3);
        let x0 = rng.random_range(0..width - rw);
        let y0 = rng.random_range(0..height - rh);
        let color: [u8; 3] = [rng.random(), rng.random(), rng.random()];
        for y in y0..y0 + rh {
            for x in x0..x0 + rw {
                img.set_pixel(x, y, &color);
            }
        }
    }
    img
}

fn crop(img: &Image, x0: usize, width: usize) -> Image {
    let mut data = Vec::with_capacity(width * img.height() * 3);
    for y in 0..img.height() {
        for x in x0..x0 + width {
            data.extend_from_slice(img.pixel(x, y));
        }
    }
    Image::new(width, img.height(), 3, data).expect("crop dimensions are valid")
}

fn main() -> Result<(), Box<dyn Error>> {
    let dir = std::env::temp_dir().join("panostitch_stitch_example");
    std::fs::create_dir_all(&dir)?;

    // Three 500-wide crops of a 900x600 scene, each shifted by 200 px.
    let source = textured_source(7, 900, 600);
    let mut inputs = Vec::new();
    for (k, x0) in [0usize, 200, 400].into_iter().enumerate() {
        let path = dir.join(format!("crop{k}.ppm"));
        save_image(&crop(&source, x0, 500), &path)?;
        inputs.push(path);
    }

    let config = StitchConfig {
        inputs,
        output: dir.join("panorama.ppm"),
        dot_out: Some(dir.join("matches.dot")),
        ..StitchConfig::default()
    };
    let report = run_pipeline(&config)?;

    println!("kept images:  {:?}", report.subset.kept);
    println!("reference:    image {}", report.subset.reference);
    for pair in report.graph.pairs() {
        println!(
            "pair {}-{}:     {} matches, {} inliers, confidence {:.3}",
            pair.i,
            pair.j,
            pair.matches.len(),
            pair.num_inliers,
            pair.confidence
        );
    }
    println!("gains:        {:?}", report.gains);
    println!(
        "canvas:       {}x{} px",
        report.layout.width, report.layout.height
    );
    println!("panorama:     {}", config.output.display());
    println!(
        "match graph:  {}",
        config.dot_out.as_ref().unwrap().display()
    );
    Ok(())
}
