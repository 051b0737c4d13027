//! Descriptor matching and homography estimation between two views.
//!
//! Cuts two overlapping crops out of one synthetic scene, so the true
//! transform between them is a known pure translation, then estimates it
//! from scratch: corner detection, cross-checked Hamming matching, RANSAC.
//!
//! Run with: `cargo run --example match_pair`

use std::error::Error;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use panostitch::{detect_and_compute, match_pair, to_gray, Image, MatchParams};

fn main() -> Result<(), Box<dyn Error>> {
    // One 640x400 scene; crops at x = 0 and x = 160 overlap by 240 px.
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (sw, sh) = (640usize, 400usize);
    let mut source = Image::filled(sw, sh, 3, 110);
    for _ in 0..90 {
        let rw = rng.random_range(10..120);
        let rh = rng.random_range(10..90);
        let x0 = rng.random_range(0..sw - rw);
        let y0 = rng.random_range(0..sh - rh);
        let color: [u8; 3] = [rng.random(), rng.random(), rng.random()];
        for y in y0..y0 + rh {
            for x in x0..x0 + rw {
                source.set_pixel(x, y, &color);
            }
        }
    }
    let crop = |x_start: usize| -> Image {
        let mut data = Vec::new();
        for y in 0..sh {
            for x in x_start..x_start + 400 {
                data.extend_from_slice(source.pixel(x, y));
            }
        }
        Image::new(400, sh, 3, data).expect("crop dimensions are valid")
    };
    let (img_a, img_b) = (crop(0), crop(160));

    let feat_a = detect_and_compute(&to_gray(&img_a), 400)?;
    let feat_b = detect_and_compute(&to_gray(&img_b), 400)?;
    println!("features: {} in A, {} in B", feat_a.len(), feat_b.len());

    let result = match_pair(0, 1, &feat_a, &feat_b, &MatchParams::default());
    println!(
        "{} cross-checked matches, {} inliers, confidence {:.3}",
        result.matches.len(),
        result.num_inliers,
        result.confidence
    );

    // B sits 160 px to the right in the scene, so mapping B into A's frame
    // should translate x by +160.
    let h = result.homography.expect("the views overlap");
    println!("\nestimated map B -> A (truth: x + 160):");
    println!("{:.4}", h.matrix());
    for (x, y) in [(0.0, 0.0), (120.0, 200.0), (239.0, 399.0)] {
        let (u, v) = h.apply(x, y).expect("finite image points");
        println!(
            "  ({x:5.1}, {y:5.1}) -> ({u:7.2}, {v:7.2})   error ({:+.2}, {:+.2})",
            u - (x + 160.0),
            v - y
        );
    }
    Ok(())
}
