//! Corner detection and descriptor extraction on a synthetic image.
//!
//! Builds a gray test image with high-contrast squares, runs the oriented
//! corner detector over its scale pyramid, prints a per-octave summary, and
//! saves a copy with every keypoint marked.
//!
//! Run with: `cargo run --example detect_features`

use std::error::Error;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use panostitch::{detect_and_compute, save_image, GrayImageF, Image};

fn main() -> Result<(), Box<dyn Error>> {
    // Scattered bright and dark squares over a smooth ramp: plenty of
    // corners at several scales.
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let (w, h) = (480, 360);
    let mut gray = GrayImageF::from_fn(w, h, |x, y| 0.35 + 0.2 * (x + y) as f32 / (w + h) as f32);
    for _ in 0..60 {
        let side = rng.random_range(6..48);
        let x0 = rng.random_range(0..w - side);
        let y0 = rng.random_range(0..h - side);
        let v = if rng.random::<bool>() { 0.95 } else { 0.05 };
        for y in y0..y0 + side {
            for x in x0..x0 + side {
                gray.set(x, y, v);
            }
        }
    }

    let features = detect_and_compute(&gray, 400)?;
    println!(
        "{} keypoints, {} descriptors",
        features.len(),
        features.descriptors.len()
    );

    let max_octave = features
        .keypoints
        .iter()
        .map(|k| k.octave)
        .max()
        .unwrap_or(0);
    for octave in 0..=max_octave {
        let n = features
            .keypoints
            .iter()
            .filter(|k| k.octave == octave)
            .count();
        println!("octave {octave}: {n:4} keypoints");
    }

    println!("\nstrongest five:");
    let mut by_response: Vec<_> = features.keypoints.iter().collect();
    by_response.sort_by(|a, b| b.response.total_cmp(&a.response));
    for kp in by_response.iter().take(5) {
        println!(
            "  ({:6.1}, {:6.1})  response {:.4}  octave {}  angle {:6.1} deg",
            kp.x,
            kp.y,
            kp.response,
            kp.octave,
            kp.angle.to_degrees()
        );
    }

    // Mark every keypoint with a red dot sized by its octave.
    let mut marked = Image::filled(w, h, 3, 0);
    for y in 0..h {
        for x in 0..w {
            let v = (gray.at(x, y) * 255.0).round() as u8;
            marked.set_pixel(x, y, &[v, v, v]);
        }
    }
    for kp in &features.keypoints {
        let r = 1 + kp.octave as i64;
        let (cx, cy) = (kp.x.round() as i64, kp.y.round() as i64);
        for dy in -r..=r {
            for dx in -r..=r {
                if dx * dx + dy * dy > r * r {
                    continue;
                }
                let (x, y) = (cx + dx, cy + dy);
                if x >= 0 && y >= 0 && (x as usize) < w && (y as usize) < h {
                    marked.set_pixel(x as usize, y as usize, &[255, 40, 40]);
                }
            }
        }
    }
    let out = std::env::temp_dir().join("panostitch_keypoints.ppm");
    save_image(&marked, &out)?;
    println!("\nmarked image: {}", out.display());
    Ok(())
}
