//! Exposure balancing between overlapping images.
//!
//! Registers two crops of one scene where the second was shot "darker"
//! (every channel scaled by 0.72), estimates per-image gain factors from
//! the overlap statistics, and writes the blend with and without the
//! correction for comparison.
//!
//! Run with: `cargo run --example gain_compensation`

use std::error::Error;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use panostitch::{
    apply_gains, blend_feather, compute_canvas, estimate_gains, find_seams, save_image, to_gray,
    warp_color, warp_gray, Homography, Image,
};

fn main() -> Result<(), Box<dyn Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    let (sw, sh) = (640usize, 400usize);
    let mut source = Image::filled(sw, sh, 3, 120);
    for _ in 0..100 {
        let rw = rng.random_range(10..120);
        let rh = rng.random_range(10..90);
        let x0 = rng.random_range(0..sw - rw);
        let y0 = rng.random_range(0..sh - rh);
        // Stay below 255 so the darkened copy can be fully lifted back.
        let color: [u8; 3] = [
            rng.random_range(20..230),
            rng.random_range(20..230),
            rng.random_range(20..230),
        ];
        for y in y0..y0 + rh {
            for x in x0..x0 + rw {
                source.set_pixel(x, y, &color);
            }
        }
    }
    let crop = |x_start: usize, dim: f64| -> Image {
        let mut data = Vec::new();
        for y in 0..sh {
            for x in x_start..x_start + 420 {
                data.extend(
                    source
                        .pixel(x, y)
                        .iter()
                        .map(|&v| (f64::from(v) * dim).round() as u8),
                );
            }
        }
        Image::new(420, sh, 3, data).expect("crop dimensions are valid")
    };
    let img_a = crop(0, 1.0);
    let img_b = crop(220, 0.72); // underexposed copy

    let homs = [Homography::identity(), Homography::translation(220.0, 0.0)];
    let layout = compute_canvas(&homs, &[(420, sh), (420, sh)])?;

    let color_a = warp_color(&img_a, &homs[0], &layout, 0)?;
    let color_b = warp_color(&img_b, &homs[1], &layout, 1)?;
    let gray_a = warp_gray(&to_gray(&img_a), &homs[0], &layout, 0)?;
    let gray_b = warp_gray(&to_gray(&img_b), &homs[1], &layout, 1)?;

    let gains = estimate_gains(&[gray_a.clone(), gray_b.clone()]);
    println!("estimated gains: [{:.4}, {:.4}]", gains[0], gains[1]);
    println!(
        "gain ratio {:.4}, truth 1/0.72 = {:.4}",
        gains[1] / gains[0],
        1.0 / 0.72
    );

    let seams = find_seams(
        &[gray_a, gray_b],
        &layout,
        &[color_a.mask.clone(), color_b.mask.clone()],
        &layout,
        1.0,
    )?;

    let raw = blend_feather(&[color_a.clone(), color_b.clone()], &seams, &layout, 15);
    let balanced_layers = [
        apply_gains(&color_a, gains[0]),
        apply_gains(&color_b, gains[1]),
    ];
    let balanced = blend_feather(&balanced_layers, &seams, &layout, 15);

    let out_raw = std::env::temp_dir().join("panostitch_gain_before.ppm");
    let out_fix = std::env::temp_dir().join("panostitch_gain_after.ppm");
    save_image(&raw, &out_raw)?;
    save_image(&balanced, &out_fix)?;
    println!("without gains: {}", out_raw.display());
    println!("with gains:    {}", out_fix.display());
    Ok(())
}
