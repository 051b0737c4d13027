//! Seam assignment and feather blending of two registered images.
//!
//! Places two overlapping crops on a shared canvas with known translations
//! (no estimation here), assigns every canvas pixel to its nearest
//! contributor, and blends across the seam with distance-based feathering.
//! Also writes the diagnostic overlay that paints the seam in red.
//!
//! Run with: `cargo run --example seam_and_blend`

use std::error::Error;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use panostitch::{
    blend_feather, compute_canvas, find_seams, render_seam_lines, save_image, to_gray, warp_color,
    warp_gray, Homography, Image,
};

fn main() -> Result<(), Box<dyn Error>> {
    // One scene, two 450-wide crops 250 px apart.
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (sw, sh) = (700usize, 400usize);
    let mut source = Image::filled(sw, sh, 3, 100);
    for _ in 0..110 {
        let rw = rng.random_range(10..130);
        let rh = rng.random_range(10..100);
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
            for x in x_start..x_start + 450 {
                data.extend_from_slice(source.pixel(x, y));
            }
        }
        Image::new(450, sh, 3, data).expect("crop dimensions are valid")
    };
    let (img_a, img_b) = (crop(0), crop(250));

    // Image A is the reference; B maps into A's frame by x + 250.
    let homs = [Homography::identity(), Homography::translation(250.0, 0.0)];
    let dims = [(450, sh), (450, sh)];
    let layout = compute_canvas(&homs, &dims)?;
    println!("canvas {}x{}", layout.width, layout.height);

    let color_a = warp_color(&img_a, &homs[0], &layout, 0)?;
    let color_b = warp_color(&img_b, &homs[1], &layout, 1)?;
    let gray_a = warp_gray(&to_gray(&img_a), &homs[0], &layout, 0)?;
    let gray_b = warp_gray(&to_gray(&img_b), &homs[1], &layout, 1)?;

    // Seams at blend resolution: tier ratio 1, masks straight off the warps.
    let seams = find_seams(
        &[gray_a, gray_b],
        &layout,
        &[color_a.mask.clone(), color_b.mask.clone()],
        &layout,
        1.0,
    )?;
    for (k, seam) in seams.iter().enumerate() {
        println!("image {k} owns {} canvas pixels", seam.count());
    }

    let layers = [color_a, color_b];
    let panorama = blend_feather(&layers, &seams, &layout, 20);
    let lines = render_seam_lines(&panorama, &seams, &layout);

    let out = std::env::temp_dir().join("panostitch_blend.ppm");
    let out_lines = std::env::temp_dir().join("panostitch_blend_seams.ppm");
    save_image(&panorama, &out)?;
    save_image(&lines, &out_lines)?;
    println!("blended panorama: {}", out.display());
    println!("seam overlay:     {}", out_lines.display());
    Ok(())
}
