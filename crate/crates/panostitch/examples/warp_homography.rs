//! Warping an image onto a canvas under a projective transform.
//!
//! Applies a rotation-plus-translation homography to a checkered test
//! image: the canvas is sized from the warped corner bounding box, and each
//! destination pixel is filled by inverse mapping with bilinear sampling.
//!
//! Run with: `cargo run --example warp_homography`

use std::error::Error;

use nalgebra::Matrix3;

use panostitch::{compute_canvas, save_image, warp_color, Homography, Image};

fn main() -> Result<(), Box<dyn Error>> {
    // A checkerboard with a red diagonal stripe, so orientation is visible.
    let (w, h) = (320usize, 240usize);
    let mut src = Image::filled(w, h, 3, 0);
    for y in 0..h {
        for x in 0..w {
            let v = if (x / 20 + y / 20) % 2 == 0 { 220 } else { 70 };
            let px = if x.abs_diff(y) < 6 {
                [200, 30, 30]
            } else {
                [v, v, v]
            };
            src.set_pixel(x, y, &px);
        }
    }

    // Rotate by 12 degrees around the image center, then shift.
    let angle = 12f64.to_radians();
    let (c, s) = (angle.cos(), angle.sin());
    let (cx, cy) = (w as f64 / 2.0, h as f64 / 2.0);
    let rotate = Matrix3::new(
        c,
        -s,
        cx - c * cx + s * cy + 40.0,
        s,
        c,
        cy - s * cx - c * cy + 25.0,
        0.0,
        0.0,
        1.0,
    );
    let hom = Homography::from_matrix(rotate)?;

    let layout = compute_canvas(&[hom], &[(w, h)])?;
    println!(
        "source {}x{} -> canvas {}x{}, layer origin {:?}, global offset {:?}",
        w, h, layout.width, layout.height, layout.origins[0], layout.offset
    );

    let warped = warp_color(&src, &hom, &layout, 0)?;
    let covered = warped.mask.count();
    let (lw, lh) = layout.sizes[0];
    println!(
        "layer {}x{}: {} of {} pixels covered ({:.1}%)",
        lw,
        lh,
        covered,
        lw * lh,
        100.0 * covered as f64 / (lw * lh) as f64
    );

    let src_path = std::env::temp_dir().join("panostitch_warp_input.ppm");
    let out_path = std::env::temp_dir().join("panostitch_warp_output.ppm");
    save_image(&src, &src_path)?;
    save_image(&warped.image, &out_path)?;
    println!("input:  {}", src_path.display());
    println!("warped: {}", out_path.display());
    Ok(())
}
