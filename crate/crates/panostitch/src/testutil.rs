//! Synthetic rasters shared by unit tests: deterministic texture with many
//! corners, and structureless noise.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::image::{GrayImageF, Image};

/// Overlapping random-gray rectangles on a mid-gray ground: rich in corners
/// and straight edges, free of symmetry.
pub fn textured_gray(seed: u64, w: usize, h: usize) -> GrayImageF {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut img = GrayImageF::filled(w, h, 0.5);
    for _ in 0..60 {
        let rw = rng.random_range(4..w / 2);
        let rh = rng.random_range(4..h / 2);
        let x0 = rng.random_range(0..w - rw);
        let y0 = rng.random_range(0..h - rh);
        let v: f32 = rng.random();
        for y in y0..y0 + rh {
            for x in x0..x0 + rw {
                img.set(x, y, v);
            }
        }
    }
    img
}

/// Same construction in color.
pub fn textured_rgb(seed: u64, w: usize, h: usize) -> Image {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut img = Image::filled(w, h, 3, 128);
    for _ in 0..80 {
        let rw = rng.random_range(4..w / 2);
        let rh = rng.random_range(4..h / 2);
        let x0 = rng.random_range(0..w - rw);
        let y0 = rng.random_range(0..h - rh);
        let color = [rng.random::<u8>(), rng.random::<u8>(), rng.random::<u8>()];
        for y in y0..y0 + rh {
            for x in x0..x0 + rw {
                img.set_pixel(x, y, &color);
            }
        }
    }
    img
}

/// Independent uniform noise per pixel: matchable nowhere.
pub fn noise_gray(seed: u64, w: usize, h: usize) -> GrayImageF {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    GrayImageF::from_fn(w, h, |_, _| rng.random())
}

/// Independent uniform noise per pixel and channel.
pub fn noise_rgb(seed: u64, w: usize, h: usize) -> Image {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..w * h * 3).map(|_| rng.random::<u8>()).collect();
    Image::new(w, h, 3, data).expect("dimensions are valid")
}

/// Crops a window out of an image; the window must lie inside.
pub fn crop(img: &Image, x0: usize, y0: usize, w: usize, h: usize) -> Image {
    assert!(x0 + w <= img.width() && y0 + h <= img.height());
    let c = img.channels();
    let mut data = Vec::with_capacity(w * h * c);
    for y in y0..y0 + h {
        let start = (y * img.width() + x0) * c;
        data.extend_from_slice(&img.data()[start..start + w * c]);
    }
    Image::new(w, h, c, data).expect("dimensions are valid")
}
