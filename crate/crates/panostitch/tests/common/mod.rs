//! Shared fixtures for the integration suites: deterministic synthetic
//! scenes, PNM round trips, a binary runner, and panorama invariants.

#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Output;
use std::time::Duration;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use panostitch::{encode_pnm, Image, StitchReport};

/// Random-rectangle texture over a mid-gray ground, with every channel held
/// inside `[lo, hi]`. Rich in corners, free of symmetry, reproducible.
pub fn textured_source(seed: u64, w: usize, h: usize, lo: u8, hi: u8) -> Image {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mid = lo / 2 + hi / 2;
    let mut img = Image::filled(w, h, 3, mid);
    for _ in 0..w * h / 4000 {
        let rw = rng.random_range(8..w / 3);
        let rh = rng.random_range(8..h / 3);
        let x0 = rng.random_range(0..w - rw);
        let y0 = rng.random_range(0..h - rh);
        let color = [
            rng.random_range(lo..=hi),
            rng.random_range(lo..=hi),
            rng.random_range(lo..=hi),
        ];
        for y in y0..y0 + rh {
            for x in x0..x0 + rw {
                img.set_pixel(x, y, &color);
            }
        }
    }
    img
}

/// Independent uniform noise per pixel and channel: matchable nowhere.
pub fn noise_image(seed: u64, w: usize, h: usize) -> Image {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..w * h * 3).map(|_| rng.random::<u8>()).collect();
    Image::new(w, h, 3, data).expect("dimensions are valid")
}

/// Cuts a window out of an image; the window must lie inside.
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

/// Multiplies every channel by `factor`, rounding and clamping to `u8`.
pub fn scale_brightness(img: &Image, factor: f64) -> Image {
    let data = img
        .data()
        .iter()
        .map(|&v| (f64::from(v) * factor).round().clamp(0.0, 255.0) as u8)
        .collect();
    Image::new(img.width(), img.height(), img.channels(), data).expect("dimensions are valid")
}

/// Writes an image as PGM/PPM and returns the path.
pub fn write_pnm(dir: &Path, name: &str, img: &Image) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, encode_pnm(img)).expect("fixture write succeeds");
    path
}

/// The standard three-crop scene: a 1200×900 textured source cut into
/// 700×900 crops at x-offsets 0, 250, 500.
pub const CROP_OFFSETS: [usize; 3] = [0, 250, 500];

pub fn three_crop_scene(dir: &Path) -> (Image, Vec<PathBuf>) {
    let source = textured_source(31, 1200, 900, 10, 245);
    let paths = CROP_OFFSETS
        .iter()
        .enumerate()
        .map(|(k, &x0)| {
            write_pnm(
                dir,
                &format!("crop{k}.ppm"),
                &crop(&source, x0, 0, 700, 900),
            )
        })
        .collect();
    (source, paths)
}

/// Runs the stitcher binary with extra environment variables, returning the
/// process output and wall-clock duration.
pub fn run_bin_env(args: &[&str], envs: &[(&str, &str)]) -> (Output, Duration) {
    let start = std::time::Instant::now();
    let mut cmd = std::process::Command::new(env!("CARGO_BIN_EXE_panostitch"));
    cmd.args(args);
    for (k, v) in envs {
        cmd.env(k, v);
    }
    let output = cmd.output().expect("the stitcher binary runs");
    (output, start.elapsed())
}

pub fn run_bin(args: &[&str]) -> (Output, Duration) {
    run_bin_env(args, &[])
}

/// Asserts the seam masks of a report cut the covered canvas into a true
/// partition: every covered pixel belongs to exactly one seam region, every
/// uncovered pixel to none, pixel-exact.
pub fn assert_seams_partition_coverage(report: &StitchReport) {
    let layout = &report.layout;
    assert_eq!(report.seams.len(), report.masks.len());
    for y in 0..layout.height {
        for x in 0..layout.width {
            let mut covered = false;
            let mut owners = 0;
            for (k, (seam, mask)) in report.seams.iter().zip(&report.masks).enumerate() {
                let (ox, oy) = layout.origins[k];
                let lx = x as i64 - ox;
                let ly = y as i64 - oy;
                let inside = lx >= 0
                    && ly >= 0
                    && (lx as usize) < seam.width()
                    && (ly as usize) < seam.height();
                if inside {
                    covered |= mask.at(lx as usize, ly as usize);
                    owners += usize::from(seam.at(lx as usize, ly as usize));
                }
            }
            assert_eq!(
                owners,
                usize::from(covered),
                "canvas pixel ({x}, {y}) is covered by {owners} seam regions"
            );
        }
    }
}

/// Mean squared error between two RGB images over a pixel predicate, and
/// the matching PSNR in dB.
pub fn psnr_over<F: Fn(usize, usize) -> Option<(usize, usize)>>(
    a: &Image,
    b: &Image,
    width: usize,
    height: usize,
    map: F,
) -> (f64, usize) {
    let mut se = 0.0f64;
    let mut n = 0usize;
    for y in 0..height {
        for x in 0..width {
            let Some((bx, by)) = map(x, y) else { continue };
            let pa = a.pixel(x, y);
            let pb = b.pixel(bx, by);
            for c in 0..3 {
                let d = f64::from(pa[c]) - f64::from(pb[c]);
                se += d * d;
            }
            n += 1;
        }
    }
    assert!(n > 0, "the comparison region is empty");
    let mse = se / (3.0 * n as f64);
    let psnr = if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (255.0 * 255.0 / mse).log10()
    };
    (psnr, n)
}

/// Mean 0.299/0.587/0.114 luminance over a column range of an image, after
/// a gain factor.
pub fn mean_luminance(img: &Image, x0: usize, x1: usize, gain: f64) -> f64 {
    let mut sum = 0.0;
    let mut n = 0usize;
    for y in 0..img.height() {
        for x in x0..x1 {
            let px = img.pixel(x, y);
            let y_lin =
                0.299 * f64::from(px[0]) + 0.587 * f64::from(px[1]) + 0.114 * f64::from(px[2]);
            sum += gain * y_lin;
            n += 1;
        }
    }
    sum / n as f64
}
