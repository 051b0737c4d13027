//! Process-level contract of the `panostitch` binary: exit codes, stderr
//! shape, and side effects on disk.

mod common;

use std::fs;

use common::*;

#[test]
fn no_arguments_prints_usage_and_exits_2() {
    let (out, _) = run_bin(&[]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(
        stderr.contains("error: need at least 2 input images"),
        "{stderr}"
    );
    assert!(stderr.contains("Usage: panostitch"), "{stderr}");
    assert!(out.stdout.is_empty());
}

#[test]
fn bad_flag_value_exits_2_and_names_the_flag() {
    let (out, _) = run_bin(&["a.ppm", "b.ppm", "-o", "c.ppm", "--seed", "many"]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(
        stderr.contains("error: invalid value 'many' for --seed"),
        "{stderr}"
    );
    assert!(stderr.contains("Usage: panostitch"), "{stderr}");
}

#[test]
fn successful_run_logs_the_stages_in_order() {
    let dir = tempfile::tempdir().unwrap();
    let source = textured_source(11, 700, 500, 15, 240);
    let pa = write_pnm(dir.path(), "a.ppm", &crop(&source, 0, 0, 450, 500));
    let pb = write_pnm(dir.path(), "b.ppm", &crop(&source, 250, 0, 450, 500));
    let out_path = dir.path().join("pano.ppm");

    let (out, _) = run_bin(&[
        pa.to_str().unwrap(),
        pb.to_str().unwrap(),
        "-o",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(out.stdout.is_empty());

    let stderr = String::from_utf8(out.stderr).unwrap();
    let stages: Vec<&str> = stderr
        .lines()
        .filter_map(|l| l.strip_prefix("stage ")?.split(':').next())
        .collect();
    assert_eq!(
        stages,
        ["resize", "features", "match", "subset", "warp", "seam", "gain", "blend"]
    );

    let pano = fs::read(&out_path).unwrap();
    assert!(pano.starts_with(b"P6\n"), "panorama is a binary PPM");
}

#[test]
fn verbose_mode_reports_per_image_and_per_pair_detail() {
    let dir = tempfile::tempdir().unwrap();
    let source = textured_source(12, 700, 500, 15, 240);
    let pa = write_pnm(dir.path(), "a.ppm", &crop(&source, 0, 0, 450, 500));
    let pb = write_pnm(dir.path(), "b.ppm", &crop(&source, 250, 0, 450, 500));

    let (out, _) = run_bin(&[
        pa.to_str().unwrap(),
        pb.to_str().unwrap(),
        "-o",
        dir.path().join("pano.ppm").to_str().unwrap(),
        "--verbose",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("features:"), "{stderr}");
    assert!(stderr.contains("matches"), "{stderr}");
    assert!(stderr.contains("gain"), "{stderr}");
}

#[test]
fn unrelated_images_exit_3_but_still_write_the_graph() {
    let dir = tempfile::tempdir().unwrap();
    let pa = write_pnm(dir.path(), "a.ppm", &noise_image(1, 300, 300));
    let pb = write_pnm(dir.path(), "b.ppm", &noise_image(2, 300, 300));
    let out_path = dir.path().join("pano.ppm");
    let dot_path = dir.path().join("graph.dot");

    let (out, _) = run_bin(&[
        pa.to_str().unwrap(),
        pb.to_str().unwrap(),
        "-o",
        out_path.to_str().unwrap(),
        "--dot-out",
        dot_path.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("error:"), "{stderr}");
    assert!(!out_path.exists(), "no panorama should be written");

    // The match graph is still exported: two isolated nodes, no edges.
    let dot = fs::read_to_string(&dot_path).unwrap();
    assert!(dot.starts_with("graph matches {"), "{dot}");
    assert_eq!(
        dot.lines().filter(|l| l.contains("[label=")).count(),
        2,
        "{dot}"
    );
    assert!(!dot.contains(" -- "), "{dot}");
}

#[test]
fn missing_input_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let pa = write_pnm(dir.path(), "a.ppm", &noise_image(3, 64, 64));
    let (out, _) = run_bin(&[
        pa.to_str().unwrap(),
        dir.path().join("nope.ppm").to_str().unwrap(),
        "-o",
        dir.path().join("pano.ppm").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(4));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(
        stderr.contains("error:") && stderr.contains("nope.ppm"),
        "{stderr}"
    );
}

#[test]
fn unwritable_output_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let source = textured_source(13, 700, 500, 15, 240);
    let pa = write_pnm(dir.path(), "a.ppm", &crop(&source, 0, 0, 450, 500));
    let pb = write_pnm(dir.path(), "b.ppm", &crop(&source, 250, 0, 450, 500));

    let (out, _) = run_bin(&[
        pa.to_str().unwrap(),
        pb.to_str().unwrap(),
        "-o",
        dir.path().join("no/such/dir/pano.ppm").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(4));
}
