#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};

use clap::Parser;
use physcue::dataset::{write_table, CorpusRow, CorpusTable, Label};
use physcue::features::{DegenerateFlags, FeatureVector};
use physcue::imgproc::{gaussian_blur, Plane};
use physcue::FEATURE_COUNT;
use physcue_cli::{Cli, CliError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub fn golden(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

/// Runs the CLI in-process with the given arguments (without the program name).
pub fn run(args: &[&str]) -> Result<(), CliError> {
    let cli = Cli::try_parse_from(std::iter::once("physcue").chain(args.iter().copied()))
        .map_err(|e| CliError::Usage(e.to_string()))?;
    physcue_cli::run(&cli)
}

pub fn p(path: &Path) -> &str {
    path.to_str().expect("temp paths are UTF-8")
}

pub fn digest(path: &Path) -> String {
    hex::encode(Sha256::digest(fs::read(path).unwrap()))
}

/// A feature table whose rows come from `value(dataset, label, i)`.
pub fn synthetic_table(
    datasets: &[&str],
    n_per_class: usize,
    mut value: impl FnMut(&str, Label, usize) -> [f64; FEATURE_COUNT],
) -> CorpusTable {
    let mut rows = Vec::new();
    for d in datasets {
        for label in [Label::Real, Label::Fake] {
            for i in 0..n_per_class {
                rows.push(CorpusRow {
                    path: format!("{label}_{i:05}.png"),
                    dataset_id: d.to_string(),
                    label,
                    features: FeatureVector { values: value(d, label, i), degenerate: DegenerateFlags::default() },
                });
            }
        }
    }
    CorpusTable::new(rows).unwrap()
}

pub fn save_table(t: &CorpusTable, path: &Path) {
    write_table(t, path).unwrap();
}

/// Sinusoidal texture plus strong pixel noise; dataset `k` varies the noise
/// level and texture frequency.
pub fn textured_noise(size: usize, k: usize, rng: &mut ChaCha8Rng) -> [Plane; 3] {
    let sigma = 22.0 + 6.0 * k as f64;
    let freq = 0.15 + 0.1 * k as f64;
    let (fx, fy) = (rng.random_range(0.5..1.5) * freq, rng.random_range(0.5..1.5) * freq);
    let (p1, p2) = (rng.random_range(0.0..6.3), rng.random_range(0.0..6.3));
    let amp = rng.random_range(20.0..50.0);
    let base = [rng.random_range(70.0..180.0), rng.random_range(70.0..180.0), rng.random_range(70.0..180.0)];
    let normal = rand_distr::Normal::new(0.0, sigma).unwrap();
    let texture: Vec<f64> = (0..size * size)
        .map(|i| {
            let (x, y) = ((i % size) as f64, (i / size) as f64);
            amp * (fx * x + p1).sin() * (fy * y + p2).cos()
        })
        .collect();
    base.map(|b| {
        Plane::from_fn(size, size, |x, y| {
            (b + texture[y * size + x] + rng.sample(normal)).round().clamp(0.0, 255.0)
        })
    })
}

pub fn blurred(planes: &[Plane; 3], sigma: f64) -> [Plane; 3] {
    let radius = (3.0 * sigma).ceil() as usize;
    planes.clone().map(|p| gaussian_blur(&p, sigma, radius).map(|v| v.round().clamp(0.0, 255.0)))
}

pub fn save_png(planes: &[Plane; 3], path: &Path) {
    let (w, h) = (planes[0].width(), planes[0].height());
    let img = image::RgbImage::from_fn(w as u32, h as u32, |x, y| {
        let at = |c: usize| planes[c].get(x as usize, y as usize) as u8;
        image::Rgb([at(0), at(1), at(2)])
    });
    img.save(path).unwrap();
}

/// 3 datasets of `n` textured-noise images and their σ=2 blurs, plus a manifest.
pub fn blur_corpus(dir: &Path, n: usize, size: usize) -> PathBuf {
    let mut manifest = String::from("path,label,dataset\n");
    for k in 0..3 {
        let ds = format!("pseudo{k}");
        fs::create_dir_all(dir.join(&ds)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + k as u64);
        for i in 0..n {
            let real = textured_noise(size, k, &mut rng);
            let fake = blurred(&real, 2.0);
            let (rp, fp) = (format!("{ds}/real_{i:04}.png"), format!("{ds}/fake_{i:04}.png"));
            save_png(&real, &dir.join(&rp));
            save_png(&fake, &dir.join(&fp));
            manifest.push_str(&format!("{rp},real,{ds}\n{fp},fake,{ds}\n"));
        }
    }
    let path = dir.join("manifest.csv");
    fs::write(&path, manifest).unwrap();
    path
}
