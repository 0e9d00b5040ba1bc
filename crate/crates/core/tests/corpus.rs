use std::fs;
use std::path::Path;

use physcue::dataset::{
    extract_corpus, load_manifest, read_table, sample_balanced, write_table, write_table_to, DatasetError, Label,
};
use physcue::features::Denoiser;
use physcue::ExtractConfig;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn write_png(path: &Path, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let img = image::RgbImage::from_fn(32, 24, |x, y| {
        let base = (x * 6 + y * 3) as u8;
        image::Rgb([base.wrapping_add(rng.random_range(0..40)), rng.random(), base])
    });
    img.save(path).unwrap();
}

fn fixture(dir: &Path) {
    let mut manifest = String::from("dataset,label,path\n");
    for d in ["beta", "alpha"] {
        for (i, label) in ["REAL", "fake", "Real", "FAKE", "real", "fake"].iter().enumerate() {
            let name = format!("{d}_{i}.png");
            write_png(&dir.join(&name), i as u64 + if d == "beta" { 100 } else { 0 });
            manifest.push_str(&format!("{d},{label},{name}\r\n"));
        }
    }
    fs::write(dir.join("broken.png"), b"\x89PNG\r\n\x1a\nnot really").unwrap();
    manifest.push_str("alpha,fake,broken.png\n");
    manifest.push_str("alpha,real,missing.png\n");
    fs::write(dir.join("manifest.csv"), manifest).unwrap();
}

fn cfg() -> ExtractConfig {
    ExtractConfig { denoiser: Denoiser::FastGaussian, ..Default::default() }
}

#[test]
fn worker_count_does_not_change_the_table() {
    let dir = tempfile::tempdir().unwrap();
    fixture(dir.path());
    let entries = load_manifest(&dir.path().join("manifest.csv")).unwrap();
    assert_eq!(entries.len(), 14);
    let mut outputs = Vec::new();
    for workers in [1, 4] {
        let ex = extract_corpus(&entries, &cfg(), workers, Some(dir.path())).unwrap();
        let mut buf = Vec::new();
        write_table_to(&ex.table, &mut buf).unwrap();
        outputs.push((buf, ex.failures));
    }
    assert_eq!(outputs[0], outputs[1]);
    let failed: Vec<&str> = outputs[0].1.iter().map(|f| f.path.as_str()).collect();
    assert_eq!(failed, ["broken.png", "missing.png"]);
}

#[test]
fn broken_images_are_skipped_and_the_rest_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    fixture(dir.path());
    let entries = load_manifest(&dir.path().join("manifest.csv")).unwrap();
    let ex = extract_corpus(&entries, &cfg(), 2, Some(dir.path())).unwrap();
    assert_eq!(ex.table.len(), 12);
    let paths: Vec<&str> = ex.table.rows().iter().map(|r| r.path.as_str()).collect();
    assert_eq!(paths[0], "alpha_0.png");
    assert_eq!(paths[6], "beta_0.png");
    assert_eq!(ex.table.rows()[1].label, Label::Fake);

    let out = dir.path().join("table.csv");
    write_table(&ex.table, &out).unwrap();
    let back = read_table(&out).unwrap();
    assert_eq!(back, ex.table);
    let datasets = back.to_datasets();
    assert_eq!(datasets.len(), 2);
    assert_eq!((datasets[0].real.len(), datasets[0].fake.len()), (3, 3));
}

#[test]
fn all_failures_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("m.csv"), "path,label,dataset\nnope.png,real,a\nnada.jpg,fake,a\n").unwrap();
    let entries = load_manifest(&dir.path().join("m.csv")).unwrap();
    let err = extract_corpus(&entries, &cfg(), 1, Some(dir.path())).unwrap_err();
    assert!(matches!(err, DatasetError::AllImagesFailed(2)));
}

#[test]
fn sampling_then_extraction_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    fixture(dir.path());
    let entries = load_manifest(&dir.path().join("manifest.csv")).unwrap();
    let a = sample_balanced(&entries, 2, 7).unwrap();
    let b = sample_balanced(&entries, 2, 7).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.entries.len(), 8);
    let ta = extract_corpus(&a.entries, &cfg(), 3, Some(dir.path())).unwrap();
    let tb = extract_corpus(&b.entries, &cfg(), 1, Some(dir.path())).unwrap();
    assert_eq!(ta, tb);
}
