//! Manifests, balanced sampling, parallel extraction and the feature table on disk.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::features::{extract_all, DegenerateFlags, ExtractConfig, Feature, FeatureVector, FEATURE_COUNT};
use crate::fsdva::DatasetFeatures;
use crate::imgproc::decode_image;

/// Version of the feature-table column layout.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(thiserror::Error, Debug)]
pub enum DatasetError {
    #[error("{path}: line {line}: {message}")]
    Parse { path: String, line: u64, message: String },
    #[error("{path}: line {line}: unknown label `{label}` (expected real or fake)")]
    UnknownLabel { path: String, line: u64, label: String },
    #[error("{path}: missing column `{column}`")]
    MissingColumn { path: String, column: &'static str },
    #[error("dataset `{dataset}` has no {label} images")]
    EmptyClass { dataset: String, label: Label },
    #[error("samples per class must be at least 1")]
    InvalidSampleSize,
    #[error("worker count must be at least 1")]
    InvalidWorkers,
    #[error("all {0} images failed to extract")]
    AllImagesFailed(usize),
    #[error("{path}: schema mismatch: {message}")]
    SchemaMismatch { path: String, message: String },
    #[error("duplicate row for `{path}` in dataset `{dataset}`")]
    DuplicateRow { dataset: String, path: String },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

pub type Result<T> = std::result::Result<T, DatasetError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Real,
    Fake,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Real => "real",
            Label::Fake => "fake",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = ();

    /// Case-insensitive `real` / `fake`.
    fn from_str(s: &str) -> std::result::Result<Self, ()> {
        match s.trim().to_ascii_lowercase().as_str() {
            "real" => Ok(Label::Real),
            "fake" => Ok(Label::Fake),
            _ => Err(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ManifestEntry {
    pub path: String,
    pub label: Label,
    pub dataset_id: String,
}

impl ManifestEntry {
    /// Path on disk, joining relative paths onto `base`.
    pub fn resolve(&self, base: Option<&Path>) -> PathBuf {
        let p = Path::new(&self.path);
        match base {
            Some(b) if p.is_relative() => b.join(p),
            _ => p.to_path_buf(),
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> DatasetError + '_ {
    move |source| DatasetError::Io { path: path.display().to_string(), source }
}

/// Reads a `path,label,dataset` manifest CSV.
pub fn load_manifest(path: &Path) -> Result<Vec<ManifestEntry>> {
    let file = fs::File::open(path).map_err(io_err(path))?;
    parse_manifest(file, &path.display().to_string())
}

/// Parses manifest CSV from any reader; `source` names it in error messages.
pub fn parse_manifest<R: Read>(reader: R, source: &str) -> Result<Vec<ManifestEntry>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let parse_err = |line: u64, message: String| DatasetError::Parse { path: source.to_string(), line, message };
    let headers = rdr.headers().map_err(|e| parse_err(1, e.to_string()))?.clone();
    let col = |name: &'static str| {
        headers
            .iter()
            .position(|h| h.trim_start_matches('\u{feff}').eq_ignore_ascii_case(name))
            .ok_or(DatasetError::MissingColumn { path: source.to_string(), column: name })
    };
    let (pi, li, di) = (col("path")?, col("label")?, col("dataset")?);

    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            parse_err(line, e.to_string())
        })?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let field = |i: usize| rec.get(i).unwrap_or("").to_string();
        let (p, l, d) = (field(pi), field(li), field(di));
        if p.is_empty() {
            return Err(parse_err(line, "empty path".into()));
        }
        if d.is_empty() {
            return Err(parse_err(line, "empty dataset id".into()));
        }
        let label = l
            .parse::<Label>()
            .map_err(|_| DatasetError::UnknownLabel { path: source.to_string(), line, label: l.clone() })?;
        if !seen.insert((d.clone(), p.clone())) {
            return Err(parse_err(line, format!("duplicate path `{p}` in dataset `{d}`")));
        }
        out.push(ManifestEntry { path: p, label, dataset_id: d });
    }
    Ok(out)
}

/// Stable 64-bit seed derived from a base seed and a string key.
pub fn derive_seed(seed: u64, key: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(key.as_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("sha256 has 32 bytes"))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Shortfall {
    pub dataset_id: String,
    pub label: Label,
    pub requested: usize,
    pub available: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sample {
    pub entries: Vec<ManifestEntry>,
    pub shortfalls: Vec<Shortfall>,
}

/// Draws up to `n_per_class` entries of each class from every dataset.
///
/// Each (dataset, class) group is shuffled with its own generator seeded from
/// `seed`, so the selection is deterministic and independent of the other
/// groups. Output is ordered by dataset id, real before fake.
pub fn sample_balanced(entries: &[ManifestEntry], n_per_class: usize, seed: u64) -> Result<Sample> {
    if n_per_class == 0 {
        return Err(DatasetError::InvalidSampleSize);
    }
    let mut groups: BTreeMap<&str, [Vec<&ManifestEntry>; 2]> = BTreeMap::new();
    for e in entries {
        let g = groups.entry(e.dataset_id.as_str()).or_default();
        g[(e.label == Label::Fake) as usize].push(e);
    }
    let mut out = Vec::new();
    let mut shortfalls = Vec::new();
    for (dataset, classes) in groups {
        for (label, mut members) in [Label::Real, Label::Fake].into_iter().zip(classes) {
            if members.is_empty() {
                return Err(DatasetError::EmptyClass { dataset: dataset.to_string(), label });
            }
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &format!("{dataset}\u{0}{label}")));
            members.shuffle(&mut rng);
            if members.len() < n_per_class {
                log::warn!(
                    "dataset `{dataset}`: only {} {label} images available, {n_per_class} requested",
                    members.len()
                );
                shortfalls.push(Shortfall {
                    dataset_id: dataset.to_string(),
                    label,
                    requested: n_per_class,
                    available: members.len(),
                });
            }
            out.extend(members.into_iter().take(n_per_class).cloned());
        }
    }
    Ok(Sample { entries: out, shortfalls })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusRow {
    pub path: String,
    pub dataset_id: String,
    pub label: Label,
    pub features: FeatureVector,
}

/// Feature rows sorted by `(dataset_id, path)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CorpusTable {
    rows: Vec<CorpusRow>,
}

impl CorpusTable {
    pub fn new(mut rows: Vec<CorpusRow>) -> Result<Self> {
        rows.sort_by(|a, b| (&a.dataset_id, &a.path).cmp(&(&b.dataset_id, &b.path)));
        for pair in rows.windows(2) {
            if pair[0].dataset_id == pair[1].dataset_id && pair[0].path == pair[1].path {
                return Err(DatasetError::DuplicateRow {
                    dataset: pair[0].dataset_id.clone(),
                    path: pair[0].path.clone(),
                });
            }
        }
        Ok(Self { rows })
    }

    pub fn rows(&self) -> &[CorpusRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn schema_version(&self) -> u32 {
        SCHEMA_VERSION
    }

    pub fn dataset_ids(&self) -> BTreeSet<&str> {
        self.rows.iter().map(|r| r.dataset_id.as_str()).collect()
    }

    /// Merges several tables, rejecting duplicate `(dataset, path)` rows.
    pub fn concat(tables: Vec<CorpusTable>) -> Result<Self> {
        Self::new(tables.into_iter().flat_map(|t| t.rows).collect())
    }

    /// Per-dataset real/fake matrices in canonical feature order.
    pub fn to_datasets(&self) -> Vec<DatasetFeatures> {
        let mut map: BTreeMap<&str, DatasetFeatures> = BTreeMap::new();
        for r in &self.rows {
            let d = map.entry(r.dataset_id.as_str()).or_insert_with(|| DatasetFeatures {
                dataset_id: r.dataset_id.clone(),
                real: Vec::new(),
                fake: Vec::new(),
            });
            match r.label {
                Label::Real => d.real.push(r.features.values),
                Label::Fake => d.fake.push(r.features.values),
            }
        }
        map.into_values().collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtractionFailure {
    pub path: String,
    pub dataset_id: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Extraction {
    pub table: CorpusTable,
    pub failures: Vec<ExtractionFailure>,
}

/// Extracts features for every entry on a pool of `workers` threads.
///
/// Each image gets its own seed, derived from `cfg.rng_seed` and its path, so
/// neither worker count nor entry order affects the result. Images that fail
/// to load or extract are logged and left out.
pub fn extract_corpus(
    entries: &[ManifestEntry],
    cfg: &ExtractConfig,
    workers: usize,
    base_dir: Option<&Path>,
) -> Result<Extraction> {
    if workers == 0 {
        return Err(DatasetError::InvalidWorkers);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| DatasetError::Io { path: "<thread pool>".into(), source: std::io::Error::other(e) })?;
    let results: Vec<std::result::Result<CorpusRow, ExtractionFailure>> = pool.install(|| {
        entries
            .par_iter()
            .map(|e| {
                let fail = |reason: String| ExtractionFailure {
                    path: e.path.clone(),
                    dataset_id: e.dataset_id.clone(),
                    reason,
                };
                let bytes = fs::read(e.resolve(base_dir)).map_err(|err| fail(err.to_string()))?;
                let img = decode_image(&bytes).map_err(|err| fail(err.to_string()))?;
                let image_cfg = ExtractConfig { rng_seed: derive_seed(cfg.rng_seed, &e.path), ..cfg.clone() };
                let features = extract_all(&img, &image_cfg).map_err(|err| fail(err.to_string()))?;
                Ok(CorpusRow { path: e.path.clone(), dataset_id: e.dataset_id.clone(), label: e.label, features })
            })
            .collect()
    });
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok(row) => rows.push(row),
            Err(f) => {
                log::warn!("skipping {} ({}): {}", f.path, f.dataset_id, f.reason);
                failures.push(f);
            }
        }
    }
    if rows.is_empty() && !entries.is_empty() {
        return Err(DatasetError::AllImagesFailed(entries.len()));
    }
    failures.sort_by(|a, b| (&a.dataset_id, &a.path).cmp(&(&b.dataset_id, &b.path)));
    Ok(Extraction { table: CorpusTable::new(rows)?, failures })
}

/// Column names of the feature table, in order.
pub fn table_header() -> Vec<&'static str> {
    let mut h = vec!["path", "dataset", "label"];
    h.extend(Feature::ALL.iter().map(|f| f.name()));
    h.push("degenerate_flags");
    h
}

/// Shortest decimal that parses back to the same `f64`.
pub fn format_float(v: f64) -> String {
    format!("{v:?}")
}

pub fn write_table_to<W: Write>(t: &CorpusTable, writer: W) -> std::result::Result<(), csv::Error> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(writer);
    w.write_record(table_header())?;
    for r in &t.rows {
        let mut rec: Vec<String> = vec![r.path.clone(), r.dataset_id.clone(), r.label.to_string()];
        rec.extend(r.features.values.iter().map(|&v| format_float(v)));
        rec.push(r.features.degenerate.iter().map(Feature::name).collect::<Vec<_>>().join(";"));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_table(t: &CorpusTable, path: &Path) -> Result<()> {
    let file = fs::File::create(path).map_err(io_err(path))?;
    write_table_to(t, std::io::BufWriter::new(file)).map_err(|e| DatasetError::Io {
        path: path.display().to_string(),
        source: std::io::Error::other(e),
    })
}

pub fn read_table_from<R: Read>(reader: R, source: &str) -> Result<CorpusTable> {
    let mut rdr = csv::ReaderBuilder::new().from_reader(reader);
    let mismatch = |message: String| DatasetError::SchemaMismatch { path: source.to_string(), message };
    let headers = rdr.headers().map_err(|e| mismatch(e.to_string()))?.clone();
    let expected = table_header();
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(mismatch(format!(
            "expected columns `{}`, found `{}` (schema version {SCHEMA_VERSION})",
            expected.join(","),
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            DatasetError::Parse { path: source.to_string(), line, message: e.to_string() }
        })?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let perr = |message: String| DatasetError::Parse { path: source.to_string(), line, message };
        let label = rec[2]
            .parse::<Label>()
            .map_err(|_| DatasetError::UnknownLabel { path: source.to_string(), line, label: rec[2].to_string() })?;
        let mut values = [0.0; FEATURE_COUNT];
        for (i, v) in values.iter_mut().enumerate() {
            let s = &rec[3 + i];
            *v = s.parse::<f64>().map_err(|_| perr(format!("bad number `{s}` in column {}", expected[3 + i])))?;
            if !v.is_finite() {
                return Err(perr(format!("non-finite value in column {}", expected[3 + i])));
            }
        }
        let flags_field = &rec[3 + FEATURE_COUNT];
        let degenerate = if flags_field.is_empty() {
            DegenerateFlags::default()
        } else {
            flags_field
                .split(';')
                .map(Feature::from_name)
                .collect::<std::result::Result<DegenerateFlags, _>>()
                .map_err(|e| perr(e.to_string()))?
        };
        rows.push(CorpusRow {
            path: rec[0].to_string(),
            dataset_id: rec[1].to_string(),
            label,
            features: FeatureVector { values, degenerate },
        });
    }
    CorpusTable::new(rows)
}

pub fn read_table(path: &Path) -> Result<CorpusTable> {
    let file = fs::File::open(path).map_err(io_err(path))?;
    read_table_from(std::io::BufReader::new(file), &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn parse(s: &str) -> Result<Vec<ManifestEntry>> {
        parse_manifest(s.as_bytes(), "test.csv")
    }

    #[test]
    fn manifest_parsing() {
        assert!(parse("path,label,dataset\n").unwrap().is_empty());
        let m = parse("path,label,dataset\r\na.png,Real,ds1\r\nb.png, FAKE ,ds1\r\n").unwrap();
        assert_eq!(m[0].label, Label::Real);
        assert_eq!(m[1].label, Label::Fake);
        assert_eq!(m[1].dataset_id, "ds1");
        match parse("path,label,dataset\na.png,real,x\nb.png,genuine,x\n") {
            Err(DatasetError::UnknownLabel { line, label, .. }) => assert_eq!((line, label.as_str()), (3, "genuine")),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse("path,label\na,real\n"), Err(DatasetError::MissingColumn { column: "dataset", .. })));
        assert!(matches!(parse("path,label,dataset\na,real,x\na,fake,x\n"), Err(DatasetError::Parse { line: 3, .. })));
        assert!(matches!(parse("path,label,dataset\n,real,x\n"), Err(DatasetError::Parse { line: 2, .. })));
        // column order is free
        let m = parse("dataset,path,label\nd,p.jpg,fake\n").unwrap();
        assert_eq!(m[0], ManifestEntry { path: "p.jpg".into(), label: Label::Fake, dataset_id: "d".into() });
    }

    fn entries(real: usize, fake: usize, ds: &str) -> Vec<ManifestEntry> {
        (0..real)
            .map(|i| ManifestEntry { path: format!("r{i}.png"), label: Label::Real, dataset_id: ds.into() })
            .chain((0..fake).map(|i| ManifestEntry { path: format!("f{i}.png"), label: Label::Fake, dataset_id: ds.into() }))
            .collect()
    }

    #[test]
    fn balanced_sampling() {
        let mut all = entries(10, 10, "a");
        all.extend(entries(3, 10, "b"));
        let s = sample_balanced(&all, 5, 7).unwrap();
        let count = |ds: &str, l: Label| s.entries.iter().filter(|e| e.dataset_id == ds && e.label == l).count();
        assert_eq!((count("a", Label::Real), count("a", Label::Fake)), (5, 5));
        assert_eq!((count("b", Label::Real), count("b", Label::Fake)), (3, 5));
        assert_eq!(
            s.shortfalls,
            vec![Shortfall { dataset_id: "b".into(), label: Label::Real, requested: 5, available: 3 }]
        );
        assert_eq!(s, sample_balanced(&all, 5, 7).unwrap());
        assert_ne!(s.entries, sample_balanced(&all, 5, 8).unwrap().entries);
        assert!(matches!(sample_balanced(&entries(0, 4, "z"), 2, 1), Err(DatasetError::EmptyClass { .. })));
        assert!(matches!(sample_balanced(&all, 0, 1), Err(DatasetError::InvalidSampleSize)));
    }

    proptest! {
        #[test]
        fn sampling_is_bounded_subset(real in 1usize..20, fake in 1usize..20, n in 1usize..25, seed in any::<u64>()) {
            let all = entries(real, fake, "d");
            let s = sample_balanced(&all, n, seed).unwrap();
            prop_assert_eq!(s.entries.len(), real.min(n) + fake.min(n));
            let unique: BTreeSet<_> = s.entries.iter().collect();
            prop_assert_eq!(unique.len(), s.entries.len());
            prop_assert!(s.entries.iter().all(|e| all.contains(e)));
        }
    }

    fn random_table(n: usize, seed: u64) -> CorpusTable {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows = (0..n)
            .map(|i| {
                let mut values = [0.0; FEATURE_COUNT];
                for v in values.iter_mut() {
                    let mag: f64 = rng.random_range(-30.0..30.0);
                    *v = rng.random_range(-1.0..1.0) * 10f64.powf(mag);
                }
                let degenerate: DegenerateFlags =
                    Feature::ALL.into_iter().filter(|_| rng.random_bool(0.1)).collect();
                CorpusRow {
                    path: format!("img \"{i}\", v2.png"),
                    dataset_id: format!("ds{}", i % 3),
                    label: if rng.random() { Label::Real } else { Label::Fake },
                    features: FeatureVector { values, degenerate },
                }
            })
            .collect();
        CorpusTable::new(rows).unwrap()
    }

    fn round_trip(t: &CorpusTable) -> CorpusTable {
        let mut buf = Vec::new();
        write_table_to(t, &mut buf).unwrap();
        read_table_from(buf.as_slice(), "mem").unwrap()
    }

    #[test]
    fn table_round_trips() {
        let empty = CorpusTable::default();
        assert_eq!(round_trip(&empty), empty);
        let t = random_table(1000, 5);
        let back = round_trip(&t);
        assert_eq!(back, t);
        for (a, b) in t.rows().iter().zip(back.rows()) {
            assert_eq!(a.features.values.map(f64::to_bits), b.features.values.map(f64::to_bits));
            assert_eq!(a.features.degenerate, b.features.degenerate);
        }
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        write_table(&t, &p).unwrap();
        assert_eq!(read_table(&p).unwrap(), t);
    }

    #[test]
    fn schema_mismatch_is_detected() {
        let bad = "path,dataset,label,saturation_mean\nx,y,real,1.0\n";
        assert!(matches!(read_table_from(bad.as_bytes(), "bad"), Err(DatasetError::SchemaMismatch { .. })));
    }

    #[test]
    fn header_layout() {
        let h = table_header();
        assert_eq!(h.len(), 3 + FEATURE_COUNT + 1);
        assert_eq!(h[3], "saturation_mean");
        assert_eq!(h[17], "blue_channel_kurtosis");
        assert_eq!(h[18], "degenerate_flags");
    }

    #[test]
    fn derive_seed_is_stable() {
        assert_eq!(derive_seed(42, "a.png"), derive_seed(42, "a.png"));
        assert_ne!(derive_seed(42, "a.png"), derive_seed(43, "a.png"));
        assert_ne!(derive_seed(42, "a.png"), derive_seed(42, "b.png"));
    }
}
