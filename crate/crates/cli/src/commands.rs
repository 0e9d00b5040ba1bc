//! The four subcommands. Each returns a small summary and writes its outputs.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use physcue::caption::{CaptionConfig, CaptionRecord, CAPTION_FORMAT_VERSION, DEFAULT_CORE_SET};
use physcue::dataset::{extract_corpus, load_manifest, read_table, sample_balanced, write_table, CorpusTable};
use physcue::features::Denoiser;
use physcue::fsdva::core_features;
use physcue::{run_fsdva, Feature, FeatureClass, FeatureMetrics};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::args::{AssessArgs, CaptionArgs, ExtractArgs, GlobalArgs, PlotArgs};
use crate::error::CliError;
use crate::histogram::{class_pair, HistogramSpec};
use crate::run_manifest::{sidecar_path, write_json, RunManifest};
use crate::svg;

fn default_workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtractSummary {
    pub sampled: usize,
    pub extracted: usize,
    pub failed: usize,
}

pub fn cmd_extract(args: &ExtractArgs, global: &GlobalArgs) -> Result<ExtractSummary, CliError> {
    let cfg = args.extract_config(global.seed)?;
    let entries = load_manifest(&args.manifest)?;
    let sample = sample_balanced(&entries, args.sample_per_class as usize, global.seed)?;
    let base = match &args.base_dir {
        Some(b) => Some(b.clone()),
        None => args.manifest.parent().map(Path::to_path_buf),
    };
    let workers = global.workers.map_or_else(default_workers, |w| w.get());
    log::info!("extracting {} images on {workers} workers", sample.entries.len());
    let extraction = extract_corpus(&sample.entries, &cfg, workers, base.as_deref())?;
    write_table(&extraction.table, &args.out)?;

    let denoiser = match cfg.denoiser {
        Denoiser::NonLocalMeans(p) => json!({"kind": "nlm", "h": p.h, "patch": p.patch, "search": p.search}),
        Denoiser::FastGaussian => json!({"kind": "gaussian5x5", "sigma": 1.5}),
    };
    let config = json!({
        "sample_per_class": args.sample_per_class,
        "dct_blocks": cfg.dct_blocks,
        "dct_include_dc": cfg.dct_include_dc,
        "denoiser": denoiser,
        "canny": {"low": cfg.canny.low, "high": cfg.canny.high},
        "shortfalls": sample.shortfalls.iter().map(|s| json!({
            "dataset": s.dataset_id, "label": s.label, "requested": s.requested, "available": s.available,
        })).collect::<Vec<_>>(),
        "failures": extraction.failures.iter().map(|f| json!({
            "path": f.path, "dataset": f.dataset_id, "reason": f.reason,
        })).collect::<Vec<_>>(),
    });
    let mut run = RunManifest::new("extract", global, config);
    run.add_input(&args.manifest)?;
    write_json(&sidecar_path(&args.out), &run)?;

    let summary = ExtractSummary {
        sampled: sample.entries.len(),
        extracted: extraction.table.len(),
        failed: extraction.failures.len(),
    };
    eprintln!(
        "extracted {} of {} images ({} failed) -> {}",
        summary.extracted,
        summary.sampled,
        summary.failed,
        args.out.display()
    );
    Ok(summary)
}

fn read_tables(paths: &[PathBuf]) -> Result<CorpusTable, CliError> {
    let tables = paths.iter().map(|p| read_table(p)).collect::<Result<Vec<_>, _>>()?;
    Ok(CorpusTable::concat(tables)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub features: Vec<FeatureMetrics>,
    pub run: RunManifest,
}

fn fmt_num(v: f64) -> String {
    if v.is_finite() {
        physcue::dataset::format_float(v)
    } else {
        "inf".into()
    }
}

pub fn metrics_csv(metrics: &[FeatureMetrics]) -> String {
    let mut out = String::from("name,stability,discriminability,cv,mean_jmd,mean_auc,class,all_skipped\n");
    for m in metrics {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            m.feature,
            fmt_num(m.stability),
            fmt_num(m.discriminability),
            fmt_num(m.cv),
            fmt_num(m.mean_jmd),
            fmt_num(m.mean_auc),
            m.class,
            m.all_skipped
        ));
    }
    out
}

pub fn cmd_assess(args: &AssessArgs, global: &GlobalArgs) -> Result<MetricsReport, CliError> {
    let thresholds = args.thresholds.thresholds()?;
    let table = read_tables(&args.features)?;
    let metrics = run_fsdva(&table.to_datasets(), &thresholds)?;

    let mut run = RunManifest::new("assess", global, json!({ "thresholds": thresholds }));
    for p in &args.features {
        run.add_input(p)?;
    }
    let report = MetricsReport { features: metrics, run };
    write_json(&args.out, &report)?;
    let csv_path = args.csv.clone().unwrap_or_else(|| args.out.with_extension("csv"));
    fs::write(&csv_path, metrics_csv(&report.features)).map_err(CliError::io(&csv_path))?;
    if let Some(plot) = &args.plot {
        fs::write(plot, svg::score_chart(&report.features, &thresholds)).map_err(CliError::io(plot))?;
    }
    let core = core_features(&report.features);
    eprintln!(
        "{} datasets, {} rows; core features: {}",
        table.dataset_ids().len(),
        table.len(),
        if core.is_empty() { "none".to_string() } else { core.join(", ") }
    );
    Ok(report)
}

#[derive(Deserialize)]
struct BaseCaption {
    path: String,
    caption: String,
}

#[derive(Deserialize)]
struct MetricsClasses {
    features: Vec<NamedClass>,
}

#[derive(Deserialize)]
struct NamedClass {
    name: String,
    class: FeatureClass,
}

fn read_captions(path: &Path) -> Result<Vec<BaseCaption>, CliError> {
    let file = fs::File::open(path).map_err(CliError::io(path))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(CliError::io(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: BaseCaption = serde_json::from_str(&line).map_err(|e| CliError::Input {
            path: path.display().to_string(),
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(rec);
    }
    Ok(out)
}

fn caption_config(args: &CaptionArgs) -> Result<CaptionConfig, CliError> {
    let usage = |e: physcue::caption::CaptionError| CliError::Usage(e.to_string());
    if let Some(path) = &args.metrics {
        let text = fs::read_to_string(path).map_err(CliError::io(path))?;
        let m: MetricsClasses = serde_json::from_str(&text)
            .map_err(|e| CliError::Input { path: path.display().to_string(), line: e.line(), message: e.to_string() })?;
        let core: Vec<&str> =
            m.features.iter().filter(|f| f.class == FeatureClass::CoreFeature).map(|f| f.name.as_str()).collect();
        if core.is_empty() {
            return Err(physcue::caption::CaptionError::EmptyCoreSet.into());
        }
        CaptionConfig::from_names(args.phrase, args.decimals, &core).map_err(CliError::from)
    } else if args.core.is_empty() {
        CaptionConfig::new(args.phrase, args.decimals, &DEFAULT_CORE_SET).map_err(usage)
    } else {
        CaptionConfig::from_names(args.phrase, args.decimals, &args.core).map_err(usage)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaptionSummary {
    pub matched: usize,
    pub skipped: usize,
}

pub fn cmd_caption(args: &CaptionArgs, global: &GlobalArgs) -> Result<CaptionSummary, CliError> {
    let cfg = caption_config(args)?;
    let table = read_table(&args.features)?;
    let captions = read_captions(&args.captions)?;
    let mut by_path: BTreeMap<&str, &str> = BTreeMap::new();
    for c in &captions {
        if by_path.insert(&c.path, &c.caption).is_some() {
            log::warn!("{}: several captions for `{}`, using the last", args.captions.display(), c.path);
        }
    }
    let mut used = BTreeSet::new();
    let mut out = String::new();
    let mut matched = 0;
    for row in table.rows() {
        if let Some(base) = by_path.get(row.path.as_str()) {
            let rec = CaptionRecord::build(&row.path, base, &row.features, &cfg);
            out.push_str(&serde_json::to_string(&rec).expect("caption record serialises"));
            out.push('\n');
            used.insert(row.path.as_str());
            matched += 1;
        }
    }
    if matched == 0 {
        return Err(CliError::NoOverlap { captions: by_path.len(), rows: table.len() });
    }
    let skipped = by_path.keys().filter(|p| !used.contains(*p)).count();
    for p in by_path.keys().filter(|p| !used.contains(*p)) {
        log::info!("no feature row for caption `{p}`");
    }
    let mut file = fs::File::create(&args.out).map_err(CliError::io(&args.out))?;
    file.write_all(out.as_bytes()).map_err(CliError::io(&args.out))?;

    let config = json!({
        "caption_format_version": CAPTION_FORMAT_VERSION,
        "phrase": cfg.phrase(),
        "decimals": cfg.decimals(),
        "core_set": cfg.core_set().iter().map(|f| f.name()).collect::<Vec<_>>(),
    });
    let mut run = RunManifest::new("caption", global, config);
    run.add_input(&args.features)?;
    run.add_input(&args.captions)?;
    if let Some(m) = &args.metrics {
        run.add_input(m)?;
    }
    write_json(&sidecar_path(&args.out), &run)?;
    eprintln!("captioned {matched}, skipped {skipped} -> {}", args.out.display());
    Ok(CaptionSummary { matched, skipped })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotReport {
    pub feature: String,
    pub bins: usize,
    pub histograms: Vec<HistogramSpec>,
    pub run: RunManifest,
}

pub fn cmd_plot(args: &PlotArgs, global: &GlobalArgs) -> Result<PlotReport, CliError> {
    let feature = Feature::from_name(&args.feature).map_err(|e| CliError::Usage(e.to_string()))?;
    let table = read_table(&args.features)?;
    let bins = args.bins as usize;
    let mut histograms = Vec::new();
    for d in table.to_datasets() {
        let real: Vec<f64> = d.real.iter().map(|r| r[feature.index()]).collect();
        let fake: Vec<f64> = d.fake.iter().map(|r| r[feature.index()]).collect();
        for (label, col) in [("real", &real), ("fake", &fake)] {
            if col.len() < 2 {
                return Err(CliError::TooFewSamples { dataset: d.dataset_id.clone(), label, got: col.len() });
            }
        }
        histograms.extend(class_pair(feature.name(), &d.dataset_id, &real, &fake, bins));
    }
    if histograms.is_empty() {
        return Err(CliError::TooFewSamples { dataset: "<none>".into(), label: "real", got: 0 });
    }
    let mut run = RunManifest::new("plot", global, json!({ "feature": feature.name(), "bins": bins }));
    run.add_input(&args.features)?;
    let report = PlotReport { feature: feature.name().to_string(), bins, histograms, run };
    let json_path = args.json.clone().unwrap_or_else(|| args.out.with_extension("json"));
    write_json(&json_path, &report)?;
    fs::write(&args.out, svg::density_chart(feature.name(), &report.histograms)).map_err(CliError::io(&args.out))?;
    eprintln!("{} histograms -> {}, {}", report.histograms.len(), args.out.display(), json_path.display());
    Ok(report)
}
