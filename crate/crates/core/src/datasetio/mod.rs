//! Image-directory scanning, feature-size loading and parallel batch
//! augmentation.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};

use rayon::prelude::*;
use sha2::{Digest, Sha256};
use walkdir::WalkDir;

use crate::augment::{apply_pipeline, SensorParams, PARAM_SPECS};
use crate::error::{Error, Result};
use crate::imagecore::{decode_file, probe_dimensions, resize_and_crop, write_image, Image};
use crate::profile::SensorProfile;
use crate::rng::{fnv1a64, mix_seed, stream};

pub const DEFAULT_EXTENSIONS: [&str; 3] = ["png", "jpg", "jpeg"];

/// Shorter side after the resize that precedes the center crop.
pub const FEATURE_RESIZE: usize = 256;
/// Side of the square crop fed to the feature extractor.
pub const FEATURE_CROP: usize = 224;

pub const PARAMS_LOG_NAME: &str = "params_log.csv";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DatasetEntry {
    /// Path below the root, `/`-separated on every platform.
    pub relative_path: String,
    pub width: usize,
    pub height: usize,
}

/// A file that was found but not listed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SkippedFile {
    pub relative_path: String,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DatasetManifest {
    pub root: PathBuf,
    /// Sorted by `relative_path`, byte-wise.
    pub entries: Vec<DatasetEntry>,
    /// SHA-256 of the listing (paths and dimensions), hex encoded.
    pub content_hash: String,
    pub skipped: Vec<SkippedFile>,
}

impl DatasetManifest {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn path_of(&self, index: usize) -> Option<PathBuf> {
        self.entries.get(index).map(|e| self.root.join(&e.relative_path))
    }
}

/// [`scan_dataset_with`] for PNG and JPEG files.
pub fn scan_dataset(dir: &Path) -> Result<DatasetManifest> {
    scan_dataset_with(dir, &DEFAULT_EXTENSIONS)
}

/// Recursively lists decodable images below `dir`. Files with other
/// extensions or unreadable headers are skipped and logged.
pub fn scan_dataset_with(dir: &Path, extensions: &[&str]) -> Result<DatasetManifest> {
    if !dir.is_dir() {
        return Err(Error::NotFound(dir.to_path_buf()));
    }
    let mut entries = Vec::new();
    let mut skipped = Vec::new();
    for item in WalkDir::new(dir).follow_links(true) {
        let item = item.map_err(|e| {
            let path = e.path().unwrap_or(dir).to_path_buf();
            Error::io(path, e.into())
        })?;
        if !item.file_type().is_file() {
            continue;
        }
        let rel = relative_string(item.path().strip_prefix(dir).unwrap_or(item.path()));
        let ext_ok = item
            .path()
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| extensions.iter().any(|x| x.eq_ignore_ascii_case(e)));
        if !ext_ok {
            skipped.push(SkippedFile {
                relative_path: rel,
                reason: "not an image file".into(),
            });
            continue;
        }
        match probe_dimensions(item.path()) {
            Ok((width, height)) => entries.push(DatasetEntry {
                relative_path: rel,
                width,
                height,
            }),
            Err(e) => skipped.push(SkippedFile {
                relative_path: rel,
                reason: e.to_string(),
            }),
        }
    }
    entries.sort_by(|a, b| a.relative_path.cmp(&b.relative_path));
    skipped.sort_by(|a, b| a.relative_path.cmp(&b.relative_path));
    for s in &skipped {
        log::warn!("skipping {}: {}", s.relative_path, s.reason);
    }
    if !skipped.is_empty() {
        log::warn!("{}: skipped {} file(s)", dir.display(), skipped.len());
    }
    if entries.is_empty() {
        return Err(Error::EmptyDataset(dir.to_path_buf()));
    }
    let content_hash = listing_hash(&entries);
    Ok(DatasetManifest {
        root: dir.to_path_buf(),
        entries,
        content_hash,
        skipped,
    })
}

fn relative_string(path: &Path) -> String {
    path.components()
        .map(|c| c.as_os_str().to_string_lossy())
        .collect::<Vec<_>>()
        .join("/")
}

fn listing_hash(entries: &[DatasetEntry]) -> String {
    let mut h = Sha256::new();
    for e in entries {
        h.update(format!("{}\t{}\t{}\n", e.relative_path, e.width, e.height));
    }
    hex::encode(h.finalize())
}

/// Decodes entry `index` and resizes/crops it to the extractor input size.
pub fn load_for_features(manifest: &DatasetManifest, index: usize) -> Result<Image> {
    let path = manifest.path_of(index).ok_or_else(|| {
        Error::invalid(format!("index {index} out of range for {} entries", manifest.len()))
    })?;
    resize_and_crop(&decode_file(&path)?, FEATURE_RESIZE, FEATURE_CROP)
}

/// Every entry through [`load_for_features`], in manifest order.
pub fn load_all_for_features(manifest: &DatasetManifest) -> Result<Vec<Image>> {
    (0..manifest.len())
        .into_par_iter()
        .map(|i| load_for_features(manifest, i))
        .collect()
}

/// Seed for draw `draw` of the image at `relative_path`.
pub fn draw_seed(seed: u64, relative_path: &str, draw: usize) -> u64 {
    mix_seed(&[seed, fnv1a64(relative_path.as_bytes()), draw as u64])
}

/// Output path of draw `draw` for `relative_path`: same subdirectory,
/// `<stem>__aug<draw>.png`.
pub fn augmented_path(out_dir: &Path, relative_path: &str, draw: usize) -> PathBuf {
    let rel = Path::new(relative_path);
    let stem = rel.file_stem().map(|s| s.to_string_lossy()).unwrap_or_default();
    let name = format!("{stem}__aug{draw}.png");
    match rel.parent() {
        Some(p) if !p.as_os_str().is_empty() => out_dir.join(p).join(name),
        _ => out_dir.join(name),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AugmentSummary {
    pub images_written: usize,
    pub params_log_path: PathBuf,
}

struct Row {
    relative_path: String,
    draw: usize,
    params: SensorParams,
}

/// Writes `count` augmented copies of every image at native resolution and
/// a CSV log of the parameters used. Output is independent of `workers`.
pub fn augment_dataset(
    manifest: &DatasetManifest,
    profile: &SensorProfile,
    out_dir: &Path,
    count: usize,
    seed: u64,
    workers: usize,
) -> Result<AugmentSummary> {
    if count == 0 {
        return Err(Error::invalid("count per image must be at least 1"));
    }
    if workers == 0 {
        return Err(Error::invalid("workers must be at least 1"));
    }
    profile.validate()?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::invalid(format!("cannot start {workers} workers: {e}")))?;

    let failed = AtomicBool::new(false);
    let written = AtomicUsize::new(0);
    let results: Vec<Result<Vec<Row>>> = pool.install(|| {
        manifest
            .entries
            .par_iter()
            .map(|entry| {
                if failed.load(Ordering::Relaxed) {
                    return Ok(Vec::new());
                }
                let res = augment_one(manifest, entry, profile, out_dir, count, seed, &written);
                if res.is_err() {
                    failed.store(true, Ordering::Relaxed);
                }
                res
            })
            .collect()
    });

    let mut rows = Vec::new();
    let mut first_err = None;
    for r in results {
        match r {
            Ok(mut v) => rows.append(&mut v),
            Err(e) if first_err.is_none() => first_err = Some(e),
            Err(_) => {}
        }
    }
    let params_log_path = out_dir.join(PARAMS_LOG_NAME);
    let log_result = write_params_log(&params_log_path, &rows);
    let images_written = written.load(Ordering::Relaxed);
    if let Some(e) = first_err.or(log_result.err()) {
        return Err(Error::Partial {
            written: images_written,
            source: Box::new(e),
        });
    }
    Ok(AugmentSummary {
        images_written,
        params_log_path,
    })
}

fn augment_one(
    manifest: &DatasetManifest,
    entry: &DatasetEntry,
    profile: &SensorProfile,
    out_dir: &Path,
    count: usize,
    seed: u64,
    written: &AtomicUsize,
) -> Result<Vec<Row>> {
    let img = decode_file(&manifest.root.join(&entry.relative_path))?;
    let mut rows = Vec::with_capacity(count);
    for draw in 0..count {
        let mut rng = stream(draw_seed(seed, &entry.relative_path, draw));
        let params = profile.sample_one(&mut rng);
        let out = apply_pipeline(&img, &params, &mut rng)?;
        let path = augmented_path(out_dir, &entry.relative_path, draw);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        write_image(&out, &path)?;
        written.fetch_add(1, Ordering::Relaxed);
        rows.push(Row {
            relative_path: entry.relative_path.clone(),
            draw,
            params,
        });
    }
    Ok(rows)
}

/// Header of the params log: `relative_path`, `draw_index`, then the
/// dotted parameter keys in canonical order.
pub fn params_log_header() -> Vec<String> {
    let mut h = vec!["relative_path".to_string(), "draw_index".to_string()];
    h.extend(PARAM_SPECS.iter().map(|s| s.key()));
    h
}

fn write_params_log(path: &Path, rows: &[Row]) -> Result<()> {
    let csv_err = |e: csv::Error| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::invalid(format!("{}: {other:?}", path.display())),
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(params_log_header()).map_err(csv_err)?;
    for r in rows {
        let mut rec = vec![r.relative_path.clone(), r.draw.to_string()];
        rec.extend(r.params.to_array().iter().map(|v| v.to_string()));
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
