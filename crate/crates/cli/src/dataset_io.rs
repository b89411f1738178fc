//! Scanning the dataset directory layout, decoding images to tensors, and
//! the manifest CSV format.
//!
//! Layout: `<root>/NORMAL/*.{png,jpg,pgm}` and `<root>/PNEUMONIA/*.{png,jpg,pgm}`.
//! Files whose format cannot be recognized are skipped with a warning; files
//! that fail to decode at load time are hard errors naming the path.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use image::{DynamicImage, ImageReader};
use pxcnn_core::data::{resize_bilinear, Dataset, DatasetManifest, Label, ManifestEntry};
use pxcnn_core::Tensor;

use crate::error::AppError;

/// Builds a manifest from the two class directories. Entries are sorted by
/// path; the returned warnings name every skipped (unrecognizable) file.
pub fn scan_dataset(root: &Path) -> Result<(DatasetManifest, Vec<String>), AppError> {
    let mut entries = Vec::new();
    let mut warnings = Vec::new();
    for label in [Label::Normal, Label::Pneumonia] {
        let dir = root.join(label.dir_name());
        if !dir.is_dir() {
            return Err(AppError::Data(format!(
                "missing class directory {}",
                dir.display()
            )));
        }
        let mut paths: Vec<_> = fs::read_dir(&dir)
            .map_err(AppError::data)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_file())
            .collect();
        paths.sort();
        let before = entries.len();
        for path in paths {
            match ImageReader::open(&path).and_then(|r| r.with_guessed_format()) {
                Ok(reader) if reader.format().is_some() => {
                    entries.push(ManifestEntry {
                        path: path.to_string_lossy().into_owned(),
                        label,
                    });
                }
                _ => warnings.push(format!("skipping undecodable file {}", path.display())),
            }
        }
        if entries.len() == before {
            return Err(AppError::Data(format!(
                "class {} has no images under {}",
                label.dir_name(),
                dir.display()
            )));
        }
    }
    let manifest = DatasetManifest::new(entries).map_err(AppError::data)?;
    Ok((manifest, warnings))
}

/// Decodes one image to a grayscale `[1, height, width]` tensor in [0, 1]:
/// RGB collapses to luminance (0.299 R + 0.587 G + 0.114 B), then a bilinear
/// resize to the target size.
pub fn load_image(path: &Path, height: usize, width: usize) -> Result<Tensor, AppError> {
    let img = image::open(path)
        .map_err(|e| AppError::Data(format!("cannot decode {}: {e}", path.display())))?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let gray: Vec<f64> = match img {
        DynamicImage::ImageLuma8(buf) => buf.into_raw().iter().map(|&v| v as f64 / 255.0).collect(),
        other => other
            .to_rgb8()
            .pixels()
            .map(|p| {
                (0.299 * p.0[0] as f64 + 0.587 * p.0[1] as f64 + 0.114 * p.0[2] as f64) / 255.0
            })
            .collect(),
    };
    let tensor = Tensor::new(&[1, h, w], gray).map_err(AppError::data)?;
    resize_bilinear(&tensor, height, width).map_err(AppError::data)
}

/// Decodes every manifest entry, in manifest order, at the target size.
pub fn load_dataset(
    manifest: &DatasetManifest,
    height: usize,
    width: usize,
) -> Result<Dataset, AppError> {
    let mut images = Vec::with_capacity(manifest.len());
    let mut labels = Vec::with_capacity(manifest.len());
    for entry in manifest.entries() {
        images.push(load_image(Path::new(&entry.path), height, width)?);
        labels.push(entry.label);
    }
    Dataset::new(images, labels).map_err(AppError::data)
}

/// Writes the manifest as CSV with header `path,label`, sorted by path.
pub fn write_manifest_csv(manifest: &DatasetManifest, writer: impl Write) -> Result<(), AppError> {
    let mut csv = csv::Writer::from_writer(writer);
    csv.write_record(["path", "label"]).map_err(AppError::data)?;
    for entry in manifest.entries() {
        csv.write_record([entry.path.as_str(), &entry.label.index().to_string()])
            .map_err(AppError::data)?;
    }
    csv.flush().map_err(AppError::data)
}

pub fn read_manifest_csv(reader: impl Read) -> Result<DatasetManifest, AppError> {
    let mut csv = csv::Reader::from_reader(reader);
    let headers = csv.headers().map_err(AppError::data)?;
    if headers != vec!["path", "label"] {
        return Err(AppError::Data(format!(
            "manifest CSV header must be path,label; got {headers:?}"
        )));
    }
    let mut entries = Vec::new();
    for record in csv.records() {
        let record = record.map_err(AppError::data)?;
        let path = record
            .get(0)
            .ok_or_else(|| AppError::Data("manifest row missing path".into()))?;
        let label_index: usize = record
            .get(1)
            .ok_or_else(|| AppError::Data("manifest row missing label".into()))?
            .parse()
            .map_err(AppError::data)?;
        let label = Label::from_index(label_index)
            .ok_or_else(|| AppError::Data(format!("label must be 0 or 1, got {label_index}")))?;
        entries.push(ManifestEntry {
            path: path.to_string(),
            label,
        });
    }
    DatasetManifest::new(entries).map_err(AppError::data)
}
