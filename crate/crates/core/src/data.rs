//! Dataset handling that needs no I/O: the labeled manifest, the stratified
//! 80/20 split, deterministic epoch batching, bilinear resizing, and the
//! rotation/stretch augmentation. Decoding image files into tensors lives in
//! the companion crate.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;
use crate::tensor::Tensor;

// ─── Labels and manifest ───────────────────────────────────────────────────

/// Binary class label: `Normal` = 0, `Pneumonia` = 1 (the positive class).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    Normal,
    Pneumonia,
}

impl Label {
    pub fn is_positive(self) -> bool {
        matches!(self, Label::Pneumonia)
    }

    /// Regression target: 1.0 for pneumonia, 0.0 for normal.
    pub fn target(self) -> f64 {
        if self.is_positive() {
            1.0
        } else {
            0.0
        }
    }

    pub fn index(self) -> usize {
        match self {
            Label::Normal => 0,
            Label::Pneumonia => 1,
        }
    }

    pub fn from_index(index: usize) -> Option<Label> {
        match index {
            0 => Some(Label::Normal),
            1 => Some(Label::Pneumonia),
            _ => None,
        }
    }

    /// Directory name in the dataset layout.
    pub fn dir_name(self) -> &'static str {
        match self {
            Label::Normal => "NORMAL",
            Label::Pneumonia => "PNEUMONIA",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: String,
    pub label: Label,
}

/// Labeled image index, sorted by path, with unique paths.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetManifest {
    entries: Vec<ManifestEntry>,
}

impl DatasetManifest {
    /// Sorts the entries by path and rejects duplicates.
    pub fn new(mut entries: Vec<ManifestEntry>) -> Result<Self> {
        entries.sort_by(|a, b| a.path.cmp(&b.path));
        for pair in entries.windows(2) {
            if pair[0].path == pair[1].path {
                return Err(Error::DuplicatePath {
                    path: pair[0].path.clone(),
                });
            }
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[ManifestEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `(normal, pneumonia)` entry counts.
    pub fn class_counts(&self) -> (usize, usize) {
        let pos = self
            .entries
            .iter()
            .filter(|e| e.label.is_positive())
            .count();
        (self.entries.len() - pos, pos)
    }
}

// ─── Split ─────────────────────────────────────────────────────────────────

/// Stratified train/test partition, stored as sorted manifest indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    pub ratio: f64,
    pub seed: u64,
}

/// Splits each class independently: shuffle by seed, take `floor(ratio * n)`
/// entries for training, leave the remainder for testing.
pub fn split(manifest: &DatasetManifest, ratio: f64, seed: u64) -> Result<Split> {
    if ratio.is_nan() || ratio <= 0.0 || ratio >= 1.0 {
        return Err(Error::InvalidRatio { ratio });
    }
    if manifest.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut rng = rng::seeded(seed, rng::stream::SPLIT);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for label in [Label::Normal, Label::Pneumonia] {
        let mut indices: Vec<usize> = manifest
            .entries
            .iter()
            .enumerate()
            .filter(|(_, e)| e.label == label)
            .map(|(i, _)| i)
            .collect();
        if indices.is_empty() {
            return Err(Error::EmptyClass {
                class: String::from(label.dir_name()),
            });
        }
        indices.shuffle(&mut rng);
        let n_train = (ratio * indices.len() as f64) as usize;
        train.extend_from_slice(&indices[..n_train]);
        test.extend_from_slice(&indices[n_train..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok(Split {
        train,
        test,
        ratio,
        seed,
    })
}

// ─── In-memory dataset ─────────────────────────────────────────────────────

/// Decoded images with their labels, indexed like the manifest they came from.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    images: Vec<Tensor>,
    labels: Vec<Label>,
}

impl Dataset {
    pub fn new(images: Vec<Tensor>, labels: Vec<Label>) -> Result<Self> {
        if images.len() != labels.len() {
            return Err(Error::LengthMismatch {
                probabilities: images.len(),
                labels: labels.len(),
            });
        }
        Ok(Self { images, labels })
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn image(&self, index: usize) -> &Tensor {
        &self.images[index]
    }

    pub fn label(&self, index: usize) -> Label {
        self.labels[index]
    }

    pub fn view<'a>(&'a self, indices: &'a [usize]) -> DatasetView<'a> {
        DatasetView {
            dataset: self,
            indices,
        }
    }
}

/// A borrowed subset of a dataset, e.g. the train or test side of a split.
#[derive(Debug, Clone, Copy)]
pub struct DatasetView<'a> {
    dataset: &'a Dataset,
    indices: &'a [usize],
}

impl<'a> DatasetView<'a> {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[usize] {
        self.indices
    }

    /// Sample by dataset index (not view position).
    pub fn sample(&self, dataset_index: usize) -> (&'a Tensor, Label) {
        (
            self.dataset.image(dataset_index),
            self.dataset.label(dataset_index),
        )
    }

    pub fn iter(&self) -> impl Iterator<Item = (&'a Tensor, Label)> + '_ {
        self.indices.iter().map(|&i| self.sample(i))
    }
}

// ─── Batching ──────────────────────────────────────────────────────────────

/// Shuffles `items` with the stream derived from `(seed, epoch)` and chops the
/// result into batches of `batch_size` (the final batch may be short).
pub fn make_batches(
    items: &[usize],
    batch_size: usize,
    epoch: usize,
    seed: u64,
) -> Vec<Vec<usize>> {
    assert!(batch_size >= 1, "batch_size must be >= 1");
    let mut order = items.to_vec();
    order.shuffle(&mut rng::epoch_shuffle(seed, epoch));
    order.chunks(batch_size).map(|c| c.to_vec()).collect()
}

// ─── Augmentation ──────────────────────────────────────────────────────────

/// Random rotation and anisotropic stretch about the image center.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AugmentPlan {
    /// Rotation is sampled from `[-rotation_deg, +rotation_deg]`.
    pub rotation_deg: f64,
    /// Per-axis scale is sampled from `[scale_min, scale_max]`.
    pub scale_min: f64,
    pub scale_max: f64,
    /// Augmented resamples of each training image per epoch. 0 disables
    /// augmentation and trains on the raw images.
    pub copies: usize,
    pub seed: u64,
}

impl Default for AugmentPlan {
    fn default() -> Self {
        Self {
            rotation_deg: 15.0,
            scale_min: 0.9,
            scale_max: 1.1,
            copies: 1,
            seed: 42,
        }
    }
}

impl AugmentPlan {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=45.0).contains(&self.rotation_deg) {
            return Err(Error::InvalidAugmentPlan {
                reason: format!("rotation bound {} must be in [0, 45]", self.rotation_deg),
            });
        }
        if !(self.scale_min > 0.0 && self.scale_min <= self.scale_max) {
            return Err(Error::InvalidAugmentPlan {
                reason: format!(
                    "scale range [{}, {}] must be positive and ordered",
                    self.scale_min, self.scale_max
                ),
            });
        }
        Ok(())
    }
}

/// Samples a rotation angle and per-axis scales from the plan and applies the
/// affine map about the image center with bilinear sampling. Out-of-frame
/// samples are zero (black); output shape and value range are preserved.
pub fn augment<R: Rng>(image: &Tensor, plan: &AugmentPlan, rng: &mut R) -> Result<Tensor> {
    let angle_deg: f64 = rng.random_range(-plan.rotation_deg..=plan.rotation_deg);
    let sx: f64 = rng.random_range(plan.scale_min..=plan.scale_max);
    let sy: f64 = rng.random_range(plan.scale_min..=plan.scale_max);
    let angle = angle_deg * core::f64::consts::PI / 180.0;
    affine_transform(image, angle, sx, sy)
}

/// Rotates by `angle` (radians) and stretches by `(sx, sy)` about the center,
/// resampling bilinearly with zero padding.
pub fn affine_transform(image: &Tensor, angle: f64, sx: f64, sy: f64) -> Result<Tensor> {
    if image.rank() != 3 {
        return Err(Error::WrongRank {
            expected: 3,
            shape: image.shape().to_vec(),
        });
    }
    let (c, h, w) = (image.shape()[0], image.shape()[1], image.shape()[2]);
    let cy = (h as f64 - 1.0) / 2.0;
    let cx = (w as f64 - 1.0) / 2.0;
    let (sin, cos) = (libm::sin(angle), libm::cos(angle));

    let mut out = Tensor::zeros(&[c, h, w]);
    let dst = out.data_mut();
    for ci in 0..c {
        for y in 0..h {
            for x in 0..w {
                // Inverse map: undo rotation, then undo scaling.
                let dy = y as f64 - cy;
                let dx = x as f64 - cx;
                let ry = -sin * dx + cos * dy;
                let rx = cos * dx + sin * dy;
                let src_y = ry / sy + cy;
                let src_x = rx / sx + cx;
                dst[ci * h * w + y * w + x] = bilinear_zero_pad(image, ci, src_y, src_x);
            }
        }
    }
    Ok(out)
}

/// Bilinear sample at fractional coordinates; neighbors outside the image
/// contribute zero.
fn bilinear_zero_pad(image: &Tensor, channel: usize, src_y: f64, src_x: f64) -> f64 {
    let (h, w) = (image.shape()[1], image.shape()[2]);
    let y0 = libm::floor(src_y) as i64;
    let x0 = libm::floor(src_x) as i64;
    let wy = src_y - y0 as f64;
    let wx = src_x - x0 as f64;
    let data = image.data();
    let fetch = |y: i64, x: i64| -> f64 {
        if y < 0 || x < 0 || y >= h as i64 || x >= w as i64 {
            0.0
        } else {
            data[channel * h * w + y as usize * w + x as usize]
        }
    };
    fetch(y0, x0) * (1.0 - wy) * (1.0 - wx)
        + fetch(y0, x0 + 1) * (1.0 - wy) * wx
        + fetch(y0 + 1, x0) * wy * (1.0 - wx)
        + fetch(y0 + 1, x0 + 1) * wy * wx
}

// ─── Resizing ──────────────────────────────────────────────────────────────

/// Bilinear resize with half-pixel centers and edge clamping.
pub fn resize_bilinear(image: &Tensor, out_height: usize, out_width: usize) -> Result<Tensor> {
    if image.rank() != 3 {
        return Err(Error::WrongRank {
            expected: 3,
            shape: image.shape().to_vec(),
        });
    }
    if out_height == 0 || out_width == 0 {
        return Err(Error::InvalidShape {
            shape: alloc::vec![image.shape()[0], out_height, out_width],
        });
    }
    let (c, h, w) = (image.shape()[0], image.shape()[1], image.shape()[2]);
    let scale_y = h as f64 / out_height as f64;
    let scale_x = w as f64 / out_width as f64;
    let data = image.data();

    let mut out = Tensor::zeros(&[c, out_height, out_width]);
    let dst = out.data_mut();
    let clamp = |v: i64, hi: usize| -> usize { v.clamp(0, hi as i64 - 1) as usize };
    for ci in 0..c {
        for oy in 0..out_height {
            let src_y = (oy as f64 + 0.5) * scale_y - 0.5;
            let y0 = libm::floor(src_y) as i64;
            let wy = src_y - y0 as f64;
            let (ya, yb) = (clamp(y0, h), clamp(y0 + 1, h));
            for ox in 0..out_width {
                let src_x = (ox as f64 + 0.5) * scale_x - 0.5;
                let x0 = libm::floor(src_x) as i64;
                let wx = src_x - x0 as f64;
                let (xa, xb) = (clamp(x0, w), clamp(x0 + 1, w));
                let p00 = data[ci * h * w + ya * w + xa];
                let p01 = data[ci * h * w + ya * w + xb];
                let p10 = data[ci * h * w + yb * w + xa];
                let p11 = data[ci * h * w + yb * w + xb];
                dst[ci * out_height * out_width + oy * out_width + ox] = p00
                    * (1.0 - wy)
                    * (1.0 - wx)
                    + p01 * (1.0 - wy) * wx
                    + p10 * wy * (1.0 - wx)
                    + p11 * wy * wx;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn manifest_with_counts(normal: usize, pneumonia: usize) -> DatasetManifest {
        let mut entries = Vec::new();
        for i in 0..normal {
            entries.push(ManifestEntry {
                path: format!("NORMAL/img_{i:05}.png"),
                label: Label::Normal,
            });
        }
        for i in 0..pneumonia {
            entries.push(ManifestEntry {
                path: format!("PNEUMONIA/img_{i:05}.png"),
                label: Label::Pneumonia,
            });
        }
        DatasetManifest::new(entries).unwrap()
    }

    #[test]
    fn manifest_counts_and_order() {
        let m = manifest_with_counts(1200, 1200);
        assert_eq!(m.class_counts(), (1200, 1200));
        assert!(m
            .entries()
            .windows(2)
            .all(|p| p[0].path < p[1].path));
    }

    #[test]
    fn manifest_rejects_duplicates() {
        let entries = vec![
            ManifestEntry {
                path: String::from("a.png"),
                label: Label::Normal,
            },
            ManifestEntry {
                path: String::from("a.png"),
                label: Label::Pneumonia,
            },
        ];
        assert!(matches!(
            DatasetManifest::new(entries),
            Err(Error::DuplicatePath { .. })
        ));
    }

    #[test]
    fn split_paper_counts() {
        let m = manifest_with_counts(1200, 1200);
        let s = split(&m, 0.8, 42).unwrap();
        assert_eq!(s.train.len(), 1920);
        assert_eq!(s.test.len(), 480);
        let train_pos = s
            .train
            .iter()
            .filter(|&&i| m.entries()[i].label.is_positive())
            .count();
        assert_eq!(train_pos, 960);
        assert_eq!(s.train.len() - train_pos, 960);
    }

    #[test]
    fn split_floor_rule() {
        let m = manifest_with_counts(5, 5);
        let s = split(&m, 0.8, 1).unwrap();
        let train_normal = s
            .train
            .iter()
            .filter(|&&i| m.entries()[i].label == Label::Normal)
            .count();
        assert_eq!(train_normal, 4);
    }

    #[test]
    fn split_is_a_partition() {
        let m = manifest_with_counts(13, 17);
        let s = split(&m, 0.8, 3).unwrap();
        let mut all: Vec<usize> = s.train.iter().chain(s.test.iter()).copied().collect();
        all.sort_unstable();
        let expected: Vec<usize> = (0..30).collect();
        assert_eq!(all, expected);
    }

    #[test]
    fn split_determinism() {
        let m = manifest_with_counts(20, 20);
        let a = split(&m, 0.8, 7).unwrap();
        let b = split(&m, 0.8, 7).unwrap();
        assert_eq!(a, b);
        let c = split(&m, 0.8, 8).unwrap();
        assert_ne!(a.train, c.train);
        assert_eq!(a.train.len(), c.train.len());
    }

    #[test]
    fn split_rejects_missing_class_and_bad_ratio() {
        let m = manifest_with_counts(0, 5);
        assert!(matches!(
            split(&m, 0.8, 0),
            Err(Error::EmptyClass { .. })
        ));
        let ok = manifest_with_counts(2, 2);
        assert!(matches!(
            split(&ok, 1.0, 0),
            Err(Error::InvalidRatio { .. })
        ));
    }

    #[test]
    fn batches_cover_items_in_chunks() {
        let items: Vec<usize> = (0..10).collect();
        let batches = make_batches(&items, 3, 1, 42);
        let sizes: Vec<usize> = batches.iter().map(|b| b.len()).collect();
        assert_eq!(sizes, vec![3, 3, 3, 1]);
        assert_eq!(make_batches(&items, 3, 1, 42), batches);
    }

    #[test]
    fn batches_differ_by_epoch_with_same_multiset() {
        let items: Vec<usize> = (0..32).collect();
        let e1: Vec<usize> = make_batches(&items, 8, 1, 42).concat();
        let e2: Vec<usize> = make_batches(&items, 8, 2, 42).concat();
        assert_ne!(e1, e2);
        let mut s1 = e1.clone();
        let mut s2 = e2.clone();
        s1.sort_unstable();
        s2.sort_unstable();
        assert_eq!(s1, s2);
    }

    #[test]
    fn identity_augmentation_is_exact() {
        let image = Tensor::new(&[1, 3, 3], (0..9).map(|v| v as f64 / 10.0).collect()).unwrap();
        let plan = AugmentPlan {
            rotation_deg: 0.0,
            scale_min: 1.0,
            scale_max: 1.0,
            copies: 1,
            seed: 0,
        };
        let mut r = rng::seeded(0, rng::stream::AUGMENT);
        let out = augment(&image, &plan, &mut r).unwrap();
        assert_eq!(out, image);
        let out2 = affine_transform(&image, 0.0, 1.0, 1.0).unwrap();
        assert_eq!(out2, image);
    }

    #[test]
    fn augmentation_preserves_shape_and_range() {
        let mut r = rng::seeded(11, rng::stream::AUGMENT);
        let data: Vec<f64> = (0..(16 * 16)).map(|_| r.random_range(0.0..=1.0)).collect();
        let image = Tensor::new(&[1, 16, 16], data).unwrap();
        let plan = AugmentPlan::default();
        for _ in 0..100 {
            let out = augment(&image, &plan, &mut r).unwrap();
            assert_eq!(out.shape(), image.shape());
            assert!(out
                .data()
                .iter()
                .all(|&v| (0.0..=1.0).contains(&v) && v.is_finite()));
        }
    }

    #[test]
    fn augment_plan_validation() {
        let mut plan = AugmentPlan::default();
        assert!(plan.validate().is_ok());
        plan.rotation_deg = 90.0;
        assert!(plan.validate().is_err());
        plan.rotation_deg = 15.0;
        plan.scale_min = 0.0;
        assert!(plan.validate().is_err());
    }

    #[test]
    fn resize_checkerboard_averages() {
        let image = Tensor::new(&[1, 2, 2], vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        let out = resize_bilinear(&image, 1, 1).unwrap();
        assert_eq!(out.data(), &[0.5]);
    }

    #[test]
    fn resize_shapes() {
        let image = Tensor::zeros(&[1, 300, 300]);
        let out = resize_bilinear(&image, 150, 150).unwrap();
        assert_eq!(out.shape(), &[1, 150, 150]);

        let up = resize_bilinear(&Tensor::filled(&[1, 2, 2], 0.25), 5, 5).unwrap();
        assert_eq!(up.shape(), &[1, 5, 5]);
        assert!(up.data().iter().all(|&v| (v - 0.25).abs() < 1e-15));
    }

    #[test]
    fn resize_identity_when_same_size() {
        let image = Tensor::new(&[1, 2, 3], vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6]).unwrap();
        let out = resize_bilinear(&image, 2, 3).unwrap();
        assert_eq!(out, image);
    }
}
