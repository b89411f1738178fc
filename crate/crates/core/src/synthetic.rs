//! Built-in synthetic dataset: positives are a bright Gaussian disc at a
//! random position over uniform noise, negatives are noise only. Lets the
//! whole pipeline run end to end with no downloads.

use alloc::format;
use alloc::vec::Vec;

use rand::Rng;

use crate::data::{Dataset, DatasetManifest, Label, ManifestEntry};
use crate::rng;
use crate::tensor::Tensor;

pub const DEFAULT_COUNT: usize = 250;
pub const DEFAULT_SIZE: usize = 32;

const NOISE_MAX: f64 = 0.25;

/// Renders `count` square images of `size` pixels, alternating positive and
/// negative labels. Deterministic given the seed; pixel values lie in [0, 1].
pub fn generate(count: usize, size: usize, seed: u64) -> (DatasetManifest, Dataset) {
    let mut rng = rng::seeded(seed, rng::stream::SYNTHETIC);
    let mut entries = Vec::with_capacity(count);
    let mut images = Vec::with_capacity(count);
    let mut labels = Vec::with_capacity(count);

    // Disc geometry scales with the image so other sizes stay meaningful.
    let center_lo = 0.25 * size as f64;
    let center_hi = 0.75 * size as f64;
    let sigma_lo = 0.11 * size as f64;
    let sigma_hi = 0.14 * size as f64;

    for index in 0..count {
        let label = if index % 2 == 0 {
            Label::Pneumonia
        } else {
            Label::Normal
        };
        let mut pixels: Vec<f64> = (0..size * size)
            .map(|_| rng.random_range(0.0..=NOISE_MAX))
            .collect();
        if label.is_positive() {
            let cy: f64 = rng.random_range(center_lo..=center_hi);
            let cx: f64 = rng.random_range(center_lo..=center_hi);
            let sigma: f64 = rng.random_range(sigma_lo..=sigma_hi);
            let amplitude: f64 = rng.random_range(0.85..=1.0);
            let denom = 2.0 * sigma * sigma;
            for y in 0..size {
                for x in 0..size {
                    let dy = y as f64 - cy;
                    let dx = x as f64 - cx;
                    let v = &mut pixels[y * size + x];
                    *v = (*v + amplitude * libm::exp(-(dy * dy + dx * dx) / denom)).clamp(0.0, 1.0);
                }
            }
        }
        entries.push(ManifestEntry {
            path: format!("synthetic/{index:05}_{}", label.dir_name().to_lowercase()),
            label,
        });
        images.push(Tensor::new(&[1, size, size], pixels).expect("valid image shape"));
        labels.push(label);
    }

    let manifest = DatasetManifest::new(entries).expect("synthetic paths are unique");
    let dataset = Dataset::new(images, labels).expect("images and labels align");
    (manifest, dataset)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn balanced_and_deterministic() {
        let (manifest, dataset) = generate(10, 16, 3);
        assert_eq!(manifest.len(), 10);
        assert_eq!(dataset.len(), 10);
        assert_eq!(manifest.class_counts(), (5, 5));
        let (m2, d2) = generate(10, 16, 3);
        assert_eq!(manifest, m2);
        assert_eq!(dataset, d2);
    }

    #[test]
    fn manifest_order_matches_dataset_indices() {
        let (manifest, dataset) = generate(8, 8, 1);
        for (i, entry) in manifest.entries().iter().enumerate() {
            assert_eq!(entry.label, dataset.label(i));
        }
    }

    #[test]
    fn pixels_stay_in_range_and_discs_brighten_positives() {
        let (_, dataset) = generate(50, 32, 9);
        let mut pos_max = 0.0f64;
        let mut neg_max = 0.0f64;
        for i in 0..dataset.len() {
            let peak = dataset
                .image(i)
                .data()
                .iter()
                .fold(0.0f64, |a, &b| a.max(b));
            assert!(dataset.image(i).data().iter().all(|&v| (0.0..=1.0).contains(&v)));
            if dataset.label(i).is_positive() {
                pos_max = pos_max.max(peak);
            } else {
                neg_max = neg_max.max(peak);
            }
        }
        assert!(pos_max > 0.8);
        assert!(neg_max <= NOISE_MAX);
    }
}
