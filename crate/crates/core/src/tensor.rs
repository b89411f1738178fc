//! Dense n-dimensional arrays of `f64` in row-major order.
//!
//! This is deliberately minimal: the layers only need construction, indexed
//! access, matrix multiplication, and elementwise arithmetic. No broadcasting,
//! no views, no strides. Reductions always sum with the inner index ascending
//! so runs are bitwise reproducible.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Maximum supported rank.
pub const MAX_RANK: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

fn validate_shape(shape: &[usize]) -> Result<()> {
    if shape.is_empty() || shape.len() > MAX_RANK || shape.contains(&0) {
        return Err(Error::InvalidShape {
            shape: shape.to_vec(),
        });
    }
    Ok(())
}

impl Tensor {
    /// Builds a tensor owning `data`, which must have exactly
    /// `shape.iter().product()` elements.
    pub fn new(shape: &[usize], data: Vec<f64>) -> Result<Self> {
        validate_shape(shape)?;
        let expected: usize = shape.iter().product();
        if data.len() != expected {
            return Err(Error::ShapeDataMismatch {
                expected,
                actual: data.len(),
            });
        }
        Ok(Self {
            shape: shape.to_vec(),
            data,
        })
    }

    /// All-zeros tensor. Panics on an invalid shape (programmer error).
    pub fn zeros(shape: &[usize]) -> Self {
        validate_shape(shape).expect("invalid shape for zeros");
        let len = shape.iter().product();
        Self {
            shape: shape.to_vec(),
            data: vec![0.0; len],
        }
    }

    /// Tensor with every element set to `value`.
    pub fn filled(shape: &[usize], value: f64) -> Self {
        let mut t = Self::zeros(shape);
        t.data.fill(value);
        t
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    /// Total number of elements.
    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Row-major offset of a full index. Panics on a malformed index.
    fn offset(&self, index: &[usize]) -> usize {
        assert_eq!(index.len(), self.shape.len(), "index rank mismatch");
        let mut off = 0;
        for (axis, (&i, &dim)) in index.iter().zip(self.shape.iter()).enumerate() {
            assert!(i < dim, "index {i} out of bounds for axis {axis} (dim {dim})");
            off = off * dim + i;
        }
        off
    }

    /// Reads element `index` (row-major).
    pub fn get(&self, index: &[usize]) -> f64 {
        self.data[self.offset(index)]
    }

    /// Writes element `index` (row-major).
    pub fn set(&mut self, index: &[usize], value: f64) {
        let off = self.offset(index);
        self.data[off] = value;
    }

    /// Same data under a new shape of equal total size.
    pub fn reshape(&self, shape: &[usize]) -> Result<Tensor> {
        Tensor::new(shape, self.data.clone())
    }

    /// Matrix product of two rank-2 tensors `[m,k] x [k,n] -> [m,n]`.
    /// Each output element sums over the inner index in ascending order.
    pub fn matmul(&self, rhs: &Tensor) -> Result<Tensor> {
        if self.rank() != 2 {
            return Err(Error::WrongRank {
                expected: 2,
                shape: self.shape.clone(),
            });
        }
        if rhs.rank() != 2 {
            return Err(Error::WrongRank {
                expected: 2,
                shape: rhs.shape.clone(),
            });
        }
        let (m, k) = (self.shape[0], self.shape[1]);
        let (k2, n) = (rhs.shape[0], rhs.shape[1]);
        if k != k2 {
            return Err(Error::ShapeMismatch {
                left: self.shape.clone(),
                right: rhs.shape.clone(),
            });
        }
        let mut out = vec![0.0; m * n];
        for i in 0..m {
            for j in 0..n {
                let mut acc = 0.0;
                for t in 0..k {
                    acc += self.data[i * k + t] * rhs.data[t * n + j];
                }
                out[i * n + j] = acc;
            }
        }
        Tensor::new(&[m, n], out)
    }

    /// Elementwise sum; shapes must match exactly.
    pub fn add(&self, rhs: &Tensor) -> Result<Tensor> {
        self.zip_with(rhs, |a, b| a + b)
    }

    /// Elementwise difference.
    pub fn sub(&self, rhs: &Tensor) -> Result<Tensor> {
        self.zip_with(rhs, |a, b| a - b)
    }

    /// Elementwise product.
    pub fn mul(&self, rhs: &Tensor) -> Result<Tensor> {
        self.zip_with(rhs, |a, b| a * b)
    }

    fn zip_with(&self, rhs: &Tensor, op: impl Fn(f64, f64) -> f64) -> Result<Tensor> {
        if self.shape != rhs.shape {
            return Err(Error::ShapeMismatch {
                left: self.shape.clone(),
                right: rhs.shape.clone(),
            });
        }
        let data = self
            .data
            .iter()
            .zip(rhs.data.iter())
            .map(|(&a, &b)| op(a, b))
            .collect();
        Tensor::new(&self.shape, data)
    }

    /// Every element multiplied by `factor`.
    pub fn scale(&self, factor: f64) -> Tensor {
        Tensor {
            shape: self.shape.clone(),
            data: self.data.iter().map(|&v| v * factor).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_major_indexing() {
        let t = Tensor::new(&[2, 2], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(t.get(&[1, 0]), 3.0);
        assert_eq!(t.get(&[0, 1]), 2.0);
    }

    #[test]
    fn zeros_vector() {
        let t = Tensor::new(&[3], vec![0.0; 3]).unwrap();
        assert!(t.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn length_mismatch_names_both_lengths() {
        let err = Tensor::new(&[2], vec![1.0, 2.0, 3.0]).unwrap_err();
        match err {
            Error::ShapeDataMismatch { expected, actual } => {
                assert_eq!(expected, 2);
                assert_eq!(actual, 3);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(matches!(
            Tensor::new(&[], vec![]),
            Err(Error::InvalidShape { .. })
        ));
        assert!(matches!(
            Tensor::new(&[1, 1, 1, 1, 1], vec![1.0]),
            Err(Error::InvalidShape { .. })
        ));
        assert!(matches!(
            Tensor::new(&[2, 0], vec![]),
            Err(Error::InvalidShape { .. })
        ));
    }

    #[test]
    fn matmul_identity() {
        let eye = Tensor::new(&[2, 2], vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let a = Tensor::new(&[2, 2], vec![5.0, 6.0, 7.0, 8.0]).unwrap();
        assert_eq!(eye.matmul(&a).unwrap(), a);
        assert_eq!(a.matmul(&eye).unwrap(), a);
    }

    #[test]
    fn matmul_dot_product() {
        let a = Tensor::new(&[1, 2], vec![1.0, 2.0]).unwrap();
        let b = Tensor::new(&[2, 1], vec![3.0, 4.0]).unwrap();
        let c = a.matmul(&b).unwrap();
        assert_eq!(c.shape(), &[1, 1]);
        assert_eq!(c.data(), &[11.0]);
    }

    #[test]
    fn matmul_dimension_mismatch() {
        let a = Tensor::zeros(&[2, 3]);
        let b = Tensor::zeros(&[2, 2]);
        assert!(matches!(a.matmul(&b), Err(Error::ShapeMismatch { .. })));
    }

    #[test]
    fn elementwise_examples() {
        let a = Tensor::new(&[2], vec![1.0, 2.0]).unwrap();
        let b = Tensor::new(&[2], vec![3.0, 4.0]).unwrap();
        assert_eq!(a.add(&b).unwrap().data(), &[4.0, 6.0]);
        assert!(a.sub(&a).unwrap().data().iter().all(|&v| v == 0.0));
        let c = Tensor::new(&[2], vec![2.0, 3.0]).unwrap();
        let d = Tensor::new(&[2], vec![0.0, 5.0]).unwrap();
        assert_eq!(c.mul(&d).unwrap().data(), &[0.0, 15.0]);
    }

    #[test]
    fn elementwise_shape_mismatch() {
        let a = Tensor::zeros(&[2]);
        let b = Tensor::zeros(&[3]);
        assert!(matches!(a.add(&b), Err(Error::ShapeMismatch { .. })));
    }

    #[test]
    fn reshape_preserves_data() {
        let t = Tensor::new(&[2, 2], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let r = t.reshape(&[4]).unwrap();
        assert_eq!(r.data(), t.data());
        assert!(t.reshape(&[3]).is_err());
    }
}
