#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use red_core::denoise::Denoiser;
use red_core::image::{add_gaussian_noise, load_pgm};
use red_core::ops::{make_blur, LinearOperator, Operator};
use red_core::red::RedProblem;
use red_core::solve::Weighting;
use red_core::{Dims, Image, Kernel};

pub fn repo_path(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

pub fn camera128() -> Image {
    load_pgm(repo_path("data/camera128.pgm")).expect("data/camera128.pgm")
}

pub fn camera48() -> Image {
    load_pgm(repo_path("data/camera48.pgm")).expect("data/camera48.pgm")
}

/// Central `w×h` window of `img`.
pub fn crop_center(img: &Image, dims: Dims) -> Image {
    let c0 = (img.width() - dims.width) / 2;
    let r0 = (img.height() - dims.height) / 2;
    Image::from_fn(dims, |c, r| img.get(c0 + c, r0 + r)).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_image(dims: Dims, lo: f64, hi: f64, rng: &mut ChaCha8Rng) -> Image {
    Image::from_fn(dims, |_, _| rng.random_range(lo..hi)).unwrap()
}

pub fn normal_image(dims: Dims, rng: &mut ChaCha8Rng) -> Image {
    Image::from_fn(dims, |_, _| StandardNormal.sample(rng)).unwrap()
}

/// 64×64 crop of the test image blurred by a 9×9 box, σ = √2, seed 7,
/// Gaussian 5/1.0 denoiser and α = 0.02.
pub fn deblur_instance() -> (RedProblem, Image, Image) {
    let clean = crop_center(&camera128(), Dims::new(64, 64));
    let op: Operator = Arc::new(make_blur(Kernel::uniform(9).unwrap(), clean.dims()).unwrap());
    let sigma = 2f64.sqrt();
    let y = add_gaussian_noise(&op.apply(&clean).unwrap(), sigma, 7).unwrap();
    let d = Arc::new(Denoiser::gaussian(5, 1.0).unwrap());
    let p = RedProblem::new(op, y.clone(), sigma, 0.02, d).unwrap();
    (p, y, clean)
}

/// Row-major dense matrix of a linear map on images.
#[derive(Debug, Clone)]
pub struct Dense {
    pub rows: usize,
    pub cols: usize,
    pub a: Vec<f64>,
}

impl Dense {
    pub fn of_map(input: Dims, f: impl Fn(&Image) -> Image) -> Dense {
        let cols = input.len();
        let mut columns = Vec::with_capacity(cols);
        for j in 0..cols {
            let mut e = vec![0.0; cols];
            e[j] = 1.0;
            columns.push(f(&Image::new(input.width, input.height, e).unwrap()).into_data());
        }
        let rows = columns[0].len();
        let mut a = vec![0.0; rows * cols];
        for (j, col) in columns.iter().enumerate() {
            for i in 0..rows {
                a[i * cols + j] = col[i];
            }
        }
        Dense { rows, cols, a }
    }

    pub fn of_operator(op: &dyn LinearOperator) -> Dense {
        Dense::of_map(op.input_dims(), |x| op.apply(x).unwrap())
    }

    pub fn of_denoiser(d: &Denoiser, dims: Dims) -> Dense {
        Dense::of_map(dims, |x| d.denoise(x).unwrap())
    }

    pub fn of_weighting(w: &Weighting, n: usize) -> Dense {
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            a[i * n + i] = w.tau();
        }
        if let Some((u, sign)) = w.rank_one() {
            let f = sign.factor();
            let u = u.data();
            for i in 0..n {
                for j in 0..n {
                    a[i * n + j] += f * u[i] * u[j];
                }
            }
        }
        Dense { rows: n, cols: n, a }
    }

    pub fn identity(n: usize) -> Dense {
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            a[i * n + i] = 1.0;
        }
        Dense { rows: n, cols: n, a }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|i| (0..self.cols).map(|j| self.a[i * self.cols + j] * x[j]).sum()).collect()
    }

    pub fn transpose(&self) -> Dense {
        let mut a = vec![0.0; self.rows * self.cols];
        for i in 0..self.rows {
            for j in 0..self.cols {
                a[j * self.rows + i] = self.a[i * self.cols + j];
            }
        }
        Dense { rows: self.cols, cols: self.rows, a }
    }

    pub fn matmul(&self, other: &Dense) -> Dense {
        assert_eq!(self.cols, other.rows);
        let mut a = vec![0.0; self.rows * other.cols];
        for i in 0..self.rows {
            for k in 0..self.cols {
                let s = self.a[i * self.cols + k];
                for j in 0..other.cols {
                    a[i * other.cols + j] += s * other.a[k * other.cols + j];
                }
            }
        }
        Dense { rows: self.rows, cols: other.cols, a }
    }

    /// `s·self + t·other`
    pub fn combine(&self, s: f64, other: &Dense, t: f64) -> Dense {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let a = self.a.iter().zip(&other.a).map(|(x, y)| s * x + t * y).collect();
        Dense { rows: self.rows, cols: self.cols, a }
    }

    /// Gaussian elimination with partial pivoting.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.rows;
        assert_eq!(n, self.cols);
        let mut m = self.a.clone();
        let mut x = b.to_vec();
        for k in 0..n {
            let p = (k..n).max_by(|&i, &j| m[i * n + k].abs().total_cmp(&m[j * n + k].abs())).unwrap();
            if p != k {
                for j in 0..n {
                    m.swap(k * n + j, p * n + j);
                }
                x.swap(k, p);
            }
            for i in k + 1..n {
                let f = m[i * n + k] / m[k * n + k];
                for j in k..n {
                    m[i * n + j] -= f * m[k * n + j];
                }
                x[i] -= f * x[k];
            }
        }
        for k in (0..n).rev() {
            let s: f64 = (k + 1..n).map(|j| m[k * n + j] * x[j]).sum();
            x[k] = (x[k] - s) / m[k * n + k];
        }
        x
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    diff / dot(b, b).sqrt().max(1.0)
}
