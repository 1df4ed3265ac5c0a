//! Weight initialisers. Fan-in/fan-out uniform for matrices, zeros for biases
//! and a narrow normal for embedding tables.

use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::{Real, Tensor};

pub const EMBEDDING_STD: f64 = 0.02;

/// Uniform in `[-a, a]` with `a = sqrt(6 / (fan_in + fan_out))`.
pub fn xavier_uniform<T: Real, R: Rng + ?Sized>(
    shape: &[usize],
    fan_in: usize,
    fan_out: usize,
    rng: &mut R,
) -> Tensor<T> {
    let a = libm_sqrt(6.0 / (fan_in + fan_out) as f64);
    let n: usize = shape.iter().product();
    let data: Vec<T> = (0..n)
        .map(|_| T::of(rng.random_range(-a..=a)))
        .collect();
    Tensor::new(shape, data).expect("shape product matches")
}

pub fn normal<T: Real, R: Rng + ?Sized>(shape: &[usize], std: f64, rng: &mut R) -> Tensor<T> {
    let dist = Normal::new(0.0f64, std).expect("std is positive");
    let n: usize = shape.iter().product();
    let data: Vec<T> = (0..n).map(|_| T::of(dist.sample(rng))).collect();
    Tensor::new(shape, data).expect("shape product matches")
}

fn libm_sqrt(x: f64) -> f64 {
    num_traits::Float::sqrt(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn xavier_bounds_hold() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let t: Tensor<f32> = xavier_uniform(&[16, 8], 16, 8, &mut rng);
        let a = (6.0f32 / 24.0).sqrt();
        assert!(t.data().iter().all(|x| x.abs() <= a));
    }

    #[test]
    fn seeded_draws_repeat() {
        let a: Tensor<f32> = normal(&[10], 0.02, &mut ChaCha8Rng::seed_from_u64(9));
        let b: Tensor<f32> = normal(&[10], 0.02, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a, b);
    }
}
