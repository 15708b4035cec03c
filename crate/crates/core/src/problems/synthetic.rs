//! Seeded synthetic datasets for the built-in problems.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::manifold::Manifold;
use crate::rng;

/// `n` Gaussian samples in `R^d` with standard deviation `1 / sqrt(1 + j)`
/// along coordinate `j`, so the leading principal directions are the first
/// coordinates.
pub fn synthetic_dro_samples(n: usize, d: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut r = rng::derive(seed, "dro_samples");
    let scale: Vec<f64> = (0..d).map(|j| 1.0 / (1.0 + j as f64).sqrt()).collect();
    (0..n).map(|_| scale.iter().map(|s| s * r.sample::<f64, _>(StandardNormal)).collect()).collect()
}

/// `n` pairs `(a_i, b_i)` with `a_i ~ N(0, I_d)` and
/// `b_i = W^T a_i + noise * e_i` for a random `W in St(d, r)`.
pub fn synthetic_regression_data(n: usize, d: usize, r: usize, noise: f64, seed: u64) -> Vec<(Vec<f64>, Vec<f64>)> {
    let mut g = rng::derive(seed, "regression_data");
    let w = match Manifold::stiefel(d, r) {
        Ok(m) => m.random_point_with(&mut g).into_matrix(),
        Err(_) => return Vec::new(),
    };
    (0..n)
        .map(|_| {
            let a: Vec<f64> = (0..d).map(|_| g.sample(StandardNormal)).collect();
            let b: Vec<f64> = (0..r)
                .map(|k| {
                    let clean: f64 = (0..d).map(|i| w[(i, k)] * a[i]).sum();
                    clean + noise * g.sample::<f64, _>(StandardNormal)
                })
                .collect();
            (a, b)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes_and_determinism() {
        let s = synthetic_dro_samples(10, 4, 3);
        assert_eq!(s.len(), 10);
        assert!(s.iter().all(|v| v.len() == 4));
        assert_eq!(s, synthetic_dro_samples(10, 4, 3));
        assert_ne!(s, synthetic_dro_samples(10, 4, 4));
        let d = synthetic_regression_data(5, 6, 2, 0.1, 1);
        assert_eq!(d.len(), 5);
        assert!(d.iter().all(|(a, b)| a.len() == 6 && b.len() == 2));
        assert!(synthetic_regression_data(5, 2, 3, 0.1, 1).is_empty());
    }
}
