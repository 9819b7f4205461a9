use std::cmp::Ordering;

use crate::autodiff::Tensor;
use crate::error::{Error, Result};

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn mean_pair_dist(x: &Tensor, y: &Tensor) -> f64 {
    let mut total = 0.0;
    for i in 0..x.rows() {
        let xi = x.row(i);
        let mut row = 0.0;
        for j in 0..y.rows() {
            row += dist(xi, y.row(j));
        }
        total += row;
    }
    total / (x.rows() * y.rows()) as f64
}

fn canonical_order(x: &Tensor, y: &Tensor) -> Ordering {
    x.shape().cmp(y.shape()).then_with(|| {
        x.values()
            .iter()
            .zip(y.values())
            .map(|(a, b)| a.total_cmp(b))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    })
}

/// Energy distance `2E‖X−Y‖ − E‖X−X'‖ − E‖Y−Y'‖`, with every expectation
/// taken over all ordered pairs (diagonal included).
///
/// Symmetric bit-for-bit: the arguments are put in a canonical order before
/// the cross term is summed.
pub fn energy_distance(x: &Tensor, y: &Tensor) -> Result<f64> {
    if x.shape().len() != 2 || y.shape().len() != 2 || x.cols() != y.cols() {
        return Err(Error::shape("energy_distance", format!("{:?} vs {:?}", x.shape(), y.shape())));
    }
    if x.rows() < 2 || y.rows() < 2 {
        return Err(Error::Contract("energy distance needs at least two samples per side".into()));
    }
    let (a, b) = if canonical_order(x, y) == Ordering::Greater {
        (y, x)
    } else {
        (x, y)
    };
    let cross = mean_pair_dist(a, b);
    let within = mean_pair_dist(a, a) + mean_pair_dist(b, b);
    Ok(2.0 * cross - within)
}

/// Number of `centers` that have at least 1% of the samples within
/// `radius`.
pub fn mode_coverage(samples: &Tensor, centers: &[Vec<f64>], radius: f64) -> Result<usize> {
    if !(radius > 0.0) {
        return Err(Error::Contract(format!("radius {radius} must be positive")));
    }
    if centers.iter().any(|c| c.len() != samples.cols()) {
        return Err(Error::shape("mode_coverage", "center dimension differs from samples"));
    }
    let n = samples.rows();
    let covered = centers
        .iter()
        .filter(|c| {
            let hits = (0..n).filter(|&i| dist(samples.row(i), c) <= radius).count();
            hits as f64 >= 0.01 * n as f64
        })
        .count();
    Ok(covered)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::toy::ring8_centers;
    use crate::rng::{gaussian_matrix, seeded};
    use proptest::prelude::*;

    #[test]
    fn identical_inputs_give_zero() {
        let x = gaussian_matrix(&mut seeded(1, 0), 50, 3);
        assert!(energy_distance(&x, &x).unwrap().abs() < 1e-9);
    }

    #[test]
    fn point_masses() {
        let d = 3.0;
        let x = Tensor::from_rows(&[vec![0.0, 0.0], vec![0.0, 0.0]]).unwrap();
        let y = Tensor::from_rows(&[vec![d, 0.0], vec![d, 0.0], vec![d, 0.0]]).unwrap();
        assert!((energy_distance(&x, &y).unwrap() - 2.0 * d).abs() < 1e-12);
    }

    #[test]
    fn too_few_samples() {
        let x = Tensor::from_rows(&[vec![0.0]]).unwrap();
        let y = Tensor::from_rows(&[vec![1.0], vec![2.0]]).unwrap();
        assert!(energy_distance(&x, &y).is_err());
    }

    proptest! {
        #[test]
        fn symmetric_and_nonnegative(seed in 0u64..1000, n in 2usize..20, n2 in 2usize..20, shift in -2.0f64..2.0) {
            let x = gaussian_matrix(&mut seeded(seed, 0), n, 2);
            let mut y = gaussian_matrix(&mut seeded(seed, 1), n2, 2);
            y.values_mut().iter_mut().for_each(|v| *v += shift);
            let a = energy_distance(&x, &y).unwrap();
            let b = energy_distance(&y, &x).unwrap();
            prop_assert_eq!(a.to_bits(), b.to_bits());
            prop_assert!(a >= -1e-9);
        }
    }

    #[test]
    fn coverage_examples() {
        let centers = ring8_centers();
        let at_centers = Tensor::from_rows(&centers).unwrap();
        assert_eq!(mode_coverage(&at_centers, &centers, 0.15).unwrap(), 8);
        let one = Tensor::from_rows(&vec![centers[3].clone(); 40]).unwrap();
        assert_eq!(mode_coverage(&one, &centers, 0.15).unwrap(), 1);
        assert!(mode_coverage(&one, &centers, 0.0).is_err());
    }

    #[test]
    fn coverage_of_uniform_ring() {
        use rand::Rng;
        let mut rng = seeded(3, 0);
        let rows: Vec<Vec<f64>> = (0..2000)
            .map(|_| {
                let a: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                vec![a.cos(), a.sin()]
            })
            .collect();
        let x = Tensor::from_rows(&rows).unwrap();
        assert_eq!(mode_coverage(&x, &ring8_centers(), 0.15).unwrap(), 8);
    }
}
