//! Test oracles that recompute everything from raw coordinates, without the
//! library's ball or operator code.

#![allow(dead_code)]

use avgop::space::MetricMeasureSpace;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct RawSpace {
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl RawSpace {
    pub fn random(rng: &mut ChaCha8Rng, max_n: usize) -> Self {
        let n = rng.gen_range(1..=max_n);
        let dim = rng.gen_range(1..=3);
        let spread = rng.gen_range(0.5..20.0);
        let lattice = rng.gen_bool(0.3);
        let points = (0..n)
            .map(|_| {
                (0..dim)
                    .map(|_| {
                        let v: f64 = rng.gen_range(0.0..spread);
                        if lattice {
                            v.round()
                        } else {
                            v
                        }
                    })
                    .collect()
            })
            .collect();
        let weights = (0..n).map(|_| rng.gen_range(0.05..3.0)).collect();
        Self { points, weights }
    }

    pub fn line(n: usize, spacing: f64, weight: f64) -> Self {
        Self {
            points: (0..n).map(|i| vec![i as f64 * spacing]).collect(),
            weights: vec![weight; n],
        }
    }

    pub fn space(&self) -> MetricMeasureSpace {
        MetricMeasureSpace::from_points(self.points.clone(), Some(self.weights.clone())).unwrap()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.points[i]
            .iter()
            .zip(&self.points[j])
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub fn in_ball(&self, center: usize, j: usize, r: f64) -> bool {
        self.dist(center, j) <= r + 1e-12 * (1.0 + r)
    }

    pub fn ball_mass(&self, center: usize, r: f64) -> f64 {
        (0..self.len())
            .filter(|&j| self.in_ball(center, j, r))
            .map(|j| self.weights[j])
            .sum()
    }

    /// Dense `n x n` matrix of `A_r`.
    pub fn dense_operator(&self, r: f64) -> Vec<Vec<f64>> {
        (0..self.len())
            .map(|i| {
                let mass = self.ball_mass(i, r);
                (0..self.len())
                    .map(|j| if self.in_ball(i, j, r) { self.weights[j] / mass } else { 0.0 })
                    .collect()
            })
            .collect()
    }

    pub fn norm(&self, f: &[f64], p: f64) -> f64 {
        if p.is_infinite() {
            f.iter().fold(0.0, |m, v| m.max(v.abs()))
        } else {
            f.iter()
                .zip(&self.weights)
                .map(|(v, w)| w * v.abs().powf(p))
                .sum::<f64>()
                .powf(1.0 / p)
        }
    }
}

pub fn dense_apply(m: &[Vec<f64>], f: &[f64]) -> Vec<f64> {
    m.iter()
        .map(|row| row.iter().zip(f).map(|(a, b)| a * b).sum())
        .collect()
}

pub fn random_function(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
