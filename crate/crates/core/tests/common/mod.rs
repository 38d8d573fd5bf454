#![allow(dead_code)]

use std::f64::consts::TAU;

use lits::{Neighborhood2D, PolarNeighbor};
use nalgebra::{Vector2, Vector3};
use rand::Rng;

/// `n` points uniform in the unit disk around `center`.
pub fn disk_points<R: Rng>(rng: &mut R, center: Vector2<f64>, n: usize) -> Vec<Vector2<f64>> {
    (0..n)
        .map(|_| {
            let r = rng.random::<f64>().sqrt();
            let t = rng.random_range(0.0..TAU);
            center + r * Vector2::new(t.cos(), t.sin())
        })
        .collect()
}

pub fn random_neighborhood<R: Rng>(rng: &mut R, max_n: usize) -> Neighborhood2D {
    let n = rng.random_range(1..=max_n);
    let neighbors = (0..n)
        .map(|_| PolarNeighbor::new(rng.random_range(0.05..1.0), rng.random_range(0.0..TAU)))
        .collect();
    Neighborhood2D::from_polar(neighbors).unwrap()
}

pub fn ball_points<R: Rng>(rng: &mut R, n: usize) -> Vec<Vector3<f64>> {
    (0..n)
        .map(|_| loop {
            let v = Vector3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            if v.norm() <= 1.0 && v.norm() > 0.05 {
                break v;
            }
        })
        .collect()
}

/// Whether `t` lies within `tol` of any breakpoint of the intervals.
pub fn near_any(t: f64, points: &[f64], tol: f64) -> bool {
    points.iter().any(|&b| {
        let d = (t - b).rem_euclid(TAU);
        d.min(TAU - d) < tol
    })
}
