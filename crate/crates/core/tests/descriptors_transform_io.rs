mod common;

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, PI, TAU};

use lits::descriptors::{
    corner_zero_bound, default_apertures, default_lambdas, generate_corner, generate_line, max_abs_slope, AngularLaw,
    CornerSpec, CrossLaw, LineSpec,
};
use lits::lits2d;
use lits::pcio::{self, Colormap, PointCloud};
use lits::transform3d::{
    caps_of, caps_of_neighborhood, invert_cumulative, two_d_counterexample_seeded, SphericalCap,
};
use lits::{FrameNeighbor, LitSParams, LitsError, Neighborhood3D, EPS_ANGLE};
use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn corner(alpha: f64, lambda: f64, n: usize) -> CornerSpec {
    CornerSpec {
        alpha,
        theta: 0.3,
        lambda,
        n_points: n,
        angular_law: AngularLaw::Uniform,
    }
}

#[test]
fn corner_zero_sets_respect_the_bound() {
    let mut seed = 0;
    for alpha in default_apertures() {
        for lambda in default_lambdas() {
            let params = LitSParams::new(lambda, FRAC_PI_2).unwrap();
            for _ in 0..100 {
                seed += 1;
                let q = generate_corner(&corner(alpha, lambda, 300), seed).unwrap();
                let f = lits2d::lits(&q, params).unwrap();
                assert!(f.zero_set_length() >= corner_zero_bound(alpha, lambda) - EPS_ANGLE);
                if alpha < PI {
                    assert_eq!(f.sublevel_intervals(1).len(), 1, "α={alpha} λ={lambda}");
                }
            }
        }
    }
}

// Average ranks, ties sharing their mean rank.
fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut out = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        for &k in &idx[i..=j] {
            out[k] = (i + j) as f64 / 2.0 + 1.0;
        }
        i = j + 1;
    }
    out
}

fn spearman(x: &[f64], y: &[f64]) -> f64 {
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

#[test]
fn max_slope_falls_with_aperture() {
    let (mut apertures, mut slopes) = (Vec::new(), Vec::new());
    for (k, alpha) in default_apertures().into_iter().enumerate() {
        for (l, lambda) in default_lambdas().into_iter().enumerate() {
            let q = generate_corner(&corner(alpha, lambda, 2000), (k * 10 + l) as u64).unwrap();
            let f = lits2d::cumulative_lits(&q, LitSParams::new(lambda, FRAC_PI_2).unwrap()).unwrap();
            apertures.push(alpha);
            slopes.push(max_abs_slope(&f, 720, 5).unwrap());
        }
    }
    assert!(spearman(&apertures, &slopes) < 0.0);
}

#[test]
fn thin_lines_split_the_circle_in_two() {
    let params = LitSParams::new(0.5, FRAC_PI_2).unwrap();
    for seed in 0..20 {
        let spec = LineSpec {
            width: 0.1,
            direction: seed as f64 * PI / 6.0,
            n_points: 1000,
            cross_law: CrossLaw::Uniform,
        };
        let f = lits2d::lits(&generate_line(&spec, seed).unwrap(), params).unwrap();
        assert_eq!(f.sublevel_intervals(1).len(), 2);
    }
    let wide = LineSpec {
        width: 4.0,
        direction: 0.0,
        n_points: 2000,
        cross_law: CrossLaw::Uniform,
    };
    let f = lits2d::lits(&generate_line(&wide, 1).unwrap(), LitSParams::new(0.2, FRAC_PI_2).unwrap()).unwrap();
    assert!(f.sublevel_intervals(1).is_empty());
}

fn offset_key(v: &Vector3<f64>) -> (f64, f64, f64) {
    (v.x, v.y, v.z)
}

#[test]
fn cap_lists_recover_neighborhoods() {
    let mut rng = ChaCha8Rng::seed_from_u64(81);
    for phi in [FRAC_PI_3, FRAC_PI_2, 2.0 * FRAC_PI_3] {
        for _ in 0..100 {
            let n = rng.random_range(1..=20);
            let r_p = 1.0;
            let offsets: Vec<Vector3<f64>> = (0..n)
                .map(|_| {
                    let z: f64 = rng.random_range(-1.0..1.0);
                    let t = rng.random_range(0.0..TAU);
                    let s = (1.0 - z * z).sqrt();
                    Vector3::new(s * t.cos(), s * t.sin(), z) * rng.random_range(r_p * (1.0 + 1e-6)..=5.0 * r_p)
                })
                .collect();
            let back = invert_cumulative(&caps_of(&offsets, r_p, phi).unwrap(), r_p, phi).unwrap();
            let mut a: Vec<_> = offsets.iter().map(offset_key).collect();
            let mut b: Vec<_> = back.iter().map(offset_key).collect();
            a.sort_by(|x, y| x.partial_cmp(y).unwrap());
            b.sort_by(|x, y| x.partial_cmp(y).unwrap());
            for (x, y) in a.iter().zip(&b) {
                assert!((x.0 - y.0).abs() < 1e-8 && (x.1 - y.1).abs() < 1e-8 && (x.2 - y.2).abs() < 1e-8);
            }
        }
    }
}

#[test]
fn neighborhood_caps_skip_the_ball_and_refuse_degenerate_angles() {
    let q = Neighborhood3D::from_frame_neighbors(vec![FrameNeighbor::new(0.1, 0.0, 0.0), FrameNeighbor::new(0.0, 2.0, 0.0)]).unwrap();
    let caps = caps_of_neighborhood(&q, 0.5, FRAC_PI_4).unwrap();
    assert_eq!(caps.len(), 1);
    let full = SphericalCap { half_angle: PI, ..caps[0] };
    assert!(matches!(invert_cumulative(&[full], 1.0, PI), Err(LitsError::NotInvertible { .. })));
}

#[test]
fn planar_counterexamples_collide() {
    for seed in 0..100 {
        let phi = 0.2 + (seed as f64 / 100.0) * 2.8;
        let c = two_d_counterexample_seeded(phi, seed).unwrap();
        let f = lits2d::cumulative_lits_with_radius(&c.first, c.r_p, c.phi).unwrap();
        let g = lits2d::cumulative_lits_with_radius(&c.second, c.r_p, c.phi).unwrap();
        assert!(f.approx_eq(&g, 1e-12));
        let (a, b) = (c.first.positions(), c.second.positions());
        assert!(a.iter().all(|p| b.iter().all(|q| (p - q).norm() > 1e-9)));
    }
}

#[test]
fn files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(91);
    let pts: Vec<Vector3<f64>> = (0..200)
        .map(|_| Vector3::new(rng.random(), rng.random(), rng.random::<f64>() * 1e-7))
        .collect();
    let mut cloud = PointCloud::new(3, pts).unwrap();
    cloud.set_attribute("value", (0..200).map(|i| (i as f64).sqrt()).collect()).unwrap();

    let ply = dir.path().join("cloud.ply");
    pcio::write_ply(&cloud, &ply).unwrap();
    assert_eq!(pcio::read_ply(&ply).unwrap(), cloud);

    let xyz = dir.path().join("cloud.xyz");
    let text: String = cloud.positions.iter().map(|p| format!("{:e} {:e} {:e}\n", p.x, p.y, p.z)).collect();
    std::fs::write(&xyz, text).unwrap();
    assert_eq!(pcio::read_cloud(&xyz).unwrap().positions, cloud.positions);

    let colored = dir.path().join("colored.ply");
    pcio::write_ply_colored(&cloud, "value", Colormap::Coolwarm, &colored).unwrap();
    let back = pcio::read_ply(&colored).unwrap();
    assert_eq!(back.positions, cloud.positions);
    assert_eq!(back.attribute("red").unwrap()[0], f64::from(Colormap::Coolwarm.table()[0][0]));
    assert!(pcio::read_ply(dir.path().join("missing.ply")).is_err());
}
