//! Scalar LitS measurements and synthetic corner/line neighborhoods.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circular_fn::StepFnS1;
use crate::error::{LitsError, Result};
use crate::lits2d::{self, LitSParams, Neighborhood2D, PolarNeighbor};

/// Per-point scalar summary of a LitS.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescriptorRecord {
    pub zero_set_length: f64,
    pub total_variation: f64,
    pub max_value: u32,
    pub unlit_proportion: f64,
    pub value_range: u32,
    pub log_range: f64,
    pub phi_star: Option<f64>,
    pub surroundedness_class: Option<u32>,
    /// Length of the arcs below an integer threshold, when one was requested.
    pub below_threshold: Option<f64>,
}

pub fn summarize(f: &StepFnS1) -> DescriptorRecord {
    let zero = f.zero_set_length();
    let range = f.max_value() - f.min_value();
    DescriptorRecord {
        zero_set_length: zero,
        total_variation: f.total_variation(),
        max_value: f.max_value(),
        unlit_proportion: zero / TAU,
        value_range: range,
        log_range: f64::from(range).ln_1p(),
        phi_star: None,
        surroundedness_class: None,
        below_threshold: None,
    }
}

/// Lower bound `max(0, 2π − α − 2ω_max)` on the zero-set length of a corner
/// of aperture `α`, where `ω_max` is the half width lit by a neighbor at
/// `r_Q`.
pub fn corner_zero_bound_at(alpha: f64, lambda: f64, phi: f64) -> f64 {
    let omega = lits2d::half_width(1.0, lambda, phi.min(PI));
    (TAU - alpha - 2.0 * omega).max(0.0)
}

/// Corner bound at the baseline angle: `max(0, 2π − α − 2·acos λ)`.
pub fn corner_zero_bound(alpha: f64, lambda: f64) -> f64 {
    (TAU - alpha - 2.0 * lambda.clamp(-1.0, 1.0).acos()).max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum AngularLaw {
    Uniform,
    /// Angles `θ + X` with `X ~ VonMises(mu, kappa)`.
    VonMises { mu: f64, kappa: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CornerSpec {
    pub alpha: f64,
    pub theta: f64,
    pub lambda: f64,
    pub n_points: usize,
    pub angular_law: AngularLaw,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CrossLaw {
    Uniform,
    Triangular,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineSpec {
    pub width: f64,
    pub direction: f64,
    pub n_points: usize,
    pub cross_law: CrossLaw,
}

/// Von Mises sample on `(−π, π]` about `mu` (Best–Fisher rejection from a
/// wrapped Cauchy envelope).
pub fn sample_von_mises<R: Rng + ?Sized>(rng: &mut R, mu: f64, kappa: f64) -> f64 {
    if kappa < 1e-8 {
        return mu + PI * (2.0 * rng.random::<f64>() - 1.0);
    }
    let tau = 1.0 + (1.0 + 4.0 * kappa * kappa).sqrt();
    let rho = (tau - (2.0 * tau).sqrt()) / (2.0 * kappa);
    let r = (1.0 + rho * rho) / (2.0 * rho);
    loop {
        let (u1, u2, u3): (f64, f64, f64) = (rng.random(), rng.random(), rng.random());
        let z = (PI * u1).cos();
        let f = (1.0 + r * z) / (r + z);
        let c = kappa * (r - f);
        if c * (2.0 - c) - u2 > 0.0 || (c / u2).ln() + 1.0 - c >= 0.0 {
            let t = f.clamp(-1.0, 1.0).acos();
            return mu + if u3 > 0.5 { t } else { -t };
        }
    }
}

/// Corner neighborhood with `r_Q = 1`: radii area-uniform on `[λ, 1]`, angles
/// uniform on `θ ± α/2` or von Mises about `θ + μ`.
pub fn generate_corner(spec: &CornerSpec, seed: u64) -> Result<Neighborhood2D> {
    if spec.n_points == 0 {
        return Err(LitsError::param("n_points", "must be at least 1"));
    }
    if !(0.0..=TAU).contains(&spec.alpha) {
        return Err(LitsError::param("alpha", "must lie in [0, 2π]"));
    }
    if !(0.0..=1.0).contains(&spec.lambda) {
        return Err(LitsError::param("lambda", "must lie in [0, 1]"));
    }
    if let AngularLaw::VonMises { kappa, .. } = spec.angular_law {
        if !(kappa >= 0.0) {
            return Err(LitsError::param("kappa", "must be non-negative"));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let l2 = spec.lambda * spec.lambda;
    let neighbors = (0..spec.n_points)
        .map(|_| {
            let r = (rng.random::<f64>() * (1.0 - l2) + l2).sqrt();
            let t = match spec.angular_law {
                AngularLaw::Uniform => spec.theta + (rng.random::<f64>() - 0.5) * spec.alpha,
                AngularLaw::VonMises { mu, kappa } => spec.theta + sample_von_mises(&mut rng, mu, kappa),
            };
            PolarNeighbor::new(r.max(f64::MIN_POSITIVE), t)
        })
        .collect();
    Neighborhood2D::from_polar(neighbors)
}

/// Line neighborhood inside the unit disk: points within distance `w` of the
/// axis through the center with direction `d`.
pub fn generate_line(spec: &LineSpec, seed: u64) -> Result<Neighborhood2D> {
    if spec.n_points == 0 {
        return Err(LitsError::param("n_points", "must be at least 1"));
    }
    if !(spec.width >= 0.0 && spec.width.is_finite()) {
        return Err(LitsError::param("width", "must be non-negative and finite"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut neighbors = Vec::with_capacity(spec.n_points);
    while neighbors.len() < spec.n_points {
        let x = 2.0 * rng.random::<f64>() - 1.0;
        let y = match spec.cross_law {
            CrossLaw::Uniform => spec.width * (2.0 * rng.random::<f64>() - 1.0),
            CrossLaw::Triangular => spec.width * (rng.random::<f64>() - rng.random::<f64>()),
        };
        let r2 = x * x + y * y;
        if r2 > 1.0 || r2 == 0.0 {
            continue;
        }
        neighbors.push(PolarNeighbor::new(r2.sqrt(), y.atan2(x) + spec.direction));
    }
    Neighborhood2D::from_polar(neighbors)
}

/// `(measured − bound)/measured` for the regular LitS of a generated corner,
/// or `None` when nothing is left dark.
pub fn relative_error_corner(spec: &CornerSpec, params: LitSParams, seed: u64) -> Result<Option<f64>> {
    let q = generate_corner(spec, seed)?;
    let measured = lits2d::lits(&q, params)?.zero_set_length();
    let bound = corner_zero_bound_at(spec.alpha, params.lambda, params.phi);
    Ok((measured > 0.0).then(|| (measured - bound) / measured))
}

/// Fraction of entries not exceeding each value (ranks `k/n`).
pub fn percentile_ranks(values: &[f64]) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(LitsError::param("values", "must be non-empty"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = values.len() as f64;
    Ok(values
        .iter()
        .map(|v| sorted.partition_point(|x| x <= v) as f64 / n)
        .collect())
}

/// Largest absolute finite-difference slope (per radian) of the smoothed
/// samples of `f`.
pub fn max_abs_slope(f: &StepFnS1, n_samples: usize, window: usize) -> Result<f64> {
    let s = f.sample_and_smooth(n_samples, window)?;
    let h = TAU / n_samples as f64;
    Ok((0..n_samples)
        .map(|k| (s[(k + 1) % n_samples] - s[k]).abs() / h)
        .fold(0.0, f64::max))
}

/// Swept parameter in the first column of a sweep table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    Alpha,
    Kappa,
    Width,
}

impl SweepKind {
    pub fn column(self) -> &'static str {
        match self {
            SweepKind::Alpha => "alpha",
            SweepKind::Kappa => "kappa",
            SweepKind::Width => "width",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub key: f64,
    pub lambda: f64,
    pub phi: f64,
    pub n: usize,
    pub zero_length: f64,
    pub bound: Option<f64>,
    pub eps: Option<f64>,
    pub tv: f64,
    pub max: u32,
    pub unlit: f64,
    /// Axial direction, for line sweeps.
    pub direction: Option<f64>,
}

// Distinct, reproducible seeds per grid cell.
fn cell_seed(seed: u64, cell: u64) -> u64 {
    seed ^ cell.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn measure(q: &Neighborhood2D, params: LitSParams) -> Result<(f64, StepFnS1)> {
    let zero = lits2d::lits(q, params)?.zero_set_length();
    Ok((zero, lits2d::cumulative_lits(q, params)?))
}

/// Uniform corners over `alphas × lambdas`.
pub fn corner_sweep(alphas: &[f64], lambdas: &[f64], phi: f64, n: usize, seed: u64) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::with_capacity(alphas.len() * lambdas.len());
    for (a, &alpha) in alphas.iter().enumerate() {
        for (l, &lambda) in lambdas.iter().enumerate() {
            let spec = CornerSpec {
                alpha,
                theta: 0.0,
                lambda,
                n_points: n,
                angular_law: AngularLaw::Uniform,
            };
            let params = LitSParams::new(lambda, phi)?;
            let q = generate_corner(&spec, cell_seed(seed, (a * lambdas.len() + l) as u64))?;
            let (zero, cumulative) = measure(&q, params)?;
            let bound = corner_zero_bound_at(alpha, lambda, phi);
            rows.push(SweepRow {
                key: alpha,
                lambda,
                phi,
                n,
                zero_length: zero,
                bound: Some(bound),
                eps: (zero > 0.0).then(|| (zero - bound) / zero),
                tv: cumulative.total_variation(),
                max: cumulative.max_value(),
                unlit: zero / TAU,
                direction: None,
            });
        }
    }
    Ok(rows)
}

/// Von Mises corners (location 0) over `kappas × lambdas`.
pub fn kappa_sweep(kappas: &[f64], lambdas: &[f64], phi: f64, n: usize, seed: u64) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::with_capacity(kappas.len() * lambdas.len());
    for (a, &kappa) in kappas.iter().enumerate() {
        for (l, &lambda) in lambdas.iter().enumerate() {
            let spec = CornerSpec {
                alpha: TAU,
                theta: 0.0,
                lambda,
                n_points: n,
                angular_law: AngularLaw::VonMises { mu: 0.0, kappa },
            };
            let params = LitSParams::new(lambda, phi)?;
            let q = generate_corner(&spec, cell_seed(seed, (a * lambdas.len() + l) as u64))?;
            let (zero, cumulative) = measure(&q, params)?;
            rows.push(SweepRow {
                key: kappa,
                lambda,
                phi,
                n,
                zero_length: zero,
                bound: None,
                eps: None,
                tv: cumulative.total_variation(),
                max: cumulative.max_value(),
                unlit: zero / TAU,
                direction: None,
            });
        }
    }
    Ok(rows)
}

/// Lines over `widths × directions` at a fixed ball ratio.
pub fn line_sweep(
    widths: &[f64],
    directions: &[f64],
    lambda: f64,
    phi: f64,
    n: usize,
    cross_law: CrossLaw,
    seed: u64,
) -> Result<Vec<SweepRow>> {
    let params = LitSParams::new(lambda, phi)?;
    let mut rows = Vec::with_capacity(widths.len() * directions.len());
    for (w, &width) in widths.iter().enumerate() {
        for (d, &direction) in directions.iter().enumerate() {
            let spec = LineSpec {
                width,
                direction,
                n_points: n,
                cross_law,
            };
            let q = generate_line(&spec, cell_seed(seed, (w * directions.len() + d) as u64))?;
            let (zero, cumulative) = measure(&q, params)?;
            rows.push(SweepRow {
                key: width,
                lambda,
                phi,
                n,
                zero_length: zero,
                bound: None,
                eps: None,
                tv: cumulative.total_variation(),
                max: cumulative.max_value(),
                unlit: zero / TAU,
                direction: Some(direction),
            });
        }
    }
    Ok(rows)
}

/// Default aperture grid of the corner experiment.
pub fn default_apertures() -> Vec<f64> {
    vec![PI / 4.0, FRAC_PI_2, 3.0 * PI / 4.0, PI]
}

/// Default ball-ratio grid `0.2, 0.4, 0.6, 0.8`.
pub fn default_lambdas() -> Vec<f64> {
    vec![0.2, 0.4, 0.6, 0.8]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circular_fn::{indicator_of_union, AngularInterval, Angle};

    #[test]
    fn bound_examples() {
        assert!((corner_zero_bound(FRAC_PI_2, 0.5) - 5.0 * PI / 6.0).abs() < 1e-12);
        assert!((corner_zero_bound(1.0, 0.0) - (PI - 1.0)).abs() < 1e-12);
        assert!((corner_zero_bound(1.0, 1.0) - (TAU - 1.0)).abs() < 1e-12);
        assert_eq!(corner_zero_bound(TAU, 0.1), 0.0);
        for (a, l) in [(0.3, 0.2), (2.0, 0.7)] {
            assert!((corner_zero_bound_at(a, l, FRAC_PI_2) - corner_zero_bound(a, l)).abs() < 1e-12);
        }
    }

    #[test]
    fn summary_examples() {
        let z = summarize(&StepFnS1::zero());
        assert_eq!((z.zero_set_length, z.total_variation, z.unlit_proportion), (TAU, 0.0, 1.0));
        let h = summarize(&indicator_of_union(&[AngularInterval::open(0.0, PI)]));
        assert!((h.zero_set_length - PI).abs() < 1e-12);
        assert_eq!(h.total_variation, 2.0);
        assert!((h.unlit_proportion - 0.5).abs() < 1e-12);
        assert_eq!((h.max_value, h.value_range), (1, 1));
        assert!((h.log_range - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn corner_generation() {
        let spec = CornerSpec {
            alpha: 0.0,
            theta: 1.0,
            lambda: 0.3,
            n_points: 50,
            angular_law: AngularLaw::Uniform,
        };
        let q = generate_corner(&spec, 1).unwrap();
        assert!(q.neighbors.iter().all(|n| n.theta.distance(Angle::new(1.0)) < 1e-15));
        assert!(q.neighbors.iter().all(|n| n.r >= 0.3 - 1e-15 && n.r <= 1.0));
        assert_eq!(generate_corner(&spec, 1).unwrap(), q);
        assert_ne!(generate_corner(&spec, 2).unwrap(), q);
    }

    #[test]
    fn uniform_corner_range_approaches_aperture() {
        let alpha = 1.3;
        let spec = CornerSpec {
            alpha,
            theta: 0.0,
            lambda: 0.2,
            n_points: 10_000,
            angular_law: AngularLaw::Uniform,
        };
        let q = generate_corner(&spec, 7).unwrap();
        let signed: Vec<f64> = q.neighbors.iter().map(|n| Angle::ZERO.signed_to(n.theta)).collect();
        let lo = signed.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = signed.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        assert!(hi - lo <= alpha);
        assert!(alpha - (hi - lo) < 20.0 * alpha / 10_000.0);
    }

    #[test]
    fn flat_von_mises_is_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut bins = [0usize; 8];
        for _ in 0..80_000 {
            let t = Angle::new(sample_von_mises(&mut rng, 0.0, 0.0)).radians();
            bins[(t / TAU * 8.0) as usize] += 1;
        }
        assert!(bins.iter().all(|b| (*b as f64 - 10_000.0).abs() < 500.0), "{bins:?}");
    }

    #[test]
    fn von_mises_concentration() {
        // E[cos X] = I1(κ)/I0(κ), Bessel functions by power series
        let bessel = |nu: i32, x: f64| {
            (0..60)
                .map(|k| {
                    let lg = |n: usize| (1..=n).map(|i| (i as f64).ln()).sum::<f64>();
                    ((2 * k + nu as usize) as f64 * (x / 2.0).ln() - lg(k) - lg(k + nu as usize)).exp()
                })
                .sum::<f64>()
        };
        let expected = bessel(1, 4.0) / bessel(0, 4.0);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let n = 100_000;
        let mean: f64 = (0..n).map(|_| sample_von_mises(&mut rng, 0.0, 4.0).cos()).sum::<f64>() / n as f64;
        assert!((mean - expected).abs() < 5e-3, "{mean} vs {expected}");
    }

    #[test]
    fn line_generation() {
        let spec = LineSpec {
            width: 0.0,
            direction: 0.5,
            n_points: 100,
            cross_law: CrossLaw::Uniform,
        };
        let q = generate_line(&spec, 3).unwrap();
        assert!(q.neighbors.iter().all(|n| {
            let d = n.theta.distance(Angle::new(0.5));
            d < 1e-12 || (d - PI).abs() < 1e-12
        }));
        let wide = LineSpec {
            width: 0.2,
            cross_law: CrossLaw::Triangular,
            ..spec
        };
        let q = generate_line(&wide, 3).unwrap();
        for n in &q.neighbors {
            let off = n.r * (n.theta.radians() - 0.5).sin();
            assert!(off.abs() <= 0.2 + 1e-12);
            assert!(n.r <= 1.0);
        }
    }

    #[test]
    fn line_lits_peaks_follow_axis() {
        let spec = LineSpec {
            width: 0.1,
            direction: 0.4,
            n_points: 400,
            cross_law: CrossLaw::Uniform,
        };
        let q = generate_line(&spec, 5).unwrap();
        let params = LitSParams::new(0.4, FRAC_PI_2).unwrap();
        let f = lits2d::cumulative_lits(&q, params).unwrap();
        let samples = f.sample_and_smooth(360, 15).unwrap();
        let argmax = |range: std::ops::Range<usize>| range.max_by(|a, b| samples[*a].total_cmp(&samples[*b])).unwrap();
        let argmin = |range: std::ops::Range<usize>| range.min_by(|a, b| samples[*a].total_cmp(&samples[*b])).unwrap();
        let deg = |k: usize| Angle::new(k as f64 * TAU / 360.0);
        // two peaks along ±d and two valleys a quarter turn away
        let p1 = argmax(0..180);
        let p2 = argmax(180..360);
        let v1 = argmin(0..180);
        let v2 = argmin(180..360);
        for (p, target) in [(p1, 0.4), (p2, 0.4 + PI)] {
            assert!(deg(p).distance(Angle::new(target)) < 0.2, "peak at {p}");
        }
        for (v, target) in [(v1, 0.4 + FRAC_PI_2), (v2, 0.4 + 1.5 * PI)] {
            assert!(deg(v).distance(Angle::new(target)) < 0.3, "valley at {v}");
        }
        // w < r_p splits the lit set into two arcs
        assert_eq!(lits2d::lits(&q, params).unwrap().sublevel_intervals(1).len(), 2);
    }

    #[test]
    fn percentile_examples() {
        assert_eq!(percentile_ranks(&[5.0]).unwrap(), vec![1.0]);
        assert_eq!(percentile_ranks(&[1.0, 2.0, 3.0, 4.0]).unwrap(), vec![0.25, 0.5, 0.75, 1.0]);
        assert_eq!(percentile_ranks(&[2.0; 3]).unwrap(), vec![1.0; 3]);
        assert_eq!(percentile_ranks(&[3.0, 1.0, 3.0]).unwrap(), vec![1.0, 1.0 / 3.0, 1.0]);
        assert!(percentile_ranks(&[]).is_err());
    }

    #[test]
    fn relative_error_of_dense_corner_is_small() {
        let spec = CornerSpec {
            alpha: PI / 4.0,
            theta: 0.0,
            lambda: 0.2,
            n_points: 10_000,
            angular_law: AngularLaw::Uniform,
        };
        let eps = relative_error_corner(&spec, LitSParams::new(0.2, FRAC_PI_2).unwrap(), 1)
            .unwrap()
            .unwrap();
        assert!((0.0..0.01).contains(&eps), "{eps}");
    }

    #[test]
    fn sweeps_have_full_grids() {
        let rows = corner_sweep(&default_apertures(), &default_lambdas(), FRAC_PI_2, 200, 1).unwrap();
        assert_eq!(rows.len(), 16);
        assert!(rows.iter().all(|r| r.zero_length >= r.bound.unwrap() - 1e-9));
        let lines: Vec<f64> = (0..6).map(|i| i as f64 * PI / 6.0).collect();
        let rows = line_sweep(&[0.1, 0.2, 0.4, 0.6], &lines, 0.5, FRAC_PI_2, 200, CrossLaw::Uniform, 1).unwrap();
        assert_eq!(rows.len(), 24);
    }
}
