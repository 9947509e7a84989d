use std::f64::consts::PI;

use meissner_core::exterior::*;
use meissner_core::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const L_MAX: usize = 8;

fn scale(p: [f64; 3], r: f64) -> [f64; 3] {
    p.map(|v| v * r)
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Normal and tangential parts of a vector field sampled on a sphere.
fn traces(q: &SphereQuadrature, r: f64, field: impl Fn([f64; 3]) -> [f64; 3]) -> (Vec<f64>, Vec<[f64; 3]>) {
    q.points
        .iter()
        .map(|p| {
            let u = field(scale(*p, r));
            let n = dot(u, *p);
            (n, [0, 1, 2].map(|i| u[i] - n * p[i]))
        })
        .unzip()
}

fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / lx.len() as f64;
    let my = ly.iter().sum::<f64>() / ly.len() as f64;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

#[test]
fn unit_flux_potential_is_the_point_source() {
    let v = SphericalHarmonicCoeffs::zeros(L_MAX, 1.0).unwrap();
    let sol = solve_exterior_scalar(&v, 1.0, 1.0).unwrap();
    for r in [1.0, 2.5, 7.0] {
        let x = scale([0.6, 0.0, 0.8], r);
        assert!((sol.value(x).unwrap() + 1.0 / (4.0 * PI * r)).abs() < 1e-15);
    }
    let q = SphereQuadrature::new(L_MAX);
    for r in [1.0, 3.0] {
        let (normal, _) = traces(&q, r, |x| sol.gradient(x).unwrap());
        let flux: f64 = normal.iter().zip(&q.weights).map(|(n, w)| n * w * r * r).sum();
        assert!((flux - 1.0).abs() < 1e-10, "flux {flux}");
    }
}

#[test]
fn first_mode_tangential_data_gives_the_dipole() {
    for m in -1..=1 {
        let v = SphericalHarmonicCoeffs::mode(L_MAX, 1.0, 1, m, Basis::GradS).unwrap();
        let sol = solve_exterior_scalar(&v, 0.0, 1.0).unwrap();
        assert_eq!(sol.coeffs.get(1, m, Basis::Y).unwrap(), 1.0);
        let x = [0.3, -1.1, 0.7];
        let r = dot(x, x).sqrt();
        let y = harmonics(x, 1)[lm_index(1, m)].v;
        assert!((sol.value(x).unwrap() - y / (r * r)).abs() < 1e-15);
    }
}

#[test]
fn tangential_trace_and_flux_are_reproduced() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let radius = 1.7;
    let mut v = SphericalHarmonicCoeffs::zeros(L_MAX, radius).unwrap();
    for (l, m) in lm_pairs(L_MAX).filter(|&(l, _)| l > 0) {
        v.set(l, m, Basis::GradS, rng.gen_range(-1.0..1.0)).unwrap();
    }
    let sol = solve_exterior_scalar(&v, 0.4, radius).unwrap();
    let q = SphereQuadrature::new(L_MAX);
    let (normal, tangential) = traces(&q, radius, |x| sol.gradient(x).unwrap());
    let (grad, cross) = q.analyze_tangential(&tangential);
    for k in 1..lm_count(L_MAX) {
        assert!((grad[k] - v.grad_s[k]).abs() < 1e-10);
        assert!(cross[k].abs() < 1e-10);
    }
    let flux: f64 = normal.iter().zip(&q.weights).map(|(n, w)| n * w * radius * radius).sum();
    assert!((flux - 0.4).abs() < 1e-10);
}

#[test]
fn zero_flux_solutions_decay_at_the_mode_rate() {
    let radii = [2.0, 4.0, 8.0, 16.0];
    for l in 1..=L_MAX {
        let v = SphericalHarmonicCoeffs::mode(L_MAX, 1.0, l, 0, Basis::GradS).unwrap();
        let sol = solve_exterior_scalar(&v, 0.0, 1.0).unwrap();
        let dir = [0.0, 0.6, 0.8];
        let phi: Vec<f64> = radii.iter().map(|r| sol.value(scale(dir, *r)).unwrap().abs()).collect();
        let grad: Vec<f64> = radii
            .iter()
            .map(|r| {
                let g = sol.gradient(scale(dir, *r)).unwrap();
                dot(g, g).sqrt()
            })
            .collect();
        assert!((loglog_slope(&radii, &phi) + (l + 1) as f64).abs() < 0.05);
        assert!(loglog_slope(&radii, &grad) <= -3.0 + 1e-9);
    }
}

#[test]
fn dtn_is_diagonal_with_the_mode_ratio() {
    let q = SphereQuadrature::new(L_MAX);
    for (l, m) in lm_pairs(L_MAX).filter(|&(l, _)| l > 0) {
        let v = SphericalHarmonicCoeffs::mode(L_MAX, 1.0, l, m, Basis::GradS).unwrap();
        let sigma = sigma_dtn(&v).unwrap();
        let sol = solve_exterior_scalar(&v, 0.0, 1.0).unwrap();
        let (normal, _) = traces(&q, 1.0, |x| sol.gradient(x).unwrap());
        let measured = q.analyze_scalar(&normal);
        let k = lm_index(l, m);
        assert!((measured[k] + (l + 1) as f64).abs() < 1e-10, "({l}, {m}): {}", measured[k]);
        assert!((sigma.y[k] - measured[k]).abs() < 1e-10);
        for (j, c) in measured.iter().enumerate() {
            if j != k {
                assert!(c.abs() < 1e-10);
            }
        }
        let mean: f64 = normal.iter().zip(&q.weights).map(|(n, w)| n * w).sum();
        assert!(mean.abs() < 1e-12);
    }
    let zero = sigma_dtn(&SphericalHarmonicCoeffs::zeros(L_MAX, 1.0).unwrap()).unwrap();
    assert!(zero.y.iter().all(|c| *c == 0.0));
}

#[test]
fn dtn_examples() {
    let v = SphericalHarmonicCoeffs::mode(L_MAX, 1.0, 1, 0, Basis::GradS).unwrap();
    assert_eq!(sigma_dtn(&v).unwrap().get(1, 0, Basis::Y).unwrap(), -2.0);
    let v = SphericalHarmonicCoeffs::mode(L_MAX, 1.0, 5, 3, Basis::GradS).unwrap();
    assert_eq!(sigma_dtn(&v).unwrap().get(5, 3, Basis::Y).unwrap(), -6.0);
    let bad = SphericalHarmonicCoeffs::mode(L_MAX, 1.0, 2, 1, Basis::Cross).unwrap();
    assert!(matches!(sigma_dtn(&bad), Err(Error::NonGradientData)));
    assert!(matches!(solve_exterior_scalar(&bad, 0.0, 1.0), Err(Error::NonGradientData)));
}

#[test]
fn gradient_with_prescribed_normal_trace() {
    let g = SphericalHarmonicCoeffs::mode(L_MAX, 1.0, 1, 0, Basis::Y).unwrap();
    let u = solve_exterior_gradient_normal(&g, 1.0).unwrap();
    assert_eq!(u.gradient_part.get(1, 0, Basis::Y).unwrap(), -0.5);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let radius = 2.0;
    let mut g = SphericalHarmonicCoeffs::zeros(L_MAX, radius).unwrap();
    for (l, m) in lm_pairs(L_MAX).filter(|&(l, _)| l > 0) {
        g.set(l, m, Basis::Y, rng.gen_range(-1.0..1.0)).unwrap();
    }
    let u = solve_exterior_gradient_normal(&g, radius).unwrap();
    let q = SphereQuadrature::new(L_MAX);
    let (normal, _) = traces(&q, radius, |x| u.value(x).unwrap());
    let measured = q.analyze_scalar(&normal);
    for k in 0..lm_count(L_MAX) {
        assert!((measured[k] - g.y[k]).abs() < 1e-10);
    }
    for p in q.points.iter().step_by(7) {
        let x = scale(*p, 2.5);
        let c = u.curl(x).unwrap();
        assert!(dot(c, c).sqrt() < 1e-10);
        assert!(u.divergence(x).unwrap().abs() < 1e-10);
    }
    let zero = solve_exterior_gradient_normal(&SphericalHarmonicCoeffs::zeros(L_MAX, 1.0).unwrap(), 1.0).unwrap();
    assert_eq!(zero.value([0.0, 0.0, 2.0]).unwrap(), [0.0; 3]);
    let mean = SphericalHarmonicCoeffs::mode(L_MAX, 1.0, 0, 0, Basis::Y).unwrap();
    assert!(matches!(solve_exterior_gradient_normal(&mean, 1.0), Err(Error::NonzeroMean(_))));
}

#[test]
fn curl_source_construction_satisfies_the_curl_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let radius = 1.3;
    let mut tangential = SphericalHarmonicCoeffs::zeros(L_MAX, radius).unwrap();
    for (l, m) in lm_pairs(L_MAX).filter(|&(l, _)| l > 0) {
        tangential.set(l, m, Basis::GradS, rng.gen_range(-1.0..1.0)).unwrap();
    }
    let phi0 = solve_exterior_scalar(&tangential, 0.0, radius).unwrap();
    let mut v_data = SphericalHarmonicCoeffs::zeros(L_MAX, radius).unwrap();
    for (l, m) in lm_pairs(L_MAX).filter(|&(l, _)| l > 0) {
        let c = phi0.coeffs.get(l, m, Basis::Y).unwrap();
        v_data.set(l, m, Basis::Cross, c / l as f64 * radius.powi(-(l as i32 + 1))).unwrap();
        v_data.set(l, m, Basis::GradS, rng.gen_range(-1.0..1.0)).unwrap();
    }
    let u = solve_exterior_curl_source(&phi0, &v_data, radius).unwrap();
    let q = SphereQuadrature::new(L_MAX);
    let mut worst = 0.0f64;
    for shell in [1.5, 2.0, 3.0] {
        for p in &q.points {
            let x = scale(*p, shell);
            let c = u.curl(x).unwrap();
            let g = phi0.gradient(x).unwrap();
            worst = worst.max((0..3).map(|i| (c[i] - g[i]).abs()).fold(0.0, f64::max));
            assert!(u.divergence(x).unwrap().abs() < 1e-10);
        }
    }
    assert!(worst <= 1e-10, "curl mismatch {worst}");
    let (normal, tan) = traces(&q, radius, |x| u.value(x).unwrap());
    let (grad, cross) = q.analyze_tangential(&tan);
    for k in 1..lm_count(L_MAX) {
        assert!((grad[k] - v_data.grad_s[k]).abs() < 1e-9);
        assert!((cross[k] - v_data.cross[k]).abs() < 1e-9);
    }
    assert!(normal.iter().all(|n| n.is_finite()));
}

#[test]
fn curl_source_examples_and_incompatibility() {
    let none = SphericalHarmonicCoeffs::zeros(L_MAX, 1.0).unwrap();
    let zero_phi = solve_exterior_scalar(&none, 0.0, 1.0).unwrap();
    let v = SphericalHarmonicCoeffs::mode(L_MAX, 1.0, 1, 0, Basis::GradS).unwrap();
    let u = solve_exterior_curl_source(&zero_phi, &v, 1.0).unwrap();
    assert_eq!(u.gradient_part.get(1, 0, Basis::Y).unwrap(), 1.0);
    assert!(u.toroidal_part.cross.iter().all(|c| *c == 0.0));

    let phi0 = solve_exterior_scalar(&v, 0.0, 1.0).unwrap();
    let compatible = SphericalHarmonicCoeffs::mode(L_MAX, 1.0, 1, 0, Basis::Cross).unwrap();
    let u = solve_exterior_curl_source(&phi0, &compatible, 1.0).unwrap();
    assert_eq!(u.toroidal_part.get(1, 0, Basis::Cross).unwrap(), 1.0);
    let mut flipped = compatible.clone();
    flipped.set(1, 0, Basis::Cross, -1.0).unwrap();
    match solve_exterior_curl_source(&phi0, &flipped, 1.0) {
        Err(Error::Incompatible { l: 1, m: 0, expected, got }) => {
            assert_eq!((expected, got), (1.0, -1.0));
        }
        other => panic!("expected Incompatible, got {other:?}"),
    }
    let with_flux = solve_exterior_scalar(&v, 0.5, 1.0).unwrap();
    assert!(matches!(solve_exterior_curl_source(&with_flux, &compatible, 1.0), Err(Error::NonzeroFlux(_))));
}

#[test]
fn decaying_gradients_are_fixed_by_trace_and_flux() {
    let q = SphereQuadrature::new(L_MAX);
    for (l, m) in lm_pairs(L_MAX) {
        let mut c = SphericalHarmonicCoeffs::zeros(L_MAX, 1.0).unwrap();
        c.set(l, m, Basis::Y, 1.0).unwrap();
        let phi = ExteriorScalarSolution { coeffs: c, flux: 0.0 };
        let (normal, tan) = traces(&q, 1.0, |x| phi.gradient(x).unwrap());
        let (grad, _) = q.analyze_tangential(&tan);
        let flux: f64 = normal.iter().zip(&q.weights).map(|(n, w)| n * w).sum();
        let trace = grad.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        assert!(trace > 0.5 || flux.abs() > 0.5, "mode ({l}, {m}) is invisible to trace and flux");
    }
}

#[test]
fn comparability_residual_examples() {
    let q = SphereQuadrature::new(L_MAX);
    let zero = SphericalHarmonicCoeffs::zeros(L_MAX, 1.0).unwrap();
    let a = TraceSamples::on_sphere(&zero, &q);
    assert_eq!(comparability_residual(&a, &a).unwrap(), 0.0);
    let cos_theta = TraceSamples { weights: q.weights.clone(), values: q.points.iter().map(|p| p[2]).collect() };
    let r = comparability_residual(&a, &cos_theta).unwrap();
    assert!((r - (4.0 * PI / 3.0).sqrt()).abs() < 1e-12);
    let short = TraceSamples { weights: vec![1.0], values: vec![0.0] };
    assert!(matches!(comparability_residual(&a, &short), Err(Error::SamplingMismatch(_))));
}

#[test]
fn coefficient_table_layout() {
    let mut c = SphericalHarmonicCoeffs::zeros(2, 1.0).unwrap();
    c.set(0, 0, Basis::Y, 0.5).unwrap();
    c.set(2, -1, Basis::Cross, -2.0).unwrap();
    let csv = c.to_csv();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "l,m,basis,value");
    assert!(lines[1].starts_with("0,0,Y,5.0"));
    assert!(lines[2].starts_with("2,-1,CROSS,-2.0"));
    assert!(c.set(0, 0, Basis::GradS, 1.0).is_err());
    assert!(c.set(3, 0, Basis::Y, 1.0).is_err());
    assert!(SphericalHarmonicCoeffs::zeros(2, 0.0).is_err());
}
