use meissner_core::constitutive::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn cubic_residual_on_random_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..1000 {
        let t = rng.gen_range(0.0..=T_MAX);
        let v = invert_cubic(t).unwrap();
        assert!(((1.0 - v * v) * v - t).abs() <= 1e-12);
        assert!((0.0..=V_MAX).contains(&v));
    }
}

#[test]
fn f_is_nondecreasing() {
    let mut prev = f_of(0.0).unwrap();
    assert_eq!(prev, 1.0);
    for k in 1..=1000 {
        let s = S_MAX * k as f64 / 1000.0;
        let v = f_of(s).unwrap();
        assert!(v - prev >= -1e-12);
        assert!((1.0..=1.5 + 1e-12).contains(&v));
        prev = v;
    }
    assert!((prev - 1.5).abs() < 1e-9);
}

fn vec3() -> impl Strategy<Value = [f64; 3]> {
    [-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64]
}

fn along(f: f64, a: [f64; 3], g: f64, b: [f64; 3], t: f64) -> f64 {
    g_density(f + t * g, &[a[0] + t * b[0], a[1] + t * b[1], a[2] + t * b[2]])
}

proptest! {
    #[test]
    fn second_variation_matches_differences(f in -1.5..1.5f64, a in vec3(), g in -1.0..1.0f64, b in vec3()) {
        let h = 1e-4;
        let fd = (along(f, a, g, b, h) - 2.0 * along(f, a, g, b, 0.0) + along(f, a, g, b, -h)) / (h * h);
        let exact = second_variation_form(f, &a, g, &b);
        prop_assert!((fd - exact).abs() <= 1e-6 * exact.abs().max(1.0));
    }

    #[test]
    fn gradient_matches_differences(f in -1.5..1.5f64, a in vec3()) {
        let (_, gf, ga) = g_density_and_grad(f, &a);
        let h = 1e-6;
        let dfd = (g_density(f + h, &a) - g_density(f - h, &a)) / (2.0 * h);
        prop_assert!((dfd - gf).abs() <= 1e-6);
        for k in 0..3 {
            let mut ap = a;
            let mut am = a;
            ap[k] += h;
            am[k] -= h;
            let d = (g_density(f, &ap) - g_density(f, &am)) / (2.0 * h);
            prop_assert!((d - ga[k]).abs() <= 1e-6);
        }
    }

    #[test]
    fn second_variation_positive_on_k_delta(f in 0.6..1.5f64, a in vec3(), g in -1.0..1.0f64, b in vec3(), delta in 0.01..0.3f64) {
        let m = ConvexityMargin::from_samples(&[f], &[dot(&a, &a)], delta);
        prop_assume!(m.in_k_delta());
        prop_assert!(second_variation_form(f, &a, g, &b) >= 6.0 * delta * g * g - 1e-12);
    }

    #[test]
    fn k_delta_is_convex(a0 in vec3(), r0 in 0.0..1.0f64, a1 in vec3(), r1 in 0.0..1.0f64, delta in 0.0..0.3f64) {
        let f0 = (dot(&a0, &a0) + 1.0 / 3.0 + delta + r0).sqrt();
        let f1 = (dot(&a1, &a1) + 1.0 / 3.0 + delta + r1).sqrt();
        for t in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let f = (1.0 - t) * f0 + t * f1;
            let a = [0, 1, 2].map(|k| (1.0 - t) * a0[k] + t * a1[k]);
            prop_assert!(pointwise_margin(f, dot(&a, &a)) >= delta - 1e-12);
        }
    }

    #[test]
    fn cubic_inverse_round_trip(v in 0.0..V_MAX) {
        let t = (1.0 - v * v) * v;
        prop_assert!((invert_cubic(t).unwrap() - v).abs() <= 1e-7);
    }
}
