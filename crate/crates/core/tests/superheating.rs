use meissner_core::constitutive::{GLParameters, Kappa};
use meissner_core::discrete::*;
use meissner_core::interior::*;
use meissner_core::oned::superheating_closed_form;
use meissner_core::superheating::*;
use meissner_core::Error;

const S_MAX_ROOT: f64 = 0.384_900_179_459_750_5;

fn slab(n: usize, length: f64) -> StaggeredGrid {
    build_grid(&GridSpec::slab(n, length)).unwrap()
}

fn limit_run(lambda: f64, n: usize, length: f64) -> SuperheatingResult {
    let g = slab(n, length);
    let data = BoundaryData::one_sided(g, 1.0).unwrap();
    continue_mu(System::Limit, lambda, Kappa::INFINITY, &data, &ContinuationSchedule::default(), &g).unwrap()
}

#[test]
fn limiting_threshold_is_the_half_space_value() {
    let r = limit_run(0.02, 600, 0.3);
    let s = ContinuationSchedule::default();
    assert!((r.mu_star - superheating_closed_form()).abs() <= 1e-3, "mu* = {}", r.mu_star);
    assert!(r.bracket.0 <= r.mu_star && r.mu_star <= r.bracket.1);
    assert!(r.bracket.1 - r.bracket.0 <= s.mu_tol);
    assert!(r.last_report.margin.abs() <= 2.0 * s.margin_tol);
    assert!(r.mu_star <= r.upper_bound);
    for p in &r.margin_trajectory {
        assert!(p.curl_bound <= S_MAX_ROOT + 1e-6, "curl bound {} at mu {}", p.curl_bound, p.mu);
        if p.mu < r.mu_star - s.mu_tol {
            assert!(p.margin > 0.0);
        }
    }
}

#[test]
fn full_threshold_sits_on_the_convexity_boundary() {
    let g = slab(400, 1.5);
    let data = BoundaryData::one_sided(g, 1.0).unwrap();
    let r = continue_mu(System::Full, 0.1, Kappa::Finite(50.0), &data, &ContinuationSchedule::default(), &g).unwrap();
    assert!(r.last_report.margin.abs() <= 5e-3, "margin {}", r.last_report.margin);
    assert!(r.mu_star <= r.upper_bound);
    let nf = r.newton_failure_mu.expect("Newton eventually fails");
    assert!(nf >= r.bracket.1);
    let csv = r.to_csv();
    assert!(csv.starts_with("mu,margin,curl_bound,energy,iterations\n"));
    assert_eq!(csv.lines().count(), r.margin_trajectory.len() + 1);
}

#[test]
fn both_limiting_detectors_agree() {
    let lambda = 0.05;
    let g = slab(300, 0.5);
    let base = BoundaryData::one_sided(g, 1.0).unwrap();
    let s = ContinuationSchedule::default();
    let r = continue_mu(System::Limit, lambda, Kappa::INFINITY, &base, &s, &g).unwrap();
    // On the limiting branch the margin is 2/3 − 2‖A‖², so the margin
    // tolerance corresponds to this sup-norm of the potential.
    let a_tol = ((2.0 / 3.0 - s.margin_tol) / 2.0).sqrt();
    let interp = NodeInterp::new(&g);
    let sup_a = |mu: f64| -> Option<f64> {
        let params = GLParameters::limit(lambda, mu).unwrap();
        let (st, _) = solve_limit_h(&params, &base.scaled(mu), &g, None, &SolveOptions::default()).ok()?;
        let a = recover_a(&st).unwrap().a;
        Some(interp.squared_norm(&a.flatten()).into_iter().fold(0.0f64, f64::max).sqrt())
    };
    let (mut lo, mut hi) = (r.bracket.0 - 0.02, r.bracket.1 + 0.02);
    assert!(sup_a(lo).unwrap() < a_tol);
    while hi - lo > s.mu_tol {
        let mid = 0.5 * (lo + hi);
        match sup_a(mid) {
            Some(v) if v < a_tol => lo = mid,
            _ => hi = mid,
        }
    }
    let mu_a = 0.5 * (lo + hi);
    assert!((mu_a - r.mu_star).abs() <= 2.0 * s.mu_tol, "{mu_a} vs {}", r.mu_star);
}

#[test]
fn zero_datum_never_reaches_a_threshold() {
    let g = slab(40, 1.0);
    let data = BoundaryData::zero(g);
    let s = ContinuationSchedule { max_steps: 5, ..Default::default() };
    let err = continue_mu(System::Limit, 0.1, Kappa::INFINITY, &data, &s, &g).unwrap_err();
    assert!(matches!(err, Error::UnboundedThreshold(5)), "{err}");
    assert!(matches!(mu_upper_bound(0.1, &data, &g), Err(Error::ZeroDatum)));
}

#[test]
fn starting_past_the_threshold_is_reported() {
    let g = slab(200, 0.5);
    let data = BoundaryData::one_sided(g, 1.0).unwrap();
    let s = ContinuationSchedule { mu_start: 0.6, ..Default::default() };
    let err = continue_mu(System::Limit, 0.05, Kappa::INFINITY, &data, &s, &g).unwrap_err();
    assert!(matches!(err, Error::NeverEntersK { .. }), "{err}");
}

#[test]
fn inconsistent_schedules_are_rejected() {
    let g = slab(40, 1.0);
    let data = BoundaryData::one_sided(g, 1.0).unwrap();
    for s in [
        ContinuationSchedule { mu_step: 0.0, ..Default::default() },
        ContinuationSchedule { mu_tol: 0.05, ..Default::default() },
        ContinuationSchedule { margin_tol: -1.0, ..Default::default() },
    ] {
        let err = continue_mu(System::Limit, 0.1, Kappa::INFINITY, &data, &s, &g).unwrap_err();
        assert!(matches!(err, Error::InvalidParameters(_)));
    }
    let err = continue_mu(System::Full, 0.1, Kappa::INFINITY, &data, &ContinuationSchedule::default(), &g).unwrap_err();
    assert!(matches!(err, Error::InvalidParameters(_)));
}

#[test]
fn half_line_upper_bound() {
    let g = slab(4000, 2.0);
    let data = BoundaryData::one_sided(g, 1.0).unwrap();
    let bound = mu_upper_bound(0.1, &data, &g).unwrap();
    assert!((bound - 100.0).abs() <= 0.5, "bound {bound}");
    let doubled = mu_upper_bound(0.1, &data.scaled(2.0), &g).unwrap();
    assert!((doubled - bound / 2.0).abs() <= 1e-9 * bound);
}

#[test]
fn continuation_is_continuous_in_mu() {
    let g = slab(300, 0.8);
    let base = BoundaryData::one_sided(g, 1.0).unwrap();
    let solve = |mu: f64| {
        let params = GLParameters::finite(0.1, 20.0, mu).unwrap();
        solve_full_fh(&params, &base.scaled(mu), &g, None, &SolveOptions::default()).unwrap().0
    };
    let jump = |a: &MeissnerStateFH, b: &MeissnerStateFH| {
        let df: Vec<f64> = a.f.values.iter().zip(&b.f.values).map(|(x, y)| x - y).collect();
        let df = ScalarField::new(g, Placement::Node, df).unwrap();
        field_norm(&Field::Scalar(df), NormKind::L2)
    };
    let mu = 0.3;
    let s0 = solve(mu);
    let full = jump(&s0, &solve(mu + 0.02));
    let half = jump(&s0, &solve(mu + 0.01));
    let ratio = full / half;
    assert!((2.0 / 3.0..=6.0).contains(&ratio), "ratio {ratio}");
}

#[test]
fn kappa_sweep_rates() {
    let g = slab(2000, 0.5);
    let data = BoundaryData::one_sided(g, 0.3).unwrap();
    let fit = kappa_sweep(0.1, &data, &g, &[16.0, 32.0, 64.0, 128.0], 4).unwrap();
    let slope = |k: &str| fit.fitted_slopes[k];
    assert!((-1.7..=-1.3).contains(&slope("l2")), "{:?}", fit.fitted_slopes);
    assert!((-0.7..=-0.3).contains(&slope("h1")), "{:?}", fit.fitted_slopes);
    assert!((0.3..=0.7).contains(&slope("h2")), "{:?}", fit.fitted_slopes);
    assert!((-1.7..=-1.3).contains(&slope("corrector_l2")), "{:?}", fit.fitted_slopes);
    let (first, last) = (fit.rows[0], fit.rows[3]);
    assert!(last.sup_f + last.sup_a < first.sup_f + first.sup_a);
    assert!(last.sup_f + last.sup_a <= 1e-2);
    assert!(fit.rows.iter().all(|r| r.corrector_slope <= 1e-8));
    let csv = fit.to_csv();
    assert!(csv.starts_with("kappa,l2_f,l2_A,l2_H,h1_f,h1_A,h1_H,h2_f,h2_A,h2_H\n"));
    assert_eq!(csv.lines().count(), 5);
}

#[test]
fn kappa_sweep_rejects_bad_lists() {
    let g = slab(100, 0.5);
    let data = BoundaryData::one_sided(g, 0.3).unwrap();
    for ks in [&[16.0][..], &[32.0, 16.0], &[0.5, 16.0]] {
        assert!(matches!(kappa_sweep(0.1, &data, &g, ks, 1), Err(Error::InvalidParameters(_))));
    }
}

#[test]
fn lambda_sweep_limit_value_scales_with_the_datum() {
    let g = slab(400, 0.5);
    let one = BoundaryData::uniform(g, [0.0, 1.0, 0.0]);
    let s = ContinuationSchedule { mu_tol: 1e-3, ..Default::default() };
    let a = lambda_sweep(&one, &g, &[0.2, 0.1], &s, None, 2).unwrap();
    let b = lambda_sweep(&one.scaled(2.0), &g, &[0.2, 0.1], &s, None, 2).unwrap();
    assert!(a.liminf.is_none());
    assert!((a.rows[0].limit_value - superheating_closed_form()).abs() < 1e-12);
    assert!((b.rows[0].limit_value - a.rows[0].limit_value / 2.0).abs() < 1e-12);
    assert!(a.rows[1].error < a.rows[0].error);
    assert!(a.to_csv().starts_with("lambda,mu_star,limit_value,error,upper_bound\n"));
    assert!(matches!(lambda_sweep(&one, &g, &[0.1, 0.2], &s, None, 1), Err(Error::InvalidParameters(_))));
}
