use meissner_core::constitutive::{omega_energy, GLParameters, Kappa};
use meissner_core::discrete::*;
use meissner_core::interior::*;
use meissner_core::oned::{solve_full_ode, SlabProblem};
use meissner_core::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const LAMBDA: f64 = 0.1;

fn slab(n: usize, length: f64) -> StaggeredGrid {
    build_grid(&GridSpec::slab(n, length)).unwrap()
}

fn full() -> GLParameters {
    GLParameters::finite(LAMBDA, 50.0, 1.0).unwrap()
}

fn limit() -> GLParameters {
    GLParameters::limit(LAMBDA, 1.0).unwrap()
}

fn film(n: usize, width: f64, b: f64) -> (StaggeredGrid, BoundaryData) {
    let g = slab(n, width);
    (g, BoundaryData::uniform(g, [0.0, b, 0.0]))
}

fn cube(n: usize) -> (StaggeredGrid, BoundaryData) {
    use BoundaryKind::Wall;
    let g = build_grid(&GridSpec::box3([n; 3], [1.0; 3], [Wall; 3])).unwrap();
    let spec = DataSpec::Harmonic { amplitude: 0.3, coefficients: [1.0, 0.5, -0.3] };
    (g, BoundaryData::from_spec(g, &spec).unwrap())
}

/// Largest deviation of the x-potential on faces and of `f` on nodes from
/// a 1D profile sampled at distance from the nearest wall.
fn profile_error(fa: &MeissnerStateFA, oracle: &meissner_core::oned::SlabSolution, mirror: bool) -> (f64, f64) {
    let g = fa.f.grid;
    let (h, d) = (g.h[2], g.lengths()[2]);
    let fold = |z: f64| if mirror && z > d / 2.0 { d - z } else { z };
    let mut ef = 0.0f64;
    for (i, f) in fa.f.values.iter().enumerate() {
        let z = g.unindex(Placement::Node, i)[2] as f64 * h;
        ef = ef.max((f - oracle.sample(fold(z)).0).abs());
    }
    let mut ea = 0.0f64;
    for (i, a) in fa.a.comps[0].iter().enumerate() {
        let z = (g.unindex(Placement::Face(0), i)[2] as f64 + 0.5) * h;
        ea = ea.max((a.abs() - oracle.sample(fold(z)).1.abs()).abs());
    }
    (ef, ea)
}

#[test]
fn zero_data_gives_the_trivial_state() {
    let g = slab(32, 1.5);
    let data = BoundaryData::zero(g);
    for params in [full(), limit()] {
        let (st, rep) = if params.kappa.is_infinite() {
            solve_limit_h(&params, &data, &g, None, &SolveOptions::default()).unwrap()
        } else {
            solve_full_fh(&params, &data, &g, None, &SolveOptions::default()).unwrap()
        };
        assert!(rep.converged);
        assert!(st.f.values.iter().all(|f| (f - 1.0).abs() < 1e-12));
        assert!(st.h.flatten().iter().all(|h| h.abs() < 1e-12));
        let fa = recover_a(&st).unwrap();
        assert!(fa.a.flatten().iter().all(|a| a.abs() < 1e-12));
    }
    let (st, _) = solve_full_fh(&full(), &data, &g, None, &SolveOptions::default()).unwrap();
    let tr = interior_dtn(&st, DtnKind::Pi).unwrap();
    assert!(tr.samples.iter().all(|s| s.value == 0.0));
}

#[test]
fn limit_slab_reproduces_the_wall_amplitude() {
    let g = slab(400, 1.5);
    let data = BoundaryData::one_sided(g, 0.5).unwrap();
    let (st, rep) = solve_limit_h(&limit(), &data, &g, None, &SolveOptions::default()).unwrap();
    assert!(rep.converged && rep.curl_bound < (4.0f64 / 27.0).sqrt());
    assert!(rep.max_divergence <= 1e-10);
    let fa = recover_a(&st).unwrap();
    let f = limit_density(&fa.a).unwrap();
    assert!((f.values[0] - 0.84090).abs() < 1e-3, "f(0) = {}", f.values[0]);
    assert!(((1.0 - f.values[0].powi(2)).sqrt() - 0.54120).abs() < 1e-3);
    let (r1, r2) = equivalence_residuals(&st, &fa).unwrap();
    assert!(r1 <= 1e-8 && r2 <= 1e-7, "{r1:e} {r2:e}");
}

#[test]
fn full_slab_matches_the_half_space_profile() {
    let g = slab(400, 1.5);
    let data = BoundaryData::one_sided(g, 0.3).unwrap();
    let (st, rep) = solve_full_fh(&full(), &data, &g, None, &SolveOptions::default()).unwrap();
    assert!(rep.converged && rep.final_residual <= 1e-9);
    let history = &rep.residual_history;
    assert!(history.windows(2).all(|w| w[1] < w[0]));
    let oracle = solve_full_ode(&SlabProblem::half_space(LAMBDA, Kappa::Finite(50.0), 0.3), false).unwrap();
    let fa = recover_a(&st).unwrap();
    let (ef, ea) = profile_error(&fa, &oracle, false);
    assert!(ef <= 2e-3 && ea <= 2e-3, "{ef:e} {ea:e}");
}

#[test]
fn laterally_periodic_film_matches_the_film_profile() {
    use BoundaryKind::*;
    let (d, n) = (0.4, 64);
    let h = d / n as f64;
    let g = build_grid(&GridSpec::box3([4, 4, n], [4.0 * h, 4.0 * h, d], [Periodic, Periodic, Wall])).unwrap();
    let data = BoundaryData::uniform(g, [0.0, 0.3, 0.0]);
    let (st, rep) = solve_full_fh(&full(), &data, &g, None, &SolveOptions::default()).unwrap();
    assert!(rep.converged && rep.max_divergence <= 1e-10);
    let p = SlabProblem { lambda: LAMBDA, kappa: Kappa::Finite(50.0), b: 0.3, length: d / 2.0, n: 20000, film: true };
    let oracle = solve_full_ode(&p, false).unwrap();
    let fa = recover_a(&st).unwrap();
    let (ef, ea) = profile_error(&fa, &oracle, true);
    assert!(ef <= 2e-3 && ea <= 2e-3, "{ef:e} {ea:e}");
    let tr = interior_dtn(&st, DtnKind::Pi).unwrap();
    assert!(tr.samples.iter().all(|s| s.value.abs() < 1e-12));
}

#[test]
fn generic_box_data_is_equivalent_and_has_zero_mean_trace() {
    let (g, data) = cube(8);
    let (st, rep) = solve_full_fh(&full(), &data, &g, None, &SolveOptions::default()).unwrap();
    assert!(rep.converged && rep.max_divergence <= 1e-10);
    let (fmin, fmax) = st.f.values.iter().fold((f64::INFINITY, 0.0f64), |(a, b), f| (a.min(*f), b.max(*f)));
    assert!(fmax <= 1.0 + 1e-9 && fmin > 0.0, "{fmin} {fmax}");
    let fa = recover_a(&st).unwrap();
    let (r1, r2) = equivalence_residuals(&st, &fa).unwrap();
    assert!(r1 <= 1e-8 && r2 <= 1e-7, "{r1:e} {r2:e}");
    let tr = interior_dtn(&st, DtnKind::Pi).unwrap();
    let scale: f64 = tr.samples.iter().map(|s| s.area * s.value.abs()).sum();
    assert!(scale > 1e-6);
    assert!(tr.total.abs() <= 1e-9 * scale);
    assert!(matches!(interior_dtn(&st, DtnKind::Gamma), Err(Error::InvalidParameters(_))));
}

#[test]
fn unconverged_states_are_refused() {
    let (g, data) = film(16, 0.5, 0.2);
    let (mut st, _) = solve_full_fh(&full(), &data, &g, None, &SolveOptions::default()).unwrap();
    st.converged = false;
    assert!(matches!(recover_a(&st), Err(Error::NotConverged)));
    assert!(matches!(interior_dtn(&st, DtnKind::Pi), Err(Error::NotConverged)));
}

#[test]
fn random_starts_reach_the_same_state() {
    let (g, data) = film(64, 0.5, 0.3);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut states: Vec<(Vec<f64>, Vec<f64>)> = Vec::new();
    for _ in 0..5 {
        let values = (0..g.len(Placement::Node)).map(|_| rng.gen_range(0.85..1.0)).collect();
        let f0 = ScalarField { grid: g, placement: Placement::Node, values };
        let flat: Vec<f64> = (0..g.component_offsets(true)[3]).map(|_| rng.gen_range(-0.2..0.2)).collect();
        let a0 = VectorField::from_flat(g, VectorPlacement::Face, &flat).unwrap();
        let (st, rep) = solve_full_fa(&full(), &data, &g, Some((&f0, &a0)), &SolveOptions::default()).unwrap();
        assert!(rep.converged);
        states.push((st.f.values, st.a.flatten()));
    }
    let rel = |x: &[f64], y: &[f64]| {
        let num: f64 = x.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum();
        let den: f64 = x.iter().map(|a| a * a).sum();
        (num / den).sqrt()
    };
    for s in &states[1..] {
        assert!(rel(&s.0, &states[0].0) <= 1e-8);
        assert!(rel(&s.1, &states[0].1) <= 1e-8);
    }
}

#[test]
fn converged_state_is_a_local_energy_minimum() {
    let (g, data) = film(64, 0.5, 0.3);
    let (st, rep) = solve_full_fa(&full(), &data, &g, None, &SolveOptions::default()).unwrap();
    assert!(rep.converged && st.margin.margin > 0.05);
    let b_ext = VectorField::from_flat(g, VectorPlacement::Edge, data.extension.as_ref().unwrap()).unwrap();
    let e0 = omega_energy(&st.f, &st.a, &b_ext, &st.params).unwrap().total;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let mut f = st.f.clone();
        f.values.iter_mut().for_each(|v| *v += rng.gen_range(-0.01..0.01));
        let mut a = st.a.clone();
        for axis in 0..3 {
            let p = Placement::Face(axis);
            for (i, v) in a.comps[axis].iter_mut().enumerate() {
                if !g.on_wall(p, g.unindex(p, i), axis) {
                    *v += rng.gen_range(-0.01..0.01);
                }
            }
        }
        let e = omega_energy(&f, &a, &b_ext, &st.params).unwrap().total;
        assert!(e >= e0 - 1e-12, "{e} < {e0}");
    }
}

#[test]
fn film_energy_matches_the_oracle() {
    let (d, n) = (0.5, 200);
    let (g, data) = film(n, d, 0.3);
    let (st, _) = solve_full_fa(&full(), &data, &g, None, &SolveOptions::default()).unwrap();
    let b_ext = VectorField::from_flat(g, VectorPlacement::Edge, data.extension.as_ref().unwrap()).unwrap();
    let e = omega_energy(&st.f, &st.a, &b_ext, &st.params).unwrap().total;
    let p = SlabProblem { lambda: LAMBDA, kappa: Kappa::Finite(50.0), b: 0.3, length: d / 2.0, n: 20000, film: true };
    let oracle = 2.0 * solve_full_ode(&p, false).unwrap().energy();
    assert!(((e - oracle) / oracle).abs() <= 1e-3, "{e} vs {oracle}");
}

#[test]
fn maximum_principle_holds_across_amplitudes() {
    for b in [0.05, 0.2, 0.35] {
        let g = slab(200, 1.5);
        let data = BoundaryData::one_sided(g, b).unwrap();
        let (st, rep) = solve_full_fh(&full(), &data, &g, None, &SolveOptions::default()).unwrap();
        assert!(rep.converged);
        assert!(st.f.values.iter().all(|f| *f <= 1.0 + 1e-9));
    }
}

#[test]
fn linear_maxwell_zero_and_ode() {
    use BoundaryKind::*;
    let g = build_grid(&GridSpec::box3([4, 4, 32], [0.5, 0.5, 1.0], [Periodic, Periodic, Wall])).unwrap();
    let one = ScalarField::constant(g, Placement::Node, 1.0);
    let zero = VectorField::zeros(g, VectorPlacement::Edge);
    let u = solve_linear_maxwell(&one, &zero, &g).unwrap();
    assert!(u.flatten().iter().all(|v| *v == 0.0));
    let rhs = VectorField::from_fn(g, VectorPlacement::Edge, |_| [1.0, 0.0, 0.0]);
    let u = solve_linear_maxwell(&one, &rhs, &g).unwrap();
    let exact = |z: f64| 1.0 - (z - 0.5).cosh() / 0.5f64.cosh();
    for (i, v) in u.comps[0].iter().enumerate() {
        let z = g.unindex(Placement::Edge(0), i)[2] as f64 * g.h[2];
        assert!((v - exact(z)).abs() < 1e-3);
    }
    assert!(u.comps[1].iter().chain(&u.comps[2]).all(|v| v.abs() < 1e-12));
    let neg = ScalarField::constant(g, Placement::Node, -1.0);
    assert!(matches!(solve_linear_maxwell(&neg, &rhs, &g), Err(Error::NonPositiveCoefficient(_))));
}

#[test]
fn linear_maxwell_manufactured_solution_converges_at_second_order() {
    use std::f64::consts::PI;
    let errors: Vec<f64> = [16, 32, 64]
        .iter()
        .map(|&n| {
            let g = slab(n, 1.0);
            let a = ScalarField::from_fn(g, Placement::Node, |x| 1.0 + x[2] * x[2]);
            let rhs = VectorField::from_fn(g, VectorPlacement::Edge, |x| {
                let z = x[2];
                [-(2.0 * z * PI * (PI * z).cos() - (1.0 + z * z) * PI * PI * (PI * z).sin()) + (PI * z).sin(), 0.0, 0.0]
            });
            let u = solve_linear_maxwell(&a, &rhs, &g).unwrap();
            let h = 1.0 / n as f64;
            let s: f64 = u.comps[0].iter().enumerate().map(|(k, v)| h * (v - (PI * k as f64 * h).sin()).powi(2)).sum();
            s.sqrt()
        })
        .collect();
    for w in errors.windows(2) {
        let slope = (w[0] / w[1]).log2();
        assert!((slope - 2.0).abs() <= 0.2, "slope {slope}");
    }
}

#[test]
fn limit_density_examples() {
    let g = slab(8, 1.0);
    let zero = VectorField::zeros(g, VectorPlacement::Face);
    assert!(limit_density(&zero).unwrap().values.iter().all(|f| *f == 1.0));
    let r = (1.0f64 / 3.0).sqrt();
    let edge = VectorField::from_fn(g, VectorPlacement::Face, |_| [r, 0.0, 0.0]);
    let f = limit_density(&edge).unwrap();
    assert!(f.values.iter().all(|f| (f - (2.0f64 / 3.0).sqrt()).abs() < 1e-9));
    let over = VectorField::from_fn(g, VectorPlacement::Face, |_| [0.6, 0.0, 0.0]);
    assert!(matches!(limit_density(&over), Err(Error::OutOfDomain { .. })));
}
