use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::corrector::{boundary_corrector, wall_normal_derivative};
use super::{continue_mu, par_map, ContinuationSchedule, System};
use crate::constitutive::{GLParameters, Kappa};
use crate::discrete::{field_norm, Field, NormKind, ScalarField, StaggeredGrid, VectorField};
use crate::error::{Error, Result};
use crate::interior::{limit_density, recover_a, solve_full_fh, solve_limit_h, BoundaryData, SolveOptions};
use crate::oned::superheating_closed_form;

/// Differences between a finite-`κ` state and the limiting state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KappaRow {
    pub kappa: f64,
    pub l2_f: f64,
    pub l2_a: f64,
    pub l2_h: f64,
    pub h1_f: f64,
    pub h1_a: f64,
    pub h1_h: f64,
    pub h2_f: f64,
    pub h2_a: f64,
    pub h2_h: f64,
    pub sup_f: f64,
    pub sup_a: f64,
    /// `‖f̂ − f_∞‖_{L2}` for the boundary corrector at this `κ`.
    pub corrector_l2: f64,
    /// Largest wall-normal derivative of the corrector.
    pub corrector_slope: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub lambda: f64,
    pub kappas: Vec<f64>,
    pub rows: Vec<KappaRow>,
    /// Least-squares log-log slopes keyed by quantity name; `l2`, `h1` and
    /// `h2` refer to the summed `f` and `A` differences.
    pub fitted_slopes: BTreeMap<String, f64>,
}

impl RateFit {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("kappa,l2_f,l2_A,l2_H,h1_f,h1_A,h1_H,h2_f,h2_A,h2_H\n");
        for r in &self.rows {
            let vals = [r.l2_f, r.l2_a, r.l2_h, r.h1_f, r.h1_a, r.h1_h, r.h2_f, r.h2_a, r.h2_h];
            s.push_str(&format!("{}", r.kappa));
            for v in vals {
                s.push_str(&format!(",{v:.12e}"));
            }
            s.push('\n');
        }
        s
    }
}

/// Unweighted least-squares slope of `log y` against `log x`.
pub(crate) fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

fn diff_scalar(a: &ScalarField, b: &ScalarField) -> Field {
    let values = a.values.iter().zip(&b.values).map(|(x, y)| x - y).collect();
    Field::Scalar(ScalarField { values, ..a.clone() })
}

fn diff_vector(a: &VectorField, b: &VectorField) -> Field {
    let comps = [0, 1, 2].map(|k| a.comps[k].iter().zip(&b.comps[k]).map(|(x, y)| x - y).collect());
    Field::Vector(VectorField { comps, ..a.clone() })
}

/// Solve the full system for each `κ` and compare with the limiting solution.
pub fn kappa_sweep(lambda: f64, data: &BoundaryData, grid: &StaggeredGrid, kappas: &[f64], jobs: usize) -> Result<RateFit> {
    if kappas.len() < 2 || kappas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameters("kappas must be strictly increasing with at least two entries".into()));
    }
    if let Some(k) = kappas.iter().find(|&&k| k < lambda.max(1.0)) {
        return Err(Error::InvalidParameters(format!("kappa {k} is below max(1, lambda)")));
    }
    let opts = SolveOptions::default();
    let (lim, _) = solve_limit_h(&GLParameters::limit(lambda, 1.0)?, data, grid, None, &opts)?;
    let lim_a = recover_a(&lim)?.a;
    let f_inf = limit_density(&lim_a)?;
    let rows = par_map(kappas, jobs, |&kappa| -> Result<KappaRow> {
        let (st, _) = solve_full_fh(&GLParameters::finite(lambda, kappa, 1.0)?, data, grid, None, &opts)?;
        let a = recover_a(&st)?.a;
        let df = diff_scalar(&st.f, &f_inf);
        let da = diff_vector(&a, &lim_a);
        let dh = diff_vector(&st.h, &lim.h);
        let fhat = boundary_corrector(&f_inf, kappa, grid)?;
        Ok(KappaRow {
            kappa,
            l2_f: field_norm(&df, NormKind::L2),
            l2_a: field_norm(&da, NormKind::L2),
            l2_h: field_norm(&dh, NormKind::L2),
            h1_f: field_norm(&df, NormKind::H1),
            h1_a: field_norm(&da, NormKind::H1),
            h1_h: field_norm(&dh, NormKind::H1),
            h2_f: field_norm(&df, NormKind::H2),
            h2_a: field_norm(&da, NormKind::H2),
            h2_h: field_norm(&dh, NormKind::H2),
            sup_f: field_norm(&df, NormKind::Sup),
            sup_a: field_norm(&da, NormKind::Sup),
            corrector_l2: field_norm(&diff_scalar(&fhat, &f_inf), NormKind::L2),
            corrector_slope: wall_normal_derivative(&fhat),
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let column = |pick: fn(&KappaRow) -> f64| rows.iter().map(pick).collect::<Vec<f64>>();
    let columns: [(&str, fn(&KappaRow) -> f64); 15] = [
        ("l2", |r| r.l2_f + r.l2_a),
        ("h1", |r| r.h1_f + r.h1_a),
        ("h2", |r| r.h2_f + r.h2_a),
        ("l2_f", |r| r.l2_f),
        ("l2_A", |r| r.l2_a),
        ("l2_H", |r| r.l2_h),
        ("h1_f", |r| r.h1_f),
        ("h1_A", |r| r.h1_a),
        ("h1_H", |r| r.h1_h),
        ("h2_f", |r| r.h2_f),
        ("h2_A", |r| r.h2_a),
        ("h2_H", |r| r.h2_h),
        ("sup", |r| r.sup_f + r.sup_a),
        ("corrector_l2", |r| r.corrector_l2),
        ("corrector_slope", |r| r.corrector_slope.max(f64::MIN_POSITIVE)),
    ];
    let fitted_slopes = columns.iter().map(|(name, pick)| (name.to_string(), loglog_slope(kappas, &column(*pick)))).collect();
    Ok(RateFit { lambda, kappas: kappas.to_vec(), rows, fitted_slopes })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaRow {
    pub lambda: f64,
    pub mu_star: f64,
    /// `√(5/18) / ‖B_T‖_{C⁰}`.
    pub limit_value: f64,
    pub error: f64,
    pub upper_bound: f64,
    pub max_curl_bound: f64,
}

/// Threshold of the full system at one `(λ, κ)` against the limiting one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LiminfCheck {
    pub lambda: f64,
    pub kappa: f64,
    pub mu_star_kappa: f64,
    pub mu_star_limit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaSweep {
    pub rows: Vec<LambdaRow>,
    pub liminf: Option<LiminfCheck>,
}

impl LambdaSweep {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("lambda,mu_star,limit_value,error,upper_bound\n");
        for r in &self.rows {
            s.push_str(&format!("{},{:.12e},{:.12e},{:.12e},{:.12e}\n", r.lambda, r.mu_star, r.limit_value, r.error, r.upper_bound));
        }
        s
    }
}

/// Limiting thresholds for decreasing `λ`, plus the full-system threshold at
/// the smallest `λ` and the given `κ`.
pub fn lambda_sweep(
    base: &BoundaryData,
    grid: &StaggeredGrid,
    lambdas: &[f64],
    schedule: &ContinuationSchedule,
    liminf_kappa: Option<f64>,
    jobs: usize,
) -> Result<LambdaSweep> {
    if lambdas.is_empty() || lambdas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidParameters("lambdas must be strictly decreasing".into()));
    }
    if base.is_zero() {
        return Err(Error::ZeroDatum);
    }
    let limit_value = superheating_closed_form() / base.sup_norm;
    let mut jobs_list: Vec<(f64, Option<f64>)> = lambdas.iter().map(|&l| (l, None)).collect();
    let smallest = *lambdas.last().expect("nonempty");
    if let Some(k) = liminf_kappa {
        jobs_list.push((smallest, Some(k)));
    }
    let results = par_map(&jobs_list, jobs, |&(lambda, kappa)| match kappa {
        Some(k) => continue_mu(System::Full, lambda, Kappa::Finite(k), base, schedule, grid),
        None => continue_mu(System::Limit, lambda, Kappa::INFINITY, base, schedule, grid),
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let rows = results[..lambdas.len()]
        .iter()
        .map(|r| {
            let s = r.summary();
            LambdaRow {
                lambda: r.lambda,
                mu_star: r.mu_star,
                limit_value,
                error: (r.mu_star - limit_value).abs(),
                upper_bound: r.upper_bound,
                max_curl_bound: s.max_curl_bound,
            }
        })
        .collect::<Vec<_>>();
    let liminf = liminf_kappa.map(|kappa| LiminfCheck {
        lambda: smallest,
        kappa,
        mu_star_kappa: results[lambdas.len()].mu_star,
        mu_star_limit: rows.last().expect("nonempty").mu_star,
    });
    Ok(LambdaSweep { rows, liminf })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_a_power_law() {
        let x = [16.0, 32.0, 64.0, 128.0];
        let y: Vec<f64> = x.iter().map(|k: &f64| 3.0 * k.powf(-1.5)).collect();
        assert!((loglog_slope(&x, &y) + 1.5).abs() < 1e-12);
    }
}
