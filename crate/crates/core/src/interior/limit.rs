use super::common::Disc;
use super::data::BoundaryData;
use super::full::{ampere_bound, minimize, FullProblem, Minimized};
use super::maps::potential_from_field;
use super::state::{MeissnerStateFH, SolveOptions, SolveReport};
use crate::constitutive::{ConvexityMargin, GLParameters};
use crate::discrete::{Placement, ScalarField, StaggeredGrid, VectorField, VectorPlacement};
use crate::error::{Error, Result};

/// Newton solve of the limiting system, carried out on the potential: the
/// energy of the full system without the gradient term of `f` is minimized,
/// which puts `f = √(1 − |A|²)` and `λ CURL H = −f² A` at every node.
/// `H` is then `λ CURL† A` inside and the data on the wall.
pub fn solve_limit_h(
    params: &GLParameters,
    data: &BoundaryData,
    grid: &StaggeredGrid,
    init: Option<&VectorField>,
    opts: &SolveOptions,
) -> Result<(MeissnerStateFH, SolveReport)> {
    params.validate()?;
    if !params.kappa.is_infinite() {
        return Err(Error::InvalidParameters("the limiting system needs kappa = INFINITY".into()));
    }
    let prob = FullProblem::new(grid, params, data)?;
    let a0 = match init {
        Some(h0) => {
            if h0.grid != *grid || h0.placement != VectorPlacement::Edge {
                return Err(Error::GridMismatch("initial field must live on the grid's EDGEs".into()));
            }
            let h0 = h0.flatten();
            let a = potential_from_field(&prob, &vec![1.0; prob.d.n_nodes()], &h0)?;
            potential_from_field(&prob, &start_density(&prob.d, &a), &h0)?
        }
        None => prob.screening(opts.linear_rtol)?.1,
    };
    let f0 = start_density(&prob.d, &a0);
    let Minimized { a, history, iterations, converged, .. } = minimize(&prob, f0, a0, opts)?;
    let res = *history.last().expect("history starts with the initial residual");
    if !converged {
        return Err(Error::SolverFailure(format!(
            "limiting Newton stopped at relative residual {res:.3e} after {iterations} iterations"
        )));
    }
    let f = limit_density_values(&prob.d, &a)?;
    let margin = ConvexityMargin::from_samples(&f, &prob.d.interp.squared_norm(&a), 0.0);
    let h = prob.field_h(&a, data);
    let report = SolveReport {
        iterations,
        final_residual: res,
        residual_history: history,
        margin: margin.margin,
        curl_bound: ampere_bound(&prob.d, &f, &a),
        converged,
        max_divergence: prob.d.divergence(&h),
    };
    if opts.require_k && !margin.in_k_closure() {
        return Err(Error::OutOfK(margin.margin));
    }
    let state = MeissnerStateFH {
        f: ScalarField::new(*grid, Placement::Node, f)?,
        h: VectorField::from_flat(*grid, VectorPlacement::Edge, &h)?,
        params: *params,
        data: data.clone(),
        converged,
    };
    Ok((state, report))
}

/// `√(1 − |A|²)`, kept on the stable branch `f² ≥ 2/3` where `|A|` is large.
fn start_density(d: &Disc, a: &[f64]) -> Vec<f64> {
    d.interp.squared_norm(a).into_iter().map(|a2| (1.0 - a2).max(2.0 / 3.0).sqrt()).collect()
}

pub(crate) fn limit_density_values(d: &Disc, a: &[f64]) -> Result<Vec<f64>> {
    let max = 1.0 / 3.0f64.sqrt() + 1e-9;
    d.interp
        .squared_norm(a)
        .into_iter()
        .map(|a2| {
            if a2.sqrt() > max {
                Err(Error::OutOfDomain { value: a2.sqrt(), max })
            } else {
                Ok((1.0 - a2).sqrt())
            }
        })
        .collect()
}
