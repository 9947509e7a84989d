use super::common::Disc;
use super::data::BoundaryData;
use super::dofs::{DofMap, NONE};
use super::state::{MeissnerStateFA, MeissnerStateFH, SolveOptions, SolveReport};
use crate::constitutive::{ConvexityMargin, GLParameters};
use crate::discrete::{Placement, ScalarField, StaggeredGrid, VectorField, VectorPlacement};
use crate::error::{Error, Result};
use crate::linalg::{self, CsrMatrix, Structure, Triplets};

/// Discrete energy of the full system in `(f, A)` form together with its
/// gradient and Hessian. With `κ = ∞` the gradient term of `f` drops out and
/// the minimizer is the limiting state.
pub(crate) struct FullProblem {
    pub d: Disc,
    pub eps: f64,
    pub lambda: f64,
    /// `L = Gᵀ W G` on nodes.
    lap: CsrMatrix,
    /// `λ² V C_int C_intᵀ` on faces.
    curlcurl: CsrMatrix,
    /// Boundary work `λ V C_bd B_T` on faces.
    cbd: Vec<f64>,
    pub dofs: DofMap,
}

impl FullProblem {
    pub fn new(grid: &StaggeredGrid, params: &GLParameters, data: &BoundaryData) -> Result<Self> {
        let eps = params.kappa.finite().map_or(0.0, |k| (params.lambda / k).powi(2));
        if data.grid != *grid {
            return Err(Error::GridMismatch("boundary data lives on another grid".into()));
        }
        let d = Disc::new(grid);
        let lambda = params.lambda;
        let v = grid.cell_volume();
        let nn = d.n_nodes();
        let nf = d.n_faces();
        let mut t = Triplets::new(nn, nn);
        for e in 0..d.n_edges() {
            let row: Vec<(usize, f64)> = d.ops.grad.row(e).collect();
            for &(i, gi) in &row {
                for &(j, gj) in &row {
                    t.push(i, j, d.ops.edge_weights[e] * gi * gj);
                }
            }
        }
        let lap = t.to_csr();
        let mut t = Triplets::new(nf, nf);
        let mut cbd = vec![0.0; nf];
        for e in 0..d.n_edges() {
            let col: Vec<(usize, f64)> = d.ops.curl_t.row(e).collect();
            if d.boundary_edge[e] {
                for &(f, c) in &col {
                    cbd[f] += lambda * v * c * data.values[e];
                }
            } else {
                for &(fi, ci) in &col {
                    for &(fj, cj) in &col {
                        t.push(fi, fj, lambda * lambda * v * ci * cj);
                    }
                }
            }
        }
        let wall_face = d.wall_face.clone();
        let fo = grid.component_offsets(true);
        let dofs = DofMap::new(grid, true, true, |a, ijk| !wall_face[fo[a] + grid.index(Placement::Face(a), ijk)]);
        Ok(FullProblem { eps, lambda, lap, curlcurl: t.to_csr(), cbd, d, dofs })
    }

    /// Half gradient of the energy, split into node and face parts.
    pub fn gradient(&self, f: &[f64], a: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let w = &self.d.ops.node_weights;
        let a2 = self.d.interp.squared_norm(a);
        let lf = self.lap.matvec(f);
        let rf: Vec<f64> = (0..f.len())
            .map(|n| self.eps * lf[n] + w[n] * (a2[n] + f[n] * f[n] - 1.0) * f[n])
            .collect();
        let mut ra = self.curlcurl.matvec(a);
        for (r, c) in ra.iter_mut().zip(&self.cbd) {
            *r += c;
        }
        for (n, gs) in self.d.interp.groups.iter().enumerate() {
            let coef = w[n] * f[n] * f[n];
            for gr in gs.iter().flatten() {
                let v = gr.weight * gr.value(a);
                for &(phi, c) in &gr.terms {
                    ra[phi] += coef * c * v;
                }
            }
        }
        for (r, wall) in ra.iter_mut().zip(&self.d.wall_face) {
            if *wall {
                *r = 0.0;
            }
        }
        (rf, ra)
    }

    /// Weighted residual norm relative to the domain volume.
    pub fn residual_norm(&self, rf: &[f64], ra: &[f64]) -> f64 {
        let v = self.d.g.cell_volume();
        let sf: f64 = rf.iter().zip(&self.d.ops.node_weights).map(|(r, w)| r * r / w).sum();
        let sa: f64 = ra.iter().map(|r| r * r / v).sum();
        ((sf + sa) / self.d.g.volume()).sqrt()
    }

    pub fn pack(&self, rf: &[f64], ra: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dofs.len];
        for (n, &k) in self.dofs.nodes.iter().enumerate() {
            out[k] = rf[n];
        }
        for (phi, &k) in self.dofs.vectors.iter().enumerate() {
            if k != NONE {
                out[k] = ra[phi];
            }
        }
        out
    }

    pub fn hessian(&self, f: &[f64], a: &[f64], with_f: bool) -> CsrMatrix {
        let w = &self.d.ops.node_weights;
        let a2 = self.d.interp.squared_norm(a);
        let dn = &self.dofs.nodes;
        let dv = &self.dofs.vectors;
        let mut t = Triplets::with_capacity(self.dofs.len, self.dofs.len, 40 * self.dofs.len);
        if with_f {
            for i in 0..self.lap.nrows {
                for (j, v) in self.lap.row(i) {
                    t.push(dn[i], dn[j], self.eps * v);
                }
            }
        }
        for phi in 0..self.curlcurl.nrows {
            if dv[phi] == NONE {
                continue;
            }
            for (psi, v) in self.curlcurl.row(phi) {
                if dv[psi] != NONE {
                    t.push(dv[phi], dv[psi], v);
                }
            }
        }
        for (n, gs) in self.d.interp.groups.iter().enumerate() {
            if with_f {
                t.push(dn[n], dn[n], w[n] * (a2[n] + 3.0 * f[n] * f[n] - 1.0));
            } else {
                t.push(dn[n], dn[n], 1.0);
            }
            let coef = w[n] * f[n] * f[n];
            for gr in gs.iter().flatten() {
                let v = gr.weight * gr.value(a);
                for &(p, cp) in &gr.terms {
                    if dv[p] == NONE {
                        continue;
                    }
                    if with_f {
                        let m = 2.0 * w[n] * f[n] * cp * v;
                        t.push(dn[n], dv[p], m);
                        t.push(dv[p], dn[n], m);
                    }
                    for &(q, cq) in &gr.terms {
                        if dv[q] != NONE {
                            t.push(dv[p], dv[q], coef * gr.weight * cp * cq);
                        }
                    }
                }
            }
        }
        t.to_csr()
    }

    /// Apply a packed Newton update `x ← x − t δ`.
    pub fn update(&self, f: &[f64], a: &[f64], delta: &[f64], step: f64) -> (Vec<f64>, Vec<f64>) {
        let mut f2 = f.to_vec();
        let mut a2 = a.to_vec();
        for (n, &k) in self.dofs.nodes.iter().enumerate() {
            f2[n] -= step * delta[k];
        }
        for (phi, &k) in self.dofs.vectors.iter().enumerate() {
            if k != NONE {
                a2[phi] -= step * delta[k];
            }
        }
        (f2, a2)
    }

    /// Edge field `H`: `λ Cᵀ A` inside, the wall data on boundary edges.
    pub fn field_h(&self, a: &[f64], data: &BoundaryData) -> Vec<f64> {
        let ca = self.d.ops.curl_t.matvec(a);
        ca.iter()
            .zip(&self.d.boundary_edge)
            .zip(&data.values)
            .map(|((c, b), bt)| if *b { *bt } else { self.lambda * c })
            .collect()
    }

    pub fn margin(&self, f: &[f64], a: &[f64]) -> ConvexityMargin {
        ConvexityMargin::from_samples(f, &self.d.interp.squared_norm(a), 0.0)
    }

    /// Screening initial guess: `f ≡ 1` and the linear field response.
    pub fn screening(&self, linear_rtol: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        let f = vec![1.0; self.d.n_nodes()];
        let a = vec![0.0; self.d.n_faces()];
        let (_, ra) = self.gradient(&f, &a);
        let zero_f = vec![0.0; f.len()];
        let hess = self.hessian(&f, &a, false);
        let rhs = self.pack(&zero_f, &ra);
        let delta = linalg::solve(&hess, &rhs, Structure::SymmetricPositiveDefinite, linear_rtol)?;
        let (_, a) = self.update(&f, &a, &delta, 1.0);
        Ok((f, a))
    }
}

/// Newton iteration with residual-monotone backtracking on the full system.
pub fn solve_full_fh(
    params: &GLParameters,
    data: &BoundaryData,
    grid: &StaggeredGrid,
    init: Option<(&ScalarField, &VectorField)>,
    opts: &SolveOptions,
) -> Result<(MeissnerStateFH, SolveReport)> {
    let (fa, report) = solve_full_fa(params, data, grid, init, opts)?;
    let prob = FullProblem::new(grid, params, data)?;
    let h = prob.field_h(&fa.a.flatten(), data);
    let state = MeissnerStateFH {
        f: fa.f,
        h: VectorField::from_flat(*grid, VectorPlacement::Edge, &h)?,
        params: *params,
        data: data.clone(),
        converged: report.converged,
    };
    Ok((state, report))
}

/// As [`solve_full_fh`], returning the potential form of the state.
pub fn solve_full_fa(
    params: &GLParameters,
    data: &BoundaryData,
    grid: &StaggeredGrid,
    init: Option<(&ScalarField, &VectorField)>,
    opts: &SolveOptions,
) -> Result<(MeissnerStateFA, SolveReport)> {
    params.validate()?;
    if params.kappa.is_infinite() {
        return Err(Error::InvalidParameters("the full system needs a finite kappa".into()));
    }
    let prob = FullProblem::new(grid, params, data)?;
    let (f, a) = match init {
        Some((f0, a0)) => {
            if f0.grid != *grid || a0.grid != *grid || f0.placement != Placement::Node || a0.placement != VectorPlacement::Face {
                return Err(Error::GridMismatch("initial state must be f on NODEs and A on FACEs of the grid".into()));
            }
            let mut a = a0.flatten();
            for (v, wall) in a.iter_mut().zip(&prob.d.wall_face) {
                if *wall {
                    *v = 0.0;
                }
            }
            (f0.values.clone(), a)
        }
        None => prob.screening(opts.linear_rtol)?,
    };
    let Minimized { f, a, history, iterations, converged } = minimize(&prob, f, a, opts)?;
    let res = *history.last().expect("history starts with the initial residual");
    let margin = prob.margin(&f, &a);
    let h = prob.field_h(&a, data);
    let curl_bound = ampere_bound(&prob.d, &f, &a);
    let report = SolveReport {
        iterations,
        final_residual: res,
        residual_history: history,
        margin: margin.margin,
        curl_bound,
        converged,
        max_divergence: prob.d.divergence(&h),
    };
    if !converged {
        return Err(Error::SolverFailure(format!(
            "full Newton stopped at relative residual {res:.3e} after {iterations} iterations"
        )));
    }
    if opts.require_k && !margin.in_k() {
        return Err(Error::OutOfK(margin.margin));
    }
    let state = MeissnerStateFA {
        f: ScalarField::new(*grid, Placement::Node, f)?,
        a: VectorField::from_flat(*grid, VectorPlacement::Face, &a)?,
        params: *params,
        data: data.clone(),
        margin,
    };
    Ok((state, report))
}

/// `λ‖CURL H‖_SUP` through the discrete Ampère law `λ CURL H = −f² A`,
/// sampled at nodes.
pub(crate) fn ampere_bound(d: &Disc, f: &[f64], a: &[f64]) -> f64 {
    d.interp.squared_norm(a).iter().zip(f).fold(0.0f64, |m, (a2, f)| m.max(f * f * a2.sqrt()))
}

pub(crate) struct Minimized {
    pub f: Vec<f64>,
    pub a: Vec<f64>,
    pub history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Newton iteration with residual-monotone backtracking on the energy.
pub(crate) fn minimize(prob: &FullProblem, mut f: Vec<f64>, mut a: Vec<f64>, opts: &SolveOptions) -> Result<Minimized> {
    let (mut rf, mut ra) = prob.gradient(&f, &a);
    let mut res = prob.residual_norm(&rf, &ra);
    let mut history = vec![res];
    let mut iterations = 0;
    let mut converged = res <= opts.tol;
    let mut polish = 0;
    while (!converged || polish < 2) && iterations < opts.max_iter {
        let hess = prob.hessian(&f, &a, true);
        let rhs = prob.pack(&rf, &ra);
        let delta = linalg::solve(&hess, &rhs, Structure::SymmetricIndefinite, opts.linear_rtol)?;
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..=opts.max_halvings {
            let (f2, a2) = prob.update(&f, &a, &delta, step);
            let fmin = f2.iter().copied().fold(f64::INFINITY, f64::min);
            if fmin >= opts.min_f {
                let (rf2, ra2) = prob.gradient(&f2, &a2);
                let r2 = prob.residual_norm(&rf2, &ra2);
                if r2 < res {
                    accepted = Some((f2, a2, rf2, ra2, r2));
                    break;
                }
            }
            step *= 0.5;
        }
        iterations += 1;
        match accepted {
            Some((f2, a2, rf2, ra2, r2)) => {
                let ratio = r2 / res;
                f = f2;
                a = a2;
                rf = rf2;
                ra = ra2;
                res = r2;
                history.push(res);
                if converged {
                    polish += 1;
                    if ratio > 0.1 {
                        break;
                    }
                }
                converged = converged || res <= opts.tol;
            }
            None => break,
        }
    }
    Ok(Minimized { f, a, history, iterations, converged })
}
