use serde::{Deserialize, Serialize};

use super::common::Disc;
use super::dofs::{DofMap, NONE};
use super::full::FullProblem;
use super::limit::limit_density_values;
use super::state::{MeissnerStateFA, MeissnerStateFH};
use super::data::BoundaryData;
use crate::constitutive::{g_density_sq, ConvexityMargin};
use crate::discrete::{Placement, ScalarField, StaggeredGrid, VectorField, VectorPlacement};
use crate::error::{Error, Result};
use crate::linalg::{self, Structure, Triplets};

/// Solve `CURL(a CURL u) + u = rhs` on interior edges with `u_T = 0` on walls;
/// the coefficient is given on nodes and averaged to faces.
pub fn solve_linear_maxwell(a: &ScalarField, rhs: &VectorField, grid: &StaggeredGrid) -> Result<VectorField> {
    if a.grid != *grid || rhs.grid != *grid {
        return Err(Error::GridMismatch("coefficient and right-hand side must share the grid".into()));
    }
    if a.placement != Placement::Node || rhs.placement != VectorPlacement::Edge {
        return Err(Error::PlacementMismatch("expected a NODE coefficient and an EDGE right-hand side".into()));
    }
    if let Some(v) = a.values.iter().find(|v| !(**v > 0.0)) {
        return Err(Error::NonPositiveCoefficient(*v));
    }
    let d = Disc::new(grid);
    let af = d.pavg.matvec(&a.values);
    let be = d.boundary_edge.clone();
    let eo = grid.component_offsets(false);
    let dofs = DofMap::new(grid, false, false, |ax, ijk| !be[eo[ax] + grid.index(Placement::Edge(ax), ijk)]);
    let mut t = Triplets::new(dofs.len, dofs.len);
    for &k in dofs.vectors.iter().filter(|&&k| k != NONE) {
        t.push(k, k, 1.0);
    }
    for phi in 0..d.n_faces() {
        let row: Vec<(usize, f64)> = d.ops.curl.row(phi).filter(|(e, _)| dofs.vectors[*e] != NONE).collect();
        for &(e1, c1) in &row {
            for &(e2, c2) in &row {
                t.push(dofs.vectors[e1], dofs.vectors[e2], c1 * af[phi] * c2);
            }
        }
    }
    let r = rhs.flatten();
    let mut b = vec![0.0; dofs.len];
    for (e, &k) in dofs.vectors.iter().enumerate() {
        if k != NONE {
            b[k] = r[e];
        }
    }
    let x = linalg::solve(&t.to_csr(), &b, Structure::SymmetricPositiveDefinite, 1e-13)?;
    let mut u = vec![0.0; d.n_edges()];
    for (e, &k) in dofs.vectors.iter().enumerate() {
        if k != NONE {
            u[e] = x[k];
        }
    }
    VectorField::from_flat(*grid, VectorPlacement::Edge, &u)
}

/// Potential form of a converged state.
///
/// `A = −λ 𝔣⁻² CURL H` with the discrete multiplication operator of the
/// solver.
pub fn recover_a(state: &MeissnerStateFH) -> Result<MeissnerStateFA> {
    if !state.converged {
        return Err(Error::NotConverged);
    }
    let g = state.f.grid;
    let h = state.h.flatten();
    let prob = FullProblem::new(&g, &state.params, &state.data)?;
    let a = potential_from_field(&prob, &state.f.values, &h)?;
    let d = Disc::new(&g);
    let margin = ConvexityMargin::from_samples(&state.f.values, &d.interp.squared_norm(&a), 0.0);
    Ok(MeissnerStateFA {
        f: state.f.clone(),
        a: VectorField::from_flat(g, VectorPlacement::Face, &a)?,
        params: state.params,
        data: state.data.clone(),
        margin,
    })
}

/// Solve the face equation `M_f A = −λ V CURL H` for the potential.
pub(crate) fn potential_from_field(prob: &FullProblem, f: &[f64], h: &[f64]) -> Result<Vec<f64>> {
    let d = &prob.d;
    let v = d.g.cell_volume();
    let ch = d.ops.curl.matvec(h);
    let mut m = Triplets::new(d.n_faces(), d.n_faces());
    let w = &d.ops.node_weights;
    let dv = &prob.dofs.vectors;
    for (n, gs) in d.interp.groups.iter().enumerate() {
        let coef = w[n] * f[n] * f[n];
        for gr in gs.iter().flatten() {
            for &(p, cp) in &gr.terms {
                for &(q, cq) in &gr.terms {
                    if dv[p] != NONE && dv[q] != NONE {
                        m.push(p, q, coef * gr.weight * cp * cq);
                    }
                }
            }
        }
    }
    let keep: Vec<usize> = (0..d.n_faces()).filter(|&p| dv[p] != NONE).collect();
    let mass = m.to_csr().submatrix(&keep, &keep);
    let rhs: Vec<f64> = keep.iter().map(|&p| -prob.lambda * v * ch[p]).collect();
    let x = linalg::solve(&mass, &rhs, Structure::SymmetricPositiveDefinite, 1e-14)?;
    let mut a = vec![0.0; d.n_faces()];
    for (k, &p) in keep.iter().enumerate() {
        a[p] = x[k];
    }
    Ok(a)
}

/// `f = √(1 − |A|²)` at nodes.
pub fn limit_density(a: &VectorField) -> Result<ScalarField> {
    if a.placement != VectorPlacement::Face {
        return Err(Error::PlacementMismatch("the potential lives on FACEs".into()));
    }
    let d = Disc::new(&a.grid);
    ScalarField::new(a.grid, Placement::Node, limit_density_values(&d, &a.flatten())?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum DtnKind {
    Gamma,
    Pi,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundarySample {
    pub axis: usize,
    /// `0` for the low wall, `1` for the high wall.
    pub side: usize,
    pub edge: usize,
    pub area: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DtnTrace {
    pub samples: Vec<BoundarySample>,
    /// `Σ area · value`.
    pub total: f64,
    /// `|total| / Σ area · |value|` (zero for a zero trace).
    pub relative_mean: f64,
}

/// Outward normal component of `H` next to the walls.
pub fn interior_dtn(state: &MeissnerStateFH, which: DtnKind) -> Result<DtnTrace> {
    if !state.converged {
        return Err(Error::NotConverged);
    }
    match (which, state.params.kappa.is_infinite()) {
        (DtnKind::Gamma, false) => return Err(Error::InvalidParameters("GAMMA traces need a limiting state".into())),
        (DtnKind::Pi, true) => return Err(Error::InvalidParameters("PI traces need a finite-kappa state".into())),
        _ => {}
    }
    let g = state.f.grid;
    let h = state.h.flatten();
    let eo = g.component_offsets(false);
    let mut samples = Vec::new();
    for axis in 0..3 {
        if !g.is_wall(axis) {
            continue;
        }
        let p = Placement::Edge(axis);
        for e in 0..g.len(p) {
            let ijk = g.unindex(p, e);
            let side = if ijk[axis] == 0 {
                0
            } else if ijk[axis] + 1 == g.n[axis] {
                1
            } else {
                continue;
            };
            let mut inner = ijk;
            inner[axis] = if side == 0 { 1 } else { g.n[axis] - 1 };
            if g.on_any_wall(Placement::Node, inner) || g.is_boundary_edge(axis, ijk) {
                continue;
            }
            let sign = if side == 0 { -1.0 } else { 1.0 };
            let area = g.weight(p, ijk) / g.h[axis];
            samples.push(BoundarySample { axis, side, edge: e, area, value: sign * h[eo[axis] + e] });
        }
    }
    let total: f64 = samples.iter().map(|s| s.area * s.value).sum();
    let mag: f64 = samples.iter().map(|s| s.area * s.value.abs()).sum();
    let relative_mean = if mag == 0.0 { 0.0 } else { total.abs() / mag };
    Ok(DtnTrace { samples, total, relative_mean })
}

/// Residuals of the potential form on a recovered state:
/// `‖curl A − H/λ‖ / ‖H/λ‖` over edges and
/// `‖λ² CURL curl A + 𝔣² A‖ / ‖𝔣² A‖` over faces.
pub fn equivalence_residuals(fh: &MeissnerStateFH, fa: &MeissnerStateFA) -> Result<(f64, f64)> {
    let g = fh.f.grid;
    let d = Disc::new(&g);
    let lam = fh.params.lambda;
    let h = fh.h.flatten();
    let a = fa.a.flatten();
    let cta = d.ops.curl_t.matvec(&a);
    let curl_a: Vec<f64> = (0..h.len()).map(|e| if d.boundary_edge[e] { h[e] / lam } else { cta[e] }).collect();
    let mut num = 0.0;
    let mut den = 0.0;
    for e in 0..h.len() {
        let w = d.ops.edge_weights[e];
        num += w * (curl_a[e] - h[e] / lam).powi(2);
        den += w * (h[e] / lam).powi(2);
    }
    let first = if den == 0.0 { num.sqrt() } else { (num / den).sqrt() };
    let ccurl = d.ops.curl.matvec(&curl_a);
    let mass = mass_times(&d, fh, &a)?;
    let v = g.cell_volume();
    let mut num = 0.0;
    let mut den = 0.0;
    for p in 0..a.len() {
        if d.wall_face[p] {
            continue;
        }
        let r = lam * lam * ccurl[p] + mass[p] / v;
        num += v * r * r;
        den += v * (mass[p] / v).powi(2);
    }
    let second = if den == 0.0 { num.sqrt() } else { (num / den).sqrt() };
    Ok((first, second))
}

/// `𝔣² A` as a face vector scaled by the cell volume.
fn mass_times(d: &Disc, fh: &MeissnerStateFH, a: &[f64]) -> Result<Vec<f64>> {
    let f = &fh.f.values;
    let w = &d.ops.node_weights;
    let mut out = vec![0.0; a.len()];
    for (n, gs) in d.interp.groups.iter().enumerate() {
        for gr in gs.iter().flatten() {
            let v = gr.weight * gr.value(a);
            for &(p, cp) in &gr.terms {
                out[p] += w[n] * f[n] * f[n] * cp * v;
            }
        }
    }
    Ok(out)
}

/// Energy of a potential-form state, up to a data-dependent constant.
///
/// The wall data enters through the boundary work `2λ Σ V B_e (CURL† A)_e`
/// over boundary edges, so no extension of the data is needed. For data with
/// a curl-free extension this differs from `omega_energy` by a constant.
pub fn discrete_energy(state: &MeissnerStateFA) -> Result<f64> {
    let g = state.f.grid;
    if state.a.grid != g || state.data.grid != g || state.a.placement != VectorPlacement::Face {
        return Err(Error::GridMismatch("state fields must share one grid with A on FACEs".into()));
    }
    let d = Disc::new(&g);
    let lam = state.params.lambda;
    let v = g.cell_volume();
    let f = &state.f.values;
    let a = state.a.flatten();
    let gradient = match state.params.kappa.finite() {
        Some(kappa) => {
            let gf = d.ops.grad.matvec(f);
            (lam / kappa).powi(2) * gf.iter().zip(&d.ops.edge_weights).map(|(x, w)| w * x * x).sum::<f64>()
        }
        None => 0.0,
    };
    let a2 = d.interp.squared_norm(&a);
    let bulk: f64 = (0..f.len()).map(|n| d.ops.node_weights[n] * g_density_sq(f[n], a2[n])).sum();
    let ca = d.ops.curl_t.matvec(&a);
    let mut field = 0.0;
    for (e, c) in ca.iter().enumerate() {
        if d.boundary_edge[e] {
            field += 2.0 * lam * v * state.data.values[e] * c;
        } else {
            field += v * (lam * c).powi(2);
        }
    }
    Ok(gradient + bulk + field)
}

/// Minimum of `Σ λ²|CURL H|² + |H|²` over edge fields with `H_T = B_T`,
/// attained by the linear screening field.
pub fn screening_energy(lambda: f64, data: &BoundaryData, grid: &StaggeredGrid) -> Result<f64> {
    if data.grid != *grid {
        return Err(Error::GridMismatch("boundary data lives on another grid".into()));
    }
    let d = Disc::new(grid);
    let l2 = lambda * lambda;
    let fw = &d.ops.face_weights;
    let ew = &d.ops.edge_weights;
    let mut t = Triplets::new(d.n_edges(), d.n_edges());
    for (e, w) in ew.iter().enumerate() {
        t.push(e, e, *w);
    }
    for (p, w) in fw.iter().enumerate() {
        let row: Vec<(usize, f64)> = d.ops.curl.row(p).collect();
        for &(i, ci) in &row {
            for &(j, cj) in &row {
                t.push(i, j, l2 * w * ci * cj);
            }
        }
    }
    let k = t.to_csr();
    let inner: Vec<usize> = (0..d.n_edges()).filter(|&e| !d.boundary_edge[e]).collect();
    let bd: Vec<f64> = (0..d.n_edges()).map(|e| if d.boundary_edge[e] { data.values[e] } else { 0.0 }).collect();
    let kb = k.matvec(&bd);
    let rhs: Vec<f64> = inner.iter().map(|&e| -kb[e]).collect();
    let x = linalg::solve(&k.submatrix(&inner, &inner), &rhs, Structure::SymmetricPositiveDefinite, 1e-13)?;
    let mut h = bd;
    for (i, &e) in inner.iter().enumerate() {
        h[e] = x[i];
    }
    let c = d.ops.curl.matvec(&h);
    let curl: f64 = c.iter().zip(fw).map(|(c, w)| w * (lambda * c).powi(2)).sum();
    let mass: f64 = h.iter().zip(ew).map(|(h, w)| w * h * h).sum();
    Ok(curl + mass)
}
