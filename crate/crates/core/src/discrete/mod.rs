//! Staggered box grids with exact discrete grad, curl and div.

mod fields;
mod grid;
mod hodge;
mod interp;
mod norms;
mod ops;

pub use fields::{parse_field_csv, ScalarField, VectorField, VectorPlacement};
pub use grid::{build_grid, BoundaryKind, GridSpec, Placement, StaggeredGrid};
pub use interp::{axis_stencil, NodeInterp, SquareGroup};
pub use hodge::{hodge_decompose, interior_divergence, orthogonality_defect};
pub use norms::{field_norm, weighted_l2, NormKind};
pub use ops::{apply_diff, curl, curl_matrix, div, div_matrix, dual_curl, grad, grad_matrix, DiffKind, Field, Operators};
pub(crate) use ops::same_grid;

/// Empirical ratio `‖u‖_H1 / (‖div u‖ + ‖curl u‖ + ‖ν·u‖_∂ + ε)`.
pub fn divcurl_probe(u: &VectorField) -> f64 {
    const EPS: f64 = 1e-30;
    let g = u.grid;
    let ops = Operators::new(&g);
    let uv = u.flatten();
    let h1 = field_norm(&Field::Vector(u.clone()), NormKind::H1);
    if h1 == 0.0 {
        return 0.0;
    }
    let (div_norm, curl_norm) = match u.placement {
        VectorPlacement::Edge => {
            let d = ops.dual_div(&uv);
            let mut dsq = 0.0;
            for (i, x) in d.iter().enumerate() {
                if !g.on_any_wall(Placement::Node, g.unindex(Placement::Node, i)) {
                    dsq += ops.node_weights[i] * x * x;
                }
            }
            (dsq.sqrt(), weighted_l2(&ops.curl.matvec(&uv), &ops.face_weights))
        }
        VectorPlacement::Face => {
            let d = ops.div.matvec(&uv);
            let cv = ops.curl_t.matvec(&uv);
            let eo = g.component_offsets(false);
            let mut csq = 0.0;
            for a in 0..3 {
                let p = Placement::Edge(a);
                for e in 0..g.len(p) {
                    if !g.is_boundary_edge(a, g.unindex(p, e)) {
                        csq += ops.edge_weights[eo[a] + e] * cv[eo[a] + e].powi(2);
                    }
                }
            }
            (weighted_l2(&d, &vec![g.cell_volume(); d.len()]), csq.sqrt())
        }
    };
    let mut nsq = 0.0;
    for axis in 0..3 {
        if !g.is_wall(axis) {
            continue;
        }
        let area = g.cell_volume() / g.h[axis];
        let p = u.placement.component(axis);
        for (i, v) in u.comps[axis].iter().enumerate() {
            let ijk = g.unindex(p, i);
            let at_wall = match u.placement {
                VectorPlacement::Face => g.on_wall(p, ijk, axis),
                VectorPlacement::Edge => ijk[axis] == 0 || ijk[axis] + 1 == g.n[axis],
            };
            if at_wall {
                let mut w = area;
                for b in 0..3 {
                    if b != axis && g.on_wall(p, ijk, b) {
                        w *= 0.5;
                    }
                }
                nsq += w * v * v;
            }
        }
    }
    h1 / (div_norm + curl_norm + nsq.sqrt() + EPS)
}
