use serde::{Deserialize, Serialize};

use super::{g_density_sq, GLParameters};
use crate::discrete::{same_grid, NodeInterp, Operators, Placement, ScalarField, VectorField, VectorPlacement};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub gradient_term: f64,
    pub g_term: f64,
    pub field_term: f64,
    pub total: f64,
}

/// Product-rule quadrature of the domain energy for `f` on nodes, `A` on
/// faces and the applied-field extension on edges.
///
/// On wall-tangential edges `λ curl A` is taken equal to the prescribed
/// trace, so only interior edges enter the field term.
pub fn omega_energy(f: &ScalarField, a: &VectorField, b_ext: &VectorField, params: &GLParameters) -> Result<EnergyBreakdown> {
    same_grid(&f.grid, &a.grid)?;
    same_grid(&f.grid, &b_ext.grid)?;
    if f.placement != Placement::Node || a.placement != VectorPlacement::Face || b_ext.placement != VectorPlacement::Edge {
        return Err(Error::GridMismatch("expected f on NODE, A on FACE and the extension on EDGE".into()));
    }
    let g = f.grid;
    let ops = Operators::new(&g);
    let lambda = params.lambda;

    let gradient_term = match params.kappa.finite() {
        Some(kappa) => {
            let gf = ops.grad.matvec(&f.values);
            (lambda / kappa).powi(2) * gf.iter().zip(&ops.edge_weights).map(|(d, w)| w * d * d).sum::<f64>()
        }
        None => 0.0,
    };

    let av = a.flatten();
    let a2 = NodeInterp::new(&g).squared_norm(&av);
    let g_term = f.values.iter().zip(&a2).zip(&ops.node_weights).map(|((fv, a2), w)| w * g_density_sq(*fv, *a2)).sum();

    let curl_a = ops.curl_t.matvec(&av);
    let bv = b_ext.flatten();
    let eo = g.component_offsets(false);
    let mut field_term = 0.0;
    for axis in 0..3 {
        let p = Placement::Edge(axis);
        for e in 0..g.len(p) {
            if g.is_boundary_edge(axis, g.unindex(p, e)) {
                continue;
            }
            let k = eo[axis] + e;
            field_term += ops.edge_weights[k] * (lambda * curl_a[k] - bv[k]).powi(2);
        }
    }
    Ok(EnergyBreakdown { gradient_term, g_term, field_term, total: gradient_term + g_term + field_term })
}
