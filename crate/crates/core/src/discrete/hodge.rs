use super::fields::{ScalarField, VectorField, VectorPlacement};
use super::grid::Placement;
use super::norms::weighted_l2;
use super::ops::Operators;
use crate::error::{Error, Result};
use crate::linalg::{cg, Triplets};

/// Split an edge field as `A = GRAD p + B` with `B` weakly divergence free
/// and `p` vanishing on walls.
pub fn hodge_decompose(a: &VectorField) -> Result<(ScalarField, VectorField)> {
    if a.placement != VectorPlacement::Edge {
        return Err(Error::PlacementMismatch("decomposition acts on EDGE vectors".into()));
    }
    let g = a.grid;
    let ops = Operators::new(&g);
    let av = a.flatten();
    let nn = g.len(Placement::Node);
    let free: Vec<usize> = (0..nn).filter(|&i| !g.on_any_wall(Placement::Node, g.unindex(Placement::Node, i))).collect();
    let mut pos = vec![usize::MAX; nn];
    for (k, &i) in free.iter().enumerate() {
        pos[i] = k;
    }
    let mut t = Triplets::new(free.len(), free.len());
    for e in 0..ops.grad.nrows {
        let row: Vec<(usize, f64)> = ops.grad.row(e).collect();
        for &(i, gi) in &row {
            for &(j, gj) in &row {
                if pos[i] != usize::MAX && pos[j] != usize::MAX {
                    t.push(pos[i], pos[j], ops.edge_weights[e] * gi * gj);
                }
            }
        }
    }
    let lap = t.to_csr();
    let wa: Vec<f64> = av.iter().zip(&ops.edge_weights).map(|(x, w)| x * w).collect();
    let full_rhs = ops.grad_t.matvec(&wa);
    let mut rhs: Vec<f64> = free.iter().map(|&i| full_rhs[i]).collect();
    let periodic = free.len() == nn;
    if periodic {
        let mean = rhs.iter().sum::<f64>() / rhs.len() as f64;
        rhs.iter_mut().for_each(|r| *r -= mean);
    }
    let mut p = vec![0.0; nn];
    if rhs.iter().any(|r| *r != 0.0) {
        let (sol, _) = cg(&lap, &rhs, None, 1e-13, 50 * free.len().max(100))?;
        for (k, &i) in free.iter().enumerate() {
            p[i] = sol[k];
        }
    }
    if periodic {
        let mean = p.iter().sum::<f64>() / nn as f64;
        p.iter_mut().for_each(|x| *x -= mean);
    }
    let gp = ops.grad.matvec(&p);
    let b: Vec<f64> = av.iter().zip(&gp).map(|(x, y)| x - y).collect();
    Ok((ScalarField::new(g, Placement::Node, p)?, VectorField::from_flat(g, VectorPlacement::Edge, &b)?))
}

/// Relative size of the weak divergence of an edge field at interior nodes.
pub fn interior_divergence(u: &VectorField, reference: f64) -> f64 {
    let g = u.grid;
    let ops = Operators::new(&g);
    let d = ops.dual_div(&u.flatten());
    let mut acc = 0.0;
    for (i, x) in d.iter().enumerate() {
        let ijk = g.unindex(Placement::Node, i);
        if !g.on_any_wall(Placement::Node, ijk) {
            acc += ops.node_weights[i] * x * x;
        }
    }
    acc.sqrt() / reference.max(f64::MIN_POSITIVE)
}

/// Normalized `⟨GRAD p, B⟩` for a decomposition.
pub fn orthogonality_defect(p: &ScalarField, b: &VectorField) -> f64 {
    let ops = Operators::new(&b.grid);
    let gp = ops.grad.matvec(&p.values);
    let bv = b.flatten();
    let inner: f64 = gp.iter().zip(&bv).zip(&ops.edge_weights).map(|((x, y), w)| x * y * w).sum();
    let scale = weighted_l2(&gp, &ops.edge_weights) * weighted_l2(&bv, &ops.edge_weights);
    if scale == 0.0 {
        0.0
    } else {
        inner.abs() / scale
    }
}
