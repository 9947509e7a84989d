use super::grid::{Placement, StaggeredGrid};

/// One weighted square in a nodal `|A|²`: `weight · (Σ coeff · A_face)²`.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareGroup {
    pub weight: f64,
    /// `(stacked face index, coefficient)` pairs.
    pub terms: Vec<(usize, f64)>,
}

impl SquareGroup {
    pub fn value(&self, faces: &[f64]) -> f64 {
        self.terms.iter().map(|&(f, c)| c * faces[f]).sum()
    }
}

/// Interpolation of face components to nodes.
///
/// Along an axis where the node sits between two faces, squares are
/// averaged; at a wall the component is first extrapolated linearly from the
/// two nearest faces and then squared. A nodal `|A|²` is therefore
/// nonnegative, and it vanishes at every node only if `A` vanishes on every
/// face.
#[derive(Debug, Clone)]
pub struct NodeInterp {
    /// For each node and component, the groups whose weighted squares sum
    /// to that component's squared magnitude.
    pub groups: Vec<[Vec<SquareGroup>; 3]>,
}

pub fn axis_stencil(g: &StaggeredGrid, axis: usize, i: usize) -> Vec<(usize, f64)> {
    let n = g.n[axis];
    if g.is_wall(axis) {
        if i == 0 {
            vec![(0, 1.5), (1, -0.5)]
        } else if i == n {
            vec![(n - 1, 1.5), (n - 2, -0.5)]
        } else {
            vec![(i - 1, 0.5), (i, 0.5)]
        }
    } else {
        let lo = (i + n - 1) % n;
        if lo == i {
            vec![(i, 1.0)]
        } else {
            vec![(lo, 0.5), (i, 0.5)]
        }
    }
}

fn is_extrapolation(stencil: &[(usize, f64)]) -> bool {
    stencil.iter().any(|&(_, w)| w < 0.0)
}

impl NodeInterp {
    pub fn new(g: &StaggeredGrid) -> Self {
        let fo = g.component_offsets(true);
        let groups = (0..g.len(Placement::Node))
            .map(|nidx| {
                let ijk = g.unindex(Placement::Node, nidx);
                [0, 1, 2].map(|a| {
                    let (b, c) = ((a + 1) % 3, (a + 2) % 3);
                    let sb = axis_stencil(g, b, ijk[b]);
                    let sc = axis_stencil(g, c, ijk[c]);
                    // Averaging axes index the groups, extrapolating axes fill them.
                    let split = |s: &Vec<(usize, f64)>| -> (Vec<(usize, f64)>, Vec<(usize, f64)>) {
                        if is_extrapolation(s) {
                            (vec![(usize::MAX, 1.0)], s.clone())
                        } else {
                            (s.clone(), vec![(usize::MAX, 1.0)])
                        }
                    };
                    let (ob, ib) = split(&sb);
                    let (oc, ic) = split(&sc);
                    let mut out = Vec::new();
                    for &(gb, wb) in &ob {
                        for &(gc, wc) in &oc {
                            let mut terms = Vec::new();
                            for &(eb, cb) in &ib {
                                for &(ec, cc) in &ic {
                                    let mut f = ijk;
                                    f[b] = if gb == usize::MAX { eb } else { gb };
                                    f[c] = if gc == usize::MAX { ec } else { gc };
                                    terms.push((fo[a] + g.index(Placement::Face(a), f), cb * cc));
                                }
                            }
                            out.push(SquareGroup { weight: wb * wc, terms });
                        }
                    }
                    out
                })
            })
            .collect();
        NodeInterp { groups }
    }

    /// Node values of each component of a stacked face field.
    pub fn at_nodes(&self, faces: &[f64]) -> Vec<[f64; 3]> {
        self.groups
            .iter()
            .map(|gs| [0, 1, 2].map(|a| gs[a].iter().map(|gr| gr.weight * gr.value(faces)).sum()))
            .collect()
    }

    /// Nodal `|A|²`.
    pub fn squared_norm(&self, faces: &[f64]) -> Vec<f64> {
        self.groups
            .iter()
            .map(|gs| gs.iter().flatten().map(|gr| gr.weight * gr.value(faces).powi(2)).sum())
            .collect()
    }
}
