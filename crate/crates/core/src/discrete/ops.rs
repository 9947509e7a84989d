use super::fields::{ScalarField, VectorField, VectorPlacement};
use super::grid::{Placement, StaggeredGrid};
use crate::error::{Error, Result};
use crate::linalg::{CsrMatrix, Triplets};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiffKind {
    Grad,
    Curl,
    Div,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Field {
    Scalar(ScalarField),
    Vector(VectorField),
}

/// Sparse incidence operators of a grid, acting on stacked component vectors.
#[derive(Debug, Clone)]
pub struct Operators {
    pub grid: StaggeredGrid,
    /// Nodes to edges.
    pub grad: CsrMatrix,
    /// Edges to faces.
    pub curl: CsrMatrix,
    /// Faces to cells.
    pub div: CsrMatrix,
    pub grad_t: CsrMatrix,
    pub curl_t: CsrMatrix,
    pub node_weights: Vec<f64>,
    pub edge_weights: Vec<f64>,
    pub face_weights: Vec<f64>,
}

pub fn grad_matrix(g: &StaggeredGrid) -> CsrMatrix {
    let eo = g.component_offsets(false);
    let mut t = Triplets::new(eo[3], g.len(Placement::Node));
    for a in 0..3 {
        let p = Placement::Edge(a);
        for e in 0..g.len(p) {
            let ijk = g.unindex(p, e);
            let up = g.shift(Placement::Node, ijk, a, 1).expect("edge has two end nodes");
            t.push(eo[a] + e, g.index(Placement::Node, up), 1.0 / g.h[a]);
            t.push(eo[a] + e, g.index(Placement::Node, ijk), -1.0 / g.h[a]);
        }
    }
    t.to_csr()
}

pub fn curl_matrix(g: &StaggeredGrid) -> CsrMatrix {
    let eo = g.component_offsets(false);
    let fo = g.component_offsets(true);
    let mut t = Triplets::new(fo[3], eo[3]);
    for a in 0..3 {
        let (b, c) = ((a + 1) % 3, (a + 2) % 3);
        let p = Placement::Face(a);
        for f in 0..g.len(p) {
            let ijk = g.unindex(p, f);
            let row = fo[a] + f;
            let ec = Placement::Edge(c);
            let eb = Placement::Edge(b);
            let c_up = g.shift(ec, ijk, b, 1).expect("face interior to its edges");
            let b_up = g.shift(eb, ijk, c, 1).expect("face interior to its edges");
            t.push(row, eo[c] + g.index(ec, c_up), 1.0 / g.h[b]);
            t.push(row, eo[c] + g.index(ec, ijk), -1.0 / g.h[b]);
            t.push(row, eo[b] + g.index(eb, b_up), -1.0 / g.h[c]);
            t.push(row, eo[b] + g.index(eb, ijk), 1.0 / g.h[c]);
        }
    }
    t.to_csr()
}

pub fn div_matrix(g: &StaggeredGrid) -> CsrMatrix {
    let fo = g.component_offsets(true);
    let mut t = Triplets::new(g.len(Placement::Cell), fo[3]);
    for cidx in 0..g.len(Placement::Cell) {
        let ijk = g.unindex(Placement::Cell, cidx);
        for a in 0..3 {
            let p = Placement::Face(a);
            let up = g.shift(p, ijk, a, 1).expect("cell between two faces");
            t.push(cidx, fo[a] + g.index(p, up), 1.0 / g.h[a]);
            t.push(cidx, fo[a] + g.index(p, ijk), -1.0 / g.h[a]);
        }
    }
    t.to_csr()
}

fn stacked_weights(g: &StaggeredGrid, vp: VectorPlacement) -> Vec<f64> {
    (0..3).flat_map(|a| g.weights(vp.component(a))).collect()
}

impl Operators {
    pub fn new(grid: &StaggeredGrid) -> Self {
        let grad = grad_matrix(grid);
        let curl = curl_matrix(grid);
        Operators {
            grid: *grid,
            grad_t: grad.transpose(),
            curl_t: curl.transpose(),
            div: div_matrix(grid),
            grad,
            curl,
            node_weights: grid.weights(Placement::Node),
            edge_weights: stacked_weights(grid, VectorPlacement::Edge),
            face_weights: stacked_weights(grid, VectorPlacement::Face),
        }
    }

    /// Weighted divergence of a stacked edge field at nodes, `-(Gᵀ W u) / w`.
    pub fn dual_div(&self, u: &[f64]) -> Vec<f64> {
        let wu: Vec<f64> = u.iter().zip(&self.edge_weights).map(|(a, b)| a * b).collect();
        self.grad_t.matvec(&wu).iter().zip(&self.node_weights).map(|(s, w)| -s / w).collect()
    }

    /// Node Laplacian with natural (Neumann) conditions on walls.
    pub fn neumann_laplacian(&self) -> CsrMatrix {
        let mut t = Triplets::new(self.grad.ncols, self.grad.ncols);
        for e in 0..self.grad.nrows {
            let row: Vec<(usize, f64)> = self.grad.row(e).collect();
            for &(i, gi) in &row {
                for &(j, gj) in &row {
                    t.push(i, j, -self.edge_weights[e] * gi * gj / self.node_weights[i]);
                }
            }
        }
        t.to_csr()
    }

    /// `⟨CURL u, v⟩_faces − ⟨u, Cᵀ v⟩_edges`, summed from the stencils of the
    /// wall-tangential edges only.
    pub fn curl_boundary_term(&self, u: &[f64], v: &[f64]) -> f64 {
        let g = &self.grid;
        let eo = g.component_offsets(false);
        let mut acc = 0.0;
        for a in 0..3 {
            let p = Placement::Edge(a);
            for e in 0..g.len(p) {
                if !g.is_boundary_edge(a, g.unindex(p, e)) {
                    continue;
                }
                let ge = eo[a] + e;
                let we = self.edge_weights[ge];
                for (f, c) in self.curl_t.row(ge) {
                    acc += u[ge] * c * v[f] * (self.face_weights[f] - we);
                }
            }
        }
        acc
    }
}

pub(crate) fn same_grid(a: &StaggeredGrid, b: &StaggeredGrid) -> Result<()> {
    if a != b {
        return Err(Error::GridMismatch("operands live on different grids".into()));
    }
    Ok(())
}

pub fn grad(f: &ScalarField) -> Result<VectorField> {
    if f.placement != Placement::Node {
        return Err(Error::PlacementMismatch("GRAD acts on NODE scalars".into()));
    }
    VectorField::from_flat(f.grid, VectorPlacement::Edge, &grad_matrix(&f.grid).matvec(&f.values))
}

pub fn curl(u: &VectorField) -> Result<VectorField> {
    if u.placement != VectorPlacement::Edge {
        return Err(Error::PlacementMismatch("CURL acts on EDGE vectors".into()));
    }
    VectorField::from_flat(u.grid, VectorPlacement::Face, &curl_matrix(&u.grid).matvec(&u.flatten()))
}

/// Transpose of CURL: faces back to edges.
pub fn dual_curl(v: &VectorField) -> Result<VectorField> {
    if v.placement != VectorPlacement::Face {
        return Err(Error::PlacementMismatch("dual curl acts on FACE vectors".into()));
    }
    VectorField::from_flat(v.grid, VectorPlacement::Edge, &curl_matrix(&v.grid).transpose().matvec(&v.flatten()))
}

pub fn div(v: &VectorField) -> Result<ScalarField> {
    if v.placement != VectorPlacement::Face {
        return Err(Error::PlacementMismatch("DIV acts on FACE vectors".into()));
    }
    ScalarField::new(v.grid, Placement::Cell, div_matrix(&v.grid).matvec(&v.flatten()))
}

pub fn apply_diff(kind: DiffKind, field: &Field) -> Result<Field> {
    match (kind, field) {
        (DiffKind::Grad, Field::Scalar(s)) => grad(s).map(Field::Vector),
        (DiffKind::Curl, Field::Vector(v)) => curl(v).map(Field::Vector),
        (DiffKind::Div, Field::Vector(v)) => div(v).map(Field::Scalar),
        _ => Err(Error::PlacementMismatch(format!("{kind:?} is not defined for this field"))),
    }
}
