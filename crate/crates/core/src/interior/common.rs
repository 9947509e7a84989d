use crate::discrete::{NodeInterp, Operators, Placement, StaggeredGrid};
use crate::linalg::{CsrMatrix, Triplets};

/// Operators and lookup tables shared by the interior solvers.
pub(crate) struct Disc {
    pub g: StaggeredGrid,
    pub ops: Operators,
    pub interp: NodeInterp,
    /// Face average of node values (faces x nodes).
    pub pavg: CsrMatrix,
    pub boundary_edge: Vec<bool>,
    /// Faces lying in the wall plane normal to their own axis.
    pub wall_face: Vec<bool>,
    pub interior_node: Vec<bool>,
}

impl Disc {
    pub fn new(g: &StaggeredGrid) -> Self {
        let ops = Operators::new(g);
        let fo = g.component_offsets(true);
        let mut t = Triplets::new(fo[3], g.len(Placement::Node));
        let mut wall_face = vec![false; fo[3]];
        for a in 0..3 {
            let (b, c) = ((a + 1) % 3, (a + 2) % 3);
            let p = Placement::Face(a);
            for f in 0..g.len(p) {
                let ijk = g.unindex(p, f);
                wall_face[fo[a] + f] = g.on_wall(p, ijk, a);
                let nb = g.shift(Placement::Node, ijk, b, 1).expect("face corner");
                let nc = g.shift(Placement::Node, ijk, c, 1).expect("face corner");
                let nbc = g.shift(Placement::Node, nb, c, 1).expect("face corner");
                for q in [ijk, nb, nc, nbc] {
                    t.push(fo[a] + f, g.index(Placement::Node, q), 0.25);
                }
            }
        }
        let boundary_edge = (0..3)
            .flat_map(|a| {
                let p = Placement::Edge(a);
                (0..g.len(p)).map(move |e| g.is_boundary_edge(a, g.unindex(p, e)))
            })
            .collect();
        let interior_node = (0..g.len(Placement::Node))
            .map(|n| !g.on_any_wall(Placement::Node, g.unindex(Placement::Node, n)))
            .collect();
        Disc { g: *g, interp: NodeInterp::new(g), pavg: t.to_csr(), ops, boundary_edge, wall_face, interior_node }
    }

    pub fn n_nodes(&self) -> usize {
        self.ops.node_weights.len()
    }

    pub fn n_edges(&self) -> usize {
        self.ops.edge_weights.len()
    }

    pub fn n_faces(&self) -> usize {
        self.ops.face_weights.len()
    }

    /// Relative weak divergence of an edge field at interior nodes.
    pub fn divergence(&self, h: &[f64]) -> f64 {
        let d = self.ops.dual_div(h);
        let mut num = 0.0;
        for (i, x) in d.iter().enumerate() {
            if self.interior_node[i] {
                num += self.ops.node_weights[i] * x * x;
            }
        }
        let scale: f64 = h.iter().zip(&self.ops.edge_weights).map(|(v, w)| w * v * v).sum::<f64>().sqrt();
        let hmin = self.g.h.iter().copied().fold(f64::INFINITY, f64::min);
        if scale == 0.0 {
            0.0
        } else {
            num.sqrt() * hmin / scale
        }
    }
}
