use crate::discrete::{Placement, StaggeredGrid};

pub const NONE: usize = usize::MAX;

/// Numbering of unknowns ordered by position (third axis slowest), which
/// keeps the Jacobian narrow-banded on slab grids.
#[derive(Debug, Clone)]
pub struct DofMap {
    pub len: usize,
    pub nodes: Vec<usize>,
    /// Stacked edge or face lookup.
    pub vectors: Vec<usize>,
}

fn key(g: &StaggeredGrid, p: Placement, idx: usize, code: u8) -> ([usize; 3], u8) {
    let ijk = g.unindex(p, idx);
    let off = p.offsets();
    let h = [0, 1, 2].map(|a| 2 * ijk[a] + usize::from(off[a]));
    ([h[2], h[1], h[0]], code)
}

impl DofMap {
    /// `with_nodes`: include every node; `face`: vector unknowns live on
    /// faces (else edges); `keep(axis, ijk)` selects the vector unknowns.
    pub fn new(g: &StaggeredGrid, with_nodes: bool, face: bool, keep: impl Fn(usize, [usize; 3]) -> bool) -> Self {
        let mut items: Vec<(([usize; 3], u8), u8, usize)> = Vec::new();
        if with_nodes {
            for n in 0..g.len(Placement::Node) {
                items.push((key(g, Placement::Node, n, 0), 0, n));
            }
        }
        let off = g.component_offsets(face);
        for a in 0..3 {
            let p = if face { Placement::Face(a) } else { Placement::Edge(a) };
            for i in 0..g.len(p) {
                if keep(a, g.unindex(p, i)) {
                    items.push((key(g, p, i, 1 + a as u8), 1, off[a] + i));
                }
            }
        }
        items.sort_unstable_by_key(|it| it.0);
        let mut nodes = vec![NONE; if with_nodes { g.len(Placement::Node) } else { 0 }];
        let mut vectors = vec![NONE; off[3]];
        for (k, (_, kind, idx)) in items.iter().enumerate() {
            if *kind == 0 {
                nodes[*idx] = k;
            } else {
                vectors[*idx] = k;
            }
        }
        DofMap { len: items.len(), nodes, vectors }
    }
}
