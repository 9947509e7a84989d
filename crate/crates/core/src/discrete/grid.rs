use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum BoundaryKind {
    Wall,
    Periodic,
}

/// Where a degree of freedom lives on the staggered lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Placement {
    Node,
    Edge(usize),
    Face(usize),
    Cell,
}

impl Placement {
    pub fn name(&self) -> &'static str {
        match self {
            Placement::Node => "NODE",
            Placement::Edge(_) => "EDGE",
            Placement::Face(_) => "FACE",
            Placement::Cell => "CELL",
        }
    }

    pub fn axis(&self) -> Option<usize> {
        match *self {
            Placement::Edge(a) | Placement::Face(a) => Some(a),
            _ => None,
        }
    }

    /// Half-cell offset of the location along each axis.
    pub fn offsets(&self) -> [bool; 3] {
        match *self {
            Placement::Node => [false; 3],
            Placement::Cell => [true; 3],
            Placement::Edge(a) => {
                let mut o = [false; 3];
                o[a] = true;
                o
            }
            Placement::Face(a) => {
                let mut o = [true; 3];
                o[a] = false;
                o
            }
        }
    }
}

/// Grid description accepted by [`build_grid`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub dims: usize,
    pub extents: Vec<usize>,
    pub lengths: Vec<f64>,
    pub boundary: Vec<BoundaryKind>,
}

impl GridSpec {
    /// The slab `[0, length]` with `cells` cells.
    pub fn slab(cells: usize, length: f64) -> Self {
        GridSpec { dims: 1, extents: vec![cells], lengths: vec![length], boundary: vec![BoundaryKind::Wall] }
    }

    pub fn box3(extents: [usize; 3], lengths: [f64; 3], boundary: [BoundaryKind; 3]) -> Self {
        GridSpec { dims: 3, extents: extents.to_vec(), lengths: lengths.to_vec(), boundary: boundary.to_vec() }
    }
}

/// Axis-aligned staggered box grid.
///
/// A one-dimensional grid is stored as a `1 x 1 x N` box whose first two axes
/// are periodic with a single cell of unit width, so every operator works
/// unchanged along the active third axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StaggeredGrid {
    pub dims: usize,
    pub n: [usize; 3],
    pub h: [f64; 3],
    pub bc: [BoundaryKind; 3],
}

pub fn build_grid(spec: &GridSpec) -> Result<StaggeredGrid> {
    let bad = |m: &str| Err(Error::InvalidSpec(m.to_string()));
    if spec.dims != 1 && spec.dims != 3 {
        return bad("dims must be 1 or 3");
    }
    if spec.extents.len() != spec.dims || spec.lengths.len() != spec.dims || spec.boundary.len() != spec.dims {
        return bad("extents, lengths and boundary must have one entry per axis");
    }
    for a in 0..spec.dims {
        let (n, l) = (spec.extents[a], spec.lengths[a]);
        if n == 0 {
            return bad("every axis needs at least one cell");
        }
        if !(l.is_finite() && l > 0.0) {
            return bad("lengths must be positive and finite");
        }
        if spec.boundary[a] == BoundaryKind::Wall && n < 2 {
            return bad("WALL axes need at least 2 cells");
        }
    }
    if spec.dims == 1 {
        let (n, l) = (spec.extents[0], spec.lengths[0]);
        return Ok(StaggeredGrid {
            dims: 1,
            n: [1, 1, n],
            h: [1.0, 1.0, l / n as f64],
            bc: [BoundaryKind::Periodic, BoundaryKind::Periodic, spec.boundary[0]],
        });
    }
    let mut n = [0; 3];
    let mut h = [0.0; 3];
    let mut bc = [BoundaryKind::Wall; 3];
    for a in 0..3 {
        n[a] = spec.extents[a];
        h[a] = spec.lengths[a] / n[a] as f64;
        bc[a] = spec.boundary[a];
    }
    Ok(StaggeredGrid { dims: 3, n, h, bc })
}

impl StaggeredGrid {
    pub fn is_wall(&self, axis: usize) -> bool {
        self.bc[axis] == BoundaryKind::Wall
    }

    /// Number of node positions along an axis.
    pub fn node_count(&self, axis: usize) -> usize {
        self.n[axis] + usize::from(self.is_wall(axis))
    }

    pub fn shape(&self, p: Placement) -> [usize; 3] {
        let off = p.offsets();
        let mut s = [0; 3];
        for a in 0..3 {
            s[a] = if off[a] { self.n[a] } else { self.node_count(a) };
        }
        s
    }

    pub fn len(&self, p: Placement) -> usize {
        self.shape(p).iter().product()
    }

    #[inline]
    pub fn index(&self, p: Placement, ijk: [usize; 3]) -> usize {
        let s = self.shape(p);
        ijk[0] + s[0] * (ijk[1] + s[1] * ijk[2])
    }

    #[inline]
    pub fn unindex(&self, p: Placement, idx: usize) -> [usize; 3] {
        let s = self.shape(p);
        [idx % s[0], (idx / s[0]) % s[1], idx / (s[0] * s[1])]
    }

    /// Shift `ijk` by `d` along `axis` within placement `p`, wrapping on
    /// periodic axes; `None` when the shifted point leaves the grid.
    #[inline]
    pub fn shift(&self, p: Placement, ijk: [usize; 3], axis: usize, d: isize) -> Option<[usize; 3]> {
        let s = self.shape(p)[axis] as isize;
        let mut v = ijk[axis] as isize + d;
        if self.is_wall(axis) {
            if v < 0 || v >= s {
                return None;
            }
        } else {
            v = v.rem_euclid(s);
        }
        let mut out = ijk;
        out[axis] = v as usize;
        Some(out)
    }

    pub fn position(&self, p: Placement, ijk: [usize; 3]) -> [f64; 3] {
        let off = p.offsets();
        let mut x = [0.0; 3];
        for a in 0..3 {
            x[a] = (ijk[a] as f64 + if off[a] { 0.5 } else { 0.0 }) * self.h[a];
        }
        x
    }

    pub fn lengths(&self) -> [f64; 3] {
        [0, 1, 2].map(|a| self.n[a] as f64 * self.h[a])
    }

    pub fn cell_volume(&self) -> f64 {
        self.h.iter().product()
    }

    pub fn volume(&self) -> f64 {
        self.lengths().iter().product()
    }

    /// Whether the location sits on the wall plane of `axis`.
    pub fn on_wall(&self, p: Placement, ijk: [usize; 3], axis: usize) -> bool {
        self.is_wall(axis) && !p.offsets()[axis] && (ijk[axis] == 0 || ijk[axis] == self.n[axis])
    }

    pub fn on_any_wall(&self, p: Placement, ijk: [usize; 3]) -> bool {
        (0..3).any(|a| self.on_wall(p, ijk, a))
    }

    /// Product-rule quadrature weight of a location.
    pub fn weight(&self, p: Placement, ijk: [usize; 3]) -> f64 {
        let mut w = self.cell_volume();
        for a in 0..3 {
            if self.on_wall(p, ijk, a) {
                w *= 0.5;
            }
        }
        w
    }

    pub fn weights(&self, p: Placement) -> Vec<f64> {
        (0..self.len(p)).map(|i| self.weight(p, self.unindex(p, i))).collect()
    }

    /// Edges tangential to some wall (where tangential traces are prescribed).
    pub fn is_boundary_edge(&self, axis: usize, ijk: [usize; 3]) -> bool {
        (0..3).any(|b| b != axis && self.on_wall(Placement::Edge(axis), ijk, b))
    }

    /// Offsets of the three edge (or face) components inside a stacked vector.
    pub fn component_offsets(&self, face: bool) -> [usize; 4] {
        let mut o = [0; 4];
        for a in 0..3 {
            let p = if face { Placement::Face(a) } else { Placement::Edge(a) };
            o[a + 1] = o[a] + self.len(p);
        }
        o
    }

    /// The active axes: all three for 3D grids, only the last for slabs.
    pub fn active_axes(&self) -> std::ops::Range<usize> {
        if self.dims == 1 {
            2..3
        } else {
            0..3
        }
    }
}
