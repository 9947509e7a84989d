use std::fmt::Write as _;

use super::grid::{Placement, StaggeredGrid};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub grid: StaggeredGrid,
    pub placement: Placement,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VectorPlacement {
    Edge,
    Face,
}

impl VectorPlacement {
    pub fn component(self, axis: usize) -> Placement {
        match self {
            VectorPlacement::Edge => Placement::Edge(axis),
            VectorPlacement::Face => Placement::Face(axis),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    pub grid: StaggeredGrid,
    pub placement: VectorPlacement,
    pub comps: [Vec<f64>; 3],
}

impl ScalarField {
    pub fn new(grid: StaggeredGrid, placement: Placement, values: Vec<f64>) -> Result<Self> {
        if !matches!(placement, Placement::Node | Placement::Cell) {
            return Err(Error::PlacementMismatch(format!("scalar fields live on NODE or CELL, not {placement:?}")));
        }
        if values.len() != grid.len(placement) {
            return Err(Error::GridMismatch(format!(
                "{} values for {} {} locations",
                values.len(),
                grid.len(placement),
                placement.name()
            )));
        }
        Ok(ScalarField { grid, placement, values })
    }

    pub fn constant(grid: StaggeredGrid, placement: Placement, c: f64) -> Self {
        ScalarField { grid, placement, values: vec![c; grid.len(placement)] }
    }

    pub fn from_fn(grid: StaggeredGrid, placement: Placement, f: impl Fn([f64; 3]) -> f64) -> Self {
        let values = (0..grid.len(placement)).map(|i| f(grid.position(placement, grid.unindex(placement, i)))).collect();
        ScalarField { grid, placement, values }
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("placement,axis,i,j,k,value\n");
        write_rows(&mut s, &self.grid, self.placement, &self.values);
        s
    }
}

impl VectorField {
    pub fn new(grid: StaggeredGrid, placement: VectorPlacement, comps: [Vec<f64>; 3]) -> Result<Self> {
        for (a, c) in comps.iter().enumerate() {
            if c.len() != grid.len(placement.component(a)) {
                return Err(Error::GridMismatch(format!("component {a} has {} values", c.len())));
            }
        }
        Ok(VectorField { grid, placement, comps })
    }

    pub fn zeros(grid: StaggeredGrid, placement: VectorPlacement) -> Self {
        VectorField { grid, placement, comps: [0, 1, 2].map(|a| vec![0.0; grid.len(placement.component(a))]) }
    }

    pub fn from_fn(grid: StaggeredGrid, placement: VectorPlacement, f: impl Fn([f64; 3]) -> [f64; 3]) -> Self {
        let comps = [0, 1, 2].map(|a| {
            let p = placement.component(a);
            (0..grid.len(p)).map(|i| f(grid.position(p, grid.unindex(p, i)))[a]).collect()
        });
        VectorField { grid, placement, comps }
    }

    /// Components stacked as one vector (x block, then y, then z).
    pub fn flatten(&self) -> Vec<f64> {
        self.comps.concat()
    }

    pub fn from_flat(grid: StaggeredGrid, placement: VectorPlacement, v: &[f64]) -> Result<Self> {
        let o = grid.component_offsets(placement == VectorPlacement::Face);
        if v.len() != o[3] {
            return Err(Error::GridMismatch(format!("{} values for {} stacked locations", v.len(), o[3])));
        }
        Ok(VectorField { grid, placement, comps: [0, 1, 2].map(|a| v[o[a]..o[a + 1]].to_vec()) })
    }

    /// Values on the wall plane of `axis` whose components are tangential
    /// (edges) or normal (faces) to it, as `(component, index)` pairs.
    pub fn wall_trace(&self, axis: usize) -> Vec<(usize, usize, f64)> {
        let g = &self.grid;
        let mut out = Vec::new();
        for a in 0..3 {
            let p = self.placement.component(a);
            let wanted = match self.placement {
                VectorPlacement::Edge => a != axis,
                VectorPlacement::Face => a == axis,
            };
            if !wanted {
                continue;
            }
            for (i, v) in self.comps[a].iter().enumerate() {
                if g.on_wall(p, g.unindex(p, i), axis) {
                    out.push((a, i, *v));
                }
            }
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("placement,axis,i,j,k,value\n");
        for a in 0..3 {
            write_rows(&mut s, &self.grid, self.placement.component(a), &self.comps[a]);
        }
        s
    }
}

fn write_rows(s: &mut String, g: &StaggeredGrid, p: Placement, values: &[f64]) {
    let axis = p.axis().map_or("-".to_string(), |a| a.to_string());
    for (idx, v) in values.iter().enumerate() {
        let [i, j, k] = g.unindex(p, idx);
        let _ = writeln!(s, "{},{},{},{},{},{:.17e}", p.name(), axis, i, j, k, v);
    }
}

/// Parse a field CSV produced by `to_csv` back into `(placement, index, value)` rows.
pub fn parse_field_csv(g: &StaggeredGrid, text: &str) -> Result<Vec<(Placement, usize, f64)>> {
    let mut rows = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("placement") {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        let err = || Error::Parse(format!("line {}: malformed field row", ln + 1));
        if parts.len() != 6 {
            return Err(err());
        }
        let axis: Option<usize> = if parts[1] == "-" { None } else { Some(parts[1].parse().map_err(|_| err())?) };
        let p = match (parts[0], axis) {
            ("NODE", None) => Placement::Node,
            ("CELL", None) => Placement::Cell,
            ("EDGE", Some(a)) if a < 3 => Placement::Edge(a),
            ("FACE", Some(a)) if a < 3 => Placement::Face(a),
            _ => return Err(err()),
        };
        let mut ijk = [0usize; 3];
        for c in 0..3 {
            ijk[c] = parts[c + 2].parse().map_err(|_| err())?;
        }
        let shape = g.shape(p);
        if (0..3).any(|a| ijk[a] >= shape[a]) {
            return Err(err());
        }
        let v: f64 = parts[5].parse().map_err(|_| err())?;
        rows.push((p, g.index(p, ijk), v));
    }
    Ok(rows)
}
