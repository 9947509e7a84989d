use serde::{Deserialize, Serialize};

use crate::discrete::{grad_matrix, curl_matrix, Placement, ScalarField, StaggeredGrid};
use crate::error::{Error, Result};

/// Tangential wall data on the boundary edges of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryData {
    pub grid: StaggeredGrid,
    /// Stacked edge vector, nonzero only on wall-tangential edges.
    pub values: Vec<f64>,
    /// Curl-free extension into the domain, when one exists.
    pub extension: Option<Vec<f64>>,
    pub sup_norm: f64,
}

/// Serializable description of the wall data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "SCREAMING_SNAKE_CASE", deny_unknown_fields)]
pub enum DataSpec {
    /// Constant field `amplitude * direction` traced on every wall.
    Uniform { amplitude: f64, direction: [f64; 3] },
    /// Field `amplitude * e_y` on the `z = 0` wall only.
    OneSided { amplitude: f64 },
    /// Gradient of `amplitude * (c₀(x² − z²)/2 + c₁xy + c₂(y² − z²)/2)` on an all-wall box.
    Harmonic { amplitude: f64, coefficients: [f64; 3] },
}

fn boundary_mask(g: &StaggeredGrid) -> Vec<bool> {
    (0..3)
        .flat_map(|a| {
            let p = Placement::Edge(a);
            (0..g.len(p)).map(move |e| g.is_boundary_edge(a, g.unindex(p, e)))
        })
        .collect()
}

impl BoundaryData {
    fn from_extension(grid: StaggeredGrid, ext: Vec<f64>, curl_free: bool) -> Self {
        let mask = boundary_mask(&grid);
        let values: Vec<f64> = ext.iter().zip(&mask).map(|(v, m)| if *m { *v } else { 0.0 }).collect();
        let mut d = BoundaryData { grid, values, extension: curl_free.then_some(ext), sup_norm: 0.0 };
        d.sup_norm = d.compute_sup_norm();
        d
    }

    pub fn zero(grid: StaggeredGrid) -> Self {
        let n = grid.component_offsets(false)[3];
        BoundaryData { grid, values: vec![0.0; n], extension: Some(vec![0.0; n]), sup_norm: 0.0 }
    }

    /// Trace of the constant field `v`.
    pub fn uniform(grid: StaggeredGrid, v: [f64; 3]) -> Self {
        let ext: Vec<f64> = (0..3).flat_map(|a| vec![v[a]; grid.len(Placement::Edge(a))]).collect();
        Self::from_extension(grid, ext, true)
    }

    /// Trace of `GRAD φ` for a node potential.
    pub fn from_potential(phi: &ScalarField) -> Result<Self> {
        if phi.placement != Placement::Node {
            return Err(Error::PlacementMismatch("wall potentials live on NODEs".into()));
        }
        Ok(Self::from_extension(phi.grid, grad_matrix(&phi.grid).matvec(&phi.values), true))
    }

    /// Field `b e_y` on the `z = 0` wall and zero on the opposite wall.
    pub fn one_sided(grid: StaggeredGrid, b: f64) -> Result<Self> {
        if !grid.is_wall(2) {
            return Err(Error::InvalidData("one-sided data needs a WALL third axis".into()));
        }
        let eo = grid.component_offsets(false);
        let mut values = vec![0.0; eo[3]];
        let p = Placement::Edge(1);
        for e in 0..grid.len(p) {
            let ijk = grid.unindex(p, e);
            if ijk[2] == 0 && grid.is_boundary_edge(1, ijk) {
                values[eo[1] + e] = b;
            }
        }
        let mut d = BoundaryData { grid, values, extension: None, sup_norm: 0.0 };
        d.sup_norm = d.compute_sup_norm();
        Ok(d)
    }

    pub fn from_spec(grid: StaggeredGrid, spec: &DataSpec) -> Result<Self> {
        match spec {
            DataSpec::Uniform { amplitude, direction } => {
                Ok(Self::uniform(grid, direction.map(|d| d * amplitude)))
            }
            DataSpec::OneSided { amplitude } => Self::one_sided(grid, *amplitude),
            DataSpec::Harmonic { amplitude, coefficients: c } => {
                if (0..3).any(|a| !grid.is_wall(a)) {
                    return Err(Error::InvalidData("harmonic data needs WALL boundaries on every axis".into()));
                }
                let phi = ScalarField::from_fn(grid, Placement::Node, |x| {
                    amplitude * (c[0] * (x[0] * x[0] - x[2] * x[2]) / 2.0 + c[1] * x[0] * x[1] + c[2] * (x[1] * x[1] - x[2] * x[2]) / 2.0)
                });
                Self::from_potential(&phi)
            }
        }
    }

    pub fn scaled(&self, mu: f64) -> Self {
        BoundaryData {
            grid: self.grid,
            values: self.values.iter().map(|v| v * mu).collect(),
            extension: self.extension.as_ref().map(|e| e.iter().map(|v| v * mu).collect()),
            sup_norm: self.sup_norm * mu.abs(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == 0.0)
    }

    /// `(area, |B_T|)` for every wall node and every wall it lies on, with
    /// the tangential magnitude assembled from the neighbouring boundary edges.
    fn wall_samples(&self) -> Vec<(f64, f64)> {
        let g = &self.grid;
        let eo = g.component_offsets(false);
        let mut out = Vec::new();
        for n in 0..g.len(Placement::Node) {
            let ijk = g.unindex(Placement::Node, n);
            for wall in 0..3 {
                if !g.on_wall(Placement::Node, ijk, wall) {
                    continue;
                }
                let mut sq = 0.0;
                let mut area = 1.0;
                for a in (0..3).filter(|&a| a != wall) {
                    area *= if g.on_wall(Placement::Node, ijk, a) { 0.5 * g.h[a] } else { g.h[a] };
                    let p = Placement::Edge(a);
                    let mut acc = 0.0;
                    let mut cnt = 0.0;
                    for d in [0isize, -1] {
                        if let Some(e) = g.shift(p, ijk, a, d) {
                            if g.is_boundary_edge(a, e) {
                                acc += self.values[eo[a] + g.index(p, e)];
                                cnt += 1.0;
                            }
                        }
                    }
                    if cnt > 0.0 {
                        sq += (acc / cnt).powi(2);
                    }
                }
                out.push((area, sq.sqrt()));
            }
        }
        out
    }

    fn compute_sup_norm(&self) -> f64 {
        self.wall_samples().into_iter().fold(0.0, |m, (_, v)| m.max(v))
    }

    /// `∫ |B_T| dS` over the walls.
    pub fn l1_norm(&self) -> f64 {
        self.wall_samples().into_iter().map(|(a, v)| a * v).sum()
    }

    /// Largest wall-normal component of the discrete curl of the data.
    pub fn tangential_curl_residual(&self) -> f64 {
        let g = &self.grid;
        let c = curl_matrix(g).matvec(&self.values);
        let fo = g.component_offsets(true);
        let mut worst = 0.0f64;
        for a in 0..3 {
            let p = Placement::Face(a);
            for f in 0..g.len(p) {
                if g.on_wall(p, g.unindex(p, f), a) {
                    worst = worst.max(c[fo[a] + f].abs());
                }
            }
        }
        worst
    }
}
