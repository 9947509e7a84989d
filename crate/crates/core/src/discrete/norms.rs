use serde::{Deserialize, Serialize};

use super::grid::{Placement, StaggeredGrid};
use super::ops::Field;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum NormKind {
    L2,
    H1,
    H2,
    Sup,
}

fn side_weight(g: &StaggeredGrid, p: Placement, ijk: [usize; 3], skip: &[usize]) -> f64 {
    let mut w = g.cell_volume();
    for b in 0..3 {
        if !skip.contains(&b) && g.on_wall(p, ijk, b) {
            w *= 0.5;
        }
    }
    w
}

fn l2_sq(g: &StaggeredGrid, p: Placement, v: &[f64]) -> f64 {
    v.iter().enumerate().map(|(i, x)| g.weight(p, g.unindex(p, i)) * x * x).sum()
}

fn first_diff_sq(g: &StaggeredGrid, p: Placement, v: &[f64]) -> f64 {
    let mut acc = 0.0;
    for a in g.active_axes() {
        for (i, x) in v.iter().enumerate() {
            let ijk = g.unindex(p, i);
            if let Some(up) = g.shift(p, ijk, a, 1) {
                let d = (v[g.index(p, up)] - x) / g.h[a];
                acc += side_weight(g, p, ijk, &[a]) * d * d;
            }
        }
    }
    acc
}

fn second_diff_sq(g: &StaggeredGrid, p: Placement, v: &[f64]) -> f64 {
    let mut acc = 0.0;
    for a in g.active_axes() {
        for b in g.active_axes() {
            for (i, x) in v.iter().enumerate() {
                let ijk = g.unindex(p, i);
                let d = if a == b {
                    match (g.shift(p, ijk, a, 1), g.shift(p, ijk, a, -1)) {
                        (Some(up), Some(dn)) => {
                            (v[g.index(p, up)] - 2.0 * x + v[g.index(p, dn)]) / (g.h[a] * g.h[a])
                        }
                        _ => continue,
                    }
                } else {
                    let ua = g.shift(p, ijk, a, 1);
                    let ub = g.shift(p, ijk, b, 1);
                    let uab = ua.and_then(|q| g.shift(p, q, b, 1));
                    match (ua, ub, uab) {
                        (Some(ua), Some(ub), Some(uab)) => {
                            (v[g.index(p, uab)] - v[g.index(p, ua)] - v[g.index(p, ub)] + x) / (g.h[a] * g.h[b])
                        }
                        _ => continue,
                    }
                };
                acc += side_weight(g, p, ijk, &[a, b]) * d * d;
            }
        }
    }
    acc
}

fn parts(field: &Field) -> Vec<(StaggeredGrid, Placement, &[f64])> {
    match field {
        Field::Scalar(s) => vec![(s.grid, s.placement, s.values.as_slice())],
        Field::Vector(v) => (0..3).map(|a| (v.grid, v.placement.component(a), v.comps[a].as_slice())).collect(),
    }
}

/// Grid-quadrature norm of a field; vector norms sum over components.
pub fn field_norm(field: &Field, kind: NormKind) -> f64 {
    let ps = parts(field);
    if kind == NormKind::Sup {
        return ps.iter().flat_map(|(_, _, v)| v.iter()).fold(0.0f64, |m, x| m.max(x.abs()));
    }
    let mut sq = 0.0;
    for (g, p, v) in ps {
        sq += l2_sq(&g, p, v);
        if matches!(kind, NormKind::H1 | NormKind::H2) {
            sq += first_diff_sq(&g, p, v);
        }
        if kind == NormKind::H2 {
            sq += second_diff_sq(&g, p, v);
        }
    }
    sq.sqrt()
}

/// Weighted L2 norm of a stacked vector with explicit quadrature weights.
pub fn weighted_l2(values: &[f64], weights: &[f64]) -> f64 {
    values.iter().zip(weights).map(|(v, w)| w * v * v).sum::<f64>().sqrt()
}
