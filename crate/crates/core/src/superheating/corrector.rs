use crate::discrete::{Placement, ScalarField, StaggeredGrid};
use crate::error::{Error, Result};

/// Cutoff equal to 1 on `[0, 1]`, 0 on `[2, ∞)`, with a quintic smoothstep
/// in between.
pub fn chi(s: f64) -> f64 {
    if s <= 1.0 {
        1.0
    } else if s >= 2.0 {
        0.0
    } else {
        let t = s - 1.0;
        1.0 - t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)
    }
}

/// Nearest wall of a node as `(axis, side, distance)`.
fn nearest_wall(g: &StaggeredGrid, ijk: [usize; 3]) -> Option<(usize, usize, f64)> {
    let mut best: Option<(usize, usize, f64)> = None;
    for a in (0..3).filter(|&a| g.is_wall(a)) {
        for (side, d) in [(0, ijk[a] as f64 * g.h[a]), (1, (g.n[a] - ijk[a]) as f64 * g.h[a])] {
            if best.is_none_or(|b| d < b.2) {
                best = Some((a, side, d));
            }
        }
    }
    best
}

/// Inward one-sided second-order derivative at the wall node `ijk`.
fn inward_derivative(g: &StaggeredGrid, f: &[f64], ijk: [usize; 3], axis: usize, side: usize) -> f64 {
    let step = |k: usize| {
        let mut q = ijk;
        q[axis] = if side == 0 { k } else { g.n[axis] - k };
        f[g.index(Placement::Node, q)]
    };
    (-3.0 * step(0) + 4.0 * step(1) - step(2)) / (2.0 * g.h[axis])
}

/// `f̂ = f_∞ − χ(κ d) · d · ∂f_∞/∂n`, with `d` the distance to the nearest
/// wall and `∂/∂n` the inward derivative at the closest wall node.
pub fn boundary_corrector(f_inf: &ScalarField, kappa: f64, grid: &StaggeredGrid) -> Result<ScalarField> {
    if f_inf.grid != *grid || f_inf.placement != Placement::Node {
        return Err(Error::GridMismatch("the corrector acts on NODE fields of the grid".into()));
    }
    if !(kappa >= 1.0) {
        return Err(Error::InvalidParameters(format!("corrector needs kappa >= 1, got {kappa}")));
    }
    if (0..3).any(|a| grid.is_wall(a) && grid.n[a] < 2) {
        return Err(Error::InvalidSpec("the corrector needs at least two cells across every wall axis".into()));
    }
    let f = &f_inf.values;
    let values = (0..f.len())
        .map(|i| {
            let ijk = grid.unindex(Placement::Node, i);
            match nearest_wall(grid, ijk) {
                Some((axis, side, d)) if chi(kappa * d) > 0.0 => {
                    let mut y = ijk;
                    y[axis] = if side == 0 { 0 } else { grid.n[axis] };
                    f[i] - chi(kappa * d) * d * inward_derivative(grid, f, y, axis, side)
                }
                _ => f[i],
            }
        })
        .collect();
    ScalarField::new(*grid, Placement::Node, values)
}

/// Largest one-sided normal derivative of a node field over all wall nodes.
pub fn wall_normal_derivative(f: &ScalarField) -> f64 {
    let g = f.grid;
    let mut worst = 0.0f64;
    for i in 0..f.values.len() {
        let ijk = g.unindex(Placement::Node, i);
        for a in (0..3).filter(|&a| g.is_wall(a) && g.n[a] >= 2) {
            for side in [0, 1] {
                if ijk[a] == if side == 0 { 0 } else { g.n[a] } {
                    worst = worst.max(inward_derivative(&g, &f.values, ijk, a, side).abs());
                }
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discrete::{build_grid, GridSpec};

    #[test]
    fn cutoff_shape() {
        assert_eq!(chi(0.0), 1.0);
        assert_eq!(chi(1.0), 1.0);
        assert_eq!(chi(2.0), 0.0);
        assert!((chi(1.5) - 0.5).abs() < 1e-15);
        let mut prev = 1.0;
        for k in 0..=200 {
            let v = chi(1.0 + k as f64 / 200.0);
            assert!(v <= prev + 1e-15);
            prev = v;
        }
    }

    #[test]
    fn flat_profile_is_unchanged() {
        let g = build_grid(&GridSpec::slab(50, 1.0)).unwrap();
        let f = ScalarField::from_fn(g, Placement::Node, |_| 1.3);
        let fh = boundary_corrector(&f, 10.0, &g).unwrap();
        for (a, b) in fh.values.iter().zip(&f.values) {
            assert!((a - b).abs() <= 1e-14);
        }
    }

    #[test]
    fn corrected_profile_has_zero_wall_slope() {
        let g = build_grid(&GridSpec::slab(400, 1.0)).unwrap();
        let f = ScalarField::from_fn(g, Placement::Node, |x| (1.0 + x[2]).sqrt());
        assert!(wall_normal_derivative(&f) > 0.1);
        let fh = boundary_corrector(&f, 20.0, &g).unwrap();
        assert!(wall_normal_derivative(&fh) <= 1e-8);
        for (i, (a, b)) in f.values.iter().zip(&fh.values).enumerate() {
            let z = i as f64 / 400.0;
            if z.min(1.0 - z) > 2.0 / 20.0 {
                assert_eq!(a, b);
            }
        }
    }
}
