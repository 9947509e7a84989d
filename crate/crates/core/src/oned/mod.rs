//! One-dimensional slab reduction: closed-form and collocation solvers for
//! the limiting and full systems, used as an independent oracle.

use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

use crate::constitutive::{Kappa, V_MAX};
use crate::error::{Error, Result};
use crate::linalg::{BandedLu, Triplets};

/// Largest wall field of a half-space Meissner state in the limiting system.
pub fn superheating_closed_form() -> f64 {
    (5.0f64 / 18.0).sqrt()
}

/// Thermodynamic critical field recovered from the superheating value.
pub fn critical_field() -> f64 {
    superheating_closed_form() * 3.0 / 5.0f64.sqrt()
}

/// Wall field produced by a wall amplitude `a0` of the decaying profile.
pub fn wall_field(a0: f64) -> f64 {
    a0 * (1.0 - a0 * a0 / 2.0).sqrt()
}

/// Invert [`wall_field`] on the stable branch `[0, 1/√3]` by bisection.
pub fn a0_from_b(b: f64) -> Result<f64> {
    let max = superheating_closed_form();
    if !(b >= 0.0) || b > max + 1e-9 {
        return Err(Error::AboveThreshold { b, max });
    }
    if b == 0.0 {
        return Ok(0.0);
    }
    if b >= max {
        return Ok(V_MAX);
    }
    let (mut lo, mut hi) = (0.0, V_MAX);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if wall_field(mid) < b {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-16 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlabProblem {
    pub lambda: f64,
    pub kappa: Kappa,
    pub b: f64,
    /// Truncation length, or the half-width for a symmetric film.
    pub length: f64,
    pub n: usize,
    /// Symmetric film with the same wall field on both faces; the problem is
    /// posed on the half-width with the symmetry conditions at its centre.
    #[serde(default)]
    pub film: bool,
}

impl SlabProblem {
    pub fn half_space(lambda: f64, kappa: Kappa, b: f64) -> Self {
        SlabProblem { lambda, kappa, b, length: 15.0 * lambda, n: 2000, film: false }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameters(m));
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return bad(format!("lambda must be positive, got {}", self.lambda));
        }
        if let Some(k) = self.kappa.finite() {
            if !(k > 0.0 && k.is_finite()) {
                return bad(format!("kappa must be positive, got {k}"));
            }
        }
        if !(self.b >= 0.0 && self.b.is_finite()) {
            return bad(format!("b must be nonnegative, got {}", self.b));
        }
        if self.n < 200 {
            return bad(format!("need at least 200 collocation intervals, got {}", self.n));
        }
        if !self.film && self.length < 15.0 * self.lambda * (1.0 - 1e-12) {
            return bad(format!("length {} is below 15 lambda", self.length));
        }
        if !(self.length > 0.0 && self.length.is_finite()) {
            return bad("length must be positive".into());
        }
        Ok(())
    }

    pub fn h(&self) -> f64 {
        self.length / self.n as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlabSolution {
    pub problem: SlabProblem,
    pub x: Vec<f64>,
    pub f: Vec<f64>,
    pub a: Vec<f64>,
    pub fp: Vec<f64>,
    pub ap: Vec<f64>,
    pub a0: f64,
    pub first_integral_residual: f64,
    pub residual: f64,
    pub newton_iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlabSummary {
    pub b: f64,
    pub a0: f64,
    pub margin_wall: f64,
    pub first_integral_residual: f64,
}

impl SlabSolution {
    /// `f² − a² − 1/3` at the wall.
    pub fn margin_wall(&self) -> f64 {
        self.f[0] * self.f[0] - self.a[0] * self.a[0] - 1.0 / 3.0
    }

    pub fn min_margin(&self) -> f64 {
        self.f.iter().zip(&self.a).map(|(f, a)| f * f - a * a - 1.0 / 3.0).fold(f64::INFINITY, f64::min)
    }

    pub fn summary(&self) -> SlabSummary {
        SlabSummary {
            b: self.problem.b,
            a0: self.a0,
            margin_wall: self.margin_wall(),
            first_integral_residual: self.first_integral_residual,
        }
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,f,a,fp,ap\n");
        for i in 0..self.x.len() {
            let _ = writeln!(s, "{:.12e},{:.15e},{:.15e},{:.15e},{:.15e}", self.x[i], self.f[i], self.a[i], self.fp[i], self.ap[i]);
        }
        s
    }

    /// Linear interpolation of `(f, a)` at `x`.
    pub fn sample(&self, x: f64) -> (f64, f64) {
        let h = self.problem.h();
        let t = (x / h).clamp(0.0, self.problem.n as f64);
        let i = (t.floor() as usize).min(self.problem.n - 1);
        let w = t - i as f64;
        (
            (1.0 - w) * self.f[i] + w * self.f[i + 1],
            (1.0 - w) * self.a[i] + w * self.a[i + 1],
        )
    }

    /// Energy per unit area over `[0, length]` relative to a constant applied
    /// field equal to the wall value.
    pub fn energy(&self) -> f64 {
        let p = &self.problem;
        let h = p.h();
        let lam = p.lambda;
        let grad = p.kappa.finite().map_or(0.0, |k| (lam / k).powi(2));
        let mut e = 0.0;
        for i in 0..p.n {
            let df = (self.f[i + 1] - self.f[i]) / h;
            let field = -lam * (self.a[i + 1] - self.a[i]) / h - p.b;
            e += h * (grad * df * df + field * field);
        }
        for i in 0..=p.n {
            let w = if i == 0 || i == p.n { 0.5 * h } else { h };
            let (f, a) = (self.f[i], self.a[i]);
            e += w * (f * f * a * a + 0.5 * (1.0 - f * f).powi(2));
        }
        e
    }
}

fn centered_derivative(y: &[f64], h: f64) -> Vec<f64> {
    let n = y.len() - 1;
    (0..=n)
        .map(|i| {
            if i == 0 {
                (-3.0 * y[0] + 4.0 * y[1] - y[2]) / (2.0 * h)
            } else if i == n {
                (3.0 * y[n] - 4.0 * y[n - 1] + y[n - 2]) / (2.0 * h)
            } else {
                (y[i + 1] - y[i - 1]) / (2.0 * h)
            }
        })
        .collect()
}

fn limit_first_integral(lambda: f64, a: &[f64], ap: &[f64]) -> Vec<f64> {
    a.iter().zip(ap).map(|(a, d)| lambda * lambda * d * d / 2.0 - a * a / 2.0 + a.powi(4) / 4.0).collect()
}

fn spread(v: &[f64]) -> f64 {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = v.iter().copied().fold(f64::INFINITY, f64::min);
    max - min
}

/// Decaying half-space profile `a(x) = √2 sech(x/λ + x₀)` with its exact slope.
fn closed_form_profile(lambda: f64, a0: f64, x: f64) -> (f64, f64) {
    if a0 == 0.0 {
        return (0.0, 0.0);
    }
    let x0 = (2.0f64.sqrt() / a0).acosh();
    let s = x / lambda + x0;
    let a = 2.0f64.sqrt() / s.cosh();
    let ap = -a * s.tanh() / lambda;
    (a, ap)
}

/// Limiting slab system.
pub fn solve_limit_ode(p: &SlabProblem) -> Result<SlabSolution> {
    p.validate()?;
    if !p.kappa.is_infinite() {
        return Err(Error::InvalidParameters("the limiting solver needs kappa = INFINITY".into()));
    }
    let a0_half = a0_from_b(p.b)?;
    let h = p.h();
    let x: Vec<f64> = (0..=p.n).map(|i| i as f64 * h).collect();
    if !p.film {
        let (a, ap): (Vec<f64>, Vec<f64>) = x.iter().map(|&x| closed_form_profile(p.lambda, a0_half, x)).unzip();
        let f: Vec<f64> = a.iter().map(|a| (1.0 - a * a).sqrt()).collect();
        let fp: Vec<f64> = a.iter().zip(&ap).zip(&f).map(|((a, d), f)| -a * d / f).collect();
        let fi = spread(&limit_first_integral(p.lambda, &a, &ap));
        return Ok(SlabSolution {
            problem: *p,
            x,
            f,
            a0: a0_half,
            a,
            fp,
            ap,
            first_integral_residual: fi,
            residual: 0.0,
            newton_iterations: 0,
        });
    }
    let mut a: Vec<f64> = x.iter().map(|&x| closed_form_profile(p.lambda, a0_half, x).0).collect();
    a[p.n] = 0.0;
    let c = (p.lambda / h).powi(2);
    let bterm = 2.0 * h * p.b / p.lambda;
    let residual_of = |a: &[f64]| -> Vec<f64> {
        (0..=p.n)
            .map(|i| {
                if i == p.n {
                    a[i]
                } else {
                    let left = if i == 0 { a[1] + bterm } else { a[i - 1] };
                    c * (a[i + 1] - 2.0 * a[i] + left) - (1.0 - a[i] * a[i]) * a[i]
                }
            })
            .collect()
    };
    let mut iterations = 0;
    loop {
        let r = residual_of(&a);
        let mut t = Triplets::new(p.n + 1, p.n + 1);
        for i in 0..p.n {
            t.push(i, i, -2.0 * c - 1.0 + 3.0 * a[i] * a[i]);
            t.push(i, i + 1, if i == 0 { 2.0 * c } else { c });
            if i > 0 {
                t.push(i, i - 1, c);
            }
        }
        t.push(p.n, p.n, 1.0);
        let da = BandedLu::factor(&t.to_csr())?.solve(&r);
        let step = da.iter().fold(0.0f64, |m, d| m.max(d.abs()));
        for (ai, di) in a.iter_mut().zip(&da) {
            *ai -= di;
        }
        iterations += 1;
        if step <= 1e-13 {
            break;
        }
        if iterations >= 60 || !step.is_finite() {
            return Err(Error::SolverFailure(format!("limiting film Newton stalled, last step {step:.3e}")));
        }
    }
    if a.iter().any(|a| a * a > 1.0) {
        return Err(Error::SolverFailure("limiting film profile left the physical range".into()));
    }
    let residual = residual_of(&a).iter().fold(0.0f64, |m, r| m.max(r.abs()));
    let f: Vec<f64> = a.iter().map(|a| (1.0 - a * a).sqrt()).collect();
    let mut ap = centered_derivative(&a, h);
    ap[0] = -p.b / p.lambda;
    let mut fp = centered_derivative(&f, h);
    fp[0] = -a[0] * ap[0] / f[0];
    let fi = spread(&limit_first_integral(p.lambda, &a, &ap));
    Ok(SlabSolution { problem: *p, x, f, a0: a[0].abs(), a, fp, ap, first_integral_residual: fi, residual, newton_iterations: iterations })
}

/// Full slab system by centered collocation and Newton's method, started
/// from the limiting profile (or from `init` when given).
pub fn solve_full_ode(p: &SlabProblem, require_k: bool) -> Result<SlabSolution> {
    solve_full_ode_from(p, None, require_k)
}

pub fn solve_full_ode_from(p: &SlabProblem, init: Option<(&[f64], &[f64])>, require_k: bool) -> Result<SlabSolution> {
    p.validate()?;
    let kappa = p.kappa.finite().ok_or_else(|| Error::InvalidParameters("the full solver needs a finite kappa".into()))?;
    let n = p.n;
    let h = p.h();
    let x: Vec<f64> = (0..=n).map(|i| i as f64 * h).collect();
    let (mut f, mut a) = match init {
        Some((f0, a0)) if f0.len() == n + 1 && a0.len() == n + 1 => (f0.to_vec(), a0.to_vec()),
        Some(_) => return Err(Error::InvalidParameters("initial profile length does not match n".into())),
        None => {
            let lim = SlabProblem { kappa: Kappa::INFINITY, b: p.b.min(superheating_closed_form()), ..*p };
            let s = solve_limit_ode(&lim)?;
            (s.f, s.a)
        }
    };
    let eps = (p.lambda / kappa).powi(2) / (h * h);
    let c = (p.lambda / h).powi(2);
    let bterm = 2.0 * h * p.b / p.lambda;
    let residual_of = |f: &[f64], a: &[f64]| -> Vec<f64> {
        let mut r = vec![0.0; 2 * (n + 1)];
        for i in 0..=n {
            let fl = if i == 0 { f[1] } else { f[i - 1] };
            let fr = if i == n { f[n - 1] } else { f[i + 1] };
            r[2 * i] = -eps * (fr - 2.0 * f[i] + fl) - (1.0 - f[i] * f[i] - a[i] * a[i]) * f[i];
            r[2 * i + 1] = if i == n {
                a[n]
            } else {
                let al = if i == 0 { a[1] + bterm } else { a[i - 1] };
                c * (a[i + 1] - 2.0 * a[i] + al) - f[i] * f[i] * a[i]
            };
        }
        r
    };
    let mut iterations = 0;
    loop {
        let r = residual_of(&f, &a);
        let mut t = Triplets::with_capacity(2 * (n + 1), 2 * (n + 1), 10 * (n + 1));
        for i in 0..=n {
            let (rf, ra) = (2 * i, 2 * i + 1);
            t.push(rf, rf, 2.0 * eps - 1.0 + 3.0 * f[i] * f[i] + a[i] * a[i]);
            t.push(rf, ra, 2.0 * a[i] * f[i]);
            if i == 0 {
                t.push(rf, 2, -2.0 * eps);
            } else if i == n {
                t.push(rf, 2 * (n - 1), -2.0 * eps);
            } else {
                t.push(rf, 2 * (i - 1), -eps);
                t.push(rf, 2 * (i + 1), -eps);
            }
            if i == n {
                t.push(ra, ra, 1.0);
            } else {
                t.push(ra, ra, -2.0 * c - f[i] * f[i]);
                t.push(ra, rf, -2.0 * f[i] * a[i]);
                t.push(ra, 2 * (i + 1) + 1, if i == 0 { 2.0 * c } else { c });
                if i > 0 {
                    t.push(ra, 2 * (i - 1) + 1, c);
                }
            }
        }
        let du = BandedLu::factor(&t.to_csr())?.solve(&r);
        let step = du.iter().fold(0.0f64, |m, d| m.max(d.abs()));
        let mut damping = 1.0;
        if step > 0.2 {
            damping = 0.2 / step;
        }
        for i in 0..=n {
            f[i] -= damping * du[2 * i];
            a[i] -= damping * du[2 * i + 1];
        }
        iterations += 1;
        if step <= 1e-12 {
            break;
        }
        if iterations >= 80 || !step.is_finite() {
            return Err(Error::SolverFailure(format!("slab Newton stalled, last step {step:.3e}")));
        }
    }
    let residual = residual_of(&f, &a).iter().fold(0.0f64, |m, r| m.max(r.abs()));
    let mut fp = centered_derivative(&f, h);
    let mut ap = centered_derivative(&a, h);
    fp[0] = 0.0;
    fp[n] = 0.0;
    ap[0] = -p.b / p.lambda;
    let sol = SlabSolution {
        problem: *p,
        x,
        a0: a[0].abs(),
        fp,
        ap,
        first_integral_residual: full_first_integral_spread(p.lambda, kappa, &f, &a, h),
        f,
        a,
        residual,
        newton_iterations: iterations,
    };
    if require_k && sol.min_margin() < -1e-12 {
        return Err(Error::OutOfK(sol.min_margin()));
    }
    Ok(sol)
}

/// Spread of the conserved quantity `(λ²/κ²) f′² + λ² a′² − f²a² − (1−f²)²/2`.
fn full_first_integral_spread(lambda: f64, kappa: f64, f: &[f64], a: &[f64], h: f64) -> f64 {
    let n = f.len() - 1;
    let vals: Vec<f64> = (0..n)
        .map(|i| {
            let (fm, am) = (0.5 * (f[i] + f[i + 1]), 0.5 * (a[i] + a[i + 1]));
            let (df, da) = ((f[i + 1] - f[i]) / h, (a[i + 1] - a[i]) / h);
            (lambda / kappa).powi(2) * df * df + lambda * lambda * da * da - fm * fm * am * am - 0.5 * (1.0 - fm * fm).powi(2)
        })
        .collect();
    spread(&vals)
}
