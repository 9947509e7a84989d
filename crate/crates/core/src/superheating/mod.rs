//! Continuation in the applied-field amplitude `μ` to locate superheating
//! thresholds, the a-priori upper bound on them, and the `κ → ∞` and
//! `λ → 0` studies built on top.

mod corrector;
mod sweeps;

pub use corrector::{boundary_corrector, chi, wall_normal_derivative};
pub use sweeps::{kappa_sweep, lambda_sweep, KappaRow, LambdaRow, LambdaSweep, LiminfCheck, RateFit};

use serde::{Deserialize, Serialize};

use crate::constitutive::{GLParameters, Kappa};
use crate::discrete::{StaggeredGrid, VectorField};
use crate::error::{Error, Result};
use crate::interior::{
    discrete_energy, recover_a, screening_energy, solve_full_fh, solve_limit_h, BoundaryData, MeissnerStateFA,
    MeissnerStateFH, SolveOptions, SolveReport,
};

/// Which interior system a continuation runs on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum System {
    Full,
    Limit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContinuationSchedule {
    pub mu_start: f64,
    pub mu_step: f64,
    /// Continuation stops once the convexity margin falls to this value.
    pub margin_tol: f64,
    /// Width of the final bracket around `μ*`.
    pub mu_tol: f64,
    pub max_steps: usize,
}

impl Default for ContinuationSchedule {
    fn default() -> Self {
        ContinuationSchedule { mu_start: 0.02, mu_step: 0.02, margin_tol: 1e-3, mu_tol: 1e-4, max_steps: 400 }
    }
}

impl ContinuationSchedule {
    pub fn validate(&self) -> Result<()> {
        let ok = self.mu_start >= 0.0
            && self.mu_step > 0.0
            && self.margin_tol > 0.0
            && self.margin_tol <= 1e-2
            && self.mu_tol > 0.0
            && self.mu_tol < self.mu_step
            && self.max_steps > 0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameters(format!("inconsistent continuation schedule {self:?}")))
        }
    }
}

/// One accepted continuation step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContinuationPoint {
    pub mu: f64,
    pub margin: f64,
    pub curl_bound: f64,
    pub energy: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone)]
pub struct SuperheatingResult {
    pub system: System,
    pub lambda: f64,
    pub kappa: Kappa,
    pub mu_star: f64,
    pub bracket: (f64, f64),
    pub margin_trajectory: Vec<ContinuationPoint>,
    pub upper_bound: f64,
    /// Midpoint of the bracket where Newton itself stops converging, when
    /// found within the step budget past `μ*`.
    pub newton_failure_mu: Option<f64>,
    /// Converged state at the lower end of the final bracket.
    pub last_state: MeissnerStateFH,
    pub last_report: SolveReport,
}

/// Serializable digest of a [`SuperheatingResult`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuperheatingSummary {
    pub system: System,
    pub lambda: f64,
    pub kappa: Kappa,
    pub mu_star: f64,
    pub bracket: (f64, f64),
    pub upper_bound: f64,
    pub newton_failure_mu: Option<f64>,
    pub last_margin: f64,
    pub max_curl_bound: f64,
    pub accepted_steps: usize,
}

impl SuperheatingResult {
    pub fn summary(&self) -> SuperheatingSummary {
        SuperheatingSummary {
            system: self.system,
            lambda: self.lambda,
            kappa: self.kappa,
            mu_star: self.mu_star,
            bracket: self.bracket,
            upper_bound: self.upper_bound,
            newton_failure_mu: self.newton_failure_mu,
            last_margin: self.last_report.margin,
            max_curl_bound: self.margin_trajectory.iter().fold(0.0, |m, p| m.max(p.curl_bound)),
            accepted_steps: self.margin_trajectory.len(),
        }
    }

    /// Rows `mu,margin,curl_bound,energy,iterations` in acceptance order.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("mu,margin,curl_bound,energy,iterations\n");
        for p in &self.margin_trajectory {
            s.push_str(&format!("{:.12e},{:.12e},{:.12e},{:.12e},{}\n", p.mu, p.margin, p.curl_bound, p.energy, p.iterations));
        }
        s
    }
}

struct Step {
    mu: f64,
    state: MeissnerStateFH,
    potential: MeissnerStateFA,
    report: SolveReport,
}

enum Attempt {
    Accepted(Step),
    Rejected { margin: Option<f64> },
}

struct Runner<'a> {
    system: System,
    params: GLParameters,
    base: &'a BoundaryData,
    grid: &'a StaggeredGrid,
    opts: SolveOptions,
}

impl Runner<'_> {
    fn solve(&self, mu: f64, warm: Option<&Step>) -> Result<Option<Step>> {
        let params = GLParameters { mu, ..self.params };
        let data = self.base.scaled(mu);
        // Warm starts are rescaled to the new amplitude.
        let ratio = warm.map_or(1.0, |w| if w.mu > 0.0 { mu / w.mu } else { 1.0 });
        let scale = |v: &VectorField| VectorField { comps: v.comps.clone().map(|c| c.into_iter().map(|x| x * ratio).collect()), ..v.clone() };
        let out = match self.system {
            System::Full => {
                let a = warm.map(|w| scale(&w.potential.a));
                let init = warm.zip(a.as_ref()).map(|(w, a)| (&w.potential.f, a));
                solve_full_fh(&params, &data, self.grid, init, &self.opts)
            }
            System::Limit => {
                let h = warm.map(|w| scale(&w.state.h));
                solve_limit_h(&params, &data, self.grid, h.as_ref(), &self.opts)
            }
        };
        match out {
            Ok((state, report)) => {
                let potential = recover_a(&state)?;
                Ok(Some(Step { mu, state, potential, report }))
            }
            Err(Error::SolverFailure(_) | Error::OutOfDomain { .. } | Error::OutOfK(_)) => Ok(None),
            Err(e) => Err(e),
        }
    }

    fn attempt(&self, mu: f64, warm: Option<&Step>, margin_tol: f64) -> Result<Attempt> {
        Ok(match self.solve(mu, warm)? {
            Some(step) if step.report.margin > margin_tol => Attempt::Accepted(step),
            Some(step) => Attempt::Rejected { margin: Some(step.report.margin) },
            None => Attempt::Rejected { margin: None },
        })
    }
}

fn point(step: &Step) -> Result<ContinuationPoint> {
    Ok(ContinuationPoint {
        mu: step.mu,
        margin: step.report.margin,
        curl_bound: step.report.curl_bound,
        energy: discrete_energy(&step.potential)?,
        iterations: step.report.iterations,
    })
}

/// Increase `μ` with warm starts until Newton fails or the convexity margin
/// reaches `margin_tol`, then bisect the last bracket down to `mu_tol`.
pub fn continue_mu(
    system: System,
    lambda: f64,
    kappa: Kappa,
    base: &BoundaryData,
    schedule: &ContinuationSchedule,
    grid: &StaggeredGrid,
) -> Result<SuperheatingResult> {
    schedule.validate()?;
    let kappa = match system {
        System::Full if kappa.is_infinite() => {
            return Err(Error::InvalidParameters("the full system needs a finite kappa".into()));
        }
        System::Full => kappa,
        System::Limit => Kappa::INFINITY,
    };
    let params = GLParameters::new(lambda, kappa, schedule.mu_start)?;
    let runner = Runner { system, params, base, grid, opts: SolveOptions::default() };
    let upper_bound = if base.is_zero() { f64::INFINITY } else { mu_upper_bound(lambda, base, grid)? };

    let mut trajectory = Vec::new();
    let mut last = match runner.attempt(schedule.mu_start, None, schedule.margin_tol)? {
        Attempt::Accepted(step) => step,
        Attempt::Rejected { margin } => {
            return Err(Error::NeverEntersK { mu: schedule.mu_start, margin: margin.unwrap_or(f64::NAN) });
        }
    };
    trajectory.push(point(&last)?);

    let mut hi = None;
    for _ in 0..schedule.max_steps {
        let mu = last.mu + schedule.mu_step;
        match runner.attempt(mu, Some(&last), schedule.margin_tol)? {
            Attempt::Accepted(step) => {
                trajectory.push(point(&step)?);
                last = step;
            }
            Attempt::Rejected { .. } => {
                hi = Some(mu);
                break;
            }
        }
    }
    let Some(mut hi) = hi else {
        return Err(if base.is_zero() {
            Error::UnboundedThreshold(schedule.max_steps)
        } else {
            Error::BudgetExceeded(schedule.max_steps)
        });
    };
    while hi - last.mu > schedule.mu_tol {
        let mid = 0.5 * (last.mu + hi);
        match runner.attempt(mid, Some(&last), schedule.margin_tol)? {
            Attempt::Accepted(step) => {
                trajectory.push(point(&step)?);
                last = step;
            }
            Attempt::Rejected { .. } => hi = mid,
        }
    }
    let bracket = (last.mu, hi);
    let newton_failure_mu = newton_failure(&runner, &last, schedule)?;
    Ok(SuperheatingResult {
        system,
        lambda,
        kappa,
        mu_star: 0.5 * (bracket.0 + bracket.1),
        bracket,
        margin_trajectory: trajectory,
        upper_bound,
        newton_failure_mu,
        last_state: last.state,
        last_report: last.report,
    })
}

/// Continue past the margin threshold ignoring the margin, and bisect the
/// first Newton failure.
fn newton_failure(runner: &Runner, from: &Step, schedule: &ContinuationSchedule) -> Result<Option<f64>> {
    let mut lo_step = None;
    let mut lo = from.mu;
    let mut hi = None;
    for _ in 0..schedule.max_steps {
        let mu = lo + schedule.mu_step;
        match runner.solve(mu, Some(lo_step.as_ref().unwrap_or(from)))? {
            Some(step) => {
                lo = mu;
                lo_step = Some(step);
            }
            None => {
                hi = Some(mu);
                break;
            }
        }
    }
    let Some(mut hi) = hi else { return Ok(None) };
    while hi - lo > schedule.mu_tol {
        let mid = 0.5 * (lo + hi);
        match runner.solve(mid, Some(lo_step.as_ref().unwrap_or(from)))? {
            Some(step) => {
                lo = mid;
                lo_step = Some(step);
            }
            None => hi = mid,
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}

/// A-priori bound `λ‖B_T‖_{L¹} / (min{λ², 1} · c(B_T))` on the threshold,
/// with `c` the minimal screening energy of the data.
pub fn mu_upper_bound(lambda: f64, data: &BoundaryData, grid: &StaggeredGrid) -> Result<f64> {
    if data.is_zero() {
        return Err(Error::ZeroDatum);
    }
    let c = screening_energy(lambda, data, grid)?;
    Ok(lambda * data.l1_norm() / (lambda.powi(2).min(1.0) * c))
}

/// Apply `f` to every item on up to `jobs` threads, keeping input order.
pub(crate) fn par_map<T: Sync, R: Send>(items: &[T], jobs: usize, f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let jobs = jobs.clamp(1, items.len().max(1));
    if jobs == 1 {
        return items.iter().map(&f).collect();
    }
    let chunk = items.len().div_ceil(jobs);
    std::thread::scope(|s| {
        let handles: Vec<_> = items.chunks(chunk).map(|c| s.spawn(|| c.iter().map(&f).collect::<Vec<R>>())).collect();
        handles.into_iter().flat_map(|h| h.join().expect("worker thread panicked")).collect()
    })
}
