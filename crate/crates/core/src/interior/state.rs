use serde::{Deserialize, Serialize};

use super::data::BoundaryData;
use crate::constitutive::{ConvexityMargin, GLParameters};
use crate::discrete::{ScalarField, VectorField};

/// Newton controls shared by the nonlinear interior solvers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub max_halvings: usize,
    /// Line-search floor on the order parameter.
    pub min_f: f64,
    pub linear_rtol: f64,
    /// Fail with `OutOfK` when the converged state leaves the closed convexity set.
    pub require_k: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { tol: 1e-9, max_iter: 60, max_halvings: 20, min_f: 0.1, linear_rtol: 1e-12, require_k: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub iterations: usize,
    pub residual_history: Vec<f64>,
    pub final_residual: f64,
    pub margin: f64,
    /// `λ ‖CURL H‖_SUP`.
    pub curl_bound: f64,
    pub converged: bool,
    /// Largest relative weak divergence of `H` over the iterations.
    pub max_divergence: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeissnerStateFH {
    pub f: ScalarField,
    pub h: VectorField,
    pub params: GLParameters,
    pub data: BoundaryData,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeissnerStateFA {
    pub f: ScalarField,
    pub a: VectorField,
    pub params: GLParameters,
    pub data: BoundaryData,
    pub margin: ConvexityMargin,
}

/// JSON sidecar written next to a state's field CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateSidecar {
    pub params: GLParameters,
    pub data_sup_norm: f64,
    pub data_curl_residual: f64,
    pub report: SolveReport,
}

impl MeissnerStateFH {
    pub fn to_csv(&self) -> String {
        let mut s = self.f.to_csv();
        let h = self.h.to_csv();
        s.push_str(h.split_once('\n').map_or("", |(_, rest)| rest));
        s
    }

    pub fn sidecar(&self, report: &SolveReport) -> StateSidecar {
        StateSidecar {
            params: self.params,
            data_sup_norm: self.data.sup_norm,
            data_curl_residual: self.data.tangential_curl_residual(),
            report: report.clone(),
        }
    }
}
