//! Newton solvers for the interior Meissner systems, the linear Maxwell
//! kernel, recovery maps and interior Dirichlet-to-Neumann traces.

mod common;
mod data;
mod dofs;
mod full;
mod limit;
mod maps;
mod state;

pub use data::{BoundaryData, DataSpec};
pub use full::{solve_full_fa, solve_full_fh};
pub use limit::solve_limit_h;
pub use maps::{
    discrete_energy, equivalence_residuals, interior_dtn, limit_density, recover_a, screening_energy, solve_linear_maxwell, BoundarySample, DtnKind, DtnTrace,
};
pub use state::{MeissnerStateFA, MeissnerStateFH, SolveOptions, SolveReport, StateSidecar};
