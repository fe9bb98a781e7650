//! θ-scheme time stepping for `u' + A(t) u = f(t)` and discrete checks of the
//! energy estimate and the weak formulation.

mod checks;
mod grid;
mod solve;
mod trajectory;

pub use checks::{
    coercivity_on_grid, energy_estimate_check, energy_estimate_with_alpha,
    integration_by_parts_check, stability_ratio, weak_residual, EnergyReport, TimeProfile,
};
pub use grid::TimeGrid;
pub(crate) use solve::Operators;
pub use solve::{solve_parabolic, solve_stationary, ParabolicProblem};
pub use trajectory::{
    read_field, read_field_file, read_trajectory, write_field, write_field_file,
    write_trajectory, Trajectory,
};
