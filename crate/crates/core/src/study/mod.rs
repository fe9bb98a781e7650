//! End-to-end perturbation studies: solve on every member of a family and
//! on the limit, compare on the shared D-grid, and summarise the error
//! series with rates and verdicts.

mod config;
mod report;
mod run;

pub use config::{NormKind, ObstacleSpec, StudyConfig, StudyData, StudyKind};
pub use report::{fit_rate, verdict, ConvergenceReport, NormSeries, RateFit, Verdict, FLOOR_BAND, FLOOR_REL};
pub use run::{run_dirichlet_study, run_neumann_study, run_study, run_vi_study};
