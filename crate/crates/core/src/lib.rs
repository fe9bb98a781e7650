//! Finite-element laboratory for non-autonomous parabolic equations and
//! parabolic variational inequalities on perturbed planar domains.
//!
//! The crate is organised bottom-up:
//!
//! * [`mesh`] generates the domain families (cracked disk, dumbbell, holed
//!   disk) as conforming triangulations inside a common hold-all ball.
//! * [`fem`] provides P1 spaces, assembly of the time-dependent bilinear
//!   form, and a preconditioned BiCGStab solver.
//! * [`parabolic`] integrates `u' + A(t) u = f` with the θ-scheme and checks
//!   the discrete energy inequality and the weak formulation.
//! * [`vi`] solves parabolic obstacle problems by projected Gauss–Seidel.
//! * [`mosco`] embeds fields into the hold-all ball and measures recovery
//!   defects, time-regularisation operators and discrete capacities.
//! * [`study`] runs end-to-end domain and obstacle perturbation studies.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fem;
pub mod mesh;
pub mod mosco;
pub mod parabolic;
pub mod seed;
pub mod study;
pub mod vi;

pub use error::{Error, Result};
