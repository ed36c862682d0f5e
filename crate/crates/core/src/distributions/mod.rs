//! Hard input distributions, their parameter schedules and exact laws.

mod instance;
mod law;
mod params;

pub use instance::{
    sample_apx_hard, sample_apx_hard0, sample_instance, sample_mis_half, sample_mis_hard, sample_mis_hard0,
    verify_solve_half, BlockEdges, DistError, HalfSolved, Instance, InstanceKind, SigmaMode, MAX_VERTICES,
};
pub use law::{base_law, sigma_atoms, Component, InstanceLaw, LawError, FULL_SIGMA_LIMIT};
pub use params::{make_params, matching_size_bound, Level, ParamMode, Params, ParamsError, ToyOverrides, Variant};

