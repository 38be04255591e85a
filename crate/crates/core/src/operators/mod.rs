//! Ladder operators on the truncated q-Fock space and the maps built from
//! them.

mod fock_operator;
mod gap;
mod ladder;
mod verify;

pub use fock_operator::{FockOperator, FockVector};
pub use gap::{
    abs_m_squared, abs_m_squared_via_gaussians, build_contraction, build_cyclic_shift,
    build_gap_operator, build_gap_operator_in_basis, build_m, build_m_dagger,
    build_m_dagger_in_basis, build_m_in_basis, CompressedForm,
};
pub use ladder::{
    annihilation_left, annihilation_right, creation_left, creation_right, gaussian_left,
    gaussian_right, LadderSet,
};
pub use verify::{
    basis_independence_residual, verify_abs_m_squared_paths, verify_adjointness,
    verify_fm_identity, verify_lr_commutation, verify_qccr,
};
