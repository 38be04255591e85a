//! Singular values of `m` and `m†`, the spectral gap of `|M|` on `F⁺`, and
//! the threshold `d₀(q)` at which the gap argument closes.

mod report;
mod sweep;
mod threshold;

pub use report::{
    contraction_norm, gap, min_sv_of_mdag, norm_of_m, shift_norm, spectral_report,
    sym_eig_extremes, GapResult, LevelRow, MdagBound, SpectralOptions, SpectralReport,
    REPORT_FORMAT_VERSION,
};
pub use sweep::{gap_vs_bound_sweep, write_sweep_csv, SweepGrid, SweepPoint};
pub use threshold::{
    d0_from_constants, d0_threshold, write_threshold_csv, ThresholdMode, ThresholdProbe,
    ThresholdReport, D0_SCAN_LIMIT,
};
