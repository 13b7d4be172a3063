//! Ensemble observables: frame potentials, moment operators, overlap
//! histograms and Pauli-basis purities.

mod frame;
mod kernel;
mod moment;
mod pauli;
mod pop;

pub use frame::{
    frame_potential_blocked, frame_potential_exact, frame_potential_mc, frame_potential_weighted,
    frame_potentials, haar_frame_potential, relative_deviation, EstimatorMode,
    FramePotentialEstimate,
};
pub use moment::{moment_distance, moment_operator, MAX_MOMENT_DIM};
pub use pauli::purity_via_pauli;
pub use pop::{
    pop_collect, pt_cdf, pt_chi_square, pt_density, PopHistogram, PtTest, DEFAULT_POP_BINS,
};
