//! NIG and NCIG return laws.
//!
//! The NIG law is the normal variance-mean mixture with inverse-Gaussian
//! mixing. The NCIG law replaces the single inverse-Gaussian clock with a
//! doubly subordinated one, `V(t) = T(U(t))`, where `T` and `U` are
//! independent IG subordinators.

mod ig;
mod ncig;
mod nig;
mod shift;

pub use ig::{compound_ig_mgf, compound_ig_mgf_upper, compound_ig_pdf, sample_compound_ig, IgParams};
pub use ncig::NcigParams;
pub use nig::{NigMoments, NigParams};
pub use shift::{shifted_return_law, ShiftedNigLaw};
pub(crate) use shift::shift_correction;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator used by every seeded sampler in the crate.
pub type SeededRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `sqrt(a2 - b2) - sqrt(a2 - c2)` without cancellation when `a2` dominates.
pub(crate) fn sqrt_gap(a2: f64, b2: f64, c2: f64) -> f64 {
    let (p, q) = ((a2 - b2).sqrt(), (a2 - c2).sqrt());
    (c2 - b2) / (p + q)
}
