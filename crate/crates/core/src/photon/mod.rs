//! Photon-stream Monte Carlo: coherent and pseudo-thermal sources, the
//! detection chain, and second-order coherence estimators.

mod chain;
mod g2;
mod sources;
mod stream;

pub use chain::{detect, hbt_split};
pub use g2::{dead_time_g2_factor, g2_cross, g2_single_autocorr, AutocorrEstimate, CoincidenceHistogram};
pub use sources::{gen_coherent, gen_thermal, THERMAL_STEPS_PER_COHERENCE_TIME};
pub use stream::{PhotonStream, SourceKind};

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Independent generator for operation `op` under `seed`.
pub(crate) fn rng_for(seed: u64, op: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(op);
    rng
}
