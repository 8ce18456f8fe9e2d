//! Kernel steady state versus long-time evolution under an independently
//! assembled Lindblad generator.

#[path = "common/lindblad.rs"]
mod lindblad;

use lindblad::{oracle_gap, random_case, superoperator, N};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rydthz_core::levels::build_hamiltonian;

#[test]
fn kernel_matches_long_time_evolution() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for case in 0..10 {
        let worst = oracle_gap(&mut rng);
        assert!(worst < 1e-8, "case {case}: max |Δρ| = {worst:.3e}");
    }
}

#[test]
fn independent_generator_agrees_with_the_library() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (scheme, fields, v) = random_case(&mut rng);
    let h = build_hamiltonian(&scheme, &fields, v);
    let s = superoperator(&h, &scheme);
    let l = rydthz_core::levels::build_liouvillian(&h, &scheme).unwrap();
    let scale = s.norm();
    for r in 0..N * N {
        for k in 0..N * N {
            assert!((s[(r, k)] - l.matrix()[(r, k)]).norm() <= 1e-13 * scale, "({r}, {k})");
        }
    }
}
