#![allow(dead_code)]

use dualism::fock::build_epr_state;
use dualism::{Statistics, TwoParticleState, VariableSpec};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Complex number with components uniform in [-1, 1].
pub fn complex(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

pub fn nonzero_complex(rng: &mut ChaCha8Rng) -> Complex64 {
    loop {
        let z = complex(rng);
        if z.norm() > 1e-3 {
            return z;
        }
    }
}

pub fn statistics(rng: &mut ChaCha8Rng) -> Statistics {
    if rng.random_bool(0.5) {
        Statistics::Boson
    } else {
        Statistics::Fermion
    }
}

pub fn random_epr(rng: &mut ChaCha8Rng, stats: Statistics) -> TwoParticleState {
    build_epr_state(VariableSpec::default(), nonzero_complex(rng), nonzero_complex(rng), stats).unwrap()
}

/// Random normalized state over the whole two-particle basis.
pub fn random_general(rng: &mut ChaCha8Rng, stats: Statistics) -> TwoParticleState {
    let dim = if stats == Statistics::Boson { 10 } else { 6 };
    let amps = (0..dim).map(|_| complex(rng)).collect();
    TwoParticleState::from_amplitudes(VariableSpec::default(), stats, amps).unwrap()
}
