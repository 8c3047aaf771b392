//! Deterministic seed derivation so that every randomized stage gets its own
//! independent stream from one master seed, regardless of thread schedule.

/// SplitMix64 step; the standard mixer for expanding one seed into many.
fn splitmix64(state: &mut u64) {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    *state = z ^ (z >> 31);
}

/// Derives an independent child seed from `(master, stream)`.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    let mut state = master ^ stream.wrapping_mul(0xa076_1d64_78bd_642f);
    splitmix64(&mut state);
    splitmix64(&mut state);
    state
}
