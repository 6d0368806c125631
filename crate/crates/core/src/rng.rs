//! Counter-based uniform draws.
//!
//! Every random decision in a cascade sample (keep arc `i`? does node `v`
//! follow back?) is a pure function of `(seed, stream, index)`. Samples are
//! therefore reproducible regardless of iteration order or worker count, and
//! the same draw can be compared against several thresholds.

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// Stream used for arc retention in pruned graphs.
pub const ARC_STREAM: u64 = 1;
/// Stream used for follow-back outcomes.
pub const RECIPROCATION_STREAM: u64 = 2;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Key for one `(seed, stream)` pair; hoist it out of per-index loops.
#[inline]
pub fn stream_key(seed: u64, stream: u64) -> u64 {
    mix64(seed ^ mix64(stream.wrapping_mul(GOLDEN_GAMMA)))
}

/// Uniform draw in `[0, 1)` at position `index` of a keyed stream.
#[inline]
pub fn keyed_unit(key: u64, index: u64) -> f64 {
    let x = mix64(key.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)));
    (x >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

#[inline]
pub fn unit_draw(seed: u64, stream: u64, index: u64) -> f64 {
    keyed_unit(stream_key(seed, stream), index)
}
