//! Counter-based Gaussian increments.
//!
//! Every increment is a pure function of the key (seed, replication, step,
//! stream): Philox4x32-10 turns the key into 128 random bits, and a
//! Box-Muller transform turns those into one standard normal draw. No state
//! is carried between draws, so any path, replication or single step can be
//! regenerated in isolation and results cannot depend on scheduling order.

const PHILOX_M0: u32 = 0xD2511F53;
const PHILOX_M1: u32 = 0xCD9E8D57;
const PHILOX_W0: u32 = 0x9E3779B9;
const PHILOX_W1: u32 = 0xBB67AE85;

#[inline]
fn mulhilo(a: u32, b: u32) -> (u32, u32) {
    let p = (a as u64) * (b as u64);
    ((p >> 32) as u32, p as u32)
}

#[inline]
fn philox_round(ctr: [u32; 4], key: [u32; 2]) -> [u32; 4] {
    let (hi0, lo0) = mulhilo(PHILOX_M0, ctr[0]);
    let (hi1, lo1) = mulhilo(PHILOX_M1, ctr[2]);
    [hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0]
}

/// Philox4x32 with 10 rounds.
pub fn philox4x32(mut ctr: [u32; 4], mut key: [u32; 2]) -> [u32; 4] {
    for round in 0..10 {
        if round > 0 {
            key[0] = key[0].wrapping_add(PHILOX_W0);
            key[1] = key[1].wrapping_add(PHILOX_W1);
        }
        ctr = philox_round(ctr, key);
    }
    ctr
}

/// The four independent increment streams of one path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    B1 = 0,
    B2 = 1,
    W1 = 2,
    W2 = 3,
}

#[inline]
fn to_unit_open(bits: u64) -> f64 {
    // 53 significant bits, offset to the open interval (0, 1).
    ((bits >> 11) as f64 + 0.5) * (1.0 / 9007199254740992.0)
}

/// One standard normal draw for the given key. Replication indices must fit
/// in 32 bits; step indices may use the full 64.
pub fn standard_normal(seed: u64, replication: u64, step: u64, stream: Stream) -> f64 {
    debug_assert!(replication <= u32::MAX as u64);
    let ctr = [
        replication as u32,
        step as u32,
        (step >> 32) as u32,
        stream as u32,
    ];
    let key = [seed as u32, (seed >> 32) as u32];
    let words = philox4x32(ctr, key);
    let u = to_unit_open(((words[0] as u64) << 32) | words[1] as u64);
    let v = to_unit_open(((words[2] as u64) << 32) | words[3] as u64);
    (-2.0 * u.ln()).sqrt() * (std::f64::consts::TAU * v).cos()
}
