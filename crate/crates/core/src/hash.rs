//! Stateless hashing used to draw i.i.d. cell values from a seed.

#[inline]
pub(crate) fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Uniform value in [0, 1) attached to lattice cell `(i, j)` under `key`.
#[inline]
pub(crate) fn cell_uniform(key: u64, i: i64, j: i64) -> f64 {
    let h = splitmix64(key ^ splitmix64(i as u64) ^ splitmix64((j as u64).rotate_left(29) ^ 0xA5A5));
    (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
