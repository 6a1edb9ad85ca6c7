//! Tiny stable content digest (FNV-1a, 64-bit) used for feature-space ids
//! and reproducibility stanzas. Stable across platforms and releases, which
//! `std`'s default hasher does not guarantee.

const FNV_OFFSET: u64 = 0xcbf29ce484222325;
const FNV_PRIME: u64 = 0x100000001b3;

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h = FNV_OFFSET;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

pub fn fnv1a64_hex(bytes: &[u8]) -> String {
    format!("{:016x}", fnv1a64(bytes))
}

/// Digest a sequence of string parts with unambiguous separators.
pub fn digest_parts<'a>(domain: &str, parts: impl IntoIterator<Item = &'a str>) -> String {
    let mut h = FNV_OFFSET;
    let mut step = |bytes: &[u8]| {
        for &b in bytes {
            h ^= b as u64;
            h = h.wrapping_mul(FNV_PRIME);
        }
        h ^= 0xff;
        h = h.wrapping_mul(FNV_PRIME);
    };
    step(domain.as_bytes());
    for p in parts {
        step(p.as_bytes());
    }
    format!("{h:016x}")
}
