//! Keccak-256 helpers used for selectors, storage positions and fingerprints.

use tiny_keccak::{Hasher, Keccak};

/// Keccak-256 of arbitrary bytes.
pub fn keccak256<B: AsRef<[u8]>>(data: B) -> [u8; 32] {
    let mut output = [0u8; 32];
    let mut hasher = Keccak::v256();
    hasher.update(data.as_ref());
    hasher.finalize(&mut output);
    output
}

/// Lowercase 0x-prefixed hex of a byte slice.
pub fn to_hex<B: AsRef<[u8]>>(bytes: B) -> String {
    format!("0x{}", hex::encode(bytes.as_ref()))
}

/// Parse a 0x-prefixed hex string into a fixed-size array.
pub fn from_hex_fixed<const N: usize>(s: &str) -> Option<[u8; N]> {
    let s = s.strip_prefix("0x")?;
    let bytes = hex::decode(s).ok()?;
    bytes.try_into().ok()
}

/// Add an unsigned integer to a 256-bit big-endian value, wrapping on
/// overflow. Used for slot arithmetic on keccak-derived positions.
pub fn u256_add(base: [u8; 32], rhs: u64) -> [u8; 32] {
    let mut out = base;
    let mut carry = rhs as u128;
    for i in (0..32).rev() {
        if carry == 0 {
            break;
        }
        let sum = out[i] as u128 + (carry & 0xff);
        out[i] = (sum & 0xff) as u8;
        carry = (carry >> 8) + (sum >> 8);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_input_vector() {
        assert_eq!(
            to_hex(keccak256([])),
            "0xc5d2460186f7233c927e7db2dcc703c0e500b653ca82273b7bfad8045d85a470"
        );
    }

    #[test]
    fn u256_add_carries_across_bytes() {
        let mut base = [0u8; 32];
        base[31] = 0xff;
        let out = u256_add(base, 1);
        assert_eq!(out[31], 0);
        assert_eq!(out[30], 1);

        let max = [0xffu8; 32];
        let wrapped = u256_add(max, 1);
        assert_eq!(wrapped, [0u8; 32]);
    }

    #[test]
    fn hex_round_trip() {
        let v: [u8; 4] = [0xa9, 0x05, 0x9c, 0xbb];
        assert_eq!(to_hex(v), "0xa9059cbb");
        assert_eq!(from_hex_fixed::<4>("0xa9059cbb"), Some(v));
        assert_eq!(from_hex_fixed::<4>("0xa9"), None);
    }
}
