//! Content digests for provenance records.

use alloc::string::String;
use sha2::{Digest, Sha256};

/// Incremental SHA-256 over a canonical, length-prefixed byte encoding.
#[derive(Clone, Default)]
pub struct Fingerprint {
    hasher: Sha256,
}

impl Fingerprint {
    pub fn new(domain: &str) -> Self {
        let mut fp = Self::default();
        fp.str(domain);
        fp
    }

    pub fn u64(&mut self, v: u64) -> &mut Self {
        self.hasher.update(v.to_le_bytes());
        self
    }

    pub fn f64(&mut self, v: f64) -> &mut Self {
        self.u64(v.to_bits())
    }

    pub fn bool(&mut self, v: bool) -> &mut Self {
        self.hasher.update([u8::from(v)]);
        self
    }

    pub fn str(&mut self, s: &str) -> &mut Self {
        self.u64(s.len() as u64);
        self.hasher.update(s.as_bytes());
        self
    }

    pub fn hex(self) -> String {
        let out = self.hasher.finalize();
        let mut s = String::with_capacity(64);
        for b in out.iter() {
            s.push(char::from_digit(u32::from(b >> 4), 16).unwrap());
            s.push(char::from_digit(u32::from(b & 0xf), 16).unwrap());
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_known_vector() {
        let mut h = Sha256::new();
        h.update(b"abc");
        let fp = Fingerprint { hasher: h };
        assert_eq!(
            fp.hex(),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn length_prefix_separates_fields() {
        let mut a = Fingerprint::new("t");
        a.str("ab").str("c");
        let mut b = Fingerprint::new("t");
        b.str("a").str("bc");
        assert_ne!(a.hex(), b.hex());
    }
}
