//! Random opaque tokens, their storage digests, and registration pins.

use base64::engine::general_purpose::URL_SAFE_NO_PAD;
use base64::Engine;
use rand::rngs::OsRng;
use rand::{Rng, RngCore};
use sha2::{Digest, Sha256};
use subtle::ConstantTimeEq;

/// Bytes of entropy in every session, CSRF and reset token.
pub const TOKEN_BYTES: usize = 32;

pub const PIN_ALPHABET: &[u8] = b"abcdefghijklmnopqrstuvwxyz0123456789";
pub const PIN_LEN: usize = 8;

/// 256 random bits from the operating system, base64url without padding.
pub fn random_token() -> String {
    let mut raw = [0u8; TOKEN_BYTES];
    OsRng.fill_bytes(&mut raw);
    URL_SAFE_NO_PAD.encode(raw)
}

/// Hex SHA-256 of a bearer token. Only digests are persisted, so a copy of
/// the database does not yield usable tokens.
pub fn digest(token: &str) -> String {
    Sha256::digest(token.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Constant-time equality. Unequal lengths compare unequal.
pub fn ct_eq(a: &str, b: &str) -> bool {
    a.as_bytes().ct_eq(b.as_bytes()).into()
}

pub fn generate_pin() -> String {
    let mut rng = OsRng;
    (0..PIN_LEN)
        .map(|_| PIN_ALPHABET[rng.gen_range(0..PIN_ALPHABET.len())] as char)
        .collect()
}

pub fn is_pin_shaped(text: &str) -> bool {
    text.len() == PIN_LEN && text.bytes().all(|b| PIN_ALPHABET.contains(&b))
}
