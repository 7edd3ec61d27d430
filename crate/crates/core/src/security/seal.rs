//! AES-256-GCM sealing. A blob carries its own random nonce and tag; any
//! modification, or opening under a different key or context, fails with
//! the same [`IntegrityFailure`].

use aes_gcm::aead::generic_array::GenericArray;
use aes_gcm::aead::AeadInPlace;
use aes_gcm::{Aes256Gcm, KeyInit};
use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use rand::rngs::OsRng;
use rand::RngCore;
use thiserror::Error;

pub const KEY_LEN: usize = 32;
pub const NONCE_LEN: usize = 12;
pub const TAG_LEN: usize = 16;

#[derive(Clone, PartialEq, Eq)]
pub struct EncryptionKey([u8; KEY_LEN]);

impl std::fmt::Debug for EncryptionKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("EncryptionKey(..)")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KeyError {
    #[error("encryption key is not valid base64")]
    Encoding,
    #[error("encryption key must be {KEY_LEN} bytes, got {0}")]
    Length(usize),
}

impl EncryptionKey {
    pub fn generate() -> Self {
        let mut key = [0u8; KEY_LEN];
        OsRng.fill_bytes(&mut key);
        Self(key)
    }

    pub fn from_bytes(bytes: [u8; KEY_LEN]) -> Self {
        Self(bytes)
    }

    pub fn from_base64(text: &str) -> Result<Self, KeyError> {
        let raw = STANDARD
            .decode(text.trim())
            .map_err(|_| KeyError::Encoding)?;
        let key: [u8; KEY_LEN] = raw
            .as_slice()
            .try_into()
            .map_err(|_| KeyError::Length(raw.len()))?;
        Ok(Self(key))
    }

    pub fn to_base64(&self) -> String {
        STANDARD.encode(self.0)
    }

    fn cipher(&self) -> Aes256Gcm {
        Aes256Gcm::new(GenericArray::from_slice(&self.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("sealed data failed its integrity check")]
pub struct IntegrityFailure;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SealedBlob {
    pub nonce: [u8; NONCE_LEN],
    pub tag: [u8; TAG_LEN],
    pub ciphertext: Vec<u8>,
}

impl SealedBlob {
    /// Encrypts `plaintext`, binding it to `context` (authenticated but not
    /// encrypted, and not stored in the blob).
    pub fn seal(key: &EncryptionKey, plaintext: &[u8], context: &[u8]) -> Self {
        let mut nonce = [0u8; NONCE_LEN];
        OsRng.fill_bytes(&mut nonce);
        let mut ciphertext = plaintext.to_vec();
        let tag = key
            .cipher()
            .encrypt_in_place_detached(GenericArray::from_slice(&nonce), context, &mut ciphertext)
            .expect("AES-GCM encryption of an in-memory buffer cannot fail");
        Self {
            nonce,
            tag: tag.into(),
            ciphertext,
        }
    }

    pub fn open(&self, key: &EncryptionKey, context: &[u8]) -> Result<Vec<u8>, IntegrityFailure> {
        let mut plaintext = self.ciphertext.clone();
        key.cipher()
            .decrypt_in_place_detached(
                GenericArray::from_slice(&self.nonce),
                context,
                &mut plaintext,
                GenericArray::from_slice(&self.tag),
            )
            .map_err(|_| IntegrityFailure)?;
        Ok(plaintext)
    }

    /// `nonce || tag || ciphertext`
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(NONCE_LEN + TAG_LEN + self.ciphertext.len());
        out.extend_from_slice(&self.nonce);
        out.extend_from_slice(&self.tag);
        out.extend_from_slice(&self.ciphertext);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, IntegrityFailure> {
        if bytes.len() < NONCE_LEN + TAG_LEN {
            return Err(IntegrityFailure);
        }
        let (nonce, rest) = bytes.split_at(NONCE_LEN);
        let (tag, ciphertext) = rest.split_at(TAG_LEN);
        Ok(Self {
            nonce: nonce.try_into().map_err(|_| IntegrityFailure)?,
            tag: tag.try_into().map_err(|_| IntegrityFailure)?,
            ciphertext: ciphertext.to_vec(),
        })
    }
}
