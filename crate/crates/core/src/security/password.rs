//! Password hashing. New hashes use the configured algorithm; verification
//! dispatches on the self-describing prefix of the stored text, so a store
//! holding a mix of Argon2id and bcrypt hashes keeps working.

use argon2::password_hash::{PasswordHash, PasswordHasher as _, PasswordVerifier, SaltString};
use argon2::{Algorithm, Argon2, Params, Version};
use rand::rngs::OsRng;
use thiserror::Error;

use crate::error::{Error, ValidationError};

pub const MIN_PASSWORD_CHARS: usize = 8;
/// Upper bound so a hostile client cannot make the server hash megabytes.
pub const MAX_PASSWORD_CHARS: usize = 1024;

/// Interactive-login floor for Argon2id parameters.
pub const ARGON2_MIN_MEMORY_KIB: u32 = 19 * 1024;
pub const ARGON2_MIN_ITERATIONS: u32 = 2;
pub const BCRYPT_MIN_COST: u32 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HashAlgorithm {
    Argon2id,
    Bcrypt,
}

impl std::str::FromStr for HashAlgorithm {
    type Err = PolicyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "argon2id" | "argon2" => Ok(Self::Argon2id),
            "bcrypt" => Ok(Self::Bcrypt),
            _ => Err(PolicyError::UnknownAlgorithm(s.to_owned())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HashPolicy {
    pub algorithm: HashAlgorithm,
    pub argon2_memory_kib: u32,
    pub argon2_iterations: u32,
    pub argon2_parallelism: u32,
    pub bcrypt_cost: u32,
}

impl Default for HashPolicy {
    fn default() -> Self {
        Self {
            algorithm: HashAlgorithm::Argon2id,
            argon2_memory_kib: ARGON2_MIN_MEMORY_KIB,
            argon2_iterations: ARGON2_MIN_ITERATIONS,
            argon2_parallelism: 1,
            bcrypt_cost: 12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolicyError {
    #[error("unknown hash algorithm {0:?}")]
    UnknownAlgorithm(String),
    #[error("hash parameters below the interactive-login floor: {0}")]
    BelowFloor(&'static str),
}

impl HashPolicy {
    pub fn validate(&self) -> Result<(), PolicyError> {
        if self.argon2_memory_kib < ARGON2_MIN_MEMORY_KIB {
            return Err(PolicyError::BelowFloor("argon2 memory"));
        }
        if self.argon2_iterations < ARGON2_MIN_ITERATIONS {
            return Err(PolicyError::BelowFloor("argon2 iterations"));
        }
        if self.argon2_parallelism < 1 {
            return Err(PolicyError::BelowFloor("argon2 parallelism"));
        }
        if !(BCRYPT_MIN_COST..=31).contains(&self.bcrypt_cost) {
            return Err(PolicyError::BelowFloor("bcrypt cost"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("stored password hash is malformed")]
pub struct MalformedHash;

pub struct PasswordHasher {
    policy: HashPolicy,
    argon2: Argon2<'static>,
    /// Verified against when the account does not exist, so unknown and
    /// known emails cost the same.
    dummy: String,
}

impl std::fmt::Debug for PasswordHasher {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PasswordHasher")
            .field("policy", &self.policy)
            .finish_non_exhaustive()
    }
}

/// Checks the password policy without hashing.
pub fn check_strength(plaintext: &str) -> Result<(), ValidationError> {
    let chars = plaintext.chars().count();
    if chars < MIN_PASSWORD_CHARS {
        return Err(ValidationError::WeakPassword);
    }
    if chars > MAX_PASSWORD_CHARS || plaintext.contains('\0') {
        return Err(ValidationError::InvalidField("password"));
    }
    Ok(())
}

impl PasswordHasher {
    pub fn new(policy: HashPolicy) -> Result<Self, PolicyError> {
        policy.validate()?;
        let params = Params::new(
            policy.argon2_memory_kib,
            policy.argon2_iterations,
            policy.argon2_parallelism,
            None,
        )
        .map_err(|_| PolicyError::BelowFloor("argon2 parameters"))?;
        let mut hasher = Self {
            policy,
            argon2: Argon2::new(Algorithm::Argon2id, Version::V0x13, params),
            dummy: String::new(),
        };
        hasher.dummy = hasher
            .hash_unchecked(&crate::security::random_token())
            .map_err(|_| PolicyError::BelowFloor("argon2 parameters"))?;
        Ok(hasher)
    }

    pub fn policy(&self) -> &HashPolicy {
        &self.policy
    }

    pub fn hash(&self, plaintext: &str) -> Result<String, Error> {
        check_strength(plaintext)?;
        self.hash_unchecked(plaintext)
    }

    fn hash_unchecked(&self, plaintext: &str) -> Result<String, Error> {
        match self.policy.algorithm {
            HashAlgorithm::Argon2id => {
                let salt = SaltString::generate(&mut OsRng);
                self.argon2
                    .hash_password(plaintext.as_bytes(), &salt)
                    .map(|h| h.to_string())
                    .map_err(|e| Error::internal(HashFailure(e.to_string())))
            }
            HashAlgorithm::Bcrypt => bcrypt::hash(plaintext, self.policy.bcrypt_cost)
                .map_err(|e| Error::internal(HashFailure(e.to_string()))),
        }
    }

    /// Digest comparison inside both backends is constant-time.
    pub fn verify(&self, plaintext: &str, stored: &str) -> Result<bool, MalformedHash> {
        if stored.starts_with("$argon2") {
            let parsed = PasswordHash::new(stored).map_err(|_| MalformedHash)?;
            if parsed.hash.is_none() || parsed.salt.is_none() {
                return Err(MalformedHash);
            }
            Ok(Argon2::default()
                .verify_password(plaintext.as_bytes(), &parsed)
                .is_ok())
        } else if stored.starts_with("$2") {
            bcrypt::verify(plaintext, stored).map_err(|_| MalformedHash)
        } else {
            Err(MalformedHash)
        }
    }

    /// Spends one verification's worth of work and always fails.
    pub fn verify_dummy(&self, plaintext: &str) -> bool {
        let _ = self.verify(plaintext, &self.dummy);
        false
    }
}

#[derive(Debug, Error)]
#[error("password hashing failed: {0}")]
struct HashFailure(String);
