//! Cryptographic primitives and the pure policy logic for sessions,
//! throttling and password reset. Persistence of that state lives in
//! [`crate::store`]; the workflows that combine them live in
//! [`crate::auth`].

pub mod password;
pub mod seal;
pub mod session;
pub mod throttle;
pub mod token;

pub use password::{HashAlgorithm, HashPolicy, MalformedHash, PasswordHasher, PolicyError};
pub use seal::{EncryptionKey, IntegrityFailure, KeyError, SealedBlob};
pub use session::SessionPolicy;
pub use throttle::{ThrottleDecision, ThrottlePolicy};
pub use token::{ct_eq, digest, generate_pin, random_token, PIN_ALPHABET, PIN_LEN};
