//! Command-line and environment configuration.

use std::net::SocketAddr;
use std::path::PathBuf;

use chrono::Duration;
use clap::Args;
use sims_core::demo::{Weakness, Weaknesses};
use sims_core::security::{
    EncryptionKey, HashAlgorithm, HashPolicy, SessionPolicy, ThrottlePolicy,
};
use sims_core::ServiceConfig;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CookiePolicy {
    /// Adds the `Secure` attribute. Only disable for plain-HTTP testing.
    pub secure: bool,
}

impl Default for CookiePolicy {
    fn default() -> Self {
        Self { secure: true }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("an encryption key is required (generate one with `sims-server keygen`)")]
    MissingKey,
    #[error("invalid encryption key: {0}")]
    Key(String),
    #[error("invalid hash policy: {0}")]
    Hash(String),
    #[error("{0} must be positive")]
    NonPositive(&'static str),
    #[error("invalid weakness list: {0}")]
    Weakness(String),
}

/// Settings shared by `serve` and `migrate`.
#[derive(Debug, Clone, Args)]
pub struct ServiceArgs {
    /// Path of the SQLite storage file.
    #[arg(long, env = "SIMS_STORAGE", default_value = "sims.db")]
    pub storage: PathBuf,

    /// Directory for sealed course materials.
    #[arg(long, env = "SIMS_UPLOAD_DIR", default_value = "uploads")]
    pub upload_dir: PathBuf,

    /// Base64 encoding of the 32-byte key that seals materials and reset deliveries.
    #[arg(long, env = "SIMS_ENCRYPTION_KEY", hide_env_values = true)]
    pub encryption_key: Option<String>,

    /// Password hash algorithm: argon2id or bcrypt.
    #[arg(long, env = "SIMS_HASH_ALGORITHM", default_value = "argon2id")]
    pub hash_algorithm: String,

    /// Argon2id memory cost in KiB.
    #[arg(long, env = "SIMS_ARGON2_MEMORY_KIB", default_value_t = HashPolicy::default().argon2_memory_kib)]
    pub argon2_memory_kib: u32,

    /// Argon2id iteration count.
    #[arg(long, env = "SIMS_ARGON2_ITERATIONS", default_value_t = HashPolicy::default().argon2_iterations)]
    pub argon2_iterations: u32,

    /// Bcrypt cost factor.
    #[arg(long, env = "SIMS_BCRYPT_COST", default_value_t = HashPolicy::default().bcrypt_cost)]
    pub bcrypt_cost: u32,

    /// Idle session lifetime in minutes.
    #[arg(long, env = "SIMS_SESSION_TTL_MINUTES", default_value_t = 120)]
    pub session_ttl_minutes: i64,

    /// Failed attempts allowed per throttle window.
    #[arg(long, env = "SIMS_THROTTLE_LIMIT", default_value_t = 5)]
    pub throttle_limit: u32,

    /// Throttle window length in minutes.
    #[arg(long, env = "SIMS_THROTTLE_WINDOW_MINUTES", default_value_t = 15)]
    pub throttle_window_minutes: i64,

    /// Password reset token lifetime in minutes.
    #[arg(long, env = "SIMS_RESET_TTL_MINUTES", default_value_t = 30)]
    pub reset_ttl_minutes: i64,

    /// Academic year of the session created on first seed.
    #[arg(long, env = "SIMS_SESSION_YEAR", default_value_t = sims_core::config::DEFAULT_SESSION_YEAR)]
    pub session_year: i32,

    /// Name of the administrator created when seeding an empty store.
    #[arg(long, env = "SIMS_ADMIN_NAME", default_value = "Administrator")]
    pub admin_name: String,

    /// Email of the administrator created when seeding an empty store.
    #[arg(long, env = "SIMS_ADMIN_EMAIL")]
    pub admin_email: Option<String>,

    /// Password of the administrator created when seeding an empty store.
    #[arg(long, env = "SIMS_ADMIN_PASSWORD", hide_env_values = true)]
    pub admin_password: Option<String>,

    /// Start with CSRF checking disabled. Probe validation only; needs the
    /// insecure-demo build feature.
    #[arg(long)]
    pub insecure_demo: bool,

    /// Comma-separated weaknesses to enable (csrf, injection, throttle,
    /// plaintext-leak, access-control, headers, xss, logging). Probe
    /// validation only; needs the insecure-demo build feature.
    #[arg(long, value_delimiter = ',')]
    pub weaken: Vec<String>,
}

impl ServiceArgs {
    pub fn hash_policy(&self) -> Result<HashPolicy, ConfigError> {
        let algorithm: HashAlgorithm = self
            .hash_algorithm
            .parse()
            .map_err(|e| ConfigError::Hash(format!("{e}")))?;
        let policy = HashPolicy {
            algorithm,
            argon2_memory_kib: self.argon2_memory_kib,
            argon2_iterations: self.argon2_iterations,
            bcrypt_cost: self.bcrypt_cost,
            ..HashPolicy::default()
        };
        policy
            .validate()
            .map_err(|e| ConfigError::Hash(e.to_string()))?;
        Ok(policy)
    }

    pub fn weaknesses(&self) -> Result<Weaknesses, ConfigError> {
        let mut list = Vec::new();
        if self.insecure_demo {
            list.push(Weakness::Csrf);
        }
        for name in &self.weaken {
            list.push(
                name.parse::<Weakness>()
                    .map_err(|e| ConfigError::Weakness(e.to_string()))?,
            );
        }
        Weaknesses::of(list).map_err(|e| ConfigError::Weakness(e.to_string()))
    }

    pub fn service_config(&self) -> Result<ServiceConfig, ConfigError> {
        let key = self
            .encryption_key
            .as_deref()
            .ok_or(ConfigError::MissingKey)?;
        let key = EncryptionKey::from_base64(key).map_err(|e| ConfigError::Key(e.to_string()))?;
        for (value, name) in [
            (self.session_ttl_minutes, "session TTL"),
            (self.throttle_window_minutes, "throttle window"),
            (self.reset_ttl_minutes, "reset token TTL"),
            (i64::from(self.throttle_limit), "throttle limit"),
        ] {
            if value <= 0 {
                return Err(ConfigError::NonPositive(name));
            }
        }
        let mut config = ServiceConfig::new(&self.storage, &self.upload_dir, key);
        config.hash_policy = self.hash_policy()?;
        config.session = SessionPolicy {
            idle_ttl: Duration::minutes(self.session_ttl_minutes),
        };
        config.throttle = ThrottlePolicy {
            limit: self.throttle_limit,
            window: Duration::minutes(self.throttle_window_minutes),
        };
        config.reset_token_ttl = Duration::minutes(self.reset_ttl_minutes);
        config.session_year = self.session_year;
        config.weaknesses = self.weaknesses()?;
        Ok(config)
    }
}

/// Transport settings for `serve`.
#[derive(Debug, Clone, Args)]
pub struct ListenArgs {
    /// Address to listen on.
    #[arg(long, env = "SIMS_BIND", default_value = "127.0.0.1:8080")]
    pub bind: SocketAddr,

    /// Whether the session cookie carries the Secure attribute. The service
    /// must sit behind TLS when this is on.
    #[arg(long, env = "SIMS_COOKIE_SECURE", default_value_t = true, action = clap::ArgAction::Set)]
    pub cookie_secure: bool,
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::Parser;

    #[derive(Parser)]
    struct Wrapper {
        #[command(flatten)]
        args: ServiceArgs,
    }

    fn parse(extra: &[&str]) -> ServiceArgs {
        let key = EncryptionKey::generate().to_base64();
        let mut argv = vec!["test", "--encryption-key", &key];
        argv.extend_from_slice(extra);
        Wrapper::try_parse_from(argv).unwrap().args
    }

    #[test]
    fn flags_reach_the_service_config() {
        let config = parse(&[
            "--session-ttl-minutes",
            "30",
            "--throttle-limit",
            "3",
            "--hash-algorithm",
            "bcrypt",
        ])
        .service_config()
        .unwrap();
        assert_eq!(config.session.idle_ttl, Duration::minutes(30));
        assert_eq!(config.throttle.limit, 3);
        assert_eq!(config.hash_policy.algorithm, HashAlgorithm::Bcrypt);
        assert!(config.weaknesses.is_empty());
    }

    #[test]
    fn weak_hash_costs_are_refused() {
        assert!(matches!(
            parse(&["--argon2-iterations", "1"]).service_config(),
            Err(ConfigError::Hash(_))
        ));
        assert!(matches!(
            parse(&["--session-ttl-minutes", "0"]).service_config(),
            Err(ConfigError::NonPositive(_))
        ));
    }

    #[test]
    fn key_is_required() {
        let args = Wrapper::try_parse_from(["test"]).unwrap().args;
        assert!(matches!(
            args.service_config(),
            Err(ConfigError::MissingKey)
        ));
    }

    #[cfg(not(feature = "insecure-demo"))]
    #[test]
    fn weakened_modes_need_the_feature() {
        assert!(matches!(
            parse(&["--insecure-demo"]).service_config(),
            Err(ConfigError::Weakness(_))
        ));
    }

    #[test]
    fn unknown_weakness_is_refused() {
        assert!(matches!(
            parse(&["--weaken", "everything"]).service_config(),
            Err(ConfigError::Weakness(_))
        ));
    }
}
