//! Deliberately weakened service modes.
//!
//! Each [`Weakness`] switches off one mitigation so the security probes
//! can be shown to detect the fault they target. The weakened code paths
//! are only compiled with the `insecure-demo` cargo feature; without it
//! [`Weaknesses::contains`] is always false and cannot be made otherwise.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Weakness {
    /// State-changing requests are accepted without a CSRF token.
    Csrf,
    /// Login email lookup is built by string concatenation.
    Injection,
    /// Failed logins are never throttled.
    Throttle,
    /// Failed login attempts record the submitted password.
    PlaintextLeak,
    /// Cadet record ownership is not checked.
    AccessControl,
    /// Security headers are omitted and errors carry internal detail.
    Headers,
    /// Responses are labelled as HTML.
    Xss,
    /// Audit records are not written.
    Logging,
}

impl Weakness {
    pub const ALL: &'static [Weakness] = &[
        Weakness::Csrf,
        Weakness::Injection,
        Weakness::Throttle,
        Weakness::PlaintextLeak,
        Weakness::AccessControl,
        Weakness::Headers,
        Weakness::Xss,
        Weakness::Logging,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Weakness::Csrf => "csrf",
            Weakness::Injection => "injection",
            Weakness::Throttle => "throttle",
            Weakness::PlaintextLeak => "plaintext-leak",
            Weakness::AccessControl => "access-control",
            Weakness::Headers => "headers",
            Weakness::Xss => "xss",
            Weakness::Logging => "logging",
        }
    }
}

impl fmt::Display for Weakness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown weakness {0:?}")]
pub struct UnknownWeakness(pub String);

impl FromStr for Weakness {
    type Err = UnknownWeakness;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Weakness::ALL
            .iter()
            .copied()
            .find(|w| w.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| UnknownWeakness(s.to_owned()))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Weaknesses {
    #[cfg(feature = "insecure-demo")]
    enabled: BTreeSet<Weakness>,
}

impl Weaknesses {
    pub fn none() -> Self {
        Self::default()
    }

    /// Enables the given weaknesses. Without the `insecure-demo` feature
    /// this returns an error for any non-empty set.
    pub fn of(list: impl IntoIterator<Item = Weakness>) -> Result<Self, FeatureDisabled> {
        let set: BTreeSet<Weakness> = list.into_iter().collect();
        #[cfg(feature = "insecure-demo")]
        {
            Ok(Self { enabled: set })
        }
        #[cfg(not(feature = "insecure-demo"))]
        {
            if set.is_empty() {
                Ok(Self::default())
            } else {
                Err(FeatureDisabled)
            }
        }
    }

    pub fn contains(&self, weakness: Weakness) -> bool {
        #[cfg(feature = "insecure-demo")]
        {
            self.enabled.contains(&weakness)
        }
        #[cfg(not(feature = "insecure-demo"))]
        {
            let _ = weakness;
            false
        }
    }

    pub fn is_empty(&self) -> bool {
        Weakness::ALL.iter().all(|w| !self.contains(*w))
    }

    pub fn list(&self) -> Vec<Weakness> {
        Weakness::ALL
            .iter()
            .copied()
            .filter(|w| self.contains(*w))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("weakened modes require a build with the insecure-demo feature")]
pub struct FeatureDisabled;
