#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use sims_audit::fixture::Credential;
use sims_audit::seed::{self, SeedOutcome, SeedPlan};
use sims_audit::{Client, Fixture};
use sims_core::demo::{Weakness, Weaknesses};
use sims_core::security::EncryptionKey;
use sims_core::service::AdminSeed;
use sims_core::{ServiceConfig, Sims, SystemClock};
use sims_server::{BackgroundServer, CookiePolicy};
use tempfile::TempDir;

pub const ADMIN_EMAIL: &str = "registry@nda.edu.ng";
pub const ADMIN_PASSWORD: &str = "registry-pass-2019";

/// A migrated, admin-seeded service listening on an ephemeral port.
pub struct Instance {
    pub server: Option<BackgroundServer>,
    pub sims: Sims,
    pub base: String,
    pub dir: TempDir,
}

impl Instance {
    pub fn start(weaknesses: &[Weakness]) -> Self {
        let dir = tempfile::tempdir().unwrap();
        let mut config = ServiceConfig::new(
            dir.path().join("sims.db"),
            dir.path().join("uploads"),
            EncryptionKey::generate(),
        );
        config.weaknesses = Weaknesses::of(weaknesses.iter().copied()).unwrap();
        let sims = Sims::open(config, Arc::new(SystemClock)).unwrap();
        sims.migrate().unwrap();
        sims.seed(Some(&AdminSeed {
            name: "Registry".into(),
            email: ADMIN_EMAIL.into(),
            password: ADMIN_PASSWORD.into(),
        }))
        .unwrap();
        let server = BackgroundServer::start(
            sims.clone(),
            "127.0.0.1:0".parse().unwrap(),
            CookiePolicy::default(),
        )
        .unwrap();
        let base = server.base_url();
        Self {
            server: Some(server),
            sims,
            base,
            dir,
        }
    }

    pub fn storage_path(&self) -> PathBuf {
        self.dir.path().join("sims.db")
    }

    pub fn plan(&self) -> SeedPlan {
        SeedPlan::new(
            Credential {
                email: ADMIN_EMAIL.into(),
                password: ADMIN_PASSWORD.into(),
            },
            self.storage_path(),
        )
    }

    /// Runs the seeding walkthrough with `client`.
    pub fn seed_with(&self, client: &Client) -> SeedOutcome {
        seed::run(client, &self.plan()).unwrap()
    }

    /// Seeds and writes the fixture next to the storage file.
    pub fn seeded_fixture(&self) -> (Fixture, PathBuf) {
        let outcome = self.seed_with(&Client::new(&self.base).unwrap());
        let path = self.dir.path().join("fixture.json");
        outcome.fixture.save(&path).unwrap();
        (outcome.fixture, path)
    }
}

/// A base URL nothing listens on.
pub fn dead_target() -> String {
    let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    drop(listener);
    format!("http://{addr}")
}
