use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use sims_core::security::EncryptionKey;
use sims_core::service::AdminSeed;
use sims_core::{Sims, SystemClock};
use sims_server::config::{ListenArgs, ServiceArgs};
use sims_server::{CookiePolicy, ServeError};

/// Student information service for the academy.
///
/// Every option can also be given through the environment variable shown
/// next to it. The service speaks plain HTTP and must sit behind a TLS
/// terminating proxy in deployment.
#[derive(Parser)]
#[command(name = "sims-server", version)]
struct Cli {
    /// Print the role/action permission matrix and exit.
    #[arg(long)]
    dump_matrix: bool,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Apply pending schema migrations and seed reference data.
    Migrate {
        #[command(flatten)]
        service: ServiceArgs,
    },
    /// Serve the HTTP API.
    Serve {
        #[command(flatten)]
        service: ServiceArgs,
        #[command(flatten)]
        listen: ListenArgs,
        /// Migrate and seed before serving.
        #[arg(long)]
        migrate: bool,
    },
    /// Print a fresh base64 encryption key.
    Keygen,
}

fn open(service: &ServiceArgs) -> Result<Sims, String> {
    let config = service.service_config().map_err(|e| e.to_string())?;
    Sims::open(config, Arc::new(SystemClock)).map_err(|e| e.to_string())
}

fn migrate(sims: &Sims, service: &ServiceArgs) -> Result<(), String> {
    let applied = sims.migrate().map_err(|e| e.to_string())?;
    for m in &applied {
        tracing::info!(ordinal = m.ordinal, description = %m.description, "applied migration");
    }
    let admin = match (&service.admin_email, &service.admin_password) {
        (Some(email), Some(password)) => Some(AdminSeed {
            name: service.admin_name.clone(),
            email: email.clone(),
            password: password.clone(),
        }),
        _ => None,
    };
    sims.seed(admin.as_ref()).map_err(|e| e.to_string())
}

async fn shutdown_signal() {
    let ctrl_c = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let terminate = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(_) => std::future::pending::<()>().await,
        }
    };
    #[cfg(not(unix))]
    let terminate = std::future::pending::<()>();
    tokio::select! {
        _ = ctrl_c => {}
        _ = terminate => {}
    }
    tracing::info!("shutdown requested");
}

fn serve(service: ServiceArgs, listen: ListenArgs, run_migrations: bool) -> Result<(), String> {
    let sims = open(&service)?;
    if !sims.config().weaknesses.is_empty() {
        tracing::warn!(weaknesses = ?sims.config().weaknesses.list(), "starting in a deliberately weakened mode");
    }
    if run_migrations {
        migrate(&sims, &service)?;
    }
    let runtime = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;
    runtime.block_on(async {
        let cookie = CookiePolicy {
            secure: listen.cookie_secure,
        };
        let handle =
            sims_server::serve::start_with_signal(sims, listen.bind, cookie, shutdown_signal())
                .await
                .map_err(|e: ServeError| e.to_string())?;
        handle.join().await.map_err(|e| e.to_string())
    })
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    if cli.dump_matrix {
        print!("{}", sims_core::access::render_matrix());
        return ExitCode::SUCCESS;
    }
    let result = match cli.command {
        Some(Command::Migrate { service }) => {
            open(&service).and_then(|sims| migrate(&sims, &service))
        }
        Some(Command::Serve {
            service,
            listen,
            migrate,
        }) => serve(service, listen, migrate),
        Some(Command::Keygen) => {
            println!("{}", EncryptionKey::generate().to_base64());
            Ok(())
        }
        None => Err("no command given; see --help".to_owned()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
