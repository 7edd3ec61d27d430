//! Binding, serving and graceful shutdown.

use std::future::Future;
use std::net::SocketAddr;

use sims_core::store::StoreError;
use sims_core::Sims;
use thiserror::Error;
use tokio::net::TcpListener;
use tokio::sync::oneshot;
use tokio::task::JoinHandle;

use crate::app::{router, AppState};
use crate::config::CookiePolicy;

#[derive(Debug, Error)]
pub enum ServeError {
    #[error("cannot listen on {addr}: {source}")]
    BindFailure {
        addr: SocketAddr,
        #[source]
        source: std::io::Error,
    },
    #[error("storage schema is not migrated; run `sims-server migrate` first")]
    NotMigrated,
    #[error("storage unavailable: {0}")]
    Storage(StoreError),
    #[error("server failed: {0}")]
    Io(#[from] std::io::Error),
    #[error("cannot start runtime: {0}")]
    Runtime(std::io::Error),
}

/// A running server. Dropping the handle without calling
/// [`ServerHandle::shutdown`] leaves the server running until its task is
/// cancelled with the runtime.
pub struct ServerHandle {
    addr: SocketAddr,
    stop: Option<oneshot::Sender<()>>,
    task: JoinHandle<std::io::Result<()>>,
}

impl ServerHandle {
    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    /// Stops accepting connections. In-flight requests run to completion.
    pub fn shutdown(&mut self) {
        if let Some(stop) = self.stop.take() {
            let _ = stop.send(());
        }
    }

    /// Waits until the server has stopped.
    pub async fn join(self) -> Result<(), ServeError> {
        match self.task.await {
            Ok(result) => Ok(result?),
            Err(e) => Err(ServeError::Io(std::io::Error::other(e))),
        }
    }
}

/// Checks the schema, binds `addr` and serves until shutdown.
pub async fn start(
    sims: Sims,
    addr: SocketAddr,
    cookie: CookiePolicy,
) -> Result<ServerHandle, ServeError> {
    start_with_signal(sims, addr, cookie, std::future::pending()).await
}

/// As [`start`], also stopping when `signal` resolves.
pub async fn start_with_signal(
    sims: Sims,
    addr: SocketAddr,
    cookie: CookiePolicy,
    signal: impl Future<Output = ()> + Send + 'static,
) -> Result<ServerHandle, ServeError> {
    let store = sims.clone();
    match tokio::task::spawn_blocking(move || store.store().ensure_migrated()).await {
        Ok(Ok(())) => {}
        Ok(Err(StoreError::NotMigrated)) => return Err(ServeError::NotMigrated),
        Ok(Err(e)) => return Err(ServeError::Storage(e)),
        Err(e) => return Err(ServeError::Io(std::io::Error::other(e))),
    }
    let listener = TcpListener::bind(addr)
        .await
        .map_err(|source| ServeError::BindFailure { addr, source })?;
    let addr = listener.local_addr()?;
    let app = router(AppState { sims, cookie });
    let (stop, stopped) = oneshot::channel::<()>();
    let task = tokio::spawn(async move {
        axum::serve(
            listener,
            app.into_make_service_with_connect_info::<SocketAddr>(),
        )
        .with_graceful_shutdown(async move {
            tokio::select! {
                _ = stopped => {}
                _ = signal => {}
            }
        })
        .await
    });
    tracing::info!(%addr, "listening");
    Ok(ServerHandle {
        addr,
        stop: Some(stop),
        task,
    })
}

/// A server on its own runtime, for callers that are not async.
pub struct BackgroundServer {
    handle: Option<ServerHandle>,
    runtime: Option<tokio::runtime::Runtime>,
}

impl BackgroundServer {
    pub fn start(sims: Sims, addr: SocketAddr, cookie: CookiePolicy) -> Result<Self, ServeError> {
        let runtime = tokio::runtime::Builder::new_multi_thread()
            .worker_threads(2)
            .enable_all()
            .build()
            .map_err(ServeError::Runtime)?;
        let handle = runtime.block_on(start(sims, addr, cookie))?;
        Ok(Self {
            handle: Some(handle),
            runtime: Some(runtime),
        })
    }

    pub fn local_addr(&self) -> SocketAddr {
        self.handle.as_ref().expect("server running").local_addr()
    }

    pub fn base_url(&self) -> String {
        format!("http://{}", self.local_addr())
    }

    /// Graceful stop; returns once in-flight requests have finished.
    pub fn shutdown(mut self) -> Result<(), ServeError> {
        self.stop()
    }

    fn stop(&mut self) -> Result<(), ServeError> {
        match (self.handle.take(), self.runtime.take()) {
            (Some(mut handle), Some(runtime)) => {
                handle.shutdown();
                runtime.block_on(handle.join())
            }
            _ => Ok(()),
        }
    }
}

impl Drop for BackgroundServer {
    fn drop(&mut self) {
        let _ = self.stop();
    }
}
