//! HTTP front: WebSocket upgrade at `/ws`, optional static files elsewhere.

use std::path::PathBuf;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::Response;
use axum::routing::get;
use axum::Router;
use tokio::net::TcpListener;
use tower_http::services::ServeDir;
use tracing::{debug, info, warn};

use crate::connection::{Connection, ConnectionConfig};
use crate::protocol::WireMessage;

#[derive(Clone, Debug, Default)]
pub struct ServerConfig {
    pub connection: ConnectionConfig,
    /// Directory served at `/`, typically the built web client.
    pub static_dir: Option<PathBuf>,
}

pub fn router(config: ServerConfig) -> Router {
    let app = Router::new()
        .route("/ws", get(upgrade))
        .with_state(config.connection);
    match config.static_dir {
        Some(dir) => app.fallback_service(ServeDir::new(dir)),
        None => app,
    }
}

/// Serves until the process receives Ctrl-C.
pub async fn serve(listener: TcpListener, config: ServerConfig) -> std::io::Result<()> {
    if let Ok(addr) = listener.local_addr() {
        info!("listening on ws://{addr}/ws");
    }
    axum::serve(listener, router(config))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

async fn upgrade(ws: WebSocketUpgrade, State(config): State<ConnectionConfig>) -> Response {
    ws.on_upgrade(move |socket| run_connection(socket, config))
}

async fn run_connection(mut socket: WebSocket, config: ConnectionConfig) {
    debug!("connection opened");
    let mut conn = Connection::new(config);
    while let Some(frame) = socket.recv().await {
        let replies = match frame {
            Ok(Message::Text(text)) => {
                // Engine work may be long; keep it off the async workers.
                let text = text.to_string();
                let joined = tokio::task::spawn_blocking(move || {
                    let replies = conn.handle_text(&text);
                    (conn, replies)
                })
                .await;
                match joined {
                    Ok((c, replies)) => {
                        conn = c;
                        replies
                    }
                    Err(e) => {
                        warn!("connection worker failed: {e}");
                        return;
                    }
                }
            }
            Ok(Message::Binary(_)) => vec![WireMessage::error(None, "binary frames are not supported")],
            Ok(Message::Close(_)) => break,
            Ok(_) => continue,
            Err(e) => {
                debug!("connection error: {e}");
                break;
            }
        };
        for reply in replies {
            let mut line = reply.to_line();
            line.push('\n');
            if socket.send(Message::Text(line.into())).await.is_err() {
                return;
            }
        }
    }
    debug!("connection closed");
}
