//! Serves interactive addprolog sessions over WebSocket, one JSON message
//! per line. See `protocol.md` for the message schema.

pub mod connection;
pub mod protocol;
pub mod server;

pub use connection::{Connection, ConnectionConfig, DEFAULT_MAX_SESSIONS};
pub use protocol::{decode_client_line, WireMessage, WireSpan};
pub use server::{router, serve, ServerConfig};
