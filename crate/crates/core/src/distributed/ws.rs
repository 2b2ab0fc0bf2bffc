//! WebSocket transport (text frames) over plain TCP.

use std::fmt;
use std::io;
use std::net::{TcpListener, TcpStream, ToSocketAddrs};

use tungstenite::handshake::client::Request;
use tungstenite::protocol::WebSocket;
use tungstenite::{Error as WsError, Message};

use crate::distributed::channel::{Channel, ChannelError};

pub struct WsChannel {
    socket: WebSocket<TcpStream>,
    closed: bool,
}

impl WsChannel {
    /// Accepts one WebSocket connection on `listener`.
    pub fn accept(listener: &TcpListener) -> Result<WsChannel, ChannelError> {
        let (stream, _) = listener.accept().map_err(io_error)?;
        stream.set_nodelay(true).map_err(io_error)?;
        let socket = tungstenite::accept(stream)
            .map_err(|e| ChannelError::Transport(format!("handshake failed: {e}")))?;
        Ok(WsChannel { socket, closed: false })
    }

    /// Connects to a `ws://host:port/path` URL.
    pub fn connect(url: &str) -> Result<WsChannel, ChannelError> {
        let request: Request = tungstenite::client::IntoClientRequest::into_client_request(url)
            .map_err(|e| ChannelError::Transport(format!("bad url {url:?}: {e}")))?;
        let uri = request.uri();
        if uri.scheme_str() != Some("ws") {
            return Err(ChannelError::Transport(format!("unsupported url {url:?}; expected ws://")));
        }
        let host = uri
            .host()
            .ok_or_else(|| ChannelError::Transport(format!("no host in {url:?}")))?
            .trim_start_matches('[')
            .trim_end_matches(']')
            .to_owned();
        let port = uri.port_u16().unwrap_or(80);
        let addrs: Vec<_> = (host.as_str(), port).to_socket_addrs().map_err(io_error)?.collect();
        let stream = TcpStream::connect(&addrs[..]).map_err(io_error)?;
        stream.set_nodelay(true).map_err(io_error)?;
        let (socket, _) = tungstenite::client(request, stream)
            .map_err(|e| ChannelError::Transport(format!("handshake failed: {e}")))?;
        Ok(WsChannel { socket, closed: false })
    }
}

fn io_error(e: io::Error) -> ChannelError {
    ChannelError::Transport(e.to_string())
}

fn map_ws(e: WsError) -> ChannelError {
    match e {
        WsError::ConnectionClosed | WsError::AlreadyClosed => ChannelError::Closed,
        other => ChannelError::Transport(other.to_string()),
    }
}

impl Channel for WsChannel {
    fn send(&mut self, frame: &str) -> Result<(), ChannelError> {
        if self.closed {
            return Err(ChannelError::Closed);
        }
        self.socket.send(Message::Text(frame.to_owned())).map_err(map_ws)
    }

    fn recv(&mut self) -> Result<String, ChannelError> {
        if self.closed {
            return Err(ChannelError::Closed);
        }
        loop {
            match self.socket.read() {
                Ok(Message::Text(s)) => return Ok(s),
                Ok(Message::Binary(b)) => match String::from_utf8(b) {
                    Ok(s) => return Ok(s),
                    Err(_) => continue,
                },
                Ok(Message::Close(_)) => {
                    // flushes the queued close reply
                    let _ = self.socket.flush();
                    self.closed = true;
                    return Err(ChannelError::Closed);
                }
                Ok(_) => continue,
                Err(e) => {
                    let e = map_ws(e);
                    if e == ChannelError::Closed {
                        self.closed = true;
                    }
                    return Err(e);
                }
            }
        }
    }

    fn close(&mut self) {
        if self.closed {
            return;
        }
        self.closed = true;
        if self.socket.close(None).is_ok() {
            let _ = self.socket.flush();
            // wait (bounded) for the peer's close reply so it sees a clean
            // shutdown
            let _ = self
                .socket
                .get_ref()
                .set_read_timeout(Some(std::time::Duration::from_secs(2)));
            while self.socket.read().is_ok() {}
        }
    }
}

impl Drop for WsChannel {
    fn drop(&mut self) {
        self.close();
    }
}

impl fmt::Debug for WsChannel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WsChannel")
            .field("peer", &self.socket.get_ref().peer_addr().ok())
            .field("closed", &self.closed)
            .finish()
    }
}
