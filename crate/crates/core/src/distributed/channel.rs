//! Duplex text-frame channels.

use std::fmt;
use std::sync::mpsc::{self, Receiver, RecvTimeoutError, Sender};
use std::sync::{Arc, Mutex, MutexGuard};
use std::time::Duration;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChannelError {
    /// The peer closed the channel (or it was closed locally).
    #[error("channel closed")]
    Closed,
    #[error("timed out waiting for a frame")]
    Timeout,
    #[error("transport error: {0}")]
    Transport(String),
}

/// A bidirectional channel of text frames, one message per frame.
pub trait Channel: Send {
    fn send(&mut self, frame: &str) -> Result<(), ChannelError>;

    /// Blocks until the next frame arrives or the channel closes.
    fn recv(&mut self) -> Result<String, ChannelError>;

    fn close(&mut self);
}

/// In-process channel end. Frames are delivered in order; dropping or
/// closing one end closes the channel for the other.
pub struct LoopbackChannel {
    tx: Option<Sender<String>>,
    rx: Receiver<String>,
    timeout: Option<Duration>,
}

impl LoopbackChannel {
    pub fn pair() -> (LoopbackChannel, LoopbackChannel) {
        let (a_tx, b_rx) = mpsc::channel();
        let (b_tx, a_rx) = mpsc::channel();
        (
            LoopbackChannel {
                tx: Some(a_tx),
                rx: a_rx,
                timeout: None,
            },
            LoopbackChannel {
                tx: Some(b_tx),
                rx: b_rx,
                timeout: None,
            },
        )
    }

    /// Makes `recv` fail with [`ChannelError::Timeout`] after `timeout`.
    pub fn with_recv_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = Some(timeout);
        self
    }
}

impl Channel for LoopbackChannel {
    fn send(&mut self, frame: &str) -> Result<(), ChannelError> {
        match &self.tx {
            Some(tx) => tx.send(frame.to_owned()).map_err(|_| ChannelError::Closed),
            None => Err(ChannelError::Closed),
        }
    }

    fn recv(&mut self) -> Result<String, ChannelError> {
        match self.timeout {
            None => self.rx.recv().map_err(|_| ChannelError::Closed),
            Some(t) => self.rx.recv_timeout(t).map_err(|e| match e {
                RecvTimeoutError::Timeout => ChannelError::Timeout,
                RecvTimeoutError::Disconnected => ChannelError::Closed,
            }),
        }
    }

    fn close(&mut self) {
        self.tx = None;
    }
}

impl fmt::Debug for LoopbackChannel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LoopbackChannel")
            .field("open", &self.tx.is_some())
            .finish()
    }
}

/// A channel shared between the server executor (which receives) and the
/// shadow agents (which send from inside environment cycles).
#[derive(Clone)]
pub struct SharedChannel(Arc<Mutex<Box<dyn Channel>>>);

impl SharedChannel {
    pub fn new(channel: impl Channel + 'static) -> Self {
        SharedChannel(Arc::new(Mutex::new(Box::new(channel))))
    }

    fn lock(&self) -> MutexGuard<'_, Box<dyn Channel>> {
        // a panic mid-send leaves the channel itself consistent
        self.0.lock().unwrap_or_else(|p| p.into_inner())
    }

    pub fn send(&self, frame: &str) -> Result<(), ChannelError> {
        self.lock().send(frame)
    }

    pub fn recv(&self) -> Result<String, ChannelError> {
        self.lock().recv()
    }

    pub fn close(&self) {
        self.lock().close()
    }
}

impl fmt::Debug for SharedChannel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("SharedChannel")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loopback_delivers_in_order_and_closes() {
        let (mut a, mut b) = LoopbackChannel::pair();
        a.send("1").unwrap();
        a.send("2").unwrap();
        assert_eq!(b.recv().unwrap(), "1");
        assert_eq!(b.recv().unwrap(), "2");
        a.close();
        assert_eq!(b.recv(), Err(ChannelError::Closed));
        drop(b);
        assert_eq!(a.send("3"), Err(ChannelError::Closed));
    }

    #[test]
    fn loopback_timeout() {
        let (_a, b) = LoopbackChannel::pair();
        let mut b = b.with_recv_timeout(Duration::from_millis(5));
        assert_eq!(b.recv(), Err(ChannelError::Timeout));
    }
}
