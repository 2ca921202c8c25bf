use std::io::{self, Read, Write};
use std::net::{TcpStream, ToSocketAddrs};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::codec::{
    decode_response_header, encode_request, ProtoError, SegResponse, RESPONSE_HEADER_LEN, STATUS_BAD_REQUEST,
    STATUS_MODEL_ERROR, STATUS_OK,
};
use crate::frame::Frame;
use crate::segment::SegmentLabelMap;

/// Environment variable that overrides the configured endpoint.
pub const ENDPOINT_ENV: &str = "SEG_ENDPOINT";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegClientConfig {
    /// `host:port`.
    pub endpoint: String,
    pub timeout_ms: u64,
}

impl SegClientConfig {
    pub fn new(endpoint: impl Into<String>) -> Self {
        SegClientConfig { endpoint: endpoint.into(), timeout_ms: 10_000 }
    }

    pub fn timeout(&self) -> Duration {
        Duration::from_millis(self.timeout_ms)
    }
}

#[derive(Debug, Error)]
pub enum RemoteError {
    #[error("cannot connect to segmentation service at {endpoint}: {source}")]
    Connect { endpoint: String, source: io::Error },
    #[error("segmentation request timed out after {0:?}")]
    Timeout(Duration),
    #[error("segmentation model failed (status {status})")]
    Model { status: u8 },
    #[error("segmentation service rejected the request as malformed (status {status})")]
    BadRequest { status: u8 },
    #[error("connection to segmentation service lost: {0}")]
    ConnectionLost(io::Error),
    #[error("invalid response: {0}")]
    Protocol(#[from] ProtoError),
    #[error("invalid client configuration: {0}")]
    Config(String),
}

impl RemoteError {
    /// Whether retrying the same request may succeed.
    pub fn is_retriable(&self) -> bool {
        matches!(self, RemoteError::Timeout(_))
    }
}

/// Blocking client with at most one request in flight.
///
/// On a lost connection the request is retried once on a fresh connection.
/// After a timeout the connection is dropped, since a late reply would
/// desynchronize the stream; the next call reconnects.
#[derive(Debug)]
pub struct SegClient {
    config: SegClientConfig,
    stream: Option<TcpStream>,
}

impl SegClient {
    /// Connects immediately so an unreachable service fails fast.
    pub fn connect(config: SegClientConfig) -> Result<Self, RemoteError> {
        if config.timeout_ms == 0 {
            return Err(RemoteError::Config("timeout must be > 0".into()));
        }
        let mut client = SegClient { config, stream: None };
        client.stream = Some(client.open()?);
        Ok(client)
    }

    pub fn config(&self) -> &SegClientConfig {
        &self.config
    }

    fn open(&self) -> Result<TcpStream, RemoteError> {
        let endpoint = &self.config.endpoint;
        let connect_err = |source| RemoteError::Connect { endpoint: endpoint.clone(), source };
        let addrs: Vec<_> = endpoint.to_socket_addrs().map_err(connect_err)?.collect();
        let mut last = io::Error::new(io::ErrorKind::AddrNotAvailable, "no addresses resolved");
        for addr in addrs {
            match TcpStream::connect_timeout(&addr, self.config.timeout()) {
                Ok(s) => {
                    s.set_nodelay(true).ok();
                    return Ok(s);
                }
                Err(e) => last = e,
            }
        }
        Err(connect_err(last))
    }

    /// Sends `frame` and waits for its label map.
    pub fn segment(&mut self, frame: &Frame) -> Result<SegmentLabelMap, RemoteError> {
        let request = encode_request(frame);
        match self.round_trip(&request, frame) {
            Err(RemoteError::ConnectionLost(_)) => {
                self.stream = None;
                self.round_trip(&request, frame)
            }
            other => other,
        }
    }

    fn round_trip(&mut self, request: &[u8], frame: &Frame) -> Result<SegmentLabelMap, RemoteError> {
        if self.stream.is_none() {
            self.stream = Some(self.open()?);
        }
        let budget = Budget::start(self.config.timeout());
        let stream = self.stream.as_mut().expect("connected above");
        let result = exchange(stream, request, frame, budget);
        if result.is_err() {
            self.stream = None;
        }
        let (status, labels) = result?;
        match status {
            STATUS_OK => Ok(labels.expect("labels present on ok")),
            STATUS_MODEL_ERROR => Err(RemoteError::Model { status }),
            STATUS_BAD_REQUEST => Err(RemoteError::BadRequest { status }),
            _ => unreachable!("status validated by decoder"),
        }
    }
}

fn exchange(
    stream: &mut TcpStream,
    request: &[u8],
    frame: &Frame,
    budget: Budget,
) -> Result<(u8, Option<SegmentLabelMap>), RemoteError> {
    let remaining = budget.remaining()?;
    stream.set_write_timeout(Some(remaining)).map_err(RemoteError::ConnectionLost)?;
    stream
        .write_all(request)
        .and_then(|_| stream.flush())
        .map_err(|e| budget.classify(e))?;

    let mut header = [0u8; RESPONSE_HEADER_LEN];
    read_exact_by(stream, &mut header, budget)?;
    let (status, count) = decode_response_header(&header)?;
    if status != STATUS_OK {
        return Ok((status, None));
    }
    let mut payload = vec![0u8; 4 * frame.width() * frame.height()];
    read_exact_by(stream, &mut payload, budget)?;
    let mut bytes = Vec::with_capacity(RESPONSE_HEADER_LEN + payload.len());
    bytes.extend_from_slice(&header);
    bytes.extend_from_slice(&payload);
    match super::codec::decode_response(&bytes, frame.width(), frame.height())? {
        SegResponse::Labels(map) => {
            debug_assert_eq!(map.segment_count(), count);
            Ok((status, Some(map)))
        }
        _ => unreachable!("status checked above"),
    }
}

/// Wall-clock budget for one request/response exchange.
#[derive(Clone, Copy, Debug)]
struct Budget {
    total: Duration,
    deadline: Instant,
}

impl Budget {
    fn start(total: Duration) -> Self {
        Budget { total, deadline: Instant::now() + total }
    }

    fn remaining(&self) -> Result<Duration, RemoteError> {
        let left = self.deadline.saturating_duration_since(Instant::now());
        if left.is_zero() {
            return Err(RemoteError::Timeout(self.total));
        }
        Ok(left)
    }

    fn classify(&self, e: io::Error) -> RemoteError {
        match e.kind() {
            io::ErrorKind::WouldBlock | io::ErrorKind::TimedOut => RemoteError::Timeout(self.total),
            _ => RemoteError::ConnectionLost(e),
        }
    }
}

fn read_exact_by(stream: &mut TcpStream, buf: &mut [u8], budget: Budget) -> Result<(), RemoteError> {
    let mut filled = 0;
    while filled < buf.len() {
        let left = budget.remaining()?;
        stream.set_read_timeout(Some(left)).map_err(RemoteError::ConnectionLost)?;
        match stream.read(&mut buf[filled..]) {
            Ok(0) => {
                return Err(RemoteError::ConnectionLost(io::Error::new(
                    io::ErrorKind::UnexpectedEof,
                    "service closed the connection",
                )))
            }
            Ok(n) => filled += n,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
            Err(e) => return Err(budget.classify(e)),
        }
    }
    Ok(())
}
