//! The resolver channel between an agent and its lookup service. The
//! adversary interposes here: on plaintext exchanges it sees and may
//! replace whole DNS messages; on protected exchanges it sees only
//! fixed-size ciphertext frames it can at best corrupt.

use std::sync::Arc;
use std::time::Duration;

use thiserror::Error;

use crate::adversary::{Adversary, Direction, Interposed, SealedInterposed};
use crate::countermeasures::{
    ChannelSecret, CountermeasureError, CountermeasureKind, CountermeasureMode, FrameDirection,
    OverheadMetrics, RestRequest, SecureEndpoint,
};
use crate::service::LookupService;
use crate::wire::{decode_message, encode_message, DnsMessage, WireError};

#[derive(Debug, Error)]
pub enum ChannelError {
    /// No usable response arrived: dropped, tampered or timed out.
    #[error("lookup timed out")]
    Timeout,
    #[error(transparent)]
    PayloadTooLarge(CountermeasureError),
    #[error(transparent)]
    Wire(#[from] WireError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Anything an agent can resolve queries through.
pub trait Transport {
    fn exchange(&mut self, query: &DnsMessage) -> Result<DnsMessage, ChannelError>;

    /// Whether answers may be cached on the agent side in this mode.
    fn supports_local_cache(&self) -> bool {
        true
    }

    fn metrics(&self) -> OverheadMetrics {
        OverheadMetrics::default()
    }
}

enum Protection {
    Plain,
    Secure {
        agent_end: SecureEndpoint,
        service_end: SecureEndpoint,
        handshake_done: bool,
        dot_like: bool,
    },
    Rest {
        agent_end: SecureEndpoint,
        service_end: SecureEndpoint,
    },
}

/// In-process channel: deterministic, no sockets, no sleeping.
pub struct SimChannel {
    service: Arc<LookupService>,
    adversary: Adversary,
    protection: Protection,
    metrics: OverheadMetrics,
    /// Extra blob attached to REST lookups, for flexibility experiments.
    pub rest_metadata: Vec<u8>,
}

impl SimChannel {
    pub fn new(service: Arc<LookupService>, adversary: Adversary, mode: &CountermeasureMode, secret: &ChannelSecret) -> Self {
        // A downgraded secure channel is plaintext in every way that
        // matters to an attacker.
        let protection = match mode.kind {
            CountermeasureKind::None | CountermeasureKind::AppSigning => Protection::Plain,
            CountermeasureKind::SecureChannel if mode.downgrade => Protection::Plain,
            CountermeasureKind::SecureChannel => Protection::Secure {
                agent_end: SecureEndpoint::new(secret),
                service_end: SecureEndpoint::new(secret),
                handshake_done: false,
                dot_like: mode.dot_like,
            },
            CountermeasureKind::Rest => Protection::Rest {
                agent_end: SecureEndpoint::new(secret),
                service_end: SecureEndpoint::new(secret),
            },
        };
        SimChannel {
            service,
            adversary,
            protection,
            metrics: OverheadMetrics::default(),
            rest_metadata: Vec::new(),
        }
    }

    pub fn plain(service: Arc<LookupService>, adversary: Adversary) -> Self {
        Self::new(
            service,
            adversary,
            &CountermeasureMode::none(),
            &ChannelSecret::from_seed(0),
        )
    }

    pub fn adversary(&self) -> &Adversary {
        &self.adversary
    }

    pub fn adversary_mut(&mut self) -> &mut Adversary {
        &mut self.adversary
    }

    pub fn service(&self) -> &LookupService {
        &self.service
    }

    fn exchange_plain(&mut self, query: &DnsMessage) -> Result<DnsMessage, ChannelError> {
        self.metrics.round_trips += 1;
        self.metrics.bytes_on_wire += encode_message(query)?.len() as u64;
        let query = match self.adversary.interpose(query, Direction::ToService) {
            Interposed::Forward(q) | Interposed::Replace(q) => q,
            Interposed::Drop => return Err(ChannelError::Timeout),
        };
        let response = self.service.answer(&query).ok_or(ChannelError::Timeout)?;
        let response = match self.adversary.interpose(&response, Direction::ToAgent) {
            Interposed::Forward(r) | Interposed::Replace(r) => r,
            Interposed::Drop => return Err(ChannelError::Timeout),
        };
        self.metrics.bytes_on_wire += encode_message(&response)?.len() as u64;
        Ok(response)
    }

    fn exchange_secure(&mut self, query: &DnsMessage) -> Result<DnsMessage, ChannelError> {
        let Protection::Secure { agent_end, service_end, handshake_done, .. } = &mut self.protection
        else {
            unreachable!()
        };
        if !*handshake_done {
            // One round trip of hello frames before the first lookup.
            let hello = agent_end
                .seal(FrameDirection::ToService, b"hello")
                .map_err(|_| ChannelError::Timeout)?;
            self.metrics.round_trips += 1;
            self.metrics.handshakes += 1;
            self.metrics.bytes_on_wire += hello.len() as u64;
            let hello = match self.adversary.interpose_sealed(&hello, Direction::ToService) {
                SealedInterposed::Forward(f) | SealedInterposed::Tampered(f) => f,
            };
            if service_end.open(FrameDirection::ToService, &hello).is_err() {
                return Err(ChannelError::Timeout);
            }
            let reply = service_end
                .seal(FrameDirection::ToAgent, b"hello")
                .map_err(|_| ChannelError::Timeout)?;
            self.metrics.bytes_on_wire += reply.len() as u64;
            let reply = match self.adversary.interpose_sealed(&reply, Direction::ToAgent) {
                SealedInterposed::Forward(f) | SealedInterposed::Tampered(f) => f,
            };
            if agent_end.open(FrameDirection::ToAgent, &reply).is_err() {
                return Err(ChannelError::Timeout);
            }
            *handshake_done = true;
        }

        self.metrics.round_trips += 1;
        let bytes = encode_message(query)?;
        let frame = agent_end
            .seal(FrameDirection::ToService, &bytes)
            .map_err(|_| ChannelError::Timeout)?;
        self.metrics.bytes_on_wire += frame.len() as u64;
        let frame = match self.adversary.interpose_sealed(&frame, Direction::ToService) {
            SealedInterposed::Forward(f) | SealedInterposed::Tampered(f) => f,
        };
        let Ok(query_bytes) = service_end.open(FrameDirection::ToService, &frame) else {
            // Tampering is detected and the frame discarded.
            return Err(ChannelError::Timeout);
        };
        let query = decode_message(&query_bytes)?;
        let response = self.service.answer(&query).ok_or(ChannelError::Timeout)?;
        let frame = service_end
            .seal(FrameDirection::ToAgent, &encode_message(&response)?)
            .map_err(|_| ChannelError::Timeout)?;
        self.metrics.bytes_on_wire += frame.len() as u64;
        let frame = match self.adversary.interpose_sealed(&frame, Direction::ToAgent) {
            SealedInterposed::Forward(f) | SealedInterposed::Tampered(f) => f,
        };
        let Ok(response_bytes) = agent_end.open(FrameDirection::ToAgent, &frame) else {
            return Err(ChannelError::Timeout);
        };
        Ok(decode_message(&response_bytes)?)
    }

    fn exchange_rest(&mut self, query: &DnsMessage) -> Result<DnsMessage, ChannelError> {
        let request = RestRequest {
            path: format!("/lookup/{}", query.qname().first_label()),
            payload: encode_message(query)?,
            metadata: self.rest_metadata.clone(),
        };
        request.check_size().map_err(ChannelError::PayloadTooLarge)?;
        let Protection::Rest { agent_end, service_end } = &mut self.protection else {
            unreachable!()
        };
        self.metrics.round_trips += 1;

        // Serialize and protect the request; REST rides an authenticated
        // encrypted transport end to end.
        let mut plain = Vec::with_capacity(8 + request.size());
        plain.extend_from_slice(&(request.path.len() as u16).to_be_bytes());
        plain.extend_from_slice(request.path.as_bytes());
        plain.extend_from_slice(&(request.payload.len() as u32).to_be_bytes());
        plain.extend_from_slice(&request.payload);
        plain.extend_from_slice(&request.metadata);
        let frame = seal_unpadded(agent_end, FrameDirection::ToService, &plain);
        self.metrics.bytes_on_wire += frame.len() as u64;
        let frame = match self.adversary.interpose_sealed(&frame, Direction::ToService) {
            SealedInterposed::Forward(f) | SealedInterposed::Tampered(f) => f,
        };
        let Ok(plain) = open_unpadded(service_end, FrameDirection::ToService, &frame) else {
            return Err(ChannelError::Timeout);
        };
        if plain.len() < 2 {
            return Err(ChannelError::Timeout);
        }
        let path_len = u16::from_be_bytes([plain[0], plain[1]]) as usize;
        let payload_off = 2 + path_len + 4;
        if plain.len() < payload_off {
            return Err(ChannelError::Timeout);
        }
        let payload_len =
            u32::from_be_bytes(plain[2 + path_len..payload_off].try_into().unwrap()) as usize;
        if plain.len() < payload_off + payload_len {
            return Err(ChannelError::Timeout);
        }
        let query = decode_message(&plain[payload_off..payload_off + payload_len])?;
        let response = self.service.answer(&query).ok_or(ChannelError::Timeout)?;
        let frame = seal_unpadded(service_end, FrameDirection::ToAgent, &encode_message(&response)?);
        self.metrics.bytes_on_wire += frame.len() as u64;
        let frame = match self.adversary.interpose_sealed(&frame, Direction::ToAgent) {
            SealedInterposed::Forward(f) | SealedInterposed::Tampered(f) => f,
        };
        let Ok(bytes) = open_unpadded(agent_end, FrameDirection::ToAgent, &frame) else {
            return Err(ChannelError::Timeout);
        };
        Ok(decode_message(&bytes)?)
    }
}

impl Transport for SimChannel {
    fn exchange(&mut self, query: &DnsMessage) -> Result<DnsMessage, ChannelError> {
        match &self.protection {
            Protection::Plain => self.exchange_plain(query),
            Protection::Secure { .. } => self.exchange_secure(query),
            Protection::Rest { .. } => self.exchange_rest(query),
        }
    }

    fn supports_local_cache(&self) -> bool {
        match &self.protection {
            Protection::Plain => true,
            Protection::Secure { dot_like, .. } => *dot_like,
            // Every REST lookup is a round trip.
            Protection::Rest { .. } => false,
        }
    }

    fn metrics(&self) -> OverheadMetrics {
        self.metrics
    }
}

/// Variable-length sealing for REST payloads that exceed the fixed DNS
/// frame size. Uses the endpoint's sequence numbers and keys directly.
fn seal_unpadded(end: &mut SecureEndpoint, dir: FrameDirection, payload: &[u8]) -> Vec<u8> {
    end.seal_variable(dir, payload)
}

fn open_unpadded(
    end: &mut SecureEndpoint,
    dir: FrameDirection,
    frame: &[u8],
) -> Result<Vec<u8>, CountermeasureError> {
    end.open_variable(dir, frame)
}

/// Loopback UDP transport used against a live `serve_udp` instance.
pub struct UdpChannel {
    socket: std::net::UdpSocket,
    metrics: OverheadMetrics,
}

impl UdpChannel {
    pub fn connect(server: &str, timeout: Duration) -> Result<Self, ChannelError> {
        let socket = std::net::UdpSocket::bind("127.0.0.1:0")?;
        socket.connect(server)?;
        socket.set_read_timeout(Some(timeout))?;
        Ok(UdpChannel { socket, metrics: OverheadMetrics::default() })
    }
}

impl Transport for UdpChannel {
    fn exchange(&mut self, query: &DnsMessage) -> Result<DnsMessage, ChannelError> {
        let bytes = encode_message(query)?;
        self.metrics.round_trips += 1;
        self.metrics.bytes_on_wire += bytes.len() as u64;
        self.socket.send(&bytes)?;
        let mut buf = [0u8; 2048];
        let len = match self.socket.recv(&mut buf) {
            Ok(len) => len,
            Err(e)
                if e.kind() == std::io::ErrorKind::WouldBlock
                    || e.kind() == std::io::ErrorKind::TimedOut =>
            {
                return Err(ChannelError::Timeout)
            }
            Err(e) => return Err(e.into()),
        };
        self.metrics.bytes_on_wire += len as u64;
        let response = decode_message(&buf[..len])?;
        if response.id != query.id {
            return Err(ChannelError::Timeout);
        }
        Ok(response)
    }

    fn metrics(&self) -> OverheadMetrics {
        self.metrics
    }
}
