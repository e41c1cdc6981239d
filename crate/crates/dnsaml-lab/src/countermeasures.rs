//! The four hardening modes a deployment can run under: none,
//! application-layer response signing, an authenticated-encrypted channel
//! (the DoT/DoH stand-in) and an authenticated request/response transport
//! (the REST stand-in), plus the overhead counters used to compare them.
//!
//! Signing binds the answer to the lowercase QNAME so a captured signature
//! cannot be replayed onto a different lookup. Channel frames are padded
//! to one fixed size so observers learn nothing from lengths.

use base64::Engine as _;
use chacha20poly1305::aead::{Aead, KeyInit, Payload};
use chacha20poly1305::{ChaCha20Poly1305, Nonce};
use ed25519_dalek::{Signer as _, Verifier as _, SigningKey, VerifyingKey};
use serde::{Deserialize, Serialize};
use sha2::{Digest as _, Sha256};
use thiserror::Error;

use crate::dialects::GTI_DELETION_ADDR;
use crate::wire::{DnsMessage, DnsName, RData, Rcode, ResourceRecord};

/// TXT prefix that marks an application-layer signature record.
pub const SIG_TXT_PREFIX: &str = "sig=";
/// Fixed plaintext size of a secure-channel frame (length prefix + the
/// largest legal DNS payload).
pub const FRAME_PLAINTEXT_LEN: usize = 2 + crate::wire::MAX_UDP_PAYLOAD;
/// Full frame size on the wire: direction, sequence, ciphertext, tag.
pub const FRAME_LEN: usize = 1 + 8 + FRAME_PLAINTEXT_LEN + 16;
/// REST payload cap (GET-request scale).
pub const REST_MAX_PAYLOAD: usize = 2 * 1024 * 1024;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CountermeasureError {
    #[error("response carries no signature record")]
    MissingSignature,
    #[error("signature verification failed")]
    InvalidSignature,
    #[error("frame failed authentication")]
    AuthFailure,
    #[error("payload of {0} bytes exceeds the {REST_MAX_PAYLOAD}-byte limit")]
    PayloadTooLarge(usize),
    #[error("bad key material: {0}")]
    BadKey(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CountermeasureKind {
    None,
    AppSigning,
    SecureChannel,
    Rest,
}

impl Default for CountermeasureKind {
    fn default() -> Self {
        CountermeasureKind::None
    }
}

/// Countermeasure selection plus the knobs that matter for the matrices:
/// `downgrade` lets a secure channel fall back to plaintext, `dot_like`
/// only annotates whether the channel models DoT (port 853, local caching)
/// or DoH semantics.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountermeasureMode {
    pub kind: CountermeasureKind,
    #[serde(default)]
    pub downgrade: bool,
    #[serde(default = "default_true")]
    pub dot_like: bool,
}

fn default_true() -> bool {
    true
}

impl Default for CountermeasureMode {
    fn default() -> Self {
        CountermeasureMode { kind: CountermeasureKind::None, downgrade: false, dot_like: true }
    }
}

impl CountermeasureMode {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn app_signing() -> Self {
        CountermeasureMode { kind: CountermeasureKind::AppSigning, ..Self::default() }
    }

    pub fn secure_channel() -> Self {
        CountermeasureMode { kind: CountermeasureKind::SecureChannel, ..Self::default() }
    }

    pub fn rest() -> Self {
        CountermeasureMode { kind: CountermeasureKind::Rest, ..Self::default() }
    }
}

/// Ed25519 keypair used for both the GTI confirmation TXT and
/// application-layer signing.
#[derive(Clone)]
pub struct SigningKeypair {
    signing: SigningKey,
}

impl SigningKeypair {
    /// Deterministic keypair for a service instance; scenario seeds keep
    /// re-runs byte-identical.
    pub fn from_seed(seed: u64) -> Self {
        let mut h = Sha256::new();
        h.update(seed.to_le_bytes());
        h.update(b"dnsaml service signing key");
        let digest: [u8; 32] = h.finalize().into();
        SigningKeypair { signing: SigningKey::from_bytes(&digest) }
    }

    pub fn from_secret_hex(hex_str: &str) -> Result<Self, CountermeasureError> {
        let bytes = hex::decode(hex_str.trim())
            .map_err(|e| CountermeasureError::BadKey(e.to_string()))?;
        let arr: [u8; 32] = bytes
            .try_into()
            .map_err(|_| CountermeasureError::BadKey("expected 32 bytes".into()))?;
        Ok(SigningKeypair { signing: SigningKey::from_bytes(&arr) })
    }

    pub fn secret_hex(&self) -> String {
        hex::encode(self.signing.to_bytes())
    }

    pub fn verifying_key(&self) -> VerifyingKey {
        self.signing.verifying_key()
    }

    pub fn verifying_key_hex(&self) -> String {
        hex::encode(self.signing.verifying_key().to_bytes())
    }

    fn sign(&self, msg: &[u8]) -> [u8; 64] {
        self.signing.sign(msg).to_bytes()
    }
}

pub fn verifying_key_from_hex(hex_str: &str) -> Result<VerifyingKey, CountermeasureError> {
    let bytes = hex::decode(hex_str.trim()).map_err(|e| CountermeasureError::BadKey(e.to_string()))?;
    let arr: [u8; 32] = bytes
        .try_into()
        .map_err(|_| CountermeasureError::BadKey("expected 32 bytes".into()))?;
    VerifyingKey::from_bytes(&arr).map_err(|e| CountermeasureError::BadKey(e.to_string()))
}

/// Bytes a response signature covers: lowercase QNAME presentation, a zero
/// separator, the answer rtype byte and its wire rdata. Answerless
/// responses sign rtype byte zero plus the rcode so NXDOMAIN cannot be
/// forged or replayed as some other error.
pub fn canonical_bytes(qname: &DnsName, answer: Option<&RData>, rcode: Rcode) -> Vec<u8> {
    let mut out = qname.presentation().into_bytes();
    out.push(0);
    match answer {
        Some(rdata) => {
            out.push(rdata.rtype().code() as u8);
            out.extend_from_slice(&rdata.wire_bytes().expect("valid rdata"));
        }
        None => {
            out.push(0);
            out.push(rcode.code());
        }
    }
    out
}

fn first_payload_answer(response: &DnsMessage) -> Option<&RData> {
    response
        .answers
        .iter()
        .map(|rr| &rr.rdata)
        .find(|rdata| !is_signature_rdata(rdata))
}

fn is_signature_rdata(rdata: &RData) -> bool {
    match rdata {
        RData::Txt(strings) => strings
            .first()
            .map(|s| s.starts_with(SIG_TXT_PREFIX.as_bytes()))
            .unwrap_or(false),
        _ => false,
    }
}

/// Detached signature over the response's canonical bytes, carried as an
/// extra `sig=` TXT record appended to the answer section.
pub fn sign_response(key: &SigningKeypair, response: &mut DnsMessage) {
    let canonical = canonical_bytes(
        &response.question.name,
        first_payload_answer(response),
        response.rcode,
    );
    let sig = key.sign(&canonical);
    let payload = format!("{SIG_TXT_PREFIX}{}", base64::engine::general_purpose::STANDARD.encode(sig));
    let ttl = response.answers.first().map(|rr| rr.ttl).unwrap_or(300);
    let record = ResourceRecord::txt(response.question.name.clone(), ttl, &payload)
        .expect("signature payload fits a TXT character-string");
    response.answers.push(record);
}

/// Validate an application-layer signature. Absence and invalidity are
/// distinct failures; callers treat both as fail-closed.
pub fn verify_response(pubkey: &VerifyingKey, response: &DnsMessage) -> Result<(), CountermeasureError> {
    let sig_rdata = response
        .answers
        .iter()
        .map(|rr| &rr.rdata)
        .find(|r| is_signature_rdata(r))
        .ok_or(CountermeasureError::MissingSignature)?;
    let encoded = match sig_rdata {
        RData::Txt(strings) => {
            let joined: Vec<u8> = strings.iter().flat_map(|s| s.iter().copied()).collect();
            String::from_utf8_lossy(&joined[SIG_TXT_PREFIX.len()..]).into_owned()
        }
        _ => unreachable!("signature records are TXT"),
    };
    let sig_bytes = base64::engine::general_purpose::STANDARD
        .decode(encoded.as_bytes())
        .map_err(|_| CountermeasureError::InvalidSignature)?;
    let sig_arr: [u8; 64] = sig_bytes
        .try_into()
        .map_err(|_| CountermeasureError::InvalidSignature)?;
    let canonical = canonical_bytes(
        &response.question.name,
        first_payload_answer(response),
        response.rcode,
    );
    pubkey
        .verify(&canonical, &ed25519_dalek::Signature::from_bytes(&sig_arr))
        .map_err(|_| CountermeasureError::InvalidSignature)
}

/// The Base64 payload of a GTI confirmation TXT: a signature binding the
/// confirmation QNAME to the deletion answer.
pub fn gti_confirmation_payload(key: &SigningKeypair, confirmation_qname: &DnsName) -> String {
    let canonical = canonical_bytes(
        confirmation_qname,
        Some(&RData::A(GTI_DELETION_ADDR)),
        Rcode::NoError,
    );
    base64::engine::general_purpose::STANDARD.encode(key.sign(&canonical))
}

/// Check a GTI confirmation TXT against the expected QNAME. Any absent,
/// malformed or mis-signed payload means the deletion is unconfirmed.
pub fn verify_gti_confirmation(pubkey: &VerifyingKey, confirmation_qname: &DnsName, response: &DnsMessage) -> bool {
    if response.rcode != Rcode::NoError {
        return false;
    }
    let Some(payload) = response.first_txt() else {
        return false;
    };
    let Ok(sig_bytes) = base64::engine::general_purpose::STANDARD.decode(payload.as_bytes()) else {
        return false;
    };
    let Ok(sig_arr) = <[u8; 64]>::try_from(sig_bytes.as_slice()) else {
        return false;
    };
    let canonical = canonical_bytes(
        confirmation_qname,
        Some(&RData::A(GTI_DELETION_ADDR)),
        Rcode::NoError,
    );
    pubkey
        .verify(&canonical, &ed25519_dalek::Signature::from_bytes(&sig_arr))
        .is_ok()
}

/// 32-byte channel secret shared out of band via the scenario file.
#[derive(Clone)]
pub struct ChannelSecret(pub [u8; 32]);

impl ChannelSecret {
    pub fn from_seed(seed: u64) -> Self {
        let mut h = Sha256::new();
        h.update(seed.to_le_bytes());
        h.update(b"dnsaml channel secret");
        ChannelSecret(h.finalize().into())
    }

    pub fn from_hex(hex_str: &str) -> Result<Self, CountermeasureError> {
        let bytes = hex::decode(hex_str.trim()).map_err(|e| CountermeasureError::BadKey(e.to_string()))?;
        let arr: [u8; 32] = bytes
            .try_into()
            .map_err(|_| CountermeasureError::BadKey("expected 32 bytes".into()))?;
        Ok(ChannelSecret(arr))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameDirection {
    ToService = 0,
    ToAgent = 1,
}

/// One endpoint of the authenticated-encrypted channel. Frames are fixed
/// size, sequence-numbered per direction and discarded on any tampering.
pub struct SecureEndpoint {
    cipher: ChaCha20Poly1305,
    send_seq: u64,
    recv_seq: u64,
}

impl SecureEndpoint {
    pub fn new(secret: &ChannelSecret) -> Self {
        SecureEndpoint {
            cipher: ChaCha20Poly1305::new((&secret.0).into()),
            send_seq: 0,
            recv_seq: 0,
        }
    }

    fn nonce(direction: FrameDirection, seq: u64) -> Nonce {
        let mut n = [0u8; 12];
        n[3] = direction as u8;
        n[4..].copy_from_slice(&seq.to_be_bytes());
        n.into()
    }

    /// Encrypt `payload` into a fixed-size frame.
    pub fn seal(&mut self, direction: FrameDirection, payload: &[u8]) -> Result<Vec<u8>, CountermeasureError> {
        assert!(payload.len() <= crate::wire::MAX_UDP_PAYLOAD, "payload exceeds frame capacity");
        let mut plain = vec![0u8; FRAME_PLAINTEXT_LEN];
        plain[..2].copy_from_slice(&(payload.len() as u16).to_be_bytes());
        plain[2..2 + payload.len()].copy_from_slice(payload);
        let seq = self.send_seq;
        self.send_seq += 1;
        let mut aad = vec![direction as u8];
        aad.extend_from_slice(&seq.to_be_bytes());
        let ciphertext = self
            .cipher
            .encrypt(&Self::nonce(direction, seq), Payload { msg: &plain, aad: &aad })
            .map_err(|_| CountermeasureError::AuthFailure)?;
        let mut frame = Vec::with_capacity(FRAME_LEN);
        frame.push(direction as u8);
        frame.extend_from_slice(&seq.to_be_bytes());
        frame.extend_from_slice(&ciphertext);
        debug_assert_eq!(frame.len(), FRAME_LEN);
        Ok(frame)
    }

    /// Authenticate and decrypt a frame; any modification fails.
    pub fn open(&mut self, direction: FrameDirection, frame: &[u8]) -> Result<Vec<u8>, CountermeasureError> {
        if frame.len() != FRAME_LEN || frame[0] != direction as u8 {
            return Err(CountermeasureError::AuthFailure);
        }
        self.open_inner(direction, frame)
    }

    /// Unpadded variant for payloads beyond the DNS frame size (the REST
    /// transport); sizes are visible, contents and integrity are not.
    pub fn seal_variable(&mut self, direction: FrameDirection, payload: &[u8]) -> Vec<u8> {
        let seq = self.send_seq;
        self.send_seq += 1;
        let mut aad = vec![direction as u8];
        aad.extend_from_slice(&seq.to_be_bytes());
        let ciphertext = self
            .cipher
            .encrypt(&Self::nonce(direction, seq), Payload { msg: payload, aad: &aad })
            .expect("encryption is infallible for in-memory buffers");
        let mut frame = Vec::with_capacity(9 + ciphertext.len());
        frame.push(direction as u8);
        frame.extend_from_slice(&seq.to_be_bytes());
        frame.extend_from_slice(&ciphertext);
        frame
    }

    pub fn open_variable(&mut self, direction: FrameDirection, frame: &[u8]) -> Result<Vec<u8>, CountermeasureError> {
        if frame.len() < 9 + 16 || frame[0] != direction as u8 {
            return Err(CountermeasureError::AuthFailure);
        }
        let seq = u64::from_be_bytes(frame[1..9].try_into().unwrap());
        if seq != self.recv_seq {
            return Err(CountermeasureError::AuthFailure);
        }
        let mut aad = vec![direction as u8];
        aad.extend_from_slice(&seq.to_be_bytes());
        let plain = self
            .cipher
            .decrypt(&Self::nonce(direction, seq), Payload { msg: &frame[9..], aad: &aad })
            .map_err(|_| CountermeasureError::AuthFailure)?;
        self.recv_seq += 1;
        Ok(plain)
    }

    fn open_inner(&mut self, direction: FrameDirection, frame: &[u8]) -> Result<Vec<u8>, CountermeasureError> {
        let seq = u64::from_be_bytes(frame[1..9].try_into().unwrap());
        if seq != self.recv_seq {
            return Err(CountermeasureError::AuthFailure);
        }
        let mut aad = vec![direction as u8];
        aad.extend_from_slice(&seq.to_be_bytes());
        let plain = self
            .cipher
            .decrypt(&Self::nonce(direction, seq), Payload { msg: &frame[9..], aad: &aad })
            .map_err(|_| CountermeasureError::AuthFailure)?;
        self.recv_seq += 1;
        let len = u16::from_be_bytes(plain[..2].try_into().unwrap()) as usize;
        if 2 + len > plain.len() {
            return Err(CountermeasureError::AuthFailure);
        }
        Ok(plain[2..2 + len].to_vec())
    }
}

/// Request over the REST-style transport. The DNS lookup rides in
/// `payload`; `metadata` carries the extended blobs plain DNS cannot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RestRequest {
    pub path: String,
    pub payload: Vec<u8>,
    pub metadata: Vec<u8>,
}

impl RestRequest {
    pub fn size(&self) -> usize {
        self.path.len() + self.payload.len() + self.metadata.len()
    }

    pub fn check_size(&self) -> Result<(), CountermeasureError> {
        if self.size() > REST_MAX_PAYLOAD {
            return Err(CountermeasureError::PayloadTooLarge(self.size()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RestResponse {
    pub payload: Vec<u8>,
}

/// Wire-level counters for the Table-3 style comparison.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OverheadMetrics {
    pub round_trips: u64,
    pub bytes_on_wire: u64,
    pub cache_hits: u64,
    pub handshakes: u64,
}

impl OverheadMetrics {
    pub fn merge(&mut self, other: &OverheadMetrics) {
        self.round_trips += other.round_trips;
        self.bytes_on_wire += other.bytes_on_wire;
        self.cache_hits += other.cache_hits;
        self.handshakes += other.handshakes;
    }
}
