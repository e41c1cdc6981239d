//! The channel adversary: eavesdropping, dictionary matching and response
//! spoofing under the three capability classes. An on-path attacker sees
//! and tampers with everything; off-path attackers get no eavesdropping
//! and their spoofs land with a per-attempt probability.

use std::collections::BTreeMap;

use rand::Rng as _;
use rand::SeedableRng as _;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::wire::{
    encode_message, make_response, DnsMessage, DnsName, Rcode, ResourceRecord,
};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AdversaryError {
    #[error("invalid adversary config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Archetype {
    /// On-path machine between resolver and forwarder.
    Mitm,
    /// Off-path with IP spoofing and an adjacent machine (cache poisoning).
    Opsam,
    /// Plain off-path (PRNG side channels).
    Op,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Capability {
    /// Complete eavesdropping plus complete tampering.
    CeCt,
    /// Limited tampering: per-attempt success, no eavesdropping.
    Lt,
    None,
}

impl Archetype {
    pub fn capability(self) -> Capability {
        match self {
            Archetype::Mitm => Capability::CeCt,
            Archetype::Opsam | Archetype::Op => Capability::Lt,
            Archetype::None => Capability::None,
        }
    }
}

/// QNAME predicate for a spoof rule: a single specific name, a whole zone,
/// or anything.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QnameMatch {
    Any,
    Exact(DnsName),
    Zone(DnsName),
}

impl QnameMatch {
    pub fn matches(&self, qname: &DnsName) -> bool {
        match self {
            QnameMatch::Any => true,
            QnameMatch::Exact(name) => qname == name,
            QnameMatch::Zone(zone) => qname.ends_with(zone),
        }
    }
}

/// What a matched response is replaced with.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ForgedResponse {
    A(std::net::Ipv4Addr),
    NxDomain,
    Txt(String),
    Drop,
}

/// Rules are evaluated in order; the first match wins.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpoofRule {
    #[serde(rename = "match")]
    pub matcher: QnameMatch,
    pub forge: ForgedResponse,
    #[serde(default = "default_forged_ttl")]
    pub ttl: u32,
}

fn default_forged_ttl() -> u32 {
    300
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AdversaryConfig {
    pub archetype: Archetype,
    /// Per-attempt spoof success probability; forced to 1.0 for MITM.
    #[serde(default = "default_p")]
    pub p: f64,
    #[serde(default)]
    pub rng_seed: u64,
    #[serde(default)]
    pub rules: Vec<SpoofRule>,
    #[serde(default)]
    pub capture: bool,
    /// Flip a byte of frames it cannot read (complete-tampering attackers
    /// facing an encrypted channel).
    #[serde(default)]
    pub blind_tamper: bool,
}

fn default_p() -> f64 {
    1.0
}

impl Default for AdversaryConfig {
    fn default() -> Self {
        AdversaryConfig {
            archetype: Archetype::None,
            p: 1.0,
            rng_seed: 0,
            rules: Vec::new(),
            capture: false,
            blind_tamper: false,
        }
    }
}

impl AdversaryConfig {
    pub fn mitm(rules: Vec<SpoofRule>) -> Self {
        AdversaryConfig { archetype: Archetype::Mitm, capture: true, rules, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), AdversaryError> {
        if !(0.0..=1.0).contains(&self.p) {
            return Err(AdversaryError::InvalidConfig(format!(
                "success probability {} outside [0, 1]",
                self.p
            )));
        }
        match self.archetype.capability() {
            Capability::CeCt => {
                if self.p != 1.0 {
                    return Err(AdversaryError::InvalidConfig(
                        "an on-path attacker tampers with probability 1".into(),
                    ));
                }
            }
            Capability::Lt => {
                if self.capture {
                    return Err(AdversaryError::InvalidConfig(
                        "off-path attackers have no eavesdropping capability".into(),
                    ));
                }
            }
            Capability::None => {}
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    ToService,
    ToAgent,
}

/// What the interposer saw; sealed frames stay opaque ciphertext.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CapturedPayload {
    Dns(DnsMessage),
    Sealed(Vec<u8>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaptureEntry {
    pub tick: u64,
    pub direction: Direction,
    pub payload: CapturedPayload,
}

/// Append-only log of everything that crossed the channel.
#[derive(Debug, Default, Clone)]
pub struct CaptureLog {
    entries: Vec<CaptureEntry>,
}

impl CaptureLog {
    pub fn entries(&self) -> &[CaptureEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Plaintext queries in capture order.
    pub fn queries(&self) -> impl Iterator<Item = (&DnsMessage, u64)> {
        self.entries.iter().filter_map(|e| match (&e.payload, e.direction) {
            (CapturedPayload::Dns(msg), Direction::ToService) if !msg.is_response => {
                Some((msg, e.tick))
            }
            _ => None,
        })
    }

    /// One JSONL line per entry, wire bytes hex-encoded.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            let (kind, wire) = match &e.payload {
                CapturedPayload::Dns(msg) => {
                    ("dns", hex::encode(encode_message(msg).unwrap_or_default()))
                }
                CapturedPayload::Sealed(bytes) => ("sealed", hex::encode(bytes)),
            };
            let dir = match e.direction {
                Direction::ToService => "to_service",
                Direction::ToAgent => "to_agent",
            };
            out.push_str(&format!(
                "{{\"tick\":{},\"dir\":\"{}\",\"kind\":\"{}\",\"wire\":\"{}\"}}\n",
                e.tick, dir, kind, wire
            ));
        }
        out
    }
}

/// Outcome of interposing on one message.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Interposed {
    Forward(DnsMessage),
    Replace(DnsMessage),
    Drop,
}

/// Outcome of interposing on one sealed frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SealedInterposed {
    Forward(Vec<u8>),
    Tampered(Vec<u8>),
}

pub struct Adversary {
    cfg: AdversaryConfig,
    rng: ChaCha12Rng,
    log: CaptureLog,
    tick: u64,
    /// Matched-rule Bernoulli attempts and successes, for the frequency
    /// invariant.
    pub attempts: u64,
    pub spoofed: u64,
}

impl Adversary {
    pub fn new(cfg: AdversaryConfig) -> Result<Self, AdversaryError> {
        cfg.validate()?;
        let rng = ChaCha12Rng::seed_from_u64(cfg.rng_seed);
        Ok(Adversary { cfg, rng, log: CaptureLog::default(), tick: 0, attempts: 0, spoofed: 0 })
    }

    pub fn passthrough() -> Self {
        Self::new(AdversaryConfig::default()).expect("default config is valid")
    }

    pub fn config(&self) -> &AdversaryConfig {
        &self.cfg
    }

    pub fn capture_log(&self) -> &CaptureLog {
        &self.log
    }

    fn next_tick(&mut self) -> u64 {
        let t = self.tick;
        self.tick += 1;
        t
    }

    fn record(&mut self, direction: Direction, payload: CapturedPayload) {
        if self.cfg.capture && self.cfg.archetype.capability() == Capability::CeCt {
            let tick = self.next_tick();
            self.log.entries.push(CaptureEntry { tick, direction, payload });
        } else {
            self.next_tick();
        }
    }

    fn draw(&mut self) -> bool {
        self.attempts += 1;
        let hit = match self.cfg.archetype.capability() {
            Capability::CeCt => true,
            Capability::Lt => self.rng.gen::<f64>() < self.cfg.p,
            Capability::None => false,
        };
        if hit {
            self.spoofed += 1;
        }
        hit
    }

    /// See one plaintext message. Capture happens on both directions;
    /// spoof rules are applied on the response leg, replacing the
    /// service's answer before it reaches the agent.
    pub fn interpose(&mut self, msg: &DnsMessage, direction: Direction) -> Interposed {
        self.record(direction, CapturedPayload::Dns(msg.clone()));
        if self.cfg.archetype.capability() == Capability::None || direction == Direction::ToService
        {
            return Interposed::Forward(msg.clone());
        }
        let rule = self
            .cfg
            .rules
            .iter()
            .find(|r| r.matcher.matches(msg.qname()))
            .cloned();
        let Some(rule) = rule else {
            return Interposed::Forward(msg.clone());
        };
        if !self.draw() {
            return Interposed::Forward(msg.clone());
        }
        let query_shape = DnsMessage::query(msg.id, msg.qname().clone(), msg.question.qtype);
        let forged = match &rule.forge {
            ForgedResponse::Drop => return Interposed::Drop,
            ForgedResponse::NxDomain => make_response(&query_shape, vec![], Rcode::NxDomain),
            ForgedResponse::A(addr) => make_response(
                &query_shape,
                vec![ResourceRecord::a(msg.qname().clone(), rule.ttl, *addr)],
                Rcode::NoError,
            ),
            ForgedResponse::Txt(payload) => {
                match ResourceRecord::txt(msg.qname().clone(), rule.ttl, payload) {
                    Ok(rr) => make_response(&query_shape, vec![rr], Rcode::NoError),
                    Err(_) => return Interposed::Drop,
                }
            }
        };
        match forged {
            Ok(resp) => Interposed::Replace(resp),
            Err(_) => Interposed::Drop,
        }
    }

    /// See one sealed frame. The ciphertext is captured as-is; a tampering
    /// attacker can only flip bytes blindly.
    pub fn interpose_sealed(&mut self, frame: &[u8], direction: Direction) -> SealedInterposed {
        self.record(direction, CapturedPayload::Sealed(frame.to_vec()));
        let can_tamper = self.cfg.archetype.capability() != Capability::None;
        if can_tamper && self.cfg.blind_tamper && direction == Direction::ToAgent && self.draw() {
            let mut tampered = frame.to_vec();
            let idx = tampered.len() / 2;
            tampered[idx] ^= 0x01;
            return SealedInterposed::Tampered(tampered);
        }
        SealedInterposed::Forward(frame.to_vec())
    }
}

/// Attacker-built map from signature labels to file identifiers.
#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct Dictionary {
    map: BTreeMap<String, String>,
}

impl Dictionary {
    pub fn insert(&mut self, label: String, file_id: String) {
        self.map.insert(label, file_id);
    }

    pub fn get(&self, label: &str) -> Option<&str> {
        self.map.get(label).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

/// Match captured queries against a dictionary: one hit per query whose
/// first QNAME label is a known signature, ordered by tick.
pub fn match_traffic(dict: &Dictionary, log: &CaptureLog) -> Vec<(String, u64)> {
    let mut hits = Vec::new();
    for (query, tick) in log.queries() {
        if let Some(file_id) = dict.get(query.qname().first_label()) {
            hits.push((file_id.to_string(), tick));
        }
    }
    hits
}
