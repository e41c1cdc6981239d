//! Simulated authoritative lookup service: a signature registry plus the
//! per-dialect answering rules, optionally served over real UDP on
//! localhost with the exact same bytes as the in-process path.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::net::{Ipv4Addr, SocketAddr, UdpSocket};
use std::path::Path;
use std::sync::atomic::{AtomicBool, Ordering};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::countermeasures::{gti_confirmation_payload, sign_response, SigningKeypair};
use crate::dialects::{
    encode_nessus_report, Dialect, DialectKind, NessusReport, Signature,
    GTI_BENIGN_ADDR, GTI_DELETION_ADDR, MALWAREDB_BENIGN_ADDRS, MALWAREDB_CHK_LABEL,
    MHR_MALICIOUS_ADDR,
};
use crate::wire::{
    decode_message, encode_message, make_response, DnsMessage, Qtype, Rcode, ResourceRecord,
    WireError,
};

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("line {line}: {message}")]
    ParseError { line: usize, message: String },
    #[error("line {line}: signature scheme does not match the registry dialect")]
    SchemeMismatch { line: usize },
    #[error("query is for a zone this service does not own")]
    NotMyZone,
    #[error("malformed query: {0}")]
    Malformed(String),
    #[error("cannot bind {addr}: {source}")]
    Bind {
        addr: String,
        source: std::io::Error,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Wire(#[from] WireError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Benign,
    Malicious,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegistryEntry {
    pub classification: Classification,
    pub report: Option<NessusReport>,
    pub label: Option<String>,
}

/// On-disk registry line. `flags` is four hex digits, e.g. `"8480"`.
#[derive(Serialize, Deserialize)]
struct RegistryLine {
    sig: String,
    class: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    report: Option<ReportLine>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    scheme: Option<crate::dialects::HashScheme>,
}

#[derive(Serialize, Deserialize)]
struct ReportLine {
    total: u8,
    flagged: u8,
    flags: String,
}

/// The service's view of the world: signature label -> entry. Unknown
/// signatures are benign; absence from a blocklist means no detection.
#[derive(Debug, Clone)]
pub struct Registry {
    dialect: Dialect,
    entries: BTreeMap<String, RegistryEntry>,
    pub duplicates_replaced: usize,
}

impl Registry {
    pub fn new(dialect: Dialect) -> Self {
        Registry { dialect, entries: BTreeMap::new(), duplicates_replaced: 0 }
    }

    pub fn dialect(&self) -> &Dialect {
        &self.dialect
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn insert(&mut self, sig: &Signature, entry: RegistryEntry) {
        if self.entries.insert(sig.hex().to_string(), entry).is_some() {
            self.duplicates_replaced += 1;
        }
    }

    pub fn lookup(&self, label: &str) -> Option<&RegistryEntry> {
        self.entries.get(label)
    }

    pub fn is_malicious(&self, label: &str) -> bool {
        matches!(
            self.entries.get(label),
            Some(RegistryEntry { classification: Classification::Malicious, .. })
        )
    }

    /// Reports attached to malicious entries, for deriving the response
    /// vocabulary a MalwareDB service can emit.
    pub fn malicious_reports(&self) -> impl Iterator<Item = &NessusReport> {
        self.entries.values().filter_map(|e| match e.classification {
            Classification::Malicious => e.report.as_ref(),
            Classification::Benign => None,
        })
    }

    /// Load a JSONL registry. Duplicate signatures keep the last entry and
    /// emit a warning.
    pub fn load(path: &Path, dialect: Dialect) -> Result<Self, ServiceError> {
        let file = File::open(path)?;
        let mut registry = Registry::new(dialect);
        for (idx, line) in BufReader::new(file).lines().enumerate() {
            let lineno = idx + 1;
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let parsed: RegistryLine =
                serde_json::from_str(&line).map_err(|e| ServiceError::ParseError {
                    line: lineno,
                    message: e.to_string(),
                })?;
            if let Some(scheme) = parsed.scheme {
                if scheme != registry.dialect.hash_scheme {
                    return Err(ServiceError::SchemeMismatch { line: lineno });
                }
            }
            let sig = Signature::new(&parsed.sig, registry.dialect.hash_scheme).map_err(|e| {
                ServiceError::ParseError { line: lineno, message: e.to_string() }
            })?;
            let classification = match parsed.class.as_str() {
                "benign" => Classification::Benign,
                "malicious" => Classification::Malicious,
                other => {
                    return Err(ServiceError::ParseError {
                        line: lineno,
                        message: format!("unknown class {other:?}"),
                    })
                }
            };
            let report = match parsed.report {
                Some(r) => {
                    let flags = u16::from_str_radix(&r.flags, 16).map_err(|e| {
                        ServiceError::ParseError {
                            line: lineno,
                            message: format!("bad flags: {e}"),
                        }
                    })?;
                    let report = NessusReport::new(r.total, r.flagged, flags).map_err(|e| {
                        ServiceError::ParseError { line: lineno, message: e.to_string() }
                    })?;
                    if !report.is_coherent() {
                        return Err(ServiceError::ParseError {
                            line: lineno,
                            message: "incoherent report".into(),
                        });
                    }
                    Some(report)
                }
                None => None,
            };
            if registry.dialect.kind == DialectKind::MalwareDb
                && classification == Classification::Malicious
            {
                match &report {
                    Some(r) if r.engines_flagged >= 1 => {}
                    _ => {
                        return Err(ServiceError::ParseError {
                            line: lineno,
                            message: "MalwareDB malicious entries need a report with flagged >= 1"
                                .into(),
                        })
                    }
                }
            }
            registry.insert(&sig, RegistryEntry { classification, report, label: parsed.label });
        }
        if registry.duplicates_replaced > 0 {
            log::warn!(
                "registry {}: {} duplicate signature(s), last occurrence wins",
                path.display(),
                registry.duplicates_replaced
            );
        }
        Ok(registry)
    }

    pub fn save(&self, path: &Path) -> Result<(), ServiceError> {
        let mut out = File::create(path)?;
        for (sig, entry) in &self.entries {
            let line = RegistryLine {
                sig: sig.clone(),
                class: match entry.classification {
                    Classification::Benign => "benign".into(),
                    Classification::Malicious => "malicious".into(),
                },
                report: entry.report.map(|r| ReportLine {
                    total: r.engines_total,
                    flagged: r.engines_flagged,
                    flags: format!("{:04x}", r.engine_flags),
                }),
                label: entry.label.clone(),
                scheme: None,
            };
            writeln!(out, "{}", serde_json::to_string(&line).expect("serializable"))?;
        }
        Ok(())
    }
}

/// Service-side knobs; everything has a paper-faithful default.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ServiceConfig {
    /// Answer TTL in seconds.
    pub ttl: u32,
    /// Answer for the MalwareDB `chk` connectivity probe.
    pub connectivity_ok_addr: Ipv4Addr,
    /// Benign answer pool; the service picks per-signature deterministically.
    pub benign_addrs: Vec<Ipv4Addr>,
    /// MSB prefix for encoded MalwareDB reports (observed answers use 001).
    pub report_prefix_bits: u8,
    /// TXT payload for MHR text lookups of registered hashes.
    pub mhr_txt_payload: String,
    /// Seed for the per-instance signing keypair.
    pub key_seed: u64,
    /// Application-layer signing: sign every response.
    pub sign_all: bool,
}

impl ServiceConfig {
    pub fn for_kind(kind: DialectKind) -> Self {
        let benign_addrs = match kind {
            DialectKind::MalwareDb => MALWAREDB_BENIGN_ADDRS.to_vec(),
            DialectKind::Gti => vec![GTI_BENIGN_ADDR],
            DialectKind::Mhr => Vec::new(),
        };
        ServiceConfig {
            ttl: 300,
            connectivity_ok_addr: Ipv4Addr::new(127, 0, 0, 1),
            benign_addrs,
            report_prefix_bits: 0b001,
            mhr_txt_payload: "malware detected".into(),
            key_seed: 0,
            sign_all: false,
        }
    }
}

/// Counters from a UDP serving session.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ServeStats {
    pub answered: u64,
    pub servfail: u64,
    pub dropped: u64,
}

impl fmt::Display for ServeStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "answered={} servfail={} dropped={}",
            self.answered, self.servfail, self.dropped
        )
    }
}

pub struct LookupService {
    registry: Registry,
    config: ServiceConfig,
    keypair: SigningKeypair,
}

impl LookupService {
    pub fn new(registry: Registry, config: ServiceConfig) -> Self {
        let keypair = SigningKeypair::from_seed(config.key_seed);
        LookupService { registry, config, keypair }
    }

    pub fn registry(&self) -> &Registry {
        &self.registry
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.config
    }

    pub fn dialect(&self) -> &Dialect {
        self.registry.dialect()
    }

    /// Public half of the per-instance signing key, distributed to agents
    /// through scenario configuration.
    pub fn verifying_key(&self) -> ed25519_dalek::VerifyingKey {
        self.keypair.verifying_key()
    }

    fn pick_benign_addr(&self, label: &str) -> Ipv4Addr {
        if self.config.benign_addrs.is_empty() {
            return GTI_BENIGN_ADDR;
        }
        let idx = label.bytes().next().unwrap_or(0) as usize % self.config.benign_addrs.len();
        self.config.benign_addrs[idx]
    }

    /// Answer one query under the dialect rules. Deterministic given the
    /// registry and query.
    pub fn handle_query(&self, query: &DnsMessage) -> Result<DnsMessage, ServiceError> {
        if query.is_response {
            return Err(ServiceError::Malformed("got a response, not a query".into()));
        }
        let zone = &self.dialect().zone;
        if !query.qname().ends_with(zone) {
            return Err(ServiceError::NotMyZone);
        }
        let prefix_len = query.qname().labels().len() - zone.labels().len();
        let label = if prefix_len == 1 {
            Some(query.qname().first_label().to_string())
        } else {
            None
        };
        let ttl = self.config.ttl;
        let qname = query.qname().clone();

        let response = match self.dialect().kind {
            DialectKind::Mhr => {
                let malicious = label
                    .as_deref()
                    .map(|l| self.registry.is_malicious(l))
                    .unwrap_or(false);
                if malicious {
                    let rr = match query.question.qtype {
                        Qtype::A => ResourceRecord::a(qname, ttl, MHR_MALICIOUS_ADDR),
                        Qtype::Txt => {
                            ResourceRecord::txt(qname, ttl, &self.config.mhr_txt_payload)?
                        }
                    };
                    make_response(query, vec![rr], Rcode::NoError)?
                } else {
                    // Unknown or unparsable names do not exist in the zone.
                    make_response(query, vec![], Rcode::NxDomain)?
                }
            }
            DialectKind::MalwareDb => {
                let label = label.ok_or_else(|| {
                    ServiceError::Malformed("expected exactly one label before the zone".into())
                })?;
                if query.question.qtype != Qtype::A {
                    return Err(ServiceError::Malformed("MalwareDB lookups are A queries".into()));
                }
                if label == MALWAREDB_CHK_LABEL {
                    let rr = ResourceRecord::a(qname, ttl, self.config.connectivity_ok_addr);
                    make_response(query, vec![rr], Rcode::NoError)?
                } else {
                    Signature::new(&label, self.dialect().hash_scheme)
                        .map_err(|e| ServiceError::Malformed(e.to_string()))?;
                    let addr = match self.registry.lookup(&label) {
                        Some(entry) if entry.classification == Classification::Malicious => {
                            let report = entry
                                .report
                                .expect("malicious MalwareDB entries carry a report");
                            encode_nessus_report(&report, self.config.report_prefix_bits)
                                .expect("registry reports are coherent")
                        }
                        _ => self.pick_benign_addr(&label),
                    };
                    make_response(query, vec![ResourceRecord::a(qname, ttl, addr)], Rcode::NoError)?
                }
            }
            DialectKind::Gti => {
                let label = label.ok_or_else(|| {
                    ServiceError::Malformed("expected exactly one label before the zone".into())
                })?;
                Signature::new(&label, self.dialect().hash_scheme)
                    .map_err(|e| ServiceError::Malformed(e.to_string()))?;
                let malicious = self.registry.is_malicious(&label);
                match query.question.qtype {
                    Qtype::A => {
                        let addr = if malicious {
                            GTI_DELETION_ADDR
                        } else {
                            self.pick_benign_addr(&label)
                        };
                        make_response(
                            query,
                            vec![ResourceRecord::a(qname, ttl, addr)],
                            Rcode::NoError,
                        )?
                    }
                    Qtype::Txt => {
                        // Deletion confirmations exist only for registered
                        // malicious signatures and are always signed.
                        if malicious {
                            let payload = gti_confirmation_payload(&self.keypair, &qname);
                            let rr = ResourceRecord::txt(qname, ttl, &payload)?;
                            make_response(query, vec![rr], Rcode::NoError)?
                        } else {
                            make_response(query, vec![], Rcode::NxDomain)?
                        }
                    }
                }
            }
        };
        Ok(response)
    }

    /// Transport-facing answer: maps malformed queries to ServFail, never
    /// answers foreign zones, and applies application-layer signing when
    /// configured. `None` means drop.
    pub fn answer(&self, query: &DnsMessage) -> Option<DnsMessage> {
        let mut response = match self.handle_query(query) {
            Ok(r) => r,
            Err(ServiceError::NotMyZone) => return None,
            Err(_) => make_response(query, vec![], Rcode::ServFail).ok()?,
        };
        if self.config.sign_all {
            sign_response(&self.keypair, &mut response);
        }
        Some(response)
    }

    /// Raw-datagram answer used by the UDP loop. Undecodable datagrams get
    /// a header-only ServFail when at least the header is readable.
    pub fn answer_datagram(&self, datagram: &[u8]) -> Option<Vec<u8>> {
        match decode_message(datagram) {
            Ok(query) if !query.is_response => {
                let response = self.answer(&query)?;
                encode_message(&response).ok()
            }
            Ok(_) => None,
            Err(_) if datagram.len() >= 12 => {
                let id = u16::from_be_bytes([datagram[0], datagram[1]]);
                let mut reply = Vec::with_capacity(12);
                reply.extend_from_slice(&id.to_be_bytes());
                reply.extend_from_slice(&(0x8180u16 | Rcode::ServFail.code() as u16).to_be_bytes());
                reply.extend_from_slice(&[0; 8]);
                Some(reply)
            }
            Err(_) => None,
        }
    }

    /// Serve datagrams until `shutdown` flips. Each datagram is answered
    /// with the same bytes the in-process path would produce.
    pub fn serve_udp(&self, bind: &str, shutdown: &AtomicBool) -> Result<ServeStats, ServiceError> {
        let socket = UdpSocket::bind(bind).map_err(|e| ServiceError::Bind {
            addr: bind.to_string(),
            source: e,
        })?;
        socket.set_read_timeout(Some(Duration::from_millis(25)))?;
        log::info!(
            "serving {} on {}",
            self.dialect().zone,
            socket.local_addr()?
        );
        self.serve_socket(&socket, shutdown)
    }

    /// Same loop over a caller-provided socket (tests bind port 0).
    pub fn serve_socket(
        &self,
        socket: &UdpSocket,
        shutdown: &AtomicBool,
    ) -> Result<ServeStats, ServiceError> {
        let mut stats = ServeStats::default();
        let mut buf = [0u8; 2048];
        while !shutdown.load(Ordering::Relaxed) {
            let (len, peer): (usize, SocketAddr) = match socket.recv_from(&mut buf) {
                Ok(x) => x,
                Err(e)
                    if e.kind() == std::io::ErrorKind::WouldBlock
                        || e.kind() == std::io::ErrorKind::TimedOut =>
                {
                    continue
                }
                Err(e) => return Err(e.into()),
            };
            match self.answer_datagram(&buf[..len]) {
                Some(reply) => {
                    let servfail = reply.len() == 12
                        || decode_message(&reply)
                            .map(|m| m.rcode == Rcode::ServFail)
                            .unwrap_or(false);
                    if servfail {
                        stats.servfail += 1;
                    } else {
                        stats.answered += 1;
                    }
                    socket.send_to(&reply, peer)?;
                }
                None => stats.dropped += 1,
            }
        }
        Ok(stats)
    }
}
