//! Simulated anti-malware agent: hashes files, asks the lookup service
//! through a resolver channel, and applies the predetermined action inside
//! a sandbox directory. Deletion and quarantine are real filesystem
//! operations, confined to the sandbox root.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use ed25519_dalek::VerifyingKey;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::{ChannelError, Transport};
use crate::countermeasures::{verify_gti_confirmation, verify_response, CountermeasureError};
use crate::dialects::{
    build_lookup_query, gti_confirmation_query, parse_lookup_response, Dialect, DialectKind,
    Signature, Verdict, VerdictClass, MALWAREDB_CHK_LABEL,
};
use crate::wire::{DnsMessage, Qtype, Rcode};

#[derive(Debug, Error)]
pub enum AgentError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0} escapes the sandbox root")]
    SandboxViolation(PathBuf),
    #[error("invalid agent policy: {0}")]
    InvalidPolicy(String),
    #[error("resolver timed out")]
    ResolverTimeout,
    #[error("connectivity check failed")]
    ConnectivityCheckFailed,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> AgentError + '_ {
    move |source| AgentError::Io { path: path.to_path_buf(), source }
}

/// The predetermined actions. `Ignore` is the benign set; alerting,
/// quarantining and deleting make up the malicious set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentAction {
    Ignore,
    Alert,
    Quarantine,
    Delete,
}

impl AgentAction {
    pub fn is_malicious_action(self) -> bool {
        !matches!(self, AgentAction::Ignore)
    }
}

impl fmt::Display for AgentAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AgentAction::Ignore => "ignore",
            AgentAction::Alert => "alert",
            AgentAction::Quarantine => "quarantine",
            AgentAction::Delete => "delete",
        })
    }
}

/// Agent configuration.
#[derive(Clone)]
pub struct AgentPolicy {
    pub dialect: Dialect,
    /// Action taken on a (confirmed) malicious verdict.
    pub on_malicious: AgentAction,
    pub cache_ttl_respected: bool,
    /// GTI: require and check the signed TXT confirmation before acting.
    pub gti_verify: bool,
    pub gti_pubkey: Option<VerifyingKey>,
    /// Set under application-layer signing; every response must verify.
    pub app_signing_pubkey: Option<VerifyingKey>,
    /// Swallow resolver errors into the report instead of aborting.
    pub error_silent: bool,
}

impl AgentPolicy {
    /// Per-dialect defaults: MHR and MalwareDB agents only report, the GTI
    /// agent deletes after a verified confirmation.
    pub fn for_dialect(dialect: Dialect) -> Self {
        let on_malicious = match dialect.kind {
            DialectKind::Mhr | DialectKind::MalwareDb => AgentAction::Alert,
            DialectKind::Gti => AgentAction::Delete,
        };
        AgentPolicy {
            dialect,
            on_malicious,
            cache_ttl_respected: true,
            gti_verify: true,
            gti_pubkey: None,
            app_signing_pubkey: None,
            error_silent: true,
        }
    }

    fn validate(&self) -> Result<(), AgentError> {
        if !self.on_malicious.is_malicious_action() {
            return Err(AgentError::InvalidPolicy(
                "on_malicious must be a malicious action".into(),
            ));
        }
        if self.dialect.kind == DialectKind::Gti
            && self.gti_verify
            && self.on_malicious == AgentAction::Delete
            && self.gti_pubkey.is_none()
        {
            return Err(AgentError::InvalidPolicy(
                "GTI deletion with confirmation checking needs a verification key".into(),
            ));
        }
        Ok(())
    }
}

/// Working directory of one agent: `<root>/files` holds the scan targets,
/// `<root>/quarantine` receives quarantined files. Nothing outside the
/// root is ever mutated.
#[derive(Debug, Clone)]
pub struct Sandbox {
    root: PathBuf,
}

impl Sandbox {
    pub fn create(root: &Path) -> Result<Self, AgentError> {
        fs::create_dir_all(root.join("files")).map_err(io_err(root))?;
        fs::create_dir_all(root.join("quarantine")).map_err(io_err(root))?;
        Ok(Sandbox { root: root.to_path_buf() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn files_dir(&self) -> PathBuf {
        self.root.join("files")
    }

    pub fn quarantine_dir(&self) -> PathBuf {
        self.root.join("quarantine")
    }

    /// Restore a pristine state: clear files and quarantine, then copy
    /// every regular file from `sources` into `files/`.
    pub fn reset_from_dir(&self, sources: &Path) -> Result<(), AgentError> {
        for dir in [self.files_dir(), self.quarantine_dir()] {
            fs::remove_dir_all(&dir).map_err(io_err(&dir))?;
            fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        }
        let mut names: Vec<_> = fs::read_dir(sources)
            .map_err(io_err(sources))?
            .filter_map(|e| e.ok())
            .filter(|e| e.path().is_file())
            .map(|e| e.file_name())
            .collect();
        names.sort();
        for name in names {
            let from = sources.join(&name);
            let to = self.files_dir().join(&name);
            fs::copy(&from, &to).map_err(io_err(&from))?;
        }
        Ok(())
    }

    /// Resolve `path` and prove it lives under the sandbox root.
    fn contained(&self, path: &Path) -> Result<PathBuf, AgentError> {
        let root = self.root.canonicalize().map_err(io_err(&self.root))?;
        let parent = path
            .parent()
            .ok_or_else(|| AgentError::SandboxViolation(path.to_path_buf()))?;
        let file_name = path
            .file_name()
            .ok_or_else(|| AgentError::SandboxViolation(path.to_path_buf()))?;
        let resolved = parent.canonicalize().map_err(io_err(path))?.join(file_name);
        if resolved.starts_with(&root) {
            Ok(resolved)
        } else {
            Err(AgentError::SandboxViolation(path.to_path_buf()))
        }
    }
}

/// Everything recorded about one file scan.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanOutcome {
    pub file_id: String,
    pub signature: Signature,
    pub query: DnsMessage,
    pub response: Option<DnsMessage>,
    pub verdict: Option<Verdict>,
    /// Classification after confirmation logic; `Unknown` on errors and
    /// failed confirmations.
    pub final_class: VerdictClass,
    pub action: AgentAction,
    pub notes: Vec<String>,
}

impl ScanOutcome {
    /// The scan completed and the agent took the benign action.
    pub fn benign_action(&self) -> bool {
        self.final_class == VerdictClass::Benign && !self.action.is_malicious_action()
    }

    pub fn malicious_action(&self) -> bool {
        self.action.is_malicious_action()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReportEntry {
    Outcome(ScanOutcome),
    Error { file_id: String, message: String },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanSummary {
    pub scanned: usize,
    pub benign: usize,
    pub malicious: usize,
    pub unknown: usize,
    pub alerts: usize,
    pub quarantined: usize,
    pub deleted: usize,
    pub errors: usize,
}

impl fmt::Display for ScanSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "scanned={} benign={} malicious={} unknown={} alerts={} quarantined={} deleted={} errors={}",
            self.scanned, self.benign, self.malicious, self.unknown, self.alerts,
            self.quarantined, self.deleted, self.errors
        )
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanReport {
    pub entries: Vec<ReportEntry>,
    pub summary: ScanSummary,
    pub warnings: Vec<String>,
}

impl ScanReport {
    pub fn outcomes(&self) -> impl Iterator<Item = &ScanOutcome> {
        self.entries.iter().filter_map(|e| match e {
            ReportEntry::Outcome(o) => Some(o),
            ReportEntry::Error { .. } => None,
        })
    }

    /// One JSON object per entry.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for entry in &self.entries {
            out.push_str(&serde_json::to_string(entry).expect("serializable"));
            out.push('\n');
        }
        out
    }
}

#[derive(Debug)]
enum ResolveFailure {
    Timeout,
    AuthReject(CountermeasureError),
    PayloadTooLarge(usize),
}

struct CachedResponse {
    response: DnsMessage,
    expires_at: u64,
}

pub struct Agent<C: Transport> {
    policy: AgentPolicy,
    channel: C,
    sandbox: Sandbox,
    cache: HashMap<(String, Qtype), CachedResponse>,
    /// Simulated seconds; each file scan advances it by one.
    clock: u64,
    next_id: u16,
    pub cache_hits: u64,
}

impl<C: Transport> Agent<C> {
    pub fn new(policy: AgentPolicy, channel: C, sandbox: Sandbox) -> Result<Self, AgentError> {
        policy.validate()?;
        Ok(Agent {
            policy,
            channel,
            sandbox,
            cache: HashMap::new(),
            clock: 0,
            next_id: 1,
            cache_hits: 0,
        })
    }

    pub fn policy(&self) -> &AgentPolicy {
        &self.policy
    }

    pub fn sandbox(&self) -> &Sandbox {
        &self.sandbox
    }

    pub fn channel(&self) -> &C {
        &self.channel
    }

    pub fn channel_mut(&mut self) -> &mut C {
        &mut self.channel
    }

    fn next_id(&mut self) -> u16 {
        let id = self.next_id;
        self.next_id = self.next_id.wrapping_add(1);
        id
    }

    /// Send a query through the channel, honoring the positive cache when
    /// the transport and policy allow it. Responses failing signature
    /// verification are indistinguishable from timeouts to the caller.
    fn resolve(&mut self, query: &DnsMessage) -> Result<DnsMessage, ResolveFailure> {
        let cache_enabled = self.policy.cache_ttl_respected && self.channel.supports_local_cache();
        let key = (query.qname().presentation(), query.question.qtype);
        if cache_enabled {
            if let Some(cached) = self.cache.get(&key) {
                if self.clock < cached.expires_at {
                    self.cache_hits += 1;
                    let mut response = cached.response.clone();
                    response.id = query.id;
                    return Ok(response);
                }
            }
        }
        let response = self.channel.exchange(query).map_err(|e| match e {
            ChannelError::Timeout => ResolveFailure::Timeout,
            ChannelError::PayloadTooLarge(CountermeasureError::PayloadTooLarge(n)) => {
                ResolveFailure::PayloadTooLarge(n)
            }
            _ => ResolveFailure::Timeout,
        })?;
        if let Some(pubkey) = &self.policy.app_signing_pubkey {
            verify_response(pubkey, &response).map_err(ResolveFailure::AuthReject)?;
        }
        if cache_enabled && response.rcode == Rcode::NoError && !response.answers.is_empty() {
            let ttl = response.answers.iter().map(|rr| rr.ttl).min().unwrap_or(0) as u64;
            self.cache.insert(
                key,
                CachedResponse { response: response.clone(), expires_at: self.clock + ttl },
            );
        }
        Ok(response)
    }

    fn resolve_failure_note(failure: &ResolveFailure) -> String {
        match failure {
            ResolveFailure::Timeout => "resolver timeout".into(),
            ResolveFailure::AuthReject(CountermeasureError::MissingSignature) => {
                "response signature missing".into()
            }
            ResolveFailure::AuthReject(_) => "response signature invalid".into(),
            ResolveFailure::PayloadTooLarge(n) => format!("payload too large: {n} bytes"),
        }
    }

    /// Scan a single file under the sandbox and apply the resulting action.
    pub fn scan_file(&mut self, path: &Path) -> Result<ScanOutcome, AgentError> {
        self.clock += 1;
        let contained = self.sandbox.contained(path)?;
        let file_id = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        let bytes = fs::read(&contained).map_err(io_err(path))?;
        let signature = self.policy.dialect.signature_of(&bytes);
        let id = self.next_id();
        let query = build_lookup_query(&self.policy.dialect, &signature, Qtype::A, id)
            .expect("signature scheme matches its dialect");
        let mut notes = Vec::new();

        let response = match self.resolve(&query) {
            Ok(r) => Some(r),
            Err(failure) => {
                if !self.policy.error_silent {
                    return Err(AgentError::ResolverTimeout);
                }
                notes.push(Self::resolve_failure_note(&failure));
                None
            }
        };

        let verdict = match &response {
            Some(r) => match parse_lookup_response(&self.policy.dialect, r) {
                Ok(v) => Some(v),
                Err(e) => {
                    notes.push(format!("malformed response: {e}"));
                    None
                }
            },
            None => None,
        };

        let mut final_class = verdict.as_ref().map(|v| v.class).unwrap_or(VerdictClass::Unknown);

        // GTI deletion verdicts need the signed TXT confirmation; an
        // altered or blocked confirmation leaves the file untouched.
        if let Some(v) = &verdict {
            if v.confirmation_required && final_class == VerdictClass::Malicious {
                if self.policy.gti_verify {
                    let conf_id = self.next_id();
                    let conf_query =
                        gti_confirmation_query(&signature, &self.policy.dialect.zone, conf_id);
                    let confirmed = match self.resolve(&conf_query) {
                        Ok(conf_resp) => {
                            let pubkey = self
                                .policy
                                .gti_pubkey
                                .as_ref()
                                .expect("validated at construction");
                            verify_gti_confirmation(pubkey, conf_query.qname(), &conf_resp)
                        }
                        Err(failure) => {
                            notes.push(Self::resolve_failure_note(&failure));
                            false
                        }
                    };
                    if !confirmed {
                        notes.push("confirmation failed".into());
                        final_class = VerdictClass::Unknown;
                    }
                }
            }
        }

        let action = match final_class {
            VerdictClass::Malicious => self.policy.on_malicious,
            VerdictClass::Benign | VerdictClass::Unknown => AgentAction::Ignore,
        };

        match action {
            AgentAction::Delete => {
                fs::remove_file(&contained).map_err(io_err(path))?;
            }
            AgentAction::Quarantine => {
                let mut dest = self.sandbox.quarantine_dir().join(&file_id);
                let mut counter = 1;
                while dest.exists() {
                    dest = self
                        .sandbox
                        .quarantine_dir()
                        .join(format!("{file_id}.{counter}"));
                    counter += 1;
                }
                fs::rename(&contained, &dest).map_err(io_err(path))?;
            }
            AgentAction::Alert | AgentAction::Ignore => {}
        }

        Ok(ScanOutcome {
            file_id,
            signature,
            query,
            response,
            verdict,
            final_class,
            action,
            notes,
        })
    }

    /// Scan every file under `<sandbox>/files` in lexicographic order.
    /// MalwareDB agents probe connectivity first and, when errors are not
    /// silent, abort on its failure.
    pub fn scan_directory(&mut self) -> Result<ScanReport, AgentError> {
        let mut warnings = Vec::new();
        if self.policy.dialect.kind == DialectKind::MalwareDb {
            let id = self.next_id();
            let chk_name = self
                .policy
                .dialect
                .zone
                .prepend_label(MALWAREDB_CHK_LABEL.as_bytes())
                .expect("chk label fits");
            let chk = DnsMessage::query(id, chk_name, Qtype::A);
            let ok = match self.resolve(&chk) {
                Ok(r) => r.rcode == Rcode::NoError && r.first_a().is_some(),
                Err(_) => false,
            };
            if !ok {
                if !self.policy.error_silent {
                    return Err(AgentError::ConnectivityCheckFailed);
                }
                // Connectivity and encoding errors are not propagated.
                warnings.push("connectivity check failed".into());
            }
        }

        let dir = self.sandbox.files_dir();
        let mut names: Vec<_> = fs::read_dir(&dir)
            .map_err(io_err(&dir))?
            .filter_map(|e| e.ok())
            .map(|e| e.file_name())
            .collect();
        names.sort();

        let mut entries = Vec::with_capacity(names.len());
        let mut summary = ScanSummary::default();
        for name in names {
            let path = dir.join(&name);
            summary.scanned += 1;
            match self.scan_file(&path) {
                Ok(outcome) => {
                    match outcome.final_class {
                        VerdictClass::Benign => summary.benign += 1,
                        VerdictClass::Malicious => summary.malicious += 1,
                        VerdictClass::Unknown => summary.unknown += 1,
                    }
                    match outcome.action {
                        AgentAction::Alert => summary.alerts += 1,
                        AgentAction::Quarantine => summary.quarantined += 1,
                        AgentAction::Delete => summary.deleted += 1,
                        AgentAction::Ignore => {}
                    }
                    entries.push(ReportEntry::Outcome(outcome));
                }
                Err(AgentError::Io { path, source }) => {
                    summary.errors += 1;
                    entries.push(ReportEntry::Error {
                        file_id: name.to_string_lossy().into_owned(),
                        message: format!("{}: {source}", path.display()),
                    });
                }
                Err(e) => return Err(e),
            }
        }
        Ok(ScanReport { entries, summary, warnings })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::{Adversary, AdversaryConfig, ForgedResponse, QnameMatch, SpoofRule};
    use crate::channel::SimChannel;
    use crate::dialects::{Dialect, GTI_BENIGN_ADDR};
    use crate::service::{Classification, LookupService, Registry, RegistryEntry, ServiceConfig};
    use std::sync::Arc;

    fn write_files(dir: &Path, files: &[(&str, &[u8])]) {
        for (name, content) in files {
            fs::write(dir.join(name), content).unwrap();
        }
    }

    fn service_for(dialect: Dialect, malicious: &[&[u8]]) -> Arc<LookupService> {
        let mut registry = Registry::new(dialect.clone());
        for content in malicious {
            let sig = dialect.signature_of(content);
            let report = crate::dialects::NessusReport::new(16, 5, 0x8480).ok();
            registry.insert(
                &sig,
                RegistryEntry {
                    classification: Classification::Malicious,
                    report,
                    label: None,
                },
            );
        }
        let config = ServiceConfig::for_kind(dialect.kind);
        Arc::new(LookupService::new(registry, config))
    }

    fn agent_for(
        dialect: Dialect,
        service: &Arc<LookupService>,
        root: &Path,
    ) -> Agent<SimChannel> {
        let mut policy = AgentPolicy::for_dialect(dialect);
        policy.gti_pubkey = Some(service.verifying_key());
        let sandbox = Sandbox::create(root).unwrap();
        let channel = SimChannel::plain(Arc::clone(service), Adversary::passthrough());
        Agent::new(policy, channel, sandbox).unwrap()
    }

    #[test]
    fn mhr_malicious_file_alerts_benign_ignored() {
        let dir = tempfile::tempdir().unwrap();
        let dialect = Dialect::mhr();
        let service = service_for(dialect.clone(), &[b"evil content"]);
        let mut agent = agent_for(dialect, &service, dir.path());
        write_files(
            &agent.sandbox().files_dir(),
            &[("evil.bin", b"evil content"), ("fine.txt", b"fine content")],
        );

        let evil = agent.sandbox().files_dir().join("evil.bin");
        let outcome = agent.scan_file(&evil).unwrap();
        assert_eq!(outcome.final_class, VerdictClass::Malicious);
        assert_eq!(outcome.action, AgentAction::Alert);
        assert!(evil.exists(), "alert does not touch the file");

        let fine = agent.sandbox().files_dir().join("fine.txt");
        let outcome = agent.scan_file(&fine).unwrap();
        assert!(outcome.benign_action());
    }

    #[test]
    fn gti_deletes_only_with_valid_confirmation() {
        let dir = tempfile::tempdir().unwrap();
        let dialect = Dialect::gti();
        let service = service_for(dialect.clone(), &[b"trojan"]);
        let mut agent = agent_for(dialect.clone(), &service, dir.path());
        write_files(&agent.sandbox().files_dir(), &[("trojan.exe", b"trojan")]);

        let path = agent.sandbox().files_dir().join("trojan.exe");
        let outcome = agent.scan_file(&path).unwrap();
        assert_eq!(outcome.action, AgentAction::Delete);
        assert!(!path.exists(), "confirmed deletion removes the file");

        // Same service, but the confirmation TXT is forged in transit:
        // the file must survive.
        let dir2 = tempfile::tempdir().unwrap();
        let rules = vec![SpoofRule {
            matcher: QnameMatch::Zone(dialect.zone.clone()),
            forge: ForgedResponse::Txt("bm90IGEgdmFsaWQgc2lnbmF0dXJl".into()),
            ttl: 300,
        }];
        let sandbox = Sandbox::create(dir2.path()).unwrap();
        let mut policy = AgentPolicy::for_dialect(dialect.clone());
        policy.gti_pubkey = Some(service.verifying_key());
        let channel = SimChannel::plain(
            Arc::clone(&service),
            Adversary::new(AdversaryConfig {
                archetype: crate::adversary::Archetype::Mitm,
                rules,
                ..Default::default()
            })
            .unwrap(),
        );
        let mut agent = Agent::new(policy, channel, sandbox).unwrap();
        write_files(&agent.sandbox().files_dir(), &[("trojan.exe", b"trojan")]);
        let path = agent.sandbox().files_dir().join("trojan.exe");
        // The zone-wide TXT forgery corrupts both legs; whichever leg the
        // agent trips on, the file must survive.
        let outcome = agent.scan_file(&path).unwrap();
        assert_ne!(outcome.action, AgentAction::Delete);
        assert!(path.exists());
    }

    #[test]
    fn gti_blocked_confirmation_yields_ignore_with_note() {
        let dir = tempfile::tempdir().unwrap();
        let dialect = Dialect::gti();
        let service = service_for(dialect.clone(), &[b"trojan"]);
        // Drop only the TXT confirmation: the deletion answer arrives, the
        // confirmation never does.
        let sig = dialect.signature_of(b"trojan");
        let conf_qname = dialect.zone.prepend_label(sig.hex().as_bytes()).unwrap();
        let rules = vec![SpoofRule {
            matcher: QnameMatch::Exact(conf_qname),
            forge: ForgedResponse::Drop,
            ttl: 300,
        }];
        let sandbox = Sandbox::create(dir.path()).unwrap();
        let mut policy = AgentPolicy::for_dialect(dialect.clone());
        policy.gti_pubkey = Some(service.verifying_key());
        let channel = SimChannel::plain(
            Arc::clone(&service),
            Adversary::new(AdversaryConfig {
                archetype: crate::adversary::Archetype::Mitm,
                rules,
                ..Default::default()
            })
            .unwrap(),
        );
        let mut agent = Agent::new(policy, channel, sandbox).unwrap();
        write_files(&agent.sandbox().files_dir(), &[("trojan.exe", b"trojan")]);
        let path = agent.sandbox().files_dir().join("trojan.exe");

        // Both the A query and the TXT confirmation share a QNAME; the drop
        // rule kills both, so the scan times out silently.
        let outcome = agent.scan_file(&path).unwrap();
        assert_eq!(outcome.action, AgentAction::Ignore);
        assert!(path.exists());
        assert!(!outcome.notes.is_empty());
    }

    #[test]
    fn quarantine_moves_into_sandbox_quarantine() {
        let dir = tempfile::tempdir().unwrap();
        let dialect = Dialect::mhr();
        let service = service_for(dialect.clone(), &[b"evil content"]);
        let sandbox = Sandbox::create(dir.path()).unwrap();
        let mut policy = AgentPolicy::for_dialect(dialect);
        policy.on_malicious = AgentAction::Quarantine;
        let channel = SimChannel::plain(Arc::clone(&service), Adversary::passthrough());
        let mut agent = Agent::new(policy, channel, sandbox).unwrap();
        write_files(&agent.sandbox().files_dir(), &[("evil.bin", b"evil content")]);

        let path = agent.sandbox().files_dir().join("evil.bin");
        let outcome = agent.scan_file(&path).unwrap();
        assert_eq!(outcome.action, AgentAction::Quarantine);
        assert!(!path.exists());
        assert!(agent.sandbox().quarantine_dir().join("evil.bin").exists());
    }

    #[test]
    fn scan_outside_sandbox_refused() {
        let dir = tempfile::tempdir().unwrap();
        let outside = tempfile::tempdir().unwrap();
        let dialect = Dialect::mhr();
        let service = service_for(dialect.clone(), &[]);
        let mut agent = agent_for(dialect, &service, dir.path());
        let target = outside.path().join("victim.txt");
        fs::write(&target, b"do not touch").unwrap();
        let err = agent.scan_file(&target).unwrap_err();
        assert!(matches!(err, AgentError::SandboxViolation(_)));
        assert!(target.exists());
    }

    #[test]
    fn cache_respects_ttl_and_flag() {
        let dir = tempfile::tempdir().unwrap();
        let dialect = Dialect::gti();
        let service = service_for(dialect.clone(), &[]);
        let mut agent = agent_for(dialect.clone(), &service, dir.path());
        write_files(&agent.sandbox().files_dir(), &[("a.txt", b"hello")]);
        let path = agent.sandbox().files_dir().join("a.txt");
        agent.scan_file(&path).unwrap();
        agent.scan_file(&path).unwrap();
        assert_eq!(agent.cache_hits, 1);
        assert_eq!(agent.channel().metrics().round_trips, 1);

        // Cache disabled: every scan is a wire query.
        let dir2 = tempfile::tempdir().unwrap();
        let sandbox = Sandbox::create(dir2.path()).unwrap();
        let mut policy = AgentPolicy::for_dialect(dialect);
        policy.cache_ttl_respected = false;
        policy.gti_pubkey = Some(service.verifying_key());
        let channel = SimChannel::plain(Arc::clone(&service), Adversary::passthrough());
        let mut agent = Agent::new(policy, channel, sandbox).unwrap();
        write_files(&agent.sandbox().files_dir(), &[("a.txt", b"hello")]);
        let path = agent.sandbox().files_dir().join("a.txt");
        agent.scan_file(&path).unwrap();
        agent.scan_file(&path).unwrap();
        assert_eq!(agent.cache_hits, 0);
        assert_eq!(agent.channel().metrics().round_trips, 2);
    }

    #[test]
    fn dropped_channel_times_out_and_leaves_file() {
        let dir = tempfile::tempdir().unwrap();
        let dialect = Dialect::mhr();
        let service = service_for(dialect.clone(), &[b"evil content"]);
        let rules = vec![SpoofRule {
            matcher: QnameMatch::Any,
            forge: ForgedResponse::Drop,
            ttl: 300,
        }];
        let sandbox = Sandbox::create(dir.path()).unwrap();
        let policy = AgentPolicy::for_dialect(dialect);
        let channel = SimChannel::plain(
            Arc::clone(&service),
            Adversary::new(AdversaryConfig {
                archetype: crate::adversary::Archetype::Mitm,
                rules,
                ..Default::default()
            })
            .unwrap(),
        );
        let mut agent = Agent::new(policy, channel, sandbox).unwrap();
        write_files(&agent.sandbox().files_dir(), &[("evil.bin", b"evil content")]);
        let path = agent.sandbox().files_dir().join("evil.bin");
        let outcome = agent.scan_file(&path).unwrap();
        assert_eq!(outcome.final_class, VerdictClass::Unknown);
        assert_eq!(outcome.action, AgentAction::Ignore);
        assert_eq!(outcome.notes, vec!["resolver timeout".to_string()]);
        assert!(path.exists());

        // With error_silent off the failure propagates.
        let dir2 = tempfile::tempdir().unwrap();
        let sandbox = Sandbox::create(dir2.path()).unwrap();
        let mut policy = AgentPolicy::for_dialect(Dialect::mhr());
        policy.error_silent = false;
        let channel = SimChannel::plain(
            Arc::clone(&service),
            Adversary::new(AdversaryConfig {
                archetype: crate::adversary::Archetype::Mitm,
                rules: vec![SpoofRule {
                    matcher: QnameMatch::Any,
                    forge: ForgedResponse::Drop,
                    ttl: 300,
                }],
                ..Default::default()
            })
            .unwrap(),
        );
        let mut agent = Agent::new(policy, channel, sandbox).unwrap();
        write_files(&agent.sandbox().files_dir(), &[("evil.bin", b"evil content")]);
        let path = agent.sandbox().files_dir().join("evil.bin");
        assert!(matches!(
            agent.scan_file(&path),
            Err(AgentError::ResolverTimeout)
        ));
    }

    #[test]
    fn directory_scan_partitions_by_registry() {
        let dir = tempfile::tempdir().unwrap();
        let dialect = Dialect::malwaredb();
        let service = service_for(dialect.clone(), &[b"m1", b"m2"]);
        let mut agent = agent_for(dialect, &service, dir.path());
        write_files(
            &agent.sandbox().files_dir(),
            &[
                ("a.txt", b"b1"),
                ("b.txt", b"m1"),
                ("c.txt", b"b2"),
                ("d.txt", b"m2"),
            ],
        );
        let report = agent.scan_directory().unwrap();
        assert_eq!(report.summary.scanned, 4);
        assert_eq!(report.summary.malicious, 2);
        assert_eq!(report.summary.benign, 2);
        assert_eq!(report.summary.alerts, 2);
        assert_eq!(report.summary.errors, 0);
        // The chk connectivity probe went out first.
        let jsonl = report.to_jsonl();
        assert_eq!(jsonl.lines().count(), 4);
    }

    #[test]
    fn malwaredb_connectivity_failure_aborts_when_not_silent() {
        let dir = tempfile::tempdir().unwrap();
        let dialect = Dialect::malwaredb();
        let service = service_for(dialect.clone(), &[]);
        let chk_qname = dialect.zone.prepend_label(b"chk").unwrap();
        let rules = vec![SpoofRule {
            matcher: QnameMatch::Exact(chk_qname),
            forge: ForgedResponse::Drop,
            ttl: 300,
        }];
        let sandbox = Sandbox::create(dir.path()).unwrap();
        let mut policy = AgentPolicy::for_dialect(dialect);
        policy.error_silent = false;
        let channel = SimChannel::plain(
            Arc::clone(&service),
            Adversary::new(AdversaryConfig {
                archetype: crate::adversary::Archetype::Mitm,
                rules,
                ..Default::default()
            })
            .unwrap(),
        );
        let mut agent = Agent::new(policy, channel, sandbox).unwrap();
        assert!(matches!(
            agent.scan_directory(),
            Err(AgentError::ConnectivityCheckFailed)
        ));
    }

    #[test]
    fn benign_gti_response_means_ignore() {
        let dir = tempfile::tempdir().unwrap();
        let dialect = Dialect::gti();
        let service = service_for(dialect.clone(), &[]);
        let mut agent = agent_for(dialect, &service, dir.path());
        write_files(&agent.sandbox().files_dir(), &[("ok.bin", b"benign")]);
        let path = agent.sandbox().files_dir().join("ok.bin");
        let outcome = agent.scan_file(&path).unwrap();
        assert!(outcome.benign_action());
        assert_eq!(
            outcome.response.as_ref().unwrap().first_a(),
            Some(GTI_BENIGN_ADDR)
        );
    }
}
