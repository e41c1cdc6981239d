//! Query encoding and response interpretation for the three documented
//! lookup dialects: Team Cymru's MHR, Tenable's MalwareDB and McAfee's
//! GTI, including the MalwareDB IPv4 report bit-decoder and the GTI
//! two-step deletion confirmation.

use std::fmt;
use std::net::Ipv4Addr;

use md5::Digest as _;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::wire::{DnsMessage, DnsName, Qtype, Rcode, ResourceRecord};

/// MHR answer that marks a registered-malicious hash.
pub const MHR_MALICIOUS_ADDR: Ipv4Addr = Ipv4Addr::new(127, 0, 0, 2);
/// The GTI deletion response: the only answer that (after a signed TXT
/// confirmation) triggers file deletion.
pub const GTI_DELETION_ADDR: Ipv4Addr = Ipv4Addr::new(127, 64, 8, 8);
/// Default benign GTI answer, the one spoofed in the silencing demo.
pub const GTI_BENIGN_ADDR: Ipv4Addr = Ipv4Addr::new(127, 64, 0, 128);
/// Canonical benign MalwareDB answers; both decode to zero flagged engines.
pub const MALWAREDB_BENIGN_ADDRS: [Ipv4Addr; 2] =
    [Ipv4Addr::new(40, 0, 0, 0), Ipv4Addr::new(48, 0, 0, 0)];
/// First label of the MalwareDB connectivity check query.
pub const MALWAREDB_CHK_LABEL: &str = "chk";
/// Base of the human-browsable MalwareDB report URL.
pub const MALWAREDB_REPORT_URL_BASE: &str = "http://malwaredb.nessus.org/malware/";

pub const MHR_ZONE: &str = "malware.hash.cymru.com";
pub const MALWAREDB_ZONE: &str = "l2.nessus.org";
pub const GTI_ZONE: &str = "avts.mcafee.com";
pub const GTI_ALTERNATE_ZONE: &str = "avqs.mcafee.com";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DialectError {
    #[error("signature scheme does not match the dialect's hash scheme")]
    SchemeMismatch,
    #[error("qtype not supported by this dialect")]
    UnsupportedQtype,
    #[error("invalid signature: {0}")]
    InvalidSignature(String),
    #[error("incoherent report: flagged engines exceed total or flag bits exceed flagged count")]
    IncoherentReport,
    #[error("malformed response: {0}")]
    MalformedResponse(String),
    #[error(transparent)]
    Wire(#[from] crate::wire::WireError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DialectKind {
    Mhr,
    MalwareDb,
    Gti,
}

impl fmt::Display for DialectKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DialectKind::Mhr => "mhr",
            DialectKind::MalwareDb => "malwaredb",
            DialectKind::Gti => "gti",
        })
    }
}

/// How a file's lookup label is derived from its bytes.
///
/// `Custom32Hex` models the vendor-internal signatures that never match a
/// plain content hash: MD5 over the file bytes followed by a per-dialect
/// salt. `Sha1` is truncated to the leading 128 bits so every signature
/// stays a 32-hex-character label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HashScheme {
    Md5,
    Sha1,
    Custom32Hex,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dialect {
    pub kind: DialectKind,
    pub zone: DnsName,
    pub hash_scheme: HashScheme,
}

impl Dialect {
    pub fn mhr() -> Self {
        Dialect {
            kind: DialectKind::Mhr,
            zone: DnsName::parse(MHR_ZONE).unwrap(),
            hash_scheme: HashScheme::Md5,
        }
    }

    pub fn malwaredb() -> Self {
        Dialect {
            kind: DialectKind::MalwareDb,
            zone: DnsName::parse(MALWAREDB_ZONE).unwrap(),
            hash_scheme: HashScheme::Custom32Hex,
        }
    }

    pub fn gti() -> Self {
        Dialect {
            kind: DialectKind::Gti,
            zone: DnsName::parse(GTI_ZONE).unwrap(),
            hash_scheme: HashScheme::Custom32Hex,
        }
    }

    pub fn new(kind: DialectKind, zone: DnsName, hash_scheme: HashScheme) -> Result<Self, DialectError> {
        let ok = match kind {
            DialectKind::Mhr => matches!(hash_scheme, HashScheme::Md5 | HashScheme::Sha1),
            DialectKind::MalwareDb | DialectKind::Gti => {
                matches!(hash_scheme, HashScheme::Custom32Hex)
            }
        };
        if !ok {
            return Err(DialectError::SchemeMismatch);
        }
        Ok(Dialect { kind, zone, hash_scheme })
    }

    /// Salt mixed into `Custom32Hex` signatures so they never equal the
    /// plain MD5 of the file content.
    fn custom_salt(&self) -> &'static [u8] {
        match self.kind {
            DialectKind::Gti => b"gti",
            DialectKind::MalwareDb => b"nessus",
            DialectKind::Mhr => b"",
        }
    }

    /// Compute the lookup signature for raw file bytes.
    pub fn signature_of(&self, bytes: &[u8]) -> Signature {
        Signature::compute(self.hash_scheme, self.custom_salt(), bytes)
    }
}

/// A file's lookup label: exactly 32 lowercase hex characters.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Signature {
    hex: String,
    scheme: HashScheme,
}

impl Signature {
    pub fn new(hex: &str, scheme: HashScheme) -> Result<Self, DialectError> {
        if hex.len() != 32 {
            return Err(DialectError::InvalidSignature(format!(
                "{} characters, expected 32",
                hex.len()
            )));
        }
        if !hex.bytes().all(|b| matches!(b, b'0'..=b'9' | b'a'..=b'f')) {
            return Err(DialectError::InvalidSignature(
                "characters outside [0-9a-f]".into(),
            ));
        }
        Ok(Signature { hex: hex.to_string(), scheme })
    }

    fn compute(scheme: HashScheme, salt: &[u8], bytes: &[u8]) -> Self {
        let hex = match scheme {
            HashScheme::Md5 => hex::encode(md5::Md5::digest(bytes)),
            // Truncated to 128 bits to keep labels at 32 hex characters.
            HashScheme::Sha1 => hex::encode(&sha1::Sha1::digest(bytes)[..16]),
            HashScheme::Custom32Hex => {
                let mut h = md5::Md5::new();
                h.update(bytes);
                h.update(salt);
                hex::encode(h.finalize())
            }
        };
        Signature { hex, scheme }
    }

    pub fn hex(&self) -> &str {
        &self.hex
    }

    pub fn scheme(&self) -> HashScheme {
        self.scheme
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.hex)
    }
}

impl fmt::Debug for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Signature({}, {:?})", self.hex, self.scheme)
    }
}

/// Engine results carried in a MalwareDB A answer.
///
/// Five-bit counts plus sixteen ordered engine flags; flag index 0 is the
/// most significant bit of the third octet. The decoder is total and
/// tolerant; only encoders reject incoherent combinations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NessusReport {
    pub engines_total: u8,
    pub engines_flagged: u8,
    pub engine_flags: u16,
}

impl NessusReport {
    pub fn new(engines_total: u8, engines_flagged: u8, engine_flags: u16) -> Result<Self, DialectError> {
        if engines_total > 31 || engines_flagged > 31 {
            return Err(DialectError::IncoherentReport);
        }
        Ok(NessusReport { engines_total, engines_flagged, engine_flags })
    }

    pub fn is_coherent(&self) -> bool {
        self.engines_total <= 31
            && self.engines_flagged <= self.engines_total
            && self.engine_flags.count_ones() as u8 <= self.engines_flagged
    }
}

/// Decode a MalwareDB answer address into its report fields.
///
/// The top three bits of the first octet are ignored; the remaining five
/// carry the number of engines that scanned the file, the low five bits of
/// the second octet the number that flagged it, and the last two octets
/// the per-engine flags.
pub fn decode_nessus_report(addr: Ipv4Addr) -> NessusReport {
    let [o1, o2, o3, o4] = addr.octets();
    NessusReport {
        engines_total: o1 & 0x1f,
        engines_flagged: o2 & 0x1f,
        engine_flags: u16::from_be_bytes([o3, o4]),
    }
}

/// Inverse of [`decode_nessus_report`] for coherent reports; `prefix_bits`
/// fills the three ignored MSBs of the first octet.
pub fn encode_nessus_report(report: &NessusReport, prefix_bits: u8) -> Result<Ipv4Addr, DialectError> {
    if prefix_bits > 0b111 || !report.is_coherent() {
        return Err(DialectError::IncoherentReport);
    }
    let [o3, o4] = report.engine_flags.to_be_bytes();
    Ok(Ipv4Addr::new(
        (prefix_bits << 5) | report.engines_total,
        report.engines_flagged,
        o3,
        o4,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictClass {
    Benign,
    Malicious,
    Unknown,
}

/// Interpretation of a lookup response.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub class: VerdictClass,
    /// Raw material the verdict was derived from.
    pub rcode: Rcode,
    pub answers: Vec<ResourceRecord>,
    pub report: Option<NessusReport>,
    /// GTI only: a deletion verdict must be confirmed over a signed TXT
    /// record before the agent may act on it.
    pub confirmation_required: bool,
}

impl Verdict {
    fn of(class: VerdictClass, response: &DnsMessage) -> Self {
        Verdict {
            class,
            rcode: response.rcode,
            answers: response.answers.clone(),
            report: None,
            confirmation_required: false,
        }
    }
}

/// Build the lookup query for a signature: the hex label prepended to the
/// dialect zone. TXT lookups are an MHR-only affordance.
pub fn build_lookup_query(
    dialect: &Dialect,
    sig: &Signature,
    qtype: Qtype,
    id: u16,
) -> Result<DnsMessage, DialectError> {
    if sig.scheme() != dialect.hash_scheme {
        return Err(DialectError::SchemeMismatch);
    }
    if qtype == Qtype::Txt && dialect.kind != DialectKind::Mhr {
        return Err(DialectError::UnsupportedQtype);
    }
    let qname = dialect.zone.prepend_label(sig.hex().as_bytes())?;
    Ok(DnsMessage::query(id, qname, qtype))
}

/// The additional TXT query GTI agents issue after a deletion response.
pub fn gti_confirmation_query(sig: &Signature, zone: &DnsName, id: u16) -> DnsMessage {
    let qname = zone
        .prepend_label(sig.hex().as_bytes())
        .expect("32-hex label always fits");
    DnsMessage::query(id, qname, Qtype::Txt)
}

/// Human-browsable report URL for a MalwareDB signature.
pub fn report_url(sig: &Signature) -> String {
    format!("{MALWAREDB_REPORT_URL_BASE}{}", sig.hex())
}

/// Interpret a lookup response under the dialect's rules.
pub fn parse_lookup_response(dialect: &Dialect, response: &DnsMessage) -> Result<Verdict, DialectError> {
    match dialect.kind {
        DialectKind::Mhr => {
            if response.rcode == Rcode::NxDomain {
                return Ok(Verdict::of(VerdictClass::Benign, response));
            }
            match response.first_a() {
                Some(addr) if addr == MHR_MALICIOUS_ADDR => {
                    Ok(Verdict::of(VerdictClass::Malicious, response))
                }
                _ => Ok(Verdict::of(VerdictClass::Unknown, response)),
            }
        }
        DialectKind::MalwareDb => {
            let addr = response.first_a().ok_or_else(|| {
                DialectError::MalformedResponse("MalwareDB response without an A record".into())
            })?;
            let report = decode_nessus_report(addr);
            let class = if report.engines_flagged == 0 {
                VerdictClass::Benign
            } else {
                VerdictClass::Malicious
            };
            let mut verdict = Verdict::of(class, response);
            verdict.report = Some(report);
            Ok(verdict)
        }
        DialectKind::Gti => {
            let addr = response.first_a().ok_or_else(|| {
                DialectError::MalformedResponse("GTI response without an A record".into())
            })?;
            if addr == GTI_DELETION_ADDR {
                let mut verdict = Verdict::of(VerdictClass::Malicious, response);
                verdict.confirmation_required = true;
                Ok(verdict)
            } else {
                Ok(Verdict::of(VerdictClass::Benign, response))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wire::make_response;
    use proptest::prelude::*;

    fn sig(hex: &str, scheme: HashScheme) -> Signature {
        Signature::new(hex, scheme).unwrap()
    }

    fn a_response(dialect: &Dialect, qtype: Qtype, addr: Ipv4Addr) -> DnsMessage {
        let s = Signature::compute(dialect.hash_scheme, b"", b"file");
        let q = build_lookup_query(dialect, &s, qtype, 9).unwrap();
        make_response(
            &q,
            vec![ResourceRecord::a(q.qname().clone(), 300, addr)],
            Rcode::NoError,
        )
        .unwrap()
    }

    #[test]
    fn signature_rejects_bad_input() {
        assert!(Signature::new("b48eb0932dfb629ce70d7142ceb74a13", HashScheme::Custom32Hex).is_ok());
        assert!(Signature::new("B48EB0932DFB629CE70D7142CEB74A13", HashScheme::Custom32Hex).is_err());
        assert!(Signature::new("b48eb0932dfb629ce70d7142ceb74a1", HashScheme::Custom32Hex).is_err());
        assert!(Signature::new("b48eb0932dfb629ce70d7142ceb74a1g", HashScheme::Custom32Hex).is_err());
    }

    #[test]
    fn lookup_qname_prepends_label_to_zone() {
        let q = build_lookup_query(
            &Dialect::malwaredb(),
            &sig("b48eb0932dfb629ce70d7142ceb74a13", HashScheme::Custom32Hex),
            Qtype::A,
            0,
        )
        .unwrap();
        assert_eq!(
            q.qname().presentation(),
            "b48eb0932dfb629ce70d7142ceb74a13.l2.nessus.org."
        );

        let md5 = sig("d41d8cd98f00b204e9800998ecf8427e", HashScheme::Md5);
        let q = build_lookup_query(&Dialect::mhr(), &md5, Qtype::A, 0).unwrap();
        assert_eq!(
            q.qname().presentation(),
            "d41d8cd98f00b204e9800998ecf8427e.malware.hash.cymru.com."
        );
    }

    #[test]
    fn scheme_and_qtype_mismatches_rejected() {
        let custom = sig("d41d8cd98f00b204e9800998ecf8427e", HashScheme::Custom32Hex);
        assert_eq!(
            build_lookup_query(&Dialect::mhr(), &custom, Qtype::A, 0).unwrap_err(),
            DialectError::SchemeMismatch
        );
        let gti_sig = sig("d41d8cd98f00b204e9800998ecf8427e", HashScheme::Custom32Hex);
        assert_eq!(
            build_lookup_query(&Dialect::gti(), &gti_sig, Qtype::Txt, 0).unwrap_err(),
            DialectError::UnsupportedQtype
        );
        // TXT is fine for MHR.
        let md5 = sig("d41d8cd98f00b204e9800998ecf8427e", HashScheme::Md5);
        assert!(build_lookup_query(&Dialect::mhr(), &md5, Qtype::Txt, 0).is_ok());
    }

    #[test]
    fn nessus_decode_known_vectors() {
        // The address the paper's attacker spoofs in the false-alert demo.
        let r = decode_nessus_report(Ipv4Addr::new(48, 5, 132, 128));
        assert_eq!(r, NessusReport { engines_total: 16, engines_flagged: 5, engine_flags: 0x8480 });
        assert_eq!(
            decode_nessus_report(Ipv4Addr::new(0, 0, 0, 0)),
            NessusReport { engines_total: 0, engines_flagged: 0, engine_flags: 0 }
        );
        assert_eq!(
            decode_nessus_report(Ipv4Addr::new(255, 255, 255, 255)),
            NessusReport { engines_total: 31, engines_flagged: 31, engine_flags: 0xffff }
        );
        assert_eq!(
            decode_nessus_report(Ipv4Addr::new(48, 0, 0, 0)),
            NessusReport { engines_total: 16, engines_flagged: 0, engine_flags: 0 }
        );
    }

    #[test]
    fn nessus_encode_known_vectors() {
        let r = NessusReport::new(16, 5, 0x8480).unwrap();
        assert_eq!(encode_nessus_report(&r, 0b001).unwrap(), Ipv4Addr::new(48, 5, 132, 128));
        let benign = NessusReport::new(8, 0, 0).unwrap();
        assert_eq!(encode_nessus_report(&benign, 0b001).unwrap(), Ipv4Addr::new(40, 0, 0, 0));
        let incoherent = NessusReport::new(3, 5, 0).unwrap();
        assert_eq!(
            encode_nessus_report(&incoherent, 0).unwrap_err(),
            DialectError::IncoherentReport
        );
        // popcount above the flagged count is incoherent too.
        let flags_heavy = NessusReport::new(16, 1, 0x0003).unwrap();
        assert_eq!(
            encode_nessus_report(&flags_heavy, 0).unwrap_err(),
            DialectError::IncoherentReport
        );
    }

    #[test]
    fn mhr_verdicts() {
        let dialect = Dialect::mhr();
        let s = dialect.signature_of(b"file");
        let q = build_lookup_query(&dialect, &s, Qtype::A, 1).unwrap();
        let nx = make_response(&q, vec![], Rcode::NxDomain).unwrap();
        assert_eq!(parse_lookup_response(&dialect, &nx).unwrap().class, VerdictClass::Benign);

        let hit = a_response(&dialect, Qtype::A, MHR_MALICIOUS_ADDR);
        assert_eq!(parse_lookup_response(&dialect, &hit).unwrap().class, VerdictClass::Malicious);

        let odd = a_response(&dialect, Qtype::A, Ipv4Addr::new(127, 0, 0, 3));
        assert_eq!(parse_lookup_response(&dialect, &odd).unwrap().class, VerdictClass::Unknown);
    }

    #[test]
    fn gti_verdicts() {
        let dialect = Dialect::gti();
        let deletion = a_response(&dialect, Qtype::A, GTI_DELETION_ADDR);
        let v = parse_lookup_response(&dialect, &deletion).unwrap();
        assert_eq!(v.class, VerdictClass::Malicious);
        assert!(v.confirmation_required);

        let benign = a_response(&dialect, Qtype::A, GTI_BENIGN_ADDR);
        let v = parse_lookup_response(&dialect, &benign).unwrap();
        assert_eq!(v.class, VerdictClass::Benign);
        assert!(!v.confirmation_required);
    }

    #[test]
    fn malwaredb_verdicts() {
        let dialect = Dialect::malwaredb();
        let benign = a_response(&dialect, Qtype::A, Ipv4Addr::new(48, 0, 0, 0));
        let v = parse_lookup_response(&dialect, &benign).unwrap();
        assert_eq!(v.class, VerdictClass::Benign);
        assert_eq!(v.report.unwrap(), NessusReport { engines_total: 16, engines_flagged: 0, engine_flags: 0 });

        let hit = a_response(&dialect, Qtype::A, Ipv4Addr::new(48, 5, 132, 128));
        let v = parse_lookup_response(&dialect, &hit).unwrap();
        assert_eq!(v.class, VerdictClass::Malicious);
        assert_eq!(v.report.unwrap().engines_flagged, 5);

        let s = dialect.signature_of(b"file");
        let q = build_lookup_query(&dialect, &s, Qtype::A, 1).unwrap();
        let nx = make_response(&q, vec![], Rcode::NxDomain).unwrap();
        assert!(matches!(
            parse_lookup_response(&dialect, &nx),
            Err(DialectError::MalformedResponse(_))
        ));
    }

    #[test]
    fn confirmation_query_is_deterministic() {
        let zone = DnsName::parse(GTI_ZONE).unwrap();
        let s = sig("b48eb0932dfb629ce70d7142ceb74a13", HashScheme::Custom32Hex);
        let q1 = gti_confirmation_query(&s, &zone, 5);
        let q2 = gti_confirmation_query(&s, &zone, 5);
        assert_eq!(q1, q2);
        assert_eq!(q1.question.qtype, Qtype::Txt);
        assert_eq!(q1.qname().presentation(), "b48eb0932dfb629ce70d7142ceb74a13.avts.mcafee.com.");
    }

    #[test]
    fn report_url_appends_hash() {
        let s = sig("b48eb0932dfb629ce70d7142ceb74a13", HashScheme::Custom32Hex);
        assert_eq!(report_url(&s), "http://malwaredb.nessus.org/malware/b48eb0932dfb629ce70d7142ceb74a13");
        let zero = sig("00000000000000000000000000000000", HashScheme::Custom32Hex);
        assert_eq!(report_url(&zero), "http://malwaredb.nessus.org/malware/00000000000000000000000000000000");
    }

    #[test]
    fn custom_scheme_differs_from_plain_md5() {
        let content = b"some portable executable";
        let plain = hex::encode(md5::Md5::digest(content));
        assert_ne!(Dialect::gti().signature_of(content).hex(), plain);
        assert_ne!(Dialect::malwaredb().signature_of(content).hex(), plain);
        assert_ne!(
            Dialect::gti().signature_of(content).hex(),
            Dialect::malwaredb().signature_of(content).hex()
        );
        assert_eq!(Dialect::mhr().signature_of(content).hex(), plain);
    }

    #[test]
    fn md5_of_empty_input_is_the_published_constant() {
        assert_eq!(
            Dialect::mhr().signature_of(b"").hex(),
            "d41d8cd98f00b204e9800998ecf8427e"
        );
    }

    fn arb_coherent_report() -> impl Strategy<Value = NessusReport> {
        (0u8..=31).prop_flat_map(|total| {
            (Just(total), 0u8..=total).prop_flat_map(|(total, flagged)| {
                proptest::collection::vec(0u8..16, 0..=flagged as usize).prop_map(
                    move |positions| {
                        let mut flags = 0u16;
                        let mut used = 0u8;
                        for p in positions {
                            let bit = 1u16 << (15 - p);
                            if flags & bit == 0 && used < flagged {
                                flags |= bit;
                                used += 1;
                            }
                        }
                        NessusReport { engines_total: total, engines_flagged: flagged, engine_flags: flags }
                    },
                )
            })
        })
    }

    proptest! {
        #[test]
        fn decode_encode_identity_on_coherent_reports(
            report in arb_coherent_report(),
            prefix in 0u8..8,
        ) {
            let addr = encode_nessus_report(&report, prefix).unwrap();
            prop_assert_eq!(decode_nessus_report(addr), report);
            prop_assert_eq!(addr.octets()[0] >> 5, prefix);
        }

        #[test]
        fn encode_decode_identity_on_zero_prefix_octet2(o1_low in 0u8..32, o3 in any::<u8>(), o4 in any::<u8>()) {
            // Addresses whose decoded report is coherent and whose ignored
            // bits are zero re-encode to themselves bit for bit.
            for flagged in 0u8..=o1_low {
                let addr = Ipv4Addr::new(o1_low, flagged, o3, o4);
                let report = decode_nessus_report(addr);
                if report.is_coherent() {
                    prop_assert_eq!(encode_nessus_report(&report, 0).unwrap(), addr);
                }
            }
        }

        #[test]
        fn qnames_are_static_per_file_and_dialect(content in proptest::collection::vec(any::<u8>(), 0..128)) {
            for dialect in [Dialect::mhr(), Dialect::malwaredb(), Dialect::gti()] {
                let s1 = dialect.signature_of(&content);
                let s2 = dialect.signature_of(&content);
                let q1 = build_lookup_query(&dialect, &s1, Qtype::A, 1).unwrap();
                let q2 = build_lookup_query(&dialect, &s2, Qtype::A, 1).unwrap();
                prop_assert_eq!(q1.qname().presentation(), q2.qname().presentation());
            }
        }

        #[test]
        fn mhr_nxdomain_is_benign_for_every_signature(content in proptest::collection::vec(any::<u8>(), 0..64)) {
            let dialect = Dialect::mhr();
            let s = dialect.signature_of(&content);
            let q = build_lookup_query(&dialect, &s, Qtype::A, 0).unwrap();
            let nx = make_response(&q, vec![], Rcode::NxDomain).unwrap();
            prop_assert_eq!(parse_lookup_response(&dialect, &nx).unwrap().class, VerdictClass::Benign);
        }
    }
}
