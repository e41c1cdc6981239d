//! Minimal plain-text DNS subset: names, messages and the RFC 1035 wire
//! codec every other module exchanges.
//!
//! Only qtypes A and TXT and rcodes NoError/NxDomain/ServFail exist here;
//! that is the entire vocabulary of the simulated lookup traffic. Encoded
//! messages never use compression pointers, but the decoder follows them
//! (backward references only) so datagrams from real resolvers still parse.

use std::fmt;
use std::net::Ipv4Addr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Classic DNS UDP payload cap; encoding a larger message is an error.
pub const MAX_UDP_PAYLOAD: usize = 512;
/// Maximum length of a single label in bytes.
pub const MAX_LABEL_LEN: usize = 63;
/// Maximum presentation length of a name, trailing dot included.
pub const MAX_NAME_LEN: usize = 255;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WireError {
    #[error("invalid name: {0}")]
    InvalidName(String),
    #[error("message truncated")]
    Truncated,
    #[error("bad compression pointer (loop or forward reference)")]
    BadPointer,
    #[error("unsupported record type {0}")]
    UnsupportedType(u16),
    #[error("not a query")]
    NotAQuery,
    #[error("encoded message is {0} bytes, above the {MAX_UDP_PAYLOAD}-byte cap")]
    TooLarge(usize),
    #[error("malformed message: {0}")]
    Malformed(String),
}

/// A domain name as an ordered list of labels, normalized to lowercase
/// ASCII on construction. Label and total-length limits are enforced
/// identically at construction, encode and decode time.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DnsName {
    labels: Vec<Vec<u8>>,
}

impl DnsName {
    /// Parse a presentation-form name such as `"a.example."`; the trailing
    /// dot is optional. The root name (empty or `"."`) is rejected.
    pub fn parse(s: &str) -> Result<Self, WireError> {
        let trimmed = s.strip_suffix('.').unwrap_or(s);
        if trimmed.is_empty() {
            return Err(WireError::InvalidName("empty name".into()));
        }
        let labels = trimmed
            .split('.')
            .map(|l| l.as_bytes().to_vec())
            .collect::<Vec<_>>();
        Self::from_labels(labels)
    }

    /// Build a name from raw labels.
    pub fn from_labels(labels: Vec<Vec<u8>>) -> Result<Self, WireError> {
        if labels.is_empty() {
            return Err(WireError::InvalidName("empty name".into()));
        }
        let mut out = Vec::with_capacity(labels.len());
        for label in labels {
            if label.is_empty() || label.len() > MAX_LABEL_LEN {
                return Err(WireError::InvalidName(format!(
                    "label length {} outside 1..={MAX_LABEL_LEN}",
                    label.len()
                )));
            }
            for &b in &label {
                // ASCII graphic, no dots: keeps presentation form lossless.
                if !(0x21..=0x7e).contains(&b) || b == b'.' {
                    return Err(WireError::InvalidName(format!(
                        "label byte 0x{b:02x} outside printable ASCII"
                    )));
                }
            }
            out.push(label.to_ascii_lowercase());
        }
        let presentation_len: usize = out.iter().map(|l| l.len() + 1).sum();
        if presentation_len > MAX_NAME_LEN {
            return Err(WireError::InvalidName(format!(
                "presentation length {presentation_len} above {MAX_NAME_LEN}"
            )));
        }
        Ok(DnsName { labels: out })
    }

    pub fn labels(&self) -> &[Vec<u8>] {
        &self.labels
    }

    /// Leftmost label, as UTF-8 (labels are printable ASCII by construction).
    pub fn first_label(&self) -> &str {
        std::str::from_utf8(&self.labels[0]).expect("labels are ASCII")
    }

    /// True when `self` equals `suffix` or ends with `suffix`'s labels.
    pub fn ends_with(&self, suffix: &DnsName) -> bool {
        let n = self.labels.len();
        let m = suffix.labels.len();
        n >= m && self.labels[n - m..] == suffix.labels[..]
    }

    /// New name with one extra label on the left.
    pub fn prepend_label(&self, label: &[u8]) -> Result<Self, WireError> {
        let mut labels = Vec::with_capacity(self.labels.len() + 1);
        labels.push(label.to_vec());
        labels.extend(self.labels.iter().cloned());
        Self::from_labels(labels)
    }

    /// Presentation form with trailing dot, e.g. `"a.example."`.
    pub fn presentation(&self) -> String {
        let mut s = String::new();
        for l in &self.labels {
            s.push_str(std::str::from_utf8(l).expect("labels are ASCII"));
            s.push('.');
        }
        s
    }
}

impl fmt::Display for DnsName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.presentation())
    }
}

impl fmt::Debug for DnsName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DnsName({self})")
    }
}

impl std::str::FromStr for DnsName {
    type Err = WireError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}

impl Serialize for DnsName {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        ser.serialize_str(&self.presentation())
    }
}

impl<'de> Deserialize<'de> for DnsName {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let s = String::deserialize(de)?;
        DnsName::parse(&s).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Qtype {
    A,
    Txt,
}

impl Qtype {
    pub fn code(self) -> u16 {
        match self {
            Qtype::A => 1,
            Qtype::Txt => 16,
        }
    }

    pub fn from_code(code: u16) -> Result<Self, WireError> {
        match code {
            1 => Ok(Qtype::A),
            16 => Ok(Qtype::Txt),
            other => Err(WireError::UnsupportedType(other)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rcode {
    NoError,
    NxDomain,
    ServFail,
}

impl Rcode {
    pub fn code(self) -> u8 {
        match self {
            Rcode::NoError => 0,
            Rcode::ServFail => 2,
            Rcode::NxDomain => 3,
        }
    }

    pub fn from_code(code: u8) -> Result<Self, WireError> {
        match code {
            0 => Ok(Rcode::NoError),
            2 => Ok(Rcode::ServFail),
            3 => Ok(Rcode::NxDomain),
            other => Err(WireError::Malformed(format!("unsupported rcode {other}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Question {
    pub name: DnsName,
    pub qtype: Qtype,
}

/// Record payload. A is exactly four bytes; each TXT character-string is
/// limited to 255 bytes (checked on construction and encode).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RData {
    A(Ipv4Addr),
    Txt(Vec<Vec<u8>>),
}

impl RData {
    pub fn txt_from_str(s: &str) -> Result<Self, WireError> {
        let bytes = s.as_bytes();
        if bytes.len() > 255 {
            return Err(WireError::Malformed(
                "TXT character-string above 255 bytes".into(),
            ));
        }
        Ok(RData::Txt(vec![bytes.to_vec()]))
    }

    pub fn rtype(&self) -> Qtype {
        match self {
            RData::A(_) => Qtype::A,
            RData::Txt(_) => Qtype::Txt,
        }
    }

    /// Wire RDATA bytes (A octets; TXT as length-prefixed strings).
    pub fn wire_bytes(&self) -> Result<Vec<u8>, WireError> {
        match self {
            RData::A(addr) => Ok(addr.octets().to_vec()),
            RData::Txt(strings) => {
                let mut out = Vec::new();
                if strings.is_empty() {
                    return Err(WireError::Malformed("TXT with no character-string".into()));
                }
                for s in strings {
                    if s.len() > 255 {
                        return Err(WireError::Malformed(
                            "TXT character-string above 255 bytes".into(),
                        ));
                    }
                    out.push(s.len() as u8);
                    out.extend_from_slice(s);
                }
                Ok(out)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceRecord {
    pub name: DnsName,
    pub ttl: u32,
    pub rdata: RData,
}

impl ResourceRecord {
    pub fn a(name: DnsName, ttl: u32, addr: Ipv4Addr) -> Self {
        ResourceRecord {
            name,
            ttl,
            rdata: RData::A(addr),
        }
    }

    pub fn txt(name: DnsName, ttl: u32, payload: &str) -> Result<Self, WireError> {
        Ok(ResourceRecord {
            name,
            ttl,
            rdata: RData::txt_from_str(payload)?,
        })
    }
}

/// A decoded DNS packet: the unit every component exchanges.
///
/// Invariants: a query has `is_response == false`, rcode NoError and no
/// answers; a response echoes its query's id and question. `ServFail` and
/// `NxDomain` responses carry zero answers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DnsMessage {
    pub id: u16,
    pub is_response: bool,
    pub rcode: Rcode,
    pub question: Question,
    pub answers: Vec<ResourceRecord>,
}

impl DnsMessage {
    pub fn query(id: u16, name: DnsName, qtype: Qtype) -> Self {
        DnsMessage {
            id,
            is_response: false,
            rcode: Rcode::NoError,
            question: Question { name, qtype },
            answers: Vec::new(),
        }
    }

    pub fn qname(&self) -> &DnsName {
        &self.question.name
    }

    /// First A answer, if any.
    pub fn first_a(&self) -> Option<Ipv4Addr> {
        self.answers.iter().find_map(|rr| match rr.rdata {
            RData::A(addr) => Some(addr),
            _ => None,
        })
    }

    /// First TXT answer's character-strings concatenated, if any.
    pub fn first_txt(&self) -> Option<String> {
        self.answers.iter().find_map(|rr| match &rr.rdata {
            RData::Txt(strings) => Some(
                strings
                    .iter()
                    .map(|s| String::from_utf8_lossy(s).into_owned())
                    .collect::<String>(),
            ),
            _ => None,
        })
    }

    fn check_invariants(&self) -> Result<(), WireError> {
        if !self.is_response {
            if !self.answers.is_empty() {
                return Err(WireError::Malformed("query with answers".into()));
            }
            if self.rcode != Rcode::NoError {
                return Err(WireError::Malformed("query with non-NoError rcode".into()));
            }
        } else if self.rcode != Rcode::NoError && !self.answers.is_empty() {
            return Err(WireError::Malformed(
                "error response must carry zero answers".into(),
            ));
        }
        Ok(())
    }
}

/// Build a response to `query` echoing its id and question.
pub fn make_response(
    query: &DnsMessage,
    answers: Vec<ResourceRecord>,
    rcode: Rcode,
) -> Result<DnsMessage, WireError> {
    if query.is_response {
        return Err(WireError::NotAQuery);
    }
    let msg = DnsMessage {
        id: query.id,
        is_response: true,
        rcode,
        question: query.question.clone(),
        answers,
    };
    msg.check_invariants()?;
    Ok(msg)
}

const FLAG_QR: u16 = 0x8000;
const FLAG_RD: u16 = 0x0100;
const FLAG_RA: u16 = 0x0080;
const CLASS_IN: u16 = 1;

fn put_u16(buf: &mut Vec<u8>, v: u16) {
    buf.extend_from_slice(&v.to_be_bytes());
}

fn encode_name(buf: &mut Vec<u8>, name: &DnsName) {
    for label in name.labels() {
        buf.push(label.len() as u8);
        buf.extend_from_slice(label);
    }
    buf.push(0);
}

/// RFC 1035 framing. Deterministic: identical messages produce identical
/// bytes. Never emits compression pointers.
pub fn encode_message(msg: &DnsMessage) -> Result<Vec<u8>, WireError> {
    msg.check_invariants()?;
    let mut buf = Vec::with_capacity(64);
    put_u16(&mut buf, msg.id);
    let flags = if msg.is_response {
        FLAG_QR | FLAG_RD | FLAG_RA | msg.rcode.code() as u16
    } else {
        FLAG_RD
    };
    put_u16(&mut buf, flags);
    put_u16(&mut buf, 1); // QDCOUNT
    put_u16(&mut buf, msg.answers.len() as u16);
    put_u16(&mut buf, 0); // NSCOUNT
    put_u16(&mut buf, 0); // ARCOUNT
    encode_name(&mut buf, &msg.question.name);
    put_u16(&mut buf, msg.question.qtype.code());
    put_u16(&mut buf, CLASS_IN);
    for rr in &msg.answers {
        encode_name(&mut buf, &rr.name);
        put_u16(&mut buf, rr.rdata.rtype().code());
        put_u16(&mut buf, CLASS_IN);
        buf.extend_from_slice(&rr.ttl.to_be_bytes());
        let rdata = rr.rdata.wire_bytes()?;
        put_u16(&mut buf, rdata.len() as u16);
        buf.extend_from_slice(&rdata);
    }
    if buf.len() > MAX_UDP_PAYLOAD {
        return Err(WireError::TooLarge(buf.len()));
    }
    Ok(buf)
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn u8(&mut self) -> Result<u8, WireError> {
        let b = *self.buf.get(self.pos).ok_or(WireError::Truncated)?;
        self.pos += 1;
        Ok(b)
    }

    fn u16(&mut self) -> Result<u16, WireError> {
        Ok(u16::from_be_bytes([self.u8()?, self.u8()?]))
    }

    fn u32(&mut self) -> Result<u32, WireError> {
        Ok(u32::from_be_bytes([
            self.u8()?,
            self.u8()?,
            self.u8()?,
            self.u8()?,
        ]))
    }

    fn bytes(&mut self, n: usize) -> Result<&'a [u8], WireError> {
        if self.pos + n > self.buf.len() {
            return Err(WireError::Truncated);
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    /// Read a possibly-compressed name. Pointers must reference strictly
    /// earlier offsets; self-references and forward references are errors.
    fn name(&mut self) -> Result<DnsName, WireError> {
        let mut labels: Vec<Vec<u8>> = Vec::new();
        let mut pos = self.pos;
        let mut jumped = false;
        let mut jumps = 0usize;
        loop {
            let len = *self.buf.get(pos).ok_or(WireError::Truncated)? as usize;
            if len & 0xc0 == 0xc0 {
                let lo = *self.buf.get(pos + 1).ok_or(WireError::Truncated)? as usize;
                let target = ((len & 0x3f) << 8) | lo;
                if target >= pos {
                    return Err(WireError::BadPointer);
                }
                jumps += 1;
                if jumps > 32 {
                    return Err(WireError::BadPointer);
                }
                if !jumped {
                    self.pos = pos + 2;
                    jumped = true;
                }
                pos = target;
            } else if len & 0xc0 != 0 {
                return Err(WireError::Malformed(format!(
                    "reserved label length byte 0x{len:02x}"
                )));
            } else if len == 0 {
                if !jumped {
                    self.pos = pos + 1;
                }
                break;
            } else {
                if pos + 1 + len > self.buf.len() {
                    return Err(WireError::Truncated);
                }
                labels.push(self.buf[pos + 1..pos + 1 + len].to_vec());
                pos += 1 + len;
            }
        }
        DnsName::from_labels(labels)
    }

    fn skip_name(&mut self) -> Result<(), WireError> {
        // Used for authority/additional records we do not model.
        self.name().map(|_| ())
    }
}

/// Parse RFC 1035 bytes into a message. Strict about the subset: record
/// types outside {A, TXT} in the answer section fail with
/// `UnsupportedType`; authority and additional records are skipped.
pub fn decode_message(bytes: &[u8]) -> Result<DnsMessage, WireError> {
    if bytes.len() < 12 {
        return Err(WireError::Truncated);
    }
    let mut r = Reader { buf: bytes, pos: 0 };
    let id = r.u16()?;
    let flags = r.u16()?;
    let qdcount = r.u16()?;
    let ancount = r.u16()?;
    let nscount = r.u16()?;
    let arcount = r.u16()?;
    let is_response = flags & FLAG_QR != 0;
    let opcode = (flags >> 11) & 0xf;
    if opcode != 0 {
        return Err(WireError::Malformed(format!("unsupported opcode {opcode}")));
    }
    let rcode = Rcode::from_code((flags & 0xf) as u8)?;
    if qdcount != 1 {
        return Err(WireError::Malformed(format!(
            "expected exactly one question, got {qdcount}"
        )));
    }
    let qname = r.name()?;
    let qtype = Qtype::from_code(r.u16()?)?;
    let qclass = r.u16()?;
    if qclass != CLASS_IN {
        return Err(WireError::Malformed(format!("unsupported class {qclass}")));
    }
    let mut answers = Vec::with_capacity(ancount as usize);
    for _ in 0..ancount {
        let name = r.name()?;
        let rtype_code = r.u16()?;
        let rtype = Qtype::from_code(rtype_code)?;
        let class = r.u16()?;
        if class != CLASS_IN {
            return Err(WireError::Malformed(format!("unsupported class {class}")));
        }
        let ttl = r.u32()?;
        let rdlen = r.u16()? as usize;
        let rdata_bytes = r.bytes(rdlen)?;
        let rdata = match rtype {
            Qtype::A => {
                if rdlen != 4 {
                    return Err(WireError::Malformed(format!("A rdata of {rdlen} bytes")));
                }
                RData::A(Ipv4Addr::new(
                    rdata_bytes[0],
                    rdata_bytes[1],
                    rdata_bytes[2],
                    rdata_bytes[3],
                ))
            }
            Qtype::Txt => {
                let mut strings = Vec::new();
                let mut p = 0usize;
                while p < rdlen {
                    let slen = rdata_bytes[p] as usize;
                    p += 1;
                    if p + slen > rdlen {
                        return Err(WireError::Truncated);
                    }
                    strings.push(rdata_bytes[p..p + slen].to_vec());
                    p += slen;
                }
                if strings.is_empty() {
                    return Err(WireError::Malformed("TXT with no character-string".into()));
                }
                RData::Txt(strings)
            }
        };
        answers.push(ResourceRecord { name, ttl, rdata });
    }
    // Tolerate but discard sections outside the model.
    for _ in 0..(nscount as usize + arcount as usize) {
        r.skip_name()?;
        let _rtype = r.u16()?;
        let _class = r.u16()?;
        let _ttl = r.u32()?;
        let rdlen = r.u16()? as usize;
        r.bytes(rdlen)?;
    }
    let msg = DnsMessage {
        id,
        is_response,
        rcode,
        question: Question { name: qname, qtype },
        answers,
    };
    msg.check_invariants()?;
    Ok(msg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn name(s: &str) -> DnsName {
        DnsName::parse(s).unwrap()
    }

    #[test]
    fn query_framing_matches_rfc1035() {
        let q = DnsMessage::query(0, name("a.example."), Qtype::A);
        let bytes = encode_message(&q).unwrap();
        let expected = [
            0x00, 0x00, // id
            0x01, 0x00, // flags: RD
            0x00, 0x01, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, // counts
            0x01, 0x61, 0x07, 0x65, 0x78, 0x61, 0x6d, 0x70, 0x6c, 0x65, 0x00, // QNAME
            0x00, 0x01, // QTYPE A
            0x00, 0x01, // QCLASS IN
        ];
        assert_eq!(bytes, expected);
    }

    #[test]
    fn label_of_64_bytes_is_invalid() {
        let label = "a".repeat(64);
        assert!(matches!(
            DnsName::parse(&format!("{label}.example.")),
            Err(WireError::InvalidName(_))
        ));
    }

    #[test]
    fn name_presentation_cap_enforced() {
        // 4 labels of 63 bytes -> 256 presentation chars, above the cap.
        let long = ["a".repeat(63), "b".repeat(63), "c".repeat(63), "d".repeat(63)].join(".");
        assert!(matches!(
            DnsName::parse(&long),
            Err(WireError::InvalidName(_))
        ));
        // 3x63 + 62 + dots = 255: allowed.
        let ok = ["a".repeat(63), "b".repeat(63), "c".repeat(63), "d".repeat(62)].join(".");
        assert_eq!(DnsName::parse(&ok).unwrap().presentation().len(), 255);
    }

    #[test]
    fn truncated_header_rejected() {
        assert_eq!(decode_message(&[0u8; 11]), Err(WireError::Truncated));
    }

    #[test]
    fn self_referencing_pointer_rejected() {
        // Header + question whose first byte is a pointer to itself.
        let mut bytes = vec![0, 0, 0x01, 0, 0, 1, 0, 0, 0, 0, 0, 0];
        bytes.extend_from_slice(&[0xc0, 12]); // points at offset 12 = itself
        bytes.extend_from_slice(&[0, 1, 0, 1]);
        assert_eq!(decode_message(&bytes), Err(WireError::BadPointer));
    }

    #[test]
    fn forward_pointer_rejected() {
        let mut bytes = vec![0, 0, 0x01, 0, 0, 1, 0, 0, 0, 0, 0, 0];
        bytes.extend_from_slice(&[0xc0, 40]);
        bytes.extend_from_slice(&[0, 1, 0, 1]);
        assert_eq!(decode_message(&bytes), Err(WireError::BadPointer));
    }

    #[test]
    fn backward_pointer_followed() {
        // Query for x.zone.tld where the answer name is a pointer to the
        // question name at offset 12.
        let q = DnsMessage::query(7, name("x.zone.tld"), Qtype::A);
        let mut bytes = encode_message(&q).unwrap();
        bytes[3] |= 0x80; // mark as response (QR already at byte 2)
        bytes[2] |= 0x80;
        bytes[7] = 1; // ANCOUNT = 1
        bytes.extend_from_slice(&[0xc0, 12]); // name = pointer to QNAME
        bytes.extend_from_slice(&[0, 1, 0, 1]); // A, IN
        bytes.extend_from_slice(&[0, 0, 1, 44]); // TTL 300
        bytes.extend_from_slice(&[0, 4, 127, 0, 0, 2]);
        let msg = decode_message(&bytes).unwrap();
        assert!(msg.is_response);
        assert_eq!(msg.answers.len(), 1);
        assert_eq!(msg.answers[0].name, name("x.zone.tld"));
        assert_eq!(msg.first_a(), Some(Ipv4Addr::new(127, 0, 0, 2)));
    }

    #[test]
    fn unsupported_answer_type_rejected() {
        let q = DnsMessage::query(7, name("x.zone.tld"), Qtype::A);
        let mut bytes = encode_message(&q).unwrap();
        bytes[2] |= 0x80;
        bytes[7] = 1;
        bytes.extend_from_slice(&[0xc0, 12]);
        bytes.extend_from_slice(&[0, 28, 0, 1]); // AAAA
        bytes.extend_from_slice(&[0, 0, 1, 44]);
        bytes.extend_from_slice(&[0, 4, 0, 0, 0, 0]);
        assert_eq!(decode_message(&bytes), Err(WireError::UnsupportedType(28)));
    }

    #[test]
    fn make_response_echoes_query() {
        let q = DnsMessage::query(0x1234, name("h.zone.tld"), Qtype::A);
        let r = make_response(
            &q,
            vec![ResourceRecord::a(
                q.qname().clone(),
                300,
                Ipv4Addr::new(127, 0, 0, 2),
            )],
            Rcode::NoError,
        )
        .unwrap();
        assert_eq!(r.id, 0x1234);
        assert_eq!(r.question, q.question);
        assert!(r.is_response);

        let nx = make_response(&q, vec![], Rcode::NxDomain).unwrap();
        assert!(nx.answers.is_empty());

        assert_eq!(make_response(&r, vec![], Rcode::NoError), Err(WireError::NotAQuery));
    }

    #[test]
    fn oversized_message_rejected() {
        let q = DnsMessage::query(1, name("n.zone.tld"), Qtype::Txt);
        let strings = vec![vec![b'x'; 255], vec![b'y'; 255], vec![b'z'; 100]];
        let r = make_response(
            &q,
            vec![ResourceRecord {
                name: name("n.zone.tld"),
                ttl: 300,
                rdata: RData::Txt(strings),
            }],
            Rcode::NoError,
        )
        .unwrap();
        assert!(matches!(encode_message(&r), Err(WireError::TooLarge(_))));
    }

    #[test]
    fn names_normalize_to_lowercase() {
        assert_eq!(name("ABC.Example.COM"), name("abc.example.com."));
    }

    pub(crate) fn arb_name() -> impl Strategy<Value = DnsName> {
        proptest::collection::vec("[a-z0-9][a-z0-9-]{0,14}", 1..4)
            .prop_map(|labels| DnsName::parse(&labels.join(".")).unwrap())
    }

    fn arb_rdata() -> impl Strategy<Value = RData> {
        prop_oneof![
            any::<[u8; 4]>().prop_map(|o| RData::A(Ipv4Addr::new(o[0], o[1], o[2], o[3]))),
            proptest::collection::vec("[a-zA-Z0-9+/=]{1,40}", 1..3)
                .prop_map(|ss| RData::Txt(ss.into_iter().map(|s| s.into_bytes()).collect())),
        ]
    }

    fn arb_message() -> impl Strategy<Value = DnsMessage> {
        let qtype = prop_oneof![Just(Qtype::A), Just(Qtype::Txt)];
        (any::<u16>(), arb_name(), qtype, any::<bool>()).prop_flat_map(
            |(id, qname, qtype, is_response)| {
                if !is_response {
                    Just(DnsMessage::query(id, qname, qtype)).boxed()
                } else {
                    let answers = proptest::collection::vec(
                        (arb_name(), any::<u32>(), arb_rdata()).prop_map(|(name, ttl, rdata)| {
                            ResourceRecord { name, ttl, rdata }
                        }),
                        0..3,
                    );
                    (Just(id), Just(qname), Just(qtype), answers)
                        .prop_map(|(id, name, qtype, answers)| {
                            let rcode = if answers.is_empty() {
                                Rcode::NxDomain
                            } else {
                                Rcode::NoError
                            };
                            DnsMessage {
                                id,
                                is_response: true,
                                rcode,
                                question: Question { name, qtype },
                                answers,
                            }
                        })
                        .boxed()
                }
            },
        )
    }

    proptest! {
        #[test]
        fn roundtrip(msg in arb_message()) {
            let bytes = encode_message(&msg).unwrap();
            prop_assert!(bytes.len() <= MAX_UDP_PAYLOAD);
            let back = decode_message(&bytes).unwrap();
            prop_assert_eq!(back, msg);
        }

        #[test]
        fn encoding_is_deterministic(msg in arb_message()) {
            prop_assert_eq!(encode_message(&msg).unwrap(), encode_message(&msg).unwrap());
        }
    }
}
