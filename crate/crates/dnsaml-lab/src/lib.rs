//! A desk-scale laboratory for DNS anti-malware lookup (DNSAML) protocols.
//!
//! The crate simulates the full loop end to end: agents hash files and ask
//! a lookup service for a classification over plain DNS, an adversary sits
//! on the channel eavesdropping or spoofing answers, harnesses replay the
//! three documented attacks, countermeasures harden the exchange, and a
//! log hunter digs DNSAML zones out of passive DNS traffic.

pub mod adversary;
pub mod agent;
pub mod channel;
pub mod countermeasures;
pub mod dialects;
pub mod service;
pub mod wire;
