//! Wire format of the reconciliation protocol.
//!
//! Every frame is
//!
//! ```text
//! u32 LE  length of everything after this field (13 + payload)
//! u8      kind
//! u64 LE  session id
//! u32 LE  block index
//! [u8]    payload
//! ```
//!
//! Frames larger than [`MAX_FRAME_LEN`] are rejected before any payload is
//! read. Payload schemas per kind live in this module as typed structs.

use std::io::{ErrorKind, Read, Write};

use crate::bits::BitBlock;
use crate::error::{Error, Result};

pub const PROTOCOL_VERSION: u16 = 1;
/// Hard cap on the length field (16 MiB).
pub const MAX_FRAME_LEN: usize = 16 << 20;
const HEADER_LEN: usize = 1 + 8 + 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum MessageKind {
    Hello = 1,
    Params = 2,
    Syndromes = 3,
    Result = 4,
    Verify = 5,
    Close = 6,
    Error = 7,
}

impl MessageKind {
    pub const ALL: [MessageKind; 7] = [
        MessageKind::Hello,
        MessageKind::Params,
        MessageKind::Syndromes,
        MessageKind::Result,
        MessageKind::Verify,
        MessageKind::Close,
        MessageKind::Error,
    ];

    pub fn from_byte(b: u8) -> Option<Self> {
        Self::ALL.into_iter().find(|k| *k as u8 == b)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProtocolMessage {
    pub kind: MessageKind,
    pub session_id: u64,
    pub block_index: u32,
    pub payload: Vec<u8>,
}

impl ProtocolMessage {
    pub fn new(kind: MessageKind, session_id: u64, block_index: u32, payload: Vec<u8>) -> Self {
        ProtocolMessage {
            kind,
            session_id,
            block_index,
            payload,
        }
    }

    pub fn error(session_id: u64, text: &str) -> Self {
        Self::new(MessageKind::Error, session_id, 0, text.as_bytes().to_vec())
    }

    /// Fails unless the message has kind `kind`; ERROR messages become
    /// protocol errors carrying the peer's text.
    pub fn expect(self, kind: MessageKind) -> Result<Self> {
        if self.kind == kind {
            Ok(self)
        } else if self.kind == MessageKind::Error {
            Err(Error::Protocol(format!(
                "peer reported: {}",
                String::from_utf8_lossy(&self.payload)
            )))
        } else {
            Err(Error::Protocol(format!("expected {kind:?}, received {:?}", self.kind)))
        }
    }
}

pub fn encode_message(msg: &ProtocolMessage) -> Result<Vec<u8>> {
    let body = HEADER_LEN + msg.payload.len();
    if body > MAX_FRAME_LEN {
        return Err(Error::Protocol(format!("frame of {body} bytes exceeds the cap")));
    }
    let mut out = Vec::with_capacity(4 + body);
    out.extend_from_slice(&(body as u32).to_le_bytes());
    out.push(msg.kind as u8);
    out.extend_from_slice(&msg.session_id.to_le_bytes());
    out.extend_from_slice(&msg.block_index.to_le_bytes());
    out.extend_from_slice(&msg.payload);
    Ok(out)
}

fn checked_body_len(prefix: [u8; 4]) -> Result<usize> {
    let len = u32::from_le_bytes(prefix) as usize;
    if len > MAX_FRAME_LEN {
        return Err(Error::Protocol(format!("declared frame length {len} exceeds the cap")));
    }
    if len < HEADER_LEN {
        return Err(Error::Protocol(format!("declared frame length {len} shorter than header")));
    }
    Ok(len)
}

fn parse_body(body: &[u8]) -> Result<ProtocolMessage> {
    let kind = MessageKind::from_byte(body[0])
        .ok_or_else(|| Error::Protocol(format!("unknown message kind {}", body[0])))?;
    Ok(ProtocolMessage {
        kind,
        session_id: u64::from_le_bytes(body[1..9].try_into().unwrap()),
        block_index: u32::from_le_bytes(body[9..13].try_into().unwrap()),
        payload: body[HEADER_LEN..].to_vec(),
    })
}

/// Decodes exactly one frame.
pub fn decode_message(bytes: &[u8]) -> Result<ProtocolMessage> {
    if bytes.len() < 4 {
        return Err(Error::Protocol("truncated length prefix".into()));
    }
    let len = checked_body_len(bytes[..4].try_into().unwrap())?;
    let body = &bytes[4..];
    if body.len() < len {
        return Err(Error::Protocol(format!(
            "truncated frame: {} of {len} bytes",
            body.len()
        )));
    }
    if body.len() > len {
        return Err(Error::Protocol(format!(
            "{} trailing bytes after frame",
            body.len() - len
        )));
    }
    parse_body(body)
}

pub fn write_message<W: Write>(sink: &mut W, msg: &ProtocolMessage) -> Result<()> {
    sink.write_all(&encode_message(msg)?)
        .map_err(|e| Error::Transport(e.to_string()))?;
    sink.flush().map_err(|e| Error::Transport(e.to_string()))
}

/// Reads one frame. A clean end of stream before the first byte is
/// reported as a closed connection.
pub fn read_message<R: Read>(source: &mut R) -> Result<ProtocolMessage> {
    let mut prefix = [0u8; 4];
    let mut got = 0;
    while got < 4 {
        match source.read(&mut prefix[got..]) {
            Ok(0) if got == 0 => return Err(Error::Transport("connection closed by peer".into())),
            Ok(0) => return Err(Error::Protocol("truncated length prefix".into())),
            Ok(k) => got += k,
            Err(e) if e.kind() == ErrorKind::Interrupted => {}
            Err(e) => return Err(Error::Transport(e.to_string())),
        }
    }
    let len = checked_body_len(prefix)?;
    let mut body = vec![0u8; len];
    source.read_exact(&mut body).map_err(|e| match e.kind() {
        ErrorKind::UnexpectedEof => Error::Protocol(format!("truncated frame of {len} bytes")),
        _ => Error::Transport(e.to_string()),
    })?;
    parse_body(&body)
}

// Typed payloads.

fn need(payload: &[u8], len: usize, what: &str) -> Result<()> {
    if payload.len() == len {
        Ok(())
    } else {
        Err(Error::Protocol(format!(
            "{what} payload has {} bytes, expected {len}",
            payload.len()
        )))
    }
}

pub fn hello_payload() -> Vec<u8> {
    PROTOCOL_VERSION.to_le_bytes().to_vec()
}

pub fn parse_hello(payload: &[u8]) -> Result<u16> {
    need(payload, 2, "HELLO")?;
    Ok(u16::from_le_bytes([payload[0], payload[1]]))
}

/// Session parameters Alice announces; Bob must hold the same ensemble.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SessionParams {
    pub n: u32,
    pub m: u32,
    pub u: u16,
    pub k: u32,
    pub e: f64,
    pub tag_bits: u8,
    pub ensemble_hash: [u8; 32],
}

impl SessionParams {
    pub const WIRE_LEN: usize = 4 + 4 + 2 + 4 + 8 + 1 + 32;

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(Self::WIRE_LEN);
        out.extend_from_slice(&self.n.to_le_bytes());
        out.extend_from_slice(&self.m.to_le_bytes());
        out.extend_from_slice(&self.u.to_le_bytes());
        out.extend_from_slice(&self.k.to_le_bytes());
        out.extend_from_slice(&self.e.to_bits().to_le_bytes());
        out.push(self.tag_bits);
        out.extend_from_slice(&self.ensemble_hash);
        out
    }

    pub fn from_bytes(p: &[u8]) -> Result<Self> {
        need(p, Self::WIRE_LEN, "PARAMS")?;
        Ok(SessionParams {
            n: u32::from_le_bytes(p[0..4].try_into().unwrap()),
            m: u32::from_le_bytes(p[4..8].try_into().unwrap()),
            u: u16::from_le_bytes(p[8..10].try_into().unwrap()),
            k: u32::from_le_bytes(p[10..14].try_into().unwrap()),
            e: f64::from_bits(u64::from_le_bytes(p[14..22].try_into().unwrap())),
            tag_bits: p[22],
            ensemble_hash: p[23..55].try_into().unwrap(),
        })
    }
}

/// Bytes of a SYNDROMES payload: `u` segments of `ceil(m/8)` bytes plus the tag.
pub fn syndromes_payload_len(u: usize, m: usize, tag_bits: u32) -> usize {
    u * m.div_ceil(8) + (tag_bits as usize).div_ceil(8)
}

pub fn syndromes_payload(syndromes: &[BitBlock], tag: &[u8]) -> Vec<u8> {
    let mut out = Vec::new();
    for z in syndromes {
        out.extend_from_slice(&z.to_bytes_le());
    }
    out.extend_from_slice(tag);
    out
}

/// Splits a SYNDROMES payload into `u` syndromes of `m` bits and the tag.
pub fn parse_syndromes(payload: &[u8], u: usize, m: usize, tag_bits: u32) -> Result<(Vec<BitBlock>, Vec<u8>)> {
    need(payload, syndromes_payload_len(u, m, tag_bits), "SYNDROMES")?;
    let seg = m.div_ceil(8);
    let syndromes = (0..u)
        .map(|l| BitBlock::from_bytes_le(&payload[l * seg..(l + 1) * seg], m))
        .collect::<Result<Vec<_>>>()?;
    Ok((syndromes, payload[u * seg..].to_vec()))
}

/// Bob's verdict on one block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum BlockStatus {
    /// No syndrome-consistent word within the iteration limit.
    Failed = 0,
    /// Syndromes matched and the verification tag agreed.
    Verified = 1,
    /// Syndromes matched but the tag disagreed: an undetected decoding
    /// error caught by verification.
    TagMismatch = 2,
}

impl BlockStatus {
    pub fn from_byte(b: u8) -> Result<Self> {
        match b {
            0 => Ok(BlockStatus::Failed),
            1 => Ok(BlockStatus::Verified),
            2 => Ok(BlockStatus::TagMismatch),
            _ => Err(Error::Protocol(format!("unknown block status {b}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockResult {
    pub status: BlockStatus,
    pub iterations: u32,
    pub decode_nanos: u64,
}

impl BlockResult {
    pub const WIRE_LEN: usize = 1 + 4 + 8;

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(Self::WIRE_LEN);
        out.push(self.status as u8);
        out.extend_from_slice(&self.iterations.to_le_bytes());
        out.extend_from_slice(&self.decode_nanos.to_le_bytes());
        out
    }

    pub fn from_bytes(p: &[u8]) -> Result<Self> {
        need(p, Self::WIRE_LEN, "RESULT")?;
        Ok(BlockResult {
            status: BlockStatus::from_byte(p[0])?,
            iterations: u32::from_le_bytes(p[1..5].try_into().unwrap()),
            decode_nanos: u64::from_le_bytes(p[5..13].try_into().unwrap()),
        })
    }
}

/// VERIFY payload: bitmap of blocks Alice will keep, `ceil(k/8)` bytes.
pub fn verify_payload(kept: &[bool]) -> Vec<u8> {
    BitBlock::from_bools(kept.iter().copied())
        .map(|b| b.to_bytes_le())
        .unwrap_or_default()
}

pub fn parse_verify(payload: &[u8], k: usize) -> Result<Vec<bool>> {
    need(payload, k.div_ceil(8), "VERIFY")?;
    Ok(BitBlock::from_bytes_le(payload, k)?.iter().collect())
}
