//! Message framing.
//!
//! ```text
//! +-----+----------------+-------------------+
//! | tag | length (u32 BE)| payload (length B)|
//! +-----+----------------+-------------------+
//! ```
//!
//! | tag  | message   | payload                                             |
//! |------|-----------|-----------------------------------------------------|
//! | 0x01 | HELLO     | N u32, q u16, K u32, digest [u8; 32]                |
//! | 0x02 | FEATURE   | position u32, value f64                             |
//! | 0x03 | STOP      | element u32, confidence f64                         |
//! | 0x04 | SATURATED | empty                                               |
//! | 0x05 | ERRORMSG  | code u16, text length u16, UTF-8 text               |
//! | 0x06 | CONTINUE  | empty                                               |
//!
//! Integers are big-endian, reals are IEEE-754 binary64 big-endian.

use std::io::{Read, Write};

use thiserror::Error;

pub const TAG_HELLO: u8 = 0x01;
pub const TAG_FEATURE: u8 = 0x02;
pub const TAG_STOP: u8 = 0x03;
pub const TAG_SATURATED: u8 = 0x04;
pub const TAG_ERROR: u8 = 0x05;
pub const TAG_CONTINUE: u8 = 0x06;

pub const HEADER_LEN: usize = 5;
/// Upper bound on a payload accepted from the wire.
pub const MAX_PAYLOAD: u32 = 1 << 20;

const HELLO_LEN: usize = 4 + 2 + 4 + 32;
const FEATURE_LEN: usize = 4 + 8;
const STOP_LEN: usize = 4 + 8;

#[derive(Debug, Clone, PartialEq)]
pub enum WireMessage {
    Hello {
        n: u32,
        q: u16,
        k: u32,
        digest: [u8; 32],
    },
    Feature {
        position: u32,
        value: f64,
    },
    Stop {
        element: u32,
        confidence: f64,
    },
    Saturated,
    Error {
        code: u16,
        text: String,
    },
    /// Receiver wants the next feature.
    Continue,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FrameError {
    #[error("unknown message tag {0:#04x}")]
    UnknownTag(u8),
    #[error("truncated frame: need {needed} bytes, have {available}")]
    Truncated { needed: usize, available: usize },
    #[error("tag {tag:#04x}: payload is {found} bytes, expected {expected}")]
    BadLength {
        tag: u8,
        expected: usize,
        found: usize,
    },
    #[error("{0} bytes follow the frame")]
    TrailingBytes(usize),
    #[error("payload length {0} exceeds limit")]
    Oversized(u32),
    #[error("error text is not valid UTF-8")]
    InvalidUtf8,
    #[error("error text of {0} bytes does not fit a u16 length")]
    TextTooLong(usize),
}

impl WireMessage {
    pub fn tag(&self) -> u8 {
        match self {
            Self::Hello { .. } => TAG_HELLO,
            Self::Feature { .. } => TAG_FEATURE,
            Self::Stop { .. } => TAG_STOP,
            Self::Saturated => TAG_SATURATED,
            Self::Error { .. } => TAG_ERROR,
            Self::Continue => TAG_CONTINUE,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Hello { .. } => "HELLO",
            Self::Feature { .. } => "FEATURE",
            Self::Stop { .. } => "STOP",
            Self::Saturated => "SATURATED",
            Self::Error { .. } => "ERRORMSG",
            Self::Continue => "CONTINUE",
        }
    }
}

pub fn encode_message(msg: &WireMessage) -> Result<Vec<u8>, FrameError> {
    let mut payload = Vec::new();
    match msg {
        WireMessage::Hello { n, q, k, digest } => {
            payload.extend_from_slice(&n.to_be_bytes());
            payload.extend_from_slice(&q.to_be_bytes());
            payload.extend_from_slice(&k.to_be_bytes());
            payload.extend_from_slice(digest);
        }
        WireMessage::Feature { position, value } => {
            payload.extend_from_slice(&position.to_be_bytes());
            payload.extend_from_slice(&value.to_be_bytes());
        }
        WireMessage::Stop {
            element,
            confidence,
        } => {
            payload.extend_from_slice(&element.to_be_bytes());
            payload.extend_from_slice(&confidence.to_be_bytes());
        }
        WireMessage::Saturated | WireMessage::Continue => {}
        WireMessage::Error { code, text } => {
            let len = u16::try_from(text.len()).map_err(|_| FrameError::TextTooLong(text.len()))?;
            payload.extend_from_slice(&code.to_be_bytes());
            payload.extend_from_slice(&len.to_be_bytes());
            payload.extend_from_slice(text.as_bytes());
        }
    }
    let mut frame = Vec::with_capacity(HEADER_LEN + payload.len());
    frame.push(msg.tag());
    frame.extend_from_slice(&(payload.len() as u32).to_be_bytes());
    frame.extend_from_slice(&payload);
    Ok(frame)
}

/// Decodes the frame at the start of `buf`, returning it with its byte length.
pub fn decode_frame(buf: &[u8]) -> Result<(WireMessage, usize), FrameError> {
    if buf.len() < HEADER_LEN {
        return Err(FrameError::Truncated {
            needed: HEADER_LEN,
            available: buf.len(),
        });
    }
    let tag = buf[0];
    let len = u32::from_be_bytes([buf[1], buf[2], buf[3], buf[4]]);
    if len > MAX_PAYLOAD {
        return Err(FrameError::Oversized(len));
    }
    let end = HEADER_LEN + len as usize;
    if buf.len() < end {
        return Err(FrameError::Truncated {
            needed: end,
            available: buf.len(),
        });
    }
    Ok((decode_payload(tag, &buf[HEADER_LEN..end])?, end))
}

/// Decodes exactly one frame; bytes after it are an error.
pub fn decode_message(buf: &[u8]) -> Result<WireMessage, FrameError> {
    let (msg, used) = decode_frame(buf)?;
    if used != buf.len() {
        return Err(FrameError::TrailingBytes(buf.len() - used));
    }
    Ok(msg)
}

fn expect_len(tag: u8, payload: &[u8], expected: usize) -> Result<(), FrameError> {
    if payload.len() == expected {
        Ok(())
    } else {
        Err(FrameError::BadLength {
            tag,
            expected,
            found: payload.len(),
        })
    }
}

fn be_u32(b: &[u8]) -> u32 {
    u32::from_be_bytes(b[..4].try_into().unwrap())
}

fn be_f64(b: &[u8]) -> f64 {
    f64::from_be_bytes(b[..8].try_into().unwrap())
}

fn decode_payload(tag: u8, p: &[u8]) -> Result<WireMessage, FrameError> {
    match tag {
        TAG_HELLO => {
            expect_len(tag, p, HELLO_LEN)?;
            Ok(WireMessage::Hello {
                n: be_u32(&p[0..]),
                q: u16::from_be_bytes([p[4], p[5]]),
                k: be_u32(&p[6..]),
                digest: p[10..42].try_into().unwrap(),
            })
        }
        TAG_FEATURE => {
            expect_len(tag, p, FEATURE_LEN)?;
            Ok(WireMessage::Feature {
                position: be_u32(p),
                value: be_f64(&p[4..]),
            })
        }
        TAG_STOP => {
            expect_len(tag, p, STOP_LEN)?;
            Ok(WireMessage::Stop {
                element: be_u32(p),
                confidence: be_f64(&p[4..]),
            })
        }
        TAG_SATURATED => expect_len(tag, p, 0).map(|_| WireMessage::Saturated),
        TAG_CONTINUE => expect_len(tag, p, 0).map(|_| WireMessage::Continue),
        TAG_ERROR => {
            if p.len() < 4 {
                return Err(FrameError::BadLength {
                    tag,
                    expected: 4,
                    found: p.len(),
                });
            }
            let code = u16::from_be_bytes([p[0], p[1]]);
            let len = u16::from_be_bytes([p[2], p[3]]) as usize;
            expect_len(tag, p, 4 + len)?;
            let text = std::str::from_utf8(&p[4..]).map_err(|_| FrameError::InvalidUtf8)?;
            Ok(WireMessage::Error {
                code,
                text: text.to_owned(),
            })
        }
        other => Err(FrameError::UnknownTag(other)),
    }
}

/// Reads one frame from a byte stream. Returns the message and the number of
/// bytes consumed.
pub fn read_message<R: Read>(reader: &mut R) -> crate::Result<(WireMessage, usize)> {
    let mut header = [0u8; HEADER_LEN];
    reader.read_exact(&mut header)?;
    let len = u32::from_be_bytes([header[1], header[2], header[3], header[4]]);
    if len > MAX_PAYLOAD {
        return Err(FrameError::Oversized(len).into());
    }
    let mut payload = vec![0u8; len as usize];
    reader.read_exact(&mut payload)?;
    let msg = decode_payload(header[0], &payload)?;
    Ok((msg, HEADER_LEN + payload.len()))
}

/// Writes and flushes one frame, returning its size in bytes.
pub fn write_message<W: Write>(writer: &mut W, msg: &WireMessage) -> crate::Result<usize> {
    let frame = encode_message(msg)?;
    writer.write_all(&frame)?;
    writer.flush()?;
    Ok(frame.len())
}
