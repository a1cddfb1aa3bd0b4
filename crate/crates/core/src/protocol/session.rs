//! Teacher and apprentice dialogues over a reliable byte stream.
//!
//! ```text
//! teacher                         apprentice
//!   HELLO(N, q, K, digest)  --->
//!                           <---  HELLO(own)  | ERRORMSG
//!   FEATURE(pos, value)     --->
//!                           <---  CONTINUE    | STOP
//!   ...
//!   SATURATED               --->                (after N features)
//!                           <---  STOP
//! ```
//!
//! The apprentice answers every FEATURE, so the teacher never has more than
//! one feature in flight and stops exactly where the apprentice decided.

use std::io::{Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream, ToSocketAddrs};

use log::{debug, warn};
use serde::Serialize;

use super::wire::{read_message, write_message, WireMessage};
use crate::error::{Error, Result};
use crate::identifier::{Decision, PosteriorState, Threshold};
use crate::teacher::TransmitPlan;
use crate::types::{ElementId, FeaturePacket, SemanticBase};

pub const ERR_DIGEST_MISMATCH: u16 = 1;
pub const ERR_PROTOCOL: u16 = 2;
pub const ERR_MALFORMED: u16 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TeacherReport {
    pub features_sent: usize,
    pub saturated: bool,
    pub element: ElementId,
    pub confidence: f64,
    pub bytes_sent: usize,
    pub bytes_received: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ApprenticeReport {
    pub decision: Decision,
    /// Ideal accounting: `(ceil(log2 N) + q)` bits per received feature.
    pub bits_semantic: u64,
    pub bits_syntactic: u64,
    /// Framed bytes actually read and written, all message types included.
    pub bytes_received: usize,
    pub bytes_sent: usize,
}

fn hello(base: &SemanticBase) -> WireMessage {
    WireMessage::Hello {
        n: base.n() as u32,
        q: base.q(),
        k: base.k() as u32,
        digest: base.digest(),
    }
}

fn digest_error(base: &SemanticBase, peer: &[u8; 32]) -> Error {
    Error::DigestMismatch {
        local: hex::encode(base.digest()),
        peer: hex::encode(peer),
    }
}

// Best effort; the session is already failing.
fn send_error<S: Write>(stream: &mut S, code: u16, text: impl Into<String>) {
    let msg = WireMessage::Error {
        code,
        text: text.into(),
    };
    if let Err(e) = write_message(stream, &msg) {
        debug!("could not deliver ERRORMSG {code}: {e}");
    }
}

fn violation<S: Write>(stream: &mut S, text: String) -> Error {
    send_error(stream, ERR_PROTOCOL, text.clone());
    Error::Protocol(text)
}

struct Counted<'a, S> {
    stream: &'a mut S,
    sent: usize,
    received: usize,
}

impl<'a, S: Read + Write> Counted<'a, S> {
    fn new(stream: &'a mut S) -> Self {
        Self {
            stream,
            sent: 0,
            received: 0,
        }
    }

    fn send(&mut self, msg: &WireMessage) -> Result<()> {
        self.sent += write_message(self.stream, msg)?;
        Ok(())
    }

    fn recv(&mut self) -> Result<WireMessage> {
        match read_message(self.stream) {
            Ok((msg, len)) => {
                self.received += len;
                Ok(msg)
            }
            Err(Error::Frame(e)) => {
                send_error(self.stream, ERR_MALFORMED, e.to_string());
                Err(Error::Frame(e))
            }
            Err(e) => Err(e),
        }
    }
}

/// Sends the identity of `plan` until the apprentice stops the transmission.
pub fn teacher_session<S: Read + Write>(
    mut plan: TransmitPlan,
    base: &SemanticBase,
    stream: &mut S,
) -> Result<TeacherReport> {
    if plan.identity().dim() != base.n() {
        return Err(Error::DimensionMismatch {
            index: 0,
            expected: base.n(),
            found: plan.identity().dim(),
        });
    }
    let mut io = Counted::new(stream);
    io.send(&hello(base))?;
    match io.recv()? {
        WireMessage::Hello { n, q, k, digest } => {
            if digest != base.digest()
                || n as usize != base.n()
                || q != base.q()
                || k as usize != base.k()
            {
                send_error(
                    io.stream,
                    ERR_DIGEST_MISMATCH,
                    "semantic base digest mismatch",
                );
                return Err(digest_error(base, &digest));
            }
        }
        WireMessage::Error { code, text } => return Err(Error::Peer { code, text }),
        other => {
            return Err(violation(
                io.stream,
                format!("expected HELLO, got {}", other.name()),
            ))
        }
    }

    let mut features_sent = 0;
    loop {
        let saturated = match plan.next_packet() {
            Some(packet) => {
                io.send(&WireMessage::Feature {
                    position: packet.position as u32,
                    value: packet.value,
                })?;
                features_sent += 1;
                false
            }
            None => {
                io.send(&WireMessage::Saturated)?;
                true
            }
        };
        match io.recv()? {
            WireMessage::Continue if !saturated => continue,
            WireMessage::Stop {
                element,
                confidence,
            } => {
                debug!("apprentice stopped after {features_sent} features");
                return Ok(TeacherReport {
                    features_sent,
                    saturated,
                    element: ElementId(element),
                    confidence,
                    bytes_sent: io.sent,
                    bytes_received: io.received,
                });
            }
            WireMessage::Error { code, text } => return Err(Error::Peer { code, text }),
            other => {
                return Err(violation(
                    io.stream,
                    format!("unexpected {} after {features_sent} features", other.name()),
                ))
            }
        }
    }
}

/// Receives features until the posterior reaches `lambda` (or the teacher
/// saturates) and answers with STOP.
pub fn apprentice_session<S: Read + Write>(
    base: &SemanticBase,
    lambda: Threshold,
    stream: &mut S,
) -> Result<ApprenticeReport> {
    let mut io = Counted::new(stream);
    match io.recv()? {
        WireMessage::Hello { n, q, k, digest } => {
            if digest != base.digest()
                || n as usize != base.n()
                || q != base.q()
                || k as usize != base.k()
            {
                send_error(
                    io.stream,
                    ERR_DIGEST_MISMATCH,
                    "semantic base digest mismatch",
                );
                return Err(digest_error(base, &digest));
            }
        }
        WireMessage::Error { code, text } => return Err(Error::Peer { code, text }),
        other => {
            return Err(violation(
                io.stream,
                format!("expected HELLO, got {}", other.name()),
            ))
        }
    }
    io.send(&hello(base))?;

    let mut state = PosteriorState::new(base);
    let decision = loop {
        match io.recv()? {
            WireMessage::Feature { position, value } => {
                let packet = FeaturePacket {
                    position: position as usize,
                    value,
                };
                if let Err(e) = state.receive(packet, base) {
                    send_error(io.stream, ERR_PROTOCOL, e.to_string());
                    return Err(e);
                }
                match state.check_stop(lambda) {
                    Some(decision) => break decision,
                    None => io.send(&WireMessage::Continue)?,
                }
            }
            WireMessage::Saturated => match state.force_decision() {
                Ok(decision) => break decision,
                Err(e) => {
                    return Err(violation(io.stream, format!("SATURATED too early: {e}")));
                }
            },
            WireMessage::Error { code, text } => return Err(Error::Peer { code, text }),
            other => return Err(violation(io.stream, format!("unexpected {}", other.name()))),
        }
    };

    io.send(&WireMessage::Stop {
        element: decision.element.0,
        confidence: decision.confidence,
    })?;
    let (n, q) = (base.n(), base.q());
    Ok(ApprenticeReport {
        decision,
        bits_semantic: FeaturePacket::ideal_bits(n, q) * decision.packets_used as u64,
        bits_syntactic: u64::from(q) * n as u64,
        bytes_received: io.received,
        bytes_sent: io.sent,
    })
}

/// Accepts one connection per plan and runs the teacher dialogues
/// concurrently. Results are returned in plan order.
pub fn serve_teacher(
    listener: &TcpListener,
    base: &SemanticBase,
    plans: impl IntoIterator<Item = TransmitPlan>,
) -> Result<Vec<Result<TeacherReport>>> {
    std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for plan in plans {
            let (mut stream, peer): (TcpStream, SocketAddr) = listener.accept()?;
            stream.set_nodelay(true)?;
            debug!("teacher session with {peer}");
            handles.push(scope.spawn(move || {
                let result = teacher_session(plan, base, &mut stream);
                if let Err(e) = &result {
                    warn!("session with {peer} failed: {e}");
                }
                result
            }));
        }
        Ok(handles
            .into_iter()
            .map(|h| h.join().expect("teacher session panicked"))
            .collect())
    })
}

/// Connects to a teacher and runs one apprentice dialogue.
pub fn connect_apprentice(
    addr: impl ToSocketAddrs,
    base: &SemanticBase,
    lambda: Threshold,
) -> Result<ApprenticeReport> {
    let mut stream = TcpStream::connect(addr)?;
    stream.set_nodelay(true)?;
    apprentice_session(base, lambda, &mut stream)
}
