//! Message grammar and the line-delimited transcript format.
//!
//! A transcript file is one JSON header line followed by one JSON record per
//! message:
//!
//! ```text
//! {"m":4,"n":29,"theta":0.3490658503988659,"variant":"with-return","seed":7,"alice":"honest","bob":"honest"}
//! {"seq":0,"step":2,"i":1,"j":1,"sender":"alice","kind":"pair-send","payload":{"states":[0,1]}}
//! ```
//!
//! Indices `i`, `j` are 1-based and `null` where they do not apply.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{Party, ProtocolParams, Variant};
use crate::error::{Error, Result};

/// Which particle of a pair is sent back.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Which {
    First,
    Second,
}

impl Which {
    pub(crate) fn index(self) -> usize {
        match self {
            Which::First => 0,
            Which::Second => 1,
        }
    }
}

/// The rank-1 test whose `⊥` outcome caused an abort.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TestKind {
    /// Step 4: `(E_{a_j}, E_{a_j}^⊥)` on the kept particles.
    Kept,
    /// Step 5: `(E_{ā_j}, E_{ā_j}^⊥)` on the returned particles.
    Returned,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "cause", rename_all = "kebab-case")]
pub enum AbortCause {
    TestFailed {
        test: TestKind,
    },
    ProtocolViolation {
        detail: String,
    },
    /// The party refused the final bit.
    Declined,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Message {
    /// Step 2 (with-return): `ψ(c) ⊗ ψ(c̄)`; `states` are the two labels.
    PairSend {
        sender: Party,
        i: usize,
        j: usize,
        states: [u8; 2],
    },
    /// Step 2 (no-return): a single particle labelled `state`.
    StateSend {
        sender: Party,
        i: usize,
        j: usize,
        state: u8,
    },
    /// Step 3: `e_ij` or `f_ij`.
    MaskAnnounce {
        sender: Party,
        i: usize,
        j: usize,
        bit: u8,
    },
    ParticleReturn {
        sender: Party,
        i: usize,
        j: usize,
        which: Which,
    },
    /// Step 4: `a_j` or `b_j`.
    Reveal { sender: Party, j: usize, bit: u8 },
    AbortNotice {
        sender: Party,
        step: u8,
        j: Option<usize>,
        reason: AbortCause,
    },
}

impl Message {
    pub fn sender(&self) -> Party {
        match self {
            Message::PairSend { sender, .. }
            | Message::StateSend { sender, .. }
            | Message::MaskAnnounce { sender, .. }
            | Message::ParticleReturn { sender, .. }
            | Message::Reveal { sender, .. }
            | Message::AbortNotice { sender, .. } => *sender,
        }
    }

    pub fn step(&self) -> u8 {
        match self {
            Message::PairSend { .. } | Message::StateSend { .. } => 2,
            Message::MaskAnnounce { .. } | Message::ParticleReturn { .. } => 3,
            Message::Reveal { .. } => 4,
            Message::AbortNotice { step, .. } => *step,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Message::PairSend { .. } => "pair-send",
            Message::StateSend { .. } => "state-send",
            Message::MaskAnnounce { .. } => "mask-announce",
            Message::ParticleReturn { .. } => "particle-return",
            Message::Reveal { .. } => "reveal",
            Message::AbortNotice { .. } => "abort-notice",
        }
    }

    /// `(i, j)` where defined.
    pub fn slot(&self) -> (Option<usize>, Option<usize>) {
        match self {
            Message::PairSend { i, j, .. }
            | Message::StateSend { i, j, .. }
            | Message::MaskAnnounce { i, j, .. }
            | Message::ParticleReturn { i, j, .. } => (Some(*i), Some(*j)),
            Message::Reveal { j, .. } => (None, Some(*j)),
            Message::AbortNotice { j, .. } => (None, *j),
        }
    }

    fn to_record(&self, seq: usize) -> Record {
        let (i, j) = self.slot();
        let payload = match self {
            Message::PairSend { states, .. } => Payload::States { states: *states },
            Message::StateSend { state, .. } => Payload::State { state: *state },
            Message::MaskAnnounce { bit, .. } | Message::Reveal { bit, .. } => {
                Payload::Bit { bit: *bit }
            }
            Message::ParticleReturn { which, .. } => Payload::Which { which: *which },
            Message::AbortNotice { reason, .. } => Payload::Abort {
                reason: reason.clone(),
            },
        };
        Record {
            seq,
            step: self.step(),
            i,
            j,
            sender: self.sender(),
            kind: self.kind().to_string(),
            payload,
        }
    }

    fn from_record(r: Record, line: usize) -> Result<Self> {
        let bad = |reason: &str| Error::Transcript {
            line,
            reason: reason.to_string(),
        };
        let need = |v: Option<usize>, what: &str| v.ok_or_else(|| bad(&format!("missing {what}")));
        let sender = r.sender;
        let msg = match (r.kind.as_str(), r.payload) {
            ("pair-send", Payload::States { states }) => Message::PairSend {
                sender,
                i: need(r.i, "i")?,
                j: need(r.j, "j")?,
                states,
            },
            ("state-send", Payload::State { state }) => Message::StateSend {
                sender,
                i: need(r.i, "i")?,
                j: need(r.j, "j")?,
                state,
            },
            ("mask-announce", Payload::Bit { bit }) => Message::MaskAnnounce {
                sender,
                i: need(r.i, "i")?,
                j: need(r.j, "j")?,
                bit,
            },
            ("particle-return", Payload::Which { which }) => Message::ParticleReturn {
                sender,
                i: need(r.i, "i")?,
                j: need(r.j, "j")?,
                which,
            },
            ("reveal", Payload::Bit { bit }) => Message::Reveal {
                sender,
                j: need(r.j, "j")?,
                bit,
            },
            ("abort-notice", Payload::Abort { reason }) => Message::AbortNotice {
                sender,
                step: r.step,
                j: r.j,
                reason,
            },
            (kind, _) => return Err(bad(&format!("payload does not match kind '{kind}'"))),
        };
        if msg.step() != r.step {
            return Err(bad("step does not match kind"));
        }
        Ok(msg)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct Record {
    seq: usize,
    step: u8,
    i: Option<usize>,
    j: Option<usize>,
    sender: Party,
    kind: String,
    payload: Payload,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum Payload {
    States { states: [u8; 2] },
    State { state: u8 },
    Bit { bit: u8 },
    Which { which: Which },
    Abort { reason: AbortCause },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TranscriptHeader {
    pub m: usize,
    pub n: usize,
    pub theta: f64,
    pub variant: Variant,
    pub seed: u64,
    pub alice: String,
    pub bob: String,
}

impl TranscriptHeader {
    pub fn params(&self) -> Result<ProtocolParams> {
        ProtocolParams::new(self.m, self.n, self.theta, self.variant)
    }
}

/// Ordered message log of one session; the sequence number is the index.
#[derive(Clone, Debug, PartialEq)]
pub struct Transcript {
    pub header: TranscriptHeader,
    pub messages: Vec<Message>,
}

impl Transcript {
    pub fn write_to<W: Write>(&self, mut out: W) -> Result<()> {
        serde_json::to_writer(&mut out, &self.header)?;
        out.write_all(b"\n")?;
        for (seq, msg) in self.messages.iter().enumerate() {
            serde_json::to_writer(&mut out, &msg.to_record(seq))?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("serde_json emits UTF-8")
    }

    pub fn read_from<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines().enumerate();
        let header_line = match lines.next() {
            Some((_, line)) => line?,
            None => {
                return Err(Error::Transcript {
                    line: 1,
                    reason: "empty transcript".into(),
                })
            }
        };
        let header: TranscriptHeader =
            serde_json::from_str(&header_line).map_err(|e| Error::Transcript {
                line: 1,
                reason: e.to_string(),
            })?;
        let mut messages = Vec::new();
        for (idx, line) in lines {
            let line = line?;
            let lineno = idx + 1;
            if line.is_empty() {
                continue;
            }
            let record: Record = serde_json::from_str(&line).map_err(|e| Error::Transcript {
                line: lineno,
                reason: e.to_string(),
            })?;
            if record.seq != messages.len() {
                return Err(Error::Transcript {
                    line: lineno,
                    reason: format!("expected seq {}, found {}", messages.len(), record.seq),
                });
            }
            messages.push(Message::from_record(record, lineno)?);
        }
        Ok(Self { header, messages })
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::read_from(text.as_bytes())
    }
}
