//! Slot-pattern frames and structural transfer.
//!
//! A source frame such as `A goes into B` is matched against a sentence; the
//! slot captures are then substituted into the paired target frame
//! `A B meM rakhA_jAtA_hai`. Slot fillers are copied verbatim.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::diag::Diagnostic;
use crate::dict::Dictionary;
use crate::tlg::{TlgRecord, FRAME_I};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Source,
    Target,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "kebab-case")]
pub enum FrameElement {
    Slot(char),
    Literal(String),
    /// A bracketed literal such as `[ko]`.
    OptionalLiteral(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Frame {
    pub side: Side,
    pub elements: Vec<FrameElement>,
}

impl Frame {
    pub fn slots(&self) -> BTreeSet<char> {
        self.elements
            .iter()
            .filter_map(|e| match e {
                FrameElement::Slot(c) => Some(*c),
                _ => None,
            })
            .collect()
    }
}

impl fmt::Display for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, el) in self.elements.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            match el {
                FrameElement::Slot(c) => write!(f, "{c}")?,
                FrameElement::Literal(s) => f.write_str(s)?,
                FrameElement::OptionalLiteral(s) => write!(f, "[{s}]")?,
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FrameError {
    #[error("empty frame")]
    Empty,
    #[error("slot {0} appears more than once in one frame")]
    DuplicateSlot(char),
    #[error("malformed optional literal '{0}'")]
    MalformedOptional(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RenderError {
    #[error("slot {0} is not bound")]
    UnboundSlot(char),
}

/// Captured source spans keyed by slot letter.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SlotBinding {
    pub bindings: BTreeMap<char, Vec<String>>,
}

impl SlotBinding {
    pub fn get(&self, slot: char) -> Option<&[String]> {
        self.bindings.get(&slot).map(Vec::as_slice)
    }

    /// Slot letter and captured span, one row per slot.
    pub fn table(&self) -> Vec<(char, String)> {
        self.bindings.iter().map(|(k, v)| (*k, v.join(" "))).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OptionalPolicy {
    #[default]
    Include,
    Drop,
    Bracket,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct TransferOptions {
    pub optional: OptionalPolicy,
    /// Only try this meaning number.
    pub sense: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TransferResult {
    pub output: String,
    pub binding: SlotBinding,
    pub meaning_number: u32,
    pub unmatched: bool,
}

impl TransferResult {
    pub fn unmatched() -> Self {
        TransferResult {
            output: String::new(),
            binding: SlotBinding::default(),
            meaning_number: 0,
            unmatched: true,
        }
    }
}

fn is_slot(tok: &str) -> Option<char> {
    let mut chars = tok.chars();
    match (chars.next(), chars.next()) {
        (Some(c), None) if c.is_ascii_uppercase() => Some(c),
        _ => None,
    }
}

pub fn parse_frame(text: &str, side: Side) -> Result<Frame, FrameError> {
    let mut elements = Vec::new();
    let mut seen = BTreeSet::new();
    for tok in text.split_whitespace() {
        let el = if let Some(c) = is_slot(tok) {
            if !seen.insert(c) {
                return Err(FrameError::DuplicateSlot(c));
            }
            FrameElement::Slot(c)
        } else if tok.starts_with('[') || tok.ends_with(']') {
            let inner = tok
                .strip_prefix('[')
                .and_then(|t| t.strip_suffix(']'))
                .filter(|t| !t.is_empty() && !t.contains(['[', ']']))
                .ok_or_else(|| FrameError::MalformedOptional(tok.to_string()))?;
            FrameElement::OptionalLiteral(inner.to_string())
        } else {
            FrameElement::Literal(tok.to_string())
        };
        elements.push(el);
    }
    if elements.is_empty() {
        return Err(FrameError::Empty);
    }
    Ok(Frame { side, elements })
}

/// Lowercase and strip `es`, `s`, `ed` or `ing` while a stem of at least two
/// letters remains. Stripping repeats until nothing changes, so the result is
/// a fixed point.
pub fn inflection_fold(token: &str) -> String {
    let mut word = token.to_lowercase();
    'strip: loop {
        for suffix in ["es", "s", "ed", "ing"] {
            if let Some(stem) = word.strip_suffix(suffix) {
                if stem.chars().count() >= 2 {
                    word.truncate(stem.len());
                    continue 'strip;
                }
            }
        }
        return word;
    }
}

/// Whitespace split with trailing `.,!?` removed from every token.
pub fn tokenize(sentence: &str) -> Vec<String> {
    sentence
        .split_whitespace()
        .map(|t| t.trim_end_matches(['.', ',', '!', '?']))
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}

/// Match a source frame against a tokenized sentence.
///
/// The frame must cover the whole sentence. Slots take the shortest span
/// that lets the rest of the frame match, resolved left to right.
pub fn match_frame(frame: &Frame, sentence: &[String]) -> Option<SlotBinding> {
    let folded: Vec<String> = sentence.iter().map(|t| inflection_fold(t)).collect();
    let mut spans = Vec::new();
    if match_from(&frame.elements, &folded, 0, &mut spans) {
        let bindings = spans
            .into_iter()
            .map(|(slot, start, end)| (slot, sentence[start..end].to_vec()))
            .collect();
        Some(SlotBinding { bindings })
    } else {
        None
    }
}

fn match_from(elements: &[FrameElement], folded: &[String], at: usize, spans: &mut Vec<(char, usize, usize)>) -> bool {
    let Some((first, rest)) = elements.split_first() else {
        return at == folded.len();
    };
    match first {
        FrameElement::Literal(lit) => {
            folded.get(at) == Some(&inflection_fold(lit)) && match_from(rest, folded, at + 1, spans)
        }
        FrameElement::OptionalLiteral(lit) => {
            (folded.get(at) == Some(&inflection_fold(lit)) && match_from(rest, folded, at + 1, spans))
                || match_from(rest, folded, at, spans)
        }
        FrameElement::Slot(slot) => {
            // each remaining element needs at least one token, optional ones none
            let min_rest = rest
                .iter()
                .filter(|e| !matches!(e, FrameElement::OptionalLiteral(_)))
                .count();
            let mut end = at + 1;
            while end + min_rest <= folded.len() {
                spans.push((*slot, at, end));
                if match_from(rest, folded, end, spans) {
                    return true;
                }
                spans.pop();
                end += 1;
            }
            false
        }
    }
}

pub fn render_target(frame: &Frame, binding: &SlotBinding, policy: OptionalPolicy) -> Result<String, RenderError> {
    let mut out: Vec<String> = Vec::new();
    for el in &frame.elements {
        match el {
            FrameElement::Slot(c) => {
                let span = binding.get(*c).ok_or(RenderError::UnboundSlot(*c))?;
                out.extend(span.iter().cloned());
            }
            FrameElement::Literal(s) => out.push(s.clone()),
            FrameElement::OptionalLiteral(s) => match policy {
                OptionalPolicy::Include => out.push(s.clone()),
                OptionalPolicy::Drop => {}
                OptionalPolicy::Bracket => out.push(format!("[{s}]")),
            },
        }
    }
    Ok(out.join(" "))
}

/// Try every meaning's frame pair in meaning-number order and return one
/// result per match.
pub fn transfer_sentence(
    record: &TlgRecord,
    sentence: &str,
    options: TransferOptions,
) -> (Vec<TransferResult>, Vec<Diagnostic>) {
    let tokens = tokenize(sentence);
    let mut meanings: Vec<_> = record
        .meanings
        .iter()
        .filter(|m| options.sense.is_none_or(|n| m.number == n))
        .collect();
    meanings.sort_by_key(|m| m.number);

    let mut results = Vec::new();
    let mut diags = Vec::new();
    for m in meanings {
        let line = m.line.0;
        let Some(frame_e) = m.frame_e.as_deref() else {
            continue;
        };
        let Some(frame_i) = m.frame_i.as_deref() else {
            diags.push(
                Diagnostic::warning(
                    line,
                    format!(
                        "\"{}\" meaning {}: FRAME_E without FRAME_I, skipped",
                        record.headword, m.number
                    ),
                )
                .with_field(FRAME_I),
            );
            continue;
        };
        match transfer_with_frames(frame_e, frame_i, &tokens, options.optional) {
            Ok(Some((output, binding))) => results.push(TransferResult {
                output,
                binding,
                meaning_number: m.number,
                unmatched: false,
            }),
            Ok(None) => {}
            Err(msg) => diags.push(Diagnostic::warning(
                line,
                format!("\"{}\" meaning {}: {msg}, skipped", record.headword, m.number),
            )),
        }
    }
    (results, diags)
}

/// Match `frame_e` against `tokens` and render `frame_i`. `Ok(None)` when the
/// source frame does not match.
pub fn transfer_with_frames(
    frame_e: &str,
    frame_i: &str,
    tokens: &[String],
    policy: OptionalPolicy,
) -> Result<Option<(String, SlotBinding)>, String> {
    let source = parse_frame(frame_e, Side::Source).map_err(|e| format!("FRAME_E: {e}"))?;
    let target = parse_frame(frame_i, Side::Target).map_err(|e| format!("FRAME_I: {e}"))?;
    let Some(binding) = match_frame(&source, tokens) else {
        return Ok(None);
    };
    let output = render_target(&target, &binding, policy).map_err(|e| format!("FRAME_I: {e}"))?;
    Ok(Some((output, binding)))
}

/// First-sense gloss for each slot token found in `dict`. Used only to
/// annotate binding tables; the transfer output is never changed.
pub fn gloss_slots(binding: &SlotBinding, dict: &Dictionary) -> Vec<(char, String, String)> {
    let mut out = Vec::new();
    for (slot, span) in &binding.bindings {
        for tok in span {
            let key = tok.to_lowercase();
            let entry = dict.lookup(tok, None).into_iter().chain(dict.lookup(&key, None)).next();
            if let Some(sense) = entry.and_then(|e| e.senses.first()) {
                out.push((*slot, tok.clone(), sense.gloss.primary_reading()));
            }
        }
    }
    out
}
