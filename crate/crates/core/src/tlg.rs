//! Transfer-lexicon records.
//!
//! ```text
//! HEADWORD::"go","V"
//! MEANING::1::"jAnA"
//! ENG_EXP:: I go to school.
//! TR_NAT:: maiM skUla jAtA hUM.
//! TR_ENG-INFLNC::
//! FRAME_E:: A goes to B
//! FRAME_I:: A B [ko] jAtA hai
//! ERR::
//! COMNT::
//! ```
//!
//! A record runs from one `HEADWORD` line to the next. Lines without a
//! `FIELD::` prefix continue the previous field value.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::Serialize;

use crate::diag::{Diagnostic, SourceLine};
use crate::dict::DictEntry;
use crate::transfer::{self, FrameElement, Side};

pub const HEADWORD: &str = "HEADWORD";
pub const MEANING: &str = "MEANING";
pub const MEANING_OTH: &str = "MEANING_OTH";
pub const ENG_EXP: &str = "ENG_EXP";
pub const TR_NAT: &str = "TR_NAT";
pub const TR_ENG_INFLNC: &str = "TR_ENG-INFLNC";
/// Spelling used in translator instructions; accepted with a warning.
pub const TR_ENG_INFLNC_VARIANT: &str = "TR_ENG_INFLNCE";
pub const FRAME_E: &str = "FRAME_E";
pub const FRAME_I: &str = "FRAME_I";
pub const ERR: &str = "ERR";
pub const COMNT: &str = "COMNT";

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TlgRecord {
    pub headword: String,
    pub pos: String,
    pub meanings: Vec<TlgMeaning>,
    /// Unknown fields seen before the first MEANING line.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub extras: Vec<(String, String)>,
    #[serde(skip)]
    pub line: SourceLine,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct TlgMeaning {
    pub number: u32,
    pub gloss: String,
    pub gloss_other: Option<String>,
    pub eng_exp: String,
    pub tr_nat: Vec<String>,
    pub tr_eng_influence: Option<String>,
    pub frame_e: Option<String>,
    pub frame_i: Option<String>,
    pub err: Option<String>,
    pub comment: Option<String>,
    /// Unknown fields, verbatim and in file order.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub extras: Vec<(String, String)>,
    #[serde(skip)]
    pub line: SourceLine,
}

impl TlgRecord {
    pub fn new(headword: impl Into<String>, pos: impl Into<String>) -> Self {
        TlgRecord {
            headword: headword.into(),
            pos: pos.into(),
            meanings: Vec::new(),
            extras: Vec::new(),
            line: SourceLine::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Policy {
    #[default]
    Lenient,
    Strict,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParallelPair {
    pub english: String,
    pub translation: String,
    pub headword: String,
    pub sense: u32,
}

impl ParallelPair {
    /// `english TAB translation TAB headword TAB sense`
    pub fn to_tsv(&self) -> String {
        format!(
            "{}\t{}\t{}\t{}",
            self.english, self.translation, self.headword, self.sense
        )
    }
}

#[derive(Debug)]
struct FieldValue {
    name: String,
    value: String,
    line: usize,
}

#[derive(Default)]
struct MeaningBuilder {
    number: u32,
    gloss: String,
    line: usize,
    fields: Vec<FieldValue>,
}

#[derive(Default)]
struct Parser {
    records: Vec<TlgRecord>,
    diags: Vec<Diagnostic>,
    meaning: Option<MeaningBuilder>,
    /// Record-level unknown fields awaiting the first meaning.
    record_fields: Vec<FieldValue>,
    have_record: bool,
    /// Lines are dropped silently until the next MEANING/HEADWORD (the
    /// construct that caused this was already reported).
    skipping: bool,
}

impl Parser {
    fn flush_meaning(&mut self) {
        let Some(builder) = self.meaning.take() else {
            return;
        };
        let meaning = build_meaning(builder, &mut self.diags);
        self.records
            .last_mut()
            .expect("meaning belongs to a record")
            .meanings
            .push(meaning);
    }

    fn flush_record(&mut self) {
        self.flush_meaning();
        if !self.have_record {
            return;
        }
        let record = self.records.last_mut().expect("open record");
        let line = record.line.0;
        record.extras = std::mem::take(&mut self.record_fields)
            .into_iter()
            .map(|f| (f.name, f.value))
            .collect();
        if record.meanings.is_empty() {
            self.diags.push(Diagnostic::warning(
                line,
                format!("record \"{}\" has no meanings", record.headword),
            ));
        } else if record
            .meanings
            .iter()
            .enumerate()
            .any(|(i, m)| m.number as usize != i + 1)
        {
            self.diags.push(
                Diagnostic::warning(
                    line,
                    format!("meanings of \"{}\" are not numbered 1..n", record.headword),
                )
                .with_field(MEANING),
            );
        }
        self.have_record = false;
    }

    fn line(&mut self, line_no: usize, raw: &str) {
        let line = raw.trim();
        if line.is_empty() {
            return;
        }
        let Some((name, value)) = split_field(line) else {
            self.continuation(line_no, line);
            return;
        };
        match name {
            HEADWORD => {
                self.flush_record();
                self.skipping = false;
                match parse_headword_value(value) {
                    Some((headword, pos)) => {
                        let mut record = TlgRecord::new(headword, pos);
                        record.line = SourceLine(line_no);
                        self.records.push(record);
                        self.have_record = true;
                    }
                    None => {
                        self.diags.push(
                            Diagnostic::error(line_no, format!("malformed HEADWORD value: {value}"))
                                .with_field(HEADWORD),
                        );
                        self.skipping = true;
                    }
                }
            }
            MEANING => {
                self.flush_meaning();
                if !self.have_record {
                    if !self.skipping {
                        self.diags.push(
                            Diagnostic::error(line_no, "MEANING before any HEADWORD; skipped until next HEADWORD")
                                .with_field(MEANING),
                        );
                    }
                    self.skipping = true;
                    return;
                }
                match parse_meaning_value(value) {
                    Ok((number, gloss, quoted)) => {
                        if !quoted {
                            self.diags
                                .push(Diagnostic::warning(line_no, "MEANING gloss is not quoted").with_field(MEANING));
                        }
                        self.meaning = Some(MeaningBuilder {
                            number,
                            gloss,
                            line: line_no,
                            fields: Vec::new(),
                        });
                        self.skipping = false;
                    }
                    Err(msg) => {
                        self.diags.push(Diagnostic::error(line_no, msg).with_field(MEANING));
                        self.skipping = true;
                    }
                }
            }
            _ if self.skipping => {}
            _ => {
                let field = FieldValue {
                    name: name.to_string(),
                    value: value.to_string(),
                    line: line_no,
                };
                if let Some(m) = self.meaning.as_mut() {
                    m.fields.push(field);
                } else if self.have_record {
                    self.diags.push(
                        Diagnostic::warning(line_no, format!("field {name} outside any MEANING, kept verbatim"))
                            .with_field(name),
                    );
                    self.record_fields.push(field);
                } else {
                    self.diags.push(
                        Diagnostic::error(line_no, format!("field {name} before any HEADWORD, skipped"))
                            .with_field(name),
                    );
                }
            }
        }
    }

    fn continuation(&mut self, line_no: usize, text: &str) {
        if self.skipping {
            return;
        }
        match self.meaning.as_mut().and_then(|m| m.fields.last_mut()) {
            Some(field) => {
                if !field.value.is_empty() {
                    field.value.push(' ');
                }
                field.value.push_str(text);
            }
            None => self
                .diags
                .push(Diagnostic::warning(line_no, "text outside any field value, skipped")),
        }
    }
}

/// Split `NAME:: value`. The name must look like a field name (uppercase
/// letters, digits, `_`, `-`) for the line to count as a field line.
fn split_field(line: &str) -> Option<(&str, &str)> {
    let (name, value) = line.split_once("::")?;
    let name = name.trim();
    let is_name = !name.is_empty()
        && name.starts_with(|c: char| c.is_ascii_uppercase())
        && name
            .chars()
            .all(|c| c.is_ascii_uppercase() || c.is_ascii_digit() || c == '_' || c == '-');
    is_name.then(|| (name, value.trim()))
}

fn parse_headword_value(value: &str) -> Option<(String, String)> {
    let (head, rest) = take_quoted(value.trim())?;
    let rest = rest.trim_start().strip_prefix(',')?;
    let (pos, rest) = take_quoted(rest.trim_start())?;
    (!head.is_empty() && !pos.is_empty() && rest.trim().is_empty()).then(|| (head.to_string(), pos.to_string()))
}

fn take_quoted(s: &str) -> Option<(&str, &str)> {
    let s = s.strip_prefix('"')?;
    let end = s.find('"')?;
    Some((&s[..end], &s[end + 1..]))
}

/// `1::"jAnA"` → (1, "jAnA", quoted)
fn parse_meaning_value(value: &str) -> Result<(u32, String, bool), String> {
    let (num, gloss) = value
        .split_once("::")
        .ok_or_else(|| format!("MEANING value lacks 'N::' numbering: {value}"))?;
    let number = num
        .trim()
        .parse::<u32>()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("invalid MEANING number '{}'", num.trim()))?;
    let gloss = gloss.trim();
    match gloss.strip_prefix('"').and_then(|g| g.strip_suffix('"')) {
        Some(inner) => Ok((number, inner.to_string(), true)),
        None => Ok((number, gloss.to_string(), false)),
    }
}

fn build_meaning(builder: MeaningBuilder, diags: &mut Vec<Diagnostic>) -> TlgMeaning {
    let mut m = TlgMeaning {
        number: builder.number,
        gloss: builder.gloss,
        line: SourceLine(builder.line),
        ..TlgMeaning::default()
    };
    let mut seen: BTreeSet<&'static str> = BTreeSet::new();
    for field in builder.fields {
        let FieldValue { name, value, line } = field;
        let non_empty = (!value.is_empty()).then(|| value.clone());
        let slot: (&'static str, &mut Option<String>) = match name.as_str() {
            TR_NAT => {
                if !value.is_empty() {
                    m.tr_nat.push(value);
                }
                continue;
            }
            ENG_EXP => {
                if !seen.insert(ENG_EXP) {
                    diags.push(duplicate(line, ENG_EXP));
                }
                m.eng_exp = value;
                continue;
            }
            MEANING_OTH => (MEANING_OTH, &mut m.gloss_other),
            TR_ENG_INFLNC => (TR_ENG_INFLNC, &mut m.tr_eng_influence),
            TR_ENG_INFLNC_VARIANT => {
                diags.push(
                    Diagnostic::warning(
                        line,
                        format!("field spelled {TR_ENG_INFLNC_VARIANT}; canonical name is {TR_ENG_INFLNC}"),
                    )
                    .with_field(TR_ENG_INFLNC_VARIANT),
                );
                (TR_ENG_INFLNC, &mut m.tr_eng_influence)
            }
            FRAME_E => (FRAME_E, &mut m.frame_e),
            FRAME_I => (FRAME_I, &mut m.frame_i),
            ERR => (ERR, &mut m.err),
            COMNT => (COMNT, &mut m.comment),
            _ => {
                diags.push(
                    Diagnostic::warning(line, format!("unknown field {name}, kept verbatim")).with_field(name.clone()),
                );
                m.extras.push((name, value));
                continue;
            }
        };
        let (canonical, target) = slot;
        if !seen.insert(canonical) {
            diags.push(duplicate(line, canonical));
        }
        *target = non_empty;
    }
    m
}

fn duplicate(line: usize, field: &str) -> Diagnostic {
    Diagnostic::warning(line, format!("duplicate {field} in one meaning; later value wins")).with_field(field)
}

/// Parse a TLG file into records. Never fails; problems become diagnostics.
pub fn parse_tlg(source: &str) -> (Vec<TlgRecord>, Vec<Diagnostic>) {
    let mut parser = Parser::default();
    for (i, line) in source.lines().enumerate() {
        parser.line(i + 1, line);
    }
    parser.flush_record();
    let Parser { records, mut diags, .. } = parser;
    if records.is_empty() && diags.is_empty() {
        diags.push(Diagnostic::info(0, "no TLG records found"));
    }
    diags.sort_by_key(|d| d.line);
    (records, diags)
}

/// Check a record against the translator scheme. An empty result means the
/// record is clean.
pub fn validate_tlg(record: &TlgRecord, policy: Policy) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    if record.meanings.is_empty() {
        diags.push(Diagnostic::warning(
            record.line.0,
            format!("record \"{}\" has no meanings", record.headword),
        ));
    }
    for m in &record.meanings {
        let line = m.line.0;
        let sense = m.number;
        if m.eng_exp.trim().is_empty() {
            diags
                .push(Diagnostic::error(line, format!("meaning {sense}: missing English example")).with_field(ENG_EXP));
        }
        if m.tr_nat.is_empty() {
            diags.push(Diagnostic::error(line, format!("meaning {sense}: no natural translation")).with_field(TR_NAT));
        }
        if policy == Policy::Strict && m.tr_eng_influence.is_none() {
            diags.push(
                Diagnostic::warning(line, format!("meaning {sense}: empty {TR_ENG_INFLNC}")).with_field(TR_ENG_INFLNC),
            );
        }
        match (&m.frame_e, &m.frame_i) {
            (None, None) => {
                diags.push(Diagnostic::warning(line, format!("meaning {sense}: empty frame pair")).with_field(FRAME_E))
            }
            (Some(_), None) => {
                diags.push(Diagnostic::warning(line, format!("meaning {sense}: {FRAME_I} missing")).with_field(FRAME_I))
            }
            (None, Some(_)) => {
                diags.push(Diagnostic::warning(line, format!("meaning {sense}: {FRAME_E} missing")).with_field(FRAME_E))
            }
            (Some(e), Some(i)) => check_frames(line, sense, e, i, &mut diags),
        }
    }
    diags
}

fn check_frames(line: usize, sense: u32, frame_e: &str, frame_i: &str, diags: &mut Vec<Diagnostic>) {
    let source = match transfer::parse_frame(frame_e, Side::Source) {
        Ok(f) => f,
        Err(e) => {
            diags.push(Diagnostic::warning(line, format!("meaning {sense}: {e}")).with_field(FRAME_E));
            return;
        }
    };
    let target = match transfer::parse_frame(frame_i, Side::Target) {
        Ok(f) => f,
        Err(e) => {
            diags.push(Diagnostic::warning(line, format!("meaning {sense}: {e}")).with_field(FRAME_I));
            return;
        }
    };
    let bound = source.slots();
    for el in &target.elements {
        if let FrameElement::Slot(letter) = el {
            if !bound.contains(letter) {
                diags.push(
                    Diagnostic::warning(line, format!("meaning {sense}: slot {letter} unbound in source frame"))
                        .with_field(FRAME_I),
                );
            }
        }
    }
}

/// Skeleton record for a contributor: one meaning per sense, the gloss and
/// first example copied, everything else blank.
pub fn seed_from_dictionary(entry: &DictEntry) -> (TlgRecord, Vec<Diagnostic>) {
    let mut diags = Vec::new();
    let mut record = TlgRecord::new(entry.headword.clone(), entry.pos.clone());
    for sense in &entry.senses {
        let eng_exp = match sense.examples.first() {
            Some(ex) => ex.clone(),
            None => {
                diags.push(
                    Diagnostic::warning(
                        0,
                        format!(
                            "\"{}\" sense {}: no example sentence to seed {ENG_EXP}",
                            entry.headword, sense.number
                        ),
                    )
                    .with_field(ENG_EXP),
                );
                String::new()
            }
        };
        record.meanings.push(TlgMeaning {
            number: sense.number,
            gloss: sense.gloss.to_string(),
            eng_exp,
            ..TlgMeaning::default()
        });
    }
    (record, diags)
}

fn push_field(out: &mut String, name: &str, value: &str) {
    if value.is_empty() {
        let _ = writeln!(out, "{name}::");
    } else {
        let _ = writeln!(out, "{name}:: {value}");
    }
}

/// Canonical text, fields in the standard order. Empty optional fields are
/// written as bare `FIELD::` lines; `MEANING_OTH` only when present.
pub fn emit_tlg(records: &[TlgRecord]) -> String {
    let mut out = String::new();
    for (i, record) in records.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let _ = writeln!(out, "{HEADWORD}::\"{}\",\"{}\"", record.headword, record.pos);
        for (name, value) in &record.extras {
            push_field(&mut out, name, value);
        }
        for m in &record.meanings {
            let _ = writeln!(out, "{MEANING}::{}::\"{}\"", m.number, m.gloss);
            if let Some(other) = &m.gloss_other {
                push_field(&mut out, MEANING_OTH, other);
            }
            push_field(&mut out, ENG_EXP, &m.eng_exp);
            if m.tr_nat.is_empty() {
                push_field(&mut out, TR_NAT, "");
            }
            for tr in &m.tr_nat {
                push_field(&mut out, TR_NAT, tr);
            }
            let opt = |v: &Option<String>| v.clone().unwrap_or_default();
            push_field(&mut out, TR_ENG_INFLNC, &opt(&m.tr_eng_influence));
            push_field(&mut out, FRAME_E, &opt(&m.frame_e));
            push_field(&mut out, FRAME_I, &opt(&m.frame_i));
            push_field(&mut out, ERR, &opt(&m.err));
            push_field(&mut out, COMNT, &opt(&m.comment));
            for (name, value) in &m.extras {
                push_field(&mut out, name, value);
            }
        }
    }
    out
}

/// One pair per (meaning, natural translation).
pub fn extract_parallel_corpus(records: &[TlgRecord]) -> Vec<ParallelPair> {
    records
        .iter()
        .flat_map(|r| {
            r.meanings.iter().flat_map(move |m| {
                m.tr_nat.iter().map(move |tr| ParallelPair {
                    english: m.eng_exp.clone(),
                    translation: tr.clone(),
                    headword: r.headword.clone(),
                    sense: m.number,
                })
            })
        })
        .collect()
}

pub fn to_interchange(records: &[TlgRecord]) -> serde_json::Value {
    serde_json::json!({ "records": records })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diag::Severity;
    use crate::dict::parse_dictionary;
    use proptest::prelude::*;

    const GO_TLG: &str = include_str!("../tests/fixtures/go.tlg");
    const GO_DICT: &str = include_str!("../tests/fixtures/go.dict");

    fn go() -> TlgRecord {
        let (mut records, diags) = parse_tlg(GO_TLG);
        assert!(diags.is_empty(), "{diags:?}");
        assert_eq!(records.len(), 1);
        records.remove(0)
    }

    #[test]
    fn go_record() {
        let r = go();
        assert_eq!((r.headword.as_str(), r.pos.as_str()), ("go", "V"));
        assert_eq!(r.meanings.len(), 2);
        let m1 = &r.meanings[0];
        assert_eq!(m1.gloss, "jAnA");
        assert_eq!(m1.eng_exp, "I go to school.");
        assert_eq!(m1.tr_nat, vec!["maiM skUla jAtA hUM."]);
        assert_eq!(m1.frame_e.as_deref(), Some("A goes to B"));
        assert_eq!(m1.frame_i.as_deref(), Some("A B [ko] jAtA hai"));
        assert_eq!(m1.tr_eng_influence, None);
        assert_eq!(m1.err, None);
        let m2 = &r.meanings[1];
        assert_eq!(m2.gloss, "rakha~jAnA");
        assert_eq!(m2.tr_nat, vec!["ye kapaDe usa sUtakesa meM rakhe jAyeMge"]);
        assert_eq!(m2.frame_i.as_deref(), Some("A B meM rakhA_jAtA_hai"));
        assert_eq!(m2.line.0, 19);
    }

    #[test]
    fn empty_input() {
        let (records, diags) = parse_tlg("");
        assert!(records.is_empty());
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].severity, Severity::Info);
    }

    #[test]
    fn repeated_tr_nat_keeps_order() {
        let src = "HEADWORD::\"go\",\"V\"\nMEANING::1::\"jAnA\"\nENG_EXP:: I go.\nTR_NAT:: first\nTR_NAT:: second\n";
        let (records, _) = parse_tlg(src);
        assert_eq!(records[0].meanings[0].tr_nat, vec!["first", "second"]);
    }

    #[test]
    fn meaning_before_headword() {
        let src = "MEANING::1::\"x\"\nENG_EXP:: lost\nHEADWORD::\"a\",\"N\"\nMEANING::1::\"y\"\nENG_EXP:: kept\n";
        let (records, diags) = parse_tlg(src);
        assert_eq!(records.len(), 1);
        assert_eq!(records[0].meanings[0].eng_exp, "kept");
        assert_eq!(diags.len(), 1);
        assert_eq!((diags[0].severity, diags[0].line), (Severity::Error, 1));
    }

    #[test]
    fn duplicate_and_unknown_fields() {
        let src =
            "HEADWORD::\"a\",\"N\"\nMEANING::1::\"y\"\nENG_EXP:: one\nENG_EXP:: two\nFOO:: bar\nTR_ENG_INFLNCE:: alt\n";
        let (records, diags) = parse_tlg(src);
        let m = &records[0].meanings[0];
        assert_eq!(m.eng_exp, "two");
        assert_eq!(m.extras, vec![("FOO".to_string(), "bar".to_string())]);
        assert_eq!(m.tr_eng_influence.as_deref(), Some("alt"));
        let fields: Vec<_> = diags.iter().map(|d| d.field.clone().unwrap()).collect();
        assert_eq!(fields, vec![ENG_EXP, "FOO", TR_ENG_INFLNC_VARIANT]);
        assert!(diags.iter().all(|d| d.severity == Severity::Warning));

        let again = parse_tlg(&emit_tlg(&records)).0;
        assert_eq!(again, records);
    }

    #[test]
    fn validate_go_clean() {
        assert!(validate_tlg(&go(), Policy::Lenient).is_empty());
        let strict = validate_tlg(&go(), Policy::Strict);
        assert_eq!(strict.len(), 2);
        assert!(strict.iter().all(|d| d.severity == Severity::Warning));
    }

    #[test]
    fn validate_missing_tr_nat() {
        let mut r = go();
        r.meanings[0].tr_nat.clear();
        let diags = validate_tlg(&r, Policy::Lenient);
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].severity, Severity::Error);
        assert_eq!(diags[0].field.as_deref(), Some(TR_NAT));
    }

    #[test]
    fn validate_unbound_target_slot() {
        let mut r = go();
        r.meanings.truncate(1);
        r.meanings[0].frame_e = Some("A goes".into());
        r.meanings[0].frame_i = Some("A B meM jAtA hai".into());
        let diags = validate_tlg(&r, Policy::Lenient);
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].severity, Severity::Warning);
        assert!(diags[0].message.contains("slot B unbound"));
    }

    #[test]
    fn seed_go() {
        let (dict, _) = parse_dictionary(GO_DICT);
        let (seed, diags) = seed_from_dictionary(&dict.entries[0]);
        assert!(diags.is_empty());
        assert_eq!(seed.meanings.len(), 7);
        assert_eq!(seed.meanings[0].eng_exp, "I go to school.");
        assert_eq!(seed.meanings[2].gloss, "samAnA[<jAnA]");
        let numbers: Vec<_> = seed.meanings.iter().map(|m| m.number).collect();
        assert_eq!(numbers, (1..=7).collect::<Vec<_>>());

        let text = emit_tlg(std::slice::from_ref(&seed));
        let (again, _) = parse_tlg(&text);
        assert_eq!(again, vec![seed.clone()]);

        let diags = validate_tlg(&seed, Policy::Lenient);
        let missing = diags
            .iter()
            .filter(|d| d.is_error() && d.field.as_deref() == Some(TR_NAT))
            .count();
        assert_eq!(missing, 7);
    }

    #[test]
    fn seed_without_examples() {
        let (dict, _) = parse_dictionary("\"x\", \"N\",\n--\"1.a\"\n");
        let (seed, diags) = seed_from_dictionary(&dict.entries[0]);
        assert_eq!(seed.meanings.len(), 1);
        assert_eq!(seed.meanings[0].eng_exp, "");
        assert_eq!(diags.len(), 1);
    }

    #[test]
    fn emit_format() {
        let text = emit_tlg(&[go()]);
        assert!(text.starts_with("HEADWORD::\"go\",\"V\"\nMEANING::1::\"jAnA\"\nENG_EXP:: I go to school.\n"));
        assert!(text.contains("\nTR_ENG-INFLNC::\n"));
        assert!(text.contains("\nERR::\nCOMNT::\n"));
        assert_eq!(parse_tlg(&text).0, vec![go()]);
        assert_eq!(emit_tlg(&[]), "");
    }

    #[test]
    fn parallel_corpus() {
        let pairs = extract_parallel_corpus(&[go()]);
        assert_eq!(pairs.len(), 2);
        assert_eq!(pairs[0].english, "I go to school.");
        assert_eq!(pairs[0].translation, "maiM skUla jAtA hUM.");
        assert_eq!(pairs[0].to_tsv(), "I go to school.\tmaiM skUla jAtA hUM.\tgo\t1");
        assert_eq!(pairs[1].sense, 2);

        let mut r = go();
        r.meanings[0].tr_nat.push("maiM pAThaSAlA jAtA hUM.".into());
        r.meanings[1].tr_nat.clear();
        let pairs = extract_parallel_corpus(&[r]);
        assert_eq!(pairs.len(), 2);
        assert_eq!(pairs[0].english, pairs[1].english);
        assert!(extract_parallel_corpus(&[]).is_empty());
    }

    fn value() -> impl Strategy<Value = String> {
        "[a-zA-Z][a-zA-Z .]{0,10}[a-zA-Z.]".prop_map(|s| s.split_whitespace().collect::<Vec<_>>().join(" "))
    }

    fn meaning() -> impl Strategy<Value = TlgMeaning> {
        (
            "[a-zA-Z~]{1,8}",
            prop::option::of(value()),
            value(),
            prop::collection::vec(value(), 0..3),
            prop::option::of(value()),
            prop::option::of(value()),
            prop::option::of(value()),
            prop::option::of(value()),
        )
            .prop_map(
                |(gloss, gloss_other, eng_exp, tr_nat, infl, fe, fi, comment)| TlgMeaning {
                    gloss,
                    gloss_other,
                    eng_exp,
                    tr_nat,
                    tr_eng_influence: infl,
                    frame_e: fe,
                    frame_i: fi,
                    comment,
                    ..TlgMeaning::default()
                },
            )
    }

    proptest! {
        #[test]
        fn emit_parse_round_trip(records in prop::collection::vec(
            ("[a-z]{1,6}", "[A-Z]", prop::collection::vec(meaning(), 0..3)), 0..3)
        ) {
            let records: Vec<TlgRecord> = records
                .into_iter()
                .map(|(h, p, ms)| {
                    let mut r = TlgRecord::new(h, p);
                    r.meanings = ms
                        .into_iter()
                        .enumerate()
                        .map(|(i, mut m)| { m.number = i as u32 + 1; m })
                        .collect();
                    r
                })
                .collect();
            let text = emit_tlg(&records);
            let (parsed, _) = parse_tlg(&text);
            prop_assert_eq!(&parsed, &records);
            let pairs = extract_parallel_corpus(&parsed);
            let expected: usize = parsed.iter().flat_map(|r| &r.meanings).map(|m| m.tr_nat.len()).sum();
            prop_assert_eq!(pairs.len(), expected);
        }
    }
}
