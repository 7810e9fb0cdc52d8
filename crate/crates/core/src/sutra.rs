//! Core-meaning formulas and sense threads.
//!
//! A formula `viSaya[~~ < niSpAdana]` reads "viSaya, derived from niSpAdana
//! after two turns". The source may itself carry a derivation. A thread
//! lists the stages of sense evolution:
//!
//! ```text
//! niSpAdana(astitwa meM IAnA/AnA) --> niSpatti kA srota --> niSpatti
//! ```

use std::collections::HashSet;
use std::fmt;
use std::sync::OnceLock;

use regex::Regex;
use serde::Serialize;
use thiserror::Error;

use crate::diag::Diagnostic;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SutraFormula {
    pub head: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub derivation: Option<Box<Derivation>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Derivation {
    /// Number of `~` marks.
    pub turn_count: usize,
    pub source: SutraFormula,
}

impl SutraFormula {
    pub fn bare(head: impl Into<String>) -> Self {
        SutraFormula {
            head: head.into(),
            derivation: None,
        }
    }

    pub fn derived(head: impl Into<String>, turn_count: usize, source: SutraFormula) -> Self {
        SutraFormula {
            head: head.into(),
            derivation: Some(Box::new(Derivation { turn_count, source })),
        }
    }

    /// Head of the deepest source: the core sense.
    pub fn innermost_source(&self) -> &str {
        let mut f = self;
        while let Some(d) = &f.derivation {
            f = &d.source;
        }
        &f.head
    }
}

impl fmt::Display for SutraFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.head)?;
        if let Some(d) = &self.derivation {
            f.write_str("[")?;
            for _ in 0..d.turn_count {
                f.write_str("~")?;
            }
            if d.turn_count > 0 {
                f.write_str(" ")?;
            }
            write!(f, "< {}]", d.source)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormulaError {
    #[error("unbalanced '{ch}' at position {position}")]
    Unbalanced { ch: char, position: usize },
    #[error("'<' outside brackets at position {position}")]
    StrayDerivation { position: usize },
    #[error("expected '<' at position {position}")]
    ExpectedDerivation { position: usize },
    #[error("empty head at position {position}")]
    EmptyHead { position: usize },
    #[error("unexpected '{ch}' at position {position}")]
    Unexpected { ch: char, position: usize },
}

struct FormulaParser<'a> {
    chars: Vec<(usize, char)>,
    at: usize,
    text: &'a str,
}

impl FormulaParser<'_> {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.at).map(|&(_, c)| c)
    }

    /// 1-based character position of the cursor.
    fn pos(&self) -> usize {
        self.at + 1
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.at += 1;
        }
    }

    fn formula(&mut self, depth: usize) -> Result<SutraFormula, FormulaError> {
        self.skip_ws();
        let start = self.at;
        while let Some(c) = self.peek() {
            match c {
                '[' | ']' | '<' | '~' => break,
                _ => self.at += 1,
            }
        }
        let head = self.slice(start, self.at).trim().to_string();
        if head.is_empty() {
            return Err(FormulaError::EmptyHead { position: start + 1 });
        }
        match self.peek() {
            None => Ok(SutraFormula::bare(head)),
            Some(']') if depth > 0 => Ok(SutraFormula::bare(head)),
            Some(']') => Err(FormulaError::Unbalanced {
                ch: ']',
                position: self.pos(),
            }),
            Some('<') => Err(FormulaError::StrayDerivation { position: self.pos() }),
            Some('~') => Err(FormulaError::Unexpected {
                ch: '~',
                position: self.pos(),
            }),
            Some(_) => {
                let open = self.pos();
                self.at += 1;
                self.skip_ws();
                let mut turns = 0;
                while self.peek() == Some('~') {
                    turns += 1;
                    self.at += 1;
                    self.skip_ws();
                }
                if self.peek() != Some('<') {
                    return match self.peek() {
                        None => Err(FormulaError::Unbalanced {
                            ch: '[',
                            position: open,
                        }),
                        _ => Err(FormulaError::ExpectedDerivation { position: self.pos() }),
                    };
                }
                self.at += 1;
                let source = self.formula(depth + 1)?;
                self.skip_ws();
                match self.peek() {
                    Some(']') => self.at += 1,
                    None => {
                        return Err(FormulaError::Unbalanced {
                            ch: '[',
                            position: open,
                        })
                    }
                    Some(c) => {
                        return Err(FormulaError::Unexpected {
                            ch: c,
                            position: self.pos(),
                        })
                    }
                }
                Ok(SutraFormula::derived(head, turns, source))
            }
        }
    }

    fn slice(&self, from: usize, to: usize) -> &str {
        let start = self.chars.get(from).map_or(self.text.len(), |&(b, _)| b);
        let end = self.chars.get(to).map_or(self.text.len(), |&(b, _)| b);
        &self.text[start..end]
    }
}

/// Parse `HEAD[~* < SOURCE]`, where SOURCE is again a formula.
pub fn parse_formula(text: &str) -> Result<SutraFormula, FormulaError> {
    let mut p = FormulaParser {
        chars: text.char_indices().collect(),
        at: 0,
        text,
    };
    let f = p.formula(0)?;
    p.skip_ws();
    match p.peek() {
        None => Ok(f),
        Some(']') => Err(FormulaError::Unbalanced {
            ch: ']',
            position: p.pos(),
        }),
        Some('<') => Err(FormulaError::StrayDerivation { position: p.pos() }),
        Some(c) => Err(FormulaError::Unexpected {
            ch: c,
            position: p.pos(),
        }),
    }
}

pub fn emit_formula(f: &SutraFormula) -> String {
    f.to_string()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ThreadStage {
    pub label: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gloss: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub examples: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SenseThread {
    pub stages: Vec<ThreadStage>,
}

impl fmt::Display for ThreadStage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)?;
        if let Some(g) = &self.gloss {
            write!(f, " ({g})")?;
        }
        if !self.examples.is_empty() {
            let quoted: Vec<String> = self.examples.iter().map(|e| format!("\"{e}\"")).collect();
            write!(f, " eg: {}", quoted.join(", "))?;
        }
        Ok(())
    }
}

impl fmt::Display for SenseThread {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, stage) in self.stages.iter().enumerate() {
            if i > 0 {
                f.write_str(" --> ")?;
            }
            write!(f, "{stage}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ThreadError {
    #[error("empty stage {stage}")]
    EmptyStage { stage: usize },
    #[error("stage {stage}: unbalanced parenthesis")]
    UnbalancedGloss { stage: usize },
    #[error("stage {stage}: unterminated quoted example")]
    UnterminatedExample { stage: usize },
}

fn arrow() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"-{2,}>").expect("valid regex"))
}

fn example_marker() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\beg\s*:").expect("valid regex"))
}

/// Parse stages separated by `-->`. A stage is `LABEL [(gloss)] [eg: "..", ..]`.
pub fn parse_thread(text: &str) -> Result<SenseThread, ThreadError> {
    let stages = arrow()
        .split(text)
        .enumerate()
        .map(|(i, s)| parse_stage(s, i + 1))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SenseThread { stages })
}

fn parse_stage(text: &str, stage: usize) -> Result<ThreadStage, ThreadError> {
    let (main, examples) = match example_marker().find(text) {
        Some(m) => (&text[..m.start()], parse_examples(&text[m.end()..], stage)?),
        None => (text, Vec::new()),
    };
    let main = main.trim();
    let (label, gloss) = match main.strip_suffix(')') {
        Some(inner) => {
            let open = inner.rfind('(').ok_or(ThreadError::UnbalancedGloss { stage })?;
            (inner[..open].trim(), Some(inner[open + 1..].trim().to_string()))
        }
        None if main.contains(['(', ')']) => return Err(ThreadError::UnbalancedGloss { stage }),
        None => (main, None),
    };
    if label.is_empty() {
        return Err(ThreadError::EmptyStage { stage });
    }
    Ok(ThreadStage {
        label: label.to_string(),
        gloss: gloss.filter(|g| !g.is_empty()),
        examples,
    })
}

/// Comma-separated examples, quoted or not. Commas inside quotes separate
/// examples too.
fn parse_examples(text: &str, stage: usize) -> Result<Vec<String>, ThreadError> {
    if !text.matches('"').count().is_multiple_of(2) {
        return Err(ThreadError::UnterminatedExample { stage });
    }
    Ok(text
        .split([',', '"'])
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect())
}

pub fn emit_thread(t: &SenseThread) -> String {
    t.to_string()
}

/// Symmetric label ↔ alias pairs used by [`check_consistency`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AliasTable {
    pairs: HashSet<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("alias line {line}: expected 'label <TAB> alias'")]
pub struct AliasError {
    pub line: usize,
}

impl AliasTable {
    /// `label TAB alias` per line; blank lines and `#` comments skipped.
    pub fn parse(text: &str) -> Result<Self, AliasError> {
        let mut table = AliasTable::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (label, alias) = line.split_once('\t').ok_or(AliasError { line: i + 1 })?;
            let (label, alias) = (label.trim(), alias.trim());
            if label.is_empty() || alias.is_empty() {
                return Err(AliasError { line: i + 1 });
            }
            table.insert(label, alias);
        }
        Ok(table)
    }

    pub fn insert(&mut self, label: &str, alias: &str) {
        self.pairs.insert((label.to_string(), alias.to_string()));
    }

    pub fn related(&self, a: &str, b: &str) -> bool {
        a == b
            || self.pairs.contains(&(a.to_string(), b.to_string()))
            || self.pairs.contains(&(b.to_string(), a.to_string()))
    }
}

/// Does `formula` agree with `thread`? The core sense must open the thread
/// and the formula head must name one of its stages (directly or through an
/// alias).
pub fn check_consistency(formula: &SutraFormula, thread: &SenseThread, aliases: &AliasTable) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    let core = formula.innermost_source();
    match thread.stages.first() {
        Some(first) if first.label == core => {}
        Some(first) => diags.push(Diagnostic::warning(
            0,
            format!("core sense '{core}' differs from first thread stage '{}'", first.label),
        )),
        None => diags.push(Diagnostic::warning(0, "thread has no stages")),
    }
    if !thread.stages.iter().any(|s| aliases.related(&s.label, &formula.head)) {
        diags.push(Diagnostic::warning(
            0,
            format!("formula head '{}' matches no thread stage", formula.head),
        ));
    }
    diags
}

/// Threads from a thread file: one per line, or a block whose continuation
/// lines start with an arrow. `#` lines are comments. Each item carries the
/// line its thread starts on.
pub fn split_thread_file(text: &str) -> Vec<(usize, String)> {
    let mut out: Vec<(usize, String)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        match out.last_mut() {
            Some((_, current)) if arrow().find(line).is_some_and(|m| m.start() == 0) => {
                current.push(' ');
                current.push_str(line);
            }
            _ => out.push((i + 1, line.to_string())),
        }
    }
    out
}

/// Formula lines from a formula file: one per line, `#` comments skipped.
pub fn split_formula_file(text: &str) -> Vec<(usize, String)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .map(|(i, l)| (i, l.to_string()))
        .collect()
}
