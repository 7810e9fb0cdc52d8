//! The bilingual dictionary format.
//!
//! ```text
//! "go", "V",
//! --"1.jAnA"
//! I go to school.
//! --"3.samAnA[<jAnA]"
//! This key will not go in that lock.
//! ```
//!
//! An entry opens with a quoted headword and part of speech. Each sense is a
//! `--"N.gloss"` line followed by zero or more example sentences. Glosses
//! have their own micro-syntax, see [`parse_gloss`].

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::diag::Diagnostic;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DictEntry {
    pub headword: String,
    pub pos: String,
    pub senses: Vec<Sense>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Sense {
    pub number: u32,
    pub gloss: GlossExpr,
    pub examples: Vec<String>,
}

/// A parsed gloss such as `aAvAjZa~honA/karanA` or `ho~jAnA{sthiti}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GlossExpr {
    pub components: Vec<GlossComponent>,
    /// Source gloss from a trailing `[<...]`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub derivation: Option<String>,
    /// Context from a trailing `{...}`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub context: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GlossComponent {
    /// `/`-separated alternatives.
    pub alternatives: Vec<String>,
    /// Tied to the previous component by `~`.
    pub joined: bool,
}

impl GlossExpr {
    pub fn simple(word: impl Into<String>) -> Self {
        GlossExpr {
            components: vec![GlossComponent {
                alternatives: vec![word.into()],
                joined: false,
            }],
            derivation: None,
            context: None,
        }
    }

    /// The gloss without its annotations, e.g. `aAvAjZa~honA/karanA`.
    pub fn body(&self) -> String {
        let mut out = String::new();
        for comp in &self.components {
            if comp.joined {
                out.push('~');
            }
            out.push_str(&comp.alternatives.join("/"));
        }
        out
    }

    /// First alternative of every component, joined with spaces.
    pub fn primary_reading(&self) -> String {
        self.components
            .iter()
            .filter_map(|c| c.alternatives.first().map(String::as_str))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

impl fmt::Display for GlossExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.body())?;
        if let Some(d) = &self.derivation {
            write!(f, "[<{d}]")?;
        }
        if let Some(c) = &self.context {
            write!(f, "{{{c}}}")?;
        }
        Ok(())
    }
}

/// Gloss syntax errors. Positions are 1-based character offsets into the
/// gloss text.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GlossError {
    #[error("empty gloss")]
    Empty,
    #[error("unbalanced '{ch}' at position {position}")]
    Unbalanced { ch: char, position: usize },
    #[error("empty gloss alternative at position {position}")]
    EmptyAlternative { position: usize },
    #[error("expected '<' after '[' at position {position}")]
    MissingDerivationMarker { position: usize },
    #[error("empty annotation at position {position}")]
    EmptyAnnotation { position: usize },
    #[error("repeated {kind} annotation at position {position}")]
    RepeatedAnnotation { kind: &'static str, position: usize },
    #[error("unexpected text after annotations at position {position}")]
    TrailingText { position: usize },
}

/// Parse the gloss text found between `N.` and the closing quote of a sense
/// line.
///
/// `~` starts a joined component, `/` separates alternatives inside one
/// component, and `[<X]` / `{X}` may trail the body in either order.
pub fn parse_gloss(gloss: &str) -> Result<GlossExpr, GlossError> {
    let chars: Vec<char> = gloss.chars().collect();
    if chars.is_empty() {
        return Err(GlossError::Empty);
    }

    let body_end = chars.iter().position(|&c| c == '[' || c == '{').unwrap_or(chars.len());

    let mut components = Vec::new();
    let mut alternatives = Vec::new();
    let mut current = String::new();
    let mut joined = false;
    for (i, &c) in chars[..body_end].iter().enumerate() {
        match c {
            ']' | '}' => return Err(GlossError::Unbalanced { ch: c, position: i + 1 }),
            '/' | '~' => {
                if current.is_empty() {
                    return Err(GlossError::EmptyAlternative { position: i + 1 });
                }
                alternatives.push(std::mem::take(&mut current));
                if c == '~' {
                    components.push(GlossComponent {
                        alternatives: std::mem::take(&mut alternatives),
                        joined,
                    });
                    joined = true;
                }
            }
            _ => current.push(c),
        }
    }
    if current.is_empty() {
        return Err(GlossError::EmptyAlternative { position: body_end + 1 });
    }
    alternatives.push(current);
    components.push(GlossComponent { alternatives, joined });

    let mut derivation = None;
    let mut context = None;
    let mut i = body_end;
    while i < chars.len() {
        let open = chars[i];
        let close = match open {
            '[' => ']',
            '{' => '}',
            _ => return Err(GlossError::TrailingText { position: i + 1 }),
        };
        let mut j = i + 1;
        let mut inner = String::new();
        loop {
            match chars.get(j) {
                None => {
                    return Err(GlossError::Unbalanced {
                        ch: open,
                        position: i + 1,
                    })
                }
                Some(&c) if c == close => break,
                Some(&c @ ('[' | '{' | ']' | '}')) => return Err(GlossError::Unbalanced { ch: c, position: j + 1 }),
                Some(&c) => inner.push(c),
            }
            j += 1;
        }
        if open == '[' {
            let Some(source) = inner.strip_prefix('<') else {
                return Err(GlossError::MissingDerivationMarker { position: i + 2 });
            };
            if source.is_empty() {
                return Err(GlossError::EmptyAnnotation { position: i + 1 });
            }
            if derivation.is_some() {
                return Err(GlossError::RepeatedAnnotation {
                    kind: "derivation",
                    position: i + 1,
                });
            }
            derivation = Some(source.to_string());
        } else {
            if inner.is_empty() {
                return Err(GlossError::EmptyAnnotation { position: i + 1 });
            }
            if context.is_some() {
                return Err(GlossError::RepeatedAnnotation {
                    kind: "context",
                    position: i + 1,
                });
            }
            context = Some(inner);
        }
        i = j + 1;
    }

    Ok(GlossExpr {
        components,
        derivation,
        context,
    })
}

/// An ordered set of entries with a `(headword, pos)` index.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Dictionary {
    pub entries: Vec<DictEntry>,
    #[serde(skip)]
    index: HashMap<(String, String), usize>,
}

impl Dictionary {
    pub fn from_entries(entries: Vec<DictEntry>) -> Self {
        let index = entries
            .iter()
            .enumerate()
            .map(|(i, e)| ((e.headword.clone(), e.pos.clone()), i))
            .collect();
        Dictionary { entries, index }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entry registered for `(headword, pos)`. When the pair occurs more than
    /// once the later entry is returned.
    pub fn get(&self, headword: &str, pos: &str) -> Option<&DictEntry> {
        self.index
            .get(&(headword.to_string(), pos.to_string()))
            .map(|&i| &self.entries[i])
    }

    /// All entries whose headword matches exactly, optionally restricted to
    /// one part of speech. File order is kept.
    pub fn lookup(&self, headword: &str, pos: Option<&str>) -> Vec<&DictEntry> {
        self.entries
            .iter()
            .filter(|e| e.headword == headword && pos.is_none_or(|p| e.pos == p))
            .collect()
    }

    /// Entries whose headword is in `wordlist`, in their original order.
    pub fn frequency_filter(&self, wordlist: &HashSet<String>) -> Dictionary {
        Dictionary::from_entries(
            self.entries
                .iter()
                .filter(|e| wordlist.contains(&e.headword))
                .cloned()
                .collect(),
        )
    }

    /// Canonical text form. Parsing it yields an equal dictionary.
    pub fn emit(&self) -> String {
        let mut out = String::new();
        for (i, entry) in self.entries.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            out.push_str(&format!("\"{}\", \"{}\",\n", entry.headword, entry.pos));
            for sense in &entry.senses {
                out.push_str(&format!("--\"{}.{}\"\n", sense.number, sense.gloss));
                for ex in &sense.examples {
                    out.push_str(ex);
                    out.push('\n');
                }
            }
        }
        out
    }

    /// Interchange document (entries, senses, gloss structure, examples).
    pub fn to_interchange(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("dictionary serializes")
    }
}

/// Parse dictionary text. Malformed constructs are reported and skipped; the
/// parse itself never fails.
pub fn parse_dictionary(source: &str) -> (Dictionary, Vec<Diagnostic>) {
    let mut diags = Vec::new();
    let mut entries: Vec<(usize, DictEntry)> = Vec::new();
    // Whether the most recent headword line was accepted.
    let mut in_entry = false;
    // Whether the most recent sense line of the current entry was accepted.
    let mut in_sense = false;

    for (idx, raw) in source.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("--") {
            if !in_entry {
                diags.push(Diagnostic::error(line_no, "sense line before any headword line"));
                continue;
            }
            match parse_sense_line(rest) {
                Ok(sense) => {
                    entries.last_mut().expect("open entry").1.senses.push(sense);
                    in_sense = true;
                }
                Err(msg) => {
                    diags.push(Diagnostic::error(line_no, msg));
                    in_sense = false;
                }
            }
        } else if line.starts_with('"') {
            match parse_headword_line(line) {
                Some((headword, pos)) => {
                    entries.push((
                        line_no,
                        DictEntry {
                            headword,
                            pos,
                            senses: Vec::new(),
                        },
                    ));
                    in_entry = true;
                }
                None => {
                    diags.push(Diagnostic::error(line_no, format!("malformed headword line: {line}")));
                    in_entry = false;
                }
            }
            in_sense = false;
        } else if in_entry && in_sense {
            let sense = entries
                .last_mut()
                .and_then(|(_, e)| e.senses.last_mut())
                .expect("open sense");
            sense.examples.push(line.to_string());
        } else {
            diags.push(Diagnostic::warning(
                line_no,
                "example sentence outside any sense, skipped",
            ));
        }
    }

    if entries.is_empty() && diags.is_empty() {
        diags.push(Diagnostic::info(0, "no dictionary entries found"));
    }

    let mut seen: HashMap<(String, String), usize> = HashMap::new();
    for (line_no, entry) in &entries {
        check_entry(*line_no, entry, &mut diags);
        let key = (entry.headword.clone(), entry.pos.clone());
        if let Some(prev) = seen.insert(key, *line_no) {
            diags.push(Diagnostic::warning(
                *line_no,
                format!(
                    "duplicate entry \"{}\", \"{}\" (first at line {prev}); later entry wins",
                    entry.headword, entry.pos
                ),
            ));
        }
    }
    diags.sort_by_key(|d| d.line);

    let dict = Dictionary::from_entries(entries.into_iter().map(|(_, e)| e).collect());
    (dict, diags)
}

fn check_entry(line_no: usize, entry: &DictEntry, diags: &mut Vec<Diagnostic>) {
    if entry.senses.is_empty() {
        diags.push(Diagnostic::warning(
            line_no,
            format!("entry \"{}\" has no senses", entry.headword),
        ));
        return;
    }
    if entry.senses.iter().enumerate().any(|(i, s)| s.number as usize != i + 1) {
        diags.push(Diagnostic::warning(
            line_no,
            format!("non-consecutive sense numbers in entry \"{}\"", entry.headword),
        ));
    }
    for sense in entry.senses.iter().filter(|s| s.examples.is_empty()) {
        diags.push(Diagnostic::warning(
            line_no,
            format!(
                "sense {} of \"{}\" has no example sentence",
                sense.number, entry.headword
            ),
        ));
    }
}

/// `"go", "V",` with the trailing comma optional.
fn parse_headword_line(line: &str) -> Option<(String, String)> {
    let (headword, rest) = take_quoted(line)?;
    let rest = rest.trim_start().strip_prefix(',')?;
    let (pos, rest) = take_quoted(rest.trim_start())?;
    let rest = rest.trim();
    let rest = rest.strip_prefix(',').unwrap_or(rest);
    if headword.is_empty() || pos.is_empty() || !rest.trim().is_empty() {
        return None;
    }
    Some((headword.to_string(), pos.to_string()))
}

fn take_quoted(s: &str) -> Option<(&str, &str)> {
    let s = s.strip_prefix('"')?;
    let end = s.find('"')?;
    Some((&s[..end], &s[end + 1..]))
}

/// The part of a sense line after `--`: `"N.gloss"`.
fn parse_sense_line(rest: &str) -> Result<Sense, String> {
    let inner = rest
        .trim()
        .strip_prefix('"')
        .and_then(|s| s.strip_suffix('"'))
        .ok_or_else(|| format!("malformed sense line: --{rest}"))?;
    let (num, gloss) = inner
        .split_once('.')
        .ok_or_else(|| format!("sense line lacks 'N.' numbering: --{rest}"))?;
    let number: u32 = num
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("invalid sense number '{num}'"))?;
    let gloss = parse_gloss(gloss).map_err(|e| format!("sense {number}: {e}"))?;
    Ok(Sense {
        number,
        gloss,
        examples: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diag::Severity;
    use proptest::prelude::*;

    const GO: &str = include_str!("../tests/fixtures/go.dict");

    fn comp(alts: &[&str], joined: bool) -> GlossComponent {
        GlossComponent {
            alternatives: alts.iter().map(|s| s.to_string()).collect(),
            joined,
        }
    }

    #[test]
    fn gloss_alternatives_scope_to_one_component() {
        let g = parse_gloss("aAvAjZa~honA/karanA").unwrap();
        assert_eq!(
            g.components,
            vec![comp(&["aAvAjZa"], false), comp(&["honA", "karanA"], true)]
        );
        assert_eq!(g.derivation, None);
        assert_eq!(g.context, None);
    }

    #[test]
    fn gloss_single_token() {
        assert_eq!(parse_gloss("jAnA").unwrap(), GlossExpr::simple("jAnA"));
    }

    #[test]
    fn gloss_annotations() {
        let g = parse_gloss("samAnA[<jAnA]").unwrap();
        assert_eq!(g.components, vec![comp(&["samAnA"], false)]);
        assert_eq!(g.derivation.as_deref(), Some("jAnA"));

        let g = parse_gloss("ho~jAnA{sthiti}").unwrap();
        assert_eq!(g.context.as_deref(), Some("sthiti"));
        assert_eq!(g.to_string(), "ho~jAnA{sthiti}");

        let a = parse_gloss("x{c}[<y]").unwrap();
        let b = parse_gloss("x[<y]{c}").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn gloss_errors() {
        assert_eq!(
            parse_gloss("samAnA[<jAnA"),
            Err(GlossError::Unbalanced { ch: '[', position: 7 })
        );
        assert_eq!(
            parse_gloss("ho{sthiti"),
            Err(GlossError::Unbalanced { ch: '{', position: 3 })
        );
        assert_eq!(parse_gloss("a]"), Err(GlossError::Unbalanced { ch: ']', position: 2 }));
        assert!(matches!(
            parse_gloss("a[b]"),
            Err(GlossError::MissingDerivationMarker { .. })
        ));
        assert!(matches!(parse_gloss("a~"), Err(GlossError::EmptyAlternative { .. })));
        assert!(matches!(parse_gloss("a{}"), Err(GlossError::EmptyAnnotation { .. })));
        assert!(matches!(parse_gloss("a{x}b"), Err(GlossError::TrailingText { .. })));
        assert_eq!(parse_gloss(""), Err(GlossError::Empty));
    }

    #[test]
    fn go_entry() {
        let (dict, diags) = parse_dictionary(GO);
        assert!(diags.is_empty(), "{diags:?}");
        assert_eq!(dict.len(), 1);
        let go = &dict.entries[0];
        assert_eq!((go.headword.as_str(), go.pos.as_str()), ("go", "V"));
        assert_eq!(go.senses.len(), 7);
        assert_eq!(go.senses[0].gloss, GlossExpr::simple("jAnA"));
        assert_eq!(go.senses[0].examples, vec!["I go to school."]);
        assert_eq!(go.senses[2].gloss.derivation.as_deref(), Some("jAnA"));
        assert_eq!(go.senses[4].gloss.context.as_deref(), Some("sthiti"));
        assert_eq!(go.senses[4].examples, vec!["Have you gone mad?"]);
        assert_eq!(go.senses[6].examples, vec!["The P.M. has already gone."]);
    }

    #[test]
    fn empty_input() {
        let (dict, diags) = parse_dictionary("");
        assert!(dict.is_empty());
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].severity, Severity::Info);
    }

    #[test]
    fn sense_gap_warns() {
        let src = "\"x\", \"N\"\n--\"1.a\"\nex one\n--\"3.b\"\nex three\n";
        let (dict, diags) = parse_dictionary(src);
        assert_eq!(dict.entries[0].senses.len(), 2);
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].severity, Severity::Warning);
        assert!(diags[0].message.contains("non-consecutive sense numbers"));
    }

    #[test]
    fn sense_before_headword_is_skipped() {
        let src = "--\"1.a\"\nstray\n\"x\", \"N\",\n--\"1.b\"\nok\n";
        let (dict, diags) = parse_dictionary(src);
        assert_eq!(dict.len(), 1);
        assert_eq!(dict.entries[0].senses.len(), 1);
        assert_eq!(diags.len(), 2);
        assert_eq!((diags[0].severity, diags[0].line), (Severity::Error, 1));
        assert_eq!((diags[1].severity, diags[1].line), (Severity::Warning, 2));
    }

    #[test]
    fn malformed_constructs_each_get_one_diagnostic() {
        let src = "\"x\" \"N\"\n--\"1.a\"\n\"y\", \"N\"\n--\"1.a[b\"\nlost\n--\"2.c\"\nfine\n";
        let (dict, diags) = parse_dictionary(src);
        // bad headword, sense under it, bad gloss, orphaned example,
        // then sense 2 as the first sense of "y"
        let lines: Vec<_> = diags.iter().map(|d| (d.line, d.severity)).collect();
        assert_eq!(
            lines,
            vec![
                (1, Severity::Error),
                (2, Severity::Error),
                (3, Severity::Warning),
                (4, Severity::Error),
                (5, Severity::Warning),
            ]
        );
        assert_eq!(dict.entries[0].senses[0].number, 2);
    }

    #[test]
    fn duplicates_later_wins() {
        let src = "\"a\", \"N\"\n--\"1.x\"\ne\n\"a\", \"N\"\n--\"1.y\"\ne\n";
        let (dict, diags) = parse_dictionary(src);
        assert_eq!(dict.len(), 2);
        assert_eq!(diags.len(), 1);
        assert!(diags[0].message.contains("duplicate"));
        assert_eq!(dict.get("a", "N").unwrap().senses[0].gloss, GlossExpr::simple("y"));
    }

    #[test]
    fn lookup_and_filter() {
        let (dict, _) = parse_dictionary(GO);
        assert_eq!(dict.lookup("go", Some("V")).len(), 1);
        assert_eq!(dict.lookup("go", None)[0].senses.len(), 7);
        assert!(dict.lookup("go", Some("N")).is_empty());
        assert!(dict.lookup("zzz", None).is_empty());

        let words: HashSet<String> = ["go".to_string()].into();
        assert_eq!(dict.frequency_filter(&words).len(), 1);
        assert!(dict.frequency_filter(&HashSet::new()).is_empty());

        let src = "\"c\", \"N\"\n--\"1.z\"\ne\n\"a\", \"N\"\n--\"1.x\"\ne\n\"b\", \"N\"\n--\"1.y\"\ne\n";
        let (dict, _) = parse_dictionary(src);
        let words: HashSet<String> = ["a", "c", "q"].iter().map(|s| s.to_string()).collect();
        let heads: Vec<_> = dict
            .frequency_filter(&words)
            .entries
            .iter()
            .map(|e| e.headword.clone())
            .collect();
        assert_eq!(heads, vec!["c", "a"]);
    }

    #[test]
    fn emit_round_trip() {
        let (dict, _) = parse_dictionary(GO);
        let text = dict.emit();
        assert!(text.contains("--\"5.ho~jAnA{sthiti}\""));
        let (again, diags) = parse_dictionary(&text);
        assert!(diags.is_empty());
        assert_eq!(again, dict);
        assert_eq!(again.emit(), text);
        assert_eq!(Dictionary::default().emit(), "");
    }

    #[test]
    fn trailing_comma_optional() {
        let (a, _) = parse_dictionary("\"go\", \"V\",\n--\"1.jAnA\"\nx\n");
        let (b, _) = parse_dictionary("\"go\",\"V\"\n--\"1.jAnA\"\nx\n");
        assert_eq!(a, b);
    }

    fn word() -> impl Strategy<Value = String> {
        "[a-zA-Z]{1,5}"
    }

    proptest! {
        #[test]
        fn gloss_body_reassembles(parts in prop::collection::vec(
            (prop::collection::vec(word(), 1..3), any::<bool>()), 1..4)
        ) {
            let mut text = String::new();
            for (i, (alts, _)) in parts.iter().enumerate() {
                if i > 0 {
                    text.push('~');
                }
                text.push_str(&alts.join("/"));
            }
            let g = parse_gloss(&text).unwrap();
            prop_assert_eq!(g.components.len(), parts.len());
            prop_assert_eq!(g.to_string(), text);
        }

        #[test]
        fn dictionary_round_trip(entries in prop::collection::vec(
            (word(), "[A-Z]{1,2}", prop::collection::vec(
                (word(), prop::option::of(word()), prop::option::of(word()),
                 prop::collection::vec("[A-Za-z][A-Za-z .?]{0,12}", 0..3)), 0..4)), 0..4)
        ) {
            let mut src = String::new();
            for (head, pos, senses) in &entries {
                src.push_str(&format!("\"{head}\", \"{pos}\",\n"));
                for (n, (g, d, c, exs)) in senses.iter().enumerate() {
                    let mut gloss = g.clone();
                    if let Some(d) = d { gloss.push_str(&format!("[<{d}]")); }
                    if let Some(c) = c { gloss.push_str(&format!("{{{c}}}")); }
                    src.push_str(&format!("--\"{}.{}\"\n", n + 1, gloss));
                    for ex in exs { src.push_str(ex); src.push('\n'); }
                }
            }
            let (dict, _) = parse_dictionary(&src);
            let (again, _) = parse_dictionary(&dict.emit());
            prop_assert_eq!(&again, &dict);
        }
    }
}
