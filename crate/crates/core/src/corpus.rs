//! Treebank store.
//!
//! A store is a directory:
//!
//! ```text
//! <store>/<lang>.anncorra   # "# id" line, then the sentence line, per record
//! <store>/tagset.cfg        # optional tag inventory override
//! <store>/.lock             # present while a writer has the store open
//! ```
//!
//! The id index is rebuilt on open. Records iterate by language file name,
//! then in insertion order within a language.

use std::collections::{BTreeMap, HashMap};
use std::fs::{self, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::anncorra::{self, load_tagset, DepTree, TagRegistry, TagsetError};
use crate::diag::{has_errors, Diagnostic};

pub const DATA_EXTENSION: &str = "anncorra";
pub const TAGSET_FILE: &str = "tagset.cfg";
pub const LOCK_FILE: &str = ".lock";

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CorpusRecord {
    pub id: String,
    pub language: String,
    pub raw: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    pub tree: DepTree,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct CorpusStats {
    pub sentences: usize,
    pub nodes: usize,
    pub relation_counts: BTreeMap<String, usize>,
    pub node_counts: BTreeMap<String, usize>,
    pub average_depth: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Linear,
    Interchange,
}

#[derive(Debug, Error)]
pub enum StoreError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("store {0} is locked by another writer (remove {LOCK_FILE} if stale)")]
    Locked(PathBuf),
    #[error("store was opened read-only")]
    ReadOnly,
    #[error("duplicate id '{0}'")]
    DuplicateId(String),
    #[error("invalid id '{0}' (must be non-empty without whitespace)")]
    InvalidId(String),
    #[error("invalid language tag '{0}'")]
    InvalidLanguage(String),
    #[error("sentence '{id}' rejected")]
    Rejected { id: String, diagnostics: Vec<Diagnostic> },
    #[error("{}:{line}: {message}", file.display())]
    Corrupt {
        file: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{}: {source}", file.display())]
    Tagset { file: PathBuf, source: TagsetError },
}

/// Writer lock; the lock file goes away when this drops.
#[derive(Debug)]
struct LockGuard(PathBuf);

impl Drop for LockGuard {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.0);
    }
}

#[derive(Debug)]
pub struct Store {
    root: Option<PathBuf>,
    registry: TagRegistry,
    records: BTreeMap<String, Vec<CorpusRecord>>,
    ids: HashMap<String, String>,
    writable: bool,
    _lock: Option<LockGuard>,
}

fn valid_id(id: &str) -> bool {
    !id.is_empty() && !id.chars().any(char::is_whitespace)
}

fn valid_language(lang: &str) -> bool {
    !lang.is_empty() && lang.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

impl Store {
    /// Store that lives only in memory.
    pub fn in_memory(registry: TagRegistry) -> Self {
        Store {
            root: None,
            registry,
            records: BTreeMap::new(),
            ids: HashMap::new(),
            writable: true,
            _lock: None,
        }
    }

    /// Open for reading. The snapshot is taken now; later writes by others
    /// are not seen.
    pub fn open_read(dir: impl AsRef<Path>) -> Result<Self, StoreError> {
        Self::load(dir.as_ref(), None)
    }

    /// Open for writing, creating the directory if needed and taking the
    /// writer lock.
    pub fn open_write(dir: impl AsRef<Path>) -> Result<Self, StoreError> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir)?;
        let lock_path = dir.join(LOCK_FILE);
        match OpenOptions::new().write(true).create_new(true).open(&lock_path) {
            Ok(mut f) => {
                let _ = writeln!(f, "{}", std::process::id());
            }
            Err(e) if e.kind() == io::ErrorKind::AlreadyExists => return Err(StoreError::Locked(dir.to_path_buf())),
            Err(e) => return Err(e.into()),
        }
        let guard = LockGuard(lock_path);
        Self::load(dir, Some(guard))
    }

    fn load(dir: &Path, lock: Option<LockGuard>) -> Result<Self, StoreError> {
        let tagset_path = dir.join(TAGSET_FILE);
        let registry = match fs::read_to_string(&tagset_path) {
            Ok(text) => load_tagset(&text).map_err(|source| StoreError::Tagset {
                file: tagset_path.clone(),
                source,
            })?,
            Err(e) if e.kind() == io::ErrorKind::NotFound => TagRegistry::default(),
            Err(e) => return Err(e.into()),
        };
        let mut store = Store {
            root: Some(dir.to_path_buf()),
            writable: lock.is_some(),
            _lock: lock,
            ..Store::in_memory(registry)
        };

        let mut files: Vec<PathBuf> = fs::read_dir(dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == DATA_EXTENSION))
            .collect();
        files.sort();
        for file in files {
            let Some(lang) = file.file_stem().and_then(|s| s.to_str()).map(str::to_string) else {
                continue;
            };
            let text = fs::read_to_string(&file)?;
            let corrupt = |line: usize, message: String| StoreError::Corrupt {
                file: file.clone(),
                line,
                message,
            };
            for entry in read_data_file(&text).map_err(|(line, msg)| corrupt(line, msg))? {
                if store.ids.contains_key(&entry.id) {
                    return Err(corrupt(entry.line, format!("duplicate id '{}'", entry.id)));
                }
                let analysis = anncorra::parse_sentence_at(&entry.raw, entry.line, &store.registry);
                let tree = match analysis.tree {
                    Some(t) if !has_errors(&analysis.diagnostics) => t,
                    _ => {
                        let first = analysis.diagnostics.iter().find(|d| d.is_error());
                        return Err(corrupt(
                            entry.line,
                            first.map_or_else(|| "invalid sentence".to_string(), |d| d.message.clone()),
                        ));
                    }
                };
                store.insert(CorpusRecord {
                    id: entry.id,
                    language: lang.clone(),
                    raw: entry.raw,
                    source: entry.source,
                    tree,
                });
            }
        }
        Ok(store)
    }

    fn insert(&mut self, record: CorpusRecord) {
        self.ids.insert(record.id.clone(), record.language.clone());
        self.records.entry(record.language.clone()).or_default().push(record);
    }

    pub fn registry(&self) -> &TagRegistry {
        &self.registry
    }

    pub fn root(&self) -> Option<&Path> {
        self.root.as_deref()
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn records(&self) -> impl Iterator<Item = &CorpusRecord> {
        self.records.values().flatten()
    }

    pub fn get(&self, id: &str) -> Option<&CorpusRecord> {
        let lang = self.ids.get(id)?;
        self.records.get(lang)?.iter().find(|r| r.id == id)
    }

    fn check_new(&self, id: &str, language: &str) -> Result<(), StoreError> {
        if !self.writable {
            return Err(StoreError::ReadOnly);
        }
        if !valid_id(id) {
            return Err(StoreError::InvalidId(id.to_string()));
        }
        if !valid_language(language) {
            return Err(StoreError::InvalidLanguage(language.to_string()));
        }
        if self.ids.contains_key(id) {
            return Err(StoreError::DuplicateId(id.to_string()));
        }
        Ok(())
    }

    fn analyse(&self, id: &str, line: &str, line_no: usize) -> Result<(DepTree, Vec<Diagnostic>), StoreError> {
        let analysis = anncorra::parse_sentence_at(line.trim(), line_no, &self.registry);
        match analysis.tree {
            Some(tree) if !has_errors(&analysis.diagnostics) => Ok((tree, analysis.diagnostics)),
            _ => Err(StoreError::Rejected {
                id: id.to_string(),
                diagnostics: analysis.diagnostics,
            }),
        }
    }

    /// Parse, resolve and persist one sentence. Returns the non-fatal
    /// diagnostics the sentence produced.
    pub fn add_sentence(&mut self, id: &str, line: &str, language: &str) -> Result<Vec<Diagnostic>, StoreError> {
        self.add_sentence_with_source(id, line, language, None)
    }

    pub fn add_sentence_with_source(
        &mut self,
        id: &str,
        line: &str,
        language: &str,
        source: Option<&str>,
    ) -> Result<Vec<Diagnostic>, StoreError> {
        self.check_new(id, language)?;
        let (tree, diags) = self.analyse(id, line, 0)?;
        let record = CorpusRecord {
            id: id.to_string(),
            language: language.to_string(),
            raw: line.trim().to_string(),
            source: source.map(str::to_string),
            tree,
        };
        self.persist(std::slice::from_ref(&record))?;
        self.insert(record);
        Ok(diags)
    }

    /// Add every sentence of a linear-format document. The comment directly
    /// above a sentence gives its id; otherwise `<prefix>-<line>` is used.
    /// Nothing is added unless every sentence is accepted.
    pub fn import_linear(
        &mut self,
        text: &str,
        language: &str,
        id_prefix: &str,
        source: Option<&str>,
    ) -> Result<(Vec<String>, Vec<Diagnostic>), StoreError> {
        let mut pending: Vec<CorpusRecord> = Vec::new();
        let mut diags = Vec::new();
        for sentence in anncorra::parse_document(text, &self.registry) {
            let id = sentence
                .id
                .clone()
                .unwrap_or_else(|| format!("{id_prefix}-{}", sentence.line));
            self.check_new(&id, language)?;
            if pending.iter().any(|r| r.id == id) {
                return Err(StoreError::DuplicateId(id));
            }
            let tree = match sentence.analysis.tree {
                Some(t) if !has_errors(&sentence.analysis.diagnostics) => t,
                _ => {
                    return Err(StoreError::Rejected {
                        id,
                        diagnostics: sentence.analysis.diagnostics,
                    })
                }
            };
            diags.extend(sentence.analysis.diagnostics);
            pending.push(CorpusRecord {
                id,
                language: language.to_string(),
                raw: sentence.raw,
                source: source.map(|s| format!("{s}:{}", sentence.line)),
                tree,
            });
        }
        self.persist(&pending)?;
        let ids = pending.iter().map(|r| r.id.clone()).collect();
        for record in pending {
            self.insert(record);
        }
        Ok((ids, diags))
    }

    fn persist(&self, records: &[CorpusRecord]) -> Result<(), StoreError> {
        let Some(root) = &self.root else {
            return Ok(());
        };
        let mut by_lang: BTreeMap<&str, String> = BTreeMap::new();
        for r in records {
            let buf = by_lang.entry(&r.language).or_default();
            match &r.source {
                Some(s) => buf.push_str(&format!("# {}\t{s}\n", r.id)),
                None => buf.push_str(&format!("# {}\n", r.id)),
            }
            buf.push_str(&r.raw);
            buf.push('\n');
        }
        for (lang, buf) in by_lang {
            let path = root.join(format!("{lang}.{DATA_EXTENSION}"));
            let mut f = OpenOptions::new().create(true).append(true).open(path)?;
            f.write_all(buf.as_bytes())?;
        }
        Ok(())
    }

    /// `(record id, node position)` for every node carrying `rel_tag`.
    pub fn query_by_relation(&self, rel_tag: &str) -> (Vec<(String, usize)>, Vec<Diagnostic>) {
        if self.registry.relation(rel_tag).is_none() {
            return (
                Vec::new(),
                vec![Diagnostic::warning(0, format!("unknown relation tag '{rel_tag}'"))],
            );
        }
        let hits = self
            .records()
            .flat_map(|r| {
                r.tree
                    .nodes
                    .iter()
                    .filter(|n| n.rel_tag.as_deref().is_some_and(|t| t.eq_ignore_ascii_case(rel_tag)))
                    .map(|n| (r.id.clone(), n.position))
            })
            .collect();
        (hits, Vec::new())
    }

    pub fn stats(&self) -> CorpusStats {
        let mut stats = CorpusStats::default();
        let mut depth_total = 0usize;
        for r in self.records() {
            stats.sentences += 1;
            stats.nodes += r.tree.len();
            depth_total += r.tree.depth();
            for n in &r.tree.nodes {
                if let Some(t) = &n.rel_tag {
                    *stats.relation_counts.entry(t.clone()).or_default() += 1;
                }
                if let Some(t) = &n.node_tag {
                    *stats.node_counts.entry(t.clone()).or_default() += 1;
                }
            }
        }
        if stats.sentences > 0 {
            stats.average_depth = depth_total as f64 / stats.sentences as f64;
        }
        stats
    }

    /// Dump records, optionally for one language only.
    pub fn export(&self, format: ExportFormat, language: Option<&str>) -> String {
        let selected: Vec<&CorpusRecord> = self
            .records()
            .filter(|r| language.is_none_or(|l| r.language == l))
            .collect();
        match format {
            ExportFormat::Linear => selected.iter().map(|r| format!("# {}\n{}\n", r.id, r.raw)).collect(),
            ExportFormat::Interchange => {
                if selected.is_empty() {
                    return String::new();
                }
                let doc = serde_json::json!({ "records": selected });
                let mut s = serde_json::to_string_pretty(&doc).expect("records serialize");
                s.push('\n');
                s
            }
        }
    }
}

struct DataEntry {
    id: String,
    source: Option<String>,
    raw: String,
    line: usize,
}

/// `# id[<TAB>source]` followed by one sentence line, repeated.
fn read_data_file(text: &str) -> Result<Vec<DataEntry>, (usize, String)> {
    let mut out = Vec::new();
    let mut header: Option<(String, Option<String>)> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = raw.trim_start().strip_prefix('#') {
            let (id, source) = match comment.split_once('\t') {
                Some((id, src)) => (id.trim(), Some(src.trim().to_string())),
                None => (comment.trim(), None),
            };
            if !valid_id(id) {
                return Err((i + 1, format!("invalid id line '{line}'")));
            }
            header = Some((id.to_string(), source));
            continue;
        }
        let Some((id, source)) = header.take() else {
            return Err((i + 1, "sentence without a preceding '# id' line".to_string()));
        };
        out.push(DataEntry {
            id,
            source,
            raw: line.to_string(),
            line: i + 1,
        });
    }
    Ok(out)
}
