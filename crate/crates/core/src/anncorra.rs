//! Linear dependency-tree notation.
//!
//! ```text
//! rAma_ne/k1->i phala/k2->j kATakara/kr:j->i pAnI/k2->i piyA::v:i
//! ```
//!
//! A token is `surface[/REL[:self][->parent]][::NODE[:self]]`. Relation tags
//! follow `/`, node tags follow `::`, `:x` defines index label `x` and `->x`
//! attaches the token to the node carrying that label. A relation-tagged
//! token without `->` attaches to the nearest verbal token. Bracketed groups
//! `[ ... ]<s>` mark segments.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::diag::{has_errors, Diagnostic};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TagDef {
    pub code: String,
    pub verbal: bool,
    pub description: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TagCategory {
    Relation,
    Node,
}

/// Relation (`/`) and node (`::`) tag inventories. Lookups ignore case; the
/// registered spelling is what gets emitted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TagRegistry {
    relations: Vec<TagDef>,
    nodes: Vec<TagDef>,
}

const BUILTIN_RELATIONS: &[(&str, bool, &str)] = &[
    ("s", false, "Sentence"),
    ("k1", false, "karta"),
    ("k2", false, "karma"),
    ("k3", false, "karana"),
    ("kr", true, "non-finite verb (having-done form)"),
];

const BUILTIN_NODES: &[(&str, bool, &str)] = &[
    ("v", true, "Verb"),
    ("Kr", true, "Gerund"),
    ("vH", true, "Verb-BE"),
    ("yo", false, "Conjunct"),
];

fn defs(table: &[(&str, bool, &str)]) -> Vec<TagDef> {
    table
        .iter()
        .map(|&(code, verbal, description)| TagDef {
            code: code.to_string(),
            verbal,
            description: description.to_string(),
        })
        .collect()
}

impl Default for TagRegistry {
    fn default() -> Self {
        TagRegistry {
            relations: defs(BUILTIN_RELATIONS),
            nodes: defs(BUILTIN_NODES),
        }
    }
}

impl TagRegistry {
    fn list(&self, cat: TagCategory) -> &[TagDef] {
        match cat {
            TagCategory::Relation => &self.relations,
            TagCategory::Node => &self.nodes,
        }
    }

    fn list_mut(&mut self, cat: TagCategory) -> &mut Vec<TagDef> {
        match cat {
            TagCategory::Relation => &mut self.relations,
            TagCategory::Node => &mut self.nodes,
        }
    }

    pub fn get(&self, cat: TagCategory, code: &str) -> Option<&TagDef> {
        self.list(cat).iter().find(|d| d.code.eq_ignore_ascii_case(code))
    }

    pub fn relation(&self, code: &str) -> Option<&TagDef> {
        self.get(TagCategory::Relation, code)
    }

    pub fn node(&self, code: &str) -> Option<&TagDef> {
        self.get(TagCategory::Node, code)
    }

    pub fn relations(&self) -> &[TagDef] {
        &self.relations
    }

    pub fn nodes(&self) -> &[TagDef] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.relations.len() + self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_verbal(&self, rel: Option<&str>, node: Option<&str>) -> bool {
        node.and_then(|n| self.node(n)).is_some_and(|d| d.verbal)
            || rel.and_then(|r| self.relation(r)).is_some_and(|d| d.verbal)
    }

    /// Registered spelling of `code`, or `code` itself when unknown.
    fn canonical(&self, cat: TagCategory, code: &str) -> String {
        self.get(cat, code).map_or_else(|| code.to_string(), |d| d.code.clone())
    }

    fn define(&mut self, cat: TagCategory, def: TagDef) {
        let list = self.list_mut(cat);
        match list.iter_mut().find(|d| d.code.eq_ignore_ascii_case(&def.code)) {
            Some(existing) => *existing = def,
            None => list.push(def),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TagsetError {
    #[error("line {line}: expected 'tag <TAB> relation|node <TAB> verbal|nonverbal <TAB> description'")]
    Malformed { line: usize },
    #[error("line {line}: unknown category '{word}' (expected relation or node)")]
    UnknownCategory { line: usize, word: String },
    #[error("line {line}: unknown verbality '{word}' (expected verbal or nonverbal)")]
    UnknownVerbality { line: usize, word: String },
    #[error("line {line}: {category} tag '{tag}' defined twice")]
    Duplicate {
        line: usize,
        tag: String,
        category: &'static str,
    },
}

/// Build a registry from a tagset config. Config lines extend the built-in
/// inventory and may redefine built-in tags; an empty config yields the
/// built-in inventory. Blank lines and `#` comments are ignored.
pub fn load_tagset(config: &str) -> Result<TagRegistry, TagsetError> {
    let mut registry = TagRegistry::default();
    let mut seen: BTreeSet<(bool, String)> = BTreeSet::new();
    for (i, raw) in config.lines().enumerate() {
        let line = i + 1;
        let text = raw.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let mut fields = text.splitn(4, |c: char| c.is_whitespace()).filter(|f| !f.is_empty());
        let (Some(tag), Some(category), Some(verbality)) = (fields.next(), fields.next(), fields.next()) else {
            return Err(TagsetError::Malformed { line });
        };
        let description = fields.next().unwrap_or("").trim().to_string();
        let cat = match category.to_ascii_lowercase().as_str() {
            "relation" => TagCategory::Relation,
            "node" => TagCategory::Node,
            _ => {
                return Err(TagsetError::UnknownCategory {
                    line,
                    word: category.to_string(),
                })
            }
        };
        let verbal = match verbality.to_ascii_lowercase().as_str() {
            "verbal" => true,
            "nonverbal" => false,
            _ => {
                return Err(TagsetError::UnknownVerbality {
                    line,
                    word: verbality.to_string(),
                })
            }
        };
        if !seen.insert((cat == TagCategory::Relation, tag.to_lowercase())) {
            return Err(TagsetError::Duplicate {
                line,
                tag: tag.to_string(),
                category: if cat == TagCategory::Relation {
                    "relation"
                } else {
                    "node"
                },
            });
        }
        registry.define(
            cat,
            TagDef {
                code: tag.to_string(),
                verbal,
                description,
            },
        );
    }
    Ok(registry)
}

/// One token as written, before attachment is resolved.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct AnnToken {
    pub surface: String,
    pub rel_tag: Option<String>,
    pub self_index: Option<String>,
    pub parent_ref: Option<String>,
    pub node_tag: Option<String>,
}

impl AnnToken {
    pub fn is_bare(&self) -> bool {
        self.rel_tag.is_none() && self.node_tag.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TokenErrorKind {
    #[error("empty surface form")]
    EmptySurface,
    #[error("'->' without a preceding /REL")]
    ArrowWithoutRelation,
    #[error("empty tag")]
    EmptyTag,
    #[error("empty index label")]
    EmptyIndex,
    #[error("malformed index label '{0}' (expected a lowercase letter optionally followed by digits)")]
    BadIndex(String),
    #[error("token defines two different index labels")]
    ConflictingIndex,
    #[error("relation annotation must precede node annotation")]
    Misordered,
}

/// Token-level syntax error; `column` is a 1-based character offset inside
/// the token.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("column {column}: {kind}")]
pub struct TokenError {
    pub column: usize,
    pub kind: TokenErrorKind,
}

fn col(token: &str, byte: usize) -> usize {
    token[..byte].chars().count() + 1
}

fn check_label(token: &str, at: usize, label: &str) -> Result<String, TokenError> {
    let err = |kind| TokenError {
        column: col(token, at),
        kind,
    };
    if label.is_empty() {
        return Err(err(TokenErrorKind::EmptyIndex));
    }
    let mut chars = label.chars();
    let ok = chars.next().is_some_and(|c| c.is_ascii_lowercase()) && chars.all(|c| c.is_ascii_digit());
    if !ok {
        return Err(err(TokenErrorKind::BadIndex(label.to_string())));
    }
    Ok(label.to_string())
}

/// Parse one whitespace-free token. Unknown tags are accepted and reported
/// as warnings in the returned list.
pub fn parse_token(token: &str, registry: &TagRegistry) -> Result<(AnnToken, Vec<Diagnostic>), TokenError> {
    let err = |at: usize, kind| TokenError {
        column: col(token, at),
        kind,
    };
    let (head, node_part) = match token.find("::") {
        Some(p) => (&token[..p], Some((p + 2, &token[p + 2..]))),
        None => (token, None),
    };
    let (surface, rel_part) = match head.find('/') {
        Some(p) => (&head[..p], Some((p + 1, &head[p + 1..]))),
        None => (head, None),
    };
    if let Some(p) = surface.find("->") {
        return Err(err(p, TokenErrorKind::ArrowWithoutRelation));
    }
    if surface.is_empty() {
        return Err(err(0, TokenErrorKind::EmptySurface));
    }

    let mut ann = AnnToken {
        surface: surface.to_string(),
        ..AnnToken::default()
    };
    let mut warnings = Vec::new();

    if let Some((start, rel)) = rel_part {
        let (left, parent) = match rel.find("->") {
            Some(p) => (&rel[..p], Some((start + p + 2, &rel[p + 2..]))),
            None => (rel, None),
        };
        let (tag, label) = match left.find(':') {
            Some(p) => (&left[..p], Some((start + p + 1, &left[p + 1..]))),
            None => (left, None),
        };
        if tag.is_empty() {
            return Err(err(start, TokenErrorKind::EmptyTag));
        }
        if let Some((at, l)) = label {
            ann.self_index = Some(check_label(token, at, l)?);
        }
        if let Some((at, p)) = parent {
            ann.parent_ref = Some(check_label(token, at, p)?);
        }
        if registry.relation(tag).is_none() {
            warnings.push(Diagnostic::warning(
                0,
                format!("unknown relation tag '{tag}' in '{token}'"),
            ));
        }
        ann.rel_tag = Some(registry.canonical(TagCategory::Relation, tag));
    }

    if let Some((start, node)) = node_part {
        if node.contains("->") {
            return Err(err(start, TokenErrorKind::ArrowWithoutRelation));
        }
        if node.contains('/') {
            return Err(err(start, TokenErrorKind::Misordered));
        }
        let (tag, label) = match node.find(':') {
            Some(p) => (&node[..p], Some((start + p + 1, &node[p + 1..]))),
            None => (node, None),
        };
        if tag.is_empty() {
            return Err(err(start, TokenErrorKind::EmptyTag));
        }
        if let Some((at, l)) = label {
            let l = check_label(token, at, l)?;
            if ann.self_index.as_ref().is_some_and(|existing| *existing != l) {
                return Err(err(at, TokenErrorKind::ConflictingIndex));
            }
            ann.self_index = Some(l);
        }
        if registry.node(tag).is_none() {
            warnings.push(Diagnostic::warning(0, format!("unknown node tag '{tag}' in '{token}'")));
        }
        ann.node_tag = Some(registry.canonical(TagCategory::Node, tag));
    }

    Ok((ann, warnings))
}

/// A resolved node. Index labels are presentation only and take no part in
/// equality.
#[derive(Debug, Clone, Serialize)]
pub struct DepNode {
    pub position: usize,
    pub surface: String,
    #[serde(rename = "rel")]
    pub rel_tag: Option<String>,
    #[serde(rename = "node")]
    pub node_tag: Option<String>,
    #[serde(skip)]
    pub index: Option<String>,
    pub parent: Option<usize>,
    #[serde(skip)]
    pub children: Vec<usize>,
}

impl PartialEq for DepNode {
    fn eq(&self, other: &Self) -> bool {
        self.position == other.position
            && self.surface == other.surface
            && self.rel_tag == other.rel_tag
            && self.node_tag == other.node_tag
            && self.parent == other.parent
            && self.children == other.children
    }
}

impl Eq for DepNode {}

/// A bracketed segment covering tokens `start..=end`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Group {
    pub start: usize,
    pub end: usize,
    pub tag: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DepTree {
    pub nodes: Vec<DepNode>,
    pub root: usize,
    pub groups: Vec<Group>,
}

impl DepTree {
    /// Assemble a tree from nodes whose `parent` fields are set. Children
    /// lists and the root are derived; structure is not checked (see
    /// [`validate_tree`]).
    pub fn from_nodes(mut nodes: Vec<DepNode>, groups: Vec<Group>) -> Self {
        for (i, n) in nodes.iter_mut().enumerate() {
            n.position = i;
            n.children.clear();
        }
        for i in 0..nodes.len() {
            if let Some(p) = nodes[i].parent {
                if p < nodes.len() {
                    nodes[p].children.push(i);
                }
            }
        }
        let root = nodes.iter().position(|n| n.parent.is_none()).unwrap_or(0);
        DepTree { nodes, root, groups }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Edges on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        fn walk(tree: &DepTree, n: usize, budget: usize) -> usize {
            if budget == 0 {
                return 0;
            }
            tree.nodes[n]
                .children
                .iter()
                .map(|&c| 1 + walk(tree, c, budget - 1))
                .max()
                .unwrap_or(0)
        }
        if self.nodes.is_empty() {
            0
        } else {
            walk(self, self.root, self.nodes.len())
        }
    }

    pub fn to_interchange(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("tree serializes")
    }
}

impl fmt::Display for DepTree {
    /// Explicit linear form.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&emit_explicit(self))
    }
}

/// Tree (when resolution succeeded) plus everything worth reporting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Analysis {
    pub tree: Option<DepTree>,
    pub diagnostics: Vec<Diagnostic>,
}

impl Analysis {
    fn failed(diagnostics: Vec<Diagnostic>) -> Self {
        Analysis {
            tree: None,
            diagnostics,
        }
    }
}

/// Location info for resolve diagnostics.
struct Locator<'a> {
    line: usize,
    columns: Option<&'a [usize]>,
}

impl Locator<'_> {
    fn at(&self, token: usize, d: Diagnostic) -> Diagnostic {
        let d = Diagnostic { line: self.line, ..d };
        match self.columns.and_then(|c| c.get(token)) {
            Some(&c) => d.with_column(c),
            None => d,
        }
    }
}

/// Nearest verbal token to `from`, excluding itself. Distance ties go right.
fn nearest_verbal(from: usize, verbal: &[bool]) -> Option<usize> {
    (1..verbal.len()).find_map(|d| {
        let right = from + d;
        if right < verbal.len() && verbal[right] {
            return Some(right);
        }
        if d <= from && verbal[from - d] {
            return Some(from - d);
        }
        None
    })
}

fn verbal_flags(tokens: impl Iterator<Item = (Option<String>, Option<String>)>, registry: &TagRegistry) -> Vec<bool> {
    tokens
        .map(|(rel, node)| registry.is_verbal(rel.as_deref(), node.as_deref()))
        .collect()
}

/// Resolve parent references and default attachments into a tree.
pub fn resolve(tokens: &[AnnToken], registry: &TagRegistry) -> Analysis {
    resolve_grouped(tokens, &[], &Locator { line: 0, columns: None }, registry)
}

fn resolve_grouped(tokens: &[AnnToken], groups: &[Group], loc: &Locator<'_>, registry: &TagRegistry) -> Analysis {
    let mut diags = Vec::new();
    let n = tokens.len();
    if n == 0 {
        return Analysis::failed(vec![Diagnostic::error(loc.line, "empty sentence")]);
    }

    let mut labels: HashMap<&str, usize> = HashMap::new();
    for (i, t) in tokens.iter().enumerate() {
        if let Some(l) = &t.self_index {
            if let Some(prev) = labels.insert(l, i) {
                diags.push(loc.at(
                    i,
                    Diagnostic::error(
                        0,
                        format!("index label '{l}' defined on tokens {} and {}", prev + 1, i + 1),
                    ),
                ));
            }
        }
    }

    let verbal = verbal_flags(tokens.iter().map(|t| (t.rel_tag.clone(), t.node_tag.clone())), registry);
    let mut parent: Vec<Option<usize>> = vec![None; n];
    let mut cyclic = false;
    for (i, t) in tokens.iter().enumerate() {
        if t.rel_tag.is_none() {
            continue;
        }
        match &t.parent_ref {
            Some(l) => match labels.get(l.as_str()) {
                Some(&p) if p == i => {
                    cyclic = true;
                    diags.push(loc.at(
                        i,
                        Diagnostic::error(0, format!("cycle: '{}' refers to itself", t.surface)),
                    ));
                }
                Some(&p) => parent[i] = Some(p),
                None => diags.push(loc.at(i, Diagnostic::error(0, format!("undefined index label '{l}'")))),
            },
            None => match nearest_verbal(i, &verbal) {
                Some(p) => parent[i] = Some(p),
                None => diags.push(loc.at(
                    i,
                    Diagnostic::error(0, format!("no verbal token for default attachment of '{}'", t.surface)),
                )),
            },
        }
    }

    for cycle in find_cycles(&parent) {
        cyclic = true;
        let names: Vec<_> = cycle.iter().map(|&i| tokens[i].surface.as_str()).collect();
        diags.push(loc.at(cycle[0], Diagnostic::error(0, format!("cycle: {}", names.join(" -> ")))));
    }
    if has_errors(&diags) {
        return Analysis::failed(diags);
    }

    // unannotated tokens inside a group hang off the innermost group's head
    for (i, t) in tokens.iter().enumerate() {
        if !t.is_bare() {
            continue;
        }
        let Some(group) = groups
            .iter()
            .filter(|g| g.start <= i && i <= g.end)
            .min_by_key(|g| g.end - g.start)
        else {
            continue;
        };
        let heads: Vec<usize> = (group.start..=group.end)
            .filter(|&j| !tokens[j].is_bare() && verbal[j])
            .filter(|&j| parent[j].is_none_or(|p| p < group.start || p > group.end))
            .collect();
        match heads.first() {
            Some(&h) => {
                parent[i] = Some(h);
                diags.push(loc.at(
                    i,
                    Diagnostic::warning(
                        0,
                        format!(
                            "unlabeled token '{}' attached to group head '{}'",
                            t.surface, tokens[h].surface
                        ),
                    ),
                ));
            }
            None => diags.push(loc.at(
                i,
                Diagnostic::error(0, format!("group <{}> has no head verb for '{}'", group.tag, t.surface)),
            )),
        }
    }

    let roots: Vec<usize> = (0..n).filter(|&i| parent[i].is_none()).collect();
    match roots.len() {
        0 if !cyclic => diags.push(Diagnostic::error(loc.line, "no root")),
        0 | 1 => {}
        _ => {
            let names: Vec<_> = roots.iter().map(|&i| tokens[i].surface.as_str()).collect();
            diags.push(loc.at(
                roots[1],
                Diagnostic::error(0, format!("multiple roots: {}", names.join(", "))),
            ));
        }
    }
    if has_errors(&diags) {
        return Analysis::failed(diags);
    }

    let nodes = tokens
        .iter()
        .zip(parent)
        .enumerate()
        .map(|(i, (t, p))| DepNode {
            position: i,
            surface: t.surface.clone(),
            rel_tag: t.rel_tag.clone(),
            node_tag: t.node_tag.clone(),
            index: t.self_index.clone(),
            parent: p,
            children: Vec::new(),
        })
        .collect();
    Analysis {
        tree: Some(DepTree::from_nodes(nodes, groups.to_vec())),
        diagnostics: diags,
    }
}

/// Each distinct cycle in a parent array, as positions starting from its
/// smallest member.
fn find_cycles(parent: &[Option<usize>]) -> Vec<Vec<usize>> {
    let n = parent.len();
    let mut state = vec![0u8; n]; // 0 new, 1 on current path, 2 done
    let mut cycles = Vec::new();
    for start in 0..n {
        let mut path = Vec::new();
        let mut cur = Some(start);
        while let Some(c) = cur {
            if c >= n {
                break;
            }
            match state[c] {
                2 => break,
                1 => {
                    let from = path.iter().position(|&p| p == c).expect("on path");
                    let mut cycle = path[from..].to_vec();
                    let min_at = cycle
                        .iter()
                        .enumerate()
                        .min_by_key(|(_, &v)| v)
                        .map(|(i, _)| i)
                        .unwrap_or(0);
                    cycle.rotate_left(min_at);
                    cycles.push(cycle);
                    break;
                }
                _ => {
                    state[c] = 1;
                    path.push(c);
                    cur = parent[c];
                }
            }
        }
        for p in path {
            state[p] = 2;
        }
    }
    cycles
}

/// Structural re-check of a tree: one root, no cycles, consistent
/// parent/child links, unique index labels.
pub fn validate_tree(tree: &DepTree) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    let n = tree.nodes.len();
    if n == 0 {
        diags.push(Diagnostic::error(0, "empty tree"));
        return diags;
    }
    for (i, node) in tree.nodes.iter().enumerate() {
        if node.position != i {
            diags.push(Diagnostic::error(
                0,
                format!("node {i} records position {}", node.position),
            ));
        }
        if let Some(p) = node.parent {
            if p >= n {
                diags.push(Diagnostic::error(0, format!("node {i} has out-of-range parent {p}")));
            } else if !tree.nodes[p].children.contains(&i) {
                diags.push(Diagnostic::error(
                    0,
                    format!("node {i} missing from children of its parent {p}"),
                ));
            }
        }
        for &c in &node.children {
            if c >= n || tree.nodes[c].parent != Some(i) {
                diags.push(Diagnostic::error(
                    0,
                    format!("child {c} of node {i} does not point back"),
                ));
            }
        }
    }

    let parents: Vec<Option<usize>> = tree.nodes.iter().map(|n| n.parent).collect();
    let cycles = find_cycles(&parents);
    for cycle in &cycles {
        let names: Vec<_> = cycle.iter().map(|&i| tree.nodes[i].surface.as_str()).collect();
        diags.push(Diagnostic::error(0, format!("cycle: {}", names.join(" -> "))));
    }
    if cycles.is_empty() {
        let roots: Vec<usize> = (0..n).filter(|&i| parents[i].is_none()).collect();
        match roots.as_slice() {
            [] => diags.push(Diagnostic::error(0, "no root")),
            [r] if *r != tree.root => diags.push(Diagnostic::error(
                0,
                format!("root field {} but parentless node is {r}", tree.root),
            )),
            [_] => {}
            _ => diags.push(Diagnostic::error(0, format!("multiple roots: {roots:?}"))),
        }
    }

    let mut labels: HashMap<&str, usize> = HashMap::new();
    for (i, node) in tree.nodes.iter().enumerate() {
        if let Some(l) = &node.index {
            if let Some(prev) = labels.insert(l, i) {
                diags.push(Diagnostic::error(
                    0,
                    format!("index label '{l}' used on nodes {prev} and {i}"),
                ));
            }
        }
    }
    diags
}

/// The `k`-th generated index label: i, j, ..., z, a, ..., h, then i1, j1, ...
pub fn index_label(k: usize) -> String {
    let letter = (b'a' + ((8 + k) % 26) as u8) as char;
    match k / 26 {
        0 => letter.to_string(),
        round => format!("{letter}{round}"),
    }
}

fn emit_with_refs(tree: &DepTree, keep_ref: impl Fn(&DepNode) -> bool) -> String {
    let n = tree.nodes.len();
    let referenced: BTreeSet<usize> = tree
        .nodes
        .iter()
        .filter(|node| node.rel_tag.is_some() && keep_ref(node))
        .filter_map(|node| node.parent)
        .collect();
    let mut labels: Vec<Option<String>> = vec![None; n];
    for (k, &p) in referenced.iter().enumerate() {
        labels[p] = Some(index_label(k));
    }

    let mut opens = vec![0usize; n];
    let mut closes: Vec<Vec<&Group>> = vec![Vec::new(); n];
    for g in &tree.groups {
        if g.start < n && g.end < n {
            opens[g.start] += 1;
            closes[g.end].push(g);
        }
    }
    for c in &mut closes {
        // innermost group closes first
        c.sort_by_key(|g| std::cmp::Reverse(g.start));
    }

    let mut out = Vec::with_capacity(n);
    for node in &tree.nodes {
        let i = node.position;
        let mut tok = "[".repeat(opens[i]);
        tok.push_str(&node.surface);
        let label = labels[i].as_deref();
        if let Some(rel) = &node.rel_tag {
            tok.push('/');
            tok.push_str(rel);
            if let Some(l) = label {
                tok.push(':');
                tok.push_str(l);
            }
            if keep_ref(node) {
                if let Some(p) = node.parent.and_then(|p| labels[p].as_deref()) {
                    tok.push_str("->");
                    tok.push_str(p);
                }
            }
        }
        if let Some(tag) = &node.node_tag {
            tok.push_str("::");
            tok.push_str(tag);
            if node.rel_tag.is_none() {
                if let Some(l) = label {
                    tok.push(':');
                    tok.push_str(l);
                }
            }
        }
        for g in &closes[i] {
            tok.push_str("]<");
            tok.push_str(&g.tag);
            tok.push('>');
        }
        out.push(tok);
    }
    out.join(" ")
}

/// Linear form with every attachment spelled out. Referenced nodes are
/// labelled i, j, k, ... in surface order.
pub fn emit_explicit(tree: &DepTree) -> String {
    emit_with_refs(tree, |_| true)
}

/// Linear form that leaves out every `->ref` the default attachment rule
/// recovers, and every label nothing refers to.
pub fn emit_minimal(tree: &DepTree, registry: &TagRegistry) -> String {
    let verbal = verbal_flags(
        tree.nodes.iter().map(|n| (n.rel_tag.clone(), n.node_tag.clone())),
        registry,
    );
    emit_with_refs(tree, |node| node.parent != nearest_verbal(node.position, &verbal))
}

/// Parse and resolve one line of linear notation.
pub fn parse_sentence(line: &str, registry: &TagRegistry) -> Analysis {
    parse_sentence_at(line, 0, registry)
}

/// [`parse_sentence`] with diagnostics attributed to `line_no`.
pub fn parse_sentence_at(line: &str, line_no: usize, registry: &TagRegistry) -> Analysis {
    let mut diags = Vec::new();
    let mut tokens: Vec<AnnToken> = Vec::new();
    let mut columns: Vec<usize> = Vec::new();
    let mut groups: Vec<Group> = Vec::new();
    // (start token, column) of each open bracket
    let mut stack: Vec<(usize, usize)> = Vec::new();

    let err = |column: usize, msg: String| Diagnostic::error(line_no, msg).with_column(column);

    for (byte, raw) in split_with_offsets(line) {
        let column = line[..byte].chars().count() + 1;
        let mut rest = raw;
        let mut offset = 0;
        while let Some(r) = rest.strip_prefix('[') {
            stack.push((tokens.len(), column + offset));
            if stack.len() > 1 {
                diags.push(
                    Diagnostic::warning(line_no, "nested group beyond sentence level").with_column(column + offset),
                );
            }
            rest = r;
            offset += 1;
        }
        let (core, closers) = match rest.find(']') {
            Some(p) => (&rest[..p], &rest[p..]),
            None => (rest, ""),
        };
        if !core.is_empty() {
            match parse_token(core, registry) {
                Ok((tok, warnings)) => {
                    diags.extend(
                        warnings
                            .into_iter()
                            .map(|w| Diagnostic { line: line_no, ..w }.with_column(column + offset)),
                    );
                    tokens.push(tok);
                    columns.push(column + offset);
                }
                Err(e) => {
                    diags.push(err(column + offset + e.column - 1, format!("{} in '{core}'", e.kind)));
                    // keep positions aligned for the bracket bookkeeping
                    tokens.push(AnnToken {
                        surface: core.to_string(),
                        ..AnnToken::default()
                    });
                    columns.push(column + offset);
                }
            }
        }
        let mut close_col = column + offset + core.chars().count();
        let mut closers = closers;
        while !closers.is_empty() {
            let Some(after) = closers.strip_prefix("]<") else {
                diags.push(err(close_col, format!("expected ']<TAG>' at '{closers}'")));
                break;
            };
            let Some(end) = after.find('>') else {
                diags.push(err(close_col, format!("unterminated group tag in '{closers}'")));
                break;
            };
            let tag = &after[..end];
            match stack.pop() {
                None => diags.push(err(close_col, "unbalanced ']' without matching '['".to_string())),
                Some((start, open_col)) => {
                    if tag.is_empty() {
                        diags.push(err(close_col, "empty group tag".to_string()));
                    } else if tokens.len() == start {
                        diags.push(err(open_col, "empty group".to_string()));
                    } else {
                        let known = registry
                            .relation(tag)
                            .or_else(|| registry.node(tag))
                            .map(|d| d.code.clone());
                        if known.is_none() {
                            diags.push(
                                Diagnostic::warning(line_no, format!("unknown group tag '{tag}'"))
                                    .with_column(close_col),
                            );
                        }
                        groups.push(Group {
                            start,
                            end: tokens.len() - 1,
                            tag: known.unwrap_or_else(|| tag.to_string()),
                        });
                    }
                }
            }
            close_col += 2 + end + 1;
            closers = &after[end + 1..];
        }
    }
    for (_, open_col) in &stack {
        diags.push(err(*open_col, "unbalanced '[' is never closed".to_string()));
    }
    if has_errors(&diags) {
        return Analysis::failed(diags);
    }
    groups.sort_by_key(|g| (g.start, std::cmp::Reverse(g.end)));

    let loc = Locator {
        line: line_no,
        columns: Some(&columns),
    };
    let mut analysis = resolve_grouped(&tokens, &groups, &loc, registry);
    diags.append(&mut analysis.diagnostics);
    analysis.diagnostics = diags;
    analysis
}

fn split_with_offsets(line: &str) -> impl Iterator<Item = (usize, &str)> {
    line.split_whitespace()
        .map(move |tok| (tok.as_ptr() as usize - line.as_ptr() as usize, tok))
}

/// One sentence line from a corpus document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SentenceLine {
    /// First word of the `#` comment directly above the sentence, if any.
    pub id: Option<String>,
    pub line: usize,
    pub raw: String,
    pub analysis: Analysis,
}

/// Parse a corpus document: one sentence per line, `#` lines are comments
/// and a comment directly above a sentence names it.
pub fn parse_document(text: &str, registry: &TagRegistry) -> Vec<SentenceLine> {
    let mut out = Vec::new();
    let mut pending_id: Option<String> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            pending_id = None;
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            pending_id = comment.split_whitespace().next().map(str::to_string);
            continue;
        }
        out.push(SentenceLine {
            id: pending_id.take(),
            line: i + 1,
            raw: line.to_string(),
            analysis: parse_sentence_at(line, i + 1, registry),
        });
    }
    out
}
