#![allow(dead_code)]

use lexkit::anncorra::{DepNode, DepTree, Group};
use rand::seq::SliceRandom;
use rand::Rng;

pub const EXPLICIT: &str = "rAma_ne/k1->i phala/k2->j kATakara/kr:j->i pAnI/k2->i piyA::v:i";
pub const DEFAULTED: &str = "rAma_ne/k1->i phala/k2 kATakara/kr pAnI/k2 piyA::v:i";

pub fn node(pos: usize, rel: Option<&str>, tag: Option<&str>, parent: Option<usize>) -> DepNode {
    DepNode {
        position: pos,
        surface: format!("w{pos}"),
        rel_tag: rel.map(str::to_string),
        node_tag: tag.map(str::to_string),
        index: None,
        parent,
        children: Vec::new(),
    }
}

/// Every parent array on `n` positions that forms a single rooted tree.
pub fn parent_arrays(n: usize) -> Vec<Vec<Option<usize>>> {
    let mut out = Vec::new();
    for root in 0..n {
        let others: Vec<usize> = (0..n).filter(|&i| i != root).collect();
        let total = n.pow(others.len() as u32);
        for code in 0..total {
            let mut parent = vec![None; n];
            let mut c = code;
            for &o in &others {
                parent[o] = Some(c % n);
                c /= n;
            }
            if is_tree(&parent) {
                out.push(parent);
            }
        }
    }
    out
}

fn is_tree(parent: &[Option<usize>]) -> bool {
    (0..parent.len()).all(|start| {
        let mut cur = start;
        for _ in 0..=parent.len() {
            match parent[cur] {
                None => return true,
                Some(p) if p == cur => return false,
                Some(p) => cur = p,
            }
        }
        false
    })
}

/// All trees with up to `max_n` nodes over relations {k1, k2} and node tag
/// {none, v}. Nodes that have children carry a tag so they can be referred
/// to; the root has no relation.
pub fn enumerate_trees(max_n: usize) -> Vec<DepTree> {
    let rels = ["k1", "k2"];
    let mut out = Vec::new();
    for n in 1..=max_n {
        for parent in parent_arrays(n) {
            let root = parent.iter().position(Option::is_none).unwrap();
            let non_roots: Vec<usize> = (0..n).filter(|&i| i != root).collect();
            let root_tags: &[Option<&str>] = if n == 1 { &[None, Some("v")] } else { &[Some("v")] };
            for rel_code in 0..(1usize << non_roots.len()) {
                for tag_code in 0..(1usize << non_roots.len()) {
                    for &root_tag in root_tags {
                        let nodes = (0..n)
                            .map(|i| {
                                if i == root {
                                    return node(i, None, root_tag, None);
                                }
                                let k = non_roots.iter().position(|&x| x == i).unwrap();
                                let rel = rels[(rel_code >> k) & 1];
                                let tag = ((tag_code >> k) & 1 == 1).then_some("v");
                                node(i, Some(rel), tag, parent[i])
                            })
                            .collect();
                        out.push(DepTree::from_nodes(nodes, Vec::new()));
                    }
                }
            }
        }
    }
    out
}

/// Random tree on `n` nodes with a richer tag alphabet, sometimes wrapped in
/// a sentence group.
pub fn random_tree(rng: &mut impl Rng, n: usize) -> DepTree {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut parent = vec![None; n];
    for k in 1..n {
        parent[order[k]] = Some(order[rng.gen_range(0..k)]);
    }
    let rels = ["k1", "k2", "k3", "kr"];
    let tags = [None, Some("v"), Some("Kr"), Some("vH"), Some("yo")];
    let nodes = (0..n)
        .map(|i| match parent[i] {
            None => node(i, None, Some(["v", "vH", "yo"][rng.gen_range(0..3)]), None),
            Some(p) => node(
                i,
                Some(rels[rng.gen_range(0..rels.len())]),
                tags[rng.gen_range(0..tags.len())],
                Some(p),
            ),
        })
        .collect();
    let groups = if rng.gen_bool(0.5) {
        vec![Group {
            start: 0,
            end: n - 1,
            tag: "s".into(),
        }]
    } else {
        Vec::new()
    };
    DepTree::from_nodes(nodes, groups)
}

/// Nearest verbal position by brute force over all other positions: minimum
/// distance, right side preferred on ties.
pub fn oracle_default_parent(from: usize, verbal: &[bool]) -> Option<usize> {
    (0..verbal.len())
        .filter(|&j| j != from && verbal[j])
        .min_by_key(|&j| (j.abs_diff(from), j < from))
}

/// Verbal flags under the built-in inventory.
pub fn builtin_verbal(rel: Option<&str>, tag: Option<&str>) -> bool {
    matches!(tag.map(str::to_lowercase).as_deref(), Some("v" | "kr" | "vh"))
        || matches!(rel.map(str::to_lowercase).as_deref(), Some("kr"))
}

/// Plain-text substitution of captured spans into a target frame string.
pub fn hand_substitute(frame_i: &str, bindings: &[(char, &str)], keep_optional: bool) -> String {
    frame_i
        .split(' ')
        .filter_map(|tok| {
            if let Some(inner) = tok.strip_prefix('[').and_then(|t| t.strip_suffix(']')) {
                return keep_optional.then(|| inner.to_string());
            }
            let mut chars = tok.chars();
            if let (Some(c), None) = (chars.next(), chars.next()) {
                if let Some((_, span)) = bindings.iter().find(|(s, _)| *s == c) {
                    return Some(span.to_string());
                }
            }
            Some(tok.to_string())
        })
        .collect::<Vec<_>>()
        .join(" ")
}
