//! Acceptance criteria. Runs as a plain binary under `cargo test` and prints
//! one PASS/FAIL line per criterion; any failure makes the process exit
//! non-zero.

mod common;

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use lexkit::anncorra::{emit_explicit, emit_minimal, parse_sentence, DepTree, TagRegistry};
use lexkit::corpus::{ExportFormat, Store};
use lexkit::dict::parse_dictionary;
use lexkit::sutra::{check_consistency, parse_formula, parse_thread, split_thread_file, AliasTable};
use lexkit::tlg::{extract_parallel_corpus, parse_tlg, validate_tlg, Policy};
use lexkit::transfer::{
    match_frame, parse_frame, render_target, tokenize, transfer_sentence, OptionalPolicy, Side, TransferOptions,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::*;

const GO_DICT: &str = include_str!("fixtures/go.dict");
const GO_TLG: &str = include_str!("fixtures/go.tlg");
const ISSUE_SUTRA: &str = include_str!("fixtures/issue.sutra");
const ISSUE_THREAD: &str = include_str!("fixtures/issue.thread");
const ISSUE_ALIAS: &str = include_str!("fixtures/issue.alias");

type Outcome = Result<String, String>;
type Criterion = (u32, &'static str, Duration, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn resolved(line: &str) -> Result<DepTree, String> {
    let a = parse_sentence(line, &TagRegistry::default());
    match a.tree {
        Some(t) if !a.diagnostics.iter().any(|d| d.is_error()) => Ok(t),
        _ => Err(format!("'{line}' failed: {:?}", a.diagnostics)),
    }
}

/// The analysis tree drawn for the example sentence, built by hand.
fn figure_tree() -> DepTree {
    let mut nodes = vec![
        node(0, Some("k1"), None, Some(4)),
        node(1, Some("k2"), None, Some(2)),
        node(2, Some("kr"), None, Some(4)),
        node(3, Some("k2"), None, Some(4)),
        node(4, None, Some("v"), None),
    ];
    for (n, s) in nodes.iter_mut().zip(["rAma_ne", "phala", "kATakara", "pAnI", "piyA"]) {
        n.surface = s.to_string();
    }
    DepTree::from_nodes(nodes, Vec::new())
}

fn c1_explicit_tree() -> Outcome {
    let tree = resolved(EXPLICIT)?;
    let expected = figure_tree();
    ensure!(tree == expected, "tree mismatch:\n{tree:?}\nexpected\n{expected:?}");
    ensure!(
        tree.nodes[tree.root].surface == "piyA",
        "root is {}",
        tree.nodes[tree.root].surface
    );
    let kids: Vec<_> = tree.nodes[4]
        .children
        .iter()
        .map(|&c| tree.nodes[c].surface.as_str())
        .collect();
    ensure!(kids == ["rAma_ne", "kATakara", "pAnI"], "piyA children {kids:?}");
    ensure!(
        tree.nodes[2].children == [1],
        "kATakara children {:?}",
        tree.nodes[2].children
    );
    Ok("root piyA(v); rAma_ne(k1) kATakara(kr) pAnI(k2); kATakara -> phala(k2)".into())
}

fn c2_defaulted_tree() -> Outcome {
    let tree = resolved(DEFAULTED)?;
    ensure!(tree == figure_tree(), "defaulted tree differs: {tree:?}");
    ensure!(
        tree.nodes[1].parent == Some(2),
        "phala attached to {:?}",
        tree.nodes[1].parent
    );
    Ok("defaulted form resolves to the same tree (phala -> kATakara)".into())
}

fn round_trip(tree: &DepTree, registry: &TagRegistry) -> Result<(), String> {
    let explicit = emit_explicit(tree);
    let back = resolved(&explicit)?;
    ensure!(&back == tree, "explicit round trip changed '{explicit}'");
    let minimal = emit_minimal(tree, registry);
    let back = resolved(&minimal)?;
    ensure!(&back == tree, "minimal round trip changed '{minimal}'");

    // minimality: an explicit ref survives exactly where the default differs
    let verbal: Vec<bool> = tree
        .nodes
        .iter()
        .map(|n| builtin_verbal(n.rel_tag.as_deref(), n.node_tag.as_deref()))
        .collect();
    for (n, tok) in tree.nodes.iter().zip(minimal.split(' ')) {
        if n.rel_tag.is_none() {
            continue;
        }
        let needed = oracle_default_parent(n.position, &verbal) != n.parent;
        ensure!(
            tok.contains("->") == needed,
            "'{tok}' in '{minimal}': ref needed={needed}"
        );
    }
    Ok(())
}

fn c3_round_trip_suite() -> Outcome {
    let registry = TagRegistry::default();
    let trees = enumerate_trees(5);
    let mut failures = Vec::new();
    for t in &trees {
        if let Err(e) = round_trip(t, &registry) {
            failures.push(e);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2001);
    for _ in 0..1000 {
        let t = random_tree(&mut rng, 8);
        if let Err(e) = round_trip(&t, &registry) {
            failures.push(e);
        }
    }
    ensure!(
        failures.is_empty(),
        "{} failures, first: {}",
        failures.len(),
        failures[0]
    );
    Ok(format!(
        "{} enumerated trees (<=5 nodes) + 1000 random 8-node trees, 0 failures",
        trees.len()
    ))
}

fn c4_dictionary() -> Outcome {
    let (dict, diags) = parse_dictionary(GO_DICT);
    ensure!(diags.is_empty(), "diagnostics {diags:?}");
    let go = dict.lookup("go", Some("V"));
    ensure!(go.len() == 1, "{} entries for go/V", go.len());
    let go = go[0];
    ensure!(go.senses.len() == 7, "{} senses", go.senses.len());
    ensure!(
        go.senses[2].gloss.derivation.as_deref() == Some("jAnA"),
        "sense 3 {:?}",
        go.senses[2].gloss
    );
    ensure!(
        go.senses[4].gloss.context.as_deref() == Some("sthiti"),
        "sense 5 {:?}",
        go.senses[4].gloss
    );
    let first = dict.emit();
    let (again, _) = parse_dictionary(&first);
    ensure!(again == dict, "re-parse differs");
    let second = again.emit();
    ensure!(first == second, "second emit differs");
    Ok("7 senses; sense 3 [<jAnA]; sense 5 {sthiti}; emit byte-stable".into())
}

fn c5_tlg() -> Outcome {
    let (records, diags) = parse_tlg(GO_TLG);
    ensure!(diags.is_empty(), "diagnostics {diags:?}");
    ensure!(
        records.len() == 1 && records[0].meanings.len() == 2,
        "unexpected shape {records:?}"
    );
    let errors: Vec<_> = validate_tlg(&records[0], Policy::Lenient)
        .into_iter()
        .filter(|d| d.is_error())
        .collect();
    ensure!(errors.is_empty(), "validation errors {errors:?}");
    let pairs = extract_parallel_corpus(&records);
    let got: Vec<(&str, &str)> = pairs
        .iter()
        .map(|p| (p.english.as_str(), p.translation.as_str()))
        .collect();
    let want = [
        ("I go to school.", "maiM skUla jAtA hUM."),
        (
            "These clothes go into that suitcase.",
            "ye kapaDe usa sUtakesa meM rakhe jAyeMge",
        ),
    ];
    ensure!(got == want, "pairs {got:?}");
    Ok("2 meanings, 0 validation errors, 2 parallel pairs".into())
}

fn c6_transfer() -> Outcome {
    // hand substitution first, independent of the engine
    let want1 = hand_substitute("A B [ko] jAtA hai", &[('A', "I"), ('B', "school")], true);
    let want2 = hand_substitute(
        "A B meM rakhA_jAtA_hai",
        &[('A', "These clothes"), ('B', "that suitcase")],
        true,
    );
    ensure!(want1 == "I school ko jAtA hai", "oracle gave '{want1}'");
    ensure!(
        want2 == "These clothes that suitcase meM rakhA_jAtA_hai",
        "oracle gave '{want2}'"
    );

    let (records, _) = parse_tlg(GO_TLG);
    let opts = TransferOptions::default();
    for (sentence, meaning, want) in [
        ("I go to school", 1, &want1),
        ("These clothes go into that suitcase", 2, &want2),
    ] {
        let (results, _) = transfer_sentence(&records[0], sentence, opts);
        ensure!(results.len() == 1, "'{sentence}': {} results", results.len());
        ensure!(
            results[0].meaning_number == meaning,
            "'{sentence}': meaning {}",
            results[0].meaning_number
        );
        ensure!(&results[0].output == want, "'{sentence}' -> '{}'", results[0].output);
    }
    Ok(format!("'{want1}' and '{want2}'"))
}

fn c7_sutra() -> Outcome {
    let line = ISSUE_SUTRA.lines().find(|l| !l.starts_with('#')).unwrap_or_default();
    let formula = parse_formula(line).map_err(|e| e.to_string())?;
    let d = formula.derivation.as_ref().ok_or("no derivation")?;
    ensure!(formula.head == "viSaya", "head {}", formula.head);
    ensure!(d.turn_count == 2, "turns {}", d.turn_count);
    ensure!(d.source.head == "niSpAdana", "source {}", d.source.head);
    let threads = split_thread_file(ISSUE_THREAD);
    ensure!(threads.len() == 1, "{} threads", threads.len());
    let thread = parse_thread(&threads[0].1).map_err(|e| e.to_string())?;
    ensure!(thread.stages.len() == 3, "{} stages", thread.stages.len());
    let aliases = AliasTable::parse(ISSUE_ALIAS).map_err(|e| e.to_string())?;
    let with = check_consistency(&formula, &thread, &aliases);
    ensure!(with.is_empty(), "with alias: {with:?}");
    let without = check_consistency(&formula, &thread, &AliasTable::default());
    ensure!(without.len() == 1, "without alias: {without:?}");
    Ok("viSaya ~~ < niSpAdana; 3 stages; consistent with alias, 1 warning without".into())
}

fn c8_slot_recovery() -> Outcome {
    let vocab = ["red", "box", "man", "tree"];
    let mut fillers: Vec<Vec<&str>> = vocab.iter().map(|w| vec![*w]).collect();
    for a in vocab {
        for b in vocab {
            fillers.push(vec![a, b]);
        }
    }
    let frames = [
        ("A goes to B", "A B [ko] jAtA hai"),
        ("A goes into B", "A B meM rakhA_jAtA_hai"),
    ];
    let mut checked = 0;
    let mut mismatches = Vec::new();
    for (fe, fi) in frames {
        let source = parse_frame(fe, Side::Source).map_err(|e| e.to_string())?;
        let target = parse_frame(fi, Side::Target).map_err(|e| e.to_string())?;
        for a in &fillers {
            for b in &fillers {
                checked += 1;
                let (a_text, b_text) = (a.join(" "), b.join(" "));
                let sentence = hand_substitute(fe, &[('A', &a_text), ('B', &b_text)], true);
                let Some(binding) = match_frame(&source, &tokenize(&sentence)) else {
                    mismatches.push(format!("no match: {sentence}"));
                    continue;
                };
                if binding.get('A') != Some(&a.iter().map(|s| s.to_string()).collect::<Vec<_>>()[..])
                    || binding.get('B') != Some(&b.iter().map(|s| s.to_string()).collect::<Vec<_>>()[..])
                {
                    mismatches.push(format!("{sentence}: {:?}", binding.table()));
                    continue;
                }
                let rendered = render_target(&target, &binding, OptionalPolicy::Include).map_err(|e| e.to_string())?;
                let want = hand_substitute(fi, &[('A', &a_text), ('B', &b_text)], true);
                if rendered != want {
                    mismatches.push(format!("{sentence}: rendered '{rendered}' want '{want}'"));
                }
            }
        }
    }
    ensure!(
        mismatches.is_empty(),
        "{} mismatches, first: {}",
        mismatches.len(),
        mismatches[0]
    );
    Ok(format!("{checked} planted bindings recovered, 0 mismatches"))
}

fn c9_corpus() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let stats = {
        let mut store = Store::open_write(dir.path()).map_err(|e| e.to_string())?;
        store.add_sentence("s1", EXPLICIT, "hin").map_err(|e| e.to_string())?;
        store.add_sentence("s2", DEFAULTED, "hin").map_err(|e| e.to_string())?;
        store.stats()
    };
    let want: BTreeMap<String, usize> = [("k1", 2), ("k2", 4), ("kr", 2)]
        .map(|(k, v)| (k.to_string(), v))
        .into();
    ensure!(stats.sentences == 2, "{} sentences", stats.sentences);
    ensure!(stats.relation_counts == want, "relations {:?}", stats.relation_counts);
    ensure!(
        stats.node_counts == BTreeMap::from([("v".to_string(), 2)]),
        "nodes {:?}",
        stats.node_counts
    );

    let reopened = Store::open_read(dir.path()).map_err(|e| e.to_string())?;
    ensure!(reopened.stats() == stats, "stats changed after reopen");
    let linear = reopened.export(ExportFormat::Linear, None);
    let fresh_dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut fresh = Store::open_write(fresh_dir.path()).map_err(|e| e.to_string())?;
    fresh
        .import_linear(&linear, "hin", "imp", None)
        .map_err(|e| e.to_string())?;
    ensure!(fresh.stats() == stats, "re-imported stats {:?}", fresh.stats());
    for id in ["s1", "s2"] {
        ensure!(
            fresh.get(id).map(|r| &r.tree) == reopened.get(id).map(|r| &r.tree),
            "tree {id} differs after re-import"
        );
    }
    Ok("k1:2 k2:4 kr:2 v:2 over 2 sentences; linear export re-imports identically".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        (1, "explicit sentence tree", Duration::from_secs(1), c1_explicit_tree),
        (2, "defaulted sentence tree", Duration::from_secs(1), c2_defaulted_tree),
        (
            3,
            "tree notation round trips",
            Duration::from_secs(30),
            c3_round_trip_suite,
        ),
        (4, "dictionary fixture", Duration::from_secs(1), c4_dictionary),
        (5, "transfer-lexicon fixture", Duration::from_secs(1), c5_tlg),
        (6, "frame transfer", Duration::from_secs(1), c6_transfer),
        (7, "formula and thread", Duration::from_secs(1), c7_sutra),
        (
            8,
            "slot recovery brute force",
            Duration::from_secs(10),
            c8_slot_recovery,
        ),
        (9, "corpus stats and export", Duration::from_secs(1), c9_corpus),
    ];
    let mut failed = 0;
    for (n, name, limit, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > limit => Err(format!("{detail} but took {elapsed:.2?} (limit {limit:?})")),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("criterion {n} PASS [{elapsed:.2?}] {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("criterion {n} FAIL [{elapsed:.2?}] {name}: {why}");
            }
        }
    }
    if failed == 0 {
        println!("acceptance: all 9 criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} of 9 criteria failed");
        ExitCode::FAILURE
    }
}
