//! Command-line front end. `run_with` is the whole program; `main` only wires
//! it to the process streams.
//!
//! Machine output goes to stdout, diagnostics and usage to stderr. Exit codes:
//! 0 clean, 1 warnings under `--strict`, 2 errors, 3 usage or I/O failure.

use std::collections::HashSet;
use std::ffi::OsString;
use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use lexkit::anncorra::{self, load_tagset, TagRegistry};
use lexkit::corpus::{ExportFormat, Store, StoreError};
use lexkit::dict::{parse_dictionary, Dictionary};
use lexkit::sutra::{self, AliasTable};
use lexkit::tlg::{self, Policy};
use lexkit::transfer::{self, OptionalPolicy, TransferOptions};
use lexkit::{Diagnostic, Severity};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Clean,
    Warnings,
    Errors,
    Failure,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        match self {
            ExitStatus::Clean => 0,
            ExitStatus::Warnings => 1,
            ExitStatus::Errors => 2,
            ExitStatus::Failure => 3,
        }
    }

    /// Status for a run whose worst diagnostic is `worst`.
    pub fn from_severity(worst: Option<Severity>, strict: bool) -> Self {
        match worst {
            Some(Severity::Error) => ExitStatus::Errors,
            Some(Severity::Warning) if strict => ExitStatus::Warnings,
            _ => ExitStatus::Clean,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "lexkit", version, about = "Lexical resource and treebank tools")]
struct Cli {
    /// Exit with code 1 when warnings are reported
    #[arg(long, global = true)]
    strict: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Bilingual dictionary files
    #[command(subcommand)]
    Dict(DictCmd),
    /// Transfer-lexicon records
    #[command(subcommand)]
    Tlg(TlgCmd),
    /// Dependency-annotated sentences
    #[command(subcommand)]
    Anncorra(AnnCmd),
    /// Core-meaning formulas and sense threads
    #[command(subcommand)]
    Sutra(SutraCmd),
    /// Frame-based transfer of an English sentence
    Transfer(TransferArgs),
    /// Annotated corpus store
    #[command(subcommand)]
    Corpus(CorpusCmd),
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Text,
    Interchange,
}

#[derive(Subcommand, Debug)]
enum DictCmd {
    /// Check a dictionary and print a summary or interchange document
    Parse {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Re-emit a dictionary in canonical form
    Emit { file: PathBuf },
    /// Print the entries for a headword
    Lookup {
        file: PathBuf,
        headword: String,
        #[arg(long)]
        pos: Option<String>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Keep only the entries whose headword is in a word list
    Filter {
        file: PathBuf,
        #[arg(long)]
        wordlist: PathBuf,
    },
}

#[derive(Subcommand, Debug)]
enum TlgCmd {
    /// Check records and print a summary or interchange document
    Parse {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Check records for missing or inconsistent fields
    Validate { file: PathBuf },
    /// Build record skeletons from dictionary entries
    Seed {
        #[arg(long)]
        dict: PathBuf,
        /// Only this headword
        #[arg(long)]
        headword: Option<String>,
    },
    /// Re-emit records in canonical field order
    Emit { file: PathBuf },
    /// Extract English/translation sentence pairs as TSV
    Corpus { file: PathBuf },
}

#[derive(Args, Debug)]
struct TagsetArg {
    /// Tag inventory file (extends the built-in tags)
    #[arg(long, env = "LERIL_TAGSET")]
    tagset: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum AnnCmd {
    /// Resolve sentences and print their trees
    Parse {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        #[command(flatten)]
        tagset: TagsetArg,
    },
    /// Report diagnostics only
    Check {
        file: PathBuf,
        #[command(flatten)]
        tagset: TagsetArg,
    },
    /// Rewrite sentences with every link spelled out, or with defaults dropped
    Convert {
        file: PathBuf,
        #[arg(long, conflicts_with = "minimize")]
        explicit: bool,
        #[arg(long)]
        minimize: bool,
        #[command(flatten)]
        tagset: TagsetArg,
    },
}

#[derive(Subcommand, Debug)]
enum SutraCmd {
    /// Parse formulas, one per line, and print them canonically
    ParseFormula {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Parse sense threads and print them canonically
    ParseThread {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Check formulas against the threads at the same position
    Check {
        formulas: PathBuf,
        threads: PathBuf,
        #[arg(long)]
        alias: Option<PathBuf>,
    },
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum OptionalArg {
    Include,
    Drop,
    Bracket,
}

#[derive(Args, Debug)]
struct TransferArgs {
    /// Transfer-lexicon file holding the frames
    #[arg(long, required_unless_present = "frame_e")]
    lexicon: Option<PathBuf>,
    /// Record to use; the record for the sentence's words otherwise
    #[arg(long)]
    headword: Option<String>,
    #[arg(long, requires = "headword")]
    sense: Option<u32>,
    #[arg(long, value_enum, default_value = "include")]
    optional: OptionalArg,
    /// Annotate slot tokens with first-sense glosses from --dict
    #[arg(long, requires = "dict")]
    gloss_slots: bool,
    #[arg(long)]
    dict: Option<PathBuf>,
    #[arg(long, requires = "frame_i", conflicts_with = "lexicon")]
    frame_e: Option<String>,
    #[arg(long, requires = "frame_e")]
    frame_i: Option<String>,
    sentence: String,
}

#[derive(Args, Debug)]
struct StoreArg {
    #[arg(long)]
    store: PathBuf,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum ExportArg {
    Linear,
    Interchange,
}

#[derive(Subcommand, Debug)]
enum CorpusCmd {
    /// Import a linear-format file; rejected as a whole if any sentence fails
    Add {
        file: PathBuf,
        #[command(flatten)]
        store: StoreArg,
        #[arg(long)]
        lang: String,
        /// Prefix for sentences without an id comment (default: file stem)
        #[arg(long)]
        id_prefix: Option<String>,
        /// Provenance note stored with each sentence
        #[arg(long)]
        source: Option<String>,
    },
    /// List nodes carrying a relation tag
    Query {
        #[command(flatten)]
        store: StoreArg,
        #[arg(long)]
        rel: String,
        #[arg(long)]
        lang: Option<String>,
    },
    /// Tag counts and tree depth
    Stats {
        #[command(flatten)]
        store: StoreArg,
    },
    Export {
        #[command(flatten)]
        store: StoreArg,
        #[arg(long)]
        lang: Option<String>,
        #[arg(long, value_enum, default_value = "linear")]
        format: ExportArg,
    },
}

/// A failure that stops the command before any diagnostics make sense.
struct Fatal(String);

impl From<io::Error> for Fatal {
    fn from(e: io::Error) -> Self {
        Fatal(e.to_string())
    }
}

struct Ctx<'a> {
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
    strict: bool,
    worst: Option<Severity>,
    data_error: bool,
}

impl Ctx<'_> {
    fn report(&mut self, origin: &str, diags: &[Diagnostic]) -> io::Result<()> {
        for d in diags {
            writeln!(self.err, "{origin}:{d}")?;
            self.worst = self.worst.max(Some(d.severity));
        }
        Ok(())
    }

    fn status(&self) -> ExitStatus {
        if self.data_error {
            return ExitStatus::Errors;
        }
        ExitStatus::from_severity(self.worst, self.strict)
    }
}

fn read_input(path: &Path) -> Result<String, Fatal> {
    if path == Path::new("-") {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s)?;
        return Ok(s);
    }
    fs::read_to_string(path).map_err(|e| Fatal(format!("{}: {e}", path.display())))
}

fn origin(path: &Path) -> String {
    if path == Path::new("-") {
        "<stdin>".to_string()
    } else {
        path.display().to_string()
    }
}

fn json(value: &serde_json::Value) -> String {
    serde_json::to_string_pretty(value).expect("serializable") + "\n"
}

/// Parse `args` (including the program name) and run one subcommand.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> ExitStatus
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                ExitStatus::Failure
            } else {
                let _ = write!(out, "{text}");
                ExitStatus::Clean
            };
        }
    };
    let mut ctx = Ctx {
        out,
        err,
        strict: cli.strict,
        worst: None,
        data_error: false,
    };
    match dispatch(cli.command, &mut ctx) {
        Ok(()) => ctx.status(),
        Err(Fatal(msg)) => {
            let _ = writeln!(ctx.err, "lexkit: {msg}");
            ExitStatus::Failure
        }
    }
}

pub fn run() -> ExitStatus {
    let stdout = io::stdout();
    let stderr = io::stderr();
    run_with(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}

fn dispatch(cmd: Command, ctx: &mut Ctx) -> Result<(), Fatal> {
    match cmd {
        Command::Dict(c) => dict_cmd(c, ctx),
        Command::Tlg(c) => tlg_cmd(c, ctx),
        Command::Anncorra(c) => ann_cmd(c, ctx),
        Command::Sutra(c) => sutra_cmd(c, ctx),
        Command::Transfer(a) => transfer_cmd(a, ctx),
        Command::Corpus(c) => corpus_cmd(c, ctx),
    }
}

fn load_dict(path: &Path, ctx: &mut Ctx) -> Result<Dictionary, Fatal> {
    let (dict, diags) = parse_dictionary(&read_input(path)?);
    ctx.report(&origin(path), &diags)?;
    Ok(dict)
}

fn dict_cmd(cmd: DictCmd, ctx: &mut Ctx) -> Result<(), Fatal> {
    match cmd {
        DictCmd::Parse { file, format } => {
            let dict = load_dict(&file, ctx)?;
            match format {
                Format::Interchange => write!(ctx.out, "{}", json(&dict.to_interchange()))?,
                Format::Text => {
                    for e in &dict.entries {
                        writeln!(ctx.out, "{}\t{}\t{}", e.headword, e.pos, e.senses.len())?;
                    }
                }
            }
        }
        DictCmd::Emit { file } => {
            let dict = load_dict(&file, ctx)?;
            write!(ctx.out, "{}", dict.emit())?;
        }
        DictCmd::Lookup {
            file,
            headword,
            pos,
            format,
        } => {
            let dict = load_dict(&file, ctx)?;
            let found: Vec<_> = dict.lookup(&headword, pos.as_deref()).into_iter().cloned().collect();
            if found.is_empty() {
                writeln!(ctx.err, "{}: no entry for '{headword}'", origin(&file))?;
                ctx.data_error = true;
                return Ok(());
            }
            let sub = Dictionary::from_entries(found);
            match format {
                Format::Interchange => write!(ctx.out, "{}", json(&sub.to_interchange()))?,
                Format::Text => write!(ctx.out, "{}", sub.emit())?,
            }
        }
        DictCmd::Filter { file, wordlist } => {
            let dict = load_dict(&file, ctx)?;
            let words: HashSet<String> = read_input(&wordlist)?
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(|l| l.split_whitespace().next().unwrap_or(l).to_string())
                .collect();
            write!(ctx.out, "{}", dict.frequency_filter(&words).emit())?;
        }
    }
    Ok(())
}

fn load_tlg(path: &Path, ctx: &mut Ctx) -> Result<Vec<tlg::TlgRecord>, Fatal> {
    let (records, diags) = tlg::parse_tlg(&read_input(path)?);
    ctx.report(&origin(path), &diags)?;
    Ok(records)
}

fn tlg_cmd(cmd: TlgCmd, ctx: &mut Ctx) -> Result<(), Fatal> {
    match cmd {
        TlgCmd::Parse { file, format } => {
            let records = load_tlg(&file, ctx)?;
            match format {
                Format::Interchange => write!(ctx.out, "{}", json(&tlg::to_interchange(&records)))?,
                Format::Text => {
                    for r in &records {
                        writeln!(ctx.out, "{}\t{}\t{}", r.headword, r.pos, r.meanings.len())?;
                    }
                }
            }
        }
        TlgCmd::Validate { file } => {
            let records = load_tlg(&file, ctx)?;
            let policy = if ctx.strict { Policy::Strict } else { Policy::Lenient };
            let name = origin(&file);
            for r in &records {
                let diags = tlg::validate_tlg(r, policy);
                ctx.report(&name, &diags)?;
            }
        }
        TlgCmd::Seed { dict, headword } => {
            let d = load_dict(&dict, ctx)?;
            let mut records = Vec::new();
            let name = origin(&dict);
            for entry in d
                .entries
                .iter()
                .filter(|e| headword.as_deref().is_none_or(|h| e.headword == h))
            {
                let (record, diags) = tlg::seed_from_dictionary(entry);
                ctx.report(&name, &diags)?;
                records.push(record);
            }
            if records.is_empty() {
                if let Some(h) = headword {
                    writeln!(ctx.err, "{name}: no entry for '{h}'")?;
                    ctx.data_error = true;
                }
            }
            write!(ctx.out, "{}", tlg::emit_tlg(&records))?;
        }
        TlgCmd::Emit { file } => {
            let records = load_tlg(&file, ctx)?;
            write!(ctx.out, "{}", tlg::emit_tlg(&records))?;
        }
        TlgCmd::Corpus { file } => {
            let records = load_tlg(&file, ctx)?;
            for pair in tlg::extract_parallel_corpus(&records) {
                writeln!(ctx.out, "{}", pair.to_tsv())?;
            }
        }
    }
    Ok(())
}

fn registry(arg: &TagsetArg) -> Result<TagRegistry, Fatal> {
    let Some(path) = &arg.tagset else {
        return Ok(TagRegistry::default());
    };
    match load_tagset(&read_input(path)?) {
        Ok(r) => Ok(r),
        Err(e) => Err(Fatal(format!("{}: {e}", path.display()))),
    }
}

fn ann_cmd(cmd: AnnCmd, ctx: &mut Ctx) -> Result<(), Fatal> {
    match cmd {
        AnnCmd::Parse { file, format, tagset } => {
            let reg = registry(&tagset)?;
            let text = read_input(&file)?;
            let name = origin(&file);
            let mut docs = Vec::new();
            for s in anncorra::parse_document(&text, &reg) {
                ctx.report(&name, &s.analysis.diagnostics)?;
                let Some(tree) = &s.analysis.tree else { continue };
                match format {
                    Format::Text => {
                        let id = s.id.clone().unwrap_or_else(|| format!("line-{}", s.line));
                        writeln!(ctx.out, "# {id}")?;
                        for n in &tree.nodes {
                            let parent = n.parent.map_or("-".to_string(), |p| (p + 1).to_string());
                            writeln!(
                                ctx.out,
                                "{}\t{}\t{}\t{}\t{}",
                                n.position + 1,
                                n.surface,
                                n.rel_tag.as_deref().unwrap_or("-"),
                                n.node_tag.as_deref().unwrap_or("-"),
                                parent
                            )?;
                        }
                    }
                    Format::Interchange => docs.push(serde_json::json!({
                        "id": s.id,
                        "line": s.line,
                        "tree": tree.to_interchange(),
                    })),
                }
            }
            if format == Format::Interchange {
                write!(ctx.out, "{}", json(&serde_json::json!({ "sentences": docs })))?;
            }
        }
        AnnCmd::Check { file, tagset } => {
            let reg = registry(&tagset)?;
            let text = read_input(&file)?;
            let name = origin(&file);
            for s in anncorra::parse_document(&text, &reg) {
                ctx.report(&name, &s.analysis.diagnostics)?;
            }
        }
        AnnCmd::Convert {
            file,
            explicit,
            minimize,
            tagset,
        } => {
            if !explicit && !minimize {
                return Err(Fatal("convert: one of --explicit or --minimize is required".into()));
            }
            let reg = registry(&tagset)?;
            let text = read_input(&file)?;
            let name = origin(&file);
            let sentences = anncorra::parse_document(&text, &reg);
            let mut next = sentences.iter().peekable();
            for (i, line) in text.lines().enumerate() {
                let Some(s) = next.next_if(|s| s.line == i + 1) else {
                    writeln!(ctx.out, "{line}")?;
                    continue;
                };
                ctx.report(&name, &s.analysis.diagnostics)?;
                match &s.analysis.tree {
                    Some(tree) if !s.analysis.diagnostics.iter().any(Diagnostic::is_error) => {
                        let converted = if minimize {
                            anncorra::emit_minimal(tree, &reg)
                        } else {
                            anncorra::emit_explicit(tree)
                        };
                        writeln!(ctx.out, "{converted}")?;
                    }
                    _ => writeln!(ctx.out, "{line}")?,
                }
            }
        }
    }
    Ok(())
}

fn sutra_cmd(cmd: SutraCmd, ctx: &mut Ctx) -> Result<(), Fatal> {
    match cmd {
        SutraCmd::ParseFormula { file, format } => {
            let text = read_input(&file)?;
            let name = origin(&file);
            let mut parsed = Vec::new();
            for (line, item) in sutra::split_formula_file(&text) {
                match sutra::parse_formula(&item) {
                    Ok(f) => parsed.push(f),
                    Err(e) => ctx.report(&name, &[Diagnostic::error(line, e.to_string())])?,
                }
            }
            match format {
                Format::Text => {
                    for f in &parsed {
                        writeln!(ctx.out, "{}", sutra::emit_formula(f))?;
                    }
                }
                Format::Interchange => write!(ctx.out, "{}", json(&serde_json::json!({ "formulas": parsed })))?,
            }
        }
        SutraCmd::ParseThread { file, format } => {
            let text = read_input(&file)?;
            let name = origin(&file);
            let mut parsed = Vec::new();
            for (line, item) in sutra::split_thread_file(&text) {
                match sutra::parse_thread(&item) {
                    Ok(t) => parsed.push(t),
                    Err(e) => ctx.report(&name, &[Diagnostic::error(line, e.to_string())])?,
                }
            }
            match format {
                Format::Text => {
                    for t in &parsed {
                        writeln!(ctx.out, "{}", sutra::emit_thread(t))?;
                    }
                }
                Format::Interchange => write!(ctx.out, "{}", json(&serde_json::json!({ "threads": parsed })))?,
            }
        }
        SutraCmd::Check {
            formulas,
            threads,
            alias,
        } => {
            let aliases = match &alias {
                Some(path) => {
                    AliasTable::parse(&read_input(path)?).map_err(|e| Fatal(format!("{}: {e}", path.display())))?
                }
                None => AliasTable::default(),
            };
            let (fname, tname) = (origin(&formulas), origin(&threads));
            let ftext = read_input(&formulas)?;
            let ttext = read_input(&threads)?;
            let fs = sutra::split_formula_file(&ftext);
            let ts = sutra::split_thread_file(&ttext);
            if fs.len() != ts.len() {
                ctx.report(
                    &fname,
                    &[Diagnostic::error(
                        0,
                        format!("{} formulas but {} threads in {tname}", fs.len(), ts.len()),
                    )],
                )?;
            }
            for ((fline, ftext), (tline, ttext)) in fs.iter().zip(&ts) {
                let formula = match sutra::parse_formula(ftext) {
                    Ok(f) => f,
                    Err(e) => {
                        ctx.report(&fname, &[Diagnostic::error(*fline, e.to_string())])?;
                        continue;
                    }
                };
                let thread = match sutra::parse_thread(ttext) {
                    Ok(t) => t,
                    Err(e) => {
                        ctx.report(&tname, &[Diagnostic::error(*tline, e.to_string())])?;
                        continue;
                    }
                };
                let diags: Vec<Diagnostic> = sutra::check_consistency(&formula, &thread, &aliases)
                    .into_iter()
                    .map(|mut d| {
                        d.line = *fline;
                        d
                    })
                    .collect();
                let verdict = if diags.is_empty() { "ok" } else { "inconsistent" };
                writeln!(ctx.out, "{}\t{verdict}", sutra::emit_formula(&formula))?;
                ctx.report(&fname, &diags)?;
            }
        }
    }
    Ok(())
}

fn transfer_cmd(a: TransferArgs, ctx: &mut Ctx) -> Result<(), Fatal> {
    let policy = match a.optional {
        OptionalArg::Include => OptionalPolicy::Include,
        OptionalArg::Drop => OptionalPolicy::Drop,
        OptionalArg::Bracket => OptionalPolicy::Bracket,
    };
    let dict = match &a.dict {
        Some(p) => Some(load_dict(p, ctx)?),
        None => None,
    };
    let tokens = transfer::tokenize(&a.sentence);

    let mut hits = Vec::new();
    if let (Some(fe), Some(fi)) = (&a.frame_e, &a.frame_i) {
        match transfer::transfer_with_frames(fe, fi, &tokens, policy) {
            Ok(Some(hit)) => hits.push(hit),
            Ok(None) => {}
            Err(msg) => ctx.report("<frames>", &[Diagnostic::error(0, msg)])?,
        }
    } else if let Some(lexicon) = &a.lexicon {
        let records = load_tlg(lexicon, ctx)?;
        let name = origin(lexicon);
        let folded: HashSet<String> = tokens.iter().map(|t| transfer::inflection_fold(t)).collect();
        let chosen: Vec<_> = records
            .iter()
            .filter(|r| match &a.headword {
                Some(h) => &r.headword == h,
                None => folded.contains(&transfer::inflection_fold(&r.headword)),
            })
            .collect();
        if chosen.is_empty() {
            let what = a
                .headword
                .as_deref()
                .map_or("any word of the sentence".to_string(), |h| format!("'{h}'"));
            ctx.report(&name, &[Diagnostic::error(0, format!("no record for {what}"))])?;
        }
        let options = TransferOptions {
            optional: policy,
            sense: a.sense,
        };
        for r in chosen {
            let (results, diags) = transfer::transfer_sentence(r, &a.sentence, options);
            ctx.report(&name, &diags)?;
            hits.extend(results.into_iter().map(|res| (res.output, res.binding)));
        }
    }

    if hits.is_empty() {
        writeln!(ctx.err, "lexkit: no frame matches '{}'", a.sentence)?;
        ctx.data_error = true;
        return Ok(());
    }
    for (i, (output, binding)) in hits.iter().enumerate() {
        if i > 0 {
            writeln!(ctx.out)?;
        }
        writeln!(ctx.out, "{output}")?;
        for (slot, span) in binding.table() {
            writeln!(ctx.out, "{slot}\t{span}")?;
        }
        if let (true, Some(d)) = (a.gloss_slots, &dict) {
            for (slot, tok, gloss) in transfer::gloss_slots(binding, d) {
                writeln!(ctx.out, "# gloss {slot}\t{tok}\t{gloss}")?;
            }
        }
    }
    Ok(())
}

fn store_failure(e: StoreError, ctx: &mut Ctx) -> Result<(), Fatal> {
    match e {
        StoreError::Io(_) | StoreError::Locked(..) | StoreError::ReadOnly => Err(Fatal(e.to_string())),
        StoreError::Rejected {
            ref id,
            ref diagnostics,
        } => {
            let origin = format!("sentence {id}");
            ctx.report(&origin, diagnostics)?;
            writeln!(ctx.err, "lexkit: {e}")?;
            ctx.data_error = true;
            Ok(())
        }
        other => {
            writeln!(ctx.err, "lexkit: {other}")?;
            ctx.data_error = true;
            Ok(())
        }
    }
}

fn corpus_cmd(cmd: CorpusCmd, ctx: &mut Ctx) -> Result<(), Fatal> {
    match cmd {
        CorpusCmd::Add {
            file,
            store,
            lang,
            id_prefix,
            source,
        } => {
            let text = read_input(&file)?;
            let prefix = id_prefix.unwrap_or_else(|| {
                file.file_stem()
                    .map_or("s".to_string(), |s| s.to_string_lossy().into_owned())
            });
            let mut st = match Store::open_write(&store.store) {
                Ok(s) => s,
                Err(e) => return store_failure(e, ctx),
            };
            match st.import_linear(&text, &lang, &prefix, source.as_deref()) {
                Ok((ids, diags)) => {
                    ctx.report(&origin(&file), &diags)?;
                    for id in ids {
                        writeln!(ctx.out, "{id}")?;
                    }
                }
                Err(e) => return store_failure(e, ctx),
            }
        }
        CorpusCmd::Query { store, rel, lang } => {
            let st = match Store::open_read(&store.store) {
                Ok(s) => s,
                Err(e) => return store_failure(e, ctx),
            };
            let (hits, diags) = st.query_by_relation(&rel);
            ctx.report(&store.store.display().to_string(), &diags)?;
            for (id, pos) in hits {
                let Some(record) = st.get(&id) else { continue };
                if lang.as_deref().is_some_and(|l| l != record.language) {
                    continue;
                }
                let node = &record.tree.nodes[pos];
                let head = node.parent.map_or("-", |p| record.tree.nodes[p].surface.as_str());
                writeln!(ctx.out, "{id}\t{}\t{}\t{head}", pos + 1, node.surface)?;
            }
        }
        CorpusCmd::Stats { store } => {
            let st = match Store::open_read(&store.store) {
                Ok(s) => s,
                Err(e) => return store_failure(e, ctx),
            };
            write!(
                ctx.out,
                "{}",
                json(&serde_json::to_value(st.stats()).expect("serializable"))
            )?;
        }
        CorpusCmd::Export { store, lang, format } => {
            let st = match Store::open_read(&store.store) {
                Ok(s) => s,
                Err(e) => return store_failure(e, ctx),
            };
            let format = match format {
                ExportArg::Linear => ExportFormat::Linear,
                ExportArg::Interchange => ExportFormat::Interchange,
            };
            write!(ctx.out, "{}", st.export(format, lang.as_deref()))?;
        }
    }
    Ok(())
}
