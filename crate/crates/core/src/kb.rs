//! Precedent knowledge base: per-level map from canonical reaction-center
//! keys to aggregated functional-group signatures.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use log::{debug, warn};
use rayon::prelude::*;
use thiserror::Error;

use crate::reaction::{analyze_reaction, parse_reaction, FgLibrary, FgSignature, ReactionError, LEVELS};

pub const FORMAT_VERSION: u32 = 1;
const MAGIC: &str = "CHEMCENSOR-KB";
pub const DEFAULT_DOC_REF_CAP: usize = 5;

#[derive(Debug, Error)]
pub enum KbError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed knowledge base (line {line}): {msg}")]
    Format { line: usize, msg: String },
    #[error("knowledge base format version {found} is not supported (expected {expected})")]
    Version { found: u32, expected: u32 },
    #[error("knowledge base metadata mismatch: {0}")]
    MetadataMismatch(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrecedentEntry {
    pub key: String,
    pub level: u8,
    pub signature: FgSignature,
    pub count: u64,
    pub doc_refs: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KbMetadata {
    pub version: u32,
    pub library_digest: String,
    pub library_size: usize,
    pub source: String,
    pub reactions: u64,
    /// Seconds since the Unix epoch.
    pub built: u64,
    pub doc_ref_cap: usize,
}

#[derive(Debug, Clone)]
pub struct KnowledgeBase {
    meta: KbMetadata,
    levels: Vec<HashMap<String, PrecedentEntry>>,
}

/// One corpus line: a reaction SMILES and an optional document reference.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusRecord {
    pub line: usize,
    pub reaction: String,
    pub doc_ref: Option<String>,
}

#[derive(Debug, Clone)]
pub struct BuildOptions {
    pub doc_ref_cap: usize,
    pub source: String,
    /// Fixed build time; `None` uses the clock.
    pub built: Option<u64>,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions { doc_ref_cap: DEFAULT_DOC_REF_CAP, source: String::new(), built: None }
    }
}

/// Counts of records that did not contribute to the build.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BuildStats {
    pub records: usize,
    pub added: usize,
    pub unmapped: usize,
    pub invalid: usize,
    pub empty_center: usize,
    /// First few (line, message) pairs of skipped records.
    pub examples: Vec<(usize, String)>,
}

impl BuildStats {
    pub fn skipped(&self) -> usize {
        self.unmapped + self.invalid + self.empty_center
    }

    fn absorb(&mut self, other: BuildStats) {
        self.records += other.records;
        self.added += other.added;
        self.unmapped += other.unmapped;
        self.invalid += other.invalid;
        self.empty_center += other.empty_center;
        for e in other.examples {
            if self.examples.len() < 20 {
                self.examples.push(e);
            }
        }
    }
}

fn now_secs() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn clean_field(text: &str) -> String {
    text.chars().map(|c| if c == '\t' || c == '\n' || c == '\r' { ' ' } else { c }).collect()
}

/// Parses corpus text: one reaction per line, an optional tab-separated
/// document reference; blank lines and `#` comments are skipped.
pub fn parse_corpus(text: &str) -> Vec<CorpusRecord> {
    text.lines()
        .enumerate()
        .filter_map(|(i, line)| {
            let line_text = line.trim_end_matches('\r');
            if line_text.trim().is_empty() || line_text.starts_with('#') {
                return None;
            }
            let mut fields = line_text.splitn(2, '\t');
            let reaction = fields.next().unwrap_or("").trim().to_string();
            let doc_ref = fields.next().map(|s| s.trim().to_string()).filter(|s| !s.is_empty());
            Some(CorpusRecord { line: i + 1, reaction, doc_ref })
        })
        .collect()
}

pub fn read_corpus(path: &Path) -> Result<Vec<CorpusRecord>, KbError> {
    Ok(parse_corpus(&std::fs::read_to_string(path)?))
}

impl KnowledgeBase {
    pub fn empty(library: &FgLibrary, options: &BuildOptions) -> KnowledgeBase {
        KnowledgeBase {
            meta: KbMetadata {
                version: FORMAT_VERSION,
                library_digest: library.digest().to_string(),
                library_size: library.len(),
                source: clean_field(&options.source),
                reactions: 0,
                built: options.built.unwrap_or_else(now_secs),
                doc_ref_cap: options.doc_ref_cap,
            },
            levels: vec![HashMap::new(); LEVELS as usize],
        }
    }

    pub fn metadata(&self) -> &KbMetadata {
        &self.meta
    }

    pub fn lookup(&self, level: u8, key: &str) -> Option<&PrecedentEntry> {
        if !(1..=LEVELS).contains(&level) {
            return None;
        }
        self.levels[level as usize - 1].get(key)
    }

    pub fn entry_count(&self, level: u8) -> usize {
        self.levels.get(level as usize - 1).map_or(0, HashMap::len)
    }

    /// Entries of one level sorted by key.
    pub fn entries(&self, level: u8) -> Vec<&PrecedentEntry> {
        let mut v: Vec<&PrecedentEntry> = self.levels[level as usize - 1].values().collect();
        v.sort_by(|a, b| a.key.cmp(&b.key));
        v
    }

    fn add(&mut self, level: u8, key: &str, signature: &FgSignature, count: u64, refs: &[String]) {
        let cap = self.meta.doc_ref_cap;
        let map = &mut self.levels[level as usize - 1];
        let entry = map.entry(key.to_string()).or_insert_with(|| PrecedentEntry {
            key: key.to_string(),
            level,
            signature: FgSignature::new(signature.width()),
            count: 0,
            doc_refs: Vec::new(),
        });
        entry.signature.union_with(signature);
        entry.count += count;
        for r in refs {
            if entry.doc_refs.len() >= cap {
                break;
            }
            entry.doc_refs.push(r.clone());
        }
    }

    /// True when both have the same entries (ignoring build time and source).
    pub fn lookup_equivalent(&self, other: &KnowledgeBase) -> bool {
        self.meta.library_digest == other.meta.library_digest
            && (1..=LEVELS).all(|l| {
                let (a, b) = (&self.levels[l as usize - 1], &other.levels[l as usize - 1]);
                a.len() == b.len()
                    && a.iter().all(|(k, e)| {
                        b.get(k).is_some_and(|f| f.count == e.count && f.signature == e.signature)
                    })
            })
    }
}

type Analyzed = Result<Vec<(String, FgSignature)>, ReactionError>;

fn analyze_record(record: &CorpusRecord, library: &FgLibrary) -> Analyzed {
    let rxn = parse_reaction(&record.reaction)?;
    if !rxn.mapped {
        return Err(ReactionError::Unmapped);
    }
    let h = analyze_reaction(&rxn, library)?;
    Ok(h.levels.into_iter().map(|p| p.canonical_key).zip(h.signatures).collect())
}

/// Builds a knowledge base. Bad records are counted and skipped; unmapped
/// records are never mapped heuristically.
pub fn build_kb(
    records: &[CorpusRecord],
    library: &FgLibrary,
    options: &BuildOptions,
) -> (KnowledgeBase, BuildStats) {
    let mut kb = KnowledgeBase::empty(library, options);
    let mut stats = BuildStats::default();
    for chunk in records.chunks(4096) {
        let analyzed: Vec<Analyzed> = chunk.par_iter().map(|r| analyze_record(r, library)).collect();
        let mut part = BuildStats { records: chunk.len(), ..BuildStats::default() };
        for (record, result) in chunk.iter().zip(analyzed) {
            match result {
                Ok(levels) => {
                    part.added += 1;
                    let refs: Vec<String> = record.doc_ref.iter().map(|r| clean_field(r)).collect();
                    for (i, (key, sig)) in levels.iter().enumerate() {
                        kb.add(i as u8 + 1, key, sig, 1, &refs);
                    }
                }
                Err(e) => {
                    match e {
                        ReactionError::Unmapped => part.unmapped += 1,
                        ReactionError::EmptyCenter => part.empty_center += 1,
                        _ => part.invalid += 1,
                    }
                    debug!("corpus line {} skipped: {e}", record.line);
                    if part.examples.len() < 20 {
                        part.examples.push((record.line, e.to_string()));
                    }
                }
            }
        }
        stats.absorb(part);
    }
    kb.meta.reactions = stats.added as u64;
    if stats.skipped() > 0 {
        warn!(
            "skipped {} of {} corpus records ({} unmapped, {} invalid, {} without reaction center)",
            stats.skipped(),
            stats.records,
            stats.unmapped,
            stats.invalid,
            stats.empty_center
        );
    }
    (kb, stats)
}

/// Combines two knowledge bases built with the same library.
pub fn merge_kb(a: &KnowledgeBase, b: &KnowledgeBase) -> Result<KnowledgeBase, KbError> {
    let (ma, mb) = (&a.meta, &b.meta);
    if ma.version != mb.version {
        return Err(KbError::MetadataMismatch(format!("versions {} and {}", ma.version, mb.version)));
    }
    if ma.library_digest != mb.library_digest || ma.library_size != mb.library_size {
        return Err(KbError::MetadataMismatch("functional-group libraries differ".into()));
    }
    let mut out = a.clone();
    out.meta.reactions += mb.reactions;
    out.meta.built = ma.built.max(mb.built);
    if ma.source != mb.source {
        out.meta.source = match (ma.source.is_empty(), mb.source.is_empty()) {
            (true, _) => mb.source.clone(),
            (_, true) => ma.source.clone(),
            _ => format!("{}+{}", ma.source, mb.source),
        };
    }
    for level in 1..=LEVELS {
        for e in b.entries(level) {
            out.add(level, &e.key, &e.signature, e.count, &e.doc_refs);
        }
    }
    Ok(out)
}

/// Writes the versioned text format (header, then per-level sorted records).
pub fn write_kb(kb: &KnowledgeBase, out: &mut impl Write) -> Result<(), KbError> {
    let m = &kb.meta;
    let mut text = String::new();
    let _ = writeln!(text, "{MAGIC}\t{}", m.version);
    let _ = writeln!(text, "library_digest\t{}", m.library_digest);
    let _ = writeln!(text, "library_size\t{}", m.library_size);
    let _ = writeln!(text, "source\t{}", m.source);
    let _ = writeln!(text, "reactions\t{}", m.reactions);
    let _ = writeln!(text, "built\t{}", m.built);
    let _ = writeln!(text, "doc_ref_cap\t{}", m.doc_ref_cap);
    for level in 1..=LEVELS {
        let entries = kb.entries(level);
        let _ = writeln!(text, "level\t{level}\t{}", entries.len());
        for e in entries {
            let _ = write!(text, "{}\t{}\t{}", e.key, e.count, e.signature.to_hex());
            for r in &e.doc_refs {
                let _ = write!(text, "\t{r}");
            }
            text.push('\n');
        }
    }
    text.push_str("end\n");
    out.write_all(text.as_bytes())?;
    Ok(())
}

pub fn save_kb(kb: &KnowledgeBase, path: &Path) -> Result<(), KbError> {
    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_kb(kb, &mut file)?;
    file.flush()?;
    Ok(())
}

pub fn load_kb(path: &Path) -> Result<KnowledgeBase, KbError> {
    read_kb(std::fs::File::open(path)?)
}

struct Lines<R: BufRead> {
    inner: std::io::Lines<R>,
    number: usize,
}

impl<R: BufRead> Lines<R> {
    fn next_line(&mut self) -> Result<String, KbError> {
        self.number += 1;
        match self.inner.next() {
            Some(line) => Ok(line?),
            None => Err(KbError::Format { line: self.number, msg: "unexpected end of file".into() }),
        }
    }

    fn err(&self, msg: impl Into<String>) -> KbError {
        KbError::Format { line: self.number, msg: msg.into() }
    }

    fn field(&mut self, name: &str) -> Result<String, KbError> {
        let line = self.next_line()?;
        match line.split_once('\t') {
            Some((k, v)) if k == name => Ok(v.to_string()),
            _ => Err(self.err(format!("expected '{name}' header"))),
        }
    }

    fn number_field<T: std::str::FromStr>(&mut self, name: &str) -> Result<T, KbError> {
        let v = self.field(name)?;
        v.parse().map_err(|_| self.err(format!("bad value for '{name}'")))
    }
}

pub fn read_kb(input: impl Read) -> Result<KnowledgeBase, KbError> {
    let mut lines = Lines { inner: BufReader::new(input).lines(), number: 0 };
    let first = lines.next_line()?;
    let version = match first.split_once('\t') {
        Some((MAGIC, v)) => v.parse::<u32>().map_err(|_| lines.err("bad version"))?,
        _ => return Err(lines.err("not a knowledge base file")),
    };
    if version != FORMAT_VERSION {
        return Err(KbError::Version { found: version, expected: FORMAT_VERSION });
    }
    let library_digest = lines.field("library_digest")?;
    let library_size: usize = lines.number_field("library_size")?;
    let source = lines.field("source")?;
    let reactions = lines.number_field("reactions")?;
    let built = lines.number_field("built")?;
    let doc_ref_cap = lines.number_field("doc_ref_cap")?;
    let meta = KbMetadata { version, library_digest, library_size, source, reactions, built, doc_ref_cap };
    let mut levels = vec![HashMap::new(); LEVELS as usize];
    for level in 1..=LEVELS {
        let header = lines.next_line()?;
        let parts: Vec<&str> = header.split('\t').collect();
        let count: usize = match parts.as_slice() {
            ["level", l, n] if *l == level.to_string() => {
                n.parse().map_err(|_| lines.err("bad entry count"))?
            }
            _ => return Err(lines.err(format!("expected level {level} header"))),
        };
        for _ in 0..count {
            let line = lines.next_line()?;
            let mut fields = line.split('\t');
            let (Some(key), Some(n), Some(hex)) = (fields.next(), fields.next(), fields.next()) else {
                return Err(lines.err("entry needs key, count and signature"));
            };
            let count: u64 = n.parse().map_err(|_| lines.err("bad precedent count"))?;
            if count == 0 {
                return Err(lines.err("precedent count must be positive"));
            }
            let signature = FgSignature::from_hex(hex, library_size)
                .ok_or_else(|| lines.err("signature does not match library size"))?;
            let doc_refs: Vec<String> = fields.map(str::to_string).collect();
            let entry = PrecedentEntry { key: key.to_string(), level, signature, count, doc_refs };
            if levels[level as usize - 1].insert(key.to_string(), entry).is_some() {
                return Err(lines.err("duplicate key"));
            }
        }
    }
    if lines.next_line()? != "end" {
        return Err(lines.err("expected 'end'"));
    }
    Ok(KnowledgeBase { meta, levels })
}
