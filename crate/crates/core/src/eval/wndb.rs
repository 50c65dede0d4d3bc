//! Reader for the Princeton WordNet database files `data.noun` and
//! `index.noun`.
//!
//! A `data.noun` line is
//!
//! ```text
//! offset lex_filenum ss_type w_cnt(hex) {word lex_id(hex)}×w_cnt p_cnt
//!     {pointer_symbol offset pos source/target(hex)}×p_cnt | gloss
//! ```
//!
//! and an `index.noun` line is
//!
//! ```text
//! lemma pos synset_cnt p_cnt {ptr_symbol}×p_cnt sense_cnt tagsense_cnt {offset}×synset_cnt
//! ```
//!
//! Lines starting with a space are the license header. Only hypernym
//! pointers (`@`, `@i`) that target noun synsets are kept.

use std::collections::HashMap;
use std::path::Path;

use super::taxonomy::{SynsetEntry, Taxonomy, TaxonomyError};

const HYPERNYM: &str = "@";
const INSTANCE_HYPERNYM: &str = "@i";

fn read(dir: &Path, name: &str) -> Result<String, TaxonomyError> {
    let path = dir.join(name);
    match std::fs::read(&path) {
        // The files are ASCII in practice; be lenient about stray bytes.
        Ok(bytes) => Ok(String::from_utf8_lossy(&bytes).into_owned()),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Err(TaxonomyError::MissingFile(path)),
        Err(source) => Err(TaxonomyError::Io { path, source }),
    }
}

fn is_offset(tok: &str) -> bool {
    tok.len() == 8 && tok.bytes().all(|b| b.is_ascii_digit())
}

struct Fields<'a> {
    tokens: std::str::SplitWhitespace<'a>,
    file: &'static str,
    line: usize,
}

impl<'a> Fields<'a> {
    fn err(&self, reason: impl Into<String>) -> TaxonomyError {
        TaxonomyError::MalformedLine {
            file: self.file.to_string(),
            line: self.line,
            reason: reason.into(),
        }
    }

    fn next(&mut self, what: &str) -> Result<&'a str, TaxonomyError> {
        self.tokens
            .next()
            .ok_or_else(|| self.err(format!("line ends before {what}")))
    }

    fn offset(&mut self, what: &str) -> Result<&'a str, TaxonomyError> {
        let tok = self.next(what)?;
        if is_offset(tok) {
            Ok(tok)
        } else {
            Err(self.err(format!("{what} {tok:?} is not an 8-digit offset")))
        }
    }

    fn decimal(&mut self, what: &str) -> Result<usize, TaxonomyError> {
        let tok = self.next(what)?;
        tok.parse()
            .map_err(|_| self.err(format!("{what} {tok:?} is not a decimal number")))
    }

    fn hex(&mut self, what: &str) -> Result<usize, TaxonomyError> {
        let tok = self.next(what)?;
        usize::from_str_radix(tok, 16).map_err(|_| self.err(format!("{what} {tok:?} is not hexadecimal")))
    }
}

fn parse_data_line(line: &str, line_no: usize) -> Result<SynsetEntry, TaxonomyError> {
    let body = line.split_once(" | ").map_or(line, |(b, _)| b);
    let mut f = Fields {
        tokens: body.split_whitespace(),
        file: "data.noun",
        line: line_no,
    };
    let offset = f.offset("synset_offset")?;
    f.decimal("lex_filenum")?;
    let ss_type = f.next("ss_type")?;
    if ss_type != "n" {
        return Err(f.err(format!("ss_type {ss_type:?} is not a noun")));
    }
    let w_cnt = f.hex("w_cnt")?;
    if w_cnt == 0 {
        return Err(f.err("w_cnt is zero"));
    }
    let mut lemmas = Vec::with_capacity(w_cnt);
    for _ in 0..w_cnt {
        lemmas.push(f.next("word")?.to_lowercase());
        f.hex("lex_id")?;
    }
    let p_cnt = f.decimal("p_cnt")?;
    let mut hypernyms = Vec::new();
    for _ in 0..p_cnt {
        let symbol = f.next("pointer_symbol")?;
        let target = f.offset("pointer offset")?;
        let pos = f.next("pointer pos")?;
        if !matches!(pos, "n" | "v" | "a" | "s" | "r") {
            return Err(f.err(format!("pointer pos {pos:?} is not a part of speech")));
        }
        let st = f.next("source/target")?;
        if st.len() != 4 || u16::from_str_radix(st, 16).is_err() {
            return Err(f.err(format!("source/target {st:?} is not 4 hex digits")));
        }
        if (symbol == HYPERNYM || symbol == INSTANCE_HYPERNYM) && pos == "n" {
            hypernyms.push(target.to_string());
        }
    }
    Ok(SynsetEntry {
        id: offset.to_string(),
        lemmas,
        hypernyms,
    })
}

struct IndexEntry {
    lemma: String,
    offsets: Vec<String>,
}

fn parse_index_line(line: &str, line_no: usize) -> Result<IndexEntry, TaxonomyError> {
    let mut f = Fields {
        tokens: line.split_whitespace(),
        file: "index.noun",
        line: line_no,
    };
    let lemma = f.next("lemma")?.to_lowercase();
    let pos = f.next("pos")?;
    if pos != "n" {
        return Err(f.err(format!("pos {pos:?} is not a noun")));
    }
    let synset_cnt = f.decimal("synset_cnt")?;
    let p_cnt = f.decimal("p_cnt")?;
    for _ in 0..p_cnt {
        f.next("ptr_symbol")?;
    }
    f.decimal("sense_cnt")?;
    f.decimal("tagsense_cnt")?;
    let mut offsets = Vec::with_capacity(synset_cnt);
    for _ in 0..synset_cnt {
        offsets.push(f.offset("synset_offset")?.to_string());
    }
    if f.tokens.next().is_some() {
        return Err(f.err("trailing fields after synset offsets"));
    }
    Ok(IndexEntry { lemma, offsets })
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.starts_with(' ') && !l.trim().is_empty())
}

/// Parses `data.noun` and `index.noun` from `db_dir`. Synset ids are the
/// 8-digit offsets; each lemma's synsets follow `index.noun` sense order.
pub fn parse_wordnet_nouns(db_dir: &Path) -> Result<Taxonomy, TaxonomyError> {
    let data = read(db_dir, "data.noun")?;
    let index = read(db_dir, "index.noun")?;

    let entries = content_lines(&data)
        .map(|(n, l)| parse_data_line(l, n))
        .collect::<Result<Vec<_>, _>>()?;
    let mut taxonomy = Taxonomy::from_entries(entries)?;

    let mut orders: HashMap<String, Vec<usize>> = HashMap::new();
    for (n, l) in content_lines(&index) {
        let entry = parse_index_line(l, n)?;
        let mut order = Vec::with_capacity(entry.offsets.len());
        for off in &entry.offsets {
            let idx = taxonomy.index(off).map_err(|_| TaxonomyError::MalformedLine {
                file: "index.noun".into(),
                line: n,
                reason: format!("offset {off} is not in data.noun"),
            })?;
            order.push(idx);
        }
        orders.insert(entry.lemma, order);
    }
    for (lemma, order) in orders {
        taxonomy.set_sense_order(&lemma, &order);
    }
    Ok(taxonomy)
}
