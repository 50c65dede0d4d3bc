//! Noun taxonomy: synsets, lemma index and hypernym edges, with a virtual
//! root above every synset that has no hypernym of its own.

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use thiserror::Error;

/// Id of the synthetic root. Reserved: input files may not use it.
pub const VIRTUAL_ROOT: &str = "*root*";
const ROOT: usize = 0;

#[derive(Debug, Error)]
pub enum TaxonomyError {
    #[error("missing file {0}")]
    MissingFile(PathBuf),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{file}:{line}: malformed line: {reason}")]
    MalformedLine { file: String, line: usize, reason: String },
    #[error("synset {from} names unknown hypernym {to}")]
    DanglingEdge { from: String, to: String },
    #[error("hypernym cycle: {}", .0.join(" -> "))]
    CyclicTaxonomy(Vec<String>),
    #[error("synset {0} defined twice")]
    DuplicateSynset(String),
    #[error("unknown synset {0}")]
    UnknownSynset(String),
}

/// One synset as read from an input file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynsetEntry {
    pub id: String,
    pub lemmas: Vec<String>,
    pub hypernyms: Vec<String>,
}

/// Immutable once built. Internally synsets are dense indices with the
/// virtual root at index 0.
#[derive(Debug, Clone)]
pub struct Taxonomy {
    ids: Vec<String>,
    index_of: HashMap<String, usize>,
    lemmas: Vec<Vec<String>>,
    parents: Vec<Vec<usize>>,
    lemma_index: HashMap<String, Vec<usize>>,
    /// Nodes on the longest path from the root, root = 1.
    depth: Vec<usize>,
}

/// Lowercases and joins internal whitespace with `_`, the lemma spelling
/// used by WordNet.
pub fn normalize_lemma(word: &str) -> String {
    word.split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join("_")
}

impl Taxonomy {
    pub fn from_entries(entries: Vec<SynsetEntry>) -> Result<Self, TaxonomyError> {
        let mut ids = vec![VIRTUAL_ROOT.to_string()];
        let mut index_of = HashMap::with_capacity(entries.len() + 1);
        index_of.insert(VIRTUAL_ROOT.to_string(), ROOT);
        for e in &entries {
            if index_of.insert(e.id.clone(), ids.len()).is_some() {
                return Err(TaxonomyError::DuplicateSynset(e.id.clone()));
            }
            ids.push(e.id.clone());
        }

        let mut lemmas = vec![Vec::new()];
        let mut parents = vec![Vec::new()];
        for e in entries {
            let mut ps = Vec::with_capacity(e.hypernyms.len());
            for h in &e.hypernyms {
                match index_of.get(h) {
                    Some(&p) if p != ROOT => {
                        if !ps.contains(&p) {
                            ps.push(p);
                        }
                    }
                    _ => {
                        return Err(TaxonomyError::DanglingEdge {
                            from: e.id.clone(),
                            to: h.clone(),
                        })
                    }
                }
            }
            if ps.is_empty() {
                ps.push(ROOT);
            }
            parents.push(ps);
            let mut ls: Vec<String> = Vec::with_capacity(e.lemmas.len());
            for l in e.lemmas.iter().map(|l| normalize_lemma(l)) {
                if !l.is_empty() && !ls.contains(&l) {
                    ls.push(l);
                }
            }
            lemmas.push(ls);
        }

        let depth = depths(&ids, &parents)?;

        let mut lemma_index: HashMap<String, Vec<usize>> = HashMap::new();
        for (idx, ls) in lemmas.iter().enumerate() {
            for l in ls {
                lemma_index.entry(l.clone()).or_default().push(idx);
            }
        }

        Ok(Self {
            ids,
            index_of,
            lemmas,
            parents,
            lemma_index,
            depth,
        })
    }

    /// Reorders each lemma's synset list: ids in `order` first (in that order),
    /// remaining synsets after. Ids lacking the lemma are ignored.
    pub(crate) fn set_sense_order(&mut self, lemma: &str, order: &[usize]) {
        if let Some(list) = self.lemma_index.get_mut(lemma) {
            let mut sorted: Vec<usize> = order.iter().copied().filter(|i| list.contains(i)).collect();
            sorted.dedup();
            for &i in list.iter() {
                if !sorted.contains(&i) {
                    sorted.push(i);
                }
            }
            *list = sorted;
        }
    }

    /// Number of synsets, not counting the virtual root.
    pub fn len(&self) -> usize {
        self.ids.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index_of.contains_key(id)
    }

    pub(crate) fn index(&self, id: &str) -> Result<usize, TaxonomyError> {
        self.index_of
            .get(id)
            .copied()
            .ok_or_else(|| TaxonomyError::UnknownSynset(id.to_string()))
    }

    /// Synset ids in input order, without the virtual root.
    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.ids[1..].iter().map(String::as_str)
    }

    pub fn lemmas(&self, id: &str) -> Option<&[String]> {
        self.index_of.get(id).map(|&i| self.lemmas[i].as_slice())
    }

    /// Direct hypernyms; the virtual root for otherwise parentless synsets.
    pub fn hypernyms(&self, id: &str) -> Option<Vec<&str>> {
        self.index_of
            .get(id)
            .map(|&i| self.parents[i].iter().map(|&p| self.ids[p].as_str()).collect())
    }

    pub fn depth(&self, id: &str) -> Option<usize> {
        self.index_of.get(id).map(|&i| self.depth[i])
    }

    pub(crate) fn depth_at(&self, idx: usize) -> usize {
        self.depth[idx]
    }

    /// Synsets of an already normalized lemma, in sense order.
    pub fn synsets_of(&self, lemma: &str) -> impl Iterator<Item = &str> {
        self.lemma_index
            .get(lemma)
            .into_iter()
            .flatten()
            .map(|&i| self.ids[i].as_str())
    }

    pub(crate) fn synset_indices(&self, lemma: &str) -> &[usize] {
        self.lemma_index.get(lemma).map_or(&[], Vec::as_slice)
    }

    pub fn has_lemma(&self, lemma: &str) -> bool {
        self.lemma_index.contains_key(lemma)
    }

    /// Minimum edge count from `idx` to each of its ancestors, itself
    /// included at distance 0.
    pub(crate) fn ancestor_distances(&self, idx: usize) -> HashMap<usize, usize> {
        let mut dist = HashMap::new();
        dist.insert(idx, 0);
        let mut queue = VecDeque::from([idx]);
        while let Some(n) = queue.pop_front() {
            let d = dist[&n];
            for &p in &self.parents[n] {
                if let std::collections::hash_map::Entry::Vacant(v) = dist.entry(p) {
                    v.insert(d + 1);
                    queue.push_back(p);
                }
            }
        }
        dist
    }

    /// TSV rows `id<TAB>lemma,lemma<TAB>hypernym,hypernym`; edges to the
    /// virtual root are left implicit.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for idx in 1..self.ids.len() {
            let hyper: Vec<&str> = self.parents[idx]
                .iter()
                .filter(|&&p| p != ROOT)
                .map(|&p| self.ids[p].as_str())
                .collect();
            let _ = writeln!(
                out,
                "{}\t{}\t{}",
                self.ids[idx],
                self.lemmas[idx].join(","),
                hyper.join(",")
            );
        }
        out
    }
}

/// Longest-path node depths via a topological sweep from the root; any
/// node left unvisited sits on or above a cycle.
fn depths(ids: &[String], parents: &[Vec<usize>]) -> Result<Vec<usize>, TaxonomyError> {
    let n = ids.len();
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut pending: Vec<usize> = vec![0; n];
    for (c, ps) in parents.iter().enumerate() {
        pending[c] = ps.len();
        for &p in ps {
            children[p].push(c);
        }
    }
    let mut depth = vec![0usize; n];
    depth[ROOT] = 1;
    let mut queue: VecDeque<usize> = (0..n).filter(|&i| pending[i] == 0).collect();
    let mut visited = 0;
    while let Some(node) = queue.pop_front() {
        visited += 1;
        for &c in &children[node] {
            depth[c] = depth[c].max(depth[node] + 1);
            pending[c] -= 1;
            if pending[c] == 0 {
                queue.push_back(c);
            }
        }
    }
    if visited == n {
        return Ok(depth);
    }
    // Every unvisited node has an unvisited parent, so walking parents
    // among them must revisit a node.
    let start = (0..n).find(|&i| pending[i] > 0).expect("unvisited node");
    let mut seen: HashMap<usize, usize> = HashMap::new();
    let mut path = Vec::new();
    let mut node = start;
    loop {
        if let Some(&pos) = seen.get(&node) {
            let mut cycle: Vec<String> = path[pos..].iter().map(|&i: &usize| ids[i].clone()).collect();
            cycle.push(ids[node].clone());
            return Err(TaxonomyError::CyclicTaxonomy(cycle));
        }
        seen.insert(node, path.len());
        path.push(node);
        node = *parents[node]
            .iter()
            .find(|&&p| pending[p] > 0)
            .expect("unvisited node has an unvisited parent");
    }
}

fn split_list(field: &str) -> Vec<String> {
    field
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(String::from)
        .collect()
}

/// Parses the TSV mini-taxonomy: `synset_id<TAB>lemmas<TAB>hypernyms`,
/// comma-separated lists, empty third column (or none) for roots. Blank
/// lines and `#` comments are skipped.
pub fn parse_tsv_taxonomy(path: &Path) -> Result<Taxonomy, TaxonomyError> {
    let text = std::fs::read_to_string(path).map_err(|source| {
        if source.kind() == std::io::ErrorKind::NotFound {
            TaxonomyError::MissingFile(path.to_path_buf())
        } else {
            TaxonomyError::Io {
                path: path.to_path_buf(),
                source,
            }
        }
    })?;
    parse_tsv_str(&text, &path.display().to_string())
}

pub fn parse_tsv_str(text: &str, file: &str) -> Result<Taxonomy, TaxonomyError> {
    let mut entries = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        let malformed = |reason: &str| TaxonomyError::MalformedLine {
            file: file.to_string(),
            line: line_no,
            reason: reason.to_string(),
        };
        if !(2..=3).contains(&cols.len()) {
            return Err(malformed("expected 2 or 3 tab-separated columns"));
        }
        let id = cols[0].trim();
        if id.is_empty() {
            return Err(malformed("empty synset id"));
        }
        if id == VIRTUAL_ROOT {
            return Err(malformed("synset id is reserved"));
        }
        entries.push(SynsetEntry {
            id: id.to_string(),
            lemmas: split_list(cols[1]),
            hypernyms: cols.get(2).map(|c| split_list(c)).unwrap_or_default(),
        });
    }
    Taxonomy::from_entries(entries)
}
