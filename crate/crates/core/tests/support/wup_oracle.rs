//! Brute-force Wu-Palmer reference: enumerates every upward hypernym path
//! and every common hypernym, with no shared code from the library.

use std::collections::{BTreeMap, BTreeSet};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub const ORACLE_ROOT: &str = "*root*";

/// Plain child → parents table with an explicit root above every
/// parentless node. Every upward path of every node is enumerated once at
/// construction.
pub struct OracleGraph {
    parents: BTreeMap<String, Vec<String>>,
    paths: BTreeMap<String, Vec<Vec<String>>>,
}

impl OracleGraph {
    pub fn new(rows: &[(String, Vec<String>)]) -> Self {
        let mut parents = BTreeMap::new();
        for (id, ps) in rows {
            let ps = if ps.is_empty() {
                vec![ORACLE_ROOT.to_string()]
            } else {
                ps.clone()
            };
            parents.insert(id.clone(), ps);
        }
        parents.insert(ORACLE_ROOT.to_string(), Vec::new());
        let mut g = Self {
            parents,
            paths: BTreeMap::new(),
        };
        for id in g.parents.keys().cloned().collect::<Vec<_>>() {
            g.enumerate(&id);
        }
        g
    }

    fn enumerate(&mut self, x: &str) -> Vec<Vec<String>> {
        if let Some(p) = self.paths.get(x) {
            return p.clone();
        }
        let ps = self.parents[x].clone();
        let mut out = Vec::new();
        if ps.is_empty() {
            out.push(vec![x.to_string()]);
        }
        for p in &ps {
            for mut path in self.enumerate(p) {
                path.insert(0, x.to_string());
                out.push(path);
            }
        }
        self.paths.insert(x.to_string(), out.clone());
        out
    }

    pub fn ids(&self) -> Vec<&str> {
        self.parents.keys().map(String::as_str).collect()
    }

    /// Every path from `x` upward to the root, `x` first.
    pub fn paths(&self, x: &str) -> &[Vec<String>] {
        &self.paths[x]
    }

    /// Node count of the longest root-to-`c` path.
    pub fn depth(&self, c: &str) -> usize {
        self.paths(c).iter().map(Vec::len).max().unwrap()
    }

    /// Minimum edge count from `x` up to each ancestor (including `x`).
    pub fn distances(&self, x: &str) -> BTreeMap<String, usize> {
        let mut best = BTreeMap::new();
        for path in self.paths(x) {
            for (edges, node) in path.iter().enumerate() {
                let e = best.entry(node.clone()).or_insert(edges);
                *e = (*e).min(edges);
            }
        }
        best
    }

    pub fn wup(&self, a: &str, b: &str) -> f64 {
        let (da, db) = (self.distances(a), self.distances(b));
        let common: BTreeSet<&String> = da.keys().filter(|k| db.contains_key(*k)).collect();
        common
            .into_iter()
            .map(|c| {
                let depth = self.depth(c) as f64;
                2.0 * depth / ((depth + da[c] as f64) + (depth + db[c] as f64))
            })
            .fold(0.0, f64::max)
    }

    pub fn closure(&self, a: &str, b: &str) -> bool {
        self.distances(a).contains_key(b) || self.distances(b).contains_key(a)
    }
}

/// A random DAG: node `i` takes up to `max_parents` parents among earlier
/// nodes, or none (making it a root) with small probability.
pub fn random_dag(seed: u64, nodes: usize, max_parents: usize) -> Vec<(String, Vec<String>)> {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut rows: Vec<(String, Vec<String>)> = Vec::with_capacity(nodes);
    for i in 0..nodes {
        let id = format!("s{i:02}");
        let mut parents = BTreeSet::new();
        if i > 0 && rng.gen_bool(0.9) {
            let k = rng.gen_range(1..=max_parents.min(i));
            for _ in 0..k {
                parents.insert(format!("s{:02}", rng.gen_range(0..i)));
            }
        }
        rows.push((id, parents.into_iter().collect()));
    }
    rows
}

/// TSV rows for the library parser. Each synset gets a lemma equal to its
/// id, and every third synset also shares the lemma `shared{i % 5}`.
pub fn to_tsv(rows: &[(String, Vec<String>)]) -> String {
    rows.iter()
        .enumerate()
        .map(|(i, (id, ps))| {
            let lemmas = if i % 3 == 0 {
                format!("{id},shared{}", i % 5)
            } else {
                id.clone()
            };
            format!("{id}\t{lemmas}\t{}\n", ps.join(","))
        })
        .collect()
}
