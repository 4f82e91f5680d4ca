use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A set of undirected qubit pairs without self-loops.
///
/// Pairs are stored with the smaller index first, so `(a, b)` and `(b, a)`
/// name the same edge.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(usize, usize)>", into = "Vec<(usize, usize)>")]
pub struct EdgeSet {
    pairs: BTreeSet<(usize, usize)>,
}

fn normalize(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl EdgeSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs<I>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut set = Self::new();
        for (a, b) in pairs {
            set.insert(a, b)?;
        }
        Ok(set)
    }

    /// Inserts an edge; returns whether it was new.
    pub fn insert(&mut self, a: usize, b: usize) -> Result<bool> {
        if a == b {
            return Err(Error::InvalidArgument(format!("self-loop on qubit {a}")));
        }
        Ok(self.pairs.insert(normalize(a, b)))
    }

    pub fn remove(&mut self, a: usize, b: usize) -> bool {
        self.pairs.remove(&normalize(a, b))
    }

    /// Adds the edge if absent, removes it if present (the action of one CZ
    /// on a graph state).
    pub fn toggle(&mut self, a: usize, b: usize) -> Result<()> {
        if !self.insert(a, b)? {
            self.remove(a, b);
        }
        Ok(())
    }

    pub fn contains(&self, a: usize, b: usize) -> bool {
        self.pairs.contains(&normalize(a, b))
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.pairs.iter().copied()
    }

    /// Largest qubit index referenced plus one (0 for the empty set).
    pub fn qubit_bound(&self) -> usize {
        self.pairs.iter().map(|&(_, b)| b + 1).max().unwrap_or(0)
    }

    pub fn neighbors(&self, q: usize) -> Vec<usize> {
        self.pairs
            .iter()
            .filter_map(|&(a, b)| {
                if a == q {
                    Some(b)
                } else if b == q {
                    Some(a)
                } else {
                    None
                }
            })
            .collect()
    }

    /// Adjacency lists for qubits `0..n`.
    pub fn adjacency(&self, n: usize) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); n];
        for (a, b) in self.iter() {
            if b < n {
                adj[a].push(b);
                adj[b].push(a);
            }
        }
        adj
    }

    pub fn union(&self, other: &EdgeSet) -> EdgeSet {
        EdgeSet {
            pairs: self.pairs.union(&other.pairs).copied().collect(),
        }
    }

    pub fn is_disjoint(&self, other: &EdgeSet) -> bool {
        self.pairs.is_disjoint(&other.pairs)
    }

    /// True when no qubit appears in two edges.
    pub fn is_matching(&self) -> bool {
        let mut seen = BTreeSet::new();
        self.iter().all(|(a, b)| seen.insert(a) && seen.insert(b))
    }

    pub fn check_bound(&self, n: usize) -> Result<()> {
        match self.iter().find(|&(_, b)| b >= n) {
            Some((a, b)) => Err(Error::InvalidArgument(format!(
                "edge ({a}, {b}) references a qubit outside 0..{n}"
            ))),
            None => Ok(()),
        }
    }
}

impl TryFrom<Vec<(usize, usize)>> for EdgeSet {
    type Error = Error;

    fn try_from(pairs: Vec<(usize, usize)>) -> Result<Self> {
        EdgeSet::from_pairs(pairs)
    }
}

impl From<EdgeSet> for Vec<(usize, usize)> {
    fn from(set: EdgeSet) -> Self {
        set.pairs.into_iter().collect()
    }
}

impl FromIterator<(usize, usize)> for EdgeSet {
    /// Collects pairs, silently dropping self-loops.
    fn from_iter<I: IntoIterator<Item = (usize, usize)>>(iter: I) -> Self {
        EdgeSet {
            pairs: iter
                .into_iter()
                .filter(|(a, b)| a != b)
                .map(|(a, b)| normalize(a, b))
                .collect(),
        }
    }
}
