//! Random connected windows over a story.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use thiserror::Error;

use crate::corpus::{Statement, Story};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WindowError {
    #[error("story `{0}` has no statements")]
    EmptyStory(String),
    #[error("window size must be at least 1")]
    ZeroWindow,
}

/// Statements are adjacent when they mention a common symbol; a label
/// counts as a symbol of its own `sameAs` statement.
#[derive(Debug, Clone)]
pub struct ConnectivityGraph {
    statements: Vec<Statement>,
    adjacency: Vec<Vec<usize>>,
}

impl ConnectivityGraph {
    pub fn new(story: &Story) -> Self {
        let statements: Vec<Statement> = story.statements.iter().cloned().collect();
        let mut by_symbol: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
        for (i, st) in statements.iter().enumerate() {
            let syms: BTreeSet<&str> = st.symbols().collect();
            for s in syms {
                by_symbol.entry(s).or_default().push(i);
            }
        }
        let mut adjacency: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); statements.len()];
        for users in by_symbol.values() {
            for &a in users {
                for &b in users {
                    if a != b {
                        adjacency[a].insert(b);
                    }
                }
            }
        }
        let adjacency = adjacency.into_iter().map(|s| s.into_iter().collect()).collect();
        ConnectivityGraph {
            statements,
            adjacency,
        }
    }

    pub fn len(&self) -> usize {
        self.statements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.statements.is_empty()
    }

    pub fn statements(&self) -> &[Statement] {
        &self.statements
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    /// Size of the connected component containing statement `i`.
    pub fn component_size(&self, i: usize) -> usize {
        let mut seen = vec![false; self.len()];
        let mut stack = vec![i];
        seen[i] = true;
        let mut n = 0;
        while let Some(v) = stack.pop() {
            n += 1;
            for &w in &self.adjacency[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        n
    }

    pub fn is_connected_subset(&self, members: &[usize]) -> bool {
        let Some(&first) = members.first() else {
            return true;
        };
        let inside: BTreeSet<usize> = members.iter().copied().collect();
        let mut seen = BTreeSet::from([first]);
        let mut stack = vec![first];
        while let Some(v) = stack.pop() {
            for &w in &self.adjacency[v] {
                if inside.contains(&w) && seen.insert(w) {
                    stack.push(w);
                }
            }
        }
        seen.len() == inside.len()
    }

    /// Grows a window from a uniform random seed statement by repeatedly
    /// adding a uniform random frontier statement. Returns statement indices
    /// in insertion order.
    pub fn sample_indices<R: Rng + ?Sized>(&self, window_size: usize, rng: &mut R) -> Vec<usize> {
        let n = self.len();
        let start = rng.gen_range(0..n);
        let mut in_window = vec![false; n];
        let mut in_frontier = vec![false; n];
        let mut frontier: Vec<usize> = Vec::new();
        let mut chosen = Vec::with_capacity(window_size.min(n));
        let mut add = |v: usize, chosen: &mut Vec<usize>, frontier: &mut Vec<usize>| {
            in_window[v] = true;
            chosen.push(v);
            for &w in &self.adjacency[v] {
                if !in_window[w] && !in_frontier[w] {
                    in_frontier[w] = true;
                    frontier.push(w);
                }
            }
        };
        add(start, &mut chosen, &mut frontier);
        while chosen.len() < window_size && !frontier.is_empty() {
            let k = rng.gen_range(0..frontier.len());
            let v = frontier.swap_remove(k);
            add(v, &mut chosen, &mut frontier);
        }
        chosen
    }
}

/// A connected window of at most `window_size` statements.
pub fn grab_connected_statements<R: Rng + ?Sized>(
    story: &Story,
    window_size: usize,
    rng: &mut R,
) -> Result<Vec<Statement>, WindowError> {
    let graph = ConnectivityGraph::new(story);
    grab_from_graph(&graph, &story.name, window_size, rng)
}

/// Same as [`grab_connected_statements`] with a prebuilt graph, for
/// drawing many windows from one story.
pub fn grab_from_graph<R: Rng + ?Sized>(
    graph: &ConnectivityGraph,
    story_name: &str,
    window_size: usize,
    rng: &mut R,
) -> Result<Vec<Statement>, WindowError> {
    if graph.is_empty() {
        return Err(WindowError::EmptyStory(story_name.to_string()));
    }
    if window_size == 0 {
        return Err(WindowError::ZeroWindow);
    }
    Ok(graph
        .sample_indices(window_size, rng)
        .into_iter()
        .map(|i| graph.statements[i].clone())
        .collect())
}
