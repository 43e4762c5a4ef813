//! Re-encoding a bag against a learned ontology.
//!
//! Activation runs bottom-up through the inverted index: the input's
//! tokens, and then every recognized concept, activate the concepts whose
//! definitions mention them. A concept whose definition is at least
//! `theta` active is scored once against the input (a comparison) and
//! recognized if that much of its closure is present. A greedy cover over
//! the recognized concepts then picks the encoding.

use std::collections::{BTreeSet, HashMap, HashSet};

use super::{NodeRef, Ontology, OntologyError};
use crate::bag::FeatureBag;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParseOptions {
    /// Minimum fraction of a concept's closure present in the input.
    pub theta: f64,
    /// When set, closure tokens missing from the input are left unstated
    /// instead of recorded as deletions, so unfolding predicts them.
    pub open_world: bool,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions {
            theta: 0.5,
            open_world: false,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParseResult {
    pub concepts_used: BTreeSet<String>,
    pub additions: FeatureBag,
    pub deletions: FeatureBag,
    /// Input tokens explained by the concepts used.
    pub covered: FeatureBag,
    pub dl: usize,
    /// Concepts scored during activation.
    pub comparisons: usize,
}

impl ParseResult {
    /// `(closures of concepts used ∪ additions) \ deletions`.
    pub fn reconstruct(&self, o: &Ontology) -> Result<FeatureBag, OntologyError> {
        Ok(unfold(self, o)?.bag.difference(&self.deletions))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Unfolding {
    pub bag: FeatureBag,
    /// Tokens the parse implies but the input did not state.
    pub predicted: FeatureBag,
}

pub fn parse(b: &FeatureBag, o: &Ontology) -> ParseResult {
    parse_with(b, o, &ParseOptions::default())
}

pub fn parse_with(b: &FeatureBag, o: &Ontology, options: &ParseOptions) -> ParseResult {
    let mut comparisons = 0;
    // Active direct-bag elements per concept; a concept is scored once
    // enough of its own bag is active.
    let mut hits: HashMap<usize, usize> = HashMap::new();
    let mut scored: HashSet<usize> = HashSet::new();
    let mut recognized: Vec<usize> = Vec::new();
    let mut frontier: Vec<&str> = b.iter().collect();
    while let Some(token) = frontier.pop() {
        // Concept entries precede instance entries in each posting.
        for node in o.containing(token) {
            let &NodeRef::Concept(i) = node else { break };
            let c = o.concept_at(i);
            let h = hits.entry(i).or_insert(0);
            *h += 1;
            if (*h as f64) < options.theta * c.bag.len() as f64 || !scored.insert(i) {
                continue;
            }
            comparisons += 1;
            let hit = c.closure().intersection_size(b);
            if hit > 0 && hit as f64 >= options.theta * c.closure().len() as f64 {
                recognized.push(i);
                frontier.push(&c.id);
            }
        }
    }

    let mut covered = FeatureBag::new();
    let mut deletions = FeatureBag::new();
    let mut used = BTreeSet::new();
    loop {
        let mut best: Option<(i64, usize, &str, usize)> = None;
        for &i in &recognized {
            let c = o.concept_at(i);
            if used.contains(&c.id) {
                continue;
            }
            let fresh = c
                .closure()
                .iter()
                .filter(|t| b.contains(t) && !covered.contains(t))
                .count() as i64;
            let exceptions = if options.open_world {
                0
            } else {
                c.closure()
                    .iter()
                    .filter(|t| !b.contains(t) && !deletions.contains(t))
                    .count() as i64
            };
            let gain = fresh - 1 - exceptions;
            let better = match best {
                None => true,
                Some((g, size, id, _)) => (gain, c.closure().len(), std::cmp::Reverse(c.id.as_str()))
                    > (g, size, std::cmp::Reverse(id)),
            };
            if better {
                best = Some((gain, c.closure().len(), &c.id, i));
            }
        }
        let Some((gain, _, _, i)) = best else { break };
        if gain <= 0 {
            break;
        }
        let c = o.concept_at(i);
        for t in c.closure().iter() {
            if b.contains(t) {
                covered.insert(t);
            } else if !options.open_world {
                deletions.insert(t);
            }
        }
        used.insert(c.id.clone());
    }

    let additions = b.difference(&covered);
    let dl = used.len() + additions.len() + deletions.len();
    ParseResult {
        concepts_used: used,
        additions,
        deletions,
        covered,
        dl,
        comparisons,
    }
}

/// Expands a parse into tokens and flags those the input did not contain.
pub fn unfold(p: &ParseResult, o: &Ontology) -> Result<Unfolding, OntologyError> {
    let mut bag = p.additions.clone();
    for id in &p.concepts_used {
        let c = o
            .concept(id)
            .ok_or_else(|| OntologyError::UnknownConcept(id.clone()))?;
        bag.extend_from(c.closure());
    }
    let predicted = bag
        .difference(&p.covered)
        .difference(&p.additions)
        .difference(&p.deletions);
    Ok(Unfolding { bag, predicted })
}
