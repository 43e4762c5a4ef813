//! Concept DAGs over feature bags.
//!
//! An [`Ontology`] holds concepts (bags of base tokens and references to
//! other concepts) and instances (bags rewritten in terms of concepts). A
//! token that equals a concept id is a reference; anything else is a base
//! token. The *closure* of a concept is the set of base tokens reachable
//! through its references.
//!
//! [`chunk`] learns an ontology from raw bags; [`parse`] re-encodes a new
//! bag against one; [`unfold`] expands a parse back into tokens.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use thiserror::Error;

use crate::bag::FeatureBag;

mod chunk;
mod parse;

pub use chunk::{chunk, chunk_instances, ChunkConfig, ChunkTrace};
pub use parse::{parse, parse_with, unfold, ParseOptions, ParseResult, Unfolding};

const FORMAT_TAG: &str = "# spontol ontology v1";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OntologyError {
    #[error("concept `{0}` defined twice")]
    DuplicateConcept(String),
    #[error("concept reference cycle through `{0}`")]
    Cycle(String),
    #[error("concept `{0}` expands to fewer than two base tokens")]
    TrivialConcept(String),
    #[error("unknown concept `{0}`")]
    UnknownConcept(String),
    #[error("ontology text line {line}: {message}")]
    Format { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Concept {
    pub id: String,
    pub bag: FeatureBag,
    closure: FeatureBag,
}

impl Concept {
    pub fn closure(&self) -> &FeatureBag {
        &self.closure
    }
}

/// Where a token occurs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NodeRef {
    Concept(usize),
    Instance(usize),
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Ontology {
    concepts: Vec<Concept>,
    by_id: HashMap<String, usize>,
    instances: Vec<(String, FeatureBag)>,
    index: HashMap<String, Vec<NodeRef>>,
}

impl Ontology {
    /// Builds an ontology from concept definitions and rewritten instance
    /// bags, checking that references form a DAG.
    pub fn new(
        concepts: Vec<(String, FeatureBag)>,
        instances: Vec<(String, FeatureBag)>,
    ) -> Result<Self, OntologyError> {
        let mut defs: BTreeMap<String, FeatureBag> = BTreeMap::new();
        for (id, bag) in concepts {
            if defs.contains_key(&id) {
                return Err(OntologyError::DuplicateConcept(id));
            }
            defs.insert(id, bag);
        }

        let mut closures: HashMap<String, FeatureBag> = HashMap::new();
        for id in defs.keys() {
            closure_of(id, &defs, &mut closures, &mut Vec::new())?;
        }

        let concepts: Vec<Concept> = defs
            .into_iter()
            .map(|(id, bag)| {
                let closure = closures.remove(&id).expect("closure computed");
                Concept { id, bag, closure }
            })
            .collect();
        if let Some(c) = concepts.iter().find(|c| c.closure.len() < 2) {
            return Err(OntologyError::TrivialConcept(c.id.clone()));
        }
        let by_id = concepts
            .iter()
            .enumerate()
            .map(|(i, c)| (c.id.clone(), i))
            .collect();

        let mut index: HashMap<String, Vec<NodeRef>> = HashMap::new();
        for (i, c) in concepts.iter().enumerate() {
            for t in c.bag.iter() {
                index.entry(t.to_string()).or_default().push(NodeRef::Concept(i));
            }
        }
        for (i, (_, bag)) in instances.iter().enumerate() {
            for t in bag.iter() {
                index.entry(t.to_string()).or_default().push(NodeRef::Instance(i));
            }
        }
        Ok(Ontology {
            concepts,
            by_id,
            instances,
            index,
        })
    }

    pub fn concepts(&self) -> &[Concept] {
        &self.concepts
    }

    pub fn concept(&self, id: &str) -> Option<&Concept> {
        self.by_id.get(id).map(|&i| &self.concepts[i])
    }

    pub(crate) fn concept_at(&self, i: usize) -> &Concept {
        &self.concepts[i]
    }

    pub fn is_concept(&self, token: &str) -> bool {
        self.by_id.contains_key(token)
    }

    pub fn instances(&self) -> &[(String, FeatureBag)] {
        &self.instances
    }

    /// Nodes whose (rewritten) bag contains `token`, concepts first.
    pub fn containing(&self, token: &str) -> &[NodeRef] {
        self.index.get(token).map_or(&[], Vec::as_slice)
    }

    /// Every concept reachable from `id` through references, excluding `id`.
    pub fn descendants(&self, id: &str) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        let mut stack = vec![id];
        while let Some(cur) = stack.pop() {
            let Some(c) = self.concept(cur) else { continue };
            for t in c.bag.iter() {
                if self.is_concept(t) && out.insert(t.to_string()) {
                    stack.push(t);
                }
            }
        }
        out
    }

    /// Expands concept references in `bag` to base tokens.
    pub fn expand(&self, bag: &FeatureBag) -> FeatureBag {
        let mut out = FeatureBag::new();
        for t in bag.iter() {
            match self.concept(t) {
                Some(c) => out.extend_from(&c.closure),
                None => {
                    out.insert(t);
                }
            }
        }
        out
    }

    /// Total element count over concept definitions and instance bags.
    pub fn description_length(&self) -> usize {
        self.concepts.iter().map(|c| c.bag.len()).sum::<usize>()
            + self.instances.iter().map(|(_, b)| b.len()).sum::<usize>()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from(FORMAT_TAG);
        out.push('\n');
        let mut record = |kind: &str, id: &str, bag: &FeatureBag| {
            out.push_str(kind);
            out.push(' ');
            out.push_str(id);
            for t in bag.iter() {
                out.push(' ');
                out.push_str(t);
            }
            out.push('\n');
        };
        for c in &self.concepts {
            record("concept", &c.id, &c.bag);
        }
        for (id, bag) in &self.instances {
            record("instance", id, bag);
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, OntologyError> {
        let mut concepts = Vec::new();
        let mut instances = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut tokens = line.split_whitespace();
            let kind = tokens.next().expect("non-empty");
            let id = tokens.next().ok_or_else(|| OntologyError::Format {
                line: i + 1,
                message: "record without id".into(),
            })?;
            let bag: FeatureBag = tokens.collect();
            match kind {
                "concept" => concepts.push((id.to_string(), bag)),
                "instance" => instances.push((id.to_string(), bag)),
                other => {
                    return Err(OntologyError::Format {
                        line: i + 1,
                        message: format!("unknown record kind `{other}`"),
                    })
                }
            }
        }
        Ontology::new(concepts, instances)
    }

    /// Graphviz rendering: concepts as filled ovals, instances as boxes,
    /// one edge per concept reference. Base tokens are omitted.
    pub fn to_dot(&self, include_instances: bool) -> String {
        let q = |s: &str| format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""));
        let mut out = String::from("digraph ontology {\n  rankdir=LR;\n");
        for c in &self.concepts {
            let _ = writeln!(
                out,
                "  {} [shape=ellipse, style=filled, fillcolor=black, fontcolor=white, label=\"{}\"];",
                q(&c.id),
                c.closure.len()
            );
        }
        if include_instances {
            for (id, _) in &self.instances {
                let _ = writeln!(out, "  {} [shape=box];", q(id));
            }
        }
        for c in &self.concepts {
            for t in c.bag.iter().filter(|t| self.is_concept(t)) {
                let _ = writeln!(out, "  {} -> {};", q(&c.id), q(t));
            }
        }
        if include_instances {
            for (id, bag) in &self.instances {
                for t in bag.iter().filter(|t| self.is_concept(t)) {
                    let _ = writeln!(out, "  {} -> {};", q(id), q(t));
                }
            }
        }
        out.push_str("}\n");
        out
    }
}

fn closure_of(
    id: &str,
    defs: &BTreeMap<String, FeatureBag>,
    memo: &mut HashMap<String, FeatureBag>,
    stack: &mut Vec<String>,
) -> Result<FeatureBag, OntologyError> {
    if let Some(c) = memo.get(id) {
        return Ok(c.clone());
    }
    if stack.iter().any(|s| s == id) {
        return Err(OntologyError::Cycle(id.to_string()));
    }
    stack.push(id.to_string());
    let mut out = FeatureBag::new();
    for t in defs[id].iter() {
        if defs.contains_key(t) {
            out.extend_from(&closure_of(t, defs, memo, stack)?);
        } else {
            out.insert(t);
        }
    }
    stack.pop();
    memo.insert(id.to_string(), out.clone());
    Ok(out)
}
