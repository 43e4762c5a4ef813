//! Window -> feature bag.
//!
//! Each statement is split into roles (`want1`, `want2`) and fillers. A
//! `sameAs` label used as an argument is expanded one level with the dot
//! operator: `decide2` filled by `f36` plus `sameAs f36 (sour G)` gives
//! `decide2.sour1` filled by `G`. Every pair of role paths that share a
//! filler becomes one atom, rendered `left=right` in canonical order.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::bag::FeatureBag;
use crate::corpus::{Proposition, Statement};

mod lettering;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TransformError {
    #[error("label cycle through `{0}`")]
    LabelCycle(String),
    #[error("label `{0}` defined twice in one window")]
    DuplicateLabel(String),
}

/// One step of a role path: argument `arg` (1-based) of a relation
/// instance. `letter` distinguishes repeated relations in a window:
/// 0 is unlettered, 1 renders as `B`, 2 as `C`, ...
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Segment {
    pub relation: String,
    pub letter: u32,
    pub arg: usize,
}

impl Segment {
    pub fn new(relation: impl Into<String>, arg: usize) -> Self {
        Segment {
            relation: relation.into(),
            letter: 0,
            arg,
        }
    }

    pub fn lettered(relation: impl Into<String>, letter: u32, arg: usize) -> Self {
        Segment {
            relation: relation.into(),
            letter,
            arg,
        }
    }

    /// Relation name with its lettering suffix, e.g. `wantB`.
    pub fn instance_name(&self) -> String {
        let mut s = self.relation.clone();
        push_letter(&mut s, self.letter);
        s
    }
}

fn push_letter(out: &mut String, letter: u32) {
    if letter == 0 {
        return;
    }
    // B..Z, then BA, BB, ... for very crowded windows
    let mut digits = Vec::new();
    let mut n = letter;
    while n > 0 {
        digits.push((b'A' + (n % 26) as u8) as char);
        n /= 26;
    }
    out.extend(digits.iter().rev());
}

impl fmt::Display for Segment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.instance_name(), self.arg)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RolePath(pub Vec<Segment>);

impl RolePath {
    pub fn single(seg: Segment) -> Self {
        RolePath(vec![seg])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn extended(&self, seg: Segment) -> Self {
        let mut segs = self.0.clone();
        segs.push(seg);
        RolePath(segs)
    }
}

impl fmt::Display for RolePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, seg) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            write!(f, "{seg}")?;
        }
        Ok(())
    }
}

/// `Less` means `a` is written on the left of a feature.
///
/// Relation-instance names compare in reverse alphabetical order, segment
/// by segment; a path that is a prefix of the other comes first; then
/// argument indices ascend.
pub fn canonical_compare(a: &RolePath, b: &RolePath) -> Ordering {
    for (sa, sb) in a.0.iter().zip(&b.0) {
        let by_name = sb
            .instance_name()
            .cmp(&sa.instance_name())
            .then_with(|| sb.relation.cmp(&sa.relation))
            .then_with(|| sa.letter.cmp(&sb.letter));
        if by_name != Ordering::Equal {
            return by_name;
        }
    }
    a.len()
        .cmp(&b.len())
        .then_with(|| {
            let ia = a.0.iter().map(|s| s.arg);
            let ib = b.0.iter().map(|s| s.arg);
            ia.cmp(ib)
        })
}

/// An equality between two role paths that share a filler.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Feature {
    pub left: RolePath,
    pub right: RolePath,
}

impl Feature {
    /// Orders the pair canonically; `None` if the paths are equal.
    pub fn new(a: RolePath, b: RolePath) -> Option<Self> {
        match canonical_compare(&a, &b) {
            Ordering::Less => Some(Feature { left: a, right: b }),
            Ordering::Greater => Some(Feature { left: b, right: a }),
            Ordering::Equal => None,
        }
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}={}", self.left, self.right)
    }
}

pub type RoleFillers = BTreeMap<String, BTreeSet<RolePath>>;

/// A window split into its plain statements and its label definitions.
struct WindowParts<'a> {
    plain: Vec<&'a Proposition>,
    labels: BTreeMap<&'a str, &'a Proposition>,
}

impl<'a> WindowParts<'a> {
    fn new(window: &'a [Statement]) -> Result<Self, TransformError> {
        let unique: BTreeSet<&Statement> = window.iter().collect();
        let mut plain = Vec::new();
        let mut labels: BTreeMap<&str, &Proposition> = BTreeMap::new();
        for st in unique {
            match st {
                Statement::Plain(p) => plain.push(p),
                Statement::Labeled { label, inner } => {
                    if labels.insert(label, inner).is_some() {
                        return Err(TransformError::DuplicateLabel(label.clone()));
                    }
                }
            }
        }
        let parts = WindowParts { plain, labels };
        parts.check_acyclic()?;
        Ok(parts)
    }

    fn check_acyclic(&self) -> Result<(), TransformError> {
        // 0 = unvisited, 1 = on stack, 2 = done
        let mut state: BTreeMap<&str, u8> = BTreeMap::new();
        fn visit<'a>(
            label: &'a str,
            labels: &BTreeMap<&'a str, &'a Proposition>,
            state: &mut BTreeMap<&'a str, u8>,
        ) -> Result<(), TransformError> {
            match state.get(label) {
                Some(1) => return Err(TransformError::LabelCycle(label.to_string())),
                Some(2) => return Ok(()),
                _ => {}
            }
            state.insert(label, 1);
            for arg in &labels[label].args {
                if let Some((&next, _)) = labels.get_key_value(arg.as_str()) {
                    visit(next, labels, state)?;
                }
            }
            state.insert(label, 2);
            Ok(())
        }
        for &label in self.labels.keys() {
            visit(label, &self.labels, &mut state)?;
        }
        Ok(())
    }

    fn fillers(&self, letters: &[u32]) -> RoleFillers {
        let mut out: RoleFillers = BTreeMap::new();
        for (p, &letter) in self.plain.iter().zip(letters) {
            for (j, arg) in p.args.iter().enumerate() {
                out.entry(arg.clone())
                    .or_default()
                    .insert(RolePath::single(Segment::lettered(&p.relation, letter, j + 1)));
            }
        }
        let mut expanded: Vec<(String, RolePath)> = Vec::new();
        for (filler, paths) in &out {
            let Some(inner) = self.labels.get(filler.as_str()) else {
                continue;
            };
            for path in paths.iter().filter(|p| p.len() == 1) {
                for (j, arg) in inner.args.iter().enumerate() {
                    expanded.push((arg.clone(), path.extended(Segment::new(&inner.relation, j + 1))));
                }
            }
        }
        for (filler, path) in expanded {
            out.entry(filler).or_default().insert(path);
        }
        out
    }
}

fn features_of(fillers: &RoleFillers) -> BTreeSet<String> {
    let mut bag = BTreeSet::new();
    for paths in fillers.values() {
        if paths.len() < 2 {
            continue;
        }
        let mut ordered: Vec<&RolePath> = paths.iter().collect();
        ordered.sort_by(|a, b| canonical_compare(a, b));
        for (i, left) in ordered.iter().enumerate() {
            for right in &ordered[i + 1..] {
                let (l, r) = (left.to_string(), right.to_string());
                if l != r {
                    bag.insert(format!("{l}={r}"));
                }
            }
        }
    }
    bag
}

fn analyze(window: &[Statement]) -> Result<(WindowParts<'_>, Vec<u32>), TransformError> {
    let parts = WindowParts::new(window)?;
    let letters = lettering::canonical_letters(&parts.plain, &parts.labels, |letters| {
        features_of(&parts.fillers(letters))
    });
    Ok((parts, letters))
}

/// Role paths of every filler in the window, including labels as fillers.
pub fn role_fillers(window: &[Statement]) -> Result<RoleFillers, TransformError> {
    let (parts, letters) = analyze(window)?;
    Ok(parts.fillers(&letters))
}

/// The feature bag of a small relational structure.
pub fn transform(window: &[Statement]) -> Result<FeatureBag, TransformError> {
    let (parts, letters) = analyze(window)?;
    Ok(features_of(&parts.fillers(&letters)).into())
}
