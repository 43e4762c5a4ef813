//! Predicate-form corpora: data model, text format, validation.
//!
//! A corpus is a list of stories; a story is a *set* of statements. Two
//! statement shapes exist:
//!
//! ```text
//! story sour_grapes
//! want Of3Fox Of3Grapes
//! sameAs f36 (sour Of3Grapes)
//! false f36
//! ```
//!
//! Every token other than `sameAs` (and the `story` header keyword) is an
//! opaque symbol.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

pub mod synthetic;

pub use synthetic::{generate_synthetic, GroundTruth, PlantedSchema, SyntheticParams};

const HEADER: &str = "story";
const SAME_AS: &str = "sameAs";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CorpusError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("duplicate story name `{0}`")]
    DuplicateStory(String),
    #[error("line {line}: label `{label}` defined twice in story `{story}`")]
    DuplicateLabel {
        line: usize,
        story: String,
        label: String,
    },
    #[error("relation `{relation}` used with arities {arities:?}")]
    ArityConflict {
        relation: String,
        arities: Vec<usize>,
    },
    #[error("infeasible generator parameters: {0}")]
    Infeasible(String),
    #[error("ground truth: {0}")]
    GroundTruth(String),
}

/// A relation applied to its arguments, e.g. `decide Of3Fox f36`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Proposition {
    pub relation: String,
    pub args: Vec<String>,
}

impl Proposition {
    pub fn new<R: Into<String>, A: Into<String>>(
        relation: R,
        args: impl IntoIterator<Item = A>,
    ) -> Self {
        Proposition {
            relation: relation.into(),
            args: args.into_iter().map(Into::into).collect(),
        }
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }
}

impl fmt::Display for Proposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.relation)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Statement {
    Plain(Proposition),
    /// `sameAs <label> (<inner>)`: names a statement so other statements
    /// can take it as an argument.
    Labeled { label: String, inner: Proposition },
}

impl Statement {
    pub fn plain<R: Into<String>, A: Into<String>>(
        relation: R,
        args: impl IntoIterator<Item = A>,
    ) -> Self {
        Statement::Plain(Proposition::new(relation, args))
    }

    pub fn labeled<L: Into<String>, R: Into<String>, A: Into<String>>(
        label: L,
        relation: R,
        args: impl IntoIterator<Item = A>,
    ) -> Self {
        Statement::Labeled {
            label: label.into(),
            inner: Proposition::new(relation, args),
        }
    }

    pub fn proposition(&self) -> &Proposition {
        match self {
            Statement::Plain(p) => p,
            Statement::Labeled { inner, .. } => inner,
        }
    }

    pub fn label(&self) -> Option<&str> {
        match self {
            Statement::Plain(_) => None,
            Statement::Labeled { label, .. } => Some(label),
        }
    }

    /// Every symbol the statement mentions: its label (if any) and its
    /// arguments. Two statements are connected iff these sets intersect.
    pub fn symbols(&self) -> impl Iterator<Item = &str> {
        self.label()
            .into_iter()
            .chain(self.proposition().args.iter().map(String::as_str))
    }
}

impl fmt::Display for Statement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Statement::Plain(p) => write!(f, "{p}"),
            Statement::Labeled { label, inner } => write!(f, "{SAME_AS} {label} ({inner})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Story {
    pub name: String,
    pub statements: BTreeSet<Statement>,
}

impl Story {
    pub fn new(name: impl Into<String>) -> Self {
        Story {
            name: name.into(),
            statements: BTreeSet::new(),
        }
    }

    pub fn with_statements(
        name: impl Into<String>,
        statements: impl IntoIterator<Item = Statement>,
    ) -> Self {
        Story {
            name: name.into(),
            statements: statements.into_iter().collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.statements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.statements.is_empty()
    }

    pub fn labeled_count(&self) -> usize {
        self.statements.iter().filter(|s| s.label().is_some()).count()
    }

    /// Statements in serialization order (lexicographic by rendered line).
    pub fn sorted_lines(&self) -> Vec<String> {
        let mut lines: Vec<String> = self.statements.iter().map(ToString::to_string).collect();
        lines.sort();
        lines
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Corpus {
    pub stories: Vec<Story>,
    /// First arity observed for each relation symbol.
    pub relation_arities: BTreeMap<String, usize>,
}

impl Corpus {
    pub fn from_stories(stories: Vec<Story>) -> Result<Self, CorpusError> {
        let mut seen = BTreeSet::new();
        for s in &stories {
            if !seen.insert(s.name.clone()) {
                return Err(CorpusError::DuplicateStory(s.name.clone()));
            }
        }
        let mut corpus = Corpus {
            stories,
            relation_arities: BTreeMap::new(),
        };
        corpus.recompute_arities();
        Ok(corpus)
    }

    pub fn story(&self, name: &str) -> Option<&Story> {
        self.stories.iter().find(|s| s.name == name)
    }

    pub fn len(&self) -> usize {
        self.stories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stories.is_empty()
    }

    pub fn mean_statements(&self) -> f64 {
        if self.stories.is_empty() {
            return 0.0;
        }
        self.stories.iter().map(Story::len).sum::<usize>() as f64 / self.stories.len() as f64
    }

    fn recompute_arities(&mut self) {
        self.relation_arities.clear();
        for story in &self.stories {
            for st in &story.statements {
                let p = st.proposition();
                self.relation_arities
                    .entry(p.relation.clone())
                    .or_insert(p.arity());
            }
        }
    }

    /// Sub-corpus holding the named stories, in the given order.
    pub fn subset<'a>(&self, names: impl IntoIterator<Item = &'a str>) -> Corpus {
        let stories = names
            .into_iter()
            .filter_map(|n| self.story(n).cloned())
            .collect();
        let mut c = Corpus {
            stories,
            relation_arities: BTreeMap::new(),
        };
        c.recompute_arities();
        c
    }
}

/// One relation observed with more than one arity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArityIssue {
    pub relation: String,
    pub arities: BTreeSet<usize>,
    /// `(story, rendered statement)` for every use of the relation.
    pub uses: Vec<(String, String)>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub arity_issues: Vec<ArityIssue>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.arity_issues.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_clean() {
            return writeln!(f, "ok: no arity conflicts");
        }
        for issue in &self.arity_issues {
            writeln!(
                f,
                "warning: relation `{}` used with arities {:?}",
                issue.relation, issue.arities
            )?;
            for (story, line) in &issue.uses {
                writeln!(f, "  {story}: {line}")?;
            }
        }
        Ok(())
    }
}

pub fn validate(corpus: &Corpus) -> ValidationReport {
    let mut uses: BTreeMap<&str, Vec<(usize, String, String)>> = BTreeMap::new();
    for story in &corpus.stories {
        let mut rendered: Vec<(String, &Proposition)> = story
            .statements
            .iter()
            .map(|s| (s.to_string(), s.proposition()))
            .collect();
        rendered.sort();
        for (line, p) in rendered {
            uses.entry(p.relation.as_str())
                .or_default()
                .push((p.arity(), story.name.clone(), line));
        }
    }
    let arity_issues = uses
        .into_iter()
        .filter_map(|(rel, u)| {
            let arities: BTreeSet<usize> = u.iter().map(|(a, _, _)| *a).collect();
            (arities.len() > 1).then(|| ArityIssue {
                relation: rel.to_string(),
                arities,
                uses: u.into_iter().map(|(_, s, l)| (s, l)).collect(),
            })
        })
        .collect();
    ValidationReport { arity_issues }
}

/// Parses the corpus text format. Arity conflicts are not errors here; see
/// [`validate`] and [`parse_corpus_strict`].
pub fn parse_corpus(text: &str) -> Result<Corpus, CorpusError> {
    let mut stories: Vec<Story> = Vec::new();
    let mut names = BTreeSet::new();
    let mut labels: BTreeMap<String, Proposition> = BTreeMap::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let head = tokens.next().expect("non-empty line");
        if head == HEADER {
            let name = tokens.next().ok_or_else(|| CorpusError::Syntax {
                line: line_no,
                message: "story header without a name".into(),
            })?;
            if tokens.next().is_some() {
                return Err(CorpusError::Syntax {
                    line: line_no,
                    message: "story header takes exactly one name".into(),
                });
            }
            if !names.insert(name.to_string()) {
                return Err(CorpusError::DuplicateStory(name.to_string()));
            }
            stories.push(Story::new(name));
            labels.clear();
            continue;
        }
        let story = stories.last_mut().ok_or_else(|| CorpusError::Syntax {
            line: line_no,
            message: "statement before any `story` header".into(),
        })?;
        let statement = parse_statement(line, line_no)?;
        if let Statement::Labeled { label, inner } = &statement {
            match labels.get(label) {
                Some(prev) if prev != inner => {
                    return Err(CorpusError::DuplicateLabel {
                        line: line_no,
                        story: story.name.clone(),
                        label: label.clone(),
                    })
                }
                _ => {
                    labels.insert(label.clone(), inner.clone());
                }
            }
        }
        story.statements.insert(statement);
    }
    let mut corpus = Corpus {
        stories,
        relation_arities: BTreeMap::new(),
    };
    corpus.recompute_arities();
    Ok(corpus)
}

/// Like [`parse_corpus`], but a relation used with two arities is an error.
pub fn parse_corpus_strict(text: &str) -> Result<Corpus, CorpusError> {
    let corpus = parse_corpus(text)?;
    let report = validate(&corpus);
    if let Some(issue) = report.arity_issues.first() {
        return Err(CorpusError::ArityConflict {
            relation: issue.relation.clone(),
            arities: issue.arities.iter().copied().collect(),
        });
    }
    Ok(corpus)
}

fn parse_statement(line: &str, line_no: usize) -> Result<Statement, CorpusError> {
    let syntax = |message: &str| CorpusError::Syntax {
        line: line_no,
        message: message.to_string(),
    };
    let (head, rest) = split_first_token(line);
    if head != SAME_AS {
        if line.contains(['(', ')']) {
            return Err(syntax("parentheses are only allowed in `sameAs` statements"));
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() < 2 {
            return Err(syntax("a statement needs a relation and at least one argument"));
        }
        return Ok(Statement::plain(tokens[0], tokens[1..].iter().copied()));
    }

    let (label, rest) = split_first_token(rest);
    if label.is_empty() || label.contains(['(', ')']) {
        return Err(syntax("`sameAs` needs a label before the parenthesized statement"));
    }
    let body = rest.trim();
    let inner = body
        .strip_prefix('(')
        .and_then(|b| b.strip_suffix(')'))
        .ok_or_else(|| syntax("`sameAs` body must be a single parenthesized statement"))?;
    if inner.contains(['(', ')']) {
        return Err(syntax("nested parentheses in `sameAs`; use a label argument instead"));
    }
    let tokens: Vec<&str> = inner.split_whitespace().collect();
    if tokens.len() < 2 {
        return Err(syntax("`sameAs` inner statement needs a relation and an argument"));
    }
    if tokens[0] == SAME_AS {
        return Err(syntax("`sameAs` cannot label another `sameAs`"));
    }
    Ok(Statement::labeled(label, tokens[0], tokens[1..].iter().copied()))
}

fn split_first_token(s: &str) -> (&str, &str) {
    let s = s.trim_start();
    match s.find(char::is_whitespace) {
        Some(i) => (&s[..i], &s[i..]),
        None => (s, ""),
    }
}

/// Renders a corpus in the text format. Stories keep corpus order;
/// statements are sorted by rendered line so output is byte-stable.
pub fn serialize_corpus(corpus: &Corpus) -> String {
    let mut out = String::new();
    for (i, story) in corpus.stories.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        out.push_str(HEADER);
        out.push(' ');
        out.push_str(&story.name);
        out.push('\n');
        for line in story.sorted_lines() {
            out.push_str(&line);
            out.push('\n');
        }
    }
    out
}

/// The Sour Grapes fable: 18 statements, five of them labeled.
pub const SOUR_GRAPES: &str = "\
story sour_grapes
fox Of3Fox
false f36
cause f34 f35
false f34
men Of3Men
fail Of3Men
cause m34 m33
grapes Of3Grapes
incapable Of3Men
decide Of3Fox f36
sameAs m33 (fail Of3Men)
want Of3Fox Of3Grapes
sameAs f36 (sour Of3Grapes)
sameAs f35 (decide Of3Fox f36)
sameAs f34 (get Of3Fox Of3Grapes)
sameAs m34 (incapable Of3Men)
blameFor Of3Men concCircum m33
circumstances concCircum
";
