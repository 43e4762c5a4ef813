//! Synthetic corpora with planted schemas.
//!
//! A schema is a connected statement template over variables. Each
//! placement instantiates the template with fresh entity and label symbols,
//! so two placements share structure but no surface symbols. Templates draw
//! relations from their own vocabulary (`s000`, ...); the rest of a story is
//! connected noise over the noise vocabulary (`r000`, ...).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use rand::distributions::WeightedIndex;
use rand::prelude::*;

use super::{parse_statement, Corpus, CorpusError, Statement, Story};
use crate::rng::{substream, Stream};

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticParams {
    pub num_stories: usize,
    pub min_statements: usize,
    pub max_statements: usize,
    /// Target mean story size; `None` draws sizes uniformly.
    pub mean_statements: Option<f64>,
    pub num_schemas: usize,
    pub schema_size: usize,
    pub placements_per_schema: usize,
    pub noise_relation_vocab: usize,
    pub schema_relation_vocab: usize,
    /// Chance that a generated statement is a `sameAs` statement.
    pub labeled_fraction: f64,
    /// Chance that a noise argument reuses an existing symbol.
    pub attach_probability: f64,
}

impl Default for SyntheticParams {
    fn default() -> Self {
        SyntheticParams {
            num_stories: 20,
            min_statements: 5,
            max_statements: 30,
            mean_statements: None,
            num_schemas: 3,
            schema_size: 5,
            placements_per_schema: 3,
            noise_relation_vocab: 40,
            schema_relation_vocab: 20,
            labeled_fraction: 0.15,
            attach_probability: 0.7,
        }
    }
}

impl SyntheticParams {
    /// 126 stories sized 5..=124 with mean 39.5 and twelve planted schemas.
    pub fn benchmark() -> Self {
        SyntheticParams {
            num_stories: 126,
            min_statements: 5,
            max_statements: 124,
            mean_statements: Some(39.5),
            num_schemas: 12,
            schema_size: 5,
            placements_per_schema: 20,
            noise_relation_vocab: 300,
            schema_relation_vocab: 30,
            attach_probability: 0.3,
            ..Default::default()
        }
    }

    fn check(&self) -> Result<(), CorpusError> {
        let fail = |m: String| Err(CorpusError::Infeasible(m));
        if self.min_statements == 0 || self.min_statements > self.max_statements {
            return fail(format!(
                "statement range {}..={} is empty",
                self.min_statements, self.max_statements
            ));
        }
        if self.schema_size > self.max_statements {
            return fail(format!(
                "schema size {} exceeds max statements {}",
                self.schema_size, self.max_statements
            ));
        }
        if self.num_schemas > 0 {
            if self.schema_size == 0 {
                return fail("schema size must be positive".into());
            }
            if self.schema_size > self.min_statements {
                return fail(format!(
                    "schema size {} exceeds min statements {}",
                    self.schema_size, self.min_statements
                ));
            }
            if self.placements_per_schema > self.num_stories {
                return fail(format!(
                    "{} placements per schema but only {} stories",
                    self.placements_per_schema, self.num_stories
                ));
            }
        }
        if self.noise_relation_vocab < 2 {
            return fail("relation vocabulary needs at least two relations".into());
        }
        if self.num_schemas > 0 && self.schema_relation_vocab == 0 {
            return fail("schema relation vocabulary is empty".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlantedSchema {
    pub id: String,
    /// Template over variable symbols; instantiations rename them.
    pub template: Vec<Statement>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GroundTruth {
    pub planted_schemas: Vec<PlantedSchema>,
    /// Story name -> planted schema ids (empty set for pure-noise stories).
    pub placements: BTreeMap<String, BTreeSet<String>>,
}

impl GroundTruth {
    pub fn schema(&self, id: &str) -> Option<&PlantedSchema> {
        self.planted_schemas.iter().find(|s| s.id == id)
    }

    /// Stories carrying a placement of `schema_id`.
    pub fn stories_with(&self, schema_id: &str) -> BTreeSet<String> {
        self.placements
            .iter()
            .filter(|(_, ids)| ids.contains(schema_id))
            .map(|(story, _)| story.clone())
            .collect()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("# spontol ground truth v1\n");
        for schema in &self.planted_schemas {
            let _ = writeln!(out, "schema {}", schema.id);
            for st in &schema.template {
                let _ = writeln!(out, "template {} {st}", schema.id);
            }
        }
        for (story, ids) in &self.placements {
            out.push_str("placement ");
            out.push_str(story);
            for id in ids {
                out.push(' ');
                out.push_str(id);
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, CorpusError> {
        let mut gt = GroundTruth::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |m: &str| CorpusError::GroundTruth(format!("line {}: {m}", idx + 1));
            let (key, rest) = line.split_once(' ').unwrap_or((line, ""));
            match key {
                "schema" => gt.planted_schemas.push(PlantedSchema {
                    id: rest.trim().to_string(),
                    template: Vec::new(),
                }),
                "template" => {
                    let (id, st) = rest.split_once(' ').ok_or_else(|| err("empty template"))?;
                    let schema = gt
                        .planted_schemas
                        .iter_mut()
                        .find(|s| s.id == id)
                        .ok_or_else(|| err("template for unknown schema"))?;
                    schema.template.push(parse_statement(st, idx + 1)?);
                }
                "placement" => {
                    let mut it = rest.split_whitespace();
                    let story = it.next().ok_or_else(|| err("placement without story"))?;
                    let ids: BTreeSet<String> = it.map(str::to_string).collect();
                    if let Some(bad) = ids.iter().find(|id| gt.schema(id).is_none()) {
                        return Err(err(&format!("unknown schema `{bad}`")));
                    }
                    gt.placements.insert(story.to_string(), ids);
                }
                _ => return Err(err("unknown record")),
            }
        }
        Ok(gt)
    }
}

struct Vocabulary {
    relations: Vec<(String, usize)>,
}

impl Vocabulary {
    fn new(prefix: char, size: usize, rng: &mut Stream) -> Self {
        let arity_dist = WeightedIndex::new([3, 5, 2]).expect("static weights");
        let relations = (0..size)
            .map(|i| (format!("{prefix}{i:03}"), arity_dist.sample(rng) + 1))
            .collect();
        Vocabulary { relations }
    }

    fn pick(&self, rng: &mut Stream) -> (&str, usize) {
        let (name, arity) = self.relations.choose(rng).expect("non-empty vocabulary");
        (name, *arity)
    }

    fn pick_with_arity_at_least(&self, min: usize, rng: &mut Stream) -> Option<(&str, usize)> {
        let eligible: Vec<_> = self.relations.iter().filter(|(_, a)| *a >= min).collect();
        eligible.choose(rng).map(|(n, a)| (n.as_str(), *a))
    }
}

/// Symbol pools for growing a connected statement set.
struct Builder {
    entities: Vec<String>,
    labels: Vec<String>,
    pending_label: Option<String>,
    statements: BTreeSet<Statement>,
    counter: usize,
    entity_prefix: &'static str,
    label_prefix: &'static str,
}

impl Builder {
    fn new(entity_prefix: &'static str, label_prefix: &'static str) -> Self {
        Builder {
            entities: Vec::new(),
            labels: Vec::new(),
            pending_label: None,
            statements: BTreeSet::new(),
            counter: 0,
            entity_prefix,
            label_prefix,
        }
    }

    fn fresh_entity(&mut self) -> String {
        self.counter += 1;
        let e = format!("{}{}", self.entity_prefix, self.counter);
        self.entities.push(e.clone());
        e
    }

    fn fresh_label(&mut self) -> String {
        self.counter += 1;
        format!("{}{}", self.label_prefix, self.counter)
    }

    fn existing(&self) -> Vec<&String> {
        self.entities.iter().chain(&self.labels).collect()
    }

    /// Adds one statement attached to the current symbols (unless empty).
    /// Returns false if the draw duplicated an existing statement.
    fn grow(
        &mut self,
        vocab: &Vocabulary,
        attach: f64,
        labeled_fraction: f64,
        allow_label: bool,
        rng: &mut Stream,
    ) -> bool {
        let (relation, arity) = vocab.pick(rng);
        let relation = relation.to_string();
        let anchor_pos = rng.gen_range(0..arity);
        let mut args: Vec<String> = Vec::with_capacity(arity);
        let anchor = self.pending_label.clone().or_else(|| {
            let pool = self.existing();
            pool.choose(rng).map(|s| (*s).clone())
        });
        for pos in 0..arity {
            let arg = if pos == anchor_pos {
                anchor.clone()
            } else if rng.gen_bool(attach) {
                let pool: Vec<String> = self
                    .entities
                    .iter()
                    .filter(|e| !args.contains(e) && Some(*e) != anchor.as_ref())
                    .cloned()
                    .collect();
                pool.choose(rng).cloned()
            } else {
                None
            };
            let arg = match arg {
                Some(a) => a,
                None => self.fresh_entity(),
            };
            args.push(arg);
        }
        let statement = if allow_label && rng.gen_bool(labeled_fraction) {
            let label = self.fresh_label();
            Statement::labeled(label, relation, args)
        } else {
            Statement::plain(relation, args)
        };
        if self.statements.contains(&statement) {
            return false;
        }
        if self.pending_label.is_some() {
            let used = statement.proposition().args.iter().any(|a| Some(a) == self.pending_label.as_ref());
            if used {
                let l = self.pending_label.take().expect("checked");
                self.labels.push(l);
            }
        }
        if let Some(label) = statement.label() {
            self.pending_label = Some(label.to_string());
        }
        self.statements.insert(statement);
        true
    }
}

fn make_template(id: String, p: &SyntheticParams, vocab: &Vocabulary, rng: &mut Stream) -> PlantedSchema {
    let mut b = Builder::new("v", "l");
    let mut guard = 0;
    while b.statements.len() < p.schema_size {
        // The last statement stays plain so every defined label gets used.
        let allow_label = b.statements.len() + 1 < p.schema_size;
        b.grow(vocab, 0.5, p.labeled_fraction.max(0.25), allow_label, rng);
        guard += 1;
        assert!(guard < 10_000, "template generation stuck");
    }
    PlantedSchema {
        id,
        template: b.statements.into_iter().collect(),
    }
}

fn instantiate(template: &[Statement], b: &mut Builder) -> Vec<Statement> {
    let labels: BTreeSet<&str> = template.iter().filter_map(Statement::label).collect();
    let mut map: BTreeMap<&str, String> = BTreeMap::new();
    for st in template {
        for sym in st.symbols() {
            if !map.contains_key(sym) {
                let fresh = if labels.contains(sym) {
                    let l = b.fresh_label();
                    b.labels.push(l.clone());
                    l
                } else {
                    b.fresh_entity()
                };
                map.insert(sym, fresh);
            }
        }
    }
    let rename = |s: &String| map[s.as_str()].clone();
    template
        .iter()
        .map(|st| match st {
            Statement::Plain(p) => Statement::plain(p.relation.clone(), p.args.iter().map(rename)),
            Statement::Labeled { label, inner } => Statement::labeled(
                rename(label),
                inner.relation.clone(),
                inner.args.iter().map(rename),
            ),
        })
        .collect()
}

fn size_distribution(p: &SyntheticParams) -> WeightedIndex<f64> {
    let span = p.max_statements - p.min_statements;
    let weights_for = |q: f64| -> Vec<f64> { (0..=span).map(|x| q.powi(x as i32)).collect() };
    let mean_of = |w: &[f64]| -> f64 {
        let total: f64 = w.iter().sum();
        w.iter().enumerate().map(|(x, wx)| x as f64 * wx).sum::<f64>() / total
    };
    let weights = match p.mean_statements {
        None => vec![1.0; span + 1],
        Some(target) => {
            let target = (target - p.min_statements as f64).clamp(0.0, span as f64);
            if target >= span as f64 / 2.0 {
                vec![1.0; span + 1]
            } else {
                // Truncated geometric; mean is increasing in q on (0, 1].
                let (mut lo, mut hi) = (1e-9, 1.0);
                for _ in 0..100 {
                    let mid = 0.5 * (lo + hi);
                    if mean_of(&weights_for(mid)) < target {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                weights_for(0.5 * (lo + hi))
            }
        }
    };
    WeightedIndex::new(weights).expect("positive weights")
}

fn component_count(statements: &BTreeSet<Statement>) -> Vec<BTreeSet<String>> {
    let mut comps: Vec<BTreeSet<String>> = Vec::new();
    for st in statements {
        let syms: BTreeSet<String> = st.symbols().map(str::to_string).collect();
        let (touching, rest): (Vec<_>, Vec<_>) = comps
            .into_iter()
            .partition(|c| !c.is_disjoint(&syms));
        let mut merged = syms;
        for c in touching {
            merged.extend(c);
        }
        comps = rest;
        comps.push(merged);
    }
    comps
}

/// Deterministic for a fixed `(params, seed)`.
pub fn generate_synthetic(
    params: &SyntheticParams,
    seed: u64,
) -> Result<(Corpus, GroundTruth), CorpusError> {
    params.check()?;
    let mut rng = substream(seed, &["synthetic"]);
    let vocab = Vocabulary::new('r', params.noise_relation_vocab, &mut rng);
    let schema_vocab = Vocabulary::new('s', params.schema_relation_vocab, &mut rng);

    let planted_schemas: Vec<PlantedSchema> = (0..params.num_schemas)
        .map(|i| make_template(format!("schema{i:02}"), params, &schema_vocab, &mut rng))
        .collect();

    let names: Vec<String> = (0..params.num_stories).map(|i| format!("story{i:03}")).collect();
    let mut placements: BTreeMap<String, BTreeSet<String>> =
        names.iter().map(|n| (n.clone(), BTreeSet::new())).collect();
    for schema in &planted_schemas {
        for idx in rand::seq::index::sample(&mut rng, params.num_stories, params.placements_per_schema) {
            placements
                .get_mut(&names[idx])
                .expect("known story")
                .insert(schema.id.clone());
        }
    }

    let sizes = size_distribution(params);
    let mut stories = Vec::with_capacity(params.num_stories);
    for name in &names {
        let target = params.min_statements + sizes.sample(&mut rng);
        let mut b = Builder::new("e", "f");
        for schema_id in &placements[name] {
            let schema = planted_schemas
                .iter()
                .find(|s| &s.id == schema_id)
                .expect("planted");
            for st in instantiate(&schema.template, &mut b) {
                b.statements.insert(st);
            }
        }
        // Bridge planted components so the story is one connected piece.
        let mut comps = component_count(&b.statements);
        while comps.len() > 1 {
            let Some((rel, arity)) = vocab.pick_with_arity_at_least(2, &mut rng) else {
                break;
            };
            let left = comps[0].iter().filter(|s| b.entities.contains(s)).choose(&mut rng);
            let right = comps[1].iter().filter(|s| b.entities.contains(s)).choose(&mut rng);
            let (Some(l), Some(r)) = (left.cloned(), right.cloned()) else {
                break;
            };
            let mut args = vec![l, r];
            while args.len() < arity {
                args.push(b.fresh_entity());
            }
            b.statements.insert(Statement::plain(rel, args));
            comps = component_count(&b.statements);
        }
        let mut stalls = 0;
        while b.statements.len() < target && stalls < 1000 {
            if !b.grow(&vocab, params.attach_probability, params.labeled_fraction, true, &mut rng) {
                stalls += 1;
            }
        }
        // A trailing label with no user is fine: the statement is still
        // connected through its own arguments.
        stories.push(Story::with_statements(name.clone(), b.statements));
    }

    let corpus = Corpus::from_stories(stories)?;
    Ok((corpus, GroundTruth { planted_schemas, placements }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{parse_corpus, serialize_corpus, validate};

    fn small() -> SyntheticParams {
        SyntheticParams {
            num_stories: 12,
            min_statements: 6,
            max_statements: 20,
            num_schemas: 2,
            schema_size: 4,
            placements_per_schema: 3,
            ..Default::default()
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let (a, ga) = generate_synthetic(&small(), 3).unwrap();
        let (b, gb) = generate_synthetic(&small(), 3).unwrap();
        assert_eq!(serialize_corpus(&a), serialize_corpus(&b));
        assert_eq!(ga, gb);
        let (c, _) = generate_synthetic(&small(), 4).unwrap();
        assert_ne!(serialize_corpus(&a), serialize_corpus(&c));
    }

    #[test]
    fn no_schemas_means_empty_placements() {
        let p = SyntheticParams { num_schemas: 0, ..small() };
        let (c, gt) = generate_synthetic(&p, 1).unwrap();
        assert_eq!(gt.placements.len(), c.len());
        assert!(gt.placements.values().all(BTreeSet::is_empty));
    }

    #[test]
    fn infeasible_params_rejected() {
        let p = SyntheticParams { schema_size: 30, ..small() };
        assert!(matches!(generate_synthetic(&p, 1), Err(CorpusError::Infeasible(_))));
        let p = SyntheticParams { schema_size: 8, ..small() };
        assert!(matches!(generate_synthetic(&p, 1), Err(CorpusError::Infeasible(_))));
    }

    #[test]
    fn stories_connected_sized_and_arity_consistent() {
        let p = small();
        let (c, gt) = generate_synthetic(&p, 9).unwrap();
        assert!(validate(&c).is_clean());
        for s in &c.stories {
            assert!(s.len() >= p.min_statements, "{} has {}", s.name, s.len());
            assert_eq!(component_count(&s.statements).len(), 1, "{}", s.name);
        }
        for schema in &gt.planted_schemas {
            assert_eq!(schema.template.len(), p.schema_size);
            assert_eq!(component_count(&schema.template.iter().cloned().collect()).len(), 1);
            assert_eq!(gt.stories_with(&schema.id).len(), p.placements_per_schema);
        }
    }

    #[test]
    fn benchmark_mean_size() {
        let (c, _) = generate_synthetic(&SyntheticParams::benchmark(), 42).unwrap();
        assert_eq!(c.len(), 126);
        let sizes: Vec<usize> = c.stories.iter().map(Story::len).collect();
        assert!(sizes.iter().all(|&n| (5..=124).contains(&n)), "{sizes:?}");
        let mean = c.mean_statements();
        assert!((mean - 39.5).abs() < 6.0, "mean {mean}");
    }

    #[test]
    fn ground_truth_text_round_trip() {
        let (c, gt) = generate_synthetic(&small(), 5).unwrap();
        let back = GroundTruth::from_text(&gt.to_text()).unwrap();
        assert_eq!(back, gt);
        assert!(parse_corpus(&serialize_corpus(&c)).is_ok());
        assert!(GroundTruth::from_text("placement s nope\n").is_err());
    }
}
