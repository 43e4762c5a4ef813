//! Two-level build and retrieval.
//!
//! Build draws random windows from every story, chunks all window bags
//! into a window ontology, re-describes each story as the union of its
//! window parses, and chunks those story bags into a schema ontology.
//! Retrieval repeats the window stage for a new story and parses its bag
//! against the schema ontology.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use thiserror::Error;

use crate::bag::FeatureBag;
use crate::corpus::{Corpus, Story};
use crate::ontology::{chunk_instances, parse_with, ChunkConfig, Ontology, OntologyError, ParseOptions, ParseResult};
use crate::rng::substream;
use crate::transform::{transform, TransformError};
use crate::windows::{ConnectivityGraph, WindowError};

pub const FORMAT_TAG: &str = "spontol-model 1";

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error(transparent)]
    Window(#[from] WindowError),
    #[error("story `{story}`: {source}")]
    Transform {
        story: String,
        source: TransformError,
    },
    #[error(transparent)]
    Ontology(#[from] OntologyError),
    #[error("model format: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BuildParams {
    pub num_windows: usize,
    pub window_size: usize,
    pub theta: f64,
    pub seed: u64,
}

impl Default for BuildParams {
    fn default() -> Self {
        BuildParams {
            num_windows: 100,
            window_size: 20,
            theta: 0.5,
            seed: 42,
        }
    }
}

impl BuildParams {
    /// Window parses are closed-world, so story bags stay lossless.
    fn window_options(&self) -> ParseOptions {
        ParseOptions {
            theta: self.theta,
            open_world: false,
        }
    }

    /// A story's sampled windows need not show all of a schema, so
    /// schema-level parses do not charge for unseen schema tokens.
    fn schema_options(&self) -> ParseOptions {
        ParseOptions {
            theta: self.theta,
            open_world: true,
        }
    }

    fn to_text(&self) -> String {
        format!(
            "num_windows {}\nwindow_size {}\ntheta {}\nseed {}\n",
            self.num_windows, self.window_size, self.theta, self.seed
        )
    }

    fn from_text(text: &str) -> Result<Self, ModelError> {
        let fields: HashMap<&str, &str> = text
            .lines()
            .filter_map(|l| l.split_once(' '))
            .collect();
        let get = |k: &str| {
            fields
                .get(k)
                .ok_or_else(|| ModelError::Format(format!("params missing `{k}`")))
        };
        let bad = |k: &str| ModelError::Format(format!("params: bad `{k}`"));
        Ok(BuildParams {
            num_windows: get("num_windows")?.parse().map_err(|_| bad("num_windows"))?,
            window_size: get("window_size")?.parse().map_err(|_| bad("window_size"))?,
            theta: get("theta")?.parse().map_err(|_| bad("theta"))?,
            seed: get("seed")?.parse().map_err(|_| bad("seed"))?,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub params: BuildParams,
    pub window_ontology: Ontology,
    pub schema_ontology: Ontology,
    /// Schema concept id -> training stories that use it or a concept containing it.
    pub instance_index: BTreeMap<String, BTreeSet<String>>,
    /// Training story names with their statement counts.
    pub stories: Vec<(String, usize)>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Retrieval {
    /// Concepts used by the schema-level parse plus the concepts they contain.
    pub schemas: BTreeSet<String>,
    pub stories: BTreeSet<String>,
    /// Schema-level concept scorings.
    pub comparisons: usize,
    /// Window-level concept scorings, summed over windows.
    pub window_comparisons: usize,
    pub story_bag: FeatureBag,
}

/// Window bags of one story, drawn from substream `(seed, stage, story, i)`.
pub fn window_bags(story: &Story, params: &BuildParams, stage: &str) -> Result<Vec<FeatureBag>, ModelError> {
    let graph = ConnectivityGraph::new(story);
    if graph.is_empty() {
        return Err(WindowError::EmptyStory(story.name.clone()).into());
    }
    if params.window_size == 0 {
        return Err(WindowError::ZeroWindow.into());
    }
    let mut cache: HashMap<Vec<usize>, FeatureBag> = HashMap::new();
    (0..params.num_windows)
        .map(|i| {
            let mut rng = substream(params.seed, &[stage, &story.name, &i.to_string()]);
            let mut idx = graph.sample_indices(params.window_size, &mut rng);
            idx.sort_unstable();
            if let Some(bag) = cache.get(&idx) {
                return Ok(bag.clone());
            }
            let window: Vec<_> = idx.iter().map(|&j| graph.statements()[j].clone()).collect();
            let bag = transform(&window).map_err(|source| ModelError::Transform {
                story: story.name.clone(),
                source,
            })?;
            cache.insert(idx, bag.clone());
            Ok(bag)
        })
        .collect()
}

/// Union over the bags' parses of the concepts used, the concepts those
/// contain, and the additions. Including contained concepts exposes the
/// structure a story shares with others even when its windows parse into
/// concepts specific to that story.
fn story_bag(
    bags: &[FeatureBag],
    ontology: &Ontology,
    options: &ParseOptions,
    memo: &mut HashMap<FeatureBag, ParseResult>,
) -> (FeatureBag, usize) {
    let mut out = FeatureBag::new();
    let mut comparisons = 0;
    for b in bags {
        let p = memo
            .entry(b.clone())
            .or_insert_with(|| parse_with(b, ontology, options));
        comparisons += p.comparisons;
        for c in &p.concepts_used {
            out.insert(c.as_str());
            for d in ontology.descendants(c) {
                out.insert(d);
            }
        }
        out.extend_from(&p.additions);
    }
    (out, comparisons)
}

pub fn build(corpus: &Corpus, params: &BuildParams) -> Result<Model, ModelError> {
    if corpus.is_empty() {
        return Err(ModelError::EmptyCorpus);
    }
    let per_story: Vec<Vec<FeatureBag>> = corpus
        .stories
        .par_iter()
        .map(|s| window_bags(s, params, "build"))
        .collect::<Result<_, _>>()?;

    let window_instances: Vec<(String, FeatureBag)> = corpus
        .stories
        .iter()
        .zip(&per_story)
        .flat_map(|(s, bags)| {
            bags.iter()
                .enumerate()
                .map(move |(i, b)| (format!("{}#{i}", s.name), b.clone()))
        })
        .collect();
    let window_config = ChunkConfig {
        id_prefix: "W".into(),
        seed: params.seed,
        ..Default::default()
    };
    let (window_ontology, _) = chunk_instances(window_instances, &window_config);

    let options = params.window_options();
    let story_bags: Vec<FeatureBag> = per_story
        .par_iter()
        .map(|bags| story_bag(bags, &window_ontology, &options, &mut HashMap::new()).0)
        .collect();

    let schema_config = ChunkConfig {
        id_prefix: "S".into(),
        exhaustive_limit: usize::MAX,
        seed: params.seed,
        ..Default::default()
    };
    let schema_instances = corpus
        .stories
        .iter()
        .map(|s| s.name.clone())
        .zip(story_bags.iter().cloned())
        .collect();
    let (schema_ontology, _) = chunk_instances(schema_instances, &schema_config);

    let mut instance_index: BTreeMap<String, BTreeSet<String>> = schema_ontology
        .concepts()
        .iter()
        .map(|c| (c.id.clone(), BTreeSet::new()))
        .collect();
    for (story, bag) in corpus.stories.iter().zip(&story_bags) {
        let p = parse_with(bag, &schema_ontology, &params.schema_options());
        for s in with_descendants(&schema_ontology, &p.concepts_used) {
            instance_index
                .get_mut(&s)
                .expect("schema concept")
                .insert(story.name.clone());
        }
    }

    Ok(Model {
        params: params.clone(),
        window_ontology,
        schema_ontology,
        instance_index,
        stories: corpus.stories.iter().map(|s| (s.name.clone(), s.len())).collect(),
    })
}

fn with_descendants(o: &Ontology, used: &BTreeSet<String>) -> BTreeSet<String> {
    let mut out = used.clone();
    for id in used {
        out.extend(o.descendants(id));
    }
    out
}

impl Model {
    /// Bag of a new story, from fresh windows.
    pub fn probe_bag(&self, story: &Story) -> Result<(FeatureBag, usize), ModelError> {
        let bags = window_bags(story, &self.params, "retrieve")?;
        Ok(story_bag(
            &bags,
            &self.window_ontology,
            &self.params.window_options(),
            &mut HashMap::new(),
        ))
    }

    pub fn retrieve(&self, story: &Story) -> Result<Retrieval, ModelError> {
        let (story_bag, window_comparisons) = self.probe_bag(story)?;
        Ok(self.retrieve_bag(story_bag, window_comparisons))
    }

    /// Schema-level retrieval for an already-computed story bag.
    pub fn retrieve_bag(&self, story_bag: FeatureBag, window_comparisons: usize) -> Retrieval {
        let p = parse_with(&story_bag, &self.schema_ontology, &self.params.schema_options());
        let schemas = with_descendants(&self.schema_ontology, &p.concepts_used);
        let stories = schemas
            .iter()
            .filter_map(|s| self.instance_index.get(s))
            .flatten()
            .cloned()
            .collect();
        Retrieval {
            schemas,
            stories,
            comparisons: p.comparisons,
            window_comparisons,
            story_bag,
        }
    }

    /// Training story bags, recovered from the schema ontology's instances.
    pub fn training_bags(&self) -> Vec<(String, FeatureBag)> {
        self.schema_ontology
            .instances()
            .iter()
            .map(|(name, bag)| (name.clone(), self.schema_ontology.expand(bag)))
            .collect()
    }

    /// Files of the model directory, in write order.
    pub fn to_files(&self) -> Vec<(&'static str, String)> {
        let mut meta = String::from("# story statements\n");
        for (name, n) in &self.stories {
            meta.push_str(&format!("{name} {n}\n"));
        }
        let mut index = String::new();
        for (schema, stories) in &self.instance_index {
            index.push_str("schema ");
            index.push_str(schema);
            for s in stories {
                index.push(' ');
                index.push_str(s);
            }
            index.push('\n');
        }
        vec![
            ("FORMAT", format!("{FORMAT_TAG}\n")),
            ("params.txt", self.params.to_text()),
            ("corpus_meta.txt", meta),
            ("window_ontology.txt", self.window_ontology.to_text()),
            ("schema_ontology.txt", self.schema_ontology.to_text()),
            ("instance_index.txt", index),
        ]
    }

    /// Writes into a sibling temp directory, then renames it over `dir`.
    pub fn save(&self, dir: &Path) -> Result<(), ModelError> {
        let parent = match dir.parent() {
            Some(p) if !p.as_os_str().is_empty() => p,
            _ => Path::new("."),
        };
        fs::create_dir_all(parent)?;
        let tmp = tempfile::Builder::new().prefix(".spontol-model").tempdir_in(parent)?;
        for (name, text) in self.to_files() {
            fs::write(tmp.path().join(name), text)?;
        }
        if dir.exists() {
            fs::remove_dir_all(dir)?;
        }
        fs::rename(tmp.keep(), dir)?;
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Self, ModelError> {
        let read = |name: &str| fs::read_to_string(dir.join(name));
        let tag = read("FORMAT")?;
        if tag.trim() != FORMAT_TAG {
            return Err(ModelError::Format(format!(
                "unsupported model version `{}`",
                tag.trim()
            )));
        }
        let params = BuildParams::from_text(&read("params.txt")?)?;
        let stories = read("corpus_meta.txt")?
            .lines()
            .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
            .map(|l| {
                let (name, n) = l
                    .split_once(' ')
                    .ok_or_else(|| ModelError::Format(format!("corpus_meta: `{l}`")))?;
                let n = n
                    .parse()
                    .map_err(|_| ModelError::Format(format!("corpus_meta: `{l}`")))?;
                Ok((name.to_string(), n))
            })
            .collect::<Result<_, ModelError>>()?;
        let window_ontology = Ontology::from_text(&read("window_ontology.txt")?)?;
        let schema_ontology = Ontology::from_text(&read("schema_ontology.txt")?)?;
        let mut instance_index = BTreeMap::new();
        for l in read("instance_index.txt")?.lines() {
            let mut parts = l.split_whitespace();
            match (parts.next(), parts.next()) {
                (Some("schema"), Some(id)) => {
                    if !schema_ontology.is_concept(id) {
                        return Err(OntologyError::UnknownConcept(id.to_string()).into());
                    }
                    instance_index.insert(id.to_string(), parts.map(String::from).collect());
                }
                (None, _) => {}
                _ => return Err(ModelError::Format(format!("instance_index: `{l}`"))),
            }
        }
        Ok(Model {
            params,
            window_ontology,
            schema_ontology,
            instance_index,
            stories,
        })
    }
}
