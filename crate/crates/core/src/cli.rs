//! The `spontol` command line.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::baseline::{linear_retrieve_with, BaselineStore, Score};
use crate::corpus::{
    generate_synthetic, parse_corpus, parse_corpus_strict, serialize_corpus, validate, Corpus,
    SyntheticParams,
};
use crate::eval::{run_eval, EvalConfig};
use crate::model::{build, BuildParams, Model};
use crate::ontology::Ontology;

#[derive(Debug, Parser)]
#[command(name = "spontol", version, about = "Learn schema ontologies from stories and retrieve analogs")]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a model directory from a corpus.
    Build {
        #[command(flatten)]
        input: CorpusArgs,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Retrieve schemas and analog stories for probe stories.
    Retrieve {
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        input: CorpusArgs,
        /// Probe only this story of the corpus.
        #[arg(long)]
        story: Option<String>,
        /// Baseline stories listed next to the retrieval.
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Repeated train/test comparison against the linear baseline.
    Eval {
        #[command(flatten)]
        input: CorpusArgs,
        /// Report directory.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 100)]
        train: usize,
        #[arg(long, default_value_t = 26)]
        test: usize,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long, value_enum, default_value_t = ScoreArg::Overlap)]
        score: ScoreArg,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Generate a synthetic corpus with planted schemas.
    Gen {
        #[arg(long)]
        out: PathBuf,
        /// Ground truth file (default: `<out>.truth`).
        #[arg(long)]
        truth: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Preset::Benchmark)]
        preset: Preset,
        #[arg(long)]
        stories: Option<usize>,
        #[arg(long)]
        schemas: Option<usize>,
        #[arg(long)]
        placements: Option<usize>,
        #[arg(long, env = "SPONTOL_SEED", default_value_t = 42)]
        seed: u64,
    },
    /// Write one ontology level of a model as a DOT graph.
    ExportDot {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, value_enum, default_value_t = Level::Schema)]
        level: Level,
        #[arg(long)]
        out: PathBuf,
        /// Leave instance leaves out.
        #[arg(long)]
        no_instances: bool,
    },
    /// Check a corpus and report relations used with several arities.
    Validate {
        #[command(flatten)]
        input: CorpusArgs,
    },
}

#[derive(Debug, Args)]
pub struct CorpusArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// Treat arity conflicts as errors.
    #[arg(long)]
    pub strict: bool,
}

#[derive(Debug, Args)]
pub struct ParamArgs {
    #[arg(long, default_value_t = 100)]
    pub num_windows: usize,
    #[arg(long, default_value_t = 20)]
    pub window_size: usize,
    #[arg(long, default_value_t = 0.5)]
    pub theta: f64,
    #[arg(long, env = "SPONTOL_SEED", default_value_t = 42)]
    pub seed: u64,
}

impl ParamArgs {
    fn params(&self) -> Result<BuildParams> {
        if self.num_windows == 0 || self.window_size == 0 {
            bail!("--num-windows and --window-size must be positive");
        }
        if !(self.theta > 0.0 && self.theta <= 1.0) {
            bail!("--theta must lie in (0, 1]");
        }
        Ok(BuildParams {
            num_windows: self.num_windows,
            window_size: self.window_size,
            theta: self.theta,
            seed: self.seed,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    /// Tab-separated with a header line.
    Tsv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScoreArg {
    Overlap,
    Jaccard,
}

impl From<ScoreArg> for Score {
    fn from(s: ScoreArg) -> Score {
        match s {
            ScoreArg::Overlap => Score::Overlap,
            ScoreArg::Jaccard => Score::Jaccard,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    Benchmark,
    Small,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Level {
    Window,
    Schema,
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .context("setting up the thread pool")?;
    }
    match cli.command {
        Command::Build { input, out: dir, params } => {
            let corpus = read_corpus(&input)?;
            let model = build(&corpus, &params.params()?)?;
            model
                .save(&dir)
                .with_context(|| format!("writing model to {}", dir.display()))?;
            write!(out, "{}", build_summary(&model))?;
        }
        Command::Retrieve { model, input, story, k, format } => {
            let model = load_model(&model)?;
            let corpus = read_corpus(&input)?;
            let probes: Vec<_> = match &story {
                Some(name) => vec![corpus
                    .story(name)
                    .with_context(|| format!("unknown story `{name}`"))?],
                None => corpus.stories.iter().collect(),
            };
            if probes.is_empty() {
                bail!("no stories to probe in {}", input.corpus.display());
            }
            let store = BaselineStore::from_model(&model);
            if format == Format::Tsv {
                writeln!(out, "story\tcomparisons\twindow_comparisons\tschemas\tstories\tbaseline")?;
            }
            for probe in probes {
                let r = model
                    .retrieve(probe)
                    .with_context(|| format!("retrieving for `{}`", probe.name))?;
                let base = linear_retrieve_with(&r.story_bag, &store, k, Score::Overlap);
                let join = |it: &mut dyn Iterator<Item = &str>| it.collect::<Vec<_>>().join(",");
                let schemas = join(&mut r.schemas.iter().map(String::as_str));
                let stories = join(&mut r.stories.iter().map(String::as_str));
                let baseline = join(&mut base.stories.iter().map(|(n, _)| n.as_str()));
                match format {
                    Format::Tsv => writeln!(
                        out,
                        "{}\t{}\t{}\t{schemas}\t{stories}\t{baseline}",
                        probe.name, r.comparisons, r.window_comparisons
                    )?,
                    Format::Text => {
                        writeln!(out, "story {}", probe.name)?;
                        writeln!(
                            out,
                            "  comparisons {} of {} training stories ({} at window level)",
                            r.comparisons,
                            model.stories.len(),
                            r.window_comparisons
                        )?;
                        writeln!(out, "  schemas {}", or_none(&schemas))?;
                        writeln!(out, "  stories {}", or_none(&stories))?;
                        writeln!(out, "  baseline top-{k} {}", or_none(&baseline))?;
                    }
                }
            }
        }
        Command::Eval {
            input,
            out: dir,
            train,
            test,
            trials,
            k,
            score,
            params,
            format,
        } => {
            let corpus = read_corpus(&input)?;
            let config = EvalConfig {
                train,
                test,
                trials,
                k,
                score: score.into(),
                build: params.params()?,
            };
            let report = run_eval(&corpus, &config)?;
            write_dir_atomic(
                &dir,
                &[
                    ("trials.csv", report.trials_csv()?),
                    ("stories.csv", report.stories_csv()?),
                    ("report.txt", report.to_text()),
                ],
            )?;
            match format {
                Format::Text => write!(out, "{}", report.table())?,
                Format::Tsv => {
                    let t = report.to_text();
                    for line in t.lines() {
                        if let Some((key, value)) = line.split_once(": ") {
                            writeln!(out, "{key}\t{value}")?;
                        }
                    }
                }
            }
        }
        Command::Gen {
            out: path,
            truth,
            preset,
            stories,
            schemas,
            placements,
            seed,
        } => {
            let mut p = match preset {
                Preset::Benchmark => SyntheticParams::benchmark(),
                Preset::Small => SyntheticParams::default(),
            };
            if let Some(n) = stories {
                p.num_stories = n;
            }
            if let Some(n) = schemas {
                p.num_schemas = n;
            }
            if let Some(n) = placements {
                p.placements_per_schema = n;
            }
            let (corpus, gt) = generate_synthetic(&p, seed)?;
            let truth = truth.unwrap_or_else(|| {
                let mut s = path.clone().into_os_string();
                s.push(".truth");
                PathBuf::from(s)
            });
            write_file_atomic(&path, serialize_corpus(&corpus).as_bytes())?;
            write_file_atomic(&truth, gt.to_text().as_bytes())?;
            writeln!(
                out,
                "wrote {} stories ({:.1} statements on average) and {} schemas",
                corpus.len(),
                corpus.mean_statements(),
                gt.planted_schemas.len()
            )?;
        }
        Command::ExportDot {
            model,
            level,
            out: path,
            no_instances,
        } => {
            let model = load_model(&model)?;
            let o = match level {
                Level::Window => &model.window_ontology,
                Level::Schema => &model.schema_ontology,
            };
            write_file_atomic(&path, o.to_dot(!no_instances).as_bytes())?;
        }
        Command::Validate { input } => {
            let corpus = read_corpus(&input)?;
            write!(out, "{}", validate(&corpus))?;
            writeln!(
                out,
                "{} stories, {} relations",
                corpus.len(),
                corpus.relation_arities.len()
            )?;
        }
    }
    Ok(())
}

fn or_none(s: &str) -> &str {
    if s.is_empty() {
        "-"
    } else {
        s
    }
}

fn read_corpus(args: &CorpusArgs) -> Result<Corpus> {
    let text = fs::read_to_string(&args.corpus)
        .with_context(|| format!("reading {}", args.corpus.display()))?;
    let parsed = if args.strict {
        parse_corpus_strict(&text)
    } else {
        parse_corpus(&text)
    };
    let corpus = parsed.with_context(|| format!("parsing {}", args.corpus.display()))?;
    if !args.strict {
        let report = validate(&corpus);
        if !report.is_clean() {
            eprint!("{report}");
        }
    }
    Ok(corpus)
}

fn load_model(dir: &Path) -> Result<Model> {
    Model::load(dir).with_context(|| format!("loading model from {}", dir.display()))
}

/// Concept counts and description lengths per level.
pub fn build_summary(model: &Model) -> String {
    let level = |name: &str, o: &Ontology| {
        let raw: usize = o.instances().iter().map(|(_, b)| o.expand(b).len()).sum();
        format!(
            "{name:<7} concepts {:>6}  instances {:>6}  dl {:>8} -> {:>8}\n",
            o.concepts().len(),
            o.instances().len(),
            raw,
            o.description_length()
        )
    };
    format!(
        "{} training stories\n{}{}",
        model.stories.len(),
        level("window", &model.window_ontology),
        level("schema", &model.schema_ontology)
    )
}

fn parent_of(path: &Path) -> Result<&Path> {
    let parent = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    Ok(parent)
}

pub fn write_file_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = tempfile::NamedTempFile::new_in(parent_of(path)?)?;
    tmp.write_all(bytes)?;
    tmp.persist(path)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn write_dir_atomic(dir: &Path, files: &[(&str, String)]) -> Result<()> {
    let tmp = tempfile::Builder::new()
        .prefix(".spontol-out")
        .tempdir_in(parent_of(dir)?)?;
    for (name, text) in files {
        fs::write(tmp.path().join(name), text)?;
    }
    if dir.exists() {
        fs::remove_dir_all(dir).with_context(|| format!("replacing {}", dir.display()))?;
    }
    fs::rename(tmp.keep(), dir).with_context(|| format!("writing {}", dir.display()))?;
    Ok(())
}
