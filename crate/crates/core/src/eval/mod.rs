//! Train/test evaluation against the linear baseline, plus exhaustive
//! oracles for small instances.
//!
//! Each trial shuffles the corpus with substream `(seed, "trial", t)`,
//! builds on the first `train` stories and probes with the next `test`.
//! Accuracy is the share of the baseline's top-k stories that the model's
//! schema-level retrieval also returns.

pub mod oracle;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use thiserror::Error;

use crate::baseline::{linear_retrieve_with, BaselineStore, Score};
use crate::corpus::Corpus;
use crate::model::{build, BuildParams, ModelError};
use crate::rng::{derive_seed, substream};

pub use oracle::{
    oracle_common_substructure, oracle_embeds, oracle_optimal_chunk, oracle_optimal_parse,
    CommonSubstructure,
};

/// Cut-offs reported alongside the configured `k`.
pub const RECALL_KS: [usize; 3] = [1, 3, 5];

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("bad split: {0}")]
    Split(String),
    #[error("instance too large for the oracle: {0}")]
    TooLarge(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("report: {0}")]
    Report(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalConfig {
    pub train: usize,
    pub test: usize,
    pub trials: usize,
    /// Baseline cut-off used for accuracy.
    pub k: usize,
    pub score: Score,
    pub build: BuildParams,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            train: 100,
            test: 26,
            trials: 20,
            k: 3,
            score: Score::Overlap,
            build: BuildParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StoryOutcome {
    pub story: String,
    pub schemas: usize,
    pub retrieved: usize,
    /// Baseline top-k (configured k), best first.
    pub baseline: Vec<String>,
    pub hits: usize,
    pub comparisons: usize,
    pub window_comparisons: usize,
    pub baseline_comparisons: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialReport {
    pub trial: usize,
    pub trial_seed: u64,
    pub accuracy: f64,
    /// `(k, accuracy at k)` for each of [`RECALL_KS`].
    pub recall_at: Vec<(usize, f64)>,
    pub mean_comparisons: f64,
    pub mean_baseline_comparisons: f64,
    pub mean_window_comparisons: f64,
    pub mean_retrieved: f64,
    pub stories: Vec<StoryOutcome>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stat {
    pub mean: f64,
    /// Standard error; absent for a single trial.
    pub stderr: Option<f64>,
}

impl Stat {
    pub fn of(values: &[f64]) -> Stat {
        let n = values.len() as f64;
        if values.is_empty() {
            return Stat {
                mean: 0.0,
                stderr: None,
            };
        }
        let mean = values.iter().sum::<f64>() / n;
        let stderr = (values.len() > 1).then(|| {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
            (var / n).sqrt()
        });
        Stat { mean, stderr }
    }

    fn fmt(&self) -> String {
        match self.stderr {
            Some(se) => format!("{:.4} ± {:.4}", self.mean, se),
            None => format!("{:.4}", self.mean),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub config: EvalConfig,
    pub trials: Vec<TrialReport>,
    pub accuracy: Stat,
    pub recall_at: Vec<(usize, Stat)>,
    pub comparisons: Stat,
    pub baseline_comparisons: Stat,
    pub window_comparisons: Stat,
}

pub fn run_eval(corpus: &Corpus, config: &EvalConfig) -> Result<EvalReport, EvalError> {
    if config.train == 0 || config.test == 0 || config.trials == 0 || config.k == 0 {
        return Err(EvalError::Split(
            "train, test, trials and k must be positive".into(),
        ));
    }
    if config.train + config.test > corpus.len() {
        return Err(EvalError::Split(format!(
            "{} + {} stories requested from a corpus of {}",
            config.train,
            config.test,
            corpus.len()
        )));
    }
    let trials = (0..config.trials)
        .into_par_iter()
        .map(|t| run_trial(corpus, config, t))
        .collect::<Result<Vec<_>, _>>()?;

    let column = |f: &dyn Fn(&TrialReport) -> f64| Stat::of(&trials.iter().map(f).collect::<Vec<_>>());
    let recall_at = RECALL_KS
        .iter()
        .enumerate()
        .map(|(i, &k)| (k, column(&|t| t.recall_at[i].1)))
        .collect();
    Ok(EvalReport {
        config: config.clone(),
        accuracy: column(&|t| t.accuracy),
        recall_at,
        comparisons: column(&|t| t.mean_comparisons),
        baseline_comparisons: column(&|t| t.mean_baseline_comparisons),
        window_comparisons: column(&|t| t.mean_window_comparisons),
        trials,
    })
}

fn run_trial(corpus: &Corpus, config: &EvalConfig, t: usize) -> Result<TrialReport, EvalError> {
    let key = t.to_string();
    let trial_seed = derive_seed(config.build.seed, &["trial", &key]);
    let mut names: Vec<&str> = corpus.stories.iter().map(|s| s.name.as_str()).collect();
    names.shuffle(&mut substream(config.build.seed, &["trial", &key]));
    let train = corpus.subset(names[..config.train].iter().copied());
    let test = corpus.subset(names[config.train..config.train + config.test].iter().copied());

    let params = BuildParams {
        seed: trial_seed,
        ..config.build.clone()
    };
    let model = build(&train, &params)?;
    let store = BaselineStore::from_model(&model);
    let widest = RECALL_KS.iter().copied().max().unwrap_or(1).max(config.k);

    let mut stories = Vec::with_capacity(test.len());
    let mut hits_at = vec![(0usize, 0usize); RECALL_KS.len()];
    let (mut hits, mut wanted) = (0usize, 0usize);
    for story in &test.stories {
        let r = model.retrieve(story)?;
        let base = linear_retrieve_with(&r.story_bag, &store, widest, config.score);
        let ranked: Vec<&str> = base.stories.iter().map(|(n, _)| n.as_str()).collect();
        let hit_count = |k: usize| ranked.iter().take(k).filter(|n| r.stories.contains(**n)).count();
        for (slot, &k) in hits_at.iter_mut().zip(RECALL_KS.iter()) {
            slot.0 += hit_count(k);
            slot.1 += ranked.len().min(k);
        }
        let top: Vec<String> = ranked.iter().take(config.k).map(|s| s.to_string()).collect();
        let h = hit_count(config.k);
        hits += h;
        wanted += top.len();
        stories.push(StoryOutcome {
            story: story.name.clone(),
            schemas: r.schemas.len(),
            retrieved: r.stories.len(),
            baseline: top,
            hits: h,
            comparisons: r.comparisons,
            window_comparisons: r.window_comparisons,
            baseline_comparisons: base.comparisons,
        });
    }

    let n = stories.len() as f64;
    let mean = |f: &dyn Fn(&StoryOutcome) -> usize| stories.iter().map(f).sum::<usize>() as f64 / n;
    Ok(TrialReport {
        trial: t,
        trial_seed,
        accuracy: ratio(hits, wanted),
        recall_at: RECALL_KS
            .iter()
            .zip(&hits_at)
            .map(|(&k, &(h, w))| (k, ratio(h, w)))
            .collect(),
        mean_comparisons: mean(&|s| s.comparisons),
        mean_baseline_comparisons: mean(&|s| s.baseline_comparisons),
        mean_window_comparisons: mean(&|s| s.window_comparisons),
        mean_retrieved: mean(&|s| s.retrieved),
        stories,
    })
}

/// Nothing to find counts as found.
fn ratio(hits: usize, wanted: usize) -> f64 {
    if wanted == 0 {
        1.0
    } else {
        hits as f64 / wanted as f64
    }
}

/// Column order of [`EvalReport::trials_csv`].
pub const TRIAL_COLUMNS: [&str; 10] = [
    "trial",
    "trial_seed",
    "accuracy",
    "recall_k1",
    "recall_k3",
    "recall_k5",
    "comparisons",
    "baseline_comparisons",
    "window_comparisons",
    "retrieved",
];

pub const STORY_COLUMNS: [&str; 9] = [
    "trial",
    "story",
    "schemas",
    "retrieved",
    "hits",
    "baseline",
    "comparisons",
    "baseline_comparisons",
    "window_comparisons",
];

fn f(x: f64) -> String {
    format!("{x:.6}")
}

impl EvalReport {
    /// One row per trial, then `mean` and `stderr` rows.
    pub fn trials_csv(&self) -> Result<String, EvalError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let err = |e: csv::Error| EvalError::Report(e.to_string());
        w.write_record(TRIAL_COLUMNS).map_err(err)?;
        for t in &self.trials {
            let mut row = vec![t.trial.to_string(), t.trial_seed.to_string(), f(t.accuracy)];
            row.extend(t.recall_at.iter().map(|(_, r)| f(*r)));
            row.extend([
                f(t.mean_comparisons),
                f(t.mean_baseline_comparisons),
                f(t.mean_window_comparisons),
                f(t.mean_retrieved),
            ]);
            w.write_record(&row).map_err(err)?;
        }
        let retrieved = Stat::of(&self.trials.iter().map(|t| t.mean_retrieved).collect::<Vec<_>>());
        let stats: Vec<Stat> = std::iter::once(self.accuracy)
            .chain(self.recall_at.iter().map(|(_, s)| *s))
            .chain([
                self.comparisons,
                self.baseline_comparisons,
                self.window_comparisons,
                retrieved,
            ])
            .collect();
        for (label, pick) in [
            ("mean", (|s: &Stat| Some(s.mean)) as fn(&Stat) -> Option<f64>),
            ("stderr", |s: &Stat| s.stderr),
        ] {
            let mut row = vec![label.to_string(), String::new()];
            row.extend(stats.iter().map(|s| pick(s).map(f).unwrap_or_default()));
            w.write_record(&row).map_err(err)?;
        }
        into_string(w)
    }

    /// One row per test story per trial; `baseline` is `;`-separated.
    pub fn stories_csv(&self) -> Result<String, EvalError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let err = |e: csv::Error| EvalError::Report(e.to_string());
        w.write_record(STORY_COLUMNS).map_err(err)?;
        for t in &self.trials {
            for s in &t.stories {
                w.write_record([
                    t.trial.to_string(),
                    s.story.clone(),
                    s.schemas.to_string(),
                    s.retrieved.to_string(),
                    s.hits.to_string(),
                    s.baseline.join(";"),
                    s.comparisons.to_string(),
                    s.baseline_comparisons.to_string(),
                    s.window_comparisons.to_string(),
                ])
                .map_err(err)?;
            }
        }
        into_string(w)
    }

    /// `key: value` lines, fixed order.
    pub fn to_text(&self) -> String {
        let c = &self.config;
        let mut out = String::new();
        let mut line = |k: &str, v: String| out.push_str(&format!("{k}: {v}\n"));
        line("train", c.train.to_string());
        line("test", c.test.to_string());
        line("trials", c.trials.to_string());
        line("k", c.k.to_string());
        line("score", format!("{:?}", c.score).to_lowercase());
        line("num_windows", c.build.num_windows.to_string());
        line("window_size", c.build.window_size.to_string());
        line("theta", c.build.theta.to_string());
        line("seed", c.build.seed.to_string());
        line("accuracy", self.accuracy.fmt());
        for (k, s) in &self.recall_at {
            line(&format!("recall_k{k}"), s.fmt());
        }
        line("comparisons", self.comparisons.fmt());
        line("baseline_comparisons", self.baseline_comparisons.fmt());
        line("window_comparisons", self.window_comparisons.fmt());
        line(
            "comparisons_per_training_story",
            format!("{:.4}", self.comparisons.mean / c.train as f64),
        );
        out
    }

    /// The headline rows: accuracy, then the two comparison counts.
    pub fn table(&self) -> String {
        format!(
            "{:<28}{:>20}\n{:<28}{:>20}\n{:<28}{:>20}\n{:<28}{:>20}\n",
            "measure",
            "value",
            format!("accuracy (k={})", self.config.k),
            self.accuracy.fmt(),
            "comparisons (schemas)",
            self.comparisons.fmt(),
            "comparisons (baseline)",
            self.baseline_comparisons.fmt(),
        )
    }
}

fn into_string(w: csv::Writer<Vec<u8>>) -> Result<String, EvalError> {
    let bytes = w
        .into_inner()
        .map_err(|e| EvalError::Report(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| EvalError::Report(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{generate_synthetic, SyntheticParams};

    fn small_corpus() -> Corpus {
        let params = SyntheticParams {
            num_stories: 14,
            min_statements: 5,
            max_statements: 15,
            ..Default::default()
        };
        generate_synthetic(&params, 3).unwrap().0
    }

    fn small_config() -> EvalConfig {
        EvalConfig {
            train: 10,
            test: 4,
            trials: 3,
            build: BuildParams {
                num_windows: 8,
                window_size: 5,
                ..Default::default()
            },
            ..Default::default()
        }
    }

    #[test]
    fn stat_of_values() {
        let s = Stat::of(&[1.0, 2.0, 3.0]);
        assert_eq!(s.mean, 2.0);
        assert!((s.stderr.unwrap() - (1.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert_eq!(Stat::of(&[5.0]).stderr, None);
    }

    #[test]
    fn bad_splits() {
        let corpus = small_corpus();
        let mut c = small_config();
        c.train = 20;
        assert!(matches!(run_eval(&corpus, &c), Err(EvalError::Split(_))));
        c.train = 0;
        assert!(matches!(run_eval(&corpus, &c), Err(EvalError::Split(_))));
    }

    #[test]
    fn baseline_scans_the_whole_store() {
        let report = run_eval(&small_corpus(), &small_config()).unwrap();
        assert_eq!(report.trials.len(), 3);
        for t in &report.trials {
            assert_eq!(t.stories.len(), 4);
            assert!(t.stories.iter().all(|s| s.baseline_comparisons == 10));
            assert!((0.0..=1.0).contains(&t.accuracy));
        }
        assert_eq!(report.baseline_comparisons.mean, 10.0);
    }

    #[test]
    fn reports_are_reproducible() {
        let a = run_eval(&small_corpus(), &small_config()).unwrap();
        let b = run_eval(&small_corpus(), &small_config()).unwrap();
        assert_eq!(a.trials_csv().unwrap(), b.trials_csv().unwrap());
        assert_eq!(a.stories_csv().unwrap(), b.stories_csv().unwrap());
        assert_eq!(a.to_text(), b.to_text());
        let csv = a.trials_csv().unwrap();
        assert!(csv.starts_with(&TRIAL_COLUMNS.join(",")));
        assert_eq!(csv.lines().count(), 1 + 3 + 2);
    }
}
