//! Linear retrieval baseline: every stored story bag is scored against the
//! probe.

use crate::bag::FeatureBag;
use crate::model::Model;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Score {
    #[default]
    Overlap,
    Jaccard,
}

impl Score {
    pub fn score(self, a: &FeatureBag, b: &FeatureBag) -> f64 {
        let shared = a.intersection_size(b) as f64;
        match self {
            Score::Overlap => shared,
            Score::Jaccard => {
                let union = (a.len() + b.len()) as f64 - shared;
                if union == 0.0 {
                    0.0
                } else {
                    shared / union
                }
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BaselineStore {
    bags: Vec<(String, FeatureBag)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearRetrieval {
    /// Best first; equal scores by name.
    pub stories: Vec<(String, f64)>,
    pub comparisons: usize,
}

impl BaselineStore {
    pub fn new(mut bags: Vec<(String, FeatureBag)>) -> Self {
        bags.sort_by(|a, b| a.0.cmp(&b.0));
        BaselineStore { bags }
    }

    /// The training story bags a model was built from.
    pub fn from_model(model: &Model) -> Self {
        BaselineStore::new(model.training_bags())
    }

    pub fn len(&self) -> usize {
        self.bags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bags.is_empty()
    }

    pub fn bags(&self) -> &[(String, FeatureBag)] {
        &self.bags
    }
}

pub fn linear_retrieve(probe: &FeatureBag, store: &BaselineStore, k: usize) -> LinearRetrieval {
    linear_retrieve_with(probe, store, k, Score::Overlap)
}

pub fn linear_retrieve_with(
    probe: &FeatureBag,
    store: &BaselineStore,
    k: usize,
    score: Score,
) -> LinearRetrieval {
    let mut scored: Vec<(String, f64)> = store
        .bags
        .iter()
        .map(|(name, bag)| (name.clone(), score.score(probe, bag)))
        .collect();
    // A story sharing nothing with the probe is not retrieved.
    scored.retain(|(_, s)| *s > 0.0);
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    scored.truncate(k);
    LinearRetrieval {
        stories: scored,
        comparisons: store.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bag(tokens: &[&str]) -> FeatureBag {
        tokens.iter().copied().collect()
    }

    fn store() -> BaselineStore {
        BaselineStore::new(vec![
            ("s3".into(), bag(&["a", "b", "c"])),
            ("s1".into(), bag(&["a", "x"])),
            ("s2".into(), bag(&["a", "y"])),
            ("s4".into(), bag(&["z"])),
        ])
    }

    #[test]
    fn identical_bag_ranks_first() {
        let r = linear_retrieve(&bag(&["a", "b", "c"]), &store(), 3);
        assert_eq!(r.stories[0], ("s3".to_string(), 3.0));
        assert_eq!(r.comparisons, 4);
    }

    #[test]
    fn ties_break_by_name() {
        let r = linear_retrieve(&bag(&["a"]), &store(), 3);
        let names: Vec<&str> = r.stories.iter().map(|(n, _)| n.as_str()).collect();
        assert_eq!(names, ["s1", "s2", "s3"]);
    }

    #[test]
    fn comparisons_equal_store_size_even_for_empty_probe() {
        let r = linear_retrieve(&FeatureBag::new(), &store(), 1);
        assert_eq!(r.comparisons, 4);
        assert!(r.stories.is_empty());
    }

    #[test]
    fn jaccard_is_symmetric_and_bounded() {
        let (a, b) = (bag(&["a", "b"]), bag(&["b", "c", "d"]));
        let s = Score::Jaccard;
        assert_eq!(s.score(&a, &b), s.score(&b, &a));
        assert_eq!(s.score(&a, &b), 0.25);
        assert_eq!(s.score(&a, &a), 1.0);
    }
}
