use std::collections::BTreeSet;
use std::fmt;

/// A set of opaque tokens. Overlap between bags is exact-token equality
/// and nothing else.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FeatureBag(BTreeSet<String>);

impl FeatureBag {
    pub fn new() -> Self {
        FeatureBag(BTreeSet::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, token: &str) -> bool {
        self.0.contains(token)
    }

    pub fn insert(&mut self, token: impl Into<String>) -> bool {
        self.0.insert(token.into())
    }

    pub fn remove(&mut self, token: &str) -> bool {
        self.0.remove(token)
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> + '_ {
        self.0.iter().map(String::as_str)
    }

    pub fn extend_from(&mut self, other: &FeatureBag) {
        self.0.extend(other.0.iter().cloned());
    }

    pub fn intersection_size(&self, other: &FeatureBag) -> usize {
        let (small, large) = if self.len() <= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        small.iter().filter(|t| large.contains(t)).count()
    }

    pub fn is_subset(&self, other: &FeatureBag) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn difference(&self, other: &FeatureBag) -> FeatureBag {
        FeatureBag(self.0.difference(&other.0).cloned().collect())
    }

    pub fn as_set(&self) -> &BTreeSet<String> {
        &self.0
    }

    pub fn into_set(self) -> BTreeSet<String> {
        self.0
    }
}

impl<S: Into<String>> FromIterator<S> for FeatureBag {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        FeatureBag(iter.into_iter().map(Into::into).collect())
    }
}

impl IntoIterator for FeatureBag {
    type Item = String;
    type IntoIter = std::collections::btree_set::IntoIter<String>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.into_iter()
    }
}

impl<'a> IntoIterator for &'a FeatureBag {
    type Item = &'a String;
    type IntoIter = std::collections::btree_set::Iter<'a, String>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

impl From<BTreeSet<String>> for FeatureBag {
    fn from(set: BTreeSet<String>) -> Self {
        FeatureBag(set)
    }
}

impl fmt::Display for FeatureBag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, t) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            f.write_str(t)?;
        }
        f.write_str("}")
    }
}
