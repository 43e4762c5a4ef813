//! Greedy description-length chunking.
//!
//! Candidates are intersections (two or more tokens) of pairs of current
//! node bags, where nodes are the instances plus every concept created so
//! far, all in rewritten form. A candidate `c` contained in `k` nodes has
//! gain `k|c| - (|c| + k)`: each containing node trades `|c|` elements for
//! one reference and the new concept costs `|c|`. The best candidate is
//! materialized and every containing node rewritten, until no candidate
//! has positive gain.
//!
//! A candidate's support never grows once it is in the pool (rewrites only
//! remove its tokens from nodes), so stored gains are upper bounds and the
//! pool is kept in a lazily re-evaluated max-heap.
//!
//! Small node sets use every pair. Large ones (the window level, with tens
//! of thousands of bags) sample partner nodes through the token postings.

use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, HashMap, HashSet};
use std::hash::{Hash, Hasher};

use rand::seq::SliceRandom;
use rand::Rng;

use super::Ontology;
use crate::bag::FeatureBag;
use crate::rng::{substream, token_hash, Stream};

#[derive(Debug, Clone, PartialEq)]
pub struct ChunkConfig {
    /// Prefix of generated concept ids.
    pub id_prefix: String,
    /// Up to this many input bags, every pair of nodes is intersected.
    pub exhaustive_limit: usize,
    /// Sampled partners per node in the large-input regime.
    pub partners_per_node: usize,
    /// Rewritten nodes re-paired after each accepted concept (sampled regime).
    pub resample_cap: usize,
    pub seed: u64,
}

impl Default for ChunkConfig {
    fn default() -> Self {
        ChunkConfig {
            id_prefix: "C".into(),
            exhaustive_limit: 400,
            partners_per_node: 6,
            resample_cap: 64,
            seed: 0,
        }
    }
}

/// Description length before chunking and after each accepted concept.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ChunkTrace {
    pub dl: Vec<usize>,
    pub gains: Vec<usize>,
}

/// Chunks anonymous bags; instances are named `i0`, `i1`, ...
pub fn chunk(bags: &[FeatureBag]) -> Ontology {
    let instances = bags
        .iter()
        .enumerate()
        .map(|(i, b)| (format!("i{i}"), b.clone()))
        .collect();
    chunk_instances(instances, &ChunkConfig::default()).0
}

pub fn chunk_instances(
    instances: Vec<(String, FeatureBag)>,
    config: &ChunkConfig,
) -> (Ontology, ChunkTrace) {
    let mut chunker = Chunker::new(&instances, config);
    chunker.run();
    chunker.finish(instances, config)
}

struct Candidate {
    tokens: Vec<u32>,
}

#[derive(PartialEq, Eq)]
struct Entry {
    gain: i64,
    closure_size: u32,
    closure_hash: u64,
    cand: u32,
    exact_at: Option<u32>,
}

impl Entry {
    fn key(&self) -> (i64, u32, Reverse<u64>, Reverse<u32>) {
        (self.gain, self.closure_size, Reverse(self.closure_hash), Reverse(self.cand))
    }
}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

struct Chunker {
    /// Per token: base closure (sorted base token ids). Base tokens map to themselves.
    closure: Vec<Vec<u32>>,
    closure_hash: Vec<u64>,
    base_count: usize,
    /// Node bags, sorted token ids. Nodes `0..instances` are instances.
    bags: Vec<Vec<u32>>,
    /// For concept nodes, their token.
    node_token: Vec<Option<u32>>,
    /// Token -> sorted node ids containing it.
    postings: Vec<Vec<u32>>,
    candidates: Vec<Candidate>,
    seen: HashSet<u64>,
    heap: BinaryHeap<Entry>,
    iteration: u32,
    dl: usize,
    trace: ChunkTrace,
    exhaustive: bool,
    config: ChunkConfig,
    rng: Stream,
    mark: Vec<u32>,
    stamp: u32,
}

impl Chunker {
    fn new(instances: &[(String, FeatureBag)], config: &ChunkConfig) -> Self {
        let mut ids: HashMap<&str, u32> = HashMap::new();
        let mut names: Vec<&str> = Vec::new();
        let mut bags = Vec::with_capacity(instances.len());
        for (_, bag) in instances {
            let mut b: Vec<u32> = bag
                .iter()
                .map(|t| {
                    *ids.entry(t).or_insert_with(|| {
                        names.push(t);
                        (names.len() - 1) as u32
                    })
                })
                .collect();
            b.sort_unstable();
            bags.push(b);
        }
        let base_count = names.len();
        let closure = (0..base_count as u32).map(|t| vec![t]).collect();
        let closure_hash = names.iter().map(|n| token_hash(n)).collect();
        let mut postings: Vec<Vec<u32>> = vec![Vec::new(); base_count];
        for (n, b) in bags.iter().enumerate() {
            for &t in b {
                postings[t as usize].push(n as u32);
            }
        }
        let dl = bags.iter().map(Vec::len).sum();
        Chunker {
            closure,
            closure_hash,
            base_count,
            node_token: vec![None; bags.len()],
            bags,
            postings,
            candidates: Vec::new(),
            seen: HashSet::new(),
            heap: BinaryHeap::new(),
            iteration: 0,
            dl,
            trace: ChunkTrace {
                dl: vec![dl],
                gains: Vec::new(),
            },
            exhaustive: instances.len() <= config.exhaustive_limit,
            config: config.clone(),
            rng: substream(config.seed, &["chunk", &config.id_prefix]),
            mark: vec![0; base_count],
            stamp: 0,
        }
    }

    fn run(&mut self) {
        let all: Vec<u32> = (0..self.bags.len() as u32).collect();
        self.pair_up(&all, None);
        while let Some(top) = self.heap.pop() {
            if top.exact_at == Some(self.iteration) {
                self.accept(top.cand, top.gain);
                continue;
            }
            let tokens = std::mem::take(&mut self.candidates[top.cand as usize].tokens);
            let gain = self.support(&tokens).map_or(i64::MIN, |s| gain(s.len(), tokens.len()));
            if gain > 0 {
                self.candidates[top.cand as usize].tokens = tokens;
                self.heap.push(Entry {
                    gain,
                    exact_at: Some(self.iteration),
                    ..top
                });
            }
        }
    }

    /// Nodes whose bag contains all of `tokens`, or `None` if the candidate
    /// duplicates an existing concept's definition or has support < 2.
    fn support(&self, tokens: &[u32]) -> Option<Vec<u32>> {
        let mut order: Vec<u32> = tokens.to_vec();
        order.sort_by_key(|&t| self.postings[t as usize].len());
        let mut nodes = self.postings[order[0] as usize].clone();
        for &t in &order[1..] {
            if nodes.len() < 2 {
                return None;
            }
            nodes.retain(|&n| self.bags[n as usize].binary_search(&t).is_ok());
        }
        if nodes.len() < 2 {
            return None;
        }
        let duplicate = nodes
            .iter()
            .any(|&n| self.node_token[n as usize].is_some() && self.bags[n as usize].len() == tokens.len());
        (!duplicate).then_some(nodes)
    }

    fn accept(&mut self, cand: u32, gain: i64) {
        let tokens = std::mem::take(&mut self.candidates[cand as usize].tokens);
        let supporters = self.support(&tokens).expect("exact entry has support");
        debug_assert_eq!(self::gain(supporters.len(), tokens.len()), gain);

        let token = self.closure.len() as u32;
        let mut cl = self.expand(&tokens);
        cl.sort_unstable();
        self.closure_hash.push(self.hash_of(&cl));
        self.closure.push(cl);

        let node = self.bags.len() as u32;
        self.bags.push(tokens.clone());
        self.node_token.push(Some(token));

        for &n in &supporters {
            let bag = &mut self.bags[n as usize];
            bag.retain(|t| tokens.binary_search(t).is_err());
            bag.push(token); // newest token id, so the bag stays sorted
        }
        for &t in &tokens {
            let post = &mut self.postings[t as usize];
            post.retain(|n| supporters.binary_search(n).is_err());
            post.push(node);
        }
        self.postings.push(supporters.clone());

        self.dl -= gain as usize;
        self.trace.dl.push(self.dl);
        self.trace.gains.push(gain as usize);
        self.iteration += 1;

        let mut affected = supporters;
        affected.push(node);
        self.pair_up(&affected, Some(token));
    }

    /// Adds candidates from pairs involving `nodes`.
    fn pair_up(&mut self, nodes: &[u32], fresh_token: Option<u32>) {
        if self.exhaustive {
            let inside: HashSet<u32> = nodes.iter().copied().collect();
            let total = self.bags.len() as u32;
            for &a in nodes {
                for b in 0..total {
                    if a == b || (inside.contains(&b) && b < a) {
                        continue;
                    }
                    self.add_pair(a, b);
                }
            }
            return;
        }
        let mut chosen: Vec<u32> = nodes.to_vec();
        let cap = if fresh_token.is_some() {
            self.config.resample_cap
        } else {
            usize::MAX
        };
        if chosen.len() > cap {
            chosen.shuffle(&mut self.rng);
            chosen.truncate(cap);
            chosen.sort_unstable();
        }
        for a in chosen {
            for _ in 0..self.config.partners_per_node {
                let bag = &self.bags[a as usize];
                if bag.is_empty() {
                    break;
                }
                let via = match fresh_token {
                    Some(t) if bag.binary_search(&t).is_ok() && self.rng.gen_bool(0.5) => t,
                    _ => bag[self.rng.gen_range(0..bag.len())],
                };
                let post = &self.postings[via as usize];
                if post.len() < 2 {
                    continue;
                }
                let b = post[self.rng.gen_range(0..post.len())];
                if b != a {
                    self.add_pair(a, b);
                }
            }
        }
    }

    fn add_pair(&mut self, a: u32, b: u32) {
        let tokens = intersect(&self.bags[a as usize], &self.bags[b as usize]);
        if tokens.len() < 2 {
            return;
        }
        let mut h = std::collections::hash_map::DefaultHasher::new();
        tokens.hash(&mut h);
        if !self.seen.insert(h.finish()) {
            return;
        }
        let cl = self.expand(&tokens);
        let closure_hash = self.hash_of(&cl);
        let bound = tokens
            .iter()
            .map(|&t| self.postings[t as usize].len())
            .min()
            .expect("non-empty");
        let upper = gain(bound, tokens.len());
        if upper <= 0 {
            return;
        }
        let cand = self.candidates.len() as u32;
        self.heap.push(Entry {
            gain: upper,
            closure_size: cl.len() as u32,
            closure_hash,
            cand,
            exact_at: None,
        });
        self.candidates.push(Candidate { tokens });
    }

    /// Base-token closure of a token set (unsorted, duplicate-free).
    fn expand(&mut self, tokens: &[u32]) -> Vec<u32> {
        self.stamp = self.stamp.wrapping_add(1);
        if self.stamp == 0 {
            self.mark.iter_mut().for_each(|m| *m = 0);
            self.stamp = 1;
        }
        let mut out = Vec::new();
        for &t in tokens {
            for &base in &self.closure[t as usize] {
                let m = &mut self.mark[base as usize];
                if *m != self.stamp {
                    *m = self.stamp;
                    out.push(base);
                }
            }
        }
        out
    }

    fn hash_of(&self, closure: &[u32]) -> u64 {
        closure
            .iter()
            .fold(0u64, |acc, &t| acc.wrapping_add(self.closure_hash[t as usize]))
    }

    fn finish(
        self,
        instances: Vec<(String, FeatureBag)>,
        config: &ChunkConfig,
    ) -> (Ontology, ChunkTrace) {
        // Base names in interning order.
        let mut names: Vec<String> = Vec::with_capacity(self.closure.len());
        let mut seen: HashSet<&str> = HashSet::new();
        for (_, bag) in &instances {
            for t in bag.iter() {
                if seen.insert(t) {
                    names.push(t.to_string());
                }
            }
        }
        let mut used_ids: HashSet<String> = HashSet::new();
        for token in self.base_count..self.closure.len() {
            let mut id = format!("{}{:016x}", config.id_prefix, self.closure_hash[token]);
            let mut n = 1;
            while used_ids.contains(&id) {
                id = format!("{}{:016x}-{n}", config.id_prefix, self.closure_hash[token]);
                n += 1;
            }
            used_ids.insert(id.clone());
            names.push(id);
        }
        let render = |bag: &[u32]| -> FeatureBag { bag.iter().map(|&t| names[t as usize].clone()).collect() };
        let n_inst = instances.len();
        let concepts: Vec<(String, FeatureBag)> = (n_inst..self.bags.len())
            .map(|node| {
                let token = self.node_token[node].expect("concept node");
                (names[token as usize].clone(), render(&self.bags[node]))
            })
            .collect();
        let rewritten: Vec<(String, FeatureBag)> = instances
            .into_iter()
            .enumerate()
            .map(|(i, (id, _))| (id, render(&self.bags[i])))
            .collect();
        let ontology = Ontology::new(concepts, rewritten).expect("chunker output is a DAG");
        (ontology, self.trace)
    }
}

fn gain(support: usize, size: usize) -> i64 {
    let (k, c) = (support as i64, size as i64);
    k * c - (c + k)
}

fn intersect(a: &[u32], b: &[u32]) -> Vec<u32> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bag(tokens: &[&str]) -> FeatureBag {
        tokens.iter().copied().collect()
    }

    #[test]
    fn shared_triple_becomes_one_concept() {
        let bags = [
            bag(&["a", "b", "c", "d"]),
            bag(&["a", "b", "c", "e"]),
            bag(&["a", "b", "c", "f"]),
        ];
        let instances = bags.iter().enumerate().map(|(i, b)| (format!("i{i}"), b.clone())).collect();
        let (o, trace) = chunk_instances(instances, &ChunkConfig::default());
        assert_eq!(o.concepts().len(), 1);
        assert_eq!(o.concepts()[0].closure(), &bag(&["a", "b", "c"]));
        assert_eq!(o.description_length(), 9);
        assert_eq!(trace.dl, vec![12, 9]);
        assert_eq!(trace.gains, vec![3]);
    }

    #[test]
    fn disjoint_bags_stay_raw() {
        let o = chunk(&[bag(&["a", "b"]), bag(&["c", "d"]), bag(&["e", "f", "g"])]);
        assert!(o.concepts().is_empty());
        assert_eq!(o.description_length(), 7);
    }

    #[test]
    fn identical_pair() {
        let o = chunk(&[bag(&["a", "b", "c"]), bag(&["a", "b", "c"])]);
        assert_eq!(o.concepts().len(), 1);
        assert_eq!(o.description_length(), 5);
    }

    #[test]
    fn nested_concepts_form_dag() {
        let o = chunk(&[
            bag(&["a", "b", "c", "d", "x"]),
            bag(&["a", "b", "c", "d", "y"]),
            bag(&["a", "b", "c", "d", "z"]),
            bag(&["a", "b", "p", "q"]),
            bag(&["a", "b", "r", "s"]),
            bag(&["a", "b", "t", "u"]),
        ]);
        assert!(o.concepts().len() >= 2);
        for (id, b) in o.instances() {
            let _ = id;
            assert!(!o.expand(b).is_empty());
        }
        let inherits_multi = o.concepts().iter().any(|c| !o.descendants(&c.id).is_empty());
        assert!(inherits_multi);
    }

    #[test]
    fn ids_are_content_derived_and_stable() {
        let bags = [bag(&["a", "b", "c", "d"]), bag(&["a", "b", "c", "e"])];
        let o1 = chunk(&bags);
        let o2 = chunk(&[bag(&["a", "b", "c", "e"]), bag(&["a", "b", "c", "d"])]);
        assert_eq!(o1.concepts()[0].id, o2.concepts()[0].id);
        assert!(o1.concepts()[0].id.starts_with('C'));
    }

    #[test]
    fn sampled_regime_compresses_duplicates() {
        let mut bags = Vec::new();
        for i in 0..60 {
            let mut b = bag(&["a", "b", "c", "d", "e"]);
            b.insert(format!("u{i}"));
            bags.push((format!("i{i}"), b));
        }
        let config = ChunkConfig {
            exhaustive_limit: 10,
            ..Default::default()
        };
        let (o, trace) = chunk_instances(bags, &config);
        assert_eq!(o.concepts().len(), 1);
        assert_eq!(*trace.dl.last().unwrap(), 5 + 60 * 2);
    }
}
