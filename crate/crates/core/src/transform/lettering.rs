//! Canonical lettering of repeated relations.
//!
//! When a relation occurs in several plain statements of a window, each
//! occurrence gets a letter. The assignment must not depend on entity
//! names or statement order, otherwise isomorphic windows would produce
//! different bags. Occurrences are ordered by colour refinement over the
//! statement/symbol incidence graph; occurrences that refinement cannot
//! separate are resolved by trying every order and keeping the one whose
//! feature list is smallest.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use itertools::Itertools;

use crate::corpus::Proposition;

/// Upper bound on tie orders tried per window.
const MAX_TIE_ORDERS: usize = 5040;

pub(super) fn canonical_letters<F>(
    plain: &[&Proposition],
    labels: &BTreeMap<&str, &Proposition>,
    features: F,
) -> Vec<u32>
where
    F: Fn(&[u32]) -> BTreeSet<String>,
{
    let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, p) in plain.iter().enumerate() {
        groups.entry(p.relation.as_str()).or_default().push(i);
    }
    groups.retain(|_, members| members.len() > 1);
    if groups.is_empty() {
        return vec![0; plain.len()];
    }

    let colors = refine(plain, labels);

    // Each group sorted by colour; runs of equal colour are tie blocks.
    let mut ordered: Vec<Vec<usize>> = Vec::new();
    let mut blocks: Vec<(usize, usize, usize)> = Vec::new(); // (group, start, len)
    for members in groups.values() {
        let mut m = members.clone();
        m.sort_by_key(|&i| (colors[i], plain[i].to_string()));
        let g = ordered.len();
        let mut start = 0;
        while start < m.len() {
            let mut end = start + 1;
            while end < m.len() && colors[m[end]] == colors[m[start]] {
                end += 1;
            }
            if end - start > 1 {
                blocks.push((g, start, end - start));
            }
            start = end;
        }
        ordered.push(m);
    }

    let assign = |ordered: &[Vec<usize>]| -> Vec<u32> {
        let mut letters = vec![0; plain.len()];
        for members in ordered {
            for (pos, &i) in members.iter().enumerate() {
                letters[i] = pos as u32;
            }
        }
        letters
    };

    let orders: usize = blocks
        .iter()
        .map(|&(_, _, len)| (1..=len).product::<usize>())
        .try_fold(1usize, |acc, n| acc.checked_mul(n))
        .unwrap_or(usize::MAX);
    if blocks.is_empty() || orders > MAX_TIE_ORDERS {
        // Fallback for pathological windows: ties keep rendered-line order.
        return assign(&ordered);
    }

    let block_perms: Vec<Vec<Vec<usize>>> = blocks
        .iter()
        .map(|&(g, start, len)| {
            ordered[g][start..start + len]
                .iter()
                .copied()
                .permutations(len)
                .collect()
        })
        .collect();

    let mut best: Option<(Vec<String>, Vec<u32>)> = None;
    for choice in block_perms.iter().map(|p| p.iter()).multi_cartesian_product() {
        let mut trial = ordered.clone();
        for (&(g, start, len), perm) in blocks.iter().zip(&choice) {
            trial[g][start..start + len].copy_from_slice(perm);
        }
        let letters = assign(&trial);
        let key: Vec<String> = features(&letters).into_iter().collect();
        if best.as_ref().is_none_or(|(k, _)| key < *k) {
            best = Some((key, letters));
        }
    }
    best.expect("at least one order").1
}

/// Stable colours for the plain statements, invariant under renaming of
/// entities and labels.
fn refine(plain: &[&Proposition], labels: &BTreeMap<&str, &Proposition>) -> Vec<usize> {
    // Statement nodes: plain first, then label definitions.
    struct Node<'a> {
        kind: u8,
        relation: &'a str,
        label: Option<&'a str>,
        args: &'a [String],
    }
    let nodes: Vec<Node> = plain
        .iter()
        .map(|p| Node {
            kind: 0,
            relation: &p.relation,
            label: None,
            args: &p.args,
        })
        .chain(labels.iter().map(|(l, p)| Node {
            kind: 1,
            relation: &p.relation,
            label: Some(l),
            args: &p.args,
        }))
        .collect();

    let mut symbols: Vec<&str> = nodes
        .iter()
        .flat_map(|n| n.label.into_iter().chain(n.args.iter().map(String::as_str)))
        .collect();
    symbols.sort_unstable();
    symbols.dedup();
    let sym_index: HashMap<&str, usize> = symbols.iter().enumerate().map(|(i, s)| (*s, i)).collect();

    // incidences[symbol] = (statement, slot); slot 0 is the label position
    let mut incidences: Vec<Vec<(usize, usize)>> = vec![Vec::new(); symbols.len()];
    for (si, n) in nodes.iter().enumerate() {
        if let Some(l) = n.label {
            incidences[sym_index[l]].push((si, 0));
        }
        for (j, a) in n.args.iter().enumerate() {
            incidences[sym_index[a.as_str()]].push((si, j + 1));
        }
    }

    let mut stmt_color = rank(nodes.iter().map(|n| (n.kind, n.relation, n.args.len())).collect());
    let mut sym_color = rank(
        symbols
            .iter()
            .map(|s| labels.contains_key(s) as u8)
            .collect(),
    );
    let classes = |c: &[usize]| c.iter().collect::<BTreeSet<_>>().len();
    let mut count = classes(&stmt_color) + classes(&sym_color);
    for _ in 0..=nodes.len() + symbols.len() {
        let stmt_sig: Vec<(usize, Vec<usize>, usize)> = nodes
            .iter()
            .enumerate()
            .map(|(i, n)| {
                let args = n.args.iter().map(|a| sym_color[sym_index[a.as_str()]]).collect();
                let label = n.label.map_or(usize::MAX, |l| sym_color[sym_index[l]]);
                (stmt_color[i], args, label)
            })
            .collect();
        let sym_sig: Vec<(usize, Vec<(usize, usize)>)> = incidences
            .iter()
            .enumerate()
            .map(|(s, inc)| {
                let mut v: Vec<(usize, usize)> = inc.iter().map(|&(st, slot)| (stmt_color[st], slot)).collect();
                v.sort_unstable();
                (sym_color[s], v)
            })
            .collect();
        stmt_color = rank(stmt_sig);
        sym_color = rank(sym_sig);
        let next = classes(&stmt_color) + classes(&sym_color);
        if next == count {
            break;
        }
        count = next;
    }
    stmt_color.truncate(plain.len());
    stmt_color
}

/// Dense ranks of `keys` in sorted order.
fn rank<K: Ord + Clone>(keys: Vec<K>) -> Vec<usize> {
    let sorted: Vec<K> = keys.iter().cloned().sorted().dedup().collect();
    keys.iter()
        .map(|k| sorted.binary_search(k).expect("key present"))
        .collect()
}
