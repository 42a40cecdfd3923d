//! Concept taxonomy backing Wu-Palmer similarity.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::error::{Error, Result};

/// A rooted DAG of concept nodes plus a surface-word mapping.
///
/// Depths and ancestor sets are precomputed at construction, so lookups are
/// read-only and safe for concurrent use during parallel evaluation.
#[derive(Debug, Clone)]
pub struct Taxonomy {
    root: String,
    /// node -> depth; the root has depth 1, every other node is
    /// 1 + the minimum depth over its parents.
    depths: HashMap<String, usize>,
    /// node -> ancestors including the node itself.
    ancestors: HashMap<String, BTreeSet<String>>,
    word_to_nodes: HashMap<String, BTreeSet<String>>,
}

impl Taxonomy {
    /// Builds and validates a taxonomy from `child -> parent` edges and
    /// `word -> node` mappings.
    pub fn from_edges(edges: Vec<(String, String)>, words: Vec<(String, String)>) -> Result<Self> {
        let mut parents: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        let mut nodes: BTreeSet<String> = BTreeSet::new();
        for (child, parent) in edges {
            nodes.insert(child.clone());
            nodes.insert(parent.clone());
            parents.entry(child).or_default().insert(parent);
        }
        if nodes.is_empty() {
            return Err(Error::TaxonomyRoots { roots: vec![] });
        }

        let roots: Vec<String> = nodes
            .iter()
            .filter(|n| !parents.contains_key(*n))
            .cloned()
            .collect();
        if roots.len() != 1 {
            return Err(Error::TaxonomyRoots { roots });
        }
        let root = roots.into_iter().next().expect("exactly one root");

        // Kahn topological order over child -> parent edges, walking from the
        // root downwards; a leftover node proves a cycle.
        let mut children: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        let mut pending: HashMap<&str, usize> = HashMap::new();
        for (child, ps) in &parents {
            pending.insert(child.as_str(), ps.len());
            for p in ps {
                children.entry(p.as_str()).or_default().push(child.as_str());
            }
        }

        let mut depths: HashMap<String, usize> = HashMap::new();
        let mut ancestors: HashMap<String, BTreeSet<String>> = HashMap::new();
        depths.insert(root.clone(), 1);
        ancestors.insert(root.clone(), BTreeSet::from([root.clone()]));

        let mut queue: Vec<&str> = vec![root.as_str()];
        while let Some(node) = queue.pop() {
            for &child in children.get(node).into_iter().flatten() {
                let left = pending.get_mut(child).expect("child has pending count");
                *left -= 1;
                if *left == 0 {
                    let ps = &parents[child];
                    let depth = 1 + ps.iter().map(|p| depths[p.as_str()]).min().expect("parents resolved");
                    let mut anc = BTreeSet::from([child.to_owned()]);
                    for p in ps {
                        anc.extend(ancestors[p.as_str()].iter().cloned());
                    }
                    depths.insert(child.to_owned(), depth);
                    ancestors.insert(child.to_owned(), anc);
                    queue.push(child);
                }
            }
        }

        if let Some((node, _)) = pending.iter().find(|(_, left)| **left > 0) {
            return Err(Error::TaxonomyCycle { node: (*node).to_owned() });
        }

        let mut word_to_nodes: HashMap<String, BTreeSet<String>> = HashMap::new();
        for (word, node) in words {
            if !nodes.contains(&node) {
                return Err(Error::UnknownTaxonomyNode { node });
            }
            word_to_nodes.entry(word).or_default().insert(node);
        }

        Ok(Taxonomy {
            root,
            depths,
            ancestors,
            word_to_nodes,
        })
    }

    pub fn root(&self) -> &str {
        &self.root
    }

    pub fn node_count(&self) -> usize {
        self.depths.len()
    }

    pub fn depth(&self, node: &str) -> Option<usize> {
        self.depths.get(node).copied()
    }

    /// Ancestors of `node`, including the node itself.
    pub fn ancestors_of(&self, node: &str) -> Option<&BTreeSet<String>> {
        self.ancestors.get(node)
    }

    /// Concept nodes a surface word maps to.
    pub fn word_nodes(&self, word: &str) -> Option<&BTreeSet<String>> {
        self.word_to_nodes.get(word)
    }

    /// The deepest common ancestor of two nodes, with its depth.
    pub fn deepest_common_ancestor(&self, a: &str, b: &str) -> Option<(&str, usize)> {
        let anc_a = self.ancestors.get(a)?;
        let anc_b = self.ancestors.get(b)?;
        anc_a
            .intersection(anc_b)
            .map(|node| (node.as_str(), self.depths[node]))
            .max_by_key(|&(node, depth)| (depth, std::cmp::Reverse(node)))
            .map(|(node, depth)| (node, depth))
    }
}
