//! Record of fully explored action prefixes, kept across episodes so that
//! every episode ends in a sequence no earlier episode produced.

use std::collections::HashMap;

#[derive(Clone, Debug, Default)]
struct TrieNode {
    children: HashMap<usize, usize>,
    exhausted: bool,
    exhausted_children: usize,
    parent: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct ExhaustionTrie {
    actions: usize,
    nodes: Vec<TrieNode>,
    terminals: u64,
}

impl ExhaustionTrie {
    pub const ROOT: usize = 0;

    pub fn new(actions: usize) -> Self {
        Self {
            actions,
            nodes: vec![TrieNode::default()],
            terminals: 0,
        }
    }

    pub fn child(&self, node: usize, action: usize) -> Option<usize> {
        self.nodes[node].children.get(&action).copied()
    }

    pub fn is_exhausted(&self, node: usize) -> bool {
        self.nodes[node].exhausted
    }

    /// Whether `action` below `node` leads into an exhausted prefix. A missing
    /// trie node means nothing below it has been used yet.
    pub fn child_exhausted(&self, node: Option<usize>, action: usize) -> bool {
        node.and_then(|n| self.child(n, action))
            .map_or(false, |c| self.nodes[c].exhausted)
    }

    pub fn root_exhausted(&self) -> bool {
        self.nodes[Self::ROOT].exhausted
    }

    /// Trie node of a prefix, if it exists.
    pub fn find(&self, prefix: &[usize]) -> Option<usize> {
        let mut node = Self::ROOT;
        for &a in prefix {
            node = self.child(node, a)?;
        }
        Some(node)
    }

    /// Marks a complete sequence as used and propagates exhaustion upwards.
    /// Returns false if the sequence was already exhausted.
    pub fn mark_terminal(&mut self, sequence: &[usize]) -> bool {
        let mut node = Self::ROOT;
        for &a in sequence {
            node = match self.child(node, a) {
                Some(c) => c,
                None => {
                    let id = self.nodes.len();
                    self.nodes.push(TrieNode {
                        parent: Some(node),
                        ..TrieNode::default()
                    });
                    self.nodes[node].children.insert(a, id);
                    id
                }
            };
        }
        if self.nodes[node].exhausted {
            return false;
        }
        self.nodes[node].exhausted = true;
        self.terminals += 1;
        while let Some(parent) = self.nodes[node].parent {
            let p = &mut self.nodes[parent];
            p.exhausted_children += 1;
            if p.exhausted_children < self.actions {
                break;
            }
            p.exhausted = true;
            node = parent;
        }
        true
    }

    /// Number of distinct sequences marked so far.
    pub fn terminals(&self) -> u64 {
        self.terminals
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.len() == 1
    }
}
