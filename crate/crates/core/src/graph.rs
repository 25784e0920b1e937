//! Directed graph utilities shared by models, abstractions and assessment sets.

use std::collections::BTreeSet;

use crate::error::{Error, Result};

/// Directed graph over named nodes, indexed by declaration order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dag {
    names: Vec<String>,
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
}

impl Dag {
    /// Builds the graph. Edges naming unknown nodes are an error; cycles are
    /// not checked here (see [`Dag::topological_order`]).
    pub fn new(names: Vec<String>, edges: &[(String, String)]) -> Result<Self> {
        let n = names.len();
        let mut parents = vec![Vec::new(); n];
        let mut children = vec![Vec::new(); n];
        let find = |name: &str| {
            names
                .iter()
                .position(|v| v == name)
                .ok_or_else(|| Error::UnknownVariable(name.to_string()))
        };
        for (from, to) in edges {
            let (f, t) = (find(from)?, find(to)?);
            if !children[f].contains(&t) {
                children[f].push(t);
                parents[t].push(f);
            }
        }
        for list in parents.iter_mut().chain(children.iter_mut()) {
            list.sort_unstable();
        }
        Ok(Dag {
            names,
            parents,
            children,
        })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|v| v == name)
    }

    pub fn parents(&self, node: usize) -> &[usize] {
        &self.parents[node]
    }

    pub fn children(&self, node: usize) -> &[usize] {
        &self.children[node]
    }

    /// Kahn's algorithm, always releasing the lowest declaration index first.
    pub fn topological_order(&self) -> Result<Vec<usize>> {
        let n = self.len();
        let mut indegree: Vec<usize> = self.parents.iter().map(Vec::len).collect();
        let mut ready: BTreeSet<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(next) = ready.pop_first() {
            order.push(next);
            for &c in &self.children[next] {
                indegree[c] -= 1;
                if indegree[c] == 0 {
                    ready.insert(c);
                }
            }
        }
        if order.len() == n {
            Ok(order)
        } else {
            let member = self.cycle_member().expect("leftover nodes imply a cycle");
            Err(Error::Cycle(self.names[member].clone()))
        }
    }

    /// Lowest-index node lying on a directed cycle, if any.
    pub fn cycle_member(&self) -> Option<usize> {
        (0..self.len()).find(|&v| self.descendants(v)[v])
    }

    /// Nodes reachable from `node` by a directed path of length at least one.
    pub fn descendants(&self, node: usize) -> Vec<bool> {
        self.reachable_from(&[node], &[])
    }

    /// Nodes reachable by a non-empty directed path from any source, never
    /// traversing an edge into a node flagged in `cut_into`.
    pub fn reachable_from(&self, sources: &[usize], cut_into: &[bool]) -> Vec<bool> {
        let mut seen = vec![false; self.len()];
        let mut stack: Vec<usize> = sources.to_vec();
        while let Some(v) = stack.pop() {
            for &c in &self.children[v] {
                if cut_into.get(c).copied().unwrap_or(false) || seen[c] {
                    continue;
                }
                seen[c] = true;
                stack.push(c);
            }
        }
        seen
    }

    /// `closure[i][j]` is true when `i` is a proper ancestor of `j`.
    /// One graph search per node: O(|V|·(|V|+|E|)).
    pub fn transitive_closure(&self) -> Vec<Vec<bool>> {
        (0..self.len()).map(|v| self.descendants(v)).collect()
    }
}
