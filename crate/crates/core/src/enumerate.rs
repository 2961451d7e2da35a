//! Enumeration of all assignments to finitely many variables subject to
//! functional constraints `value(to) = table[value(from)]`.
//!
//! This is the shape of every hom-set in the engine: morphisms of presheaves
//! and set-valued natural transformations are families of maps whose
//! naturality squares are exactly such constraints.

use crate::error::{Error, Result};

#[derive(Clone, Debug, Default)]
pub struct FunctionalCsp {
    domains: Vec<usize>,
    /// Outgoing constraints per variable: `(to, table)`.
    out: Vec<Vec<(usize, Vec<usize>)>>,
}

impl FunctionalCsp {
    pub fn new(domains: Vec<usize>) -> Self {
        let n = domains.len();
        FunctionalCsp {
            domains,
            out: vec![Vec::new(); n],
        }
    }

    pub fn add_var(&mut self, domain: usize) -> usize {
        self.domains.push(domain);
        self.out.push(Vec::new());
        self.domains.len() - 1
    }

    pub fn constrain(&mut self, from: usize, to: usize, table: Vec<usize>) {
        debug_assert_eq!(table.len(), self.domains[from]);
        self.out[from].push((to, table));
    }

    /// All solutions in lexicographic order of the variable values. Fails
    /// once more than `budget` search nodes have been visited.
    pub fn solve_all(&self, budget: u64, what: &str) -> Result<Vec<Vec<usize>>> {
        let n = self.domains.len();
        let mut assignment = vec![usize::MAX; n];
        let mut out = Vec::new();
        let mut nodes = 0u64;
        self.search(0, &mut assignment, &mut out, &mut nodes, budget, what)?;
        Ok(out)
    }

    fn search(
        &self,
        next: usize,
        assignment: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
        nodes: &mut u64,
        budget: u64,
        what: &str,
    ) -> Result<()> {
        let n = self.domains.len();
        let Some(var) = (next..n).find(|&v| assignment[v] == usize::MAX) else {
            out.push(assignment.clone());
            return Ok(());
        };
        for value in 0..self.domains[var] {
            *nodes += 1;
            if *nodes > budget {
                return Err(Error::TooLarge {
                    what: what.to_string(),
                    needed: *nodes as u128,
                    budget,
                });
            }
            let mut trail = Vec::new();
            if self.assign(var, value, assignment, &mut trail) {
                self.search(var + 1, assignment, out, nodes, budget, what)?;
            }
            for v in trail {
                assignment[v] = usize::MAX;
            }
        }
        Ok(())
    }

    /// Assigns and propagates; records newly assigned variables in `trail`.
    fn assign(
        &self,
        var: usize,
        value: usize,
        assignment: &mut [usize],
        trail: &mut Vec<usize>,
    ) -> bool {
        let mut stack = vec![(var, value)];
        while let Some((v, val)) = stack.pop() {
            if assignment[v] != usize::MAX {
                if assignment[v] != val {
                    return false;
                }
                continue;
            }
            assignment[v] = val;
            trail.push(v);
            for (to, table) in &self.out[v] {
                stack.push((*to, table[val]));
            }
        }
        true
    }
}
