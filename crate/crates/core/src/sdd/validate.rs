use std::collections::HashMap;
use std::fmt;

use bitvec::prelude::*;

use super::{check_cap, SddEnv, SddNode, SddRef};
use crate::boolfn::{Assignment, VarId};
use crate::error::{Error, Result};
use crate::par::Execution;
use crate::vtree::VtreeNodeId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Condition {
    /// Primes respect a subtree of the left child.
    S1,
    /// Subs respect a subtree of the right child.
    S2,
    /// No prime is unsatisfiable.
    S3,
    /// Primes are pairwise contradictory.
    S4,
    /// Primes are jointly exhaustive.
    S5,
    /// Subs are pairwise inequivalent.
    C,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Condition::S1 => "S1",
            Condition::S2 => "S2",
            Condition::S3 => "S3",
            Condition::S4 => "S4",
            Condition::S5 => "S5",
            Condition::C => "C",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Witness {
    /// Offending element index.
    Element(usize),
    /// Two offending element indices.
    Pair(usize, usize),
    /// An assignment exhibiting the failure, with the elements involved.
    Assignment {
        assignment: Assignment,
        elements: Vec<usize>,
    },
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::Element(i) => write!(f, "element {i}"),
            Witness::Pair(i, j) => write!(f, "elements {i} and {j}"),
            Witness::Assignment { assignment, elements } => {
                write!(f, "{assignment} (elements {elements:?})")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CheckOutcome {
    Pass,
    Fail(Witness),
    /// Not checked because a structural condition failed first.
    Skipped,
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        matches!(self, CheckOutcome::Pass)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeValidation {
    pub node: SddRef,
    pub vnode: VtreeNodeId,
    pub checks: Vec<(Condition, CheckOutcome)>,
}

/// Per-decision results for every decision reachable from a root.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidationReport {
    pub nodes: Vec<NodeValidation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.nodes
            .iter()
            .all(|n| n.checks.iter().all(|(_, o)| o.passed()))
    }

    /// Failed or skipped checks as `(node, condition, outcome)`.
    pub fn failures(&self) -> Vec<(SddRef, Condition, &CheckOutcome)> {
        self.nodes
            .iter()
            .flat_map(|n| {
                n.checks
                    .iter()
                    .filter(|(_, o)| !o.passed())
                    .map(move |(c, o)| (n.node, *c, o))
            })
            .collect()
    }

    pub fn failed_conditions(&self) -> Vec<Condition> {
        let mut out: Vec<Condition> = self
            .failures()
            .into_iter()
            .filter(|(_, _, o)| matches!(o, CheckOutcome::Fail(_)))
            .map(|(_, c, _)| c)
            .collect();
        out.sort();
        out.dedup();
        out
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let failures = self.failures();
        if failures.is_empty() {
            return write!(f, "{} decision nodes, all conditions hold", self.nodes.len());
        }
        for (node, cond, outcome) in failures {
            match outcome {
                CheckOutcome::Fail(w) => writeln!(f, "node {}: {cond} fails at {w}", node.index())?,
                _ => writeln!(f, "node {}: {cond} skipped", node.index())?,
            }
        }
        Ok(())
    }
}

impl SddEnv {
    /// Checks (S1)–(S5) at every decision reachable from `root`. The
    /// structural conditions use the respects-relation on rooted subtrees;
    /// the semantic ones enumerate the assignments of the left child's
    /// variables.
    pub fn validate(&self, root: SddRef) -> Result<ValidationReport> {
        let mut report = ValidationReport::default();
        for r in self.reachable(root) {
            let SddNode::Decision { vnode, elements } = self.node(r) else {
                continue;
            };
            let (l, rt) = self.vtree.children(*vnode)?;
            let left_vars = self.vtree.vars_below(l)?;
            check_cap(left_vars.len())?;

            let s1 = first_fail(elements.iter().map(|&(p, _)| self.respects_within(p, l)));
            let s2 = first_fail(elements.iter().map(|&(_, s)| self.respects_within(s, rt)));
            let mut checks = vec![
                (Condition::S1, s1.map_or(CheckOutcome::Pass, |i| CheckOutcome::Fail(Witness::Element(i)))),
                (Condition::S2, s2.map_or(CheckOutcome::Pass, |i| CheckOutcome::Fail(Witness::Element(i)))),
            ];
            if s1.is_some() {
                checks.extend([
                    (Condition::S3, CheckOutcome::Skipped),
                    (Condition::S4, CheckOutcome::Skipped),
                    (Condition::S5, CheckOutcome::Skipped),
                ]);
            } else {
                checks.extend(self.partition_checks(elements, left_vars)?);
            }
            report.nodes.push(NodeValidation {
                node: r,
                vnode: *vnode,
                checks,
            });
        }
        Ok(report)
    }

    fn partition_checks(
        &self,
        elements: &[(SddRef, SddRef)],
        vars: &[VarId],
    ) -> Result<Vec<(Condition, CheckOutcome)>> {
        let exec = if vars.len() >= 12 {
            Execution::default()
        } else {
            Execution::Sequential
        };
        let tables = elements
            .iter()
            .map(|&(p, _)| self.table_over(p, vars, exec))
            .collect::<Result<Vec<_>>>()?;
        let rows = 1usize << vars.len();

        let s3 = tables
            .iter()
            .position(|t| t.not_any())
            .map_or(CheckOutcome::Pass, |i| CheckOutcome::Fail(Witness::Element(i)));

        let mut s4 = CheckOutcome::Pass;
        let mut s5 = CheckOutcome::Pass;
        for row in 0..rows {
            let hits: Vec<usize> = (0..tables.len()).filter(|&i| tables[i][row]).collect();
            let witness = || Witness::Assignment {
                assignment: Assignment::from_row(vars, row as u64),
                elements: hits.clone(),
            };
            if hits.len() > 1 && s4.passed() {
                s4 = CheckOutcome::Fail(witness());
            }
            if hits.is_empty() && s5.passed() {
                s5 = CheckOutcome::Fail(witness());
            }
            if !s4.passed() && !s5.passed() {
                break;
            }
        }
        Ok(vec![(Condition::S3, s3), (Condition::S4, s4), (Condition::S5, s5)])
    }

    /// Condition (C) at every decision reachable from `root`: subs are
    /// pairwise inequivalent over the right child's variables.
    pub fn compression_report(&self, root: SddRef) -> Result<Vec<(SddRef, CheckOutcome)>> {
        let mut out = Vec::new();
        let mut cache: HashMap<(SddRef, VtreeNodeId), BitVec<u64, Lsb0>> = HashMap::new();
        for r in self.reachable(root) {
            let SddNode::Decision { vnode, elements } = self.node(r) else {
                continue;
            };
            let (_, rt) = self.vtree.children(*vnode)?;
            let vars = self.vtree.vars_below(rt)?;
            check_cap(vars.len())?;
            let mut seen: HashMap<BitVec<u64, Lsb0>, usize> = HashMap::new();
            let mut outcome = CheckOutcome::Pass;
            for (j, &(_, s)) in elements.iter().enumerate() {
                let t = match cache.get(&(s, rt)) {
                    Some(t) => t.clone(),
                    None => {
                        let t = self.table_over(s, vars, Execution::Sequential)?;
                        cache.insert((s, rt), t.clone());
                        t
                    }
                };
                if let Some(&i) = seen.get(&t) {
                    outcome = CheckOutcome::Fail(Witness::Pair(i, j));
                    break;
                }
                seen.insert(t, j);
            }
            out.push((r, outcome));
        }
        Ok(out)
    }

    pub fn is_compressed(&self, root: SddRef) -> Result<bool> {
        Ok(self
            .compression_report(root)?
            .iter()
            .all(|(_, o)| o.passed()))
    }

    /// Fails with an error naming the first violated condition.
    pub fn check_valid(&self, root: SddRef) -> Result<()> {
        let report = self.validate(root)?;
        if report.is_valid() {
            Ok(())
        } else {
            Err(Error::InvalidDiagram(report.to_string()))
        }
    }
}

fn first_fail(mut it: impl Iterator<Item = bool>) -> Option<usize> {
    it.position(|ok| !ok)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boolfn::x_vars;
    use crate::vtree::Vtree;

    /// Root over {x1, x2} on the left and x3 on the right.
    fn env() -> (SddEnv, VtreeNodeId) {
        let shape = crate::vtree::Shape::node(
            crate::vtree::Shape::right_linear(&x_vars(2)).unwrap(),
            crate::vtree::Shape::Leaf(VarId(3)),
        );
        let env = SddEnv::new(Vtree::from_shape(&shape).unwrap());
        let root = env.vtree().root();
        (env, root)
    }

    #[test]
    fn duplicated_prime_fails_s4() {
        let (mut env, root) = env();
        let p = env.literal(VarId(1), true).unwrap();
        let q = env.literal(VarId(1), false).unwrap();
        let d = env
            .decision(root, vec![(p, SddRef::TRUE), (p, SddRef::FALSE), (q, SddRef::TRUE)])
            .unwrap();
        let report = env.validate(d).unwrap();
        assert!(!report.is_valid());
        assert_eq!(report.failed_conditions(), vec![Condition::S4]);
        let (_, _, outcome) = report.failures()[0];
        let CheckOutcome::Fail(Witness::Assignment { assignment, .. }) = outcome else {
            panic!("expected an assignment witness");
        };
        assert_eq!(assignment.get(VarId(1)), Some(true));
    }

    #[test]
    fn overlapping_primes_fail_s4() {
        let (mut env, root) = env();
        let (l, _) = env.vtree().children(root).unwrap();
        let x1 = env.literal(VarId(1), true).unwrap();
        let nx1 = env.literal(VarId(1), false).unwrap();
        let x2 = env.literal(VarId(2), true).unwrap();
        // x1 ∧ x2 as a decision at the left child
        let both = env.decision(l, vec![(x1, x2), (nx1, SddRef::FALSE)]).unwrap();
        let d = env
            .decision(root, vec![(x1, SddRef::TRUE), (both, SddRef::FALSE), (nx1, SddRef::FALSE)])
            .unwrap();
        let report = env.validate(d).unwrap();
        assert!(report.failed_conditions().contains(&Condition::S4));
    }

    #[test]
    fn structural_and_cover_failures() {
        let (mut env, root) = env();
        let x1 = env.literal(VarId(1), true).unwrap();
        let x3 = env.literal(VarId(3), true).unwrap();
        // prime on the wrong side
        let d = env.decision(root, vec![(x3, SddRef::TRUE), (x1, SddRef::FALSE)]).unwrap();
        let report = env.validate(d).unwrap();
        assert_eq!(report.failed_conditions(), vec![Condition::S1]);

        // primes x1 and ⊥ leave ¬x1 uncovered, and ⊥ is unsatisfiable
        let e = env.decision(root, vec![(x1, SddRef::TRUE), (SddRef::FALSE, x3)]).unwrap();
        let report = env.validate(e).unwrap();
        assert_eq!(report.failed_conditions(), vec![Condition::S3, Condition::S5]);
    }

    #[test]
    fn compression_detects_equal_subs() {
        let (mut env, root) = env();
        let x1 = env.literal(VarId(1), true).unwrap();
        let nx1 = env.literal(VarId(1), false).unwrap();
        let d = env.decision(root, vec![(x1, SddRef::TRUE), (nx1, SddRef::TRUE)]).unwrap();
        env.check_valid(d).unwrap();
        assert!(!env.is_compressed(d).unwrap());
        let e = env.decision(root, vec![(x1, SddRef::TRUE), (nx1, SddRef::FALSE)]).unwrap();
        assert!(env.is_compressed(e).unwrap());
    }
}
