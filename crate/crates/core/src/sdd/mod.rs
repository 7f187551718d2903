//! Sentential decision diagrams over a fixed vtree.
//!
//! An [`SddEnv`] owns a vtree and a hash-consed node store. Nodes are
//! constants, literals, or decisions `⋁ (prime_i ∧ sub_i)` anchored at an
//! internal vtree node. The store enforces only local well-formedness
//! (`m >= 2`, known vtree node, known children); the structural and semantic
//! SDD conditions are checked by [`SddEnv::validate`] so that malformed
//! diagrams can be built and diagnosed.
//!
//! Decision elements are kept sorted, so two decisions with the same set of
//! elements share one handle regardless of the order they were given in.
//!
//! Construction needs `&mut SddEnv`; every query takes `&self`, and a
//! finished environment can be shared across threads.

mod io;
mod transform;
mod validate;

use std::collections::HashMap;

use bitvec::prelude::*;
use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::boolfn::{Assignment, FunctionOracle, VarId, TABLE_CAP};
use crate::error::{Error, Result};
use crate::par::{self, Execution};
use crate::vtree::{Vtree, VtreeNodeId};

pub use validate::{CheckOutcome, Condition, NodeValidation, ValidationReport, Witness};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SddRef(u32);

impl SddRef {
    pub const FALSE: SddRef = SddRef(0);
    pub const TRUE: SddRef = SddRef(1);

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SddNode {
    Constant(bool),
    Literal { var: VarId, positive: bool },
    Decision {
        vnode: VtreeNodeId,
        elements: Vec<(SddRef, SddRef)>,
    },
}

/// `(arcs, nodes)` of the DAG below a root. A decision with `m` elements
/// contributes `3m` arcs: two into each of its `m` conjunctions and `m` into
/// its disjunction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct SddSize {
    pub arcs: usize,
    pub nodes: usize,
}

#[derive(Debug, Clone)]
pub struct SddEnv {
    vtree: Vtree,
    nodes: Vec<SddNode>,
    unique: HashMap<SddNode, SddRef>,
}

const ROW_BLOCK: u64 = 1 << 12;

impl SddEnv {
    pub fn new(vtree: Vtree) -> Self {
        let mut env = SddEnv {
            vtree,
            nodes: Vec::new(),
            unique: HashMap::new(),
        };
        env.intern(SddNode::Constant(false));
        env.intern(SddNode::Constant(true));
        env
    }

    fn intern(&mut self, node: SddNode) -> SddRef {
        if let Some(&r) = self.unique.get(&node) {
            return r;
        }
        let r = SddRef(self.nodes.len() as u32);
        self.nodes.push(node.clone());
        self.unique.insert(node, r);
        r
    }

    pub fn vtree(&self) -> &Vtree {
        &self.vtree
    }

    /// Number of nodes in the store.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn constant(&self, value: bool) -> SddRef {
        if value {
            SddRef::TRUE
        } else {
            SddRef::FALSE
        }
    }

    pub fn literal(&mut self, var: VarId, positive: bool) -> Result<SddRef> {
        if !self.vtree.has_var(var) {
            return Err(Error::VarOutOfScope(var));
        }
        Ok(self.intern(SddNode::Literal { var, positive }))
    }

    pub fn decision(
        &mut self,
        vnode: VtreeNodeId,
        mut elements: Vec<(SddRef, SddRef)>,
    ) -> Result<SddRef> {
        self.vtree.children(vnode)?;
        if elements.len() < 2 {
            return Err(Error::TooFewElements(elements.len()));
        }
        for &(p, s) in &elements {
            for r in [p, s] {
                if r.index() >= self.nodes.len() {
                    return Err(Error::UnknownNode(r.index()));
                }
            }
        }
        elements.sort_unstable();
        Ok(self.intern(SddNode::Decision { vnode, elements }))
    }

    pub fn node(&self, r: SddRef) -> &SddNode {
        &self.nodes[r.index()]
    }

    /// Handle of a node if it is already stored.
    pub fn lookup(&self, node: &SddNode) -> Option<SddRef> {
        let mut key = node.clone();
        if let SddNode::Decision { elements, .. } = &mut key {
            elements.sort_unstable();
        }
        self.unique.get(&key).copied()
    }

    /// The vtree node whose subtree `r` respects most tightly; `None` for
    /// constants, which respect every vtree.
    pub fn respected_node(&self, r: SddRef) -> Option<VtreeNodeId> {
        match self.node(r) {
            SddNode::Constant(_) => None,
            SddNode::Literal { var, .. } => self.vtree.leaf_of(*var),
            SddNode::Decision { vnode, .. } => Some(*vnode),
        }
    }

    /// Whether `r` respects some rooted subtree of `T_w`.
    pub fn respects_within(&self, r: SddRef, w: VtreeNodeId) -> bool {
        self.respected_node(r)
            .is_none_or(|v| self.vtree.is_in_subtree(v, w))
    }

    fn region_size(&self, r: SddRef) -> usize {
        self.respected_node(r)
            .map_or(0, |v| self.vtree.vars_below(v).map_or(0, <[VarId]>::len))
    }

    /// Nodes reachable from `root`, children before parents.
    pub fn reachable(&self, root: SddRef) -> Vec<SddRef> {
        let mut seen = vec![false; self.nodes.len()];
        let mut out = Vec::new();
        let mut stack = vec![(root, false)];
        while let Some((r, expanded)) = stack.pop() {
            if expanded {
                out.push(r);
                continue;
            }
            if seen[r.index()] {
                continue;
            }
            seen[r.index()] = true;
            stack.push((r, true));
            if let SddNode::Decision { elements, .. } = self.node(r) {
                for &(p, s) in elements.iter().rev() {
                    stack.push((s, false));
                    stack.push((p, false));
                }
            }
        }
        out
    }

    pub fn size(&self, root: SddRef) -> SddSize {
        let reach = self.reachable(root);
        let arcs = reach
            .iter()
            .map(|&r| match self.node(r) {
                SddNode::Decision { elements, .. } => 3 * elements.len(),
                _ => 0,
            })
            .sum();
        SddSize {
            arcs,
            nodes: reach.len(),
        }
    }

    /// Circuit value of `root` under `a`, which must assign every variable
    /// of the vtree.
    pub fn evaluate(&self, root: SddRef, a: &Assignment) -> Result<bool> {
        if let Some(&v) = self.vtree.variables().iter().find(|&&v| !a.contains(v)) {
            return Err(Error::MissingVar(v));
        }
        self.eval_node(root, a)
    }

    /// Evaluation that only fails if a variable actually read is missing.
    pub(crate) fn eval_node(&self, r: SddRef, a: &Assignment) -> Result<bool> {
        match self.node(r) {
            SddNode::Constant(b) => Ok(*b),
            SddNode::Literal { var, positive } => Ok(a.require(*var)? == *positive),
            SddNode::Decision { elements, .. } => {
                for &(p, s) in elements {
                    if self.eval_node(p, a)? && self.eval_node(s, a)? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
        }
    }

    /// Number of models of `root` over `scope`, computed bottom-up from the
    /// counts over each node's vtree region. Assumes (S1)–(S5).
    pub fn model_count(&self, root: SddRef, scope: &[VarId]) -> Result<BigUint> {
        if let Some(&v) = self.vtree.variables().iter().find(|v| !scope.contains(v)) {
            return Err(Error::VarOutOfScope(v));
        }
        let mut memo = HashMap::new();
        let c = self.region_count(root, &mut memo);
        Ok(c << (scope.len() - self.region_size(root)))
    }

    /// Models of `r` over the variables of its own region.
    pub(crate) fn region_count(&self, r: SddRef, memo: &mut HashMap<SddRef, BigUint>) -> BigUint {
        if let Some(c) = memo.get(&r) {
            return c.clone();
        }
        let c = match self.node(r) {
            SddNode::Constant(false) => BigUint::zero(),
            SddNode::Constant(true) | SddNode::Literal { .. } => BigUint::one(),
            SddNode::Decision { vnode, elements } => {
                let (l, rt) = self.vtree.children(*vnode).expect("decision at internal node");
                let nl = self.vtree.vars_below(l).map_or(0, <[VarId]>::len);
                let nr = self.vtree.vars_below(rt).map_or(0, <[VarId]>::len);
                let mut total = BigUint::zero();
                for &(p, s) in elements {
                    let cp = self.region_count(p, memo) << (nl.saturating_sub(self.region_size(p)));
                    let cs = self.region_count(s, memo) << (nr.saturating_sub(self.region_size(s)));
                    total += cp * cs;
                }
                total
            }
        };
        memo.insert(r, c.clone());
        c
    }

    /// Truth table of `r` over `vars` (first variable most significant).
    pub fn table_over(&self, r: SddRef, vars: &[VarId], exec: Execution) -> Result<BitVec<u64, Lsb0>> {
        rows_table(exec, vars, |a| self.eval_node(r, a))
    }

    /// Semantic equivalence by enumeration over the vtree variables.
    pub fn equivalent(&self, a: SddRef, b: SddRef) -> Result<bool> {
        if a == b {
            return Ok(true);
        }
        let vars = self.vtree.variables();
        check_cap(vars.len())?;
        let exec = Execution::default();
        let rows = 1u64 << vars.len();
        let found = par::find_first(exec, 0..rows.div_ceil(ROW_BLOCK), |block| {
            let mut asg = Assignment::new();
            let end = ((block + 1) * ROW_BLOCK).min(rows);
            (block * ROW_BLOCK..end).any(|row| {
                asg.fill_row(vars, row);
                self.eval_node(a, &asg).ok() != self.eval_node(b, &asg).ok()
            })
        });
        Ok(found.is_none())
    }

    /// First assignment (over the vtree variables and the oracle's scope)
    /// where `root` and `f` disagree.
    pub fn find_mismatch(&self, root: SddRef, f: &FunctionOracle) -> Result<Option<Assignment>> {
        let mut vars = self.vtree.variables().to_vec();
        for &v in f.scope() {
            if !vars.contains(&v) {
                vars.push(v);
            }
        }
        check_cap(vars.len())?;
        let rows = 1u64 << vars.len();
        let exec = Execution::default();
        let mismatch = |row: u64, asg: &mut Assignment| {
            asg.fill_row(&vars, row);
            self.eval_node(root, asg).ok() != Some(f.eval_unchecked(asg))
        };
        let block = par::find_first(exec, 0..rows.div_ceil(ROW_BLOCK), |block| {
            let mut asg = Assignment::new();
            let end = ((block + 1) * ROW_BLOCK).min(rows);
            (block * ROW_BLOCK..end).any(|row| mismatch(row, &mut asg))
        });
        Ok(block.map(|block| {
            let mut asg = Assignment::new();
            let row = (block * ROW_BLOCK..rows)
                .find(|&row| mismatch(row, &mut asg))
                .expect("block holds a mismatch");
            Assignment::from_row(&vars, row)
        }))
    }
}

pub(crate) fn check_cap(vars: usize) -> Result<()> {
    if vars > TABLE_CAP {
        Err(Error::ScopeTooLarge {
            size: vars,
            cap: TABLE_CAP,
        })
    } else {
        Ok(())
    }
}

/// Enumerates all rows over `vars` and collects `f` into a bit vector.
pub(crate) fn rows_table<F>(exec: Execution, vars: &[VarId], f: F) -> Result<BitVec<u64, Lsb0>>
where
    F: Fn(&Assignment) -> Result<bool> + Sync + Send,
{
    check_cap(vars.len())?;
    let rows = 1u64 << vars.len();
    let blocks = par::map_range(exec, 0..rows.div_ceil(ROW_BLOCK), |block| {
        let mut asg = Assignment::new();
        let end = ((block + 1) * ROW_BLOCK).min(rows);
        (block * ROW_BLOCK..end)
            .map(|row| {
                asg.fill_row(vars, row);
                f(&asg)
            })
            .collect::<Result<Vec<bool>>>()
    });
    let mut out = BitVec::with_capacity(rows as usize);
    for b in blocks {
        out.extend(b?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boolfn::x_vars;

    fn env2() -> SddEnv {
        // x1 on the left of the root, x2 on the right
        SddEnv::new(Vtree::right_linear(&x_vars(2)).unwrap())
    }

    #[test]
    fn six_wire_decision() {
        let mut env = env2();
        let root = env.vtree().root();
        let nx = env.literal(VarId(1), false).unwrap();
        let px = env.literal(VarId(1), true).unwrap();
        let d = env
            .decision(root, vec![(nx, SddRef::FALSE), (px, SddRef::TRUE)])
            .unwrap();
        assert_eq!(env.size(d).arcs, 6);
        assert_eq!(env.size(d).nodes, 5);
        assert_eq!(env.size(SddRef::TRUE), SddSize { arcs: 0, nodes: 1 });
    }

    #[test]
    fn hash_consing_ignores_element_order() {
        let mut env = env2();
        let root = env.vtree().root();
        let nx = env.literal(VarId(1), false).unwrap();
        let px = env.literal(VarId(1), true).unwrap();
        let y = env.literal(VarId(2), true).unwrap();
        let a = env.decision(root, vec![(nx, SddRef::FALSE), (px, y)]).unwrap();
        let b = env.decision(root, vec![(px, y), (nx, SddRef::FALSE)]).unwrap();
        assert_eq!(a, b);
        assert_eq!(env.literal(VarId(2), true).unwrap(), y);
    }

    #[test]
    fn decision_rejects_bad_shape() {
        let mut env = env2();
        let px = env.literal(VarId(1), true).unwrap();
        let root = env.vtree().root();
        assert!(matches!(
            env.decision(root, vec![(px, SddRef::TRUE)]),
            Err(Error::TooFewElements(1))
        ));
        assert!(matches!(
            env.decision(0, vec![(px, SddRef::TRUE), (px, SddRef::FALSE)]),
            Err(Error::LeafVtreeNode(0))
        ));
        assert!(env.literal(VarId(9), true).is_err());
    }

    #[test]
    fn evaluate_and_count() {
        let mut env = env2();
        let root = env.vtree().root();
        let nx = env.literal(VarId(1), false).unwrap();
        let px = env.literal(VarId(1), true).unwrap();
        let y = env.literal(VarId(2), true).unwrap();
        // x1 ∧ x2
        let d = env.decision(root, vec![(nx, SddRef::FALSE), (px, y)]).unwrap();
        let a = Assignment::from_bits(&x_vars(2), &[true, true]);
        assert!(env.evaluate(d, &a).unwrap());
        assert!(matches!(
            env.evaluate(d, &Assignment::new().with(VarId(1), true)),
            Err(Error::MissingVar(_))
        ));
        assert_eq!(env.model_count(d, &x_vars(2)).unwrap(), BigUint::from(1u32));
        assert_eq!(env.model_count(d, &x_vars(4)).unwrap(), BigUint::from(4u32));
        assert_eq!(env.model_count(px, &x_vars(1)).unwrap_err(), Error::VarOutOfScope(VarId(2)));
        let env1 = SddEnv::new(Vtree::right_linear(&x_vars(1)).unwrap());
        assert_eq!(env1.model_count(SddRef::TRUE, &x_vars(3)).unwrap(), BigUint::from(8u32));
    }

    #[test]
    fn equivalence() {
        let mut env = env2();
        let root = env.vtree().root();
        let nx = env.literal(VarId(1), false).unwrap();
        let px = env.literal(VarId(1), true).unwrap();
        let d = env.decision(root, vec![(nx, SddRef::FALSE), (px, SddRef::TRUE)]).unwrap();
        assert!(env.equivalent(d, px).unwrap());
        assert!(!env.equivalent(SddRef::FALSE, SddRef::TRUE).unwrap());
        assert!(env.equivalent(d, d).unwrap());
    }
}
