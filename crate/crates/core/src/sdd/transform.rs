use std::collections::HashMap;

use bitvec::prelude::*;
use num_bigint::BigUint;
use num_traits::{One, Zero};

use super::{SddEnv, SddNode, SddRef};
use crate::boolfn::{Assignment, VarId};
use crate::error::{Error, Result};
use crate::obdd::{Obdd, Op, FALSE as OBDD_FALSE, TRUE as OBDD_TRUE};
use crate::par::Execution;
use crate::vtree::VtreeNodeId;

impl SddEnv {
    /// Embeds `f` as an SDD respecting `T_w`, which must be right-linear with
    /// left-first ordering equal to `f`'s ordering.
    ///
    /// A node testing the `k`-th variable (not the last) becomes the Shannon
    /// decision `(¬x ∧ lo) ∨ (x ∧ hi)` at the `k`-th internal node of the
    /// spine. The last variable of the ordering is a right leaf with no
    /// internal node above it on its left, so nodes testing it become the
    /// literal they compute.
    pub fn embed_obdd(&mut self, f: &Obdd, w: VtreeNodeId) -> Result<SddRef> {
        self.vtree.node(w)?;
        if !self.vtree.is_right_linear_at(w) {
            return Err(Error::VtreeMismatch(format!("subtree at {w} is not right-linear")));
        }
        if self.vtree.vars_below(w)? != f.order() {
            return Err(Error::VtreeMismatch(
                "ordering differs from the left-first traversal".into(),
            ));
        }
        let mut spine = Vec::with_capacity(f.order().len());
        let mut cur = w;
        while let Ok((_, right)) = self.vtree.children(cur) {
            spine.push(cur);
            cur = right;
        }

        let mut map: HashMap<u32, SddRef> = HashMap::from([
            (OBDD_FALSE, SddRef::FALSE),
            (OBDD_TRUE, SddRef::TRUE),
        ]);
        // canonical layout stores children before parents
        for (k, n) in f.nodes().iter().enumerate().skip(2) {
            let var = f.var_at(n.level);
            let r = if let Some(&vnode) = spine.get(n.level as usize) {
                let neg = self.literal(var, false)?;
                let pos = self.literal(var, true)?;
                let (lo, hi) = (map[&n.lo], map[&n.hi]);
                self.decision(vnode, vec![(neg, lo), (pos, hi)])?
            } else {
                self.literal(var, n.hi == OBDD_TRUE)?
            };
            map.insert(k as u32, r);
        }
        Ok(map[&f.root()])
    }

    /// The OBDD over the left-first ordering of `T_w` computing `r`, which
    /// must respect a subtree of `T_w`.
    pub fn to_obdd(&self, r: SddRef, w: VtreeNodeId) -> Result<Obdd> {
        let order = self.vtree.vars_below(w)?.to_vec();
        let mut memo = HashMap::new();
        self.to_obdd_rec(r, &order, &mut memo)
    }

    fn to_obdd_rec(
        &self,
        r: SddRef,
        order: &[VarId],
        memo: &mut HashMap<SddRef, Obdd>,
    ) -> Result<Obdd> {
        if let Some(d) = memo.get(&r) {
            return Ok(d.clone());
        }
        let d = match self.node(r) {
            SddNode::Constant(b) => Obdd::constant(order, *b)?,
            SddNode::Literal { var, positive } => Obdd::literal(order, *var, *positive)?,
            SddNode::Decision { elements, .. } => {
                let mut acc = Obdd::constant(order, false)?;
                for &(p, s) in elements {
                    let dp = self.to_obdd_rec(p, order, memo)?;
                    let ds = self.to_obdd_rec(s, order, memo)?;
                    acc = Obdd::apply(Op::Or, &acc, &Obdd::apply(Op::And, &dp, &ds)?)?;
                }
                acc
            }
        };
        memo.insert(r, d.clone());
        Ok(d)
    }

    /// Restricts `root` by `partial`. Literals on assigned variables become
    /// constants; at each decision, elements whose prime became
    /// unsatisfiable are dropped, and a decision left with one element is
    /// replaced by its sub. The result is over the same vtree and is not
    /// re-compressed.
    pub fn condition(&mut self, root: SddRef, partial: &Assignment) -> Result<SddRef> {
        if let Some(v) = partial.domain().find(|&v| !self.vtree.has_var(v)) {
            return Err(Error::VarOutOfScope(v));
        }
        if partial.is_empty() {
            return Ok(root);
        }
        let mut memo = HashMap::new();
        let mut counts = HashMap::new();
        self.condition_rec(root, partial, &mut memo, &mut counts)
    }

    fn condition_rec(
        &mut self,
        r: SddRef,
        partial: &Assignment,
        memo: &mut HashMap<SddRef, SddRef>,
        counts: &mut HashMap<SddRef, BigUint>,
    ) -> Result<SddRef> {
        if let Some(&out) = memo.get(&r) {
            return Ok(out);
        }
        let untouched = match self.respected_node(r) {
            None => true,
            Some(v) => self.vtree.vars_below(v)?.iter().all(|&x| !partial.contains(x)),
        };
        if untouched {
            memo.insert(r, r);
            return Ok(r);
        }
        let out = match self.node(r).clone() {
            SddNode::Constant(_) => r,
            SddNode::Literal { var, positive } => match partial.get(var) {
                Some(b) => self.constant(b == positive),
                None => r,
            },
            SddNode::Decision { vnode, elements } => {
                let mut kept = Vec::with_capacity(elements.len());
                for (p, s) in elements {
                    let p2 = self.condition_rec(p, partial, memo, counts)?;
                    if self.region_count(p2, counts).is_zero() {
                        continue;
                    }
                    let s2 = self.condition_rec(s, partial, memo, counts)?;
                    kept.push((p2, s2));
                }
                match kept.len() {
                    0 => {
                        return Err(Error::InvalidDiagram(format!(
                            "all primes of node {} vanish under conditioning",
                            r.index()
                        )))
                    }
                    1 => {
                        let (p, s) = kept[0];
                        if !self.is_top(p, counts) {
                            return Err(Error::InvalidDiagram(format!(
                                "primes of node {} do not cover the left variables",
                                r.index()
                            )));
                        }
                        s
                    }
                    _ => self.decision(vnode, kept)?,
                }
            }
        };
        memo.insert(r, out);
        Ok(out)
    }

    fn is_top(&self, p: SddRef, counts: &mut HashMap<SddRef, BigUint>) -> bool {
        let c = self.region_count(p, counts);
        c == (BigUint::one() << self.region_size(p))
    }

    /// Enforces (C) at every decision by merging elements with equivalent
    /// subs into one element whose prime is the disjunction of their primes.
    /// Prime disjunctions are computed as OBDDs over the left child, so every
    /// left child under a decision must be right-linear.
    ///
    /// A decision whose subs all turn out equivalent is replaced by that
    /// sub, since a decision needs at least two elements.
    pub fn compress(&mut self, root: SddRef) -> Result<SddRef> {
        let mut memo = HashMap::new();
        self.compress_rec(root, &mut memo)
    }

    fn compress_rec(&mut self, r: SddRef, memo: &mut HashMap<SddRef, SddRef>) -> Result<SddRef> {
        if let Some(&out) = memo.get(&r) {
            return Ok(out);
        }
        let out = match self.node(r).clone() {
            SddNode::Constant(_) | SddNode::Literal { .. } => r,
            SddNode::Decision { vnode, elements } => {
                let (l, rt) = self.vtree.children(vnode)?;
                if !self.vtree.is_right_linear_at(l) {
                    return Err(Error::PrimeNotObdd(format!(
                        "left child {l} of vtree node {vnode} is not right-linear"
                    )));
                }
                let right_vars = self.vtree.vars_below(rt)?.to_vec();
                super::check_cap(right_vars.len())?;

                let mut groups: Vec<(BitVec<u64, Lsb0>, SddRef, Vec<SddRef>)> = Vec::new();
                for (p, s) in elements {
                    let s2 = self.compress_rec(s, memo)?;
                    let t = self.table_over(s2, &right_vars, Execution::Sequential)?;
                    match groups.iter_mut().find(|(gt, _, _)| *gt == t) {
                        Some((_, _, primes)) => primes.push(p),
                        None => groups.push((t, s2, vec![p])),
                    }
                }
                if groups.len() == 1 {
                    groups[0].1
                } else {
                    let mut merged = Vec::with_capacity(groups.len());
                    for (_, s, primes) in groups {
                        let p = if primes.len() == 1 {
                            self.compress_rec(primes[0], memo)?
                        } else {
                            let mut acc = self.to_obdd(primes[0], l)?;
                            for &q in &primes[1..] {
                                acc = Obdd::apply(Op::Or, &acc, &self.to_obdd(q, l)?)?;
                            }
                            self.embed_obdd(&acc, l)?
                        };
                        merged.push((p, s));
                    }
                    self.decision(vnode, merged)?
                }
            }
        };
        memo.insert(r, out);
        Ok(out)
    }
}

impl Obdd {
    /// The compressed SDD of this OBDD over the environment's vtree, which
    /// must be the right-linear vtree of the OBDD's ordering.
    pub fn to_sdd(&self, env: &mut SddEnv) -> Result<SddRef> {
        let root = env.vtree().root();
        if !env.vtree().is_right_linear() {
            return Err(Error::VtreeMismatch("vtree is not right-linear".into()));
        }
        env.embed_obdd(self, root)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boolfn::{x_vars, FunctionOracle};
    use crate::vtree::Vtree;

    #[test]
    fn obdd_embedding_is_valid_and_compressed() {
        let sigma = x_vars(4);
        let e = Obdd::exact_count(4, 2, &sigma).unwrap();
        let mut env = SddEnv::new(Vtree::right_linear(&sigma).unwrap());
        let r = e.to_sdd(&mut env).unwrap();
        env.check_valid(r).unwrap();
        assert!(env.is_compressed(r).unwrap());
        let f = FunctionOracle::exact_count(4, 2).unwrap();
        assert_eq!(env.find_mismatch(r, &f).unwrap(), None);
        let last = e.level_widths()[3];
        assert_eq!(env.size(r).arcs, 6 * (e.internal_count() - last));
        assert_eq!(env.to_obdd(r, env.vtree().root()).unwrap(), e);
    }

    #[test]
    fn embedding_terminals_and_literals() {
        let sigma = x_vars(2);
        let mut env = SddEnv::new(Vtree::right_linear(&sigma).unwrap());
        let t = Obdd::constant(&sigma, true).unwrap();
        assert_eq!(t.to_sdd(&mut env).unwrap(), SddRef::TRUE);
        let x1 = Obdd::literal(&sigma, VarId(1), true).unwrap();
        let r = x1.to_sdd(&mut env).unwrap();
        assert_eq!(env.size(r).arcs, 6);
        let x2 = Obdd::literal(&sigma, VarId(2), false).unwrap();
        let r2 = x2.to_sdd(&mut env).unwrap();
        assert_eq!(env.node(r2), &SddNode::Literal { var: VarId(2), positive: false });

        let other = Obdd::literal(&[VarId(2), VarId(1)], VarId(1), true).unwrap();
        assert!(matches!(other.to_sdd(&mut env), Err(Error::VtreeMismatch(_))));
    }

    #[test]
    fn condition_basics() {
        let sigma = x_vars(2);
        let mut env = SddEnv::new(Vtree::right_linear(&sigma).unwrap());
        let x1 = env.literal(VarId(1), true).unwrap();
        let c = env.condition(x1, &Assignment::new().with(VarId(1), false)).unwrap();
        assert_eq!(c, SddRef::FALSE);
        assert_eq!(env.condition(x1, &Assignment::new()).unwrap(), x1);
        assert!(env.condition(x1, &Assignment::new().with(VarId(5), true)).is_err());
    }

    #[test]
    fn compress_merges_equal_subs() {
        let sigma = x_vars(2);
        let mut env = SddEnv::new(Vtree::right_linear(&sigma).unwrap());
        let root = env.vtree().root();
        let x = env.literal(VarId(1), true).unwrap();
        let nx = env.literal(VarId(1), false).unwrap();
        let d = env.decision(root, vec![(x, SddRef::TRUE), (nx, SddRef::TRUE)]).unwrap();
        let c = env.compress(d).unwrap();
        assert_eq!(c, SddRef::TRUE);
        assert!(env.equivalent(c, d).unwrap());
    }
}
