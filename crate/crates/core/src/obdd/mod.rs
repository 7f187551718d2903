//! Reduced ordered binary decision diagrams over explicit orderings.
//!
//! Every [`Obdd`] is kept in a canonical layout: the terminals sit at
//! indices 0 (⊥) and 1 (⊤), and the reachable internal nodes follow in
//! post-order (low edge first). Two diagrams over the same ordering are
//! therefore isomorphic exactly when they compare equal.

mod minimize;

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::boolfn::{check_distinct, x_vars, Assignment, FunctionOracle, PrimeId, TruthTable, VarId};
use crate::error::{Error, Result};

pub use minimize::{min_obdd_size_by_enumeration, min_obdd_size_exact, min_obdd_size_exact_with, MinObdd, MIN_OBDD_CAP};

pub type NodeRef = u32;

pub const FALSE: NodeRef = 0;
pub const TRUE: NodeRef = 1;

/// Wires generated by one binary decision node when read as a circuit:
/// `(¬x ∧ lo) ∨ (x ∧ hi)`.
pub const ARCS_PER_DECISION: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ObddNode {
    /// Position of the tested variable in the ordering; terminals sit at
    /// `order.len()`.
    pub level: u32,
    pub lo: NodeRef,
    pub hi: NodeRef,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Op {
    And,
    Or,
}

impl Op {
    fn eval(self, a: bool, b: bool) -> bool {
        match self {
            Op::And => a && b,
            Op::Or => a || b,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Obdd {
    order: Vec<VarId>,
    nodes: Vec<ObddNode>,
    root: NodeRef,
}

/// Unique table for one construction.
struct Builder {
    terminal_level: u32,
    nodes: Vec<ObddNode>,
    unique: HashMap<(u32, NodeRef, NodeRef), NodeRef>,
}

impl Builder {
    fn new(levels: usize) -> Self {
        let t = levels as u32;
        Builder {
            terminal_level: t,
            nodes: vec![
                ObddNode { level: t, lo: FALSE, hi: FALSE },
                ObddNode { level: t, lo: TRUE, hi: TRUE },
            ],
            unique: HashMap::new(),
        }
    }

    fn mk(&mut self, level: u32, lo: NodeRef, hi: NodeRef) -> NodeRef {
        if lo == hi {
            return lo;
        }
        debug_assert!(self.nodes[lo as usize].level > level && self.nodes[hi as usize].level > level);
        *self.unique.entry((level, lo, hi)).or_insert_with(|| {
            self.nodes.push(ObddNode { level, lo, hi });
            (self.nodes.len() - 1) as NodeRef
        })
    }

    fn finish(self, order: Vec<VarId>, root: NodeRef) -> Obdd {
        canonical(order, &self.nodes, root, self.terminal_level)
    }
}

/// Copies the part of `nodes` reachable from `root` into canonical layout.
fn canonical(order: Vec<VarId>, nodes: &[ObddNode], root: NodeRef, terminal_level: u32) -> Obdd {
    let t = terminal_level;
    let mut out = vec![
        ObddNode { level: t, lo: FALSE, hi: FALSE },
        ObddNode { level: t, lo: TRUE, hi: TRUE },
    ];
    let mut remap: HashMap<NodeRef, NodeRef> = HashMap::from([(FALSE, FALSE), (TRUE, TRUE)]);
    let mut stack = vec![(root, false)];
    while let Some((r, expanded)) = stack.pop() {
        if remap.contains_key(&r) {
            continue;
        }
        let n = nodes[r as usize];
        if expanded {
            let new = ObddNode {
                level: n.level,
                lo: remap[&n.lo],
                hi: remap[&n.hi],
            };
            out.push(new);
            remap.insert(r, (out.len() - 1) as NodeRef);
        } else {
            stack.push((r, true));
            stack.push((n.hi, false));
            stack.push((n.lo, false));
        }
    }
    Obdd {
        order,
        nodes: out,
        root: remap[&root],
    }
}

impl Obdd {
    pub fn constant(order: &[VarId], value: bool) -> Result<Obdd> {
        check_distinct(order)?;
        Ok(Builder::new(order.len()).finish(order.to_vec(), value as NodeRef))
    }

    pub fn literal(order: &[VarId], var: VarId, positive: bool) -> Result<Obdd> {
        check_distinct(order)?;
        let level = order
            .iter()
            .position(|&v| v == var)
            .ok_or(Error::VarOutOfScope(var))?;
        let mut b = Builder::new(order.len());
        let r = if positive {
            b.mk(level as u32, FALSE, TRUE)
        } else {
            b.mk(level as u32, TRUE, FALSE)
        };
        Ok(b.finish(order.to_vec(), r))
    }

    /// The reduced OBDD of `f` under `sigma`, built from its truth table by
    /// merging equal cofactors bottom-up.
    pub fn from_oracle(f: &FunctionOracle, sigma: &[VarId]) -> Result<Obdd> {
        let table = f.truth_table_in_order(sigma)?;
        Ok(Self::from_table(&table))
    }

    /// The reduced OBDD of `table` under the table's own scope order.
    pub fn from_table(table: &TruthTable) -> Obdd {
        let n = table.scope().len();
        let mut b = Builder::new(n);
        let mut ids: Vec<NodeRef> = table.bits().iter().map(|bit| *bit as NodeRef).collect();
        for level in (0..n).rev() {
            ids = ids
                .chunks_exact(2)
                .map(|pair| b.mk(level as u32, pair[0], pair[1]))
                .collect();
        }
        b.finish(table.scope().to_vec(), ids[0])
    }

    /// `E^i_n` built from the (position, count-so-far) automaton.
    pub fn exact_count(n: usize, i: usize, sigma: &[VarId]) -> Result<Obdd> {
        if i > n {
            return Err(Error::CountOutOfRange { n, count: i });
        }
        check_x_ordering(n, sigma)?;
        let mut b = Builder::new(n);
        // below[c]: node reached with c ones read so far
        let mut below: Vec<NodeRef> = (0..=i).map(|c| (c == i) as NodeRef).collect();
        for level in (0..n).rev() {
            let remaining = n - level;
            below = (0..=i)
                .map(|c| {
                    if c + remaining < i {
                        FALSE
                    } else {
                        let hi = if c < i { below[c + 1] } else { FALSE };
                        b.mk(level as u32, below[c], hi)
                    }
                })
                .collect();
        }
        Ok(b.finish(sigma.to_vec(), below[0]))
    }

    /// The prime `p` of arity `n`: `E^0`, `E^n`, or `E^i ∧ (¬)x_i` via
    /// [`Obdd::apply`].
    pub fn prime(p: PrimeId, n: usize, sigma: &[VarId]) -> Result<Obdd> {
        p.check(n)?;
        match p {
            PrimeId::Empty => Obdd::exact_count(n, 0, sigma),
            PrimeId::Full => Obdd::exact_count(n, n, sigma),
            PrimeId::Split { i, bit } => {
                let e = Obdd::exact_count(n, i, sigma)?;
                let lit = Obdd::literal(sigma, VarId::x(i), bit)?;
                Obdd::apply(Op::And, &e, &lit)
            }
        }
    }

    pub fn apply(op: Op, f: &Obdd, g: &Obdd) -> Result<Obdd> {
        if f.order != g.order {
            return Err(Error::OrderingMismatch);
        }
        let mut b = Builder::new(f.order.len());
        let mut memo: HashMap<(NodeRef, NodeRef), NodeRef> = HashMap::new();
        let root = apply_rec(op, f, g, f.root, g.root, &mut b, &mut memo);
        let out = b.finish(f.order.clone(), root);
        debug_assert!(out.node_count() <= f.node_count() * g.node_count());
        Ok(out)
    }

    pub fn and(&self, other: &Obdd) -> Result<Obdd> {
        Obdd::apply(Op::And, self, other)
    }

    pub fn or(&self, other: &Obdd) -> Result<Obdd> {
        Obdd::apply(Op::Or, self, other)
    }

    /// Restriction by `partial`; the ordering is unchanged and assigned
    /// variables are simply no longer tested.
    pub fn condition(&self, partial: &Assignment) -> Result<Obdd> {
        if let Some(v) = partial.domain().find(|v| !self.order.contains(v)) {
            return Err(Error::VarOutOfScope(v));
        }
        let fixed: Vec<Option<bool>> = self.order.iter().map(|&v| partial.get(v)).collect();
        let mut b = Builder::new(self.order.len());
        let mut memo: HashMap<NodeRef, NodeRef> = HashMap::new();
        let root = self.condition_rec(self.root, &fixed, &mut b, &mut memo);
        let out = b.finish(self.order.clone(), root);
        debug_assert!(out.node_count() <= self.node_count());
        Ok(out)
    }

    fn condition_rec(
        &self,
        r: NodeRef,
        fixed: &[Option<bool>],
        b: &mut Builder,
        memo: &mut HashMap<NodeRef, NodeRef>,
    ) -> NodeRef {
        if self.is_terminal(r) {
            return r;
        }
        if let Some(&out) = memo.get(&r) {
            return out;
        }
        let n = self.nodes[r as usize];
        let out = match fixed[n.level as usize] {
            Some(false) => self.condition_rec(n.lo, fixed, b, memo),
            Some(true) => self.condition_rec(n.hi, fixed, b, memo),
            None => {
                let lo = self.condition_rec(n.lo, fixed, b, memo);
                let hi = self.condition_rec(n.hi, fixed, b, memo);
                b.mk(n.level, lo, hi)
            }
        };
        memo.insert(r, out);
        out
    }

    pub fn evaluate(&self, a: &Assignment) -> Result<bool> {
        let mut r = self.root;
        while !self.is_terminal(r) {
            let n = self.nodes[r as usize];
            let bit = a.require(self.order[n.level as usize])?;
            r = if bit { n.hi } else { n.lo };
        }
        Ok(r == TRUE)
    }

    pub fn truth_table(&self) -> Result<TruthTable> {
        let n = self.order.len();
        TruthTable::from_fn(self.order.clone(), |row| {
            let mut r = self.root;
            while !self.is_terminal(r) {
                let node = self.nodes[r as usize];
                let bit = (row >> (n - 1 - node.level as usize)) & 1 == 1;
                r = if bit { node.hi } else { node.lo };
            }
            r == TRUE
        })
    }

    pub fn order(&self) -> &[VarId] {
        &self.order
    }

    pub fn root(&self) -> NodeRef {
        self.root
    }

    pub fn node(&self, r: NodeRef) -> ObddNode {
        self.nodes[r as usize]
    }

    /// Stored nodes; entries 0 and 1 are the terminals.
    pub fn nodes(&self) -> &[ObddNode] {
        &self.nodes
    }

    pub fn is_terminal(&self, r: NodeRef) -> bool {
        r <= TRUE
    }

    pub fn var_at(&self, level: u32) -> VarId {
        self.order[level as usize]
    }

    pub fn is_constant(&self) -> Option<bool> {
        self.is_terminal(self.root).then_some(self.root == TRUE)
    }

    pub fn internal_count(&self) -> usize {
        self.nodes.len() - 2
    }

    /// Reachable nodes including the reachable terminals.
    pub fn node_count(&self) -> usize {
        if self.is_terminal(self.root) {
            return 1;
        }
        let mut has = [false; 2];
        for n in &self.nodes[2..] {
            for c in [n.lo, n.hi] {
                if c <= TRUE {
                    has[c as usize] = true;
                }
            }
        }
        self.internal_count() + has.iter().filter(|&&h| h).count()
    }

    /// Circuit size: six wires per decision node.
    pub fn arcs(&self) -> usize {
        ARCS_PER_DECISION * self.internal_count()
    }

    /// Internal nodes per level.
    pub fn level_widths(&self) -> Vec<usize> {
        let mut w = vec![0; self.order.len()];
        for n in &self.nodes[2..] {
            w[n.level as usize] += 1;
        }
        w
    }

    /// Checks the reduction invariants: no redundant test, no duplicate
    /// node, strictly increasing levels along edges, nothing unreachable.
    pub fn check_reduced(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidDiagram(m));
        let t = self.order.len() as u32;
        if self.nodes.len() < 2 || self.nodes[0].level != t || self.nodes[1].level != t {
            return bad("terminals missing".into());
        }
        let mut seen = HashMap::new();
        for (k, n) in self.nodes.iter().enumerate().skip(2) {
            if n.lo == n.hi {
                return bad(format!("node {k} has equal children"));
            }
            for c in [n.lo, n.hi] {
                if c as usize >= k || self.nodes[c as usize].level <= n.level {
                    return bad(format!("node {k} has a bad child {c}"));
                }
            }
            if seen.insert((n.level, n.lo, n.hi), k).is_some() {
                return bad(format!("node {k} duplicates another node"));
            }
        }
        let c = canonical(self.order.clone(), &self.nodes, self.root, t);
        if c.nodes.len() != self.nodes.len() {
            return bad("unreachable nodes present".into());
        }
        Ok(())
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph obdd {\n");
        writeln!(out, "  n0 [label=\"⊥\", shape=box];").unwrap();
        writeln!(out, "  n1 [label=\"⊤\", shape=box];").unwrap();
        for (k, n) in self.nodes.iter().enumerate().skip(2) {
            writeln!(out, "  n{k} [label=\"{}\", shape=circle];", self.var_at(n.level)).unwrap();
            writeln!(out, "  n{k} -> n{} [style=dashed];", n.lo).unwrap();
            writeln!(out, "  n{k} -> n{};", n.hi).unwrap();
        }
        writeln!(out, "  root [shape=point];\n  root -> n{};", self.root).unwrap();
        out.push_str("}\n");
        out
    }
}

fn apply_rec(
    op: Op,
    f: &Obdd,
    g: &Obdd,
    a: NodeRef,
    c: NodeRef,
    b: &mut Builder,
    memo: &mut HashMap<(NodeRef, NodeRef), NodeRef>,
) -> NodeRef {
    if f.is_terminal(a) && g.is_terminal(c) {
        return op.eval(a == TRUE, c == TRUE) as NodeRef;
    }
    if let Some(&r) = memo.get(&(a, c)) {
        return r;
    }
    let na = f.node(a);
    let nc = g.node(c);
    let top = na.level.min(nc.level);
    let (a0, a1) = if na.level == top { (na.lo, na.hi) } else { (a, a) };
    let (c0, c1) = if nc.level == top { (nc.lo, nc.hi) } else { (c, c) };
    let lo = apply_rec(op, f, g, a0, c0, b, memo);
    let hi = apply_rec(op, f, g, a1, c1, b, memo);
    let r = b.mk(top, lo, hi);
    memo.insert((a, c), r);
    r
}

fn check_x_ordering(n: usize, sigma: &[VarId]) -> Result<()> {
    check_distinct(sigma)?;
    if sigma.len() != n {
        return Err(Error::ArityMismatch {
            expected: n,
            got: sigma.len(),
        });
    }
    let xs = x_vars(n);
    if let Some(&v) = sigma.iter().find(|v| !xs.contains(v)) {
        return Err(Error::VarOutOfScope(v));
    }
    Ok(())
}

/// Parses a comma-separated list of variable ids, e.g. `3,1,2`.
pub fn parse_ordering(s: &str) -> Result<Vec<VarId>> {
    let order = s
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<u32>()
                .map(VarId)
                .map_err(|_| Error::BadFunctionSpec(s.to_string()))
        })
        .collect::<Result<Vec<_>>>()?;
    check_distinct(&order)?;
    Ok(order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boolfn::eval_exact_count;

    fn xs(n: usize) -> Vec<VarId> {
        x_vars(n)
    }

    #[test]
    fn constants_and_literals() {
        let f = Obdd::constant(&xs(3), false).unwrap();
        assert_eq!(f.internal_count(), 0);
        assert_eq!(f.node_count(), 1);
        let x = Obdd::from_oracle(
            &FunctionOracle::new("x1", xs(1), |a| a.get(VarId(1)) == Some(true)).unwrap(),
            &xs(1),
        )
        .unwrap();
        assert_eq!(x.internal_count(), 1);
        assert_eq!(x.arcs(), 6);
        assert_eq!(x, Obdd::literal(&xs(1), VarId(1), true).unwrap());
        assert!(Obdd::literal(&xs(2), VarId(5), true).is_err());
    }

    #[test]
    fn hwb4_matches_cofactor_enumeration() {
        let f = FunctionOracle::hwb(4);
        let d = Obdd::from_oracle(&f, &xs(4)).unwrap();
        d.check_reduced().unwrap();
        let t = f.truth_table().unwrap();
        let bits: Vec<bool> = (0..16).map(|r| t.get(r)).collect();
        // distinct subfunctions after fixing the first k variables that
        // still depend on x_{k+1}
        let mut expected = 0;
        for k in 0..4 {
            let size = 16 >> k;
            let mut subs: Vec<&[bool]> = bits.chunks(size).collect();
            subs.sort();
            subs.dedup();
            expected += subs.iter().filter(|s| s[..size / 2] != s[size / 2..]).count();
        }
        assert_eq!(d.internal_count(), expected);
    }

    #[test]
    fn exact_count_examples() {
        let e = Obdd::exact_count(4, 2, &xs(4)).unwrap();
        assert!(e.internal_count() <= 10);
        let t = FunctionOracle::exact_count(4, 2).unwrap().truth_table().unwrap();
        assert_eq!(e.truth_table().unwrap(), t);

        let z = Obdd::exact_count(3, 0, &[VarId(2), VarId(3), VarId(1)]).unwrap();
        assert_eq!(z.internal_count(), 3);
        assert_eq!(z.level_widths(), vec![1, 1, 1]);
        assert!(Obdd::exact_count(3, 4, &xs(3)).is_err());
        assert!(Obdd::exact_count(3, 1, &xs(2)).is_err());
    }

    #[test]
    fn exact_count_agrees_with_oracle() {
        let orders = |n: usize| -> Vec<Vec<VarId>> {
            let mut out = vec![xs(n)];
            let mut r = xs(n);
            r.reverse();
            out.push(r);
            let mut interleave = xs(n);
            interleave.sort_by_key(|v| (v.0 % 2, v.0));
            out.push(interleave);
            out
        };
        for n in 1..=10 {
            for i in 0..=n {
                for sigma in orders(n) {
                    let e = Obdd::exact_count(n, i, &sigma).unwrap();
                    e.check_reduced().unwrap();
                    for row in 0..(1u64 << n) {
                        let a = Assignment::from_row(&xs(n), row);
                        assert_eq!(e.evaluate(&a).unwrap(), eval_exact_count(n, i, &a).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn apply_examples() {
        let o = xs(2);
        let x1 = Obdd::literal(&o, VarId(1), true).unwrap();
        let x2 = Obdd::literal(&o, VarId(2), true).unwrap();
        let both = x1.and(&x2).unwrap();
        assert_eq!(both.internal_count(), 2);
        assert_eq!(both.node_count(), 4);
        assert!(both.node_count() <= x1.node_count() * x2.node_count());
        let bits: Vec<bool> = (0..4).map(|r| both.truth_table().unwrap().get(r)).collect();
        assert_eq!(bits, vec![false, false, false, true]);

        let top = Obdd::constant(&o, true).unwrap();
        assert_eq!(both.and(&top).unwrap(), both);

        let other = Obdd::literal(&[VarId(2), VarId(1)], VarId(1), true).unwrap();
        assert!(matches!(x1.and(&other), Err(Error::OrderingMismatch)));
    }

    #[test]
    fn condition_examples() {
        let o = xs(2);
        let x1 = Obdd::literal(&o, VarId(1), true).unwrap();
        let x2 = Obdd::literal(&o, VarId(2), true).unwrap();
        let both = x1.and(&x2).unwrap();
        let c = both.condition(&Assignment::new().with(VarId(1), true)).unwrap();
        assert_eq!(c, x2);
        assert_eq!(both.condition(&Assignment::new()).unwrap(), both);
        assert!(both.condition(&Assignment::new().with(VarId(7), true)).is_err());
    }

    #[test]
    fn primes_are_quadratic() {
        for n in [1usize, 2, 5, 12, 25, 40] {
            let envelope = ARCS_PER_DECISION * (n * (n + 1) / 2 + 2 * n);
            for p in PrimeId::family(n) {
                let d = Obdd::prime(p, n, &xs(n)).unwrap();
                d.check_reduced().unwrap();
                assert!(d.arcs() <= envelope, "n={n} {p}: {}", d.arcs());
            }
        }
    }

    #[test]
    fn fig4_prime() {
        let p = Obdd::prime(PrimeId::Split { i: 2, bit: false }, 4, &xs(4)).unwrap();
        for row in 0..16u64 {
            let a = Assignment::from_row(&xs(4), row);
            let w = row.count_ones();
            let x2 = a.get(VarId(2)).unwrap();
            assert_eq!(p.evaluate(&a).unwrap(), w == 2 && !x2);
        }
    }

    #[test]
    fn dot_is_digraph() {
        let e = Obdd::exact_count(4, 2, &xs(4)).unwrap();
        let dot = e.to_dot();
        assert!(dot.starts_with("digraph"));
        assert_eq!(dot.matches("shape=circle").count(), e.internal_count());
    }

    #[test]
    fn orderings_parse() {
        assert_eq!(parse_ordering("3, 1,2").unwrap(), vec![VarId(3), VarId(1), VarId(2)]);
        assert!(parse_ordering("1,1").is_err());
        assert!(parse_ordering("a").is_err());
    }
}
