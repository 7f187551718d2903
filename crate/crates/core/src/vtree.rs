//! Variable trees: rooted, full, ordered binary trees whose leaves are in
//! bijection with a variable set.
//!
//! Node ids are dense and follow the in-order traversal, so the nodes of any
//! rooted subtree form a contiguous id interval. `Y_v`, the variables below
//! `v`, is computed once at construction.
//!
//! File format, one item per line:
//!
//! ```text
//! c comment
//! vtree <node-count>
//! L <id> <var-id>
//! I <id> <left-id> <right-id>
//! ```
//!
//! Nodes are written children-first; ids must agree with the in-order
//! traversal of the tree they describe.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::boolfn::{check_distinct, x_vars, y_vars, VarId};
use crate::error::{parse_err, Error, Result};

pub type VtreeNodeId = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VtreeNode {
    Leaf(VarId),
    Internal {
        left: VtreeNodeId,
        right: VtreeNodeId,
    },
}

/// Tree shape used to build vtrees before ids are assigned.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Shape {
    Leaf(VarId),
    Node(Box<Shape>, Box<Shape>),
}

impl Shape {
    pub fn node(l: Shape, r: Shape) -> Shape {
        Shape::Node(Box::new(l), Box::new(r))
    }

    pub fn right_linear(order: &[VarId]) -> Option<Shape> {
        let (&last, rest) = order.split_last()?;
        Some(
            rest.iter()
                .rev()
                .fold(Shape::Leaf(last), |acc, &v| Shape::node(Shape::Leaf(v), acc)),
        )
    }

    fn leaves(&self, out: &mut Vec<VarId>) {
        match self {
            Shape::Leaf(v) => out.push(*v),
            Shape::Node(l, r) => {
                l.leaves(out);
                r.leaves(out);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vtree {
    nodes: Vec<VtreeNode>,
    parent: Vec<Option<VtreeNodeId>>,
    /// Inclusive in-order id interval covered by each subtree.
    span: Vec<(VtreeNodeId, VtreeNodeId)>,
    vars: Vec<Vec<VarId>>,
    leaf_of: HashMap<VarId, VtreeNodeId>,
    root: VtreeNodeId,
}

impl Vtree {
    pub fn from_shape(shape: &Shape) -> Result<Vtree> {
        let mut leaves = Vec::new();
        shape.leaves(&mut leaves);
        check_distinct(&leaves)?;

        let mut t = Vtree {
            nodes: Vec::new(),
            parent: Vec::new(),
            span: Vec::new(),
            vars: Vec::new(),
            leaf_of: HashMap::new(),
            root: 0,
        };
        t.root = t.build(shape);
        Ok(t)
    }

    fn push(&mut self, node: VtreeNode) -> VtreeNodeId {
        self.nodes.push(node);
        self.parent.push(None);
        self.span.push((0, 0));
        self.vars.push(Vec::new());
        self.nodes.len() - 1
    }

    fn build(&mut self, shape: &Shape) -> VtreeNodeId {
        match shape {
            Shape::Leaf(v) => {
                let id = self.push(VtreeNode::Leaf(*v));
                self.span[id] = (id, id);
                self.vars[id] = vec![*v];
                self.leaf_of.insert(*v, id);
                id
            }
            Shape::Node(l, r) => {
                let left = self.build(l);
                let id = self.push(VtreeNode::Internal { left, right: 0 });
                let right = self.build(r);
                self.nodes[id] = VtreeNode::Internal { left, right };
                self.parent[left] = Some(id);
                self.parent[right] = Some(id);
                self.span[id] = (self.span[left].0, self.span[right].1);
                let mut vars = self.vars[left].clone();
                vars.extend_from_slice(&self.vars[right]);
                self.vars[id] = vars;
                id
            }
        }
    }

    /// Right-linear vtree whose left-first traversal is `order`.
    pub fn right_linear(order: &[VarId]) -> Result<Vtree> {
        let shape = Shape::right_linear(order).ok_or(Error::EmptyOrder)?;
        Vtree::from_shape(&shape)
    }

    /// Root with `right_linear(sigma)` on the left and the single leaf
    /// `y = VarId::y(n, 0)` on the right.
    pub fn hwb(n: usize, sigma: &[VarId]) -> Result<Vtree> {
        check_permutation_of(sigma, &x_vars(n))?;
        let left = Shape::right_linear(sigma).ok_or(Error::EmptyOrder)?;
        Vtree::from_shape(&Shape::node(left, Shape::Leaf(VarId::y(n, 0))))
    }

    /// Root with `right_linear(sigma)` over `x_1..x_n` on the left and
    /// `right_linear(rho)` over `y_0..y_n` on the right.
    pub fn generalized_hwb(n: usize, sigma: &[VarId], rho: &[VarId]) -> Result<Vtree> {
        check_permutation_of(sigma, &x_vars(n))?;
        check_permutation_of(rho, &y_vars(n))?;
        let left = Shape::right_linear(sigma).ok_or(Error::EmptyOrder)?;
        let right = Shape::right_linear(rho).ok_or(Error::EmptyOrder)?;
        Vtree::from_shape(&Shape::node(left, right))
    }

    pub fn root(&self) -> VtreeNodeId {
        self.root
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, v: VtreeNodeId) -> Result<&VtreeNode> {
        self.nodes.get(v).ok_or(Error::UnknownVtreeNode(v))
    }

    pub fn nodes(&self) -> &[VtreeNode] {
        &self.nodes
    }

    pub fn is_leaf(&self, v: VtreeNodeId) -> bool {
        matches!(self.nodes.get(v), Some(VtreeNode::Leaf(_)))
    }

    /// `(left, right)` children of an internal node.
    pub fn children(&self, v: VtreeNodeId) -> Result<(VtreeNodeId, VtreeNodeId)> {
        match self.node(v)? {
            VtreeNode::Internal { left, right } => Ok((*left, *right)),
            VtreeNode::Leaf(_) => Err(Error::LeafVtreeNode(v)),
        }
    }

    pub fn parent(&self, v: VtreeNodeId) -> Option<VtreeNodeId> {
        self.parent.get(v).copied().flatten()
    }

    pub fn leaf_of(&self, var: VarId) -> Option<VtreeNodeId> {
        self.leaf_of.get(&var).copied()
    }

    pub fn var_of(&self, v: VtreeNodeId) -> Option<VarId> {
        match self.nodes.get(v) {
            Some(VtreeNode::Leaf(x)) => Some(*x),
            _ => None,
        }
    }

    pub fn has_var(&self, var: VarId) -> bool {
        self.leaf_of.contains_key(&var)
    }

    /// `Y_v` in left-first order.
    pub fn vars_below(&self, v: VtreeNodeId) -> Result<&[VarId]> {
        self.vars
            .get(v)
            .map(Vec::as_slice)
            .ok_or(Error::UnknownVtreeNode(v))
    }

    pub fn variables(&self) -> &[VarId] {
        &self.vars[self.root]
    }

    /// Whether `desc` lies in the subtree rooted at `anc` (inclusive).
    #[inline]
    pub fn is_in_subtree(&self, desc: VtreeNodeId, anc: VtreeNodeId) -> bool {
        let (lo, hi) = self.span[anc];
        lo <= desc && desc <= hi
    }

    pub fn internal_nodes(&self) -> impl Iterator<Item = VtreeNodeId> + '_ {
        (0..self.nodes.len()).filter(|&v| !self.is_leaf(v))
    }

    pub fn leftfirst_ordering(&self) -> Vec<VarId> {
        self.variables().to_vec()
    }

    pub fn is_right_linear(&self) -> bool {
        self.is_right_linear_at(self.root)
    }

    /// Whether every internal node of `T_v` has a leaf as left child.
    pub fn is_right_linear_at(&self, v: VtreeNodeId) -> bool {
        let (lo, hi) = self.span[v];
        (lo..=hi).all(|w| match self.nodes[w] {
            VtreeNode::Internal { left, .. } => self.is_leaf(left),
            VtreeNode::Leaf(_) => true,
        })
    }

    pub fn shape_at(&self, v: VtreeNodeId) -> Shape {
        match self.nodes[v] {
            VtreeNode::Leaf(x) => Shape::Leaf(x),
            VtreeNode::Internal { left, right } => {
                Shape::node(self.shape_at(left), self.shape_at(right))
            }
        }
    }

    /// `T_v` as a standalone vtree (renumbered from 0).
    pub fn subtree(&self, v: VtreeNodeId) -> Result<Vtree> {
        self.node(v)?;
        Vtree::from_shape(&self.shape_at(v))
    }

    pub fn serialize(&self) -> String {
        let mut out = String::new();
        writeln!(out, "vtree {}", self.nodes.len()).unwrap();
        let mut stack = vec![(self.root, false)];
        while let Some((v, expanded)) = stack.pop() {
            match self.nodes[v] {
                VtreeNode::Leaf(x) => writeln!(out, "L {v} {x}").unwrap(),
                VtreeNode::Internal { left, right } => {
                    if expanded {
                        writeln!(out, "I {v} {left} {right}").unwrap();
                    } else {
                        stack.push((v, true));
                        stack.push((right, false));
                        stack.push((left, false));
                    }
                }
            }
        }
        out
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph vtree {\n");
        for (v, node) in self.nodes.iter().enumerate() {
            match node {
                VtreeNode::Leaf(x) => writeln!(out, "  v{v} [label=\"{x}\", shape=plaintext];").unwrap(),
                VtreeNode::Internal { left, right } => {
                    writeln!(out, "  v{v} [label=\"{v}\", shape=circle];").unwrap();
                    writeln!(out, "  v{v} -> v{left};\n  v{v} -> v{right};").unwrap();
                }
            }
        }
        out.push_str("}\n");
        out
    }

    pub fn parse(text: &str) -> Result<Vtree> {
        let mut count: Option<(usize, usize)> = None;
        let mut raw: HashMap<usize, (usize, VtreeNode)> = HashMap::new();
        for (idx, line) in text.lines().enumerate() {
            let lineno = idx + 1;
            let toks: Vec<&str> = line.split_whitespace().collect();
            let Some(&head) = toks.first() else { continue };
            if head == "c" {
                continue;
            }
            let num = |t: &str| {
                t.parse::<usize>()
                    .map_err(|_| parse_err(lineno, format!("bad integer `{t}`")))
            };
            match (head, toks.len()) {
                ("vtree", 2) => {
                    if count.is_some() {
                        return Err(parse_err(lineno, "duplicate header"));
                    }
                    count = Some((num(toks[1])?, lineno));
                    continue;
                }
                _ if count.is_none() => return Err(parse_err(lineno, "missing `vtree` header")),
                ("L", 3) => {
                    let id = num(toks[1])?;
                    let var = VarId(num(toks[2])? as u32);
                    if raw.insert(id, (lineno, VtreeNode::Leaf(var))).is_some() {
                        return Err(parse_err(lineno, format!("duplicate node id {id}")));
                    }
                }
                ("I", 4) => {
                    let id = num(toks[1])?;
                    let left = num(toks[2])?;
                    let right = num(toks[3])?;
                    if raw
                        .insert(id, (lineno, VtreeNode::Internal { left, right }))
                        .is_some()
                    {
                        return Err(parse_err(lineno, format!("duplicate node id {id}")));
                    }
                }
                _ => return Err(parse_err(lineno, format!("malformed line `{line}`"))),
            }
        }
        let (count, header_line) = count.ok_or_else(|| parse_err(0, "missing `vtree` header"))?;
        if raw.len() != count {
            return Err(parse_err(
                header_line,
                format!("header declares {count} nodes, found {}", raw.len()),
            ));
        }
        if count == 0 {
            return Err(parse_err(header_line, "empty vtree"));
        }

        let mut parent: HashMap<usize, usize> = HashMap::new();
        for (&id, (lineno, node)) in &raw {
            if let VtreeNode::Internal { left, right } = node {
                for c in [*left, *right] {
                    if !raw.contains_key(&c) {
                        return Err(parse_err(*lineno, format!("dangling child id {c}")));
                    }
                    if parent.insert(c, id).is_some() {
                        return Err(parse_err(*lineno, format!("node {c} has two parents")));
                    }
                }
            }
        }
        let roots: Vec<usize> = raw.keys().copied().filter(|k| !parent.contains_key(k)).collect();
        let &[root] = roots.as_slice() else {
            return Err(parse_err(header_line, format!("expected one root, found {}", roots.len())));
        };

        // Walk from the root, checking acyclicity and in-order consistency.
        // A cycle not reachable from the root leaves nodes unvisited.
        let mut inorder: Vec<usize> = Vec::with_capacity(count);
        fn shape_of(
            id: usize,
            raw: &HashMap<usize, (usize, VtreeNode)>,
            inorder: &mut Vec<usize>,
            depth: usize,
        ) -> Result<Shape> {
            if depth > raw.len() {
                return Err(parse_err(raw[&id].0, "cycle in vtree"));
            }
            match &raw[&id].1 {
                VtreeNode::Leaf(v) => {
                    inorder.push(id);
                    Ok(Shape::Leaf(*v))
                }
                VtreeNode::Internal { left, right } => {
                    let l = shape_of(*left, raw, inorder, depth + 1)?;
                    inorder.push(id);
                    let r = shape_of(*right, raw, inorder, depth + 1)?;
                    Ok(Shape::node(l, r))
                }
            }
        }
        let shape = shape_of(root, &raw, &mut inorder, 0)?;
        if inorder.len() != count {
            return Err(parse_err(header_line, "nodes unreachable from the root"));
        }
        if let Some((pos, &id)) = inorder.iter().enumerate().find(|(pos, &id)| *pos != id) {
            return Err(parse_err(
                raw[&id].0,
                format!("node id {id} is not in in-order position {pos}"),
            ));
        }
        Vtree::from_shape(&shape).map_err(|e| match e {
            Error::DuplicateVar(v) => parse_err(header_line, format!("variable {v} on two leaves")),
            other => other,
        })
    }
}

fn check_permutation_of(order: &[VarId], vars: &[VarId]) -> Result<()> {
    check_distinct(order)?;
    if order.len() != vars.len() {
        return Err(Error::ArityMismatch {
            expected: vars.len(),
            got: order.len(),
        });
    }
    if let Some(&v) = order.iter().find(|v| !vars.contains(v)) {
        return Err(Error::VarOutOfScope(v));
    }
    Ok(())
}
