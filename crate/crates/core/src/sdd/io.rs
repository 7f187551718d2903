//! Line-based SDD files and DOT rendering.
//!
//! ```text
//! sdd <node-count>
//! F <id>
//! T <id>
//! L <id> <var-id> <+|->
//! D <id> <vtree-node-id> <m> <prime-id> <sub-id> ...
//! ```
//!
//! Nodes are listed children first and the last node line is the root.
//! Lines starting with `c` are comments.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::{SddEnv, SddNode, SddRef};
use crate::boolfn::VarId;
use crate::error::{parse_err, Result};
use crate::vtree::Vtree;

impl SddEnv {
    /// Serializes the nodes reachable from `root`, renumbered densely in
    /// emission order.
    pub fn serialize(&self, root: SddRef) -> String {
        let order = self.reachable(root);
        let ids: HashMap<SddRef, usize> = order.iter().enumerate().map(|(i, &r)| (r, i)).collect();
        let mut out = format!("sdd {}\n", order.len());
        for (i, &r) in order.iter().enumerate() {
            match self.node(r) {
                SddNode::Constant(false) => writeln!(out, "F {i}"),
                SddNode::Constant(true) => writeln!(out, "T {i}"),
                SddNode::Literal { var, positive } => {
                    writeln!(out, "L {i} {} {}", var.0, if *positive { '+' } else { '-' })
                }
                SddNode::Decision { vnode, elements } => {
                    write!(out, "D {i} {vnode} {}", elements.len()).unwrap();
                    for (p, s) in elements {
                        write!(out, " {} {}", ids[p], ids[s]).unwrap();
                    }
                    writeln!(out)
                }
            }
            .unwrap();
        }
        out
    }

    /// Parses an SDD file over `vtree`, returning a fresh environment and the
    /// root (the last node line).
    pub fn parse(vtree: Vtree, text: &str) -> Result<(SddEnv, SddRef)> {
        let mut env = SddEnv::new(vtree);
        let mut declared: Option<usize> = None;
        let mut ids: HashMap<usize, SddRef> = HashMap::new();
        let mut root = None;
        let mut count = 0usize;

        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let toks: Vec<&str> = raw.split_whitespace().collect();
            let Some(&head) = toks.first() else { continue };
            if head.starts_with('c') {
                continue;
            }
            let num = |i: usize| -> Result<usize> {
                toks.get(i)
                    .ok_or_else(|| parse_err(line, "missing field"))?
                    .parse::<usize>()
                    .map_err(|_| parse_err(line, format!("bad integer {:?}", toks[i])))
            };
            if head == "sdd" {
                if declared.is_some() {
                    return Err(parse_err(line, "duplicate header"));
                }
                if toks.len() != 2 {
                    return Err(parse_err(line, "expected `sdd <node-count>`"));
                }
                declared = Some(num(1)?);
                continue;
            }
            if declared.is_none() {
                return Err(parse_err(line, "missing `sdd` header"));
            }
            let id = num(1)?;
            if ids.contains_key(&id) {
                return Err(parse_err(line, format!("node id {id} defined twice")));
            }
            let child = |c: usize| -> Result<SddRef> {
                ids.get(&c)
                    .copied()
                    .ok_or_else(|| parse_err(line, format!("reference to undefined node {c}")))
            };
            let r = match head {
                "F" | "T" => {
                    if toks.len() != 2 {
                        return Err(parse_err(line, "expected `F|T <id>`"));
                    }
                    env.constant(head == "T")
                }
                "L" => {
                    if toks.len() != 4 {
                        return Err(parse_err(line, "expected `L <id> <var> <sign>`"));
                    }
                    let var = VarId(num(2)? as u32);
                    let positive = match toks[3] {
                        "+" => true,
                        "-" => false,
                        s => return Err(parse_err(line, format!("bad sign {s:?}"))),
                    };
                    env.literal(var, positive)
                        .map_err(|e| parse_err(line, e.to_string()))?
                }
                "D" => {
                    let vnode = num(2)?;
                    let m = num(3)?;
                    if m < 2 {
                        return Err(parse_err(line, format!("decision with {m} elements")));
                    }
                    if toks.len() != 4 + 2 * m {
                        return Err(parse_err(line, format!("expected {m} prime/sub pairs")));
                    }
                    let mut elements = Vec::with_capacity(m);
                    for e in 0..m {
                        elements.push((child(num(4 + 2 * e)?)?, child(num(5 + 2 * e)?)?));
                    }
                    env.decision(vnode, elements)
                        .map_err(|e| parse_err(line, e.to_string()))?
                }
                other => return Err(parse_err(line, format!("unknown line type {other:?}"))),
            };
            ids.insert(id, r);
            root = Some(r);
            count += 1;
        }

        let declared = declared.ok_or_else(|| parse_err(0, "missing `sdd` header"))?;
        if declared != count {
            return Err(parse_err(0, format!("header declares {declared} nodes, found {count}")));
        }
        let root = root.ok_or_else(|| parse_err(0, "no nodes"))?;
        Ok((env, root))
    }

    /// DOT rendering: each decision is one record of paired prime/sub boxes,
    /// labelled with its vtree node. Constants and literals are drawn inside
    /// the boxes; boxes holding a decision point to it.
    pub fn to_dot(&self, root: SddRef) -> String {
        let mut out = String::from("digraph sdd {\n  node [fontname=\"Helvetica\"];\n");
        let text = |r: SddRef| -> Option<String> {
            match self.node(r) {
                SddNode::Constant(b) => Some(if *b { "⊤".into() } else { "⊥".into() }),
                SddNode::Literal { var, positive } => {
                    Some(format!("{}{}", if *positive { "" } else { "¬" }, var))
                }
                SddNode::Decision { .. } => None,
            }
        };
        if let Some(t) = text(root) {
            writeln!(out, "  n{} [shape=plaintext,label=\"{t}\"];", root.index()).unwrap();
        }
        let mut edges = String::new();
        for r in self.reachable(root) {
            let SddNode::Decision { vnode, elements } = self.node(r) else { continue };
            let boxes: Vec<String> = elements
                .iter()
                .enumerate()
                .map(|(e, &(p, s))| {
                    for (port, c) in [("p", p), ("s", s)] {
                        if text(c).is_none() {
                            writeln!(edges, "  n{}:{port}{e} -> n{};", r.index(), c.index()).unwrap();
                        }
                    }
                    format!(
                        "{{<p{e}> {}|<s{e}> {}}}",
                        text(p).unwrap_or_default(),
                        text(s).unwrap_or_default()
                    )
                })
                .collect();
            writeln!(
                out,
                "  n{} [shape=record,xlabel=\"v{vnode}\",label=\"{}\"];",
                r.index(),
                boxes.join("|")
            )
            .unwrap();
        }
        out.push_str(&edges);
        out.push_str("}\n");
        out
    }
}
