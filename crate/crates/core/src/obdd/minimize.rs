//! Exact minimum OBDD size over all variable orderings.
//!
//! Dynamic programming over subsets `S` of the scope, where `S` is the set
//! of variables placed first. The distinct subfunctions left after fixing
//! `S` do not depend on how `S` is ordered, and the number of nodes labelled
//! `v` when `v` comes right after `S` is the number of those subfunctions
//! that depend on `v`. A layer of subsets of equal size only reads the
//! previous layer, so subsets within a layer are processed independently.

use itertools::Itertools;

use crate::boolfn::{FunctionOracle, VarId};
use crate::error::{Error, Result};
use crate::obdd::{Obdd, ARCS_PER_DECISION};
use crate::par::{self, Execution};

pub const MIN_OBDD_CAP: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinObdd {
    pub internal_nodes: usize,
    pub arcs: usize,
    /// Lexicographically smallest ordering (by variable id) among the
    /// minimizers.
    pub ordering: Vec<VarId>,
}

pub fn min_obdd_size_exact(f: &FunctionOracle) -> Result<MinObdd> {
    min_obdd_size_exact_with(f, Execution::default())
}

/// Distinct subfunctions over the unfixed variables, packed `stride` words
/// each. Bit `r` of a table is row `r`, first unfixed variable most
/// significant.
struct Classes {
    vars: usize,
    stride: usize,
    words: Vec<u64>,
}

impl Classes {
    fn len(&self) -> usize {
        self.words.len() / self.stride
    }

    fn iter(&self) -> impl Iterator<Item = &[u64]> {
        self.words.chunks_exact(self.stride)
    }
}

fn stride_for(vars: usize) -> usize {
    if vars <= 6 {
        1
    } else {
        1 << (vars - 6)
    }
}

const LOW_HALF: [u64; 6] = [
    0x5555_5555_5555_5555,
    0x3333_3333_3333_3333,
    0x0f0f_0f0f_0f0f_0f0f,
    0x00ff_00ff_00ff_00ff,
    0x0000_ffff_0000_ffff,
    0x0000_0000_ffff_ffff,
];

/// Whether a table over `vars` variables depends on the row bit `b`.
fn depends_on(table: &[u64], vars: usize, b: usize) -> bool {
    if b >= 6 {
        let block = 1 << (b - 6);
        table
            .chunks_exact(2 * block)
            .any(|c| c[..block] != c[block..])
    } else {
        let valid = if vars >= 6 { u64::MAX } else { (1u64 << (1 << vars)) - 1 };
        let mask = LOW_HALF[b] & valid;
        table
            .iter()
            .any(|&w| ((w >> (1 << b)) ^ w) & mask != 0)
    }
}

/// Appends both cofactors of `table` with respect to row bit `b`.
fn push_cofactors(table: &[u64], vars: usize, b: usize, lo: &mut Vec<u64>, hi: &mut Vec<u64>) {
    if b >= 6 {
        let block = 1 << (b - 6);
        for c in table.chunks_exact(2 * block) {
            lo.extend_from_slice(&c[..block]);
            hi.extend_from_slice(&c[block..]);
        }
        return;
    }
    let out_vars = vars - 1;
    let out_stride = stride_for(out_vars);
    let out_bits = 1usize << out_vars;
    let start_lo = lo.len();
    let start_hi = hi.len();
    lo.resize(start_lo + out_stride, 0);
    hi.resize(start_hi + out_stride, 0);
    let low_mask = (1usize << b) - 1;
    for r in 0..out_bits {
        let i0 = ((r & !low_mask) << 1) | (r & low_mask);
        let i1 = i0 | (1 << b);
        let bit0 = (table[i0 >> 6] >> (i0 & 63)) & 1;
        let bit1 = (table[i1 >> 6] >> (i1 & 63)) & 1;
        lo[start_lo + (r >> 6)] |= bit0 << (r & 63);
        hi[start_hi + (r >> 6)] |= bit1 << (r & 63);
    }
}

fn dedup(vars: usize, mut tables: Vec<Vec<u64>>) -> Classes {
    tables.sort_unstable();
    tables.dedup();
    Classes {
        vars,
        stride: stride_for(vars),
        words: tables.concat(),
    }
}

/// Row bit of scope variable `j` in a table over the complement of `mask`.
fn bit_of(mask: u32, n: usize, j: usize) -> usize {
    // variables after j that are still unfixed
    let after = !mask & ((1u32 << n) - 1) & !((1u32 << (j + 1)) - 1);
    after.count_ones() as usize
}

pub fn min_obdd_size_exact_with(f: &FunctionOracle, exec: Execution) -> Result<MinObdd> {
    let n = f.arity();
    if n > MIN_OBDD_CAP {
        return Err(Error::ScopeTooLarge {
            size: n,
            cap: MIN_OBDD_CAP,
        });
    }
    let scope = f.scope().to_vec();
    let full = (1usize << n) - 1;
    let table = f.truth_table()?;

    let mut root_words = vec![0u64; stride_for(n)];
    for r in 0..table.rows() {
        if table.get(r) {
            root_words[r >> 6] |= 1 << (r & 63);
        }
    }
    let mut layer: Vec<(u32, Classes)> = vec![(
        0,
        Classes {
            vars: n,
            stride: stride_for(n),
            words: root_words,
        },
    )];
    // arcs[mask * n + j]: nodes labelled scope[j] when it directly follows mask
    let mut label_count = vec![0u32; (full + 1) * n.max(1)];

    for k in 0..=n {
        let counts = par::map_vec(exec, layer.iter().collect::<Vec<_>>(), |(mask, classes)| {
            (0..n)
                .filter(|&j| mask & (1 << j) == 0)
                .map(|j| {
                    let b = bit_of(*mask, n, j);
                    let c = classes
                        .iter()
                        .filter(|t| depends_on(t, classes.vars, b))
                        .count();
                    (j, c as u32)
                })
                .collect::<Vec<_>>()
        });
        for ((mask, _), cs) in layer.iter().zip(&counts) {
            for &(j, c) in cs {
                label_count[*mask as usize * n + j] = c;
            }
        }
        if k == n {
            break;
        }

        // next layer: each subset is derived from the predecessor obtained by
        // removing its lowest scope index
        let prev: std::collections::HashMap<u32, &Classes> =
            layer.iter().map(|(m, c)| (*m, c)).collect();
        let next_masks: Vec<u32> = (0..=full as u32)
            .filter(|m| m.count_ones() as usize == k + 1)
            .collect();
        let next = par::map_vec(exec, next_masks, |mask| {
            let j = mask.trailing_zeros() as usize;
            let pred_mask = mask & !(1 << j);
            let pred = prev[&pred_mask];
            let b = bit_of(pred_mask, n, j);
            let mut tables = Vec::with_capacity(2 * pred.len());
            for t in pred.iter() {
                let mut lo = Vec::new();
                let mut hi = Vec::new();
                push_cofactors(t, pred.vars, b, &mut lo, &mut hi);
                tables.push(lo);
                tables.push(hi);
            }
            (mask, dedup(pred.vars - 1, tables))
        });
        drop(prev);
        layer = next;
    }

    // best[mask]: fewest nodes needed below a prefix that fixes mask
    let mut best = vec![0u32; full + 1];
    for mask in (0..full).rev() {
        best[mask] = (0..n)
            .filter(|&j| mask & (1 << j) == 0)
            .map(|j| label_count[mask * n + j] + best[mask | (1 << j)])
            .min()
            .expect("mask is not full");
    }

    let mut by_id: Vec<usize> = (0..n).collect();
    by_id.sort_by_key(|&j| scope[j]);
    let mut ordering = Vec::with_capacity(n);
    let mut mask = 0usize;
    while mask != full {
        let j = by_id
            .iter()
            .copied()
            .find(|&j| {
                mask & (1 << j) == 0
                    && label_count[mask * n + j] + best[mask | (1 << j)] == best[mask]
            })
            .expect("some variable attains the minimum");
        ordering.push(scope[j]);
        mask |= 1 << j;
    }

    let internal_nodes = best[0] as usize;
    Ok(MinObdd {
        internal_nodes,
        arcs: ARCS_PER_DECISION * internal_nodes,
        ordering,
    })
}

/// Minimum over all `n!` orderings by building each reduced OBDD. Used to
/// cross-check the subset DP on small scopes.
pub fn min_obdd_size_by_enumeration(f: &FunctionOracle) -> Result<MinObdd> {
    let mut scope = f.scope().to_vec();
    scope.sort();
    let mut best: Option<MinObdd> = None;
    // permutations of a sorted list come out in lexicographic order, so the
    // first minimizer seen is the lexicographically smallest
    for order in scope.iter().copied().permutations(scope.len()) {
        let d = Obdd::from_oracle(f, &order)?;
        let size = d.internal_count();
        if best.as_ref().is_none_or(|b| size < b.internal_nodes) {
            best = Some(MinObdd {
                internal_nodes: size,
                arcs: d.arcs(),
                ordering: order,
            });
        }
    }
    match best {
        Some(b) => Ok(b),
        None => Ok(MinObdd {
            internal_nodes: 0,
            arcs: 0,
            ordering: Vec::new(),
        }),
    }
}
