//! Boolean functions over explicit variable scopes.
//!
//! This module holds the semantic definitions every diagram in the crate is
//! checked against: the hidden weighted bit function, the exact-count
//! functions, the prime family that partitions `{0,1}^n`, and the
//! generalized hidden weighted bit function over `x_1..x_n, y_0..y_n`.
//!
//! Variable ids are fixed across the crate: `x_i` has id `i` and `y_j` has id
//! `n + 1 + j`. Rows of a truth table enumerate assignments lexicographically
//! with the first scope variable as the most significant bit.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use bitvec::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest scope for which truth tables may be materialized.
pub const TABLE_CAP: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VarId(pub u32);

impl VarId {
    /// `x_i`, 1-based.
    pub fn x(i: usize) -> VarId {
        VarId(i as u32)
    }

    /// `y_j` for arity `n`, 0-based.
    pub fn y(n: usize, j: usize) -> VarId {
        VarId((n + 1 + j) as u32)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub fn x_vars(n: usize) -> Vec<VarId> {
    (1..=n).map(VarId::x).collect()
}

pub fn y_vars(n: usize) -> Vec<VarId> {
    (0..=n).map(|j| VarId::y(n, j)).collect()
}

/// Checks that `vars` has no repeated variable.
pub fn check_distinct(vars: &[VarId]) -> Result<()> {
    let mut seen = std::collections::HashSet::with_capacity(vars.len());
    for &v in vars {
        if !seen.insert(v) {
            return Err(Error::DuplicateVar(v));
        }
    }
    Ok(())
}

/// A (possibly partial) map from variables to bits, stored densely by id.
#[derive(Debug, Clone, Default)]
pub struct Assignment {
    values: Vec<Option<bool>>,
}

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs<I: IntoIterator<Item = (VarId, bool)>>(pairs: I) -> Self {
        let mut a = Self::new();
        for (v, b) in pairs {
            a.set(v, b);
        }
        a
    }

    /// Assigns `bits[k]` to `scope[k]`.
    pub fn from_bits(scope: &[VarId], bits: &[bool]) -> Self {
        Self::from_pairs(scope.iter().copied().zip(bits.iter().copied()))
    }

    /// The assignment of row `row` in the lexicographic enumeration of `scope`.
    pub fn from_row(scope: &[VarId], row: u64) -> Self {
        let mut a = Self::new();
        a.fill_row(scope, row);
        a
    }

    /// Overwrites the values of `scope` with row `row`; other variables keep
    /// their values.
    pub fn fill_row(&mut self, scope: &[VarId], row: u64) {
        let len = scope.len();
        for (k, &v) in scope.iter().enumerate() {
            self.set(v, (row >> (len - 1 - k)) & 1 == 1);
        }
    }

    pub fn set(&mut self, v: VarId, bit: bool) {
        let i = v.index();
        if i >= self.values.len() {
            self.values.resize(i + 1, None);
        }
        self.values[i] = Some(bit);
    }

    pub fn unset(&mut self, v: VarId) {
        if let Some(slot) = self.values.get_mut(v.index()) {
            *slot = None;
        }
    }

    pub fn with(mut self, v: VarId, bit: bool) -> Self {
        self.set(v, bit);
        self
    }

    #[inline]
    pub fn get(&self, v: VarId) -> Option<bool> {
        self.values.get(v.index()).copied().flatten()
    }

    pub fn require(&self, v: VarId) -> Result<bool> {
        self.get(v).ok_or(Error::MissingVar(v))
    }

    pub fn contains(&self, v: VarId) -> bool {
        self.get(v).is_some()
    }

    /// Assigned variables in increasing id order.
    pub fn domain(&self) -> impl Iterator<Item = VarId> + '_ {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, b)| b.is_some())
            .map(|(i, _)| VarId(i as u32))
    }

    pub fn pairs(&self) -> Vec<(VarId, bool)> {
        self.values
            .iter()
            .enumerate()
            .filter_map(|(i, b)| b.map(|b| (VarId(i as u32), b)))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.values.iter().filter(|b| b.is_some()).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Copies every value of `other` into `self`.
    pub fn extend_from(&mut self, other: &Assignment) {
        for (v, b) in other.pairs() {
            self.set(v, b);
        }
    }

    pub fn is_total_on(&self, scope: &[VarId]) -> bool {
        scope.iter().all(|&v| self.contains(v))
    }
}

impl PartialEq for Assignment {
    fn eq(&self, other: &Self) -> bool {
        self.pairs() == other.pairs()
    }
}

impl Eq for Assignment {}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .pairs()
            .into_iter()
            .map(|(v, b)| format!("{}={}", v, b as u8))
            .collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

/// One member of the prime family of arity `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PrimeId {
    /// Weight 0.
    Empty,
    /// Weight `n`.
    Full,
    /// Weight `i` (`1 <= i <= n-1`) with `x_i` equal to `bit`.
    Split { i: usize, bit: bool },
}

impl PrimeId {
    /// The `2n` primes in the order `P0, Pn, P(1,0), P(1,1), ..., P(n-1,1)`.
    pub fn family(n: usize) -> Vec<PrimeId> {
        let mut out = vec![PrimeId::Empty, PrimeId::Full];
        for i in 1..n {
            out.push(PrimeId::Split { i, bit: false });
            out.push(PrimeId::Split { i, bit: true });
        }
        out
    }

    pub fn check(self, n: usize) -> Result<()> {
        let ok = match self {
            PrimeId::Empty | PrimeId::Full => n >= 1,
            PrimeId::Split { i, .. } => i >= 1 && i < n,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidPrime {
                n,
                tag: self.to_string(),
            })
        }
    }

    /// The weight class this prime selects.
    pub fn weight(self, n: usize) -> usize {
        match self {
            PrimeId::Empty => 0,
            PrimeId::Full => n,
            PrimeId::Split { i, .. } => i,
        }
    }

    /// Whether the hidden weighted bit function is `1` on this block.
    pub fn accepts_hwb(self) -> bool {
        match self {
            PrimeId::Empty => false,
            PrimeId::Full => true,
            PrimeId::Split { bit, .. } => bit,
        }
    }

    /// The literal paired with this prime in the generalized function:
    /// `(y_j, polarity)`.
    pub fn y_literal(self, n: usize) -> (VarId, bool) {
        match self {
            PrimeId::Empty => (VarId::y(n, 0), false),
            PrimeId::Full => (VarId::y(n, n), true),
            PrimeId::Split { i, bit } => (VarId::y(n, i), bit),
        }
    }

    fn holds(self, n: usize, weight: usize, bits: &[bool]) -> bool {
        match self {
            PrimeId::Empty => weight == 0,
            PrimeId::Full => weight == n,
            PrimeId::Split { i, bit } => weight == i && bits[i - 1] == bit,
        }
    }
}

impl fmt::Display for PrimeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PrimeId::Empty => write!(f, "P0"),
            PrimeId::Full => write!(f, "Pn"),
            PrimeId::Split { i, bit } => write!(f, "P{}_{}", i, *bit as u8),
        }
    }
}

impl FromStr for PrimeId {
    type Err = Error;

    /// Accepts `P0`, `Pn` and `P<i>_<j>`, case-insensitively and with the
    /// leading `P` optional.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::BadFunctionSpec(s.to_string());
        let t = s.trim().to_ascii_lowercase();
        let t = t.strip_prefix('p').unwrap_or(&t);
        match t {
            "0" => return Ok(PrimeId::Empty),
            "n" => return Ok(PrimeId::Full),
            _ => {}
        }
        let (i, j) = t.split_once('_').ok_or_else(bad)?;
        let i: usize = i.parse().map_err(|_| bad())?;
        let bit = match j {
            "0" => false,
            "1" => true,
            _ => return Err(bad()),
        };
        Ok(PrimeId::Split { i, bit })
    }
}

/// Reads `x_1..x_n` from `a`, requiring its domain to be exactly those
/// variables.
fn x_bits(n: usize, a: &Assignment) -> Result<Vec<bool>> {
    let bits = (1..=n)
        .map(|i| a.require(VarId::x(i)))
        .collect::<Result<Vec<_>>>()?;
    if a.len() != n {
        return Err(Error::ArityMismatch {
            expected: n,
            got: a.len(),
        });
    }
    Ok(bits)
}

fn weight(bits: &[bool]) -> usize {
    bits.iter().filter(|&&b| b).count()
}

fn hwb_of(bits: &[bool]) -> bool {
    let w = weight(bits);
    w >= 1 && bits[w - 1]
}

pub fn eval_hwb(n: usize, a: &Assignment) -> Result<bool> {
    Ok(hwb_of(&x_bits(n, a)?))
}

pub fn eval_exact_count(n: usize, i: usize, a: &Assignment) -> Result<bool> {
    if i > n {
        return Err(Error::CountOutOfRange { n, count: i });
    }
    Ok(weight(&x_bits(n, a)?) == i)
}

pub fn eval_prime(p: PrimeId, n: usize, a: &Assignment) -> Result<bool> {
    p.check(n)?;
    let bits = x_bits(n, a)?;
    Ok(p.holds(n, weight(&bits), &bits))
}

/// `F_n`, evaluated as the disjunction over the prime family of
/// `prime ∧ literal(y)`.
pub fn eval_generalized_hwb(n: usize, a: &Assignment) -> Result<bool> {
    let mut bits = Vec::with_capacity(n);
    for i in 1..=n {
        bits.push(a.require(VarId::x(i))?);
    }
    let mut ys = Vec::with_capacity(n + 1);
    for j in 0..=n {
        ys.push(a.require(VarId::y(n, j))?);
    }
    if a.len() != 2 * n + 1 {
        return Err(Error::ArityMismatch {
            expected: 2 * n + 1,
            got: a.len(),
        });
    }
    Ok(ghwb_of(n, &bits, &ys))
}

fn ghwb_of(n: usize, bits: &[bool], ys: &[bool]) -> bool {
    let w = weight(bits);
    PrimeId::family(n).into_iter().any(|p| {
        let (y, pol) = p.y_literal(n);
        p.holds(n, w, bits) && ys[y.index() - n - 1] == pol
    })
}

/// A materialized truth table over an ordered scope.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TruthTable {
    scope: Vec<VarId>,
    bits: BitVec<u64, Lsb0>,
}

impl TruthTable {
    pub fn new(scope: Vec<VarId>, bits: BitVec<u64, Lsb0>) -> Result<Self> {
        check_distinct(&scope)?;
        if bits.len() != 1usize << scope.len() {
            return Err(Error::ArityMismatch {
                expected: 1 << scope.len(),
                got: bits.len(),
            });
        }
        Ok(TruthTable { scope, bits })
    }

    pub fn from_fn(scope: Vec<VarId>, f: impl Fn(u64) -> bool) -> Result<Self> {
        if scope.len() > TABLE_CAP {
            return Err(Error::ScopeTooLarge {
                size: scope.len(),
                cap: TABLE_CAP,
            });
        }
        let rows = 1u64 << scope.len();
        let bits = (0..rows).map(f).collect();
        Self::new(scope, bits)
    }

    pub fn scope(&self) -> &[VarId] {
        &self.scope
    }

    pub fn rows(&self) -> usize {
        self.bits.len()
    }

    pub fn get(&self, row: usize) -> bool {
        self.bits[row]
    }

    pub fn bits(&self) -> &BitSlice<u64, Lsb0> {
        &self.bits
    }

    pub fn count_ones(&self) -> u64 {
        self.bits.count_ones() as u64
    }

    /// Row index of `a` restricted to this table's scope.
    pub fn row_of(&self, a: &Assignment) -> Result<usize> {
        let mut row = 0usize;
        for &v in &self.scope {
            row = (row << 1) | a.require(v)? as usize;
        }
        Ok(row)
    }
}

type Rule = Arc<dyn Fn(&Assignment) -> bool + Send + Sync>;

/// A boolean function over an ordered scope, evaluated by rule.
#[derive(Clone)]
pub struct FunctionOracle {
    name: String,
    scope: Vec<VarId>,
    rule: Rule,
}

impl fmt::Debug for FunctionOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FunctionOracle")
            .field("name", &self.name)
            .field("scope", &self.scope)
            .finish()
    }
}

impl FunctionOracle {
    /// `rule` must read only variables of `scope`.
    pub fn new(
        name: impl Into<String>,
        scope: Vec<VarId>,
        rule: impl Fn(&Assignment) -> bool + Send + Sync + 'static,
    ) -> Result<Self> {
        check_distinct(&scope)?;
        Ok(FunctionOracle {
            name: name.into(),
            scope,
            rule: Arc::new(rule),
        })
    }

    pub fn hwb(n: usize) -> Self {
        Self::new(format!("hwb:{n}"), x_vars(n), move |a| {
            hwb_of(&read_x(n, a))
        })
        .expect("x variables are distinct")
    }

    pub fn exact_count(n: usize, i: usize) -> Result<Self> {
        if i > n {
            return Err(Error::CountOutOfRange { n, count: i });
        }
        Self::new(format!("exact:{n}:{i}"), x_vars(n), move |a| {
            weight(&read_x(n, a)) == i
        })
    }

    pub fn prime(p: PrimeId, n: usize) -> Result<Self> {
        p.check(n)?;
        Self::new(format!("prime:{n}:{p}"), x_vars(n), move |a| {
            let bits = read_x(n, a);
            p.holds(n, weight(&bits), &bits)
        })
    }

    /// `F_n` over `x_1..x_n, y_0..y_n`.
    pub fn generalized_hwb(n: usize) -> Self {
        let mut scope = x_vars(n);
        scope.extend(y_vars(n));
        Self::new(format!("ghwb:{n}"), scope, move |a| {
            let bits = read_x(n, a);
            let ys: Vec<bool> = (0..=n)
                .map(|j| a.get(VarId::y(n, j)).unwrap_or(false))
                .collect();
            ghwb_of(n, &bits, &ys)
        })
        .expect("x and y variables are distinct")
    }

    pub fn constant(scope: Vec<VarId>, value: bool) -> Result<Self> {
        let name = if value { "true" } else { "false" };
        Self::new(name, scope, move |_| value)
    }

    pub fn from_table(name: impl Into<String>, table: TruthTable) -> Self {
        let table = Arc::new(table);
        let scope = table.scope.clone();
        let t = table.clone();
        FunctionOracle {
            name: name.into(),
            scope,
            rule: Arc::new(move |a| t.row_of(a).map(|r| t.get(r)).unwrap_or(false)),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn scope(&self) -> &[VarId] {
        &self.scope
    }

    pub fn arity(&self) -> usize {
        self.scope.len()
    }

    pub fn eval(&self, a: &Assignment) -> Result<bool> {
        if let Some(&v) = self.scope.iter().find(|&&v| !a.contains(v)) {
            return Err(Error::MissingVar(v));
        }
        Ok((self.rule)(a))
    }

    /// Evaluates without checking that `a` covers the scope.
    #[inline]
    pub fn eval_unchecked(&self, a: &Assignment) -> bool {
        (self.rule)(a)
    }

    fn check_cap(&self) -> Result<()> {
        if self.scope.len() > TABLE_CAP {
            Err(Error::ScopeTooLarge {
                size: self.scope.len(),
                cap: TABLE_CAP,
            })
        } else {
            Ok(())
        }
    }

    pub fn truth_table(&self) -> Result<TruthTable> {
        self.truth_table_in_order(&self.scope.clone())
    }

    /// Truth table with rows enumerated over `order`, a permutation of the
    /// scope.
    pub fn truth_table_in_order(&self, order: &[VarId]) -> Result<TruthTable> {
        self.check_cap()?;
        self.check_permutation(order)?;
        let mut a = Assignment::new();
        let rows = 1u64 << order.len();
        let mut bits = BitVec::with_capacity(rows as usize);
        for row in 0..rows {
            a.fill_row(order, row);
            bits.push((self.rule)(&a));
        }
        TruthTable::new(order.to_vec(), bits)
    }

    pub(crate) fn check_permutation(&self, order: &[VarId]) -> Result<()> {
        check_distinct(order)?;
        if order.len() != self.scope.len() {
            return Err(Error::ArityMismatch {
                expected: self.scope.len(),
                got: order.len(),
            });
        }
        if let Some(&v) = order.iter().find(|v| !self.scope.contains(v)) {
            return Err(Error::VarOutOfScope(v));
        }
        Ok(())
    }

    pub fn model_count(&self) -> Result<u64> {
        Ok(self.truth_table()?.count_ones())
    }

    /// The subfunction obtained by fixing the variables of `partial`; the
    /// remaining scope keeps its order.
    pub fn restrict(&self, partial: &Assignment) -> Result<FunctionOracle> {
        if let Some(v) = partial.domain().find(|v| !self.scope.contains(v)) {
            return Err(Error::VarOutOfScope(v));
        }
        let scope: Vec<VarId> = self
            .scope
            .iter()
            .copied()
            .filter(|&v| !partial.contains(v))
            .collect();
        let fixed = partial.clone();
        let inner = self.rule.clone();
        Ok(FunctionOracle {
            name: format!("{}|{}", self.name, partial),
            scope,
            rule: Arc::new(move |a| {
                let mut full = a.clone();
                full.extend_from(&fixed);
                inner(&full)
            }),
        })
    }
}

fn read_x(n: usize, a: &Assignment) -> Vec<bool> {
    (1..=n).map(|i| a.get(VarId::x(i)).unwrap_or(false)).collect()
}

/// Built-in function names accepted on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FunctionSpec {
    Hwb(usize),
    Exact(usize, usize),
    Prime(usize, PrimeId),
    GeneralizedHwb(usize),
}

impl FunctionSpec {
    pub fn oracle(&self) -> Result<FunctionOracle> {
        match *self {
            FunctionSpec::Hwb(n) => Ok(FunctionOracle::hwb(n)),
            FunctionSpec::Exact(n, i) => FunctionOracle::exact_count(n, i),
            FunctionSpec::Prime(n, p) => FunctionOracle::prime(p, n),
            FunctionSpec::GeneralizedHwb(n) => Ok(FunctionOracle::generalized_hwb(n)),
        }
    }
}

impl FromStr for FunctionSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::BadFunctionSpec(s.to_string());
        let parts: Vec<&str> = s.trim().split(':').collect();
        let num = |t: &str| t.parse::<usize>().map_err(|_| bad());
        let spec = match parts.as_slice() {
            ["hwb", n] => FunctionSpec::Hwb(num(n)?),
            ["exact", n, i] => FunctionSpec::Exact(num(n)?, num(i)?),
            ["prime", n, tag] => FunctionSpec::Prime(num(n)?, tag.parse()?),
            ["ghwb", n] => FunctionSpec::GeneralizedHwb(num(n)?),
            _ => return Err(bad()),
        };
        let n = match spec {
            FunctionSpec::Hwb(n)
            | FunctionSpec::Exact(n, _)
            | FunctionSpec::Prime(n, _)
            | FunctionSpec::GeneralizedHwb(n) => n,
        };
        if n == 0 {
            return Err(bad());
        }
        match spec {
            FunctionSpec::Exact(n, i) if i > n => return Err(Error::CountOutOfRange { n, count: i }),
            FunctionSpec::Prime(n, p) => p.check(n)?,
            _ => {}
        }
        Ok(spec)
    }
}

impl fmt::Display for FunctionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FunctionSpec::Hwb(n) => write!(f, "hwb:{n}"),
            FunctionSpec::Exact(n, i) => write!(f, "exact:{n}:{i}"),
            FunctionSpec::Prime(n, p) => write!(f, "prime:{n}:{p}"),
            FunctionSpec::GeneralizedHwb(n) => write!(f, "ghwb:{n}"),
        }
    }
}
