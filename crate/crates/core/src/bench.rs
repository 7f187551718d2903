//! Experiment drivers behind the command line: size tables, compression
//! blowup, the verification suite, exports, and exact OBDD minima.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;

use crate::boolfn::{x_vars, y_vars, Assignment, FunctionOracle, FunctionSpec, PrimeId, VarId};
use crate::constructions::{
    build_fn_sdd, build_hwb_sdd, hwb_equivalence_certificate, partition_by_apply,
    partition_by_enumeration, ConstructionArtifact, Role, CERTIFICATE_CAP,
};
use crate::error::{Error, Result};
use crate::obdd::{min_obdd_size_exact_with, parse_ordering, MinObdd, Obdd, MIN_OBDD_CAP};
use crate::par::{self, Execution};
use crate::sdd::SddEnv;
use crate::vtree::Vtree;

/// Largest `n` for the compression experiment.
pub const BLOWUP_CAP: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Construction {
    #[serde(rename = "SDD_HWB")]
    SddHwb,
    #[serde(rename = "SDD_FN")]
    SddFn,
    #[serde(rename = "OBDD_FIXED")]
    ObddFixed,
    #[serde(rename = "OBDD_MIN")]
    ObddMin,
}

impl fmt::Display for Construction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Construction::SddHwb => "SDD_HWB",
            Construction::SddFn => "SDD_FN",
            Construction::ObddFixed => "OBDD_FIXED",
            Construction::ObddMin => "OBDD_MIN",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SizeReport {
    pub function: String,
    pub n: usize,
    pub construction: Construction,
    pub nodes: usize,
    pub arcs: usize,
    pub ms: u64,
    pub descriptor: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlowupRow {
    pub n: usize,
    pub arcs_before: usize,
    pub arcs_after: usize,
    pub nodes_before: usize,
    pub nodes_after: usize,
    /// Internal nodes of the HWB OBDD over the same ordering.
    pub obdd_fixed_nodes: usize,
    pub ms: u64,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    pub exec: Execution,
    /// Report 0 in every timing column so output is byte-stable.
    pub deterministic: bool,
}

impl RunOptions {
    fn elapsed(&self, start: Instant) -> u64 {
        if self.deterministic {
            0
        } else {
            start.elapsed().as_millis() as u64
        }
    }
}

/// A variable ordering given on the command line: `natural`, `reverse`, or
/// an explicit comma-separated id list.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum OrderingSpec {
    #[default]
    Natural,
    Reverse,
    Explicit(Vec<VarId>),
}

impl OrderingSpec {
    /// Resolves against the variables `vars` in their natural order.
    pub fn resolve(&self, vars: &[VarId]) -> Result<Vec<VarId>> {
        match self {
            OrderingSpec::Natural => Ok(vars.to_vec()),
            OrderingSpec::Reverse => Ok(vars.iter().rev().copied().collect()),
            OrderingSpec::Explicit(order) => {
                let mut a = order.clone();
                let mut b = vars.to_vec();
                a.sort();
                b.sort();
                if a != b {
                    return Err(Error::ArityMismatch {
                        expected: vars.len(),
                        got: order.len(),
                    });
                }
                Ok(order.clone())
            }
        }
    }
}

impl FromStr for OrderingSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "natural" => Ok(OrderingSpec::Natural),
            "reverse" => Ok(OrderingSpec::Reverse),
            other => parse_ordering(other).map(OrderingSpec::Explicit),
        }
    }
}

fn check_range(from: usize, to: usize) -> Result<()> {
    if from == 0 {
        return Err(Error::InvalidRange(format!("{from}..{to}: n starts at 1")));
    }
    Ok(())
}

fn ids(vs: &[VarId]) -> String {
    vs.iter().map(|v| v.0.to_string()).collect::<Vec<_>>().join(" ")
}

/// One `SDD_FN` row per `n` in `from..=to`, plus an `OBDD_MIN` row for the
/// exact HWB minimum when `n` is within the minimization cap. An empty range
/// yields no rows.
pub fn separation(
    from: usize,
    to: usize,
    sigma: &OrderingSpec,
    rho: &OrderingSpec,
    opts: RunOptions,
) -> Result<Vec<SizeReport>> {
    check_range(from, to)?;
    let ns: Vec<usize> = (from..=to).collect();
    let per_n = par::map_vec(opts.exec, ns, |n| -> Result<Vec<SizeReport>> {
        let start = Instant::now();
        let art = build_fn_sdd(n, &sigma.resolve(&x_vars(n))?, &rho.resolve(&y_vars(n))?)?;
        let size = art.size();
        let mut rows = vec![SizeReport {
            function: FunctionSpec::GeneralizedHwb(n).to_string(),
            n,
            construction: Construction::SddFn,
            nodes: size.nodes,
            arcs: size.arcs,
            ms: opts.elapsed(start),
            descriptor: art.descriptor(),
        }];
        if n <= MIN_OBDD_CAP {
            let start = Instant::now();
            let m = min_obdd_size_exact_with(&FunctionOracle::hwb(n), opts.exec)?;
            rows.push(SizeReport {
                function: FunctionSpec::Hwb(n).to_string(),
                n,
                construction: Construction::ObddMin,
                nodes: m.internal_nodes,
                arcs: m.arcs,
                ms: opts.elapsed(start),
                descriptor: format!("order={}", ids(&m.ordering)),
            });
        }
        Ok(rows)
    });
    Ok(per_n.into_iter().collect::<Result<Vec<_>>>()?.concat())
}

/// Sizes of the HWB construction before and after compression, alongside
/// the HWB OBDD over the same ordering.
pub fn compress_blowup(from: usize, to: usize, opts: RunOptions) -> Result<Vec<BlowupRow>> {
    check_range(from, to)?;
    if to > BLOWUP_CAP && from <= to {
        return Err(Error::ScopeTooLarge {
            size: to,
            cap: BLOWUP_CAP,
        });
    }
    let ns: Vec<usize> = (from..=to).collect();
    par::map_vec(opts.exec, ns, |n| blowup_row(n, opts))
        .into_iter()
        .collect()
}

pub fn blowup_row(n: usize, opts: RunOptions) -> Result<BlowupRow> {
    let start = Instant::now();
    let sigma = x_vars(n);
    let mut art = build_hwb_sdd(n, &sigma)?;
    let before = art.size();
    let after_root = art.env.compress(art.root)?;
    let after = art.env.size(after_root);
    let fixed = Obdd::from_oracle(&FunctionOracle::hwb(n), &sigma)?;
    Ok(BlowupRow {
        n,
        arcs_before: before.arcs,
        arcs_after: after.arcs,
        nodes_before: before.nodes,
        nodes_after: after.nodes,
        obdd_fixed_nodes: fixed.internal_count(),
        ms: opts.elapsed(start),
    })
}

pub fn write_csv<T: Serialize, W: Write>(rows: &[T], header: &[&str], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    let io = |e: csv::Error| Error::Output(e.to_string());
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.serialize(r).map_err(io)?;
    }
    w.flush().map_err(|e| Error::Output(e.to_string()))?;
    Ok(())
}

pub const SIZE_HEADER: [&str; 7] = ["function", "n", "construction", "nodes", "arcs", "ms", "descriptor"];
pub const BLOWUP_HEADER: [&str; 7] = [
    "n",
    "arcs_before",
    "arcs_after",
    "nodes_before",
    "nodes_after",
    "obdd_fixed_nodes",
    "ms",
];

pub fn size_csv(rows: &[SizeReport]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(rows, &SIZE_HEADER, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

pub fn blowup_csv(rows: &[BlowupRow]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(rows, &BLOWUP_HEADER, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: impl Into<String>) -> Check {
        Check {
            name: name.to_string(),
            passed,
            detail: detail.into(),
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        if self.detail.is_empty() {
            write!(f, "{tag} {}", self.name)
        } else {
            write!(f, "{tag} {}: {}", self.name, self.detail)
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        let failed = self.checks.iter().filter(|c| !c.passed).count();
        write!(f, "{} checks, {failed} failed", self.checks.len())
    }
}

/// Validation, compression status, and equivalence of one artifact.
/// Failures name the violated condition.
pub fn verify_artifact(art: &ConstructionArtifact) -> Result<Vec<Check>> {
    let tag = match art.role {
        Role::Hwb => "hwb",
        Role::GeneralizedHwb => "fn",
    };
    let mut out = Vec::new();
    let report = art.env.validate(art.root)?;
    let failed: Vec<String> = report.failed_conditions().iter().map(|c| c.to_string()).collect();
    out.push(Check::new(
        &format!("{tag}.validate"),
        report.is_valid(),
        if failed.is_empty() {
            String::new()
        } else {
            format!("violates {}", failed.join(","))
        },
    ));

    let compressed = art.env.is_compressed(art.root)?;
    match art.role {
        Role::GeneralizedHwb => out.push(Check::new(
            "fn.compressed",
            compressed,
            if compressed { "" } else { "violates C" },
        )),
        // a single weight class per sub only happens from n = 2 on
        Role::Hwb if art.n >= 2 => out.push(Check::new(
            "hwb.not_compressed",
            !compressed,
            if compressed { "unexpectedly satisfies C" } else { "" },
        )),
        Role::Hwb => {}
    }

    let mismatch = art.env.find_mismatch(art.root, &art.oracle())?;
    out.push(Check::new(
        &format!("{tag}.equivalence"),
        mismatch.is_none(),
        mismatch.map_or(String::new(), |a| format!("differs at {a}")),
    ));
    Ok(out)
}

/// Every construction check at arity `n`.
pub fn verify(n: usize) -> Result<VerifyReport> {
    if n == 0 {
        return Err(Error::InvalidRange("n must be at least 1".into()));
    }
    if n > CERTIFICATE_CAP {
        return Err(Error::ScopeTooLarge {
            size: n,
            cap: CERTIFICATE_CAP,
        });
    }
    let sigma = x_vars(n);
    let hwb = build_hwb_sdd(n, &sigma)?;
    let mut fnc = build_fn_sdd(n, &sigma, &y_vars(n))?;
    let mut checks = verify_artifact(&hwb)?;
    checks.extend(verify_artifact(&fnc)?);

    let by_enum = partition_by_enumeration(n)?;
    let by_apply = partition_by_apply(n, &sigma)?;
    checks.push(Check::new("partition.enumeration", by_enum.holds(), format!("{by_enum:?}")));
    checks.push(Check::new("partition.apply", by_apply.holds(), format!("{by_apply:?}")));
    checks.push(Check::new("partition.agree", by_enum == by_apply, ""));

    let ones = Assignment::from_pairs(y_vars(n).into_iter().map(|y| (y, true)));
    let conditioned = fnc.env.condition(fnc.root, &ones)?;
    fnc.root = conditioned;
    let mismatch = fnc.env.find_mismatch(conditioned, &FunctionOracle::hwb(n))?;
    checks.push(Check::new(
        "fn.condition_y_true",
        mismatch.is_none(),
        mismatch.map_or(String::new(), |a| format!("differs from HWB at {a}")),
    ));

    let cert = hwb_equivalence_certificate(n)?;
    checks.push(Check::new("hwb.certificate", cert.passed(), cert.to_string()));
    Ok(VerifyReport { checks })
}

/// Objects that `export` can write.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExportObject {
    HwbSdd(usize),
    FnSdd(usize),
    /// An OBDD of a built-in function over an ordering.
    Obdd(FunctionSpec, OrderingSpec),
    HwbVtree(usize),
    FnVtree(usize),
    LinearVtree(Vec<VarId>),
}

impl FromStr for ExportObject {
    type Err = Error;

    /// `hwb-sdd:N`, `fn-sdd:N`, `exact:n:i[@order]`, `prime:n:tag[@order]`,
    /// `hwb:N[@order]`, `vtree:hwb:N`, `vtree:fn:N`, `vtree:linear:ids`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::BadFunctionSpec(s.to_string());
        let num = |t: &str| t.parse::<usize>().map_err(|_| bad()).and_then(|n| if n == 0 { Err(bad()) } else { Ok(n) });
        if let Some(rest) = s.strip_prefix("vtree:") {
            return match rest.split_once(':') {
                Some(("hwb", n)) => Ok(ExportObject::HwbVtree(num(n)?)),
                Some(("fn", n)) => Ok(ExportObject::FnVtree(num(n)?)),
                Some(("linear", ord)) => Ok(ExportObject::LinearVtree(parse_ordering(ord)?)),
                _ => Err(bad()),
            };
        }
        if let Some(n) = s.strip_prefix("hwb-sdd:") {
            return Ok(ExportObject::HwbSdd(num(n)?));
        }
        if let Some(n) = s.strip_prefix("fn-sdd:") {
            return Ok(ExportObject::FnSdd(num(n)?));
        }
        let (f, order) = match s.split_once('@') {
            Some((f, o)) => (f, o.parse()?),
            None => (s, OrderingSpec::Natural),
        };
        Ok(ExportObject::Obdd(f.parse()?, order))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Sdd,
    Vtree,
    Dot,
}

impl FromStr for ExportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sdd" => Ok(ExportFormat::Sdd),
            "vtree" => Ok(ExportFormat::Vtree),
            "dot" => Ok(ExportFormat::Dot),
            _ => Err(Error::BadFunctionSpec(s.to_string())),
        }
    }
}

fn spec_arity(f: &FunctionSpec) -> Vec<VarId> {
    match *f {
        FunctionSpec::Hwb(n) | FunctionSpec::Exact(n, _) | FunctionSpec::Prime(n, _) => x_vars(n),
        FunctionSpec::GeneralizedHwb(n) => {
            let mut v = x_vars(n);
            v.extend(y_vars(n));
            v
        }
    }
}

fn build_obdd(f: &FunctionSpec, order: &[VarId]) -> Result<Obdd> {
    match *f {
        FunctionSpec::Exact(n, i) => Obdd::exact_count(n, i, order),
        FunctionSpec::Prime(n, p) => Obdd::prime(p, n, order),
        _ => Obdd::from_oracle(&f.oracle()?, order),
    }
}

/// Renders `object` in `format`. OBDDs written as SDD files are converted
/// over their right-linear vtree; `vtree` format writes the object's vtree.
pub fn export(object: &ExportObject, format: ExportFormat) -> Result<String> {
    let sdd_text = |env: &SddEnv, root| match format {
        ExportFormat::Sdd => env.serialize(root),
        ExportFormat::Vtree => env.vtree().serialize(),
        ExportFormat::Dot => env.to_dot(root),
    };
    let vtree_text = |vt: Vtree| match format {
        ExportFormat::Vtree => Ok(vt.serialize()),
        ExportFormat::Dot => Ok(vt.to_dot()),
        ExportFormat::Sdd => Err(Error::BadFunctionSpec("a vtree has no sdd form".into())),
    };
    match object {
        ExportObject::HwbSdd(n) => {
            let art = build_hwb_sdd(*n, &x_vars(*n))?;
            Ok(sdd_text(&art.env, art.root))
        }
        ExportObject::FnSdd(n) => {
            let art = build_fn_sdd(*n, &x_vars(*n), &y_vars(*n))?;
            Ok(sdd_text(&art.env, art.root))
        }
        ExportObject::Obdd(f, order) => {
            let order = order.resolve(&spec_arity(f))?;
            let d = build_obdd(f, &order)?;
            match format {
                ExportFormat::Dot => Ok(d.to_dot()),
                _ => {
                    let mut env = SddEnv::new(Vtree::right_linear(&order)?);
                    let root = d.to_sdd(&mut env)?;
                    Ok(sdd_text(&env, root))
                }
            }
        }
        ExportObject::HwbVtree(n) => vtree_text(Vtree::hwb(*n, &x_vars(*n))?),
        ExportObject::FnVtree(n) => vtree_text(Vtree::generalized_hwb(*n, &x_vars(*n), &y_vars(*n))?),
        ExportObject::LinearVtree(order) => vtree_text(Vtree::right_linear(order)?),
    }
}

/// Exact minimum OBDD of a built-in function.
pub fn min_obdd(spec: &FunctionSpec, exec: Execution) -> Result<MinObdd> {
    min_obdd_size_exact_with(&spec.oracle()?, exec)
}

pub fn format_min_obdd(spec: &FunctionSpec, m: &MinObdd) -> String {
    format!(
        "{spec}: {} internal nodes, {} arcs, ordering {}",
        m.internal_nodes,
        m.arcs,
        m.ordering.iter().map(|v| v.0.to_string()).collect::<Vec<_>>().join(",")
    )
}

/// The generalized construction with one element removed, which leaves the
/// primes non-exhaustive. Used to exercise failure reporting.
pub fn mutated_fn_artifact(n: usize, dropped: PrimeId) -> Result<ConstructionArtifact> {
    let mut art = build_fn_sdd(n, &x_vars(n), &y_vars(n))?;
    let crate::sdd::SddNode::Decision { vnode, elements } = art.env.node(art.root).clone() else {
        return Err(Error::InvalidDiagram("root is not a decision".into()));
    };
    let k = art
        .primes
        .iter()
        .position(|&p| p == dropped)
        .ok_or_else(|| Error::InvalidPrime {
            n,
            tag: dropped.to_string(),
        })?;
    let left = art.env.vtree().children(vnode)?.0;
    let dropped_prime = art.env.embed_obdd(&Obdd::prime(dropped, n, &x_vars(n))?, left)?;
    let kept: Vec<_> = elements.into_iter().filter(|&(p, _)| p != dropped_prime).collect();
    art.root = art.env.decision(vnode, kept)?;
    art.primes.remove(k);
    Ok(art)
}
