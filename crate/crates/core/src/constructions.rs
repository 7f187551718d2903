//! The cubic SDDs for the hidden weighted bit function and its generalized
//! form, assembled from the prime family.
//!
//! Both are a single decision at the vtree root with `2n` elements. The
//! primes are OBDDs over `x_1..x_n` embedded in the left subtree; the subs
//! are constants (HWB) or `y` literals (generalized form).

use std::fmt;

use crate::boolfn::{Assignment, FunctionOracle, PrimeId, VarId, x_vars, y_vars};
use crate::error::{Error, Result};
use crate::obdd::{Obdd, Op};
use crate::sdd::{SddEnv, SddRef, SddSize};
use crate::vtree::Vtree;

pub const CERTIFICATE_CAP: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    Hwb,
    GeneralizedHwb,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::Hwb => "HWB",
            Role::GeneralizedHwb => "GENERALIZED_HWB",
        })
    }
}

#[derive(Debug, Clone)]
pub struct ConstructionArtifact {
    pub n: usize,
    pub role: Role,
    pub env: SddEnv,
    pub root: SddRef,
    /// Prime family members in element order, one per root element.
    pub primes: Vec<PrimeId>,
}

impl ConstructionArtifact {
    pub fn vtree(&self) -> &Vtree {
        self.env.vtree()
    }

    pub fn size(&self) -> SddSize {
        self.env.size(self.root)
    }

    /// The function this artifact is meant to compute.
    pub fn oracle(&self) -> FunctionOracle {
        match self.role {
            Role::Hwb => FunctionOracle::hwb(self.n),
            Role::GeneralizedHwb => FunctionOracle::generalized_hwb(self.n),
        }
    }

    pub fn descriptor(&self) -> String {
        let vt = self.vtree();
        let (l, r) = vt.children(vt.root()).expect("root is internal");
        let join = |vs: &[VarId]| vs.iter().map(|v| v.0.to_string()).collect::<Vec<_>>().join(" ");
        format!(
            "sigma={};rho={}",
            join(vt.vars_below(l).unwrap_or(&[])),
            join(vt.vars_below(r).unwrap_or(&[]))
        )
    }
}

/// The `2n` primes as OBDDs over `sigma`, in [`PrimeId::family`] order.
pub fn build_prime_family(n: usize, sigma: &[VarId]) -> Result<Vec<(PrimeId, Obdd)>> {
    if n == 0 {
        return Err(Error::ArityMismatch { expected: 1, got: 0 });
    }
    if sigma.len() != n {
        return Err(Error::ArityMismatch {
            expected: n,
            got: sigma.len(),
        });
    }
    PrimeId::family(n)
        .into_iter()
        .map(|p| Ok((p, Obdd::prime(p, n, sigma)?)))
        .collect()
}

/// Embeds the prime family into the left child of the environment's root and
/// pairs each prime with `sub(p)`.
fn assemble(
    env: &mut SddEnv,
    n: usize,
    sigma: &[VarId],
    mut sub: impl FnMut(&mut SddEnv, PrimeId) -> Result<SddRef>,
) -> Result<(SddRef, Vec<PrimeId>)> {
    let root = env.vtree().root();
    let (left, _) = env.vtree().children(root)?;
    let mut elements = Vec::with_capacity(2 * n);
    let mut primes = Vec::with_capacity(2 * n);
    for (p, d) in build_prime_family(n, sigma)? {
        let pr = env.embed_obdd(&d, left)?;
        let s = sub(env, p)?;
        elements.push((pr, s));
        primes.push(p);
    }
    Ok((env.decision(root, elements)?, primes))
}

/// The uncompressed SDD `⋁ (P ∧ [P accepts])` over `Vtree::hwb(n, sigma)`.
pub fn build_hwb_sdd(n: usize, sigma: &[VarId]) -> Result<ConstructionArtifact> {
    let mut env = SddEnv::new(Vtree::hwb(n, sigma)?);
    let (root, primes) = assemble(&mut env, n, sigma, |env, p| Ok(env.constant(p.accepts_hwb())))?;
    Ok(ConstructionArtifact {
        n,
        role: Role::Hwb,
        env,
        root,
        primes,
    })
}

/// The compressed SDD for the generalized function over
/// `Vtree::generalized_hwb(n, sigma, rho)`; each prime's sub is its `y`
/// literal.
pub fn build_fn_sdd(n: usize, sigma: &[VarId], rho: &[VarId]) -> Result<ConstructionArtifact> {
    if rho.len() != n + 1 {
        return Err(Error::ArityMismatch {
            expected: n + 1,
            got: rho.len(),
        });
    }
    let mut env = SddEnv::new(Vtree::generalized_hwb(n, sigma, rho)?);
    let (root, primes) = assemble(&mut env, n, sigma, |env, p| {
        let (y, positive) = p.y_literal(n);
        env.literal(y, positive)
    })?;
    Ok(ConstructionArtifact {
        n,
        role: Role::GeneralizedHwb,
        env,
        root,
        primes,
    })
}

pub fn default_sigma(n: usize) -> Vec<VarId> {
    x_vars(n)
}

pub fn default_rho(n: usize) -> Vec<VarId> {
    y_vars(n)
}

/// Outcome of comparing the decision form of HWB, its `E`-form
/// `⋁ (E^i ∧ x_i)`, and the direct definition on every `x` assignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    pub n: usize,
    pub checked: u64,
    /// First assignment on which the three forms disagree.
    pub witness: Option<Assignment>,
}

impl Certificate {
    pub fn passed(&self) -> bool {
        self.witness.is_none()
    }
}

impl fmt::Display for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.witness {
            None => write!(f, "n={}: {} assignments agree", self.n, self.checked),
            Some(a) => write!(f, "n={}: forms disagree at {a}", self.n),
        }
    }
}

pub fn hwb_equivalence_certificate(n: usize) -> Result<Certificate> {
    let elements = PrimeId::family(n).into_iter().map(|p| (p, p.accepts_hwb())).collect();
    certify_decision_form(n, elements)
}

/// Certifies a decision form with the given `(prime, constant sub)`
/// elements against HWB. Supplying wrong subs yields a failing certificate.
pub fn certify_decision_form(n: usize, elements: Vec<(PrimeId, bool)>) -> Result<Certificate> {
    if n > CERTIFICATE_CAP {
        return Err(Error::ScopeTooLarge {
            size: n,
            cap: CERTIFICATE_CAP,
        });
    }
    let sigma = x_vars(n);
    let mut env = SddEnv::new(Vtree::hwb(n, &sigma)?);
    let root = env.vtree().root();
    let (left, _) = env.vtree().children(root)?;
    let mut els = Vec::with_capacity(elements.len());
    for (p, bit) in elements {
        let pr = env.embed_obdd(&Obdd::prime(p, n, &sigma)?, left)?;
        els.push((pr, env.constant(bit)));
    }
    let decision = env.decision(root, els)?;

    let mut e_form = Obdd::constant(&sigma, false)?;
    for i in 1..=n {
        let term = Obdd::apply(
            Op::And,
            &Obdd::exact_count(n, i, &sigma)?,
            &Obdd::literal(&sigma, VarId::x(i), true)?,
        )?;
        e_form = Obdd::apply(Op::Or, &e_form, &term)?;
    }

    let y = VarId::y(n, 0);
    let rows = 1u64 << n;
    for row in 0..rows {
        let xa = Assignment::from_row(&sigma, row);
        let direct = crate::boolfn::eval_hwb(n, &xa)?;
        let via_e = e_form.evaluate(&xa)?;
        let mut agree = via_e == direct;
        for yb in [false, true] {
            agree &= env.evaluate(decision, &xa.clone().with(y, yb))? == direct;
        }
        if !agree {
            return Ok(Certificate {
                n,
                checked: row + 1,
                witness: Some(xa),
            });
        }
    }
    Ok(Certificate {
        n,
        checked: rows,
        witness: None,
    })
}

/// The three partition properties of the prime family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PartitionCheck {
    pub satisfiable: bool,
    pub disjoint: bool,
    pub exhaustive: bool,
}

impl PartitionCheck {
    pub fn holds(&self) -> bool {
        self.satisfiable && self.disjoint && self.exhaustive
    }
}

/// Partition check by evaluating every prime on every `x` assignment.
pub fn partition_by_enumeration(n: usize) -> Result<PartitionCheck> {
    if n > CERTIFICATE_CAP {
        return Err(Error::ScopeTooLarge {
            size: n,
            cap: CERTIFICATE_CAP,
        });
    }
    let family = PrimeId::family(n);
    let sigma = x_vars(n);
    let mut hits = vec![0u64; family.len()];
    let (mut disjoint, mut exhaustive) = (true, true);
    for row in 0..1u64 << n {
        let a = Assignment::from_row(&sigma, row);
        let mut k = 0;
        for (h, &p) in hits.iter_mut().zip(&family) {
            if crate::boolfn::eval_prime(p, n, &a)? {
                *h += 1;
                k += 1;
            }
        }
        disjoint &= k <= 1;
        exhaustive &= k >= 1;
    }
    Ok(PartitionCheck {
        satisfiable: hits.iter().all(|&h| h > 0),
        disjoint,
        exhaustive,
    })
}

/// Partition check on the OBDDs of the family: pairwise conjunctions are
/// `⊥` and the disjunction is `⊤`.
pub fn partition_by_apply(n: usize, sigma: &[VarId]) -> Result<PartitionCheck> {
    let family = build_prime_family(n, sigma)?;
    let satisfiable = family.iter().all(|(_, d)| d.is_constant() != Some(false));
    let mut disjoint = true;
    for (a, (_, p)) in family.iter().enumerate() {
        for (_, q) in &family[a + 1..] {
            disjoint &= Obdd::apply(Op::And, p, q)?.is_constant() == Some(false);
        }
    }
    let mut all = Obdd::constant(sigma, false)?;
    for (_, p) in &family {
        all = Obdd::apply(Op::Or, &all, p)?;
    }
    Ok(PartitionCheck {
        satisfiable,
        disjoint,
        exhaustive: all.is_constant() == Some(true),
    })
}
