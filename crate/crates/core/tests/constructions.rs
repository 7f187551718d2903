use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sddsep::boolfn::{eval_prime, x_vars, y_vars, Assignment, FunctionOracle, PrimeId, VarId};
use sddsep::constructions::{
    build_fn_sdd, build_hwb_sdd, build_prime_family, certify_decision_form,
    hwb_equivalence_certificate, partition_by_apply,
};
use sddsep::obdd::Obdd;
use sddsep::{SddEnv, SddNode, SddRef, Vtree};

fn root_elements(env: &SddEnv, r: SddRef) -> Vec<(SddRef, SddRef)> {
    match env.node(r) {
        SddNode::Decision { elements, .. } => elements.clone(),
        other => panic!("expected a decision, got {other:?}"),
    }
}

#[test]
fn hwb_sdd_at_8_is_valid_and_uncompressed() {
    let art = build_hwb_sdd(8, &x_vars(8)).unwrap();
    assert!(art.env.validate(art.root).unwrap().is_valid());
    assert!(!art.env.is_compressed(art.root).unwrap());
    assert_eq!(art.env.find_mismatch(art.root, &FunctionOracle::hwb(8)).unwrap(), None);
}

#[test]
fn fn_sdd_at_3_matches_everywhere() {
    let art = build_fn_sdd(3, &x_vars(3), &y_vars(3)).unwrap();
    assert_eq!(art.vtree().variables().len(), 7);
    assert_eq!(
        art.env.find_mismatch(art.root, &FunctionOracle::generalized_hwb(3)).unwrap(),
        None
    );
}

#[test]
fn fn_sdd_subs_are_y_literals() {
    let n = 5;
    let art = build_fn_sdd(n, &x_vars(n), &y_vars(n)).unwrap();
    assert!(art.env.is_compressed(art.root).unwrap());
    for (_, s) in root_elements(&art.env, art.root) {
        match art.env.node(s) {
            SddNode::Literal { var, .. } => assert!(var.0 as usize > n),
            other => panic!("{other:?}"),
        }
    }
}

#[test]
fn fn_sdd_conditioned_on_ones_is_hwb_8() {
    let mut art = build_fn_sdd(8, &x_vars(8), &y_vars(8)).unwrap();
    let ones = Assignment::from_pairs(y_vars(8).into_iter().map(|y| (y, true)));
    let c = art.env.condition(art.root, &ones).unwrap();
    assert_eq!(art.env.find_mismatch(c, &FunctionOracle::hwb(8)).unwrap(), None);
}

#[test]
fn random_orderings_keep_everything() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n = 6;
    for _ in 0..5 {
        let mut sigma = x_vars(n);
        sigma.shuffle(&mut rng);
        let mut rho = y_vars(n);
        rho.shuffle(&mut rng);
        let natural = build_hwb_sdd(n, &x_vars(n)).unwrap().size().arcs;
        for art in [build_hwb_sdd(n, &sigma).unwrap(), build_fn_sdd(n, &sigma, &rho).unwrap()] {
            assert!(art.env.validate(art.root).unwrap().is_valid());
            assert_eq!(art.env.find_mismatch(art.root, &art.oracle()).unwrap(), None);
            // E^i OBDDs have the same size under every ordering
            assert!(art.size().arcs <= 2 * natural);
        }
    }
}

#[test]
fn prime_mass_and_wiring() {
    for n in [4usize, 8, 12] {
        let family = build_prime_family(n, &x_vars(n)).unwrap();
        let max = family.iter().map(|(_, d)| d.arcs()).max().unwrap();
        let art = build_hwb_sdd(n, &x_vars(n)).unwrap();
        let total = art.size().arcs;
        assert!(total <= 2 * n * max + 3 * 2 * n, "n={n}: {total}");
        assert_eq!(root_elements(&art.env, art.root).len(), 2 * n);
    }
}

#[test]
fn prime_p2_0_of_arity_4() {
    let p = PrimeId::Split { i: 2, bit: false };
    let d = Obdd::prime(p, 4, &x_vars(4)).unwrap();
    for row in 0..16u64 {
        let a = Assignment::from_row(&x_vars(4), row);
        let weight = row.count_ones();
        let x2 = a.get(VarId(2)) == Some(true);
        assert_eq!(d.evaluate(&a).unwrap(), weight == 2 && !x2);
        assert_eq!(eval_prime(p, 4, &a).unwrap(), weight == 2 && !x2);
    }
}

#[test]
fn partition_at_8_symbolically() {
    assert!(partition_by_apply(8, &x_vars(8)).unwrap().holds());
}

#[test]
fn compress_fn_is_a_fixed_point() {
    let mut art = build_fn_sdd(6, &x_vars(6), &y_vars(6)).unwrap();
    let before = art.size();
    let c = art.env.compress(art.root).unwrap();
    assert_eq!(c, art.root);
    assert_eq!(art.env.size(c), before);
}

#[test]
fn compress_hwb_4_merges_into_hwb_prime() {
    let mut art = build_hwb_sdd(4, &x_vars(4)).unwrap();
    let c = art.env.compress(art.root).unwrap();
    let elements = root_elements(&art.env, c);
    assert_eq!(elements.len(), 2);
    let (p, _) = *elements.iter().find(|&&(_, s)| s == SddRef::TRUE).unwrap();
    let left = art.vtree().children(art.vtree().root()).unwrap().0;
    let prime = art.env.to_obdd(p, left).unwrap();
    assert_eq!(prime, Obdd::from_oracle(&FunctionOracle::hwb(4), &x_vars(4)).unwrap());
    assert!(art.env.equivalent(c, art.root).unwrap());
}

#[test]
fn compress_two_true_subs_collapses() {
    let vt = Vtree::right_linear(&x_vars(2)).unwrap();
    let mut env = SddEnv::new(vt);
    let root = env.vtree().root();
    let x = env.literal(VarId(1), true).unwrap();
    let nx = env.literal(VarId(1), false).unwrap();
    let d = env.decision(root, vec![(x, SddRef::TRUE), (nx, SddRef::TRUE)]).unwrap();
    assert_eq!(env.compress(d).unwrap(), SddRef::TRUE);
}

#[test]
fn certificates() {
    assert!(hwb_equivalence_certificate(2).unwrap().passed());
    let c = hwb_equivalence_certificate(10).unwrap();
    assert!(c.passed());
    assert_eq!(c.checked, 1 << 10);
    let corrupted = PrimeId::family(4)
        .into_iter()
        .map(|p| (p, p.accepts_hwb() || p == PrimeId::Split { i: 1, bit: false }))
        .collect();
    let bad = certify_decision_form(4, corrupted).unwrap();
    assert!(!bad.passed());
    let w = bad.witness.unwrap();
    assert!(eval_prime(PrimeId::Split { i: 1, bit: false }, 4, &w).unwrap());
}

#[test]
fn f8_sdd_file_round_trip() {
    let art = build_fn_sdd(8, &x_vars(8), &y_vars(8)).unwrap();
    let text = art.env.serialize(art.root);
    let (env, root) = SddEnv::parse(art.vtree().clone(), &text).unwrap();
    assert_eq!(env.serialize(root), text);
    assert_eq!(env.size(root), art.size());
    assert!(env.validate(root).unwrap().is_valid());
}
