use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sddsep::boolfn::{Assignment, TruthTable, VarId};
use sddsep::vtree::Shape;
use sddsep::{FunctionOracle, Obdd, SddEnv, SddRef, Vtree, VtreeNodeId};

fn shuffled_vars(rng: &mut ChaCha8Rng, m: usize) -> Vec<VarId> {
    let mut v: Vec<VarId> = (1..=m as u32).map(VarId).collect();
    v.shuffle(rng);
    v
}

fn any_shape(rng: &mut ChaCha8Rng, vars: &[VarId]) -> Shape {
    if vars.len() == 1 {
        return Shape::Leaf(vars[0]);
    }
    let k = rng.gen_range(1..vars.len());
    Shape::node(any_shape(rng, &vars[..k]), any_shape(rng, &vars[k..]))
}

/// Vtrees whose left children are all right-linear, so primes are OBDDs.
fn obdd_prime_shape(rng: &mut ChaCha8Rng, vars: &[VarId]) -> Shape {
    if vars.len() == 1 {
        return Shape::Leaf(vars[0]);
    }
    let k = rng.gen_range(1..vars.len());
    Shape::node(
        Shape::right_linear(&vars[..k]).unwrap(),
        obdd_prime_shape(rng, &vars[k..]),
    )
}

/// A random valid SDD respecting `T_v`. Subs are reused with some
/// probability so that the result is often not compressed.
fn random_sdd(env: &mut SddEnv, v: VtreeNodeId, rng: &mut ChaCha8Rng) -> SddRef {
    if let Some(var) = env.vtree().var_of(v) {
        return match rng.gen_range(0..4) {
            0 => SddRef::FALSE,
            1 => SddRef::TRUE,
            k => env.literal(var, k == 3).unwrap(),
        };
    }
    let (l, r) = env.vtree().children(v).unwrap();
    let left = env.vtree().vars_below(l).unwrap().to_vec();
    let rows = 1usize << left.len();
    let k = rng.gen_range(2..=rows.min(4));
    let mut block: Vec<usize> = (0..rows).map(|i| if i < k { i } else { rng.gen_range(0..k) }).collect();
    block.shuffle(rng);
    let mut subs: Vec<SddRef> = Vec::new();
    let mut elements = Vec::new();
    for b in 0..k {
        let table = TruthTable::from_fn(left.clone(), |row| block[row as usize] == b).unwrap();
        let prime = env.embed_obdd(&Obdd::from_table(&table), l).unwrap();
        let sub = if !subs.is_empty() && rng.gen_bool(0.3) {
            subs[rng.gen_range(0..subs.len())]
        } else if rng.gen_bool(0.2) {
            env.constant(rng.gen_bool(0.5))
        } else {
            random_sdd(env, r, rng)
        };
        subs.push(sub);
        elements.push((prime, sub));
    }
    env.decision(v, elements).unwrap()
}

fn random_instance(seed: u64) -> (SddEnv, SddRef, ChaCha8Rng) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = rng.gen_range(2..=7);
    let vars = shuffled_vars(&mut rng, m);
    let vt = Vtree::from_shape(&obdd_prime_shape(&mut rng, &vars)).unwrap();
    let mut env = SddEnv::new(vt);
    let root = env.vtree().root();
    let r = random_sdd(&mut env, root, &mut rng);
    (env, r, rng)
}

fn random_total(rng: &mut ChaCha8Rng, vars: &[VarId]) -> Assignment {
    Assignment::from_pairs(vars.iter().map(|&v| (v, rng.gen_bool(0.5))).collect::<Vec<_>>())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn vtree_round_trip(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = rng.gen_range(1..=16);
        let vars = shuffled_vars(&mut rng, m);
        let vt = Vtree::from_shape(&any_shape(&mut rng, &vars)).unwrap();
        let text = vt.serialize();
        prop_assert_eq!(Vtree::parse(&text).unwrap(), vt);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn random_sdds_are_valid(seed in any::<u64>()) {
        let (env, r, _) = random_instance(seed);
        let report = env.validate(r).unwrap();
        prop_assert!(report.is_valid(), "{}", report);
    }

    #[test]
    fn compress_preserves_semantics(seed in any::<u64>()) {
        let (mut env, r, _) = random_instance(seed);
        let c = env.compress(r).unwrap();
        prop_assert!(env.equivalent(c, r).unwrap());
        prop_assert!(env.is_compressed(c).unwrap());
        prop_assert!(env.validate(c).unwrap().is_valid());
        prop_assert_eq!(env.compress(c).unwrap(), c);
    }

    #[test]
    fn condition_matches_extended_evaluation(seed in any::<u64>()) {
        let (mut env, r, mut rng) = random_instance(seed);
        let vars = env.vtree().variables().to_vec();
        let mut partial = Assignment::new();
        for &v in &vars {
            if rng.gen_bool(0.5) {
                partial.set(v, rng.gen_bool(0.5));
            }
        }
        let c = env.condition(r, &partial).unwrap();
        prop_assert!(env.validate(c).unwrap().is_valid());
        for _ in 0..16 {
            let a = random_total(&mut rng, &vars);
            let mut extended = a.clone();
            extended.extend_from(&partial);
            prop_assert_eq!(env.evaluate(c, &a).unwrap(), env.evaluate(r, &extended).unwrap());
        }
    }

    #[test]
    fn model_count_matches_enumeration(seed in any::<u64>()) {
        let (env, r, _) = random_instance(seed);
        let vars = env.vtree().variables().to_vec();
        let count = (0..1u64 << vars.len())
            .filter(|&row| env.evaluate(r, &Assignment::from_row(&vars, row)).unwrap())
            .count();
        prop_assert_eq!(env.model_count(r, &vars).unwrap(), count.into());
    }

    #[test]
    fn sdd_file_round_trip(seed in any::<u64>()) {
        let (env, r, _) = random_instance(seed);
        let text = env.serialize(r);
        let (env2, r2) = SddEnv::parse(env.vtree().clone(), &text).unwrap();
        prop_assert_eq!(env2.serialize(r2), text);
        prop_assert_eq!(env2.size(r2), env.size(r));
    }

    #[test]
    fn hash_consing_is_unique(seed in any::<u64>()) {
        let (mut env, r, _) = random_instance(seed);
        let before = env.len();
        let root = env.vtree().root();
        // replay the same choices in the same store
        let mut replay = ChaCha8Rng::seed_from_u64(seed);
        let m = replay.gen_range(2..=7);
        let vars = shuffled_vars(&mut replay, m);
        let _ = obdd_prime_shape(&mut replay, &vars);
        let again = random_sdd(&mut env, root, &mut replay);
        prop_assert_eq!(again, r);
        prop_assert_eq!(env.len(), before);
    }

    #[test]
    fn obdd_operations_stay_reduced(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..=8);
        let order = shuffled_vars(&mut rng, n);
        let mk = |rng: &mut ChaCha8Rng| {
            let bits: Vec<bool> = (0..1u64 << n).map(|_| rng.gen_bool(0.5)).collect();
            let t = TruthTable::from_fn(order.clone(), |r| bits[r as usize]).unwrap();
            FunctionOracle::from_table("r", t)
        };
        let (f, g) = (mk(&mut rng), mk(&mut rng));
        let df = Obdd::from_oracle(&f, &order).unwrap();
        let dg = Obdd::from_oracle(&g, &order).unwrap();
        let h = df.and(&dg).unwrap();
        h.check_reduced().unwrap();
        let partial = Assignment::from_pairs([(order[0], rng.gen_bool(0.5))]);
        let c = h.condition(&partial).unwrap();
        c.check_reduced().unwrap();
        prop_assert!(c.node_count() <= h.node_count());
        for row in 0..1u64 << n {
            let a = Assignment::from_row(&order, row);
            prop_assert_eq!(h.evaluate(&a).unwrap(), f.eval(&a).unwrap() && g.eval(&a).unwrap());
        }
    }
}
