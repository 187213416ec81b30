mod common;

use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

use common::{Gen, Kind};
use starcyl::compiler::evaluate;
use starcyl::naive::{
    apply_hom, certain_answer, certain_membership_bruteforce, downarrow, for_each_assignment, rep_containment,
    PwHom,
};
use starcyl::oracle::{eval_ca_set, ground, ground_naive, universe, Instance, Relation};
use starcyl::{Const, EvalContext, QueryClass, Schema, StarCylinder, Value};

fn naive_cylinder(g: &mut Gen, dim: usize, consts: &[Const]) -> StarCylinder {
    g.cylinder(dim, consts, Kind::Naive { nulls: 2 }, 3)
}

fn single(dim: usize) -> Schema {
    Schema::new([("R", dim)]).unwrap()
}

/// `E` evaluated on every world of `c` over `t`, intersected.
fn certain_by_worlds(e: &starcyl::ScaExpr, c: &StarCylinder, t: &[Const]) -> Relation {
    let nulls: Vec<u32> = c.nulls().into_iter().collect();
    let mut acc: Option<Relation> = None;
    for_each_assignment(&nulls, t, &mut |map| {
        let inst = Instance::from_cylinders(&single(c.dim()), std::slice::from_ref(c), map, t)?;
        let ans = eval_ca_set(e, &inst, c.dim())?;
        acc = Some(match acc.take() {
            None => ans,
            Some(a) => a.intersection(&ans).cloned().collect(),
        });
        Ok(true)
    })
    .unwrap();
    acc.unwrap_or_default()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn identity_hom_changes_nothing(seed in any::<u64>()) {
        let mut g = Gen::new(seed);
        let consts = g.consts(2);
        let c = naive_cylinder(&mut g, 2, &consts);
        let h = PwHom::identity(c.nulls());
        prop_assert_eq!(apply_hom(&h, &c).unwrap(), c);
    }

    #[test]
    fn positive_expressions_are_monotone_under_homomorphisms(seed in any::<u64>()) {
        let mut g = Gen::new(seed);
        let dim = g.rng.gen_range(1..=3);
        let consts = g.consts(2);
        let c = naive_cylinder(&mut g, dim, &consts);
        let mut targets: Vec<Value> = consts.iter().cloned().map(Value::Const).collect();
        targets.push(Value::Null(3));
        let h: BTreeMap<u32, Value> = c.nulls().into_iter().map(|k| (k, targets.choose(&mut g.rng).unwrap().clone())).collect();
        let h = PwHom::new(h).unwrap();
        let hc = apply_hom(&h, &c).unwrap();
        let extra = naive_cylinder(&mut g, dim, &consts);
        let d = starcyl::algebra::star_union(&hc, &extra).unwrap();
        let e = g.expr(dim, 1, 3, false);
        let ctx = EvalContext::new(dim, consts.iter().cloned());
        let small = evaluate(&e, &[hc.clone()], &ctx).unwrap();
        let big = evaluate(&e, &[d.clone()], &ctx).unwrap();
        let t = universe(consts.iter().cloned(), dim + 4);
        let nulls: Vec<u32> = d.nulls().into_iter().chain(hc.nulls()).collect::<BTreeSet<_>>().into_iter().collect();
        let fresh: BTreeMap<u32, Const> = nulls.iter().map(|&k| (k, Const::fresh(k as usize))).collect();
        prop_assert!(ground_naive(&small, &fresh, &t).unwrap().is_subset(&ground_naive(&big, &fresh, &t).unwrap()));
    }

    #[test]
    fn downarrow_gives_certain_answers(seed in any::<u64>()) {
        let mut g = Gen::new(seed);
        let dim = g.rng.gen_range(1..=3);
        let consts = g.consts(2);
        let c = naive_cylinder(&mut g, dim, &consts);
        let e = g.expr(dim, 1, 3, false);
        let ctx = EvalContext::new(dim, consts.iter().cloned());
        let got = downarrow(&evaluate(&e, &[c.clone()], &ctx).unwrap());
        let t = universe(consts.iter().cloned(), dim + 1 + c.nulls().len());
        prop_assert_eq!(ground(&got, &t).unwrap(), certain_by_worlds(&e, &c, &t));
    }

    #[test]
    fn co_initial_databases_have_equal_certain_answers(seed in any::<u64>()) {
        let mut g = Gen::new(seed);
        let dim = g.rng.gen_range(1..=2);
        let consts = g.consts(2);
        let c = naive_cylinder(&mut g, dim, &consts);
        let d = if g.rng.gen_bool(0.5) {
            // a copy of one row with its nulls renamed
            let rename: BTreeMap<u32, Value> = c.nulls().into_iter().map(|k| (k, Value::Null(k + 10))).collect();
            let copy = apply_hom(&PwHom::new(rename).unwrap(), &c).unwrap();
            let row = copy.iter().next().cloned();
            starcyl::algebra::star_union(&c, &StarCylinder::from_tuples(dim, row).unwrap()).unwrap()
        } else {
            naive_cylinder(&mut g, dim, &consts)
        };
        if rep_containment(&c, &d, 6).unwrap() && rep_containment(&d, &c, 6).unwrap() {
            let e = g.expr(dim, 1, 3, false);
            let ctx = EvalContext::new(dim, consts.iter().cloned());
            let t = universe(consts.iter().cloned(), dim + 1);
            let dc = downarrow(&evaluate(&e, &[c.clone()], &ctx).unwrap());
            let dd = downarrow(&evaluate(&e, &[d.clone()], &ctx).unwrap());
            prop_assert_eq!(ground(&dc, &t).unwrap(), ground(&dd, &t).unwrap());
        }
    }

    #[test]
    fn brute_force_membership_agrees_with_naive_evaluation(seed in any::<u64>()) {
        let mut g = Gen::new(seed);
        let schema = g.schema();
        let consts = g.consts(2);
        let rels = g.relations(&schema, &consts, Kind::Naive { nulls: 2 }, 3);
        let class = if g.rng.gen_bool(0.5) { QueryClass::Positive } else { QueryClass::PositiveWithForall };
        let q = g.query(&schema, 3, class, false);
        let certain = certain_answer(&q, &schema, &rels).unwrap();
        let probe: Vec<Const> = (0..q.head.len()).map(|_| consts.choose(&mut g.rng).unwrap().clone()).collect();
        let t = universe(consts.iter().cloned(), 0);
        let expected = ground(&certain, &t).unwrap().contains(&probe);
        prop_assert_eq!(certain_membership_bruteforce(&probe, &q, &schema, &rels, 4).unwrap(), expected);
    }
}
