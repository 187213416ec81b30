mod common;

use proptest::prelude::*;
use rand::Rng;

use common::{Gen, Kind};
use starcyl::algebra::{complement, inner_cyl_extended, outer_cyl, refine, sieve, star_intersection, star_union, swap};
use starcyl::compiler::evaluate;
use starcyl::oracle::{eval_ca_set, full_space, ground, universe, Instance};
use starcyl::{cyl_dominates, reduce, EvalContext, Schema, StarCylinder};

struct Setup {
    dim: usize,
    ctx: EvalContext,
    t: Vec<starcyl::Const>,
    c: StarCylinder,
    d: StarCylinder,
}

fn setup(seed: u64, dims: std::ops::RangeInclusive<usize>) -> (Gen, Setup) {
    let mut g = Gen::new(seed);
    let dim = g.rng.gen_range(dims);
    let consts = g.consts(3);
    let ctx = EvalContext::new(dim, consts.iter().cloned());
    let t = universe(consts.iter().cloned(), dim + 1);
    let c = g.cylinder(dim, &consts, Kind::Extended, 3);
    let d = g.cylinder(dim, &consts, Kind::Extended, 3);
    (g, Setup { dim, ctx, t, c, d })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn de_morgan(seed in any::<u64>()) {
        let (_, s) = setup(seed, 1..=3);
        let lhs = complement(&s.ctx, &star_union(&s.c, &s.d).unwrap()).unwrap();
        let rhs = star_intersection(&complement(&s.ctx, &s.c).unwrap(), &complement(&s.ctx, &s.d).unwrap()).unwrap();
        prop_assert_eq!(ground(&lhs, &s.t).unwrap(), ground(&rhs, &s.t).unwrap());
        let twice = complement(&s.ctx, &complement(&s.ctx, &s.c).unwrap()).unwrap();
        prop_assert_eq!(ground(&twice, &s.t).unwrap(), ground(&s.c, &s.t).unwrap());
    }

    #[test]
    fn sieve_rows_partition_the_space(seed in any::<u64>()) {
        let (_, s) = setup(seed, 1..=3);
        let mut seen = starcyl::oracle::Relation::new();
        for row in sieve(&s.ctx) {
            let g = ground(&StarCylinder::from_tuples(s.dim, [row.clone()]).unwrap(), &s.t).unwrap();
            prop_assert!(!g.is_empty());
            prop_assert!(g.is_disjoint(&seen));
            seen.extend(g);
        }
        prop_assert_eq!(seen, full_space(&s.t, s.dim));
    }

    #[test]
    fn containment_is_dominance_after_refinement(seed in any::<u64>()) {
        let (_, s) = setup(seed, 1..=3);
        let sub = ground(&s.c, &s.t).unwrap().is_subset(&ground(&s.d, &s.t).unwrap());
        let via_refine = cyl_dominates(&refine(&s.ctx, &s.c).unwrap(), &refine(&s.ctx, &s.d).unwrap()).unwrap();
        prop_assert_eq!(sub, via_refine);
        prop_assert_eq!(ground(&refine(&s.ctx, &s.c).unwrap(), &s.t).unwrap(), ground(&s.c, &s.t).unwrap());
    }

    #[test]
    fn inner_cyl_is_dual_of_outer(seed in any::<u64>()) {
        let (mut g, s) = setup(seed, 1..=3);
        let i = g.rng.gen_range(1..=s.dim);
        let inner = inner_cyl_extended(&s.ctx, &s.c, i).unwrap();
        let dual = complement(&s.ctx, &outer_cyl(&complement(&s.ctx, &s.c).unwrap(), i).unwrap()).unwrap();
        prop_assert_eq!(ground(&inner, &s.t).unwrap(), ground(&dual, &s.t).unwrap());
    }

    #[test]
    fn reduce_keeps_the_denotation(seed in any::<u64>()) {
        let (_, s) = setup(seed, 1..=3);
        let u = star_union(&s.c, &s.d).unwrap();
        let r = reduce(&u);
        prop_assert!(r.len() <= u.len());
        prop_assert_eq!(ground(&r, &s.t).unwrap(), ground(&u, &s.t).unwrap());
    }

    #[test]
    fn swaps_commute_with_grounding(seed in any::<u64>()) {
        let (mut g, s) = setup(seed, 2..=4);
        let i = g.rng.gen_range(1..=s.dim);
        let j = i % s.dim + 1;
        let z = |x: &StarCylinder, a, b| swap(x, &[(a, b)]).unwrap();
        prop_assert_eq!(z(&s.c, i, j), z(&s.c, j, i));
        prop_assert_eq!(z(&z(&s.c, i, j), j, i), s.c.clone());
        let lhs = outer_cyl(&z(&s.c, i, j), i).unwrap();
        let rhs = z(&outer_cyl(&s.c, j).unwrap(), i, j);
        prop_assert_eq!(ground(&lhs, &s.t).unwrap(), ground(&rhs, &s.t).unwrap());
        let full = outer_cyl(&outer_cyl(&s.c, i).unwrap(), j).unwrap();
        prop_assert_eq!(ground(&z(&full, i, j), &s.t).unwrap(), ground(&full, &s.t).unwrap());
    }

    #[test]
    fn random_expressions_match_set_semantics(seed in any::<u64>()) {
        let (mut g, s) = setup(seed, 1..=3);
        let e = g.expr(s.dim, 2, 3, true);
        let got = evaluate(&e, &[s.c.clone(), s.d.clone()], &s.ctx).unwrap();
        let inst = Instance {
            schema: Schema::new([("C", s.dim), ("D", s.dim)]).unwrap(),
            universe: s.t.clone(),
            relations: vec![ground(&s.c, &s.t).unwrap(), ground(&s.d, &s.t).unwrap()],
        };
        prop_assert_eq!(ground(&got, &s.t).unwrap(), eval_ca_set(&e, &inst, s.dim).unwrap());
    }
}
