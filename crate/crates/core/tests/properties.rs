use proptest::prelude::*;

use vamkit::copositivity::{self, Mode, Options};
use vamkit::exec::Execution;
use vamkit::linprog::{self, LpStatus, Sense};
use vamkit::numeric::linalg::{self, from_ints, SymMatrix, Vector};
use vamkit::numeric::{int, ExtScalar, Scalar};
use vamkit::polyhedra::json::{from_json, to_json};
use vamkit::polyhedra::{Constraint, Polyhedron};
use vamkit::suite;

fn rows(dim: usize, count: usize) -> impl Strategy<Value = Vec<(Vec<i64>, i64)>> {
    prop::collection::vec((prop::collection::vec(-2i64..=2, dim), -2i64..=3), 1..=count)
}

fn polyhedron(dim: usize, rs: &[(Vec<i64>, i64)]) -> Polyhedron {
    let ineq = rs.iter().map(|(r, b)| Constraint::new(from_ints(r), int(*b))).collect();
    Polyhedron::new(dim, ineq, Vec::new()).unwrap()
}

/// A box around the origin keeps the polyhedron bounded.
fn boxed(dim: usize, rs: &[(Vec<i64>, i64)]) -> Polyhedron {
    let mut ineq: Vec<Constraint> = rs.iter().map(|(r, b)| Constraint::new(from_ints(r), int(*b))).collect();
    for k in 0..dim {
        ineq.push(Constraint::new(linalg::unit(dim, k), int(3)));
        ineq.push(Constraint::new(linalg::neg(&linalg::unit(dim, k)), int(3)));
    }
    Polyhedron::new(dim, ineq, Vec::new()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn generators_round_trip(rs in rows(3, 5)) {
        let p = polyhedron(3, &rs);
        let q = Polyhedron::from_generators(3, p.generators()).unwrap();
        prop_assert!(p.set_eq(&q));
    }

    #[test]
    fn json_round_trip(rs in rows(3, 4)) {
        let p = polyhedron(3, &rs);
        let back = from_json(&to_json(&p)).unwrap();
        prop_assert!(p.set_eq(&back));
        prop_assert_eq!(to_json(&back), to_json(&p));
    }

    #[test]
    fn lp_optimum_is_attained_at_a_vertex(rs in rows(2, 4), c in prop::collection::vec(-3i64..=3, 2)) {
        let p = boxed(2, &rs);
        let c = from_ints(&c);
        let r = linprog::solve(&c, &p, Sense::Min);
        if p.is_empty() {
            prop_assert_eq!(r.status, LpStatus::Infeasible);
        } else {
            prop_assert_eq!(r.status, LpStatus::Optimal);
            let best = p.generators().vertices.iter().map(|v| linalg::dot(&c, v)).min().unwrap();
            prop_assert_eq!(r.value.unwrap(), best);
            prop_assert!(p.contains(r.optimizer.as_ref().unwrap()).unwrap());
        }
    }

    #[test]
    fn polar_of_polar_is_the_cone(rs in prop::collection::vec(prop::collection::vec(-2i64..=2, 3), 1..=4)) {
        let ineq: Vec<Vector> = rs.iter().map(|r| from_ints(r)).collect();
        let k = Polyhedron::cone(3, &ineq, &[]).unwrap();
        prop_assert!(k.polar_cone().polar_cone().set_eq(&k));
    }

    #[test]
    fn execution_modes_agree_on_copositivity(
        q in prop::collection::vec(-2i64..=2, 6),
        rs in prop::collection::vec(prop::collection::vec(-1i64..=1, 3), 1..=3),
    ) {
        let mut form = SymMatrix::zeros(3);
        let mut it = q.iter();
        for i in 0..3 {
            for j in i..3 {
                form.set(i, j, int(*it.next().unwrap()));
            }
        }
        let ineq: Vec<Vector> = rs.iter().map(|r| from_ints(r)).collect();
        let cone = Polyhedron::cone(3, &ineq, &[]).unwrap();
        let seq = Options { execution: Execution::Sequential, ..Options::default() };
        let par = Options { execution: Execution::Parallel, ..Options::default() };
        for mode in [Mode::Strict, Mode::Nonstrict] {
            let a = copositivity::check_form(&form, &cone, mode, &seq);
            let b = copositivity::check_form(&form, &cone, mode, &par);
            prop_assert_eq!(a.verdict.outcome, b.verdict.outcome);
        }
    }

    #[test]
    fn subderivative_is_support_of_subdifferential(seed in 0u64..1000, w in prop::collection::vec(-2i64..=2, 2)) {
        let inst = suite::identity_instance(&mut suite::rng(seed), 2).unwrap();
        let theta = &inst.composite.theta;
        let w = from_ints(&w);
        let d = theta.subderivative(&inst.x, &w).unwrap();
        let sd = theta.subdifferential(&inst.x).unwrap();
        let support = match linprog::solve(&w, &sd, Sense::Max) {
            r if r.status == LpStatus::Optimal => ExtScalar::Finite(r.value.unwrap()),
            _ => ExtScalar::PosInf,
        };
        prop_assert_eq!(d, support);
    }

    #[test]
    fn second_subderivative_is_homogeneous(seed in 0u64..1000, w in prop::collection::vec(-2i64..=2, 2)) {
        let inst = suite::identity_instance(&mut suite::rng(seed), 2).unwrap();
        let theta = &inst.composite.theta;
        let w = from_ints(&w);
        let d = theta.second_subderivative(&inst.x, &inst.lambda, &w).unwrap();
        let scaled = theta.second_subderivative(&inst.x, &inst.lambda, &linalg::scale(&int(3), &w)).unwrap();
        let expected = match d {
            ExtScalar::Finite(v) => ExtScalar::Finite(v * Scalar::from_integer(9.into())),
            other => other,
        };
        prop_assert_eq!(scaled, expected);
    }
}
