mod common;

use common::*;
use ltlf_loss::soft::Gamma;
use ltlf_loss::{eval, loss_l, not_constraint, soft_depth, soundness_probe, Constraint, Error, Path};
use proptest::prelude::*;

fn grid_value() -> impl Strategy<Value = f64> + Clone {
    prop::sample::select(vec![0.0, 0.5, 1.0])
}

fn tenths() -> impl Strategy<Value = f64> + Clone {
    (0..=10u8).prop_map(|v| f64::from(v) / 10.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn eval_matches_both_oracles(c in constraint_strategy(3, 5), p in path_strategy(3, 6, grid_value())) {
        let ss = states(&p);
        let v = eval(&c, &p).unwrap();
        prop_assert_eq!(v, rec_eval(&c, &ss));
        prop_assert_eq!(v, suffix_eval(&c, &ss));
    }

    #[test]
    fn loss_is_the_structural_recursion(
        c in constraint_strategy(3, 4),
        p in path_strategy(3, 5, -1.0..1.0f64),
        g in prop::sample::select(vec![0.0, 0.001, 0.01, 0.05, 0.1, 1.0]),
    ) {
        let l = loss_l(&c, &p, Gamma(g)).unwrap();
        prop_assert_eq!(l.to_bits(), rec_l(&c, &states(&p), Gamma(g)).to_bits());
    }

    #[test]
    fn hard_loss_is_zero_exactly_when_true(c in constraint_strategy(3, 4), p in path_strategy(3, 5, tenths())) {
        let l = loss_l(&c, &p, Gamma(0.0)).unwrap();
        prop_assert!(l >= 0.0);
        prop_assert_eq!(l == 0.0, eval(&c, &p).unwrap());
    }

    #[test]
    fn hard_and_is_idempotent(c in constraint_strategy(3, 4), p in path_strategy(3, 5, tenths())) {
        let twice = Constraint::and(c.clone(), c.clone());
        prop_assert_eq!(loss_l(&twice, &p, Gamma(0.0)).unwrap(), loss_l(&c, &p, Gamma(0.0)).unwrap());
    }

    #[test]
    fn always_is_idempotent(c in constraint_strategy(2, 3), p in path_strategy(2, 6, grid_value())) {
        let once = Constraint::always(c);
        let twice = Constraint::always(once.clone());
        prop_assert_eq!(eval(&twice, &p).unwrap(), eval(&once, &p).unwrap());
    }

    #[test]
    fn next_distributes_over_or(a in constraint_strategy(2, 3), b in constraint_strategy(2, 3), p in path_strategy(2, 6, grid_value())) {
        let lhs = Constraint::next(Constraint::or(a.clone(), b.clone()));
        let rhs = Constraint::or(Constraint::next(a), Constraint::next(b));
        prop_assert_eq!(eval(&lhs, &p).unwrap(), eval(&rhs, &p).unwrap());
    }

    #[test]
    fn negation_flips_truth(c in constraint_strategy(3, 4), p in path_strategy(3, 5, grid_value())) {
        match not_constraint(&c) {
            Ok(n) if !p.is_empty() => prop_assert_eq!(eval(&n, &p).unwrap(), !eval(&c, &p).unwrap()),
            Ok(_) => {}
            Err(Error::UnsupportedNegation(_)) => {}
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        }
    }

    #[test]
    fn probe_bounds(c in constraint_strategy(3, 3), p in path_strategy(3, 5, tenths())) {
        let schedule = [0.1, 0.05, 0.01, 0.005, 0.001].map(Gamma);
        let values = soundness_probe(&c, &p, &schedule).unwrap();
        let hard = loss_l(&c, &p, Gamma(0.0)).unwrap();
        let depth = soft_depth(&c, p.len()) as f64;
        for (v, g) in values.iter().zip(schedule) {
            prop_assert!(*v >= hard - g.0 * std::f64::consts::LN_2 * depth - 1e-12, "{} < {}", v, hard);
        }
        if eval(&c, &p).unwrap() {
            let last = *values.last().unwrap();
            prop_assert!(last <= 0.05, "true constraint, final loss {}", last);
        }
    }
}

#[test]
fn empty_path_is_false_and_costs_one() {
    let p = Path::new(3);
    for c in enumerate(&[Constraint::lequal(0, 1), Constraint::nequal(2, 0)], 2) {
        assert!(!eval(&c, &p).unwrap());
        assert_eq!(loss_l(&c, &p, Gamma(0.01)).unwrap(), 1.0);
        assert_eq!(soundness_probe(&c, &p, &[Gamma(0.1), Gamma(0.01)]).unwrap(), vec![1.0, 1.0]);
    }
}

#[test]
fn next_and_its_negation_at_the_last_step() {
    let c = Constraint::less(0, 1);
    for s in [[0.2, 0.5], [0.5, 0.2], [0.5, 0.5]] {
        let p = Path::from_rows(&[s]).unwrap();
        // Both N c and N (not c) fail on a single state, so not (N c) is not
        // N (not c) there.
        assert!(!eval(&Constraint::next(c.clone()), &p).unwrap());
        assert!(!eval(&Constraint::next(not_constraint(&c).unwrap()), &p).unwrap());
    }
    assert!(matches!(
        not_constraint(&Constraint::next(c)),
        Err(Error::UnsupportedNegation(ltlf_loss::Operator::Next))
    ));
}

#[test]
fn until_against_unrolling_on_binary_paths() {
    let c = Constraint::until(Constraint::lequal(0, 2), Constraint::lequal(1, 2));
    for ss in all_paths(&[0.0, 1.0], 3, 3) {
        let p = path(&ss, 3);
        assert_eq!(eval(&c, &p).unwrap(), suffix_eval(&c, &ss), "{p}");
    }
}

#[test]
fn until_loss_two_steps_by_hand() {
    use ltlf_loss::soft::{max_gamma, min_gamma};
    let g = Gamma(0.05);
    let c = Constraint::until(Constraint::lequal(0, 1), Constraint::lequal(1, 0));
    let p = Path::from_rows(&[[0.3, 0.1], [0.2, 0.6]]).unwrap();
    let l1 = |s: [f64; 2]| max_gamma(g, s[0] - s[1], 0.0);
    let l2 = |s: [f64; 2]| max_gamma(g, s[1] - s[0], 0.0);
    let tail = min_gamma(g, l2([0.2, 0.6]), max_gamma(g, l1([0.2, 0.6]), 0.0));
    let expected = min_gamma(g, l2([0.3, 0.1]), max_gamma(g, l1([0.3, 0.1]), tail));
    assert_eq!(loss_l(&c, &p, g).unwrap(), expected);
}
