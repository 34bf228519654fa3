use selmer_core::compare::{compare_methods, CompareOptions, Mismatch};
use selmer_core::local::{Mutation, Tables};
use selmer_core::model::{CurveParams, Family, Sign, SquareClass};
use selmer_core::oracle::Depth;
use selmer_core::selmer::{
    bound_e_plus, bound_eprime_plus, bound_e_minus, bound_eprime_minus, selmer_by_descent, selmer_by_graph, selmer_by_oracle,
    theorem_count, BoundKind, Fallback, OracleTable, SelmerError, SelmerSet,
};

fn params(eps: Sign, p: i64, q: i64, d: i64) -> CurveParams {
    CurveParams::new(eps, p, q, d).unwrap()
}

fn descent(par: &CurveParams, f: Family) -> SelmerSet {
    selmer_by_descent(par, f, &Tables::default(), Fallback::Oracle(Depth::Auto)).unwrap()
}

fn values(par: &CurveParams, s: &SelmerSet) -> Vec<i64> {
    let mut v: Vec<i64> = s.classes.iter().map(|c| par.value(c)).collect();
    v.sort();
    v
}

#[test]
fn eprime_contains_the_four_generators() {
    for (p, q, d) in [(3, 5, 7), (3, 7, 1), (5, 13, 11), (7, 23, 15)] {
        let plus = params(Sign::Plus, p, q, d);
        let s = descent(&plus, Family::EPrime);
        for v in [1, p * q, -p * d, -q * d] {
            assert!(s.contains(&plus.class_of(v).unwrap()), "+ {p} {q} {d}: {v}");
        }
        let minus = params(Sign::Minus, p, q, d);
        let s = descent(&minus, Family::EPrime);
        for v in [1, p * q, p * d, q * d] {
            assert!(s.contains(&minus.class_of(v).unwrap()), "- {p} {q} {d}: {v}");
        }
    }
}

#[test]
fn descent_equals_oracle_only_recomputation() {
    let par = params(Sign::Plus, 3, 5, 7);
    for f in [Family::E, Family::EPrime] {
        let d = descent(&par, f);
        let o = selmer_by_oracle(&par, f, Depth::Auto).unwrap();
        assert_eq!(d, o, "{f}");
    }
    // hand-checked: only the trivial class survives
    assert_eq!(values(&par, &descent(&par, Family::E)), vec![1]);
}

#[test]
fn descent_needs_fallback_for_uncovered_classes() {
    let par = params(Sign::Plus, 3, 5, 7);
    let r = selmer_by_descent(&par, Family::EPrime, &Tables::default(), Fallback::Disabled);
    assert!(matches!(r, Err(SelmerError::Local(_))));
    // E needs no fallback
    assert!(selmer_by_descent(&par, Family::E, &Tables::default(), Fallback::Disabled).is_ok());
}

#[test]
fn graph_equals_descent_and_theorem_count() {
    for (eps, p, q, d) in [
        (Sign::Plus, 3, 5, 7),
        (Sign::Plus, 7, 11, 1),
        (Sign::Minus, 3, 5, 7),
        (Sign::Minus, 7, 11, 1),
        (Sign::Plus, 5, 37, 77),
        (Sign::Minus, 17, 19, 15),
    ] {
        let par = params(eps, p, q, d);
        for f in [Family::E, Family::EPrime] {
            let g = selmer_by_graph(&par, f).unwrap();
            assert!(g.set.contains(&par.identity()));
            let desc = descent(&par, f);
            assert_eq!(g.set, desc, "{eps} {p} {q} {d} {f}");
            assert_eq!(theorem_count(&par, f).unwrap(), desc.len() as u64);
        }
    }
}

#[test]
fn empty_d_eprime_plus_count_at_least_four() {
    for (p, q) in [(3, 5), (3, 7), (5, 13), (3, 19), (5, 37)] {
        let par = params(Sign::Plus, p, q, 1);
        assert!(theorem_count(&par, Family::EPrime).unwrap() >= 4);
    }
}

#[test]
fn subgroup_check() {
    let par = params(Sign::Plus, 3, 5, 7);
    let one = par.identity();
    let two = par.class_of(2).unwrap();
    assert!(SelmerSet::new(Family::E, Sign::Plus, [one, two]).is_ok());
    assert!(SelmerSet::new(Family::E, Sign::Plus, [two]).is_err());
    let three = par.class_of(3).unwrap();
    assert!(SelmerSet::new(Family::E, Sign::Plus, [one, two, three]).is_err());
}

#[test]
fn e_plus_bound_for_3_5_7() {
    // Pi_1 = 1 + (1-(5/7))(1-(3/7)) + (1-(7/3)) + (1-(7/5)) = 1 + 4 + 0 + 2
    // Pi_2 = 1 + (1-(2/3)) + (1-(2/5)) + (1-(2/7)) = 1 + 2 + 2 + 0
    let b = bound_e_plus(&params(Sign::Plus, 3, 5, 7)).unwrap();
    assert_eq!(b.pi_values, vec![(1, 7), (2, 5)]);
    assert_eq!(b.delta_flags, vec![(1, 1), (2, 1)]);
    assert_eq!(b.rho, 0);
    assert!(b.witness.is_empty());
}

#[test]
fn e_minus_bound_for_3_5_7() {
    // Pi_1 = 1 + (1-(-5/7))(1-(-3/7)) + 2 = 1 + 0 + 2
    // Pi_3 = 1 + (1-(-1/3)) + (1-(-1/5)) + (1-(-1/7)) = 1 + 2 + 0 + 2
    let b = bound_e_minus(&params(Sign::Minus, 3, 5, 7)).unwrap();
    assert_eq!(b.pi_values, vec![(1, 3), (2, 5), (3, 5)]);
    assert_eq!(b.rho, 0);
}

#[test]
fn e_plus_bound_empty_d_has_one_index() {
    for (p, q) in [(3, 5), (3, 7), (5, 13), (3, 19), (5, 37), (7, 71)] {
        let b = bound_e_plus(&params(Sign::Plus, p, q, 1)).unwrap();
        assert_eq!(b.pi_values.len(), 1);
        assert!(b.rho <= 1);
    }
}

#[test]
fn e_minus_bound_empty_d_delta_for_pd_one_mod_8() {
    // p = 17, q = 19: pD = 17 = 1 (mod 8)
    let b = bound_e_minus(&params(Sign::Minus, 17, 19, 1)).unwrap();
    assert_eq!(b.delta_flags.last(), Some(&(2, 0)));
}

#[test]
fn eprime_plus_index_set() {
    // m = 2, D1 = 5 = 1 (mod 4)
    let b = bound_eprime_plus(&params(Sign::Plus, 3, 7, 5)).unwrap();
    assert_eq!(b.index_set, Some(vec![1]));
    // m = 5, D = 1: I empty, rho from Pi_{n+1} alone
    let b = bound_eprime_plus(&params(Sign::Plus, 5, 37, 1)).unwrap();
    assert_eq!(b.index_set, Some(vec![]));
    assert_eq!(b.pi_values.len(), 1);
    assert!(matches!(bound_eprime_plus(&params(Sign::Plus, 3, 5, 7)), Err(SelmerError::OutOfScope(BoundKind::EPrimePlus))));
}

#[test]
fn eprime_minus_index_set() {
    // m = 3, D1 = 7 = 3 (mod 4) and pD - D1 = 28 = 4 (mod 8)
    let b = bound_eprime_minus(&params(Sign::Minus, 5, 13, 7)).unwrap();
    assert_eq!(b.index_set, Some(vec![1]));
    let b = bound_eprime_minus(&params(Sign::Minus, 3, 7, 1)).unwrap();
    assert_eq!(b.rho, 0);
    assert!(matches!(bound_eprime_minus(&params(Sign::Minus, 3, 5, 7)), Err(SelmerError::OutOfScope(BoundKind::EPrimeMinus))));
    assert!(matches!(bound_eprime_minus(&params(Sign::Plus, 3, 7, 5)), Err(SelmerError::WrongSign(BoundKind::EPrimeMinus))));
}

#[test]
fn bound_witnesses_are_selmer_elements() {
    for (p, q, d) in [(3, 7, 5), (5, 13, 1), (17, 19, 1), (7, 23, 17), (13, 29, 3)] {
        let par = params(Sign::Plus, p, q, d);
        let b = bound_e_plus(&par).unwrap();
        let s = descent(&par, Family::E);
        assert!(b.rho <= s.dim2);
        assert!(b.witness.iter().all(|w| s.contains(w)));
        let par = params(Sign::Minus, p, q, d);
        let b = bound_e_minus(&par).unwrap();
        let s = descent(&par, Family::E);
        assert!(b.rho <= s.dim2);
        assert!(b.witness.iter().all(|w| s.contains(w)));
    }
}

#[test]
fn comparison_agrees() {
    let par = params(Sign::Plus, 3, 5, 7);
    let oracle = OracleTable::compute(&par, Depth::Auto);
    let opts = CompareOptions { oracle: Some(&oracle), ..Default::default() };
    let r = compare_methods(&par, &opts).unwrap();
    assert!(r.agrees(), "{:?}", r.mismatches);
    assert!(r.table_checks > 0);
}

#[test]
fn mutation_is_localized_to_its_clause() {
    // E+, m = 1, d = 2: the mutated congruence flips the verdict at 2
    let par = params(Sign::Plus, 3, 5, 7);
    let oracle = OracleTable::compute(&par, Depth::Auto);
    let m = Mutation::parse("E+.B1.m1#0").unwrap();
    let opts = CompareOptions { oracle: Some(&oracle), tables: Tables::mutated(m), ..Default::default() };
    let r = compare_methods(&par, &opts).unwrap();
    assert!(!r.agrees());
    for mm in &r.mismatches {
        if let Mismatch::TableOracle { rule, .. } = mm {
            assert_eq!(*rule, "E+.B1.m1");
        }
    }
    assert!(r.mismatches.iter().any(|mm| matches!(mm, Mismatch::TableOracle { .. })));
}

#[test]
fn shallow_oracle_is_reported() {
    let par = params(Sign::Plus, 5, 13, 1);
    let oracle = OracleTable::compute(&par, Depth::Fixed(1));
    assert!(oracle.depth_errors().next().is_some());
    let opts = CompareOptions { oracle: Some(&oracle), ..Default::default() };
    assert!(matches!(compare_methods(&par, &opts), Err(SelmerError::Oracle(_))));
}

#[test]
fn case_gap_marks_graph_unavailable() {
    let par = params(Sign::Minus, 7, 23, 1);
    let r = compare_methods(&par, &CompareOptions::default()).unwrap();
    assert!(r.eprime.graph_unavailable.is_some());
    assert!(r.eprime.theorem.is_none());
    assert!(r.agrees());
}

#[test]
fn kill_rules_hold() {
    for (eps, p, q, d) in [(Sign::Plus, 3, 5, 7), (Sign::Minus, 3, 7, 5), (Sign::Minus, 5, 13, 77)] {
        let par = params(eps, p, q, d);
        for c in &descent(&par, Family::E).classes {
            assert!(!c.has(SquareClass::P) && !c.has(SquareClass::Q));
        }
        for c in &descent(&par, Family::EPrime).classes {
            assert!(!c.has(SquareClass::TWO));
            if eps == Sign::Minus {
                assert!(par.value(c) > 0);
            }
        }
    }
}
