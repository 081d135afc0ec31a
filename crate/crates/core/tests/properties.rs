mod common;

use common::{dimensional, generate, random_query, Stratum};
use obdax_core::chase::{chase, oracle_certain_answers, OracleVerdict};
use obdax_core::dimensions::{check_admissibility, covers, ell};
use obdax_core::interp::{evaluate, evaluate_individuals, Interpretation};
use obdax_core::kb::{normalize, signature_of, ABox, Assertion, Role, TBox};
use obdax_core::model::{build_small_model, certain_answers, AnswerOptions, ReasonError};
use obdax_core::query::{canonicalize, subsumes, ConjunctiveQuery, Term};
use obdax_core::reformulate::{all_moves, restrain_moves, RuleId};
use obdax_core::rewrite::{k_rewrite, rewrite, RewriteOptions};
use obdax_core::roles::{check_k_bounded, classify, longest_guard_path, recursion_graph, Boundedness, TBoxClass};
use obdax_core::syntax::{parse_kb, parse_query, serialize_kb, serialize_query, KbDocument};
use obdax_core::KnowledgeBase;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

const BUDGET: usize = 200;

fn normalized(doc: &KbDocument) -> TBox {
    normalize(&doc.tbox, &signature_of(&doc.tbox, &doc.abox))
}

fn consistent(doc: &KbDocument) -> bool {
    let res = chase(&doc.tbox, &doc.abox, BUDGET);
    res.saturated && obdax_core::model::violations_in(&doc.tbox, &res.interpretation).is_empty()
}

fn oracle(q: &ConjunctiveQuery, doc: &KbDocument) -> Option<obdax_core::AnswerSet> {
    match oracle_certain_answers(q, &doc.tbox, &doc.abox, BUDGET) {
        OracleVerdict::Answers { answers, saturated: true } => Some(answers),
        _ => None,
    }
}

fn kb_and_query(seed: u64, index: usize, atoms: usize) -> (KbDocument, ConjunctiveQuery, Stratum) {
    let g = generate(seed, index, 0.1);
    let q = random_query(&mut StdRng::seed_from_u64(seed ^ index as u64), &g.doc, atoms);
    (g.doc, q, g.stratum)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn inverse_is_an_involution(name in "[a-z]{1,6}", inverse in any::<bool>()) {
        let r = Role { name, inverse };
        prop_assert_eq!(r.inv().inv(), r);
    }

    #[test]
    fn normalization_keeps_certain_answers(seed in any::<u64>(), index in 0usize..64) {
        let (doc, q, _) = kb_and_query(seed, index, 4);
        prop_assume!(consistent(&doc));
        let t = normalized(&doc);
        let before = oracle(&q, &doc);
        let after = match oracle_certain_answers(&q, &t, &doc.abox, BUDGET) {
            OracleVerdict::Answers { answers, saturated: true } => Some(answers),
            _ => None,
        };
        prop_assume!(before.is_some() && after.is_some());
        prop_assert_eq!(before, after);
    }

    #[test]
    fn recursion_graph_is_monotone(seed in any::<u64>(), index in 0usize..64, extra in 0usize..15) {
        let a = generate(seed, index, 0.1).doc.tbox;
        let b = generate(seed.wrapping_add(1), index, 0.1).doc.tbox;
        let mut bigger = a.clone();
        bigger.axioms.push(b.axioms[extra % b.axioms.len()].clone());
        let (small, large) = (recursion_graph(&a), recursion_graph(&bigger));
        prop_assert!(small.edges.is_subset(&large.edges));
    }

    #[test]
    fn non_recursive_means_no_recursive_roles(seed in any::<u64>(), index in 0usize..64) {
        let doc = generate(seed, index, 0.1).doc;
        let class = classify(&normalized(&doc));
        if class.class == TBoxClass::NonRecursive {
            prop_assert!(class.recursive_roles.is_empty());
        } else {
            prop_assert!(!class.recursive_roles.is_empty());
        }
    }

    #[test]
    fn boundedness_is_antitone_in_k(seed in any::<u64>(), index in 0usize..64) {
        let doc = generate(seed, index, 0.1).doc;
        let t = normalized(&doc);
        let mut was_bounded = false;
        for k in 1..=6 {
            let b = check_k_bounded(&t, &doc.abox, k).unwrap();
            if was_bounded {
                prop_assert_eq!(&b, &Boundedness::Bounded, "k={}", k);
            }
            was_bounded = b == Boundedness::Bounded;
        }
    }

    #[test]
    fn rewriting_is_sound_complete_and_contains_the_seed(seed in any::<u64>(), index in 0usize..32) {
        let (doc, q, _) = kb_and_query(seed, index * 2, 4);
        let t = normalized(&doc);
        let rs = rewrite(&q, &t, &RewriteOptions::default()).unwrap();
        prop_assert!(rs.contains(&q));
        prop_assume!(consistent(&doc));
        let Some(want) = oracle(&q, &doc) else { return Ok(()) };
        let data = Interpretation::from_abox(&doc.abox);
        let mut union = obdax_core::AnswerSet::empty(q.answer_vars.len());
        for d in &rs.queries {
            let got = evaluate_individuals(d, &data);
            prop_assert!(got.is_subset(&want), "unsound disjunct {}", d);
            union.extend(got);
        }
        prop_assert_eq!(union, want);
    }

    #[test]
    fn unfolded_rewriting_matches_the_oracle(seed in any::<u64>(), index in 0usize..32) {
        let (doc, q, stratum) = kb_and_query(seed, index * 2 + 1, 4);
        prop_assert_eq!(stratum, Stratum::RecursionSafe);
        prop_assume!(consistent(&doc));
        let t = normalized(&doc);
        let class = classify(&t);
        let Some((len, _)) = longest_guard_path(&t, &doc.abox, &class) else { return Ok(()) };
        let k = len.max(1) as i64;
        let Some(want) = oracle(&q, &doc) else { return Ok(()) };
        let (rs, u) = k_rewrite(&q, &t, k, &RewriteOptions::default()).unwrap();
        let data = Interpretation::from_abox(&doc.abox);
        let mut union = obdax_core::AnswerSet::empty(q.answer_vars.len());
        for d in rs.avoiding_roles(&u.fresh_roles) {
            union.extend(evaluate_individuals(d, &data));
        }
        prop_assert_eq!(union, want);
    }

    #[test]
    fn evaluation_is_monotone(seed in any::<u64>(), index in 0usize..64, extra in 0u64..1000) {
        let (doc, q, _) = kb_and_query(seed, index, 4);
        let more = generate(extra, index, 0.1).doc.abox;
        let mut bigger = doc.abox.clone();
        for a in more.assertions.iter() {
            bigger.insert(a.clone());
        }
        let small = evaluate(&q, &Interpretation::from_abox(&doc.abox));
        let large = evaluate(&q, &Interpretation::from_abox(&bigger));
        prop_assert!(small.is_subset(&large));
    }

    #[test]
    fn answers_name_only_abox_individuals(seed in any::<u64>(), index in 0usize..64) {
        let (doc, q, _) = kb_and_query(seed, index, 3);
        let t = normalized(&doc);
        let individuals = signature_of(&TBox::default(), &doc.abox).individuals;
        let consts = q.atoms.iter().flat_map(|a| a.terms()).filter_map(|t| match t {
            Term::Ind(i) => Some(i.clone()),
            Term::Var(_) => None,
        });
        let allowed: std::collections::BTreeSet<String> = individuals.into_iter().chain(consts).collect();
        match certain_answers(&q, &t, &doc.abox, &AnswerOptions::default()) {
            Ok(a) => {
                for tuple in &a.answers.tuples {
                    prop_assert!(tuple.iter().all(|x| allowed.contains(x)), "{:?}", tuple);
                }
            }
            Err(ReasonError::InconsistentKB(_)) | Err(ReasonError::UnboundedOrUnknown) => {}
            Err(e) => prop_assert!(false, "{}", e),
        }
    }

    #[test]
    fn chase_answers_grow_with_the_budget(seed in any::<u64>(), index in 0usize..64, b in 0usize..60) {
        let (doc, q, _) = kb_and_query(seed, index, 3);
        let at = |budget| evaluate_individuals(&q, &chase(&doc.tbox, &doc.abox, budget).interpretation);
        prop_assert!(at(b).is_subset(&at(b + 40)));
    }

    #[test]
    fn moves_are_deterministic(seed in any::<u64>(), index in 0usize..32) {
        let (doc, q, _) = kb_and_query(seed, index, 3);
        let kb = KnowledgeBase::new(doc.clone(), 1);
        prop_assume!(matches!(kb.consistency(), Ok(r) if r.consistent));
        let first = all_moves(&kb, &q);
        let again = all_moves(&KnowledgeBase::new(doc, 1), &q);
        prop_assert_eq!(first, again);
    }

    #[test]
    fn ontology_restrain_moves_stay_inside_the_rewriting(seed in any::<u64>(), index in 0usize..32) {
        let (doc, q, _) = kb_and_query(seed, index * 2, 3);
        let kb = KnowledgeBase::new(doc, 1);
        prop_assume!(matches!(kb.consistency(), Ok(r) if r.consistent));
        let rs = rewrite(&q, &kb.tbox, &RewriteOptions::default()).unwrap();
        for m in restrain_moves(&kb, &q, false).unwrap() {
            prop_assert!(matches!(m.rule, RuleId::S1 | RuleId::S2 | RuleId::S3 | RuleId::S4 | RuleId::S5 | RuleId::S6 | RuleId::S7));
            prop_assert!(rs.queries.iter().any(|d| subsumes(d, &m.result)), "{} escapes the rewriting", m.result);
        }
    }

    #[test]
    fn unfolding_at_ell_matches_the_oracle(seed in any::<u64>(), admissible in any::<bool>(), qseed in any::<u64>()) {
        let doc = dimensional(seed, admissible);
        let kb = KnowledgeBase::new(doc.clone(), 1);
        prop_assume!(covers(&kb.constraints, &kb.tbox).covered);
        prop_assume!(check_admissibility(&kb.tbox, &kb.abox, &kb.constraints).unwrap().admissible);
        let k = ell(&kb.constraints).unwrap() as i64;
        let q = random_query(&mut StdRng::seed_from_u64(qseed), &doc, 3);
        let Some(want) = oracle(&q, &doc) else { return Ok(()) };
        let (rs, u) = k_rewrite(&q, &kb.tbox, k, &RewriteOptions::default()).unwrap();
        let data = Interpretation::from_abox(&kb.abox);
        let mut union = obdax_core::AnswerSet::empty(q.answer_vars.len());
        for d in rs.avoiding_roles(&u.fresh_roles) {
            union.extend(evaluate_individuals(d, &data));
        }
        prop_assert_eq!(union, want);
    }

    #[test]
    fn admissibility_matches_a_direct_check(seed in any::<u64>(), admissible in any::<bool>(), stray in proptest::option::of((0usize..5, 0usize..5))) {
        let mut doc = dimensional(seed, admissible);
        if let Some((i, j)) = stray {
            doc.abox.insert(Assertion::Role("part".into(), format!("m{i}_0"), format!("m{j}_0")));
        }
        let report = check_admissibility(&doc.tbox, &doc.abox, &doc.constraints).unwrap();
        let m = build_small_model(&normalized(&doc), &doc.abox);
        for (oc, verdict) in doc.constraints.iter().zip(&report.verdicts) {
            let closure = oc.closure();
            let member = |c: &str, e| m.is_member(&obdax_core::BasicConcept::name(c), e);
            let direct = m.role_pairs(&Role::named(oc.role.clone())).into_iter().all(|(d, e)| {
                let ordered = oc.concepts.iter().any(|a| oc.concepts.iter().any(|b| closure.contains(&(a.clone(), b.clone())) && member(a, d) && member(b, e)));
                let against = oc.concepts.iter().any(|a| oc.concepts.iter().any(|b| !closure.contains(&(a.clone(), b.clone())) && member(a, d) && member(b, e)));
                ordered && !against
            });
            prop_assert_eq!(*verdict, direct);
        }
    }

    #[test]
    fn documents_round_trip(seed in any::<u64>(), index in 0usize..64) {
        let (mut doc, q, _) = kb_and_query(seed, index, 5);
        // A TBox is a set of axioms; the parser keeps the first occurrence.
        let mut axioms = Vec::new();
        for ax in doc.tbox.axioms.drain(..) {
            if !axioms.contains(&ax) {
                axioms.push(ax);
            }
        }
        doc.tbox.axioms = axioms;
        let text = serialize_kb(&doc);
        let back = parse_kb(&text).unwrap();
        prop_assert_eq!(&back, &doc);
        prop_assert_eq!(serialize_kb(&back), text);
        let qb = parse_query(&serialize_query(&q)).unwrap();
        prop_assert_eq!(canonicalize(&qb), canonicalize(&q));
    }

    #[test]
    fn diagnostics_are_deterministic(text in "[a-zA-Z(),.? =\\-\n]{0,80}") {
        prop_assert_eq!(parse_kb(&text).err(), parse_kb(&text).err());
        prop_assert_eq!(parse_query(&text).err(), parse_query(&text).err());
    }
}

#[test]
fn empty_abox_is_bounded() {
    let doc = generate(3, 1, 0.1).doc;
    let t = normalized(&doc);
    assert_eq!(check_k_bounded(&t, &ABox::default(), 1).unwrap(), Boundedness::Bounded);
}
