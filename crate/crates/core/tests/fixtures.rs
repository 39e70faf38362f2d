use potb::anova::{estssq_equivalence, random_response, simulate, ModelSpec};
use potb::constructions::{potb_2pow7h, seed_plans, table_3_2_3, table_4_1_1, table_4_2_1};
use potb::linalg::rank;
use potb::orthogonality::{
    c_matrix_factor, complement_set, contrast_c_matrix, is_potb, is_potp, orth_through, ContrastScale,
};
use potb::plan::{Effect, Plan};
use serde_json::{json, Value};

const GOLDEN: &str = include_str!("golden/simulate_table_3_2_3_seed42.json");

fn golden_document() -> Value {
    let plan = table_3_2_3();
    let mut model = ModelSpec::null(&plan, 1.0, 42);
    model.mean = 10.0;
    model.effects[0] = vec![1.0, 0.0, -1.0];
    let y = simulate(&plan, &model).unwrap();
    json!({
        "plan": plan.name(),
        "seed": 42,
        "simulate": y,
        "random_response": [random_response(10, 42, 0), random_response(10, 42, 1)],
    })
}

#[test]
fn simulation_matches_golden_file() {
    let got = serde_json::to_string_pretty(&golden_document()).unwrap();
    assert_eq!(got, GOLDEN.trim_end());
}

#[test]
fn zero_noise_gives_mean_response() {
    let plan = table_3_2_3();
    let mut model = ModelSpec::null(&plan, 0.0, 7);
    model.mean = 2.5;
    assert_eq!(simulate(&plan, &model).unwrap(), vec![2.5; 10]);
}

#[test]
fn merged_blocks_lose_orthogonality() {
    let merged = table_4_2_1().merged_blocks();
    let rep = is_potb(&merged).unwrap();
    assert!(!rep.pass());
    assert!(rep.pairs.iter().all(|p| p.pfc == Some(false) || !p.pass));
}

#[test]
fn potp_through_other_pair() {
    let plan = table_4_1_1();
    let rep = is_potp(&plan, [Effect::Treatment(2), Effect::Treatment(3)]).unwrap();
    assert_eq!(rep.pairs.len(), 1);
    assert!(!rep.pass());
    let base = is_potp(&plan, [Effect::Treatment(0), Effect::Treatment(1)]).unwrap();
    assert!(base.pass());
    for p in &rep.pairs {
        let again = orth_through(
            &plan,
            plan.effect_by_name(&p.a).unwrap(),
            plan.effect_by_name(&p.b).unwrap(),
            &[Effect::Treatment(2), Effect::Treatment(3)],
        )
        .unwrap();
        assert_eq!(again.pass, p.pass);
    }
}

#[test]
fn two_factor_incidence_pattern() {
    let plan = table_4_1_1();
    let [a1, a2, a3, a4] = [0, 1, 2, 3].map(Effect::Treatment);
    let n12 = plan.incidence(a1, a2).unwrap();
    let n34 = plan.incidence(a3, a4).unwrap();
    for i in 0..3 {
        for j in 0..3 {
            assert_eq!(n12[(i, j)], if i == j { 0 } else { 2 });
            assert_eq!(n34[(i, j)], if i == j { 2 } else { 1 });
        }
    }
}

#[test]
fn sums_of_squares_agree_through_pair() {
    let plan = table_4_1_1();
    let r = estssq_equivalence(
        &plan,
        Effect::Treatment(2),
        &[Effect::Treatment(0), Effect::Treatment(1)],
        20,
        3,
    )
    .unwrap();
    assert!(r.condition);
    assert_eq!(r.equal_trials(), 20);
}

#[test]
fn information_matrix_rank_of_three_level_factor() {
    let plan = table_3_2_3();
    let a = Effect::Treatment(0);
    let c = c_matrix_factor(&plan, a, &complement_set(&plan, a)).unwrap();
    assert_eq!(rank(&c), 2);
}

fn check_reduction(plan: &Plan) {
    if !plan.is_blocked() {
        return;
    }
    for a in plan.treatments() {
        let others = complement_set(plan, a);
        let holds = plan
            .treatments()
            .filter(|&b| b != a)
            .all(|b| orth_through(plan, a, b, &[Effect::Block]).unwrap().pass);
        let full = c_matrix_factor(plan, a, &others).unwrap();
        let reduced = c_matrix_factor(plan, a, &[Effect::Block]).unwrap();
        if holds {
            assert_eq!(full, reduced, "{} {}", plan.name(), plan.effect_name(a));
        }
    }
}

#[test]
fn adjustment_reduces_on_fixtures() {
    for plan in seed_plans() {
        check_reduction(&plan);
    }
    check_reduction(&potb_2pow7h(2).unwrap());
}

#[test]
fn potb_fixtures_have_vanishing_cross_blocks() {
    for plan in [table_4_2_1(), table_3_2_3(), potb_2pow7h(2).unwrap()] {
        assert!(is_potb(&plan).unwrap().pass());
        let c = contrast_c_matrix(&plan, ContrastScale::Orthonormal).unwrap();
        assert!(c.cross_blocks_vanish(), "{}", plan.name());
    }
}

#[test]
fn plan_json_round_trips() {
    for plan in seed_plans() {
        assert_eq!(Plan::from_json(&plan.to_json()).unwrap(), plan);
    }
}
