use num_rational::BigRational;
use proptest::prelude::*;

use potb::anova::{ss_adjusted_with, AdjustedSs};
use potb::constructions::{translate, GeneratorSet};
use potb::field::GaloisField;
use potb::linalg::{g_inverse_with, projector_with, rat, IntMatrix, PivotRule, RationalMatrix};
use potb::orthogonality::{
    c_matrix_factor, complement_set, contrast_c_matrix, contrast_c_matrix_with, orth_through, ContrastBasis,
    ContrastScale,
};
use potb::plan::{Effect, Factor, Plan};

/// A random plan with 1 to 3 factors of 2 or 3 levels and 1 to 3 blocks.
fn arb_plan() -> impl Strategy<Value = Plan> {
    (prop::collection::vec(2u32..=3, 1..=3), 4usize..=9, 1usize..=3)
        .prop_flat_map(|(levels, n, b)| {
            let run = levels.iter().map(|&s| 0..s).collect::<Vec<_>>();
            let cuts = prop::collection::vec(1usize..n, b - 1);
            (Just(levels), prop::collection::vec(run, n), cuts)
        })
        .prop_map(|(levels, runs, mut cuts)| {
            let n = runs.len();
            cuts.sort_unstable();
            cuts.dedup();
            let mut sizes = Vec::new();
            let mut prev = 0;
            for c in cuts.into_iter().chain([n]) {
                sizes.push(c - prev);
                prev = c;
            }
            let factors = levels
                .iter()
                .enumerate()
                .map(|(i, &s)| Factor::new(format!("F{i}"), s))
                .collect();
            Plan::new("random", factors, runs, Some(sizes)).unwrap()
        })
}

fn arb_matrix() -> impl Strategy<Value = RationalMatrix> {
    (1usize..=5, 1usize..=5, 0usize..=2).prop_flat_map(|(r, c, dup)| {
        prop::collection::vec(-3i64..=3, r * c).prop_map(move |v| {
            let base = IntMatrix::from_vec(r, c, v);
            // Repeat the first row to force rank deficiency.
            let mut rows = base.to_rows();
            for _ in 0..dup {
                rows.push(rows[0].clone());
            }
            IntMatrix::from_rows(&rows).to_rational()
        })
    })
}

fn perm(levels: u32) -> impl Strategy<Value = Vec<usize>> {
    Just((0..levels as usize).collect::<Vec<_>>()).prop_shuffle()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn incidence_totals_equal_run_count(plan in arb_plan()) {
        let n = plan.n_runs() as i64;
        let effects: Vec<Effect> = plan.treatments().chain([Effect::Block]).collect();
        for &a in &effects {
            prop_assert_eq!(plan.replication(a).unwrap().iter().sum::<i64>(), n);
            for &b in &effects {
                prop_assert_eq!(plan.incidence(a, b).unwrap().iter().sum::<i64>(), n);
            }
        }
    }

    #[test]
    fn g_inverse_reproduces_matrix(m in arb_matrix()) {
        for rule in [PivotRule::RowMajor, PivotRule::ReverseRowMajor] {
            let g = g_inverse_with(&m, rule);
            prop_assert_eq!(m.mul(&g).mul(&m), m.clone());
        }
    }

    #[test]
    fn projector_is_g_inverse_invariant(m in arb_matrix()) {
        let p = projector_with(&m, PivotRule::RowMajor);
        let q = projector_with(&m, PivotRule::ReverseRowMajor);
        prop_assert!(p.is_valid());
        prop_assert_eq!(p.matrix(), q.matrix());
        prop_assert_eq!(p.matrix().mul(&m), m);
    }

    #[test]
    fn ss_is_g_inverse_invariant(plan in arb_plan(), y in prop::collection::vec(-9i64..=9, 9)) {
        let y: Vec<BigRational> = y[..plan.n_runs()].iter().map(|&v| rat(v)).collect();
        let a = [Effect::Treatment(0)];
        let t = complement_set(&plan, Effect::Treatment(0));
        let x = ss_adjusted_with(&plan, &y, &a, &t, PivotRule::RowMajor).unwrap();
        let z = ss_adjusted_with(&plan, &y, &a, &t, PivotRule::ReverseRowMajor).unwrap();
        prop_assert!(x.value >= rat(0));
        prop_assert_eq!(x.value, z.value);
        let both = AdjustedSs::new(&plan, &a, &[Effect::Block]).unwrap();
        prop_assert_eq!(both.projection_form(&y), both.g_inverse_form(&y));
    }

    #[test]
    fn orth_through_is_symmetric(plan in arb_plan()) {
        let effects: Vec<Effect> = plan.treatments().collect();
        for &a in &effects {
            for &b in &effects {
                if a == b {
                    continue;
                }
                let ab = orth_through(&plan, a, b, &[Effect::Block]).unwrap();
                let ba = orth_through(&plan, b, a, &[Effect::Block]).unwrap();
                prop_assert_eq!(ab.pass, ba.pass);
                prop_assert_eq!(ab.residual.transpose(), ba.residual);
            }
        }
    }

    #[test]
    fn contrast_spectrum_is_basis_invariant(
        (plan, perms) in arb_plan().prop_flat_map(|p| {
            let perms: Vec<_> = p.factors().iter().map(|f| perm(f.levels)).collect();
            (Just(p), perms)
        })
    ) {
        let scale = ContrastScale::Orthonormal;
        let base = contrast_c_matrix(&plan, scale).unwrap().eigenvalues(1e-9).unwrap();
        let basis = ContrastBasis::permuted(&plan, &perms).unwrap();
        let other = contrast_c_matrix_with(&plan, &basis, scale).unwrap().eigenvalues(1e-9).unwrap();
        prop_assert_eq!(base.len(), other.len());
        for (x, y) in base.iter().zip(&other) {
            prop_assert!((x - y).abs() <= 1e-8 * x.abs().max(1.0), "{x} vs {y}");
        }
    }

    #[test]
    fn orthogonality_through_block_reduces_adjustment(plan in arb_plan()) {
        for a in plan.treatments() {
            let others = complement_set(&plan, a);
            let holds = others
                .iter()
                .filter(|&&b| b != Effect::Block && b != Effect::General)
                .all(|&b| orth_through(&plan, a, b, &[Effect::Block]).unwrap().pass);
            if holds {
                let full = c_matrix_factor(&plan, a, &others).unwrap();
                let reduced = c_matrix_factor(&plan, a, &[Effect::Block]).unwrap();
                prop_assert_eq!(full, reduced);
            }
        }
    }

    /// Translating any blocked plan of 3-level factors by a set whose first
    /// two coordinates run over every pair of field elements makes the first
    /// two factors orthogonal through blocks.
    #[test]
    fn covering_translates_give_orthogonality(
        runs in prop::collection::vec(prop::collection::vec(0u32..3, 3), 2..=5),
        tail in prop::collection::vec(0u32..3, 9),
    ) {
        let field = GaloisField::new(3).unwrap();
        let n = runs.len();
        let factors = (0..3).map(|i| Factor::new(format!("F{i}"), 3)).collect();
        let p0 = Plan::new("p0", factors, runs, Some(vec![n])).unwrap();
        let vectors = (0..9u32).map(|i| vec![i / 3, i % 3, tail[i as usize]]).collect();
        let p = translate(&p0, &field, &GeneratorSet::new(vectors)).unwrap();
        prop_assert_eq!(p.n_runs(), 9 * n);
        prop_assert_eq!(p.n_blocks(), Some(9));
        let st = orth_through(&p, Effect::Treatment(0), Effect::Treatment(1), &[Effect::Block]).unwrap();
        prop_assert!(st.pass);
    }

    #[test]
    fn orbit_replication_is_uniform(runs in prop::collection::vec(prop::collection::vec(0u32..5, 2), 1..=6)) {
        let field = GaloisField::new(5).unwrap();
        let n = runs.len() as i64;
        let factors = vec![Factor::new("A", 5), Factor::new("B", 5)];
        let p0 = Plan::new("p0", factors, runs, None).unwrap();
        let p = potb::constructions::orbit(&p0, &field).unwrap();
        for a in p.treatments() {
            prop_assert_eq!(p.replication(a).unwrap(), vec![n; 5]);
        }
    }
}
