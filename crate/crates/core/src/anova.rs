//! Simulation from the main-effects model and exact adjusted sums of
//! squares.
//!
//! `SS_{U;T}` is computed two ways for every response: as `Y' P_Z Y` with
//! `Z = (I - P_T) X_U`, and as `Q' C^- Q` with `Q = X_U'(I - P_T) Y` and
//! `C = X_U'(I - P_T) X_U`. The two must agree exactly.

use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{column, g_inverse_with, projector_with, quadratic_form, rat, PivotRule, RationalMatrix};
use crate::orthogonality::{complement_set, orth_through};
use crate::plan::{Effect, Plan};

/// Effects and noise for `Y = sum_A X_A alpha_A + X_B beta + sigma z`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub mean: f64,
    /// One vector per treatment factor, of length equal to its level count.
    pub effects: Vec<Vec<f64>>,
    pub block_effects: Option<Vec<f64>>,
    pub sigma: f64,
    pub seed: u64,
}

impl ModelSpec {
    /// All effects zero.
    pub fn null(plan: &Plan, sigma: f64, seed: u64) -> Self {
        Self {
            mean: 0.0,
            effects: plan.factors().iter().map(|f| vec![0.0; f.levels as usize]).collect(),
            block_effects: plan.n_blocks().map(|b| vec![0.0; b]),
            sigma,
            seed,
        }
    }
}

/// Draws a response vector. `sigma = 0` returns the mean response without
/// touching the random stream.
pub fn simulate(plan: &Plan, model: &ModelSpec) -> Result<Vec<f64>> {
    if model.effects.len() != plan.n_factors() {
        return Err(Error::LengthMismatch(format!(
            "{} effect vectors for {} factors",
            model.effects.len(),
            plan.n_factors()
        )));
    }
    for (f, e) in plan.factors().iter().zip(&model.effects) {
        if e.len() != f.levels as usize {
            return Err(Error::LengthMismatch(format!(
                "factor `{}` has {} levels but {} effects",
                f.name,
                f.levels,
                e.len()
            )));
        }
    }
    let block_of = match (&model.block_effects, plan.n_blocks()) {
        (Some(be), Some(b)) if be.len() == b => Some(plan.levels_of(Effect::Block)?),
        (Some(be), nb) => {
            return Err(Error::LengthMismatch(format!(
                "{} block effects for {} blocks",
                be.len(),
                nb.unwrap_or(0)
            )))
        }
        (None, _) => None,
    };
    if model.sigma < 0.0 || !model.sigma.is_finite() {
        return Err(Error::InvalidParameter("sigma must be finite and non-negative".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(model.seed);
    let mut y = Vec::with_capacity(plan.n_runs());
    for (u, run) in plan.runs().iter().enumerate() {
        let mut v = model.mean;
        for (a, &level) in run.iter().enumerate() {
            v += model.effects[a][level as usize];
        }
        if let (Some(be), Some(blocks)) = (&model.block_effects, &block_of) {
            v += be[blocks[u]];
        }
        if model.sigma > 0.0 {
            let z: f64 = rng.sample(StandardNormal);
            v += model.sigma * z;
        }
        y.push(v);
    }
    Ok(y)
}

/// An adjusted sum of squares with its labels.
#[derive(Debug, Clone, PartialEq)]
pub struct SsResult {
    pub target: Vec<String>,
    pub adjust_for: Vec<String>,
    pub value: BigRational,
}

/// Precomputed matrices for `SS_{U;T}` over many responses.
pub struct AdjustedSs {
    target: Vec<String>,
    adjust_for: Vec<String>,
    projector: RationalMatrix,
    /// `X_U' (I - P_T)`
    contrast_rows: RationalMatrix,
    c_inverse: RationalMatrix,
}

impl AdjustedSs {
    pub fn new(plan: &Plan, target: &[Effect], adjust_for: &[Effect]) -> Result<Self> {
        Self::with_rule(plan, target, adjust_for, PivotRule::RowMajor)
    }

    pub fn with_rule(plan: &Plan, target: &[Effect], adjust_for: &[Effect], rule: PivotRule) -> Result<Self> {
        if let Some(&e) = target.iter().find(|e| adjust_for.contains(e)) {
            return Err(Error::OverlappingSets(format!(
                "`{}` is both target and adjusting factor",
                plan.effect_name(e)
            )));
        }
        let xu = plan.design_matrix_set(target)?.to_rational();
        let xt = plan.design_matrix_set(adjust_for)?.to_rational();
        let resid = projector_with(&xt, rule).complement();
        let z = resid.mul(&xu);
        let contrast_rows = z.transpose();
        let c = contrast_rows.mul(&xu);
        Ok(Self {
            target: target.iter().map(|&e| plan.effect_name(e)).collect(),
            adjust_for: adjust_for.iter().map(|&e| plan.effect_name(e)).collect(),
            projector: projector_with(&z, rule).into_matrix(),
            contrast_rows,
            c_inverse: g_inverse_with(&c, rule),
        })
    }

    /// `Y' P_Z Y`.
    pub fn projection_form(&self, y: &[BigRational]) -> BigRational {
        quadratic_form(&self.projector, y)
    }

    /// `Q' C^- Q`.
    pub fn g_inverse_form(&self, y: &[BigRational]) -> BigRational {
        let q = self.contrast_rows.mul(&column(y));
        let q: Vec<BigRational> = (0..q.rows()).map(|i| q[(i, 0)].clone()).collect();
        quadratic_form(&self.c_inverse, &q)
    }

    /// Both forms, which must coincide.
    pub fn evaluate(&self, y: &[BigRational]) -> Result<SsResult> {
        if y.len() != self.projector.rows() {
            return Err(Error::LengthMismatch(format!(
                "response of length {} for {} runs",
                y.len(),
                self.projector.rows()
            )));
        }
        let p = self.projection_form(y);
        let g = self.g_inverse_form(y);
        if p != g {
            return Err(Error::IdentityViolation(format!(
                "projection form {p} differs from g-inverse form {g}"
            )));
        }
        Ok(SsResult {
            target: self.target.clone(),
            adjust_for: self.adjust_for.clone(),
            value: p,
        })
    }
}

/// `SS_{U;T}` for a single rational response.
pub fn ss_adjusted(plan: &Plan, y: &[BigRational], target: &[Effect], adjust_for: &[Effect]) -> Result<SsResult> {
    AdjustedSs::new(plan, target, adjust_for)?.evaluate(y)
}

pub fn ss_adjusted_with(
    plan: &Plan,
    y: &[BigRational],
    target: &[Effect],
    adjust_for: &[Effect],
    rule: PivotRule,
) -> Result<SsResult> {
    AdjustedSs::with_rule(plan, target, adjust_for, rule)?.evaluate(y)
}

/// A reproducible integer response with entries in `-9..=9`. Trial `i` uses
/// stream `i` of a ChaCha8 generator keyed by `seed`.
pub fn random_response(n: usize, seed: u64, trial: u64) -> Vec<i64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    (0..n).map(|_| rng.random_range(-9..=9)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub full: BigRational,
    pub reduced: BigRational,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceReport {
    pub factor: String,
    pub through: Vec<String>,
    /// `A` orthogonal through `T` to every effect outside `T + {A}`.
    pub condition: bool,
    pub outcomes: Vec<TrialOutcome>,
    /// First response on which the two sums of squares differ.
    pub witness: Option<Vec<i64>>,
}

impl EquivalenceReport {
    pub fn equal_trials(&self) -> usize {
        self.outcomes.iter().filter(|o| o.full == o.reduced).count()
    }

    /// Condition holds and every trial agrees, or it fails and a witness was
    /// found.
    pub fn consistent(&self) -> bool {
        if self.condition {
            self.equal_trials() == self.outcomes.len()
        } else {
            self.witness.is_some()
        }
    }
}

/// Compares `SS_{A; all others}` with `SS_{A;T}` on random integer responses
/// alongside the algebraic orthogonality condition.
pub fn estssq_equivalence(
    plan: &Plan,
    a: Effect,
    through: &[Effect],
    trials: u64,
    seed: u64,
) -> Result<EquivalenceReport> {
    if through.contains(&a) {
        return Err(Error::OverlappingSets(format!(
            "`{}` is in the adjusting set",
            plan.effect_name(a)
        )));
    }
    let others = complement_set(plan, a);
    let mut condition = true;
    for &b in others.iter().filter(|b| !through.contains(b)) {
        condition &= orth_through(plan, a, b, through)?.pass;
    }
    let full = AdjustedSs::new(plan, &[a], &others)?;
    let reduced = AdjustedSs::new(plan, &[a], through)?;
    let mut outcomes = Vec::with_capacity(trials as usize);
    let mut witness = None;
    for trial in 0..trials {
        let raw = random_response(plan.n_runs(), seed, trial);
        let y: Vec<BigRational> = raw.iter().map(|&v| rat(v)).collect();
        let o = TrialOutcome {
            full: full.evaluate(&y)?.value,
            reduced: reduced.evaluate(&y)?.value,
        };
        if witness.is_none() && o.full != o.reduced {
            witness = Some(raw);
        }
        outcomes.push(o);
    }
    Ok(EquivalenceReport {
        factor: plan.effect_name(a),
        through: through.iter().map(|&e| plan.effect_name(e)).collect(),
        condition,
        outcomes,
        witness,
    })
}
