//! Structural sufficient conditions for universal optimality, E- and
//! A-values of the contrast information matrix, and BIBD parameter checks.
//!
//! Per factor `A` of a blocked plan:
//! - (i) every level of `A` appears `t_j` or `t_j + 1` times in block `j`,
//!   `t_j = floor(k_j / s_A)`;
//! - (ii) `A` is orthogonal through the blocks to every other factor;
//! - (iii) the information matrix `C_A` is exactly `aI + bJ`.
//!
//! Globally, (b) asks for the contrast matrix to be exactly `aI`.

use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::linalg::{IntMatrix, DEFAULT_TOL};
use crate::orthogonality::{contrast_c_matrix, information_matrix, is_connected, orth_through, ContrastScale};
use crate::plan::{Effect, Plan};

#[derive(Debug, Clone, PartialEq)]
pub struct FactorLedger {
    pub factor: String,
    /// `t_j` per block.
    pub floors: Vec<i64>,
    /// `L_A`: level-by-block counts.
    pub counts: IntMatrix,
    pub near_balanced: bool,
    pub block_orthogonal: bool,
    /// `(a, b)` with `C_A = aI + bJ`, when that form holds.
    pub completely_symmetric: Option<(BigRational, BigRational)>,
    pub connected: bool,
}

impl FactorLedger {
    /// (i), (ii) and (iii) together.
    pub fn pass(&self) -> bool {
        self.near_balanced && self.block_orthogonal && self.completely_symmetric.is_some()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GlobalLedger {
    pub scale: ContrastScale,
    /// `a` with `C~ = aI`, when that form holds.
    pub scalar: Option<BigRational>,
}

impl GlobalLedger {
    pub fn pass(&self) -> bool {
        self.scalar.is_some()
    }
}

/// Smallest and second-smallest eigenvalues of the contrast matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EValue {
    pub mu0: f64,
    pub mu1: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimalityLedger {
    pub factors: Vec<FactorLedger>,
    pub global: GlobalLedger,
    pub e_value: Option<EValue>,
    pub a_value: Option<f64>,
}

/// Whether every level count in block `j` is `t_j` or `t_j + 1`.
fn near_balance(plan: &Plan, a: Effect) -> Result<(Vec<i64>, IntMatrix, bool)> {
    let counts = plan.block_incidence(a)?;
    let s = plan.level_count(a)? as i64;
    let floors: Vec<i64> = plan
        .block_sizes()
        .ok_or(Error::NoBlocks)?
        .iter()
        .map(|&k| k as i64 / s)
        .collect();
    let ok = (0..counts.cols())
        .all(|j| (0..counts.rows()).all(|p| counts[(p, j)] - floors[j] <= 1 && counts[(p, j)] >= floors[j]));
    Ok((floors, counts, ok))
}

pub fn check_universal_factor(plan: &Plan, a: Effect) -> Result<FactorLedger> {
    if !plan.is_blocked() {
        return Err(Error::NoBlocks);
    }
    let (floors, counts, near_balanced) = near_balance(plan, a)?;
    let mut block_orthogonal = true;
    for b in plan.treatments().filter(|&b| b != a) {
        block_orthogonal &= orth_through(plan, a, b, &[Effect::Block])?.pass;
    }
    Ok(FactorLedger {
        factor: plan.effect_name(a),
        floors,
        counts,
        near_balanced,
        block_orthogonal,
        completely_symmetric: information_matrix(plan, a)?.as_aibj(),
        connected: is_connected(plan, a)?,
    })
}

pub fn check_universal_global(plan: &Plan, scale: ContrastScale) -> Result<GlobalLedger> {
    if !plan.is_blocked() {
        return Err(Error::NoBlocks);
    }
    Ok(GlobalLedger {
        scale,
        scalar: contrast_c_matrix(plan, scale)?.as_scalar_identity(),
    })
}

/// `mu_0` and `mu_1` of the contrast matrix in ascending order. `None` when
/// the matrix has fewer than two rows.
pub fn e_value(plan: &Plan, scale: ContrastScale) -> Result<Option<EValue>> {
    let ev = contrast_c_matrix(plan, scale)?.eigenvalues(DEFAULT_TOL)?;
    Ok((ev.len() >= 2).then(|| EValue { mu0: ev[0], mu1: ev[1] }))
}

/// Sum of reciprocal eigenvalues of the contrast matrix; `None` when it is
/// singular.
pub fn a_value(plan: &Plan, scale: ContrastScale) -> Result<Option<f64>> {
    let c = contrast_c_matrix(plan, scale)?;
    let ev = c.eigenvalues(DEFAULT_TOL)?;
    let scale_ref = ev.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    if ev.iter().any(|&x| x <= DEFAULT_TOL * scale_ref) {
        return Ok(None);
    }
    Ok(Some(ev.iter().map(|x| 1.0 / x).sum()))
}

pub fn optimality_ledger(plan: &Plan, scale: ContrastScale) -> Result<OptimalityLedger> {
    let factors = plan
        .treatments()
        .map(|a| check_universal_factor(plan, a))
        .collect::<Result<_>>()?;
    Ok(OptimalityLedger {
        factors,
        global: check_universal_global(plan, scale)?,
        e_value: e_value(plan, scale)?,
        a_value: a_value(plan, scale)?,
    })
}

/// Parameters of a balanced incomplete block design.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BibdParams {
    pub v: usize,
    pub b: usize,
    pub r: i64,
    pub k: i64,
    pub lambda: i64,
}

/// Checks a `v x b` incidence matrix: row sums `r`, column sums `k`,
/// `L L' = (r - lambda) I + lambda J`, `vr = bk` and
/// `lambda (v - 1) = r (k - 1)`.
pub fn bibd_check(l: &IntMatrix, p: BibdParams) -> Result<bool> {
    if l.shape() != (p.v, p.b) {
        return Err(Error::ShapeMismatch(format!(
            "incidence is {}x{}, parameters say {}x{}",
            l.rows(),
            l.cols(),
            p.v,
            p.b
        )));
    }
    let counting = p.v as i64 * p.r == p.b as i64 * p.k && p.lambda * (p.v as i64 - 1) == p.r * (p.k - 1);
    let sums = l.row_sums().iter().all(|&x| x == p.r) && l.col_sums().iter().all(|&x| x == p.k);
    let gram = l.mul(&l.transpose());
    let concurrence = (0..p.v).all(|i| (0..p.v).all(|j| gram[(i, j)] == if i == j { p.r } else { p.lambda }));
    Ok(counting && sums && concurrence)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plan::Factor;

    #[test]
    fn complete_design_is_a_bibd() {
        let l = IntMatrix::ones(3, 3);
        let p = BibdParams {
            v: 3,
            b: 3,
            r: 3,
            k: 3,
            lambda: 3,
        };
        assert!(bibd_check(&l, p).unwrap());
        assert!(matches!(
            bibd_check(&IntMatrix::ones(3, 2), p),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn fano_plane() {
        let lines = [
            [0, 1, 3],
            [1, 2, 4],
            [2, 3, 5],
            [3, 4, 6],
            [4, 5, 0],
            [5, 6, 1],
            [6, 0, 2],
        ];
        let l = IntMatrix::from_fn(7, 7, |p, j| i64::from(lines[j].contains(&p)));
        let p = BibdParams {
            v: 7,
            b: 7,
            r: 3,
            k: 3,
            lambda: 1,
        };
        assert!(bibd_check(&l, p).unwrap());
        assert!(!bibd_check(&l, BibdParams { lambda: 2, ..p }).unwrap());
    }

    #[test]
    fn unblocked_plans_rejected() {
        let p = Plan::new("u", vec![Factor::new("A", 2)], vec![vec![0], vec![1]], None).unwrap();
        assert!(matches!(
            check_universal_factor(&p, Effect::Treatment(0)),
            Err(Error::NoBlocks)
        ));
        assert!(matches!(
            check_universal_global(&p, ContrastScale::Orthonormal),
            Err(Error::NoBlocks)
        ));
    }
}
