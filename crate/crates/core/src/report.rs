//! Machine-readable verification reports.
//!
//! Rational quantities are written as canonical strings (`"8/5"`), floats
//! are rounded to twelve decimals so that output is stable across runs.

use serde::Serialize;

use crate::error::Result;
use crate::linalg::{RationalMatrix, DEFAULT_TOL};
use crate::optimality::{FactorLedger, OptimalityLedger};
use crate::orthogonality::{contrast_c_matrix, ContrastCMatrix, ContrastScale, OrthReport, PairStatus};
use crate::plan::Plan;

pub fn round12(x: f64) -> f64 {
    let r = (x * 1e12).round() / 1e12;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

fn strings(m: &RationalMatrix) -> Vec<Vec<String>> {
    m.to_strings()
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct PairJson {
    pub a: String,
    pub b: String,
    pub through: Vec<String>,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pfc: Option<bool>,
    /// Present only for failing pairs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<Vec<Vec<String>>>,
}

impl From<&PairStatus> for PairJson {
    fn from(p: &PairStatus) -> Self {
        Self {
            a: p.a.clone(),
            b: p.b.clone(),
            through: p.through.clone(),
            pass: p.pass,
            pfc: p.pfc,
            residual: (!p.pass).then(|| strings(&p.residual)),
        }
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct CMatrixJson {
    pub scale: String,
    pub entries: Vec<Vec<String>>,
    pub eigenvalues: Vec<f64>,
    /// `a` when the matrix is exactly `aI`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scalar: Option<String>,
}

impl CMatrixJson {
    pub fn from_matrix(c: &ContrastCMatrix) -> Result<Self> {
        Ok(Self {
            scale: c.scale().label().to_string(),
            entries: c.entry_strings(),
            eigenvalues: c.eigenvalues(DEFAULT_TOL)?.into_iter().map(round12).collect(),
            scalar: c.as_scalar_identity().map(|a| a.to_string()),
        })
    }

    pub fn for_plan(plan: &Plan, scale: ContrastScale) -> Result<Self> {
        Self::from_matrix(&contrast_c_matrix(plan, scale)?)
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct FactorLedgerJson {
    pub factor: String,
    pub near_balanced: bool,
    pub floors: Vec<i64>,
    pub block_orthogonal: bool,
    pub completely_symmetric: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fitted: Option<[String; 2]>,
    pub connected: bool,
}

impl From<&FactorLedger> for FactorLedgerJson {
    fn from(l: &FactorLedger) -> Self {
        Self {
            factor: l.factor.clone(),
            near_balanced: l.near_balanced,
            floors: l.floors.clone(),
            block_orthogonal: l.block_orthogonal,
            completely_symmetric: l.completely_symmetric.is_some(),
            fitted: l
                .completely_symmetric
                .as_ref()
                .map(|(a, b)| [a.to_string(), b.to_string()]),
            connected: l.connected,
        }
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct OptimalityJson {
    pub factors: Vec<FactorLedgerJson>,
    pub global_scale: String,
    pub global_scalar_form: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub global_scalar: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a_value: Option<f64>,
    /// Near balance in every factor together with the scalar global form,
    /// or all three per-factor conditions in every factor.
    pub sufficient_conditions: bool,
}

impl From<&OptimalityLedger> for OptimalityJson {
    fn from(l: &OptimalityLedger) -> Self {
        let all_near = l.factors.iter().all(|f| f.near_balanced);
        let all_factor = l.factors.iter().all(FactorLedger::pass);
        Self {
            factors: l.factors.iter().map(FactorLedgerJson::from).collect(),
            global_scale: l.global.scale.label().to_string(),
            global_scalar_form: l.global.pass(),
            global_scalar: l.global.scalar.as_ref().map(ToString::to_string),
            mu0: l.e_value.map(|e| round12(e.mu0)),
            mu1: l.e_value.map(|e| round12(e.mu1)),
            a_value: l.a_value.map(round12),
            sufficient_conditions: (all_near && l.global.pass()) || all_factor,
        }
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct VerificationReport {
    pub plan: String,
    pub check: String,
    pub claim: String,
    pub pass: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub pairs: Vec<PairJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_matrix: Option<CMatrixJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub optimality: Option<OptimalityJson>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl VerificationReport {
    pub fn new(plan: &Plan, check: impl Into<String>, claim: impl Into<String>) -> Self {
        Self {
            plan: plan.name().to_string(),
            check: check.into(),
            claim: claim.into(),
            pass: true,
            pairs: Vec::new(),
            c_matrix: None,
            optimality: None,
            notes: Vec::new(),
        }
    }

    /// Adds the pairs and takes the report's overall status from them.
    pub fn with_pairs(mut self, rep: &OrthReport) -> Self {
        self.pairs = rep.pairs.iter().map(PairJson::from).collect();
        self.pass &= rep.pass();
        self.notes
            .push(format!("{}/{} pairs pass", rep.passed(), rep.pairs.len()));
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_is_stable() {
        assert_eq!(round12(7.999_999_999_999_998), 8.0);
        assert_eq!(round12(-1e-15), 0.0);
        assert_eq!(round12(12.8), 12.8);
    }
}
