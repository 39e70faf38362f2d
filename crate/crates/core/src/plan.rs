//! Main-effect plans: factors, runs, optional blocks, and the incidence
//! matrices derived from them.
//!
//! Runs are stored in order. When block sizes are present the runs are grouped
//! consecutively: the first `k_1` runs form block 1, the next `k_2` block 2,
//! and so on. The block factor is never stored as a column; it is
//! materialized on demand as [`Effect::Block`].

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::linalg::IntMatrix;

/// A treatment factor and its number of levels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factor {
    pub name: String,
    pub levels: u32,
}

impl Factor {
    pub fn new(name: impl Into<String>, levels: u32) -> Self {
        Self {
            name: name.into(),
            levels,
        }
    }
}

/// A column group of the full design matrix: the general mean, the block
/// pseudo-factor, or a treatment factor (by index).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Effect {
    General,
    Block,
    Treatment(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Plan {
    name: String,
    factors: Vec<Factor>,
    runs: Vec<Vec<u32>>,
    block_sizes: Option<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct PlanDoc {
    name: String,
    factors: Vec<Factor>,
    #[serde(skip_serializing_if = "Option::is_none")]
    block_sizes: Option<Vec<usize>>,
    runs: Vec<Vec<u32>>,
}

impl Plan {
    pub fn new(
        name: impl Into<String>,
        factors: Vec<Factor>,
        runs: Vec<Vec<u32>>,
        block_sizes: Option<Vec<usize>>,
    ) -> Result<Self> {
        let plan = Self {
            name: name.into(),
            factors,
            runs,
            block_sizes,
        };
        plan.validate()?;
        Ok(plan)
    }

    fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for (i, f) in self.factors.iter().enumerate() {
            if f.levels < 2 {
                return Err(schema(
                    format!("factors[{i}].levels"),
                    "a factor needs at least 2 levels",
                ));
            }
            if !seen.insert(f.name.as_str()) {
                return Err(schema(
                    format!("factors[{i}].name"),
                    format!("duplicate name `{}`", f.name),
                ));
            }
        }
        let m = self.factors.len();
        for (u, run) in self.runs.iter().enumerate() {
            if run.len() != m {
                return Err(schema(
                    format!("runs[{u}]"),
                    format!("expected {m} entries, found {}", run.len()),
                ));
            }
            for (&level, f) in run.iter().zip(&self.factors) {
                if level >= f.levels {
                    return Err(Error::LevelOutOfRange {
                        run: u,
                        factor: f.name.clone(),
                        level,
                        levels: f.levels,
                    });
                }
            }
        }
        if let Some(sizes) = &self.block_sizes {
            if sizes.is_empty() {
                return Err(schema("block_sizes", "at least one block is required"));
            }
            if let Some(j) = sizes.iter().position(|&k| k == 0) {
                return Err(schema(format!("block_sizes[{j}]"), "block sizes must be positive"));
            }
            let sum: usize = sizes.iter().sum();
            if sum != self.runs.len() {
                return Err(Error::BlockSizeMismatch {
                    sum,
                    runs: self.runs.len(),
                });
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn runs(&self) -> &[Vec<u32>] {
        &self.runs
    }

    pub fn block_sizes(&self) -> Option<&[usize]> {
        self.block_sizes.as_deref()
    }

    pub fn n_runs(&self) -> usize {
        self.runs.len()
    }

    pub fn n_factors(&self) -> usize {
        self.factors.len()
    }

    pub fn is_blocked(&self) -> bool {
        self.block_sizes.is_some()
    }

    pub fn n_blocks(&self) -> Option<usize> {
        self.block_sizes.as_ref().map(Vec::len)
    }

    /// Runs grouped by block; a single group when unblocked.
    pub fn blocks(&self) -> Vec<&[Vec<u32>]> {
        match &self.block_sizes {
            None => vec![&self.runs[..]],
            Some(sizes) => {
                let mut start = 0;
                sizes
                    .iter()
                    .map(|&k| {
                        let b = &self.runs[start..start + k];
                        start += k;
                        b
                    })
                    .collect()
            }
        }
    }

    pub fn treatments(&self) -> impl Iterator<Item = Effect> {
        (0..self.factors.len()).map(Effect::Treatment)
    }

    pub fn factor_index(&self, name: &str) -> Result<usize> {
        self.factors
            .iter()
            .position(|f| f.name == name)
            .ok_or_else(|| Error::UnknownFactor(name.to_string()))
    }

    /// Resolves a factor name, or one of the keywords `block` / `G` / `mean`.
    /// Treatment names take precedence over keywords.
    pub fn effect_by_name(&self, name: &str) -> Result<Effect> {
        if let Ok(i) = self.factor_index(name) {
            return Ok(Effect::Treatment(i));
        }
        match name {
            "block" | "Block" => {
                if self.is_blocked() {
                    Ok(Effect::Block)
                } else {
                    Err(Error::NoBlocks)
                }
            }
            "G" | "mean" => Ok(Effect::General),
            _ => Err(Error::UnknownFactor(name.to_string())),
        }
    }

    pub fn effect_name(&self, e: Effect) -> String {
        match e {
            Effect::General => "G".to_string(),
            Effect::Block => "block".to_string(),
            Effect::Treatment(i) => self.factors[i].name.clone(),
        }
    }

    fn check_effect(&self, e: Effect) -> Result<()> {
        match e {
            Effect::General => Ok(()),
            Effect::Block if self.is_blocked() => Ok(()),
            Effect::Block => Err(Error::NoBlocks),
            Effect::Treatment(i) if i < self.factors.len() => Ok(()),
            Effect::Treatment(i) => Err(Error::UnknownFactor(format!("#{i}"))),
        }
    }

    /// Number of columns the effect contributes to the design matrix.
    pub fn level_count(&self, e: Effect) -> Result<usize> {
        self.check_effect(e)?;
        Ok(match e {
            Effect::General => 1,
            Effect::Block => self.block_sizes.as_ref().map_or(0, Vec::len),
            Effect::Treatment(i) => self.factors[i].levels as usize,
        })
    }

    /// Level index of `e` in every run.
    pub fn levels_of(&self, e: Effect) -> Result<Vec<usize>> {
        self.check_effect(e)?;
        Ok(match e {
            Effect::General => vec![0; self.runs.len()],
            Effect::Block => self
                .block_sizes
                .as_ref()
                .map(|sizes| {
                    sizes
                        .iter()
                        .enumerate()
                        .flat_map(|(j, &k)| std::iter::repeat_n(j, k))
                        .collect()
                })
                .unwrap_or_default(),
            Effect::Treatment(i) => self.runs.iter().map(|r| r[i] as usize).collect(),
        })
    }

    /// The n x s_A 0/1 design matrix `X_A`.
    pub fn design_matrix(&self, e: Effect) -> Result<IntMatrix> {
        let s = self.level_count(e)?;
        let lv = self.levels_of(e)?;
        Ok(IntMatrix::from_fn(lv.len(), s, |u, t| i64::from(lv[u] == t)))
    }

    /// `X_T = [X_A : A in T]`.
    pub fn design_matrix_set(&self, set: &[Effect]) -> Result<IntMatrix> {
        let mut out = IntMatrix::zeros(self.n_runs(), 0);
        for &e in set {
            out = out.hcat(&self.design_matrix(e)?);
        }
        Ok(out)
    }

    /// `N_AB`: number of runs with `a` at level p and `b` at level q.
    pub fn incidence(&self, a: Effect, b: Effect) -> Result<IntMatrix> {
        let (sa, sb) = (self.level_count(a)?, self.level_count(b)?);
        let (la, lb) = (self.levels_of(a)?, self.levels_of(b)?);
        let mut n = IntMatrix::zeros(sa, sb);
        for (&p, &q) in la.iter().zip(&lb) {
            n[(p, q)] += 1;
        }
        Ok(n)
    }

    /// `N_AT = X_A' X_T`.
    pub fn incidence_set(&self, a: Effect, set: &[Effect]) -> Result<IntMatrix> {
        let mut out = IntMatrix::zeros(self.level_count(a)?, 0);
        for &e in set {
            out = out.hcat(&self.incidence(a, e)?);
        }
        Ok(out)
    }

    /// `X_T' X_T`, assembled from incidence blocks.
    pub fn gram_set(&self, set: &[Effect]) -> Result<IntMatrix> {
        let mut rows: Vec<IntMatrix> = Vec::new();
        for &a in set {
            rows.push(self.incidence_set(a, set)?);
        }
        let total: usize = rows.iter().map(IntMatrix::rows).sum();
        let cols = rows.first().map_or(0, IntMatrix::cols);
        let mut data = Vec::with_capacity(total * cols);
        for r in &rows {
            data.extend(r.iter().copied());
        }
        Ok(IntMatrix::from_vec(total, cols, data))
    }

    /// Replication vector `r_A`.
    pub fn replication(&self, e: Effect) -> Result<Vec<i64>> {
        let s = self.level_count(e)?;
        let mut r = vec![0i64; s];
        for p in self.levels_of(e)? {
            r[p] += 1;
        }
        Ok(r)
    }

    /// `L_A`, the s_A x b factor-versus-block incidence.
    pub fn block_incidence(&self, a: Effect) -> Result<IntMatrix> {
        if !self.is_blocked() {
            return Err(Error::NoBlocks);
        }
        self.incidence(a, Effect::Block)
    }

    /// `D_k = diag(k_1, ..., k_b)`.
    pub fn block_diag(&self) -> Result<IntMatrix> {
        let sizes = self.block_sizes.as_ref().ok_or(Error::NoBlocks)?;
        let d: Vec<i64> = sizes.iter().map(|&k| k as i64).collect();
        Ok(IntMatrix::diag(&d))
    }

    /// The same runs with the block structure removed.
    pub fn without_blocks(&self) -> Plan {
        Plan {
            block_sizes: None,
            ..self.clone()
        }
    }

    /// The same runs laid out in a single block.
    pub fn merged_blocks(&self) -> Plan {
        Plan {
            block_sizes: Some(vec![self.runs.len()]),
            ..self.clone()
        }
    }

    /// Drops the treatment factor at `index`.
    pub fn drop_factor(&self, index: usize) -> Result<Plan> {
        if index >= self.factors.len() {
            return Err(Error::UnknownFactor(format!("#{index}")));
        }
        let mut factors = self.factors.clone();
        factors.remove(index);
        let runs = self
            .runs
            .iter()
            .map(|r| {
                let mut r = r.clone();
                r.remove(index);
                r
            })
            .collect();
        Plan::new(self.name.clone(), factors, runs, self.block_sizes.clone())
    }

    pub fn to_json(&self) -> String {
        let doc = PlanDoc {
            name: self.name.clone(),
            factors: self.factors.clone(),
            block_sizes: self.block_sizes.clone(),
            runs: self.runs.clone(),
        };
        serde_json::to_string_pretty(&doc).expect("plan serializes")
    }

    /// Parses a plan document, reporting the offending field path on error.
    pub fn from_json(text: &str) -> Result<Plan> {
        let v: Value = serde_json::from_str(text).map_err(|e| schema("$", e.to_string()))?;
        let obj = v.as_object().ok_or_else(|| schema("$", "expected an object"))?;
        for key in obj.keys() {
            if !matches!(key.as_str(), "name" | "factors" | "block_sizes" | "runs") {
                return Err(schema(key.clone(), "unknown field"));
            }
        }
        let name = obj
            .get("name")
            .and_then(Value::as_str)
            .ok_or_else(|| schema("name", "expected a string"))?;
        let factors_v = obj
            .get("factors")
            .and_then(Value::as_array)
            .ok_or_else(|| schema("factors", "expected an array"))?;
        let mut factors = Vec::with_capacity(factors_v.len());
        for (i, f) in factors_v.iter().enumerate() {
            let fname = f
                .get("name")
                .and_then(Value::as_str)
                .ok_or_else(|| schema(format!("factors[{i}].name"), "expected a string"))?;
            let levels = f
                .get("levels")
                .and_then(Value::as_u64)
                .and_then(|x| u32::try_from(x).ok())
                .ok_or_else(|| schema(format!("factors[{i}].levels"), "expected a non-negative integer"))?;
            factors.push(Factor::new(fname, levels));
        }
        let block_sizes = match obj.get("block_sizes") {
            None | Some(Value::Null) => None,
            Some(Value::Array(a)) => Some(
                a.iter()
                    .enumerate()
                    .map(|(j, k)| {
                        k.as_u64()
                            .map(|k| k as usize)
                            .ok_or_else(|| schema(format!("block_sizes[{j}]"), "expected a non-negative integer"))
                    })
                    .collect::<Result<Vec<_>>>()?,
            ),
            Some(_) => return Err(schema("block_sizes", "expected an array")),
        };
        let runs_v = obj
            .get("runs")
            .and_then(Value::as_array)
            .ok_or_else(|| schema("runs", "expected an array"))?;
        let mut runs = Vec::with_capacity(runs_v.len());
        for (u, r) in runs_v.iter().enumerate() {
            let arr = r
                .as_array()
                .ok_or_else(|| schema(format!("runs[{u}]"), "expected an array"))?;
            let run = arr
                .iter()
                .enumerate()
                .map(|(a, x)| {
                    x.as_u64()
                        .and_then(|x| u32::try_from(x).ok())
                        .ok_or_else(|| schema(format!("runs[{u}][{a}]"), "expected a non-negative integer"))
                })
                .collect::<Result<Vec<_>>>()?;
            runs.push(run);
        }
        Plan::new(name, factors, runs, block_sizes)
    }

    /// Header of factor names, then one run per line; with `with_block` a
    /// leading 0-based block index.
    pub fn to_csv(&self, with_block: bool) -> String {
        let blocks = self.levels_of(Effect::Block).unwrap_or_default();
        let mut header: Vec<&str> = Vec::new();
        if with_block && self.is_blocked() {
            header.push("block");
        }
        header.extend(self.factors.iter().map(|f| f.name.as_str()));
        let mut out = header.join(",");
        out.push('\n');
        for (u, run) in self.runs.iter().enumerate() {
            let mut cells: Vec<String> = Vec::with_capacity(run.len() + 1);
            if with_block && self.is_blocked() {
                cells.push(blocks[u].to_string());
            }
            cells.extend(run.iter().map(ToString::to_string));
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

impl fmt::Display for Plan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let levels: Vec<String> = self.factors.iter().map(|x| x.levels.to_string()).collect();
        write!(
            f,
            "{}: {} runs, {} factors (levels {})",
            self.name,
            self.n_runs(),
            self.n_factors(),
            levels.join(",")
        )?;
        if let Some(sizes) = &self.block_sizes {
            write!(f, ", {} blocks", sizes.len())?;
        }
        Ok(())
    }
}

fn schema(path: impl Into<String>, message: impl Into<String>) -> Error {
    Error::SchemaViolation {
        path: path.into(),
        message: message.into(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> Plan {
        Plan::new(
            "tiny",
            vec![Factor::new("A", 3), Factor::new("B", 2)],
            vec![vec![0, 1], vec![2, 0], vec![2, 1], vec![1, 1]],
            Some(vec![3, 1]),
        )
        .unwrap()
    }

    #[test]
    fn design_matrix_single_run() {
        let p = Plan::new("one", vec![Factor::new("A", 3)], vec![vec![2]], None).unwrap();
        let x = p.design_matrix(Effect::Treatment(0)).unwrap();
        assert_eq!(x.to_rows(), vec![vec![0, 0, 1]]);
        assert_eq!(p.design_matrix(Effect::General).unwrap().to_rows(), vec![vec![1]]);
    }

    #[test]
    fn incidence_basics() {
        let p = tiny();
        let a = Effect::Treatment(0);
        let b = Effect::Treatment(1);
        assert_eq!(p.incidence(a, a).unwrap(), IntMatrix::diag(&[1, 1, 2]));
        let nab = p.incidence(a, b).unwrap();
        let x = p.design_matrix(a).unwrap();
        let y = p.design_matrix(b).unwrap();
        assert_eq!(nab, x.transpose().mul(&y));
        assert_eq!(
            p.incidence(a, Effect::General).unwrap().to_rows(),
            vec![vec![1], vec![1], vec![2]]
        );
        assert_eq!(p.block_diag().unwrap(), IntMatrix::diag(&[3, 1]));
        let l = p.block_incidence(a).unwrap();
        assert_eq!(l.col_sums(), vec![3, 1]);
        assert_eq!(l.row_sums(), p.replication(a).unwrap());
    }

    #[test]
    fn single_block_incidence_is_replication() {
        let p = tiny().merged_blocks();
        let l = p.block_incidence(Effect::Treatment(0)).unwrap();
        assert_eq!(l.to_rows(), vec![vec![1], vec![1], vec![2]]);
    }

    #[test]
    fn no_blocks_errors() {
        let p = tiny().without_blocks();
        assert_eq!(p.block_diag(), Err(Error::NoBlocks));
        assert_eq!(p.block_incidence(Effect::Treatment(0)), Err(Error::NoBlocks));
        assert_eq!(p.incidence(Effect::Treatment(0), Effect::Block), Err(Error::NoBlocks));
        assert_eq!(p.effect_by_name("block"), Err(Error::NoBlocks));
        assert_eq!(p.effect_by_name("Z"), Err(Error::UnknownFactor("Z".into())));
    }

    #[test]
    fn parse_errors_name_the_field() {
        let bad_level = r#"{"name":"x","factors":[{"name":"A","levels":3}],"runs":[[0],[3]]}"#;
        assert!(matches!(
            Plan::from_json(bad_level),
            Err(Error::LevelOutOfRange { run: 1, level: 3, .. })
        ));
        let bad_blocks = r#"{"name":"x","factors":[{"name":"A","levels":3}],"block_sizes":[1,1],"runs":[[0]]}"#;
        assert_eq!(
            Plan::from_json(bad_blocks),
            Err(Error::BlockSizeMismatch { sum: 2, runs: 1 })
        );
        let bad_type = r#"{"name":"x","factors":[{"name":"A","levels":"3"}],"runs":[]}"#;
        match Plan::from_json(bad_type) {
            Err(Error::SchemaViolation { path, .. }) => assert_eq!(path, "factors[0].levels"),
            other => panic!("unexpected {other:?}"),
        }
        let ragged = r#"{"name":"x","factors":[{"name":"A","levels":3}],"runs":[[0,1]]}"#;
        match Plan::from_json(ragged) {
            Err(Error::SchemaViolation { path, .. }) => assert_eq!(path, "runs[0]"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn csv_with_block_column() {
        assert_eq!(tiny().to_csv(true), "block,A,B\n0,0,1\n0,2,0\n0,2,1\n1,1,1\n");
        assert_eq!(tiny().to_csv(false), "A,B\n0,1\n2,0\n2,1\n1,1\n");
    }
}
