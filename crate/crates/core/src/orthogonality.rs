//! Orthogonality through a factor set, the proportional frequency condition,
//! the block-adjusted (POTB) condition, and contrast information matrices.
//!
//! Factors `A` and `B` are orthogonal through `T` when
//! `X_A' (I - P_T) X_B = 0`. Every residual is evaluated twice, once from
//! incidence matrices as `N_AB - N_AT (X_T'X_T)^- N_TB` and once through the
//! explicit projector, and the two must agree exactly.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::linalg::{g_inverse, projector, rank, rat, sym_eigenvalues, IntMatrix, Matrix, RationalMatrix};
use crate::plan::{Effect, Plan};

/// Result of one pairwise check.
#[derive(Debug, Clone, PartialEq)]
pub struct PairStatus {
    pub a: String,
    pub b: String,
    pub through: Vec<String>,
    pub pass: bool,
    /// Proportional frequency condition, recorded alongside block checks.
    pub pfc: Option<bool>,
    pub residual: RationalMatrix,
}

/// Pairwise statuses for a whole plan.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthReport {
    pub check: String,
    pub through: Vec<String>,
    pub pairs: Vec<PairStatus>,
}

impl OrthReport {
    pub fn pass(&self) -> bool {
        self.pairs.iter().all(|p| p.pass)
    }

    pub fn passed(&self) -> usize {
        self.pairs.iter().filter(|p| p.pass).count()
    }

    pub fn pair(&self, a: &str, b: &str) -> Option<&PairStatus> {
        self.pairs
            .iter()
            .find(|p| (p.a == a && p.b == b) || (p.a == b && p.b == a))
    }
}

/// Precomputed adjustment for a fixed set `T`.
struct Adjuster<'p> {
    plan: &'p Plan,
    set: Vec<Effect>,
    gram_inv: RationalMatrix,
    residual_projector: RationalMatrix,
}

impl<'p> Adjuster<'p> {
    fn new(plan: &'p Plan, set: &[Effect]) -> Result<Self> {
        let xt = plan.design_matrix_set(set)?.to_rational();
        let gram_inv = g_inverse(&plan.gram_set(set)?.to_rational());
        let residual_projector = projector(&xt).complement();
        Ok(Self {
            plan,
            set: set.to_vec(),
            gram_inv,
            residual_projector,
        })
    }

    fn check_disjoint(&self, e: Effect) -> Result<()> {
        if self.set.contains(&e) {
            return Err(Error::OverlappingSets(format!(
                "`{}` is in the adjusting set",
                self.plan.effect_name(e)
            )));
        }
        Ok(())
    }

    /// `N_AB - N_AT G N_TB`.
    fn incidence_form(&self, a: Effect, b: Effect) -> Result<RationalMatrix> {
        let nab = self.plan.incidence(a, b)?.to_rational();
        if self.set.is_empty() {
            return Ok(nab);
        }
        let nat = self.plan.incidence_set(a, &self.set)?.to_rational();
        let nbt = self.plan.incidence_set(b, &self.set)?.to_rational();
        Ok(nab.sub(&nat.mul(&self.gram_inv).mul(&nbt.transpose())))
    }

    /// `X_A' (I - P_T) X_B`, accumulated cell by cell since `X_A` and
    /// `X_B` are 0/1 with a single one per run.
    fn projector_form(&self, a: Effect, b: Effect) -> Result<RationalMatrix> {
        let (la, lb) = (self.plan.levels_of(a)?, self.plan.levels_of(b)?);
        let mut out = RationalMatrix::zeros(self.plan.level_count(a)?, self.plan.level_count(b)?);
        for (u, &p) in la.iter().enumerate() {
            for (v, &q) in lb.iter().enumerate() {
                let w = &self.residual_projector[(u, v)];
                if !w.is_zero() {
                    out[(p, q)] += w;
                }
            }
        }
        Ok(out)
    }

    fn residual(&self, a: Effect, b: Effect) -> Result<RationalMatrix> {
        self.check_disjoint(a)?;
        self.check_disjoint(b)?;
        let r1 = self.incidence_form(a, b)?;
        let r2 = self.projector_form(a, b)?;
        if r1 != r2 {
            return Err(Error::IdentityViolation(format!(
                "incidence and projector forms disagree for `{}` vs `{}`",
                self.plan.effect_name(a),
                self.plan.effect_name(b)
            )));
        }
        Ok(r1)
    }

    fn names(&self) -> Vec<String> {
        self.set.iter().map(|&e| self.plan.effect_name(e)).collect()
    }
}

/// Evaluates `X_A' (I - P_T) X_B` exactly, with the dual-form cross-check.
pub fn orth_through(plan: &Plan, a: Effect, b: Effect, through: &[Effect]) -> Result<PairStatus> {
    if a == b {
        return Err(Error::OverlappingSets("a factor is not paired with itself".into()));
    }
    let adj = Adjuster::new(plan, through)?;
    let residual = adj.residual(a, b)?;
    Ok(PairStatus {
        a: plan.effect_name(a),
        b: plan.effect_name(b),
        through: adj.names(),
        pass: residual.is_zero(),
        pfc: None,
        residual,
    })
}

/// `n N_AB = r_A r_B'`.
pub fn pfc(plan: &Plan, a: Effect, b: Effect) -> Result<bool> {
    let n = plan.n_runs() as i64;
    let nab = plan.incidence(a, b)?;
    let (ra, rb) = (plan.replication(a)?, plan.replication(b)?);
    Ok((0..ra.len()).all(|p| (0..rb.len()).all(|q| n * nab[(p, q)] == ra[p] * rb[q])))
}

fn pairwise(plan: &Plan, check: &str, through: &[Effect], with_pfc: bool) -> Result<OrthReport> {
    let adj = Adjuster::new(plan, through)?;
    let factors: Vec<Effect> = plan.treatments().filter(|e| !through.contains(e)).collect();
    let mut pairs = Vec::new();
    for (i, &a) in factors.iter().enumerate() {
        for &b in &factors[i + 1..] {
            let residual = adj.residual(a, b)?;
            pairs.push(PairStatus {
                a: plan.effect_name(a),
                b: plan.effect_name(b),
                through: adj.names(),
                pass: residual.is_zero(),
                pfc: if with_pfc { Some(pfc(plan, a, b)?) } else { None },
                residual,
            });
        }
    }
    Ok(OrthReport {
        check: check.to_string(),
        through: adj.names(),
        pairs,
    })
}

/// Block-adjusted orthogonality `N_AA' = L_A D_k^{-1} L_A''` for every
/// unordered treatment pair, with the PFC status recorded per pair.
pub fn is_potb(plan: &Plan) -> Result<OrthReport> {
    if !plan.is_blocked() {
        return Err(Error::NoBlocks);
    }
    pairwise(plan, "potb", &[Effect::Block], true)
}

/// Orthogonality through a pair `T` for every pair of factors outside `T`.
pub fn is_potp(plan: &Plan, t: [Effect; 2]) -> Result<OrthReport> {
    if t[0] == t[1] {
        return Err(Error::InvalidParameter(
            "the adjusting pair must have two distinct factors".into(),
        ));
    }
    pairwise(plan, "potp", &t, false)
}

/// Orthogonality through an arbitrary set for every pair outside it.
pub fn orth_report(plan: &Plan, through: &[Effect]) -> Result<OrthReport> {
    pairwise(plan, "orth_through", through, false)
}

/// `C_{AA;U} = X_A' (I - P_U) X_A`.
pub fn c_matrix_factor(plan: &Plan, a: Effect, adjust_for: &[Effect]) -> Result<RationalMatrix> {
    Adjuster::new(plan, adjust_for)?.residual(a, a)
}

/// Every other effect of the model: the mean, the blocks if any, and all
/// other treatment factors.
pub fn complement_set(plan: &Plan, a: Effect) -> Vec<Effect> {
    let mut u = vec![Effect::General];
    if plan.is_blocked() {
        u.push(Effect::Block);
    }
    u.extend(plan.treatments().filter(|&e| e != a));
    u
}

/// The information matrix `C_A`, adjusted for every other effect.
pub fn information_matrix(plan: &Plan, a: Effect) -> Result<RationalMatrix> {
    c_matrix_factor(plan, a, &complement_set(plan, a))
}

/// `rank(C_A) = s_A - 1`.
pub fn is_connected(plan: &Plan, a: Effect) -> Result<bool> {
    Ok(rank(&information_matrix(plan, a)?) + 1 == plan.level_count(a)?)
}

/// `N_AA' - L_A D_k^{-1} L_A''` when blocked, `N_AA'` otherwise.
pub fn adjusted_incidence(plan: &Plan, a: Effect, b: Effect) -> Result<RationalMatrix> {
    let nab = plan.incidence(a, b)?.to_rational();
    if !plan.is_blocked() {
        return Ok(nab);
    }
    let la = plan.block_incidence(a)?.to_rational();
    let lb = plan.block_incidence(b)?.to_rational();
    let dinv = RationalMatrix::diag(
        &plan
            .block_sizes()
            .unwrap_or_default()
            .iter()
            .map(|&k| BigRational::new(BigInt::one(), BigInt::from(k)))
            .collect::<Vec<_>>(),
    );
    Ok(nab.sub(&la.mul(&dinv).mul(&lb.transpose())))
}

/// Helmert contrasts for `s` levels: row `i` is `(1, ..., 1, -(i+1), 0, ...)`
/// with `i+1` leading ones. Rows are orthogonal and sum to zero; dividing
/// row `i` by `sqrt((i+1)(i+2))` makes them orthonormal.
pub fn helmert(s: usize) -> IntMatrix {
    IntMatrix::from_fn(s.saturating_sub(1), s, |i, j| match j.cmp(&(i + 1)) {
        std::cmp::Ordering::Less => 1,
        std::cmp::Ordering::Equal => -(i as i64 + 1),
        std::cmp::Ordering::Greater => 0,
    })
}

/// Per-factor contrast matrices `O_A`, stored as integer matrices with
/// mutually orthogonal zero-sum rows. The orthonormal `O_A` is obtained by
/// dividing each row by its Euclidean norm, which is kept implicit so that
/// all checks stay exact.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContrastBasis {
    rows: Vec<IntMatrix>,
}

impl ContrastBasis {
    pub fn helmert(plan: &Plan) -> Self {
        Self {
            rows: plan.factors().iter().map(|f| helmert(f.levels as usize)).collect(),
        }
    }

    /// Helmert rows with the levels of each factor permuted. `perms[a][j]` is
    /// the level placed at Helmert position `j`.
    pub fn permuted(plan: &Plan, perms: &[Vec<usize>]) -> Result<Self> {
        if perms.len() != plan.n_factors() {
            return Err(Error::LengthMismatch("one permutation per factor".into()));
        }
        let rows = plan
            .factors()
            .iter()
            .zip(perms)
            .map(|(f, p)| {
                let s = f.levels as usize;
                let mut sorted = p.clone();
                sorted.sort_unstable();
                if sorted != (0..s).collect::<Vec<_>>() {
                    return Err(Error::InvalidParameter(format!("not a permutation of 0..{s}")));
                }
                let h = helmert(s);
                let mut m = IntMatrix::zeros(s - 1, s);
                for i in 0..s - 1 {
                    for (j, &level) in p.iter().enumerate() {
                        m[(i, level)] = h[(i, j)];
                    }
                }
                Ok(m)
            })
            .collect::<Result<_>>()?;
        Self::from_rows(plan, rows)
    }

    /// Validates shapes, zero row sums and mutual orthogonality.
    pub fn from_rows(plan: &Plan, rows: Vec<IntMatrix>) -> Result<Self> {
        if rows.len() != plan.n_factors() {
            return Err(Error::LengthMismatch("one contrast matrix per factor".into()));
        }
        for (f, o) in plan.factors().iter().zip(&rows) {
            let s = f.levels as usize;
            if o.shape() != (s - 1, s) {
                return Err(Error::ShapeMismatch(format!(
                    "contrasts for `{}` must be {}x{s}",
                    f.name,
                    s - 1
                )));
            }
            if o.row_sums().iter().any(|&x| x != 0) {
                return Err(Error::InvalidParameter(format!(
                    "contrasts for `{}` do not sum to zero",
                    f.name
                )));
            }
            let g = o.mul(&o.transpose());
            if (0..s - 1).any(|i| g[(i, i)] == 0 || (0..s - 1).any(|j| i != j && g[(i, j)] != 0)) {
                return Err(Error::InvalidParameter(format!(
                    "contrasts for `{}` are not orthogonal",
                    f.name
                )));
            }
        }
        Ok(Self { rows })
    }

    pub fn factor(&self, a: usize) -> &IntMatrix {
        &self.rows[a]
    }

    /// Squared row norms of `O_A` before normalization.
    pub fn norms(&self, a: usize) -> Vec<i64> {
        let o = &self.rows[a];
        (0..o.rows()).map(|i| o.row(i).iter().map(|x| x * x).sum()).collect()
    }

    /// The normalized `O_A` in floating point.
    pub fn orthonormal_f64(&self, a: usize) -> Matrix<f64> {
        let norms = self.norms(a);
        let o = &self.rows[a];
        Matrix::from_fn(o.rows(), o.cols(), |i, j| o[(i, j)] as f64 / (norms[i] as f64).sqrt())
    }
}

/// Normalization of the contrast rows. `Orthonormal` uses `O_A O_A' = I`;
/// `Doubled` uses `O_A O_A' = 2I`, the +1/-1 coding common for two-level
/// factors, and scales every entry of the contrast matrix by 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ContrastScale {
    #[default]
    Orthonormal,
    Doubled,
}

impl ContrastScale {
    pub fn factor(self) -> i64 {
        match self {
            Self::Orthonormal => 1,
            Self::Doubled => 2,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::Orthonormal => "orthonormal",
            Self::Doubled => "doubled",
        }
    }
}

/// An exact number of the form `coef * sqrt(radicand)` with square-free
/// radicand.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Surd {
    pub coef: BigRational,
    pub radicand: u64,
}

impl Surd {
    pub fn to_f64(&self) -> f64 {
        self.coef.to_f64().unwrap_or(f64::NAN) * (self.radicand as f64).sqrt()
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        (self.radicand == 1 || self.coef.is_zero()).then_some(&self.coef)
    }
}

impl std::fmt::Display for Surd {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.coef.is_zero() || self.radicand == 1 {
            write!(f, "{}", self.coef)
        } else {
            write!(f, "{}*sqrt({})", self.coef, self.radicand)
        }
    }
}

/// Writes `n = c^2 b` with `b` square-free.
fn split_square(n: u64) -> (u64, u64) {
    let (mut c, mut b, mut d) = (1, n, 2);
    while d * d <= b {
        while b % (d * d) == 0 {
            b /= d * d;
            c *= d;
        }
        d += 1;
    }
    (c, b)
}

/// The contrast information matrix `C~`, held as `raw = O K O'` over the
/// unnormalized integer contrasts plus their squared norms.
#[derive(Debug, Clone, PartialEq)]
pub struct ContrastCMatrix {
    raw: RationalMatrix,
    norms: Vec<i64>,
    offsets: Vec<usize>,
    scale: ContrastScale,
}

impl ContrastCMatrix {
    pub fn dim(&self) -> usize {
        self.norms.len()
    }

    pub fn scale(&self) -> ContrastScale {
        self.scale
    }

    /// Start index of each factor's contrasts, plus the total at the end.
    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn entry(&self, i: usize, j: usize) -> Surd {
        let raw = &self.raw[(i, j)];
        if raw.is_zero() {
            return Surd {
                coef: BigRational::zero(),
                radicand: 1,
            };
        }
        let prod = (self.norms[i] * self.norms[j]) as u64;
        let (c, b) = split_square(prod);
        let coef = raw * rat(self.scale.factor()) / rat((c * b) as i64);
        Surd { coef, radicand: b }
    }

    /// The matrix itself when every entry is rational.
    pub fn to_rational(&self) -> Option<RationalMatrix> {
        let n = self.dim();
        let mut out = RationalMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] = self.entry(i, j).as_rational()?.clone();
            }
        }
        Some(out)
    }

    pub fn to_f64(&self) -> Matrix<f64> {
        let n = self.dim();
        Matrix::from_fn(n, n, |i, j| self.entry(i, j).to_f64())
    }

    pub fn entry_strings(&self) -> Vec<Vec<String>> {
        let n = self.dim();
        (0..n)
            .map(|i| (0..n).map(|j| self.entry(i, j).to_string()).collect())
            .collect()
    }

    /// `Some(a)` iff the matrix is exactly `a I`.
    pub fn as_scalar_identity(&self) -> Option<BigRational> {
        let n = self.dim();
        let mut value: Option<BigRational> = None;
        for i in 0..n {
            for j in 0..n {
                if i != j && !self.raw[(i, j)].is_zero() {
                    return None;
                }
            }
            let d = self.entry(i, i).as_rational()?.clone();
            match &value {
                Some(v) if *v != d => return None,
                None => value = Some(d),
                _ => {}
            }
        }
        value
    }

    /// True when every block between two different factors is zero.
    pub fn cross_blocks_vanish(&self) -> bool {
        let owner = |i: usize| self.offsets.partition_point(|&o| o <= i) - 1;
        let n = self.dim();
        (0..n).all(|i| (0..n).all(|j| owner(i) == owner(j) || self.raw[(i, j)].is_zero()))
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self, tol: f64) -> Result<Vec<f64>> {
        if !self.raw.is_symmetric() {
            return Err(Error::NotSymmetric);
        }
        if let Some(m) = self.to_rational() {
            return sym_eigenvalues(&m, tol);
        }
        crate::linalg::sym_eigenvalues_f64(&self.to_f64(), tol)
    }

    /// Whether every entry is non-negative on the diagonal, a cheap PSD
    /// necessary condition used in tests.
    pub fn diagonal_nonnegative(&self) -> bool {
        (0..self.dim()).all(|i| !self.raw[(i, i)].is_negative())
    }
}

/// `C~` assembled blockwise: `O_A (N_AA' - L_A D_k^{-1} L_A'') O_A''` for a
/// blocked plan and `O_A N_AA' O_A''` (that is `Z'Z`) otherwise.
pub fn contrast_c_matrix(plan: &Plan, scale: ContrastScale) -> Result<ContrastCMatrix> {
    contrast_c_matrix_with(plan, &ContrastBasis::helmert(plan), scale)
}

pub fn contrast_c_matrix_with(plan: &Plan, basis: &ContrastBasis, scale: ContrastScale) -> Result<ContrastCMatrix> {
    let m = plan.n_factors();
    let mut offsets = vec![0];
    let mut norms = Vec::new();
    for a in 0..m {
        norms.extend(basis.norms(a));
        offsets.push(norms.len());
    }
    let v = norms.len();
    let mut raw = RationalMatrix::zeros(v, v);
    for a in 0..m {
        let oa = basis.factor(a).to_rational();
        for b in a..m {
            let ob = basis.factor(b).to_rational();
            let k = adjusted_incidence(plan, Effect::Treatment(a), Effect::Treatment(b))?;
            let block = oa.mul(&k).mul(&ob.transpose());
            for i in 0..block.rows() {
                for j in 0..block.cols() {
                    raw[(offsets[a] + i, offsets[b] + j)] = block[(i, j)].clone();
                    raw[(offsets[b] + j, offsets[a] + i)] = block[(i, j)].clone();
                }
            }
        }
    }
    Ok(ContrastCMatrix {
        raw,
        norms,
        offsets,
        scale,
    })
}
