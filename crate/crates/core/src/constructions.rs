//! Plan builders: translates and orbits over a Galois field, `C_0`
//! expansion, the Hadamard-based plan orthogonal through a pair, powers and
//! the diamond product, the fixed seed plans, and the three block-orthogonal
//! families.
//!
//! Levels of an `s`-level factor are field labels. A factor with `s + 1`
//! levels carries the extra symbol infinity as label `s`, which absorbs
//! every translation.
//!
//! Ordering is fixed so that outputs are reproducible: translates form the
//! outer loop and the runs (or blocks) of the translated plan the inner loop;
//! `C_0` is taken in ascending label order; Q-array columns left to right.

use crate::error::{Error, Result};
use crate::field::GaloisField;
use crate::generators::{hadamard, oa_rao_hamming_dim, q_extend, q_from_hadamard, HadamardMatrix, OrthogonalArray};
use crate::linalg::IntMatrix;
use crate::plan::{Effect, Factor, Plan};

/// Translation vectors applied to every run of a plan.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorSet {
    vectors: Vec<Vec<u32>>,
}

impl GeneratorSet {
    pub fn new(vectors: Vec<Vec<u32>>) -> Self {
        Self { vectors }
    }

    /// `{u 1_m : u in F}`, giving the orbit `P (+) F`.
    pub fn orbit(field: &GaloisField, m: usize) -> Self {
        Self {
            vectors: field.elements().map(|u| vec![u; m]).collect(),
        }
    }

    pub fn vectors(&self) -> &[Vec<u32>] {
        &self.vectors
    }

    pub fn contains_zero(&self) -> bool {
        self.vectors.iter().any(|v| v.iter().all(|&x| x == 0))
    }
}

fn check_field_levels(plan: &Plan, field: &GaloisField) -> Result<()> {
    let s = field.order();
    for f in plan.factors() {
        if f.levels != s && f.levels != s + 1 {
            return Err(Error::SymbolMismatch(format!(
                "factor `{}` has {} levels; expected {s} or {}",
                f.name,
                f.levels,
                s + 1
            )));
        }
    }
    Ok(())
}

/// `P_0 + V`: every run translated by every vector, translates outermost.
/// A blocked plan gets one copy of its block structure per vector.
pub fn translate(plan: &Plan, field: &GaloisField, gens: &GeneratorSet) -> Result<Plan> {
    check_field_levels(plan, field)?;
    let s = field.order();
    let m = plan.n_factors();
    let mut runs = Vec::with_capacity(plan.n_runs() * gens.vectors.len());
    for v in &gens.vectors {
        if v.len() != m {
            return Err(Error::DimensionMismatch(format!(
                "translation vector of length {} for {m} factors",
                v.len()
            )));
        }
        if let Some(&x) = v.iter().find(|&&x| x >= s) {
            return Err(Error::SymbolMismatch(format!(
                "translation amount {x} is not in GF({s})"
            )));
        }
        for run in plan.runs() {
            runs.push(
                run.iter()
                    .zip(v)
                    .map(|(&x, &u)| if x == s { s } else { field.add(x, u) })
                    .collect(),
            );
        }
    }
    let blocks = plan.block_sizes().map(|b| b.repeat(gens.vectors.len()));
    Plan::new(plan.name(), plan.factors().to_vec(), runs, blocks)
}

/// `P (+) F`.
pub fn orbit(plan: &Plan, field: &GaloisField) -> Result<Plan> {
    translate(plan, field, &GeneratorSet::orbit(field, plan.n_factors()))
}

/// `C_0 P`: the columns `cP` for `c` in `C_0` ascending, then original
/// column order. `p` is given row-wise (`m` rows of length `n`).
pub fn c0_expand(field: &GaloisField, p: &[Vec<u32>]) -> Result<Vec<Vec<u32>>> {
    let classes = field.square_classes()?;
    Ok(p.iter()
        .map(|row| {
            classes
                .c0
                .iter()
                .flat_map(|&c| row.iter().map(move |&x| field.mul(c, x)))
                .collect()
        })
        .collect())
}

/// An `m x n` array with entries `0, 1, -1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignedSeedArray {
    entries: Vec<Vec<i8>>,
}

impl SignedSeedArray {
    /// Validates the array before returning it.
    pub fn new(entries: Vec<Vec<i8>>) -> Result<Self> {
        let a = Self { entries };
        a.validate()?;
        Ok(a)
    }

    /// The `2h x 2h` array built from a normalized Hadamard matrix with `H~`
    /// its rows after the first:
    ///
    /// ```text
    /// 0          | 0
    /// 1          | -1
    /// (H~ + J)/2 | -(H~ + J)/2
    /// (H~ + J)/2 | (H~ - J)/2
    /// ```
    pub fn from_hadamard(h: &HadamardMatrix) -> Result<Self> {
        let order = h.order();
        let tilde = h.without_first_row();
        let plus = |x: i64| ((x + 1) / 2) as i8;
        let minus = |x: i64| ((x - 1) / 2) as i8;
        let mut rows = vec![vec![0i8; 2 * order]];
        rows.push((0..2 * order).map(|l| if l < order { 1 } else { -1 }).collect());
        for r in tilde.to_rows() {
            rows.push(r.iter().map(|&x| plus(x)).chain(r.iter().map(|&x| -plus(x))).collect());
        }
        for r in tilde.to_rows() {
            rows.push(r.iter().map(|&x| plus(x)).chain(r.iter().map(|&x| minus(x))).collect());
        }
        Self::new(rows)
    }

    pub fn entries(&self) -> &[Vec<i8>] {
        &self.entries
    }

    pub fn rows(&self) -> usize {
        self.entries.len()
    }

    pub fn cols(&self) -> usize {
        self.entries.first().map_or(0, Vec::len)
    }

    /// `d^k_ij = #{l : p_jl - p_il = k}`.
    pub fn difference_count(&self, i: usize, j: usize, k: i8) -> usize {
        self.entries[i]
            .iter()
            .zip(&self.entries[j])
            .filter(|&(&a, &b)| b - a == k)
            .count()
    }

    /// Checks: entries in `{0, 1, -1}`; `n` a positive multiple of 4; first
    /// row zero; all pairwise differences in `{0, 1, -1}`; and
    /// `d^k_ij = n/2` for the pair of rows 1 and 2, `n/4` for every other
    /// pair, for `k = 1` and `k = -1`.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSeedArray(m));
        let (m, n) = (self.rows(), self.cols());
        if m < 2 || n == 0 || n % 4 != 0 {
            return bad(format!("shape {m}x{n}: need at least two rows and n a multiple of 4"));
        }
        if self.entries.iter().any(|r| r.len() != n) {
            return bad("ragged rows".into());
        }
        if self.entries.iter().flatten().any(|x| !(-1..=1).contains(x)) {
            return bad("entries must be 0, 1 or -1".into());
        }
        if self.entries[0].iter().any(|&x| x != 0) {
            return bad("first row is not zero".into());
        }
        for i in 0..m {
            for j in 0..m {
                if i == j {
                    continue;
                }
                if self.entries[i]
                    .iter()
                    .zip(&self.entries[j])
                    .any(|(a, b)| (a - b).abs() > 1)
                {
                    return bad(format!("rows {} and {} differ by 2 somewhere", i + 1, j + 1));
                }
                let want = if (i, j) == (0, 1) || (i, j) == (1, 0) {
                    n / 2
                } else {
                    n / 4
                };
                for k in [1, -1] {
                    let d = self.difference_count(i, j, k);
                    if d != want {
                        return bad(format!("d^{k} for rows ({}, {}) is {d}, expected {want}", i + 1, j + 1));
                    }
                }
            }
        }
        Ok(())
    }

    /// The array over `F`, with `-1` mapped to the field negative of 1.
    pub fn to_field(&self, field: &GaloisField) -> Vec<Vec<u32>> {
        let minus_one = field.neg(1);
        self.entries
            .iter()
            .map(|r| {
                r.iter()
                    .map(|&x| match x {
                        0 => 0,
                        1 => 1,
                        _ => minus_one,
                    })
                    .collect()
            })
            .collect()
    }
}

fn odd_field_3mod4(s: u32) -> Result<GaloisField> {
    let field = GaloisField::new(s)?;
    if s % 4 != 3 {
        return Err(Error::BadCongruence { s });
    }
    Ok(field)
}

/// `C_0 P (+) F` for the seed array of a Hadamard matrix of order `h`: a plan
/// for `2h` factors with `s` levels on `h s (s - 1)` runs that is orthogonal
/// through its first two factors.
pub fn construct_potp(h: usize, s: u32) -> Result<Plan> {
    if !h.is_multiple_of(4) {
        return Err(Error::UnsupportedOrder {
            order: h as u64,
            reason: "the seed array needs a Hadamard order divisible by 4".into(),
        });
    }
    let field = odd_field_3mod4(s)?;
    let seed = SignedSeedArray::from_hadamard(&hadamard(h)?)?;
    let rows = c0_expand(&field, &seed.to_field(&field))?;
    let factors: Vec<Factor> = (1..=rows.len()).map(|i| Factor::new(format!("A{i}"), s)).collect();
    let runs: Vec<Vec<u32>> = (0..rows[0].len())
        .map(|l| rows.iter().map(|r| r[l]).collect())
        .collect();
    let base = Plan::new(format!("potp-h{h}-s{s}"), factors, runs, None)?;
    orbit(&base, &field)
}

/// Whether every incidence matrix follows the pattern of a plan orthogonal
/// through factors 1 and 2: `N_12 = 2c(J - I)` and `N_ij = c((s-2)I + J)`
/// for every other pair.
pub fn potp_incidence_pattern(plan: &Plan, c: i64) -> Result<bool> {
    let m = plan.n_factors();
    for i in 0..m {
        for j in i + 1..m {
            let n = plan.incidence(Effect::Treatment(i), Effect::Treatment(j))?;
            let s = plan.factors()[i].levels as i64;
            if n.rows() != n.cols() {
                return Ok(false);
            }
            let want = |p: usize, q: usize| -> i64 {
                let eye = i64::from(p == q);
                if (i, j) == (0, 1) {
                    2 * c * (1 - eye)
                } else {
                    c * ((s - 2) * eye + 1)
                }
            };
            if (0..n.rows()).any(|p| (0..n.cols()).any(|q| n[(p, q)] != want(p, q))) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// `P^t`: every run juxtaposed `t` times. Copy `i` of factor `A` is named
/// `A[i]` (1-based); `t = 1` returns the plan unchanged.
pub fn power_plan(plan: &Plan, t: usize) -> Result<Plan> {
    if t == 0 {
        return Err(Error::InvalidParameter("power must be at least 1".into()));
    }
    if t == 1 {
        return Ok(plan.clone());
    }
    let factors = (1..=t)
        .flat_map(|i| {
            plan.factors()
                .iter()
                .map(move |f| Factor::new(format!("{}[{i}]", f.name), f.levels))
        })
        .collect();
    let runs = plan.runs().iter().map(|r| r.repeat(t)).collect();
    Plan::new(
        format!("{}^{t}", plan.name()),
        factors,
        runs,
        plan.block_sizes().map(<[usize]>::to_vec),
    )
}

/// `Q <> P_0 = P_0^m + W`, where column `l` of the `m`-row array `Q`
/// contributes the translation `(q_1l 1_m0, ..., q_ml 1_m0)`.
pub fn diamond(q: &OrthogonalArray, plan0: &Plan, field: &GaloisField) -> Result<Plan> {
    let s = field.order();
    if q.symbols() != s {
        return Err(Error::SymbolMismatch(format!(
            "array over {} symbols, field of order {s}",
            q.symbols()
        )));
    }
    if let Some(f) = plan0.factors().iter().find(|f| f.levels != s) {
        return Err(Error::SymbolMismatch(format!(
            "factor `{}` has {} levels, not {s}",
            f.name, f.levels
        )));
    }
    let m0 = plan0.n_factors();
    let powered = power_plan(plan0, q.factors())?;
    let gens = GeneratorSet::new(
        (0..q.runs())
            .map(|l| q.column(l).iter().flat_map(|&x| std::iter::repeat_n(x, m0)).collect())
            .collect(),
    );
    Ok(translate(&powered, field, &gens)?.with_name(format!("diamond({})", plan0.name())))
}

fn plan_from_rows(name: &str, names: &[&str], levels: u32, rows: &[&str], blocks: Option<Vec<usize>>) -> Plan {
    let factors = names.iter().map(|n| Factor::new(*n, levels)).collect();
    let digits: Vec<Vec<u32>> = rows
        .iter()
        .map(|r| r.bytes().map(|b| u32::from(b - b'0')).collect())
        .collect();
    let runs = (0..digits[0].len())
        .map(|l| digits.iter().map(|r| r[l]).collect())
        .collect();
    Plan::new(name, factors, runs, blocks).expect("seed tables are valid plans")
}

/// Four 3-level factors on 12 runs, orthogonal through `{A1, A2}`.
pub fn table_4_1_1() -> Plan {
    plan_from_rows(
        "table_4_1_1",
        &["A1", "A2", "A3", "A4"],
        3,
        &["000011112222", "112222000011", "012012012012", "010212102021"],
        None,
    )
}

/// Seven 2-level factors in two blocks of five.
pub fn table_4_2_1() -> Plan {
    plan_from_rows(
        "table_4_2_1",
        &["A1", "A2", "A3", "A4", "A5", "A6", "A7"],
        2,
        &[
            "0011001111",
            "0101010111",
            "0110011011",
            "0011110000",
            "0101101000",
            "0110100100",
            "0000100011",
        ],
        Some(vec![5, 5]),
    )
}

/// Six 2-level factors in two blocks of five, in two orthogonal classes.
pub fn table_4_2_2() -> Plan {
    plan_from_rows(
        "table_4_2_2",
        &["A1", "B1", "C1", "A2", "B2", "C2"],
        2,
        &[
            "0011000110",
            "0101001010",
            "0110001100",
            "0011011001",
            "0101010101",
            "0110010011",
        ],
        Some(vec![5, 5]),
    )
}

/// Three 3-level factors in blocks of sizes 4, 4 and 2.
pub fn table_3_2_3() -> Plan {
    plan_from_rows(
        "table_3_2_3",
        &["A1", "A2", "A3"],
        3,
        &["0012001212", "0102201021", "0120200112"],
        Some(vec![4, 4, 2]),
    )
}

pub fn seed_plans() -> Vec<Plan> {
    vec![table_4_1_1(), table_4_2_1(), table_4_2_2(), table_3_2_3()]
}

pub fn seed_plan(name: &str) -> Option<Plan> {
    seed_plans().into_iter().find(|p| p.name() == name)
}

/// `Q(h, h, 2) <> table_4_2_1`: `7h` two-level factors in `2h` blocks of five.
pub fn potb_2pow7h(h: usize) -> Result<Plan> {
    if h < 2 {
        return Err(Error::OrderTooSmall(h));
    }
    let q = q_from_hadamard(&hadamard(h)?)?;
    let field = GaloisField::new(2)?;
    Ok(diamond(&q, &table_4_2_1(), &field)?.with_name(format!("potb-2pow7h-h{h}")))
}

/// `Q(N, m, 3) <> table_3_2_3` with `N = 3^k` and `Q` the zero-row extension
/// of the Rao-Hamming array with `m - 1 = (N - 1)/2` rows: `3m` factors in
/// `3N` blocks, `2N` of size four and `N` of size two.
pub fn potb_3pow3m(n: usize) -> Result<Plan> {
    let mut k = 0;
    let mut x = n;
    while x > 1 && x.is_multiple_of(3) {
        x /= 3;
        k += 1;
    }
    if x != 1 || k == 0 {
        return Err(Error::InvalidParameter(format!("N = {n} is not a positive power of 3")));
    }
    let field = GaloisField::new(3)?;
    let q = q_extend(&oa_rao_hamming_dim(&field, k)?);
    Ok(diamond(&q, &table_3_2_3(), &field)?.with_name(format!("potb-3pow3m-N{n}")))
}

/// `M(p, q) = 1` iff `q - p` is a nonzero square.
pub fn asym_m_matrix(field: &GaloisField) -> Result<IntMatrix> {
    let classes = field.square_classes()?;
    let s = field.order() as usize;
    Ok(IntMatrix::from_fn(s, s, |p, q| {
        i64::from(classes.is_square(field.sub(q as u32, p as u32)))
    }))
}

/// Structural identities checked on a constructed asymmetric plan.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AsymStructure {
    /// `N_xy = I + J` for all distinct square-indexed factors.
    pub n_xy: bool,
    /// `N_{x,inf} = J`.
    pub n_x_inf: bool,
    /// `L_x L_y' = (t + 1) N_xy`.
    pub lx_ly: bool,
    /// `L_x = [M + I | J - M]` after listing the second initial block's
    /// translates first.
    pub lx_form: bool,
}

impl AsymStructure {
    pub fn all(&self) -> bool {
        self.n_xy && self.n_x_inf && self.lx_ly && self.lx_form
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AsymPlan {
    pub plan: Plan,
    pub s: u32,
    pub t: usize,
    pub alpha: u32,
    pub c0: Vec<u32>,
    /// `s = 3 mod 4`; otherwise the construction still runs but its claims
    /// are not covered by the argument that motivates it.
    pub congruent_3_mod_4: bool,
    pub structure: AsymStructure,
}

/// The `s^t (s + 1)` plan on `2s` blocks of size `t + 1`, `t = (s - 1)/2`.
///
/// Factors are indexed by `C_0 + {inf}`: one `s`-level factor `x<label>` per
/// square and a final `(s + 1)`-level factor `inf`. With `a` the smallest
/// non-square, the two initial blocks are the columns of `E^0` and `E^1`:
/// `e^l(x, y) = a^l x y`, `e^l(x, inf) = 0`, `e^l(inf, y) = a^(l+1) y`,
/// `e^0(inf, inf) = 0`, `e^1(inf, inf) = inf`. The plan is their orbit.
pub fn construct_asym(s: u32) -> Result<AsymPlan> {
    let field = GaloisField::new(s)?;
    let classes = field.square_classes()?;
    let c0 = classes.c0.clone();
    let alpha = classes.c1[0];
    let t = c0.len();
    let inf = s;
    let mut factors: Vec<Factor> = c0.iter().map(|x| Factor::new(format!("x{x}"), s)).collect();
    factors.push(Factor::new("inf", s + 1));

    let mut runs = Vec::new();
    for l in 0..2u32 {
        let al = field.pow(alpha, l);
        let al1 = field.pow(alpha, l + 1);
        for y in c0.iter().map(Some).chain([None]) {
            let mut run: Vec<u32> = c0
                .iter()
                .map(|&x| y.map_or(0, |&y| field.mul(al, field.mul(x, y))))
                .collect();
            run.push(match y {
                Some(&y) => field.mul(al1, y),
                None if l == 0 => 0,
                None => inf,
            });
            runs.push(run);
        }
    }
    let base = Plan::new(format!("asym-s{s}"), factors, runs, Some(vec![t + 1, t + 1]))?;
    let plan = orbit(&base, &field)?;
    let structure = asym_structure(&plan, &field, t)?;
    Ok(AsymPlan {
        plan,
        s,
        t,
        alpha,
        c0,
        congruent_3_mod_4: s % 4 == 3,
        structure,
    })
}

fn asym_structure(plan: &Plan, field: &GaloisField, t: usize) -> Result<AsymStructure> {
    let s = field.order() as usize;
    let m = plan.n_factors();
    let inf = Effect::Treatment(m - 1);
    let eye_plus_j = IntMatrix::from_fn(s, s, |p, q| 1 + i64::from(p == q));
    let mut n_xy = true;
    let mut lx_ly = true;
    let mut n_x_inf = true;
    let mut lx_form = true;
    let mm = asym_m_matrix(field)?;
    let want_l = IntMatrix::from_fn(s, 2 * s, |p, q| {
        if q < s {
            mm[(p, q)] + i64::from(p == q)
        } else {
            1 - mm[(p, q - s)]
        }
    });
    // blocks are numbered 2u + l; list the l = 1 translates first
    let order: Vec<usize> = (0..s).map(|u| 2 * u + 1).chain((0..s).map(|u| 2 * u)).collect();
    for x in 0..m - 1 {
        let ex = Effect::Treatment(x);
        let lx = plan.block_incidence(ex)?;
        n_x_inf &= plan.incidence(ex, inf)?.iter().all(|&v| v == 1);
        lx_form &= lx.select(&(0..s).collect::<Vec<_>>(), &order) == want_l;
        for y in x + 1..m - 1 {
            let ey = Effect::Treatment(y);
            let nxy = plan.incidence(ex, ey)?;
            n_xy &= nxy == eye_plus_j;
            lx_ly &= lx.mul(&plan.block_incidence(ey)?.transpose()) == nxy.scale(&((t + 1) as i64));
        }
    }
    Ok(AsymStructure {
        n_xy,
        n_x_inf,
        lx_ly,
        lx_form,
    })
}
