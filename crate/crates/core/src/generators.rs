//! Hadamard matrices, strength-2 orthogonal arrays, and the zero-row
//! extension `Q(N, m, s)` used as translation tables by the diamond
//! construction.
//!
//! Hadamard orders are reached by Sylvester doubling, the Paley type-I
//! construction (order `q + 1` for a prime power `q = 3 mod 4`), and
//! Kronecker products of reachable orders. Anything else is reported as
//! unsupported rather than searched for.

use crate::error::{Error, Result};
use crate::field::{is_prime, prime_power, GaloisField, MAX_ORDER};
use crate::linalg::IntMatrix;

/// A Hadamard matrix normalized so that its first row is all `+1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HadamardMatrix {
    entries: IntMatrix,
}

impl HadamardMatrix {
    pub fn order(&self) -> usize {
        self.entries.rows()
    }

    pub fn entries(&self) -> &IntMatrix {
        &self.entries
    }

    /// `H H' = h I`, checked in exact integer arithmetic.
    pub fn is_valid(&self) -> bool {
        is_hadamard(&self.entries)
    }

    /// The matrix with its all-ones first row removed.
    pub fn without_first_row(&self) -> IntMatrix {
        let h = self.order();
        let rows: Vec<usize> = (1..h).collect();
        let cols: Vec<usize> = (0..h).collect();
        self.entries.select(&rows, &cols)
    }

    pub fn to_csv(&self) -> String {
        matrix_csv(&self.entries.to_rows())
    }
}

fn is_hadamard(m: &IntMatrix) -> bool {
    let h = m.rows();
    m.cols() == h
        && m.iter().all(|&x| x == 1 || x == -1)
        && m.mul(&m.transpose()) == IntMatrix::identity(h).scale(&(h as i64))
}

fn kron(a: &IntMatrix, b: &IntMatrix) -> IntMatrix {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    IntMatrix::from_fn(ar * br, ac * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

fn paley_from(q: usize, chi: impl Fn(usize, usize) -> i64) -> IntMatrix {
    let n = q + 1;
    IntMatrix::from_fn(n, n, |i, j| {
        let skew = match (i, j) {
            (0, 0) => 0,
            (0, _) => 1,
            (_, 0) => -1,
            _ => chi(i - 1, j - 1),
        };
        skew + i64::from(i == j)
    })
}

/// Quadratic character of `x` modulo an odd prime `p` by Euler's criterion.
fn legendre(x: u64, p: u64) -> i64 {
    if x.is_multiple_of(p) {
        return 0;
    }
    let (mut base, mut e, mut acc) = (x % p, (p - 1) / 2, 1u64);
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % p;
        }
        base = base * base % p;
        e >>= 1;
    }
    if acc == 1 {
        1
    } else {
        -1
    }
}

fn paley(q: u64) -> Option<IntMatrix> {
    if q <= u64::from(MAX_ORDER) {
        let f = GaloisField::new(q as u32).ok()?;
        let sq = f.square_classes().ok()?;
        return Some(paley_from(q as usize, |i, j| {
            let x = f.sub(i as u32, j as u32);
            if x == 0 {
                0
            } else if sq.is_square(x) {
                1
            } else {
                -1
            }
        }));
    }
    // beyond the tabulated fields only prime q is handled
    is_prime(q).then(|| paley_from(q as usize, |i, j| legendre((i + q as usize - j) as u64, q)))
}

fn build(h: usize) -> Option<IntMatrix> {
    match h {
        0 => None,
        1 => Some(IntMatrix::from_rows(&[vec![1]])),
        2 => Some(IntMatrix::from_rows(&[vec![1, 1], vec![1, -1]])),
        _ if !h.is_multiple_of(4) => None,
        _ if h.is_power_of_two() => Some(kron(&build(2)?, &build(h / 2)?)),
        _ => {
            let q = (h - 1) as u64;
            if q % 4 == 3 && prime_power(q).is_some() {
                if let Some(m) = paley(q) {
                    return Some(m);
                }
            }
            (2..=h / 2)
                .filter(|d| h.is_multiple_of(*d))
                .find_map(|d| Some(kron(&build(d)?, &build(h / d)?)))
        }
    }
}

/// A verified Hadamard matrix of the given order with normalized first row.
pub fn hadamard(order: usize) -> Result<HadamardMatrix> {
    let raw = build(order).ok_or_else(|| Error::UnsupportedOrder {
        order: order as u64,
        reason: "not reachable by Sylvester, Paley type-I or Kronecker products".into(),
    })?;
    let signs: Vec<i64> = raw.row(0).to_vec();
    let entries = IntMatrix::from_fn(order, order, |i, j| raw[(i, j)] * signs[j]);
    if !is_hadamard(&entries) {
        return Err(Error::IdentityViolation(format!("H H' != {order} I")));
    }
    Ok(HadamardMatrix { entries })
}

/// An array with `m` rows (factors) and `N` columns (runs) over symbols
/// `0..s`. Arrays built by [`q_extend`] carry a leading all-zero row and are
/// of strength two only among their remaining rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrthogonalArray {
    symbols: u32,
    rows: Vec<Vec<u32>>,
    zero_row: bool,
}

impl OrthogonalArray {
    /// Wraps rows after checking the strength-2 property.
    pub fn new(symbols: u32, rows: Vec<Vec<u32>>) -> Result<Self> {
        let oa = Self {
            symbols,
            rows,
            zero_row: false,
        };
        oa.check_shape()?;
        if !oa.is_strength2() {
            return Err(Error::InvalidParameter("rows do not form a strength-2 array".into()));
        }
        Ok(oa)
    }

    fn check_shape(&self) -> Result<()> {
        let n = self.runs();
        if self.rows.iter().any(|r| r.len() != n) {
            return Err(Error::ShapeMismatch("ragged array rows".into()));
        }
        if self.rows.iter().flatten().any(|&x| x >= self.symbols) {
            return Err(Error::SymbolMismatch(format!("symbol outside 0..{}", self.symbols)));
        }
        Ok(())
    }

    pub fn symbols(&self) -> u32 {
        self.symbols
    }

    /// Number of rows `m`.
    pub fn factors(&self) -> usize {
        self.rows.len()
    }

    /// Number of columns `N`.
    pub fn runs(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    pub fn strength(&self) -> u32 {
        2
    }

    pub fn rows(&self) -> &[Vec<u32>] {
        &self.rows
    }

    pub fn column(&self, l: usize) -> Vec<u32> {
        self.rows.iter().map(|r| r[l]).collect()
    }

    pub fn has_zero_row(&self) -> bool {
        self.zero_row
    }

    /// Rows subject to the strength-2 requirement.
    fn checked_rows(&self) -> &[Vec<u32>] {
        if self.zero_row {
            &self.rows[1..]
        } else {
            &self.rows
        }
    }

    /// Every checked row shows each symbol `N / s` times.
    pub fn is_balanced(&self) -> bool {
        let s = self.symbols as usize;
        let n = self.runs();
        n.is_multiple_of(s)
            && self.checked_rows().iter().all(|r| {
                let mut c = vec![0usize; s];
                r.iter().for_each(|&x| c[x as usize] += 1);
                c.iter().all(|&k| k == n / s)
            })
    }

    /// Exhaustive count: every ordered symbol pair appears `N / s^2` times in
    /// every pair of distinct checked rows.
    pub fn is_strength2(&self) -> bool {
        let s = self.symbols as usize;
        let n = self.runs();
        let rows = self.checked_rows();
        if !self.is_balanced() {
            return false;
        }
        if rows.len() < 2 {
            return true;
        }
        if !n.is_multiple_of(s * s) {
            return false;
        }
        let want = n / (s * s);
        for i in 0..rows.len() {
            for j in i + 1..rows.len() {
                let mut c = vec![0usize; s * s];
                for (&a, &b) in rows[i].iter().zip(&rows[j]) {
                    c[a as usize * s + b as usize] += 1;
                }
                if c.iter().any(|&k| k != want) {
                    return false;
                }
            }
        }
        true
    }

    pub fn to_csv(&self) -> String {
        matrix_csv(&self.rows)
    }
}

/// `OA(s^2, s+1, s, 2)`: columns indexed by `(u, v)` in `F x F` (u-major);
/// rows `u`, `v`, then `u + a v` for each nonzero `a` in label order.
pub fn oa_rao_hamming(field: &GaloisField) -> OrthogonalArray {
    let s = field.order();
    let cols: Vec<(u32, u32)> = (0..s).flat_map(|u| (0..s).map(move |v| (u, v))).collect();
    let mut rows = vec![
        cols.iter().map(|&(u, _)| u).collect::<Vec<_>>(),
        cols.iter().map(|&(_, v)| v).collect(),
    ];
    for a in 1..s {
        rows.push(cols.iter().map(|&(u, v)| field.add(u, field.mul(a, v))).collect());
    }
    OrthogonalArray {
        symbols: s,
        rows,
        zero_row: false,
    }
}

/// `OA(s^k, (s^k - 1)/(s - 1), s, 2)` from the projective points of
/// `PG(k-1, s)`. For `k = 2` this is [`oa_rao_hamming`]; for `k = 1` it is the
/// single row `0, 1, ..., s-1`.
pub fn oa_rao_hamming_dim(field: &GaloisField, k: u32) -> Result<OrthogonalArray> {
    if k == 0 {
        return Err(Error::InvalidParameter("dimension must be positive".into()));
    }
    if k == 2 {
        return Ok(oa_rao_hamming(field));
    }
    let s = field.order();
    let n = (s as u64).pow(k);
    if n > 1 << 16 {
        return Err(Error::InvalidParameter(format!("{n} runs is too large")));
    }
    let vector = |mut x: u64| -> Vec<u32> {
        let mut v = vec![0u32; k as usize];
        for slot in v.iter_mut().rev() {
            *slot = (x % s as u64) as u32;
            x /= s as u64;
        }
        v
    };
    let columns: Vec<Vec<u32>> = (0..n).map(vector).collect();
    // normalized points: first nonzero coordinate equal to 1
    let points: Vec<Vec<u32>> = columns
        .iter()
        .filter(|v| v.iter().find(|&&c| c != 0) == Some(&1))
        .cloned()
        .collect();
    let rows = points
        .iter()
        .map(|a| {
            columns
                .iter()
                .map(|x| {
                    a.iter()
                        .zip(x)
                        .fold(0, |acc, (&ai, &xi)| field.add(acc, field.mul(ai, xi)))
                })
                .collect()
        })
        .collect();
    Ok(OrthogonalArray {
        symbols: s,
        rows,
        zero_row: false,
    })
}

/// Drops the all-ones row of a normalized Hadamard matrix and maps
/// `+1 -> 0`, `-1 -> 1`, giving `h - 1` rows and `h` columns.
pub fn hadamard_to_oa(h: &HadamardMatrix) -> Result<OrthogonalArray> {
    let order = h.order();
    if order < 4 || !order.is_multiple_of(4) {
        return Err(Error::OrderTooSmall(order));
    }
    let oa = OrthogonalArray {
        symbols: 2,
        rows: binary_rows(h),
        zero_row: false,
    };
    debug_assert!(oa.is_strength2());
    Ok(oa)
}

fn binary_rows(h: &HadamardMatrix) -> Vec<Vec<u32>> {
    h.without_first_row()
        .to_rows()
        .into_iter()
        .map(|r| r.into_iter().map(|x| u32::from(x == -1)).collect())
        .collect()
}

/// Prepends an all-zero row, producing `Q(N, m + 1, s)`.
pub fn q_extend(oa: &OrthogonalArray) -> OrthogonalArray {
    let mut rows = Vec::with_capacity(oa.rows.len() + 1);
    rows.push(vec![0; oa.runs()]);
    rows.extend(oa.rows.iter().cloned());
    OrthogonalArray {
        symbols: oa.symbols,
        rows,
        zero_row: true,
    }
}

/// `Q(h, h, 2)` straight from a Hadamard matrix of any order `h >= 2`.
///
/// For `h = 2` the underlying array has a single row `(0, 1)`, which is
/// balanced; strength two is vacuous there.
pub fn q_from_hadamard(h: &HadamardMatrix) -> Result<OrthogonalArray> {
    if h.order() < 2 {
        return Err(Error::OrderTooSmall(h.order()));
    }
    let q = q_extend(&OrthogonalArray {
        symbols: 2,
        rows: binary_rows(h),
        zero_row: false,
    });
    if !q.is_strength2() {
        return Err(Error::IdentityViolation(
            "Hadamard rows are not a strength-2 array".into(),
        ));
    }
    Ok(q)
}

/// Builds an arbitrary Q-array from explicit rows (row 0 must be zero).
pub fn q_array(symbols: u32, rows: Vec<Vec<u32>>) -> Result<OrthogonalArray> {
    let q = OrthogonalArray {
        symbols,
        rows,
        zero_row: true,
    };
    q.check_shape()?;
    if q.rows.first().is_none_or(|r| r.iter().any(|&x| x != 0)) {
        return Err(Error::InvalidParameter("row 0 of a Q-array must be all zeros".into()));
    }
    Ok(q)
}

fn matrix_csv<T: ToString>(rows: &[Vec<T>]) -> String {
    let mut out = String::new();
    for r in rows {
        let cells: Vec<String> = r.iter().map(ToString::to_string).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sylvester_base_case() {
        let h = hadamard(2).unwrap();
        assert_eq!(h.entries().to_rows(), vec![vec![1, 1], vec![1, -1]]);
    }

    #[test]
    fn paley_order_12() {
        let h = hadamard(12).unwrap();
        assert!(h.is_valid());
        assert!(h.entries().row(0).iter().all(|&x| x == 1));
    }

    #[test]
    fn unsupported_orders() {
        assert!(matches!(hadamard(6), Err(Error::UnsupportedOrder { order: 6, .. })));
        assert!(matches!(hadamard(92), Err(Error::UnsupportedOrder { order: 92, .. })));
        assert!(matches!(hadamard(0), Err(Error::UnsupportedOrder { .. })));
    }

    #[test]
    fn kronecker_reachable() {
        assert!(hadamard(24).unwrap().is_valid());
        assert!(hadamard(40).unwrap().is_valid());
        assert!(hadamard(48).unwrap().is_valid());
        // Paley over a prime beyond the tabulated fields
        assert!(hadamard(140).unwrap().is_valid());
    }

    #[test]
    fn rao_hamming_small() {
        let f2 = GaloisField::new(2).unwrap();
        let oa = oa_rao_hamming(&f2);
        assert_eq!((oa.runs(), oa.factors(), oa.symbols()), (4, 3, 2));
        assert!(oa.is_strength2());
        let f3 = GaloisField::new(3).unwrap();
        let oa = oa_rao_hamming(&f3);
        assert_eq!((oa.runs(), oa.factors()), (9, 4));
        assert!(oa.is_strength2());
        let oa27 = oa_rao_hamming_dim(&f3, 3).unwrap();
        assert_eq!((oa27.runs(), oa27.factors()), (27, 13));
        assert!(oa27.is_strength2());
    }

    #[test]
    fn deleting_a_row_keeps_strength() {
        let f = GaloisField::new(5).unwrap();
        let oa = oa_rao_hamming(&f);
        for drop in 0..oa.factors() {
            let mut rows = oa.rows().to_vec();
            rows.remove(drop);
            assert!(OrthogonalArray::new(5, rows).is_ok());
        }
    }

    #[test]
    fn hadamard_oa_orders() {
        let oa4 = hadamard_to_oa(&hadamard(4).unwrap()).unwrap();
        assert_eq!((oa4.runs(), oa4.factors()), (4, 3));
        assert!(oa4.is_strength2());
        let oa8 = hadamard_to_oa(&hadamard(8).unwrap()).unwrap();
        assert_eq!((oa8.runs(), oa8.factors()), (8, 7));
        assert!(oa8.is_strength2());
        assert_eq!(hadamard_to_oa(&hadamard(2).unwrap()), Err(Error::OrderTooSmall(2)));
    }

    #[test]
    fn q_extension_shapes() {
        let q = q_extend(&hadamard_to_oa(&hadamard(4).unwrap()).unwrap());
        assert_eq!((q.runs(), q.factors()), (4, 4));
        assert_eq!(q.rows()[0], vec![0, 0, 0, 0]);
        assert!(q.has_zero_row() && q.is_strength2());

        let q9 = q_extend(&oa_rao_hamming(&GaloisField::new(3).unwrap()));
        assert_eq!((q9.runs(), q9.factors()), (9, 5));

        for h in [2, 4, 8, 12] {
            let q = q_from_hadamard(&hadamard(h).unwrap()).unwrap();
            assert_eq!((q.runs(), q.factors()), (h, h));
            assert!(q.is_balanced());
        }
    }

    #[test]
    fn q_array_requires_zero_row() {
        assert!(q_array(2, vec![vec![0, 0], vec![0, 1]]).is_ok());
        assert!(q_array(2, vec![vec![1, 0]]).is_err());
    }
}
