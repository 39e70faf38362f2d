//! Exact rank, inverses, generalized inverses and orthogonal projectors.
//!
//! A g-inverse is built from a nonsingular pivot submatrix: elimination picks
//! pivots by a fixed scan order, `W = M[R, C]` is inverted exactly and placed
//! at the transposed position of an otherwise zero matrix. This satisfies
//! `M G M = M` for any rank.

use num_rational::BigRational;
use num_traits::Zero;

use super::matrix::RationalMatrix;
use crate::error::{Error, Result};

/// Scan order used to select elimination pivots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PivotRule {
    /// First nonzero entry in row-major order (the default).
    #[default]
    RowMajor,
    /// First nonzero entry scanning rows bottom-up and columns right-to-left.
    ReverseRowMajor,
}

/// Row and column indices of the pivots found by elimination.
pub fn pivots(m: &RationalMatrix, rule: PivotRule) -> (Vec<usize>, Vec<usize>) {
    let (rows, cols) = m.shape();
    let mut work = m.clone();
    let mut used_r = vec![false; rows];
    let mut used_c = vec![false; cols];
    let mut pr = Vec::new();
    let mut pc = Vec::new();
    loop {
        let found = {
            let row_iter: Box<dyn Iterator<Item = usize>> = match rule {
                PivotRule::RowMajor => Box::new(0..rows),
                PivotRule::ReverseRowMajor => Box::new((0..rows).rev()),
            };
            let mut hit = None;
            'scan: for i in row_iter.filter(|&i| !used_r[i]) {
                let col_iter: Box<dyn Iterator<Item = usize>> = match rule {
                    PivotRule::RowMajor => Box::new(0..cols),
                    PivotRule::ReverseRowMajor => Box::new((0..cols).rev()),
                };
                for j in col_iter.filter(|&j| !used_c[j]) {
                    if !work[(i, j)].is_zero() {
                        hit = Some((i, j));
                        break 'scan;
                    }
                }
            }
            hit
        };
        let Some((pi, pj)) = found else { break };
        used_r[pi] = true;
        used_c[pj] = true;
        pr.push(pi);
        pc.push(pj);
        let piv = work[(pi, pj)].clone();
        for i in 0..rows {
            if used_r[i] || work[(i, pj)].is_zero() {
                continue;
            }
            let f = &work[(i, pj)] / &piv;
            for j in 0..cols {
                if used_c[j] && j != pj {
                    continue;
                }
                let delta = &f * &work[(pi, j)];
                work[(i, j)] -= delta;
            }
        }
    }
    (pr, pc)
}

pub fn rank(m: &RationalMatrix) -> usize {
    pivots(m, PivotRule::RowMajor).0.len()
}

/// Exact inverse of a square matrix, `None` when singular.
pub fn inverse(m: &RationalMatrix) -> Option<RationalMatrix> {
    let n = m.rows();
    assert_eq!(n, m.cols(), "inverse of a non-square matrix");
    let mut a = m.clone();
    let mut inv = RationalMatrix::identity(n);
    for col in 0..n {
        let p = (col..n).find(|&r| !a[(r, col)].is_zero())?;
        if p != col {
            for j in 0..n {
                let t = a[(p, j)].clone();
                a[(p, j)] = a[(col, j)].clone();
                a[(col, j)] = t;
                let t = inv[(p, j)].clone();
                inv[(p, j)] = inv[(col, j)].clone();
                inv[(col, j)] = t;
            }
        }
        let piv = a[(col, col)].recip();
        for j in 0..n {
            a[(col, j)] *= &piv;
            inv[(col, j)] *= &piv;
        }
        for r in 0..n {
            if r == col || a[(r, col)].is_zero() {
                continue;
            }
            let f = a[(r, col)].clone();
            for j in 0..n {
                let da = &f * &a[(col, j)];
                a[(r, j)] -= da;
                let di = &f * &inv[(col, j)];
                inv[(r, j)] -= di;
            }
        }
    }
    Some(inv)
}

/// A g-inverse `G` with `M G M = M`, pivots chosen row-major.
pub fn g_inverse(m: &RationalMatrix) -> RationalMatrix {
    g_inverse_with(m, PivotRule::RowMajor)
}

pub fn g_inverse_with(m: &RationalMatrix, rule: PivotRule) -> RationalMatrix {
    let (pr, pc) = pivots(m, rule);
    let mut g = RationalMatrix::zeros(m.cols(), m.rows());
    if pr.is_empty() {
        return g;
    }
    let w = m.select(&pr, &pc);
    let w_inv = inverse(&w).expect("pivot submatrix is nonsingular");
    for (a, &c) in pc.iter().enumerate() {
        for (b, &r) in pr.iter().enumerate() {
            g[(c, r)] = w_inv[(a, b)].clone();
        }
    }
    g
}

/// Moore-Penrose inverse via a full-rank factorization `M = F K`.
pub fn moore_penrose(m: &RationalMatrix) -> RationalMatrix {
    let (pr, pc) = pivots(m, PivotRule::RowMajor);
    if pr.is_empty() {
        return RationalMatrix::zeros(m.cols(), m.rows());
    }
    let all_rows: Vec<usize> = (0..m.rows()).collect();
    let f = m.select(&all_rows, &pc);
    let ft = f.transpose();
    let ftf_inv = inverse(&ft.mul(&f)).expect("full column rank");
    let k = ftf_inv.mul(&ft).mul(m);
    let kt = k.transpose();
    let kkt_inv = inverse(&k.mul(&kt)).expect("full row rank");
    kt.mul(&kkt_inv).mul(&ftf_inv).mul(&ft)
}

/// Orthogonal projector onto a column space, exactly symmetric and idempotent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Projector(RationalMatrix);

impl Projector {
    pub fn matrix(&self) -> &RationalMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> RationalMatrix {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    /// `I - P`.
    pub fn complement(&self) -> RationalMatrix {
        RationalMatrix::identity(self.dim()).sub(&self.0)
    }

    pub fn is_valid(&self) -> bool {
        self.0.is_symmetric() && self.0.mul(&self.0) == self.0
    }
}

/// `P_M = M (M'M)^- M'`. A matrix with no columns projects onto `{0}`.
pub fn projector(m: &RationalMatrix) -> Projector {
    projector_with(m, PivotRule::RowMajor)
}

pub fn projector_with(m: &RationalMatrix, rule: PivotRule) -> Projector {
    let n = m.rows();
    if m.cols() == 0 {
        return Projector(RationalMatrix::zeros(n, n));
    }
    let mt = m.transpose();
    let g = g_inverse_with(&mt.mul(m), rule);
    Projector(m.mul(&g).mul(&mt))
}

/// Returns `P_Z` for `Z = (I - P_V) U` after checking `P_[U,V] = P_V + P_Z`.
pub fn projector_decompose(u: &RationalMatrix, v: &RationalMatrix) -> Result<Projector> {
    if u.rows() != v.rows() {
        return Err(Error::DimensionMismatch(format!(
            "U has {} rows but V has {}",
            u.rows(),
            v.rows()
        )));
    }
    let pv = projector(v);
    let z = pv.complement().mul(u);
    let pz = projector(&z);
    let pw = projector(&u.hcat(v));
    if pw.matrix() != &pv.matrix().add(pz.matrix()) {
        return Err(Error::IdentityViolation("P_[U,V] differs from P_V + P_Z".into()));
    }
    Ok(pz)
}

/// `x' A x` for a vector `x`.
pub fn quadratic_form(a: &RationalMatrix, x: &[BigRational]) -> BigRational {
    assert_eq!(a.rows(), x.len());
    assert_eq!(a.cols(), x.len());
    let mut acc = BigRational::zero();
    for (i, xi) in x.iter().enumerate() {
        if xi.is_zero() {
            continue;
        }
        let mut row = BigRational::zero();
        for (j, xj) in x.iter().enumerate() {
            if !xj.is_zero() && !a[(i, j)].is_zero() {
                row += &a[(i, j)] * xj;
            }
        }
        acc += xi * row;
    }
    acc
}

pub fn column(x: &[BigRational]) -> RationalMatrix {
    RationalMatrix::from_vec(x.len(), 1, x.to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::matrix::{rat, ratio};

    #[test]
    fn g_inverse_of_identity_and_diagonal() {
        let i3 = RationalMatrix::identity(3);
        assert_eq!(g_inverse(&i3), i3);
        let d = RationalMatrix::diag(&[rat(2), rat(0)]);
        let g = g_inverse(&d);
        assert_eq!(g, RationalMatrix::diag(&[ratio(1, 2), rat(0)]));
        assert_eq!(d.mul(&g).mul(&d), d);
    }

    #[test]
    fn g_inverse_rank_deficient() {
        let m = RationalMatrix::from_rows(&[
            vec![rat(1), rat(2), rat(3)],
            vec![rat(2), rat(4), rat(6)],
            vec![rat(0), rat(1), ratio(1, 2)],
            vec![rat(1), rat(3), ratio(7, 2)],
        ]);
        assert_eq!(rank(&m), 2);
        for rule in [PivotRule::RowMajor, PivotRule::ReverseRowMajor] {
            let g = g_inverse_with(&m, rule);
            assert_eq!(m.mul(&g).mul(&m), m);
        }
        let mp = moore_penrose(&m);
        assert_eq!(m.mul(&mp).mul(&m), m);
        assert_eq!(mp.mul(&m).mul(&mp), mp);
        assert!(m.mul(&mp).is_symmetric());
    }

    #[test]
    fn mean_projector() {
        let ones = RationalMatrix::ones(4, 1);
        let p = projector(&ones);
        assert_eq!(p.matrix(), &RationalMatrix::ones(4, 4).scale(&ratio(1, 4)));
        assert!(p.is_valid());
    }

    #[test]
    fn decompose_degenerate_cases() {
        let u = RationalMatrix::from_rows(&[vec![rat(1)], vec![rat(2)], vec![rat(0)]]);
        let empty = RationalMatrix::zeros(3, 0);
        assert_eq!(projector_decompose(&u, &empty).unwrap(), projector(&u));
        let v = u
            .scale(&rat(3))
            .hcat(&RationalMatrix::identity(3).select(&[0, 1, 2], &[2]));
        let pz = projector_decompose(&u, &v).unwrap();
        assert!(pz.matrix().is_zero());
    }

    #[test]
    fn inverse_singular() {
        let m = RationalMatrix::from_rows(&[vec![rat(1), rat(2)], vec![rat(2), rat(4)]]);
        assert!(inverse(&m).is_none());
    }
}
