//! Table-driven arithmetic in GF(p^k) for every prime power up to 128.
//!
//! An element label encodes the coefficient vector of its polynomial
//! representative in base p, constant term least significant. Label 0 is the
//! additive identity and label 1 the multiplicative identity. Extension fields
//! use a fixed Conway polynomial per order, so labels are reproducible.

use crate::error::{Error, Result};

/// Largest supported field order.
pub const MAX_ORDER: u32 = 128;

/// Conway polynomials for the non-prime orders, as `(order, p, coefficients)`.
/// Coefficients run from x^0 up to x^(k-1); the leading x^k is implied.
const CONWAY: &[(u32, u32, &[u32])] = &[
    (4, 2, &[1, 1]),
    (8, 2, &[1, 1, 0]),
    (16, 2, &[1, 1, 0, 0]),
    (32, 2, &[1, 0, 1, 0, 0]),
    (64, 2, &[1, 1, 0, 1, 1, 0]),
    (128, 2, &[1, 1, 0, 0, 0, 0, 0]),
    (9, 3, &[2, 2]),
    (27, 3, &[1, 2, 0]),
    (81, 3, &[2, 0, 0, 2]),
    (25, 5, &[2, 4]),
    (125, 5, &[3, 3, 0]),
    (49, 7, &[3, 6]),
    (121, 11, &[2, 7]),
];

pub(crate) fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Splits `n` as `p^k` when it is a prime power.
pub fn prime_power(n: u64) -> Option<(u64, u32)> {
    if n < 2 {
        return None;
    }
    let p = (2..=n).find(|d| n.is_multiple_of(*d))?;
    let mut m = n;
    let mut k = 0;
    while m.is_multiple_of(p) {
        m /= p;
        k += 1;
    }
    (m == 1).then_some((p, k))
}

/// A finite field with precomputed addition and multiplication tables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GaloisField {
    order: u32,
    characteristic: u32,
    degree: u32,
    modulus: Vec<u32>,
    add: Vec<u8>,
    mul: Vec<u8>,
    neg: Vec<u8>,
    inv: Vec<u8>,
}

/// The partition of the nonzero elements of an odd-order field into squares
/// and non-squares.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SquareClasses {
    /// Nonzero squares, ascending.
    pub c0: Vec<u32>,
    /// Nonzero non-squares, ascending.
    pub c1: Vec<u32>,
}

impl SquareClasses {
    pub fn is_square(&self, x: u32) -> bool {
        self.c0.binary_search(&x).is_ok()
    }

    pub fn is_non_square(&self, x: u32) -> bool {
        self.c1.binary_search(&x).is_ok()
    }
}

impl GaloisField {
    pub fn new(order: u32) -> Result<Self> {
        let (p, k) = prime_power(order as u64).ok_or(Error::NotAPrimePower(order as u64))?;
        if order > MAX_ORDER {
            return Err(Error::UnsupportedOrder {
                order: order as u64,
                reason: format!("fields are tabulated only up to order {MAX_ORDER}"),
            });
        }
        let p = p as u32;
        let modulus: Vec<u32> = if k == 1 {
            Vec::new()
        } else {
            CONWAY
                .iter()
                .find(|(q, _, _)| *q == order)
                .map(|(_, _, c)| c.to_vec())
                .ok_or_else(|| Error::UnsupportedOrder {
                    order: order as u64,
                    reason: "no modulus polynomial tabulated".into(),
                })?
        };

        let s = order as usize;
        let digits = |mut x: u32| -> Vec<u32> {
            let mut d = vec![0; k as usize];
            for slot in d.iter_mut() {
                *slot = x % p;
                x /= p;
            }
            d
        };
        let label = |d: &[u32]| -> u32 { d.iter().rev().fold(0, |acc, &c| acc * p + c) };

        let mut add = vec![0u8; s * s];
        let mut mul = vec![0u8; s * s];
        for a in 0..order {
            let da = digits(a);
            for b in 0..order {
                let db = digits(b);
                let sum: Vec<u32> = da.iter().zip(&db).map(|(x, y)| (x + y) % p).collect();
                add[a as usize * s + b as usize] = label(&sum) as u8;
                let prod = if k == 1 {
                    (a * b) % p
                } else {
                    label(&poly_mul_mod(&da, &db, &modulus, p))
                };
                mul[a as usize * s + b as usize] = prod as u8;
            }
        }
        let mut neg = vec![0u8; s];
        let mut inv = vec![0u8; s];
        for a in 0..s {
            neg[a] = (0..s).find(|&b| add[a * s + b] == 0).expect("additive inverse") as u8;
            if a != 0 {
                inv[a] = (1..s).find(|&b| mul[a * s + b] == 1).expect("multiplicative inverse") as u8;
            }
        }
        Ok(Self {
            order,
            characteristic: p,
            degree: k,
            modulus,
            add,
            mul,
            neg,
            inv,
        })
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn characteristic(&self) -> u32 {
        self.characteristic
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    /// Low-order coefficients of the modulus polynomial (empty for prime fields).
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    /// Human-readable modulus identifier, e.g. `x^2 + x + 1 over GF(2)`.
    pub fn modulus_name(&self) -> String {
        if self.degree == 1 {
            return format!("integers mod {}", self.characteristic);
        }
        let mut terms = vec![format!("x^{}", self.degree)];
        for (i, &c) in self.modulus.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            let mono = match i {
                0 => String::new(),
                1 => "x".to_string(),
                _ => format!("x^{i}"),
            };
            terms.push(match (c, mono.is_empty()) {
                (_, true) => c.to_string(),
                (1, false) => mono,
                (_, false) => format!("{c}{mono}"),
            });
        }
        format!("{} over GF({})", terms.join(" + "), self.characteristic)
    }

    pub fn elements(&self) -> impl Iterator<Item = u32> {
        0..self.order
    }

    #[inline]
    fn idx(&self, a: u32, b: u32) -> usize {
        assert!(
            a < self.order && b < self.order,
            "label out of range for GF({})",
            self.order
        );
        a as usize * self.order as usize + b as usize
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        self.add[self.idx(a, b)] as u32
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        self.mul[self.idx(a, b)] as u32
    }

    #[inline]
    pub fn neg(&self, a: u32) -> u32 {
        self.neg[a as usize] as u32
    }

    #[inline]
    pub fn sub(&self, a: u32, b: u32) -> u32 {
        self.add(a, self.neg(b))
    }

    pub fn inv(&self, a: u32) -> Result<u32> {
        if a == 0 {
            return Err(Error::ZeroInverse);
        }
        Ok(self.inv[a as usize] as u32)
    }

    pub fn pow(&self, a: u32, e: u32) -> u32 {
        (0..e).fold(1, |acc, _| self.mul(acc, a))
    }

    /// Splits the nonzero elements into squares and non-squares.
    pub fn square_classes(&self) -> Result<SquareClasses> {
        if self.characteristic == 2 {
            return Err(Error::EvenCharacteristic(self.order));
        }
        let mut is_sq = vec![false; self.order as usize];
        for x in 1..self.order {
            is_sq[self.mul(x, x) as usize] = true;
        }
        let (c0, c1) = (1..self.order).partition(|&x| is_sq[x as usize]);
        Ok(SquareClasses { c0, c1 })
    }
}

fn poly_mul_mod(a: &[u32], b: &[u32], modulus: &[u32], p: u32) -> Vec<u32> {
    let k = modulus.len();
    let mut prod = vec![0u32; 2 * k - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x * y) % p;
        }
    }
    // x^k = -(m_0 + m_1 x + ... + m_{k-1} x^{k-1})
    for deg in (k..prod.len()).rev() {
        let c = prod[deg];
        if c == 0 {
            continue;
        }
        prod[deg] = 0;
        for (i, &m) in modulus.iter().enumerate() {
            let t = deg - k + i;
            prod[t] = (prod[t] + (p - m % p) * c) % p;
        }
    }
    prod.truncate(k);
    prod
}

/// All prime powers accepted by [`GaloisField::new`].
pub fn supported_orders() -> Vec<u32> {
    (2..=MAX_ORDER).filter(|&q| prime_power(q as u64).is_some()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gf3_arithmetic() {
        let f = GaloisField::new(3).unwrap();
        assert_eq!(f.add(2, 2), 1);
        assert_eq!(f.mul(2, 2), 1);
    }

    #[test]
    fn gf4_uses_x2_x_1() {
        let f = GaloisField::new(4).unwrap();
        // x * x = x + 1
        assert_eq!(f.mul(2, 2), 3);
        assert_eq!(f.modulus_name(), "x^2 + x + 1 over GF(2)");
    }

    #[test]
    fn rejects_non_prime_powers() {
        assert_eq!(GaloisField::new(6), Err(Error::NotAPrimePower(6)));
        assert_eq!(GaloisField::new(1), Err(Error::NotAPrimePower(1)));
        assert!(matches!(
            GaloisField::new(131),
            Err(Error::UnsupportedOrder { order: 131, .. })
        ));
    }

    #[test]
    fn element_ops() {
        let f7 = GaloisField::new(7).unwrap();
        assert_eq!(f7.inv(3).unwrap(), 5);
        assert_eq!(f7.inv(0), Err(Error::ZeroInverse));
        let f9 = GaloisField::new(9).unwrap();
        assert!(f9.elements().all(|a| f9.add(a, 0) == a));
        let f2 = GaloisField::new(2).unwrap();
        assert_eq!(f2.neg(1), 1);
        assert_eq!(f7.sub(2, 5), 4);
    }

    #[test]
    fn square_classes_small_fields() {
        let f3 = GaloisField::new(3).unwrap().square_classes().unwrap();
        assert_eq!((f3.c0, f3.c1), (vec![1], vec![2]));
        let f7 = GaloisField::new(7).unwrap().square_classes().unwrap();
        assert_eq!((f7.c0, f7.c1), (vec![1, 2, 4], vec![3, 5, 6]));
        let f11 = GaloisField::new(11).unwrap().square_classes().unwrap();
        assert!(f11.is_non_square(10));
        assert_eq!(
            GaloisField::new(8).unwrap().square_classes(),
            Err(Error::EvenCharacteristic(8))
        );
    }

    #[test]
    fn extension_moduli_are_primitive() {
        for &(q, p, _) in CONWAY {
            let f = GaloisField::new(q).unwrap();
            // label p encodes the polynomial x
            let x = p;
            let mut acc = 1;
            let mut ord = 0;
            loop {
                acc = f.mul(acc, x);
                ord += 1;
                if acc == 1 {
                    break;
                }
            }
            assert_eq!(ord, q - 1, "x is not primitive in GF({q})");
        }
    }

    #[test]
    fn construction_is_deterministic() {
        assert_eq!(GaloisField::new(27).unwrap(), GaloisField::new(27).unwrap());
    }

    #[test]
    fn supported_order_table() {
        let orders = supported_orders();
        assert!(orders.contains(&128) && orders.contains(&121) && orders.contains(&127));
        assert!(!orders.contains(&6) && !orders.contains(&100));
    }
}
