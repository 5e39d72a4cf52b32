//! Exact arithmetic in `Z_m` and complex roots of unity.
//!
//! Phase exponents throughout the crate live in `Z_{2d}`: an exponent `k`
//! stands for `exp(πik/d)`, i.e. `ω^{k/2}` with `ω = exp(2πi/d)`. Odd-`d`
//! code paths embed a `Z_d` exponent `j` as `2j`.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use thiserror::Error;

/// Largest supported dimension. Products of two reduced representatives
/// modulo `2 * MAX_DIM` fit comfortably in a `u64`.
pub const MAX_DIM: u64 = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModError {
    #[error("modulus must be positive")]
    ZeroModulus,
    #[error("no inverse of 2 in Z_{0}")]
    NoInverseOfTwo(u64),
    #[error("dimension {0} exceeds the supported maximum {MAX_DIM}")]
    DimensionTooLarge(u64),
}

/// An element of `Z_m`, always stored reduced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ModInt {
    value: u64,
    modulus: u64,
}

impl ModInt {
    /// Builds `x mod m`. Panics on `m == 0`; use [`mod_reduce`] for a checked form.
    pub fn new(x: i64, m: u64) -> Self {
        mod_reduce(x, m).expect("modulus must be positive")
    }

    pub fn zero(m: u64) -> Self {
        Self::new(0, m)
    }

    pub fn value(self) -> u64 {
        self.value
    }

    pub fn modulus(self) -> u64 {
        self.modulus
    }

    /// Reinterpret as an element of another ring by canonical lifting.
    pub fn lift_to(self, m: u64) -> Self {
        Self::new(self.value as i64, m)
    }

    /// Multiplicative inverse, if `gcd(value, modulus) = 1`.
    pub fn inverse(self) -> Option<Self> {
        let (g, x, _) = ext_gcd(self.value as i64, self.modulus as i64);
        if g == 1 {
            Some(Self::new(x, self.modulus))
        } else {
            None
        }
    }

    pub fn pow(self, mut e: u64) -> Self {
        let mut base = self;
        let mut acc = Self::new(1, self.modulus);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        acc
    }

    fn check_same(self, other: Self) {
        assert_eq!(
            self.modulus, other.modulus,
            "ModInt operands carry different moduli"
        );
    }
}

impl fmt::Display for ModInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {})", self.value, self.modulus)
    }
}

impl Add for ModInt {
    type Output = ModInt;
    fn add(self, rhs: Self) -> Self {
        self.check_same(rhs);
        ModInt {
            value: (self.value + rhs.value) % self.modulus,
            modulus: self.modulus,
        }
    }
}

impl Sub for ModInt {
    type Output = ModInt;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Neg for ModInt {
    type Output = ModInt;
    fn neg(self) -> Self {
        ModInt {
            value: (self.modulus - self.value) % self.modulus,
            modulus: self.modulus,
        }
    }
}

impl Mul for ModInt {
    type Output = ModInt;
    fn mul(self, rhs: Self) -> Self {
        self.check_same(rhs);
        ModInt {
            value: ((self.value as u128 * rhs.value as u128) % self.modulus as u128) as u64,
            modulus: self.modulus,
        }
    }
}

/// Canonical representative of `x` modulo `m`.
pub fn mod_reduce(x: i64, m: u64) -> Result<ModInt, ModError> {
    if m == 0 {
        return Err(ModError::ZeroModulus);
    }
    let value = (x as i128).rem_euclid(m as i128) as u64;
    Ok(ModInt { value, modulus: m })
}

/// The inverse of 2 in `Z_d`, which exists exactly when `d` is odd.
pub fn inv2(d: u64) -> Result<ModInt, ModError> {
    if d == 0 {
        return Err(ModError::ZeroModulus);
    }
    if d.is_multiple_of(2) {
        return Err(ModError::NoInverseOfTwo(d));
    }
    Ok(ModInt::new(d.div_ceil(2) as i64, d))
}

/// `exp(πik/d)`, the `k`-th power of the primitive `2d`-th root of unity.
///
/// `k` must carry modulus `2d`.
pub fn omega_power(k: ModInt, d: u64) -> Complex64 {
    assert_eq!(k.modulus, 2 * d, "phase exponent must live in Z_2d");
    root_of_unity(k.value, 2 * d)
}

/// `exp(2πik/n)` with `k` reduced first so the angle stays in `[0, 2π)`.
pub fn root_of_unity(k: u64, n: u64) -> Complex64 {
    let k = k % n;
    // exact values at the quarter turns keep products of phases clean
    if 4 * k == n {
        return Complex64::new(0.0, 1.0);
    }
    if 2 * k == n {
        return Complex64::new(-1.0, 0.0);
    }
    if 4 * k == 3 * n {
        return Complex64::new(0.0, -1.0);
    }
    if k == 0 {
        return Complex64::new(1.0, 0.0);
    }
    Complex64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64)
}

/// Nearest `Z_{2d}` exponent to a unit-modulus complex number, with its angular distance.
pub fn snap_to_root(z: Complex64, d: u64) -> (ModInt, f64) {
    let n = 2 * d;
    let turns = z.arg() / (2.0 * PI) * n as f64;
    let k = turns.round();
    let dist = (turns - k).abs() * 2.0 * PI / n as f64;
    (ModInt::new(k as i64, n), dist)
}

/// Extended Euclid on signed integers: returns `(g, x, y)` with `ax + by = g >= 0`.
pub fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    let (mut old_r, mut r) = (a, b);
    let (mut old_s, mut s) = (1i64, 0i64);
    let (mut old_t, mut t) = (0i64, 1i64);
    while r != 0 {
        let q = old_r.div_euclid(r);
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
        (old_t, t) = (t, old_t - q * t);
    }
    if old_r < 0 {
        (-old_r, -old_s, -old_t)
    } else {
        (old_r, old_s, old_t)
    }
}

pub fn gcd(a: u64, b: u64) -> u64 {
    let (mut a, mut b) = (a, b);
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut f = 2;
    while f * f <= n {
        if n.is_multiple_of(f) {
            return false;
        }
        f += 1;
    }
    true
}

/// Rejects dimensions outside `1..=MAX_DIM`.
pub fn check_dim(d: u64) -> Result<(), ModError> {
    if d == 0 {
        Err(ModError::ZeroModulus)
    } else if d > MAX_DIM {
        Err(ModError::DimensionTooLarge(d))
    } else {
        Ok(())
    }
}
