//! Exact rational scalars and Laurent-window scalars in the formal even
//! variable `u`.
//!
//! Every dimension count in this crate ultimately reduces to arithmetic in
//! these two types, so both are kept exact: a [`Rat`] is always in lowest
//! terms with positive denominator, and a [`UWindow`] refuses to produce an
//! exponent outside its declared window instead of truncating silently.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

/// An exact rational number. Lowest terms, denominator > 0.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Rat {
    num: BigInt,
    den: BigInt,
}

impl Rat {
    pub fn new(num: BigInt, den: BigInt) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        let mut r = Rat { num, den };
        r.reduce();
        r
    }

    fn reduce(&mut self) {
        if self.num.is_zero() {
            self.den = BigInt::one();
            return;
        }
        let g = self.num.gcd(&self.den);
        if !g.is_one() {
            self.num = &self.num / &g;
            self.den = &self.den / &g;
        }
        if self.den.is_negative() {
            self.num = -std::mem::take(&mut self.num);
            self.den = -std::mem::take(&mut self.den);
        }
    }

    pub fn zero() -> Self {
        Rat { num: BigInt::zero(), den: BigInt::one() }
    }

    pub fn one() -> Self {
        Rat { num: BigInt::one(), den: BigInt::one() }
    }

    pub fn from_int(n: i64) -> Self {
        Rat { num: BigInt::from(n), den: BigInt::one() }
    }

    pub fn from_frac(num: i64, den: i64) -> Self {
        Rat::new(BigInt::from(num), BigInt::from(den))
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    pub fn is_integer(&self) -> bool {
        self.den.is_one()
    }

    pub fn numer(&self) -> &BigInt {
        &self.num
    }

    pub fn denom(&self) -> &BigInt {
        &self.den
    }

    pub fn recip(&self) -> Self {
        assert!(!self.is_zero(), "reciprocal of zero");
        Rat::new(self.den.clone(), self.num.clone())
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut acc = Rat::one();
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    /// 1/n! as an exact rational.
    pub fn inv_factorial(n: u32) -> Self {
        let mut f = BigInt::one();
        for k in 2..=n as u64 {
            f *= k;
        }
        Rat::new(BigInt::one(), f)
    }

    pub fn abs(&self) -> Self {
        Rat { num: self.num.abs(), den: self.den.clone() }
    }
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl fmt::Debug for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for Rat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if let Some((n, d)) = s.split_once('/') {
            let num: BigInt = n.trim().parse().map_err(|e| format!("bad numerator: {e}"))?;
            let den: BigInt = d.trim().parse().map_err(|e| format!("bad denominator: {e}"))?;
            if den.is_zero() {
                return Err("zero denominator".into());
            }
            Ok(Rat::new(num, den))
        } else {
            let num: BigInt = s.parse().map_err(|e| format!("bad integer: {e}"))?;
            Ok(Rat { num, den: BigInt::one() })
        }
    }
}

impl PartialOrd for Rat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Rat {
    fn cmp(&self, other: &Self) -> Ordering {
        (&self.num * &other.den).cmp(&(&other.num * &self.den))
    }
}

impl Add for &Rat {
    type Output = Rat;
    fn add(self, rhs: &Rat) -> Rat {
        Rat::new(&self.num * &rhs.den + &rhs.num * &self.den, &self.den * &rhs.den)
    }
}

impl Sub for &Rat {
    type Output = Rat;
    fn sub(self, rhs: &Rat) -> Rat {
        Rat::new(&self.num * &rhs.den - &rhs.num * &self.den, &self.den * &rhs.den)
    }
}

impl Mul for &Rat {
    type Output = Rat;
    fn mul(self, rhs: &Rat) -> Rat {
        Rat::new(&self.num * &rhs.num, &self.den * &rhs.den)
    }
}

impl Div for &Rat {
    type Output = Rat;
    fn div(self, rhs: &Rat) -> Rat {
        assert!(!rhs.is_zero(), "division by zero");
        Rat::new(&self.num * &rhs.den, &self.den * &rhs.num)
    }
}

impl Neg for &Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat { num: -self.num.clone(), den: self.den.clone() }
    }
}

macro_rules! forward_owned {
    ($trait:ident, $method:ident) => {
        impl $trait for Rat {
            type Output = Rat;
            fn $method(self, rhs: Rat) -> Rat {
                (&self).$method(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl Neg for Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        -&self
    }
}

impl AddAssign<&Rat> for Rat {
    fn add_assign(&mut self, rhs: &Rat) {
        *self = &*self + rhs;
    }
}

impl serde::Serialize for Rat {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> serde::Deserialize<'de> for Rat {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Errors raised by the windowed `u`-scalar arithmetic.
#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum ScalarError {
    #[error("u-window overflow: exponent {exponent} outside [{lo}, {hi}]")]
    WindowOverflow { exponent: i64, lo: i64, hi: i64 },
    #[error("u-window mismatch: [{0}, {1}] vs [{2}, {3}]")]
    WindowMismatch(i64, i64, i64, i64),
}

/// A Laurent polynomial in the even variable `u`, confined to a declared
/// exponent window.  Arithmetic that would leave the window is an error,
/// never a silent truncation.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct UWindow {
    lo: i64,
    hi: i64,
    coeffs: BTreeMap<i64, Rat>,
}

impl UWindow {
    pub fn zero(lo: i64, hi: i64) -> Self {
        assert!(lo <= hi, "empty u-window");
        UWindow { lo, hi, coeffs: BTreeMap::new() }
    }

    pub fn constant(lo: i64, hi: i64, c: Rat) -> Result<Self, ScalarError> {
        Self::monomial(lo, hi, 0, c)
    }

    pub fn monomial(lo: i64, hi: i64, exp: i64, c: Rat) -> Result<Self, ScalarError> {
        let mut w = Self::zero(lo, hi);
        if !c.is_zero() {
            if exp < lo || exp > hi {
                return Err(ScalarError::WindowOverflow { exponent: exp, lo, hi });
            }
            w.coeffs.insert(exp, c);
        }
        Ok(w)
    }

    pub fn window(&self) -> (i64, i64) {
        (self.lo, self.hi)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, exp: i64) -> Rat {
        self.coeffs.get(&exp).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&i64, &Rat)> {
        self.coeffs.iter()
    }

    fn check_same(&self, rhs: &Self) -> Result<(), ScalarError> {
        if self.lo != rhs.lo || self.hi != rhs.hi {
            return Err(ScalarError::WindowMismatch(self.lo, self.hi, rhs.lo, rhs.hi));
        }
        Ok(())
    }

    pub fn add(&self, rhs: &Self) -> Result<Self, ScalarError> {
        self.check_same(rhs)?;
        let mut out = self.clone();
        for (e, c) in &rhs.coeffs {
            let v = out.coeffs.entry(*e).or_insert_with(Rat::zero);
            *v += c;
            if v.is_zero() {
                out.coeffs.remove(e);
            }
        }
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        for c in out.coeffs.values_mut() {
            *c = -&*c;
        }
        out
    }

    pub fn mul(&self, rhs: &Self) -> Result<Self, ScalarError> {
        self.check_same(rhs)?;
        let mut out = Self::zero(self.lo, self.hi);
        for (ea, ca) in &self.coeffs {
            for (eb, cb) in &rhs.coeffs {
                let e = ea + eb;
                if e < self.lo || e > self.hi {
                    return Err(ScalarError::WindowOverflow { exponent: e, lo: self.lo, hi: self.hi });
                }
                let v = out.coeffs.entry(e).or_insert_with(Rat::zero);
                *v += &(ca * cb);
                if v.is_zero() {
                    out.coeffs.remove(&e);
                }
            }
        }
        Ok(out)
    }

    /// Multiply by `u^k`, shifting every exponent.
    pub fn shift(&self, k: i64) -> Result<Self, ScalarError> {
        let mut out = Self::zero(self.lo, self.hi);
        for (e, c) in &self.coeffs {
            let ne = e + k;
            if ne < self.lo || ne > self.hi {
                return Err(ScalarError::WindowOverflow { exponent: ne, lo: self.lo, hi: self.hi });
            }
            out.coeffs.insert(ne, c.clone());
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Rat) -> Self {
        if c.is_zero() {
            return Self::zero(self.lo, self.hi);
        }
        let mut out = self.clone();
        for v in out.coeffs.values_mut() {
            *v = &*v * c;
        }
        out
    }

    /// Evaluate at a nonzero rational sample point.
    pub fn eval(&self, at: &Rat) -> Rat {
        assert!(!at.is_zero(), "u-sample must be nonzero");
        let mut acc = Rat::zero();
        for (e, c) in &self.coeffs {
            let p = if *e >= 0 { at.pow(*e as u32) } else { at.recip().pow((-e) as u32) };
            acc += &(c * &p);
        }
        acc
    }

    /// Largest u-degree occurring, if nonzero.
    pub fn max_exp(&self) -> Option<i64> {
        self.coeffs.keys().next_back().copied()
    }

    pub fn min_exp(&self) -> Option<i64> {
        self.coeffs.keys().next().copied()
    }
}

impl fmt::Display for UWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in &self.coeffs {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match e {
                0 => write!(f, "{c}")?,
                1 => write!(f, "{c}*u")?,
                _ => write!(f, "{c}*u^{e}")?,
            }
        }
        Ok(())
    }
}
