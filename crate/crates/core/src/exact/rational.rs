//! Scalar helpers over arbitrary precision integers and rationals.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{Integer, One, Signed, Zero};

use crate::error::{Error, Result};

pub type Int = BigInt;
pub type Rational = BigRational;
pub type RatVec = Vec<Rational>;
pub type IntVec = Vec<Int>;

pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::new(Int::from(numer), Int::from(denom))
}

pub fn ri(n: i64) -> Rational {
    Rational::from_integer(Int::from(n))
}

pub fn rvec(xs: &[i64]) -> RatVec {
    xs.iter().map(|&x| ri(x)).collect()
}

pub fn ivec(xs: &[i64]) -> IntVec {
    xs.iter().map(|&x| Int::from(x)).collect()
}

pub fn int_to_rat(v: &[Int]) -> RatVec {
    v.iter().cloned().map(Rational::from_integer).collect()
}

/// Converts a rational vector to integers, or `None` if some entry is fractional.
pub fn rat_to_int(v: &[Rational]) -> Option<IntVec> {
    v.iter().map(|x| x.is_integer().then(|| x.to_integer())).collect()
}

pub fn zero_vec(n: usize) -> RatVec {
    vec![Rational::zero(); n]
}

pub fn is_zero_vec(v: &[Rational]) -> bool {
    v.iter().all(Zero::is_zero)
}

pub fn add_vec(a: &[Rational], b: &[Rational]) -> RatVec {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn sub_vec(a: &[Rational], b: &[Rational]) -> RatVec {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn scale_vec(k: &Rational, a: &[Rational]) -> RatVec {
    a.iter().map(|x| k * x).collect()
}

pub fn neg_vec(a: &[Rational]) -> RatVec {
    a.iter().map(|x| -x).collect()
}

/// Least common multiple of the denominators.
pub fn common_denominator<'a>(xs: impl IntoIterator<Item = &'a Rational>) -> Int {
    xs.into_iter().fold(Int::one(), |acc, x| acc.lcm(x.denom()))
}

pub fn sign(x: &Rational) -> i32 {
    if x.is_positive() {
        1
    } else if x.is_negative() {
        -1
    } else {
        0
    }
}

/// Serialises as `"p/q"`, or `"p"` when the denominator is one.
pub fn format_rational(x: &Rational) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational number: {s:?}"));
    match s.split_once('/') {
        Some((p, q)) => {
            let p: Int = p.trim().parse().map_err(|_| bad())?;
            let q: Int = q.trim().parse().map_err(|_| bad())?;
            if q.is_zero() {
                return Err(Error::Parse(format!("zero denominator in {s:?}")));
            }
            Ok(Rational::new(p, q))
        }
        None => Ok(Rational::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

pub fn parse_int(s: &str) -> Result<Int> {
    s.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("not an integer: {s:?}")))
}

/// Smallest integer `>= x`.
pub fn ceil_int(x: &Rational) -> Int {
    x.ceil().to_integer()
}

/// Non-negative remainder of `a` modulo `m > 0`.
pub fn mod_floor(a: &Int, m: &Int) -> Int {
    a.mod_floor(m)
}

/// Fractional part in `[0, 1)`.
pub fn frac(x: &Rational) -> Rational {
    x - x.floor()
}
