//! Exact rational scalars and the comparison helpers used everywhere else.
//!
//! All geometric quantities in this crate are held as [`Rat`] values
//! (arbitrary-precision, canonically reduced, positive denominator).
//! Irrational quantities such as Euclidean norms, fractional powers of
//! minima products, and pi never appear directly: comparisons against them
//! are decided by squaring, cross-powering to integer exponents, or interval
//! enclosures computed here.

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;

use crate::error::{Error, Result};

pub type Rat = BigRational;
pub type Int = BigInt;

pub fn int(n: i64) -> Int {
    Int::from(n)
}

pub fn rat(n: i64) -> Rat {
    Rat::from_integer(int(n))
}

pub fn ratio(num: i64, den: i64) -> Rat {
    Rat::new(int(num), int(den))
}

pub fn rat_of(n: &Int) -> Rat {
    Rat::from_integer(n.clone())
}

/// Parses the grammar: optional sign, decimal integer, optional `/` and a
/// positive decimal integer.
pub fn parse_rat(s: &str) -> Result<Rat> {
    let s = s.trim();
    let bad = || Error::Parse(format!("invalid rational {s:?}"));
    let (num_str, den_str) = match s.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (s, None),
    };
    let valid_int = |t: &str, allow_sign: bool| -> bool {
        let digits = if allow_sign {
            t.strip_prefix(['+', '-']).unwrap_or(t)
        } else {
            t
        };
        !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
    };
    if !valid_int(num_str, true) {
        return Err(bad());
    }
    let num: Int = num_str.parse().map_err(|_| bad())?;
    let den: Int = match den_str {
        Some(d) => {
            if !valid_int(d, false) {
                return Err(bad());
            }
            d.parse().map_err(|_| bad())?
        }
        None => Int::one(),
    };
    if den.is_zero() || den.is_negative() {
        return Err(bad());
    }
    Ok(Rat::new(num, den))
}

/// Formats as `p` when the denominator is 1, otherwise `p/q`.
pub fn fmt_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Out-of-range for f64; saturate with the right sign.
        if r.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

pub fn floor_int(r: &Rat) -> Int {
    r.floor().to_integer()
}

pub fn ceil_int(r: &Rat) -> Int {
    r.ceil().to_integer()
}

/// Nearest integer, ties rounded up (floor of r + 1/2). Deterministic.
pub fn round_half_up(r: &Rat) -> Int {
    floor_int(&(r + ratio(1, 2)))
}

/// Integer power with a non-negative exponent.
pub fn pow_u(base: &Rat, exp: u32) -> Rat {
    let mut acc = Rat::one();
    let mut b = base.clone();
    let mut e = exp;
    while e > 0 {
        if e & 1 == 1 {
            acc *= &b;
        }
        e >>= 1;
        if e > 0 {
            b = &b * &b;
        }
    }
    acc
}

pub fn pow_int_u(base: &Int, exp: u32) -> Int {
    base.pow(exp)
}

/// Floor integer square root of a non-negative integer.
pub fn isqrt(n: &Int) -> Int {
    num_integer::Roots::sqrt(n)
}

/// Sign of `a + b*sqrt(s)` for rational a, b and s >= 0. Exact.
pub fn cmp_surd(a: &Rat, b: &Rat, s: &Rat) -> Ordering {
    assert!(!s.is_negative(), "surd radicand must be non-negative");
    if b.is_zero() || s.is_zero() {
        return a.cmp(&Rat::zero());
    }
    if a.is_zero() {
        return b.cmp(&Rat::zero());
    }
    match (a.is_positive(), b.is_positive()) {
        (true, true) => Ordering::Greater,
        (false, false) => Ordering::Less,
        (true, false) => {
            // a vs |b| sqrt(s): compare a^2 vs b^2 s
            (a * a).cmp(&(b * b * s))
        }
        (false, true) => (b * b * s).cmp(&(a * a)),
    }
}

/// Rational enclosure `[lo, hi]` of sqrt(x) with `hi - lo <= 10^-digits`.
pub fn sqrt_interval(x: &Rat, digits: u32) -> (Rat, Rat) {
    assert!(!x.is_negative());
    if x.is_zero() {
        return (Rat::zero(), Rat::zero());
    }
    let scale = pow_int_u(&int(10), digits);
    // sqrt(p/q) = sqrt(p*q)/q
    let p = x.numer();
    let q = x.denom();
    let lo_num = isqrt(&(p * q * &scale * &scale));
    let den = q * &scale;
    let lo = Rat::new(lo_num.clone(), den.clone());
    if &lo * &lo == *x {
        return (lo.clone(), lo);
    }
    let hi = Rat::new(lo_num + 1, den);
    (lo, hi)
}

/// First 38 significant digits of pi as a rational enclosure.
pub fn pi_interval() -> (Rat, Rat) {
    let den = pow_int_u(&int(10), 37);
    let lo: Int = "31415926535897932384626433832795028841".parse().unwrap();
    let hi: Int = &lo + 1;
    (Rat::new(lo, den.clone()), Rat::new(hi, den))
}

fn le_center_plus_sqrt(x: &Int, center: &Rat, radius_sq: &Rat) -> bool {
    // x <= center + sqrt(radius_sq)
    let xr = rat_of(x);
    if xr <= *center {
        return true;
    }
    let d = &xr - center;
    &d * &d <= *radius_sq
}

fn ge_center_minus_sqrt(x: &Int, center: &Rat, radius_sq: &Rat) -> bool {
    // x >= center - sqrt(radius_sq)
    let xr = rat_of(x);
    if xr >= *center {
        return true;
    }
    let d = center - &xr;
    &d * &d <= *radius_sq
}

/// Largest integer `x` with `x <= center + sqrt(radius_sq)`; exact.
pub fn shifted_sqrt_floor(center: &Rat, radius_sq: &Rat) -> Int {
    assert!(!radius_sq.is_negative());
    let guess = center.to_f64().unwrap_or(0.0) + radius_sq.to_f64().unwrap_or(0.0).max(0.0).sqrt();
    let mut x = if guess.is_finite() {
        Int::from(guess.floor() as i64)
    } else {
        floor_int(center)
    };
    while le_center_plus_sqrt(&(&x + 1), center, radius_sq) {
        x += 1;
    }
    while !le_center_plus_sqrt(&x, center, radius_sq) {
        x -= 1;
    }
    x
}

/// Smallest integer `x` with `x >= center - sqrt(radius_sq)`; exact.
pub fn shifted_sqrt_ceil(center: &Rat, radius_sq: &Rat) -> Int {
    assert!(!radius_sq.is_negative());
    let guess = center.to_f64().unwrap_or(0.0) - radius_sq.to_f64().unwrap_or(0.0).max(0.0).sqrt();
    let mut x = if guess.is_finite() {
        Int::from(guess.ceil() as i64)
    } else {
        ceil_int(center)
    };
    while ge_center_minus_sqrt(&(&x - 1), center, radius_sq) {
        x -= 1;
    }
    while !ge_center_minus_sqrt(&x, center, radius_sq) {
        x += 1;
    }
    x
}

pub fn gcd_int(a: &Int, b: &Int) -> Int {
    a.gcd(b)
}

pub fn gcd_vec(v: &[Int]) -> Int {
    v.iter().fold(Int::zero(), |acc, x| acc.gcd(x))
}

/// Lexicographic sign normalization: flips the vector if its first nonzero
/// entry is negative. Returns whether a flip happened.
pub fn lex_normalize_sign(v: &mut [Int]) -> bool {
    for x in v.iter() {
        match x.sign() {
            Sign::Plus => return false,
            Sign::Minus => {
                for y in v.iter_mut() {
                    *y = -std::mem::take(y);
                }
                return true;
            }
            Sign::NoSign => continue,
        }
    }
    false
}

/// Serde adapters: rationals cross the wire as strings `p` or `p/q`.
pub mod serde_rat {
    use super::*;
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rat, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_rat(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rat, D::Error> {
        let s = String::deserialize(d)?;
        parse_rat(&s).map_err(de::Error::custom)
    }
}

pub mod serde_rat_vec {
    use super::*;
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[Rat], s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(fmt_rat))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Rat>, D::Error> {
        let items = Vec::<String>::deserialize(d)?;
        items
            .iter()
            .map(|s| parse_rat(s).map_err(de::Error::custom))
            .collect()
    }
}

pub mod serde_rat_mat {
    use super::*;
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(m: &[Vec<Rat>], s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(m.iter().map(|row| row.iter().map(fmt_rat).collect::<Vec<_>>()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Vec<Vec<Rat>>, D::Error> {
        let rows = Vec::<Vec<String>>::deserialize(d)?;
        rows.iter()
            .map(|row| {
                row.iter()
                    .map(|s| parse_rat(s).map_err(de::Error::custom))
                    .collect()
            })
            .collect()
    }
}

pub mod serde_int_vec {
    use super::*;
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[Int], s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|x| x.to_string()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Int>, D::Error> {
        let items = Vec::<String>::deserialize(d)?;
        items
            .iter()
            .map(|s| s.parse::<Int>().map_err(de::Error::custom))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format_round_trip() {
        for s in ["0", "7", "-3", "1/2", "-22/7", "+5/3"] {
            let r = parse_rat(s).unwrap();
            let back = parse_rat(&fmt_rat(&r)).unwrap();
            assert_eq!(r, back);
        }
        assert_eq!(fmt_rat(&parse_rat("4/2").unwrap()), "2");
    }

    #[test]
    fn parse_rejects_bad_grammar() {
        for s in ["", "1/0", "1/-2", "a", "1.5", "1/2/3", "2/+3"] {
            assert!(parse_rat(s).is_err(), "should reject {s:?}");
        }
    }

    #[test]
    fn surd_comparison() {
        // 3 - 2*sqrt(2) > 0, 1 - sqrt(2) < 0, 2 - sqrt(4) = 0
        assert_eq!(cmp_surd(&rat(3), &rat(-2), &rat(2)), Ordering::Greater);
        assert_eq!(cmp_surd(&rat(1), &rat(-1), &rat(2)), Ordering::Less);
        assert_eq!(cmp_surd(&rat(2), &rat(-1), &rat(4)), Ordering::Equal);
    }

    #[test]
    fn shifted_sqrt_bounds() {
        // x <= 1/2 + sqrt(2): floor is 1; x >= 1/2 - sqrt(2): ceil is 0
        let c = ratio(1, 2);
        assert_eq!(shifted_sqrt_floor(&c, &rat(2)), int(1));
        assert_eq!(shifted_sqrt_ceil(&c, &rat(2)), int(0));
        // Perfect square edge: floor(0 + sqrt(9)) = 3, ceil(0 - sqrt(9)) = -3
        assert_eq!(shifted_sqrt_floor(&rat(0), &rat(9)), int(3));
        assert_eq!(shifted_sqrt_ceil(&rat(0), &rat(9)), int(-3));
    }

    #[test]
    fn pi_enclosure_is_tight() {
        let (lo, hi) = pi_interval();
        assert!(lo < hi);
        let width = &hi - &lo;
        assert!(width <= Rat::new(int(1), pow_int_u(&int(10), 37)));
        let pi_f = rat_to_f64(&lo);
        assert!((pi_f - std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn sqrt_interval_encloses() {
        let (lo, hi) = sqrt_interval(&rat(2), 20);
        assert!(&lo * &lo < rat(2));
        assert!(&hi * &hi > rat(2));
        let (lo, hi) = sqrt_interval(&ratio(9, 4), 5);
        assert_eq!(lo, ratio(3, 2));
        assert_eq!(hi, ratio(3, 2));
    }
}
