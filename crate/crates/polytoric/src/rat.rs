//! Rational/integer helpers: fraction-string (de)serialization, primitive
//! integer vectors, exact float conversion.

use crate::{Error, Int, Rat, Result};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Parse a decimal-free fraction string: `"3"`, `"-7/4"`.
pub fn parse_rat(s: &str) -> Result<Rat> {
    let s = s.trim();
    let mk_err = || Error::Parse(format!("expected fraction string p or p/q, got {s:?}"));
    match s.split_once('/') {
        None => {
            let n: BigInt = s.parse().map_err(|_| mk_err())?;
            Ok(Rat::from_integer(n))
        }
        Some((num, den)) => {
            let n: BigInt = num.trim().parse().map_err(|_| mk_err())?;
            let d: BigInt = den.trim().parse().map_err(|_| mk_err())?;
            if d.is_zero() {
                return Err(Error::Parse(format!("zero denominator in {s:?}")));
            }
            Ok(Rat::new(n, d))
        }
    }
}

/// Format as `p` or `p/q` (always reduced, denominator positive).
pub fn format_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn rat_from_i64(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Exact conversion: every finite f64 is a dyadic rational.
pub fn rat_from_f64(x: f64) -> Result<Rat> {
    Rat::from_float(x).ok_or_else(|| Error::Parse(format!("non-finite float {x}")))
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Fall back through a quotient of truncated parts for huge values.
        let n = r.numer().to_f64().unwrap_or(f64::MAX);
        let d = r.denom().to_f64().unwrap_or(f64::MAX);
        n / d
    })
}

pub fn vec_to_f64(v: &[Rat]) -> Vec<f64> {
    v.iter().map(rat_to_f64).collect()
}

pub fn vec_from_f64(v: &[f64]) -> Result<Vec<Rat>> {
    v.iter().map(|&x| rat_from_f64(x)).collect()
}

/// gcd of the absolute values of the entries (0 for the zero vector).
pub fn content(v: &[Int]) -> Int {
    let mut g = Int::zero();
    for x in v {
        g = g.gcd(x);
    }
    g
}

/// Divide an integer vector by its content. Zero vectors pass through.
pub fn primitive(v: &[Int]) -> Vec<Int> {
    let g = content(v);
    if g.is_zero() || g.is_one() {
        return v.to_vec();
    }
    v.iter().map(|x| x / &g).collect()
}

/// Clear denominators of a rational vector into a primitive integer vector.
///
/// Returns the unique primitive integer vector positively proportional to `v`
/// (zero vector maps to zero).
pub fn primitive_from_rational(v: &[Rat]) -> Vec<Int> {
    let mut lcm = Int::one();
    for x in v {
        lcm = lcm.lcm(x.denom());
    }
    let ints: Vec<Int> = v.iter().map(|x| x.numer() * (&lcm / x.denom())).collect();
    primitive(&ints)
}

pub fn int_vec_to_rat(v: &[Int]) -> Vec<Rat> {
    v.iter().map(|x| Rat::from_integer(x.clone())).collect()
}

/// True if gcd of entries is exactly 1.
pub fn is_primitive(v: &[Int]) -> bool {
    content(v).is_one()
}

/// Rational dot product of an integer vector with a rational vector.
pub fn dot_int_rat(a: &[Int], b: &[Rat]) -> Rat {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = Rat::zero();
    for (x, y) in a.iter().zip(b) {
        acc += Rat::from_integer(x.clone()) * y;
    }
    acc
}

pub fn int_vec_to_f64(v: &[Int]) -> Vec<f64> {
    v.iter().map(|x| x.to_f64().unwrap_or(f64::MAX)).collect()
}

/// Squared Euclidean norm of a rational vector, exact.
pub fn norm_sq(v: &[Rat]) -> Rat {
    let mut acc = Rat::zero();
    for x in v {
        acc += x * x;
    }
    acc
}

/// Lexicographic comparison for deterministic tie-breaking.
pub fn lex_cmp(a: &[Rat], b: &[Rat]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.cmp(y) {
            std::cmp::Ordering::Equal => continue,
            o => return o,
        }
    }
    std::cmp::Ordering::Equal
}

pub fn abs(r: &Rat) -> Rat {
    r.abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format() {
        assert_eq!(format_rat(&parse_rat("3/6").unwrap()), "1/2");
        assert_eq!(format_rat(&parse_rat("-8/4").unwrap()), "-2");
        assert_eq!(format_rat(&parse_rat("5").unwrap()), "5");
        assert!(parse_rat("1/0").is_err());
        assert!(parse_rat("0.5").is_err());
    }

    #[test]
    fn primitive_vectors() {
        let v: Vec<Int> = vec![Int::from(-4), Int::from(6), Int::from(0)];
        assert_eq!(
            primitive(&v),
            vec![Int::from(-2), Int::from(3), Int::from(0)]
        );
        assert!(is_primitive(&primitive(&v)));
    }

    #[test]
    fn clear_denominators() {
        let v = vec![rat(1, 2), rat(-1, 3)];
        assert_eq!(
            primitive_from_rational(&v),
            vec![Int::from(3), Int::from(-2)]
        );
    }

    #[test]
    fn float_roundtrip_exact() {
        let r = rat_from_f64(0.375).unwrap();
        assert_eq!(r, rat(3, 8));
        assert_eq!(rat_to_f64(&r), 0.375);
    }
}
