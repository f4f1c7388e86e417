//! Exact scalar arithmetic.
//!
//! Four kinds are supported: arbitrary-precision rationals, prime fields,
//! integers, and integers modulo m. Rationals are kept in lowest terms with
//! positive denominator (the `num` crate normalizes), prime-field and modular
//! representatives live in `[0, p)` / `[0, m)`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ScalarKind {
    Rational,
    PrimeField(u64),
    Integer,
    IntegerMod(u64),
}

impl ScalarKind {
    pub fn is_field(&self) -> bool {
        matches!(self, ScalarKind::Rational | ScalarKind::PrimeField(_))
    }

    pub fn zero(&self) -> Scalar {
        match self {
            ScalarKind::Rational => Scalar::Rat(BigRational::zero()),
            ScalarKind::PrimeField(p) => Scalar::Fp { p: *p, v: 0 },
            ScalarKind::Integer => Scalar::Int(BigInt::zero()),
            ScalarKind::IntegerMod(m) => Scalar::Mod {
                m: *m,
                v: BigInt::zero(),
            },
        }
    }

    pub fn one(&self) -> Scalar {
        match self {
            ScalarKind::Rational => Scalar::Rat(BigRational::one()),
            ScalarKind::PrimeField(p) => Scalar::Fp {
                p: *p,
                v: if *p == 1 { 0 } else { 1 },
            },
            ScalarKind::Integer => Scalar::Int(BigInt::one()),
            ScalarKind::IntegerMod(m) => Scalar::Mod {
                m: *m,
                v: if *m == 1 { BigInt::zero() } else { BigInt::one() },
            },
        }
    }

    pub fn from_i64(&self, n: i64) -> Scalar {
        match self {
            ScalarKind::Rational => Scalar::Rat(BigRational::from(BigInt::from(n))),
            ScalarKind::PrimeField(p) => Scalar::Fp {
                p: *p,
                v: (n.rem_euclid(*p as i64)) as u64,
            },
            ScalarKind::Integer => Scalar::Int(BigInt::from(n)),
            ScalarKind::IntegerMod(m) => Scalar::Mod {
                m: *m,
                v: BigInt::from(n.rem_euclid(*m as i64)),
            },
        }
    }

    pub fn check_prime(p: u64) -> Result<()> {
        if p < 2 {
            return Err(Error::UnsupportedScalar(format!("{p} is not prime")));
        }
        let mut d = 2u64;
        while d * d <= p {
            if p % d == 0 {
                return Err(Error::UnsupportedScalar(format!("{p} is not prime")));
            }
            d += 1;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scalar {
    Rat(BigRational),
    Fp { p: u64, v: u64 },
    Int(BigInt),
    Mod { m: u64, v: BigInt },
}

impl Scalar {
    pub fn kind(&self) -> ScalarKind {
        match self {
            Scalar::Rat(_) => ScalarKind::Rational,
            Scalar::Fp { p, .. } => ScalarKind::PrimeField(*p),
            Scalar::Int(_) => ScalarKind::Integer,
            Scalar::Mod { m, .. } => ScalarKind::IntegerMod(*m),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Rat(r) => r.is_zero(),
            Scalar::Fp { v, .. } => *v == 0,
            Scalar::Int(n) => n.is_zero(),
            Scalar::Mod { v, .. } => v.is_zero(),
        }
    }

    pub fn is_one(&self) -> bool {
        self == &self.kind().one()
    }

    fn match_kind(&self, other: &Scalar) -> Result<()> {
        if self.kind() == other.kind() {
            Ok(())
        } else {
            Err(Error::UnsupportedScalar(format!(
                "mixed scalar kinds {:?} and {:?}",
                self.kind(),
                other.kind()
            )))
        }
    }

    pub fn add(&self, other: &Scalar) -> Result<Scalar> {
        self.match_kind(other)?;
        Ok(match (self, other) {
            (Scalar::Rat(a), Scalar::Rat(b)) => Scalar::Rat(a + b),
            (Scalar::Fp { p, v: a }, Scalar::Fp { v: b, .. }) => Scalar::Fp {
                p: *p,
                v: ((*a as u128 + *b as u128) % *p as u128) as u64,
            },
            (Scalar::Int(a), Scalar::Int(b)) => Scalar::Int(a + b),
            (Scalar::Mod { m, v: a }, Scalar::Mod { v: b, .. }) => Scalar::Mod {
                m: *m,
                v: (a + b).mod_floor(&BigInt::from(*m)),
            },
            _ => unreachable!(),
        })
    }

    pub fn neg(&self) -> Scalar {
        match self {
            Scalar::Rat(a) => Scalar::Rat(-a),
            Scalar::Fp { p, v } => Scalar::Fp {
                p: *p,
                v: if *v == 0 { 0 } else { p - v },
            },
            Scalar::Int(a) => Scalar::Int(-a),
            Scalar::Mod { m, v } => Scalar::Mod {
                m: *m,
                v: (-v).mod_floor(&BigInt::from(*m)),
            },
        }
    }

    pub fn sub(&self, other: &Scalar) -> Result<Scalar> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Scalar) -> Result<Scalar> {
        self.match_kind(other)?;
        Ok(match (self, other) {
            (Scalar::Rat(a), Scalar::Rat(b)) => Scalar::Rat(a * b),
            (Scalar::Fp { p, v: a }, Scalar::Fp { v: b, .. }) => Scalar::Fp {
                p: *p,
                v: ((*a as u128 * *b as u128) % *p as u128) as u64,
            },
            (Scalar::Int(a), Scalar::Int(b)) => Scalar::Int(a * b),
            (Scalar::Mod { m, v: a }, Scalar::Mod { v: b, .. }) => Scalar::Mod {
                m: *m,
                v: (a * b).mod_floor(&BigInt::from(*m)),
            },
            _ => unreachable!(),
        })
    }

    /// Multiplicative inverse. Fails for non-units.
    pub fn inv(&self) -> Result<Scalar> {
        match self {
            Scalar::Rat(a) => {
                if a.is_zero() {
                    Err(Error::UnsupportedScalar("division by zero".into()))
                } else {
                    Ok(Scalar::Rat(a.recip()))
                }
            }
            Scalar::Fp { p, v } => {
                if *v == 0 {
                    return Err(Error::UnsupportedScalar("division by zero".into()));
                }
                // Fermat: v^(p-2) mod p
                let mut acc: u128 = 1;
                let mut base = *v as u128;
                let mut e = p - 2;
                while e > 0 {
                    if e & 1 == 1 {
                        acc = acc * base % *p as u128;
                    }
                    base = base * base % *p as u128;
                    e >>= 1;
                }
                Ok(Scalar::Fp { p: *p, v: acc as u64 })
            }
            Scalar::Int(a) => {
                if a.abs().is_one() {
                    Ok(Scalar::Int(a.clone()))
                } else {
                    Err(Error::UnsupportedScalar(format!("{a} is not a unit in Z")))
                }
            }
            Scalar::Mod { m, v } => {
                let mm = BigInt::from(*m);
                let e = v.extended_gcd(&mm);
                if e.gcd.is_one() {
                    Ok(Scalar::Mod {
                        m: *m,
                        v: e.x.mod_floor(&mm),
                    })
                } else {
                    Err(Error::UnsupportedScalar(format!("{v} is not a unit mod {m}")))
                }
            }
        }
    }

    pub fn div(&self, other: &Scalar) -> Result<Scalar> {
        self.mul(&other.inv()?)
    }

    /// The underlying integer for Integer/IntegerMod scalars.
    pub fn as_bigint(&self) -> Result<BigInt> {
        match self {
            Scalar::Int(a) => Ok(a.clone()),
            Scalar::Mod { v, .. } => Ok(v.clone()),
            _ => Err(Error::UnsupportedScalar("expected an integral scalar".into())),
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Rat(a) => write!(f, "{a}"),
            Scalar::Fp { v, .. } => write!(f, "{v}"),
            Scalar::Int(a) => write!(f, "{a}"),
            Scalar::Mod { v, .. } => write!(f, "{v}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_lowest_terms() {
        let a = Scalar::Rat(BigRational::new(BigInt::from(2), BigInt::from(4)));
        let b = Scalar::Rat(BigRational::new(BigInt::from(1), BigInt::from(2)));
        assert_eq!(a, b);
    }

    #[test]
    fn prime_field_inverse() {
        let a = ScalarKind::PrimeField(7).from_i64(3);
        let inv = a.inv().unwrap();
        assert!(a.mul(&inv).unwrap().is_one());
    }

    #[test]
    fn primality_check() {
        assert!(ScalarKind::check_prime(7).is_ok());
        assert!(ScalarKind::check_prime(6).is_err());
    }

    #[test]
    fn mod_representatives_in_range() {
        let k = ScalarKind::IntegerMod(12);
        let a = k.from_i64(-5);
        assert_eq!(a, k.from_i64(7));
    }

    #[test]
    fn zero_ring_is_legal() {
        let k = ScalarKind::IntegerMod(1);
        assert!(k.one().is_zero());
    }
}
