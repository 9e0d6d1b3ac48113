//! Arbitrary-precision integer primitives: gcd, lcm and primality.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// A strictly positive integer of unbounded size.
///
/// Cycle times, cycle limits, the factoring target and every gcd/lcm
/// result live here. Serializes as a JSON number when it fits in a `u64`
/// and as a decimal string otherwise.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PosInt(BigUint);

impl PosInt {
    /// Returns `None` for zero.
    pub fn new(value: BigUint) -> Option<Self> {
        if value.is_zero() {
            None
        } else {
            Some(PosInt(value))
        }
    }

    pub fn one() -> Self {
        PosInt(BigUint::one())
    }

    pub fn get(&self) -> &BigUint {
        &self.0
    }

    pub fn into_inner(self) -> BigUint {
        self.0
    }

    pub fn to_u64(&self) -> Option<u64> {
        self.0.to_u64()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }
}

impl From<u64> for PosInt {
    /// # Panics
    ///
    /// Panics on zero.
    fn from(value: u64) -> Self {
        assert!(value > 0, "PosInt must be at least 1");
        PosInt(BigUint::from(value))
    }
}

impl fmt::Display for PosInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl FromStr for PosInt {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let trimmed = s.trim();
        if trimmed.is_empty() || !trimmed.bytes().all(|b| b.is_ascii_digit()) {
            return Err(Error::Parse(format!("not a positive integer: {s:?}")));
        }
        let value = BigUint::from_str(trimmed)
            .map_err(|e| Error::Parse(format!("not a positive integer: {s:?} ({e})")))?;
        PosInt::new(value).ok_or_else(|| Error::Parse(format!("expected a value >= 1, got {s:?}")))
    }
}

impl Serialize for PosInt {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self.0.to_u64() {
            Some(v) => serializer.serialize_u64(v),
            None => serializer.serialize_str(&self.0.to_string()),
        }
    }
}

impl<'de> Deserialize<'de> for PosInt {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct PosIntVisitor;

        impl Visitor<'_> for PosIntVisitor {
            type Value = PosInt;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a positive integer or a decimal string")
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<PosInt, E> {
                PosInt::new(BigUint::from(v)).ok_or_else(|| E::custom("expected a value >= 1"))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<PosInt, E> {
                u64::try_from(v)
                    .map_err(|_| E::custom("expected a value >= 1"))
                    .and_then(|v| self.visit_u64(v))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<PosInt, E> {
                v.parse().map_err(E::custom)
            }
        }

        deserializer.deserialize_any(PosIntVisitor)
    }
}

/// Greatest common divisor.
pub fn gcd(a: &PosInt, b: &PosInt) -> PosInt {
    PosInt(a.0.gcd(&b.0))
}

/// Least common multiple of a nonempty collection, folded pairwise.
pub fn lcm<'a, I>(values: I) -> Result<PosInt, Error>
where
    I: IntoIterator<Item = &'a PosInt>,
{
    let mut iter = values.into_iter();
    let first = iter.next().ok_or(Error::EmptyLcm)?;
    Ok(iter.fold(first.clone(), |acc, v| PosInt(acc.0.lcm(&v.0))))
}

/// `u64` gcd used on hot paths.
pub(crate) fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

// Strong-probable-prime bases that make Miller-Rabin exact for every
// n < 3_317_044_064_679_887_385_961_981 (Sorenson and Webster).
const DETERMINISTIC_BASES: [u32; 13] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41];

/// Largest value below which [`is_prime`] is proven exact.
pub const PRIMALITY_EXACT_BOUND: &str = "3317044064679887385961981";

// Bases used above the proven bound.
const EXTRA_BASES: [u32; 12] = [43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97];

/// Primality test.
///
/// Trial division by the small primes first, then Miller-Rabin with a fixed
/// witness set. The answer is exact for every `n` below
/// [`PRIMALITY_EXACT_BOUND`], which is far beyond anything the factoring
/// reduction can reach. Above it the extra fixed bases make a false
/// positive require a strong pseudoprime to the first 25 primes.
pub fn is_prime(n: &PosInt) -> bool {
    let n = &n.0;
    if let Some(small) = n.to_u64() {
        if small < 2 {
            return false;
        }
        for p in DETERMINISTIC_BASES.iter().chain(EXTRA_BASES.iter()) {
            let p = u64::from(*p);
            if small == p {
                return true;
            }
            if small % p == 0 {
                return false;
            }
        }
        if small < 97 * 97 {
            return true;
        }
    } else {
        for p in DETERMINISTIC_BASES.iter().chain(EXTRA_BASES.iter()) {
            if (n % *p).is_zero() {
                return false;
            }
        }
    }

    let exact_bound = BigUint::from_str(PRIMALITY_EXACT_BOUND).expect("valid constant");
    let bases: Vec<u32> = if n < &exact_bound {
        DETERMINISTIC_BASES.to_vec()
    } else {
        DETERMINISTIC_BASES.iter().chain(EXTRA_BASES.iter()).copied().collect()
    };
    bases.into_iter().all(|a| strong_probable_prime(n, &BigUint::from(a)))
}

/// Miller-Rabin round for odd `n > a`.
fn strong_probable_prime(n: &BigUint, base: &BigUint) -> bool {
    let one = BigUint::one();
    let n_minus_1 = n - &one;
    let s = n_minus_1.trailing_zeros().expect("n > 1");
    let d = &n_minus_1 >> s;

    let mut x = base.modpow(&d, n);
    if x.is_one() || x == n_minus_1 {
        return true;
    }
    for _ in 1..s {
        x = (&x * &x) % n;
        if x == n_minus_1 {
            return true;
        }
        if x.is_one() {
            return false;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(v: u64) -> PosInt {
        PosInt::from(v)
    }

    fn trial_division_is_prime(n: u64) -> bool {
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

    #[test]
    fn gcd_examples() {
        assert_eq!(gcd(&p(12), &p(8)), p(4));
        assert_eq!(gcd(&p(987_654_321), &p(1)), p(1));
        assert_eq!(gcd(&p(10), &p(15)), p(5));
        assert_eq!(gcd(&p(7), &p(7)), p(7));
    }

    #[test]
    fn lcm_examples() {
        assert_eq!(lcm(&[p(4), p(6)]).unwrap(), p(12));
        assert_eq!(lcm(&[p(9)]).unwrap(), p(9));
        assert_eq!(lcm(&[p(2), p(3), p(5)]).unwrap(), p(30));
    }

    #[test]
    fn lcm_of_nothing_is_an_error() {
        let empty: Vec<PosInt> = Vec::new();
        let err = lcm(&empty).unwrap_err();
        assert!(matches!(err, Error::EmptyLcm));
        assert_eq!(err.to_string(), "lcm of empty set");
    }

    #[test]
    fn primality_examples() {
        assert!(is_prime(&p(2)));
        assert!(!is_prime(&p(1)));
        // 561 = 3 * 11 * 17, a Carmichael number
        assert!(!is_prime(&p(561)));
        assert!(is_prime(&p(1_000_000_007)));
        // strong pseudoprime to bases 2..37
        assert!(!is_prime(&p(3_825_123_056_546_413_051)));
        // 2^61 - 1
        assert!(is_prime(&p(2_305_843_009_213_693_951)));
    }

    #[test]
    fn primality_beyond_u64() {
        // 2^89 - 1 is a Mersenne prime; 2^67 - 1 is not.
        let m89 = PosInt::new((BigUint::one() << 89u32) - 1u32).unwrap();
        let m67 = PosInt::new((BigUint::one() << 67u32) - 1u32).unwrap();
        assert!(is_prime(&m89));
        assert!(!is_prime(&m67));
    }

    #[test]
    fn primality_matches_trial_division_to_1e5() {
        for n in 1..=100_000u64 {
            assert_eq!(is_prime(&p(n)), trial_division_is_prime(n), "n = {n}");
        }
    }

    #[test]
    fn parse_and_serde() {
        assert_eq!("42".parse::<PosInt>().unwrap(), p(42));
        assert!("0".parse::<PosInt>().is_err());
        assert!("-3".parse::<PosInt>().is_err());
        assert!("1.5".parse::<PosInt>().is_err());
        assert_eq!(serde_json::to_string(&p(15)).unwrap(), "15");
        let big: PosInt = "123456789012345678901234567890".parse().unwrap();
        let json = serde_json::to_string(&big).unwrap();
        assert_eq!(json, "\"123456789012345678901234567890\"");
        assert_eq!(serde_json::from_str::<PosInt>(&json).unwrap(), big);
        assert!(serde_json::from_str::<PosInt>("0").is_err());
    }

    proptest! {
        #[test]
        fn gcd_times_lcm_is_product(a in 1u64..1_000_000, b in 1u64..1_000_000) {
            let (a, b) = (p(a), p(b));
            let g = gcd(&a, &b);
            let l = lcm(&[a.clone(), b.clone()]).unwrap();
            prop_assert_eq!(g.get() * l.get(), a.get() * b.get());
            prop_assert_eq!(gcd(&a, &b), gcd(&b, &a));
        }

        #[test]
        fn lcm_is_least_common_multiple(values in proptest::collection::vec(1u64..60, 1..6)) {
            let set: Vec<PosInt> = values.iter().copied().map(p).collect();
            let l = lcm(&set).unwrap();
            let product: BigUint = set.iter().map(|s| s.get().clone()).product();
            for s in &set {
                prop_assert!((l.get() % s.get()).is_zero());
            }
            prop_assert!((&product % l.get()).is_zero());
            // nothing smaller is a common multiple
            let l64 = l.to_u64().unwrap();
            for m in 1..l64.min(5_000) {
                prop_assert!(values.iter().any(|v| m % v != 0));
            }
            let mut reversed = set.clone();
            reversed.reverse();
            prop_assert_eq!(lcm(&reversed).unwrap(), l);
        }
    }
}
