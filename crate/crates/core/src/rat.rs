//! Exact rational scalar type and a few arithmetic helpers.
//!
//! All pseudocharacter values, levels and graph lengths are exact rationals;
//! no floating point enters any core computation. Half-integer avoidance is
//! a strict inequality that floats could misjudge.

use num_rational::Ratio;
use num_traits::{One, Signed, Zero};

/// The scalar used throughout. `i128` keeps intermediate cross products of
/// every pipeline far from overflow (numerators stay below ~2^60).
pub type Rat = Ratio<i128>;

/// `n` as a rational.
pub fn rat(n: i128) -> Rat {
    Rat::from_integer(n)
}

/// `n/d` as a rational.
pub fn ratio(n: i128, d: i128) -> Rat {
    Rat::new(n, d)
}

/// True when `x` lies in `Z + 1/2`.
pub fn is_half_integer(x: &Rat) -> bool {
    let twice = x * rat(2);
    twice.is_integer() && (twice.numer() % 2 != 0)
}

/// The unique integer `n` with `x` in `(n - 1/2, n + 1/2)`.
///
/// Requires that `x` is not a half-integer; callers hold this by the
/// scaling invariant.
pub fn nearest_level(x: &Rat) -> i64 {
    debug_assert!(!is_half_integer(x), "level of a half-integer is ambiguous");
    let shifted = x + ratio(1, 2);
    let n = shifted.floor().to_integer();
    i64::try_from(n).expect("level out of i64 range")
}

/// Sign of a rational as -1, 0, +1.
pub fn sign(x: &Rat) -> i32 {
    if x.is_zero() {
        0
    } else if x.is_positive() {
        1
    } else {
        -1
    }
}

/// Smallest prime strictly greater than `n`.
pub fn next_prime(n: u64) -> u64 {
    let mut c = n + 1;
    loop {
        if is_prime(c) {
            return c;
        }
        c += 1;
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// One representing unity, for call sites that want a named constant.
pub fn one() -> Rat {
    Rat::one()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_integer_detection() {
        assert!(is_half_integer(&ratio(1, 2)));
        assert!(is_half_integer(&ratio(-3, 2)));
        assert!(is_half_integer(&ratio(5, 2)));
        assert!(!is_half_integer(&rat(2)));
        assert!(!is_half_integer(&ratio(2, 5)));
        assert!(!is_half_integer(&ratio(3, 4)));
    }

    #[test]
    fn levels_round_to_nearest_integer() {
        assert_eq!(nearest_level(&ratio(2, 5)), 0);
        assert_eq!(nearest_level(&ratio(3, 5)), 1);
        assert_eq!(nearest_level(&ratio(-3, 5)), -1);
        assert_eq!(nearest_level(&rat(7)), 7);
        assert_eq!(nearest_level(&ratio(-2, 5)), 0);
    }

    #[test]
    fn primes() {
        assert_eq!(next_prime(1), 2);
        assert_eq!(next_prime(4), 5);
        assert_eq!(next_prime(5), 7);
        assert_eq!(next_prime(100), 101);
    }
}
