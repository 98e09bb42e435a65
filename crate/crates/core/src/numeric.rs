//! Exact arithmetic helpers: big binomials, rationals, and k-subset enumeration.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational used for every weight, bound and threshold.
pub type Rational = BigRational;

/// `C(n, k)` as an arbitrary-precision integer; zero when `k > n`.
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// `C(n, k)` as a signed big integer, convenient for threshold differences.
pub fn binomial_int(n: u64, k: u64) -> BigInt {
    BigInt::from(binomial(n, k))
}

/// `C(n, k)` in `u128`, or `None` on overflow.
pub fn binomial_u128(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k as u128 {
        // acc * (n - i) / (i + 1) stays integral at every step.
        let num = acc.checked_mul(n as u128 - i)?;
        acc = num / (i + 1);
    }
    Some(acc)
}

/// `C(n, k)` as `u64`, saturating at `u64::MAX`.
pub fn binomial_u64(n: u64, k: u64) -> u64 {
    binomial_u128(n, k)
        .and_then(|c| u64::try_from(c).ok())
        .unwrap_or(u64::MAX)
}

pub fn rational(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int_rational(v: impl Into<BigInt>) -> Rational {
    Rational::from_integer(v.into())
}

/// `n^e` as a rational.
pub fn pow_rational(n: u64, e: u32) -> Rational {
    Rational::from_integer(BigInt::from(n).pow(e))
}

/// Ceiling of a nonnegative rational as `u64`.
pub fn ceil_u64(x: &Rational) -> Result<u64> {
    if x.is_negative() {
        return Err(Error::Range(format!("expected nonnegative value, got {x}")));
    }
    x.ceil()
        .to_integer()
        .to_u64()
        .ok_or_else(|| Error::Range(format!("{x} does not fit in 64 bits")))
}

pub fn to_f64(x: &Rational) -> f64 {
    x.numer().to_f64().unwrap_or(f64::NAN) / x.denom().to_f64().unwrap_or(f64::NAN)
}

/// Parses `p/q`, a plain integer, or an exact decimal such as `0.125`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Range(format!("cannot parse rational {s:?}"));
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(p, q));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let negative = int.trim_start().starts_with('-');
        let int_part: BigInt = match int.trim() {
            "" | "-" | "+" => BigInt::zero(),
            t => t.parse().map_err(|_| bad())?,
        };
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let scale = BigInt::from(10u32).pow(frac.len() as u32);
        let frac_part: BigInt = frac.parse().map_err(|_| bad())?;
        let magnitude = int_part.abs() * &scale + frac_part;
        let num = if negative { -magnitude } else { magnitude };
        return Ok(Rational::new(num, scale));
    }
    let v: BigInt = s.parse().map_err(|_| bad())?;
    Ok(Rational::from_integer(v))
}

/// Formats a rational as `p/q`, or `p` when integral.
pub fn format_rational(x: &Rational) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Least common multiple of the denominators, used to compare weight sums in integers.
pub fn common_denominator<'a>(xs: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    xs.into_iter()
        .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()))
}

/// Lexicographic successor of a strictly increasing index tuple drawn from `0..n`.
fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if idx[i] < n - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Iterator over all `k`-subsets of `items` in lexicographic order of positions.
///
/// When `items` is sorted ascending the subsets are yielded as sorted vectors in
/// lexicographic order.
pub struct Subsets<'a, T> {
    items: &'a [T],
    idx: Vec<usize>,
    done: bool,
}

impl<'a, T: Copy> Iterator for Subsets<'a, T> {
    type Item = Vec<T>;

    fn next(&mut self) -> Option<Vec<T>> {
        if self.done {
            return None;
        }
        let out = self.idx.iter().map(|&i| self.items[i]).collect();
        if !next_combination(&mut self.idx, self.items.len()) {
            self.done = true;
        }
        Some(out)
    }
}

pub fn subsets<T: Copy>(items: &[T], k: usize) -> Subsets<'_, T> {
    Subsets {
        items,
        idx: (0..k).collect(),
        done: k > items.len(),
    }
}

/// All `k`-subsets of `1..=n`, sorted, in lexicographic order.
pub fn k_sets(n: usize, k: usize) -> impl Iterator<Item = Vec<u32>> {
    let verts: Vec<u32> = (1..=n as u32).collect();
    let mut idx: Vec<usize> = (0..k).collect();
    let mut done = k > n;
    std::iter::from_fn(move || {
        if done {
            return None;
        }
        let out = idx.iter().map(|&i| verts[i]).collect();
        if !next_combination(&mut idx, n) {
            done = true;
        }
        Some(out)
    })
}

/// Colexicographic unranking: the `rank`-th `k`-subset of `1..=n` (sorted ascending).
///
/// The colex rank of `c_1 < ... < c_k` (1-based) is `sum_i C(c_i - 1, i)`.
pub fn colex_unrank(mut rank: u128, n: u64, k: u64) -> Vec<u32> {
    let mut out = vec![0u32; k as usize];
    let mut hi = n;
    for i in (1..=k).rev() {
        // largest c in [i, hi] with C(c - 1, i) <= rank
        let (mut lo, mut top) = (i, hi);
        while lo < top {
            let mid = lo + (top - lo).div_ceil(2);
            let c = binomial_u128(mid - 1, i).unwrap_or(u128::MAX);
            if c <= rank {
                lo = mid;
            } else {
                top = mid - 1;
            }
        }
        rank -= binomial_u128(lo - 1, i).unwrap_or(0);
        out[i as usize - 1] = lo as u32;
        hi = lo - 1;
    }
    out
}

pub fn colex_rank(set: &[u32]) -> u128 {
    set.iter()
        .enumerate()
        .map(|(i, &c)| binomial_u128(c as u64 - 1, i as u64 + 1).unwrap_or(0))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials_agree() {
        for n in 0..30u64 {
            for k in 0..=n + 1 {
                assert_eq!(binomial(n, k), BigUint::from(binomial_u128(n, k).unwrap()));
            }
        }
        assert_eq!(binomial(8, 2), BigUint::from(28u32));
        assert_eq!(binomial(3, 5), BigUint::zero());
    }

    #[test]
    fn parse_forms() {
        assert_eq!(parse_rational("3/9").unwrap(), rational(1, 3));
        assert_eq!(parse_rational("7").unwrap(), rational(7, 1));
        assert_eq!(parse_rational("0.125").unwrap(), rational(1, 8));
        assert_eq!(parse_rational("-1.5").unwrap(), rational(-3, 2));
        assert_eq!(parse_rational(".5").unwrap(), rational(1, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
        assert_eq!(format_rational(&rational(6, 4)), "3/2");
        assert_eq!(format_rational(&rational(4, 2)), "2");
    }

    #[test]
    fn subsets_count_and_order() {
        let all: Vec<_> = k_sets(6, 3).collect();
        assert_eq!(all.len(), 20);
        assert!(all.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(subsets(&[1, 2], 3).count(), 0);
        assert_eq!(subsets(&[1, 2, 3], 0).count(), 1);
    }

    #[test]
    fn colex_round_trip() {
        for (rank, set) in (0u128..).zip({
            let mut v: Vec<_> = k_sets(7, 3).collect();
            v.sort_by_key(|s| colex_rank(s));
            v
        }) {
            assert_eq!(colex_rank(&set), rank);
            assert_eq!(colex_unrank(rank, 7, 3), set);
        }
    }
}
