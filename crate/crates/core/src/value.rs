//! Non-negative quantities in two backends: exact rationals and natural-log
//! floats, plus the semiring plumbing the counting engines are generic over.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// Relative tolerance used for every log-domain comparison.
pub const LOG_REL_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Backend {
    Exact,
    Log,
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Backend::Exact => f.write_str("EXACT"),
            Backend::Log => f.write_str("LOG"),
        }
    }
}

/// A non-negative real stored as its natural logarithm. `-inf` is zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogWeight(f64);

impl LogWeight {
    pub const ZERO: LogWeight = LogWeight(f64::NEG_INFINITY);
    pub const ONE: LogWeight = LogWeight(0.0);

    /// Panics on NaN or `+inf`; those never describe a finite non-negative value.
    pub fn from_ln(ln: f64) -> Self {
        assert!(!ln.is_nan() && ln != f64::INFINITY, "invalid log magnitude {ln}");
        LogWeight(ln)
    }

    pub fn from_f64(x: f64) -> Self {
        assert!(x >= 0.0 && x.is_finite(), "invalid non-negative value {x}");
        LogWeight(x.ln())
    }

    pub fn from_rational(q: &BigRational) -> Self {
        LogWeight(ln_rational(q))
    }

    #[inline]
    pub fn ln(self) -> f64 {
        self.0
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == f64::NEG_INFINITY
    }

    /// Linear-scale value; overflows to `inf` for large magnitudes.
    pub fn to_f64(self) -> f64 {
        self.0.exp()
    }

    #[inline]
    pub fn mul(self, rhs: LogWeight) -> LogWeight {
        if self.is_zero() || rhs.is_zero() {
            LogWeight::ZERO
        } else {
            LogWeight(self.0 + rhs.0)
        }
    }

    #[inline]
    pub fn add(self, rhs: LogWeight) -> LogWeight {
        let (hi, lo) = if self.0 >= rhs.0 { (self.0, rhs.0) } else { (rhs.0, self.0) };
        if lo == f64::NEG_INFINITY {
            return LogWeight(hi);
        }
        LogWeight(hi + (lo - hi).exp().ln_1p())
    }

    /// `self^p` for real `p > 0`.
    pub fn powf(self, p: f64) -> LogWeight {
        if self.is_zero() {
            LogWeight::ZERO
        } else {
            LogWeight(self.0 * p)
        }
    }

    pub fn total_cmp(&self, other: &LogWeight) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Streaming log-sum-exp with a running maximum.
#[derive(Clone, Debug)]
pub struct LogSumExp {
    max: f64,
    scaled: f64,
}

impl Default for LogSumExp {
    fn default() -> Self {
        LogSumExp { max: f64::NEG_INFINITY, scaled: 0.0 }
    }
}

impl LogSumExp {
    pub fn push(&mut self, x: LogWeight) {
        let v = x.ln();
        if v == f64::NEG_INFINITY {
            return;
        }
        if v > self.max {
            self.scaled = self.scaled * (self.max - v).exp() + 1.0;
            self.max = v;
        } else {
            self.scaled += (v - self.max).exp();
        }
    }

    pub fn merge(&mut self, other: LogSumExp) {
        if other.max == f64::NEG_INFINITY {
            return;
        }
        if other.max > self.max {
            self.scaled = self.scaled * (self.max - other.max).exp() + other.scaled;
            self.max = other.max;
        } else {
            self.scaled += other.scaled * (other.max - self.max).exp();
        }
    }

    pub fn finish(&self) -> LogWeight {
        if self.max == f64::NEG_INFINITY {
            LogWeight::ZERO
        } else {
            LogWeight(self.max + self.scaled.ln())
        }
    }
}

/// Natural log of an arbitrary-precision unsigned integer; `-inf` for zero.
pub fn ln_biguint(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits <= 1000 {
        x.to_f64().expect("fits in f64").ln()
    } else {
        let shift = bits - 64;
        let top = (x >> shift).to_f64().expect("64-bit mantissa");
        top.ln() + shift as f64 * std::f64::consts::LN_2
    }
}

pub fn ln_rational(q: &BigRational) -> f64 {
    assert!(!q.is_negative(), "logarithm of negative rational");
    let num = q.numer().magnitude();
    if num.is_zero() {
        return f64::NEG_INFINITY;
    }
    ln_biguint(num) - ln_biguint(q.denom().magnitude())
}

/// Parses `p` or `p/q` as a non-negative rational. Rejects signs and zero
/// denominators.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let digits = |t: &str| !t.is_empty() && t.bytes().all(|b| b.is_ascii_digit());
    let (p, q) = match s.split_once('/') {
        Some((p, q)) => (p, q),
        None => (s, "1"),
    };
    if !digits(p) || !digits(q) {
        return None;
    }
    let p: BigInt = p.parse().ok()?;
    let q: BigInt = q.parse().ok()?;
    if q.is_zero() {
        return None;
    }
    Some(BigRational::new(p, q))
}

/// `p/q` in lowest terms, or just `p` when the value is an integer.
pub fn format_rational(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn rational_from_biguint(x: BigUint) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

/// A non-negative value carried either exactly or as a log magnitude.
#[derive(Clone, Debug, PartialEq)]
pub enum NonNegValue {
    Exact(BigRational),
    Log(LogWeight),
}

impl NonNegValue {
    pub fn zero() -> Self {
        NonNegValue::Exact(BigRational::zero())
    }

    pub fn one() -> Self {
        NonNegValue::Exact(BigRational::one())
    }

    pub fn from_integer(n: u64) -> Self {
        NonNegValue::Exact(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn ratio(p: u64, q: u64) -> Self {
        NonNegValue::Exact(BigRational::new(BigInt::from(p), BigInt::from(q)))
    }

    pub fn exact(q: BigRational) -> Self {
        assert!(!q.is_negative(), "negative weight");
        NonNegValue::Exact(q)
    }

    pub fn backend(&self) -> Backend {
        match self {
            NonNegValue::Exact(_) => Backend::Exact,
            NonNegValue::Log(_) => Backend::Log,
        }
    }

    pub fn ln(&self) -> f64 {
        match self {
            NonNegValue::Exact(q) => ln_rational(q),
            NonNegValue::Log(w) => w.ln(),
        }
    }

    pub fn to_log(&self) -> LogWeight {
        match self {
            NonNegValue::Exact(q) => LogWeight::from_rational(q),
            NonNegValue::Log(w) => *w,
        }
    }

    pub fn as_exact(&self) -> Option<&BigRational> {
        match self {
            NonNegValue::Exact(q) => Some(q),
            NonNegValue::Log(_) => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            NonNegValue::Exact(q) => q.is_zero(),
            NonNegValue::Log(w) => w.is_zero(),
        }
    }

    pub fn mul(&self, rhs: &NonNegValue) -> NonNegValue {
        match (self, rhs) {
            (NonNegValue::Exact(a), NonNegValue::Exact(b)) => NonNegValue::Exact(a * b),
            _ => NonNegValue::Log(self.to_log().mul(rhs.to_log())),
        }
    }

    pub fn add(&self, rhs: &NonNegValue) -> NonNegValue {
        match (self, rhs) {
            (NonNegValue::Exact(a), NonNegValue::Exact(b)) => NonNegValue::Exact(a + b),
            _ => NonNegValue::Log(self.to_log().add(rhs.to_log())),
        }
    }

    /// Exact comparison when both sides are exact, log comparison otherwise.
    pub fn compare(&self, other: &NonNegValue) -> Ordering {
        match (self, other) {
            (NonNegValue::Exact(a), NonNegValue::Exact(b)) => a.cmp(b),
            _ => self.to_log().total_cmp(&other.to_log()),
        }
    }
}

impl fmt::Display for NonNegValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NonNegValue::Exact(q) => f.write_str(&format_rational(q)),
            NonNegValue::Log(w) => write!(f, "exp({})", w.ln()),
        }
    }
}

/// Commutative semiring with a (possibly different) summation accumulator.
pub trait Semiring: Clone + Send + Sync + 'static {
    type Acc: Send;

    fn s_zero() -> Self;
    fn s_one() -> Self;
    fn s_is_zero(&self) -> bool;
    fn s_mul(&self, rhs: &Self) -> Self;
    fn s_mul_assign(&mut self, rhs: &Self) {
        *self = self.s_mul(rhs);
    }

    fn acc_new() -> Self::Acc;
    fn acc_push(acc: &mut Self::Acc, x: &Self);
    fn acc_merge(acc: &mut Self::Acc, other: Self::Acc);
    fn acc_finish(acc: Self::Acc) -> Self;
}

impl Semiring for BigUint {
    type Acc = BigUint;

    fn s_zero() -> Self {
        BigUint::zero()
    }
    fn s_one() -> Self {
        BigUint::one()
    }
    fn s_is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn s_mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn s_mul_assign(&mut self, rhs: &Self) {
        *self *= rhs;
    }
    fn acc_new() -> BigUint {
        BigUint::zero()
    }
    fn acc_push(acc: &mut BigUint, x: &Self) {
        *acc += x;
    }
    fn acc_merge(acc: &mut BigUint, other: BigUint) {
        *acc += other;
    }
    fn acc_finish(acc: BigUint) -> Self {
        acc
    }
}

impl Semiring for LogWeight {
    type Acc = LogSumExp;

    fn s_zero() -> Self {
        LogWeight::ZERO
    }
    fn s_one() -> Self {
        LogWeight::ONE
    }
    fn s_is_zero(&self) -> bool {
        LogWeight::is_zero(*self)
    }
    fn s_mul(&self, rhs: &Self) -> Self {
        LogWeight::mul(*self, *rhs)
    }
    fn acc_new() -> LogSumExp {
        LogSumExp::default()
    }
    fn acc_push(acc: &mut LogSumExp, x: &Self) {
        acc.push(*x);
    }
    fn acc_merge(acc: &mut LogSumExp, other: LogSumExp) {
        acc.merge(other);
    }
    fn acc_finish(acc: LogSumExp) -> Self {
        acc.finish()
    }
}

/// Power form above which exact comparison first tries a certified float filter.
const EXACT_POWER_BITS: u64 = 1 << 14;

/// An exact product `prod_k base_k^(1/root_k)` of rational radicals.
///
/// Factors sharing a root are merged, so bounds with one uniform exponent
/// keep a single factor.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RadicalProduct {
    factors: Vec<(BigRational, u64)>,
}

impl RadicalProduct {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn single(base: BigRational, root: u64) -> Self {
        let mut r = Self::new();
        r.push(base, root);
        r
    }

    pub fn push(&mut self, base: BigRational, root: u64) {
        assert!(root >= 1, "root must be positive");
        assert!(!base.is_negative(), "negative radicand");
        match self.factors.binary_search_by_key(&root, |(_, r)| *r) {
            Ok(i) => self.factors[i].0 *= base,
            Err(i) => self.factors.insert(i, (base, root)),
        }
    }

    /// `(base, root)` pairs sorted by root.
    pub fn factors(&self) -> &[(BigRational, u64)] {
        &self.factors
    }

    pub fn is_zero(&self) -> bool {
        self.factors.iter().any(|(b, _)| b.is_zero())
    }

    pub fn ln(&self) -> f64 {
        self.factors.iter().map(|(b, r)| ln_rational(b) / *r as f64).sum()
    }

    /// Least common multiple of the roots (1 for the empty product).
    pub fn common_root(&self) -> u64 {
        self.factors.iter().fold(1u64, |acc, (_, r)| acc.lcm(r))
    }

    /// `self^root` for a multiple `root` of `common_root()`, as an exact rational.
    pub fn raised_to(&self, root: u64) -> BigRational {
        let mut out = BigRational::one();
        for (b, r) in &self.factors {
            debug_assert_eq!(root % r, 0);
            out *= pow_rational(b, root / r);
        }
        out
    }

    fn estimated_power_bits(&self, root: u64) -> u64 {
        self.factors
            .iter()
            .map(|(b, r)| (b.numer().bits() + b.denom().bits()) * (root / r))
            .sum()
    }

    /// Exact comparison of two radical products.
    pub fn cmp_exact(&self, other: &RadicalProduct) -> Ordering {
        match (self.is_zero(), other.is_zero()) {
            (true, true) => return Ordering::Equal,
            (true, false) => return Ordering::Less,
            (false, true) => return Ordering::Greater,
            _ => {}
        }
        let root = self.common_root().lcm(&other.common_root());
        let bits = self.estimated_power_bits(root) + other.estimated_power_bits(root);
        if bits > EXACT_POWER_BITS {
            if let Some(ord) = certified_float_order(self, other) {
                return ord;
            }
        }
        self.raised_to(root).cmp(&other.raised_to(root))
    }

    /// Exact comparison against a plain rational.
    pub fn cmp_rational(&self, q: &BigRational) -> Ordering {
        self.cmp_exact(&RadicalProduct::single(q.clone(), 1))
    }
}

/// Decides the order of two products from their logarithms when the gap is
/// far outside the accumulated rounding error; `None` means too close to call.
fn certified_float_order(x: &RadicalProduct, y: &RadicalProduct) -> Option<Ordering> {
    let magnitude = |p: &RadicalProduct| -> f64 {
        p.factors
            .iter()
            .map(|(b, r)| {
                (ln_biguint(b.numer().magnitude()).abs() + ln_biguint(b.denom().magnitude()).abs() + 1.0)
                    / *r as f64
            })
            .sum()
    };
    let gap = x.ln() - y.ln();
    let err = 1e-10 * (1.0 + magnitude(x) + magnitude(y));
    if gap > err {
        Some(Ordering::Greater)
    } else if gap < -err {
        Some(Ordering::Less)
    } else {
        None
    }
}

pub fn pow_rational(b: &BigRational, e: u64) -> BigRational {
    let e = u32::try_from(e).expect("exponent fits in u32");
    BigRational::new(
        num_traits::pow(b.numer().clone(), e as usize),
        num_traits::pow(b.denom().clone(), e as usize),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(p: i64, r: i64) -> BigRational {
        BigRational::new(p.into(), r.into())
    }

    #[test]
    fn log_zero_is_below_everything() {
        assert_eq!(LogWeight::ZERO.total_cmp(&LogWeight::from_ln(-1e300)), Ordering::Less);
        assert!(LogWeight::ZERO.add(LogWeight::ZERO).is_zero());
        assert_eq!(LogWeight::ZERO.add(LogWeight::ONE), LogWeight::ONE);
    }

    #[test]
    fn log_sum_exp_matches_direct_sum() {
        let xs = [0.5f64, 3.0, 1e-3, 7.25, 0.0];
        let mut acc = LogSumExp::default();
        for x in xs {
            acc.push(LogWeight::from_f64(x));
        }
        let direct: f64 = xs.iter().sum();
        assert!((acc.finish().to_f64() - direct).abs() < 1e-12 * direct);
    }

    #[test]
    fn log_sum_exp_survives_huge_magnitudes() {
        let mut acc = LogSumExp::default();
        acc.push(LogWeight::from_ln(1000.0));
        acc.push(LogWeight::from_ln(1000.0));
        assert!((acc.finish().ln() - (1000.0 + 2f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn ln_of_large_integer() {
        let x = num_traits::pow(BigUint::from(3u32), 2000);
        let expect = 2000.0 * 3f64.ln();
        assert!((ln_biguint(&x) - expect).abs() < 1e-12 * expect);
    }

    #[test]
    fn parse_and_format_rationals() {
        assert_eq!(parse_rational("6/4"), Some(q(3, 2)));
        assert_eq!(parse_rational("7"), Some(q(7, 1)));
        assert_eq!(parse_rational("0"), Some(q(0, 1)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("-1"), None);
        assert_eq!(parse_rational("1.5"), None);
        assert_eq!(format_rational(&q(6, 4)), "3/2");
        assert_eq!(format_rational(&q(4, 2)), "2");
    }

    #[test]
    fn radical_merges_equal_roots() {
        let mut r = RadicalProduct::new();
        r.push(q(7, 1), 2);
        r.push(q(7, 1), 2);
        r.push(q(7, 1), 2);
        assert_eq!(r.factors().len(), 1);
        // 7^{3/2} vs 18 and 19
        assert_eq!(r.cmp_rational(&q(18, 1)), Ordering::Greater);
        assert_eq!(r.cmp_rational(&q(19, 1)), Ordering::Less);
        assert!((r.ln() - 1.5 * 7f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn radical_exact_equality_across_roots() {
        // 4^{1/2} * 8^{1/3} = 4 = 16^{1/2}
        let mut a = RadicalProduct::new();
        a.push(q(4, 1), 2);
        a.push(q(8, 1), 3);
        assert_eq!(a.cmp_exact(&RadicalProduct::single(q(16, 1), 2)), Ordering::Equal);
        assert_eq!(a.cmp_rational(&q(4, 1)), Ordering::Equal);
    }

    #[test]
    fn float_filter_agrees_with_exact_power() {
        // Large exponents push the comparison through the filter.
        let mut a = RadicalProduct::new();
        for k in 1..=24u64 {
            a.push(q(2 * k as i64 + 1, 3), k);
        }
        let ln = a.ln();
        let lo = BigRational::from_float((ln - 1e-3).exp()).unwrap();
        let hi = BigRational::from_float((ln + 1e-3).exp()).unwrap();
        assert_eq!(a.cmp_rational(&lo), Ordering::Greater);
        assert_eq!(a.cmp_rational(&hi), Ordering::Less);
    }

    #[test]
    fn exact_to_log_agrees() {
        let a = NonNegValue::ratio(10, 3);
        let b = NonNegValue::ratio(1000, 299);
        assert_eq!(a.compare(&b), Ordering::Less);
        assert!(a.to_log().ln() < b.to_log().ln());
        assert!(((a.to_log().to_f64()) - 10.0 / 3.0).abs() < 1e-12);
    }
}
