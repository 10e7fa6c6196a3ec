//! Exact arithmetic in a real quadratic field `Q(sqrt(D))` and its ring of integers.
//!
//! Elements are always stored as `a + b*sqrt(D)` with rational `a`, `b`, whatever the
//! integral basis of the field is. Membership in the ring of integers is a predicate.
//! The "first embedding" sends `sqrt(D)` to the positive real root; all scalar
//! inequalities (`<` on elements) refer to it.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_integer::{Integer, Roots};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use thiserror::Error;

pub type Rational = BigRational;

/// Default ceiling on the `sqrt(D)` coordinate searched for the fundamental unit.
pub const DEFAULT_UNIT_CEILING: u64 = 1_000_000;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("D = {0} is not a squarefree integer greater than 1")]
    InvalidDiscriminant(i64),
    #[error("no fundamental unit with sqrt(D)-coordinate up to {0}")]
    UnitBudgetExhausted(u64),
    #[error("division by zero")]
    DivisionByZero,
}

/// Which integral basis the ring of integers has.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BasisKind {
    /// `{1, sqrt(D)}`, for `D = 2, 3 (mod 4)`.
    Sqrt,
    /// `{1, (1 + sqrt(D))/2}`, for `D = 1 (mod 4)`.
    Half,
}

impl BasisKind {
    pub fn for_discriminant(d: i64) -> BasisKind {
        if d.rem_euclid(4) == 1 {
            BasisKind::Half
        } else {
            BasisKind::Sqrt
        }
    }
}

/// Sign of `a + b*sqrt(d)` for squarefree `d > 1`, decided without floating point.
pub fn surd_sign(a: &Rational, b: &Rational, d: i64) -> Ordering {
    let sa = a.cmp(&Rational::zero());
    let sb = b.cmp(&Rational::zero());
    match (sa, sb) {
        (_, Ordering::Equal) => sa,
        (Ordering::Equal, _) => sb,
        _ if sa == sb => sa,
        _ => {
            // a^2 == d*b^2 is impossible for nonzero rationals and squarefree d
            let lhs = a * a;
            let rhs = b * b * int(d);
            if lhs > rhs {
                sa
            } else {
                sb
            }
        }
    }
}

/// An element `a + b*sqrt(D)` of `Q(sqrt(D))`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct FieldElement {
    a: Rational,
    b: Rational,
    d: i64,
}

impl FieldElement {
    pub fn new(d: i64, a: Rational, b: Rational) -> Self {
        FieldElement { a, b, d }
    }

    pub fn from_ints(d: i64, a: i64, b: i64) -> Self {
        FieldElement::new(d, int(a), int(b))
    }

    pub fn from_rational(d: i64, a: Rational) -> Self {
        FieldElement::new(d, a, Rational::zero())
    }

    pub fn from_int(d: i64, a: i64) -> Self {
        FieldElement::from_ints(d, a, 0)
    }

    pub fn zero(d: i64) -> Self {
        FieldElement::from_int(d, 0)
    }

    pub fn one(d: i64) -> Self {
        FieldElement::from_int(d, 1)
    }

    /// Builds `p + q*w` where `{1, w}` is the integral basis for `d`.
    pub fn from_integral_coords(d: i64, p: &BigInt, q: &BigInt) -> Self {
        match BasisKind::for_discriminant(d) {
            BasisKind::Sqrt => FieldElement::new(
                d,
                Rational::from_integer(p.clone()),
                Rational::from_integer(q.clone()),
            ),
            BasisKind::Half => {
                let two = BigInt::from(2);
                FieldElement::new(
                    d,
                    Rational::new(p * &two + q, two.clone()),
                    Rational::new(q.clone(), two),
                )
            }
        }
    }

    pub fn a(&self) -> &Rational {
        &self.a
    }

    pub fn b(&self) -> &Rational {
        &self.b
    }

    pub fn d(&self) -> i64 {
        self.d
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn conj(&self) -> Self {
        FieldElement::new(self.d, self.a.clone(), -&self.b)
    }

    pub fn norm(&self) -> Rational {
        &self.a * &self.a - &self.b * &self.b * int(self.d)
    }

    pub fn trace(&self) -> Rational {
        &self.a * int(2)
    }

    pub fn norm_trace(&self) -> (Rational, Rational) {
        (self.norm(), self.trace())
    }

    /// Sign under the first embedding (`sqrt(D) > 0`).
    pub fn sign_first(&self) -> Ordering {
        surd_sign(&self.a, &self.b, self.d)
    }

    /// Sign under the conjugate embedding.
    pub fn sign_second(&self) -> Ordering {
        surd_sign(&self.a, &-&self.b, self.d)
    }

    /// `self > 0` and `conj(self) > 0`.
    pub fn is_totally_positive(&self) -> bool {
        self.sign_first() == Ordering::Greater && self.sign_second() == Ordering::Greater
    }

    /// `self` is zero or totally positive.
    pub fn is_totally_nonnegative(&self) -> bool {
        self.sign_first() != Ordering::Less && self.sign_second() != Ordering::Less
    }

    /// `self <= other` in both embeddings.
    pub fn totally_le(&self, other: &FieldElement) -> bool {
        (other - self).is_totally_nonnegative()
    }

    /// Comparison in the first embedding.
    pub fn cmp_first(&self, other: &FieldElement) -> Ordering {
        (self - other).sign_first()
    }

    pub fn to_f64_first(&self) -> f64 {
        rational_to_f64(&self.a) + rational_to_f64(&self.b) * (self.d as f64).sqrt()
    }

    pub fn to_f64_second(&self) -> f64 {
        rational_to_f64(&self.a) - rational_to_f64(&self.b) * (self.d as f64).sqrt()
    }

    pub fn inverse(&self) -> Result<FieldElement, FieldError> {
        if self.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        let n = self.norm();
        Ok(FieldElement::new(self.d, &self.a / &n, -&self.b / &n))
    }

    pub fn checked_div(&self, rhs: &FieldElement) -> Result<FieldElement, FieldError> {
        Ok(self * &rhs.inverse()?)
    }

    pub fn scale(&self, c: &Rational) -> FieldElement {
        FieldElement::new(self.d, &self.a * c, &self.b * c)
    }

    pub fn square(&self) -> FieldElement {
        self * self
    }

    /// Integer power; negative exponents need an invertible element.
    pub fn pow(&self, exp: i64) -> Result<FieldElement, FieldError> {
        let base = if exp < 0 { self.inverse()? } else { self.clone() };
        let mut e = exp.unsigned_abs();
        let mut acc = FieldElement::one(self.d);
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &sq;
            }
            sq = sq.square();
            e >>= 1;
        }
        Ok(acc)
    }

    /// Membership in the ring of integers.
    pub fn is_integral(&self) -> bool {
        match BasisKind::for_discriminant(self.d) {
            BasisKind::Sqrt => self.a.is_integer() && self.b.is_integer(),
            BasisKind::Half => {
                let a2 = &self.a * int(2);
                let b2 = &self.b * int(2);
                a2.is_integer()
                    && b2.is_integer()
                    && (a2.to_integer() - b2.to_integer()).is_even()
            }
        }
    }

    /// Coordinates `(p, q)` in the integral basis, if the element is integral.
    pub fn integral_coords(&self) -> Option<(BigInt, BigInt)> {
        if !self.is_integral() {
            return None;
        }
        match BasisKind::for_discriminant(self.d) {
            BasisKind::Sqrt => Some((self.a.to_integer(), self.b.to_integer())),
            BasisKind::Half => {
                let q = (&self.b * int(2)).to_integer();
                let p = (&self.a - &self.b).to_integer();
                Some((p, q))
            }
        }
    }

    fn check_same_field(&self, other: &FieldElement) {
        assert_eq!(self.d, other.d, "elements of different quadratic fields");
    }
}

pub(crate) fn rational_to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        if q.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

fn fmt_rational(q: &Rational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Text form `R`, `R+Rs` or `R-Rs`, where `s` stands for `sqrt(D)`.
impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            return write!(f, "{}", fmt_rational(&self.a));
        }
        let sign = if self.b.is_negative() { '-' } else { '+' };
        write!(
            f,
            "{}{}{}s",
            fmt_rational(&self.a),
            sign,
            fmt_rational(&self.b.abs())
        )
    }
}

impl Serialize for FieldElement {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("FieldElement", 2)?;
        st.serialize_field("a", &fmt_rational(&self.a))?;
        st.serialize_field("b", &fmt_rational(&self.b))?;
        st.end()
    }
}

impl<'a> Add<&'a FieldElement> for &'a FieldElement {
    type Output = FieldElement;
    fn add(self, rhs: &FieldElement) -> FieldElement {
        self.check_same_field(rhs);
        FieldElement::new(self.d, &self.a + &rhs.a, &self.b + &rhs.b)
    }
}

impl<'a> Sub<&'a FieldElement> for &'a FieldElement {
    type Output = FieldElement;
    fn sub(self, rhs: &FieldElement) -> FieldElement {
        self.check_same_field(rhs);
        FieldElement::new(self.d, &self.a - &rhs.a, &self.b - &rhs.b)
    }
}

impl<'a> Mul<&'a FieldElement> for &'a FieldElement {
    type Output = FieldElement;
    fn mul(self, rhs: &FieldElement) -> FieldElement {
        self.check_same_field(rhs);
        let a = &self.a * &rhs.a + &self.b * &rhs.b * int(self.d);
        let b = &self.a * &rhs.b + &self.b * &rhs.a;
        FieldElement::new(self.d, a, b)
    }
}

impl Neg for &FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        FieldElement::new(self.d, -&self.a, -&self.b)
    }
}

impl Neg for FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        -&self
    }
}

macro_rules! forward_owned_binop {
    ($tr:ident, $method:ident) => {
        impl $tr<FieldElement> for FieldElement {
            type Output = FieldElement;
            fn $method(self, rhs: FieldElement) -> FieldElement {
                (&self).$method(&rhs)
            }
        }
        impl<'a> $tr<&'a FieldElement> for FieldElement {
            type Output = FieldElement;
            fn $method(self, rhs: &FieldElement) -> FieldElement {
                (&self).$method(rhs)
            }
        }
        impl<'a> $tr<FieldElement> for &'a FieldElement {
            type Output = FieldElement;
            fn $method(self, rhs: FieldElement) -> FieldElement {
                self.$method(&rhs)
            }
        }
    };
}

forward_owned_binop!(Add, add);
forward_owned_binop!(Sub, sub);
forward_owned_binop!(Mul, mul);

impl AddAssign<&FieldElement> for FieldElement {
    fn add_assign(&mut self, rhs: &FieldElement) {
        self.check_same_field(rhs);
        self.a += &rhs.a;
        self.b += &rhs.b;
    }
}

impl SubAssign<&FieldElement> for FieldElement {
    fn sub_assign(&mut self, rhs: &FieldElement) {
        self.check_same_field(rhs);
        self.a -= &rhs.a;
        self.b -= &rhs.b;
    }
}

/// Elementwise arithmetic selector, mirroring the four field operations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

pub fn arith(lhs: &FieldElement, rhs: &FieldElement, op: ArithOp) -> Result<FieldElement, FieldError> {
    match op {
        ArithOp::Add => Ok(lhs + rhs),
        ArithOp::Sub => Ok(lhs - rhs),
        ArithOp::Mul => Ok(lhs * rhs),
        ArithOp::Div => lhs.checked_div(rhs),
    }
}

/// The field `Q(sqrt(D))` together with its fundamental unit.
#[derive(Clone, Debug)]
pub struct FieldContext {
    d: i64,
    basis: BasisKind,
    unit: FieldElement,
}

fn is_squarefree(d: i64) -> bool {
    let mut n = d;
    let mut p = 2i64;
    while p * p <= n {
        if n % p == 0 {
            n /= p;
            if n % p == 0 {
                return false;
            }
        }
        p += 1;
    }
    true
}

impl FieldContext {
    pub fn new(d: i64) -> Result<FieldContext, FieldError> {
        FieldContext::with_unit_ceiling(d, DEFAULT_UNIT_CEILING)
    }

    pub fn with_unit_ceiling(d: i64, ceiling: u64) -> Result<FieldContext, FieldError> {
        if d < 2 || !is_squarefree(d) {
            return Err(FieldError::InvalidDiscriminant(d));
        }
        let unit = fundamental_unit_search(d, ceiling)?;
        Ok(FieldContext {
            d,
            basis: BasisKind::for_discriminant(d),
            unit,
        })
    }

    pub fn d(&self) -> i64 {
        self.d
    }

    pub fn basis_kind(&self) -> BasisKind {
        self.basis
    }

    /// The smallest unit greater than one.
    pub fn fundamental_unit(&self) -> &FieldElement {
        &self.unit
    }

    pub fn element(&self, a: Rational, b: Rational) -> FieldElement {
        FieldElement::new(self.d, a, b)
    }

    pub fn from_ints(&self, a: i64, b: i64) -> FieldElement {
        FieldElement::from_ints(self.d, a, b)
    }

    pub fn from_int(&self, a: i64) -> FieldElement {
        FieldElement::from_int(self.d, a)
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement::zero(self.d)
    }

    pub fn one(&self) -> FieldElement {
        FieldElement::one(self.d)
    }

    /// Totally positive units are exactly the powers of this element.
    pub fn totally_positive_unit_generator(&self) -> FieldElement {
        if self.unit.norm().is_one() {
            self.unit.clone()
        } else {
            self.unit.square()
        }
    }

    pub fn enumerate_totally_positive(&self, trace_bound: u64) -> TotallyPositiveListing {
        enumerate_totally_positive(self, trace_bound)
    }
}

/// Ascending search on the `sqrt(D)` coordinate for `|x^2 - D y^2| = 1` (or `= 4` in the
/// half-integral case); the first hit is the smallest unit above one.
fn fundamental_unit_search(d: i64, ceiling: u64) -> Result<FieldElement, FieldError> {
    let half = BasisKind::for_discriminant(d) == BasisKind::Half;
    let target: i128 = if half { 4 } else { 1 };
    let dd = d as i128;
    for y in 1..=ceiling as i128 {
        let dy2 = dd * y * y;
        let mut best: Option<i128> = None;
        for rhs in [dy2 - target, dy2 + target] {
            if rhs <= 0 {
                continue;
            }
            let x = rhs.sqrt();
            if x * x != rhs || (half && (x - y).rem_euclid(2) != 0) {
                continue;
            }
            best = Some(best.map_or(x, |b: i128| b.min(x)));
        }
        if let Some(x) = best {
            let (x, y) = (BigInt::from(x), BigInt::from(y));
            let unit = if half {
                FieldElement::new(
                    d,
                    Rational::new(x, BigInt::from(2)),
                    Rational::new(y, BigInt::from(2)),
                )
            } else {
                FieldElement::new(d, Rational::from_integer(x), Rational::from_integer(y))
            };
            return Ok(unit);
        }
    }
    Err(FieldError::UnitBudgetExhausted(ceiling))
}

/// Totally positive integers with trace at most `trace_bound`, sorted by `(trace, b)`.
#[derive(Clone, Debug, Serialize)]
pub struct TotallyPositiveListing {
    pub trace_bound: u64,
    pub elements: Vec<FieldElement>,
}

pub fn enumerate_totally_positive(ctx: &FieldContext, trace_bound: u64) -> TotallyPositiveListing {
    let d = ctx.d() as i128;
    let mut elements = Vec::new();
    // Write alpha = (t + s sqrt(D)) / 2 with integer t = Tr(alpha); total positivity is t^2 > D s^2.
    for t in 1..=trace_bound as i128 {
        let step_ok = |s: i128| match ctx.basis_kind() {
            BasisKind::Sqrt => t % 2 == 0 && s % 2 == 0,
            BasisKind::Half => (t - s).rem_euclid(2) == 0,
        };
        let mut smax = 0i128;
        while d * (smax + 1) * (smax + 1) < t * t {
            smax += 1;
        }
        for s in -smax..=smax {
            if step_ok(s) {
                elements.push(FieldElement::new(
                    ctx.d(),
                    Rational::new(BigInt::from(t), BigInt::from(2)),
                    Rational::new(BigInt::from(s), BigInt::from(2)),
                ));
            }
        }
    }
    TotallyPositiveListing {
        trace_bound,
        elements,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn el(d: i64, a: i64, b: i64) -> FieldElement {
        FieldElement::from_ints(d, a, b)
    }

    fn half(d: i64, a2: i64, b2: i64) -> FieldElement {
        FieldElement::new(d, rat(a2, 2), rat(b2, 2))
    }

    #[test]
    fn conjugation() {
        assert_eq!(el(2, 2, 1).conj(), el(2, 2, -1));
        assert_eq!(el(2, 0, 0).conj(), el(2, 0, 0));
        assert_eq!(half(5, 7, 3).conj(), half(5, 7, -3));
    }

    #[test]
    fn norm_and_trace() {
        assert_eq!(el(2, 3, 2).norm_trace(), (int(1), int(6)));
        assert_eq!(el(2, 1, 0).norm_trace(), (int(1), int(2)));
        assert_eq!(el(2, 2, 1).norm_trace(), (int(2), int(4)));
    }

    #[test]
    fn total_positivity() {
        assert!(el(2, 2, 1).is_totally_positive());
        assert!(!el(2, 1, 1).is_totally_positive());
        assert!(el(2, 58, -41).is_totally_positive());
        assert!(!el(2, 0, 0).is_totally_positive());
        assert!(el(2, 0, 0).is_totally_nonnegative());
        assert!(!el(2, -58, 41).is_totally_nonnegative());
    }

    #[test]
    fn arithmetic() {
        assert_eq!(&el(2, 3, 2) * &el(2, 3, -2), el(2, 1, 0));
        assert_eq!(el(2, 1, 1).pow(3).unwrap(), el(2, 7, 5));
        let x = half(5, 3, 1);
        assert_eq!(&x + &FieldElement::zero(5), x);
        let q = arith(&el(2, 7, 5), &el(2, 1, 1), ArithOp::Div).unwrap();
        assert_eq!(q, el(2, 3, 2));
        assert_eq!(
            arith(&el(2, 1, 1), &el(2, 0, 0), ArithOp::Div),
            Err(FieldError::DivisionByZero)
        );
        assert_eq!(el(2, 1, 1).pow(-2).unwrap(), el(2, 3, -2));
    }

    #[test]
    fn fundamental_units() {
        assert_eq!(FieldContext::new(2).unwrap().fundamental_unit(), &el(2, 1, 1));
        assert_eq!(FieldContext::new(5).unwrap().fundamental_unit(), &half(5, 1, 1));
        assert_eq!(FieldContext::new(3).unwrap().fundamental_unit(), &el(3, 2, 1));
        let eps = FieldContext::new(2).unwrap().fundamental_unit().square();
        assert_eq!(eps, el(2, 3, 2));
    }

    #[test]
    fn unit_budget_is_reported() {
        // D = 46 has fundamental unit 24335 + 3588 sqrt(46)
        assert_eq!(
            FieldContext::with_unit_ceiling(46, 100).unwrap_err(),
            FieldError::UnitBudgetExhausted(100)
        );
        let ctx = FieldContext::new(46).unwrap();
        assert_eq!(ctx.fundamental_unit(), &el(46, 24335, 3588));
    }

    #[test]
    fn rejects_non_squarefree() {
        for d in [0, 1, 4, 8, 12, -3] {
            assert_eq!(
                FieldContext::new(d).unwrap_err(),
                FieldError::InvalidDiscriminant(d)
            );
        }
    }

    #[test]
    fn listing_examples() {
        let c2 = FieldContext::new(2).unwrap();
        assert_eq!(
            c2.enumerate_totally_positive(4).elements,
            vec![el(2, 1, 0), el(2, 2, -1), el(2, 2, 0), el(2, 2, 1)]
        );
        assert!(c2.enumerate_totally_positive(1).elements.is_empty());
        let c5 = FieldContext::new(5).unwrap();
        assert_eq!(
            c5.enumerate_totally_positive(3).elements,
            vec![el(5, 1, 0), half(5, 3, -1), half(5, 3, 1)]
        );
    }

    #[test]
    fn integral_coordinates_round_trip() {
        let x = half(5, 3, 1);
        let (p, q) = x.integral_coords().unwrap();
        assert_eq!((p.clone(), q.clone()), (BigInt::from(1), BigInt::from(1)));
        assert_eq!(FieldElement::from_integral_coords(5, &p, &q), x);
        assert!(half(5, 1, 0).integral_coords().is_none());
        assert!(!half(13, 1, 0).is_integral());
        assert!(half(13, 1, 1).is_integral());
    }

    #[test]
    fn display() {
        assert_eq!(el(2, 58, -41).to_string(), "58-41s");
        assert_eq!(half(5, 3, 1).to_string(), "3/2+1/2s");
        assert_eq!(el(2, -3, 0).to_string(), "-3");
        assert_eq!(el(2, 0, 1).to_string(), "0+1s");
    }
}
