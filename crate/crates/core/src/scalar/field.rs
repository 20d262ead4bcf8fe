//! Exact arithmetic in the multiquadratic field Q(√2, √3, √5).
//!
//! Elements are stored as eight rational coordinates over the basis
//! `(1, √2, √3, √5, √6, √10, √15, √30)`. Internally each basis vector is
//! identified with a subset of the primes `{2, 3, 5}` (a 3-bit mask), so a
//! product of two basis vectors is the basis vector of the symmetric
//! difference times the product of the shared primes.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{parse_rational, ScalarError};

/// Number of basis vectors.
pub const DEGREE: usize = 8;

const PRIMES: [i64; 3] = [2, 3, 5];

/// Prime-subset mask of each basis position.
const MASK: [usize; DEGREE] = [0b000, 0b001, 0b010, 0b100, 0b011, 0b101, 0b110, 0b111];
/// Basis position of each mask.
const INDEX: [usize; DEGREE] = [0, 1, 2, 4, 3, 5, 6, 7];

/// Radicand of each basis position.
pub const RADICANDS: [u32; DEGREE] = [1, 2, 3, 5, 6, 10, 15, 30];

const SQRT: [f64; DEGREE] = [
    1.0,
    std::f64::consts::SQRT_2,
    1.732_050_807_568_877_2,
    2.236_067_977_499_79,
    2.449_489_742_783_178,
    3.162_277_660_168_379_5,
    3.872_983_346_207_417,
    5.477_225_575_051_661,
];

/// `(target position, rational factor)` for the product of basis vectors `i` and `j`.
fn basis_product(i: usize, j: usize) -> (usize, i64) {
    let (a, b) = (MASK[i], MASK[j]);
    let shared = a & b;
    let factor = (0..3)
        .filter(|bit| shared & (1 << bit) != 0)
        .map(|bit| PRIMES[bit])
        .product();
    (INDEX[a ^ b], factor)
}

/// An exact element of Q(√2, √3, √5).
///
/// Coordinates are kept canonical (`BigRational` is always reduced with a
/// positive denominator), so structural equality is field equality.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct FieldElement {
    coeffs: [BigRational; DEGREE],
}

impl FieldElement {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::from_rational(BigRational::one())
    }

    pub fn from_rational(q: BigRational) -> Self {
        let mut x = Self::zero();
        x.coeffs[0] = q;
        x
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_rational(BigRational::new(num.into(), den.into()))
    }

    /// `√radicand` for a radicand in `{1, 2, 3, 5, 6, 10, 15, 30}`.
    pub fn sqrt_of(radicand: u32) -> Option<Self> {
        let pos = RADICANDS.iter().position(|&r| r == radicand)?;
        let mut x = Self::zero();
        x.coeffs[pos] = BigRational::one();
        Some(x)
    }

    pub fn from_coeffs(coeffs: [BigRational; DEGREE]) -> Self {
        Self { coeffs }
    }

    /// Coordinates over `(1, √2, √3, √5, √6, √10, √15, √30)`.
    pub fn coeffs(&self) -> &[BigRational; DEGREE] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn is_rational(&self) -> bool {
        self.coeffs[1..].iter().all(Zero::is_zero)
    }

    /// The rational part if the element is rational.
    pub fn as_rational(&self) -> Option<&BigRational> {
        self.is_rational().then(|| &self.coeffs[0])
    }

    /// True iff the element is a rational integer.
    pub fn is_integer(&self) -> bool {
        self.as_rational().is_some_and(|q| q.is_integer())
    }

    /// Double-precision value. Exact cancellations have already happened in
    /// the coordinates, so e.g. `1 + √2 − √2` evaluates to exactly `1.0`.
    pub fn to_f64(&self) -> f64 {
        self.coeffs
            .iter()
            .zip(SQRT)
            .filter(|(c, _)| !c.is_zero())
            .map(|(c, s)| c.to_f64().unwrap_or(f64::NAN) * s)
            .sum()
    }

    /// Galois conjugate flipping the sign of `√p` for the prime at `bit`.
    fn conjugate(&self, bit: usize) -> Self {
        let mut out = self.clone();
        for (pos, c) in out.coeffs.iter_mut().enumerate() {
            if MASK[pos] & (1 << bit) != 0 {
                *c = -c.clone();
            }
        }
        out
    }

    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        // Multiplying by the conjugate in each prime makes the running
        // product invariant under that conjugation; after all three it is
        // rational (the field norm).
        let mut numerator = Self::one();
        let mut norm = self.clone();
        for bit in 0..3 {
            let c = norm.conjugate(bit);
            numerator = &numerator * &c;
            norm = &norm * &c;
        }
        let n = norm.coeffs[0].clone();
        debug_assert!(norm.is_rational() && !n.is_zero());
        Some(numerator.scale(&n.recip()))
    }

    pub fn checked_div(&self, rhs: &Self) -> Result<Self, ScalarError> {
        rhs.inv().map(|r| self * &r).ok_or(ScalarError::DivisionByZero)
    }

    pub fn scale(&self, q: &BigRational) -> Self {
        let mut out = self.clone();
        for c in out.coeffs.iter_mut() {
            *c *= q;
        }
        out
    }

    /// Exact sign.
    pub fn signum(&self) -> Ordering {
        sign_below(self, 3)
    }

    pub fn abs(&self) -> Self {
        if self.signum() == Ordering::Less {
            -self.clone()
        } else {
            self.clone()
        }
    }

    /// Exact floor as an integer.
    pub fn floor(&self) -> BigInt {
        if let Some(q) = self.as_rational() {
            return q.floor().to_integer();
        }
        let approx = self.to_f64().floor();
        let mut k = BigInt::from(approx as i64);
        while (self - &Self::from_rational(BigRational::from_integer(k.clone()))).signum() == Ordering::Less {
            k -= 1;
        }
        while (self - &Self::from_rational(BigRational::from_integer(&k + 1))).signum() != Ordering::Less {
            k += 1;
        }
        k
    }

    /// Reduce into `[0, 1)`.
    pub fn fract(&self) -> Self {
        self - &Self::from_rational(BigRational::from_integer(self.floor()))
    }

    /// Least common multiple of the coordinate denominators.
    pub fn denominator_lcm(&self) -> BigInt {
        use num_integer::Integer;
        self.coeffs.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()))
    }

    /// Integer numerators over the common denominator `denominator_lcm`.
    fn integral(&self) -> ([BigInt; DEGREE], BigInt) {
        let den = self.denominator_lcm();
        let nums = std::array::from_fn(|i| {
            let c = &self.coeffs[i];
            if c.is_zero() {
                BigInt::zero()
            } else {
                c.numer() * (&den / c.denom())
            }
        });
        (nums, den)
    }

    /// Human-readable sum-of-radicals form, e.g. `1/2 + 3*sqrt2 - sqrt15`.
    pub fn pretty(&self) -> String {
        let mut out = String::new();
        for (pos, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let mag = c.abs();
            if out.is_empty() {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            if pos == 0 {
                out.push_str(&mag.to_string());
            } else {
                if !mag.is_one() {
                    out.push_str(&mag.to_string());
                    out.push('*');
                }
                out.push_str(&format!("sqrt{}", RADICANDS[pos]));
            }
        }
        if out.is_empty() {
            out.push('0');
        }
        out
    }

    /// Parse the sum-of-radicals form produced by [`FieldElement::pretty`].
    fn parse_expression(s: &str) -> Result<Self, ScalarError> {
        let bad = || ScalarError::Parse(s.to_string());
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(bad());
        }
        // split into signed terms
        let mut terms = Vec::new();
        let mut start = 0;
        for (i, ch) in compact.char_indices() {
            if (ch == '+' || ch == '-') && i > start {
                terms.push(&compact[start..i]);
                start = i;
            }
        }
        terms.push(&compact[start..]);

        let mut acc = Self::zero();
        for term in terms {
            let (neg, body) = match term.as_bytes().first() {
                Some(b'-') => (true, &term[1..]),
                Some(b'+') => (false, &term[1..]),
                _ => (false, term),
            };
            if body.is_empty() {
                return Err(bad());
            }
            let body = body.replace('√', "sqrt");
            let value = match body.find("sqrt") {
                None => Self::from_rational(parse_rational(&body).ok_or_else(bad)?),
                Some(at) => {
                    let coeff = match &body[..at] {
                        "" => BigRational::one(),
                        c => parse_rational(c.strip_suffix('*').ok_or_else(bad)?).ok_or_else(bad)?,
                    };
                    let rest = &body[at + 4..];
                    let digits_end = rest.find(|c: char| !c.is_ascii_digit()).unwrap_or(rest.len());
                    let radicand: u32 = rest[..digits_end].parse().map_err(|_| bad())?;
                    let divisor = match &rest[digits_end..] {
                        "" => BigRational::one(),
                        d => parse_rational(d.strip_prefix('/').ok_or_else(bad)?).ok_or_else(bad)?,
                    };
                    if divisor.is_zero() {
                        return Err(bad());
                    }
                    Self::sqrt_of(radicand).ok_or_else(bad)?.scale(&(coeff / divisor))
                }
            };
            acc = if neg { &acc - &value } else { &acc + &value };
        }
        Ok(acc)
    }

    /// The canonical 8-tuple form `(p/q,...)`.
    pub fn tuple_string(&self) -> String {
        let parts: Vec<String> = self.coeffs.iter().map(ToString::to_string).collect();
        format!("({})", parts.join(","))
    }
}

/// Exact sign of an element whose coordinates only use the primes below `bits`.
///
/// Writes `x = u + v·√p` with `u, v` in the smaller field. When the signs of
/// `u` and `v` disagree, the sign of `x` is `sign(u) · sign(u² − p v²)`.
fn sign_below(x: &FieldElement, bits: usize) -> Ordering {
    if bits == 0 {
        return x.coeffs[0].cmp(&BigRational::zero());
    }
    let bit = bits - 1;
    let mut u = FieldElement::zero();
    let mut v = FieldElement::zero();
    for pos in 0..DEGREE {
        let m = MASK[pos];
        if m >> bits != 0 {
            debug_assert!(x.coeffs[pos].is_zero());
            continue;
        }
        if m & (1 << bit) != 0 {
            v.coeffs[INDEX[m ^ (1 << bit)]] = x.coeffs[pos].clone();
        } else {
            u.coeffs[pos] = x.coeffs[pos].clone();
        }
    }
    let su = sign_below(&u, bit);
    let sv = sign_below(&v, bit);
    match (su, sv) {
        (s, Ordering::Equal) => s,
        (Ordering::Equal, s) => s,
        (a, b) if a == b => a,
        (a, _) => {
            let p = BigRational::from_integer(PRIMES[bit].into());
            let t = &(&u * &u) - &(&v * &v).scale(&p);
            match sign_below(&t, bit) {
                Ordering::Greater => a,
                Ordering::Less => a.reverse(),
                Ordering::Equal => unreachable!("√p is irrational"),
            }
        }
    }
}

impl PartialOrd for FieldElement {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for FieldElement {
    fn cmp(&self, other: &Self) -> Ordering {
        (self - other).signum()
    }
}

impl<'a> Add<&'a FieldElement> for &'a FieldElement {
    type Output = FieldElement;
    fn add(self, rhs: &FieldElement) -> FieldElement {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl<'a> Sub<&'a FieldElement> for &'a FieldElement {
    type Output = FieldElement;
    fn sub(self, rhs: &FieldElement) -> FieldElement {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl<'a> Mul<&'a FieldElement> for &'a FieldElement {
    type Output = FieldElement;
    fn mul(self, rhs: &FieldElement) -> FieldElement {
        // integer numerators over a common denominator keep the 64 partial
        // products free of gcd work; only the 8 results get reduced
        let (na, da) = self.integral();
        let (nb, db) = rhs.integral();
        let mut acc: [BigInt; DEGREE] = Default::default();
        for (i, a) in na.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in nb.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                let (k, factor) = basis_product(i, j);
                let term = a * b;
                if factor == 1 {
                    acc[k] += term;
                } else {
                    acc[k] += term * factor;
                }
            }
        }
        let den = da * db;
        FieldElement {
            coeffs: acc.map(|n| {
                if n.is_zero() {
                    BigRational::zero()
                } else {
                    BigRational::new(n, den.clone())
                }
            }),
        }
    }
}

impl AddAssign<&FieldElement> for FieldElement {
    fn add_assign(&mut self, rhs: &FieldElement) {
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            if !b.is_zero() {
                *a += b;
            }
        }
    }
}

impl SubAssign<&FieldElement> for FieldElement {
    fn sub_assign(&mut self, rhs: &FieldElement) {
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            if !b.is_zero() {
                *a -= b;
            }
        }
    }
}

impl MulAssign<&FieldElement> for FieldElement {
    fn mul_assign(&mut self, rhs: &FieldElement) {
        *self = &*self * rhs;
    }
}

impl Neg for FieldElement {
    type Output = FieldElement;
    fn neg(mut self) -> FieldElement {
        for c in self.coeffs.iter_mut() {
            *c = -c.clone();
        }
        self
    }
}

impl Add for FieldElement {
    type Output = FieldElement;
    fn add(mut self, rhs: FieldElement) -> FieldElement {
        self += &rhs;
        self
    }
}

impl Sub for FieldElement {
    type Output = FieldElement;
    fn sub(mut self, rhs: FieldElement) -> FieldElement {
        self -= &rhs;
        self
    }
}

impl Mul for FieldElement {
    type Output = FieldElement;
    fn mul(self, rhs: FieldElement) -> FieldElement {
        &self * &rhs
    }
}

/// Panics on division by zero; use [`FieldElement::checked_div`] for the
/// fallible form.
impl Div for FieldElement {
    type Output = FieldElement;
    fn div(self, rhs: FieldElement) -> FieldElement {
        self.checked_div(&rhs).expect("division by zero in FieldElement")
    }
}

impl From<i64> for FieldElement {
    fn from(n: i64) -> Self {
        Self::from_int(n)
    }
}

impl From<BigRational> for FieldElement {
    fn from(q: BigRational) -> Self {
        Self::from_rational(q)
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.pretty())
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FieldElement({})", self.pretty())
    }
}

/// Accepts either the 8-tuple form `(p/q,...,p/q)` or the sum-of-radicals
/// form `1/2 + 3*sqrt2 - sqrt15/4`.
impl FromStr for FieldElement {
    type Err = ScalarError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        if let Some(inner) = t.strip_prefix('(').and_then(|r| r.strip_suffix(')')) {
            let parts: Vec<&str> = inner.split(',').collect();
            return Self::from_coord_strings(&parts).map_err(|_| ScalarError::Parse(s.to_string()));
        }
        Self::parse_expression(t)
    }
}

impl FieldElement {
    fn from_coord_strings<S: AsRef<str>>(parts: &[S]) -> Result<Self, ScalarError> {
        if parts.len() != DEGREE {
            return Err(ScalarError::Parse(format!(
                "expected {DEGREE} coordinates, got {}",
                parts.len()
            )));
        }
        let mut x = Self::zero();
        for (c, p) in x.coeffs.iter_mut().zip(parts) {
            *c = parse_rational(p.as_ref().trim()).ok_or_else(|| ScalarError::Parse(p.as_ref().to_string()))?;
        }
        Ok(x)
    }
}

/// JSON form: an array of eight `"p/q"` strings.
impl Serialize for FieldElement {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let parts: Vec<String> = self.coeffs.iter().map(ToString::to_string).collect();
        parts.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for FieldElement {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let parts = Vec::<String>::deserialize(deserializer)?;
        Self::from_coord_strings(&parts).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fe(s: &str) -> FieldElement {
        s.parse().unwrap()
    }

    #[test]
    fn sqrt2_squared_is_two() {
        let r2 = FieldElement::sqrt_of(2).unwrap();
        assert_eq!(&r2 * &r2, FieldElement::from_int(2));
    }

    #[test]
    fn sqrt6_times_sqrt10() {
        let p = &fe("sqrt6") * &fe("sqrt10");
        assert_eq!(p, fe("2*sqrt15"));
        // double-precision oracle for the table entry
        assert!((6f64.sqrt() * 10f64.sqrt() - 2.0 * 15f64.sqrt()).abs() < 1e-12);
        assert!((p.to_f64() - 6f64.sqrt() * 10f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn product_table_matches_floats() {
        for i in 0..DEGREE {
            for j in 0..DEGREE {
                let (k, factor) = basis_product(i, j);
                let lhs = SQRT[i] * SQRT[j];
                let rhs = factor as f64 * SQRT[k];
                assert!((lhs - rhs).abs() < 1e-12, "{i} {j}");
            }
        }
    }

    #[test]
    fn division_by_zero_is_an_error() {
        assert_eq!(
            FieldElement::one().checked_div(&FieldElement::zero()),
            Err(ScalarError::DivisionByZero)
        );
    }

    #[test]
    fn inverse_of_generic_element() {
        let x = fe("1/3 - 2*sqrt2 + sqrt5 + 7/2*sqrt30");
        assert_eq!(&x * &x.inv().unwrap(), FieldElement::one());
    }

    #[test]
    fn to_float_values() {
        assert_eq!(FieldElement::zero().to_f64(), 0.0);
        assert!((fe("sqrt2").to_f64() - std::f64::consts::SQRT_2).abs() < 1e-15);
        let x = &(&FieldElement::one() + &fe("sqrt2")) - &fe("sqrt2");
        assert_eq!(x.to_f64(), 1.0);
    }

    #[test]
    fn exact_sign_close_to_zero() {
        // 99/70 is a continued-fraction convergent of √2 from above.
        assert_eq!(fe("sqrt2 - 99/70").signum(), Ordering::Less);
        assert_eq!(fe("sqrt2 - 140/99").signum(), Ordering::Greater);
        // √2 + √3 vs √10: 5 + 2√6 < 10 iff √6 < 5/2, true.
        assert_eq!(fe("sqrt2 + sqrt3 - sqrt10").signum(), Ordering::Less);
        // √2 + √3 + √5 ≈ 5.382 < √30 ≈ 5.477
        assert_eq!(fe("sqrt2 + sqrt3 + sqrt5 - sqrt30").signum(), Ordering::Less);
    }

    #[test]
    fn floor_and_fract() {
        assert_eq!(fe("sqrt2").floor(), BigInt::from(1));
        assert_eq!(fe("-sqrt2").floor(), BigInt::from(-2));
        assert_eq!(fe("7/2").floor(), BigInt::from(3));
        assert_eq!(fe("sqrt2 + 3").fract(), fe("sqrt2 - 1"));
    }

    #[test]
    fn parse_forms_agree() {
        let a = fe("1/2 + 3*sqrt2 - sqrt15/4");
        let b = fe(&a.tuple_string());
        assert_eq!(a, b);
        assert_eq!(fe(&a.pretty()), a);
        assert_eq!(fe("√2"), fe("sqrt2"));
        assert!("sqrt7".parse::<FieldElement>().is_err());
        assert!("".parse::<FieldElement>().is_err());
        assert!("(1,2)".parse::<FieldElement>().is_err());
    }

    #[test]
    fn json_is_array_of_strings() {
        let a = fe("-1/2 + sqrt3");
        let js = serde_json::to_string(&a).unwrap();
        assert_eq!(js, r#"["-1/2","0","1","0","0","0","0","0"]"#);
        let back: FieldElement = serde_json::from_str(&js).unwrap();
        assert_eq!(back, a);
    }
}
