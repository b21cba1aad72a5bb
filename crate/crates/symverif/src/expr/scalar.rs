//! Concrete scalar values: exact rationals, switching to a 128-bit float once
//! an opaque operation or π enters the computation.

use astro_float::{BigFloat, Consts, Radix, RoundingMode};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;

/// Mantissa precision of approximate values in bits.
pub const PRECISION: usize = 128;
const RM: RoundingMode = RoundingMode::ToEven;
/// Rationals whose numerator plus denominator exceed this many bits are
/// converted to floats to keep long iterations tractable.
const EXACT_BIT_LIMIT: u64 = 4096;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("constant cache"));
}

fn with_consts<R>(f: impl FnOnce(&mut Consts) -> R) -> R {
    CONSTS.with(|c| f(&mut c.borrow_mut()))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ScalarError {
    DivByZero,
    NotFinite,
}

#[derive(Clone, Debug)]
pub enum Scalar {
    Exact(BigRational),
    Approx(BigFloat),
}

fn bigint_to_float(n: &BigInt) -> BigFloat {
    if let Some(v) = n.to_i128() {
        return BigFloat::from_i128(v, PRECISION);
    }
    with_consts(|cc| BigFloat::parse(&n.to_string(), Radix::Dec, PRECISION, RM, cc))
}

pub fn rational_to_float(r: &BigRational) -> BigFloat {
    bigint_to_float(r.numer()).div(&bigint_to_float(r.denom()), PRECISION, RM)
}

fn float_pi() -> BigFloat {
    with_consts(|cc| cc.pi(PRECISION, RM))
}

impl Scalar {
    pub fn int(v: i64) -> Scalar {
        Scalar::Exact(BigRational::from_integer(BigInt::from(v)))
    }

    pub fn from_bigint(v: BigInt) -> Scalar {
        Scalar::Exact(BigRational::from_integer(v))
    }

    pub fn ratio(n: i64, d: i64) -> Scalar {
        Scalar::Exact(BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn from_f64(v: f64) -> Scalar {
        Scalar::Approx(BigFloat::from_f64(v, PRECISION))
    }

    pub fn pi() -> Scalar {
        Scalar::Approx(float_pi())
    }

    pub fn bool(b: bool) -> Scalar {
        Scalar::int(if b { 1 } else { 0 })
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Scalar::Exact(_))
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            Scalar::Exact(r) => Some(r),
            Scalar::Approx(_) => None,
        }
    }

    pub fn as_integer(&self) -> Option<BigInt> {
        match self {
            Scalar::Exact(r) if r.is_integer() => Some(r.to_integer()),
            _ => None,
        }
    }

    fn to_float(&self) -> BigFloat {
        match self {
            Scalar::Exact(r) => rational_to_float(r),
            Scalar::Approx(f) => f.clone(),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            Scalar::Approx(f) => float_to_f64(f),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Exact(r) => r.is_zero(),
            Scalar::Approx(f) => f.is_zero(),
        }
    }

    /// Truth value under the C convention: any nonzero value is true.
    pub fn truthy(&self) -> bool {
        !self.is_zero()
    }

    fn exact(r: BigRational) -> Scalar {
        if r.numer().bits() + r.denom().bits() > EXACT_BIT_LIMIT {
            Scalar::Approx(rational_to_float(&r))
        } else {
            Scalar::Exact(r)
        }
    }

    fn approx(f: BigFloat) -> Result<Scalar, ScalarError> {
        if f.is_nan() || f.is_inf() {
            Err(ScalarError::NotFinite)
        } else {
            Ok(Scalar::Approx(f))
        }
    }

    pub fn add(&self, o: &Scalar) -> Result<Scalar, ScalarError> {
        match (self, o) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Ok(Scalar::exact(a + b)),
            _ => Scalar::approx(self.to_float().add(&o.to_float(), PRECISION, RM)),
        }
    }

    pub fn sub(&self, o: &Scalar) -> Result<Scalar, ScalarError> {
        match (self, o) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Ok(Scalar::exact(a - b)),
            _ => Scalar::approx(self.to_float().sub(&o.to_float(), PRECISION, RM)),
        }
    }

    pub fn mul(&self, o: &Scalar) -> Result<Scalar, ScalarError> {
        match (self, o) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Ok(Scalar::exact(a * b)),
            _ => Scalar::approx(self.to_float().mul(&o.to_float(), PRECISION, RM)),
        }
    }

    pub fn div(&self, o: &Scalar) -> Result<Scalar, ScalarError> {
        if o.is_zero() {
            return Err(ScalarError::DivByZero);
        }
        match (self, o) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Ok(Scalar::exact(a / b)),
            _ => Scalar::approx(self.to_float().div(&o.to_float(), PRECISION, RM)),
        }
    }

    pub fn neg(&self) -> Scalar {
        match self {
            Scalar::Exact(a) => Scalar::Exact(-a),
            Scalar::Approx(f) => Scalar::Approx(f.neg()),
        }
    }

    pub fn abs(&self) -> Scalar {
        match self {
            Scalar::Exact(a) => Scalar::Exact(a.abs()),
            Scalar::Approx(f) => Scalar::Approx(f.abs()),
        }
    }

    pub fn powi(&self, k: i64) -> Result<Scalar, ScalarError> {
        if k < 0 {
            return Scalar::int(1).div(&self.powi(-k)?);
        }
        let mut acc = Scalar::int(1);
        let mut base = self.clone();
        let mut e = k as u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(acc)
    }

    /// Floored modulus with result in `[0, |n|)`.
    pub fn modulo(&self, n: &Scalar) -> Result<Scalar, ScalarError> {
        if n.is_zero() {
            return Err(ScalarError::DivByZero);
        }
        match (self, n) {
            (Scalar::Exact(a), Scalar::Exact(b)) => {
                let b = b.abs();
                let q = (a / &b).floor();
                Ok(Scalar::exact(a - q * b))
            }
            _ => {
                let b = n.to_float().abs();
                let q = self.to_float().div(&b, PRECISION, RM).floor();
                Scalar::approx(self.to_float().sub(&q.mul(&b, PRECISION, RM), PRECISION, RM))
            }
        }
    }

    pub fn sin(&self) -> Result<Scalar, ScalarError> {
        if self.is_zero() {
            return Ok(Scalar::int(0));
        }
        let f = self.to_float();
        Scalar::approx(with_consts(|cc| f.sin(PRECISION, RM, cc)))
    }

    pub fn cos(&self) -> Result<Scalar, ScalarError> {
        if self.is_zero() {
            return Ok(Scalar::int(1));
        }
        let f = self.to_float();
        Scalar::approx(with_consts(|cc| f.cos(PRECISION, RM, cc)))
    }

    pub fn tan(&self) -> Result<Scalar, ScalarError> {
        if self.is_zero() {
            return Ok(Scalar::int(0));
        }
        let f = self.to_float();
        Scalar::approx(with_consts(|cc| f.tan(PRECISION, RM, cc)))
    }

    pub fn cmp_value(&self, o: &Scalar) -> Ordering {
        match (self, o) {
            (Scalar::Exact(a), Scalar::Exact(b)) => a.cmp(b),
            _ => match self.to_float().cmp(&o.to_float()) {
                Some(c) if c < 0 => Ordering::Less,
                Some(c) if c > 0 => Ordering::Greater,
                _ => Ordering::Equal,
            },
        }
    }

    /// Exact equality when both sides are exact, otherwise combined
    /// absolute/relative tolerance `|a-b| <= tol * max(1, |a|, |b|)`.
    pub fn approx_eq(&self, o: &Scalar, tol: f64) -> bool {
        match (self, o) {
            (Scalar::Exact(a), Scalar::Exact(b)) => a == b,
            _ => {
                let a = self.to_float();
                let b = o.to_float();
                let diff = a.sub(&b, PRECISION, RM).abs();
                let one = BigFloat::from_i32(1, PRECISION);
                let scale = one.max(&a.abs()).max(&b.abs());
                let bound = scale.mul(&BigFloat::from_f64(tol, PRECISION), PRECISION, RM);
                matches!(diff.cmp(&bound), Some(c) if c <= 0)
            }
        }
    }

    /// Equality modulo `period` within tolerance; used for angle values.
    pub fn approx_eq_mod(&self, o: &Scalar, period: &Scalar, tol: f64) -> bool {
        let d = match self.sub(o).and_then(|d| d.modulo(period)) {
            Ok(d) => d,
            Err(_) => return false,
        };
        if d.approx_eq(&Scalar::int(0), tol) {
            return true;
        }
        d.approx_eq(period, tol)
    }

    /// Exact rational approximation of an approximate value; exact values are
    /// returned unchanged.
    pub fn to_rational(&self) -> Option<BigRational> {
        match self {
            Scalar::Exact(r) => Some(r.clone()),
            Scalar::Approx(f) => BigRational::from_float(float_to_f64(f)),
        }
    }
}

fn float_to_f64(f: &BigFloat) -> f64 {
    if f.is_zero() {
        return 0.0;
    }
    let s = with_consts(|cc| f.format(Radix::Dec, RM, cc));
    match s {
        Ok(s) => s.parse::<f64>().unwrap_or(f64::NAN),
        Err(_) => f64::NAN,
    }
}

/// Integer part of a rational, rounded toward negative infinity.
pub fn floor_int(r: &BigRational) -> BigInt {
    r.numer().div_floor(r.denom())
}

impl PartialEq for Scalar {
    fn eq(&self, o: &Scalar) -> bool {
        self.cmp_value(o) == Ordering::Equal
    }
}

impl From<i64> for Scalar {
    fn from(v: i64) -> Scalar {
        Scalar::int(v)
    }
}

impl From<BigRational> for Scalar {
    fn from(v: BigRational) -> Scalar {
        Scalar::exact(v)
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(r) if r.denom().is_one() => write!(f, "{}", r.numer()),
            Scalar::Exact(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            Scalar::Approx(v) => write!(f, "{}", float_to_f64(v)),
        }
    }
}
