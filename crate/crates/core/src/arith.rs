//! Scalar backends: plain `f64`, double-double, and `astro-float` extended precision.
//!
//! Routines that must survive heavy cancellation are written once against
//! [`Arith`] and run in double precision first, escalating to [`DoubleDouble`]
//! or [`Big`] when the measured condition number demands it.

mod dd;

pub use dd::{Dd, DoubleDouble};

use astro_float::{BigFloat, Consts, RoundingMode, Sign, Word};
use core::f64::consts::LN_2;

pub(crate) const RM: RoundingMode = RoundingMode::ToEven;
const WORD_BITS: i32 = (core::mem::size_of::<Word>() * 8) as i32;

/// A real number stored as sign and natural log of its magnitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogReal {
    /// -1, 0 or 1.
    pub sign: i8,
    /// `ln|x|`; `-inf` for zero.
    pub ln_abs: f64,
}

impl LogReal {
    pub const ZERO: LogReal = LogReal { sign: 0, ln_abs: f64::NEG_INFINITY };

    pub fn new(sign: i8, ln_abs: f64) -> Self {
        if sign == 0 || ln_abs == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            LogReal { sign: sign.signum(), ln_abs }
        }
    }

    pub fn from_f64(v: f64) -> Self {
        if v == 0.0 {
            Self::ZERO
        } else if v.is_nan() {
            LogReal { sign: 1, ln_abs: f64::NAN }
        } else {
            LogReal { sign: if v < 0.0 { -1 } else { 1 }, ln_abs: libm::log(libm::fabs(v)) }
        }
    }

    /// Plain value; saturates to zero or infinity outside the double range.
    pub fn value(&self) -> f64 {
        if self.sign == 0 {
            0.0
        } else {
            f64::from(self.sign) * libm::exp(self.ln_abs)
        }
    }

    pub fn log10_abs(&self) -> f64 {
        self.ln_abs / core::f64::consts::LN_10
    }

    /// True when [`LogReal::value`] is finite and, for nonzero numbers, not flushed to zero.
    pub fn is_representable(&self) -> bool {
        if self.sign == 0 {
            return true;
        }
        let v = self.value();
        v.is_finite() && v != 0.0 && libm::fabs(v) >= f64::MIN_POSITIVE
    }

    #[allow(clippy::should_implement_trait)]
    pub fn mul(self, other: LogReal) -> LogReal {
        LogReal::new(self.sign * other.sign, self.ln_abs + other.ln_abs)
    }

    pub fn scale(self, factor: f64) -> LogReal {
        self.mul(LogReal::from_f64(factor))
    }
}

/// Arithmetic used by generic numerical kernels.
pub trait Arith {
    type Num: Clone;

    /// Significand bits of the working precision.
    fn bits(&self) -> usize;
    fn num(&self, v: f64) -> Self::Num;
    fn ratio(&self, p: i128, q: i128) -> Self::Num;
    fn add(&self, x: &Self::Num, y: &Self::Num) -> Self::Num;
    fn sub(&self, x: &Self::Num, y: &Self::Num) -> Self::Num;
    fn mul(&self, x: &Self::Num, y: &Self::Num) -> Self::Num;
    fn div(&self, x: &Self::Num, y: &Self::Num) -> Self::Num;
    fn neg(&self, x: &Self::Num) -> Self::Num;
    fn sqrt(&self, x: &Self::Num) -> Self::Num;
    fn ln(&mut self, x: &Self::Num) -> Self::Num;
    fn exp(&mut self, x: &Self::Num) -> Self::Num;
    fn sin_cos(&mut self, x: &Self::Num) -> (Self::Num, Self::Num);
    fn cos(&mut self, x: &Self::Num) -> Self::Num {
        self.sin_cos(x).1
    }
    fn atan2(&mut self, y: &Self::Num, x: &Self::Num) -> Self::Num;
    fn pi(&mut self) -> Self::Num;
    fn to_f64(&self, x: &Self::Num) -> f64;
    fn to_log(&self, x: &Self::Num) -> LogReal;

    fn mul_f64(&self, x: &Self::Num, y: f64) -> Self::Num {
        self.mul(x, &self.num(y))
    }
}

/// Double precision backend.
#[derive(Debug, Clone, Copy, Default)]
pub struct F64;

impl Arith for F64 {
    type Num = f64;

    fn bits(&self) -> usize {
        53
    }
    fn num(&self, v: f64) -> f64 {
        v
    }
    fn ratio(&self, p: i128, q: i128) -> f64 {
        p as f64 / q as f64
    }
    fn add(&self, x: &f64, y: &f64) -> f64 {
        x + y
    }
    fn sub(&self, x: &f64, y: &f64) -> f64 {
        x - y
    }
    fn mul(&self, x: &f64, y: &f64) -> f64 {
        x * y
    }
    fn div(&self, x: &f64, y: &f64) -> f64 {
        x / y
    }
    fn neg(&self, x: &f64) -> f64 {
        -x
    }
    fn sqrt(&self, x: &f64) -> f64 {
        libm::sqrt(*x)
    }
    fn ln(&mut self, x: &f64) -> f64 {
        libm::log(*x)
    }
    fn exp(&mut self, x: &f64) -> f64 {
        libm::exp(*x)
    }
    fn sin_cos(&mut self, x: &f64) -> (f64, f64) {
        libm::sincos(*x)
    }
    fn cos(&mut self, x: &f64) -> f64 {
        libm::cos(*x)
    }
    fn atan2(&mut self, y: &f64, x: &f64) -> f64 {
        libm::atan2(*y, *x)
    }
    fn pi(&mut self) -> f64 {
        core::f64::consts::PI
    }
    fn to_f64(&self, x: &f64) -> f64 {
        *x
    }
    fn to_log(&self, x: &f64) -> LogReal {
        LogReal::from_f64(*x)
    }
}

/// Extended precision backend over `astro-float`.
pub struct Big {
    p: usize,
    cc: Consts,
}

impl Big {
    pub fn new(bits: usize) -> Self {
        let cc = Consts::new().expect("allocation of astro-float constant cache failed");
        Big { p: bits.max(64), cc }
    }
}

impl core::fmt::Debug for Big {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("Big").field("bits", &self.p).finish()
    }
}

/// Mantissa in `[0.5, 1)`, binary exponent and sign of a finite nonzero big float.
fn big_parts(x: &BigFloat) -> Option<(f64, i32, bool)> {
    if x.is_zero() {
        return None;
    }
    let (m, _, s, e, _) = x.as_raw_parts()?;
    let top = *m.last()?;
    let mut mant = libm::ldexp(top as f64, -WORD_BITS);
    if WORD_BITS < 53 && m.len() > 1 {
        mant += libm::ldexp(m[m.len() - 2] as f64, -2 * WORD_BITS);
    }
    Some((mant, e, s == Sign::Neg))
}

/// Nearest double to `x`, saturating to zero or infinity.
pub fn big_to_f64(x: &BigFloat) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x.is_inf_pos() {
        return f64::INFINITY;
    }
    if x.is_inf_neg() {
        return f64::NEG_INFINITY;
    }
    match big_parts(x) {
        None => 0.0,
        Some((mant, e, neg)) => {
            let v = libm::ldexp(mant, e);
            if neg {
                -v
            } else {
                v
            }
        }
    }
}

/// Sign and log-magnitude of a big float, valid far outside the double range.
pub fn big_to_log(x: &BigFloat) -> LogReal {
    if x.is_nan() {
        return LogReal { sign: 1, ln_abs: f64::NAN };
    }
    if x.is_inf() {
        return LogReal { sign: if x.is_inf_neg() { -1 } else { 1 }, ln_abs: f64::INFINITY };
    }
    match big_parts(x) {
        None => LogReal::ZERO,
        Some((mant, e, neg)) => LogReal {
            sign: if neg { -1 } else { 1 },
            ln_abs: libm::log(mant) + f64::from(e) * LN_2,
        },
    }
}

/// Base-2 logarithm of `|x|`; `-inf` for zero.
pub fn big_log2_abs(x: &BigFloat) -> f64 {
    match big_parts(x) {
        None => f64::NEG_INFINITY,
        Some((mant, e, _)) => libm::log2(mant) + f64::from(e),
    }
}

impl Arith for Big {
    type Num = BigFloat;

    fn bits(&self) -> usize {
        self.p
    }
    fn num(&self, v: f64) -> BigFloat {
        BigFloat::from_f64(v, self.p)
    }
    fn ratio(&self, p: i128, q: i128) -> BigFloat {
        let bp = BigFloat::from_i128(p, self.p.max(128));
        let bq = BigFloat::from_i128(q, self.p.max(128));
        bp.div(&bq, self.p, RM)
    }
    fn add(&self, x: &BigFloat, y: &BigFloat) -> BigFloat {
        x.add(y, self.p, RM)
    }
    fn sub(&self, x: &BigFloat, y: &BigFloat) -> BigFloat {
        x.sub(y, self.p, RM)
    }
    fn mul(&self, x: &BigFloat, y: &BigFloat) -> BigFloat {
        x.mul(y, self.p, RM)
    }
    fn div(&self, x: &BigFloat, y: &BigFloat) -> BigFloat {
        x.div(y, self.p, RM)
    }
    fn neg(&self, x: &BigFloat) -> BigFloat {
        x.neg()
    }
    fn sqrt(&self, x: &BigFloat) -> BigFloat {
        x.sqrt(self.p, RM)
    }
    fn ln(&mut self, x: &BigFloat) -> BigFloat {
        x.ln(self.p, RM, &mut self.cc)
    }
    fn exp(&mut self, x: &BigFloat) -> BigFloat {
        x.exp(self.p, RM, &mut self.cc)
    }
    fn sin_cos(&mut self, x: &BigFloat) -> (BigFloat, BigFloat) {
        (x.sin(self.p, RM, &mut self.cc), x.cos(self.p, RM, &mut self.cc))
    }
    fn cos(&mut self, x: &BigFloat) -> BigFloat {
        x.cos(self.p, RM, &mut self.cc)
    }
    fn atan2(&mut self, y: &BigFloat, x: &BigFloat) -> BigFloat {
        let pi = self.pi();
        if x.is_zero() {
            let half = pi.div(&BigFloat::from_u8(2, 64), self.p, RM);
            return if y.is_negative() { half.neg() } else { half };
        }
        let t = y.div(x, self.p, RM).atan(self.p, RM, &mut self.cc);
        if x.is_positive() {
            t
        } else if y.is_negative() {
            t.sub(&pi, self.p, RM)
        } else {
            t.add(&pi, self.p, RM)
        }
    }
    fn pi(&mut self) -> BigFloat {
        self.cc.pi(self.p, RM)
    }
    fn to_f64(&self, x: &BigFloat) -> f64 {
        big_to_f64(x)
    }
    fn to_log(&self, x: &BigFloat) -> LogReal {
        big_to_log(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn big_round_trips_doubles() {
        for v in [0.75, -3.0e-300, 1.0e300, 5.3, -0.1, 1.0, 2.0f64.powi(-1020)] {
            let b = BigFloat::from_f64(v, 256);
            assert_eq!(big_to_f64(&b), v, "{v}");
        }
        assert_eq!(big_to_f64(&BigFloat::from_f64(0.0, 128)), 0.0);
    }

    #[test]
    fn big_log_survives_overflow() {
        let mut ar = Big::new(128);
        let x = ar.num(1.0e6);
        let e = ar.exp(&x);
        let l = big_to_log(&e);
        assert_eq!(l.sign, 1);
        assert!((l.ln_abs - 1.0e6).abs() < 1e-9);
        assert_eq!(big_to_f64(&e), f64::INFINITY);
    }

    #[test]
    fn atan2_quadrants() {
        let mut ar = Big::new(128);
        for (y, x) in [(1.0, 1.0), (1.0, -1.0), (-1.0, -1.0), (-1.0, 1.0), (2.0, 0.0), (0.0, -3.0)] {
            let (by, bx) = (ar.num(y), ar.num(x));
            let r = ar.atan2(&by, &bx);
            assert!((ar.to_f64(&r) - libm::atan2(y, x)).abs() < 1e-15, "{y} {x}");
        }
    }

    #[test]
    fn ratio_is_exact_when_representable() {
        let ar = Big::new(128);
        assert_eq!(ar.to_f64(&ar.ratio(-4, 5)), -0.8);
        let three = ar.mul(&ar.ratio(-2, 3), &ar.num(-3.0));
        assert_eq!(ar.to_f64(&three), 2.0);
    }
}
