//! Double-double arithmetic: an unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`,
//! about 106 significand bits at hardware speed.

use super::{Arith, LogReal};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

const PI: Dd = Dd { hi: core::f64::consts::PI, lo: 1.224_646_799_147_353_2e-16 };
const FRAC_PI_2: Dd = Dd { hi: core::f64::consts::FRAC_PI_2, lo: 6.123_233_995_736_766e-17 };
const LN_2: Dd = Dd { hi: core::f64::consts::LN_2, lo: 2.319_046_813_846_299_6e-17 };
const SPLITTER: f64 = 134_217_729.0;

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn split(a: f64) -> (f64, f64) {
    let t = SPLITTER * a;
    let hi = t - (t - a);
    (hi, a - hi)
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let (ah, al) = split(a);
    let (bh, bl) = split(b);
    (p, ((ah * bh - p) + ah * bl + al * bh) + al * bl)
}

#[allow(clippy::should_implement_trait)]
impl Dd {
    pub const fn new(v: f64) -> Self {
        Dd { hi: v, lo: 0.0 }
    }

    fn norm(hi: f64, lo: f64) -> Self {
        let (h, l) = quick_two_sum(hi, lo);
        Dd { hi: h, lo: l }
    }

    pub fn add(self, b: Dd) -> Dd {
        let (s1, s2) = two_sum(self.hi, b.hi);
        let (t1, t2) = two_sum(self.lo, b.lo);
        let (s1, s2) = quick_two_sum(s1, s2 + t1);
        Dd::norm(s1, s2 + t2)
    }

    pub fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }

    pub fn sub(self, b: Dd) -> Dd {
        self.add(b.neg())
    }

    pub fn mul(self, b: Dd) -> Dd {
        let (p1, p2) = two_prod(self.hi, b.hi);
        Dd::norm(p1, p2 + (self.hi * b.lo + self.lo * b.hi))
    }

    pub fn mul_f64(self, b: f64) -> Dd {
        let (p1, p2) = two_prod(self.hi, b);
        Dd::norm(p1, p2 + self.lo * b)
    }

    fn ldexp(self, e: i32) -> Dd {
        Dd { hi: libm::ldexp(self.hi, e), lo: libm::ldexp(self.lo, e) }
    }

    pub fn div(self, b: Dd) -> Dd {
        let q1 = self.hi / b.hi;
        let r = self.sub(b.mul_f64(q1));
        let q2 = r.hi / b.hi;
        let r = r.sub(b.mul_f64(q2));
        let q3 = r.hi / b.hi;
        Dd::norm(q1, q2).add(Dd::new(q3))
    }

    pub fn sqrt(self) -> Dd {
        if self.hi <= 0.0 {
            return Dd::new(libm::sqrt(self.hi));
        }
        let q = libm::sqrt(self.hi);
        let (p1, p2) = two_prod(q, q);
        let r = self.sub(Dd { hi: p1, lo: p2 });
        Dd::norm(q, r.hi / (2.0 * q))
    }

    pub fn exp(self) -> Dd {
        if self.hi > 709.7 {
            return Dd::new(f64::INFINITY);
        }
        if self.hi < -745.2 {
            return Dd::new(0.0);
        }
        let k = libm::round(self.hi / LN_2.hi);
        let r = self.sub(LN_2.mul_f64(k)).ldexp(-10);
        // expm1 by Taylor on |r| < 4e-4, then (1+s)^1024 through s <- 2s + s²
        let mut term = r;
        let mut s = r;
        for j in 2..=11 {
            term = term.mul(r).div(Dd::new(j as f64));
            s = s.add(term);
        }
        for _ in 0..10 {
            s = s.mul_f64(2.0).add(s.mul(s));
        }
        s.add(Dd::new(1.0)).ldexp(k as i32)
    }

    pub fn ln(self) -> Dd {
        if self.hi <= 0.0 {
            return Dd::new(libm::log(self.hi));
        }
        let y = Dd::new(libm::log(self.hi));
        y.add(self.mul(y.neg().exp())).sub(Dd::new(1.0))
    }

    /// Taylor series on `|r| <= π/4`.
    fn sin_cos_reduced(r: Dd) -> (Dd, Dd) {
        let r2 = r.mul(r);
        let mut s = r;
        let mut ts = r;
        let mut c = Dd::new(1.0);
        let mut tc = Dd::new(1.0);
        for j in 1..=15 {
            let j = j as f64;
            tc = tc.mul(r2).div(Dd::new(-(2.0 * j - 1.0) * (2.0 * j)));
            ts = ts.mul(r2).div(Dd::new(-(2.0 * j) * (2.0 * j + 1.0)));
            c = c.add(tc);
            s = s.add(ts);
        }
        (s, c)
    }

    pub fn sin_cos(self) -> (Dd, Dd) {
        let k = libm::round(self.hi / FRAC_PI_2.hi);
        let r = self.sub(FRAC_PI_2.mul_f64(k));
        let (s, c) = Dd::sin_cos_reduced(r);
        match (k as i64).rem_euclid(4) {
            0 => (s, c),
            1 => (c, s.neg()),
            2 => (s.neg(), c.neg()),
            _ => (c.neg(), s),
        }
    }

    /// One Newton step from the double-precision angle.
    pub fn atan2(y: Dd, x: Dd) -> Dd {
        let t0 = Dd::new(libm::atan2(y.hi, x.hi));
        if x.hi == 0.0 && y.hi == 0.0 {
            return t0;
        }
        let (s, c) = t0.sin_cos();
        let num = y.mul(c).sub(x.mul(s));
        let den = x.mul(c).add(y.mul(s));
        t0.add(num.div(den))
    }

    fn from_i128(v: i128) -> Dd {
        let hi = v as f64;
        let rest = v - hi as i128;
        Dd::norm(hi, rest as f64)
    }
}

/// Double-double backend.
#[derive(Debug, Clone, Copy, Default)]
pub struct DoubleDouble;

impl DoubleDouble {
    /// Conservative significand width used for noise estimates.
    pub const BITS: usize = 104;
}

impl Arith for DoubleDouble {
    type Num = Dd;

    fn bits(&self) -> usize {
        Self::BITS
    }
    fn num(&self, v: f64) -> Dd {
        Dd::new(v)
    }
    fn ratio(&self, p: i128, q: i128) -> Dd {
        Dd::from_i128(p).div(Dd::from_i128(q))
    }
    fn add(&self, x: &Dd, y: &Dd) -> Dd {
        x.add(*y)
    }
    fn sub(&self, x: &Dd, y: &Dd) -> Dd {
        x.sub(*y)
    }
    fn mul(&self, x: &Dd, y: &Dd) -> Dd {
        x.mul(*y)
    }
    fn div(&self, x: &Dd, y: &Dd) -> Dd {
        x.div(*y)
    }
    fn neg(&self, x: &Dd) -> Dd {
        x.neg()
    }
    fn sqrt(&self, x: &Dd) -> Dd {
        x.sqrt()
    }
    fn ln(&mut self, x: &Dd) -> Dd {
        x.ln()
    }
    fn exp(&mut self, x: &Dd) -> Dd {
        x.exp()
    }
    fn sin_cos(&mut self, x: &Dd) -> (Dd, Dd) {
        x.sin_cos()
    }
    fn atan2(&mut self, y: &Dd, x: &Dd) -> Dd {
        Dd::atan2(*y, *x)
    }
    fn pi(&mut self) -> Dd {
        PI
    }
    fn to_f64(&self, x: &Dd) -> f64 {
        x.hi + x.lo
    }
    fn to_log(&self, x: &Dd) -> LogReal {
        if x.hi == 0.0 {
            return LogReal::ZERO;
        }
        let l = LogReal::from_f64(x.hi);
        LogReal::new(l.sign, l.ln_abs + libm::log1p(x.lo / x.hi))
    }
    fn mul_f64(&self, x: &Dd, y: f64) -> Dd {
        x.mul_f64(y)
    }
}
