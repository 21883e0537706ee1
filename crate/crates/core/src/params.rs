//! Parameter model, regime classification and closed-form critical points.

use alloc::format;
use core::f64::consts::PI;
use core::fmt;

use num_complex::Complex64;

use crate::arith::Arith;
use crate::error::{Error, Result, Warning};

/// Default relative tolerance for detecting the two saddle boundaries.
pub const DEFAULT_SADDLE_TOL: f64 = 1e-9;
/// `gamma` counts as an integer when within this distance of one.
pub const INTEGER_TOL: f64 = 1e-9;
/// Fraction of the oscillatory interval width that triggers a breakdown warning.
pub const BREAKDOWN_FRACTION: f64 = 0.05;

/// Exact rational slope `num / den`, `den > 0`, in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rational {
    pub num: i64,
    pub den: u64,
}

impl Rational {
    pub fn new(num: i64, den: u64) -> Result<Self> {
        if den == 0 {
            return Err(Error::InvalidParams("rational slope with zero denominator".into()));
        }
        let g = gcd(num.unsigned_abs(), den).max(1);
        Ok(Rational { num: num / g as i64, den: den / g })
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// The quadruple `(a, alpha, beta, lambda)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamSet {
    a: f64,
    alpha: f64,
    beta: f64,
    lambda: f64,
    a_exact: Option<Rational>,
}

impl ParamSet {
    pub fn new(a: f64, alpha: f64, beta: f64, lambda: f64) -> Result<Self> {
        let p = ParamSet { a, alpha, beta, lambda, a_exact: None };
        p.validate()?;
        Ok(p)
    }

    /// Parameters with slope declared exactly as `num/den`, so that `gamma` and
    /// its integrality are known exactly.
    pub fn with_rational_a(num: i64, den: u64, alpha: f64, beta: f64, lambda: f64) -> Result<Self> {
        let r = Rational::new(num, den)?;
        let p = ParamSet { a: r.to_f64(), alpha, beta, lambda, a_exact: Some(r) };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<()> {
        let all_finite = [self.a, self.alpha, self.beta, self.lambda].iter().all(|v| v.is_finite());
        if !all_finite {
            return Err(Error::InvalidParams("non-finite parameter".into()));
        }
        if self.a <= -1.0 {
            return Err(Error::InvalidParams(format!("a = {} must exceed -1", self.a)));
        }
        if self.alpha <= -1.0 || self.beta <= -1.0 {
            return Err(Error::InvalidParams(format!(
                "alpha = {}, beta = {} must exceed -1",
                self.alpha, self.beta
            )));
        }
        if !(self.lambda > 0.0 && self.lambda < 1.0) {
            return Err(Error::InvalidParams(format!("lambda = {} must lie in (0, 1)", self.lambda)));
        }
        Ok(())
    }

    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
    pub fn lambda(&self) -> f64 {
        self.lambda
    }
    pub fn a_exact(&self) -> Option<Rational> {
        self.a_exact
    }

    /// Regime boundaries `(-2λ/(1+λ), 2λ/(1-λ))`.
    pub fn boundaries(&self) -> (f64, f64) {
        boundaries(self.lambda)
    }

    /// `Re z+ = (a + aλ² + 2λ²) / (2λ(a+1))`, shared by `z±`, `t±` and `x±`.
    pub fn critical_y(&self) -> f64 {
        let (a, l) = (self.a, self.lambda);
        (a + a * l * l + 2.0 * l * l) / (2.0 * l * (a + 1.0))
    }
}

pub fn boundaries(lambda: f64) -> (f64, f64) {
    (-2.0 * lambda / (1.0 + lambda), 2.0 * lambda / (1.0 - lambda))
}

/// One degree `n` of the family, with `gamma = a n + alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalPoint {
    pub params: ParamSet,
    pub n: u64,
    pub gamma: f64,
    pub integer_flag: bool,
    gamma_round: i64,
    gamma_offset: f64,
}

impl EvalPoint {
    pub fn new(params: ParamSet, n: u64) -> Result<Self> {
        if n > (1u64 << 40) {
            return Err(Error::InvalidParams(format!("degree {n} too large")));
        }
        let (round, offset) = match params.a_exact {
            Some(r) => {
                let pn = i128::from(r.num) * i128::from(n);
                let q = i128::from(r.den);
                let k = pn.div_euclid(q);
                let rem = pn.rem_euclid(q);
                let frac = rem as f64 / q as f64 + params.alpha;
                let j = libm::round(frac);
                (k as i64 + j as i64, frac - j)
            }
            None => {
                let g = libm::fma(params.a, n as f64, params.alpha);
                let j = libm::round(g);
                (j as i64, g - j)
            }
        };
        Ok(EvalPoint {
            params,
            n,
            gamma: round as f64 + offset,
            integer_flag: libm::fabs(offset) < INTEGER_TOL,
            gamma_round: round,
            gamma_offset: offset,
        })
    }

    /// Nearest integer to `gamma`.
    pub fn gamma_round(&self) -> i64 {
        self.gamma_round
    }

    /// `gamma - round(gamma)`, accurate even when `gamma` is large.
    pub fn gamma_offset(&self) -> f64 {
        self.gamma_offset
    }

    fn parity(&self) -> f64 {
        if self.gamma_round.rem_euclid(2) == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// `sin(pi gamma)` via the reduced offset.
    pub fn sin_pi_gamma(&self) -> f64 {
        if self.gamma_offset == 0.0 {
            return 0.0;
        }
        libm::sin(PI * self.gamma_offset) * self.parity()
    }

    /// `cos(pi (gamma + shift))` via the reduced offset.
    pub fn cos_pi_gamma_shifted(&self, shift: f64) -> f64 {
        libm::cos(PI * (self.gamma_offset + shift)) * self.parity()
    }

    /// Warning when `gamma` sits within ten times the integer tolerance of an integer.
    pub fn near_integer_warning(&self) -> Option<Warning> {
        let d = libm::fabs(self.gamma_offset);
        (d != 0.0 && d < 10.0 * INTEGER_TOL).then_some(Warning::NearInteger { offset: self.gamma_offset })
    }

    /// `gamma` in the backend's precision. Exact for a declared rational slope;
    /// otherwise the rounded double `gamma`, so that every route sees the same value.
    pub(crate) fn gamma_num<A: Arith>(&self, ar: &A) -> A::Num {
        match self.params.a_exact {
            Some(r) if ar.bits() > 53 => {
                let an = ar.ratio(i128::from(r.num) * i128::from(self.n), i128::from(r.den));
                ar.add(&an, &ar.num(self.params.alpha))
            }
            _ => ar.num(self.gamma),
        }
    }

    /// `gamma - round(gamma)` in the backend's precision.
    pub(crate) fn gamma_offset_num<A: Arith>(&self, ar: &A) -> A::Num {
        if ar.bits() <= 53 || self.params.a_exact.is_none() {
            return ar.num(self.gamma_offset);
        }
        ar.sub(&self.gamma_num(ar), &ar.num(self.gamma_round as f64))
    }

    /// `sin(pi gamma)` in the backend's precision.
    pub(crate) fn sin_pi_gamma_num<A: Arith>(&self, ar: &mut A) -> A::Num {
        if ar.bits() <= 53 {
            return ar.num(self.sin_pi_gamma());
        }
        let off = self.gamma_offset_num(ar);
        let pi = ar.pi();
        let (s, _) = ar.sin_cos(&ar.mul(&pi, &off));
        if self.parity() < 0.0 {
            ar.neg(&s)
        } else {
            s
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RegimeTag {
    ExponentialLower,
    SaddleLower,
    Oscillatory,
    SaddleUpper,
    ExponentialUpper,
}

impl RegimeTag {
    pub const ALL: [RegimeTag; 5] = [
        RegimeTag::ExponentialLower,
        RegimeTag::SaddleLower,
        RegimeTag::Oscillatory,
        RegimeTag::SaddleUpper,
        RegimeTag::ExponentialUpper,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            RegimeTag::ExponentialLower => "exponential_lower",
            RegimeTag::SaddleLower => "saddle_lower",
            RegimeTag::Oscillatory => "oscillatory",
            RegimeTag::SaddleUpper => "saddle_upper",
            RegimeTag::ExponentialUpper => "exponential_upper",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.as_str() == s)
    }
}

impl fmt::Display for RegimeTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Regime {
    pub tag: RegimeTag,
    pub lower: f64,
    pub upper: f64,
}

impl Regime {
    /// Distance from `a` to the nearer boundary.
    pub fn boundary_distance(&self, a: f64) -> f64 {
        libm::fmin(libm::fabs(a - self.lower), libm::fabs(a - self.upper))
    }

    pub fn breakdown_warning(&self, a: f64) -> Option<Warning> {
        let d = self.boundary_distance(a);
        (self.tag == RegimeTag::Oscillatory && d < BREAKDOWN_FRACTION * (self.upper - self.lower))
            .then_some(Warning::Breakdown { distance: d })
    }
}

pub fn classify(params: &ParamSet, saddle_tol: f64) -> Regime {
    let (lower, upper) = params.boundaries();
    let a = params.a;
    let tag = if libm::fabs(a - upper) <= saddle_tol * libm::fabs(upper) {
        RegimeTag::SaddleUpper
    } else if libm::fabs(a - lower) <= saddle_tol * libm::fabs(lower) {
        RegimeTag::SaddleLower
    } else if a > upper {
        RegimeTag::ExponentialUpper
    } else if a < lower {
        RegimeTag::ExponentialLower
    } else {
        RegimeTag::Oscillatory
    };
    Regime { tag, lower, upper }
}

/// Behaviour of `h(t) = ln g(t)` on `(0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LaplaceShape {
    /// `a > -2λ/(1+λ)`: increasing, nonpositive, maximum at `t = 1`.
    Increasing,
    /// `a = -2λ/(1+λ)`: `t- = t+ = 1`, degenerate maximum.
    Degenerate,
    /// `a < -2λ/(1+λ)`: unique interior maximum at `t-` with `g(t-) > 1`.
    InteriorMax,
}

impl LaplaceShape {
    pub fn case_number(&self) -> u8 {
        match self {
            LaplaceShape::Increasing => 1,
            LaplaceShape::Degenerate => 2,
            LaplaceShape::InteriorMax => 3,
        }
    }
}

pub fn laplace_shape(params: &ParamSet, saddle_tol: f64) -> LaplaceShape {
    match classify(params, saddle_tol).tag {
        RegimeTag::ExponentialLower => LaplaceShape::InteriorMax,
        RegimeTag::SaddleLower => LaplaceShape::Degenerate,
        _ => LaplaceShape::Increasing,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationaryData {
    pub z_plus: Complex64,
    pub phi_plus: f64,
    /// Principal argument of `1 - λ z+`.
    pub psi: f64,
    pub h_at_phi_plus: f64,
    /// `h'(φ+)`, zero up to rounding.
    pub h1: f64,
    pub h2: f64,
    pub h3: f64,
}

pub fn stationary_data(params: &ParamSet) -> Result<StationaryData> {
    let regime = classify(params, DEFAULT_SADDLE_TOL);
    if matches!(regime.tag, RegimeTag::ExponentialLower | RegimeTag::ExponentialUpper) {
        return Err(Error::Domain(format!(
            "a = {} outside [{}, {}]: no stationary point on the unit circle",
            params.a, regime.lower, regime.upper
        )));
    }
    let (a, l) = (params.a, params.lambda);
    let c = params.critical_y().clamp(-1.0, 1.0);
    let phi = libm::acos(c);
    let s = libm::sqrt((1.0 - c * c).max(0.0));
    let z = Complex64::new(c, s);
    let psi = libm::atan2(-l * s, 1.0 - l * c);

    let one = Complex64::new(1.0, 0.0);
    let w1 = one - z * l;
    let w2 = z - l;
    let ap1 = a + 1.0;
    let d1 = z.inv() * ap1 - w1.inv() * l - w2.inv();
    let d2 = -(z * z).inv() * ap1 - (w1 * w1).inv() * (l * l) + (w2 * w2).inv();
    let d3 = (z * z * z).inv() * (2.0 * ap1) - (w1 * w1 * w1).inv() * (2.0 * l * l * l) - (w2 * w2 * w2).inv() * 2.0;
    let i = Complex64::new(0.0, 1.0);
    let h1 = z * d1;
    let h2 = i * z * (d1 + z * d2);
    let h3 = -(z * d1 + z * z * d2 * 3.0 + z * z * z * d3);

    Ok(StationaryData {
        z_plus: z,
        phi_plus: phi,
        psi,
        h_at_phi_plus: h_phase(params, phi),
        h1: h1.re,
        h2: h2.re,
        h3: h3.re,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaplaceData {
    pub t_minus: f64,
    pub t_plus: f64,
    /// `g(t-)`, present when `t- > 0`.
    pub g_at_t_minus: Option<f64>,
    /// `h''(t-)`, present when `t- > 0`.
    pub h2_at_t_minus: Option<f64>,
}

/// Roots `t± = -y ± sqrt(y² - 1)` of `h'(t) = 0`, `y = Re z+`.
pub fn laplace_data(params: &ParamSet) -> Result<LaplaceData> {
    let (sq, y) = real_roots(params)?;
    let (t_minus, t_plus) = (-y - sq, -y + sq);
    let l = params.lambda;
    let (g, h2) = if t_minus > 0.0 {
        let t = t_minus;
        let h2 = (l / t) * (-1.0 / ((l + t) * (l + t)) + 1.0 / ((1.0 + l * t) * (1.0 + l * t)));
        (Some(g_laplace(params, t)), Some(h2))
    } else {
        (None, None)
    };
    Ok(LaplaceData { t_minus, t_plus, g_at_t_minus: g, h2_at_t_minus: h2 })
}

/// Roots `x± = y ± sqrt(y² - 1)` of `g'(x) = 0` for `g(x) = x^{a+1}(1-λx)/(x-λ)`.
/// In the upper regime `x-` lies in `(λ, 1)` and minimises `g` there.
pub fn fourier_critical_points(params: &ParamSet) -> Result<(f64, f64)> {
    let (sq, y) = real_roots(params)?;
    Ok((y - sq, y + sq))
}

fn real_roots(params: &ParamSet) -> Result<(f64, f64)> {
    let regime = classify(params, DEFAULT_SADDLE_TOL);
    if regime.tag == RegimeTag::Oscillatory {
        return Err(Error::Domain(format!(
            "a = {} inside ({}, {}): critical points are complex",
            params.a, regime.lower, regime.upper
        )));
    }
    let y = params.critical_y();
    Ok((libm::sqrt((y * y - 1.0).max(0.0)), y))
}

/// Continuous phase `(a+1)φ + Arg(1 - λe^{iφ}) - Arg(e^{iφ} - λ)` on `[0, π]`.
pub fn h_phase(params: &ParamSet, phi: f64) -> f64 {
    let l = params.lambda;
    let (s, c) = libm::sincos(phi);
    (params.a + 1.0) * phi + libm::atan2(-l * s, 1.0 - l * c) - libm::atan2(s, c - l)
}

/// `h(t) = (a+1) ln t + ln(1+λt) - ln(t+λ)` for `t > 0`.
pub fn h_laplace(params: &ParamSet, t: f64) -> Result<f64> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("h_laplace needs t > 0, got {t}")));
    }
    let l = params.lambda;
    Ok((params.a + 1.0) * libm::log(t) + libm::log1p(l * t) - libm::log(t + l))
}

/// `h'(t)` for the Laplace phase.
pub fn h_laplace_d1(params: &ParamSet, t: f64) -> f64 {
    let l = params.lambda;
    (params.a + 1.0) / t + l / (1.0 + l * t) - 1.0 / (t + l)
}

/// `g(t) = t^{a+1}(1+λt)/(t+λ)`.
pub fn g_laplace(params: &ParamSet, t: f64) -> f64 {
    let l = params.lambda;
    libm::pow(t, params.a + 1.0) * (1.0 + l * t) / (t + l)
}

/// `g(x) = x^{a+1}(1-λx)/(x-λ)`, the value at `φ = 0` of the base on `|z| = x`.
pub fn g_fourier(params: &ParamSet, x: f64) -> f64 {
    let l = params.lambda;
    libm::pow(x, params.a + 1.0) * (1.0 - l * x) / (x - l)
}

/// `z^{a+1}(1-λz)/(z-λ)` at `z = x e^{iφ}` with the continuous branch of `z^{a+1}`.
pub fn fourier_base(params: &ParamSet, x: f64, phi: f64) -> Complex64 {
    let l = params.lambda;
    let z = Complex64::from_polar(x, phi);
    let za = Complex64::from_polar(libm::pow(x, params.a + 1.0), (params.a + 1.0) * phi);
    za * (Complex64::new(1.0, 0.0) - z * l) / (z - l)
}
