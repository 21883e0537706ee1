//! `S_n` from its two-integral representation:
//!
//! ```text
//! S_n = (1/π) Re ∫_0^π z^{α+1}(1-λz)^β/(z-λ) · (z^{a+1}(1-λz)/(z-λ))^n dφ      (z = x e^{iφ})
//!     - (sin(π gamma)/π) ∫_0^x (1+λt)^β t^α/(t+λ) · (t^{a+1}(1+λt)/(t+λ))^n dt
//! ```
//!
//! for any `x ∈ (λ, 1/λ)`. Both integrands are evaluated in log form with a
//! max-shift. When the integrals are much larger than their combination
//! (the upper regime on the unit circle is the usual offender) the whole
//! evaluation is redone in extended precision.

mod gauss;

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::{LN_2, PI};

use num_complex::Complex64;

use crate::arith::{Arith, Big, DoubleDouble, LogReal, F64};
use crate::error::{Error, Result};
use crate::params::{laplace_data, EvalPoint, ParamSet};
use gauss::{gauss_legendre, integrate, Integral};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    /// Radius of the Fourier contour, in `(λ, 1/λ)`.
    pub x_contour: f64,
    pub panels_per_oscillation: u32,
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Cap on panels per integral.
    pub max_subdivisions: usize,
    /// Cap on the working precision of escalated passes.
    pub max_bits: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            x_contour: 1.0,
            panels_per_oscillation: 8,
            abs_tol: 1e-300,
            rel_tol: 1e-10,
            max_subdivisions: 200_000,
            max_bits: 4096,
        }
    }
}

impl QuadratureConfig {
    pub fn with_contour(x: f64) -> Self {
        QuadratureConfig { x_contour: x, ..Default::default() }
    }

    pub fn validate(&self, lambda: f64) -> Result<()> {
        let x = self.x_contour;
        if !(x > lambda && x < 1.0 / lambda) {
            return Err(Error::Domain(format!("x_contour = {x} outside ({lambda}, {})", 1.0 / lambda)));
        }
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::InvalidParams("quadrature tolerances must be positive".into()));
        }
        if self.panels_per_oscillation == 0 || self.max_subdivisions < 2 {
            return Err(Error::InvalidParams("panel counts must be positive".into()));
        }
        Ok(())
    }
}

/// The two integrals and their combination.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegralParts {
    /// `(1/π) Re ∫_0^π ... dφ`.
    pub fourier_part: LogReal,
    /// The raw integral `∫_0^x ... dt`.
    pub laplace_part: LogReal,
    /// `sin(π gamma)`.
    pub sin_factor: f64,
    /// `fourier_part - (sin_factor/π) laplace_part`, formed at working precision.
    pub reconstructed: LogReal,
    /// Estimated error of `reconstructed`, relative to its magnitude.
    pub relative_error: f64,
    /// 53 for double precision, otherwise the extended working precision.
    pub precision_bits: usize,
    pub panels: usize,
    pub x_contour: f64,
}

fn check_contour(lambda: f64, x: f64) -> Result<()> {
    if !(x > lambda && x < 1.0 / lambda) {
        return Err(Error::Domain(format!("x = {x} outside ({lambda}, {})", 1.0 / lambda)));
    }
    Ok(())
}

/// The Fourier integrand at `z = x e^{iφ}`, `z^y` on the continuous branch `x^y e^{iyφ}`.
pub fn fourier_integrand(point: &EvalPoint, x: f64, phi: f64) -> Result<Complex64> {
    let p = &point.params;
    let l = p.lambda();
    check_contour(l, x)?;
    let n = point.n as f64;
    let z = Complex64::from_polar(x, phi);
    let one = Complex64::new(1.0, 0.0);
    let pw = point.gamma + n + 1.0;
    let zp = Complex64::new(pw * libm::log(x), pw * phi);
    let w = zp + (one - z * l).ln() * (n + p.beta()) - (z - l).ln() * (n + 1.0);
    Ok(w.exp())
}

/// The Laplace integrand `(1+λt)^β t^α/(t+λ) g(t)^n`.
pub fn laplace_integrand(point: &EvalPoint, t: f64) -> Result<f64> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("laplace integrand needs t > 0, got {t}")));
    }
    let p = &point.params;
    let l = p.lambda();
    let n = point.n as f64;
    let e = (point.gamma + n) * libm::log(t) + (n + p.beta()) * libm::log1p(l * t) - (n + 1.0) * libm::log(t + l);
    Ok(libm::exp(e))
}

/// `exp(re) cos(im)` with `re = P ln x + B ln|1-λz| - C ln|z-λ| - shift`,
/// `im = Pφ + B Arg(1-λz) - C Arg(z-λ)`.
struct FourierKernel<N> {
    x: N,
    lam: N,
    p: N,
    b: N,
    c: N,
    base: N,
}

impl<N: Clone> FourierKernel<N> {
    fn eval<A: Arith<Num = N>>(&self, ar: &mut A, phi: &N) -> N {
        let (s, co) = ar.sin_cos(phi);
        let zr = ar.mul(&self.x, &co);
        let zi = ar.mul(&self.x, &s);
        let w1r = ar.sub(&ar.num(1.0), &ar.mul(&self.lam, &zr));
        let w1i = ar.neg(&ar.mul(&self.lam, &zi));
        let w2r = ar.sub(&zr, &self.lam);
        let m1 = ar.add(&ar.mul(&w1r, &w1r), &ar.mul(&w1i, &w1i));
        let m2 = ar.add(&ar.mul(&w2r, &w2r), &ar.mul(&zi, &zi));
        let l1 = ar.ln(&m1);
        let l2 = ar.ln(&m2);
        let a1 = ar.atan2(&w1i, &w1r);
        let a2 = ar.atan2(&zi, &w2r);
        let re = ar.add(&self.base, &ar.mul_f64(&ar.sub(&ar.mul(&self.b, &l1), &ar.mul(&self.c, &l2)), 0.5));
        let im = ar.add(&ar.mul(&self.p, phi), &ar.sub(&ar.mul(&self.b, &a1), &ar.mul(&self.c, &a2)));
        let e = ar.exp(&re);
        let cs = ar.cos(&im);
        ar.mul(&e, &cs)
    }
}

/// `t = x s^m`; value `exp(ln(xm) + (m-1) ln s + P ln t + B ln(1+λt) - C ln(t+λ) - shift)`.
struct LaplaceKernel<N> {
    x: N,
    lam: N,
    m: u32,
    /// `(m-1) + P m`, the coefficient of `ln s`.
    ls_coef: N,
    b: N,
    c: N,
    base: N,
}

impl<N: Clone> LaplaceKernel<N> {
    fn eval<A: Arith<Num = N>>(&self, ar: &mut A, s: &N) -> N {
        let ls = ar.ln(s);
        let mut sm = s.clone();
        for _ in 1..self.m {
            sm = ar.mul(&sm, s);
        }
        let t = ar.mul(&self.x, &sm);
        let lt = ar.mul(&self.lam, &t);
        let q1 = ar.ln(&ar.add(&ar.num(1.0), &lt));
        let q2 = ar.ln(&ar.add(&t, &self.lam));
        let e = ar.add(&self.base, &ar.mul(&self.ls_coef, &ls));
        let e = ar.add(&e, &ar.sub(&ar.mul(&self.b, &q1), &ar.mul(&self.c, &q2)));
        ar.exp(&e)
    }
}

/// Exponents of one integrand pair: `P_F = gamma+n+1`, `P_L = gamma+n`, `B = n+β`, `C = n+1`.
#[derive(Clone, Copy)]
struct Exponents {
    pf: f64,
    pl: f64,
    b: f64,
    c: f64,
}

/// Double-precision data shared by all passes.
struct Plan {
    x: f64,
    lambda: f64,
    ex: Exponents,
    shift_f: f64,
    shift_l: f64,
    oscillations: f64,
    m_sub: u32,
    s_peak: Option<f64>,
    cond_f: f64,
    cond_l: f64,
}

fn laplace_log_f64(lambda: f64, x: f64, ex: &Exponents, m: u32, s: f64) -> f64 {
    let mf = f64::from(m);
    let ls = libm::log(s);
    let t = x * libm::pow(s, mf);
    libm::log(x * mf) + (mf - 1.0) * ls + ex.pl * (libm::log(x) + mf * ls) + ex.b * libm::log1p(lambda * t)
        - ex.c * libm::log(t + lambda)
}

fn fourier_parts_f64(lambda: f64, x: f64, ex: &Exponents, phi: f64) -> (f64, f64) {
    let (s, c) = libm::sincos(phi);
    let (zr, zi) = (x * c, x * s);
    let (w1r, w1i) = (1.0 - lambda * zr, -lambda * zi);
    let w2r = zr - lambda;
    let re = ex.pf * libm::log(x) + 0.5 * ex.b * libm::log(w1r * w1r + w1i * w1i)
        - 0.5 * ex.c * libm::log(w2r * w2r + zi * zi);
    let im = ex.pf * phi + ex.b * libm::atan2(w1i, w1r) - ex.c * libm::atan2(zi, w2r);
    (re, im)
}

fn plan(params: &ParamSet, x: f64, ex: Exponents, upper: f64) -> Plan {
    let lambda = params.lambda();
    const GRID: usize = 1024;
    let mut shift_f = f64::NEG_INFINITY;
    let mut tv = 0.0;
    let mut prev = None;
    for k in 0..=GRID {
        let phi = PI * k as f64 / GRID as f64;
        let (re, im) = fourier_parts_f64(lambda, x, &ex, phi);
        shift_f = shift_f.max(re);
        if let Some(p) = prev {
            tv += libm::fabs(im - p);
        }
        prev = Some(im);
    }

    let m_sub = if ex.pl >= 7.0 { 1 } else { (libm::ceil(8.0 / (ex.pl + 1.0)) as u32).clamp(1, 64) };
    let s_peak = laplace_data(params)
        .ok()
        .map(|d| d.t_minus)
        .filter(|&t| t > 0.0 && t < upper)
        .map(|t| libm::pow(t / upper, 1.0 / f64::from(m_sub)));
    let mut shift_l = f64::NEG_INFINITY;
    for k in 1..=256 {
        let s = k as f64 / 256.0;
        shift_l = shift_l.max(laplace_log_f64(lambda, upper, &ex, m_sub, s));
    }
    if let Some(s) = s_peak {
        shift_l = shift_l.max(laplace_log_f64(lambda, upper, &ex, m_sub, s));
    }

    let lx = libm::fabs(libm::log(x));
    let cond_f = 2.0 * (libm::fabs(ex.pf) * (PI + lx) + (libm::fabs(ex.b) + ex.c) * (PI + 3.0)) + 10.0;
    let cond_l = 2.0 * (libm::fabs(ex.pl) * (lx + 5.0) + (libm::fabs(ex.b) + ex.c) * 3.0 + 5.0 * f64::from(m_sub)) + 10.0;
    Plan {
        x,
        lambda,
        ex,
        shift_f,
        shift_l,
        oscillations: tv / (2.0 * PI),
        m_sub,
        s_peak,
        cond_f,
        cond_l,
    }
}

fn rule_size(bits: usize) -> usize {
    if bits <= 53 {
        16
    } else {
        (bits / 4).clamp(24, 128)
    }
}

fn uniform_breaks<A: Arith>(ar: &mut A, hi: &A::Num, count: usize, extra: Option<f64>) -> Vec<A::Num> {
    let mut pts: Vec<A::Num> =
        (0..=count).map(|k| ar.div(&ar.mul_f64(hi, k as f64), &ar.num(count as f64))).collect();
    if let Some(e) = extra {
        let hi_f = ar.to_f64(hi);
        let k = pts.iter().position(|p| ar.to_f64(p) > e).unwrap_or(count);
        let (lo, up) = (ar.to_f64(&pts[k.saturating_sub(1)]), ar.to_f64(&pts[k.min(count)]));
        let gap = 1e-3 * hi_f / count as f64;
        if k > 0 && e - lo > gap && up - e > gap {
            pts.insert(k, ar.num(e));
        }
    }
    pts
}

fn fourier_integral<A: Arith>(
    ar: &mut A,
    plan: &Plan,
    pf: &A::Num,
    ppo: u32,
    tol: f64,
    max_panels: usize,
) -> Result<Integral<A::Num>> {
    let k = FourierKernel {
        x: ar.num(plan.x),
        lam: ar.num(plan.lambda),
        p: pf.clone(),
        b: ar.num(plan.ex.b),
        c: ar.num(plan.ex.c),
        base: {
            let lx = ar.ln(&ar.num(plan.x));
            ar.sub(&ar.mul(pf, &lx), &ar.num(plan.shift_f))
        },
    };
    let osc = libm::ceil(plan.oscillations).max(1.0);
    let panels = if ar.bits() <= 53 {
        (f64::from(ppo) * osc).max(64.0)
    } else {
        libm::ceil(f64::from(ppo) * osc / 16.0).max(16.0)
    } as usize;
    let panels = panels.min(max_panels);
    let pi = ar.pi();
    let breaks = uniform_breaks(ar, &pi, panels, None);
    let rule = gauss_legendre(ar, rule_size(ar.bits()));
    let noise = libm::ldexp(plan.cond_f, -(ar.bits() as i32));
    integrate(ar, &rule, &mut |ar: &mut A, phi: &A::Num| k.eval(ar, phi), &breaks, tol, noise, max_panels)
}

fn laplace_integral<A: Arith>(
    ar: &mut A,
    plan: &Plan,
    pl: &A::Num,
    upper: f64,
    tol: f64,
    max_panels: usize,
) -> Result<Integral<A::Num>> {
    let m = plan.m_sub;
    let mf = f64::from(m);
    let bx = ar.num(upper);
    let lx = ar.ln(&bx);
    let lxm = ar.ln(&ar.num(upper * mf));
    let base = ar.sub(&ar.add(&lxm, &ar.mul(pl, &lx)), &ar.num(plan.shift_l));
    let k = LaplaceKernel {
        x: bx,
        lam: ar.num(plan.lambda),
        m,
        ls_coef: ar.add(&ar.num(mf - 1.0), &ar.mul_f64(pl, mf)),
        b: ar.num(plan.ex.b),
        c: ar.num(plan.ex.c),
        base,
    };
    let one = ar.num(1.0);
    // one slot kept for the peak break
    let count = (if ar.bits() <= 53 { 32 } else { 16 }).min(max_panels - 1);
    let breaks = uniform_breaks(ar, &one, count, plan.s_peak);
    let rule = gauss_legendre(ar, rule_size(ar.bits()));
    let noise = libm::ldexp(plan.cond_l, -(ar.bits() as i32));
    integrate(ar, &rule, &mut |ar: &mut A, s: &A::Num| k.eval(ar, s), &breaks, tol, noise, max_panels)
}

struct PassOut {
    fourier: LogReal,
    laplace: LogReal,
    s: LogReal,
    ln_err: f64,
    ln_mass: f64,
    bits: usize,
    panels: usize,
}

fn ln_or_neg_inf(v: f64) -> f64 {
    if v > 0.0 {
        libm::log(v)
    } else {
        f64::NEG_INFINITY
    }
}

/// One evaluation at the backend precision; `ln_target` is `ln` of the allowed
/// absolute error in `S`, if already known.
fn run_pass<A: Arith>(
    ar: &mut A,
    point: &EvalPoint,
    plan: &Plan,
    cfg: &QuadratureConfig,
    with_laplace: bool,
    ln_target: Option<f64>,
) -> Result<PassOut> {
    let sinf = point.sin_pi_gamma();
    let ln_pi = libm::log(PI);
    let m = if with_laplace { plan.shift_f.max(plan.shift_l) } else { plan.shift_f };
    let tol_for = |shift: f64, factor: f64| match ln_target {
        Some(t) => libm::exp(t + ln_pi - shift - libm::log(factor) - libm::log(4.0)),
        None => 0.0,
    };

    let gamma = point.gamma_num(ar);
    let nn = ar.num(point.n as f64);
    let pl = ar.add(&gamma, &nn);
    let pf = ar.add(&pl, &ar.num(1.0));

    let fi = fourier_integral(ar, plan, &pf, cfg.panels_per_oscillation, tol_for(plan.shift_f, 1.0), cfg.max_subdivisions)?;
    let li = if with_laplace || ln_target.is_none() {
        Some(laplace_integral(
            ar,
            plan,
            &pl,
            plan.x,
            tol_for(plan.shift_l, libm::fabs(sinf).max(1e-300)),
            cfg.max_subdivisions,
        )?)
    } else {
        None
    };

    let ef = ar.exp(&ar.num(plan.shift_f - m));
    let mut s_scaled = ar.mul(&fi.value, &ef);
    let mut mass = fi.mass * libm::exp(plan.shift_f - m);
    let mut err = fi.error * libm::exp(plan.shift_f - m) + mass * libm::ldexp(plan.cond_f, -(ar.bits() as i32));
    let mut laplace = LogReal::ZERO;
    if let Some(li) = &li {
        laplace = ar.to_log(&li.value);
        laplace.ln_abs += plan.shift_l;
        if with_laplace {
            let el = ar.exp(&ar.num(plan.shift_l - m));
            let sn = point.sin_pi_gamma_num(ar);
            s_scaled = ar.sub(&s_scaled, &ar.mul(&ar.mul(&li.value, &el), &sn));
            let w = libm::fabs(sinf) * libm::exp(plan.shift_l - m);
            mass += li.mass * w;
            err += li.error * w + li.mass * w * libm::ldexp(plan.cond_l, -(ar.bits() as i32));
        }
    }
    let mut fourier = ar.to_log(&fi.value);
    fourier.ln_abs += plan.shift_f - ln_pi;
    let mut s = ar.to_log(&s_scaled);
    s.ln_abs += m - ln_pi;
    Ok(PassOut {
        fourier,
        laplace,
        s,
        ln_err: ln_or_neg_inf(err) + m - ln_pi,
        ln_mass: ln_or_neg_inf(mass) + m - ln_pi,
        bits: ar.bits(),
        panels: fi.panels + li.as_ref().map_or(0, |l| l.panels),
    })
}

fn ln_allowed(cfg: &QuadratureConfig, s: &LogReal) -> f64 {
    let rel = libm::log(cfg.rel_tol) + s.ln_abs;
    rel.max(libm::log(cfg.abs_tol))
}

/// Both integrals by adaptive quadrature and the reconstructed `S_n`.
pub fn scaled_via_integrals(point: &EvalPoint, cfg: &QuadratureConfig) -> Result<IntegralParts> {
    let params = &point.params;
    cfg.validate(params.lambda())?;
    let n = point.n as f64;
    let ex = Exponents { pf: point.gamma + n + 1.0, pl: point.gamma + n, b: n + params.beta(), c: n + 1.0 };
    let plan = plan(params, cfg.x_contour, ex, cfg.x_contour);
    let sinf = point.sin_pi_gamma();
    let with_laplace = sinf != 0.0;

    let first = run_pass(&mut F64, point, &plan, cfg, with_laplace, None)?;
    let laplace = first.laplace;
    let mut out = first;
    let mut last_bits = 53usize;
    loop {
        let allowed = ln_allowed(cfg, &out.s);
        if out.ln_err <= allowed {
            break;
        }
        // bits so that rounding noise over the integrand mass stays below a quarter of the target
        let need = (out.ln_mass + libm::log(4.0 * plan.cond_f.max(plan.cond_l)) - allowed) / LN_2 + 16.0;
        let bits = ((libm::ceil(need.max(64.0)) as usize).div_ceil(32) * 32).max(last_bits + 32);
        if bits > cfg.max_bits {
            return Err(Error::Convergence { error_estimate: libm::exp(out.ln_err), panels: out.panels });
        }
        let target = Some(allowed);
        if bits <= DoubleDouble::BITS {
            out = run_pass(&mut DoubleDouble, point, &plan, cfg, with_laplace, target)?;
            last_bits = DoubleDouble::BITS;
        } else {
            out = run_pass(&mut Big::new(bits), point, &plan, cfg, with_laplace, target)?;
            last_bits = bits;
        }
    }

    Ok(IntegralParts {
        fourier_part: out.fourier,
        laplace_part: if out.laplace.sign != 0 { out.laplace } else { laplace },
        sin_factor: sinf,
        reconstructed: out.s,
        relative_error: libm::exp(out.ln_err - out.s.ln_abs),
        precision_bits: out.bits,
        panels: out.panels,
        x_contour: cfg.x_contour,
    })
}

/// `∫_0^upper (1+λt)^β t^α/(t+λ) dt`, the `n = 0` Laplace integral.
pub fn laplace_weight_integral(params: &ParamSet, upper: f64) -> Result<f64> {
    if !(upper > 0.0 && upper.is_finite()) {
        return Err(Error::Domain(format!("upper limit {upper} must be positive")));
    }
    let ex = Exponents { pf: params.alpha() + 1.0, pl: params.alpha(), b: params.beta(), c: 1.0 };
    let plan = plan(params, 1.0, ex, upper);
    let li = laplace_integral(&mut F64, &plan, &params.alpha(), upper, 0.0, 200_000)?;
    Ok(li.value * libm::exp(plan.shift_l))
}
