//! Closed-form leading terms of `S_n` per regime and exponential bound certificates.

use alloc::format;
use core::f64::consts::PI;

use crate::arith::LogReal;
use crate::error::{Error, Result, Warning};
use crate::params::{
    classify, fourier_critical_points, g_fourier, g_laplace, laplace_data, stationary_data, EvalPoint, Regime,
    RegimeTag, DEFAULT_SADDLE_TOL,
};
use crate::quadrature::laplace_weight_integral;

pub const GAMMA_ONE_THIRD: f64 = 2.678_938_534_707_747_6;
pub const GAMMA_TWO_THIRDS: f64 = 1.354_117_939_426_400_4;
const THREE_TWO_THIRDS: f64 = 2.080_083_823_051_904;
const SQRT_3: f64 = 1.732_050_807_568_877_2;
const DUAL_FORM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimateKind {
    /// Leading term of an asymptotic equivalence.
    Asymptote,
    /// An upper bound on `|S_n|`, not an equivalence.
    UpperBound,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticEstimate {
    /// Prediction of `S_n`, saturated to the double range.
    pub value: f64,
    pub log_value: LogReal,
    /// `-1/2`, `-1/3`, or the log of the per-step factor in the exponential regimes.
    pub decay_exponent: f64,
    /// Claimed power of `n` of the relative error.
    pub error_order_exponent: f64,
    pub regime: Regime,
    pub correction_term: Option<f64>,
    pub kind: EstimateKind,
    /// Amplitude multiplying `trig_factor`.
    pub envelope: Option<f64>,
    pub trig_factor: Option<f64>,
    pub phase: Option<f64>,
    pub warning: Option<Warning>,
}

impl AsymptoticEstimate {
    fn plain(value: f64, decay: f64, err_order: f64, regime: Regime) -> Self {
        AsymptoticEstimate {
            value,
            log_value: LogReal::from_f64(value),
            decay_exponent: decay,
            error_order_exponent: err_order,
            regime,
            correction_term: None,
            kind: EstimateKind::Asymptote,
            envelope: None,
            trig_factor: None,
            phase: None,
            warning: None,
        }
    }
}

fn require(point: &EvalPoint, tag: RegimeTag, name: &'static str) -> Result<Regime> {
    let r = classify(&point.params, DEFAULT_SADDLE_TOL);
    if r.tag != tag {
        return Err(Error::Regime { expected: name, actual: r.tag });
    }
    if point.n == 0 {
        return Err(Error::Domain("asymptotic estimates need n >= 1".into()));
    }
    Ok(r)
}

/// `(1+u)^{β-1}` for `β ≥ 1`, else `(1-u)^{β-1}`: the maximum of `|1-λz|^{β-1}` on `|z| = u/λ`.
pub fn psi_beta(u: f64, beta: f64) -> f64 {
    if beta >= 1.0 {
        libm::pow(1.0 + u, beta - 1.0)
    } else {
        libm::pow(1.0 - u, beta - 1.0)
    }
}

/// Stationary-phase leading term inside the oscillatory interval.
///
/// `correction_term` is the `n^{-1}` endpoint term of the Fourier integral. It
/// cancels exactly against the leading endpoint term of the Laplace integral,
/// so it is reported but not added to `value`.
pub fn estimate_oscillatory(point: &EvalPoint) -> Result<AsymptoticEstimate> {
    let regime = require(point, RegimeTag::Oscillatory, "oscillatory")?;
    let p = &point.params;
    let (a, al, be, l) = (p.a(), p.alpha(), p.beta(), p.lambda());
    let n = point.n as f64;
    let st = stationary_data(p)?;
    let one_m_l2 = 1.0 - l * l;
    let disc = one_m_l2 * ((a + 2.0) * l + a) * ((a + 2.0) * l - a);
    let envelope = libm::sqrt(2.0 / (n * PI)) * libm::pow(one_m_l2, be / 2.0) * libm::pow(a + 1.0, -be / 2.0)
        / libm::pow(disc, 0.25);
    let phase = (n + 1.0) * st.h_at_phi_plus + (al - a) * st.phi_plus + (be - 1.0) * st.psi + PI / 4.0;
    let trig = libm::cos(phase);
    let correction = point.sin_pi_gamma() / (n * PI) * libm::pow(1.0 + l, be) / (a * (1.0 + l) + 2.0 * l);

    let mut e = AsymptoticEstimate::plain(envelope * trig, -0.5, -1.0, regime);
    e.correction_term = Some(correction);
    e.envelope = Some(envelope);
    e.trig_factor = Some(trig);
    e.phase = Some(phase);
    e.warning = regime.breakdown_warning(a);
    Ok(e)
}

/// Leading term at `a = 2λ/(1-λ)`.
pub fn estimate_saddle_upper(point: &EvalPoint) -> Result<AsymptoticEstimate> {
    let regime = require(point, RegimeTag::SaddleUpper, "saddle_upper")?;
    let p = &point.params;
    let (a, be, l) = (p.a(), p.beta(), p.lambda());
    let n = point.n as f64;
    let value = libm::pow(1.0 - l, be) / (THREE_TWO_THIRDS * GAMMA_TWO_THIRDS * libm::cbrt(n * l * (1.0 + l)));
    let mut e = AsymptoticEstimate::plain(value, -1.0 / 3.0, -1.0 / 3.0, regime);
    e.envelope = Some(value);
    e.correction_term = Some(-point.sin_pi_gamma() / PI / n * libm::pow(1.0 + l, be) / (l * (a + 2.0) + a));
    Ok(e)
}

/// `C(λ,β) n^{-1/3} [cos((gamma+1/6)π) - sin(gamma π)]` at `a = -2λ/(1+λ)`.
///
/// The equivalent form `(√3/2)(cos(gamma π) - √3 sin(gamma π))` is evaluated
/// alongside; disagreement beyond `1e-12` is a consistency error.
pub fn estimate_saddle_lower(point: &EvalPoint) -> Result<AsymptoticEstimate> {
    let regime = require(point, RegimeTag::SaddleLower, "saddle_lower")?;
    let p = &point.params;
    let (be, l) = (p.beta(), p.lambda());
    let n = point.n as f64;
    let c = GAMMA_ONE_THIRD / (THREE_TWO_THIRDS * PI) * libm::pow(1.0 + l, be) / libm::cbrt(l * (1.0 - l));
    let amp = c / libm::cbrt(n);
    let sin_g = point.sin_pi_gamma();
    let primary = point.cos_pi_gamma_shifted(1.0 / 6.0) - sin_g;
    let closed = 0.5 * SQRT_3 * (point.cos_pi_gamma_shifted(0.0) - SQRT_3 * sin_g);
    if libm::fabs(primary - closed) > DUAL_FORM_TOL {
        return Err(Error::Consistency(format!(
            "saddle-lower forms disagree: {primary} vs {closed} at gamma = {}",
            point.gamma
        )));
    }
    let mut e = AsymptoticEstimate::plain(amp * primary, -1.0 / 3.0, -1.0 / 3.0, regime);
    e.envelope = Some(amp);
    e.trig_factor = Some(primary);
    Ok(e)
}

/// Laplace leading term below the lower boundary, with the `-sin(π gamma)/π` factor.
/// Carried in log form since `g(t-)^n` leaves the double range near `n ≈ 10³`.
pub fn estimate_exponential_lower(point: &EvalPoint) -> Result<AsymptoticEstimate> {
    let regime = require(point, RegimeTag::ExponentialLower, "exponential_lower")?;
    if point.integer_flag {
        return Err(Error::IntegerGamma { gamma: point.gamma });
    }
    let p = &point.params;
    let (al, be, l) = (p.alpha(), p.beta(), p.lambda());
    let n = point.n as f64;
    let ld = laplace_data(p)?;
    let t = ld.t_minus;
    let g = ld
        .g_at_t_minus
        .ok_or_else(|| Error::Consistency("t- not positive below the lower boundary".into()))?;
    let q = (1.0 + l * t) * (1.0 + l * t) - (l + t) * (l + t);
    let ln_lead = (be + 1.0) * libm::log1p(l * t)
        + al * libm::log(t)
        + n * libm::log(g)
        + 0.5 * libm::log(2.0 * PI * t / (n * l * q));
    let s = point.sin_pi_gamma();
    let sign = if s > 0.0 { -1 } else { 1 };
    let log_value = LogReal::new(sign, libm::log(libm::fabs(s)) - libm::log(PI) + ln_lead);
    let mut e = AsymptoticEstimate::plain(log_value.value(), libm::log(g), -1.0, regime);
    e.log_value = log_value;
    e.warning = point.near_integer_warning();
    Ok(e)
}

/// Exponential dominance certificate:
/// `|S_n| ≤ fourier_prefactor · fourier_base^{n+1} + laplace_prefactor · laplace_base^n / π`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCertificate {
    pub x_used: f64,
    pub fourier_base: f64,
    pub fourier_prefactor: f64,
    pub laplace_base: Option<f64>,
    pub laplace_prefactor: Option<f64>,
    pub applies_to_integer_gamma_only: bool,
    pub regime: Regime,
}

impl BoundCertificate {
    pub fn ln_bound(&self, n: u64) -> f64 {
        let n = n as f64;
        let f = libm::log(self.fourier_prefactor) + (n + 1.0) * libm::log(self.fourier_base);
        match (self.laplace_prefactor, self.laplace_base) {
            (Some(lp), Some(lb)) => {
                let l = libm::log(lp) - libm::log(PI) + n * libm::log(lb);
                let m = f.max(l);
                m + libm::log(libm::exp(f - m) + libm::exp(l - m))
            }
            _ => f,
        }
    }

    pub fn bound(&self, n: u64) -> f64 {
        libm::exp(self.ln_bound(n))
    }

    /// Log of the largest per-step factor.
    pub fn decay_rate(&self) -> f64 {
        libm::log(self.fourier_base.max(self.laplace_base.unwrap_or(0.0)))
    }

    fn as_estimate(&self, n: u64) -> AsymptoticEstimate {
        let ln_b = self.ln_bound(n);
        let mut e = AsymptoticEstimate::plain(libm::exp(ln_b), self.decay_rate(), 0.0, self.regime);
        e.log_value = LogReal::new(1, ln_b);
        e.kind = EstimateKind::UpperBound;
        e
    }
}

/// Certificate in the two exponential regimes.
///
/// Upper regime: `x = x-`, the minimiser of `g` on `(λ, 1)`. Lower regime
/// (integer `gamma` only): `x` is the midpoint of `(1, min(1/λ, t+))`. For
/// `x > 1` the maximum of `|(1-λz)/(z-λ)|` on `|z| = x` sits at `φ = π`, so the
/// base uses the larger of the two real-axis values.
pub fn bound_certificate(point: &EvalPoint) -> Result<BoundCertificate> {
    let p = &point.params;
    let regime = classify(p, DEFAULT_SADDLE_TOL);
    let (a, al, be, l) = (p.a(), p.alpha(), p.beta(), p.lambda());
    let cert = match regime.tag {
        RegimeTag::ExponentialUpper => {
            let (x, _) = fourier_critical_points(p)?;
            let fb = g_fourier(p, x);
            let laplace = if point.integer_flag {
                None
            } else {
                Some((laplace_weight_integral(p, 1.0)?, g_laplace(p, x)))
            };
            BoundCertificate {
                x_used: x,
                fourier_base: fb,
                fourier_prefactor: libm::pow(x, al - a) * psi_beta(l * x, be),
                laplace_base: laplace.map(|v| v.1),
                laplace_prefactor: laplace.map(|v| v.0),
                applies_to_integer_gamma_only: point.integer_flag,
                regime,
            }
        }
        RegimeTag::ExponentialLower => {
            if !point.integer_flag {
                return Err(Error::CertificateRefused(format!(
                    "gamma = {} is not an integer: S_n grows, use estimate_exponential_lower",
                    point.gamma
                )));
            }
            let t_plus = laplace_data(p)?.t_plus;
            let x = 0.5 * (1.0 + t_plus.min(1.0 / l));
            let m = ((1.0 - l * x) / (x - l)).max((1.0 + l * x) / (x + l));
            BoundCertificate {
                x_used: x,
                fourier_base: libm::pow(x, a + 1.0) * m,
                fourier_prefactor: libm::pow(x, al - a) * psi_beta(l * x, be),
                laplace_base: None,
                laplace_prefactor: None,
                applies_to_integer_gamma_only: true,
                regime,
            }
        }
        other => return Err(Error::Regime { expected: "exponential_lower or exponential_upper", actual: other }),
    };
    let bases_ok = cert.fourier_base > 0.0
        && cert.fourier_base < 1.0
        && cert.laplace_base.is_none_or(|b| b > 0.0 && b < 1.0);
    if !bases_ok {
        return Err(Error::Consistency(format!(
            "certificate bases not in (0,1): {} {:?}",
            cert.fourier_base, cert.laplace_base
        )));
    }
    Ok(cert)
}

/// Envelope and phase of the fixed-parameter expansion
/// `P_n(cos θ) ≈ n^{-1/2} k(θ) cos(Nθ + γ)`, with `k(θ) = π^{-1/2} sin(θ/2)^{-α-1/2} cos(θ/2)^{-β-1/2}`,
/// `N = n + (α+β+1)/2`, `γ = -(α+1/2)π/2`.
pub fn darboux_terms(alpha: f64, beta: f64, theta: f64, n: u64) -> (f64, f64) {
    let nf = n as f64;
    let (s, c) = libm::sincos(theta / 2.0);
    let k = libm::pow(s, -alpha - 0.5) * libm::pow(c, -beta - 0.5) / libm::sqrt(PI);
    let big_n = nf + (alpha + beta + 1.0) / 2.0;
    let gamma = -(alpha + 0.5) * PI / 2.0;
    (k / libm::sqrt(nf), big_n * theta + gamma)
}

/// Fixed-parameter leading term of `P_n^{(α,β)}(cos θ)` for `θ` inside `(0, π)`.
pub fn estimate_darboux(alpha: f64, beta: f64, theta: f64, n: u64) -> f64 {
    let (env, phase) = darboux_terms(alpha, beta, theta, n);
    env * libm::cos(phase)
}

/// Regime dispatcher. Exponential regimes without a sharp asymptote return the
/// certificate bound, tagged [`EstimateKind::UpperBound`].
pub fn estimate(point: &EvalPoint) -> Result<AsymptoticEstimate> {
    let regime = classify(&point.params, DEFAULT_SADDLE_TOL);
    match regime.tag {
        RegimeTag::Oscillatory => estimate_oscillatory(point),
        RegimeTag::SaddleUpper => estimate_saddle_upper(point),
        RegimeTag::SaddleLower => estimate_saddle_lower(point),
        RegimeTag::ExponentialLower if !point.integer_flag => estimate_exponential_lower(point),
        RegimeTag::ExponentialLower | RegimeTag::ExponentialUpper => {
            Ok(bound_certificate(point)?.as_estimate(point.n))
        }
    }
}
