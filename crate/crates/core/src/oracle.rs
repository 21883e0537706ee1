//! Ground truth: the explicit binomial sum evaluated in extended precision.
//!
//! The sum alternates through `((x-1)/2)^μ = (-λ²)^μ` and cancels roughly
//! `0.29 n` decimal digits at `λ = 0.5`, so the working precision carries guard
//! bits sized from the measured cancellation.

use alloc::format;
use alloc::vec::Vec;

use astro_float::BigFloat;

use crate::arith::{big_log2_abs, big_to_f64, big_to_log, Arith, Big, LogReal, RM};
use crate::error::{Error, Result, Warning};
use crate::params::EvalPoint;

pub const DEFINITION_TAG: &str = "lambda^(an+alpha)*(1-lambda^2)^beta * P_n";

/// `|gamma ln λ|` above which the prefactor is folded into the first term.
const LOG_SCALE_THRESHOLD: f64 = 500.0;
const LOG10_2: f64 = core::f64::consts::LOG10_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SummationMode {
    #[default]
    Direct,
    /// Neumaier compensated summation at working precision.
    Compensated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrecisionConfig {
    /// Precision delivered in the result, in significand bits.
    pub significand_bits: u32,
    pub summation_mode: SummationMode,
    /// Add guard bits for the measured cancellation. When off, the sum runs at
    /// exactly `significand_bits` and may lose most of them.
    pub adaptive: bool,
}

impl Default for PrecisionConfig {
    fn default() -> Self {
        PrecisionConfig { significand_bits: 256, summation_mode: SummationMode::Direct, adaptive: true }
    }
}

impl PrecisionConfig {
    pub fn with_bits(bits: u32) -> Result<Self> {
        let cfg = PrecisionConfig { significand_bits: bits, ..Default::default() };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.significand_bits < 64 {
            return Err(Error::InvalidParams(format!(
                "significand_bits = {} below the minimum of 64",
                self.significand_bits
            )));
        }
        Ok(())
    }
}

/// Result of an extended-precision sum.
#[derive(Debug, Clone)]
pub struct ExtValue {
    pub value: BigFloat,
    /// Working precision of the final pass.
    pub working_bits: usize,
    /// `log2(max |term| / |sum|)`.
    pub cancellation_bits: f64,
    pub warning: Option<Warning>,
}

impl ExtValue {
    pub fn to_f64(&self) -> f64 {
        big_to_f64(&self.value)
    }
}

/// The scaled value `S_n`.
#[derive(Debug, Clone)]
pub struct ScaledValue {
    pub value: BigFloat,
    pub n: u64,
    pub definition_tag: &'static str,
    pub working_bits: usize,
    pub cancellation_bits: f64,
    pub warning: Option<Warning>,
}

impl ScaledValue {
    pub fn to_f64(&self) -> f64 {
        big_to_f64(&self.value)
    }

    pub fn to_log(&self) -> LogReal {
        big_to_log(&self.value)
    }
}

/// Generalised binomial coefficient `prod_{j=1..k} (y-k+j)/j`, defined for every real `y`.
pub fn binom_real(y: f64, k: u64) -> f64 {
    let kf = k as f64;
    (1..=k).fold(1.0, |acc, j| acc * (y - kf + j as f64) / j as f64)
}

struct SumInputs {
    /// `n + alpha_eff`
    y1: BigFloat,
    /// `n + beta`
    y2: BigFloat,
    /// `(x-1)/2`
    u: BigFloat,
    /// `(x+1)/2`
    v: BigFloat,
    lead: Option<BigFloat>,
}

/// Terms `C(y1, n-μ) v^{n-μ} · C(y2, μ) u^μ` built by upward products, which
/// stay exact through the zero factors of integer `y1`.
fn explicit_sum(ar: &Big, inp: &SumInputs, n: u64, mode: SummationMode) -> (BigFloat, f64) {
    let p = ar.bits();
    let one = BigFloat::from_u8(1, p);
    let mut a = Vec::with_capacity(n as usize + 1);
    let mut cur = inp.lead.clone().unwrap_or_else(|| one.clone());
    a.push(cur.clone());
    for k in 1..=n {
        let f = inp.y1.sub(&BigFloat::from_u64(k - 1, 64), p, RM);
        cur = cur.mul(&f, p, RM).mul(&inp.v, p, RM).div(&BigFloat::from_u64(k, 64), p, RM);
        a.push(cur.clone());
    }

    let mut b = one;
    let mut sum = BigFloat::from_u8(0, p);
    let mut comp = BigFloat::from_u8(0, p);
    let mut max_log2 = f64::NEG_INFINITY;
    for mu in 0..=n {
        if mu > 0 {
            let f = inp.y2.sub(&BigFloat::from_u64(mu - 1, 64), p, RM);
            b = b.mul(&f, p, RM).mul(&inp.u, p, RM).div(&BigFloat::from_u64(mu, 64), p, RM);
        }
        let t = a[(n - mu) as usize].mul(&b, p, RM);
        max_log2 = max_log2.max(big_log2_abs(&t));
        match mode {
            SummationMode::Direct => sum = sum.add(&t, p, RM),
            SummationMode::Compensated => {
                let s = sum.add(&t, p, RM);
                let corr = if sum.abs().cmp(&t.abs()).is_some_and(|c| c >= 0) {
                    sum.sub(&s, p, RM).add(&t, p, RM)
                } else {
                    t.sub(&s, p, RM).add(&sum, p, RM)
                };
                comp = comp.add(&corr, p, RM);
                sum = s;
            }
        }
    }
    if mode == SummationMode::Compensated {
        sum = sum.add(&comp, p, RM);
    }
    (sum, max_log2)
}

/// Double-precision estimate of `log2 max |term|`, used to size the first pass.
fn estimate_max_log2(y1: f64, y2: f64, ln_u: f64, ln_v: f64, lead_ln: f64, n: u64) -> f64 {
    let mut la = Vec::with_capacity(n as usize + 1);
    let mut cur = lead_ln;
    la.push(cur);
    for k in 1..=n {
        cur += libm::log(libm::fabs(y1 - (k - 1) as f64)) + ln_v - libm::log(k as f64);
        la.push(cur);
    }
    let mut lb = 0.0;
    let mut best = f64::NEG_INFINITY;
    for mu in 0..=n {
        if mu > 0 {
            lb += libm::log(libm::fabs(y2 - (mu - 1) as f64)) + ln_u - libm::log(mu as f64);
        }
        best = best.max(la[(n - mu) as usize] + lb);
    }
    best / core::f64::consts::LN_2
}

fn round_bits(b: f64) -> usize {
    let b = libm::ceil(b.max(64.0)) as usize;
    b.div_ceil(64) * 64
}

fn adaptive_sum(
    prec: &PrecisionConfig,
    est_log2: f64,
    n: u64,
    mut build: impl FnMut(&mut Big) -> SumInputs,
) -> Result<ExtValue> {
    prec.validate()?;
    let budget = prec.significand_bits as usize;
    let est = if est_log2.is_finite() { est_log2.max(0.0) } else { 0.0 };
    let mut p = if prec.adaptive { round_bits(budget as f64 + est + 64.0) } else { budget };
    let mut last = None;
    for _ in 0..8 {
        let mut ar = Big::new(p);
        let inp = build(&mut ar);
        let (sum, max_log2) = explicit_sum(&ar, &inp, n, prec.summation_mode);
        let c = if sum.is_zero() {
            if max_log2 == f64::NEG_INFINITY {
                0.0
            } else {
                p as f64
            }
        } else {
            (max_log2 - big_log2_abs(&sum)).max(0.0)
        };
        let effective = p as f64 - c;
        let done = !prec.adaptive || effective >= budget as f64 + 8.0;
        let warning = (effective * LOG10_2 < 12.0 || (prec.adaptive && !done)).then_some(Warning::Precision {
            cancellation_digits: c * LOG10_2,
            budget_digits: p as f64 * LOG10_2,
        });
        last = Some(ExtValue { value: sum, working_bits: p, cancellation_bits: c, warning });
        if done {
            break;
        }
        p = round_bits(budget as f64 + c + 64.0).max(p + 64);
    }
    Ok(last.expect("at least one pass"))
}

/// `P_n^{(alpha_eff, beta)}(x)` by the explicit sum, terms accumulated in order `μ = 0..n`.
pub fn jacobi_general(alpha_eff: f64, beta: f64, x: f64, n: u64, prec: &PrecisionConfig) -> Result<ExtValue> {
    if !(alpha_eff.is_finite() && beta.is_finite() && x.is_finite()) {
        return Err(Error::InvalidParams("non-finite argument".into()));
    }
    let nf = n as f64;
    let est = estimate_max_log2(
        nf + alpha_eff,
        nf + beta,
        libm::log(libm::fabs((x - 1.0) / 2.0)),
        libm::log(libm::fabs((x + 1.0) / 2.0)),
        0.0,
        n,
    );
    adaptive_sum(prec, est, n, |ar| {
        let bx = ar.num(x);
        let one = ar.num(1.0);
        let half = ar.num(0.5);
        let bn = ar.num(nf);
        SumInputs {
            y1: ar.add(&bn, &ar.num(alpha_eff)),
            y2: ar.add(&bn, &ar.num(beta)),
            u: ar.mul(&ar.sub(&bx, &one), &half),
            v: ar.mul(&ar.add(&bx, &one), &half),
            lead: None,
        }
    })
}

/// `S_n = λ^gamma (1-λ²)^β P_n^{(gamma, β)}(1-2λ²)` with `x = 1-2λ²` never rounded.
pub fn scaled_exact(point: &EvalPoint, prec: &PrecisionConfig) -> Result<ScaledValue> {
    let pr = &point.params;
    let (l, beta, n) = (pr.lambda(), pr.beta(), point.n);
    let ln_l = libm::log(l);
    let ln_v = libm::log1p(-l * l);
    let fold = libm::fabs(point.gamma * ln_l) > LOG_SCALE_THRESHOLD;
    let lead_ln = if fold { point.gamma * ln_l + beta * ln_v } else { 0.0 };
    let est = estimate_max_log2(n as f64 + point.gamma, n as f64 + beta, 2.0 * ln_l, ln_v, lead_ln, n);

    let mut prefactor = None;
    let r = adaptive_sum(prec, est, n, |ar| {
        let bl = ar.num(l);
        let l2 = ar.mul(&bl, &bl);
        let v = ar.sub(&ar.num(1.0), &l2);
        let gamma = point.gamma_num(ar);
        let lnl = ar.ln(&bl);
        let lnv = ar.ln(&v);
        let e = ar.add(&ar.mul(&gamma, &lnl), &ar.mul(&ar.num(beta), &lnv));
        let pref = ar.exp(&e);
        let bn = ar.num(n as f64);
        let inp = SumInputs {
            y1: ar.add(&bn, &gamma),
            y2: ar.add(&bn, &ar.num(beta)),
            u: ar.neg(&l2),
            v,
            lead: fold.then(|| pref.clone()),
        };
        prefactor = (!fold).then_some((pref, ar.bits()));
        inp
    })?;
    let value = match prefactor {
        Some((pref, p)) => r.value.mul(&pref, p, RM),
        None => r.value,
    };
    Ok(ScaledValue {
        value,
        n,
        definition_tag: DEFINITION_TAG,
        working_bits: r.working_bits,
        cancellation_bits: r.cancellation_bits,
        warning: r.warning,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::ParamSet;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1e-300)
    }

    #[test]
    fn binom_examples() {
        assert_eq!(binom_real(3.0, 2), 3.0);
        assert_eq!(binom_real(0.37, 0), 1.0);
        assert_eq!(binom_real(0.5, 2), -0.125);
        assert_eq!(binom_real(-3.0, 5), 0.0 - 21.0);
        assert_eq!(binom_real(2.0, 3), 0.0);
    }

    #[test]
    fn degree_zero_and_one() {
        let prec = PrecisionConfig::default();
        assert_eq!(jacobi_general(0.3, -0.7, 0.2, 0, &prec).unwrap().to_f64(), 1.0);
        let (g, b, l) = (4.7, 0.2, 0.35);
        let x = 1.0 - 2.0 * l * l;
        let p1 = jacobi_general(g, b, x, 1, &prec).unwrap().to_f64();
        assert!(close(p1, (g + 1.0) - (g + b + 2.0) * l * l, 1e-15));
    }

    #[test]
    fn scaled_examples() {
        let prec = PrecisionConfig::default();
        let p = ParamSet::new(0.7, 0.3, 0.6, 0.4).unwrap();
        let s0 = scaled_exact(&EvalPoint::new(p, 0).unwrap(), &prec).unwrap();
        assert!(close(s0.to_f64(), libm::pow(0.4, 0.3) * libm::pow(1.0 - 0.16, 0.6), 1e-15));
        assert_eq!(s0.definition_tag, DEFINITION_TAG);

        let p = ParamSet::new(0.0, 0.0, 0.0, 0.5).unwrap();
        let s1 = scaled_exact(&EvalPoint::new(p, 1).unwrap(), &prec).unwrap();
        assert!(close(s1.to_f64(), 0.5, 1e-15));
    }

    #[test]
    fn symmetry_at_zero_slope() {
        let prec = PrecisionConfig::with_bits(128).unwrap();
        let (al, be, l) = (0.4, -0.3, 0.6);
        let x = 1.0 - 2.0 * l * l;
        for n in [1u64, 7, 20, 50] {
            let lhs = jacobi_general(al, be, -x, n, &prec).unwrap().to_f64();
            let rhs = jacobi_general(be, al, x, n, &prec).unwrap().to_f64();
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            assert!(close(lhs, sign * rhs, 1e-14), "n={n}");
        }
    }

    #[test]
    fn fixed_budget_warns_under_heavy_cancellation() {
        let p = ParamSet::new(0.2, 0.3, 0.5, 0.5).unwrap();
        let pt = EvalPoint::new(p, 500).unwrap();
        let fixed = PrecisionConfig { significand_bits: 64, adaptive: false, ..Default::default() };
        let r = scaled_exact(&pt, &fixed).unwrap();
        assert!(matches!(r.warning, Some(Warning::Precision { .. })));
        let r = scaled_exact(&pt, &PrecisionConfig::with_bits(64).unwrap()).unwrap();
        assert!(r.warning.is_none());
        assert!(r.cancellation_bits > 400.0);
    }

    #[test]
    fn compensated_matches_direct() {
        let p = ParamSet::new(0.2, 0.3, 0.5, 0.5).unwrap();
        let pt = EvalPoint::new(p, 120).unwrap();
        let d = scaled_exact(&pt, &PrecisionConfig::default()).unwrap();
        let c = PrecisionConfig { summation_mode: SummationMode::Compensated, ..Default::default() };
        let c = scaled_exact(&pt, &c).unwrap();
        let diff = d.value.sub(&c.value, 512, RM);
        assert!(big_log2_abs(&diff) - big_log2_abs(&d.value) < -250.0);
    }

    #[test]
    fn large_log_prefactor_is_folded() {
        // |gamma ln λ| > 500 exercises the folded prefactor
        let p = ParamSet::new(3.0, 0.0, 0.0, 0.2).unwrap();
        let pt = EvalPoint::new(p, 120).unwrap();
        let s = scaled_exact(&pt, &PrecisionConfig::default()).unwrap();
        let l = s.to_log();
        assert!(l.sign != 0 && l.ln_abs < -100.0 && l.ln_abs.is_finite());
    }
}
