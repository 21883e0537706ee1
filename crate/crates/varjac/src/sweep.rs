//! Parameter sweeps over `n`, one column group per evaluation route.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use varjac_core::{
    bound_certificate, classify, estimate, scaled_exact, scaled_via_integrals, Error, EstimateKind, EvalPoint,
    LogReal, ParamSet, PrecisionConfig, QuadratureConfig, RegimeTag, Warning, DEFAULT_SADDLE_TOL,
};

use crate::error::{exit, HarnessError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Route {
    Exact,
    Quadrature,
    Asymptotic,
    Bound,
}

impl Route {
    pub const ALL: [Route; 4] = [Route::Exact, Route::Quadrature, Route::Asymptotic, Route::Bound];

    /// Column prefix and CLI name.
    pub fn id(self) -> &'static str {
        match self {
            Route::Exact => "exact",
            Route::Quadrature => "quad",
            Route::Asymptotic => "asym",
            Route::Bound => "bound",
        }
    }
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Route {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "exact" => Ok(Route::Exact),
            "quad" | "quadrature" => Ok(Route::Quadrature),
            "asym" | "asymptotic" => Ok(Route::Asymptotic),
            "bound" => Ok(Route::Bound),
            other => Err(HarnessError::Config(format!("unknown route '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub params: ParamSet,
    pub n_values: Vec<u64>,
    pub routes: Vec<Route>,
    pub precision: PrecisionConfig,
    pub quad: QuadratureConfig,
}

impl SweepSpec {
    pub fn new(params: ParamSet, n_values: Vec<u64>, routes: Vec<Route>) -> Self {
        SweepSpec { params, n_values, routes, precision: PrecisionConfig::default(), quad: QuadratureConfig::default() }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.routes.is_empty() {
            return Err(HarnessError::Config("no routes requested".into()));
        }
        for (i, r) in self.routes.iter().enumerate() {
            if self.routes[..i].contains(r) {
                return Err(HarnessError::Config(format!("route '{r}' requested twice")));
            }
        }
        if self.n_values.is_empty() {
            return Err(HarnessError::Config("no degrees requested".into()));
        }
        if self.n_values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(HarnessError::Config("degrees must be strictly increasing".into()));
        }
        if let Some(&last) = self.n_values.last() {
            EvalPoint::new(self.params, last).map_err(|e| HarnessError::Config(e.to_string()))?;
        }
        self.precision.validate().map_err(|e| HarnessError::Config(e.to_string()))?;
        if self.routes.contains(&Route::Quadrature) {
            self.quad.validate(self.params.lambda()).map_err(|e| HarnessError::Config(e.to_string()))?;
        }
        Ok(())
    }
}

/// Sign, `log10|v|` and the plain value when it fits in a double.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RouteValue {
    pub sign: i8,
    /// `None` for zero.
    pub log10: Option<f64>,
    /// `None` when outside the double range.
    pub value: Option<f64>,
}

impl RouteValue {
    pub fn from_log(l: &LogReal) -> Self {
        Self::with_direct(l, None)
    }

    /// Like [`RouteValue::from_log`], taking the plain value from `direct`
    /// (a correctly rounded conversion) instead of `exp(ln|v|)`.
    pub fn with_direct(l: &LogReal, direct: Option<f64>) -> Self {
        if l.sign == 0 {
            return RouteValue { sign: 0, log10: None, value: Some(0.0) };
        }
        let value = l.is_representable().then(|| direct.filter(|v| v.is_finite()).unwrap_or_else(|| l.value()));
        RouteValue { sign: l.sign, log10: Some(l.log10_abs()), value }
    }

    /// `ln|v|`, `-inf` for zero.
    pub fn ln_abs(&self) -> f64 {
        self.log10.map_or(f64::NEG_INFINITY, |l| l * std::f64::consts::LN_10)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailureKind {
    Convergence,
    Consistency,
    Refused,
    Regime,
    IntegerGamma,
    Domain,
    Other,
}

impl FailureKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FailureKind::Convergence => "convergence",
            FailureKind::Consistency => "consistency",
            FailureKind::Refused => "refused",
            FailureKind::Regime => "regime",
            FailureKind::IntegerGamma => "integer_gamma",
            FailureKind::Domain => "domain",
            FailureKind::Other => "error",
        }
    }

    pub fn parse(s: &str) -> Self {
        match s {
            "convergence" => FailureKind::Convergence,
            "consistency" => FailureKind::Consistency,
            "refused" => FailureKind::Refused,
            "regime" => FailureKind::Regime,
            "integer_gamma" => FailureKind::IntegerGamma,
            "domain" => FailureKind::Domain,
            _ => FailureKind::Other,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RowFailure {
    pub kind: FailureKind,
    pub message: String,
}

impl From<&Error> for RowFailure {
    fn from(e: &Error) -> Self {
        let kind = match e {
            Error::Convergence { .. } => FailureKind::Convergence,
            Error::Consistency(_) => FailureKind::Consistency,
            Error::CertificateRefused(_) => FailureKind::Refused,
            Error::Regime { .. } => FailureKind::Regime,
            Error::IntegerGamma { .. } => FailureKind::IntegerGamma,
            Error::Domain(_) => FailureKind::Domain,
            _ => FailureKind::Other,
        };
        RowFailure { kind, message: e.to_string() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RouteCell {
    pub route: Route,
    pub value: Option<RouteValue>,
    pub failure: Option<RowFailure>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub n: u64,
    pub gamma: f64,
    pub integer_flag: bool,
    pub regime: RegimeTag,
    /// In requested route order.
    pub cells: Vec<RouteCell>,
    /// Relative deviation of each non-reference value route from the reference
    /// (exact if requested, else quadrature).
    pub deviations: Vec<(Route, Option<f64>)>,
    /// Strict `|reference| < bound`, when both are available.
    pub bound_dominates: Option<bool>,
    pub warnings: Vec<String>,
}

impl SweepRow {
    pub fn cell(&self, route: Route) -> Option<&RouteCell> {
        self.cells.iter().find(|c| c.route == route)
    }

    pub fn value(&self, route: Route) -> Option<&RouteValue> {
        self.cell(route).and_then(|c| c.value.as_ref())
    }

    pub fn deviation(&self, route: Route) -> Option<f64> {
        self.deviations.iter().find(|d| d.0 == route).and_then(|d| d.1)
    }

    /// Exit code this row calls for.
    pub fn exit_code(&self) -> i32 {
        let mut code = exit::SUCCESS;
        for c in &self.cells {
            match c.failure.as_ref().map(|f| f.kind) {
                Some(FailureKind::Consistency) => code = code.max(exit::CONSISTENCY),
                Some(FailureKind::Convergence) => code = code.max(exit::CONVERGENCE),
                _ => {}
            }
        }
        code
    }
}

/// Reference route for deviations and dominance.
pub fn reference_route(routes: &[Route]) -> Option<Route> {
    [Route::Exact, Route::Quadrature].into_iter().find(|r| routes.contains(r))
}

/// Routes that get a deviation column.
pub fn deviation_routes(routes: &[Route]) -> Vec<Route> {
    let reference = reference_route(routes);
    routes.iter().copied().filter(|&r| Some(r) != reference && r != Route::Bound).collect()
}

/// `|b/a - 1|` from log-magnitudes, valid far outside the double range.
pub fn relative_deviation(a: &LogReal, b: &LogReal) -> Option<f64> {
    if a.sign == 0 {
        return (b.sign == 0).then_some(0.0);
    }
    let e = b.ln_abs - a.ln_abs;
    let d = match a.sign * b.sign {
        0 => 1.0,
        1 => e.exp_m1().abs(),
        _ => 1.0 + e.exp(),
    };
    d.is_finite().then_some(d)
}

fn warning_text(source: &str, w: &Warning) -> String {
    match w {
        Warning::Precision { cancellation_digits, budget_digits } => {
            format!("{source}:precision(cancellation={cancellation_digits:.1},budget={budget_digits:.1})")
        }
        Warning::Breakdown { distance } => format!("{source}:breakdown(distance={distance:.3e})"),
        Warning::NearInteger { offset } => format!("{source}:near_integer(offset={offset:.3e})"),
    }
}

struct Evaluated {
    log: Option<LogReal>,
    direct: Option<f64>,
    kind: EstimateKind,
    failure: Option<RowFailure>,
    warning: Option<Warning>,
}

fn eval_route(route: Route, point: &EvalPoint, spec: &SweepSpec) -> Evaluated {
    type Out = (LogReal, Option<f64>, EstimateKind, Option<Warning>);
    let res: Result<Out, Error> = match route {
        Route::Exact => scaled_exact(point, &spec.precision)
            .map(|v| (v.to_log(), Some(v.to_f64()), EstimateKind::Asymptote, v.warning)),
        Route::Quadrature => {
            scaled_via_integrals(point, &spec.quad).map(|v| (v.reconstructed, None, EstimateKind::Asymptote, None))
        }
        Route::Asymptotic => estimate(point).map(|e| (e.log_value, Some(e.value), e.kind, e.warning)),
        Route::Bound => bound_certificate(point)
            .map(|c| (LogReal::new(1, c.ln_bound(point.n)), None, EstimateKind::UpperBound, None)),
    };
    let failed = |failure: RowFailure| Evaluated {
        log: None,
        direct: None,
        kind: EstimateKind::Asymptote,
        failure: Some(failure),
        warning: None,
    };
    match res {
        Ok((l, direct, kind, warning)) if !l.ln_abs.is_nan() => {
            Evaluated { log: Some(l), direct, kind, failure: None, warning }
        }
        Ok(_) => failed(RowFailure { kind: FailureKind::Other, message: "result is NaN".into() }),
        Err(e) => failed((&e).into()),
    }
}

fn run_row(spec: &SweepSpec, n: u64) -> SweepRow {
    let regime = classify(&spec.params, DEFAULT_SADDLE_TOL);
    let point = EvalPoint::new(spec.params, n).expect("degrees are checked by SweepSpec::validate");
    let evals: Vec<(Route, Evaluated)> = spec.routes.iter().map(|&r| (r, eval_route(r, &point, spec))).collect();
    let find = |r: Route| evals.iter().find(|e| e.0 == r).map(|e| &e.1);

    let reference = reference_route(&spec.routes).and_then(find).and_then(|e| e.log);
    let deviations = deviation_routes(&spec.routes)
        .into_iter()
        .map(|r| {
            let d = match (reference.as_ref(), find(r)) {
                (Some(a), Some(ev)) if ev.kind == EstimateKind::Asymptote => {
                    ev.log.as_ref().and_then(|b| relative_deviation(a, b))
                }
                _ => None,
            };
            (r, d)
        })
        .collect();
    let bound_dominates = match (reference.as_ref(), find(Route::Bound).and_then(|e| e.log)) {
        (Some(a), Some(b)) => Some(a.ln_abs < b.ln_abs),
        _ => None,
    };

    let mut warnings: Vec<String> = evals
        .iter()
        .filter_map(|(r, e)| e.warning.as_ref().map(|w| warning_text(r.id(), w)))
        .collect();
    if let Some(w) = point.near_integer_warning() {
        warnings.push(warning_text("gamma", &w));
    }

    SweepRow {
        n,
        gamma: point.gamma,
        integer_flag: point.integer_flag,
        regime: regime.tag,
        cells: evals
            .into_iter()
            .map(|(route, e)| RouteCell {
                route,
                value: e.log.as_ref().map(|l| RouteValue::with_direct(l, e.direct)),
                failure: e.failure,
            })
            .collect(),
        deviations,
        bound_dominates,
        warnings,
    }
}

/// Evaluates every requested route at every `n`. Rows come back in `n` order;
/// per-row failures are recorded in the row.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>, HarnessError> {
    spec.validate()?;
    Ok(spec.n_values.par_iter().map(|&n| run_row(spec, n)).collect())
}

/// Largest exit code called for by any row.
pub fn sweep_exit_code(rows: &[SweepRow]) -> i32 {
    rows.iter().map(SweepRow::exit_code).max().unwrap_or(exit::SUCCESS)
}

/// Degrees in `1..=n_max` where a bound certificate is issued, with the
/// exact and bound routes.
pub fn verify_bounds(
    params: ParamSet,
    n_max: u64,
    precision: PrecisionConfig,
) -> Result<Vec<SweepRow>, HarnessError> {
    let tag = classify(&params, DEFAULT_SADDLE_TOL).tag;
    if !matches!(tag, RegimeTag::ExponentialLower | RegimeTag::ExponentialUpper) {
        return Err(HarnessError::Config(format!("no bound certificate in regime {tag}")));
    }
    let mut n_values = Vec::new();
    for n in 1..=n_max {
        let point = EvalPoint::new(params, n)?;
        if bound_certificate(&point).is_ok() {
            n_values.push(n);
        }
    }
    if n_values.is_empty() {
        return Err(HarnessError::Config(format!("no degree in 1..={n_max} admits a certificate")));
    }
    let spec = SweepSpec { precision, ..SweepSpec::new(params, n_values, vec![Route::Exact, Route::Bound]) };
    run_sweep(&spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deviation_in_log_form() {
        let a = LogReal::new(1, 1000.0);
        let b = LogReal::new(1, 1000.0 + 1e-9);
        let e = b.ln_abs - a.ln_abs;
        assert!((relative_deviation(&a, &b).unwrap() - e).abs() < 1e-17);
        assert!((e - 1e-9).abs() < 1e-13);
        let c = LogReal::new(-1, 1000.0);
        assert!((relative_deviation(&a, &c).unwrap() - 2.0).abs() < 1e-15);
        assert_eq!(relative_deviation(&LogReal::ZERO, &LogReal::ZERO), Some(0.0));
        assert_eq!(relative_deviation(&LogReal::ZERO, &a), None);
    }

    #[test]
    fn spec_validation() {
        let p = ParamSet::new(0.2, 0.0, 0.0, 0.5).unwrap();
        assert!(SweepSpec::new(p, vec![1, 2], vec![]).validate().is_err());
        assert!(SweepSpec::new(p, vec![2, 2], vec![Route::Exact]).validate().is_err());
        assert!(SweepSpec::new(p, vec![1, 2], vec![Route::Exact, Route::Exact]).validate().is_err());
        let mut s = SweepSpec::new(p, vec![1], vec![Route::Quadrature]);
        s.quad.x_contour = 3.0;
        assert!(s.validate().is_err());
        assert!(SweepSpec::new(p, vec![0, 3], vec![Route::Exact]).validate().is_ok());
    }

    #[test]
    fn routes_parse() {
        for r in Route::ALL {
            assert_eq!(r.id().parse::<Route>().unwrap(), r);
        }
        assert_eq!("quadrature".parse::<Route>().unwrap(), Route::Quadrature);
        assert!("nope".parse::<Route>().is_err());
    }
}
