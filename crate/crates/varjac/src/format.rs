//! CSV and JSON encodings of sweep rows.
//!
//! Floats are written as the shortest decimal that parses back to the same
//! double, so both encodings round-trip bit-exactly. Missing values are empty
//! cells in CSV and `null` in JSON.

use std::collections::HashMap;
use std::io::{Read, Write};

use serde_json::{json, Map, Value};
use varjac_core::{RegimeTag, SummationMode};

use crate::error::HarnessError;
use crate::fit::FitReport;
use crate::phase::PhaseRow;
use crate::sweep::{
    deviation_routes, reference_route, FailureKind, Route, RouteCell, RouteValue, RowFailure, SweepRow, SweepSpec,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(HarnessError::Config(format!("unknown output format '{other}'"))),
        }
    }
}

/// Shortest round-trip decimal.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

fn parse_f64(s: &str, col: &str) -> Result<f64, HarnessError> {
    s.parse().map_err(|_| HarnessError::Parse(format!("column {col}: '{s}' is not a number")))
}

fn has_dominance(routes: &[Route]) -> bool {
    routes.contains(&Route::Bound) && reference_route(routes).is_some()
}

/// Column names for a sweep over `routes`.
pub fn columns(routes: &[Route]) -> Vec<String> {
    let mut c: Vec<String> = ["n", "gamma", "integer_flag", "regime"].iter().map(|s| s.to_string()).collect();
    for r in routes {
        for suffix in ["sign", "log10", "value"] {
            c.push(format!("{r}_{suffix}"));
        }
    }
    for r in deviation_routes(routes) {
        c.push(format!("dev_{r}"));
    }
    if has_dominance(routes) {
        c.push("bound_dominates".into());
    }
    for r in routes {
        c.push(format!("{r}_error"));
    }
    c.push("warnings".into());
    c
}

/// Typed cell, rendered as text for CSV and as a JSON value.
enum Cell {
    Uint(u64),
    Int(Option<i8>),
    Float(Option<f64>),
    Bool(Option<bool>),
    Text(Option<String>),
    List(Vec<String>),
}

impl Cell {
    fn text(&self) -> String {
        match self {
            Cell::Uint(v) => v.to_string(),
            Cell::Int(v) => v.map(|x| x.to_string()).unwrap_or_default(),
            Cell::Float(v) => v.map(fmt_f64).unwrap_or_default(),
            Cell::Bool(v) => v.map(|b| b.to_string()).unwrap_or_default(),
            Cell::Text(v) => v.clone().unwrap_or_default(),
            Cell::List(v) => v.join(";"),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Uint(v) => json!(v),
            Cell::Int(v) => v.map_or(Value::Null, |x| json!(x)),
            Cell::Float(v) => v.and_then(serde_json::Number::from_f64).map_or(Value::Null, Value::Number),
            Cell::Bool(v) => v.map_or(Value::Null, Value::Bool),
            Cell::Text(v) => v.clone().map_or(Value::Null, Value::String),
            Cell::List(v) => json!(v),
        }
    }
}

fn cells(row: &SweepRow, routes: &[Route]) -> Vec<Cell> {
    let mut out = vec![
        Cell::Uint(row.n),
        Cell::Float(Some(row.gamma)),
        Cell::Bool(Some(row.integer_flag)),
        Cell::Text(Some(row.regime.as_str().to_string())),
    ];
    for &r in routes {
        let v = row.value(r);
        out.push(Cell::Int(v.map(|v| v.sign)));
        out.push(Cell::Float(v.and_then(|v| v.log10)));
        out.push(Cell::Float(v.and_then(|v| v.value)));
    }
    for r in deviation_routes(routes) {
        out.push(Cell::Float(row.deviation(r)));
    }
    if has_dominance(routes) {
        out.push(Cell::Bool(row.bound_dominates));
    }
    for &r in routes {
        let f = row.cell(r).and_then(|c| c.failure.as_ref());
        out.push(Cell::Text(f.map(|f| format!("{}: {}", f.kind.as_str(), f.message))));
    }
    out.push(Cell::List(row.warnings.clone()));
    out
}

pub fn write_csv<W: Write>(w: W, routes: &[Route], rows: &[SweepRow]) -> Result<(), HarnessError> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(columns(routes))?;
    for row in rows {
        wr.write_record(cells(row, routes).iter().map(Cell::text))?;
    }
    wr.flush()?;
    Ok(())
}

fn precision_json(spec: &SweepSpec) -> Value {
    json!({
        "significand_bits": spec.precision.significand_bits,
        "summation_mode": match spec.precision.summation_mode {
            SummationMode::Direct => "direct",
            SummationMode::Compensated => "compensated",
        },
        "adaptive": spec.precision.adaptive,
    })
}

/// Echo of a sweep spec.
pub fn spec_json(spec: &SweepSpec) -> Value {
    let p = &spec.params;
    json!({
        "params": {
            "a": p.a(),
            "a_rational": p.a_exact().map(|r| format!("{}/{}", r.num, r.den)),
            "alpha": p.alpha(),
            "beta": p.beta(),
            "lambda": p.lambda(),
        },
        "n_values": spec.n_values,
        "routes": spec.routes.iter().map(|r| r.id()).collect::<Vec<_>>(),
        "quadrature": {
            "x_contour": spec.quad.x_contour,
            "panels_per_oscillation": spec.quad.panels_per_oscillation,
            "abs_tol": spec.quad.abs_tol,
            "rel_tol": spec.quad.rel_tol,
            "max_subdivisions": spec.quad.max_subdivisions,
            "max_bits": spec.quad.max_bits,
        },
    })
}

pub fn sweep_json(spec: &SweepSpec, rows: &[SweepRow]) -> Value {
    let names = columns(&spec.routes);
    let rows: Vec<Value> = rows
        .iter()
        .map(|row| {
            let m: Map<String, Value> =
                names.iter().cloned().zip(cells(row, &spec.routes).iter().map(Cell::json)).collect();
            Value::Object(m)
        })
        .collect();
    json!({
        "metadata": {
            "version": env!("CARGO_PKG_VERSION"),
            "precision": precision_json(spec),
            "spec": spec_json(spec),
            "columns": names,
        },
        "rows": rows,
    })
}

pub fn write_json<W: Write>(mut w: W, spec: &SweepSpec, rows: &[SweepRow]) -> Result<(), HarnessError> {
    serde_json::to_writer_pretty(&mut w, &sweep_json(spec, rows))?;
    writeln!(w)?;
    Ok(())
}

pub fn write_sweep<W: Write>(w: W, fmt: OutputFormat, spec: &SweepSpec, rows: &[SweepRow]) -> Result<(), HarnessError> {
    match fmt {
        OutputFormat::Csv => write_csv(w, &spec.routes, rows),
        OutputFormat::Json => write_json(w, spec, rows),
    }
}

fn routes_from_columns<'a>(cols: impl Iterator<Item = &'a str>) -> Result<Vec<Route>, HarnessError> {
    cols.filter_map(|c| c.strip_suffix("_sign")).map(str::parse).collect()
}

fn row_from_fields(get: &dyn Fn(&str) -> Option<String>, routes: &[Route]) -> Result<SweepRow, HarnessError> {
    let req = |k: &str| get(k).ok_or_else(|| HarnessError::Parse(format!("missing column {k}")));
    let opt = |k: &str| get(k).filter(|s| !s.is_empty());
    let opt_f = |k: &str| opt(k).map(|s| parse_f64(&s, k)).transpose();
    let parse_bool = |s: &str, k: &str| match s {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(HarnessError::Parse(format!("column {k}: '{s}' is not a boolean"))),
    };

    let n = req("n")?.parse().map_err(|_| HarnessError::Parse("column n: not an integer".into()))?;
    let gamma = parse_f64(&req("gamma")?, "gamma")?;
    let integer_flag = parse_bool(&req("integer_flag")?, "integer_flag")?;
    let regime_s = req("regime")?;
    let regime = RegimeTag::parse(&regime_s).ok_or_else(|| HarnessError::Parse(format!("unknown regime '{regime_s}'")))?;

    let mut cells = Vec::with_capacity(routes.len());
    for &r in routes {
        let sign_col = format!("{r}_sign");
        let value = match opt(&sign_col) {
            Some(s) => Some(RouteValue {
                sign: s.parse().map_err(|_| HarnessError::Parse(format!("column {sign_col}: '{s}'")))?,
                log10: opt_f(&format!("{r}_log10"))?,
                value: opt_f(&format!("{r}_value"))?,
            }),
            None => None,
        };
        let failure = opt(&format!("{r}_error")).map(|s| match s.split_once(": ") {
            Some((k, m)) => RowFailure { kind: FailureKind::parse(k), message: m.to_string() },
            None => RowFailure { kind: FailureKind::Other, message: s },
        });
        cells.push(RouteCell { route: r, value, failure });
    }
    let deviations = deviation_routes(routes)
        .into_iter()
        .map(|r| Ok((r, opt_f(&format!("dev_{r}"))?)))
        .collect::<Result<Vec<_>, HarnessError>>()?;
    let bound_dominates = opt("bound_dominates").map(|s| parse_bool(&s, "bound_dominates")).transpose()?;
    let warnings = opt("warnings").map(|s| s.split(';').map(str::to_string).collect()).unwrap_or_default();
    Ok(SweepRow { n, gamma, integer_flag, regime, cells, deviations, bound_dominates, warnings })
}

pub fn read_csv<R: Read>(r: R) -> Result<(Vec<Route>, Vec<SweepRow>), HarnessError> {
    let mut rd = csv::Reader::from_reader(r);
    let header: Vec<String> = rd.headers()?.iter().map(str::to_string).collect();
    let routes = routes_from_columns(header.iter().map(String::as_str))?;
    let index: HashMap<&str, usize> = header.iter().enumerate().map(|(i, h)| (h.as_str(), i)).collect();
    let mut rows = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        let get = |k: &str| index.get(k).and_then(|&i| rec.get(i)).map(str::to_string);
        rows.push(row_from_fields(&get, &routes)?);
    }
    Ok((routes, rows))
}

fn json_text(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some(String::new()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(match (n.as_u64(), n.as_i64()) {
            (Some(u), _) => u.to_string(),
            (None, Some(i)) => i.to_string(),
            _ => fmt_f64(n.as_f64()?),
        }),
        Value::String(s) => Some(s.clone()),
        Value::Array(a) => Some(a.iter().filter_map(Value::as_str).collect::<Vec<_>>().join(";")),
        Value::Object(_) => None,
    }
}

pub fn read_json<R: Read>(r: R) -> Result<(Vec<Route>, Vec<SweepRow>, Value), HarnessError> {
    let doc: Value = serde_json::from_reader(r)?;
    let meta = doc.get("metadata").cloned().unwrap_or(Value::Null);
    let routes: Vec<Route> = meta
        .pointer("/spec/routes")
        .and_then(Value::as_array)
        .ok_or_else(|| HarnessError::Parse("metadata.spec.routes missing".into()))?
        .iter()
        .map(|v| v.as_str().unwrap_or("").parse())
        .collect::<Result<_, _>>()?;
    let rows_v = doc.get("rows").and_then(Value::as_array).ok_or_else(|| HarnessError::Parse("rows missing".into()))?;
    let mut rows = Vec::with_capacity(rows_v.len());
    for rv in rows_v {
        let obj = rv.as_object().ok_or_else(|| HarnessError::Parse("row is not an object".into()))?;
        let get = |k: &str| obj.get(k).and_then(json_text);
        rows.push(row_from_fields(&get, &routes)?);
    }
    Ok((routes, rows, meta))
}

/// Reads either encoding, deciding by the first non-blank byte.
pub fn read_sweep(text: &str) -> Result<(Vec<Route>, Vec<SweepRow>), HarnessError> {
    if text.trim_start().starts_with('{') {
        let (routes, rows, _) = read_json(text.as_bytes())?;
        Ok((routes, rows))
    } else {
        read_csv(text.as_bytes())
    }
}

const PHASE_COLUMNS: [&str; 6] = ["lambda", "a", "regime", "lower", "upper", "h_case"];

pub fn write_phase<W: Write>(mut w: W, fmt: OutputFormat, rows: &[PhaseRow]) -> Result<(), HarnessError> {
    match fmt {
        OutputFormat::Csv => {
            let mut wr = csv::Writer::from_writer(w);
            wr.write_record(PHASE_COLUMNS)?;
            for r in rows {
                wr.write_record([
                    fmt_f64(r.lambda),
                    fmt_f64(r.a),
                    r.regime.as_str().to_string(),
                    fmt_f64(r.lower),
                    fmt_f64(r.upper),
                    r.h_case.to_string(),
                ])?;
            }
            wr.flush()?;
        }
        OutputFormat::Json => {
            let v: Vec<Value> = rows
                .iter()
                .map(|r| {
                    json!({
                        "lambda": r.lambda, "a": r.a, "regime": r.regime.as_str(),
                        "lower": r.lower, "upper": r.upper, "h_case": r.h_case,
                    })
                })
                .collect();
            serde_json::to_writer_pretty(&mut w, &json!({ "version": env!("CARGO_PKG_VERSION"), "rows": v }))?;
            writeln!(w)?;
        }
    }
    Ok(())
}

pub fn write_fit<W: Write>(mut w: W, fmt: OutputFormat, route: Route, fit: &FitReport) -> Result<(), HarnessError> {
    match fmt {
        OutputFormat::Csv => {
            let mut wr = csv::Writer::from_writer(w);
            wr.write_record(["route", "method", "fitted_slope", "slope_stderr", "intercept", "points_used"])?;
            wr.write_record([
                route.id().to_string(),
                fit.method.as_str().to_string(),
                fmt_f64(fit.fitted_slope),
                fmt_f64(fit.slope_stderr),
                fmt_f64(fit.intercept),
                fit.points_used.to_string(),
            ])?;
            wr.flush()?;
        }
        OutputFormat::Json => {
            let v = json!({
                "route": route.id(),
                "method": fit.method.as_str(),
                "fitted_slope": fit.fitted_slope,
                "slope_stderr": fit.slope_stderr,
                "intercept": fit.intercept,
                "points_used": fit.points_used,
            });
            serde_json::to_writer_pretty(&mut w, &v)?;
            writeln!(w)?;
        }
    }
    Ok(())
}
