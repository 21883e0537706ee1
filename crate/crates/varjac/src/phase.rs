//! Regime table over a grid of `(λ, a)`.

use varjac_core::{classify, laplace_shape, ParamSet, RegimeTag, DEFAULT_SADDLE_TOL};

use crate::error::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseRow {
    pub lambda: f64,
    pub a: f64,
    pub regime: RegimeTag,
    pub lower: f64,
    pub upper: f64,
    /// Shape of the Laplace exponent on `(0, 1]`: 1 increasing, 2 degenerate, 3 interior maximum.
    pub h_case: u8,
}

pub fn classify_cell(lambda: f64, a: f64) -> Result<PhaseRow, HarnessError> {
    let p = ParamSet::new(a, 0.0, 0.0, lambda).map_err(|e| HarnessError::Config(e.to_string()))?;
    let r = classify(&p, DEFAULT_SADDLE_TOL);
    Ok(PhaseRow {
        lambda,
        a,
        regime: r.tag,
        lower: r.lower,
        upper: r.upper,
        h_case: laplace_shape(&p, DEFAULT_SADDLE_TOL).case_number(),
    })
}

/// Rows in `λ`-major order.
pub fn phase_diagram(lambda_grid: &[f64], a_grid: &[f64]) -> Result<Vec<PhaseRow>, HarnessError> {
    let mut out = Vec::with_capacity(lambda_grid.len() * a_grid.len());
    for &l in lambda_grid {
        for &a in a_grid {
            out.push(classify_cell(l, a)?);
        }
    }
    Ok(out)
}
