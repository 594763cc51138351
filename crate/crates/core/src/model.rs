//! A discretized problem: parameters bound to a grid with its operators.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::params::ProblemParams;
use crate::spectral::{hardy_weight, Grid, RieszMode, RieszOperator, Spectral};

/// Parameters, grid, transforms, the Riesz operator and the Hardy weight.
///
/// Cheap to clone; the heavy operators are shared.
#[derive(Debug, Clone)]
pub struct Model {
    params: ProblemParams,
    grid: Grid,
    spectral: Arc<Spectral>,
    riesz: Arc<RieszOperator>,
    hardy: Arc<Vec<f64>>,
    r_sq: Arc<Vec<f64>>,
}

impl Model {
    /// Validates `params` against the standing assumptions. `a = 0` is
    /// accepted as a way to switch the nonlinearity off.
    pub fn new(params: ProblemParams, grid: Grid) -> Result<Self> {
        Self::with_riesz_mode(params, grid, RieszMode::FreeSpace)
    }

    pub fn with_riesz_mode(params: ProblemParams, grid: Grid, mode: RieszMode) -> Result<Self> {
        check_params(&params, &grid)?;
        let spectral = Spectral::new(grid);
        let riesz = RieszOperator::new(grid, params.alpha, mode)?;
        Ok(Self {
            hardy: Arc::new(hardy_weight(&grid, params.b, params.delta)?),
            r_sq: Arc::new(grid.radius_squared()),
            spectral: Arc::new(spectral),
            riesz: Arc::new(riesz),
            params,
            grid,
        })
    }

    /// Same grid and operators with different `b`, `p`, `a` or `delta`.
    /// `alpha` and `N` must not change.
    pub fn with_params(&self, params: ProblemParams) -> Result<Self> {
        if params.alpha != self.params.alpha || params.dim != self.params.dim {
            return Self::with_riesz_mode(params, self.grid, self.riesz.mode());
        }
        check_params(&params, &self.grid)?;
        let hardy = if params.b == self.params.b && params.delta == self.params.delta {
            Arc::clone(&self.hardy)
        } else {
            Arc::new(hardy_weight(&self.grid, params.b, params.delta)?)
        };
        Ok(Self {
            params,
            hardy,
            ..self.clone()
        })
    }

    pub fn params(&self) -> &ProblemParams {
        &self.params
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn spectral(&self) -> &Spectral {
        &self.spectral
    }

    pub fn riesz(&self) -> &RieszOperator {
        &self.riesz
    }

    /// `b / (|x|^2 + delta)` at the nodes.
    pub fn hardy(&self) -> &[f64] {
        &self.hardy
    }

    pub fn radius_squared(&self) -> &[f64] {
        &self.r_sq
    }
}

fn check_params(params: &ProblemParams, grid: &Grid) -> Result<()> {
    if params.dim != grid.dim {
        return Err(Error::Grid(format!(
            "grid dimension {} does not match N = {}",
            grid.dim, params.dim
        )));
    }
    let mut report = params.validate();
    if params.a == 0 {
        report.violations.retain(|v| v.constraint != "a in {+1, -1}");
    }
    report.into_result()
}
