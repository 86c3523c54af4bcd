//! Evaluation grids and gauges.
//!
//! A gauge is a net ρ_ε of positive reals decreasing to zero; every
//! generalized number, order, and verdict in this crate is relative to one.
//! Numerically a gauge is carried on a finite geometric grid of ε values —
//! coarse enough to finish fast, deep enough that asymptotic slopes have
//! settled for the nets of interest. Symbolically it is kept as the defining
//! expression in `eps`, which the order engine substitutes for `rho` before
//! any asymptotic analysis.

use serde::{Deserialize, Serialize};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::netlang::{eval, parse, EvalCtx, NetExpr};
use crate::wide::WideComplex;

/// Geometric grid ε_k = eps0 · ratio^k, k = 0..count.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsGrid {
    pub eps0: f64,
    pub ratio: f64,
    pub count: usize,
}

impl Default for EpsGrid {
    fn default() -> Self {
        EpsGrid {
            eps0: 0.5,
            ratio: 0.7,
            count: 24,
        }
    }
}

impl EpsGrid {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps0 > 0.0 && self.eps0 <= 1.0) {
            return Err(Error::Gauge(format!(
                "grid start {} must lie in (0, 1]",
                self.eps0
            )));
        }
        if !(self.ratio > 0.0 && self.ratio < 1.0) {
            return Err(Error::Gauge(format!(
                "grid ratio {} must lie in (0, 1)",
                self.ratio
            )));
        }
        if self.count < 8 {
            return Err(Error::Gauge(
                "grid needs at least 8 points for slope estimates".into(),
            ));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        let mut eps = self.eps0;
        (0..self.count)
            .map(|_| {
                let e = eps;
                eps *= self.ratio;
                e
            })
            .collect()
    }
}

/// A named gauge: the defining expression, plus its values on a grid.
#[derive(Clone, Debug)]
pub struct Gauge {
    pub name: String,
    pub expr: NetExpr,
    pub grid: EpsGrid,
    eps: Vec<f64>,
    rho: Vec<WideComplex>,
    log_rho: Vec<f64>,
}

impl Gauge {
    /// Build and validate a gauge from its defining expression in `eps`.
    pub fn new(name: impl Into<String>, expr: NetExpr, grid: EpsGrid) -> Result<Gauge> {
        grid.validate()?;
        let name = name.into();
        if expr.uses_rho() {
            return Err(Error::Gauge(format!(
                "gauge `{name}` must be defined in terms of eps alone, not rho"
            )));
        }
        if !expr.params().is_empty() {
            return Err(Error::Gauge(format!(
                "gauge `{name}` must not contain parameters"
            )));
        }
        let eps = grid.points();
        let mut rho = Vec::with_capacity(eps.len());
        let mut log_rho = Vec::with_capacity(eps.len());
        for (k, &e) in eps.iter().enumerate() {
            let ctx = EvalCtx::new(e, WideComplex::ZERO).at_index(k);
            let v = eval(&expr, &ctx)?;
            if v.is_zero() || v.phase() != 0.0 {
                return Err(Error::Gauge(format!(
                    "gauge `{name}` must be positive real; value at eps={e} is not"
                )));
            }
            let lm = v.lm();
            if lm > 0.0 {
                return Err(Error::Gauge(format!(
                    "gauge `{name}` must satisfy rho <= 1; violated at eps={e}"
                )));
            }
            if let Some(&prev) = log_rho.last() {
                if lm >= prev {
                    return Err(Error::Gauge(format!(
                        "gauge `{name}` must decrease strictly along the grid; \
                         violated at eps={e}"
                    )));
                }
            }
            rho.push(v);
            log_rho.push(lm);
        }
        Ok(Gauge {
            name,
            expr,
            grid,
            eps,
            rho,
            log_rho,
        })
    }

    pub fn parse_new(name: impl Into<String>, src: &str, grid: EpsGrid) -> Result<Gauge> {
        Gauge::new(name, parse(src)?, grid)
    }

    /// The standard gauge ρ_ε = ε on the default grid.
    pub fn standard() -> Arc<Gauge> {
        Arc::new(
            Gauge::new("rho", NetExpr::Eps, EpsGrid::default())
                .expect("standard gauge is valid"),
        )
    }

    /// The standard gauge on a custom grid.
    pub fn standard_on(grid: EpsGrid) -> Result<Arc<Gauge>> {
        Ok(Arc::new(Gauge::new("rho", NetExpr::Eps, grid)?))
    }

    pub fn len(&self) -> usize {
        self.eps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eps.is_empty()
    }

    pub fn eps(&self, k: usize) -> f64 {
        self.eps[k]
    }

    pub fn eps_points(&self) -> &[f64] {
        &self.eps
    }

    pub fn rho(&self, k: usize) -> WideComplex {
        self.rho[k]
    }

    /// `ln ρ_ε` at grid index `k` — always finite and negative past the first
    /// points, even when ρ_ε underflows f64.
    pub fn log_rho(&self, k: usize) -> f64 {
        self.log_rho[k]
    }

    pub fn log_rho_points(&self) -> &[f64] {
        &self.log_rho
    }

    pub fn ctx(&self, k: usize) -> EvalCtx<'_> {
        EvalCtx::new(self.eps[k], self.rho[k]).at_index(k)
    }

    /// Substitute this gauge's defining expression for `rho`.
    pub fn subst_into(&self, e: &NetExpr) -> NetExpr {
        e.subst_rho(&self.expr)
    }

    /// Two gauges are interchangeable when their defining nets agree.
    pub fn same_as(&self, other: &Gauge) -> bool {
        self.grid == other.grid
            && crate::netlang::normal::proves_equal(&self.expr, &other.expr).unwrap_or(false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_shape() {
        let g = EpsGrid::default();
        let pts = g.points();
        assert_eq!(pts.len(), 24);
        assert_eq!(pts[0], 0.5);
        assert!((pts[1] - 0.35).abs() < 1e-15);
        assert!(pts[23] < 2e-4);
    }

    #[test]
    fn standard_gauge() {
        let g = Gauge::standard();
        assert_eq!(g.len(), 24);
        assert_eq!(g.rho(0).to_complex_lossy().re, 0.5);
        assert!((g.log_rho(3) - (0.5f64 * 0.7 * 0.7 * 0.7).ln()).abs() < 1e-12);
    }

    #[test]
    fn exponential_gauge_has_deep_logs() {
        let g = Gauge::parse_new("sigma", "exp(-1/eps)", EpsGrid::default()).unwrap();
        let last = g.len() - 1;
        assert!(g.log_rho(last) < -5000.0, "log rho = {}", g.log_rho(last));
    }

    #[test]
    fn invalid_gauges_rejected() {
        assert!(Gauge::parse_new("bad", "1 + eps", EpsGrid::default()).is_err());
        assert!(Gauge::parse_new("bad", "i*eps", EpsGrid::default()).is_err());
        assert!(Gauge::parse_new("bad", "rho", EpsGrid::default()).is_err());
        assert!(Gauge::parse_new("bad", "0*eps", EpsGrid::default()).is_err());
    }
}
