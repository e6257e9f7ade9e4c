//! Uniform mesh in the log-radial coordinate xi = ln x.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::Params;

/// Node-centered mesh, uniform in xi, with its physical image x = exp(xi).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub n: usize,
    pub xi: Vec<f64>,
    pub x: Vec<f64>,
    pub dxi: f64,
}

impl Grid {
    /// Uniform grid of `n` nodes on [ln a(eps), ln b(eps)].
    pub fn for_params(p: &Params, n: usize) -> Result<Grid> {
        Grid::new(p.a_eps, p.b_eps, n)
    }

    /// Uniform grid of `n` nodes on [ln x_lo, ln x_hi].
    pub fn new(x_lo: f64, x_hi: f64, n: usize) -> Result<Grid> {
        if n < 4 {
            return Err(Error::Params(format!("grid needs at least 4 nodes: got {n}")));
        }
        if !(x_lo > 0.0 && x_hi > x_lo) {
            return Err(Error::Params(format!(
                "grid endpoints must satisfy 0 < x_lo < x_hi: got [{x_lo}, {x_hi}]"
            )));
        }
        let xi0 = x_lo.ln();
        let xi1 = x_hi.ln();
        let m = (n - 1) as f64;
        let xi: Vec<f64> = (0..n)
            .map(|i| (xi0 * (m - i as f64) + xi1 * i as f64) / m)
            .collect();
        let x: Vec<f64> = xi.iter().map(|&v| v.exp()).collect();
        let dxi = (xi1 - xi0) / m;
        Ok(Grid { n, xi, x, dxi })
    }

    /// Index of the grid node nearest to ln(x_phys).
    pub fn nearest_node(&self, x_phys: f64) -> usize {
        let xi = x_phys.ln();
        let raw = (xi - self.xi[0]) / self.dxi;
        (raw.round().max(0.0) as usize).min(self.n - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::derive_params;

    #[test]
    fn uniform_and_consistent() {
        let p = derive_params(2.0, 2e-3, 10.0, 0.2, 1.0, 0.1, 0.3).unwrap();
        let g = Grid::for_params(&p, 257).unwrap();
        assert_eq!(g.xi[0], p.a_eps.ln());
        assert_eq!(g.xi[g.n - 1], p.b_eps.ln());
        for i in 0..g.n - 1 {
            assert!(
                ((g.xi[i + 1] - g.xi[i]) - g.dxi).abs() < 1e-12,
                "non-uniform spacing at {i}"
            );
            assert!(g.xi[i + 1] > g.xi[i]);
        }
        for i in 0..g.n {
            assert_eq!(g.x[i], g.xi[i].exp());
        }
    }

    #[test]
    fn nearest_node_roundtrip() {
        let g = Grid::new(0.1, 10.0, 101).unwrap();
        for i in [0usize, 17, 50, 100] {
            assert_eq!(g.nearest_node(g.x[i]), i);
        }
        assert_eq!(g.nearest_node(0.01), 0);
        assert_eq!(g.nearest_node(100.0), 100);
    }

    #[test]
    fn rejects_tiny_or_bad_grids() {
        assert!(Grid::new(0.1, 10.0, 3).is_err());
        assert!(Grid::new(-0.1, 10.0, 16).is_err());
        assert!(Grid::new(1.0, 0.5, 16).is_err());
    }
}
