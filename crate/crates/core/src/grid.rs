//! Time meshes and values sampled on them.

use std::sync::Arc;

use crate::error::{Error, Result};

/// A strictly increasing mesh `0 = t_0 < t_1 < ... < t_n = T`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    nodes: Vec<f64>,
    uniform: bool,
}

impl TimeGrid {
    /// `n` equal steps on `[0, T]`. Node `k` is computed as `k * T / n`.
    pub fn uniform(horizon: f64, steps: usize) -> Result<Self> {
        check_horizon(horizon)?;
        if steps == 0 {
            return Err(Error::Parameter("a grid needs at least one step".into()));
        }
        let nodes = (0..=steps)
            .map(|k| {
                if k == steps {
                    horizon
                } else {
                    k as f64 * horizon / steps as f64
                }
            })
            .collect();
        Ok(TimeGrid {
            nodes,
            uniform: true,
        })
    }

    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::Parameter("a grid needs at least two nodes".into()));
        }
        if nodes[0] != 0.0 {
            return Err(Error::Parameter(format!(
                "grid must start at 0, got {}",
                nodes[0]
            )));
        }
        if let Some(w) = nodes
            .windows(2)
            .find(|w| !(w[1] > w[0]) || !w[1].is_finite())
        {
            return Err(Error::Parameter(format!(
                "grid nodes must be finite and strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        let n = nodes.len() - 1;
        let h = nodes[n] / n as f64;
        let uniform = nodes
            .iter()
            .enumerate()
            .all(|(k, &t)| (t - k as f64 * h).abs() <= 1e-12 * nodes[n]);
        Ok(TimeGrid { nodes, uniform })
    }

    pub fn horizon(&self) -> f64 {
        *self.nodes.last().expect("grid is non-empty")
    }

    pub fn steps(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn is_uniform(&self) -> bool {
        self.uniform
    }

    /// Step size of a uniform grid.
    pub fn step(&self) -> Option<f64> {
        self.uniform.then(|| self.horizon() / self.steps() as f64)
    }

    pub fn dt(&self, k: usize) -> f64 {
        self.nodes[k + 1] - self.nodes[k]
    }

    /// Keep every `factor`-th node. Requires `factor` to divide the step count.
    pub fn coarsen(&self, factor: usize) -> Result<TimeGrid> {
        if factor == 0 || self.steps() % factor != 0 {
            return Err(Error::GridMismatch(format!(
                "coarsening factor {factor} does not divide {} steps",
                self.steps()
            )));
        }
        let nodes = self.nodes.iter().step_by(factor).copied().collect();
        Ok(TimeGrid {
            nodes,
            uniform: self.uniform,
        })
    }

    /// Index of the node equal to `t` up to `1e-12 * T`.
    pub fn node_index(&self, t: f64) -> Option<usize> {
        let tol = 1e-12 * self.horizon().max(1.0);
        let k = self.nodes.partition_point(|&x| x < t - tol);
        (k < self.nodes.len() && (self.nodes[k] - t).abs() <= tol).then_some(k)
    }
}

fn check_horizon(horizon: f64) -> Result<()> {
    if horizon > 0.0 && horizon.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter(format!(
            "horizon must be positive and finite, got {horizon}"
        )))
    }
}

/// Real values attached to the nodes of a shared [`TimeGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct SampledPath {
    grid: Arc<TimeGrid>,
    values: Vec<f64>,
}

impl SampledPath {
    pub fn new(grid: Arc<TimeGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.nodes().len() {
            return Err(Error::GridMismatch(format!(
                "{} values for {} nodes",
                values.len(),
                grid.nodes().len()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Parameter(format!(
                "non-finite path value at node {k}"
            )));
        }
        Ok(SampledPath { grid, values })
    }

    pub fn zeros(grid: Arc<TimeGrid>) -> Self {
        let values = vec![0.0; grid.nodes().len()];
        SampledPath { grid, values }
    }

    /// Evaluate `f` at every node.
    pub fn from_fn(grid: Arc<TimeGrid>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.nodes().iter().map(|&t| f(t)).collect();
        SampledPath::new(grid, values)
    }

    /// Partial sums of `increments`, starting at zero.
    pub fn from_increments(grid: Arc<TimeGrid>, increments: &[f64]) -> Result<Self> {
        let mut values = Vec::with_capacity(increments.len() + 1);
        let mut acc = 0.0;
        values.push(acc);
        for d in increments {
            acc += d;
            values.push(acc);
        }
        SampledPath::new(grid, values)
    }

    pub fn grid(&self) -> &Arc<TimeGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn terminal(&self) -> f64 {
        *self.values.last().expect("path is non-empty")
    }

    pub fn increments(&self) -> Vec<f64> {
        self.values.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn same_grid(&self, other: &SampledPath) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || self.grid == other.grid
    }

    /// Restriction to a coarser grid obtained with [`TimeGrid::coarsen`].
    /// Values at retained nodes are copied bit for bit.
    pub fn restrict(&self, coarse: &Arc<TimeGrid>) -> Result<Self> {
        let fine = self.grid.steps();
        let n = coarse.steps();
        if n == 0 || fine % n != 0 {
            return Err(Error::GridMismatch(format!(
                "cannot restrict {fine} steps to {n}"
            )));
        }
        let factor = fine / n;
        let ok = coarse
            .nodes()
            .iter()
            .zip(self.grid.nodes().iter().step_by(factor))
            .all(|(a, b)| a == b);
        if !ok {
            return Err(Error::GridMismatch("coarse grid is not a sub-grid".into()));
        }
        let values = self.values.iter().step_by(factor).copied().collect();
        Ok(SampledPath {
            grid: coarse.clone(),
            values,
        })
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        SampledPath::new(
            self.grid.clone(),
            self.values.iter().map(|v| v * factor).collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_grid_invariants() {
        let g = TimeGrid::uniform(2.0, 8).unwrap();
        assert_eq!(g.nodes()[0], 0.0);
        assert_eq!(g.horizon(), 2.0);
        assert_eq!(g.steps(), 8);
        assert!(g.is_uniform());
        assert_eq!(g.step(), Some(0.25));
        assert_eq!(g.node_index(0.75), Some(3));
        assert_eq!(g.node_index(0.7), None);
    }

    #[test]
    fn rejects_bad_nodes() {
        assert!(TimeGrid::from_nodes(vec![0.0, 0.5, 0.5, 1.0]).is_err());
        assert!(TimeGrid::from_nodes(vec![0.1, 0.5]).is_err());
        assert!(TimeGrid::uniform(0.0, 4).is_err());
        assert!(TimeGrid::uniform(1.0, 0).is_err());
        let g = TimeGrid::from_nodes(vec![0.0, 0.1, 0.5, 1.0]).unwrap();
        assert!(!g.is_uniform());
        assert_eq!(g.step(), None);
    }

    #[test]
    fn restriction_copies_values() {
        let fine = Arc::new(TimeGrid::uniform(1.0, 8).unwrap());
        let coarse = Arc::new(fine.coarsen(4).unwrap());
        let p = SampledPath::from_fn(fine, |t| t * t).unwrap();
        let r = p.restrict(&coarse).unwrap();
        assert_eq!(r.values(), &[0.0, 0.25, 1.0]);
        assert!(SampledPath::new(coarse, vec![0.0, f64::NAN, 1.0]).is_err());
    }
}
