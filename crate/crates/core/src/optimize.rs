//! Direct RTD minimization: the points of one cloud are moved by subgradient
//! descent towards the topology of a fixed target.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Result, RtdError};
use crate::geometry::PointCloud;
use crate::grad::{rtd_subgradient, smooth_gradients, Neighborhood};
use crate::rcross::check_pair;

/// Gradient smoothing settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Smoothing {
    pub neighborhood: Neighborhood,
    /// Weight of a point's own gradient.
    pub beta: f64,
}

impl Default for Smoothing {
    fn default() -> Self {
        Smoothing {
            neighborhood: Neighborhood::default(),
            beta: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    pub steps: usize,
    /// Piecewise-constant learning rate: `(first_step, rate)` pairs sorted by
    /// step, the first starting at 0.
    pub schedule: Vec<(usize, f64)>,
    pub smoothing: Option<Smoothing>,
    pub minimum_bypass: bool,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            steps: 100,
            schedule: vec![(0, 0.1)],
            smoothing: None,
            minimum_bypass: false,
        }
    }
}

impl OptimizerConfig {
    pub fn constant(steps: usize, rate: f64) -> Self {
        OptimizerConfig {
            steps,
            schedule: vec![(0, rate)],
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.schedule.first() {
            Some(&(0, _)) => {}
            _ => return Err(RtdError::Input("learning rate schedule must start at step 0".into())),
        }
        if self.schedule.windows(2).any(|p| p[0].0 >= p[1].0) {
            return Err(RtdError::Input("learning rate schedule must be strictly step-sorted".into()));
        }
        if let Some(&(s, r)) = self.schedule.iter().find(|(_, r)| !(*r > 0.0 && r.is_finite())) {
            return Err(RtdError::Input(format!("learning rate at step {s} must be positive, got {r}")));
        }
        if let Some(sm) = &self.smoothing {
            if !(0.0..=1.0).contains(&sm.beta) {
                return Err(RtdError::Input(format!("beta must lie in [0, 1], got {}", sm.beta)));
            }
        }
        Ok(())
    }

    /// Learning rate in effect at `step`.
    pub fn rate_at(&self, step: usize) -> f64 {
        self.schedule
            .iter()
            .rev()
            .find(|(s, _)| *s <= step)
            .map_or(self.schedule[0].1, |&(_, r)| r)
    }
}

/// `(step, rtd)` values recorded before each update and once at the end.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub points: Vec<(usize, f64)>,
}

impl Trace {
    pub fn last(&self) -> Option<f64> {
        self.points.last().map(|p| p.1)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["step", "rtd"])?;
        for (s, v) in &self.points {
            w.write_record([s.to_string(), v.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Moves `movable` to reduce `rtd(movable, target)`.
///
/// Each step computes the subgradient with respect to the movable points,
/// optionally smooths it over the current neighbourhoods, and steps against
/// it with the scheduled rate.
pub fn minimize_rtd(movable: &PointCloud, target: &PointCloud, cfg: &OptimizerConfig) -> Result<(PointCloud, Trace)> {
    cfg.validate()?;
    check_pair(movable, target)?;
    let mut current = movable.clone();
    let mut trace = Trace::default();
    for step in 0..=cfg.steps {
        let (value, grads) = rtd_subgradient(&current, target, cfg.minimum_bypass)
            .map_err(|e| RtdError::AtStep { step, source: Box::new(e) })?;
        trace.points.push((step, value));
        if step == cfg.steps || value == 0.0 {
            if step < cfg.steps {
                // nothing left to move; the remaining steps are no-ops
                trace.points.extend((step + 1..=cfg.steps).map(|s| (s, 0.0)));
            }
            break;
        }
        let g = match &cfg.smoothing {
            Some(sm) => smooth_gradients(&grads.dx, &current, sm.neighborhood, sm.beta)?,
            None => grads.dx,
        };
        let next = &current.points() - &(g * cfg.rate_at(step));
        current = PointCloud::new(next)?;
    }
    Ok((current, trace))
}
