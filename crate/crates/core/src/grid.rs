use std::ops::{Deref, DerefMut};

use crate::error::{invalid, Error, Result};

/// Equispaced mesh of `m` steps on `[x_min, x_max]`, with `x_min < 0 < x_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    x_min: f64,
    x_max: f64,
    m: usize,
    h: f64,
    nodes: Vec<f64>,
}

impl Grid {
    pub fn new(x_min: f64, x_max: f64, m: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite() && x_min < 0.0 && 0.0 < x_max) {
            return Err(invalid(format!("grid needs x_min < 0 < x_max, got [{x_min}, {x_max}]")));
        }
        if m < 2 {
            return Err(invalid(format!("grid needs at least 2 steps, got {m}")));
        }
        let h = (x_max - x_min) / m as f64;
        let mut nodes: Vec<f64> = (0..=m).map(|k| x_min + k as f64 * h).collect();
        nodes[m] = x_max;
        Ok(Grid { x_min, x_max, m, h, nodes })
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    /// Number of steps.
    pub fn steps(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.m + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn x(&self, k: usize) -> f64 {
        self.nodes[k]
    }

    /// Index of the node nearest to `x`, clamped to the grid.
    pub fn nearest(&self, x: f64) -> usize {
        let k = ((x - self.x_min) / self.h).round();
        k.clamp(0.0, self.m as f64) as usize
    }

    pub fn check(&self, field: &[f64]) -> Result<()> {
        if field.len() != self.len() {
            return Err(Error::GridMismatch { expected: self.len(), got: field.len() });
        }
        Ok(())
    }

    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Field {
        Field(self.nodes.iter().map(|&x| f(x)).collect())
    }
}

/// Grid function: one value per node.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Field(pub Vec<f64>);

impl Field {
    pub fn zeros(n: usize) -> Self {
        Field(vec![0.0; n])
    }

    pub fn constant(n: usize, v: f64) -> Self {
        Field(vec![v; n])
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn check_finite(&self) -> Result<()> {
        match self.0.iter().position(|v| !v.is_finite()) {
            Some(node) => Err(Error::NonFinite { node }),
            None => Ok(()),
        }
    }

    pub fn sup_distance(&self, other: &[f64]) -> f64 {
        sup_distance(&self.0, other)
    }
}

impl Deref for Field {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for Field {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for Field {
    fn from(v: Vec<f64>) -> Self {
        Field(v)
    }
}

pub fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
