//! Points and periods on the lattice `Z^m`.
//!
//! A [`MultiIndex`] is a point `t = (t^1, ..., t^m)` with integer
//! coordinates. The lattice carries the componentwise partial order
//! `s <= t  iff  s^alpha <= t^alpha for every alpha`; recurrences propagate
//! forward along this order, one unit step `1_alpha` at a time. The total
//! level `|t| = t^1 + ... + t^m` collapses a multi-index to the single
//! counter that diagonal-invariant systems see.
//!
//! A [`PeriodVector`] assigns each axis a period `T_alpha >= 0`. Axes with
//! `T_alpha >= 1` are genuinely periodic; `T_alpha = 0` marks an axis on
//! which no periodicity is asserted.

use crate::error::{Error, Result};
use std::fmt;

/// A point of `Z^m`. Axis indices in this API are zero based; the printed
/// and serialized forms use the one based convention of the JSON documents.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex {
    coords: Vec<i64>,
}

impl MultiIndex {
    /// Builds a point from its coordinates. At least one axis is required.
    pub fn new(coords: Vec<i64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidParameter(
                "a multi-index needs at least one axis".into(),
            ));
        }
        Ok(MultiIndex { coords })
    }

    /// The origin of `Z^m`.
    pub fn zeros(m: usize) -> Result<Self> {
        Self::new(vec![0; m])
    }

    /// The unit step `1_axis`: one at `axis`, zero elsewhere.
    pub fn unit(axis: usize, m: usize) -> Result<Self> {
        if axis >= m {
            return Err(Error::AxisOutOfRange { axis, m });
        }
        let mut coords = vec![0; m];
        coords[axis] = 1;
        Self::new(coords)
    }

    /// Number of axes `m`.
    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[i64] {
        &self.coords
    }

    pub fn get(&self, axis: usize) -> i64 {
        self.coords[axis]
    }

    /// The level `|t| = sum of the coordinates`. Not a norm: coordinates may
    /// be negative.
    pub fn total(&self) -> i64 {
        self.coords.iter().sum()
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(format!(
                "multi-indices of dimension {} and {}",
                self.dim(),
                other.dim()
            )));
        }
        Ok(())
    }

    /// Componentwise order: `self <= other` on every axis.
    pub fn leq(&self, other: &Self) -> Result<bool> {
        self.check_dim(other)?;
        Ok(self
            .coords
            .iter()
            .zip(&other.coords)
            .all(|(a, b)| a <= b))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Self::new(
            self.coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Self::new(
            self.coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a - b)
                .collect(),
        )
    }

    /// `t + k * 1_axis`.
    pub fn step(&self, axis: usize, k: i64) -> Result<Self> {
        if axis >= self.dim() {
            return Err(Error::AxisOutOfRange {
                axis,
                m: self.dim(),
            });
        }
        let mut coords = self.coords.clone();
        coords[axis] += k;
        Self::new(coords)
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Per-axis periods `T_alpha >= 0` of a multi-periodic system. At least one
/// axis must carry a positive period.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeriodVector {
    periods: Vec<u32>,
}

impl PeriodVector {
    pub fn new(periods: Vec<u32>) -> Result<Self> {
        if periods.is_empty() {
            return Err(Error::InvalidParameter(
                "a period vector needs at least one axis".into(),
            ));
        }
        if periods.iter().all(|&t| t == 0) {
            return Err(Error::InvalidParameter(
                "a period vector needs at least one positive period".into(),
            ));
        }
        Ok(PeriodVector { periods })
    }

    pub fn dim(&self) -> usize {
        self.periods.len()
    }

    pub fn get(&self, axis: usize) -> u32 {
        self.periods[axis]
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.periods
    }

    /// Axes with a positive period.
    pub fn periodic_axes(&self) -> impl Iterator<Item = usize> + '_ {
        self.periods
            .iter()
            .enumerate()
            .filter(|(_, &t)| t >= 1)
            .map(|(a, _)| a)
    }

    /// True when the axis asserts no periodicity (`T_alpha = 0`).
    pub fn is_free_axis(&self, axis: usize) -> bool {
        self.periods[axis] == 0
    }

    /// Table depth along an axis: the period, or one slice for free axes.
    pub fn extent(&self, axis: usize) -> usize {
        self.periods[axis].max(1) as usize
    }

    pub fn extents(&self) -> Vec<usize> {
        (0..self.dim()).map(|a| self.extent(a)).collect()
    }
}

/// Iterates the integer box `[0, extents]` (inclusive upper corner) in
/// lexicographic order, first axis slowest. Yields offset vectors.
pub struct BoxIter {
    extents: Vec<i64>,
    next: Option<Vec<i64>>,
}

impl BoxIter {
    /// `extents[a] >= 0` is the inclusive upper corner along axis `a`.
    pub fn new(extents: &[i64]) -> Result<Self> {
        if extents.is_empty() {
            return Err(Error::InvalidParameter("empty box".into()));
        }
        if extents.iter().any(|&e| e < 0) {
            return Err(Error::InvalidParameter(format!(
                "box extents must be non-negative, got {extents:?}"
            )));
        }
        Ok(BoxIter {
            extents: extents.to_vec(),
            next: Some(vec![0; extents.len()]),
        })
    }
}

impl Iterator for BoxIter {
    type Item = Vec<i64>;

    fn next(&mut self) -> Option<Vec<i64>> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        for axis in (0..succ.len()).rev() {
            if succ[axis] < self.extents[axis] {
                succ[axis] += 1;
                self.next = Some(succ);
                break;
            }
            succ[axis] = 0;
        }
        Some(current)
    }
}
