use crate::error::{Error, Result};
use crate::randgen::{draw_standard_normal, RngState};
use crate::scalar::Real;

/// Nodes closer than this (absolute) are merged when grids are combined.
pub const MERGE_TOL: f64 = 1e-12;

/// Ordered design points `lo = x_0 < x_1 < … < x_{m+1} = hi` with Dirichlet
/// values at both ends. Unknowns live on the `m` interior nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    nodes: Vec<T>,
    boundary: (T, T),
}

impl<T: Real> Grid<T> {
    pub fn from_nodes(nodes: Vec<T>) -> Result<Self> {
        if nodes.len() < 3 {
            return Err(Error::InvalidGrid(format!(
                "need at least one interior node, got {} nodes",
                nodes.len()
            )));
        }
        if let Some(i) = nodes.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid(format!("node {i} is not finite")));
        }
        if let Some(i) = nodes.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid(format!(
                "nodes must be strictly increasing (at index {})",
                i + 1
            )));
        }
        Ok(Self {
            nodes,
            boundary: (T::zero(), T::zero()),
        })
    }

    pub fn with_boundary(mut self, lo_value: T, hi_value: T) -> Self {
        self.boundary = (lo_value, hi_value);
        self
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn interior(&self) -> &[T] {
        &self.nodes[1..self.nodes.len() - 1]
    }

    /// Interior node count.
    pub fn m(&self) -> usize {
        self.nodes.len() - 2
    }

    pub fn lo(&self) -> T {
        self.nodes[0]
    }

    pub fn hi(&self) -> T {
        self.nodes[self.nodes.len() - 1]
    }

    pub fn boundary(&self) -> (T, T) {
        self.boundary
    }

    /// `(h₋, h₊)` around interior node `i` (0-based over the interior).
    pub fn spacing(&self, i: usize) -> (T, T) {
        let x = &self.nodes;
        (x[i + 1] - x[i], x[i + 2] - x[i + 1])
    }

    /// The common step if all intervals agree to a relative 1e-9.
    pub fn uniform_step(&self) -> Option<T> {
        let h = (self.hi() - self.lo()) / T::from_count(self.nodes.len() - 1);
        let tol = T::lit(1e-9) * h;
        self.nodes
            .windows(2)
            .all(|w| ((w[1] - w[0]) - h).abs() <= tol)
            .then_some(h)
    }

    pub fn is_uniform(&self) -> bool {
        self.uniform_step().is_some()
    }

    /// Full solution vector: boundary values around the interior values.
    pub fn with_boundary_values(&self, interior: &[T]) -> Vec<T> {
        let mut full = Vec::with_capacity(interior.len() + 2);
        full.push(self.boundary.0);
        full.extend_from_slice(interior);
        full.push(self.boundary.1);
        full
    }
}

/// `m + 2` equally spaced nodes on `[lo, hi]`.
pub fn uniform_grid<T: Real>(lo: T, hi: T, m: usize) -> Result<Grid<T>> {
    if m == 0 {
        return Err(Error::InvalidGrid("interior count must be at least 1".into()));
    }
    if !(lo < hi) {
        return Err(Error::InvalidGrid(format!("need lo < hi, got [{lo}, {hi}]")));
    }
    let intervals = T::from_count(m + 1);
    let nodes = (0..m + 2)
        .map(|j| {
            if j == m + 1 {
                hi
            } else {
                lo + (hi - lo) * T::from_count(j) / intervals
            }
        })
        .collect();
    Grid::from_nodes(nodes)
}

/// Concatenates uniform pieces `(lo, hi, h)`. Each piece gets
/// `round((hi − lo)/h)` equal intervals, so the realised step is the nearest
/// one that divides the piece exactly.
pub fn piecewise_grid<T: Real>(segments: &[(T, T, T)]) -> Result<Grid<T>> {
    if segments.is_empty() {
        return Err(Error::InvalidGrid("no segments".into()));
    }
    let mut nodes: Vec<T> = Vec::new();
    for (k, &(lo, hi, h)) in segments.iter().enumerate() {
        if !(lo < hi) || !(h > T::zero()) {
            return Err(Error::InvalidGrid(format!(
                "segment {k}: need lo < hi and h > 0, got ({lo}, {hi}, {h})"
            )));
        }
        if let Some(&last) = nodes.last() {
            let tol = T::lit(MERGE_TOL) * T::one().max(last.abs());
            if (lo - last).abs() > tol {
                let kind = if lo < last { "overlaps" } else { "leaves a gap after" };
                return Err(Error::InvalidGrid(format!(
                    "segment {k} starting at {lo} {kind} the previous segment ending at {last}"
                )));
            }
            nodes.pop();
        }
        let count = ((hi - lo) / h).round().to_usize().unwrap_or(0).max(1);
        let n = T::from_count(count);
        nodes.extend((0..count).map(|j| lo + (hi - lo) * T::from_count(j) / n));
        nodes.push(hi);
    }
    Grid::from_nodes(nodes)
}

/// Adds `extra` nodes drawn from a standard normal and affinely mapped so the
/// smallest lands on `lo` and the largest on `hi`; a single draw goes to the
/// midpoint. Nodes within [`MERGE_TOL`] of an existing one are dropped.
///
/// Because the extreme draws land on the endpoints, at most `extra − 2` new
/// interior nodes appear when `extra ≥ 2`.
pub fn clustered_grid<T: Real>(base: &Grid<T>, extra: usize, rng: &mut RngState) -> Result<Grid<T>> {
    if extra == 0 {
        return Err(Error::InvalidGrid("extra point count must be at least 1".into()));
    }
    let (lo, hi) = (base.lo(), base.hi());
    let z: Vec<T> = draw_standard_normal(rng, extra);
    let zmin = z.iter().copied().fold(T::infinity(), T::min);
    let zmax = z.iter().copied().fold(T::neg_infinity(), T::max);
    let mapped: Vec<T> = if zmax > zmin {
        z.iter()
            .map(|&v| (lo + (hi - lo) * (v - zmin) / (zmax - zmin)).max(lo).min(hi))
            .collect()
    } else {
        vec![(lo + hi) / T::lit(2.0); extra]
    };
    let mut all: Vec<T> = base.nodes().iter().copied().chain(mapped).collect();
    all.sort_by(|a, b| a.partial_cmp(b).expect("finite nodes"));
    Ok(Grid {
        nodes: merge_sorted(all),
        boundary: base.boundary(),
    })
}

/// Drops entries within [`MERGE_TOL`] of their kept predecessor; the last
/// node is kept exactly so the upper endpoint is preserved.
pub(crate) fn merge_sorted<T: Real>(sorted: Vec<T>) -> Vec<T> {
    let tol = T::lit(MERGE_TOL);
    let hi = *sorted.last().expect("non-empty");
    let mut out: Vec<T> = Vec::with_capacity(sorted.len());
    for v in sorted {
        match out.last() {
            Some(&prev) if v - prev <= tol => {}
            _ => out.push(v),
        }
    }
    if let Some(last) = out.last_mut() {
        if hi - *last <= tol {
            *last = hi;
        }
    }
    out
}
