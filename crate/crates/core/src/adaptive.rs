//! Grid refinement driven by credible-band width: intervals next to nodes
//! whose band is much wider than typical get extra nodes, and the problem is
//! solved again.

use crate::bayes::{credible_band, PosteriorBand, PosteriorConfig};
use crate::error::{Error, Result};
use crate::models::{linearized_regression, reference_values, solve_bvp, Grid, NonlinearBvp};
use crate::randgen::{percentile_select, RngState};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct RefinePolicy {
    /// Flag an interval when a neighbouring width exceeds this multiple of the median.
    pub flag_ratio: f64,
    pub points_per_flagged_interval: usize,
    pub max_rounds: usize,
    /// Stop once max/median width is at most this.
    pub stop_ratio: f64,
    /// Reset the inverse-gamma prior to `a = m/2`, `b = a + 1` for each round's `m`.
    pub prior_tracks_grid: bool,
}

impl Default for RefinePolicy {
    fn default() -> Self {
        Self {
            flag_ratio: 2.0,
            points_per_flagged_interval: 1,
            max_rounds: 5,
            stop_ratio: 1.5,
            prior_tracks_grid: true,
        }
    }
}

impl RefinePolicy {
    pub fn validate(&self) -> Result<()> {
        if !(self.flag_ratio > 1.0) {
            return Err(Error::InvalidConfig(format!(
                "flag ratio must exceed 1, got {}",
                self.flag_ratio
            )));
        }
        if self.max_rounds == 0 || self.points_per_flagged_interval == 0 {
            return Err(Error::InvalidConfig(
                "max rounds and points per flagged interval must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    /// Total node count, boundary nodes included.
    pub nodes: usize,
    pub max_width: f64,
    pub median_width: f64,
    /// Sup-norm distance to the model's reference solution, if it has one.
    pub sup_error: Option<f64>,
    pub newton_iterations: usize,
    pub newton_converged: bool,
    pub flagged: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefineHistory<T> {
    pub rounds: Vec<RoundRecord>,
    pub final_grid: Grid<T>,
    pub final_solution: Vec<T>,
    pub final_band: PosteriorBand<T>,
}

impl<T> RefineHistory<T> {
    pub fn len(&self) -> usize {
        self.rounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rounds.is_empty()
    }
}

pub fn median<T: Real>(values: &[T]) -> T {
    let mut v = values.to_vec();
    percentile_select(&mut v, 0.5)
}

/// Interval `i` runs from node `i` to node `i + 1`; it is flagged when the
/// larger band width at its interior endpoints exceeds `flag_ratio · median`.
pub fn flag_intervals<T: Real>(grid: &Grid<T>, band: &PosteriorBand<T>, policy: &RefinePolicy) -> Result<Vec<usize>> {
    if band.len() != grid.m() {
        return Err(Error::DimensionMismatch {
            expected: grid.m(),
            got: band.len(),
        });
    }
    let threshold = T::lit(policy.flag_ratio) * median(&band.width);
    let w = &band.width;
    let m = grid.m();
    Ok((0..=m)
        .filter(|&i| {
            let left = if i > 0 { w[i - 1] } else { T::zero() };
            let right = if i < m { w[i] } else { T::zero() };
            left.max(right) > threshold
        })
        .collect())
}

/// Inserts `points_per_flagged_interval` equispaced nodes into each flagged interval.
pub fn refine<T: Real>(grid: &Grid<T>, flags: &[usize], policy: &RefinePolicy) -> Result<Grid<T>> {
    let x = grid.nodes();
    if let Some(&bad) = flags.iter().find(|&&i| i + 1 >= x.len()) {
        return Err(Error::InvalidGrid(format!("interval index {bad} out of range")));
    }
    let mut flagged = vec![false; x.len() - 1];
    flags.iter().for_each(|&i| flagged[i] = true);
    let k = policy.points_per_flagged_interval;
    let parts = T::from_count(k + 1);
    let mut nodes = Vec::with_capacity(x.len() + flags.len() * k);
    for i in 0..x.len() - 1 {
        nodes.push(x[i]);
        if flagged[i] {
            let h = (x[i + 1] - x[i]) / parts;
            nodes.extend((1..=k).map(|j| x[i] + h * T::from_count(j)));
        }
    }
    nodes.push(grid.hi());
    let (lo, hi) = grid.boundary();
    Ok(Grid::from_nodes(nodes)?.with_boundary(lo, hi))
}

/// Solve, band, flag and refine until the widths are even enough, nothing is
/// flagged, or `max_rounds` solves have been made. Every round reuses `rng`.
pub fn adapt_loop<T: Real, M: NonlinearBvp<T>>(
    model: &M,
    policy: &RefinePolicy,
    cfg: &PosteriorConfig,
    rng: &RngState,
) -> Result<RefineHistory<T>> {
    policy.validate()?;
    let mut current = model.regridded(model.grid().clone())?;
    let mut rounds = Vec::new();
    for round in 0..policy.max_rounds {
        let wrap = |e: Error| Error::Refinement {
            round,
            source: Box::new(e),
        };
        let report = solve_bvp(&current).map_err(wrap)?;
        let problem = linearized_regression(&current, &report.solution).map_err(wrap)?;
        let m = current.grid().m();
        let round_cfg = if policy.prior_tracks_grid {
            let a = m as f64 / 2.0;
            cfg.clone().with_prior(a, a + 1.0)
        } else {
            cfg.clone()
        };
        let band = credible_band(&problem, &round_cfg, rng).map_err(wrap)?;
        let max_width = band.max_width();
        let median_width = median(&band.width);
        let sup_error = reference_values(&current).map(|r| {
            r.iter()
                .zip(&report.solution)
                .map(|(a, b)| (*a - *b).abs().as_f64())
                .fold(0.0, f64::max)
        });
        let even = max_width <= T::lit(policy.stop_ratio) * median_width;
        let flags = if even {
            Vec::new()
        } else {
            flag_intervals(current.grid(), &band, policy).map_err(wrap)?
        };
        rounds.push(RoundRecord {
            nodes: current.grid().nodes().len(),
            max_width: max_width.as_f64(),
            median_width: median_width.as_f64(),
            sup_error,
            newton_iterations: report.iterations,
            newton_converged: report.converged,
            flagged: flags.len(),
        });
        if flags.is_empty() || round + 1 == policy.max_rounds {
            return Ok(RefineHistory {
                rounds,
                final_grid: current.grid().clone(),
                final_solution: report.solution,
                final_band: band,
            });
        }
        let grid = refine(current.grid(), &flags, policy).map_err(wrap)?;
        current = current.regridded(grid).map_err(wrap)?;
    }
    unreachable!("the last round returns")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::uniform_grid;

    fn band_with_widths(w: Vec<f64>) -> PosteriorBand<f64> {
        let n = w.len();
        let cfg = PosteriorConfig::for_interior_count(n, 0);
        PosteriorBand {
            mean: vec![0.0; n],
            lower: w.iter().map(|x| -x / 2.0).collect(),
            upper: w.iter().map(|x| x / 2.0).collect(),
            scaled_width: w.iter().map(|x| x / 3.92).collect(),
            width: w,
            config: cfg,
        }
    }

    #[test]
    fn uniform_widths_flag_nothing() {
        let g = uniform_grid(0.0, 1.0, 5).unwrap();
        let flags = flag_intervals(&g, &band_with_widths(vec![1.0; 5]), &RefinePolicy::default()).unwrap();
        assert!(flags.is_empty());
    }

    #[test]
    fn wide_node_flags_both_neighbours() {
        let g = uniform_grid(0.0, 1.0, 5).unwrap();
        let flags = flag_intervals(
            &g,
            &band_with_widths(vec![1.0, 1.0, 5.0, 1.0, 1.0]),
            &RefinePolicy::default(),
        )
        .unwrap();
        assert_eq!(flags, vec![2, 3]);
        let flags = flag_intervals(
            &g,
            &band_with_widths(vec![5.0, 1.0, 1.0, 1.0, 1.0]),
            &RefinePolicy::default(),
        )
        .unwrap();
        assert_eq!(flags, vec![0, 1]);
        assert!(flag_intervals(&g, &band_with_widths(vec![1.0; 4]), &RefinePolicy::default()).is_err());
    }

    #[test]
    fn refine_inserts_midpoints() {
        let g = uniform_grid(0.0, 1.0, 3).unwrap().with_boundary(2.0, 3.0);
        let p = RefinePolicy::default();
        assert_eq!(refine(&g, &[], &p).unwrap(), g);
        let r = refine(&g, &[1], &p).unwrap();
        assert_eq!(r.nodes(), &[0.0, 0.25, 0.375, 0.5, 0.75, 1.0]);
        assert_eq!(r.boundary(), (2.0, 3.0));
        let p3 = RefinePolicy {
            points_per_flagged_interval: 3,
            ..p
        };
        let r = refine(&g, &[0, 3], &p3).unwrap();
        assert_eq!(r.nodes().len(), 5 + 2 * 3);
        assert!(refine(&g, &[4], &p3).is_err());
    }

    #[test]
    fn policy_validation() {
        assert!(RefinePolicy {
            flag_ratio: 1.0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(RefinePolicy {
            max_rounds: 0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(RefinePolicy::default().validate().is_ok());
    }
}
