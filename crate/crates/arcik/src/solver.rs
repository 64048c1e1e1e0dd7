//! Top-level IK facade: scenario validation, cold-start solves,
//! warm-started sequential path tracking, and the segment-count scaling
//! experiment.

use crate::cost::{CostContext, CostWeights, LengthSpec};
use crate::field::{build_grid, CostField, FieldParams, Obstacle};
use crate::geometry::{Aabb, Vec3};
use crate::optimize::{
    solve_loop, SolveContext, SolveOutcome, SolveStatus, SolverConfig,
};
use crate::spline::{initial_guess, ArcSpline, PathPoints};
use crate::{Error, Result};

/// One IK problem instance. Units are millimeters and radians throughout.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub start: Vec3,
    /// Unit tangent at the manipulator base; fixed.
    pub base_orientation: Vec3,
    pub target: Vec3,
    /// Unit end-effector direction; `None` leaves the orientation free.
    pub target_orientation: Option<Vec3>,
    pub n_segments: usize,
    pub length_spec: LengthSpec,
    pub obstacles: Vec<Obstacle>,
    pub field_params: FieldParams,
    pub workspace_bounds: Aabb,
    pub weights: CostWeights,
    pub seed: u64,
    pub max_iterations: usize,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if !self.workspace_bounds.is_valid() {
            return Err(Error::InvalidScenario("workspace bounds are degenerate".into()));
        }
        if !self.workspace_bounds.contains(self.target) {
            return Err(Error::InvalidScenario("target outside workspace bounds".into()));
        }
        if self.n_segments < 1 {
            return Err(Error::InvalidScenario("need at least one segment".into()));
        }
        if !self.length_spec.is_valid() {
            return Err(Error::InvalidScenario("length band invalid".into()));
        }
        if !self.field_params.is_valid() {
            return Err(Error::InvalidScenario("field parameters invalid".into()));
        }
        if !self.weights.is_valid() {
            return Err(Error::InvalidScenario("cost weights invalid".into()));
        }
        if (self.base_orientation.norm() - 1.0).abs() > 1e-6 {
            return Err(Error::InvalidScenario("base orientation must be unit length".into()));
        }
        if let Some(t) = self.target_orientation {
            if (t.norm() - 1.0).abs() > 1e-6 {
                return Err(Error::InvalidScenario("target orientation must be unit length".into()));
            }
        }
        if self.target == self.start {
            return Err(Error::InvalidScenario("target equals start".into()));
        }
        if self.obstacles.iter().any(|o| !o.is_valid()) {
            return Err(Error::InvalidScenario("obstacle with nonpositive radius".into()));
        }
        // Necessary reachability condition: the fully stretched chain must
        // span the start-to-target distance.
        let distance = (self.target - self.start).norm();
        let max_reach = self.n_segments as f64 * self.length_spec.l_max;
        if max_reach < distance {
            return Err(Error::UnreachableTarget { distance, max_reach });
        }
        Ok(())
    }

    /// Builds the cost field this scenario solves against.
    pub fn cost_field(&self, config: &SolverConfig) -> Result<CostField> {
        if self.obstacles.is_empty() || !config.use_grid {
            return Ok(CostField::Exact {
                obstacles: self.obstacles.clone(),
                params: self.field_params,
            });
        }
        let spacing = config.grid_spacing.unwrap_or(self.field_params.epsilon / 4.0);
        let grid = build_grid(&self.obstacles, &self.workspace_bounds, spacing, &self.field_params)?;
        Ok(CostField::Grid(grid))
    }

    fn solve_context<'a>(&'a self, field: &'a CostField, config: &SolverConfig) -> SolveContext<'a> {
        SolveContext {
            cost: CostContext {
                start: self.start,
                base_orientation: self.base_orientation.normalized(),
                field,
                length: self.length_spec,
                target_orientation: self.target_orientation.map(Vec3::normalized),
                samples_per_segment: config.samples_per_segment,
                pin_end: config.pin_end,
            },
            obstacles: &self.obstacles,
            weights: self.weights,
            seed: self.seed,
            max_iterations: self.max_iterations,
            config: *config,
        }
    }
}

/// Cold-start solve with default solver knobs.
pub fn solve(scenario: &Scenario) -> Result<(ArcSpline, SolveStatus)> {
    solve_with(scenario, &SolverConfig::default())
}

/// Cold-start solve: initial configuration from the equal-split connecting
/// arc, then the descent loop. The grid build (when obstacles are present)
/// happens before timing starts.
pub fn solve_with(scenario: &Scenario, config: &SolverConfig) -> Result<(ArcSpline, SolveStatus)> {
    scenario.validate()?;
    let field = scenario.cost_field(config)?;
    let ctx = scenario.solve_context(&field, config);
    let initial = initial_guess(
        scenario.start,
        ctx.cost.base_orientation,
        scenario.target,
        scenario.n_segments,
    )?;
    let (pts, status) = solve_loop(initial, &ctx)?;
    let spline = ctx.cost.build(&pts)?;
    Ok((spline, status))
}

/// A sequential end-effector tracking run.
#[derive(Clone, Debug)]
pub struct TrackingRun {
    pub scenario: Scenario,
    pub waypoints: Vec<Vec3>,
    /// One entry per processed waypoint.
    pub per_waypoint: Vec<SolveStatus>,
    /// Configuration reached at each waypoint (the last good one is carried
    /// over a failed waypoint).
    pub configurations: Vec<ArcSpline>,
}

impl TrackingRun {
    pub fn new(scenario: Scenario, waypoints: Vec<Vec3>) -> Self {
        TrackingRun { scenario, waypoints, per_waypoint: Vec::new(), configurations: Vec::new() }
    }

    pub fn all_satisfied(&self) -> bool {
        !self.per_waypoint.is_empty()
            && self
                .per_waypoint
                .iter()
                .all(|s| s.outcome == SolveOutcome::ConstraintsSatisfied)
    }
}

/// Solves the waypoints in order. Each solve warm-starts from the previous
/// waypoint's solution with only the pinned end point moved; the first
/// waypoint is a cold start. A failed waypoint is recorded and the next one
/// warm-starts from the last successful configuration.
pub fn track(scenario: &Scenario, waypoints: &[Vec3], config: &SolverConfig) -> Result<TrackingRun> {
    track_mode(scenario, waypoints, config, true)
}

/// Tracking with the warm start switchable; cold mode re-solves every
/// waypoint from the connecting-arc guess. Used for the warm-vs-cold
/// comparison.
pub fn track_mode(
    scenario: &Scenario,
    waypoints: &[Vec3],
    config: &SolverConfig,
    warm: bool,
) -> Result<TrackingRun> {
    if waypoints.is_empty() {
        return Err(Error::InvalidScenario("waypoint list is empty".into()));
    }
    let mut run = TrackingRun::new(scenario.clone(), waypoints.to_vec());
    let field = scenario.cost_field(config)?;

    let mut last_good: Option<PathPoints> = None;
    for (wi, waypoint) in waypoints.iter().enumerate() {
        let mut sub = scenario.clone();
        sub.target = *waypoint;
        sub.validate().map_err(|e| match e {
            Error::UnreachableTarget { distance, max_reach } if wi == 0 => {
                Error::UnreachableTarget { distance, max_reach }
            }
            other => other,
        })?;
        let ctx = sub.solve_context(&field, config);
        let initial = match (&last_good, warm) {
            (Some(prev), true) => prev.with_point(prev.n() - 1, *waypoint),
            _ => initial_guess(sub.start, ctx.cost.base_orientation, *waypoint, sub.n_segments)?,
        };
        let (pts, status) = match solve_loop(initial, &ctx) {
            Ok(out) => out,
            Err(Error::Semicircular { .. }) if warm && last_good.is_some() => {
                // The moved end point broke the warm configuration beyond
                // repair; fall back to a cold start for this waypoint.
                let cold =
                    initial_guess(sub.start, ctx.cost.base_orientation, *waypoint, sub.n_segments)?;
                solve_loop(cold, &ctx)?
            }
            Err(e) => return Err(e),
        };
        let spline = ctx.cost.build(&pts)?;
        if status.outcome == SolveOutcome::ConstraintsSatisfied {
            last_good = Some(pts);
        }
        run.per_waypoint.push(status);
        run.configurations.push(spline);
    }
    Ok(run)
}

/// One row of the scaling experiment.
#[derive(Clone, Copy, Debug)]
pub struct ScalingRow {
    pub n_segments: usize,
    pub mean_time_per_iteration_us: f64,
    pub mean_iterations: f64,
    pub mean_total_time_us: f64,
}

/// Runs the base scenario at several segment counts, holding the total
/// manipulator length constant by rescaling the length band, and averages
/// over seeded repeats (seed + repeat index). Returns one row per n.
pub fn scaling_experiment(
    base: &Scenario,
    n_values: &[usize],
    repeats: usize,
    config: &SolverConfig,
) -> Result<Vec<ScalingRow>> {
    assert!(!n_values.is_empty());
    assert!(repeats >= 1);
    let total_length = base.n_segments as f64 * base.length_spec.l0();
    let mut rows = Vec::with_capacity(n_values.len());
    for &n in n_values {
        let l0 = total_length / n as f64;
        let scale = l0 / base.length_spec.l0();
        let mut scenario = base.clone();
        scenario.n_segments = n;
        scenario.length_spec = LengthSpec {
            l_min: base.length_spec.l_min * scale,
            l_max: base.length_spec.l_max * scale,
            tol: base.length_spec.tol.map(|t| t * scale),
        };
        let mut total_us = 0.0;
        let mut total_iters = 0usize;
        let mut per_iter_us = 0.0;
        for r in 0..repeats {
            scenario.seed = base.seed + r as u64;
            let (_, status) = solve_with(&scenario, config)?;
            let us = status.wall_time.as_secs_f64() * 1e6;
            total_us += us;
            total_iters += status.iterations;
            per_iter_us += us / status.iterations.max(1) as f64;
        }
        rows.push(ScalingRow {
            n_segments: n,
            mean_time_per_iteration_us: per_iter_us / repeats as f64,
            mean_iterations: total_iters as f64 / repeats as f64,
            mean_total_time_us: total_us / repeats as f64,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn free_space_scenario() -> Scenario {
        Scenario {
            start: Vec3::ZERO,
            base_orientation: Vec3::new(0.0, 0.0, -1.0),
            target: Vec3::new(-60.0, 150.0, -230.0),
            target_orientation: None,
            n_segments: 5,
            length_spec: LengthSpec::new(45.0, 70.0),
            obstacles: vec![],
            field_params: FieldParams::new(20.0, 1.0),
            workspace_bounds: Aabb::new(
                Vec3::new(-400.0, -400.0, -400.0),
                Vec3::new(400.0, 400.0, 100.0),
            ),
            weights: CostWeights::default(),
            seed: 1,
            max_iterations: 300,
        }
    }

    #[test]
    fn straight_reachable_target_needs_no_iterations() {
        let mut s = free_space_scenario();
        let l0 = s.length_spec.l0();
        s.target = Vec3::new(0.0, 0.0, -(l0 * 5.0));
        let (spline, status) = solve(&s).unwrap();
        assert_eq!(status.outcome, SolveOutcome::ConstraintsSatisfied);
        assert_eq!(status.iterations, 0);
        assert_eq!(spline.end_point(), s.target);
        for seg in spline.segments() {
            assert!(seg.is_straight());
        }
    }

    #[test]
    fn unreachable_target_rejected_before_iterating() {
        let mut s = free_space_scenario();
        s.target = Vec3::new(0.0, 0.0, -360.0); // 5 * 70 = 350 < 360
        match solve(&s) {
            Err(Error::UnreachableTarget { distance, max_reach }) => {
                assert!((distance - 360.0).abs() < 1e-9);
                assert!((max_reach - 350.0).abs() < 1e-9);
            }
            other => panic!("expected unreachable, got {other:?}"),
        }
    }

    #[test]
    fn pinned_end_is_bit_exact() {
        let mut s = free_space_scenario();
        s.target_orientation = Some(Vec3::new(-0.7071, 0.0, -0.7071).normalized());
        let (spline, status) = solve(&s).unwrap();
        assert_eq!(spline.end_point(), s.target);
        assert_eq!(status.outcome, SolveOutcome::ConstraintsSatisfied);
    }

    #[test]
    fn target_outside_workspace_rejected() {
        let mut s = free_space_scenario();
        s.workspace_bounds = Aabb::new(Vec3::new(-10.0, -10.0, -10.0), Vec3::new(10.0, 10.0, 10.0));
        assert!(matches!(solve(&s), Err(Error::InvalidScenario(_))));
    }

    #[test]
    fn tracking_repeated_waypoint_costs_nothing() {
        let mut s = free_space_scenario();
        s.target_orientation = None;
        let first = s.target;
        let run = track(&s, &[first, first, first], &SolverConfig::default()).unwrap();
        assert_eq!(run.per_waypoint.len(), 3);
        assert!(run.all_satisfied());
        // Repeats warm-start from an already-satisfying configuration.
        assert_eq!(run.per_waypoint[1].iterations, 0);
        assert_eq!(run.per_waypoint[2].iterations, 0);
    }

    #[test]
    fn tracking_empty_waypoints_rejected() {
        let s = free_space_scenario();
        assert!(matches!(
            track(&s, &[], &SolverConfig::default()),
            Err(Error::InvalidScenario(_))
        ));
    }

    #[test]
    fn scaling_holds_total_length() {
        let mut s = free_space_scenario();
        s.target = Vec3::new(-40.0, 100.0, -200.0);
        let rows = scaling_experiment(&s, &[5, 6], 2, &SolverConfig::default()).unwrap();
        assert_eq!(rows.len(), 2);
        // The solves must exist and report sane numbers.
        for row in &rows {
            assert!(row.mean_total_time_us > 0.0);
            assert!(row.mean_time_per_iteration_us > 0.0);
        }
    }
}
