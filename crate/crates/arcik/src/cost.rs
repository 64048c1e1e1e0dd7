//! Cost terms and their numerical gradients with respect to path points.
//!
//! Three terms enter the objective: the obstacle cost (path points plus
//! body samples), the per-segment length deviation, and the end-effector
//! orientation mismatch. All gradients are central differences; moving one
//! path point swings every downstream segment through the control-point
//! propagation, so per-segment contributions are accumulated with a decay
//! factor that damps those far-reaching couplings.

use crate::field::CostField;
use crate::geometry::Vec3;
use crate::spline::{ArcSpline, PathPoints};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Objective weights and differentiation parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CostWeights {
    /// Weight of the obstacle term.
    pub alpha1: f64,
    /// Weight of the length term.
    pub alpha2: f64,
    /// Weight of the orientation term.
    pub alpha3: f64,
    /// Blend of the body-sample gradient into the obstacle gradient.
    pub beta: f64,
    /// Decay of downstream per-segment contributions in the accumulated
    /// gradient; 1 keeps the plain sum.
    pub alpha_decay: f64,
    /// Central-difference step in mm.
    pub delta_p: f64,
    /// Regularization coefficient of the update rule (step = 1/lambda).
    pub lambda: f64,
}

impl Default for CostWeights {
    fn default() -> Self {
        CostWeights {
            alpha1: 1.0,
            alpha2: 1.0,
            alpha3: 1500.0,
            beta: 0.5,
            alpha_decay: 0.01,
            delta_p: 1e-3,
            lambda: 30.0,
        }
    }
}

impl CostWeights {
    pub fn is_valid(&self) -> bool {
        self.alpha1 >= 0.0
            && self.alpha2 >= 0.0
            && self.alpha3 >= 0.0
            && self.beta >= 0.0
            && self.alpha_decay > 0.0
            && self.alpha_decay <= 1.0
            && self.delta_p > 0.0
            && self.lambda > 0.0
    }
}

/// Per-segment length band. The target length is the band center.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LengthSpec {
    pub l_min: f64,
    pub l_max: f64,
    /// Allowed deviation from the target length; defaults to a tenth of it.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
}

impl LengthSpec {
    pub fn new(l_min: f64, l_max: f64) -> Self {
        LengthSpec { l_min, l_max, tol: None }
    }

    /// Target segment length: the band center.
    pub fn l0(&self) -> f64 {
        0.5 * (self.l_min + self.l_max)
    }

    pub fn tol(&self) -> f64 {
        self.tol.unwrap_or(self.l0() / 10.0)
    }

    pub fn is_valid(&self) -> bool {
        self.l_min > 0.0 && self.l_min < self.l_max && self.tol() > 0.0
    }
}

/// Costs and gradient of one configuration under one set of weights.
#[derive(Clone, Debug)]
pub struct CostReport {
    /// Obstacle term: path-point cost plus beta times the body-sample cost.
    pub f_obs: f64,
    pub f_len: f64,
    pub f_ori: f64,
    /// alpha1 * f_obs + alpha2 * f_len + alpha3 * f_ori.
    pub total_u: f64,
    /// One entry per path point; pinned points carry exactly zero.
    pub grad: Vec<Vec3>,
    pub per_segment_lengths: Vec<f64>,
}

/// Everything the cost assembly needs besides the path points themselves.
pub struct CostContext<'a> {
    pub start: Vec3,
    pub base_orientation: Vec3,
    pub field: &'a CostField,
    pub length: LengthSpec,
    pub target_orientation: Option<Vec3>,
    pub samples_per_segment: usize,
    /// Pin the last path point to the IK target: it never moves and its
    /// gradient entries stay zero.
    pub pin_end: bool,
}

impl CostContext<'_> {
    /// Mask of path points that may move.
    pub fn movable(&self, n: usize) -> Vec<bool> {
        let mut m = vec![true; n];
        if self.pin_end {
            m[n - 1] = false;
        }
        m
    }

    pub fn build(&self, pts: &PathPoints) -> Result<ArcSpline> {
        ArcSpline::build(self.start, self.base_orientation, pts)
    }
}

/// Per-path-point "velocity": the mean length of the adjacent segments,
/// or the single adjacent length at the chain end.
fn point_velocities(lengths: &[f64]) -> Vec<f64> {
    let n = lengths.len();
    (0..n)
        .map(|i| {
            if i + 1 < n {
                0.5 * (lengths[i] + lengths[i + 1])
            } else {
                lengths[n - 1]
            }
        })
        .collect()
}

/// Path-point obstacle cost: sum over path points of field cost times the
/// adjacent-arc-length mean.
pub fn path_obstacle_cost(spline: &ArcSpline, field: &CostField) -> f64 {
    let lengths = spline.segment_lengths();
    let velocities = point_velocities(&lengths);
    spline
        .segments()
        .iter()
        .zip(&velocities)
        .map(|(seg, v)| field.query(seg.end()) * v)
        .sum()
}

/// The same quantity regrouped by segment, so that term `s` depends only on
/// path points up to `s`: each segment carries its length times the mean of
/// its two endpoint costs, with the chain boundaries weighted to reproduce
/// the point-sum exactly (the start point carries no cost; the final point
/// carries full weight).
pub fn per_segment_path_cost(spline: &ArcSpline, field: &CostField) -> Vec<f64> {
    let n = spline.n();
    let lengths = spline.segment_lengths();
    (0..n)
        .map(|s| {
            let seg = &spline.segments()[s];
            let mut c = if s + 1 == n {
                field.query(seg.end())
            } else {
                0.5 * field.query(seg.end())
            };
            if s > 0 {
                c += 0.5 * field.query(seg.start());
            }
            lengths[s] * c
        })
        .collect()
}

/// Body-sample obstacle cost for one segment: the field integrated along
/// the arc by a uniform-in-u sum, each sample weighted by length/samples.
fn segment_body_cost(
    seg: &crate::spline::ArcSegment,
    field: &CostField,
    samples_per_segment: usize,
) -> f64 {
    let len = seg.length();
    let w = len / samples_per_segment as f64;
    let denom = (samples_per_segment - 1) as f64;
    (0..samples_per_segment)
        .map(|j| field.query(seg.eval(j as f64 / denom)) * w)
        .sum()
}

/// Obstacle cost of the whole body, sampled along every segment interior.
/// Catches mid-segment penetration that the path points alone miss.
pub fn body_cost(spline: &ArcSpline, field: &CostField, samples_per_segment: usize) -> f64 {
    assert!(samples_per_segment >= 2);
    spline
        .segments()
        .iter()
        .map(|seg| segment_body_cost(seg, field, samples_per_segment))
        .sum()
}

pub fn per_segment_body_cost(
    spline: &ArcSpline,
    field: &CostField,
    samples_per_segment: usize,
) -> Vec<f64> {
    spline
        .segments()
        .iter()
        .map(|seg| segment_body_cost(seg, field, samples_per_segment))
        .collect()
}

/// Sum of squared deviations of segment lengths from the target length.
pub fn length_cost(spline: &ArcSpline, spec: &LengthSpec) -> f64 {
    let l0 = spec.l0();
    spline.segment_lengths().iter().map(|l| (l - l0) * (l - l0)).sum()
}

pub fn per_segment_length_cost(spline: &ArcSpline, spec: &LengthSpec) -> Vec<f64> {
    let l0 = spec.l0();
    spline.segment_lengths().iter().map(|l| (l - l0) * (l - l0)).collect()
}

/// Norm of the difference between the end tangent and the target direction,
/// in [0, 2].
pub fn orientation_cost(spline: &ArcSpline, target_dir: Vec3) -> f64 {
    (spline.end_tangent() - target_dir).norm()
}

/// Angle between the end tangent and the target direction in radians.
/// The cost above is the chord of this angle; constraints are stated on
/// the angle.
pub fn orientation_error(spline: &ArcSpline, target_dir: Vec3) -> f64 {
    spline.end_tangent().angle_to(target_dir)
}

const DEGENERATE_RETRIES: u32 = 3;

/// Central difference of a scalar function of the path points, one entry
/// per point; non-movable points keep a zero entry. A perturbation that
/// degenerates the chain is retried with the step divided by 10, up to
/// three times, after which that coordinate's entry is left at zero with a
/// diagnostic.
pub fn numerical_gradient<F>(f: F, pts: &PathPoints, movable: &[bool], delta_p: f64) -> Vec<Vec3>
where
    F: Fn(&PathPoints) -> Result<f64>,
{
    let mut grad = vec![Vec3::ZERO; pts.n()];
    for i in 0..pts.n() {
        if !movable[i] {
            continue;
        }
        let p = pts.get(i);
        for axis in 0..3 {
            let mut step = delta_p;
            let mut done = false;
            for _ in 0..=DEGENERATE_RETRIES {
                let offset = match axis {
                    0 => Vec3::new(step, 0.0, 0.0),
                    1 => Vec3::new(0.0, step, 0.0),
                    _ => Vec3::new(0.0, 0.0, step),
                };
                let plus = f(&pts.with_point(i, p + offset));
                let minus = f(&pts.with_point(i, p - offset));
                match (plus, minus) {
                    (Ok(fp), Ok(fm)) => {
                        let d = (fp - fm) / (2.0 * step);
                        match axis {
                            0 => grad[i].x = d,
                            1 => grad[i].y = d,
                            _ => grad[i].z = d,
                        }
                        done = true;
                        break;
                    }
                    (Err(Error::Semicircular { .. }), _) | (_, Err(Error::Semicircular { .. })) => {
                        step /= 10.0;
                    }
                    (Err(_), _) | (_, Err(_)) => break,
                }
            }
            if !done {
                log::debug!("gradient entry ({i}, axis {axis}) degenerate; zeroed");
            }
        }
    }
    grad
}

/// Per-segment central-difference gradients: `out[s][i]` is the derivative
/// of segment term `s` with respect to path point `i`. Only entries with
/// `s >= i` can be nonzero (upstream segments never see downstream points).
pub fn per_segment_gradient<F>(
    terms: F,
    pts: &PathPoints,
    ctx: &CostContext,
    delta_p: f64,
) -> Vec<Vec<Vec3>>
where
    F: Fn(&ArcSpline) -> Vec<f64>,
{
    let n = pts.n();
    let movable = ctx.movable(n);
    let mut out = vec![vec![Vec3::ZERO; n]; n];
    for i in 0..n {
        if !movable[i] {
            continue;
        }
        let p = pts.get(i);
        for axis in 0..3 {
            let mut step = delta_p;
            let mut done = false;
            for _ in 0..=DEGENERATE_RETRIES {
                let offset = match axis {
                    0 => Vec3::new(step, 0.0, 0.0),
                    1 => Vec3::new(0.0, step, 0.0),
                    _ => Vec3::new(0.0, 0.0, step),
                };
                let plus = ctx.build(&pts.with_point(i, p + offset)).map(|s| terms(&s));
                let minus = ctx.build(&pts.with_point(i, p - offset)).map(|s| terms(&s));
                if let (Ok(tp), Ok(tm)) = (plus, minus) {
                    for s in i..n {
                        let d = (tp[s] - tm[s]) / (2.0 * step);
                        match axis {
                            0 => out[s][i].x = d,
                            1 => out[s][i].y = d,
                            _ => out[s][i].z = d,
                        }
                    }
                    done = true;
                    break;
                }
                step /= 10.0;
            }
            if !done {
                log::debug!("per-segment gradient ({i}, axis {axis}) degenerate; zeroed");
            }
        }
    }
    out
}

/// Collapses per-segment gradients into one vector per point with decayed
/// downstream contributions: `d_i = sum_{s >= i} decay^(s-i) g[s][i]`.
/// A decay of 1 reduces to the plain column sum.
pub fn scaled_accumulate(per_segment: &[Vec<Vec3>], alpha_decay: f64) -> Vec<Vec3> {
    let n = per_segment.len();
    let mut out = vec![Vec3::ZERO; n];
    for (i, o) in out.iter_mut().enumerate() {
        let mut scale = 1.0;
        for seg in per_segment.iter().skip(i) {
            *o += seg[i] * scale;
            scale *= alpha_decay;
        }
    }
    out
}

/// Per-term values and gradients, before weighting. The obstacle gradient
/// is kept separate so the optimizer can project it sideways.
pub struct CostTerms {
    pub f_path: f64,
    pub f_arcs: f64,
    pub f_len: f64,
    pub f_ori: f64,
    pub grad_obs: Vec<Vec3>,
    pub grad_len: Vec<Vec3>,
    pub grad_ori: Vec<Vec3>,
    pub lengths: Vec<f64>,
}

impl CostTerms {
    pub fn f_obs(&self, beta: f64) -> f64 {
        self.f_path + beta * self.f_arcs
    }

    pub fn total_u(&self, w: &CostWeights) -> f64 {
        w.alpha1 * self.f_obs(w.beta) + w.alpha2 * self.f_len + w.alpha3 * self.f_ori
    }
}

/// Evaluates the three cost values only (no gradients).
pub fn cost_values(spline: &ArcSpline, ctx: &CostContext, beta: f64) -> (f64, f64, f64) {
    let skip_obstacles = ctx.field.is_free();
    let f_obs = if skip_obstacles {
        0.0
    } else {
        path_obstacle_cost(spline, ctx.field)
            + beta * body_cost(spline, ctx.field, ctx.samples_per_segment)
    };
    let f_len = length_cost(spline, &ctx.length);
    let f_ori = ctx.target_orientation.map_or(0.0, |t| orientation_cost(spline, t));
    (f_obs, f_len, f_ori)
}

/// Assembles all term values and gradients at `pts`.
pub fn assemble_terms(pts: &PathPoints, ctx: &CostContext, w: &CostWeights) -> Result<CostTerms> {
    let spline = ctx.build(pts)?;
    let n = pts.n();
    let lengths = spline.segment_lengths();
    let skip_obstacles = ctx.field.is_free() || w.alpha1 == 0.0;

    let (f_path, f_arcs) = if skip_obstacles {
        (0.0, 0.0)
    } else {
        (
            path_obstacle_cost(&spline, ctx.field),
            body_cost(&spline, ctx.field, ctx.samples_per_segment),
        )
    };
    let f_len = length_cost(&spline, &ctx.length);
    let f_ori = ctx.target_orientation.map_or(0.0, |t| orientation_cost(&spline, t));

    let grad_obs = if skip_obstacles {
        vec![Vec3::ZERO; n]
    } else {
        let beta = w.beta;
        let field = ctx.field;
        let spp = ctx.samples_per_segment;
        let per_seg = per_segment_gradient(
            |s| {
                let path = per_segment_path_cost(s, field);
                let body = per_segment_body_cost(s, field, spp);
                path.iter().zip(&body).map(|(p, b)| p + beta * b).collect()
            },
            pts,
            ctx,
            w.delta_p,
        );
        scaled_accumulate(&per_seg, w.alpha_decay)
    };

    let grad_len = if w.alpha2 == 0.0 {
        vec![Vec3::ZERO; n]
    } else {
        let spec = ctx.length;
        let per_seg =
            per_segment_gradient(|s| per_segment_length_cost(s, &spec), pts, ctx, w.delta_p);
        scaled_accumulate(&per_seg, w.alpha_decay)
    };

    // The orientation term is not segment-decomposable: the end tangent is
    // set by the last chord and its incoming control point. Its gradient is
    // supported on the last two movable points only.
    let grad_ori = match ctx.target_orientation {
        Some(target) if w.alpha3 > 0.0 => {
            let movable_all = ctx.movable(n);
            let mut support = vec![false; n];
            let mut picked = 0;
            for i in (0..n).rev() {
                if movable_all[i] {
                    support[i] = true;
                    picked += 1;
                    if picked == 2 {
                        break;
                    }
                }
            }
            numerical_gradient(
                |q| ctx.build(q).map(|s| orientation_cost(&s, target)),
                pts,
                &support,
                w.delta_p,
            )
        }
        _ => vec![Vec3::ZERO; n],
    };

    Ok(CostTerms { f_path, f_arcs, f_len, f_ori, grad_obs, grad_len, grad_ori, lengths })
}

/// Full cost report: weighted total and assembled gradient
/// `a1 (grad_path + beta grad_arcs) + a2 grad_len + a3 grad_ori`.
pub fn total_cost_and_gradient(
    pts: &PathPoints,
    ctx: &CostContext,
    w: &CostWeights,
) -> Result<CostReport> {
    let terms = assemble_terms(pts, ctx, w)?;
    let n = pts.n();
    let mut grad = vec![Vec3::ZERO; n];
    for i in 0..n {
        grad[i] = terms.grad_obs[i] * w.alpha1
            + terms.grad_len[i] * w.alpha2
            + terms.grad_ori[i] * w.alpha3;
    }
    Ok(CostReport {
        f_obs: terms.f_obs(w.beta),
        f_len: terms.f_len,
        f_ori: terms.f_ori,
        total_u: terms.total_u(w),
        grad,
        per_segment_lengths: terms.lengths,
    })
}
