//! Scratch harness for default-weight tuning (not shipped).

use arcik::cost::{CostWeights, LengthSpec};
use arcik::field::FieldParams;
use arcik::geometry::{Aabb, Vec3};
use arcik::optimize::SolverConfig;
use arcik::solver::{solve_with, Scenario};

fn table_scenario(idx: usize, weights: CostWeights, max_iterations: usize) -> Scenario {
    let (ori, pos) = match idx {
        1 => ([-0.7071, 0.0, -0.7071], [-60.0, 150.0, -230.0]),
        2 => ([0.0, 0.2169, -0.9762], [-10.0, 40.0, -260.0]),
        3 => ([0.5661, 0.2665, -0.7926], [150.0, -90.0, -220.0]),
        _ => ([0.0, 0.0, 1.0], [40.0, -60.0, -180.0]),
    };
    Scenario {
        start: Vec3::ZERO,
        base_orientation: Vec3::new(0.0, 0.0, -1.0),
        target: Vec3::new(pos[0], pos[1], pos[2]),
        target_orientation: Some(Vec3::new(ori[0], ori[1], ori[2]).normalized()),
        n_segments: 5,
        length_spec: LengthSpec::new(45.0, 70.0),
        obstacles: vec![],
        field_params: FieldParams::new(20.0, 1.0),
        workspace_bounds: Aabb::new(
            Vec3::new(-400.0, -400.0, -400.0),
            Vec3::new(400.0, 400.0, 100.0),
        ),
        weights,
        seed: 7,
        max_iterations,
    }
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let alpha2: f64 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(1.0);
    let alpha3: f64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(1500.0);
    let lambda: f64 = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(30.0);
    let max_iter: usize = args.get(4).and_then(|s| s.parse().ok()).unwrap_or(500);
    let trace_set: Option<usize> = args.get(5).and_then(|s| s.parse().ok());
    let weights = CostWeights { alpha2, alpha3, lambda, ..CostWeights::default() };
    println!("alpha2={alpha2} alpha3={alpha3} lambda={lambda} max_iter={max_iter}");

    if let Some(idx) = trace_set {
        trace_one(idx, weights, max_iter);
        return;
    }
    for idx in 1..=4 {
        let s = table_scenario(idx, weights, max_iter);
        let t0 = std::time::Instant::now();
        match solve_with(&s, &SolverConfig::default()) {
            Ok((spline, status)) => {
                let ori_err = arcik::cost::orientation_error(
                    &spline,
                    s.target_orientation.unwrap().normalized(),
                );
                let lengths = spline.segment_lengths();
                let l0 = s.length_spec.l0();
                let max_dev = lengths
                    .iter()
                    .map(|l| (l - l0).abs())
                    .fold(0.0f64, f64::max);
                println!(
                    "  set{idx}: {:?} iters={} ori_err={:.5} max_len_dev={:.3} wall={:.1}ms",
                    status.outcome,
                    status.iterations,
                    ori_err,
                    max_dev,
                    t0.elapsed().as_secs_f64() * 1e3,
                );
            }
            Err(e) => println!("  set{idx}: ERROR {e}"),
        }
    }
}

fn trace_one(idx: usize, weights: CostWeights, max_iter: usize) {
    use arcik::cost::{CostContext, length_cost, orientation_cost};
    use arcik::field::CostField;
    use arcik::optimize::{solve_loop_observed, SolveContext};
    use arcik::spline::initial_guess;

    let s = table_scenario(idx, weights, max_iter);
    let field = CostField::Exact { obstacles: vec![], params: s.field_params };
    let config = SolverConfig::default();
    let ctx = SolveContext {
        cost: CostContext {
            start: s.start,
            base_orientation: s.base_orientation,
            field: &field,
            length: s.length_spec,
            target_orientation: s.target_orientation,
            samples_per_segment: config.samples_per_segment,
            pin_end: config.pin_end,
        },
        obstacles: &s.obstacles,
        weights: s.weights,
        seed: s.seed,
        max_iterations: s.max_iterations,
        config,
    };
    let initial = initial_guess(s.start, s.base_orientation, s.target, s.n_segments).unwrap();
    let mut k = 0usize;
    let cost_ctx = &ctx.cost;
    let target = s.target_orientation.unwrap();
    let spec = s.length_spec;
    let (_, status) = solve_loop_observed(initial, &ctx, |p| {
        let spline = cost_ctx.build(p).unwrap();
        if k % 20 == 0 {
            let fl = length_cost(&spline, &spec);
            let fo = orientation_cost(&spline, target);
            let lengths: Vec<String> =
                spline.segment_lengths().iter().map(|l| format!("{l:.1}")).collect();
            println!("  it {k:4}  f_len={fl:9.3} f_ori={fo:.5}  lengths={lengths:?}");
        }
        k += 1;
    })
    .unwrap();
    println!("  done: {:?} after {} iterations", status.outcome, status.iterations);
}
