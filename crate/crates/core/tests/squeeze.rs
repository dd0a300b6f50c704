//! Squeeze simulator behaviour on random small scenes.

use mograsp::filters::grasp_failure;
use mograsp::geometry::{intersection_area, ConvexPolygon, Pose2, Vec2};
use mograsp::grasping::internal_region;
use mograsp::planner::{gen_grasp_cands, PlannerConfig};
use mograsp::sim::{simulate_squeeze, SimParams};
use mograsp::{Grasp, Gripper, ObjectGroup, Scene};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_shape(rng: &mut ChaCha8Rng) -> ConvexPolygon {
    loop {
        let n = rng.gen_range(3..=6);
        let mut angles: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..std::f64::consts::TAU)).collect();
        angles.sort_by(f64::total_cmp);
        let r = rng.gen_range(0.008..0.02);
        let pts = angles.iter().map(|&a| Vec2::from_angle(a) * r).collect();
        if let Ok(p) = ConvexPolygon::new(pts) {
            if p.len() == n && p.area() > 0.5 * r * r {
                return p;
            }
        }
    }
}

/// Two or three objects close enough together to be squeezed as one group.
fn random_scene(rng: &mut ChaCha8Rng) -> Scene {
    let k = rng.gen_range(2..=3);
    'retry: loop {
        let mut items: Vec<(ConvexPolygon, Pose2)> = Vec::new();
        for _ in 0..k {
            let shape = random_shape(rng);
            let pose = Pose2::new(rng.gen_range(-0.025..0.025), rng.gen_range(-0.01..0.01), rng.gen_range(-3.1..3.1));
            let world = shape.transform(&pose);
            if items.iter().any(|(s, p)| mograsp::geometry::distance(&s.transform(p), &world) < 1e-3) {
                continue 'retry;
            }
            items.push((shape, pose));
        }
        return Scene::from_shapes(items);
    }
}

/// Two or three boxes in a loose row along the x axis, each narrow side
/// roughly facing along the row. Such rows are often graspable as a whole.
fn box_row(rng: &mut ChaCha8Rng) -> Scene {
    let k = rng.gen_range(2..=3);
    let mut x = -0.03;
    let items = (0..k)
        .map(|_| {
            let (w, h) = (rng.gen_range(0.006..0.016), rng.gen_range(0.012..0.025));
            let b = ConvexPolygon::rectangle(-0.5 * w, -0.5 * h, 0.5 * w, 0.5 * h).unwrap();
            let pose = Pose2::new(x + 0.5 * w + 0.001, rng.gen_range(-0.003..0.003), rng.gen_range(-0.1..0.1));
            x += w + rng.gen_range(0.003..0.008);
            (b, pose)
        })
        .collect::<Vec<_>>();
    Scene::from_shapes(items)
}

/// A handful of candidates per scene, enough to hit both outcomes.
fn cases(n_scenes: usize) -> Vec<(Scene, Grasp)> {
    cases_from(n_scenes, random_scene)
}

fn cases_from(n_scenes: usize, make: fn(&mut ChaCha8Rng) -> Scene) -> Vec<(Scene, Grasp)> {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let g = Gripper::default();
    let mut out = Vec::new();
    for s in 0..n_scenes {
        let scene = make(&mut rng);
        let group = ObjectGroup::all(&scene).unwrap();
        let cfg = PlannerConfig { n_positions: 6, n_orientations: 4, rng_seed: s as u64, ..PlannerConfig::default() };
        out.extend(gen_grasp_cands(&scene, &group, &g, &cfg).into_iter().map(|c| (scene.clone(), c)));
    }
    out
}

#[test]
fn successful_squeezes_obey_the_width_identity() {
    let g = Gripper::default();
    let p = SimParams::default();
    let mut successes = 0;
    for (scene, grasp) in cases_from(25, box_row).into_iter().chain(cases(10)) {
        let group = ObjectGroup::all(&scene).unwrap();
        let Ok(o) = simulate_squeeze(&scene, &group, &grasp, &g, &p) else { continue };
        if !o.success {
            continue;
        }
        successes += 1;
        let v = grasp_failure(&scene, &group, &grasp, &g).unwrap();
        let h_0 = v.h_0.expect("a grasped group starts inside the jaws");
        assert!(h_0 + 1e-6 >= o.final_opening, "h_0 {h_0} h_f {}", o.final_opening);
        assert!(o.final_opening >= v.h_f_min - 1e-6, "h_f {} h_f_min {}", o.final_opening, v.h_f_min);
        let sum: f64 = o.final_widths.iter().map(|w| w.1).sum();
        assert!((sum - o.final_opening).abs() <= 1e-6, "widths {sum} opening {}", o.final_opening);
    }
    assert!(successes >= 5, "only {successes} successes");
}

#[test]
fn final_states_do_not_interpenetrate() {
    let g = Gripper::default();
    let p = SimParams::default();
    for (scene, grasp) in cases(10) {
        let group = ObjectGroup::all(&scene).unwrap();
        let Ok(o) = simulate_squeeze(&scene, &group, &grasp, &g, &p) else { continue };
        let polys: Vec<ConvexPolygon> = o.final_state.objects().iter().map(|x| x.world_polygon()).collect();
        let jaws = internal_region(&g, &grasp, o.final_opening).ok();
        for (i, a) in polys.iter().enumerate() {
            // Penetration of 1e-6 m over a ~2 cm edge bounds the overlap.
            if let Some(j) = &jaws {
                assert!(intersection_area(a, &j.left_jaw) < 1e-7);
                assert!(intersection_area(a, &j.right_jaw) < 1e-7);
            }
            for b in &polys[i + 1..] {
                assert!(intersection_area(a, b) < 1e-7);
            }
        }
    }
}

#[test]
fn simulation_is_deterministic() {
    let g = Gripper::default();
    let p = SimParams::default();
    for (scene, grasp) in cases(3).into_iter().step_by(5) {
        let group = ObjectGroup::all(&scene).unwrap();
        let a = simulate_squeeze(&scene, &group, &grasp, &g, &p);
        let b = simulate_squeeze(&scene, &group, &grasp, &g, &p);
        match (a, b) {
            (Ok(a), Ok(b)) => {
                assert_eq!(a.final_state, b.final_state);
                assert_eq!(a.final_opening.to_bits(), b.final_opening.to_bits());
                assert_eq!(a.success, b.success);
                assert_eq!(a.iterations, b.iterations);
            }
            (a, b) => assert_eq!(a.is_err(), b.is_err()),
        }
    }
}

#[test]
fn aligned_boxes_close_to_their_summed_widths() {
    // Boxes centred on the closing axis with faces square to it: the jaws
    // must stop exactly at the sum of the box widths.
    let g = Gripper::default();
    let p = SimParams::default();
    let widths = [0.012, 0.02, 0.009];
    let mut x = -0.03;
    let items: Vec<(ConvexPolygon, Pose2)> = widths
        .iter()
        .map(|&w| {
            let b = ConvexPolygon::rectangle(-0.5 * w, -0.008, 0.5 * w, 0.008).unwrap();
            let pose = Pose2::new(x + 0.5 * w, 0.001, 0.0);
            x += w + 0.004;
            (b, pose)
        })
        .collect();
    let scene = Scene::from_shapes(items);
    let o = simulate_squeeze(&scene, &ObjectGroup::all(&scene).unwrap(), &Grasp::new(0.0, 0.0, 0.0), &g, &p).unwrap();
    assert!(o.success);
    assert!((o.final_opening - widths.iter().sum::<f64>()).abs() < 1e-6, "{}", o.final_opening);
}
