//! Seeded library of small convex polygons standing in for household
//! objects seen from above.

use mograsp::geometry::{ConvexPolygon, Vec2};
use mograsp::grasping::min_final_diameter;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub const LIBRARY_SIZE: usize = 33;
pub const MIN_CIRCUMRADIUS: f64 = 0.01;
pub const MAX_CIRCUMRADIUS: f64 = 0.035;
/// Narrowest allowed object, so that no jaw step can skip over one.
pub const MIN_WIDTH: f64 = 0.006;

/// Shapes are stored centred on their centroid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectLibrary {
    pub seed: u64,
    pub shapes: Vec<ConvexPolygon>,
}

impl ObjectLibrary {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("library serializes")
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }
}

/// Replaces vertex `corner` by two points, `fa` of the way towards its
/// predecessor and `fb` of the way towards its successor.
fn cut_corner(pts: &mut Vec<Vec2>, corner: usize, fa: f64, fb: f64) {
    let n = pts.len();
    let c = pts[corner];
    let prev = pts[(corner + n - 1) % n];
    let next = pts[(corner + 1) % n];
    let a = c + (prev - c) * fa;
    let b = c + (next - c) * fb;
    pts.splice(corner..=corner, [a, b]);
}

fn sample_shape(rng: &mut ChaCha8Rng, n: usize) -> Option<ConvexPolygon> {
    // Small and flat items are favoured so that rows of up to seven
    // objects can fit between the jaws.
    let u: f64 = rng.gen();
    let r = MIN_CIRCUMRADIUS + (MAX_CIRCUMRADIUS - MIN_CIRCUMRADIUS) * u * u;
    let aspect = rng.gen_range(0.15..0.8);
    let pts = if n == 3 {
        // Isosceles-ish wedge: a base and an apex somewhere above it.
        let apex = rng.gen_range(-0.3..0.3);
        vec![Vec2::new(-1.0, -aspect), Vec2::new(1.0, -aspect), Vec2::new(apex, aspect)]
    } else {
        // Packaged goods: boxes, some with bevelled corners. The cuts keep
        // at least one pair of parallel faces.
        let mut pts =
            vec![Vec2::new(-1.0, -aspect), Vec2::new(1.0, -aspect), Vec2::new(1.0, aspect), Vec2::new(-1.0, aspect)];
        let mut corners: Vec<usize> = (0..4).collect();
        for k in 0..n - 4 {
            let last = corners.len() - 1 - k;
            let i = rng.gen_range(0..=last);
            corners.swap(i, last);
        }
        let mut chosen: Vec<usize> = corners[4 - (n - 4)..].to_vec();
        chosen.sort_unstable_by(|a, b| b.cmp(a));
        for c in chosen {
            cut_corner(&mut pts, c, rng.gen_range(0.1..0.4), rng.gen_range(0.1..0.4));
        }
        pts
    };
    let raw = ConvexPolygon::new(pts).ok()?;
    let c = raw.centroid();
    let centred = raw.translate(-c);
    let k = r / centred.circumradius();
    let shape = ConvexPolygon::new(centred.vertices().iter().map(|&v| v * k).collect()).ok()?;
    (shape.len() == n && min_final_diameter(&shape) >= MIN_WIDTH).then_some(shape)
}

/// 33 convex polygons with 3 to 6 vertices, cycling through the vertex
/// counts, each with circumradius in `[MIN_CIRCUMRADIUS, MAX_CIRCUMRADIUS)`.
pub fn gen_object_set(seed: u64) -> ObjectLibrary {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shapes = (0..LIBRARY_SIZE)
        .map(|i| {
            let n = [4, 5, 6, 4, 5, 6, 4, 5, 6, 3][i % 10];
            loop {
                if let Some(s) = sample_shape(&mut rng, n) {
                    break s;
                }
            }
        })
        .collect();
    ObjectLibrary { seed, shapes }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn library_respects_constraints() {
        let lib = gen_object_set(0);
        assert_eq!(lib.shapes.len(), LIBRARY_SIZE);
        for s in &lib.shapes {
            assert!((3..=6).contains(&s.len()));
            let r = s.circumradius();
            assert!((MIN_CIRCUMRADIUS - 1e-12..=MAX_CIRCUMRADIUS + 1e-12).contains(&r));
            assert!(s.centroid().norm() < 1e-12);
            assert!(ConvexPolygon::new(s.vertices().to_vec()).is_ok());
        }
        assert_eq!(gen_object_set(0).to_json(), lib.to_json());
        assert_eq!(ObjectLibrary::from_json(&lib.to_json()).unwrap(), lib);
    }
}
