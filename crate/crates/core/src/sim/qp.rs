//! Least-norm point of a polyhedron, `min ½|z|²  s.t.  A z ≥ b`, by the
//! dual active-set method of Goldfarb and Idnani specialised to an identity
//! Hessian.
//!
//! The problem is infeasible exactly when some nonnegative combination of
//! the constraint rows vanishes while doing positive work against `b`. For
//! contact constraints that combination is a set of contact forces in
//! equilibrium on every body, i.e. a jam.

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum QpResult {
    Solved(Vec<f64>),
    Infeasible,
}

const VIOLATION_TOL: f64 = 1e-14;
/// A new row whose component outside the active span is this small,
/// relative to its own length squared, counts as linearly dependent.
const DEPENDENCE_TOL: f64 = 1e-9;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solves `G x = rhs` for a small symmetric positive definite `G` (row-major,
/// `k x k`) by Cholesky factorisation. `None` if `G` is numerically singular.
fn cholesky_solve(g: &[f64], k: usize, rhs: &[f64]) -> Option<Vec<f64>> {
    let mut l = vec![0.0; k * k];
    for i in 0..k {
        for j in 0..=i {
            let mut s = g[i * k + j];
            for p in 0..j {
                s -= l[i * k + p] * l[j * k + p];
            }
            if i == j {
                if s <= 1e-14 * g[i * k + i].max(1e-300) {
                    return None;
                }
                l[i * k + i] = s.sqrt();
            } else {
                l[i * k + j] = s / l[j * k + j];
            }
        }
    }
    let mut y = rhs.to_vec();
    for i in 0..k {
        for p in 0..i {
            y[i] -= l[i * k + p] * y[p];
        }
        y[i] /= l[i * k + i];
    }
    for i in (0..k).rev() {
        for p in i + 1..k {
            y[i] -= l[p * k + i] * y[p];
        }
        y[i] /= l[i * k + i];
    }
    Some(y)
}

/// `rows[j]` is constraint `j`; all rows have length `n`.
pub(crate) fn least_norm(rows: &[Vec<f64>], b: &[f64], n: usize) -> QpResult {
    let m = rows.len();
    let mut z = vec![0.0; n];
    let mut active: Vec<usize> = Vec::new();
    let mut u: Vec<f64> = Vec::new();
    let norms: Vec<f64> = rows.iter().map(|r| dot(r, r).sqrt().max(1e-300)).collect();

    for _ in 0..(4 * m + 4 * n + 20) {
        // Most violated inactive constraint, measured as a distance.
        let mut p = usize::MAX;
        let mut worst = -VIOLATION_TOL;
        for j in 0..m {
            if active.contains(&j) {
                continue;
            }
            let s = (dot(&rows[j], &z) - b[j]) / norms[j];
            if s < worst {
                worst = s;
                p = j;
            }
        }
        if p == usize::MAX {
            return QpResult::Solved(z);
        }
        let ap = &rows[p];
        let mut u_p = 0.0;

        let mut added = false;
        for _ in 0..(2 * n + 2 * m + 10) {
            let k = active.len();
            // r = (NᵀN)⁻¹ Nᵀ a_p and the projected step z_dir = a_p - N r.
            let r = if k == 0 {
                Vec::new()
            } else {
                let mut g = vec![0.0; k * k];
                for i in 0..k {
                    for j in 0..=i {
                        let v = dot(&rows[active[i]], &rows[active[j]]);
                        g[i * k + j] = v;
                        g[j * k + i] = v;
                    }
                }
                let rhs: Vec<f64> = active.iter().map(|&i| dot(&rows[i], ap)).collect();
                match cholesky_solve(&g, k, &rhs) {
                    Some(r) => r,
                    None => return QpResult::Infeasible,
                }
            };
            let mut z_dir = ap.clone();
            for (i, &ai) in active.iter().enumerate() {
                for (zd, a) in z_dir.iter_mut().zip(&rows[ai]) {
                    *zd -= r[i] * a;
                }
            }
            let curv = dot(&z_dir, ap);
            let s_p = dot(ap, &z) - b[p];
            let t2 = if curv > DEPENDENCE_TOL * norms[p] * norms[p] { -s_p / curv } else { f64::INFINITY };
            let mut t1 = f64::INFINITY;
            let mut l = usize::MAX;
            for (i, &ri) in r.iter().enumerate() {
                if ri > 1e-15 {
                    let t = u[i] / ri;
                    if t < t1 {
                        t1 = t;
                        l = i;
                    }
                }
            }
            if t1.is_infinite() && t2.is_infinite() {
                return QpResult::Infeasible;
            }
            let t = t1.min(t2);
            if t2.is_finite() {
                for (zi, d) in z.iter_mut().zip(&z_dir) {
                    *zi += t * d;
                }
            }
            for (ui, ri) in u.iter_mut().zip(&r) {
                *ui -= t * ri;
            }
            u_p += t;
            if t2 <= t1 {
                active.push(p);
                u.push(u_p);
                added = true;
                break;
            }
            active.remove(l);
            u.remove(l);
        }
        if !added {
            return QpResult::Infeasible;
        }
    }
    QpResult::Infeasible
}

#[cfg(test)]
mod tests {
    use super::*;

    fn solved(r: QpResult) -> Vec<f64> {
        match r {
            QpResult::Solved(z) => z,
            QpResult::Infeasible => panic!("expected a solution"),
        }
    }

    #[test]
    fn single_halfplane() {
        let z = solved(least_norm(&[vec![1.0, 1.0]], &[2.0], 2));
        assert!((z[0] - 1.0).abs() < 1e-12 && (z[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn inactive_constraints_are_ignored() {
        let z = solved(least_norm(&[vec![1.0, 0.0], vec![0.0, 1.0]], &[-1.0, 0.5], 2));
        assert!(z[0].abs() < 1e-12 && (z[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn corner_of_two_constraints() {
        let z = solved(least_norm(&[vec![1.0, 0.0], vec![1.0, 1.0]], &[1.0, 3.0], 2));
        assert!((z[0] - 1.5).abs() < 1e-12 && (z[1] - 1.5).abs() < 1e-12);
        let z = solved(least_norm(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]], &[1.0, 1.0, 1.0], 2));
        assert!((z[0] - 1.0).abs() < 1e-12 && (z[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn opposing_constraints_are_infeasible() {
        // x ≥ 1 and -x ≥ 0.
        assert_eq!(least_norm(&[vec![1.0], vec![-1.0]], &[1.0, 0.0], 1), QpResult::Infeasible);
        // Touching but not overlapping is feasible.
        let z = solved(least_norm(&[vec![1.0], vec![-1.0]], &[1.0, -1.0], 1));
        assert!((z[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn matches_brute_force_on_random_problems() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let n = 3;
            let m = rng.gen_range(1..6);
            let rows: Vec<Vec<f64>> = (0..m).map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
            let b: Vec<f64> = (0..m).map(|_| rng.gen_range(-0.5..1.0)).collect();
            if let QpResult::Solved(z) = least_norm(&rows, &b, n) {
                for (r, bj) in rows.iter().zip(&b) {
                    assert!(dot(r, &z) >= bj - 1e-9, "rows {rows:?} b {b:?} z {z:?}");
                }
                // No feasible random point is closer to the origin.
                let zz = dot(&z, &z);
                for _ in 0..2000 {
                    let q: Vec<f64> = (0..n).map(|i| z[i] + rng.gen_range(-0.3..0.3)).collect();
                    if rows.iter().zip(&b).all(|(r, bj)| dot(r, &q) >= *bj) {
                        assert!(dot(&q, &q) >= zz - 1e-9);
                    }
                }
            }
        }
    }
}
