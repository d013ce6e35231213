//! Damped Newton iteration in ℝ² and ℝ⁴ shared by the plane and quaternionic solvers.

/// Result of one Newton run from a seed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum Outcome<const D: usize> {
    Converged { p: [f64; D], residual: f64 },
    /// Stopped close to a root without meeting the tolerance.
    Stalled { p: [f64; D], residual: f64 },
    /// Left the search region, hit an excluded point, or made no progress far from any root.
    Lost,
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct NewtonParams {
    pub tol: f64,
    pub max_iter: usize,
    pub cond_max: f64,
}

fn max_abs<const D: usize>(v: &[f64; D]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn norm2<const D: usize>(v: &[f64; D]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Solves `a·x = b` by Gaussian elimination with partial pivoting.
/// Returns `None` when a pivot vanishes.
pub(crate) fn solve<const D: usize>(mut a: [[f64; D]; D], mut b: [f64; D]) -> Option<[f64; D]> {
    for k in 0..D {
        let p = (k..D).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))?;
        if a[p][k] == 0.0 || !a[p][k].is_finite() {
            return None;
        }
        a.swap(k, p);
        b.swap(k, p);
        for i in k + 1..D {
            let f = a[i][k] / a[k][k];
            for j in k..D {
                a[i][j] -= f * a[k][j];
            }
            b[i] -= f * b[k];
        }
    }
    let mut x = [0.0; D];
    for i in (0..D).rev() {
        let s: f64 = (i + 1..D).map(|j| a[i][j] * x[j]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// Rough 2-norm condition estimate `‖J‖_F·‖J⁻¹‖_F` via the solved columns.
fn condition<const D: usize>(j: &[[f64; D]; D]) -> f64 {
    let fro: f64 = j.iter().flatten().map(|v| v * v).sum::<f64>().sqrt();
    let mut inv_fro = 0.0;
    for c in 0..D {
        let mut e = [0.0; D];
        e[c] = 1.0;
        match solve(*j, e) {
            Some(col) => inv_fro += col.iter().map(|v| v * v).sum::<f64>(),
            None => return f64::INFINITY,
        }
    }
    fro * inv_fro.sqrt()
}

/// Newton step `−J⁻¹f`, or a Levenberg–Marquardt step when `J` is ill-conditioned.
fn step<const D: usize>(j: &[[f64; D]; D], f: &[f64; D], cond_max: f64) -> Option<[f64; D]> {
    if condition(j) < cond_max {
        let neg: [f64; D] = std::array::from_fn(|i| -f[i]);
        return solve(*j, neg);
    }
    // (JᵀJ + μI)·δ = −Jᵀf
    let mut jtj = [[0.0; D]; D];
    let mut jtf = [0.0; D];
    for a in 0..D {
        for b in 0..D {
            jtj[a][b] = (0..D).map(|k| j[k][a] * j[k][b]).sum();
        }
        jtf[a] = -(0..D).map(|k| j[k][a] * f[k]).sum::<f64>();
    }
    let scale = (0..D).map(|a| jtj[a][a]).fold(0.0f64, f64::max).max(1e-300);
    let mu = 1e-8 * scale;
    for (a, row) in jtj.iter_mut().enumerate() {
        row[a] += mu;
    }
    solve(jtj, jtf)
}

/// Damped Newton from `p0`. `eval` returns `(f, J)` or `None` for excluded points;
/// `inside` bounds the region the iterate may explore.
pub(crate) fn run<const D: usize, E, B>(p0: [f64; D], params: NewtonParams, eval: E, inside: B) -> Outcome<D>
where
    E: Fn(&[f64; D]) -> Option<([f64; D], [[f64; D]; D])>,
    B: Fn(&[f64; D]) -> bool,
{
    let mut p = p0;
    let Some((mut f, mut j)) = eval(&p) else {
        return Outcome::Lost;
    };
    let jscale = |j: &[[f64; D]; D]| j.iter().flatten().fold(1.0f64, |m, v| m.max(v.abs()));
    for _ in 0..params.max_iter {
        let r = max_abs(&f);
        if r <= params.tol * jscale(&j) {
            // A few undamped polishing steps, kept only while they help.
            for _ in 0..3 {
                let Some(d) = step(&j, &f, params.cond_max) else { break };
                let q: [f64; D] = std::array::from_fn(|i| p[i] + d[i]);
                match eval(&q) {
                    Some((fq, jq)) if max_abs(&fq) < max_abs(&f) => {
                        p = q;
                        f = fq;
                        j = jq;
                    }
                    _ => break,
                }
            }
            return Outcome::Converged { p, residual: max_abs(&f) };
        }
        let Some(d) = step(&j, &f, params.cond_max) else {
            return near_or_lost(p, &f, &j, params);
        };
        let f0 = norm2(&f);
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let q: [f64; D] = std::array::from_fn(|i| p[i] + lambda * d[i]);
            if !inside(&q) {
                lambda *= 0.5;
                continue;
            }
            if let Some((fq, jq)) = eval(&q) {
                if norm2(&fq) < f0 {
                    p = q;
                    f = fq;
                    j = jq;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            return near_or_lost(p, &f, &j, params);
        }
    }
    if max_abs(&f) <= params.tol * jscale(&j) {
        Outcome::Converged { p, residual: max_abs(&f) }
    } else {
        near_or_lost(p, &f, &j, params)
    }
}

/// Classifies a non-converged iterate as close to a root (suspect) or not.
fn near_or_lost<const D: usize>(p: [f64; D], f: &[f64; D], j: &[[f64; D]; D], params: NewtonParams) -> Outcome<D> {
    let r = max_abs(f);
    let jmax = j.iter().flatten().fold(1.0f64, |m, v| m.max(v.abs()));
    if r <= params.tol.sqrt() * jmax {
        Outcome::Stalled { p, residual: r }
    } else {
        Outcome::Lost
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const PARAMS: NewtonParams = NewtonParams {
        tol: 1e-12,
        max_iter: 60,
        cond_max: 1e10,
    };

    #[test]
    fn solve_small_system() {
        let a = [[2.0, 1.0], [1.0, 3.0]];
        let x = solve(a, [3.0, 5.0]).unwrap();
        assert!((x[0] - 0.8).abs() < 1e-15 && (x[1] - 1.4).abs() < 1e-15);
        assert!(solve([[1.0, 2.0], [2.0, 4.0]], [1.0, 1.0]).is_none());
    }

    #[test]
    fn finds_circle_line_intersection() {
        // x² + y² = 2, x = y
        let out = run(
            [3.0, 0.5],
            PARAMS,
            |p| Some(([p[0] * p[0] + p[1] * p[1] - 2.0, p[0] - p[1]], [[2.0 * p[0], 2.0 * p[1]], [1.0, -1.0]])),
            |_| true,
        );
        match out {
            Outcome::Converged { p, .. } => {
                assert!((p[0] - 1.0).abs() < 1e-14 && (p[1] - 1.0).abs() < 1e-14);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn double_root_uses_damped_fallback() {
        // (x − 1)² = 0, y = 0 has a singular Jacobian at the root.
        let out = run(
            [3.0, 1.0],
            NewtonParams { tol: 1e-9, ..PARAMS },
            |p| Some(([(p[0] - 1.0).powi(2), p[1]], [[2.0 * (p[0] - 1.0), 0.0], [0.0, 1.0]])),
            |_| true,
        );
        match out {
            Outcome::Converged { p, .. } | Outcome::Stalled { p, .. } => assert!((p[0] - 1.0).abs() < 1e-4),
            Outcome::Lost => panic!("lost"),
        }
    }

    #[test]
    fn no_root_is_lost() {
        let out = run([0.3, 0.2], PARAMS, |p| Some(([p[0] * p[0] + 1.0, p[1]], [[2.0 * p[0], 0.0], [0.0, 1.0]])), |_| true);
        assert_eq!(out, Outcome::Lost);
    }
}
