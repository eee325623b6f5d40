//! Small dense optimizers for likelihood work.
//!
//! Everything in this crate optimizes at most six parameters, so the
//! machinery is deliberately compact: BFGS with a backtracking line search
//! for smooth problems (analytic gradient when the caller has one, central
//! differences otherwise), Nelder–Mead for the low-dimensional
//! pseudo-likelihoods where gradients are awkward, and finite-difference
//! Hessians for observed-information standard errors.

/// Outcome of a minimization run. `f` is the objective at `x`.
#[derive(Clone, Debug)]
pub struct OptimResult {
    pub x: Vec<f64>,
    pub f: f64,
    /// Infinity norm of the (analytic or numeric) gradient at `x`.
    pub grad_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

const SQRT_EPS: f64 = 1.49e-8;

/// Gradient norm below which a stalled objective counts as converged.
/// Central differences cannot certify anything tighter than roughly this.
const STALL_GRAD_FLOOR: f64 = 1e-6;

/// Central-difference gradient with per-coordinate steps.
pub fn numeric_gradient<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64]) -> Vec<f64> {
    let mut g = vec![0.0; x.len()];
    let mut xp = x.to_vec();
    for i in 0..x.len() {
        let h = 6e-6 * (1.0 + x[i].abs());
        xp[i] = x[i] + h;
        let fp = f(&xp);
        xp[i] = x[i] - h;
        let fm = f(&xp);
        xp[i] = x[i];
        g[i] = (fp - fm) / (2.0 * h);
    }
    g
}

/// Central-difference Hessian (symmetric by construction).
pub fn numeric_hessian<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64]) -> Vec<Vec<f64>> {
    let n = x.len();
    let f0 = f(x);
    let h: Vec<f64> = x.iter().map(|&xi| 1.4e-4 * (1.0 + xi.abs())).collect();
    let mut hess = vec![vec![0.0; n]; n];
    let mut xp = x.to_vec();
    for i in 0..n {
        xp[i] = x[i] + h[i];
        let fp = f(&xp);
        xp[i] = x[i] - h[i];
        let fm = f(&xp);
        xp[i] = x[i];
        hess[i][i] = (fp - 2.0 * f0 + fm) / (h[i] * h[i]);
        for j in (i + 1)..n {
            xp[i] = x[i] + h[i];
            xp[j] = x[j] + h[j];
            let fpp = f(&xp);
            xp[j] = x[j] - h[j];
            let fpm = f(&xp);
            xp[i] = x[i] - h[i];
            let fmm = f(&xp);
            xp[j] = x[j] + h[j];
            let fmp = f(&xp);
            xp[i] = x[i];
            xp[j] = x[j];
            let v = (fpp - fpm - fmp + fmm) / (4.0 * h[i] * h[j]);
            hess[i][j] = v;
            hess[j][i] = v;
        }
    }
    hess
}

/// Inverts a small matrix by Gauss–Jordan elimination with partial
/// pivoting. Returns `None` when a pivot collapses (singular input).
pub fn invert(mat: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = mat.len();
    let mut a: Vec<Vec<f64>> = mat.to_vec();
    let mut inv = vec![vec![0.0; n]; n];
    for (i, row) in inv.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for col in 0..n {
        let pivot_row = (col..n).max_by(|&r, &s| {
            a[r][col].abs().partial_cmp(&a[s][col].abs()).unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if a[pivot_row][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot_row);
        inv.swap(col, pivot_row);
        let p = a[col][col];
        for j in 0..n {
            a[col][j] /= p;
            inv[col][j] /= p;
        }
        for r in 0..n {
            if r != col {
                let factor = a[r][col];
                if factor != 0.0 {
                    for j in 0..n {
                        a[r][j] -= factor * a[col][j];
                        inv[r][j] -= factor * inv[col][j];
                    }
                }
            }
        }
    }
    Some(inv)
}

/// BFGS minimization. `grad` may be `None`, in which case central
/// differences are used. Convergence is declared on the gradient infinity
/// norm falling below `grad_tol`.
pub fn bfgs<F, G>(f: &F, grad: Option<&G>, x0: &[f64], grad_tol: f64, max_iter: usize) -> OptimResult
where
    F: Fn(&[f64]) -> f64,
    G: Fn(&[f64]) -> Vec<f64>,
{
    let n = x0.len();
    let eval_grad = |x: &[f64]| -> Vec<f64> {
        match grad {
            Some(g) => g(x),
            None => numeric_gradient(f, x),
        }
    };

    let mut x = x0.to_vec();
    let mut fx = f(&x);
    if !fx.is_finite() {
        return OptimResult { x, f: fx, grad_norm: f64::INFINITY, iterations: 0, converged: false };
    }
    let mut g = eval_grad(&x);
    // Inverse Hessian approximation, started at the identity.
    let mut h = vec![vec![0.0; n]; n];
    for (i, row) in h.iter_mut().enumerate() {
        row[i] = 1.0;
    }

    let inf_norm = |v: &[f64]| v.iter().fold(0.0f64, |m, &z| m.max(z.abs()));
    let mut restarted = false;

    for iter in 0..max_iter {
        let gnorm = inf_norm(&g);
        if gnorm <= grad_tol {
            return OptimResult { x, f: fx, grad_norm: gnorm, iterations: iter, converged: true };
        }

        // Search direction d = -H g.
        let mut d = vec![0.0; n];
        for i in 0..n {
            for j in 0..n {
                d[i] -= h[i][j] * g[j];
            }
        }
        let mut slope: f64 = d.iter().zip(&g).map(|(a, b)| a * b).sum();
        if !slope.is_finite() || slope >= 0.0 {
            // Bad curvature estimate; restart from steepest descent.
            for (i, row) in h.iter_mut().enumerate() {
                for (j, v) in row.iter_mut().enumerate() {
                    *v = if i == j { 1.0 } else { 0.0 };
                }
            }
            for i in 0..n {
                d[i] = -g[i];
            }
            slope = -g.iter().map(|z| z * z).sum::<f64>();
        }

        // Backtracking Armijo line search.
        let mut t = 1.0f64;
        let mut x_new = vec![0.0; n];
        let mut f_new = f64::INFINITY;
        let mut ok = false;
        for _ in 0..50 {
            for i in 0..n {
                x_new[i] = x[i] + t * d[i];
            }
            f_new = f(&x_new);
            if f_new.is_finite() && f_new <= fx + 1e-4 * t * slope {
                ok = true;
                break;
            }
            t *= 0.5;
        }
        if !ok {
            if restarted {
                return OptimResult {
                    x,
                    f: fx,
                    grad_norm: gnorm,
                    iterations: iter,
                    converged: gnorm <= grad_tol.max(STALL_GRAD_FLOOR),
                };
            }
            // One identity restart, then give up if the line search still fails.
            restarted = true;
            for (i, row) in h.iter_mut().enumerate() {
                for (j, v) in row.iter_mut().enumerate() {
                    *v = if i == j { 1.0 } else { 0.0 };
                }
            }
            continue;
        }

        let g_new = eval_grad(&x_new);
        let s: Vec<f64> = (0..n).map(|i| x_new[i] - x[i]).collect();
        let y: Vec<f64> = (0..n).map(|i| g_new[i] - g[i]).collect();
        let sy: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum();
        let ss = s.iter().map(|z| z * z).sum::<f64>().sqrt();
        let yy = y.iter().map(|z| z * z).sum::<f64>().sqrt();

        if sy > SQRT_EPS * ss * yy {
            // Standard BFGS inverse update.
            let rho = 1.0 / sy;
            let mut hy = vec![0.0; n];
            for i in 0..n {
                for j in 0..n {
                    hy[i] += h[i][j] * y[j];
                }
            }
            let yhy: f64 = y.iter().zip(&hy).map(|(a, b)| a * b).sum();
            for i in 0..n {
                for j in 0..n {
                    h[i][j] += rho * rho * (sy + yhy) * s[i] * s[j]
                        - rho * (hy[i] * s[j] + s[i] * hy[j]);
                }
            }
        }

        let f_stall = (fx - f_new).abs() <= 1e-14 * (1.0 + fx.abs());
        x = x_new;
        fx = f_new;
        g = g_new;
        if f_stall && inf_norm(&g) <= grad_tol.max(STALL_GRAD_FLOOR) {
            // The objective cannot improve in double precision and the
            // gradient is at the noise floor of a finite-difference
            // estimate: that is convergence, even when grad_tol is tighter
            // than the noise allows.
            return OptimResult {
                x,
                f: fx,
                grad_norm: inf_norm(&g),
                iterations: iter + 1,
                converged: true,
            };
        }
    }
    let gnorm = inf_norm(&g);
    OptimResult { x, f: fx, grad_norm: gnorm, iterations: max_iter, converged: gnorm <= grad_tol }
}

/// Nelder–Mead simplex minimization with standard coefficients.
///
/// `init_step` sets the initial simplex edge relative to each coordinate's
/// magnitude. Convergence is declared when both the simplex diameter and the
/// objective spread collapse.
pub fn nelder_mead<F: Fn(&[f64]) -> f64>(
    f: &F,
    x0: &[f64],
    init_step: f64,
    max_evals: usize,
) -> OptimResult {
    let n = x0.len();
    let mut pts: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    pts.push(x0.to_vec());
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += init_step * (1.0 + x0[i].abs());
        pts.push(p);
    }
    let mut fv: Vec<f64> = pts.iter().map(|p| f(p)).collect();
    let mut evals = n + 1;

    while evals < max_evals {
        // Order the simplex: best first.
        let mut idx: Vec<usize> = (0..=n).collect();
        idx.sort_by(|&a, &b| fv[a].partial_cmp(&fv[b]).unwrap_or(std::cmp::Ordering::Equal));
        let reorder: Vec<Vec<f64>> = idx.iter().map(|&i| pts[i].clone()).collect();
        let reorder_f: Vec<f64> = idx.iter().map(|&i| fv[i]).collect();
        pts = reorder;
        fv = reorder_f;

        let diam = pts[1..]
            .iter()
            .map(|p| {
                p.iter().zip(&pts[0]).map(|(a, b)| (a - b).abs()).fold(0.0f64, f64::max)
            })
            .fold(0.0f64, f64::max);
        let fspread = (fv[n] - fv[0]).abs();
        if diam < 1e-9 && fspread < 1e-11 * (1.0 + fv[0].abs()) {
            return OptimResult {
                x: pts[0].clone(),
                f: fv[0],
                grad_norm: f64::NAN,
                iterations: evals,
                converged: true,
            };
        }

        let centroid: Vec<f64> = (0..n)
            .map(|j| pts[..n].iter().map(|p| p[j]).sum::<f64>() / n as f64)
            .collect();
        let mirror = |coef: f64| -> Vec<f64> {
            (0..n).map(|j| centroid[j] + coef * (centroid[j] - pts[n][j])).collect()
        };

        let xr = mirror(1.0);
        let fr = f(&xr);
        evals += 1;
        if fr < fv[0] {
            let xe = mirror(2.0);
            let fe = f(&xe);
            evals += 1;
            if fe < fr {
                pts[n] = xe;
                fv[n] = fe;
            } else {
                pts[n] = xr;
                fv[n] = fr;
            }
        } else if fr < fv[n - 1] {
            pts[n] = xr;
            fv[n] = fr;
        } else {
            let xc = if fr < fv[n] { mirror(0.5) } else { mirror(-0.5) };
            let fc = f(&xc);
            evals += 1;
            if fc < fv[n].min(fr) {
                pts[n] = xc;
                fv[n] = fc;
            } else {
                // Shrink toward the best vertex.
                for i in 1..=n {
                    for j in 0..n {
                        pts[i][j] = pts[0][j] + 0.5 * (pts[i][j] - pts[0][j]);
                    }
                    fv[i] = f(&pts[i]);
                }
                evals += n;
            }
        }
    }

    let best = (0..=n)
        .min_by(|&a, &b| fv[a].partial_cmp(&fv[b]).unwrap_or(std::cmp::Ordering::Equal))
        .unwrap_or(0);
    OptimResult {
        x: pts[best].clone(),
        f: fv[best],
        grad_norm: f64::NAN,
        iterations: max_evals,
        converged: false,
    }
}
