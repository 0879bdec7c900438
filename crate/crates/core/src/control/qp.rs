//! Dense strictly convex QP
//!
//! ```text
//! min 1/2 z^T H z + f^T z   s.t.   C z >= d
//! ```
//!
//! solved with the Goldfarb-Idnani dual active-set method. The active-set
//! quantities are recomputed densely at every step, which is cheap at the
//! sizes used by the controllers (tens of variables).

use nalgebra::Cholesky;

use crate::error::{dim_check, Error, Result};
use crate::linalg::{Mat, Vector};

#[derive(Debug, Clone)]
pub struct QpSolution {
    pub z: Vector,
    /// Indices of active constraint rows.
    pub active: Vec<usize>,
    /// One multiplier per constraint row; zero when inactive.
    pub multipliers: Vector,
    pub iterations: usize,
}

/// Solves `min 1/2 z^T H z + f^T z` subject to `C z >= d`.
pub fn solve_qp(h: &Mat, f: &Vector, c: &Mat, d: &Vector) -> Result<QpSolution> {
    let n = h.nrows();
    dim_check(h.ncols() == n && f.len() == n, || format!("H is {:?}, f has {} entries", h.shape(), f.len()))?;
    dim_check(c.ncols() == n && c.nrows() == d.len(), || format!("C is {:?}, d has {} entries", c.shape(), d.len()))?;
    let chol = Cholesky::new(crate::linalg::symmetrize(h))
        .ok_or_else(|| Error::Input("quadratic term is not positive definite".into()))?;
    let hinv = chol.inverse();
    let mut z = -(&hinv * f);
    let n_con = c.nrows();
    let mut active: Vec<usize> = Vec::new();
    let mut lambda: Vec<f64> = Vec::new();
    let scale = 1.0 + h.amax() + f.amax() + c.amax() + d.amax();
    let tol = 1e-12 * scale;
    let max_iter = 50 * (n + n_con) + 100;
    let mut iterations = 0;

    loop {
        // Most violated inactive constraint.
        let mut pick: Option<(usize, f64)> = None;
        for i in 0..n_con {
            if active.contains(&i) {
                continue;
            }
            let slack = c.row(i).dot(&z.transpose()) - d[i];
            let norm = c.row(i).norm().max(f64::MIN_POSITIVE);
            if slack / norm < -tol && pick.is_none_or(|(_, s)| slack / norm < s) {
                pick = Some((i, slack / norm));
            }
        }
        let Some((p, _)) = pick else { break };
        let np = c.row(p).transpose();
        let mut lambda_p = 0.0;
        loop {
            iterations += 1;
            if iterations > max_iter {
                return Err(Error::Convergence { iterations, residual: violation(c, d, &z) });
            }
            let (dz, r) = directions(&hinv, c, &active, &np)?;
            // Dual step length: largest t keeping active multipliers >= 0.
            let mut t1 = f64::INFINITY;
            let mut drop = None;
            for (j, rj) in r.iter().enumerate() {
                if *rj > 0.0 {
                    let t = lambda[j] / rj;
                    if t < t1 {
                        t1 = t;
                        drop = Some(j);
                    }
                }
            }
            let slack = np.dot(&z) - d[p];
            let curv = dz.dot(&np);
            let t2 = if dz.amax() > 1e-14 * (1.0 + np.amax()) && curv > 0.0 { -slack / curv } else { f64::INFINITY };
            let t = t1.min(t2);
            if !t.is_finite() {
                return Err(Error::Infeasible(format!("constraint {p} cannot be satisfied together with the active set")));
            }
            if t2.is_finite() {
                z += &dz * t;
            }
            for (lj, rj) in lambda.iter_mut().zip(r.iter()) {
                *lj -= t * rj;
            }
            lambda_p += t;
            if t2 <= t1 {
                active.push(p);
                lambda.push(lambda_p);
                break;
            }
            let j = drop.expect("finite dual step has a blocking constraint");
            active.remove(j);
            lambda.remove(j);
        }
    }

    let mut multipliers = Vector::zeros(n_con);
    for (i, l) in active.iter().zip(lambda.iter()) {
        multipliers[*i] = l.max(0.0);
    }
    Ok(QpSolution { z, active, multipliers, iterations })
}

/// Primal step `H^{-1} (n_p - N r)` and dual step `r = (N^T H^{-1} N)^{-1} N^T H^{-1} n_p`
/// for the active normals `N`.
fn directions(hinv: &Mat, c: &Mat, active: &[usize], np: &Vector) -> Result<(Vector, Vector)> {
    if active.is_empty() {
        return Ok((hinv * np, Vector::zeros(0)));
    }
    let n = c.ncols();
    let mut nmat = Mat::zeros(n, active.len());
    for (k, &i) in active.iter().enumerate() {
        nmat.set_column(k, &c.row(i).transpose());
    }
    let hn = hinv * &nmat;
    let gram = nmat.transpose() * &hn;
    let rhs = hn.transpose() * np;
    let r = match Cholesky::new(crate::linalg::symmetrize(&gram)) {
        Some(ch) => ch.solve(&rhs),
        None => gram.clone().lu().solve(&rhs).ok_or_else(|| Error::Infeasible("active constraints became dependent".into()))?,
    };
    let dz = hinv * (np - &nmat * &r);
    Ok((dz, r))
}

fn violation(c: &Mat, d: &Vector, z: &Vector) -> f64 {
    (c * z - d).iter().fold(0.0_f64, |acc, v| acc.max(-v))
}

/// Box-constrained QP. Variables with equal bounds are eliminated before the
/// remaining bounds become `+-I` constraint rows.
pub fn solve_box_qp(h: &Mat, f: &Vector, lower: Option<&Vector>, upper: Option<&Vector>) -> Result<QpSolution> {
    solve_qp_with_bounds(h, f, lower, upper, &Mat::zeros(0, h.nrows()), &Vector::zeros(0))
}

/// Box bounds plus general rows `G z >= g`. Multipliers are reported for the
/// full constraint list `[lower rows; upper rows; G rows]` where the bound
/// rows cover every variable (infinite or eliminated bounds get zero).
pub fn solve_qp_with_bounds(
    h: &Mat,
    f: &Vector,
    lower: Option<&Vector>,
    upper: Option<&Vector>,
    g: &Mat,
    g_rhs: &Vector,
) -> Result<QpSolution> {
    let n = h.nrows();
    let lo = lower.cloned().unwrap_or_else(|| Vector::from_element(n, f64::NEG_INFINITY));
    let hi = upper.cloned().unwrap_or_else(|| Vector::from_element(n, f64::INFINITY));
    dim_check(lo.len() == n && hi.len() == n, || format!("bounds must have {n} entries"))?;
    dim_check(g.ncols() == n && g.nrows() == g_rhs.len(), || "general constraint shape mismatch".into())?;
    for i in 0..n {
        if lo[i] > hi[i] {
            return Err(Error::Input(format!("lower bound {} exceeds upper bound {} at index {i}", lo[i], hi[i])));
        }
    }
    let fixed: Vec<bool> = (0..n).map(|i| lo[i] == hi[i]).collect();
    let free: Vec<usize> = (0..n).filter(|&i| !fixed[i]).collect();
    let mut z = Vector::zeros(n);
    for i in 0..n {
        if fixed[i] {
            z[i] = lo[i];
        }
    }
    let nf = free.len();
    let hff = Mat::from_fn(nf, nf, |a, b| h[(free[a], free[b])]);
    let ff = Vector::from_fn(nf, |a, _| f[free[a]] + (0..n).filter(|&j| fixed[j]).map(|j| h[(free[a], j)] * z[j]).sum::<f64>());

    let mut rows: Vec<(Vector, f64, usize)> = Vec::new();
    for (a, &i) in free.iter().enumerate() {
        if lo[i].is_finite() {
            let mut r = Vector::zeros(nf);
            r[a] = 1.0;
            rows.push((r, lo[i], i));
        }
    }
    for (a, &i) in free.iter().enumerate() {
        if hi[i].is_finite() {
            let mut r = Vector::zeros(nf);
            r[a] = -1.0;
            rows.push((r, -hi[i], n + i));
        }
    }
    for k in 0..g.nrows() {
        let r = Vector::from_fn(nf, |a, _| g[(k, free[a])]);
        let shift: f64 = (0..n).filter(|&j| fixed[j]).map(|j| g[(k, j)] * z[j]).sum();
        rows.push((r, g_rhs[k] - shift, 2 * n + k));
    }
    let mut c = Mat::zeros(rows.len(), nf);
    let mut d = Vector::zeros(rows.len());
    for (k, (r, rhs, _)) in rows.iter().enumerate() {
        c.set_row(k, &r.transpose());
        d[k] = *rhs;
    }
    let sol = if nf == 0 {
        if violation(&c, &d, &Vector::zeros(0)) > 0.0 {
            return Err(Error::Infeasible("all variables fixed and a general constraint is violated".into()));
        }
        QpSolution { z: Vector::zeros(0), active: Vec::new(), multipliers: Vector::zeros(rows.len()), iterations: 0 }
    } else {
        solve_qp(&hff, &ff, &c, &d)?
    };
    for (a, &i) in free.iter().enumerate() {
        z[i] = sol.z[a];
    }
    let mut multipliers = Vector::zeros(2 * n + g.nrows());
    let mut active = Vec::new();
    for (k, (_, _, orig)) in rows.iter().enumerate() {
        multipliers[*orig] = sol.multipliers[k];
        if sol.active.contains(&k) {
            active.push(*orig);
        }
    }
    Ok(QpSolution { z, active, multipliers, iterations: sol.iterations })
}

/// KKT residual of a box-QP point: primal infeasibility, and on each
/// coordinate the part of the gradient not explained by an active bound
/// (zero gradient when free, correctly signed when at a bound).
pub fn kkt_residual(h: &Mat, f: &Vector, lower: Option<&Vector>, upper: Option<&Vector>, z: &Vector) -> f64 {
    let grad = h * z + f;
    let mut worst = 0.0_f64;
    for i in 0..z.len() {
        let lo = lower.map_or(f64::NEG_INFINITY, |l| l[i]);
        let hi = upper.map_or(f64::INFINITY, |u| u[i]);
        worst = worst.max(lo - z[i]).max(z[i] - hi);
        let at_lo = lo.is_finite() && (z[i] - lo).abs() <= 1e-10 * (1.0 + lo.abs());
        let at_hi = hi.is_finite() && (z[i] - hi).abs() <= 1e-10 * (1.0 + hi.abs());
        let g = grad[i];
        let r = match (at_lo, at_hi) {
            (true, true) => 0.0,
            (true, false) => (-g).max(0.0),
            (false, true) => g.max(0.0),
            (false, false) => g.abs(),
        };
        worst = worst.max(r);
    }
    worst
}
