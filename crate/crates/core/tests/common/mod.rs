//! Reference implementations that share no code with the library: generic
//! numerical minimisation for the CW and AROW updates, an accelerated
//! projected-gradient solver for the SVM dual, and a pairwise scan for
//! distances of similarity.

#![allow(dead_code)]

use std::collections::HashSet;

use nalgebra::{DMatrix, DVector};

pub fn mat(d: usize, row_major: &[f64]) -> DMatrix<f64> {
    DMatrix::from_row_slice(d, d, row_major)
}

pub fn row_major(m: &DMatrix<f64>) -> Vec<f64> {
    m.transpose().as_slice().to_vec()
}

fn sym_from_vech(v: &[f64], d: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(d, d);
    let mut k = 0;
    for i in 0..d {
        for j in i..d {
            m[(i, j)] = v[k];
            m[(j, i)] = v[k];
            k += 1;
        }
    }
    m
}

fn vech(m: &DMatrix<f64>) -> Vec<f64> {
    let d = m.nrows();
    let mut out = Vec::new();
    for i in 0..d {
        for j in i..d {
            out.push(m[(i, j)]);
        }
    }
    out
}

/// Gradient with respect to the free entries of a symmetric matrix, given
/// the gradient `g` with respect to all entries taken as independent.
fn vech_grad(g: &DMatrix<f64>) -> Vec<f64> {
    let d = g.nrows();
    let mut out = Vec::new();
    for i in 0..d {
        for j in i..d {
            out.push(if i == j {
                g[(i, i)]
            } else {
                g[(i, j)] + g[(j, i)]
            });
        }
    }
    out
}

fn is_pd(m: &DMatrix<f64>) -> bool {
    m.clone().cholesky().is_some()
}

fn sqrtm(m: &DMatrix<f64>) -> DMatrix<f64> {
    let e = m.clone().symmetric_eigen();
    let s = DMatrix::from_diagonal(&e.eigenvalues.map(f64::sqrt));
    &e.eigenvectors * s * e.eigenvectors.transpose()
}

/// Damped Newton for a smooth convex function. The Hessian is taken by
/// central differences of the analytic gradient. `f` returns `None`
/// outside its domain.
pub fn newton(
    start: DVector<f64>,
    f: &dyn Fn(&DVector<f64>) -> Option<f64>,
    grad: &dyn Fn(&DVector<f64>) -> DVector<f64>,
) -> DVector<f64> {
    let n = start.len();
    let mut theta = start;
    for _ in 0..200 {
        let g = grad(&theta);
        let h = 1e-6;
        let mut hess = DMatrix::zeros(n, n);
        for j in 0..n {
            let mut up = theta.clone();
            let mut down = theta.clone();
            up[j] += h;
            down[j] -= h;
            hess.set_column(j, &((grad(&up) - grad(&down)) / (2.0 * h)));
        }
        let hess = (&hess + hess.transpose()) * 0.5;
        let step = match hess.cholesky() {
            Some(ch) => ch.solve(&g),
            None => g.clone(),
        };
        let f0 = f(&theta).expect("iterate stays in the domain");
        let mut t = 1.0;
        let next = loop {
            let cand = &theta - &step * t;
            if let Some(fc) = f(&cand) {
                if fc <= f0 + 1e-13 * f0.abs().max(1.0) {
                    break Some(cand);
                }
            }
            t *= 0.5;
            if t < 1e-12 {
                break None;
            }
        };
        let Some(next) = next else { break };
        let moved = (&next - &theta).amax();
        theta = next;
        if moved < 1e-15 * theta.amax().max(1.0) {
            break;
        }
    }
    theta
}

/// Minimises `KL(N(mu, S) || N(mu0, S0))` subject to
/// `y (mu . x) >= phi sqrt(x' S x)` over full covariances.
///
/// With `S = U^2` the problem is convex in `(mu, U)`. For a multiplier `a`
/// the Lagrangian is minimised by Newton's method; `a` is then bisected
/// until the constraint is tight.
pub fn cw_oracle(mu0: &[f64], sigma0: &[f64], x: &[f64], y: f64, phi: f64) -> (Vec<f64>, Vec<f64>) {
    let d = mu0.len();
    let m0 = DVector::from_column_slice(mu0);
    let s0 = mat(d, sigma0);
    let xv = DVector::from_column_slice(x);
    if y * m0.dot(&xv) >= phi * (xv.dot(&(&s0 * &xv))).sqrt() {
        return (mu0.to_vec(), sigma0.to_vec());
    }
    let a_inv = s0.clone().try_inverse().expect("invertible covariance");

    let split = |t: &DVector<f64>| {
        (
            DVector::from_iterator(d, t.iter().take(d).copied()),
            sym_from_vech(&t.as_slice()[d..], d),
        )
    };
    let solve = |alpha: f64, start: &DVector<f64>| {
        let f = |t: &DVector<f64>| -> Option<f64> {
            let (mu, u) = split(t);
            let ch = u.clone().cholesky()?;
            let log_det: f64 = ch.l().diagonal().iter().map(|v| 2.0 * v.ln()).sum();
            let dm = &mu - &m0;
            Some(
                0.5 * dm.dot(&(&a_inv * &dm)) - alpha * y * mu.dot(&xv) - log_det
                    + 0.5 * (&a_inv * &u * &u).trace()
                    + alpha * phi * (&u * &xv).norm(),
            )
        };
        let grad = |t: &DVector<f64>| -> DVector<f64> {
            let (mu, u) = split(t);
            let gm = &a_inv * (&mu - &m0) - &xv * (alpha * y);
            let ux = &u * &xv;
            let u_inv = u
                .clone()
                .try_inverse()
                .unwrap_or_else(|| DMatrix::zeros(d, d));
            let gu = -u_inv
                + (&a_inv * &u + &u * &a_inv) * 0.5
                + &ux * xv.transpose() * (alpha * phi / ux.norm());
            DVector::from_iterator(
                d + d * (d + 1) / 2,
                gm.iter().copied().chain(vech_grad(&gu)),
            )
        };
        newton(start.clone(), &f, &grad)
    };
    let slack = |t: &DVector<f64>| {
        let (mu, u) = split(t);
        y * mu.dot(&xv) - phi * (&u * &xv).norm()
    };

    let start = DVector::from_iterator(
        d + d * (d + 1) / 2,
        mu0.iter().copied().chain(vech(&sqrtm(&s0))),
    );
    let mut hi = 1.0;
    let mut hi_sol = solve(hi, &start);
    while slack(&hi_sol) < 0.0 {
        hi *= 2.0;
        hi_sol = solve(hi, &hi_sol);
    }
    let mut lo = 0.0;
    let mut sol = hi_sol.clone();
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        sol = solve(mid, &sol);
        if slack(&sol) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let sol = solve(hi, &sol);
    let (mu, u) = split(&sol);
    (mu.as_slice().to_vec(), row_major(&(&u * &u)))
}

/// Minimises `KL(N(mu, S) || N(mu0, S0)) + l1 hinge(y, mu . x)^2 + l2 x' S x`
/// over full covariances by Newton's method on `(mu, S)`.
pub fn arow_oracle(
    mu0: &[f64],
    sigma0: &[f64],
    x: &[f64],
    y: f64,
    l1: f64,
    l2: f64,
) -> (Vec<f64>, Vec<f64>) {
    let d = mu0.len();
    let m0 = DVector::from_column_slice(mu0);
    let s0 = mat(d, sigma0);
    let xv = DVector::from_column_slice(x);
    let a_inv = s0.clone().try_inverse().expect("invertible covariance");
    let split = |t: &DVector<f64>| {
        (
            DVector::from_iterator(d, t.iter().take(d).copied()),
            sym_from_vech(&t.as_slice()[d..], d),
        )
    };
    let f = |t: &DVector<f64>| -> Option<f64> {
        let (mu, s) = split(t);
        let ch = s.clone().cholesky()?;
        let log_det: f64 = ch.l().diagonal().iter().map(|v| 2.0 * v.ln()).sum();
        let dm = &mu - &m0;
        let hinge = (1.0 - y * mu.dot(&xv)).max(0.0);
        Some(
            0.5 * dm.dot(&(&a_inv * &dm)) + 0.5 * (&a_inv * &s).trace() - 0.5 * log_det
                + l1 * hinge * hinge
                + l2 * xv.dot(&(&s * &xv)),
        )
    };
    let grad = |t: &DVector<f64>| -> DVector<f64> {
        let (mu, s) = split(t);
        let hinge = (1.0 - y * mu.dot(&xv)).max(0.0);
        let gm = &a_inv * (&mu - &m0) - &xv * (2.0 * l1 * hinge * y);
        let s_inv = s
            .clone()
            .try_inverse()
            .unwrap_or_else(|| DMatrix::zeros(d, d));
        let gs = (-s_inv + &a_inv) * 0.5 + &xv * xv.transpose() * l2;
        DVector::from_iterator(
            d + d * (d + 1) / 2,
            gm.iter().copied().chain(vech_grad(&gs)),
        )
    };
    let start = DVector::from_iterator(d + d * (d + 1) / 2, mu0.iter().copied().chain(vech(&s0)));
    let sol = newton(start, &f, &grad);
    debug_assert!(is_pd(&split(&sol).1));
    let (mu, s) = split(&sol);
    (mu.as_slice().to_vec(), row_major(&s))
}

pub struct QpSolution {
    pub dual: f64,
    /// Primal objective at the weights implied by `alpha`; an upper bound
    /// on the optimal dual value.
    pub primal: f64,
    pub alpha: Vec<f64>,
}

/// Solves `max_a sum(a) - 1/2 a'Qa, 0 <= a <= C` with
/// `Q_ij = y_i y_j x_i . x_j` by FISTA with adaptive restart, stopping on a
/// small duality gap or after a fixed budget; `primal - dual` certifies
/// the accuracy either way.
pub fn svm_dual_oracle(xs: &[Vec<f64>], ys: &[f64], c: f64) -> QpSolution {
    let n = xs.len();
    let dim = xs.iter().map(Vec::len).max().unwrap_or(0);
    let z = DMatrix::from_fn(n, dim, |i, j| ys[i] * xs[i].get(j).copied().unwrap_or(0.0));
    let q = &z * z.transpose();
    let lip = q.clone().symmetric_eigen().eigenvalues.max().max(1e-12);
    let ones = DVector::from_element(n, 1.0);
    let dual = |a: &DVector<f64>| a.sum() - 0.5 * a.dot(&(&q * a));
    let primal = |a: &DVector<f64>| {
        let w = z.transpose() * a;
        let margins = &z * &w;
        0.5 * w.norm_squared() + c * margins.iter().map(|m| (1.0 - m).max(0.0)).sum::<f64>()
    };

    let mut a = DVector::zeros(n);
    let mut v = a.clone();
    let mut t: f64 = 1.0;
    let mut best = dual(&a);
    for it in 0..300_000 {
        let grad = &q * &v - &ones;
        let next = (&v - grad / lip).map(|e| e.clamp(0.0, c));
        let obj = dual(&next);
        if obj < best {
            // restart momentum
            t = 1.0;
            v = a.clone();
            continue;
        }
        best = obj;
        let t_next = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
        v = &next + (&next - &a) * ((t - 1.0) / t_next);
        a = next;
        t = t_next;
        if it % 50 == 0 && primal(&a) - best <= 1e-8 * best.abs().max(1.0) {
            break;
        }
    }
    QpSolution {
        dual: dual(&a),
        primal: primal(&a),
        alpha: a.as_slice().to_vec(),
    }
}

/// Distances of similarity by checking every earlier URL.
pub fn naive_distances(sets: &[HashSet<String>], tau: usize) -> (Vec<usize>, Vec<usize>) {
    let n = sets.len();
    let mut dmin = vec![0; n];
    let mut dmax = vec![n + 1; n];
    for i in 0..n {
        let similar: Vec<usize> = (0..i)
            .filter(|&j| sets[i].intersection(&sets[j]).count() > tau)
            .collect();
        if let (Some(&first), Some(&last)) = (similar.first(), similar.last()) {
            dmin[i] = i - last;
            dmax[i] = i - first;
        }
    }
    (dmin, dmax)
}
