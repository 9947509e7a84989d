use super::sparse::{axpy, dot, norm2, CsrMatrix};
use crate::error::{Error, Result};

/// Outcome of an iterative solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterInfo {
    pub iterations: usize,
    pub relative_residual: f64,
}

fn jacobi(m: &CsrMatrix) -> Vec<f64> {
    m.diagonal()
        .into_iter()
        .map(|d| if d.abs() > 0.0 { 1.0 / d } else { 1.0 })
        .collect()
}

/// Jacobi-preconditioned conjugate gradients for symmetric positive definite systems.
pub fn cg(m: &CsrMatrix, b: &[f64], x0: Option<&[f64]>, rtol: f64, max_iter: usize) -> Result<(Vec<f64>, IterInfo)> {
    let n = b.len();
    let dinv = jacobi(m);
    let mut x = x0.map_or_else(|| vec![0.0; n], |v| v.to_vec());
    let bnorm = norm2(b).max(f64::MIN_POSITIVE);
    let mut r: Vec<f64> = b.iter().zip(m.matvec(&x)).map(|(bi, ax)| bi - ax).collect();
    let mut z: Vec<f64> = r.iter().zip(&dinv).map(|(a, d)| a * d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    for it in 0..max_iter {
        let res = norm2(&r) / bnorm;
        if res <= rtol {
            return Ok((x, IterInfo { iterations: it, relative_residual: res }));
        }
        m.matvec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::SolverFailure("conjugate gradients lost positive definiteness".into()));
        }
        let alpha = rz / pap;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &ap, &mut r);
        for i in 0..n {
            z[i] = r[i] * dinv[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    let res = norm2(&r) / bnorm;
    if res <= rtol {
        Ok((x, IterInfo { iterations: max_iter, relative_residual: res }))
    } else {
        Err(Error::SolverFailure(format!("conjugate gradients stalled at relative residual {res:.3e}")))
    }
}

/// Restarted GMRES with right Jacobi preconditioning.
pub fn gmres(
    m: &CsrMatrix,
    b: &[f64],
    x0: Option<&[f64]>,
    rtol: f64,
    restart: usize,
    max_iter: usize,
) -> Result<(Vec<f64>, IterInfo)> {
    let n = b.len();
    let dinv = jacobi(m);
    let mut x = x0.map_or_else(|| vec![0.0; n], |v| v.to_vec());
    let bnorm = norm2(b).max(f64::MIN_POSITIVE);
    let mut total = 0;
    let mut w = vec![0.0; n];
    let mut zbuf = vec![0.0; n];
    loop {
        let r: Vec<f64> = b.iter().zip(m.matvec(&x)).map(|(bi, ax)| bi - ax).collect();
        let beta = norm2(&r);
        if beta / bnorm <= rtol {
            return Ok((x, IterInfo { iterations: total, relative_residual: beta / bnorm }));
        }
        if total >= max_iter {
            return Err(Error::SolverFailure(format!(
                "GMRES stalled at relative residual {:.3e}",
                beta / bnorm
            )));
        }
        let mut v: Vec<Vec<f64>> = vec![r.iter().map(|ri| ri / beta).collect()];
        let mut h = vec![vec![0.0; restart]; restart + 1];
        let (mut cs, mut sn) = (vec![0.0; restart], vec![0.0; restart]);
        let mut g = vec![0.0; restart + 1];
        g[0] = beta;
        let mut k_used = 0;
        for k in 0..restart {
            for i in 0..n {
                zbuf[i] = v[k][i] * dinv[i];
            }
            m.matvec_into(&zbuf, &mut w);
            for (j, vj) in v.iter().enumerate() {
                let hij = dot(&w, vj);
                h[j][k] = hij;
                axpy(-hij, vj, &mut w);
            }
            let hn = norm2(&w);
            h[k + 1][k] = hn;
            for j in 0..k {
                let t = cs[j] * h[j][k] + sn[j] * h[j + 1][k];
                h[j + 1][k] = -sn[j] * h[j][k] + cs[j] * h[j + 1][k];
                h[j][k] = t;
            }
            let d = h[k][k].hypot(h[k + 1][k]);
            cs[k] = if d > 0.0 { h[k][k] / d } else { 1.0 };
            sn[k] = if d > 0.0 { h[k + 1][k] / d } else { 0.0 };
            h[k][k] = d;
            h[k + 1][k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            k_used = k + 1;
            total += 1;
            if g[k + 1].abs() / bnorm <= rtol * 0.5 || hn == 0.0 || total >= max_iter {
                break;
            }
            v.push(w.iter().map(|wi| wi / hn).collect());
        }
        let mut y = vec![0.0; k_used];
        for i in (0..k_used).rev() {
            let mut acc = g[i];
            for j in i + 1..k_used {
                acc -= h[i][j] * y[j];
            }
            y[i] = acc / h[i][i];
        }
        let mut dz = vec![0.0; n];
        for (j, yj) in y.iter().enumerate() {
            axpy(*yj, &v[j], &mut dz);
        }
        for i in 0..n {
            x[i] += dz[i] * dinv[i];
        }
    }
}
