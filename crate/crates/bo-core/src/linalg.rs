//! Small dense/iterative linear-algebra helpers shared by the scattering and
//! evolution solvers.

use crate::C64;

/// Unrestarted GMRES for A x = b with A given as a closure. Returns the
/// iterate once the relative residual drops below `tol`, together with the
/// achieved residual and iteration count.
pub fn gmres<F>(apply: F, b: &[C64], tol: f64, max_iter: usize) -> (Vec<C64>, f64, usize)
where
    F: Fn(&[C64]) -> Vec<C64>,
{
    let n = b.len();
    let bnorm = norm(b);
    if bnorm == 0.0 {
        return (vec![C64::new(0.0, 0.0); n], 0.0, 0);
    }
    let m = max_iter.min(n);
    // Arnoldi basis and the Hessenberg least-squares system in Givens form
    let mut basis: Vec<Vec<C64>> = Vec::with_capacity(m + 1);
    basis.push(b.iter().map(|v| v / bnorm).collect());
    let mut h_cols: Vec<Vec<C64>> = Vec::with_capacity(m);
    let mut cs: Vec<C64> = Vec::with_capacity(m);
    let mut sn: Vec<f64> = Vec::with_capacity(m);
    let mut g = vec![C64::new(0.0, 0.0); m + 1];
    g[0] = C64::new(bnorm, 0.0);
    let mut resid = 1.0f64;
    let mut k_used = 0usize;

    for k in 0..m {
        let mut w = apply(&basis[k]);
        let mut hk = vec![C64::new(0.0, 0.0); k + 2];
        // modified Gram-Schmidt
        for (j, q) in basis.iter().enumerate() {
            let hjk = dot(&w, q);
            hk[j] = hjk;
            for (wi, qi) in w.iter_mut().zip(q) {
                *wi -= hjk * qi;
            }
        }
        let wnorm = norm(&w);
        hk[k + 1] = C64::new(wnorm, 0.0);
        // apply the accumulated rotations to the new column
        for j in 0..k {
            let t = cs[j].conj() * hk[j] + sn[j] * hk[j + 1];
            hk[j + 1] = -sn[j] * hk[j] + cs[j] * hk[j + 1];
            hk[j] = t;
        }
        // new rotation annihilating hk[k+1]
        let (c, s, r) = givens(hk[k], hk[k + 1]);
        hk[k] = r;
        hk[k + 1] = C64::new(0.0, 0.0);
        let gk = g[k];
        g[k] = c.conj() * gk;
        g[k + 1] = -C64::new(s, 0.0) * gk;
        cs.push(c);
        sn.push(s);
        h_cols.push(hk);
        k_used = k + 1;
        resid = g[k + 1].norm() / bnorm;
        if resid < tol || wnorm < 1e-300 {
            break;
        }
        basis.push(w.iter().map(|v| v / wnorm).collect());
    }

    // back substitution for the least-squares coefficients
    let mut y = vec![C64::new(0.0, 0.0); k_used];
    for j in (0..k_used).rev() {
        let mut acc = g[j];
        for l in j + 1..k_used {
            acc -= h_cols[l][j] * y[l];
        }
        y[j] = acc / h_cols[j][j];
    }
    let mut x = vec![C64::new(0.0, 0.0); n];
    for (j, yj) in y.iter().enumerate() {
        for (xi, qi) in x.iter_mut().zip(&basis[j]) {
            *xi += yj * qi;
        }
    }
    (x, resid, k_used)
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
}

fn norm(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Complex Givens rotation for a real second entry b ≥ 0 (the Arnoldi
/// subdiagonal): returns (c, s, ρ) with conj(c)·a + s·b = ρ real,
/// −s·a + c·b = 0, |c|² + s² = 1.
fn givens(a: C64, b: C64) -> (C64, f64, C64) {
    debug_assert!(b.im.abs() <= 1e-14 * (1.0 + b.re.abs()));
    let bn = b.re;
    let an = a.norm();
    if bn == 0.0 {
        if an == 0.0 {
            return (C64::new(1.0, 0.0), 0.0, C64::new(0.0, 0.0));
        }
        return (a / an, 0.0, C64::new(an, 0.0));
    }
    let rho = (an * an + bn * bn).sqrt();
    (a / rho, bn / rho, C64::new(rho, 0.0))
}
