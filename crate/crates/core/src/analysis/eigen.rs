//! Eigenvalues and eigenvectors of small dense real matrices.
//!
//! The general path reduces to upper Hessenberg form with Householder
//! reflections and runs the Francis double-shift QR iteration, then
//! back-substitutes for eigenvectors (the classic EISPACK `orthes`/`hqr2`
//! pair). Metzler matrices, which is what CSMA rate matrices are, also have
//! a Perron path that returns the dominant real eigenvalue directly.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
#[allow(unused_imports)]
use num_traits::Float;

#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    pub values: Vec<Complex64>,
    /// `vectors[i]` is the (unnormalized) right eigenvector of `values[i]`.
    pub vectors: Vec<Vec<Complex64>>,
}

/// All eigenvalues and right eigenvectors of a square real matrix.
pub fn eigen(a: &Matrix) -> Result<EigenDecomposition> {
    if !a.is_square() {
        return Err(Error::Numeric("eigen: matrix is not square".into()));
    }
    let n = a.rows();
    if n == 0 {
        return Ok(EigenDecomposition {
            values: Vec::new(),
            vectors: Vec::new(),
        });
    }
    let mut h: Vec<Vec<f64>> = (0..n).map(|i| a.row(i).to_vec()).collect();
    let mut v = vec![vec![0.0; n]; n];
    orthes(&mut h, &mut v);
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    hqr2(&mut h, &mut v, &mut d, &mut e)?;

    let mut values = Vec::with_capacity(n);
    let mut vectors = Vec::with_capacity(n);
    let mut i = 0;
    while i < n {
        if e[i] == 0.0 {
            values.push(Complex64::new(d[i], 0.0));
            vectors.push((0..n).map(|r| Complex64::new(v[r][i], 0.0)).collect());
            i += 1;
        } else {
            let re: Vec<f64> = (0..n).map(|r| v[r][i]).collect();
            let im: Vec<f64> = (0..n).map(|r| v[r][i + 1]).collect();
            values.push(Complex64::new(d[i], e[i]));
            vectors.push(re.iter().zip(&im).map(|(&x, &y)| Complex64::new(x, y)).collect());
            values.push(Complex64::new(d[i + 1], e[i + 1]));
            vectors.push(re.iter().zip(&im).map(|(&x, &y)| Complex64::new(x, -y)).collect());
            i += 2;
        }
    }
    Ok(EigenDecomposition { values, vectors })
}

/// Eigenvalues only.
pub fn eigenvalues(a: &Matrix) -> Result<Vec<Complex64>> {
    eigen(a).map(|d| d.values)
}

/// Eigenvalue with maximal real part.
///
/// Metzler matrices take the Perron path, which is guaranteed to return a
/// real value; anything else goes through the dense QR solver.
pub fn max_real_eig(b: &Matrix) -> Result<f64> {
    if !b.is_square() {
        return Err(Error::Numeric("max_real_eig: matrix is not square".into()));
    }
    if b.is_metzler() {
        match perron_max_eig(b) {
            Ok(l) => return Ok(l),
            Err(perron_err) => {
                return dense_max_real(b).map_err(|_| perron_err);
            }
        }
    }
    dense_max_real(b)
}

fn dense_max_real(b: &Matrix) -> Result<f64> {
    eigenvalues(b)?
        .iter()
        .map(|z| z.re)
        .fold(None, |acc: Option<f64>, x| Some(acc.map_or(x, |a| a.max(x))))
        .ok_or_else(|| Error::Numeric("empty matrix has no eigenvalue".into()))
}

/// Dominant eigenvalue of a Metzler matrix via the Perron root of
/// `B + σI`, bracketed by Collatz–Wielandt bounds.
pub fn perron_max_eig(b: &Matrix) -> Result<f64> {
    let n = b.rows();
    if n == 0 {
        return Err(Error::Numeric("empty matrix has no eigenvalue".into()));
    }
    if n == 1 {
        return Ok(b[(0, 0)]);
    }
    let max_diag = (0..n).map(|i| b[(i, i)].abs()).fold(0.0, f64::max);
    let sigma = max_diag * 1.001 + f64::MIN_POSITIVE.sqrt();
    let mut a = b.clone();
    for i in 0..n {
        a[(i, i)] += sigma;
    }

    // Repeated squaring reaches A^(2^k) quickly even when the spectral gap
    // relative to σ is tiny; its row sums approximate the Perron vector.
    let mut p = a.clone();
    for _ in 0..64 {
        let mut next = p.mul(&p);
        let scale = next.as_slice().iter().fold(0.0, |m: f64, &x| m.max(x));
        if !(scale > 0.0) || !scale.is_finite() {
            break;
        }
        for i in 0..n {
            for j in 0..n {
                next[(i, j)] /= scale;
            }
        }
        let delta = next
            .as_slice()
            .iter()
            .zip(p.as_slice())
            .fold(0.0, |m: f64, (x, y)| m.max((x - y).abs()));
        p = next;
        if delta < 1e-15 {
            break;
        }
    }
    let mut v = p.mul_vec(&vec![1.0; n]);

    let tol = 1e-13 * (sigma + 1.0);
    let mut residual = f64::INFINITY;
    for _ in 0..10_000 {
        let norm = v.iter().fold(0.0, |m: f64, &x| m.max(x));
        if !(norm > 0.0) {
            break;
        }
        for x in &mut v {
            *x /= norm;
        }
        if v.iter().any(|&x| x <= 0.0) {
            break;
        }
        let w = a.mul_vec(&v);
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for (wi, vi) in w.iter().zip(&v) {
            let r = wi / vi;
            lo = lo.min(r);
            hi = hi.max(r);
        }
        residual = hi - lo;
        if residual <= tol {
            return Ok(0.5 * (lo + hi) - sigma);
        }
        v = w;
    }
    Err(Error::Numeric(format!(
        "Perron iteration did not converge (Collatz-Wielandt gap {residual:e})"
    )))
}

fn orthes(h: &mut [Vec<f64>], v: &mut [Vec<f64>]) {
    let n = h.len();
    let (low, high) = (0usize, n - 1);
    let mut ort = vec![0.0; n];
    for m in low + 1..high {
        let scale: f64 = (m..=high).map(|i| h[i][m - 1].abs()).sum();
        if scale != 0.0 {
            let mut hh = 0.0;
            for i in (m..=high).rev() {
                ort[i] = h[i][m - 1] / scale;
                hh += ort[i] * ort[i];
            }
            let mut g = hh.sqrt();
            if ort[m] > 0.0 {
                g = -g;
            }
            hh -= ort[m] * g;
            ort[m] -= g;
            for j in m..n {
                let mut f = 0.0;
                for i in (m..=high).rev() {
                    f += ort[i] * h[i][j];
                }
                f /= hh;
                for i in m..=high {
                    h[i][j] -= f * ort[i];
                }
            }
            for row in h.iter_mut().take(high + 1) {
                let mut f = 0.0;
                for j in (m..=high).rev() {
                    f += ort[j] * row[j];
                }
                f /= hh;
                for j in m..=high {
                    row[j] -= f * ort[j];
                }
            }
            ort[m] *= scale;
            h[m][m - 1] = scale * g;
        }
    }
    for (i, row) in v.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate() {
            *x = if i == j { 1.0 } else { 0.0 };
        }
    }
    for m in (low + 1..high).rev() {
        if h[m][m - 1] != 0.0 {
            for i in m + 1..=high {
                ort[i] = h[i][m - 1];
            }
            for j in m..=high {
                let mut g = 0.0;
                for i in m..=high {
                    g += ort[i] * v[i][j];
                }
                g = (g / ort[m]) / h[m][m - 1];
                for i in m..=high {
                    v[i][j] += g * ort[i];
                }
            }
        }
    }
}

fn cdiv(xr: f64, xi: f64, yr: f64, yi: f64) -> (f64, f64) {
    if yr.abs() > yi.abs() {
        let r = yi / yr;
        let d = yr + r * yi;
        ((xr + r * xi) / d, (xi - r * xr) / d)
    } else {
        let r = yr / yi;
        let d = yi + r * yr;
        ((r * xr + xi) / d, (r * xi - xr) / d)
    }
}

#[allow(clippy::many_single_char_names)]
fn hqr2(h: &mut [Vec<f64>], v: &mut [Vec<f64>], d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let nn = h.len() as isize;
    let low: isize = 0;
    let high: isize = nn - 1;
    let eps = f64::EPSILON;
    let mut n = nn - 1;
    let mut exshift = 0.0;
    let (mut p, mut q, mut r, mut s, mut z) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let (mut t, mut w, mut x, mut y);

    macro_rules! at {
        ($i:expr, $j:expr) => {
            h[($i) as usize][($j) as usize]
        };
    }

    let mut norm = 0.0;
    for i in 0..nn {
        for j in (i - 1).max(0)..nn {
            norm += at!(i, j).abs();
        }
    }

    let max_iter = 100 * nn.max(10);
    let mut iter = 0;
    let mut total_iter = 0;
    while n >= low {
        let mut l = n;
        while l > low {
            s = at!(l - 1, l - 1).abs() + at!(l, l).abs();
            if s == 0.0 {
                s = norm;
            }
            if at!(l, l - 1).abs() < eps * s {
                break;
            }
            l -= 1;
        }

        if l == n {
            at!(n, n) += exshift;
            d[n as usize] = at!(n, n);
            e[n as usize] = 0.0;
            n -= 1;
            iter = 0;
        } else if l == n - 1 {
            w = at!(n, n - 1) * at!(n - 1, n);
            p = (at!(n - 1, n - 1) - at!(n, n)) / 2.0;
            q = p * p + w;
            z = q.abs().sqrt();
            at!(n, n) += exshift;
            at!(n - 1, n - 1) += exshift;
            x = at!(n, n);
            let nu = n as usize;
            if q >= 0.0 {
                z = if p >= 0.0 { p + z } else { p - z };
                d[nu - 1] = x + z;
                d[nu] = d[nu - 1];
                if z != 0.0 {
                    d[nu] = x - w / z;
                }
                e[nu - 1] = 0.0;
                e[nu] = 0.0;
                x = at!(n, n - 1);
                s = x.abs() + z.abs();
                p = x / s;
                q = z / s;
                r = (p * p + q * q).sqrt();
                p /= r;
                q /= r;
                for j in (n - 1)..nn {
                    z = at!(n - 1, j);
                    at!(n - 1, j) = q * z + p * at!(n, j);
                    at!(n, j) = q * at!(n, j) - p * z;
                }
                for i in 0..=n {
                    z = at!(i, n - 1);
                    at!(i, n - 1) = q * z + p * at!(i, n);
                    at!(i, n) = q * at!(i, n) - p * z;
                }
                for row in v.iter_mut().take(high as usize + 1).skip(low as usize) {
                    z = row[nu - 1];
                    row[nu - 1] = q * z + p * row[nu];
                    row[nu] = q * row[nu] - p * z;
                }
            } else {
                d[nu - 1] = x + p;
                d[nu] = x + p;
                e[nu - 1] = z;
                e[nu] = -z;
            }
            n -= 2;
            iter = 0;
        } else {
            x = at!(n, n);
            y = 0.0;
            w = 0.0;
            if l < n {
                y = at!(n - 1, n - 1);
                w = at!(n, n - 1) * at!(n - 1, n);
            }
            if iter == 10 {
                exshift += x;
                for i in low..=n {
                    at!(i, i) -= x;
                }
                s = at!(n, n - 1).abs() + at!(n - 1, n - 2).abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            if iter == 30 {
                s = (y - x) / 2.0;
                s = s * s + w;
                if s > 0.0 {
                    s = s.sqrt();
                    if y < x {
                        s = -s;
                    }
                    s = x - w / ((y - x) / 2.0 + s);
                    for i in low..=n {
                        at!(i, i) -= s;
                    }
                    exshift += s;
                    x = 0.964;
                    y = x;
                    w = x;
                }
            }
            iter += 1;
            total_iter += 1;
            if total_iter > max_iter {
                return Err(Error::Numeric(format!(
                    "QR iteration did not converge after {max_iter} sweeps"
                )));
            }

            let mut m = n - 2;
            while m >= l {
                z = at!(m, m);
                r = x - z;
                s = y - z;
                p = (r * s - w) / at!(m + 1, m) + at!(m, m + 1);
                q = at!(m + 1, m + 1) - z - r - s;
                r = at!(m + 2, m + 1);
                s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                if at!(m, m - 1).abs() * (q.abs() + r.abs())
                    < eps * (p.abs() * (at!(m - 1, m - 1).abs() + z.abs() + at!(m + 1, m + 1).abs()))
                {
                    break;
                }
                m -= 1;
            }
            for i in (m + 2)..=n {
                at!(i, i - 2) = 0.0;
                if i > m + 2 {
                    at!(i, i - 3) = 0.0;
                }
            }

            let mut k = m;
            while k < n {
                let notlast = k != n - 1;
                if k != m {
                    p = at!(k, k - 1);
                    q = at!(k + 1, k - 1);
                    r = if notlast { at!(k + 2, k - 1) } else { 0.0 };
                    x = p.abs() + q.abs() + r.abs();
                    if x == 0.0 {
                        k += 1;
                        continue;
                    }
                    p /= x;
                    q /= x;
                    r /= x;
                }
                s = (p * p + q * q + r * r).sqrt();
                if p < 0.0 {
                    s = -s;
                }
                if s != 0.0 {
                    if k != m {
                        at!(k, k - 1) = -s * x;
                    } else if l != m {
                        at!(k, k - 1) = -at!(k, k - 1);
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    z = r / s;
                    q /= p;
                    r /= p;
                    for j in k..nn {
                        p = at!(k, j) + q * at!(k + 1, j);
                        if notlast {
                            p += r * at!(k + 2, j);
                            at!(k + 2, j) -= p * z;
                        }
                        at!(k, j) -= p * x;
                        at!(k + 1, j) -= p * y;
                    }
                    for i in 0..=n.min(k + 3) {
                        p = x * at!(i, k) + y * at!(i, k + 1);
                        if notlast {
                            p += z * at!(i, k + 2);
                            at!(i, k + 2) -= p * r;
                        }
                        at!(i, k) -= p;
                        at!(i, k + 1) -= p * q;
                    }
                    let ku = k as usize;
                    for row in v.iter_mut().take(high as usize + 1).skip(low as usize) {
                        p = x * row[ku] + y * row[ku + 1];
                        if notlast {
                            p += z * row[ku + 2];
                            row[ku + 2] -= p * r;
                        }
                        row[ku] -= p;
                        row[ku + 1] -= p * q;
                    }
                }
                k += 1;
            }
        }
    }

    if norm == 0.0 {
        return Ok(());
    }

    // Back-substitute for the eigenvectors of the quasi-triangular form.
    n = nn - 1;
    while n >= 0 {
        let nu = n as usize;
        p = d[nu];
        q = e[nu];
        if q == 0.0 {
            let mut l = n;
            at!(n, n) = 1.0;
            let mut i = n - 1;
            while i >= 0 {
                let iu = i as usize;
                w = at!(i, i) - p;
                r = 0.0;
                for j in l..=n {
                    r += at!(i, j) * at!(j, n);
                }
                if e[iu] < 0.0 {
                    z = w;
                    s = r;
                } else {
                    l = i;
                    if e[iu] == 0.0 {
                        at!(i, n) = if w != 0.0 { -r / w } else { -r / (eps * norm) };
                    } else {
                        x = at!(i, i + 1);
                        y = at!(i + 1, i);
                        q = (d[iu] - p) * (d[iu] - p) + e[iu] * e[iu];
                        t = (x * s - z * r) / q;
                        at!(i, n) = t;
                        at!(i + 1, n) = if x.abs() > z.abs() {
                            (-r - w * t) / x
                        } else {
                            (-s - y * t) / z
                        };
                    }
                    t = at!(i, n).abs();
                    if (eps * t) * t > 1.0 {
                        for j in i..=n {
                            at!(j, n) /= t;
                        }
                    }
                }
                i -= 1;
            }
        } else if q < 0.0 {
            let mut l = n - 1;
            if at!(n, n - 1).abs() > at!(n - 1, n).abs() {
                at!(n - 1, n - 1) = q / at!(n, n - 1);
                at!(n - 1, n) = -(at!(n, n) - p) / at!(n, n - 1);
            } else {
                let (cr, ci) = cdiv(0.0, -at!(n - 1, n), at!(n - 1, n - 1) - p, q);
                at!(n - 1, n - 1) = cr;
                at!(n - 1, n) = ci;
            }
            at!(n, n - 1) = 0.0;
            at!(n, n) = 1.0;
            let mut i = n - 2;
            while i >= 0 {
                let iu = i as usize;
                let (mut ra, mut sa) = (0.0, 0.0);
                for j in l..=n {
                    ra += at!(i, j) * at!(j, n - 1);
                    sa += at!(i, j) * at!(j, n);
                }
                w = at!(i, i) - p;
                if e[iu] < 0.0 {
                    z = w;
                    r = ra;
                    s = sa;
                } else {
                    l = i;
                    if e[iu] == 0.0 {
                        let (cr, ci) = cdiv(-ra, -sa, w, q);
                        at!(i, n - 1) = cr;
                        at!(i, n) = ci;
                    } else {
                        x = at!(i, i + 1);
                        y = at!(i + 1, i);
                        let mut vr = (d[iu] - p) * (d[iu] - p) + e[iu] * e[iu] - q * q;
                        let vi = (d[iu] - p) * 2.0 * q;
                        if vr == 0.0 && vi == 0.0 {
                            vr = eps * norm * (w.abs() + q.abs() + x.abs() + y.abs() + z.abs());
                        }
                        let (cr, ci) = cdiv(
                            x * r - z * ra + q * sa,
                            x * s - z * sa - q * ra,
                            vr,
                            vi,
                        );
                        at!(i, n - 1) = cr;
                        at!(i, n) = ci;
                        if x.abs() > z.abs() + q.abs() {
                            at!(i + 1, n - 1) = (-ra - w * at!(i, n - 1) + q * at!(i, n)) / x;
                            at!(i + 1, n) = (-sa - w * at!(i, n) - q * at!(i, n - 1)) / x;
                        } else {
                            let (cr, ci) = cdiv(-r - y * at!(i, n - 1), -s - y * at!(i, n), z, q);
                            at!(i + 1, n - 1) = cr;
                            at!(i + 1, n) = ci;
                        }
                    }
                    t = at!(i, n - 1).abs().max(at!(i, n).abs());
                    if (eps * t) * t > 1.0 {
                        for j in i..=n {
                            at!(j, n - 1) /= t;
                            at!(j, n) /= t;
                        }
                    }
                }
                i -= 1;
            }
        }
        n -= 1;
    }

    // Back-transform to eigenvectors of the original matrix.
    let mut j = nn - 1;
    while j >= low {
        for i in low..=high {
            z = 0.0;
            for k in low..=j.min(high) {
                z += v[i as usize][k as usize] * at!(k, j);
            }
            v[i as usize][j as usize] = z;
        }
        j -= 1;
    }
    Ok(())
}
