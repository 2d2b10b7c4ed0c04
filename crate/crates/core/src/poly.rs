//! Roots of complex univariate polynomials from the eigenvalues of the
//! companion matrix (shifted Hessenberg QR), polished by Newton steps.

use num_complex::Complex64;

use crate::matrix::{ComplexMatrix, ZERO};

/// Evaluates `sum_i coeffs[i] x^i` by Horner's rule.
pub fn eval(coeffs: &[Complex64], x: Complex64) -> Complex64 {
    coeffs.iter().rev().fold(ZERO, |acc, &c| acc * x + c)
}

fn eval_derivative(coeffs: &[Complex64], x: Complex64) -> Complex64 {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .rev()
        .fold(ZERO, |acc, (i, &c)| acc * x + c * i as f64)
}

/// All complex roots of `sum_i coeffs[i] x^i` (ascending coefficients), with
/// multiplicity. Negligible leading coefficients are dropped.
pub fn roots(coeffs: &[Complex64]) -> Vec<Complex64> {
    let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Vec::new();
    }
    let negligible = |c: &Complex64| c.norm() <= 1e-15 * scale;
    let mut hi = coeffs.len();
    while hi > 0 && negligible(&coeffs[hi - 1]) {
        hi -= 1;
    }
    let mut lo = 0;
    while lo < hi && negligible(&coeffs[lo]) {
        lo += 1;
    }
    let mut out = vec![ZERO; lo];
    let trimmed = &coeffs[lo..hi];
    let degree = trimmed.len().saturating_sub(1);
    if degree == 0 {
        return out;
    }
    if degree == 1 {
        out.push(-trimmed[0] / trimmed[1]);
        return out;
    }

    let lead = trimmed[degree];
    let mut h = ComplexMatrix::zeros(degree, degree);
    for j in 0..degree {
        h[(0, j)] = -trimmed[degree - 1 - j] / lead;
    }
    for i in 1..degree {
        h[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    for r in hessenberg_eigenvalues(h) {
        out.push(polish(trimmed, r));
    }
    out
}

fn polish(coeffs: &[Complex64], mut x: Complex64) -> Complex64 {
    for _ in 0..4 {
        let d = eval_derivative(coeffs, x);
        if d.norm() == 0.0 {
            break;
        }
        let step = eval(coeffs, x) / d;
        if !step.is_finite() {
            break;
        }
        x -= step;
        if step.norm() <= 1e-16 * x.norm().max(1.0) {
            break;
        }
    }
    x
}

/// Givens rotation `[[c, s], [-conj(s), c]]` that zeroes `b` in `(a, b)`.
fn givens(a: Complex64, b: Complex64) -> (f64, Complex64) {
    let r = (a.norm_sqr() + b.norm_sqr()).sqrt();
    if r == 0.0 {
        return (1.0, ZERO);
    }
    if a.norm() == 0.0 {
        return (0.0, Complex64::new(1.0, 0.0));
    }
    let phase = a / a.norm();
    (a.norm() / r, phase * b.conj() / r)
}

/// Eigenvalues of an upper Hessenberg matrix by explicitly shifted QR with
/// Wilkinson shifts and deflation.
fn hessenberg_eigenvalues(mut h: ComplexMatrix) -> Vec<Complex64> {
    let m = h.rows();
    let mut eig = Vec::with_capacity(m);
    let mut hi = m - 1;
    let mut iter = 0usize;
    loop {
        if hi == 0 {
            eig.push(h[(0, 0)]);
            break;
        }
        let mut l = hi;
        while l > 0 {
            let s = h[(l - 1, l - 1)].norm() + h[(l, l)].norm();
            if h[(l, l - 1)].norm() <= f64::EPSILON * s.max(f64::MIN_POSITIVE) {
                h[(l, l - 1)] = ZERO;
                break;
            }
            l -= 1;
        }
        if l == hi {
            eig.push(h[(hi, hi)]);
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        if iter > 500 {
            // give up on this block; return the diagonal as the best estimate
            for i in (0..=hi).rev() {
                eig.push(h[(i, i)]);
            }
            break;
        }

        let shift = if iter % 11 == 0 {
            // exceptional shift to break cycles
            h[(hi, hi)] + Complex64::new(h[(hi, hi - 1)].norm(), 0.5 * h[(hi, hi - 1)].norm())
        } else {
            let a = h[(hi - 1, hi - 1)];
            let b = h[(hi - 1, hi)];
            let c = h[(hi, hi - 1)];
            let d = h[(hi, hi)];
            let tr = a + d;
            let det = a * d - b * c;
            let disc = (tr * tr * 0.25 - det).sqrt();
            let l1 = tr * 0.5 + disc;
            let l2 = tr * 0.5 - disc;
            if (l1 - d).norm() < (l2 - d).norm() {
                l1
            } else {
                l2
            }
        };

        for i in l..=hi {
            h[(i, i)] -= shift;
        }
        let mut rotations = Vec::with_capacity(hi - l);
        for j in l..hi {
            let (c, s) = givens(h[(j, j)], h[(j + 1, j)]);
            for col in j..=hi {
                let x = h[(j, col)];
                let y = h[(j + 1, col)];
                h[(j, col)] = x * c + s * y;
                h[(j + 1, col)] = -s.conj() * x + y * c;
            }
            rotations.push((c, s));
        }
        for (offset, &(c, s)) in rotations.iter().enumerate() {
            let j = l + offset;
            for row in l..=(j + 1).min(hi) {
                let x = h[(row, j)];
                let y = h[(row, j + 1)];
                h[(row, j)] = x * c + y * s.conj();
                h[(row, j + 1)] = -x * s + y * c;
            }
        }
        for i in l..=hi {
            h[(i, i)] += shift;
        }
    }
    eig
}
