//! Singular value decomposition by one-sided (Hestenes) Jacobi rotations.
//!
//! The matrices in a link simulation are tiny (K×K effective channels,
//! N_R×N_A combiner stacks), so a Jacobi sweep is both the simplest and the
//! most accurate choice: singular values come out to high relative accuracy
//! and no bidiagonalization is needed.

use alloc::vec::Vec;

use num_complex::Complex64;
use num_traits::Zero;
// only needed when std's inherent float methods are absent
#[allow(unused_imports)]
use num_traits::Float;

use super::matrix::CMatrix;
use crate::{Error, Result};

const MAX_SWEEPS: usize = 60;

/// Thin SVD `A = U diag(s) Vᴴ` with `U`: m×r, `V`: n×r, r = min(m, n).
/// Singular values are sorted in decreasing order.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: CMatrix,
    pub singular_values: Vec<f64>,
    pub v: CMatrix,
}

impl Svd {
    pub fn max_singular_value(&self) -> f64 {
        self.singular_values.first().copied().unwrap_or(0.0)
    }

    /// σ_max / σ_min; infinite for rank-deficient input.
    pub fn condition_number(&self) -> f64 {
        let min = self.singular_values.last().copied().unwrap_or(0.0);
        if min == 0.0 {
            f64::INFINITY
        } else {
            self.max_singular_value() / min
        }
    }
}

pub fn svd(a: &CMatrix) -> Result<Svd> {
    if a.is_empty() {
        return Err(Error::invalid("svd of an empty matrix"));
    }
    if !a.is_finite() {
        return Err(Error::invalid("svd input has non-finite entries"));
    }
    if a.rows() >= a.cols() {
        Ok(jacobi_tall(a))
    } else {
        // A = U S Vᴴ  <=>  Aᴴ = V S Uᴴ
        let t = jacobi_tall(&a.adjoint());
        Ok(Svd {
            u: t.v,
            singular_values: t.singular_values,
            v: t.u,
        })
    }
}

/// Works on columns; requires rows >= cols.
fn jacobi_tall(a: &CMatrix) -> Svd {
    let m = a.rows();
    let n = a.cols();
    // column-major working copies
    let mut cols: Vec<Vec<Complex64>> = (0..n).map(|c| a.column(c)).collect();
    let mut v: Vec<Vec<Complex64>> = (0..n)
        .map(|c| {
            let mut e = alloc::vec![Complex64::zero(); n];
            e[c] = Complex64::new(1.0, 0.0);
            e
        })
        .collect();

    let eps = f64::EPSILON;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha: f64 = cols[p].iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = cols[q].iter().map(|z| z.norm_sqr()).sum();
                let gamma: Complex64 = cols[p].iter().zip(&cols[q]).map(|(x, y)| x.conj() * y).sum();
                let g = gamma.norm();
                if g == 0.0 || g <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                // rotate column q by e^{-i arg γ} so the pair's inner product is real
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut cols, p, q, c, s, phase);
                rotate(&mut v, p, q, c, s, phase);
            }
        }
        if !rotated {
            break;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<f64> = cols
        .iter()
        .map(|c| c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap_or(core::cmp::Ordering::Equal));

    let mut u = CMatrix::zeros(m, n);
    let mut vm = CMatrix::zeros(n, n);
    let mut s = Vec::with_capacity(n);
    for (k, &j) in order.iter().enumerate() {
        let sigma = norms[j];
        s.push(sigma);
        for r in 0..m {
            u[(r, k)] = if sigma > 0.0 { cols[j][r] / sigma } else { Complex64::zero() };
        }
        for r in 0..n {
            vm[(r, k)] = v[j][r];
        }
    }
    Svd {
        u,
        singular_values: s,
        v: vm,
    }
}

#[inline]
fn rotate(cols: &mut [Vec<Complex64>], p: usize, q: usize, c: f64, s: f64, phase: Complex64) {
    let rot = phase.conj();
    let (left, right) = cols.split_at_mut(q);
    let cp = &mut left[p];
    let cq = &mut right[0];
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let yq = *y * rot;
        let xp = *x;
        *x = xp * c - yq * s;
        *y = xp * s + yq * c;
    }
}

/// Moore-Penrose pseudo-inverse with the default cutoff
/// `max(rows, cols) · ε · σ_max`.
pub fn pseudo_inverse(a: &CMatrix) -> Result<CMatrix> {
    let tol = a.rows().max(a.cols()) as f64 * f64::EPSILON;
    pseudo_inverse_with_tol(a, tol)
}

/// Singular values below `rank_tol · σ_max` are treated as zero.
pub fn pseudo_inverse_with_tol(a: &CMatrix, rank_tol: f64) -> Result<CMatrix> {
    Ok(pinv_from_svd(&svd(a)?, rank_tol))
}

pub(crate) fn pinv_from_svd(d: &Svd, rank_tol: f64) -> CMatrix {
    let cutoff = rank_tol * d.max_singular_value();
    let n = d.v.rows();
    let m = d.u.rows();
    let mut out = CMatrix::zeros(n, m);
    for (k, &sigma) in d.singular_values.iter().enumerate() {
        if sigma <= cutoff || sigma == 0.0 {
            continue;
        }
        let inv = 1.0 / sigma;
        for r in 0..n {
            let vr = d.v[(r, k)] * inv;
            for c in 0..m {
                out[(r, c)] += vr * d.u[(c, k)].conj();
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::random::{standard_complex_gaussian, RandomStream};
    use alloc::vec;

    fn random_matrix(rows: usize, cols: usize, seed: u64) -> CMatrix {
        let v = standard_complex_gaussian(&RandomStream::new(seed), rows * cols);
        CMatrix::from_row_major(rows, cols, v).unwrap()
    }

    fn rel_err(a: &CMatrix, b: &CMatrix) -> f64 {
        a.sub(b).unwrap().frobenius_norm() / b.frobenius_norm().max(1e-300)
    }

    /// The four Moore-Penrose conditions, checked by direct multiplication.
    fn penrose_residual(a: &CMatrix, p: &CMatrix) -> f64 {
        let apa = &(a * p) * a;
        let pap = &(p * a) * p;
        let ap = a * p;
        let pa = p * a;
        rel_err(&apa, a)
            .max(rel_err(&pap, p))
            .max(rel_err(&ap.adjoint(), &ap))
            .max(rel_err(&pa.adjoint(), &pa))
    }

    #[test]
    fn identity_is_own_inverse() {
        let i3 = CMatrix::identity(3);
        let p = pseudo_inverse(&i3).unwrap();
        assert!(rel_err(&p, &i3) < 1e-15);
    }

    #[test]
    fn row_vector_closed_form() {
        let v = vec![Complex64::new(1.0, 2.0), Complex64::new(-0.5, 0.25), Complex64::new(0.0, -3.0)];
        let n2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        let row = CMatrix::row_vector(&v);
        let expected = row.adjoint().scale(Complex64::new(1.0 / n2, 0.0));
        let p = pseudo_inverse(&row).unwrap();
        assert_eq!((p.rows(), p.cols()), (3, 1));
        assert!(rel_err(&p, &expected) < 1e-14);
    }

    #[test]
    fn random_tall_satisfies_penrose() {
        let a = random_matrix(4, 2, 11);
        let p = pseudo_inverse(&a).unwrap();
        assert!(penrose_residual(&a, &p) < 1e-10);
    }

    #[test]
    fn rank_deficient_input() {
        // columns 0 and 2 parallel
        let a = random_matrix(5, 3, 3);
        let mut b = a.clone();
        for r in 0..5 {
            b[(r, 2)] = a[(r, 0)] * Complex64::new(0.0, 2.0);
        }
        let d = svd(&b).unwrap();
        assert!(d.condition_number() > 1e12);
        let p = pseudo_inverse(&b).unwrap();
        assert!(penrose_residual(&b, &p) < 1e-9);
    }

    #[test]
    fn reconstructs_input() {
        for (m, n) in [(3, 3), (6, 2), (2, 7), (1, 4)] {
            let a = random_matrix(m, n, (m * 31 + n) as u64);
            let d = svd(&a).unwrap();
            let s = CMatrix::diagonal(&d.singular_values.iter().map(|&x| Complex64::new(x, 0.0)).collect::<Vec<_>>());
            let back = &(&d.u * &s) * &d.v.adjoint();
            assert!(rel_err(&back, &a) < 1e-13, "{m}x{n}");
            assert!(d.singular_values.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn empty_is_rejected() {
        assert!(matches!(pseudo_inverse(&CMatrix::zeros(0, 3)), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn zero_matrix_pinv_is_zero() {
        let p = pseudo_inverse(&CMatrix::zeros(2, 3)).unwrap();
        assert_eq!(p, CMatrix::zeros(3, 2));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(200))]

            #[test]
            fn penrose_all_shapes(m in 1usize..=16, n in 1usize..=16, seed in any::<u64>()) {
                let a = random_matrix(m, n, seed);
                let p = pseudo_inverse(&a).unwrap();
                prop_assert!(p.is_finite());
                prop_assert!(penrose_residual(&a, &p) < 1e-9);
            }

            #[test]
            fn square_nonsingular_left_inverse(n in 1usize..=12, seed in any::<u64>()) {
                let a = random_matrix(n, n, seed);
                let d = svd(&a).unwrap();
                prop_assume!(d.condition_number() < 1e6);
                let p = pseudo_inverse(&a).unwrap();
                prop_assert!(rel_err(&(&p * &a), &CMatrix::identity(n)) < 1e-9);
            }
        }
    }
}
