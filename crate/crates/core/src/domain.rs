//! Pseudoellipsoids, their covering map onto the ball, and Levi-form
//! classification of boundary points.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermitian::random_unit_vector;
use crate::matrix::{hermitian_eigenvalues, ComplexMatrix, ZERO};

/// Tolerance for "this point is on the boundary".
pub const BOUNDARY_TOL: f64 = 1e-10;
/// A tail coordinate at most this large counts as zero for classification.
pub const COORD_ZERO_TOL: f64 = 1e-12;
/// Smallest Levi eigenvalue counted as nondegenerate.
pub const DEGENERACY_TOL: f64 = 1e-10;

/// `{ sum_head |z_j|^2 + sum_j |z_{n-k+j}|^{2 p_j} < 1 }`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PseudoEllipsoid {
    n: usize,
    p: Vec<u32>,
}

impl PseudoEllipsoid {
    pub fn new(n: usize, p: Vec<u32>) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("dimension must be at least 1"));
        }
        if p.len() > n {
            return Err(Error::invalid(format!("{} exponents for dimension {n}", p.len())));
        }
        if let Some(bad) = p.iter().find(|&&pj| pj < 2) {
            return Err(Error::invalid(format!("exponent {bad} < 2")));
        }
        Ok(Self { n, p })
    }

    pub fn ball(n: usize) -> Result<Self> {
        Self::new(n, Vec::new())
    }

    /// Parses `{"n": int, "p": [int, ...]}` and validates it.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: PseudoEllipsoid = serde_json::from_str(text)?;
        Self::new(raw.n, raw.p)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.p.len()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.p
    }

    /// Number of head (round) coordinates.
    pub fn head(&self) -> usize {
        self.n - self.p.len()
    }

    /// Coordinate indices of the tail, 0-based.
    pub fn tail_indices(&self) -> std::ops::Range<usize> {
        self.head()..self.n
    }

    /// Exponent attached to coordinate `i` (1 on the head).
    pub fn exponent_of(&self, i: usize) -> u32 {
        if i < self.head() {
            1
        } else {
            self.p[i - self.head()]
        }
    }

    pub fn is_ball(&self) -> bool {
        self.p.is_empty()
    }

    fn check_len(&self, z: &[Complex64]) -> Result<()> {
        if z.len() != self.n {
            return Err(Error::invalid(format!("expected a point of C^{}, got length {}", self.n, z.len())));
        }
        Ok(())
    }

    /// Defining function; negative exactly on the domain.
    pub fn rho(&self, z: &[Complex64]) -> f64 {
        z.iter()
            .enumerate()
            .map(|(i, zi)| zi.norm_sqr().powi(self.exponent_of(i) as i32))
            .sum::<f64>()
            - 1.0
    }

    /// `(z_head, z_tail^p)` componentwise.
    pub fn covering_map(&self, z: &[Complex64]) -> Vec<Complex64> {
        z.iter()
            .enumerate()
            .map(|(i, zi)| zi.powu(self.exponent_of(i)))
            .collect()
    }

    /// Determinant of the complex Jacobian of the covering map.
    pub fn covering_jacobian(&self, z: &[Complex64]) -> Complex64 {
        self.tail_indices()
            .map(|i| {
                let p = self.exponent_of(i);
                z[i].powu(p - 1) * p as f64
            })
            .product()
    }

    /// `d rho / d z_i`.
    pub fn gradient(&self, z: &[Complex64]) -> Vec<Complex64> {
        z.iter()
            .enumerate()
            .map(|(i, zi)| {
                let p = self.exponent_of(i);
                zi.conj() * (p as f64 * zi.norm_sqr().powi(p as i32 - 1))
            })
            .collect()
    }

    /// Diagonal of the complex Hessian `d^2 rho / dz_i dzbar_i`.
    pub fn hessian_diagonal(&self, z: &[Complex64]) -> Vec<f64> {
        z.iter()
            .enumerate()
            .map(|(i, zi)| {
                let p = self.exponent_of(i) as f64;
                p * p * zi.norm_sqr().powi(p as i32 - 1)
            })
            .collect()
    }

    /// Levi form at a boundary point and the resulting classification.
    pub fn classify_boundary(&self, z: &[Complex64]) -> Result<BoundaryPointReport> {
        self.check_len(z)?;
        let rho = self.rho(z);
        if rho.abs() > BOUNDARY_TOL {
            return Err(Error::invalid(format!("point is not on the boundary (rho = {rho:.3e})")));
        }
        let gradient = self.gradient(z);
        let basis = tangent_basis(&gradient);
        let hess = self.hessian_diagonal(z);

        let m = basis.len();
        let mut form = ComplexMatrix::zeros(m, m);
        for a in 0..m {
            for b in 0..m {
                form[(a, b)] = (0..self.n)
                    .map(|i| basis[a][i].conj() * basis[b][i] * hess[i])
                    .sum();
            }
        }
        let asymmetry = (0..m)
            .flat_map(|a| (0..m).map(move |b| (a, b)))
            .map(|(a, b)| (form[(a, b)] - form[(b, a)].conj()).norm())
            .fold(0.0, f64::max);
        let levi_eigenvalues = hermitian_eigenvalues(&form);

        let on_branch = self.tail_indices().any(|i| z[i].norm() <= COORD_ZERO_TOL);
        let classification = if on_branch {
            BoundaryClass::LeviDegenerate
        } else {
            BoundaryClass::StronglyPseudoconvex
        };
        let eigen_degenerate = levi_eigenvalues.first().map_or(false, |&e| e <= DEGENERACY_TOL);

        Ok(BoundaryPointReport {
            point: z.to_vec(),
            rho,
            gradient,
            levi_eigenvalues,
            classification,
            eigenvalue_agrees: eigen_degenerate == on_branch,
            hermitian_defect: asymmetry,
        })
    }

    /// Boundary points along random directions, deterministic in `seed`.
    pub fn sample_boundary(&self, seed: u64, count: usize) -> Vec<Vec<Complex64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count).map(|_| self.boundary_point_with(&mut rng)).collect()
    }

    /// Boundary points with coordinate `index` forced to zero.
    pub fn sample_boundary_on_hyperplane(&self, seed: u64, count: usize, index: usize) -> Vec<Vec<Complex64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| {
                let mut dir = random_unit_vector(self.n, &mut rng);
                dir[index] = ZERO;
                if dir.iter().all(|z| z.norm() == 0.0) {
                    dir[(index + 1) % self.n] = Complex64::new(1.0, 0.0);
                }
                self.radial_boundary_point(&dir)
            })
            .collect()
    }

    pub fn boundary_point_with<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<Complex64> {
        let dir = random_unit_vector(self.n, rng);
        self.radial_boundary_point(&dir)
    }

    /// A point of the domain: a boundary point pulled in radially.
    pub fn interior_point_with<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<Complex64> {
        let b = self.boundary_point_with(rng);
        let s: f64 = rng.gen_range(0.0..0.999);
        b.into_iter().map(|z| z * s).collect()
    }

    /// Solves `rho(t dir) = 0` for `t > 0` by bisection.
    pub fn radial_boundary_point(&self, dir: &[Complex64]) -> Vec<Complex64> {
        let at = |t: f64| -> Vec<Complex64> { dir.iter().map(|z| z * t).collect() };
        let mut hi = 1.0;
        while self.rho(&at(hi)) < 0.0 {
            hi *= 2.0;
        }
        let mut lo = 0.0;
        while hi - lo > 1e-14 * hi.max(1.0) {
            let mid = 0.5 * (lo + hi);
            if self.rho(&at(mid)) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if mid == lo && mid == hi {
                break;
            }
        }
        let lo_pt = at(lo);
        let hi_pt = at(hi);
        if self.rho(&lo_pt).abs() <= self.rho(&hi_pt).abs() {
            lo_pt
        } else {
            hi_pt
        }
    }
}

/// Orthonormal basis of `{xi : sum_i g_i xi_i = 0}` by Gram-Schmidt against
/// `conj(g)`.
fn tangent_basis(gradient: &[Complex64]) -> Vec<Vec<Complex64>> {
    let n = gradient.len();
    let normal: Vec<Complex64> = gradient.iter().map(|g| g.conj()).collect();
    let len = crate::matrix::norm(&normal);
    let mut accepted: Vec<Vec<Complex64>> = vec![normal.iter().map(|z| z / len).collect()];
    let mut candidates: Vec<(f64, Vec<Complex64>)> = (0..n)
        .map(|i| {
            let mut e = vec![ZERO; n];
            e[i] = Complex64::new(1.0, 0.0);
            (0.0, e)
        })
        .collect();

    while accepted.len() < n {
        // pick the candidate with the largest component orthogonal to what we have
        for cand in candidates.iter_mut() {
            let mut v = cand.1.clone();
            for q in &accepted {
                let proj = crate::matrix::hdot(q, &v);
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= proj * qi;
                }
            }
            cand.0 = crate::matrix::norm(&v);
        }
        let (best, _) = candidates
            .iter()
            .enumerate()
            .max_by(|a, b| a.1 .0.total_cmp(&b.1 .0))
            .unwrap();
        let (_, e) = candidates.swap_remove(best);
        let mut v = e;
        for _ in 0..2 {
            for q in &accepted {
                let proj = crate::matrix::hdot(q, &v);
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= proj * qi;
                }
            }
        }
        let l = crate::matrix::norm(&v);
        accepted.push(v.into_iter().map(|z| z / l).collect());
    }
    accepted.remove(0);
    accepted
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryClass {
    StronglyPseudoconvex,
    LeviDegenerate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryPointReport {
    #[serde(serialize_with = "crate::json::ser_vec")]
    pub point: Vec<Complex64>,
    pub rho: f64,
    #[serde(serialize_with = "crate::json::ser_vec")]
    pub gradient: Vec<Complex64>,
    pub levi_eigenvalues: Vec<f64>,
    pub classification: BoundaryClass,
    /// Whether the eigenvalue test agrees with the coordinate test.
    pub eigenvalue_agrees: bool,
    /// Largest `|L_ab - conj(L_ba)|` of the restricted form.
    pub hermitian_defect: f64,
}
