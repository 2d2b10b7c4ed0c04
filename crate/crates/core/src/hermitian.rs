//! The signature-(n,1) Hermitian form and the group SU(n,1) preserving it.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, ONE};

/// Default absolute tolerance on the membership defects.
pub const MEMBERSHIP_TOL: f64 = 1e-10;

/// The diagonal form `I_{n,1} = diag(1, ..., 1, -1)` of size `n + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SignatureForm {
    n: usize,
}

impl SignatureForm {
    pub fn new(n: usize) -> Self {
        Self { n }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn size(&self) -> usize {
        self.n + 1
    }

    /// Diagonal entry `i` of the form.
    pub fn sign(&self, i: usize) -> f64 {
        if i < self.n {
            1.0
        } else {
            -1.0
        }
    }

    pub fn matrix(&self) -> ComplexMatrix {
        let diag: Vec<Complex64> = (0..self.size()).map(|i| Complex64::new(self.sign(i), 0.0)).collect();
        ComplexMatrix::from_diag(&diag)
    }

    /// `J . conj(m)^t . J`, the inverse of any pseudo-unitary `m`.
    pub fn adjoint(&self, m: &ComplexMatrix) -> ComplexMatrix {
        let mut out = m.conj_transpose();
        for i in 0..self.size() {
            for j in 0..self.size() {
                out[(i, j)] *= self.sign(i) * self.sign(j);
            }
        }
        out
    }
}

/// `conj(w)^t . I_{n,1} . z`.
pub fn pseudo_inner(w: &[Complex64], z: &[Complex64], form: SignatureForm) -> Result<Complex64> {
    if w.len() != form.size() || z.len() != form.size() {
        return Err(Error::invalid(format!(
            "pseudo_inner expects vectors of length {}, got {} and {}",
            form.size(),
            w.len(),
            z.len()
        )));
    }
    Ok(w.iter()
        .zip(z)
        .enumerate()
        .map(|(i, (a, b))| a.conj() * b * form.sign(i))
        .sum())
}

/// A matrix certified to lie in SU(n,1) up to `residual`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpecialUnitaryMatrix {
    n: usize,
    m: ComplexMatrix,
    residual: f64,
}

/// Why a candidate matrix is not in SU(n,1).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MembershipRejection {
    pub unitarity_defect: f64,
    pub determinant_defect: f64,
    pub tol: f64,
}

impl MembershipRejection {
    pub fn unitarity_failed(&self) -> bool {
        self.unitarity_defect > self.tol
    }

    pub fn determinant_failed(&self) -> bool {
        self.determinant_defect > self.tol
    }
}

impl std::fmt::Display for MembershipRejection {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut parts = Vec::new();
        if self.unitarity_failed() {
            parts.push(format!("unitarity defect {:.3e}", self.unitarity_defect));
        }
        if self.determinant_failed() {
            parts.push(format!("determinant defect {:.3e}", self.determinant_defect));
        }
        write!(f, "{} exceeds tolerance {:.1e}", parts.join(" and "), self.tol)
    }
}

/// Membership defects `(||m^H J m - J||, |det m - 1|)`, entrywise max norm.
pub fn membership_defects(m: &ComplexMatrix, n: usize) -> (f64, f64) {
    let form = SignatureForm::new(n);
    let j = form.matrix();
    let gram = &(&m.conj_transpose() * &j) * m;
    ((&gram - &j).max_abs(), (m.det() - ONE).norm())
}

/// Accepts `m` into SU(n,1) when both defects are within `tol`.
pub fn check_membership(
    m: &ComplexMatrix,
    n: usize,
    tol: f64,
) -> Result<std::result::Result<SpecialUnitaryMatrix, MembershipRejection>> {
    if m.rows() != n + 1 || m.cols() != n + 1 {
        return Err(Error::invalid(format!(
            "expected a {0}x{0} matrix, got {1}x{2}",
            n + 1,
            m.rows(),
            m.cols()
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::invalid("tolerance must be positive"));
    }
    let (unitarity, det) = membership_defects(m, n);
    if unitarity <= tol && det <= tol {
        Ok(Ok(SpecialUnitaryMatrix {
            n,
            m: m.clone(),
            residual: unitarity.max(det),
        }))
    } else {
        Ok(Err(MembershipRejection {
            unitarity_defect: unitarity,
            determinant_defect: det,
            tol,
        }))
    }
}

impl SpecialUnitaryMatrix {
    /// Certifies `m`, turning a rejection into an error.
    pub fn certify(m: ComplexMatrix, n: usize, tol: f64) -> Result<Self> {
        check_membership(&m, n, tol)?
            .map_err(|r| Error::NumericalDegeneracy(format!("not in SU({n},1): {r}")))
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n,
            m: ComplexMatrix::identity(n + 1),
            residual: 0.0,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.m
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn form(&self) -> SignatureForm {
        SignatureForm::new(self.n)
    }

    /// Group inverse `I_{n,1} . conj(m)^t . I_{n,1}`.
    pub fn inverse(&self) -> Self {
        let m = self.form().adjoint(&self.m);
        let (u, d) = membership_defects(&m, self.n);
        Self {
            n: self.n,
            m,
            residual: u.max(d),
        }
    }

    /// The product, re-certified at `tol`.
    pub fn mul(&self, other: &Self, tol: f64) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::invalid("dimension mismatch in product"));
        }
        Self::certify(&self.m * &other.m, self.n, tol)
    }
}

/// Multiplies `m` by the principal `size`-th root of `1 / det(m)`.
pub fn normalize_det(m: &ComplexMatrix) -> ComplexMatrix {
    let size = m.rows() as f64;
    let root = m.det().powf(1.0 / size);
    m.scale(root.inv())
}

/// A random element of SU(n,1), deterministic in `seed`.
pub fn random_group_element(n: usize, seed: u64, scale: f64) -> Result<SpecialUnitaryMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_group_element_with(n, &mut rng, scale)
}

/// Same as [`random_group_element`] but drawing from a caller-owned generator.
pub fn random_group_element_with<R: Rng + ?Sized>(
    n: usize,
    rng: &mut R,
    scale: f64,
) -> Result<SpecialUnitaryMatrix> {
    if !(scale >= 0.0) || !scale.is_finite() {
        return Err(Error::invalid("scale must be a finite nonnegative number"));
    }
    let m = random_pseudo_unitary(n, rng, scale);
    SpecialUnitaryMatrix::certify(m, n, 1e-9)
}

/// `exp(X)` for a random trace-free `X` in the Lie algebra su(n,1); works for
/// `n = 0` as well, where the only element is the identity.
pub(crate) fn random_pseudo_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R, scale: f64) -> ComplexMatrix {
    let size = n + 1;
    let form = SignatureForm::new(n);
    let mut r = ComplexMatrix::zeros(size, size);
    if scale > 0.0 {
        for i in 0..size {
            for j in 0..size {
                r[(i, j)] = Complex64::new(rng.gen_range(-scale..=scale), rng.gen_range(-scale..=scale));
            }
        }
    }
    let mut x = (&r - &form.adjoint(&r)).scale(Complex64::new(0.5, 0.0));
    let shift = x.trace() / size as f64;
    for i in 0..size {
        x[(i, i)] -= shift;
    }
    normalize_det(&x.exp())
}

/// The center element `e^{2 pi i k / (n+1)}`.
pub fn center_element(n: usize, k: usize) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * k as f64 / (n + 1) as f64)
}

/// Equality modulo the center of SU(n,1).
pub fn projectively_equal(a: &SpecialUnitaryMatrix, b: &SpecialUnitaryMatrix, tol: f64) -> Result<bool> {
    if a.n != b.n {
        return Err(Error::invalid("dimension mismatch in projective comparison"));
    }
    Ok(projective_distance(&a.m, &b.m, a.n) <= tol)
}

/// `min_k ||a - e^{2 pi i k/(n+1)} b||`, entrywise max norm.
pub fn projective_distance(a: &ComplexMatrix, b: &ComplexMatrix, n: usize) -> f64 {
    (0..=n)
        .map(|k| (a - &b.scale(center_element(n, k))).max_abs())
        .fold(f64::INFINITY, f64::min)
}

/// A uniformly random point of the open unit ball in C^n.
pub fn random_ball_point<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<Complex64> {
    let dir = random_unit_vector(n, rng);
    let radius: f64 = rng.gen::<f64>().powf(1.0 / (2 * n) as f64) * 0.999_999;
    dir.into_iter().map(|z| z * radius).collect()
}

/// A uniformly random direction on the unit sphere of C^n.
pub fn random_unit_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<Complex64> {
    loop {
        let v: Vec<Complex64> = (0..n).map(|_| Complex64::new(gaussian(rng), gaussian(rng))).collect();
        let len = crate::matrix::norm(&v);
        if len > 1e-6 {
            return v.into_iter().map(|z| z / len).collect();
        }
    }
}

pub(crate) fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    // Box-Muller; one draw is discarded, which is fine for test-input generation.
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}

/// On-disk matrix format: `{"n": int, "entries": [[[re, im], ...], ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MatrixFile {
    pub n: usize,
    pub entries: Vec<Vec<[f64; 2]>>,
}

impl MatrixFile {
    pub fn from_matrix(n: usize, m: &ComplexMatrix) -> Self {
        Self {
            n,
            entries: m
                .to_rows()
                .into_iter()
                .map(|r| r.into_iter().map(|z| [z.re, z.im]).collect())
                .collect(),
        }
    }

    /// Converts to a matrix, rejecting anything that is not `(n+1)x(n+1)`.
    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        if self.n == 0 {
            return Err(Error::invalid("matrix file: n must be at least 1"));
        }
        let size = self.n + 1;
        if self.entries.len() != size || self.entries.iter().any(|r| r.len() != size) {
            return Err(Error::invalid(format!(
                "matrix file: expected {size} rows of {size} [re, im] pairs"
            )));
        }
        let rows: Vec<Vec<Complex64>> = self
            .entries
            .iter()
            .map(|r| r.iter().map(|&[re, im]| Complex64::new(re, im)).collect())
            .collect();
        ComplexMatrix::from_rows(&rows)
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}
