//! Automorphisms of the unit ball as projective actions of SU(n,1).

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::hermitian::{normalize_det, SpecialUnitaryMatrix, MEMBERSHIP_TOL};
use crate::matrix::{norm, ComplexMatrix, ONE};

/// Tolerance used when re-certifying products.
pub const COMPOSE_TOL: f64 = 1e-9;
/// Tolerance for the structural block test.
pub const BLOCK_TOL: f64 = 1e-9;
/// Slack on `|z| <= 1` for boundary points.
pub const SPHERE_TOL: f64 = 1e-12;

/// An automorphism of `B^n`, represented by one lift to SU(n,1).
#[derive(Debug, Clone, PartialEq)]
pub struct BallAutomorphism {
    rep: SpecialUnitaryMatrix,
}

impl BallAutomorphism {
    pub fn new(rep: SpecialUnitaryMatrix) -> Self {
        Self { rep }
    }

    /// Certifies `m` at the default membership tolerance.
    pub fn from_matrix(m: ComplexMatrix, n: usize) -> Result<Self> {
        Ok(Self::new(SpecialUnitaryMatrix::certify(m, n, MEMBERSHIP_TOL)?))
    }

    pub fn identity(n: usize) -> Self {
        Self::new(SpecialUnitaryMatrix::identity(n))
    }

    pub fn n(&self) -> usize {
        self.rep.n()
    }

    pub fn rep(&self) -> &SpecialUnitaryMatrix {
        &self.rep
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        self.rep.matrix()
    }

    /// `z -> [M (z, 1)]` in affine coordinates.
    pub fn apply(&self, z: &[Complex64]) -> Result<Vec<Complex64>> {
        let n = self.n();
        if z.len() != n {
            return Err(Error::invalid(format!("expected a point of C^{n}, got length {}", z.len())));
        }
        if norm(z) >= 1.0 + SPHERE_TOL {
            return Err(Error::invalid(format!("point outside the closed ball (|z| = {})", norm(z))));
        }
        self.apply_homogeneous(z)
    }

    pub(crate) fn apply_homogeneous(&self, z: &[Complex64]) -> Result<Vec<Complex64>> {
        let mut h = z.to_vec();
        h.push(ONE);
        let w = self.matrix().mul_vec(&h);
        let last = w[self.n()];
        if last.norm() < 1e-14 {
            return Err(Error::NumericalDegeneracy(
                "last homogeneous coordinate vanishes; the matrix is not a ball automorphism".into(),
            ));
        }
        Ok(w[..self.n()].iter().map(|x| x / last).collect())
    }

    /// `F o G`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.n() != other.n() {
            return Err(Error::invalid("dimension mismatch in composition"));
        }
        Ok(Self::new(self.rep.mul(&other.rep, COMPOSE_TOL)?))
    }

    pub fn invert(&self) -> Self {
        Self::new(self.rep.inverse())
    }

    /// Last row `r` of the representative, so that `apply(z)` has denominator `r . (z, 1)`.
    pub fn last_row(&self) -> &[Complex64] {
        self.matrix().row(self.n())
    }

    /// Representative rescaled by the center element that puts `arg` of the
    /// corner entry in `[0, 2 pi / (n+1))`.
    pub fn normalized_matrix(&self) -> ComplexMatrix {
        let n = self.n();
        let m = self.matrix();
        let corner = m[(n, n)];
        let sector = 2.0 * PI / (n + 1) as f64;
        let arg = corner.arg().rem_euclid(2.0 * PI);
        let k = ((arg / sector).floor() as usize).min(n);
        m.scale(Complex64::from_polar(1.0, -sector * k as f64))
    }

    /// Tests whether the last `k` coordinate hyperplanes are each mapped into
    /// themselves by reading the block shape of the representative. `k = 0`
    /// is accepted and yields the whole matrix as the core block.
    pub fn decompose_block(&self, k: usize) -> std::result::Result<BlockDecomposition, BlockFailure> {
        let n = self.n();
        if k > n {
            return Err(BlockFailure::InvalidTail { n, k });
        }
        let m = self.normalized_matrix();
        let head = n - k;

        let mut worst: Option<(usize, usize, f64)> = None;
        let mut note = |i: usize, j: usize, v: f64| {
            if v > BLOCK_TOL && worst.map_or(true, |w| v > w.2) {
                worst = Some((i, j, v));
            }
        };
        for i in head..n {
            for j in 0..=n {
                if j != i {
                    note(i, j, m[(i, j)].norm());
                    note(j, i, m[(j, i)].norm());
                }
            }
            note(i, i, (m[(i, i)].norm() - 1.0).abs());
        }
        if let Some((row, col, magnitude)) = worst {
            return Err(BlockFailure::OffBlock { row, col, magnitude });
        }

        let core_idx: Vec<usize> = (0..head).chain(std::iter::once(n)).collect();
        let core = m.select(&core_idx, &core_idx);
        let mu = core.det().powf(1.0 / (head + 1) as f64).inv();
        let core = core.scale(mu);

        let a = core.select(&(0..head).collect::<Vec<_>>(), &(0..head).collect::<Vec<_>>());
        let b = (0..head).map(|i| core[(i, head)]).collect();
        let c = (0..head).map(|j| core[(head, j)]).collect();
        let d = core[(head, head)];
        let phases = (head..n).map(|i| (mu * m[(i, i)]).arg()).collect();
        Ok(BlockDecomposition { n, k, a, b, c, d, phases })
    }

    /// Searches `{z_i = 0} ∩ B^n` for a point `s` with `|F(s)_i| > tol`,
    /// testing the slice center first and then `samples` random slice points.
    /// Returns the first such point, or the largest violation seen if none
    /// exceeds `tol`.
    pub fn hyperplane_violation<R: Rng + ?Sized>(
        &self,
        index: usize,
        samples: usize,
        tol: f64,
        rng: &mut R,
    ) -> (f64, Vec<Complex64>) {
        let n = self.n();
        let origin = vec![Complex64::new(0.0, 0.0); n];
        let mut best = (self.apply(&origin).map(|w| w[index].norm()).unwrap_or(0.0), origin);
        for _ in 0..samples {
            if best.0 > tol {
                break;
            }
            let mut s = crate::hermitian::random_ball_point(n, rng);
            s[index] = Complex64::new(0.0, 0.0);
            if let Ok(w) = self.apply(&s) {
                let v = w[index].norm();
                if v > best.0 {
                    best = (v, s);
                }
            }
        }
        best
    }
}

/// Why a representative is not in bordered block shape.
#[derive(Debug, Clone, PartialEq)]
pub enum BlockFailure {
    /// `k` must satisfy `k <= n`.
    InvalidTail { n: usize, k: usize },
    /// Largest entry violating the shape (0-based row/column).
    OffBlock { row: usize, col: usize, magnitude: f64 },
}

impl std::fmt::Display for BlockFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BlockFailure::InvalidTail { n, k } => write!(f, "tail size {k} invalid for n = {n}"),
            BlockFailure::OffBlock { row, col, magnitude } => {
                write!(f, "entry ({}, {}) violates block shape by {magnitude:.3e}", row + 1, col + 1)
            }
        }
    }
}

/// The bordered block form of a ball automorphism preserving the last `k`
/// coordinate hyperplanes: `z_head -> (A z + b)/(c z + d)` and
/// `z_j -> e^{i theta_j} z_j / (c z + d)` on the tail.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockDecomposition {
    n: usize,
    k: usize,
    pub a: ComplexMatrix,
    pub b: Vec<Complex64>,
    pub c: Vec<Complex64>,
    pub d: Complex64,
    /// Tail phases in `(-pi, pi]`, one per tail coordinate.
    pub phases: Vec<f64>,
}

impl BlockDecomposition {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn head(&self) -> usize {
        self.n - self.k
    }

    /// `c . z_head + d`.
    pub fn denominator(&self, z: &[Complex64]) -> Complex64 {
        self.c.iter().zip(z).map(|(c, z)| c * z).sum::<Complex64>() + self.d
    }

    /// Evaluates the block formulas directly.
    pub fn apply(&self, z: &[Complex64]) -> Vec<Complex64> {
        let head = self.head();
        let den = self.denominator(z);
        let mut out = Vec::with_capacity(self.n);
        for i in 0..head {
            let num: Complex64 = (0..head).map(|l| self.a[(i, l)] * z[l]).sum::<Complex64>() + self.b[i];
            out.push(num / den);
        }
        for (j, &theta) in self.phases.iter().enumerate() {
            out.push(Complex64::from_polar(1.0, theta) * z[head + j] / den);
        }
        out
    }

    /// `[[A, b], [c, d]]`, a member of SU(n-k, 1).
    pub fn core_matrix(&self) -> ComplexMatrix {
        let head = self.head();
        let mut m = ComplexMatrix::zeros(head + 1, head + 1);
        for i in 0..head {
            for j in 0..head {
                m[(i, j)] = self.a[(i, j)];
            }
            m[(i, head)] = self.b[i];
            m[(head, i)] = self.c[i];
        }
        m[(head, head)] = self.d;
        m
    }

    /// The bordered matrix with the given tail phases, rescaled to determinant one.
    pub fn bordered_with_phases(&self, phases: &[f64]) -> ComplexMatrix {
        assemble_bordered(&self.core_matrix(), phases)
    }

    pub fn bordered_matrix(&self) -> ComplexMatrix {
        self.bordered_with_phases(&self.phases)
    }
}

/// `[[A, 0, b], [0, diag(e^{i theta}), 0], [c, 0, d]]` from a core block
/// `[[A, b], [c, d]]`, rescaled to determinant one.
pub fn assemble_bordered(core: &ComplexMatrix, phases: &[f64]) -> ComplexMatrix {
    let head = core.rows() - 1;
    let n = head + phases.len();
    let mut m = ComplexMatrix::zeros(n + 1, n + 1);
    for i in 0..head {
        for j in 0..head {
            m[(i, j)] = core[(i, j)];
        }
        m[(i, n)] = core[(i, head)];
        m[(n, i)] = core[(head, i)];
    }
    for (j, &theta) in phases.iter().enumerate() {
        m[(head + j, head + j)] = Complex64::from_polar(1.0, theta);
    }
    m[(n, n)] = core[(head, head)];
    normalize_det(&m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermitian::{projective_distance, random_group_element};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn boost() -> BallAutomorphism {
        BallAutomorphism::from_matrix(
            ComplexMatrix::from_real(&[&[1.25, 0.0, 0.75], &[0.0, 1.0, 0.0], &[0.75, 0.0, 1.25]]).unwrap(),
            2,
        )
        .unwrap()
    }

    fn swap() -> BallAutomorphism {
        BallAutomorphism::from_matrix(
            ComplexMatrix::from_real(&[&[1.0, 0.0, 0.0], &[0.0, 1.25, 0.75], &[0.0, 0.75, 1.25]]).unwrap(),
            2,
        )
        .unwrap()
    }

    #[test]
    fn apply_examples() {
        let id = BallAutomorphism::identity(2);
        let z = [c(0.3, 0.0), c(0.0, 0.4)];
        assert_eq!(id.apply(&z).unwrap(), z.to_vec());

        let f = boost();
        let w = f.apply(&[c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert!((w[0] - c(0.6, 0.0)).norm() < 1e-15 && w[1].norm() < 1e-15);
        let w = f.apply(&[c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert!((w[0] - ONE).norm() < 1e-15);
    }

    #[test]
    fn apply_rejects_outside_points() {
        assert!(boost().apply(&[c(1.1, 0.0), c(0.0, 0.0)]).is_err());
        assert!(boost().apply(&[c(0.1, 0.0)]).is_err());
    }

    #[test]
    fn invert_boost_flips_sign() {
        let inv = boost().invert();
        let expected =
            ComplexMatrix::from_real(&[&[1.25, 0.0, -0.75], &[0.0, 1.0, 0.0], &[-0.75, 0.0, 1.25]]).unwrap();
        assert!((inv.matrix() - &expected).max_abs() < 1e-15);
        assert_eq!(BallAutomorphism::identity(3).invert(), BallAutomorphism::identity(3));
    }

    #[test]
    fn compose_with_inverse() {
        let f = BallAutomorphism::new(random_group_element(3, 9, 0.5).unwrap());
        let id = f.compose(&f.invert()).unwrap();
        assert!(projective_distance(id.matrix(), &ComplexMatrix::identity(4), 3) < 1e-9);
        let g = BallAutomorphism::identity(3).compose(&f).unwrap();
        assert_eq!(g.matrix(), f.matrix());
        assert!(f.compose(&boost()).is_err());
    }

    #[test]
    fn decompose_boost() {
        let blk = boost().decompose_block(1).unwrap();
        assert!((blk.a[(0, 0)] - c(1.25, 0.0)).norm() < 1e-15);
        assert!((blk.b[0] - c(0.75, 0.0)).norm() < 1e-15);
        assert!((blk.c[0] - c(0.75, 0.0)).norm() < 1e-15);
        assert!((blk.d - c(1.25, 0.0)).norm() < 1e-15);
        assert!(blk.phases[0].abs() < 1e-15);
    }

    #[test]
    fn decompose_swap_fails_at_entry_2_3() {
        match swap().decompose_block(1) {
            Err(BlockFailure::OffBlock { row, col, magnitude }) => {
                assert!((magnitude - 0.75).abs() < 1e-15);
                assert!((row, col) == (1, 2) || (row, col) == (2, 1));
            }
            other => panic!("expected failure, got {other:?}"),
        }
        // the sampling oracle sees the same thing at the origin
        let w = swap().apply(&[c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert!((w[1].norm() - 0.6).abs() < 1e-15);
    }

    #[test]
    fn decompose_identity_any_tail() {
        for k in 1..=3 {
            let blk = BallAutomorphism::identity(3).decompose_block(k).unwrap();
            assert_eq!(blk.a, ComplexMatrix::identity(3 - k));
            assert!(blk.b.iter().chain(&blk.c).all(|z| z.norm() == 0.0));
            assert!((blk.d - ONE).norm() < 1e-15);
            assert!(blk.phases.iter().all(|t| t.abs() < 1e-15));
        }
        assert!(matches!(
            BallAutomorphism::identity(2).decompose_block(3),
            Err(BlockFailure::InvalidTail { .. })
        ));
        let whole = boost().decompose_block(0).unwrap();
        assert_eq!(whole.head(), 2);
        assert!(whole.phases.is_empty());
    }

    #[test]
    fn denominator_examples() {
        let blk = BallAutomorphism::identity(2).decompose_block(1).unwrap();
        assert_eq!(blk.denominator(&[c(0.3, 0.2), c(0.1, 0.0)]), ONE);
        let blk = boost().decompose_block(1).unwrap();
        assert!((blk.denominator(&[c(0.0, 0.0), c(0.5, 0.0)]) - c(1.25, 0.0)).norm() < 1e-15);
        assert!((blk.denominator(&[c(-1.0, 0.0), c(0.0, 0.0)]) - c(0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn bordered_matrix_reproduces_rep() {
        let blk = boost().decompose_block(1).unwrap();
        assert!(projective_distance(&blk.bordered_matrix(), boost().matrix(), 2) < 1e-14);
    }

    #[test]
    fn violation_search_finds_origin_first() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (v, s) = swap().hyperplane_violation(1, 10, 1e-9, &mut rng);
        assert!((v - 0.6).abs() < 1e-12);
        assert!(s.iter().all(|z| z.norm() == 0.0));
        let (v0, _) = boost().hyperplane_violation(1, 50, 1e-9, &mut rng);
        assert!(v0 < 1e-12);
    }
}
