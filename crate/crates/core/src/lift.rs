//! Extendibility of local automorphisms and the global lifts of ball
//! automorphisms that preserve the ramification hyperplanes.
//!
//! A ball automorphism `ftilde` comes from a global automorphism of the
//! pseudoellipsoid exactly when, after permuting tail coordinates that carry
//! equal exponents, it maps each tail hyperplane `{w_i = 0}` into itself. The
//! permutation acts on target coordinates: we test `P_sigma o ftilde`, where
//! `(P_sigma w)_i = w_{sigma(i)}`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ball::{assemble_bordered, BallAutomorphism, BlockDecomposition};
use crate::domain::PseudoEllipsoid;
use crate::error::{Error, Result};
use crate::hermitian::{normalize_det, random_pseudo_unitary, SpecialUnitaryMatrix, MEMBERSHIP_TOL};
use crate::json;

/// `|ftilde(s)_i|` above this on a protected slice counts as a violation.
pub const WITNESS_TOL: f64 = 1e-9;
/// Random slice samples tried after the slice center.
const WITNESS_SAMPLES: usize = 64;

/// A permutation of `0..n` fixing the head and permuting tail coordinates
/// only among equal exponents.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PermutationCertificate {
    sigma: Vec<usize>,
}

impl PermutationCertificate {
    pub fn identity(n: usize) -> Self {
        Self { sigma: (0..n).collect() }
    }

    /// Validates a 0-based permutation against the exponent structure of `domain`.
    pub fn new(domain: &PseudoEllipsoid, sigma: Vec<usize>) -> Result<Self> {
        let cert = Self::from_permutation(sigma)?;
        if cert.sigma.len() != domain.n() {
            return Err(Error::invalid("permutation length differs from the dimension"));
        }
        for (i, &s) in cert.sigma.iter().enumerate() {
            if i < domain.head() && s != i {
                return Err(Error::invalid(format!("permutation moves head coordinate {}", i + 1)));
            }
            if domain.exponent_of(i) != domain.exponent_of(s) {
                return Err(Error::invalid(format!(
                    "permutation mixes exponents {} and {}",
                    domain.exponent_of(i),
                    domain.exponent_of(s)
                )));
            }
        }
        Ok(cert)
    }

    fn from_permutation(sigma: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; sigma.len()];
        for &s in &sigma {
            if s >= sigma.len() || std::mem::replace(&mut seen[s], true) {
                return Err(Error::invalid("not a permutation"));
            }
        }
        Ok(Self { sigma })
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.sigma
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.sigma.iter().map(|s| s + 1).collect()
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.sigma.len()];
        for (i, &s) in self.sigma.iter().enumerate() {
            inv[s] = i;
        }
        Self { sigma: inv }
    }

    pub fn is_identity(&self) -> bool {
        self.sigma.iter().enumerate().all(|(i, &s)| i == s)
    }

    /// `P_sigma o f`: rows of the representative permuted, determinant restored.
    pub fn compose_ball(&self, f: &BallAutomorphism) -> Result<BallAutomorphism> {
        let mut perm = self.sigma.clone();
        perm.push(f.n());
        let m = normalize_det(&f.matrix().permute_rows(&perm));
        BallAutomorphism::from_matrix(m, f.n())
    }
}

/// All admissible permutations for `domain` in lexicographic order.
pub fn admissible_permutations(domain: &PseudoEllipsoid) -> Vec<PermutationCertificate> {
    let n = domain.n();
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(n);
    let mut used = vec![false; n];
    fn extend(
        domain: &PseudoEllipsoid,
        current: &mut Vec<usize>,
        used: &mut [bool],
        out: &mut Vec<PermutationCertificate>,
    ) {
        let i = current.len();
        if i == domain.n() {
            out.push(PermutationCertificate { sigma: current.clone() });
            return;
        }
        let candidates: Vec<usize> = if i < domain.head() {
            vec![i]
        } else {
            domain
                .tail_indices()
                .filter(|&s| !used[s] && domain.exponent_of(s) == domain.exponent_of(i))
                .collect()
        };
        for s in candidates {
            used[s] = true;
            current.push(s);
            extend(domain, current, used, out);
            current.pop();
            used[s] = false;
        }
    }
    extend(domain, &mut current, &mut used, &mut out);
    out
}

/// A protected slice point that `ftilde` moves off its hyperplane.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperplaneWitness {
    /// 0-based coordinate index.
    pub index: usize,
    pub point: Vec<Complex64>,
    pub violation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtendibilityVerdict {
    pub extendible: bool,
    pub certificate: Option<PermutationCertificate>,
    pub witness: Option<HyperplaneWitness>,
}

#[derive(Serialize, Deserialize)]
struct WitnessWire {
    index: usize,
    #[serde(serialize_with = "json::ser_vec", deserialize_with = "json::de_vec")]
    point: Vec<Complex64>,
    violation: f64,
}

#[derive(Serialize, Deserialize)]
struct VerdictWire {
    extendible: bool,
    sigma: Option<Vec<usize>>,
    witness: Option<WitnessWire>,
}

impl ExtendibilityVerdict {
    /// `{"extendible": bool, "sigma": [1-based] | null, "witness": {...} | null}`.
    pub fn to_json(&self) -> serde_json::Value {
        let wire = VerdictWire {
            extendible: self.extendible,
            sigma: self.certificate.as_ref().map(|c| c.one_based()),
            witness: self.witness.as_ref().map(|w| WitnessWire {
                index: w.index + 1,
                point: w.point.clone(),
                violation: w.violation,
            }),
        };
        serde_json::to_value(wire).expect("verdict serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let wire: VerdictWire = serde_json::from_str(text)?;
        let certificate = match wire.sigma {
            Some(s) => {
                if s.contains(&0) {
                    return Err(Error::invalid("sigma entries are 1-based"));
                }
                Some(PermutationCertificate::from_permutation(s.into_iter().map(|x| x - 1).collect())?)
            }
            None => None,
        };
        let witness = match wire.witness {
            Some(w) if w.index >= 1 => Some(HyperplaneWitness {
                index: w.index - 1,
                point: w.point,
                violation: w.violation,
            }),
            Some(_) => return Err(Error::invalid("witness index is 1-based")),
            None => None,
        };
        if wire.extendible != certificate.is_some() || certificate.is_some() == witness.is_some() {
            return Err(Error::invalid("verdict must carry exactly one of sigma/witness, matching extendible"));
        }
        Ok(Self {
            extendible: wire.extendible,
            certificate,
            witness,
        })
    }
}

/// Decides whether `ftilde` is the associated automorphism of a global
/// automorphism of `domain`.
pub fn check_extendible(domain: &PseudoEllipsoid, ftilde: &BallAutomorphism) -> Result<ExtendibilityVerdict> {
    if ftilde.n() != domain.n() {
        return Err(Error::invalid(format!(
            "ball automorphism of dimension {} on a domain of dimension {}",
            ftilde.n(),
            domain.n()
        )));
    }
    for cert in admissible_permutations(domain) {
        let permuted = cert.compose_ball(ftilde)?;
        if permuted.decompose_block(domain.k()).is_ok() {
            return Ok(ExtendibilityVerdict {
                extendible: true,
                certificate: Some(cert),
                witness: None,
            });
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut best: Option<HyperplaneWitness> = None;
    for index in domain.tail_indices() {
        let (violation, point) = ftilde.hyperplane_violation(index, WITNESS_SAMPLES, WITNESS_TOL, &mut rng);
        let w = HyperplaneWitness { index, point, violation };
        if violation > WITNESS_TOL {
            best = Some(w);
            break;
        }
        if best.as_ref().map_or(true, |b| violation > b.violation) {
            best = Some(w);
        }
    }
    Ok(ExtendibilityVerdict {
        extendible: false,
        certificate: None,
        witness: best,
    })
}

/// A global automorphism of a pseudoellipsoid, in closed form.
///
/// Writing `g = P_sigma o f`, the head of `g` is the ball automorphism
/// `(A z + b)/(c z + d)` and tail coordinate `j` of `g` is
/// `e^{i theta_j} z_j (c z + d)^{-1/p_j}`. The root is the branch
/// `root_seed_j^{-1} exp(-Log((c z + d)/d) / p_j)` with `root_seed_j` the
/// principal `p_j`-th root of `d`; since `|c| < |d|` the argument of `Log`
/// stays in the disc of radius one around 1 on the closed domain.
#[derive(Debug, Clone, PartialEq)]
pub struct EllipsoidAutomorphism {
    domain: PseudoEllipsoid,
    block: BlockDecomposition,
    sigma: PermutationCertificate,
    /// Phases of the tail of `g`, indexed by tail position.
    theta: Vec<f64>,
    root_seed: Vec<Complex64>,
}

/// Builds the lift of an extendible `ftilde`. Without explicit phases the
/// lift is the one whose associated ball automorphism is `ftilde` itself.
pub fn build_lift(
    domain: &PseudoEllipsoid,
    verdict: &ExtendibilityVerdict,
    ftilde: &BallAutomorphism,
    theta: Option<&[f64]>,
) -> Result<EllipsoidAutomorphism> {
    let sigma = match (&verdict.certificate, verdict.extendible) {
        (Some(c), true) => c.clone(),
        _ => return Err(Error::invalid("cannot lift a non-extendible automorphism")),
    };
    if ftilde.n() != domain.n() {
        return Err(Error::invalid("dimension mismatch between domain and automorphism"));
    }
    let block = sigma
        .compose_ball(ftilde)?
        .decompose_block(domain.k())
        .map_err(|e| Error::invalid(format!("verdict does not match the automorphism: {e}")))?;

    let theta = match theta {
        Some(t) if t.len() != domain.k() => {
            return Err(Error::invalid(format!("expected {} phases, got {}", domain.k(), t.len())))
        }
        Some(t) => t.to_vec(),
        None => block
            .phases
            .iter()
            .zip(domain.exponents())
            .map(|(phi, &p)| phi / p as f64)
            .collect(),
    };
    let root_seed = domain
        .exponents()
        .iter()
        .map(|&p| block.d.powf(1.0 / p as f64))
        .collect();
    Ok(EllipsoidAutomorphism {
        domain: domain.clone(),
        block,
        sigma,
        theta,
        root_seed,
    })
}

impl EllipsoidAutomorphism {
    pub fn identity(domain: &PseudoEllipsoid) -> Self {
        let ftilde = BallAutomorphism::identity(domain.n());
        let verdict = ExtendibilityVerdict {
            extendible: true,
            certificate: Some(PermutationCertificate::identity(domain.n())),
            witness: None,
        };
        build_lift(domain, &verdict, &ftilde, None).expect("identity lifts")
    }

    pub fn domain(&self) -> &PseudoEllipsoid {
        &self.domain
    }

    pub fn block(&self) -> &BlockDecomposition {
        &self.block
    }

    pub fn sigma(&self) -> &PermutationCertificate {
        &self.sigma
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn root_seed(&self) -> &[Complex64] {
        &self.root_seed
    }

    /// The branch of `(c z + d)^{-1/p_j}` used by tail position `j`.
    pub fn root_factor(&self, j: usize, z: &[Complex64]) -> Complex64 {
        let p = self.domain.exponents()[j] as f64;
        let ratio = self.block.denominator(z) / self.block.d;
        (-ratio.ln() / p).exp() / self.root_seed[j]
    }

    /// Evaluates the lift on the closure of the domain.
    pub fn apply(&self, z: &[Complex64]) -> Result<Vec<Complex64>> {
        if z.len() != self.domain.n() {
            return Err(Error::invalid("point has the wrong dimension"));
        }
        let rho = self.domain.rho(z);
        if rho > 1e-12 {
            return Err(Error::invalid(format!("point outside the closed domain (rho = {rho:.3e})")));
        }
        Ok(self.eval(z))
    }

    fn eval(&self, z: &[Complex64]) -> Vec<Complex64> {
        let head = self.domain.head();
        let den = self.block.denominator(z);
        let mut g = Vec::with_capacity(self.domain.n());
        for i in 0..head {
            let num: Complex64 = (0..head).map(|l| self.block.a[(i, l)] * z[l]).sum::<Complex64>() + self.block.b[i];
            g.push(num / den);
        }
        for (j, &theta) in self.theta.iter().enumerate() {
            g.push(Complex64::from_polar(1.0, theta) * z[head + j] * self.root_factor(j, z));
        }
        // f = P_sigma^{-1} o g, i.e. f_{sigma(j)} = g_j
        let mut f = g.clone();
        for (j, &s) in self.sigma.as_slice().iter().enumerate() {
            f[s] = g[j];
        }
        f
    }

    /// The ball automorphism `ftilde` with `pi o f = ftilde o pi`.
    pub fn associated_ball_automorphism(&self) -> BallAutomorphism {
        let phases: Vec<f64> = self
            .theta
            .iter()
            .zip(self.domain.exponents())
            .map(|(t, &p)| t * p as f64)
            .collect();
        let g = assemble_bordered(&self.block.core_matrix(), &phases);
        let mut perm = self.sigma.inverse().sigma;
        perm.push(self.domain.n());
        let m = normalize_det(&g.permute_rows(&perm));
        BallAutomorphism::new(
            SpecialUnitaryMatrix::certify(m, self.domain.n(), 1e-9).expect("assembled lift is pseudo-unitary"),
        )
    }

    /// Adds `angle` to the phase that feeds output coordinate `i`.
    fn rotate_output(&mut self, i: usize, angle: f64) {
        let j = self.sigma.inverse().sigma[i] - self.domain.head();
        self.theta[j] += angle;
    }
}

/// Interior point with head zero and nonzero tail used to fix phases.
pub fn alignment_point(domain: &PseudoEllipsoid) -> Vec<Complex64> {
    let k = domain.k().max(1) as f64;
    let t = (0.5 / k).powf(0.25).min(0.5);
    (0..domain.n())
        .map(|i| if i < domain.head() { Complex64::new(0.0, 0.0) } else { Complex64::new(t, 0.0) })
        .collect()
}

/// Rotates tail phases of `h` so that `h(z*) = target` at the alignment point;
/// the ratio per coordinate must be unimodular.
fn align_to(h: &mut EllipsoidAutomorphism, current: &[Complex64], target: &[Complex64]) -> Result<()> {
    for i in h.domain.tail_indices() {
        let ratio = target[i] / current[i];
        if (ratio.norm() - 1.0).abs() > 1e-8 {
            return Err(Error::Internal(format!("phase alignment ratio {ratio} is not unimodular")));
        }
        h.rotate_output(i, ratio.arg());
    }
    Ok(())
}

/// `f o g`, rebuilt from the composite ball automorphism and aligned so that
/// it agrees with the pointwise composition.
pub fn compose_lifts(f: &EllipsoidAutomorphism, g: &EllipsoidAutomorphism) -> Result<EllipsoidAutomorphism> {
    if f.domain != g.domain {
        return Err(Error::invalid("lifts live on different domains"));
    }
    let domain = &f.domain;
    let composite = f.associated_ball_automorphism().compose(&g.associated_ball_automorphism())?;
    let verdict = check_extendible(domain, &composite)?;
    if !verdict.extendible {
        return Err(Error::Internal("composition of global automorphisms is not extendible".into()));
    }
    let mut h = build_lift(domain, &verdict, &composite, None)?;
    let z = alignment_point(domain);
    let target = f.eval(&g.eval(&z));
    let current = h.eval(&z);
    align_to(&mut h, &current, &target)?;
    Ok(h)
}

/// The inverse lift, aligned so that `f o f^{-1}` is the identity.
pub fn invert_lift(f: &EllipsoidAutomorphism) -> Result<EllipsoidAutomorphism> {
    let domain = &f.domain;
    let inv = f.associated_ball_automorphism().invert();
    let verdict = check_extendible(domain, &inv)?;
    if !verdict.extendible {
        return Err(Error::Internal("inverse of a global automorphism is not extendible".into()));
    }
    let mut h = build_lift(domain, &verdict, &inv, None)?;
    let z = alignment_point(domain);
    let hz = h.eval(&z);
    let fhz = f.eval(&hz);
    // f is linear in each tail coordinate, so scaling h's output coordinate m
    // scales f's output sigma_f(m) by the same factor.
    let sigma_f = f.sigma.as_slice();
    let mut target = hz.clone();
    for m in domain.tail_indices() {
        let i = sigma_f[m];
        target[m] = hz[m] * (z[i] / fhz[i]);
    }
    align_to(&mut h, &hz, &target)?;
    Ok(h)
}

/// A random ball automorphism that passes [`check_extendible`] on `domain`:
/// random core, random tail phases, random admissible permutation.
pub fn random_extendible<R: Rng + ?Sized>(
    domain: &PseudoEllipsoid,
    rng: &mut R,
    scale: f64,
) -> Result<BallAutomorphism> {
    let core = random_pseudo_unitary(domain.head(), rng, scale);
    let phases: Vec<f64> = (0..domain.k())
        .map(|_| rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI))
        .collect();
    let g = assemble_bordered(&core, &phases);
    let perms = admissible_permutations(domain);
    let sigma = &perms[rng.gen_range(0..perms.len())];
    let mut perm = sigma.inverse().sigma;
    perm.push(domain.n());
    let m = normalize_det(&g.permute_rows(&perm));
    BallAutomorphism::from_matrix(m, domain.n())
}

/// Same as [`random_extendible`], seeded.
pub fn random_extendible_seeded(domain: &PseudoEllipsoid, seed: u64, scale: f64) -> Result<BallAutomorphism> {
    random_extendible(domain, &mut ChaCha8Rng::seed_from_u64(seed), scale)
}

/// The tail swap `w_a <-> w_b` as an element of SU(n,1) (0-based indices).
pub fn coordinate_swap(n: usize, a: usize, b: usize) -> Result<BallAutomorphism> {
    if a >= n || b >= n || a == b {
        return Err(Error::invalid("swap indices must be distinct coordinates"));
    }
    let mut perm: Vec<usize> = (0..=n).collect();
    perm.swap(a, b);
    let m = normalize_det(&crate::matrix::ComplexMatrix::identity(n + 1).permute_rows(&perm));
    Ok(BallAutomorphism::new(SpecialUnitaryMatrix::certify(m, n, MEMBERSHIP_TOL)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermitian::projective_distance;
    use crate::matrix::{max_dist, ComplexMatrix};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn e2_2() -> PseudoEllipsoid {
        PseudoEllipsoid::new(2, vec![2]).unwrap()
    }

    fn boost() -> BallAutomorphism {
        BallAutomorphism::from_matrix(
            ComplexMatrix::from_real(&[&[1.25, 0.0, 0.75], &[0.0, 1.0, 0.0], &[0.75, 0.0, 1.25]]).unwrap(),
            2,
        )
        .unwrap()
    }

    fn swap_boost() -> BallAutomorphism {
        BallAutomorphism::from_matrix(
            ComplexMatrix::from_real(&[&[1.0, 0.0, 0.0], &[0.0, 1.25, 0.75], &[0.0, 0.75, 1.25]]).unwrap(),
            2,
        )
        .unwrap()
    }

    #[test]
    fn permutations_respect_exponent_groups() {
        let e = PseudoEllipsoid::new(4, vec![2, 3, 2]).unwrap();
        let perms = admissible_permutations(&e);
        assert_eq!(perms.len(), 2);
        assert_eq!(perms[0].as_slice(), &[0, 1, 2, 3]);
        assert_eq!(perms[1].as_slice(), &[0, 3, 2, 1]);
        assert!(PermutationCertificate::new(&e, vec![0, 2, 1, 3]).is_err());
        assert!(PermutationCertificate::new(&e, vec![1, 0, 2, 3]).is_err());
    }

    #[test]
    fn boost_is_extendible_with_identity() {
        let v = check_extendible(&e2_2(), &boost()).unwrap();
        assert!(v.extendible);
        assert!(v.certificate.unwrap().is_identity());
        assert!(v.witness.is_none());
    }

    #[test]
    fn swap_boost_rejected_at_origin() {
        let v = check_extendible(&e2_2(), &swap_boost()).unwrap();
        assert!(!v.extendible);
        let w = v.witness.unwrap();
        assert_eq!(w.index, 1);
        assert!(w.point.iter().all(|z| z.norm() == 0.0));
        assert!((w.violation - 0.6).abs() < 1e-12);
    }

    #[test]
    fn tail_swap_needs_equal_exponents() {
        let swap = coordinate_swap(3, 1, 2).unwrap();
        let v = check_extendible(&PseudoEllipsoid::new(3, vec![2, 2]).unwrap(), &swap).unwrap();
        assert!(v.extendible);
        assert_eq!(v.certificate.unwrap().as_slice(), &[0, 2, 1]);
        let v = check_extendible(&PseudoEllipsoid::new(3, vec![2, 3]).unwrap(), &swap).unwrap();
        assert!(!v.extendible);
    }

    #[test]
    fn boost_lift_examples() {
        let e = e2_2();
        let v = check_extendible(&e, &boost()).unwrap();
        let f = build_lift(&e, &v, &boost(), None).unwrap();
        let w = f.apply(&[c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert!(max_dist(&w, &[c(0.6, 0.0), c(0.0, 0.0)]) < 1e-15);

        let w = f.apply(&[c(0.0, 0.0), c(0.5, 0.0)]).unwrap();
        assert!(max_dist(&w, &[c(0.6, 0.0), c(0.5 / 1.25f64.sqrt(), 0.0)]) < 1e-15);

        let w = f.apply(&[c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert!(max_dist(&w, &[c(0.6, 0.0), c(1.25f64.powf(-0.5), 0.0)]) < 1e-15);
        assert!(e.rho(&w).abs() < 1e-15);

        let w = f.apply(&[c(0.3, 0.2), c(0.0, 0.0)]).unwrap();
        assert_eq!(w[1].norm(), 0.0);
    }

    #[test]
    fn lift_matches_closed_form() {
        // f(z1, z2) = ((z1 + 0.6)/(0.6 z1 + 1), z2 (0.75 z1 + 1.25)^{-1/2})
        let e = e2_2();
        let f = build_lift(&e, &check_extendible(&e, &boost()).unwrap(), &boost(), None).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..50 {
            let z = e.interior_point_with(&mut rng);
            let den = z[0] * 0.75 + 1.25;
            let expected = [(z[0] + 0.6) / (z[0] * 0.6 + 1.0), z[1] / den.sqrt()];
            assert!(max_dist(&f.apply(&z).unwrap(), &expected) < 1e-14);
            // boundary identity 1 - |f1|^2 - |f2|^4 = (1 - |z1|^2 - |z2|^4)/|0.75 z1 + 1.25|^2
            let w = f.apply(&z).unwrap();
            assert!((e.rho(&w) - e.rho(&z) / den.norm_sqr()).abs() < 1e-14);
        }
    }

    #[test]
    fn identity_lift_is_identity() {
        let e = PseudoEllipsoid::new(3, vec![2, 3]).unwrap();
        let id = EllipsoidAutomorphism::identity(&e);
        let z = [c(0.2, 0.1), c(0.3, -0.4), c(-0.5, 0.2)];
        assert!(max_dist(&id.apply(&z).unwrap(), &z) < 1e-15);
        assert!(projective_distance(id.associated_ball_automorphism().matrix(), &ComplexMatrix::identity(4), 3) < 1e-15);
    }

    #[test]
    fn lift_rejects_outside_and_non_extendible() {
        let e = e2_2();
        let f = build_lift(&e, &check_extendible(&e, &boost()).unwrap(), &boost(), None).unwrap();
        assert!(f.apply(&[c(0.9, 0.0), c(0.9, 0.0)]).is_err());
        let v = check_extendible(&e, &swap_boost()).unwrap();
        assert!(build_lift(&e, &v, &swap_boost(), None).is_err());
    }

    #[test]
    fn associated_round_trip() {
        let e = e2_2();
        let f = build_lift(&e, &check_extendible(&e, &boost()).unwrap(), &boost(), None).unwrap();
        assert!(projective_distance(f.associated_ball_automorphism().matrix(), boost().matrix(), 2) < 1e-14);
    }

    #[test]
    fn explicit_phases_change_associated() {
        let e = e2_2();
        let v = check_extendible(&e, &boost()).unwrap();
        let f = build_lift(&e, &v, &boost(), Some(&[0.4])).unwrap();
        let assoc = f.associated_ball_automorphism();
        let w = assoc.apply(&[c(0.0, 0.0), c(0.5, 0.0)]).unwrap();
        assert!((w[1] - Complex64::from_polar(0.4, 0.8)).norm() < 1e-14);
        assert!(build_lift(&e, &v, &boost(), Some(&[0.1, 0.2])).is_err());
    }

    #[test]
    fn compose_with_inverse_is_identity() {
        let e = PseudoEllipsoid::new(3, vec![2, 2]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..10 {
            let ft = random_extendible(&e, &mut rng, 0.4).unwrap();
            let f = build_lift(&e, &check_extendible(&e, &ft).unwrap(), &ft, None).unwrap();
            let finv = invert_lift(&f).unwrap();
            let id = compose_lifts(&f, &finv).unwrap();
            for _ in 0..10 {
                let z = e.interior_point_with(&mut rng);
                assert!(max_dist(&id.apply(&z).unwrap(), &z) < 1e-9);
            }
        }
    }

    #[test]
    fn verdict_json_round_trip() {
        let e = e2_2();
        for ft in [boost(), swap_boost()] {
            let v = check_extendible(&e, &ft).unwrap();
            let text = v.to_json().to_string();
            assert_eq!(ExtendibilityVerdict::from_json(&text).unwrap(), v);
        }
        let v = check_extendible(&e, &boost()).unwrap();
        assert_eq!(v.to_json()["sigma"], serde_json::json!([1, 2]));
        assert!(v.to_json()["witness"].is_null());
    }
}
