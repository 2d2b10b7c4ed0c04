//! Randomized property suites over a single domain, as run by `pseudoell verify`.

use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::ball::BallAutomorphism;
use crate::charts::{non_extendibility_witness, WitnessOutcome};
use crate::domain::{BoundaryClass, PseudoEllipsoid, COORD_ZERO_TOL};
use crate::error::Result;
use crate::hermitian::{membership_defects, projective_distance, random_ball_point, random_group_element_with};
use crate::lift::{build_lift, check_extendible, coordinate_swap, random_extendible};
use crate::matrix::{max_dist, norm_sq};

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub name: &'static str,
    pub passed: bool,
    /// Worst residual observed (or failure count, for counting suites).
    pub measured: f64,
    pub threshold: f64,
    pub samples: usize,
    pub elapsed_ms: f64,
    /// Set when the suite has nothing to check on this domain.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vacuous: Option<String>,
}

#[derive(Debug, Clone, Copy)]
pub struct VerifyConfig {
    pub seed: u64,
    /// Multiplies the default sample counts.
    pub full: bool,
}

impl VerifyConfig {
    fn count(&self, quick: usize, full: usize) -> usize {
        if self.full {
            full
        } else {
            quick
        }
    }
}

struct Measure {
    worst: f64,
    samples: usize,
}

impl Measure {
    fn new() -> Self {
        Self { worst: 0.0, samples: 0 }
    }

    fn see(&mut self, v: f64) {
        self.samples += 1;
        // NaN counts as a failure
        self.worst = if v.is_nan() { f64::INFINITY } else { self.worst.max(v) };
    }
}

fn run(name: &'static str, threshold: f64, body: impl FnOnce() -> Result<Measure>) -> SuiteReport {
    let start = Instant::now();
    let (measured, samples) = match body() {
        Ok(m) => (m.worst, m.samples),
        Err(_) => (f64::INFINITY, 0),
    };
    SuiteReport {
        name,
        passed: measured <= threshold,
        measured,
        threshold,
        samples,
        elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
        vacuous: None,
    }
}

fn vacuous(name: &'static str, threshold: f64, why: &str) -> SuiteReport {
    SuiteReport {
        name,
        passed: true,
        measured: 0.0,
        threshold,
        samples: 0,
        elapsed_ms: 0.0,
        vacuous: Some(why.to_string()),
    }
}

pub fn run_all(domain: &PseudoEllipsoid, cfg: VerifyConfig) -> Vec<SuiteReport> {
    let n = domain.n();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut out = Vec::new();

    out.push(run("group", 1e-9, || {
        let mut m = Measure::new();
        for _ in 0..cfg.count(200, 1000) {
            let a = random_group_element_with(n, &mut rng, 0.5)?;
            let b = random_group_element_with(n, &mut rng, 0.5)?;
            let (u, d) = membership_defects(&(a.matrix() * b.matrix()), n);
            m.see(u.max(d));
            let back = a.mul(&a.inverse(), 1e-9)?;
            m.see(projective_distance(back.matrix(), &crate::matrix::ComplexMatrix::identity(n + 1), n));
        }
        Ok(m)
    }));

    out.push(run("ball-preservation", 1e-9, || {
        let mut m = Measure::new();
        for _ in 0..cfg.count(200, 1000) {
            let f = BallAutomorphism::new(random_group_element_with(n, &mut rng, 0.5)?);
            let z = random_ball_point(n, &mut rng);
            let w = f.apply(&z)?;
            let r = f.last_row();
            let den: Complex64 = z.iter().zip(r).map(|(a, b)| a * b).sum::<Complex64>() + r[n];
            m.see(((1.0 - norm_sq(&w)) * den.norm_sqr() - (1.0 - norm_sq(&z))).abs());
        }
        Ok(m)
    }));

    if domain.k() == 0 {
        out.push(vacuous("protected-hyperplanes", 1e-9, "no tail coordinates"));
    } else {
        out.push(run("protected-hyperplanes", 1e-9, || {
            let mut m = Measure::new();
            for _ in 0..cfg.count(40, 200) {
                let f = random_extendible(domain, &mut rng, 0.5)?;
                let sigma = check_extendible(domain, &f)?.certificate;
                let g = match sigma {
                    Some(s) => s.compose_ball(&f)?,
                    None => {
                        m.see(f64::INFINITY);
                        continue;
                    }
                };
                for i in domain.tail_indices() {
                    for _ in 0..cfg.count(20, 100) {
                        let mut s = random_ball_point(n, &mut rng);
                        s[i] = Complex64::new(0.0, 0.0);
                        m.see(g.apply(&s)?[i].norm());
                    }
                }
            }
            Ok(m)
        }));
    }

    let lifts = cfg.count(10, 50);
    let per_lift = cfg.count(40, 200);
    out.push(run("functional-equation", 1e-9, || {
        let mut m = Measure::new();
        for _ in 0..lifts {
            let ft = random_extendible(domain, &mut rng, 0.5)?;
            let f = build_lift(domain, &check_extendible(domain, &ft)?, &ft, None)?;
            for _ in 0..per_lift {
                let z = domain.interior_point_with(&mut rng);
                let lhs = domain.covering_map(&f.apply(&z)?);
                let rhs = ft.apply(&domain.covering_map(&z))?;
                m.see(max_dist(&lhs, &rhs));
            }
        }
        Ok(m)
    }));

    out.push(run("boundary-preservation", 1e-8, || {
        let mut m = Measure::new();
        for _ in 0..lifts {
            let ft = random_extendible(domain, &mut rng, 0.5)?;
            let f = build_lift(domain, &check_extendible(domain, &ft)?, &ft, None)?;
            for _ in 0..per_lift {
                let b = domain.boundary_point_with(&mut rng);
                m.see(domain.rho(&f.apply(&b)?).abs());
                let z = domain.interior_point_with(&mut rng);
                if domain.rho(&z) < 0.0 && domain.rho(&f.apply(&z)?) >= 0.0 {
                    m.see(f64::INFINITY);
                }
            }
        }
        Ok(m)
    }));

    if domain.k() == 0 {
        out.push(vacuous("levi-degeneracy", 0.0, "no degenerate boundary points"));
    } else {
        out.push(run("levi-degeneracy", 0.0, || {
            let mut m = Measure::new();
            let count = cfg.count(100, 500);
            let mut points = domain.sample_boundary(rng.gen(), count / 2);
            for i in domain.tail_indices() {
                points.extend(domain.sample_boundary_on_hyperplane(rng.gen(), count / (2 * domain.k()), i));
            }
            for z in points {
                let report = domain.classify_boundary(&z)?;
                let expect = domain.tail_indices().any(|i| z[i].norm() <= COORD_ZERO_TOL);
                let got = report.classification == BoundaryClass::LeviDegenerate;
                m.see(if expect == got && report.eigenvalue_agrees { 0.0 } else { 1.0 });
            }
            Ok(m)
        }));
    }

    out.push(run("jacobian", 1e-6, || {
        let mut m = Measure::new();
        let h = 1e-5;
        let mut seen = 0;
        while seen < cfg.count(50, 100) {
            let z = random_ball_point(n, &mut rng);
            if domain.tail_indices().any(|i| z[i].norm() < 0.1) {
                continue;
            }
            seen += 1;
            let mut prod = Complex64::new(1.0, 0.0);
            for i in domain.tail_indices() {
                let mut zp = z.clone();
                let mut zm = z.clone();
                zp[i] += h;
                zm[i] -= h;
                let d = (domain.covering_map(&zp)[i] - domain.covering_map(&zm)[i]) / (2.0 * h);
                prod *= d;
            }
            let exact = domain.covering_jacobian(&z);
            m.see((exact - prod).norm() / exact.norm());
        }
        Ok(m)
    }));

    out.push(run("lift-round-trip", 1e-9, || {
        let mut m = Measure::new();
        for _ in 0..lifts {
            let ft = random_extendible(domain, &mut rng, 0.5)?;
            let f = build_lift(domain, &check_extendible(domain, &ft)?, &ft, None)?;
            m.see(projective_distance(f.associated_ball_automorphism().matrix(), ft.matrix(), n));
        }
        Ok(m)
    }));

    if domain.k() < 2 {
        out.push(vacuous("tail-swap", 0.0, "fewer than two tail coordinates"));
    } else {
        out.push(run("tail-swap", 0.0, || {
            let mut m = Measure::new();
            let (a, b) = (domain.head(), domain.head() + 1);
            let swap = coordinate_swap(n, a, b)?;
            let expect = domain.exponent_of(a) == domain.exponent_of(b);
            let v1 = check_extendible(domain, &swap)?;
            let v2 = check_extendible(domain, &swap)?;
            m.see(if v1.extendible == expect && v1 == v2 { 0.0 } else { 1.0 });
            Ok(m)
        }));
    }

    if domain.k() == 0 {
        out.push(vacuous("monodromy", 1e-9, "every automorphism extends"));
        out.push(vacuous("witness-consistency", 0.0, "every automorphism extends"));
    } else {
        out.push(run("monodromy", 1e-9, || {
            let mut m = Measure::new();
            for _ in 0..cfg.count(3, 10) {
                let ft = BallAutomorphism::new(random_group_element_with(n, &mut rng, 0.5)?);
                if let WitnessOutcome::Found(r) = non_extendibility_witness(domain, &ft)? {
                    for mono in &r.all {
                        let p = domain.exponent_of(mono.tail_index) as i32;
                        m.see((mono.factor.powi(p) - 1.0).norm());
                        m.see((mono.factor.norm() - 1.0).abs() * 10.0);
                    }
                }
            }
            Ok(m)
        }));
        out.push(run("witness-consistency", 0.0, || {
            let mut m = Measure::new();
            for t in 0..cfg.count(10, 20) {
                let ft = if t % 2 == 0 {
                    random_extendible(domain, &mut rng, 0.5)?
                } else {
                    BallAutomorphism::new(random_group_element_with(n, &mut rng, 0.5)?)
                };
                let extendible = check_extendible(domain, &ft)?.extendible;
                let ok = match non_extendibility_witness(domain, &ft)? {
                    WitnessOutcome::None => extendible,
                    WitnessOutcome::Found(_) => !extendible,
                    WitnessOutcome::Inconclusive(_) => false,
                };
                m.see(if ok { 0.0 } else { 1.0 });
            }
            Ok(m)
        }));
    }
    out
}
