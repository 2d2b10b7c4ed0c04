use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pseudoell::ball::BallAutomorphism;
use pseudoell::charts::{make_chart, non_extendibility_witness, WitnessOutcome};
use pseudoell::domain::PseudoEllipsoid;
use pseudoell::hermitian::{
    check_membership, projective_distance, projectively_equal, pseudo_inner, random_ball_point,
    random_group_element, random_group_element_with, MatrixFile, SignatureForm,
};
use pseudoell::lift::{build_lift, check_extendible, compose_lifts, invert_lift, random_extendible, ExtendibilityVerdict};
use pseudoell::matrix::{max_dist, norm_sq, ComplexMatrix};

fn member(n: usize, seed: u64) -> BallAutomorphism {
    BallAutomorphism::new(random_group_element(n, seed, 0.6).unwrap())
}

fn domain_strategy() -> impl Strategy<Value = PseudoEllipsoid> {
    (1usize..=4)
        .prop_flat_map(|n| (Just(n), prop::collection::vec(2u32..=4, 0..=n)))
        .prop_map(|(n, p)| PseudoEllipsoid::new(n, p).unwrap())
}

fn proper_domain_strategy() -> impl Strategy<Value = PseudoEllipsoid> {
    domain_strategy().prop_filter("needs a tail", |d| d.k() > 0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn closure_and_inverse(n in 1usize..=4, s1 in any::<u64>(), s2 in any::<u64>()) {
        let a = random_group_element(n, s1, 0.6).unwrap();
        let b = random_group_element(n, s2, 0.6).unwrap();
        let prod = a.matrix() * b.matrix();
        let accepted = check_membership(&prod, n, 1e-9).unwrap();
        prop_assert!(accepted.is_ok());
        let inv = a.form().adjoint(a.matrix());
        let id = a.matrix() * &inv;
        prop_assert!((&id - &ComplexMatrix::identity(n + 1)).max_abs() <= 1e-9);
    }

    #[test]
    fn form_is_invariant(n in 1usize..=4, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_group_element_with(n, &mut rng, 0.6).unwrap();
        let w: Vec<Complex64> = (0..=n).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let z: Vec<Complex64> = (0..=n).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let form = SignatureForm::new(n);
        let before = pseudo_inner(&w, &z, form).unwrap();
        let after = pseudo_inner(&a.matrix().mul_vec(&w), &a.matrix().mul_vec(&z), form).unwrap();
        prop_assert!((before - after).norm() <= 1e-9 * (1.0 + a.matrix().max_abs().powi(2)));
    }

    #[test]
    fn projective_equality_is_an_equivalence(n in 1usize..=3, seed in any::<u64>(), k1 in 0usize..4, k2 in 0usize..4) {
        let a = random_group_element(n, seed, 0.6).unwrap();
        let w = |k: usize| Complex64::from_polar(1.0, 2.0 * PI * (k % (n + 1)) as f64 / (n + 1) as f64);
        let b = pseudoell::SpecialUnitaryMatrix::certify(a.matrix().scale(w(k1)), n, 1e-9).unwrap();
        let c = pseudoell::SpecialUnitaryMatrix::certify(b.matrix().scale(w(k2)), n, 1e-9).unwrap();
        prop_assert!(projectively_equal(&a, &a, 1e-12).unwrap());
        prop_assert!(projectively_equal(&a, &b, 1e-12).unwrap() && projectively_equal(&b, &a, 1e-12).unwrap());
        prop_assert!(projectively_equal(&b, &c, 1e-12).unwrap() && projectively_equal(&a, &c, 1e-12).unwrap());
        let other = random_group_element(n, seed ^ 0x5555, 0.6).unwrap();
        prop_assert_eq!(
            projectively_equal(&a, &other, 1e-9).unwrap(),
            projectively_equal(&other, &a, 1e-9).unwrap()
        );
    }

    #[test]
    fn ball_identity(n in 1usize..=4, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = BallAutomorphism::new(random_group_element_with(n, &mut rng, 0.6).unwrap());
        let z = random_ball_point(n, &mut rng);
        let w = f.apply(&z).unwrap();
        let r = f.last_row();
        let den: Complex64 = z.iter().zip(r).map(|(a, b)| a * b).sum::<Complex64>() + r[n];
        prop_assert!(((1.0 - norm_sq(&w)) - (1.0 - norm_sq(&z)) / den.norm_sqr()).abs() <= 1e-9);
    }

    #[test]
    fn composition_is_associative(n in 1usize..=4, s in any::<u64>()) {
        let (a, b, c) = (member(n, s), member(n, s.wrapping_add(1)), member(n, s.wrapping_add(2)));
        let left = a.compose(&b).unwrap().compose(&c).unwrap();
        let right = a.compose(&b.compose(&c).unwrap()).unwrap();
        prop_assert!(projective_distance(left.matrix(), right.matrix(), n) <= 1e-8);
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let z = random_ball_point(n, &mut rng);
        let stepwise = a.apply(&b.apply(&z).unwrap()).unwrap();
        prop_assert!(max_dist(&a.compose(&b).unwrap().apply(&z).unwrap(), &stepwise) <= 1e-9);
    }

    #[test]
    fn block_decomposition_matches_sampling(d in proper_domain_strategy(), seed in any::<u64>(), perturb in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut f = random_extendible(&d, &mut rng, 0.6).unwrap();
        if let Some(c) = check_extendible(&d, &f).unwrap().certificate {
            f = c.compose_ball(&f).unwrap();
        }
        if perturb {
            f = f.compose(&BallAutomorphism::new(random_group_element_with(d.n(), &mut rng, 0.4).unwrap())).unwrap();
        }
        let structural = f.decompose_block(d.k());
        let mut sampled_ok = true;
        for i in d.tail_indices() {
            let (violation, _) = f.hyperplane_violation(i, 100, 1e-9, &mut rng);
            sampled_ok &= violation <= 1e-9;
        }
        prop_assert_eq!(structural.is_ok(), sampled_ok);
        if let Ok(block) = structural {
            let c2: f64 = block.c.iter().map(|x| x.norm_sqr()).sum();
            prop_assert!((block.d.norm_sqr() - c2 - 1.0).abs() <= 1e-9);
            for _ in 0..10 {
                let z = random_ball_point(d.n(), &mut rng);
                prop_assert!(max_dist(&block.apply(&z), &f.apply(&z).unwrap()) <= 1e-10);
            }
        }
    }

    #[test]
    fn rho_is_covering_norm(d in domain_strategy(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let z: Vec<Complex64> = (0..d.n()).map(|_| Complex64::new(rng.gen_range(-1.2..1.2), rng.gen_range(-1.2..1.2))).collect();
        prop_assert!((d.rho(&z) - (norm_sq(&d.covering_map(&z)) - 1.0)).abs() <= 1e-12 * (1.0 + norm_sq(&d.covering_map(&z))));
        let j = d.covering_jacobian(&z);
        let on_locus = d.tail_indices().any(|i| z[i].norm() <= 1e-12);
        prop_assert_eq!(j.norm() <= 1e-12, on_locus);
    }

    #[test]
    fn classification_is_consistent(d in proper_domain_strategy(), seed in any::<u64>(), force in any::<bool>()) {
        prop_assume!(d.n() >= 2);
        let z = if force {
            d.sample_boundary_on_hyperplane(seed, 1, d.head()).pop().unwrap()
        } else {
            d.sample_boundary(seed, 1).pop().unwrap()
        };
        let report = d.classify_boundary(&z).unwrap();
        prop_assert!(report.eigenvalue_agrees);
        prop_assert!(report.hermitian_defect <= 1e-12);
        prop_assert_eq!(
            report.classification == pseudoell::BoundaryClass::LeviDegenerate,
            d.tail_indices().any(|i| z[i].norm() <= 1e-12)
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn lift_functional_equation(d in domain_strategy(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ft = random_extendible(&d, &mut rng, 0.6).unwrap();
        let verdict = check_extendible(&d, &ft).unwrap();
        prop_assert!(verdict.extendible);
        let f = build_lift(&d, &verdict, &ft, None).unwrap();
        for _ in 0..20 {
            let z = d.interior_point_with(&mut rng);
            let w = f.apply(&z).unwrap();
            prop_assert!(max_dist(&d.covering_map(&w), &ft.apply(&d.covering_map(&z)).unwrap()) <= 1e-9);
            prop_assert!(d.rho(&w) < 0.0);
            let b = d.boundary_point_with(&mut rng);
            prop_assert!(d.rho(&f.apply(&b).unwrap()).abs() <= 1e-8);
        }
        let again = check_extendible(&d, &f.associated_ball_automorphism()).unwrap();
        prop_assert_eq!(again.certificate, verdict.certificate);
    }

    #[test]
    fn lift_branch_is_continuous(d in proper_domain_strategy(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ft = random_extendible(&d, &mut rng, 0.8).unwrap();
        let f = build_lift(&d, &check_extendible(&d, &ft).unwrap(), &ft, None).unwrap();
        let a = d.interior_point_with(&mut rng);
        let b = d.interior_point_with(&mut rng);
        let len = max_dist(&a, &b).max(1e-3);
        let steps = (len / 1e-2).ceil() as usize;
        for j in 0..d.k() {
            let p = d.exponents()[j] as f64;
            let mut prev = f.root_factor(j, &a);
            for s in 1..=steps {
                let t = s as f64 / steps as f64;
                let z: Vec<Complex64> = a.iter().zip(&b).map(|(x, y)| x + (y - x) * t).collect();
                let cur = f.root_factor(j, &z);
                prop_assert!((cur / prev).arg().abs() < PI / p);
                prev = cur;
            }
        }
    }

    #[test]
    fn composition_and_inverse_of_lifts(d in proper_domain_strategy(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lift = |rng: &mut ChaCha8Rng| {
            let ft = random_extendible(&d, rng, 0.5).unwrap();
            build_lift(&d, &check_extendible(&d, &ft).unwrap(), &ft, None).unwrap()
        };
        let f = lift(&mut rng);
        let g = lift(&mut rng);
        let fg = compose_lifts(&f, &g).unwrap();
        let finv = invert_lift(&f).unwrap();
        for _ in 0..10 {
            let z = d.interior_point_with(&mut rng);
            prop_assert!(max_dist(&fg.apply(&z).unwrap(), &f.apply(&g.apply(&z).unwrap()).unwrap()) <= 1e-9);
            prop_assert!(max_dist(&f.apply(&finv.apply(&z).unwrap()).unwrap(), &z) <= 1e-9);
        }
    }

    #[test]
    fn no_sigma_mixes_exponents(seed in any::<u64>(), perturb in any::<bool>()) {
        let d = PseudoEllipsoid::new(4, vec![2, 3, 2]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut f = random_extendible(&d, &mut rng, 0.5).unwrap();
        if perturb {
            f = f.compose(&BallAutomorphism::new(random_group_element_with(4, &mut rng, 0.3).unwrap())).unwrap();
        }
        if let Some(c) = check_extendible(&d, &f).unwrap().certificate {
            for (i, &s) in c.as_slice().iter().enumerate() {
                prop_assert_eq!(d.exponent_of(i), d.exponent_of(s));
            }
        }
    }

    #[test]
    fn chart_functional_equation_and_injectivity(d in proper_domain_strategy(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ft = BallAutomorphism::new(random_group_element_with(d.n(), &mut rng, 0.6).unwrap());
        let base = d.interior_point_with(&mut rng);
        let chart = make_chart(&d, &ft, &base, 0.05);
        prop_assume!(chart.is_ok());
        let chart = chart.unwrap();
        let mut images = Vec::new();
        for _ in 0..20 {
            let dir = pseudoell::hermitian::random_unit_vector(d.n(), &mut rng);
            let r = rng.gen_range(0.0..0.049);
            let z: Vec<Complex64> = base.iter().zip(&dir).map(|(b, u)| b + u * r).collect();
            if d.rho(&z) > 0.0 {
                continue;
            }
            let w = chart.eval_local(&z).unwrap();
            prop_assert!(max_dist(&d.covering_map(&w), &ft.apply(&d.covering_map(&z)).unwrap()) <= 1e-10);
            images.push((z, w));
        }
        for (i, (z1, w1)) in images.iter().enumerate() {
            for (z2, w2) in &images[i + 1..] {
                if max_dist(z1, z2) >= 1e-6 {
                    prop_assert!(max_dist(w1, w2) > 0.0);
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn monodromy_is_quantized(d in proper_domain_strategy(), seed in any::<u64>()) {
        let ft = BallAutomorphism::new(random_group_element(d.n(), seed, 0.6).unwrap());
        let extendible = check_extendible(&d, &ft).unwrap().extendible;
        match non_extendibility_witness(&d, &ft).unwrap() {
            WitnessOutcome::Found(report) => {
                prop_assert!(!extendible);
                for m in &report.all {
                    let p = d.exponent_of(m.tail_index);
                    prop_assert!((m.factor.norm() - 1.0).abs() <= 1e-10);
                    prop_assert!((m.factor.powu(p) - 1.0).norm() <= 1e-9);
                    let expected = Complex64::from_polar(1.0, 2.0 * PI * m.winding as f64 / p as f64);
                    prop_assert!((m.factor - expected).norm() <= 1e-9);
                }
            }
            WitnessOutcome::None => prop_assert!(extendible),
            WitnessOutcome::Inconclusive(why) => prop_assert!(false, "inconclusive: {}", why),
        }
    }

    #[test]
    fn json_round_trips(d in domain_strategy(), seed in any::<u64>()) {
        let text = serde_json::to_string(&d).unwrap();
        prop_assert_eq!(PseudoEllipsoid::from_json(&text).unwrap(), d.clone());

        let a = random_group_element(d.n(), seed, 0.6).unwrap();
        let file = MatrixFile::from_matrix(d.n(), a.matrix());
        let back = MatrixFile::parse(&serde_json::to_string(&file).unwrap()).unwrap();
        prop_assert_eq!(&back, &file);
        prop_assert_eq!(back.to_matrix().unwrap(), a.matrix().clone());

        let v = check_extendible(&d, &BallAutomorphism::new(a)).unwrap();
        let parsed = ExtendibilityVerdict::from_json(&v.to_json().to_string()).unwrap();
        prop_assert_eq!(parsed, v);
    }
}
