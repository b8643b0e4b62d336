//! Randomized invariants of the linear-algebra and spectral-measure layers.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qminimax::operator::{
    operator_in_basis, random_density_with, random_hermitian, random_unitary, spectral_decompose,
    trace_norm, CMatrix, CVector, HermitianOperator, C64,
};
use qminimax::spectral::{cdf, difference, spectral_masses, total_variation};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random Hermitian operator, sometimes with repeated eigenvalues.
fn operator(seed: u64, dim: usize) -> HermitianOperator {
    let mut r = rng(seed);
    if r.gen_bool(0.5) {
        random_hermitian(&mut r, dim)
    } else {
        let levels: Vec<f64> = (0..dim).map(|_| r.gen_range(-2..=2) as f64).collect();
        operator_in_basis(&random_unitary(&mut r, dim), &levels).unwrap()
    }
}

fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn decomposition_reconstructs(seed in any::<u64>(), dim in 1usize..=6) {
        let a = operator(seed, dim);
        let d = spectral_decompose(&a, None).unwrap();
        let err = frobenius(&(d.reconstruct() - a.matrix()));
        prop_assert!(err <= 1e-10 * (1.0 + frobenius(a.matrix())), "{err}");
        let manual = d
            .projectors()
            .iter()
            .zip(d.eigenvalues())
            .fold(CMatrix::zeros(dim, dim), |acc, (p, &l)| acc + p * C64::new(l, 0.0));
        prop_assert!(frobenius(&(manual - a.matrix())) <= 1e-10 * (1.0 + frobenius(a.matrix())));
    }

    #[test]
    fn projectors_are_complete_and_orthogonal(seed in any::<u64>(), dim in 1usize..=6) {
        let d = spectral_decompose(&operator(seed, dim), None).unwrap();
        let id = CMatrix::identity(dim, dim);
        let sum = d.projectors().iter().fold(CMatrix::zeros(dim, dim), |acc, p| acc + p);
        prop_assert!(frobenius(&(sum - &id)) <= 1e-10);
        let mut total_rank = 0;
        for (i, p) in d.projectors().iter().enumerate() {
            total_rank += d.multiplicity(i);
            prop_assert!(frobenius(&(p.adjoint() - p)) <= 1e-10);
            for (j, q) in d.projectors().iter().enumerate() {
                let want = if i == j { p.clone() } else { CMatrix::zeros(dim, dim) };
                prop_assert!(frobenius(&(p * q - want)) <= 1e-10, "P{i} P{j}");
            }
        }
        prop_assert_eq!(total_rank, dim);
        prop_assert!(d.eigenvalues().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn trace_norm_is_a_norm(seed in any::<u64>(), dim in 1usize..=6) {
        let mut r = rng(seed);
        let (a, b) = (random_hermitian(&mut r, dim), random_hermitian(&mut r, dim));
        let (na, nb) = (trace_norm(a.matrix()).unwrap(), trace_norm(b.matrix()).unwrap());
        let sum = trace_norm(&(a.matrix() + b.matrix())).unwrap();
        prop_assert!(na >= 0.0 && nb >= 0.0);
        prop_assert!(sum <= na + nb + 1e-9);
        prop_assert!(trace_norm(&(a.matrix() - a.matrix())).unwrap() == 0.0);
        let s: f64 = r.gen_range(-3.0..3.0);
        let scaled = trace_norm(&(a.matrix() * C64::new(s, 0.0))).unwrap();
        prop_assert!((scaled - s.abs() * na).abs() <= 1e-10 * (1.0 + na));

        let rho1 = random_density_with(&mut r, dim).unwrap();
        let rho2 = random_density_with(&mut r, dim).unwrap();
        let rho3 = random_density_with(&mut r, dim).unwrap();
        let d12 = rho1.distance(&rho2).unwrap();
        let d23 = rho2.distance(&rho3).unwrap();
        let d13 = rho1.distance(&rho3).unwrap();
        prop_assert!(d13 <= d12 + d23 + 1e-9);
        prop_assert!(d12 <= 2.0 + 1e-12);
        prop_assert!(rho1.distance(&rho1).unwrap() <= 1e-10);
    }

    #[test]
    fn rayleigh_quotients_respect_lower_bound(seed in any::<u64>(), dim in 1usize..=6) {
        let a = operator(seed, dim);
        let d = spectral_decompose(&a, None).unwrap();
        let mut r = rng(seed ^ 0x5eed);
        let mut least = f64::INFINITY;
        for _ in 0..500 {
            let v = CVector::from_fn(dim, |_, _| C64::new(r.gen::<f64>() - 0.5, r.gen::<f64>() - 0.5));
            let v = &v / C64::new(v.norm(), 0.0);
            let q = v.dotc(&(a.matrix() * &v)).re;
            least = least.min(q);
            prop_assert!(q <= d.upper_bound() + 1e-9);
        }
        prop_assert!(least >= d.lower_bound() - 1e-9, "{least} < {}", d.lower_bound());
    }

    #[test]
    fn cdf_is_a_distribution_function(seed in any::<u64>(), dim in 1usize..=6) {
        let a = operator(seed, dim);
        let d = spectral_decompose(&a, None).unwrap();
        let rho = random_density_with(&mut rng(seed.wrapping_add(1)), dim).unwrap();
        let m = spectral_masses(&rho, &d).unwrap();
        prop_assert!(m.masses().iter().all(|&w| w >= -1e-12));
        let (lo, hi) = (d.lower_bound(), d.upper_bound());
        prop_assert!((cdf(&m, hi) - 1.0).abs() <= 1e-10);
        prop_assert_eq!(cdf(&m, lo - 1.0), 0.0);
        let mut prev = 0.0;
        for k in 0..=200 {
            let x = lo - 0.5 + (hi - lo + 1.0) * k as f64 / 200.0;
            let f = cdf(&m, x);
            prop_assert!(f >= prev - 1e-15, "cdf decreased at {x}");
            prev = f;
        }
    }

    #[test]
    fn masses_are_linear_in_the_state(seed in any::<u64>(), dim in 1usize..=6, t in 0.0f64..=1.0) {
        let d = spectral_decompose(&operator(seed, dim), None).unwrap();
        let mut r = rng(seed.wrapping_mul(3));
        let (rho1, rho2) = (random_density_with(&mut r, dim).unwrap(), random_density_with(&mut r, dim).unwrap());
        // mix(other, t) = (1 - t) self + t other
        let mixed = spectral_masses(&rho2.mix(&rho1, t).unwrap(), &d).unwrap();
        let (m1, m2) = (spectral_masses(&rho1, &d).unwrap(), spectral_masses(&rho2, &d).unwrap());
        for i in 0..d.len() {
            let want = t * m1.masses()[i] + (1.0 - t) * m2.masses()[i];
            prop_assert!((mixed.masses()[i] - want).abs() <= 1e-10);
        }
    }

    #[test]
    fn total_variation_below_trace_distance(seed in any::<u64>(), dim in 1usize..=6) {
        let d = spectral_decompose(&operator(seed, dim), None).unwrap();
        let mut r = rng(!seed);
        let (phi1, phi2) = (random_density_with(&mut r, dim).unwrap(), random_density_with(&mut r, dim).unwrap());
        let diff = difference(&spectral_masses(&phi1, &d).unwrap(), &spectral_masses(&phi2, &d).unwrap());
        let tv = total_variation(&diff);
        prop_assert!(tv <= trace_norm(&(phi1.matrix() - phi2.matrix())).unwrap() + 1e-9);
        prop_assert!(diff.total_mass().abs() <= 1e-10);
    }
}
