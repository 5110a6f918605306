use cknsym::codes::{distinct_guaranteed, euclid_reduce, gcd, Code, Codeword};
use cknsym::variational::{FiniteSubgroup, Functional, Grid, GridField, ProblemParams};
use cknsym::{Regime, SymmetryConfig, SymmetryGroup};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::OnceLock;

fn configs() -> Vec<SymmetryConfig> {
    [
        (4, 0, vec![1]),
        (6, 0, vec![0, 1]),
        (8, 0, vec![2, 0, 0]),
        (8, 1, vec![1, 0, 0]),
        (9, 2, vec![1, 0, 0]),
        (12, 0, vec![1, 0, 1, 0, 0]),
    ]
    .into_iter()
    .map(|(n, a, m)| SymmetryConfig::unchecked(n, a, m, Regime::ALessB))
    .collect()
}

fn random_field(grid: &Grid, rng: &mut ChaCha8Rng) -> GridField {
    let values = grid.interior_mask().iter().map(|&m| if m { rng.random_range(-1.0..1.0) } else { 0.0 }).collect();
    GridField::new(grid, values).unwrap()
}

type ProjectionCase = (FiniteSubgroup, Grid, Functional);

// building the finite subgroup dominates, so each case is built once
fn projection_cases() -> &'static [ProjectionCase] {
    static CASES: OnceLock<Vec<ProjectionCase>> = OnceLock::new();
    CASES.get_or_init(|| {
        [(4, vec![1]), (6, vec![0, 1])]
            .into_iter()
            .map(|(n, m)| {
                let cfg = SymmetryConfig::new(n, 0, m, Regime::AEqBZero).unwrap();
                let sub = FiniteSubgroup::new(&SymmetryGroup::new(&cfg).unwrap()).unwrap();
                let grid = Grid::unit(n, 5).unwrap();
                let f = Functional::new(&ProblemParams::new(n, 2.0, 0.0, 0.0).unwrap(), &grid).unwrap();
                (sub, grid, f)
            })
            .collect()
    })
}

fn word(t: usize, bits: u64) -> Codeword {
    Codeword::new(t, bits & ((1u64 << t) - 1)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn group_axioms(idx in 0usize..6, seed in any::<u64>()) {
        let g = SymmetryGroup::for_group(&configs()[idx]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b, c) = (g.random(&mut rng), g.random(&mut rng), g.random(&mut rng));
        let left = a.compose(&b).unwrap().compose(&c).unwrap().to_matrix();
        let right = a.compose(&b.compose(&c).unwrap()).unwrap().to_matrix();
        prop_assert!((left - right).abs().max() < 1e-10);
        prop_assert!(a.compose(&a.inverse()).unwrap().is_identity(1e-10));
        prop_assert!(a.compose(&g.identity()).unwrap().approx_eq(&a, 1e-12));
        prop_assert_eq!(a.compose(&b).unwrap().phi(), a.phi() * b.phi());
        let m = a.to_matrix();
        let n = m.nrows();
        prop_assert!((m.transpose() * &m - nalgebra::DMatrix::<f64>::identity(n, n)).abs().max() < 1e-10);
    }

    #[test]
    fn closure_is_least_code(t in 2usize..=9, seeds in prop::collection::vec(any::<u64>(), 1..4)) {
        let seeds: Vec<Codeword> = seeds.into_iter().map(|b| word(t, b)).collect();
        let code = Code::closure(t, seeds.clone()).unwrap();
        prop_assert!(code.is_code(), "{:?}", code.axiom_violations());
        for s in &seeds {
            prop_assert!(code.contains(s));
        }
        let again = Code::closure(t, code.words().copied()).unwrap();
        prop_assert_eq!(again.size(), code.size());
    }

    #[test]
    fn euclid_steps_stay_in_closure(t in 2usize..=12, r in 1usize..12, s in 2usize..=12) {
        prop_assume!(r < s && s <= t && gcd(r, s) == 1);
        let trace = euclid_reduce(t, r, s).unwrap();
        let code = Code::closure(t, [Codeword::leading_ones(t, r).unwrap(), Codeword::leading_ones(t, s).unwrap()]).unwrap();
        for step in &trace.steps {
            prop_assert!(step.is_valid());
            prop_assert!(code.contains(&step.result));
        }
        prop_assert_eq!(trace.result, Codeword::leading_ones(t, 1).unwrap());
        prop_assert_eq!(*trace.remainders.last().unwrap(), 1);
    }

    #[test]
    fn difference_of_leading_ones(t in 2usize..=12, r in 1usize..12, s in 2usize..=12) {
        prop_assume!(r < s && s <= t);
        let v = |k| Codeword::leading_ones(t, k).unwrap();
        let code = Code::closure(t, [v(r), v(s)]).unwrap();
        prop_assert!(code.contains(&v(s - r)));
    }

    #[test]
    fn distinguish_is_symmetric(i in 0usize..5, j in 0usize..5) {
        let family = cknsym::enumerate::enumerate(10, Regime::ALessB, 1).unwrap().configs;
        let (a, b) = (&family[i % family.len()], &family[(j * 3) % family.len()]);
        let ab = distinct_guaranteed(a, b).unwrap();
        let ba = distinct_guaranteed(b, a).unwrap();
        prop_assert_eq!(ab.verdict, ba.verdict);
        prop_assert_eq!(ab.gcd, ba.gcd);
    }

    #[test]
    fn nonpositive_energy_bounds_kappa(seed in any::<u64>(), scale in 0.1f64..20.0, p in prop::sample::select(vec![2.0, 2.5, 3.0])) {
        let params = ProblemParams::new(4, p, 0.0, 0.0).unwrap();
        let grid = Grid::unit(4, 7).unwrap();
        let f = Functional::new(&params, &grid).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_field(&grid, &mut rng).scaled(scale);
        if f.energy(&u).unwrap() <= 0.0 {
            prop_assert!(f.kappa(&u).unwrap() >= params.q / params.p);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn symmetrization_is_a_projection(seed in any::<u64>(), idx in 0usize..2) {
        let (sub, grid, f) = &projection_cases()[idx];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = random_field(grid, &mut rng);
        let t = sub.symmetrize(&h).unwrap();
        prop_assert!(t.dot(&t) <= h.dot(&h) * (1.0 + 1e-12));
        prop_assert!(f.norm(&t).unwrap() <= f.norm(&h).unwrap() * (1.0 + 1e-12));
        prop_assert!(sub.symmetrize(&t).unwrap().axpy(-1.0, &t).max_abs() <= 1e-12);
        prop_assert!(sub.equivariance_residual(&t).unwrap() <= 1e-12);
        let u = sub.symmetrize(&random_field(grid, &mut rng)).unwrap();
        let (a, b) = (f.pairing(&u, &t).unwrap(), f.pairing(&u, &h).unwrap());
        prop_assert!((a - b).abs() <= 1e-8 * b.abs().max(1e-12));
    }
}
