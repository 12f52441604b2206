use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use uest_core::asymptotics::{extrapolate, FitModel};
use uest_core::dirichlet_graph::{domination_check, BoundaryGraph};
use uest_core::estimation::EstimationMatrix;
use uest_core::kahn_bound::{h_upper, ratios_closed_form, ratios_recursive};
use uest_core::spectral::{
    dense_sym_eig, extremal_eig, LanczosOptions, Which, DEFAULT_DENSE_CAP,
};
use uest_core::verify::{partition_count, random_symmetric};
use uest_core::young_lattice::{LatticeIndex, YoungDiagram};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lattice_counts_partitions(n in 1usize..40, d in 1usize..6) {
        let lat = LatticeIndex::enumerate(n, d).unwrap();
        prop_assert_eq!(lat.len() as u64, partition_count(n, d));
        for (k, mu) in lat.diagrams().iter().enumerate() {
            prop_assert_eq!(mu.boxes(), n);
            prop_assert!(mu.parts().windows(2).all(|w| w[0] >= w[1]));
            prop_assert!(mu.rows() <= d);
            prop_assert_eq!(lat.position(mu), Some(k));
        }
    }

    #[test]
    fn adding_boxes_stays_in_the_next_level(parts in prop::collection::vec(0u32..12, 1..5)) {
        let mut parts = parts;
        parts.sort_unstable_by(|a, b| b.cmp(a));
        let mu = YoungDiagram::new(parts.clone()).unwrap();
        let d = parts.len();
        let next = mu.add_box_set();
        prop_assert_eq!(next.len() as u32, mu.add_box_count());
        for nu in &next {
            prop_assert_eq!(nu.boxes(), mu.boxes() + 1);
            prop_assert!(nu.parts().len() <= d);
        }
        for nu in mu.shift_neighbors() {
            prop_assert_eq!(nu.boxes(), mu.boxes());
            prop_assert!(nu.shift_neighbors().contains(&mu));
        }
    }

    #[test]
    fn estimation_matrix_is_a_symmetric_substochastic_count(n in 1usize..25, d in 2usize..5) {
        let m = EstimationMatrix::build(n, d).unwrap();
        let dense = m.matrix().to_dense();
        prop_assert_eq!(&dense, &dense.transpose());
        prop_assert!(dense.iter().all(|&x| x >= 0.0));
        for r in 0..m.dim() {
            let s: f64 = dense.row(r).iter().sum();
            prop_assert!(s <= 1.0 + 1e-12);
        }
        let other = EstimationMatrix::build_by_intersection(n, d).unwrap();
        prop_assert_eq!(m.counts(), other.counts());
    }

    #[test]
    fn fidelity_lies_in_the_unit_interval(n in 1usize..30, d in 2usize..5) {
        let m = EstimationMatrix::build(n, d).unwrap();
        let f = m.max_eig(&LanczosOptions::default()).unwrap().value;
        let dense = dense_sym_eig(m.matrix(), DEFAULT_DENSE_CAP).unwrap();
        prop_assert!(f > 0.0 && f <= 1.0);
        prop_assert!((f - dense.values[m.dim() - 1]).abs() < 1e-9);
    }

    #[test]
    fn laplacian_is_symmetric_with_constant_diagonal(n in 1usize..30, d in 2usize..4) {
        let g = BoundaryGraph::build(n, d).unwrap();
        let l = g.dirichlet_laplacian();
        let dense = l.matrix().to_dense();
        prop_assert_eq!(&dense, &dense.transpose());
        let deg = (d * (d - 1)) as f64;
        prop_assert!(l.matrix().diagonal().iter().all(|&x| x == deg));
        prop_assert!(dense.iter().all(|&x| x == deg || x == 0.0 || x == -1.0 ));
    }

    #[test]
    fn domination_holds(n in 1usize..16, d in 2usize..4) {
        let r = domination_check(n, d, 1e-10).unwrap();
        prop_assert!(r.passed(), "{:?}", r.violations);
    }

    #[test]
    fn sparse_extremes_match_dense(seed in any::<u64>(), dim in 1usize..120, density in 0.01f64..0.5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_symmetric(&mut rng, dim, density);
        let dense = dense_sym_eig(&a, DEFAULT_DENSE_CAP).unwrap();
        let opts = LanczosOptions::default();
        let hi = extremal_eig(&a, Which::Largest, &opts).unwrap();
        let lo = extremal_eig(&a, Which::Smallest, &opts).unwrap();
        prop_assert!((hi.value - dense.values[dim - 1]).abs() < 1e-9);
        prop_assert!((lo.value - dense.values[0]).abs() < 1e-9);
        let norm: f64 = hi.vector.iter().map(|x| x * x).sum::<f64>().sqrt();
        prop_assert!((norm - 1.0).abs() < 1e-9);
    }

    #[test]
    fn kahn_recursion_is_exact(d in 2usize..40) {
        let closed = ratios_closed_form(d).unwrap();
        prop_assert_eq!(&closed, &ratios_recursive(d).unwrap());
        prop_assert_eq!(closed.rayleigh(), h_upper(d).unwrap() * num_rational::BigRational::from_integer(d.into()));
    }

    #[test]
    fn extrapolation_recovers_exact_polynomials(
        h in -100.0f64..100.0,
        c1 in -50.0f64..50.0,
        c2 in -50.0f64..50.0,
        n0 in 10usize..200,
        step in 5usize..50,
    ) {
        let pts: Vec<(usize, f64)> = (0..8)
            .map(|k| {
                let n = n0 + k * step;
                let x = 1.0 / n as f64;
                (n, h + c1 * x + c2 * x * x)
            })
            .collect();
        let fit = extrapolate(&pts, None, FitModel::Quadratic).unwrap();
        prop_assert!((fit.limit - h).abs() < 1e-7 * (1.0 + h.abs() + c1.abs() + c2.abs()));
    }
}
