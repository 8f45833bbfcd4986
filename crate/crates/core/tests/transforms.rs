use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sfft_core::dft::{forward_dft, inverse_dft};
use sfft_core::permutation::SpectrumPermutation;
use sfft_core::{Complex64, DenseSignal, Domain, Grid, GridIndex};

fn shape() -> impl Strategy<Value = (usize, usize)> {
    prop_oneof![
        (1u32..=8).prop_map(|b| (1usize << b, 1)),
        (1u32..=4).prop_map(|b| (1usize << b, 2)),
        (1u32..=3).prop_map(|b| (1usize << b, 3))
    ]
}

fn signal() -> impl Strategy<Value = DenseSignal> {
    shape().prop_flat_map(|(n, d)| {
        let grid = Grid::new(n, d).unwrap();
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), grid.size()).prop_map(move |v| {
            let values = v
                .into_iter()
                .map(|(re, im)| Complex64::new(re, im))
                .collect();
            DenseSignal::from_values(grid, values, Domain::Time).unwrap()
        })
    })
}

proptest! {
    #[test]
    fn inverse_undoes_forward(x in signal()) {
        let back = inverse_dft(&forward_dft(&x).unwrap()).unwrap();
        for (a, b) in x.values().iter().zip(back.values()) {
            prop_assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn transform_is_unitary(x in signal()) {
        let xhat = forward_dft(&x).unwrap();
        prop_assert!((x.norm_l2() - xhat.norm_l2()).abs() < 1e-12 * (1.0 + x.norm_l2()));
    }

    #[test]
    fn permutations_are_bijections((n, d) in shape(), seed in any::<u64>()) {
        let grid = Grid::new(n, d).unwrap();
        let perm = SpectrumPermutation::sample(grid, &mut ChaCha8Rng::seed_from_u64(seed));
        let mut seen = vec![false; grid.size()];
        for i in grid.indices() {
            let p = perm.permute(&i);
            prop_assert_eq!(perm.unpermute(&p), i);
            let f = grid.flat(&p);
            prop_assert!(!seen[f]);
            seen[f] = true;
        }
    }

    #[test]
    fn sigma_inverse_is_inverse((n, d) in shape(), seed in any::<u64>(), v in prop::collection::vec(any::<usize>(), 3)) {
        let grid = Grid::new(n, d).unwrap();
        let perm = SpectrumPermutation::sample(grid, &mut ChaCha8Rng::seed_from_u64(seed));
        let v = GridIndex::new(&v[..d].iter().map(|c| c % n).collect::<Vec<_>>());
        prop_assert_eq!(perm.apply_sigma_inv(&perm.apply_sigma(&v)), v);
        prop_assert_eq!(perm.apply_sigma_inv_t(&perm.apply_sigma_t(&v)), v);
    }
}
