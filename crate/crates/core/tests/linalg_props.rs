use krausprop_core::circuit::GateKind;
use krausprop_core::linalg::{
    embed_gate, frobenius_distance_sq, random_complex_density, random_density_matrix_2x2, random_pure_state,
    random_real_density, tensor_product, ComplexMatrix, C64,
};
use krausprop_core::rng::derived_rng;
use num_complex::Complex;
use proptest::prelude::*;
use rand::Rng;

fn random_unitary<R: Rng>(dim: usize, rng: &mut R) -> ComplexMatrix {
    // QR of a complex Gaussian matrix via Gram-Schmidt on columns
    let mut cols: Vec<Vec<C64>> = (0..dim)
        .map(|_| (0..dim).map(|_| Complex::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect())
        .collect();
    for k in 0..dim {
        for j in 0..k {
            let proj: C64 = cols[j].iter().zip(&cols[k]).map(|(a, b)| a.conj() * b).sum();
            let qj = cols[j].clone();
            for (x, q) in cols[k].iter_mut().zip(&qj) {
                *x -= proj * q;
            }
        }
        let norm = cols[k].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        cols[k].iter_mut().for_each(|x| *x /= norm);
    }
    let mut m = ComplexMatrix::zeros(dim, dim);
    for (j, col) in cols.iter().enumerate() {
        for (i, z) in col.iter().enumerate() {
            m[(i, j)] = *z;
        }
    }
    m
}

fn random_2x2<R: Rng>(rng: &mut R) -> ComplexMatrix {
    let data = (0..4).map(|_| Complex::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect();
    ComplexMatrix::new(2, 2, data).unwrap()
}

#[test]
fn embedded_gates_are_unitary() {
    let mut rng = derived_rng(100, 0);
    for trial in 0..1000 {
        let n = rng.random_range(2..=5);
        let (g, targets) = if trial % 2 == 0 {
            (random_unitary(2, &mut rng), vec![rng.random_range(0..n)])
        } else {
            let a = rng.random_range(0..n);
            let mut b = rng.random_range(0..n - 1);
            if b >= a {
                b += 1;
            }
            (random_unitary(4, &mut rng), vec![a, b])
        };
        let u = embed_gate(&g, &targets, n).unwrap();
        assert!(u.unitarity_error() <= 1e-10, "n = {n}, targets = {targets:?}");
    }
}

#[test]
fn embedding_matches_kronecker_for_adjacent_targets() {
    let i2 = ComplexMatrix::identity(2);
    let cnot = GateKind::Cnot.matrix();
    let direct = embed_gate(&cnot, &[1, 2], 4).unwrap();
    let oracle = tensor_product(&tensor_product(&i2, &cnot).unwrap(), &i2).unwrap();
    assert!(direct.max_abs_diff(&oracle) < 1e-15);
}

#[test]
fn tensor_product_is_associative() {
    let mut rng = derived_rng(101, 0);
    for _ in 0..200 {
        let (a, b, c) = (random_2x2(&mut rng), random_2x2(&mut rng), random_2x2(&mut rng));
        let left = tensor_product(&tensor_product(&a, &b).unwrap(), &c).unwrap();
        let right = tensor_product(&a, &tensor_product(&b, &c).unwrap()).unwrap();
        assert!(left.max_abs_diff(&right) <= 1e-12);
    }
}

#[test]
fn real_sampler_draws_are_valid_states() {
    let mut rng = derived_rng(102, 0);
    for _ in 0..100_000 {
        let rho = random_density_matrix_2x2(&mut rng);
        let report = rho.validate(1e-10);
        assert!(report.is_valid(), "{report}");
        assert!(rho.purity() <= 1.0 + 1e-10);
    }
}

#[test]
fn pure_state_amplitudes_are_uniform_on_average() {
    let mut rng = derived_rng(103, 0);
    let n = 2;
    let draws = 100_000;
    let mut sums = [0.0; 4];
    let mut sq = [0.0; 4];
    for _ in 0..draws {
        let s = random_pure_state(n, &mut rng).unwrap();
        for (k, z) in s.amplitudes().iter().enumerate() {
            sums[k] += z.norm_sqr();
            sq[k] += z.norm_sqr() * z.norm_sqr();
        }
    }
    for k in 0..4 {
        let mean = sums[k] / draws as f64;
        let var = sq[k] / draws as f64 - mean * mean;
        let se = (var / draws as f64).sqrt();
        assert!((mean - 0.25).abs() <= 3.0 * se, "component {k}: {mean} ± {se}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn distances_between_states_are_bounded(seed in any::<u64>(), log_dim in 1usize..=3, complex in any::<bool>()) {
        let mut rng = derived_rng(seed, 0);
        let dim = 1 << log_dim;
        let draw = |rng: &mut _| if complex {
            random_complex_density(dim, rng).unwrap()
        } else {
            random_real_density(dim, rng).unwrap()
        };
        let a = draw(&mut rng);
        let b = draw(&mut rng);
        let d = frobenius_distance_sq(&a, &b).unwrap();
        prop_assert!((0.0..=2.0 + 1e-9).contains(&d));
        prop_assert!(frobenius_distance_sq(&a, &a).unwrap() == 0.0);
    }

    #[test]
    fn sampler_is_seed_reproducible(seed in any::<u64>(), stream in any::<u64>()) {
        let a = random_density_matrix_2x2(&mut derived_rng(seed, stream));
        let b = random_density_matrix_2x2(&mut derived_rng(seed, stream));
        prop_assert_eq!(a, b);
    }

    #[test]
    fn dagger_is_an_involution(seed in any::<u64>()) {
        let mut rng = derived_rng(seed, 1);
        let m = random_unitary(4, &mut rng);
        prop_assert_eq!(m.dagger().dagger(), m);
    }
}
