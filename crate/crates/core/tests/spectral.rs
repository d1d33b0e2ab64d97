use nalgebra::{DMatrix, SymmetricEigen};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sumue_core::blackbox::{self, ecc_default, eigv, lexsim, num_sets, SimilarityGraph};
use sumue_core::linalg::{symmetric_eigen, Matrix};

fn random_graph(rng: &mut ChaCha8Rng, m: usize) -> SimilarityGraph<f64> {
    let mut w = Matrix::identity(m);
    for i in 0..m {
        for j in (i + 1)..m {
            let v = rng.random::<f64>();
            w[(i, j)] = v;
            w[(j, i)] = v;
        }
    }
    SimilarityGraph::from_weights(w).unwrap()
}

fn block_diagonal(sizes: &[usize]) -> SimilarityGraph<f64> {
    let labels: Vec<usize> = sizes
        .iter()
        .enumerate()
        .flat_map(|(b, &s)| std::iter::repeat_n(b, s))
        .collect();
    let m = labels.len();
    let w = Matrix::from_fn(m, m, |i, j| if labels[i] == labels[j] { 1.0 } else { 0.0 });
    SimilarityGraph::from_weights(w).unwrap()
}

fn permuted(g: &SimilarityGraph<f64>, perm: &[usize]) -> SimilarityGraph<f64> {
    let m = g.size();
    SimilarityGraph::from_weights(Matrix::from_fn(m, m, |i, j| g.weights()[(perm[i], perm[j])])).unwrap()
}

#[test]
fn block_diagonal_counts_blocks() {
    for (c, sizes) in [vec![5], vec![2, 3], vec![1, 2, 3], vec![2, 2, 1, 3]].into_iter().enumerate() {
        let g = block_diagonal(&sizes);
        assert!((eigv(&g) - (c + 1) as f64).abs() <= 1e-6, "{}", eigv(&g));
        assert_eq!(num_sets(&g, 0.5), c + 1);
        assert_eq!(num_sets(&g, 0.01), c + 1);
        assert_eq!(num_sets(&g, 0.99), c + 1);
    }
}

#[test]
fn spectrum_trace_and_bounds() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..100 {
        let m = rng.random_range(2..=10);
        let g = random_graph(&mut rng, m);
        let (vals, _) = blackbox::laplacian_spectrum(&g);
        let sum: f64 = vals.iter().sum();
        assert!((sum - g.laplacian().trace()).abs() <= 1e-6);
        assert!(vals.iter().all(|l| (-1e-9..=2.0 + 1e-9).contains(l)), "{vals:?}");
        assert!(eigv(&g) >= 1.0 - 1e-9);
    }
}

#[test]
fn jacobi_matches_reference_eigensolver() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..50 {
        let n = rng.random_range(1..=9);
        let a = DMatrix::<f64>::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let sym = &a + a.transpose();
        let mut expected: Vec<f64> = SymmetricEigen::new(sym.clone()).eigenvalues.iter().copied().collect();
        expected.sort_by(f64::total_cmp);

        let ours = symmetric_eigen(&Matrix::from_fn(n, n, |i, j| sym[(i, j)])).unwrap();
        for (a, b) in ours.values.iter().zip(&expected) {
            assert!((a - b).abs() <= 1e-9, "{a} vs {b}");
        }
        // A v = λ v for every returned pair
        for k in 0..n {
            let v = ours.vectors.column(k);
            let av = DMatrix::from_fn(n, n, |i, j| sym[(i, j)]) * nalgebra::DVector::from_vec(v.clone());
            for i in 0..n {
                assert!((av[i] - ours.values[k] * v[i]).abs() <= 1e-9);
            }
        }
    }
}

#[test]
fn sample_order_does_not_matter() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..50 {
        let m = rng.random_range(2..=8);
        let g = random_graph(&mut rng, m);
        let mut perm: Vec<usize> = (0..m).collect();
        perm.shuffle(&mut rng);
        let p = permuted(&g, &perm);
        assert_eq!(num_sets(&g, 0.5), num_sets(&p, 0.5));
        assert!((eigv(&g) - eigv(&p)).abs() <= 1e-9);
        assert!((ecc_default(&g) - ecc_default(&p)).abs() <= 1e-8);
        assert!((blackbox::lexsim_from_graph(&g) - blackbox::lexsim_from_graph(&p)).abs() <= 1e-12);
    }
}

#[test]
fn lexsim_of_text_samples() {
    let texts = ["a b c", "a b c", "x y z"];
    let v: f64 = lexsim(&texts).unwrap();
    assert!((v - (1.0 - 1.0 / 3.0)).abs() <= 1e-12);
    let mut shuffled = texts;
    shuffled.reverse();
    assert_eq!(lexsim::<f64>(&shuffled).unwrap(), v);
}

proptest! {
    #[test]
    fn num_sets_nondecreasing_in_threshold(seed in any::<u64>(), m in 2usize..9, t1 in 0.0f64..1.0, t2 in 0.0f64..1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_graph(&mut rng, m);
        let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        prop_assert!(num_sets(&g, lo) <= num_sets(&g, hi));
    }
}
