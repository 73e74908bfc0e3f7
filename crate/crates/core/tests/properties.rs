mod common;

use std::collections::BTreeSet;
use std::sync::Mutex;

use proptest::prelude::*;
use qgk_core::alignment::{affinity, correspondence_set, pair_stream_seed, raw_matches};
use qgk_core::classify::{stratified_cv, stratified_folds, KernelSource};
use qgk_core::ctqw::{graph_amm, mixing_matrix_at, vertex_entropies};
use qgk_core::depth::{bfs_distances, depth_representation, steady_state_entropy};
use qgk_core::kernels::{aerk_level_contributions, aerk_pair, brk};
use qgk_core::spectral::{eigendecompose, spectral_decomposition, DEFAULT_EIG_TOL};
use qgk_core::{Graph, GraphFeatures, KernelConfig, KernelKind, Matrix};

fn graph_strategy(max_n: usize) -> impl Strategy<Value = Graph> {
    (1..=max_n).prop_flat_map(|n| {
        let pairs = n * (n - 1) / 2;
        proptest::collection::vec(any::<bool>(), pairs).prop_map(move |bits| {
            let mut edges = Vec::new();
            let mut k = 0;
            for u in 0..n {
                for v in (u + 1)..n {
                    if bits[k] {
                        edges.push((u, v));
                    }
                    k += 1;
                }
            }
            Graph::new(n, edges, 0, 0).unwrap()
        })
    })
}

fn connected_strategy(max_n: usize) -> impl Strategy<Value = Graph> {
    graph_strategy(max_n).prop_filter("connected", |g| {
        bfs_distances(g, 0).iter().all(Option::is_some)
    })
}

fn with_permutation(max_n: usize) -> impl Strategy<Value = (Graph, Vec<usize>)> {
    graph_strategy(max_n).prop_flat_map(|g| {
        let n = g.vertex_count();
        (Just(g), Just((0..n).collect::<Vec<_>>()).prop_shuffle())
    })
}

fn features(g: &Graph, levels: usize) -> GraphFeatures {
    GraphFeatures::compute(g, levels).unwrap()
}

// U(t) = exp(iAt) by scaled Taylor series, independent of the eigensolver.
fn propagator(a: &Matrix, t: f64) -> (Matrix, Matrix) {
    let n = a.rows();
    let norm = a.max_abs() * n as f64 * t.abs();
    let steps = (norm / 0.25).ceil().max(1.0) as usize;
    let dt = t / steps as f64;
    let (mut re, mut im) = (Matrix::identity(n), Matrix::zeros(n, n));
    let (mut term_re, mut term_im) = (Matrix::identity(n), Matrix::zeros(n, n));
    for k in 1..40 {
        // term *= i·A·dt / k
        let s = dt / k as f64;
        let next_re = scale(&a.matmul(&term_im), -s);
        let next_im = scale(&a.matmul(&term_re), s);
        term_re = next_re;
        term_im = next_im;
        re = add(&re, &term_re);
        im = add(&im, &term_im);
    }
    let (mut ure, mut uim) = (Matrix::identity(n), Matrix::zeros(n, n));
    for _ in 0..steps {
        let r = add(&ure.matmul(&re), &scale(&uim.matmul(&im), -1.0));
        let i = add(&ure.matmul(&im), &uim.matmul(&re));
        ure = r;
        uim = i;
    }
    (ure, uim)
}

fn scale(m: &Matrix, s: f64) -> Matrix {
    Matrix::from_vec(m.rows(), m.cols(), m.as_slice().iter().map(|x| x * s).collect())
}

fn add(a: &Matrix, b: &Matrix) -> Matrix {
    Matrix::from_vec(
        a.rows(),
        a.cols(),
        a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| x + y).collect(),
    )
}

struct TracingKernel<'a> {
    inner: &'a Matrix,
    reads: Mutex<Vec<(usize, usize)>>,
}

impl KernelSource for TracingKernel<'_> {
    fn size(&self) -> usize {
        self.inner.rows()
    }

    fn kernel(&self, i: usize, j: usize) -> f64 {
        self.reads.lock().unwrap().push((i, j));
        self.inner[(i, j)]
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn adjacency_is_symmetric_with_zero_diagonal(g in graph_strategy(9)) {
        let a = g.adjacency_matrix();
        prop_assert_eq!(a.asymmetry(), 0.0);
        prop_assert!((0..g.vertex_count()).all(|i| a[(i, i)] == 0.0));
    }

    #[test]
    fn mixing_matrix_is_doubly_stochastic((g, perm) in with_permutation(9)) {
        let q = graph_amm(&g).unwrap();
        let m = q.matrix();
        prop_assert!(m.asymmetry() <= 1e-12);
        for s in m.row_sums().into_iter().chain(m.col_sums()) {
            prop_assert!((s - 1.0).abs() <= 1e-9);
        }
        // permutation equivariance of Q and entropies
        let gp = g.permuted(&perm).unwrap();
        let qp = graph_amm(&gp).unwrap();
        prop_assert!(qp.matrix().max_abs_diff(&m.permuted(&perm)) <= 1e-9);
        let h = vertex_entropies(&q).unwrap();
        let hp = vertex_entropies(&qp).unwrap();
        for v in 0..g.vertex_count() {
            prop_assert!((hp.get(perm[v]) - h.get(v)).abs() <= 1e-9);
        }
    }

    #[test]
    fn entropy_bounds(g in graph_strategy(10)) {
        let h = vertex_entropies(&graph_amm(&g).unwrap()).unwrap();
        let ceiling = (g.vertex_count() as f64).ln();
        prop_assert!(h.as_slice().iter().all(|&x| (0.0..=ceiling).contains(&x)));
    }

    #[test]
    fn projector_algebra(g in graph_strategy(9)) {
        let sd = spectral_decomposition(&g.adjacency_matrix()).unwrap();
        prop_assert!(sd.residuals().max() <= 1e-9, "{:?}", sd.residuals());
        prop_assert_eq!(sd.multiplicities().iter().sum::<usize>(), g.vertex_count());
    }

    #[test]
    fn eigendecomposition_postconditions(
        n in 1usize..9,
        raw in proptest::collection::vec(-5.0f64..5.0, 81),
    ) {
        let mut a = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                a[(i, j)] = raw[i * 9 + j];
                a[(j, i)] = raw[i * 9 + j];
            }
        }
        let pairs = eigendecompose(&a, DEFAULT_EIG_TOL).unwrap();
        prop_assert!(pairs.windows(2).all(|w| w[0].value >= w[1].value));
        let mut rebuilt = Matrix::zeros(n, n);
        for p in &pairs {
            for i in 0..n {
                for j in 0..n {
                    rebuilt[(i, j)] += p.value * p.vector[i] * p.vector[j];
                }
            }
            for q in &pairs {
                let dot: f64 = p.vector.iter().zip(&q.vector).map(|(x, y)| x * y).sum();
                let expected = if std::ptr::eq(p, q) { 1.0 } else { 0.0 };
                prop_assert!((dot - expected).abs() <= 1e-10);
            }
        }
        prop_assert!(rebuilt.max_abs_diff(&a) <= 1e-9 * a.max_abs().max(1.0) * n as f64);
    }

    #[test]
    fn instantaneous_mixing_matches_propagator(g in graph_strategy(7), t in 0.0f64..6.0) {
        let a = g.adjacency_matrix();
        let (re, im) = propagator(&a, t);
        let n = g.vertex_count();
        let mut expected = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                expected[(i, j)] = re[(i, j)].powi(2) + im[(i, j)].powi(2);
            }
        }
        prop_assert!(mixing_matrix_at(&a, t).unwrap().max_abs_diff(&expected) <= 1e-9);
    }

    #[test]
    fn depth_is_permutation_equivariant((g, perm) in with_permutation(9)) {
        let d = depth_representation(&g, 4).unwrap();
        let dp = depth_representation(&g.permuted(&perm).unwrap(), 4).unwrap();
        for v in 0..g.vertex_count() {
            prop_assert_eq!(d.prefix(v, 4), dp.prefix(perm[v], 4));
            for h in 1..=4 {
                prop_assert_eq!(d.neighborhood_size(v, h), dp.neighborhood_size(perm[v], h));
            }
        }
    }

    #[test]
    fn depth_rows_agree_past_diameter(g in connected_strategy(8)) {
        let n = g.vertex_count();
        prop_assume!(n >= 2);
        let diameter = (0..n).map(|v| bfs_distances(&g, v).into_iter().flatten().max().unwrap()).max().unwrap();
        let d = depth_representation(&g, diameter).unwrap();
        let whole = steady_state_entropy(&g);
        for v in 0..n {
            prop_assert_eq!(d.value(v, diameter), whole);
        }
    }

    #[test]
    fn brk_symmetry_and_range(a in -1e3f64..1e3, b in -1e3f64..1e3) {
        prop_assert_eq!(brk(a, b), brk(b, a));
        prop_assert!(brk(a, b) > 0.0 || (a - b).abs() > 700.0);
        prop_assert!(brk(a, b) <= 0.5);
    }

    #[test]
    fn alignment_invariants(gp in graph_strategy(6), gq in graph_strategy(6), seed in any::<u64>()) {
        let levels = 4;
        let (fp, fq) = (features(&gp, levels), features(&gq.with_id(1), levels));
        let set = correspondence_set(&fp, &fq, levels, pair_stream_seed(seed, 0, 1)).unwrap();
        for h in 1..=levels {
            let c = set.binary(h);
            let rows: BTreeSet<usize> = c.pairs().iter().map(|p| p.0).collect();
            let cols: BTreeSet<usize> = c.pairs().iter().map(|p| p.1).collect();
            prop_assert_eq!(rows.len(), c.len());
            prop_assert_eq!(cols.len(), c.len());
            let np = fp.depth().neighborhood_sizes_at(h);
            let nq = fq.depth().neighborhood_sizes_at(h);
            for &(i, j) in c.pairs() {
                prop_assert!(np[i] > 0 && nq[j] > 0);
            }
            for &(_, _, v) in set.entropic(h).entries() {
                prop_assert!(v > 0.0 && v <= 0.5);
            }

            let r = affinity(h, fp.depth(), fq.depth()).unwrap();
            let m = r.matrix();
            let mut brute = Vec::new();
            for i in 0..m.rows() {
                for j in 0..m.cols() {
                    let row_min = (0..m.cols()).all(|k| m[(i, j)] <= m[(i, k)]);
                    let col_min = (0..m.rows()).all(|k| m[(i, j)] <= m[(k, j)]);
                    if row_min && col_min && np[i] > 0 && nq[j] > 0 {
                        brute.push((i, j));
                    }
                }
            }
            prop_assert_eq!(raw_matches(&r, &np, &nq), brute);
        }
    }

    #[test]
    fn aerk_bound_levels_and_swap(gp in graph_strategy(7), gq in graph_strategy(7), seed in any::<u64>()) {
        let levels = 5;
        let (gp, gq) = (gp.with_id(3), gq.with_id(8));
        let fp = features(&gp, levels);
        let fq = features(&gq, levels);
        let cfg = KernelConfig { seed, ..KernelConfig::new(KernelKind::Aerk, levels) };
        let k = aerk_pair(&fp, &fq, &cfg).unwrap();
        prop_assert_eq!(k, aerk_pair(&fq, &fp, &cfg).unwrap());
        let bound = 0.5 * levels as f64 * fp.vertex_count().min(fq.vertex_count()) as f64;
        prop_assert!(k <= bound);

        let contributions = aerk_level_contributions(&fp, &fq, levels, seed).unwrap();
        prop_assert!(contributions.iter().all(|&c| c >= 0.0));
        prop_assert_eq!(contributions.iter().sum::<f64>(), k);
        let fewer = KernelConfig { levels: levels - 1, ..cfg };
        let k_fewer = aerk_pair(&features(&gp, levels - 1), &features(&gq, levels - 1), &fewer).unwrap();
        prop_assert!(k_fewer <= k);
        prop_assert_eq!(k, common::naive_aerk(&gp, &gq, levels, seed));
    }

    #[test]
    fn aerk_isomorphism_covariance(gp in graph_strategy(6), (gq, perm) in with_permutation(6), seed in any::<u64>()) {
        let levels = 4;
        let fp = features(&gp, levels);
        let fq = features(&gq.clone().with_id(1), levels);
        let fr = features(&gq.permuted(&perm).unwrap().with_id(1), levels);
        let mut tie_free = true;
        for h in 1..=levels {
            let r = affinity(h, fp.depth(), fq.depth()).unwrap();
            let rr = affinity(h, fp.depth(), fr.depth()).unwrap();
            let np = fp.depth().neighborhood_sizes_at(h);
            let nq = fq.depth().neighborhood_sizes_at(h);
            let nr = fr.depth().neighborhood_sizes_at(h);
            let mapped: BTreeSet<(usize, usize)> =
                raw_matches(&r, &np, &nq).into_iter().map(|(i, j)| (i, perm[j])).collect();
            let direct: BTreeSet<(usize, usize)> = raw_matches(&rr, &np, &nr).into_iter().collect();
            prop_assert_eq!(&mapped, &direct);
            let values: Vec<u64> = direct.iter().map(|&(i, j)| rr.get(i, j).to_bits()).collect();
            tie_free &= values.iter().collect::<BTreeSet<_>>().len() == values.len();
        }
        if tie_free {
            let cfg = KernelConfig { seed, ..KernelConfig::new(KernelKind::Aerk, levels) };
            let a = aerk_pair(&fp, &fq, &cfg).unwrap();
            let b = aerk_pair(&fp, &fr, &cfg).unwrap();
            prop_assert!((a - b).abs() <= 1e-12, "{} vs {}", a, b);
        }
    }

    #[test]
    fn cv_reads_only_test_train_entries(
        labels in proptest::collection::vec(0i64..3, 6..40),
        folds in 2usize..6,
        seed in any::<u64>(),
    ) {
        prop_assume!(folds <= labels.len());
        let n = labels.len();
        let k = Matrix::from_vec(n, n, (0..n * n).map(|x| ((x * 7919) % 101) as f64).collect());
        let traced = TracingKernel { inner: &k, reads: Mutex::new(Vec::new()) };
        let report = stratified_cv(&traced, &labels, folds, 1, seed).unwrap();
        let assignment = stratified_folds(&labels, folds, seed).unwrap();
        for &(i, j) in traced.reads.lock().unwrap().iter() {
            prop_assert_ne!(assignment[i], assignment[j]);
        }
        prop_assert_eq!(&report, &stratified_cv(&k, &labels, folds, 1, seed).unwrap());
        prop_assert_eq!(&assignment, &stratified_folds(&labels, folds, seed).unwrap());

        for class in labels.iter().collect::<BTreeSet<_>>() {
            let sizes: Vec<usize> = (0..folds)
                .map(|f| (0..n).filter(|&i| labels[i] == *class && assignment[i] == f).count())
                .collect();
            prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        }
    }
}

#[test]
fn vertex_transitive_graphs_have_equal_entropies() {
    for n in 3..=10 {
        for g in [Graph::cycle(n), Graph::complete(n)] {
            let h = vertex_entropies(&graph_amm(&g).unwrap()).unwrap();
            assert!(h.as_slice().iter().all(|x| (x - h.get(0)).abs() <= 1e-9), "n={n}");
        }
    }
}

#[test]
fn regular_subgraph_entropy_is_log_size() {
    for m in 2..=12 {
        assert_eq!(steady_state_entropy(&Graph::cycle(m.max(3))), (m.max(3) as f64).ln());
        assert_eq!(steady_state_entropy(&Graph::complete(m)), (m as f64).ln());
    }
    assert_eq!(steady_state_entropy(&Graph::empty(4)), 0.0);
}

#[test]
fn constant_kernel_predicts_training_majority() {
    // With every kernel value equal and k covering the whole training set,
    // each prediction is the training-fold majority.
    let labels: Vec<i64> = (0..20).map(|i| i64::from(i % 4 == 0)).collect();
    let k = Matrix::filled(20, 20, 1.0);
    let report = stratified_cv(&k, &labels, 5, 16, 1).unwrap();
    let majority = labels.iter().filter(|&&l| l == 0).count() as f64 / 20.0;
    assert_eq!(report.mean_accuracy, majority);
}
