use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use slabsel::ml::*;
use slabsel::transport::Solver;

fn solver(i: usize) -> Solver {
    Solver::from_index(i).unwrap()
}

fn random_dataset(rng: &mut ChaCha8Rng, n: usize, levels: u32, classes: usize) -> LabeledDataset {
    let rows = (0..n)
        .map(|_| std::array::from_fn(|_| rng.gen_range(0..levels) as f64))
        .collect();
    let labels = (0..n).map(|_| solver(rng.gen_range(0..classes))).collect();
    LabeledDataset::new(rows, labels).unwrap()
}

#[test]
fn knn_matches_brute_force_sort() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let rows: Vec<FeatureRow> = (0..300)
        .map(|_| std::array::from_fn(|_| rng.gen_range(0..6) as f64 * 0.5))
        .collect();
    let labels: Vec<Solver> = (0..300).map(|_| solver(rng.gen_range(0..3))).collect();
    let ds = LabeledDataset::new(rows.clone(), labels.clone()).unwrap();
    for k in [1, 4, 7] {
        let model = KnnModel::train(&ds, k).unwrap();
        for _ in 0..200 {
            let q: FeatureRow = std::array::from_fn(|_| rng.gen_range(-0.5..3.0));
            let mut all: Vec<(f64, usize)> = rows
                .iter()
                .enumerate()
                .map(|(i, r)| (r.iter().zip(&q).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt(), i))
                .collect();
            all.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
            let nearest: Vec<usize> = all[..k].iter().map(|&(_, i)| i).collect();
            assert_eq!(model.neighbors(&q), nearest);

            let mut votes = [0; 3];
            for &i in &nearest {
                votes[labels[i].index()] += 1;
            }
            let top = *votes.iter().max().unwrap();
            let expected = nearest.iter().map(|&i| labels[i].index()).find(|&c| votes[c] == top).unwrap();
            assert_eq!(model.predict(&q).0, expected);
        }
    }
}

/// Naive recursive tree: every feature, every midpoint, Gini recomputed from
/// scratch for each candidate.
struct OracleNode {
    counts: [usize; 3],
    split: Option<(usize, f64)>,
}

fn oracle_tree(rows: &[FeatureRow], labels: &[usize], idx: Vec<usize>, min_leaf: usize, out: &mut Vec<OracleNode>) {
    let count = |set: &[usize]| {
        let mut c = [0usize; 3];
        for &i in set {
            c[labels[i]] += 1;
        }
        c
    };
    let weighted = |set: &[usize]| set.len() as f64 * gini(&count(set));
    let counts = count(&idx);
    let me = out.len();
    out.push(OracleNode { counts, split: None });
    if counts.iter().filter(|&&c| c > 0).count() <= 1 || idx.len() < 2 * min_leaf {
        return;
    }
    let mut best: Option<(f64, usize, f64)> = None;
    for f in 0..3 {
        let mut values: Vec<f64> = idx.iter().map(|&i| rows[i][f]).collect();
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        values.dedup();
        for w in values.windows(2) {
            let t = 0.5 * (w[0] + w[1]);
            let (l, r): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| rows[i][f] <= t);
            if l.len() < min_leaf || r.len() < min_leaf {
                continue;
            }
            let score = weighted(&l) + weighted(&r);
            let better = match best {
                None => true,
                Some((s, bf, bt)) => score < s - 1e-12 || ((score - s).abs() <= 1e-12 && (f, t) < (bf, bt)),
            };
            if better {
                best = Some((score, f, t));
            }
        }
    }
    let Some((score, f, t)) = best else { return };
    if weighted(&idx) - score <= 1e-12 {
        return;
    }
    out[me].split = Some((f, t));
    let (l, r): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| rows[i][f] <= t);
    oracle_tree(rows, labels, l, min_leaf, out);
    oracle_tree(rows, labels, r, min_leaf, out);
}

#[test]
fn tree_matches_exhaustive_split_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for case in 0..300 {
        let n = rng.gen_range(1..=10);
        let ds = random_dataset(&mut rng, n, 4, 3);
        let min_leaf = 1 + case % 2;
        let tree = train_tree(&ds, 3, min_leaf, &mut ChaCha8Rng::seed_from_u64(case as u64));
        let labels: Vec<usize> = ds.labels.iter().map(|l| l.index()).collect();
        let mut expected = Vec::new();
        oracle_tree(&ds.features, &labels, (0..n).collect(), min_leaf, &mut expected);
        assert_eq!(tree.nodes.len(), expected.len(), "case {case}");
        for (got, want) in tree.nodes.iter().zip(&expected) {
            assert_eq!(got.counts, want.counts, "case {case}");
            assert_eq!(got.split.map(|s| (s.feature, s.threshold)), want.split, "case {case}");
        }
    }
}

#[test]
fn four_point_tree_and_importance() {
    let ds = LabeledDataset::new(
        vec![[0.0, 5.0, 5.0], [1.0, 5.0, 5.0], [2.0, 5.0, 5.0], [3.0, 5.0, 5.0]],
        vec![Solver::Dsa, Solver::Dsa, Solver::Nda, Solver::Nda],
    )
    .unwrap();
    let forest = train_forest(&ds, 1, 3, 1, 0, Sampling::Identity).unwrap();
    let root = forest.trees[0].nodes[0].split.unwrap();
    assert_eq!((root.feature, root.threshold), (0, 1.5));
    assert_eq!(forest.gini_importance(), [2.0, 0.0, 0.0]);
}

#[test]
fn gini_bounded_on_every_node() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let ds = random_dataset(&mut rng, 200, 10, 3);
    let forest = train_forest(&ds, 10, 2, 1, 3, Sampling::Bootstrap).unwrap();
    for tree in &forest.trees {
        for node in &tree.nodes {
            let g = gini(&node.counts);
            assert!((0.0..=2.0 / 3.0 + 1e-15).contains(&g));
        }
    }
    assert!(forest.gini_importance().iter().all(|&v| v >= 0.0));
}

#[test]
fn forest_is_deterministic_and_votes_are_real() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let ds = random_dataset(&mut rng, 150, 8, 3);
    let a = train_forest(&ds, 25, 1, 1, 99, Sampling::Bootstrap).unwrap();
    let b = train_forest(&ds, 25, 1, 1, 99, Sampling::Bootstrap).unwrap();
    assert_eq!(a, b);
    let serial = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(|| train_forest(&ds, 25, 1, 1, 99, Sampling::Bootstrap).unwrap());
    assert_eq!(a, serial);
    for _ in 0..100 {
        let q: FeatureRow = std::array::from_fn(|_| rng.gen_range(0.0..8.0));
        let (class, votes) = a.predict(&q);
        assert!(a.trees.iter().any(|t| t.predict(&q) == class));
        assert_eq!(votes.iter().sum::<f64>(), 25.0);
    }
    assert_ne!(a, train_forest(&ds, 25, 1, 1, 100, Sampling::Bootstrap).unwrap());
}

#[test]
fn forest_with_single_feature_splits_has_zero_other_importance() {
    let ds = LabeledDataset::new(
        (0..20).map(|i| [i as f64, 1.0, 2.0]).collect(),
        (0..20).map(|i| solver(i * 3 / 20)).collect(),
    )
    .unwrap();
    let forest = train_forest(&ds, 30, 1, 1, 4, Sampling::Bootstrap).unwrap();
    let imp = forest.gini_importance();
    assert!(imp[0] > 0.0);
    assert_eq!((imp[1], imp[2]), (0.0, 0.0));
}

#[test]
fn mlp_gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let rows: Vec<FeatureRow> = (0..5).map(|_| std::array::from_fn(|_| rng.gen_range(-2.0..2.0))).collect();
    let labels = vec![0, 2, 1, 1, 0];
    let model = MlpModel::random(4, 17);
    let (_, grad) = model.loss_and_gradient(&rows, &labels);
    let base = model.parameters();
    let h = 1e-5;
    for (i, &g) in grad.iter().enumerate() {
        let mut probe = model.clone();
        let mut p = base.clone();
        p[i] = base[i] + h;
        probe.set_parameters(&p);
        let up = probe.loss_and_gradient(&rows, &labels).0;
        p[i] = base[i] - h;
        probe.set_parameters(&p);
        let down = probe.loss_and_gradient(&rows, &labels).0;
        let numeric = (up - down) / (2.0 * h);
        let rel = (g - numeric).abs() / g.abs().max(numeric.abs()).max(1e-8);
        assert!(rel <= 1e-5, "parameter {i}: analytic {g}, numeric {numeric}");
    }
}

#[test]
fn mlp_fits_separable_classes() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for _ in 0..40 {
        let x: FeatureRow = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        if x[0] + 0.5 * x[1] > 0.15 {
            labels.push(Solver::Dsa);
        } else if x[0] + 0.5 * x[1] < -0.15 {
            labels.push(Solver::Nda);
        } else {
            continue;
        }
        rows.push(x);
    }
    let ds = LabeledDataset::new(rows, labels).unwrap();
    let model = MlpModel::train(&ds, 5, 0.1, 2000, 1).unwrap();
    for (x, y) in ds.features.iter().zip(&ds.labels) {
        let p = model.probabilities(x);
        assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
        assert!(p.iter().all(|&v| v >= 0.0));
        let class = (0..3).fold(0, |b, k| if p[k] > p[b] { k } else { b });
        assert_eq!(class, y.index());
    }
}

#[test]
fn lda_separates_gaussian_blobs() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let centers = [[0.0, 0.0, 0.0], [4.0, 0.0, 1.0], [0.0, 4.0, -1.0]];
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (k, c) in centers.iter().enumerate() {
        for _ in 0..60 {
            rows.push(std::array::from_fn(|f| c[f] + rng.gen_range(-1.0..1.0)));
            labels.push(solver(k));
        }
    }
    let ds = LabeledDataset::new(rows, labels).unwrap();
    let model = LdaModel::train(&ds).unwrap();
    let hits = ds.features.iter().zip(&ds.labels).filter(|(x, y)| model.predict(x).0 == y.index()).count();
    assert!(hits as f64 / ds.len() as f64 >= 0.97);
    for x in &ds.features {
        let s = model.scores(x);
        let shifted = s.map(|v| v + 123.4);
        let argmax = |v: [f64; 3]| (0..3).fold(0, |b, k| if v[k] > v[b] { k } else { b });
        assert_eq!(argmax(s), argmax(shifted));
    }
}

fn xor() -> LabeledDataset {
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (a, b) in [(0.0, 0.0), (1.0, 1.0), (0.0, 1.0), (1.0, 0.0)] {
        for j in 0..3 {
            let e = 0.05 * j as f64;
            rows.push([a + e, b - e, 0.0]);
            labels.push(if a == b { Solver::Dsa } else { Solver::Nda });
        }
    }
    LabeledDataset::new(rows, labels).unwrap()
}

#[test]
fn svm_rbf_solves_xor_where_linear_cannot() {
    let ds = xor();
    let acc = |m: &SvmModel| {
        ds.features.iter().zip(&ds.labels).filter(|(x, y)| m.predict(x).0 == y.index()).count() as f64 / ds.len() as f64
    };
    let rbf = SvmModel::train(&ds, 10.0, Kernel::Rbf { gamma: 2.0 }).unwrap();
    assert_eq!(acc(&rbf), 1.0);
    let linear = SvmModel::train(&ds, 10.0, Kernel::Linear).unwrap();
    assert!(acc(&linear) <= 0.75);

    for x in &ds.features {
        let d = rbf.decision_values(x);
        let scaled: Vec<f64> = d.iter().map(|v| v * 3.5).collect();
        assert_eq!(d.iter().map(|v| *v > 0.0).collect::<Vec<_>>(), scaled.iter().map(|v| *v > 0.0).collect::<Vec<_>>());
    }
}

#[test]
fn knn_k1_recalls_distinct_training_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let rows: Vec<FeatureRow> = (0..80).map(|_| std::array::from_fn(|_| rng.gen_range(0.0..1.0))).collect();
    let labels = (0..80).map(|_| solver(rng.gen_range(0..3))).collect();
    let ds = LabeledDataset::new(rows, labels).unwrap();
    let model = fit(&ds, &ModelSpec::Knn { k: 1 }).unwrap();
    for (x, y) in ds.features.iter().zip(&ds.labels) {
        assert_eq!(model.predict_class(x), *y);
    }
}

#[test]
fn persisted_models_predict_identically() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let ds = random_dataset(&mut rng, 60, 6, 3);
    let dir = tempfile::tempdir().unwrap();
    for kind in ModelKind::ALL {
        let spec = match ModelSpec::defaults(kind, 9) {
            ModelSpec::Rf { feature_subset, min_leaf, seed, .. } => ModelSpec::Rf { n_trees: 15, feature_subset, min_leaf, seed },
            ModelSpec::Mlp { hidden, learning_rate, seed, .. } => ModelSpec::Mlp { hidden, learning_rate, epochs: 100, seed },
            s => s,
        };
        let model = fit(&ds, &spec).unwrap();
        let path = dir.path().join(format!("{kind}.json"));
        save_model(&path, &model).unwrap();
        let back = load_model(&path).unwrap();
        for _ in 0..50 {
            let q: FeatureRow = std::array::from_fn(|_| rng.gen_range(-1.0..7.0));
            assert_eq!(back.predict(&q), model.predict(&q), "{kind}");
        }
        assert_eq!(std::fs::read(&path).unwrap(), {
            let mut buf = Vec::new();
            write_model(&mut buf, &back).unwrap();
            buf
        });
    }
}

proptest! {
    #[test]
    fn softmax_is_a_distribution(seed in 0u64..1000, x in proptest::array::uniform3(-50.0f64..50.0)) {
        let p = MlpModel::random(6, seed).probabilities(&x);
        prop_assert!(p.iter().all(|&v| v >= 0.0));
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn gini_in_range(counts in proptest::array::uniform3(0usize..50)) {
        let g = gini(&counts);
        prop_assert!((0.0..=2.0 / 3.0 + 1e-15).contains(&g));
    }
}
