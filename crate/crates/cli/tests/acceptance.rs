//! Acceptance gate: every primary criterion at its stated tolerance and time
//! budget. Prints one PASS/FAIL line per criterion and exits non-zero if any
//! fails.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sumue_core::analysis::{human_score, run_experiment, ErrorCounts, ErrorType, ExperimentInput, ExperimentKind, HumanAnnotation};
use sumue_core::blackbox::{self, eigv, num_sets, SimilarityGraph};
use sumue_core::linalg::Matrix;
use sumue_core::nlg::{rank_correlation, rouge_l_tokens, RankCorrelation};
use sumue_core::prr::{
    self, pr_oracle_of, pr_random_expected, pr_random_mean_of_risk, pr_value,
    QualityReference,
};
use sumue_core::record::PositionDistributions;
use sumue_core::whitebox::{mahalanobis, seq_rmi, token_rmi, token_total_uncertainty, DensityModel};
use sumue_core::{
    minmax_normalize, EnsembleBlock, GenerationRecord, RandomBaseline, SampledGeneration, ScoreKind, ScoreVector,
};

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        ok,
        detail: detail.into(),
    }
}

fn ids(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("r{i}")).collect()
}

// ---------------------------------------------------------------- criteria

fn fig2_pipeline() -> Outcome {
    let normalized = [0.0, 0.56, 0.47, 1.0];
    let risk: Vec<f64> = minmax_normalize(&normalized).iter().map(|q| 1.0 - q).collect();
    let expected_risk = [1.0, 0.44, 0.53, 0.0];
    let risk_ok = risk.iter().zip(expected_risk).all(|(a, b)| (a - b).abs() <= 1e-12);
    // hand cumulative sums: best order 0, 0.44, 0.97, 1.97; worst 1, 1.53, 1.97, 1.97
    let best_hand = (0.0 + 0.44 + 0.97 + 1.97) / 4.0;
    let worst_hand = (1.0 + 1.53 + 1.97 + 1.97) / 4.0;
    let oracle = pr_oracle_of(&normalized, &risk);
    let worst = pr_value(&risk, &[0, 2, 1, 3]).unwrap();
    let ok = risk_ok && (oracle - best_hand).abs() <= 1e-12 && (worst - worst_hand).abs() <= 1e-12;
    outcome(ok, format!("risk={risk:?} pr_oracle={oracle:.6} (hand {best_hand}) worst={worst:.6} (hand {worst_hand})"))
}

fn random_baseline() -> Outcome {
    let risk = [1.0f64, 0.44, 0.53, 0.0];
    let exact = pr_random_expected(&risk);
    let passes = (0..20u64)
        .filter(|&seed| (pr_random_mean_of_risk(&risk, 1000, seed).unwrap() - 1.23125).abs() <= 0.03)
        .count();
    outcome(
        passes >= 19 && (exact - 1.23125).abs() <= 1e-12,
        format!("{passes}/20 seeds within 0.03 of 1.23125; closed form {exact}"),
    )
}

fn prr_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let baseline = RandomBaseline::default();
    let n = 100;

    let mut oracle_ok = 0;
    for _ in 0..50 {
        let q: Vec<f64> = (0..n).map(|_| rng.random()).collect();
        let u: Vec<f64> = q.iter().map(|v| -v).collect();
        if prr::prr_values(&u, &q, baseline).unwrap().prr == 1.0 {
            oracle_ok += 1;
        }
    }

    let q: Vec<f64> = (0..n).map(|_| rng.random()).collect();
    let reference = QualityReference::new(&q, baseline).unwrap();
    let mean_random = (0..200)
        .map(|_| {
            let u: Vec<f64> = (0..n).map(|_| rng.random()).collect();
            reference.evaluate(&u).unwrap().prr
        })
        .sum::<f64>()
        / 200.0;

    let mut monotone_ok = true;
    let mut affine_err: f64 = 0.0;
    for _ in 0..50 {
        let q: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
        let u: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
        let base = prr::prr_values(&u, &q, baseline).unwrap().prr;
        let fu: Vec<f64> = u.iter().map(|v| v.exp() + v.powi(3)).collect();
        monotone_ok &= prr::prr_values(&fu, &q, baseline).unwrap().prr == base;
        let (a, b) = (rng.random_range(0.01..50.0), rng.random_range(-50.0..50.0));
        let aq: Vec<f64> = q.iter().map(|v| a * v + b).collect();
        affine_err = affine_err.max((prr::prr_values(&u, &aq, baseline).unwrap().prr - base).abs());
    }
    outcome(
        oracle_ok == 50 && mean_random.abs() <= 0.05 && monotone_ok && affine_err <= 1e-9,
        format!(
            "oracle=1.0 in {oracle_ok}/50; random mean {mean_random:+.4}; monotone exact={monotone_ok}; max affine diff {affine_err:.1e}"
        ),
    )
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

fn brute_force_optimality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut matched = 0;
    for k in 0..100 {
        let n = 1 + k % 6;
        let q: Vec<f64> = (0..n).map(|_| rng.random_range(0..6) as f64 / 5.0).collect();
        let risk = prr::risk_from_quality(&q).unwrap();
        let brute = permutations(n)
            .iter()
            .map(|p| pr_value(&risk, p).unwrap())
            .fold(f64::INFINITY, f64::min);
        if pr_oracle_of(&q, &risk) == brute {
            matched += 1;
        }
    }
    outcome(matched == 100, format!("{matched}/100 instances equal the minimum over all orders"))
}

fn spectral_checks() -> Outcome {
    let mut detail = Vec::new();
    let mut ok = true;
    for c in 1..=4usize {
        let sizes: Vec<usize> = (0..c).map(|b| 2 + b % 2).collect();
        let labels: Vec<usize> = sizes.iter().enumerate().flat_map(|(b, &s)| std::iter::repeat_n(b, s)).collect();
        let m = labels.len();
        let g = SimilarityGraph::from_weights(Matrix::from_fn(m, m, |i, j| {
            if labels[i] == labels[j] {
                1.0
            } else {
                0.0
            }
        }))
        .unwrap();
        let e = eigv(&g);
        let sets = num_sets(&g, 0.5);
        ok &= (e - c as f64).abs() <= 1e-6 && sets == c;
        detail.push(format!("c={c}: eigv={e:.9} sets={sets}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let m = rng.random_range(2..=10);
        let mut w = Matrix::identity(m);
        for i in 0..m {
            for j in (i + 1)..m {
                let v: f64 = rng.random();
                w[(i, j)] = v;
                w[(j, i)] = v;
            }
        }
        let g = SimilarityGraph::from_weights(w).unwrap();
        let (vals, _) = blackbox::laplacian_spectrum(&g);
        worst = worst.max((vals.iter().sum::<f64>() - g.laplacian().trace()).abs());
    }
    ok &= worst <= 1e-6;
    detail.push(format!("max |sum(lambda) - tr(L)| = {worst:.1e}"));
    outcome(ok, detail.join("; "))
}

fn ensemble_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut max_trmi: f64 = 0.0;
    let mut max_srmi: f64 = 0.0;
    for _ in 0..50 {
        let members = rng.random_range(2..6);
        let raw: Vec<f64> = (0..4).map(|_| rng.random::<f64>() + 0.01).collect();
        let total: f64 = raw.iter().sum();
        let p: Vec<f64> = raw.iter().map(|v| v / total).collect();
        let block = EnsembleBlock {
            member_count: members,
            token_distributions: vec![
                PositionDistributions {
                    token_ids: vec![1, 2, 3],
                    member_probs: vec![p; members],
                };
                2
            ],
        };
        max_trmi = max_trmi.max(token_rmi::<f64>(&block).unwrap().abs());
        let samples = (0..3)
            .map(|_| {
                let lp = -rng.random_range(0.0..40.0);
                SampledGeneration {
                    text: "s".into(),
                    token_logprobs: vec![-0.3; 5],
                    ensemble_seq_logprobs: Some(vec![lp; members]),
                }
            })
            .collect();
        let record = GenerationRecord {
            id: "x".into(),
            input_text: "doc".into(),
            reference_summary: None,
            greedy_text: "a b".into(),
            greedy_token_logprobs: vec![-0.1, -0.2],
            greedy_token_entropies: None,
            samples,
            embedding: None,
            ensemble: Some(block),
        };
        max_srmi = max_srmi.max(seq_rmi::<f64>(&record).unwrap().abs());
    }
    let mut max_tu_err: f64 = 0.0;
    for m in 2..=8usize {
        let block = EnsembleBlock {
            member_count: m,
            token_distributions: vec![
                PositionDistributions {
                    token_ids: (0..m as u32).collect(),
                    member_probs: (0..m)
                        .map(|k| {
                            let mut p = vec![0.0; m + 1];
                            p[k] = 1.0;
                            p
                        })
                        .collect(),
                };
                3
            ],
        };
        let tu = token_total_uncertainty::<f64>(&block).unwrap();
        max_tu_err = max_tu_err.max((tu - (m as f64).ln()).abs());
    }
    outcome(
        max_trmi == 0.0 && max_srmi <= 1e-9 && max_tu_err <= 1e-9,
        format!("max T-RMI {max_trmi:.1e}; max S-RMI {max_srmi:.1e}; one-hot T-TU vs ln M {max_tu_err:.1e}"),
    )
}

fn lcs_table_f1(a: &[u32], b: &[u32]) -> f64 {
    let mut t = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            t[i][j] = if a[i - 1] == b[j - 1] {
                t[i - 1][j - 1] + 1
            } else {
                t[i - 1][j].max(t[i][j - 1])
            };
        }
    }
    let lcs = t[a.len()][b.len()];
    if lcs == 0 {
        return 0.0;
    }
    let p = lcs as f64 / a.len() as f64;
    let r = lcs as f64 / b.len() as f64;
    2.0 * p * r / (p + r)
}

fn counting_ranks(v: &[f64]) -> Vec<f64> {
    v.iter()
        .map(|&x| {
            let less = v.iter().filter(|&&y| y < x).count() as f64;
            let equal = v.iter().filter(|&&y| y == x).count() as f64;
            less + (equal + 1.0) / 2.0
        })
        .collect()
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    sab / (saa * sbb).sqrt()
}

fn pairwise_tau_b(x: &[f64], y: &[f64]) -> f64 {
    let (mut s, mut tx, mut ty, mut n0) = (0i64, 0u64, 0u64, 0u64);
    for i in 0..x.len() {
        for j in (i + 1)..x.len() {
            n0 += 1;
            let (dx, dy) = (x[i] - x[j], y[i] - y[j]);
            tx += u64::from(dx == 0.0);
            ty += u64::from(dy == 0.0);
            s += ((dx * dy > 0.0) as i64) - ((dx * dy < 0.0) as i64);
        }
    }
    s as f64 / (((n0 - tx) as f64) * ((n0 - ty) as f64)).sqrt()
}

fn metric_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut rouge_ok = 0;
    for _ in 0..500 {
        let a: Vec<u32> = (0..rng.random_range(0..=12)).map(|_| rng.random_range(0..6)).collect();
        let b: Vec<u32> = (0..rng.random_range(0..=12)).map(|_| rng.random_range(0..6)).collect();
        rouge_ok += usize::from(rouge_l_tokens::<f64, u32>(&a, &b) == lcs_table_f1(&a, &b));
    }
    let mut rank_ok = 0;
    let mut rank_total = 0;
    while rank_total < 500 {
        let n = rng.random_range(2..=10);
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(0..5) as f64).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(0..5) as f64).collect();
        if x.iter().all(|&v| v == x[0]) || y.iter().all(|&v| v == y[0]) {
            continue;
        }
        rank_total += 1;
        let s = rank_correlation(&x, &y, RankCorrelation::Spearman).unwrap();
        let k = rank_correlation(&x, &y, RankCorrelation::Kendall).unwrap();
        rank_ok += usize::from(s == pearson(&counting_ranks(&x), &counting_ranks(&y)) && k == pairwise_tau_b(&x, &y));
    }
    let mut maha_err: f64 = 0.0;
    for _ in 0..100 {
        let d = rng.random_range(1..=8);
        let a = DMatrix::<f64>::from_fn(d, d, |_, _| rng.random_range(-1.0..1.0));
        let cov = &a * a.transpose() + DMatrix::identity(d, d) * 0.1;
        let mean: Vec<f64> = (0..d).map(|_| rng.random_range(-2.0..2.0)).collect();
        let x: Vec<f64> = (0..d).map(|_| rng.random_range(-3.0..3.0)).collect();
        let diff = DVector::from_iterator(d, x.iter().zip(&mean).map(|(a, b)| a - b));
        let expected = diff.dot(&cov.clone().lu().solve(&diff).unwrap()).sqrt();
        let model = DensityModel::from_gaussian(mean, Matrix::from_fn(d, d, |i, j| cov[(i, j)])).unwrap();
        maha_err = maha_err.max((mahalanobis(&x, &model).unwrap() - expected).abs());
    }
    outcome(
        rouge_ok == 500 && rank_ok == 500 && maha_err <= 1e-8,
        format!("rouge exact {rouge_ok}/500; rank exact {rank_ok}/500; max mahalanobis diff {maha_err:.1e}"),
    )
}

fn human_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let n = 40;
    let annotations: Vec<HumanAnnotation> = ids(n)
        .into_iter()
        .map(|id| {
            let total = rng.random_range(5..30);
            let e = rng.random_range(0..=total);
            HumanAnnotation {
                id,
                total_words: total,
                errors: ErrorCounts {
                    EI: e,
                    MR: e,
                    SOAF: e,
                    RE: e,
                    TME: e,
                    CO: e,
                    NMS: e,
                },
            }
        })
        .collect();
    let nlg = vec![ScoreVector::new(
        "human-as-metric",
        ScoreKind::Nlg,
        ids(n),
        annotations.iter().map(|a| human_score::<f64>(a, ErrorType::EI)).collect(),
    )
    .unwrap()];
    let table = run_experiment(
        ExperimentKind::NlgHum,
        ExperimentInput {
            ue: &[],
            nlg: &nlg,
            annotations: Some(&annotations),
        },
        RandomBaseline::default(),
    )
    .unwrap();
    let cells = table.values.iter().flatten().count();
    let ones = table.values.iter().flatten().filter(|&&v| v == 1.0).count();
    outcome(cells == 7 && ones == cells, format!("{ones}/{cells} cells exactly 1.0"))
}

fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn run_pipeline(out: &Path) -> Result<(), String> {
    let config = fixture_dir().join("config.toml");
    for args in [
        vec!["score"],
        vec!["evaluate", "--intersect"],
        vec!["correlate"],
    ] {
        let status = Command::new(env!("CARGO_BIN_EXE_sumue"))
            .arg("--config")
            .arg(&config)
            .arg("--seed")
            .arg("42")
            .arg("--out")
            .arg(out)
            .args(&args)
            .env("RUST_LOG", "error")
            .status()
            .map_err(|e| e.to_string())?;
        if !status.success() {
            return Err(format!("{args:?} exited with {status}"));
        }
    }
    Ok(())
}

fn snapshot(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.insert(path.strip_prefix(dir).unwrap().to_path_buf(), std::fs::read(&path).unwrap());
            }
        }
    }
    out
}

fn end_to_end_determinism() -> Outcome {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    if let Err(e) = run_pipeline(a.path()).and_then(|_| run_pipeline(b.path())) {
        return outcome(false, e);
    }
    let (sa, sb) = (snapshot(a.path()), snapshot(b.path()));
    let csvs = sa.keys().filter(|p| p.extension().is_some_and(|e| e == "csv")).count();
    let differing: Vec<String> = sa
        .keys()
        .chain(sb.keys())
        .filter(|p| sa.get(*p) != sb.get(*p))
        .map(|p| p.display().to_string())
        .collect();
    outcome(
        differing.is_empty() && csvs >= 3,
        if differing.is_empty() {
            format!("{} files ({csvs} CSV) byte-identical across runs", sa.len())
        } else {
            format!("differing files: {}", differing.join(", "))
        },
    )
}

type Criterion = (&'static str, Duration, fn() -> Outcome);

fn main() {
    let criteria: Vec<Criterion> = vec![
        ("fig2-pipeline-check", Duration::from_millis(1), fig2_pipeline),
        ("random-baseline-oracle", Duration::from_secs(1), random_baseline),
        ("prr-identities", Duration::from_secs(10), prr_identities),
        ("brute-force-optimality", Duration::from_secs(5), brute_force_optimality),
        ("spectral-checks", Duration::from_secs(2), spectral_checks),
        ("ensemble-identities", Duration::from_secs(10), ensemble_identities),
        ("metric-oracles", Duration::from_secs(10), metric_oracles),
        ("human-experiment-identity", Duration::from_secs(10), human_identity),
        ("end-to-end-determinism", Duration::from_secs(30), end_to_end_determinism),
    ];
    let mut failed = 0;
    for (name, budget, check) in criteria {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let ok = result.ok && elapsed <= budget;
        failed += usize::from(!ok);
        println!(
            "{} {name}: {} [{:.3} ms, budget {} ms]",
            if ok { "PASS" } else { "FAIL" },
            result.detail,
            elapsed.as_secs_f64() * 1e3,
            budget.as_millis()
        );
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
