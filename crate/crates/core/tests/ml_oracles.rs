use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use sstecg::ml::smo::{self, kkt_violation, SmoOptions};
use sstecg::ml::{
    evaluate, grid_search_cv, knn_fit_predict, svm_train, Dataset, DenseGram, EvalReport, SolverOptions, SvmModel,
    SvmParams,
};

fn gram(x: &[Vec<f64>], gamma: f64) -> Vec<Vec<f64>> {
    x.iter()
        .map(|a| {
            x.iter()
                .map(|b| (-gamma * a.iter().zip(b).map(|(p, q)| (p - q).powi(2)).sum::<f64>()).exp())
                .collect()
        })
        .collect()
}

fn objective(k: &[Vec<f64>], y: &[f64], a: &[f64]) -> f64 {
    let n = a.len();
    let mut q = 0.0;
    for i in 0..n {
        for j in 0..n {
            q += a[i] * a[j] * y[i] * y[j] * k[i][j];
        }
    }
    0.5 * q - a.iter().sum::<f64>()
}

/// Gaussian elimination with partial pivoting; `None` if singular.
fn solve_linear(mut m: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let p = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[p][col].abs() < 1e-12 {
            return None;
        }
        m.swap(col, p);
        b.swap(col, p);
        for r in col + 1..n {
            let f = m[r][col] / m[col][col];
            for c in col..n {
                m[r][c] -= f * m[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| m[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / m[r][r];
    }
    Some(x)
}

/// Global minimum of the dual by enumerating which variables sit at 0, at C
/// or strictly inside, and solving the KKT system of the free ones.
fn active_set_oracle(k: &[Vec<f64>], y: &[f64], c: &[f64]) -> (Vec<f64>, f64) {
    let n = y.len();
    let mut best: Option<(Vec<f64>, f64)> = None;
    for code in 0..3usize.pow(n as u32) {
        let state: Vec<usize> = (0..n).map(|i| code / 3usize.pow(i as u32) % 3).collect();
        let free: Vec<usize> = (0..n).filter(|&i| state[i] == 2).collect();
        let mut a: Vec<f64> = (0..n).map(|i| if state[i] == 1 { c[i] } else { 0.0 }).collect();
        if !free.is_empty() {
            let m = free.len();
            let mut mat = vec![vec![0.0; m + 1]; m + 1];
            let mut rhs = vec![0.0; m + 1];
            for (r, &i) in free.iter().enumerate() {
                for (s, &j) in free.iter().enumerate() {
                    mat[r][s] = y[i] * y[j] * k[i][j];
                }
                mat[r][m] = y[i];
                mat[m][r] = y[i];
                rhs[r] = 1.0 - (0..n).filter(|&j| state[j] == 1).map(|j| y[i] * y[j] * k[i][j] * c[j]).sum::<f64>();
            }
            rhs[m] = -(0..n).filter(|&j| state[j] == 1).map(|j| y[j] * c[j]).sum::<f64>();
            let Some(sol) = solve_linear(mat, rhs) else { continue };
            for (r, &i) in free.iter().enumerate() {
                a[i] = sol[r];
            }
        }
        if a.iter().zip(c).any(|(v, cv)| *v < -1e-12 || *v > cv + 1e-12) {
            continue;
        }
        if a.iter().zip(y).map(|(v, s)| v * s).sum::<f64>().abs() > 1e-9 {
            continue;
        }
        let f = objective(k, y, &a);
        if best.as_ref().is_none_or(|b| f < b.1) {
            best = Some((a, f));
        }
    }
    best.unwrap()
}

/// Euclidean projection onto {0 <= a <= c, y'a = 0} by bisection on the
/// multiplier of the equality.
fn project(v: &[f64], y: &[f64], c: &[f64]) -> Vec<f64> {
    let at = |nu: f64| -> Vec<f64> { v.iter().zip(y).zip(c).map(|((vi, yi), ci)| (vi - nu * yi).clamp(0.0, *ci)).collect() };
    let h = |nu: f64| at(nu).iter().zip(y).map(|(a, s)| a * s).sum::<f64>();
    let bound = v.iter().map(|x| x.abs()).fold(0.0, f64::max) + c.iter().cloned().fold(0.0, f64::max) + 1.0;
    let (mut lo, mut hi) = (-bound, bound);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if h(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    at(0.5 * (lo + hi))
}

/// Accelerated projected gradient with adaptive restart.
fn projected_gradient_oracle(k: &[Vec<f64>], y: &[f64], c: &[f64]) -> f64 {
    let n = y.len();
    let q: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| y[i] * y[j] * k[i][j]).collect()).collect();
    let l: f64 = q.iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
    let grad = |a: &[f64]| -> Vec<f64> { (0..n).map(|i| q[i].iter().zip(a).map(|(x, y)| x * y).sum::<f64>() - 1.0).collect() };
    let mut a = vec![0.0; n];
    let mut z = a.clone();
    let mut t = 1.0f64;
    let mut f_prev = objective(k, y, &a);
    for _ in 0..300_000 {
        let g = grad(&z);
        let step: Vec<f64> = z.iter().zip(&g).map(|(zi, gi)| zi - gi / l).collect();
        let next = project(&step, y, c);
        let f = objective(k, y, &next);
        if f > f_prev {
            z = a.clone();
            t = 1.0;
            continue;
        }
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        z = next.iter().zip(&a).map(|(x, xo)| x + (t - 1.0) / t_next * (x - xo)).collect();
        a = next;
        t = t_next;
        f_prev = f;
    }
    f_prev
}

#[test]
fn xor_matches_active_set_enumeration() {
    let x = vec![vec![1.0, 1.0], vec![-1.0, -1.0], vec![1.0, -1.0], vec![-1.0, 1.0]];
    let y = vec![1.0, 1.0, -1.0, -1.0];
    let c = vec![10.0; 4];
    let k = gram(&x, 1.0);
    let (a_ref, f_ref) = active_set_oracle(&k, &y, &c);
    let sol = smo::solve(&DenseGram(k.clone()), &y, &c, &SmoOptions::default()).unwrap();
    assert!(sol.converged);
    assert!((sol.objective - f_ref).abs() <= 1e-4 * f_ref.abs(), "{} vs {f_ref}", sol.objective);
    for (a, r) in sol.alpha.iter().zip(&a_ref) {
        assert!((a - r).abs() < 1e-3, "{a} vs {r}");
    }

    // The same points through the multiclass trainer (already standardized).
    let d = Dataset::new(x.clone(), vec![0, 0, 1, 1], vec!["p".into(), "n".into()]).unwrap();
    let m = svm_train(&d, &SvmParams::new(10.0, 1.0, vec![]), &SolverOptions::default()).unwrap();
    for (xi, yi) in x.iter().zip(&d.y) {
        assert_eq!(m.predict(xi).unwrap(), *yi);
    }
}

#[test]
fn random_small_problems_match_projected_gradient() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for case in 0..10 {
        let n = rng.gen_range(8..=20);
        let x: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)]).collect();
        let mut y: Vec<f64> = (0..n).map(|i| if x[i][0] + 0.5 * x[i][1] + rng.gen_range(-1.0..1.0) > 0.0 { 1.0 } else { -1.0 }).collect();
        y[0] = 1.0;
        y[1] = -1.0;
        let gamma = rng.gen_range(0.3..2.0);
        let base = rng.gen_range(0.5..10.0);
        let w_neg = rng.gen_range(0.5..3.0);
        let c: Vec<f64> = y.iter().map(|&s| if s > 0.0 { base } else { base * w_neg }).collect();
        let k = gram(&x, gamma);
        let f_ref = projected_gradient_oracle(&k, &y, &c);
        let g = DenseGram(k.clone());
        let sol = smo::solve(&g, &y, &c, &SmoOptions::default()).unwrap();
        let f = objective(&k, &y, &sol.alpha);
        assert!((f - f_ref).abs() <= 1e-4 * f_ref.abs(), "case {case}: smo {f} vs oracle {f_ref}");
        assert!((sol.objective - f).abs() <= 1e-9 * f.abs());
        assert!(kkt_violation(&g, &y, &c, &sol.alpha) <= 1e-3);
        for (a, cv) in sol.alpha.iter().zip(&c) {
            assert!(*a >= 0.0 && *a <= *cv);
        }
        let eq: f64 = sol.alpha.iter().zip(&y).map(|(a, s)| a * s).sum();
        let scale: f64 = sol.alpha.iter().sum::<f64>().max(1.0);
        assert!(eq.abs() <= 1e-6 * scale, "y'a = {eq}");
    }
}

fn blobs(centers: &[[f64; 2]], sd: f64, per: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, sd).unwrap();
    let mut x = Vec::new();
    let mut y = Vec::new();
    for (k, c) in centers.iter().enumerate() {
        for _ in 0..per {
            x.push(vec![c[0] + noise.sample(&mut rng), c[1] + noise.sample(&mut rng)]);
            y.push(k);
        }
    }
    Dataset::new(x, y, (0..centers.len()).map(|k| format!("class{k}")).collect()).unwrap()
}

#[test]
fn separated_blobs_are_learned_exactly() {
    let d = blobs(&[[0.0, 0.0], [8.0, 0.0]], 1.0, 60, 1);
    for (c, g) in [(0.1, 0.1), (1.0, 1.0), (100.0, 5.0)] {
        let m = svm_train(&d, &SvmParams::new(c, g, vec![]), &SolverOptions::default()).unwrap();
        assert_eq!(m.predict_all(&d.x).unwrap(), d.y, "C={c} gamma={g}");
    }
}

#[test]
fn weighted_bounds_hold_per_class() {
    let d = blobs(&[[0.0, 0.0], [1.5, 0.0], [0.0, 1.5]], 1.0, 40, 2);
    let p = SvmParams::new(2.0, 0.7, vec![0.5, 3.0, 1.0]);
    let m = svm_train(&d, &p, &SolverOptions::default()).unwrap();
    assert_eq!(m.pairs.len(), 3);
    for pair in &m.pairs {
        let mut sum = 0.0;
        for &a in &pair.coef {
            let (class, alpha) = if a > 0.0 { (pair.pos, a) } else { (pair.neg, -a) };
            assert!(alpha <= p.c * p.weight(class) * (1.0 + 1e-12));
            sum += a;
        }
        let scale: f64 = pair.coef.iter().map(|a| a.abs()).sum();
        assert!(sum.abs() <= 1e-6 * scale, "sum y a = {sum}");
        assert!(pair.gap < 1e-3);
    }
}

#[test]
fn prediction_follows_decision_sign() {
    let d = blobs(&[[0.0, 0.0], [2.0, 1.0]], 1.0, 50, 3);
    let m = svm_train(&d, &SvmParams::new(1.0, 0.5, vec![]), &SolverOptions::default()).unwrap();
    let pair = &m.pairs[0];
    let pos_sv = pair.coef.iter().position(|&a| a > 0.0).unwrap();
    let neg_sv = pair.coef.iter().position(|&a| a < 0.0).unwrap();
    // Back to raw coordinates.
    let raw = |z: &[f64]| -> Vec<f64> {
        z.iter().zip(&m.standardizer.mean).zip(&m.standardizer.scale).map(|((v, mu), s)| v * s + mu).collect()
    };
    let (a, b) = (raw(&pair.support[pos_sv]), raw(&pair.support[neg_sv]));
    let mut flips = 0;
    let mut prev = None;
    for s in 0..=400 {
        let t = s as f64 / 400.0;
        let x: Vec<f64> = a.iter().zip(&b).map(|(p, q)| p + t * (q - p)).collect();
        let dv = m.decision_values(&x).unwrap()[0];
        let class = m.predict(&x).unwrap();
        assert_eq!(class, if dv > 0.0 { pair.pos } else { pair.neg }, "t = {t}, d = {dv}");
        if prev.is_some_and(|p| p != class) {
            flips += 1;
        }
        prev = Some(class);
    }
    assert!(flips >= 1);
}

#[test]
fn affine_rescaling_does_not_change_predictions() {
    let d = blobs(&[[0.0, 0.0], [1.0, 2.0], [2.5, 0.5]], 0.8, 40, 4);
    let test = blobs(&[[0.0, 0.0], [1.0, 2.0], [2.5, 0.5]], 0.8, 30, 5);
    let p = SvmParams::new(3.0, 0.8, vec![]);
    let m = svm_train(&d, &p, &SolverOptions::default()).unwrap();
    let f = |x: &[Vec<f64>]| -> Vec<Vec<f64>> { x.iter().map(|r| vec![250.0 * r[0] - 7.0, 0.01 * r[1] + 3.0]).collect() };
    let d2 = Dataset::new(f(&d.x), d.y.clone(), d.classes.clone()).unwrap();
    let m2 = svm_train(&d2, &p, &SolverOptions::default()).unwrap();
    assert_eq!(m.predict_all(&test.x).unwrap(), m2.predict_all(&f(&test.x)).unwrap());
}

#[test]
fn pooled_votes_of_identical_models() {
    let d = blobs(&[[0.0, 0.0], [1.5, 0.0], [0.0, 1.5], [1.5, 1.5]], 0.9, 30, 6);
    let m = svm_train(&d, &SvmParams::new(1.0, 1.0, vec![]), &SolverOptions::default()).unwrap();
    let test = blobs(&[[0.7, 0.7]], 1.0, 100, 7);
    for x in &test.x {
        assert_eq!(SvmModel::predict_merged(&[(&m, x), (&m, x)]).unwrap(), m.predict(x).unwrap());
    }
}

#[test]
fn interior_training_point_keeps_its_class() {
    let d = blobs(&[[0.0, 0.0], [5.0, 5.0]], 0.5, 40, 8);
    let m = svm_train(&d, &SvmParams::new(1.0, 0.5, vec![]), &SolverOptions::default()).unwrap();
    assert_eq!(m.predict(&[0.0, 0.0]).unwrap(), 0);
    assert_eq!(m.predict(&[5.0, 5.0]).unwrap(), 1);
    assert!(m.predict(&[f64::INFINITY, 0.0]).is_err());
    assert!(m.predict(&[0.0]).is_err());
}

#[test]
fn single_sample_class_is_named() {
    let d = Dataset::new(
        vec![vec![0.0], vec![1.0], vec![2.0], vec![3.0]],
        vec![0, 0, 0, 1],
        vec!["N".into(), "F".into()],
    )
    .unwrap();
    let err = svm_train(&d, &SvmParams::new(1.0, 1.0, vec![]), &SolverOptions::default()).unwrap_err();
    assert!(err.to_string().contains('F'), "{err}");
    let one = Dataset::new(vec![vec![0.0], vec![1.0]], vec![0, 0], vec!["N".into(), "F".into()]).unwrap();
    assert!(svm_train(&one, &SvmParams::new(1.0, 1.0, vec![]), &SolverOptions::default()).is_err());
}

#[test]
fn model_json_round_trip() {
    let d = blobs(&[[0.0, 0.0], [2.0, 0.0], [0.0, 2.0]], 0.7, 20, 9);
    let m = svm_train(&d, &SvmParams::new(2.0, 0.5, vec![1.0, 2.0, 1.0]), &SolverOptions::default()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("m.json");
    m.save_json(&p).unwrap();
    let back = SvmModel::load_json(&p).unwrap();
    assert_eq!(back.predict_all(&d.x).unwrap(), m.predict_all(&d.x).unwrap());
    let text = std::fs::read_to_string(&p).unwrap().replacen("\"version\":1", "\"version\":99", 1);
    std::fs::write(&p, text).unwrap();
    assert!(SvmModel::load_json(&p).is_err());
}

#[test]
fn grid_search_picks_single_point_and_separable_winner() {
    let d = blobs(&[[0.0, 0.0], [9.0, 0.0]], 1.0, 30, 10);
    let one = vec![SvmParams::new(2.0, 0.3, vec![])];
    let r = grid_search_cv(&d, &one, &SolverOptions::default(), 5, 0).unwrap();
    assert_eq!(r.best, one[0]);
    let grid = vec![SvmParams::new(1e-4, 0.01, vec![1.0, 1e-3]), SvmParams::new(100.0, 0.5, vec![])];
    let r = grid_search_cv(&d, &grid, &SolverOptions::default(), 5, 0).unwrap();
    assert_eq!(r.best, grid[1]);
    assert_eq!(r.best_score, 1.0);
}

#[test]
fn knn_on_well_separated_blobs() {
    let centers = [[0.0, 0.0], [6.0, 0.0], [3.0, 6.0]];
    let train = blobs(&centers, 1.0, 200, 11);
    let test = blobs(&centers, 1.0, 200, 12);
    let pred = knn_fit_predict(&train, &test.x, 9).unwrap();
    let acc = pred.iter().zip(&test.y).filter(|(p, y)| p == y).count() as f64 / pred.len() as f64;
    assert!(acc >= 0.99, "{acc}");
}

#[test]
fn published_binary_confusion() {
    // Rows: reference abnormal, normal; columns: predicted abnormal, normal.
    let r = EvalReport::from_confusion(vec!["abnormal".into(), "N".into()], &[vec![5004, 428], vec![5879, 38292]]).unwrap();
    assert_eq!(r.total, 49603);
    assert_eq!(format!("{:.2}", 100.0 * r.se[0].unwrap()), "92.12");
    assert_eq!(format!("{:.2}", 100.0 * r.acc), "87.29");
    assert_eq!(format!("{:.2}", 100.0 * r.se[1].unwrap()), "86.69");
}

#[test]
fn published_four_class_row() {
    let r = EvalReport::from_confusion(
        ["N", "S", "V", "F"].iter().map(|s| s.to_string()).collect(),
        &[vec![36721, 2694, 553, 4203], vec![0; 4], vec![0; 4], vec![0; 4]],
    )
    .unwrap();
    assert_eq!(r.row_total(0), 44171);
    assert_eq!(format!("{:.2}", 100.0 * r.se[0].unwrap()), "83.13");
}

#[test]
fn evaluate_counts_sum() {
    let r = evaluate(&[0, 1, 2, 2], &[0, 2, 2, 1], &["a".into(), "b".into(), "c".into()]).unwrap();
    assert_eq!(r.total, 4);
    assert_eq!(r.acc, 0.5);
}
