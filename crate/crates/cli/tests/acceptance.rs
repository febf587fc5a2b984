//! Acceptance suite: one test per criterion, each printing a `[PASS]` line
//! (run with `-- --nocapture` to see them). Oracles here are independent
//! routes: a minimax characterization for isotonic regression and a
//! grid/ternary search for the sigmoid likelihood.

use std::path::Path;

use boostcal_core::boost::{boost_train, stage_weight, BaseSpec, BoostConfig, EarlyStop, Loss};
use boostcal_core::calib::{
    cv_calibration_scores, inverse_logit, logistic_correction, pav_fit, platt_fit,
    platt_targets, CalibrationSet, SigmoidCalibrator,
};
use boostcal_core::dataset::{
    load_dataset, stratified_split, DataFormat, LabelColumn, LabelPolicy, LoadOptions, SplitSpec,
};
use boostcal_core::harness::{run_learning_curve, ExperimentConfig};
use boostcal_core::metrics::{brier_score, cross_entropy, roc_auc, DEFAULT_CLIP_EPS};
use boostcal_core::synthetic::{additive_logistic, two_gaussians};
use boostcal_core::weak::{weighted_error, Stump, WeakModel};

// ---------------------------------------------------------------------------
// deterministic test-local randomness (independent of the crate's streams)

struct Mix(u64);

impl Mix {
    fn new(seed: u64) -> Mix {
        Mix(seed.wrapping_add(0x9e37_79b9_7f4a_7c15))
    }
    fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
    fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }
}

// ---------------------------------------------------------------------------
// criterion 1 + 2: PAV against an exact independent oracle

/// Exact isotonic fit by the minimax identity: fitted value at position j is
/// `max over a <= j of (min over b >= j of mean(targets[a..=b]))`. Distinct
/// scores assumed (the caller draws them that way).
fn minimax_isotonic(targets: &[f64]) -> Vec<f64> {
    let n = targets.len();
    let mut prefix = vec![0.0f64; n + 1];
    for (i, &t) in targets.iter().enumerate() {
        prefix[i + 1] = prefix[i] + t;
    }
    let avg = |a: usize, b: usize| (prefix[b + 1] - prefix[a]) / (b + 1 - a) as f64;
    (0..n)
        .map(|j| {
            let mut best = f64::NEG_INFINITY;
            for a in 0..=j {
                let mut worst = f64::INFINITY;
                for b in j..n {
                    worst = worst.min(avg(a, b));
                }
                best = best.max(worst);
            }
            best
        })
        .collect()
}

fn sse(fitted: &[f64], targets: &[f64]) -> f64 {
    fitted.iter().zip(targets).map(|(f, t)| (f - t) * (f - t)).sum()
}

#[test]
fn criterion_01_pav_matches_exact_oracle_exhaustively() {
    let mut rng = Mix::new(1);
    let mut cases = 0usize;
    for n in 1usize..=10 {
        for mask in 0u32..(1 << n) {
            let targets: Vec<u8> = (0..n).map(|b| ((mask >> b) & 1) as u8).collect();
            let floats: Vec<f64> = targets.iter().map(|&t| f64::from(t)).collect();
            let draws = if n <= 2 { 4 } else { 100 };
            for _ in 0..draws {
                // distinct random scores: sorted uniforms with index offsets
                let mut scores: Vec<f64> =
                    (0..n).map(|i| rng.uniform() + 2.0 * i as f64).collect();
                // shuffle so sorting inside pav_fit is exercised
                for i in (1..n).rev() {
                    let j = (rng.next_u64() % (i as u64 + 1)) as usize;
                    scores.swap(i, j);
                }
                let sorted_targets: Vec<f64> = {
                    let mut idx: Vec<usize> = (0..n).collect();
                    idx.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).unwrap());
                    idx.iter().map(|&i| floats[i]).collect()
                };

                let set = CalibrationSet::from_pairs(scores.clone(), targets.clone()).unwrap();
                let cal = pav_fit(&set).unwrap();
                let fitted: Vec<f64> = scores.iter().map(|&s| cal.apply(s)).collect();
                let oracle = minimax_isotonic(&sorted_targets);

                let got = sse(&fitted, &floats);
                let want = sse(&oracle, &sorted_targets);
                assert!(
                    (got - want).abs() < 1e-12,
                    "n={n} mask={mask}: pav sse {got} oracle {want}"
                );
                assert!(
                    cal.values.windows(2).all(|w| w[0] < w[1]),
                    "block values must increase"
                );
                cases += 1;
            }
        }
    }
    println!("[PASS] criterion 1: PAV sse equals the exact isotonic oracle on {cases} cases");
}

#[test]
fn criterion_02_pav_hand_cases() {
    let set = CalibrationSet::from_pairs(vec![0.3, 0.7], vec![1, 0]).unwrap();
    let cal = pav_fit(&set).unwrap();
    assert_eq!(cal.values, vec![0.5]);

    let set =
        CalibrationSet::from_pairs(vec![0.1, 0.2, 0.3, 0.4, 0.5], vec![0, 1, 0, 1, 1]).unwrap();
    let cal = pav_fit(&set).unwrap();
    let fitted: Vec<f64> = [0.1, 0.2, 0.3, 0.4, 0.5].iter().map(|&s| cal.apply(s)).collect();
    assert_eq!(fitted, vec![0.0, 0.5, 0.5, 1.0, 1.0]);
    println!("[PASS] criterion 2: hand-run PAV cases pool to 0.5 and [0,0.5,0.5,1,1] exactly");
}

// ---------------------------------------------------------------------------
// criterion 3: Platt optimizer against a grid-search oracle

/// NLL of the sigmoid with soft targets, written independently of the
/// library (`softplus(z) - (1 - t) z` form, one softplus per point).
fn oracle_nll(scores: &[f64], soft_targets: &[f64], a: f64, b: f64) -> f64 {
    let mut total = 0.0;
    for (&f, &t) in scores.iter().zip(soft_targets) {
        let z = a * f + b;
        let softplus = z.max(0.0) + (-z.abs()).exp().ln_1p();
        total += t * softplus + (1.0 - t) * (softplus - z);
    }
    total
}

/// Minimum NLL over the grid A in [-8, 0], B in [-2, 6], step 0.01. The NLL
/// is strictly convex in B for fixed A, so each column is minimized by
/// ternary search over the grid indices; the result equals the full scan.
fn grid_oracle_min_nll(scores: &[f64], soft_targets: &[f64]) -> f64 {
    let b_at = |j: usize| -2.0 + j as f64 * 0.01;
    let mut best = f64::INFINITY;
    for ai in 0..=800 {
        let a = -8.0 + ai as f64 * 0.01;
        let eval = |j: usize| oracle_nll(scores, soft_targets, a, b_at(j));
        let (mut lo, mut hi) = (0usize, 800usize);
        while hi - lo > 2 {
            let m1 = lo + (hi - lo) / 3;
            let m2 = hi - (hi - lo) / 3;
            if eval(m1) <= eval(m2) {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        for j in lo..=hi {
            best = best.min(eval(j));
        }
    }
    best
}

#[test]
fn criterion_03_platt_newton_vs_grid_oracle_and_recovery() {
    // part 1: fitted NLL never above the grid oracle
    let mut rng = Mix::new(3);
    for case in 0..50 {
        let gen_a = -6.0 * rng.uniform() - 0.5;
        let gen_b = 4.0 * rng.uniform() - 1.0;
        let mut scores = Vec::with_capacity(500);
        let mut targets = Vec::with_capacity(500);
        for _ in 0..500 {
            let f = rng.uniform();
            let p = 1.0 / (1.0 + (gen_a * f + gen_b).exp());
            scores.push(f);
            targets.push(u8::from(rng.uniform() < p));
        }
        if targets.iter().all(|&t| t == targets[0]) {
            targets[0] = 1 - targets[0];
        }
        let set = CalibrationSet::from_pairs(scores.clone(), targets.clone()).unwrap();
        let fitted = platt_fit(&set).unwrap();

        let (yp, ym) = platt_targets(set.n_plus(), set.n_minus());
        let soft: Vec<f64> = targets.iter().map(|&t| if t == 1 { yp } else { ym }).collect();
        let oracle = grid_oracle_min_nll(&scores, &soft);
        assert!(
            fitted.nll <= oracle + 1e-6,
            "case {case}: newton nll {} above grid oracle {oracle}",
            fitted.nll
        );
    }

    // part 2: parameter recovery at N = 50,000
    let mut hits = 0;
    for seed in 0..10u64 {
        let mut rng = Mix::new(1000 + seed);
        let mut scores = Vec::with_capacity(50_000);
        let mut targets = Vec::with_capacity(50_000);
        for _ in 0..50_000 {
            let f = rng.uniform();
            let p = 1.0 / (1.0 + (-4.0 * f + 2.0).exp());
            scores.push(f);
            targets.push(u8::from(rng.uniform() < p));
        }
        let set = CalibrationSet::from_pairs(scores, targets).unwrap();
        let cal = platt_fit(&set).unwrap().calibrator;
        if (cal.a + 4.0).abs() < 0.15 && (cal.b - 2.0).abs() < 0.15 {
            hits += 1;
        }
    }
    assert!(hits >= 9, "parameter recovery in {hits}/10 seeds");
    println!(
        "[PASS] criterion 3: Newton <= grid oracle on 50 sets; (A,B) recovered in {hits}/10 seeds"
    );
}

// ---------------------------------------------------------------------------
// criterion 4: logistic-correction identity across score formulations

#[test]
fn criterion_04_logistic_correction_identity() {
    let mut rng = Mix::new(4);
    let mut checked = 0usize;
    for _ in 0..1000 {
        let t = 1 + (rng.next_u64() % 40) as usize;
        let stages: Vec<boostcal_core::boost::Stage> = (0..t)
            .map(|_| boostcal_core::boost::Stage {
                model: WeakModel::Stump(Stump {
                    feature: 0,
                    threshold: rng.uniform() * 2.0 - 1.0,
                    left_vote: if rng.uniform() < 0.5 { 1 } else { -1 },
                    right_vote: 0, // fixed below
                    degenerate: false,
                    width: 1,
                }),
                alpha: rng.uniform(),
            })
            .map(|mut s| {
                if let WeakModel::Stump(stump) = &mut s.model {
                    stump.right_vote = -stump.left_vote;
                }
                s
            })
            .collect();
        let e = boostcal_core::boost::BoostedEnsemble {
            stages,
            loss: Loss::Exponential,
            base: BaseSpec::Stump,
            width: 1,
            early_stop: None,
        };
        let x = [rng.uniform() * 3.0 - 1.5];
        let s = e.alpha_sum();
        if s == 0.0 {
            continue;
        }
        let f = e.normalized_score(&x).unwrap();
        let raw = e.raw_score(&x).unwrap();
        let via_sigmoid = SigmoidCalibrator::new(-4.0 * s, 2.0 * s).apply(f);
        let via_correction = logistic_correction(raw);
        assert!(
            (via_sigmoid - via_correction).abs() < 1e-12,
            "sigmoid {via_sigmoid} vs correction {via_correction} (S={s}, f={f}, F={raw})"
        );
        checked += 1;
    }
    assert!(checked >= 990);
    println!("[PASS] criterion 4: sigmoid(-4S,2S) on f equals logistic correction on F ({checked} cases)");
}

// ---------------------------------------------------------------------------
// criterion 5: AdaBoost half-error invariant

#[test]
fn criterion_05_adaboost_post_update_error_is_half() {
    let mut rounds_checked = 0usize;
    for seed in 0..6u64 {
        let d = two_gaussians(80 + 20 * seed as usize, 1.0 + 0.2 * seed as f64, seed);
        let cfg = BoostConfig::new(15, Loss::Exponential, BaseSpec::Stump);
        let e = boost_train(&d, &cfg).unwrap();
        let n = d.n_rows();
        let mut w = vec![1.0 / n as f64; n];
        for (round, stage) in e.stages.iter().enumerate() {
            if round + 1 == e.rounds() && e.early_stop == Some(EarlyStop::PerfectFit) {
                break;
            }
            let eps = weighted_error(&stage.model, &d, &w);
            assert!((stage.alpha - stage_weight(eps)).abs() < 1e-10);
            for i in 0..n {
                let vote = f64::from(stage.model.predict(d.row(i)).unwrap());
                w[i] *= (-stage.alpha * d.signed_label(i) * vote).exp();
            }
            let z: f64 = w.iter().sum();
            w.iter_mut().for_each(|x| *x /= z);
            let post = weighted_error(&stage.model, &d, &w);
            assert!(
                (post - 0.5).abs() < 1e-10,
                "seed {seed} round {round}: post-update error {post}"
            );
            rounds_checked += 1;
        }
    }
    assert!(rounds_checked >= 60);
    println!("[PASS] criterion 5: post-update weighted error = 0.5 on {rounds_checked} rounds across 6 datasets");
}

// ---------------------------------------------------------------------------
// criterion 6: distortion of the vote share over boosting rounds

fn tail_fraction(scores: &[f64]) -> f64 {
    scores.iter().filter(|&&f| f <= 0.05 || f >= 0.95).count() as f64 / scores.len() as f64
}

#[test]
fn criterion_06_tree_boosting_compresses_score_tails() {
    let mut wins = 0;
    for seed in 0..10u64 {
        let train = two_gaussians(2000, 1.5, seed);
        let test = two_gaussians(2000, 1.5, seed + 50_000);
        let cfg = BoostConfig::new(1024, Loss::Exponential, BaseSpec::Tree { max_depth: 3 });
        let e = boost_train(&train, &cfg).unwrap();
        let staged = e
            .staged_normalized_scores(&test, &[1, e.rounds().min(1024)])
            .unwrap();
        let early = tail_fraction(&staged[0]);
        let late = tail_fraction(&staged[1]);
        if late < early {
            wins += 1;
        }
    }
    assert!(wins >= 9, "tail compression in {wins}/10 seeds");
    println!("[PASS] criterion 6: f-score tail mass at 1024 tree rounds below round 1 in {wins}/10 seeds");
}

// ---------------------------------------------------------------------------
// criterion 7 + 11: calibration improves probabilities; rank invariance

#[test]
fn criterion_07_and_11_calibration_improves_and_preserves_rank() {
    let mut platt_wins = 0;
    let mut iso_wins = 0;
    let mut raw_ces = Vec::new();
    let mut platt_ces = Vec::new();
    let mut iso_ces = Vec::new();
    let mut rank_identical = true;
    for seed in 0..10u64 {
        let train = two_gaussians(2000, 1.5, seed + 100);
        let test = two_gaussians(2000, 1.5, seed + 60_000);
        let cfg = BoostConfig::new(256, Loss::Exponential, BaseSpec::Tree { max_depth: 3 });
        let e = boost_train(&train, &cfg).unwrap();
        let f_test = e.normalized_scores(&test).unwrap();
        let raw_ce = cross_entropy(&f_test, test.labels(), DEFAULT_CLIP_EPS).unwrap();
        let raw_brier = brier_score(&f_test, test.labels()).unwrap();

        let cal = cv_calibration_scores(&train, &cfg, 3, seed + 7).unwrap();
        let platt = platt_fit(&cal).unwrap().calibrator;
        assert!(platt.is_increasing(), "seed {seed}: fitted A = {} not negative", platt.a);
        let platt_probs: Vec<f64> = f_test.iter().map(|&f| platt.apply(f)).collect();
        let platt_ce = cross_entropy(&platt_probs, test.labels(), DEFAULT_CLIP_EPS).unwrap();
        let platt_brier = brier_score(&platt_probs, test.labels()).unwrap();

        let iso = pav_fit(&cal).unwrap();
        let iso_probs: Vec<f64> = f_test.iter().map(|&f| iso.apply(f)).collect();
        let iso_ce = cross_entropy(&iso_probs, test.labels(), DEFAULT_CLIP_EPS).unwrap();
        let iso_brier = brier_score(&iso_probs, test.labels()).unwrap();

        if platt_ce < raw_ce && platt_brier < raw_brier {
            platt_wins += 1;
        }
        if iso_ce < raw_ce && iso_brier < raw_brier {
            iso_wins += 1;
        }
        raw_ces.push(raw_ce);
        platt_ces.push(platt_ce);
        iso_ces.push(iso_ce);

        let raw_auc = roc_auc(&f_test, test.labels()).unwrap();
        let platt_auc = roc_auc(&platt_probs, test.labels()).unwrap();
        if raw_auc.to_bits() != platt_auc.to_bits() {
            rank_identical = false;
        }
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let platt_reduction = 1.0 - mean(&platt_ces) / mean(&raw_ces);
    let iso_reduction = 1.0 - mean(&iso_ces) / mean(&raw_ces);
    assert!(platt_wins >= 9, "platt beat raw in {platt_wins}/10 seeds");
    assert!(iso_wins >= 9, "isotonic beat raw in {iso_wins}/10 seeds");
    assert!(
        platt_reduction >= 0.10,
        "platt mean cross-entropy reduction {platt_reduction:.3} below 10%"
    );
    assert!(
        iso_reduction >= 0.10,
        "isotonic mean cross-entropy reduction {iso_reduction:.3} below 10%"
    );
    println!(
        "[PASS] criterion 7: platt {platt_wins}/10, iso {iso_wins}/10 wins; mean CE reduction platt {:.1}%, iso {:.1}%",
        100.0 * platt_reduction,
        100.0 * iso_reduction
    );
    assert!(rank_identical, "platt-calibrated AUC diverged from raw AUC");
    println!("[PASS] criterion 11: platt-calibrated AUC bit-identical to raw AUC on all 10 runs (A < 0)");
}

// ---------------------------------------------------------------------------
// criterion 8: small calibration sets favor Platt over isotonic

#[test]
fn criterion_08_small_calibration_sets_favor_platt() {
    let d = two_gaussians(1000, 1.5, 8);
    let mut cfg = ExperimentConfig::new(
        BaseSpec::Tree { max_depth: 2 },
        Loss::Exponential,
        vec![64],
        8,
    );
    cfg.trials = 20;
    cfg.calibration_sizes = vec![32, 64, 128];
    let report = run_learning_curve(&d, &cfg).unwrap();
    for &size in &[32usize, 64, 128] {
        let platt = report.mean_brier("platt", size).unwrap();
        let iso = report.mean_brier("isotonic", size).unwrap();
        assert!(
            platt <= iso,
            "size {size}: platt mean brier {platt} above isotonic {iso}"
        );
    }
    println!("[PASS] criterion 8: mean platt brier <= isotonic at calibration sizes 32/64/128 over 20 trials");
}

// ---------------------------------------------------------------------------
// criterion 9: log-loss boosting tracks exponential + logistic correction

#[test]
fn criterion_09_stump_logloss_near_equivalence() {
    let coefs = [1.5, -1.0, 0.8, -0.6, 1.2];
    let mut ce_exp = Vec::new();
    let mut ce_log = Vec::new();
    for seed in 0..10u64 {
        let (train, _) = additive_logistic(2000, &coefs, seed + 20);
        let (test, _) = additive_logistic(2000, &coefs, seed + 90_000);

        // each training loss reports through its own inverse link: the
        // exponential-loss score estimates half the log-odds, the log-loss
        // score the full log-odds
        let ce_of = |loss: Loss, link: fn(f64) -> f64| {
            let cfg = BoostConfig::new(256, loss, BaseSpec::Stump);
            let e = boost_train(&train, &cfg).unwrap();
            let probs: Vec<f64> = (0..test.n_rows())
                .map(|i| link(e.raw_score(test.row(i)).unwrap()))
                .collect();
            cross_entropy(&probs, test.labels(), DEFAULT_CLIP_EPS).unwrap()
        };
        ce_exp.push(ce_of(Loss::Exponential, logistic_correction));
        ce_log.push(ce_of(Loss::LogLoss, inverse_logit));
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let m_exp = mean(&ce_exp);
    let m_log = mean(&ce_log);
    let gap = (m_exp - m_log).abs() / m_exp.min(m_log);
    assert!(
        gap < 0.15,
        "mean cross-entropies diverge by {:.1}% (exp+LC {m_exp:.4}, logloss {m_log:.4})",
        100.0 * gap
    );
    println!(
        "[PASS] criterion 9: stump log-loss vs exp+correction cross-entropies within {:.1}% (mean over 10 seeds)",
        100.0 * gap
    );
}

// ---------------------------------------------------------------------------
// criterion 10: optional real-data check

#[test]
fn criterion_10_adult_platt_reduction_when_file_supplied() {
    let path = match std::env::var("BOOSTCAL_ADULT") {
        Ok(p) => p,
        Err(_) => {
            println!("[SKIP] criterion 10: set BOOSTCAL_ADULT to a pre-encoded adult data file to run");
            return;
        }
    };
    let first_line = std::fs::read_to_string(&path)
        .expect("readable BOOSTCAL_ADULT file")
        .lines()
        .next()
        .unwrap_or_default()
        .to_string();
    let format = if first_line.contains(':') { DataFormat::Libsvm } else { DataFormat::Csv };
    let options = LoadOptions {
        label_column: LabelColumn::Name("label".into()),
        label_policy: LabelPolicy::Auto,
        n_features: None,
    };
    let d = load_dataset(Path::new(&path), format, &options).unwrap();
    let (train, _, test) = stratified_split(
        &d,
        &SplitSpec { train_fraction: 0.5, calibration_size: 0, seed: 10 },
    )
    .unwrap();
    let cfg = BoostConfig::new(512, Loss::Exponential, BaseSpec::Stump);
    let e = boost_train(&train, &cfg).unwrap();
    let f_test = e.normalized_scores(&test).unwrap();
    let raw_ce = cross_entropy(&f_test, test.labels(), DEFAULT_CLIP_EPS).unwrap();
    let cal = cv_calibration_scores(&train, &cfg, 3, 11).unwrap();
    let platt = platt_fit(&cal).unwrap().calibrator;
    let probs: Vec<f64> = f_test.iter().map(|&f| platt.apply(f)).collect();
    let platt_ce = cross_entropy(&probs, test.labels(), DEFAULT_CLIP_EPS).unwrap();
    let reduction = 1.0 - platt_ce / raw_ce;
    assert!(
        reduction >= 0.10,
        "platt reduced cross-entropy by only {:.1}% (raw {raw_ce:.4} platt {platt_ce:.4})",
        100.0 * reduction
    );
    println!(
        "[PASS] criterion 10: adult platt cross-entropy reduction {:.1}% (raw {raw_ce:.4} -> {platt_ce:.4})",
        100.0 * reduction
    );
}

// ---------------------------------------------------------------------------
// criterion 12: CLI determinism

fn write_dataset_csv(dir: &Path) -> std::path::PathBuf {
    let d = two_gaussians(150, 1.5, 12);
    let path = dir.join("data.csv");
    d.to_csv(&path).unwrap();
    path
}

fn run_cli(args: &[&str]) {
    let status = std::process::Command::new(env!("CARGO_BIN_EXE_boostcal"))
        .args(args)
        .stdout(std::process::Stdio::null())
        .status()
        .expect("binary runs");
    assert!(status.success(), "command failed: {args:?}");
}

fn dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut entries: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    entries.sort();
    entries
}

#[test]
fn criterion_12_cli_reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let data = write_dataset_csv(tmp.path());
    let data = data.to_str().unwrap();

    let mut compared_files = 0usize;
    let model_a = tmp.path().join("train_a/model.json");
    let commands: Vec<Vec<String>> = vec![
        vec!["train", "--data", data, "--rounds", "2,8,32", "--seed", "5"]
            .into_iter()
            .map(String::from)
            .collect(),
        vec![
            "calibrate",
            "--data",
            data,
            "--model",
            model_a.to_str().unwrap(),
            "--method",
            "platt",
            "--seed",
            "5",
        ]
        .into_iter()
        .map(String::from)
        .collect(),
        vec!["predict", "--data", data, "--model", model_a.to_str().unwrap()]
            .into_iter()
            .map(String::from)
            .collect(),
        vec!["evaluate", "--data", data, "--model", model_a.to_str().unwrap()]
            .into_iter()
            .map(String::from)
            .collect(),
        vec!["reliability", "--data", data, "--model", model_a.to_str().unwrap()]
            .into_iter()
            .map(String::from)
            .collect(),
        vec![
            "experiment", "--data", data, "--rounds", "2,8", "--seed", "5",
        ]
        .into_iter()
        .map(String::from)
        .collect(),
        vec![
            "learning-curve",
            "--data",
            data,
            "--rounds",
            "16",
            "--sizes",
            "16,32",
            "--trials",
            "2",
            "--seed",
            "5",
        ]
        .into_iter()
        .map(String::from)
        .collect(),
    ];

    for (idx, cmd) in commands.iter().enumerate() {
        let name = cmd[0].clone();
        let dir_a = tmp.path().join(format!("{name}_a"));
        let dir_b = tmp.path().join(format!("{name}_b"));
        for dir in [&dir_a, &dir_b] {
            let mut full: Vec<String> = cmd.clone();
            full.push("--out".into());
            full.push(dir.to_string_lossy().into_owned());
            let args: Vec<&str> = full.iter().map(|s| s.as_str()).collect();
            run_cli(&args);
        }
        let a = dir_bytes(&dir_a);
        let b = dir_bytes(&dir_b);
        assert!(!a.is_empty(), "command {idx} ({name}) wrote no files");
        assert_eq!(a.len(), b.len());
        for ((name_a, bytes_a), (name_b, bytes_b)) in a.iter().zip(b.iter()) {
            assert_eq!(name_a, name_b);
            assert_eq!(bytes_a, bytes_b, "{name}: file {name_a} differs between reruns");
            compared_files += 1;
        }
    }
    println!("[PASS] criterion 12: all 7 subcommands rerun byte-identically ({compared_files} files compared)");
}
