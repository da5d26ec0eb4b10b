//! One line per acceptance criterion, then a single assertion over all.
//!
//! Run with `cargo test -p critaudit --test acceptance -- --nocapture` to
//! see the table.

use critaudit::harness::{benchmark_suite, objective_by_id, sample_objective, OptimizerKind, OptimizerSpec};
use critaudit::iia::{iia_check, rank_insensitivity_probe, stability_curve, SubsetStrategy};
use critaudit::iso_audit::{audit_metric, perturbation_audit, trace_invariance_check, Verdict};
use critaudit::metrics::{MetricCase, MetricId};
use critaudit::rank::{pairs_to_ranks, ranks_to_pairs, to_pairwise, to_ranks};
use critaudit::ranking::{
    bt_compare, bt_fit, compare_avg_rank, critical_difference, friedman_test, BtOptions,
    CdConvention, ComparisonMethod, Evidence, Preference,
};
use critaudit::trace::{ObjectiveSample, ParetoCase, ParetoPoint, SearchTrace};
use critaudit::transform::transform_suite;
use critaudit::{order_consistent, paper_dataset, PaperVariant, PerformanceMatrix, SplitMix64};

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn full() -> PerformanceMatrix {
    paper_dataset(PaperVariant::Full)
}

fn small() -> PerformanceMatrix {
    paper_dataset(PaperVariant::Small)
}

const ALPHA: f64 = 0.001;
const BOTH: [CdConvention; 2] = [CdConvention::ControlBonferroni, CdConvention::AllpairsBonferroni];

fn c1_dataset_fidelity() -> Check {
    let d = full();
    for p in 0..d.n_problems() {
        let mut col = d.column(p);
        col.sort_by(f64::total_cmp);
        ensure(
            col.iter().enumerate().all(|(i, v)| *v == (i + 1) as f64),
            format!("column {p} is not a permutation of 1..100"),
        )?;
    }
    let r = to_ranks(&d);
    let rs = to_ranks(&small());
    let got = [
        r.avg_rank_of("A").unwrap(),
        r.avg_rank_of("B").unwrap(),
        rs.avg_rank_of("A").unwrap(),
        rs.avg_rank_of("B").unwrap(),
    ];
    let want = [79.4, 98.2, 1.8, 1.2];
    for (g, w) in got.iter().zip(want) {
        ensure((g - w).abs() <= 1e-12, format!("average rank {g} != {w}"))?;
    }
    Ok(format!("avg ranks D: A {} B {}; D[A']: A {} B {}", got[0], got[1], got[2], got[3]))
}

fn c2_friedman() -> Check {
    let fs = friedman_test(&to_ranks(&small()));
    ensure(fs.chi_square == 840.0, format!("chi_square {} != 840", fs.chi_square))?;
    let target = 3.94e-183f64.log10();
    ensure(
        (fs.log10_p - target).abs() <= 0.01 * target.abs(),
        format!("log10 p {} vs {}", fs.log10_p, target),
    )?;
    let ff = friedman_test(&to_ranks(&full()));
    ensure(ff.log10_p < -300.0, format!("full D log10 p {}", ff.log10_p))?;
    ensure(ff.p_value == 0.0, format!("full D p reported as {}", ff.p_value))?;
    Ok(format!(
        "D[A']: chi2 {} p {:.3e}; D: log10 p {:.1}, p {}",
        fs.chi_square, fs.p_value, ff.log10_p, ff.p_value
    ))
}

fn c3_critical_difference() -> Check {
    let cd100 = critical_difference(100, 500, ALPHA, CdConvention::ControlBonferroni).unwrap().value;
    let cd3 = critical_difference(3, 500, ALPHA, CdConvention::AllpairsBonferroni).unwrap().value;
    ensure((cd100 - 8.105).abs() <= 0.05, format!("CD k=100 {cd100}"))?;
    ensure((cd3 - 0.227).abs() <= 0.005, format!("CD k=3 {cd3}"))?;
    for conv in BOTH {
        let on_d = compare_avg_rank(&full(), "A", "B", ALPHA, conv).unwrap();
        let on_s = compare_avg_rank(&small(), "A", "B", ALPHA, conv).unwrap();
        ensure(on_d.preference == Preference::AOverB, format!("{conv}: D gives {}", on_d.describe()))?;
        ensure(on_s.preference == Preference::BOverA, format!("{conv}: D[A'] gives {}", on_s.describe()))?;
    }
    Ok(format!("CD control k=100 {cd100:.4}, allpairs k=3 {cd3:.4}; A≻B on D, B≻A on D[A'] under both"))
}

fn c4_bradley_terry() -> Check {
    let opts = BtOptions::default();
    let fs = bt_fit(&to_pairwise(&small()), &opts).map_err(|e| e.to_string())?;
    ensure(fs.dropped == ["C1"], format!("dropped {:?}", fs.dropped))?;
    let ratio = fs.theta_of("B").unwrap() / fs.theta_of("A").unwrap();
    ensure((ratio - 4.0).abs() <= 1e-6, format!("theta_B/theta_A {ratio}"))?;
    let p_small = fs.probability("A", "B").unwrap();
    ensure((p_small - 0.2).abs() <= 1e-6, format!("P(A≻B) on D[A'] {p_small}"))?;

    let ff = bt_fit(&to_pairwise(&full()), &opts).map_err(|e| e.to_string())?;
    let o = bt_compare(&ff, "A", "B").unwrap();
    let p_full = match o.evidence {
        Evidence::BradleyTerry { p_a_over_b, .. } => p_a_over_b,
        _ => unreachable!(),
    };
    ensure((p_full - 0.9992).abs() <= 0.001, format!("P(A≻B) on D {p_full}"))?;
    for (name, fit) in [("D[A']", &fs), ("D", &ff)] {
        ensure(fit.converged, format!("{name} fit did not converge"))?;
        ensure(fit.residual < 1e-10, format!("{name} residual {}", fit.residual))?;
    }
    Ok(format!(
        "D[A']: ratio {ratio:.9}, P(A≻B) {p_small:.9}; D: P(A≻B) {p_full:.5}; residuals {:.1e}, {:.1e}",
        fs.residual, ff.residual
    ))
}

fn c5_iia_detection() -> Check {
    let subset = SubsetStrategy::Explicit {
        subsets: vec![vec!["A".into(), "B".into(), "C1".into()]],
    };
    let methods = [
        ComparisonMethod::friedman_cd(CdConvention::ControlBonferroni),
        ComparisonMethod::friedman_cd(CdConvention::AllpairsBonferroni),
        ComparisonMethod::bradley_terry(),
    ];
    for m in &methods {
        let audit = iia_check(m, &full(), "A", "B", &subset).map_err(|e| e.to_string())?;
        let v = audit.violation.ok_or(format!("{m}: no reversal found"))?;
        ensure(
            v.evidence_before.preference == Preference::AOverB
                && v.evidence_after.preference == Preference::BOverA,
            format!("{m}: unexpected directions"),
        )?;
    }
    let mut checked = 0;
    for seed in 0..20u64 {
        let k = 3 + (seed as usize % 6);
        let d = order_consistent(k, 12, seed).unwrap();
        let ids = d.algorithm_ids().to_vec();
        for m in &methods {
            for i in 0..k {
                for j in i + 1..k {
                    let audit = iia_check(m, &d, &ids[i], &ids[j], &SubsetStrategy::Exhaustive)
                        .map_err(|e| e.to_string())?;
                    ensure(!audit.found(), format!("{m} seed {seed}: {}", audit.summary()))?;
                    checked += 1;
                }
            }
        }
    }
    Ok(format!(
        "reversal on D vs D[A'] for friedman_cd (both) and bradley_terry; {checked} exhaustive order-consistent audits clean"
    ))
}

fn worked_trace() -> MetricCase {
    MetricCase::new(
        SearchTrace::from_values(vec![10.0, 1.0]).unwrap(),
        ObjectiveSample::with_optimum(0.0),
    )
}

fn c6_isomorphism_audit() -> Check {
    let suite = transform_suite(Some(0.0));
    let mut notes = Vec::new();
    for metric in [MetricId::ConvRate, MetricId::MaxMin] {
        let r = audit_metric(&metric, &worked_trace(), &suite, 1e-9).map_err(|e| e.to_string())?;
        for d in &r.deltas {
            if d.linear {
                ensure(d.max_delta <= 1e-9, format!("{metric} {}: {}", d.transform, d.max_delta))?;
            }
        }
        let cube = r.deltas.iter().find(|d| d.transform == "odd_power(3)").unwrap();
        ensure(cube.max_delta > 1e-3, format!("{metric} cube delta {}", cube.max_delta))?;
        ensure(r.verdict == Verdict::LinearOnly, format!("{metric} verdict {:?}", r.verdict))?;
        notes.push(format!("{metric} cube Δ {:.4}", cube.max_delta));
    }

    let pt = |d: [f64; 2], o: [f64; 2]| ParetoPoint {
        decision: d.to_vec(),
        objectives: o.to_vec(),
    };
    let pareto = ParetoCase {
        reference: vec![pt([0.0, 0.5], [0.0, 0.0]), pt([1.0, 0.5], [2.0, 0.0])],
        approximation: vec![pt([0.5, 0.5], [1.0, 0.0])],
    };
    let case = worked_trace().with_pareto(pareto);
    let igdf = audit_metric(&MetricId::Igdf, &case, &suite, 1e-9).map_err(|e| e.to_string())?;
    let cube = igdf.deltas.iter().find(|d| d.transform == "odd_power(3)").unwrap();
    ensure((cube.max_delta - 3.0).abs() < 1e-12, format!("IGDF cube delta {}", cube.max_delta))?;
    let igdx = audit_metric(&MetricId::Igdx, &case, &suite, 1e-9).map_err(|e| e.to_string())?;
    ensure(
        igdx.deltas.iter().all(|d| d.max_delta <= 1e-9) && igdx.verdict == Verdict::Isomorphic,
        format!("IGDX {:?}", igdx.deltas),
    )?;

    let s = perturbation_audit(&MetricId::ConvRate, &worked_trace(), &[0.01]).map_err(|e| e.to_string())?;
    let analytic = 1.0 / 100.0; // u2 / u1²
    let rel = (s[0].estimate - analytic).abs() / analytic;
    ensure(rel < 0.05, format!("sensitivity {} vs {analytic}", s[0].estimate))?;
    notes.push(format!("IGDF cube Δ {:.1}, IGDX clean, ∂ estimate {:.5} (rel err {:.3})", cube.max_delta, s[0].estimate, rel));
    Ok(notes.join("; "))
}

fn c7_normalization() -> Check {
    let suite = transform_suite(Some(0.0));
    let metric = MetricId::IsoNorm(Box::new(MetricId::ConvRate));
    let mut worst: f64 = 0.0;

    // a harness trace on a sampled domain
    let obj = objective_by_id("sphere-2d").unwrap();
    let opt = OptimizerSpec::new(OptimizerKind::RandomSearch);
    let trace = critaudit::harness::run(&opt, &obj, 40, 17).unwrap();
    let mut sample = sample_objective(&obj, 2000, 18);
    sample.include_trace(&trace);
    let harness_case = MetricCase::new(trace, sample);

    let worked = MetricCase::new(
        SearchTrace::from_values(vec![10.0, 6.0, 3.0, 1.0]).unwrap(),
        ObjectiveSample::new(
            (0..6).map(|i| vec![i as f64]).collect(),
            vec![10.0, 6.0, 3.0, 1.0, 0.5, 0.0],
        )
        .unwrap()
        .f_star(Some(0.0)),
    );
    for case in [&worked, &harness_case] {
        let r = audit_metric(&metric, case, &suite, 1e-12).map_err(|e| e.to_string())?;
        for d in &r.deltas {
            worst = worst.max(d.max_delta);
        }
        ensure(r.verdict == Verdict::Isomorphic, format!("verdict {:?}: {:?}", r.verdict, r.deltas))?;
    }
    ensure(worst <= 1e-12, format!("max delta {worst}"))?;
    Ok(format!("iso_norm(conv_rate) max delta {worst:e} over {} transforms, 2 cases", suite.len()))
}

fn c8_trace_invariance() -> Check {
    let objectives: Vec<_> = benchmark_suite().into_iter().filter(|o| o.dimension() == 2).collect();
    let mut total = 0;
    for kind in OptimizerKind::ALL {
        let opt = OptimizerSpec::new(kind);
        for obj in &objectives {
            for seed in 1..=5u64 {
                for t in transform_suite(obj.f_star) {
                    let r = trace_invariance_check(&opt, obj, &t, seed, 300).map_err(|e| e.to_string())?;
                    ensure(
                        r.identical,
                        format!("{} {} {} seed {seed} diverged at {:?}", r.optimizer, r.objective, r.transform, r.first_divergence),
                    )?;
                    total += 1;
                }
            }
        }
    }
    ensure(total == 3 * 2 * 5 * 5, format!("ran {total} combinations"))?;
    Ok(format!("{total}/{total} traces identical"))
}

fn c9_lossless() -> Check {
    let mut rng = SplitMix64::new(2024);
    for case in 0..100 {
        let k = 2 + (rng.next_u64() % 9) as usize;
        let mut ranks: Vec<f64> = (1..=k).map(|r| r as f64).collect();
        for i in (1..k).rev() {
            let j = (rng.next_u64() % (i as u64 + 1)) as usize;
            ranks.swap(i, j);
        }
        let back = pairs_to_ranks(&ranks_to_pairs(&ranks)).map_err(|e| e.to_string())?;
        ensure(back == ranks, format!("case {case}: {ranks:?} -> {back:?}"))?;
    }
    Ok("100/100 columns round-trip exactly".into())
}

fn c10_rank_insensitivity() -> Check {
    let mut parts = Vec::new();
    for m in [
        ComparisonMethod::friedman_cd(CdConvention::ControlBonferroni),
        ComparisonMethod::bradley_terry(),
    ] {
        for (name, d) in [("D", full()), ("D[A']", small())] {
            let probe = rank_insensitivity_probe(&m, &d).map_err(|e| e.to_string())?;
            ensure(probe, format!("{m} on {name}: probe false"))?;
        }
        parts.push(format!("{m} true"));
    }
    // D's columns are already ranks, so any method agrees with itself on
    // D; the constructed D[A'] is where values and ranks part ways.
    let raw = rank_insensitivity_probe(&ComparisonMethod::RawMean, &small()).map_err(|e| e.to_string())?;
    ensure(!raw, "raw_mean probe true on D[A']")?;
    parts.push("raw_mean false on D[A']".into());
    Ok(parts.join(", "))
}

fn c11_augmentation() -> Check {
    let grid = [0, 10, 50, 200];
    let mut parts = Vec::new();
    for conv in BOTH {
        let m = ComparisonMethod::friedman_cd(conv);
        let run = || stability_curve(&m, &small(), &full(), "A", "B", &grid, 30, 7).map_err(|e| e.to_string());
        let c = run()?;
        ensure(c == run()?, format!("{m}: curve not deterministic"))?;
        ensure(
            c.reversal_frequency.iter().all(|f| (0.0..=1.0).contains(f)),
            format!("{m}: frequency outside [0,1]"),
        )?;
        ensure(c.spearman <= 0.0, format!("{m}: Spearman {}", c.spearman))?;
        parts.push(format!("{m}: {:?}, Spearman {:.3}", c.reversal_frequency, c.spearman));
    }
    Ok(parts.join("; "))
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Check); 11] = [
        ("adversarial dataset fidelity", c1_dataset_fidelity),
        ("Friedman reproduction", c2_friedman),
        ("CD reproduction", c3_critical_difference),
        ("Bradley-Terry reproduction", c4_bradley_terry),
        ("IIA detection", c5_iia_detection),
        ("isomorphism audit", c6_isomorphism_audit),
        ("normalization fix", c7_normalization),
        ("trace invariance", c8_trace_invariance),
        ("lossless interconversion", c9_lossless),
        ("rank-insensitivity probe", c10_rank_insensitivity),
        ("augmentation study", c11_augmentation),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(why) => {
                println!("criterion {:>2} FAIL  {name}: {why}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

