//! Acceptance gate: one PASS/FAIL line per criterion, non-zero exit if any fail.

use netmimo::channel_model::{
    complex_gaussian, complex_gaussian_vec, generate_csit_views, generate_with_variances, Cell, NetworkChannel,
    QualityPair, SimRng,
};
use netmimo::converse_oracle::{log_ratio_inequality_check, probe_slope, GridSpec};
use netmimo::dof_analysis::{dof_region, dof_region_for_max, estimate_dof_slope, region_contains, DofPoint};
use netmimo::harness::{
    reproduce_fig2, run_experiment, run_experiment_with_threads, ResultTable, SimConfig, DEFAULT_SEED,
};
use netmimo::precoding::{ap_zf, conventional_zf, modified_zf, residual_interference_power, PrecoderPair};
use netmimo::schemes::{mat_observations, mat_rank_report, quantize_interference, quantizer_bits, Scheme};
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use std::time::Instant;

const SLOPE_TOL: f64 = 0.1;
const HIGH_SNR: (f64, f64, f64) = (40.0, 60.0, 5.0);
const WINDOW: usize = 5;

struct Report {
    failures: usize,
}

impl Report {
    fn line(&mut self, id: u32, ok: bool, detail: String) {
        if !ok {
            self.failures += 1;
        }
        println!("{} criterion {id}: {detail}", if ok { "PASS" } else { "FAIL" });
    }
}

fn table(scheme: Scheme, a1: f64, a2: f64) -> ResultTable {
    run_experiment(&SimConfig::new(scheme, a1, a2, HIGH_SNR, 1000, DEFAULT_SEED)).expect("experiment")
}

fn sum_slope(scheme: Scheme, a1: f64, a2: f64) -> f64 {
    let t = table(scheme, a1, a2);
    estimate_dof_slope(&t.curve(scheme.label()).unwrap(), WINDOW).unwrap()
}

fn within(x: f64, target: f64, tol: f64) -> bool {
    (x - target).abs() <= tol
}

fn criterion_1(r: &mut Report) {
    let t0 = Instant::now();
    let s = sum_slope(Scheme::Zf, 1.0, 0.5);
    let dt = t0.elapsed().as_secs_f64();
    r.line(
        1,
        within(s, 1.0, SLOPE_TOL) && dt < 30.0,
        format!("ZF imperfect-CSIT slope {s:.4} (target 1.0 ± 0.1), {dt:.2} s"),
    );
}

fn criterion_2(r: &mut Report) {
    let s = sum_slope(Scheme::Mat, 1.0, 0.5);
    let mut rng = SimRng::seed_from_u64(DEFAULT_SEED);
    let mut violations = 0;
    for t in 0..10_000u64 {
        let slots = [0, 1, 2].map(|k| NetworkChannel {
            h: [complex_gaussian_vec(&mut rng, 1.0), complex_gaussian_vec(&mut rng, 1.0)],
            t: 3 * t + k,
        });
        if mat_rank_report(&mat_observations(&slots)).violated() {
            violations += 1;
        }
    }
    r.line(
        2,
        within(s, 4.0 / 3.0, SLOPE_TOL) && violations == 0,
        format!("MAT slope {s:.4} (target 4/3 ± 0.1), rank violations {violations}/10000"),
    );
}

fn criterion_3(r: &mut Report) {
    let zf = sum_slope(Scheme::AlphaMatZf, 1.0, 0.5);
    let ap = sum_slope(Scheme::AlphaMatApzf, 1.0, 0.5);
    let perfect = sum_slope(Scheme::ZfPerfect, 1.0, 0.5);
    let ok = within(zf, 5.0 / 3.0, SLOPE_TOL) && within(ap, 2.0, SLOPE_TOL) && within(ap, perfect, SLOPE_TOL);
    r.line(
        3,
        ok,
        format!("alpha-MAT ConvZF {zf:.4} (5/3 ± 0.1), APZF {ap:.4} (2 ± 0.1), perfect-CSIT ZF {perfect:.4}"),
    );
}

/// Least-squares slope of `log y` against `log x`.
fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

fn residual_slope(kind: &str, qual: QualityPair) -> f64 {
    let powers = [1e2, 1e3, 1e4, 1e5, 1e6];
    let means: Vec<f64> = powers
        .iter()
        .map(|&p| {
            let mut rng = SimRng::seed_from_u64(DEFAULT_SEED);
            let mut acc = 0.0;
            let mut n = 0;
            while n < 10_000 {
                let (ch, v1, v2) = generate_csit_views(&qual, p, &mut rng).unwrap();
                let pair: PrecoderPair = match kind {
                    "ConvZF" => conventional_zf(&v1, &v2).unwrap(),
                    "ModZF" => modified_zf(v1.shared(Cell::One), v1.shared(Cell::Two)).unwrap(),
                    _ => match ap_zf(&v1, &v2) {
                        Ok(p) => p,
                        Err(e) if e.is_resample() => continue,
                        Err(e) => panic!("{e}"),
                    },
                };
                let q1 = pair.q[0].normalized().unwrap();
                let q2 = pair.q[1].normalized().unwrap();
                acc += 0.5 * (residual_interference_power(&ch.h[0], &q2) + residual_interference_power(&ch.h[1], &q1));
                n += 1;
            }
            acc / n as f64
        })
        .collect();
    loglog_slope(&powers, &means)
}

fn criterion_4(r: &mut Report) {
    let mut ok = true;
    let mut parts = Vec::new();
    for alpha in [0.25, 0.5, 1.0] {
        for (kind, qual) in [
            ("ConvZF", QualityPair::new(1.0, alpha).unwrap()),
            ("ModZF", QualityPair::new(1.0, alpha).unwrap()),
            ("APZF", QualityPair::new(alpha, 0.0).unwrap()),
        ] {
            let s = residual_slope(kind, qual);
            ok &= within(s, -alpha, 0.05);
            parts.push(format!("{kind}@{alpha}={s:.3}"));
        }
    }
    r.line(
        4,
        ok,
        format!("residual power-law slopes (target -alpha ± 0.05): {}", parts.join(", ")),
    );
}

fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn criterion_5(r: &mut Report) {
    let ms = [rat(0, 1), rat(1, 4), rat(1, 2), rat(3, 4), rat(1, 1)];
    let one = rat(1, 1);
    let mut ok = true;
    let mut detail = Vec::new();
    for m in &ms {
        let region = dof_region_for_max(m);
        let sym = (rat(2, 1) + m) / rat(3, 1);
        let expected = [
            (one.clone(), m.clone()),
            (m.clone(), one.clone()),
            (sym.clone(), sym.clone()),
        ];
        let v = &region.vertices_exact;
        let has_all = expected.iter().all(|e| v.contains(e));
        // every vertex off the axes is one of the expected corners
        let no_extra = v
            .iter()
            .filter(|p| p.0 != rat(0, 1) && p.1 != rat(0, 1))
            .all(|p| expected.contains(p));
        ok &= has_all && no_extra;
        detail.push(format!("m={m}: {} vertices", v.len()));
    }
    // symmetric points of every scheme inside the region
    let mut inside = true;
    for a1 in [0.0, 0.25, 0.5, 0.75, 1.0] {
        for a2 in [0.0, 0.125, 0.25, 0.5, 0.75, 1.0] {
            let Ok(qual) = QualityPair::new(a1, a2) else { continue };
            let region = dof_region(&qual);
            for s in [Scheme::Zf, Scheme::Mat, Scheme::AlphaMatZf, Scheme::AlphaMatApzf] {
                let d = netmimo::dof_analysis::theoretical_dof(s, &qual) / 2.0;
                inside &= region_contains(&region, &DofPoint::new(d, d), 1e-12);
            }
        }
    }
    let mut nested = true;
    for w in ms.windows(2) {
        let big = dof_region_for_max(&w[1]);
        nested &= dof_region_for_max(&w[0])
            .vertices_exact
            .iter()
            .all(|p| big.contains_exact(p));
    }
    r.line(
        5,
        ok && inside && nested,
        format!(
            "region vertices {} ({}), scheme points inside: {inside}, nesting: {nested}",
            if ok { "match" } else { "MISMATCH" },
            detail.join("; ")
        ),
    );
}

fn criterion_6(r: &mut Report) {
    let t = table(Scheme::Vertex, 0.5, 0.25);
    let d1 = estimate_dof_slope(&t.rx_curve("vertex", 0).unwrap(), WINDOW).unwrap();
    let d2 = estimate_dof_slope(&t.rx_curve("vertex", 1).unwrap(), WINDOW).unwrap();
    r.line(
        6,
        within(d1, 1.0, SLOPE_TOL) && within(d2, 0.5, SLOPE_TOL),
        format!("vertex per-RX slopes ({d1:.4}, {d2:.4}) (target (1, 0.5) ± 0.1)"),
    );
}

fn criterion_7(r: &mut Report) {
    let t0 = Instant::now();
    let pairs = [(0.0, 0.0), (0.25, 0.0), (0.5, 0.25), (0.75, 0.5), (1.0, 1.0)];
    let powers = [1e2, 1e3, 1e4, 1e5];
    let grid = GridSpec::uniform(8).with_refinement(1);
    let mut ok = true;
    let mut parts = Vec::new();
    for (a1, a2) in pairs {
        let qual = QualityPair::new(a1, a2).unwrap();
        let s = probe_slope(&qual, &powers, &grid, 1000, 50, DEFAULT_SEED).unwrap();
        ok &= s <= qual.max() + 0.15;
        parts.push(format!("({a1},{a2})={s:.3}"));
    }
    let mut rng = SimRng::seed_from_u64(DEFAULT_SEED);
    let mut bad = 0;
    for _ in 0..1_000_000 {
        let a = 1e6 * (1.0 - rng.random::<f64>());
        let b = 1e6 * (1.0 - rng.random::<f64>());
        if !log_ratio_inequality_check(a, b) {
            bad += 1;
        }
    }
    let dt = t0.elapsed().as_secs_f64();
    r.line(
        7,
        ok && bad == 0 && dt < 300.0,
        format!(
            "converse slopes vs max+0.15: {}; log-ratio violations {bad}/1000000; {dt:.1} s",
            parts.join(", ")
        ),
    );
}

fn criterion_8(r: &mut Report) {
    let a = reproduce_fig2(DEFAULT_SEED, 1000, None).unwrap().table.to_csv();
    let b = reproduce_fig2(DEFAULT_SEED, 1000, None).unwrap().table.to_csv();
    let one = reproduce_fig2(DEFAULT_SEED, 1000, Some(1)).unwrap().table.to_csv();
    let many = reproduce_fig2(DEFAULT_SEED, 1000, Some(4)).unwrap().table.to_csv();
    let cfg = SimConfig::new(Scheme::AlphaMatApzf, 1.0, 0.5, (0.0, 60.0, 10.0), 500, 17);
    let s1 = run_experiment_with_threads(&cfg, 1).unwrap().to_csv();
    let s8 = run_experiment_with_threads(&cfg, 8).unwrap().to_csv();
    r.line(
        8,
        a == b && one == many && s1 == s8,
        format!(
            "repeat identical: {}, 1 vs 4 threads identical: {}, single-scheme 1 vs 8 threads identical: {}",
            a == b,
            one == many,
            s1 == s8
        ),
    );
}

fn criterion_9(r: &mut Report) {
    let zf0 = sum_slope(Scheme::AlphaMatZf, 0.0, 0.0);
    let ap0 = sum_slope(Scheme::AlphaMatApzf, 0.0, 0.0);
    let slopes_ok = within(zf0, 4.0 / 3.0, SLOPE_TOL) && within(ap0, 4.0 / 3.0, SLOPE_TOL);

    let mut rng = SimRng::seed_from_u64(DEFAULT_SEED);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let (ch, v1, v2) = generate_with_variances(0.0, 0.0, [1.0, 1.0], &mut rng);
        let mut pairs = vec![
            conventional_zf(&v1, &v2).unwrap(),
            modified_zf(v1.shared(Cell::One), v1.shared(Cell::Two)).unwrap(),
        ];
        if let Ok(p) = ap_zf(&v1, &v2) {
            pairs.push(p);
        }
        for pair in pairs {
            let q1 = pair.q[0].normalized().unwrap();
            let q2 = pair.q[1].normalized().unwrap();
            worst = worst
                .max(residual_interference_power(&ch.h[0], &q2))
                .max(residual_interference_power(&ch.h[1], &q1));
        }
    }

    let p = 1e4;
    let bits = quantizer_bits(0.5, p);
    let var = p.powf(0.5);
    let mut rng = SimRng::seed_from_u64(DEFAULT_SEED);
    let n = 10_000;
    let mean_d = (0..n)
        .map(|_| quantize_interference(complex_gaussian(&mut rng, var), var, bits).distortion)
        .sum::<f64>()
        / n as f64;
    r.line(
        9,
        slopes_ok && worst < 1e-12 && mean_d <= 10.0,
        format!(
            "alpha=0 slopes ConvZF {zf0:.4}, APZF {ap0:.4} (4/3 ± 0.1); perfect-CSIT worst residual {worst:.2e}; \
             quantizer mean distortion {mean_d:.3} at {bits} bits (≤ 10)"
        ),
    );
}

fn main() {
    let mut r = Report { failures: 0 };
    let t0 = Instant::now();
    criterion_1(&mut r);
    criterion_2(&mut r);
    criterion_3(&mut r);
    criterion_4(&mut r);
    criterion_5(&mut r);
    criterion_6(&mut r);
    criterion_7(&mut r);
    criterion_8(&mut r);
    criterion_9(&mut r);
    println!(
        "acceptance: {} of 9 criteria passed in {:.1} s",
        9 - r.failures,
        t0.elapsed().as_secs_f64()
    );
    if r.failures > 0 {
        std::process::exit(1);
    }
}
