//! Acceptance gate. Runs every criterion, prints one PASS/FAIL line each and exits
//! non-zero if any failed.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use common::{brute_force, orthonormalize_rows, random_orthogonal, random_priors};
use qchannel::detection::{
    self, bayes_cost_reduction, binary_helstrom_error, check_condition_ii_exhaustive,
    check_optimality, check_optimality_gram, helstrom_binary, product_pom, square_root_measurement,
    square_root_measurement_for, ChannelMatrix, Frame, Measurement, MeasurementKind,
};
use qchannel::ensembles::{
    build_nn12_code, build_simplex_code, codeword_states, embed_binary_letters, gram, Code,
    StateEmbedding,
};
use qchannel::fastcode::{
    default_grid, find_kappa_star, nn12_error_probability, nn12_gain, nn12_mutual_information,
    repetition_pair_gain, simplex_overtakes_nn12,
};
use qchannel::information::{
    c1_binary, holevo_binary, letter_error, mutual_information, threshold_quantities,
};
use qchannel::linalg::{self, Matrix, SymMatrix};
use qchannel::synth::{reck_decompose, synthesize_unitary};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn criterion_1() -> Outcome {
    let kappas: Vec<f64> = (1..=9).map(|k| k as f64 / 10.0).collect();
    let mut worst: f64 = 0.0;
    let mut slowest = 0.0f64;
    for n in 3..=9 {
        let code = build_nn12_code(n).unwrap();
        for &kappa in &kappas {
            let start = Instant::now();
            let bf = brute_force(&code, kappa);
            let secs = start.elapsed().as_secs_f64();
            if n == 9 {
                slowest = slowest.max(secs);
            }
            let di = (bf.info - nn12_mutual_information(n, kappa).unwrap()).abs();
            let de = (bf.error - nn12_error_probability(n, kappa).unwrap()).abs();
            ensure(di <= 1e-9 && de <= 1e-9, || {
                format!("n={n} κ={kappa}: ΔI={di:e} ΔPe={de:e}")
            })?;
            worst = worst.max(di).max(de);
        }
    }
    ensure(slowest < 60.0, || {
        format!("n=9 brute force took {slowest:.1} s")
    })?;
    Ok(format!(
        "max deviation {worst:.2e}, slowest n=9 run {slowest:.2} s"
    ))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let grid = default_grid();
    let worst2 = grid
        .iter()
        .map(|&k| repetition_pair_gain(k).unwrap())
        .fold(f64::MIN, f64::max);
    ensure(worst2 <= 0.0, || format!("n=2 gain reaches {worst2:e}"))?;
    for n in 3..=13 {
        let gains: Vec<f64> = grid.iter().map(|&k| nn12_gain(n, k).unwrap()).collect();
        let lo = nn12_gain(n, 0.1).unwrap();
        let hi = nn12_gain(n, 0.95).unwrap();
        let changes = gains
            .windows(2)
            .filter(|w| (w[0] > 0.0) != (w[1] > 0.0))
            .count();
        ensure(lo < 0.0 && hi > 0.0 && changes == 1, || {
            format!("n={n}: gain(0.1)={lo:e} gain(0.95)={hi:e} sign changes={changes}")
        })?;
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 10.0, || format!("sweep took {secs:.1} s"))?;
    Ok(format!(
        "max n=2 gain {worst2:.3e}; one sign change for n=3..13; {secs:.3} s"
    ))
}

fn criterion_3() -> Outcome {
    let stars: Vec<f64> = (3..=13)
        .map(|n| find_kappa_star(n, 1e-6).unwrap())
        .collect();
    ensure(stars.windows(2).all(|w| w[1] < w[0]), || {
        format!("κ⋆ not decreasing: {stars:?}")
    })?;
    let mut worst: f64 = 0.0;
    for (n, ks) in (3..=13).zip(&stars) {
        let d = (ks - (2.0 / n as f64).powf(2.0 / 3.0)).abs();
        ensure(d < 0.1, || {
            format!("n={n}: κ⋆={ks:.4} off the guide by {d:.4}")
        })?;
        worst = worst.max(d);
    }
    Ok(format!(
        "κ⋆(3)={:.4} … κ⋆(13)={:.4}; max guide distance {worst:.4}",
        stars[0], stars[10]
    ))
}

fn criterion_4() -> Outcome {
    let grid = default_grid();
    let gain = grid
        .iter()
        .map(|&k| nn12_gain(9, k).unwrap())
        .fold(f64::MIN, f64::max);
    let gap = grid
        .iter()
        .map(|&k| holevo_binary(k) - c1_binary(k))
        .fold(f64::MIN, f64::max);
    ensure(gain < 0.1 * gap, || {
        format!("max gain {gain:.5} vs 10% of gap {:.5}", 0.1 * gap)
    })?;
    Ok(format!("max I9/9 − C1 = {gain:.5} < {:.5}", 0.1 * gap))
}

fn criterion_5() -> Outcome {
    let cross = simplex_overtakes_nn12(3, 7, &default_grid(), 1e-9).map_err(|e| e.to_string())?;
    let k = cross.ok_or("no crossing found")?;
    ensure((0.80..=0.84).contains(&k), || {
        format!("crossing at κ = {k:.5}")
    })?;
    Ok(format!("[[7,3,4]] overtakes [[7,6,2]] at κ = {k:.5}"))
}

fn criterion_6() -> Outcome {
    let grid = default_grid();
    let ns = [3, 5, 7, 9, 11, 13];
    for &k in &grid {
        let p = letter_error(k);
        let errs: Vec<f64> = ns
            .iter()
            .map(|&n| nn12_error_probability(n, k).unwrap())
            .collect();
        for (&n, &e) in ns.iter().zip(&errs) {
            let threshold = threshold_quantities(k, n).1;
            ensure(e <= threshold, || {
                format!("n={n} κ={k}: code {e:e} > threshold {threshold:e}")
            })?;
            if k >= 0.8 {
                ensure(e >= p, || format!("n={n} κ={k}: code {e:e} < p {p:e}"))?;
            }
        }
        ensure(errs.windows(2).all(|w| w[1] > w[0]), || {
            format!("κ={k}: not increasing in n")
        })?;
    }
    Ok("threshold ≥ code error, code error ≥ p for κ ≥ 0.8, increasing in n".into())
}

fn criterion_7() -> Outcome {
    let mut codes: Vec<(String, Code)> = (3..=9)
        .map(|n| (format!("[[{n},{},2]]", n - 1), build_nn12_code(n).unwrap()))
        .collect();
    codes.push(("simplex r=2".into(), build_simplex_code(2).unwrap()));
    codes.push(("simplex r=3".into(), build_simplex_code(3).unwrap()));
    let mut worst: f64 = 0.0;
    let mut min_eig = f64::INFINITY;
    for (name, code) in &codes {
        for kappa in [0.3, 0.6, 0.9] {
            let g = gram(code, kappa, false);
            let (meas, _) = square_root_measurement(&g).unwrap();
            let r = check_optimality_gram(&meas, &g, code.priors(), 1e-10).unwrap();
            ensure(
                r.cond_i_residual <= 1e-10 && r.upsilon_positive_definite,
                || {
                    format!(
                        "{name} κ={kappa}: residual {:e}, min eig {:e}",
                        r.cond_i_residual, r.cond_ii_min_eig
                    )
                },
            )?;
            worst = worst.max(r.cond_i_residual);
            min_eig = min_eig.min(r.cond_ii_min_eig);
        }
    }
    Ok(format!(
        "max residual {worst:.2e}, smallest Υ′ eigenvalue {min_eig:.3e}"
    ))
}

fn product_priors(xi: [f64; 2], n: usize) -> Vec<f64> {
    (0..1usize << n)
        .map(|w| (0..n).map(|k| xi[(w >> (n - 1 - k)) & 1]).product())
        .collect()
}

fn criterion_8() -> Outcome {
    let mut worst: f64 = 0.0;
    for kappa in [0.3, 0.6, 0.9] {
        for xi1 in [0.5, 0.7] {
            let (base, p) = helstrom_binary(kappa, xi1).unwrap();
            for n in [2, 3] {
                let priors = product_priors([xi1, 1.0 - xi1], n);
                let code = Code::new(n, (0..1u64 << n).collect(), priors.clone()).unwrap();
                let states = codeword_states(&code, kappa).unwrap();
                let pom = product_pom(&base, n).unwrap();
                let r = check_optimality(&pom, &states, &priors, 1e-10).unwrap();
                let ii = check_condition_ii_exhaustive(&pom, &states, &priors).unwrap();
                let want = 1.0 - (1.0 - p).powi(n as i32);
                let d = (r.error_probability - want).abs();
                ensure(
                    r.cond_i_residual <= 1e-10 && ii >= -1e-10 && d <= 1e-12,
                    || {
                        format!(
                            "κ={kappa} ξ={xi1} n={n}: residual {:e}, ii′ {ii:e}, Δerror {d:e}",
                            r.cond_i_residual
                        )
                    },
                )?;
                worst = worst.max(d);
            }
        }
    }
    Ok(format!("conditions hold; max error deviation {worst:.2e}"))
}

fn info_of(meas: &Measurement, states: &StateEmbedding, priors: &[f64]) -> f64 {
    let ch = ChannelMatrix::from_measurement(meas, states).unwrap();
    mutual_information(priors, &ch)
        .unwrap()
        .mutual_information_bits
}

fn criterion_9() -> Outcome {
    let letters = |k: f64| {
        StateEmbedding::from_vectors(Matrix::from_rows(&embed_binary_letters(k).unwrap()).unwrap())
            .unwrap()
    };
    let (m1, _) = helstrom_binary(0.3, 0.5).unwrap();
    let (m2, _) = helstrom_binary(0.7, 0.5).unwrap();
    let states = letters(0.3).tensor(&letters(0.7)).unwrap();
    let priors = [0.25; 4];
    let product = detection::tensor_measurements(&m1, &m2).unwrap();
    let achieved = info_of(&product, &states, &priors);
    let target = c1_binary(0.3) + c1_binary(0.7);
    ensure((achieved - target).abs() <= 1e-9, || {
        format!("product POM gives {achieved} vs {target}")
    })?;

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0009);
    let mut best = f64::MIN;
    for trial in 0..10_000 {
        let vectors = if trial % 2 == 0 {
            random_orthogonal(&mut rng, 4)
        } else {
            // perturbations of the product optimum probe its neighbourhood
            let eps = 10f64.powf(rng.gen_range(-4.0..-0.5));
            let raw = Matrix::from_fn(4, 4, |i, j| {
                product.vectors()[(i, j)] + eps * rng.gen_range(-1.0..1.0)
            });
            match orthonormalize_rows(&raw) {
                Some(q) => q,
                None => continue,
            }
        };
        let meas = Measurement::new(vectors, MeasurementKind::Custom, Frame::Ambient).unwrap();
        let info = info_of(&meas, &states, &priors);
        ensure(info <= target + 1e-9, || {
            format!("trial {trial}: {info} exceeds {target}")
        })?;
        best = best.max(info);
    }
    Ok(format!(
        "product POM {achieved:.9} = C1 sum; best of 10000 random {best:.9}"
    ))
}

fn criterion_10() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0010);
    let mut worst_residual: f64 = 0.0;
    let mut worst_helstrom: f64 = 0.0;
    let mut max_sweeps = 0;
    for trial in 0..100 {
        let m = 2 + trial % 3;
        let raw = loop {
            let raw = Matrix::from_fn(m, m, |_, _| rng.gen_range(-1.0..1.0));
            let rows: Vec<Vec<f64>> = (0..m)
                .map(|i| {
                    raw.row(i)
                        .iter()
                        .map(|x| x / linalg::norm(raw.row(i)))
                        .collect()
                })
                .collect();
            let states = StateEmbedding::from_vectors(Matrix::from_rows(&rows).unwrap()).unwrap();
            if linalg::is_positive_definite(&states.inner_products(), 1e-3) {
                break states;
            }
        };
        let priors = random_priors(&mut rng, m);
        let init = if trial % 2 == 0 {
            square_root_measurement_for(&raw, Some(&priors)).unwrap()
        } else {
            Measurement::new(
                random_orthogonal(&mut rng, m),
                MeasurementKind::Custom,
                Frame::Ambient,
            )
            .unwrap()
        };
        let out = bayes_cost_reduction(&raw, &priors, &init, 1e-10, 500)
            .map_err(|e| format!("trial {trial}: {e}"))?;
        ensure(
            out.error_history.windows(2).all(|w| w[1] <= w[0] + 1e-15),
            || format!("trial {trial}: error increased {:?}", out.error_history),
        )?;
        let r = &out.report;
        ensure(
            r.cond_i_residual <= 1e-8 && r.cond_ii_min_eig >= -1e-8,
            || {
                format!(
                    "trial {trial}: residual {:e}, min eig {:e}",
                    r.cond_i_residual, r.cond_ii_min_eig
                )
            },
        )?;
        worst_residual = worst_residual.max(r.cond_i_residual);
        max_sweeps = max_sweeps.max(out.sweeps);
        if m == 2 {
            let s = linalg::dot(raw.state(0), raw.state(1)).abs();
            let d = (r.error_probability - binary_helstrom_error(s, priors[0])).abs();
            ensure(d <= 1e-9, || {
                format!("trial {trial}: binary error off by {d:e}")
            })?;
            worst_helstrom = worst_helstrom.max(d);
        }
    }
    Ok(format!(
        "max residual {worst_residual:.2e}, max binary deviation {worst_helstrom:.2e}, at most {max_sweeps} sweeps"
    ))
}

fn criterion_11() -> Outcome {
    let mut worst = [0.0f64; 3];
    for n in [3, 7] {
        let code = build_nn12_code(n).unwrap();
        for kappa in [0.3, 0.6, 0.9] {
            let states = codeword_states(&code, kappa).unwrap();
            let meas = square_root_measurement_for(&states, Some(code.priors())).unwrap();
            let cert = check_optimality(&meas, &states, code.priors(), 1e-10).unwrap();
            ensure(cert.is_optimal, || {
                format!("n={n} κ={kappa}: measurement not certified")
            })?;
            let u = synthesize_unitary(&code, kappa, &meas, None).map_err(|e| e.to_string())?;
            let sched = reck_decompose(u.unitary()).map_err(|e| e.to_string())?;
            let orth = u.orthogonality_residual();
            let derr = (u.error_probability() - cert.error_probability).abs();
            let recon = sched.to_matrix().max_abs_diff(u.unitary());
            ensure(orth <= 1e-10 && derr <= 1e-10 && recon <= 1e-8, || {
                format!("n={n} κ={kappa}: orth {orth:e}, Δerror {derr:e}, reconstruction {recon:e}")
            })?;
            worst = [worst[0].max(orth), worst[1].max(derr), worst[2].max(recon)];
        }
    }
    Ok(format!(
        "orthogonality {:.1e}, error match {:.1e}, reconstruction {:.1e}",
        worst[0], worst[1], worst[2]
    ))
}

fn criterion_12() -> Outcome {
    // independent recomputation
    let (_, p) = helstrom_binary(0.5, 0.5).unwrap();
    let bsc =
        ChannelMatrix::new(Matrix::from_rows(&[[1.0 - p, p], [p, 1.0 - p]]).unwrap()).unwrap();
    let c1_oracle = mutual_information(&[0.5, 0.5], &bsc)
        .unwrap()
        .mutual_information_bits;
    let [plus, minus] = embed_binary_letters(0.5).unwrap();
    let mix =
        SymMatrix::from_fn(2, |i, j| 0.5 * (plus[i] * plus[j] + minus[i] * minus[j])).unwrap();
    let holevo_oracle: f64 = linalg::eig_sym(&mix)
        .unwrap()
        .values
        .iter()
        .filter(|l| **l > 0.0)
        .map(|l| -l * l.log2())
        .sum();
    let bf = brute_force(&build_nn12_code(3).unwrap(), 0.5);

    let rows = [
        ("c1_binary(0.5)", c1_binary(0.5), c1_oracle, 0.645423),
        (
            "holevo_binary(0.5)",
            holevo_binary(0.5),
            holevo_oracle,
            0.811278,
        ),
        (
            "nn12_mutual_information(3,0.5)",
            nn12_mutual_information(3, 0.5).unwrap(),
            bf.info,
            1.699661,
        ),
        (
            "nn12_error_probability(3,0.5)",
            nn12_error_probability(3, 0.5).unwrap(),
            bf.error,
            0.039134,
        ),
    ];
    let mut detail = Vec::new();
    for (name, value, oracle, stated) in rows {
        ensure((value - oracle).abs() <= 1e-9, || {
            format!("{name} = {value} but oracle gives {oracle}")
        })?;
        ensure((value - stated).abs() <= 1e-5, || {
            format!("{name} = {value} vs stated {stated}")
        })?;
        detail.push(format!("{name}={value:.7}"));
    }
    Ok(detail.join(", "))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        ("oracle equivalence", criterion_1),
        ("gain sign structure", criterion_2),
        ("κ⋆ ordering", criterion_3),
        ("gain below 10% of the Holevo gap", criterion_4),
        ("simplex crossing", criterion_5),
        ("error orderings", criterion_6),
        ("square-root measurement optimality", criterion_7),
        ("product measurement optimality", criterion_8),
        ("product-of-optima information", criterion_9),
        ("Bayes-cost reduction", criterion_10),
        ("decoder synthesis", criterion_11),
        ("spot values", criterion_12),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why}", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
