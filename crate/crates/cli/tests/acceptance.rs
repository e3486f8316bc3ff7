//! Acceptance suite: one test per quantitative criterion, each printing a
//! single PASS/FAIL line with the measured numbers before asserting.
//!
//! Run with `cargo test -p anderson1d-cli --test acceptance -- --nocapture`
//! to see every line.

use anderson1d::asymptotics::{
    estimate_beta, fourth_moment_curve, log_grid, normalizer, oscillatory_sum_ratio,
    theoretical_beta,
};
use anderson1d::dynamics::{
    SpectralEvolution, SpectralWeight, abel_moment, abel_moment_quadrature,
    correlator_decay_experiment, greens_column, growth_fit_range, moment_curve,
    transport_exponent,
};
use anderson1d::model::{
    DisorderSpec, ModelParams, RESONANCE_TOL, derived_seed, energy_point,
    sample_disorder,
};
use anderson1d::prufer::{
    prufer_init, prufer_init_from_x, prufer_step, reconstruct_solution,
};
use anderson1d::spectrum::{
    build_box, decay_fit, decaying_direction, default_fit_window, diagonalize, eigenvalues,
    eigenpairs_in_window, run_solution_chain,
};
use anderson1d::stats::{mean_and_stderr, median};
use rayon::prelude::*;
use std::f64::consts::{FRAC_PI_2, PI};
use std::time::Instant;

fn params(alpha: f64, lambda: f64) -> ModelParams {
    ModelParams::new(alpha, lambda, DisorderSpec::uniform()).unwrap()
}

fn report(number: u32, name: &str, pass: bool, detail: &str) {
    println!(
        "acceptance {number:2} [{name}]: {} - {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
}

#[test]
fn criterion_01_lyapunov_formula_subcritical() {
    let start = Instant::now();
    let p = params(0.3, 1.0);
    let ep = energy_point(0.5, RESONANCE_TOL).unwrap();
    let est = estimate_beta(&p, &ep, 100_000, 200, 42).unwrap();
    let target = 2.0 / 15.0;
    let err = (est.beta_hat - target).abs();
    let tol = 0.013f64.max(3.0 * est.stderr);
    let elapsed = start.elapsed().as_secs_f64();
    let pass = err <= tol && elapsed <= 60.0;
    report(
        1,
        "lyapunov formula",
        pass,
        &format!(
            "beta_hat {:.5} vs 2/15 = {:.5}, |err| {:.5} <= tol {:.5}, {:.1}s",
            est.beta_hat, target, err, tol, elapsed
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_02_lyapunov_formula_critical() {
    let start = Instant::now();
    let p = params(0.5, 1.0);
    let ep = energy_point(0.5, RESONANCE_TOL).unwrap();
    let est = estimate_beta(&p, &ep, 1_000_000, 100, 42).unwrap();
    let target = 2.0 / 15.0;
    let err = (est.beta_hat - target).abs();
    let elapsed = start.elapsed().as_secs_f64();
    let pass = err <= 0.027 && elapsed <= 180.0;
    report(
        2,
        "critical normalizer",
        pass,
        &format!(
            "beta_hat {:.5} vs 2/15 = {:.5}, |err| {:.5} <= 0.027, {:.1}s",
            est.beta_hat, target, err, elapsed
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_03_lambda_squared_scaling() {
    let ep = energy_point(0.0, RESONANCE_TOL).unwrap();
    let a = estimate_beta(&params(0.3, 1.0), &ep, 100_000, 200, 42).unwrap();
    let b = estimate_beta(&params(0.3, 2.0), &ep, 100_000, 200, 42).unwrap();
    let ratio = b.beta_hat / a.beta_hat;
    let pass = (3.4..=4.6).contains(&ratio);
    report(
        3,
        "lambda^2 scaling",
        pass,
        &format!("beta(2)/beta(1) = {ratio:.3}, required in [3.4, 4.6]"),
    );
    assert!(pass);
}

#[test]
fn criterion_04_transition_boundary() {
    // Scan the positive-energy side on the stated 0.05 grid and locate the
    // upward crossing of beta_hat = 1/2 by linear interpolation.
    let p = params(0.5, 1.0);
    let energies: Vec<f64> = (0..12).map(|i| 1.40 + 0.05 * i as f64).collect();
    let betas: Vec<f64> = energies
        .iter()
        .map(|&e| {
            let ep = energy_point(e, RESONANCE_TOL).unwrap();
            estimate_beta(&p, &ep, 200_000, 40, 42).unwrap().beta_hat
        })
        .collect();
    let mut crossing = None;
    for i in 0..betas.len() - 1 {
        let (a, b) = (betas[i] - 0.5, betas[i + 1] - 0.5);
        if a <= 0.0 && b > 0.0 {
            crossing = Some(energies[i] + 0.05 * a.abs() / (b - a));
            break;
        }
    }
    let target = 3.0f64.sqrt();
    let (pass, detail) = match crossing {
        Some(e_star) => (
            (e_star - target).abs() <= 0.1,
            format!("beta_hat crosses 1/2 at E = {e_star:.4}, sqrt(3) = {target:.4}"),
        ),
        None => (false, "no crossing found on the grid".to_string()),
    };
    report(4, "transition boundary", pass, &detail);
    assert!(pass);
}

#[test]
fn criterion_05_supercritical_fourth_moment() {
    let p = params(0.7, 1.0);
    let ep = energy_point(0.5, RESONANCE_TOL).unwrap();
    let curve = fourth_moment_curve(&p, &ep, 100_000, 500, 42).unwrap();
    let bounded = curve
        .grid
        .iter()
        .zip(&curve.empirical)
        .zip(&curve.bound)
        .all(|((_, emp), bound)| emp <= bound);
    let variation = curve.last_decade_variation();
    let pass = bounded && variation < 0.05;
    report(
        5,
        "supercritical fourth moment",
        pass,
        &format!(
            "bounded at all {} checkpoints: {bounded}; last-decade variation {:.4} (< 0.05 required)",
            curve.grid.len(),
            variation
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_06_prufer_matrix_oracle_and_wronskian() {
    let p = params(0.5, 1.0);
    let ep = energy_point(0.5, RESONANCE_TOL).unwrap();
    let n = 10_000;
    let mut worst_drift = 0.0f64;
    let mut worst_wronskian = 0.0f64;
    for seed in 0..20u64 {
        let r = sample_disorder(&p.disorder, derived_seed(606, seed), n);
        let vs: Vec<f64> = (0..n).map(|j| p.lambda * p.envelope(j) * r.value(j)).collect();

        // Polar chain vs the rotated-frame vector recursion.
        let mut s = prufer_init(0.7, &ep);
        let mut y = [0.7f64.cos(), 0.7f64.sin()];
        let mut log_y = 0.0;
        for j in 1..n {
            s = prufer_step(&s, vs[j], &ep);
            let nk = j as f64 * ep.k;
            let (snk, cnk) = nk.sin_cos();
            let q = vs[j] / ep.sin_k;
            let y_new = [
                y[0] + q * (cnk * snk * y[0] + snk * snk * y[1]),
                y[1] + q * (-cnk * cnk * y[0] - cnk * snk * y[1]),
            ];
            let nrm = y_new[0].hypot(y_new[1]);
            log_y += nrm.ln();
            y = [y_new[0] / nrm, y_new[1] / nrm];
        }
        worst_drift = worst_drift.max((s.log_radius - log_y).abs());

        // Wronskian of the two coordinate chains.
        let mut c1 = prufer_init_from_x(1.0, 0.0, &ep);
        let mut c2 = prufer_init_from_x(0.0, 1.0, &ep);
        for j in 1..n {
            c1 = prufer_step(&c1, vs[j], &ep);
            c2 = prufer_step(&c2, vs[j], &ep);
            let (x1n, x1p) = reconstruct_solution(&c1, &ep);
            let (x2n, x2p) = reconstruct_solution(&c2, &ep);
            worst_wronskian = worst_wronskian.max((x1n * x2p - x1p * x2n - 1.0).abs());
        }
    }
    let pass = worst_drift <= 1e-8 * n as f64 && worst_wronskian <= 1e-6;
    report(
        6,
        "prufer-matrix oracle",
        pass,
        &format!(
            "max |log R - log|Y|| = {worst_drift:.2e} (cap {:.0e}), max |wronskian - 1| = {worst_wronskian:.2e}",
            1e-8 * n as f64
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_07_norm_sandwich() {
    let mut worst_lo = f64::INFINITY;
    let mut worst_hi = f64::NEG_INFINITY;
    let mut pass = true;
    for (alpha, lambda, e) in [(0.3, 1.0, 0.5), (0.5, 1.0, -1.2), (0.5, 2.0, 0.5), (0.7, 0.5, 1.5)]
    {
        let p = params(alpha, lambda);
        let ep = energy_point(e, RESONANCE_TOL).unwrap();
        let lo_bound = ep.sin_k * ep.sin_k / 4.0;
        for seed in 0..5u64 {
            let n = 10_000;
            let r = sample_disorder(&p.disorder, derived_seed(707, seed), n);
            // Free-solution start so the direct recursion matches exactly.
            let mut s = prufer_init_from_x(ep.k.cos(), 1.0, &ep);
            let (mut x_prev, mut x_cur) = (1.0f64, ep.k.cos());
            for j in 1..n {
                let v = p.lambda * p.envelope(j) * r.value(j);
                let ratio = (x_cur * x_cur + x_prev * x_prev) / (2.0 * s.log_radius).exp();
                worst_lo = worst_lo.min(ratio / lo_bound);
                worst_hi = worst_hi.max(ratio / 4.0);
                if ratio < lo_bound - 1e-12 || ratio > 4.0 + 1e-12 {
                    pass = false;
                }
                let x_next = (ep.e - v) * x_cur - x_prev;
                x_prev = x_cur;
                x_cur = x_next;
                s = prufer_step(&s, v, &ep);
            }
        }
    }
    report(
        7,
        "norm sandwich",
        pass,
        &format!(
            "min ratio/(sin^2 k/4) = {worst_lo:.3} (>= 1), max ratio/4 = {worst_hi:.3} (<= 1)"
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_08_phase_increment_bound() {
    let mut pass = true;
    let mut worst_margin = f64::INFINITY;
    for (alpha, lambda, e) in [(0.3, 1.0, 0.5), (0.5, 1.0, 0.5), (0.5, 2.0, -1.2), (0.7, 0.5, 1.5)]
    {
        let p = params(alpha, lambda);
        let ep = energy_point(e, RESONANCE_TOL).unwrap();
        let b = p.disorder.support_bound;
        let c0 = FRAC_PI_2 * lambda * b / ep.sin_k;
        let n0 = ((lambda * b / ep.sin_k).powf(1.0 / alpha).ceil() as usize).max(1) + 1;
        for seed in 0..5u64 {
            let n = 10_000;
            let r = sample_disorder(&p.disorder, derived_seed(808, seed), n);
            let mut s = prufer_init(0.2, &ep);
            for j in 1..n {
                let v = p.lambda * p.envelope(j) * r.value(j);
                let next = prufer_step(&s, v, &ep);
                if j >= n0 {
                    let inc = (next.theta_bar - s.theta_bar - ep.k).abs();
                    let bound = c0 * (j as f64).powf(-alpha);
                    worst_margin = worst_margin.min(bound - inc);
                    if inc > bound + 1e-14 {
                        pass = false;
                    }
                }
                s = next;
            }
        }
    }
    report(
        8,
        "phase increment bound",
        pass,
        &format!("min (bound - increment) = {worst_margin:.3e} (>= 0 required)"),
    );
    assert!(pass);
}

#[test]
fn criterion_09_oscillatory_sum_vanishing() {
    let p = params(0.5, 1.0);
    let ep = energy_point(0.5, RESONANCE_TOL).unwrap();
    let n = 1_000_000;
    let ratios: Vec<f64> = (0..20u64)
        .into_par_iter()
        .map(|seed| {
            let r = sample_disorder(&p.disorder, derived_seed(909, seed), n);
            oscillatory_sum_ratio(&r, &ep, &p, n).ratio.abs()
        })
        .collect();
    let med = median(&ratios);
    let pass = med <= 0.05;
    report(
        9,
        "oscillatory sum vanishing",
        pass,
        &format!("median |ratio| over 20 seeds = {med:.4} (<= 0.05 required)"),
    );
    assert!(pass);
}

#[test]
fn criterion_10_eigenfunction_decay_rate() {
    let start = Instant::now();
    let p = params(0.3, 1.0);
    let l = 2000;
    let slopes: Vec<f64> = (0..50u64)
        .into_par_iter()
        .flat_map_iter(|seed| {
            let r = sample_disorder(&p.disorder, derived_seed(1010, seed), l + 1);
            let box_h = build_box(&r, &p, l).unwrap();
            let pairs = eigenpairs_in_window(&box_h, -0.2, 0.2).unwrap();
            pairs
                .into_iter()
                .filter_map(|pair| {
                    decay_fit(&pair, p.alpha, default_fit_window(&pair)).ok().map(|f| f.slope)
                })
                .collect::<Vec<_>>()
        })
        .collect();
    let (mean_slope, _) = mean_and_stderr(&slopes);
    // Stated rate: -(1-2α)·λ²/(2(4-E²)) at E = 0.
    let target = -(1.0 - 2.0 * p.alpha) * p.lambda * p.lambda / (2.0 * 4.0);
    let rel_err = (mean_slope - target).abs() / target.abs();
    let elapsed = start.elapsed().as_secs_f64();
    let pass = rel_err <= 0.30 && elapsed <= 600.0;
    report(
        10,
        "eigenfunction decay rate",
        pass,
        &format!(
            "mean slope {:.4} over {} eigenpairs vs stated target {:.4} (rel err {:.2}), {:.0}s",
            mean_slope,
            slopes.len(),
            target,
            rel_err,
            elapsed
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_11_correlator_stretching_exponent() {
    let p = params(0.3, 1.0);
    let grid = log_grid(24, 1200, 12);
    let decay =
        correlator_decay_experiment(&p, (-1.0, 1.0), 0, &grid, 1500, 100, 42).unwrap();
    let pass = (decay.best_exponent - 0.4).abs() <= 0.15;
    report(
        11,
        "correlator stretching exponent",
        pass,
        &format!(
            "best exponent {:.2} (target 0.4 +/- 0.15), fit r2 {:.4}, model-scale slope {:.4}",
            decay.best_exponent, decay.best_fit.r2, decay.slope_at_model_exponent
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_12_decaying_direction() {
    let p = params(0.5, 1.5);
    let ep = energy_point(0.5, RESONANCE_TOL).unwrap();
    let n = 100_000;
    let s_n = normalizer(p.alpha, n);
    let beta = theoretical_beta(&ep, p.lambda);
    let rates: Vec<(f64, f64)> = (0..20u64)
        .into_par_iter()
        .map(|seed| {
            let r = sample_disorder(&p.disorder, derived_seed(1212, seed), n);
            let dir = decaying_direction(&r, &ep, &p, n).unwrap();
            let dec =
                run_solution_chain(&r, &ep, &p, dir.theta_inf.cos(), dir.theta_inf.sin(), n);
            let generic = dir.theta_inf + FRAC_PI_2;
            let grown = run_solution_chain(&r, &ep, &p, generic.cos(), generic.sin(), n);
            (dec.log_radius / s_n, grown.log_radius / s_n)
        })
        .collect();
    let mean_dec = rates.iter().map(|(d, _)| d).sum::<f64>() / rates.len() as f64;
    let mean_gen = rates.iter().map(|(_, g)| g).sum::<f64>() / rates.len() as f64;
    let pass = mean_dec < 0.0
        && (mean_dec + beta).abs() <= 0.25 * beta
        && (mean_gen - beta).abs() <= 0.25 * beta;
    report(
        12,
        "decaying direction",
        pass,
        &format!(
            "decaying rate {mean_dec:.4} vs -beta = {:.4}, generic rate {mean_gen:.4} vs +beta = {beta:.4}",
            -beta
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_13_transport_ordering() {
    let l = 2000;
    let window = SpectralWeight::indicator(-0.5, 0.5);
    // The closed-form kernel makes late times free, so the grid runs far
    // enough for the localized case to reach its plateau, while staying
    // dense enough at small times that the ballistic cases keep at least
    // five points between the static floor and the quarter-box
    // displacement guard.
    let times: Vec<f64> = (0..96).map(|i| 10.0 * 2.0f64.powf(i as f64 / 4.0)).collect();
    let mut exponents = Vec::new();
    for alpha in [0.3, 0.5, 0.7] {
        let p = params(alpha, 1.0);
        let curves: Vec<(Vec<f64>, f64, f64)> = (0..50u64)
            .into_par_iter()
            .map(|seed| {
                let r = sample_disorder(&p.disorder, derived_seed(1313, seed), l + 1);
                let box_h = build_box(&r, &p, l).unwrap();
                let ev = SpectralEvolution::new(diagonalize(&box_h).unwrap(), 0).unwrap();
                let curve = moment_curve(&ev, 2.0, &window, &times).unwrap();
                (curve.values, curve.mass, curve.static_value)
            })
            .collect();
        let n_curves = curves.len() as f64;
        let mean_values: Vec<f64> = (0..times.len())
            .map(|t| curves.iter().map(|(c, _, _)| c[t]).sum::<f64>() / n_curves)
            .collect();
        let mean_curve = anderson1d::dynamics::MomentCurve {
            p: 2.0,
            times: times.clone(),
            values: mean_values,
            sites: l + 1,
            mass: curves.iter().map(|(_, m, _)| m).sum::<f64>() / n_curves,
            static_value: curves.iter().map(|(_, _, s)| s).sum::<f64>() / n_curves,
        };
        let range = growth_fit_range(&mean_curve, 6).expect("growth window");
        exponents.push(transport_exponent(&mean_curve, range).unwrap());
    }
    let (e03, e05, e07) = (exponents[0], exponents[1], exponents[2]);
    let pass = e03 < e05 && e05 < e07 && e07 >= 1.5 && e03 <= 0.2;
    report(
        13,
        "transport ordering",
        pass,
        &format!(
            "exponents: alpha 0.3 -> {e03:.3} (<= 0.2), alpha 0.5 -> {e05:.3}, alpha 0.7 -> {e07:.3} (>= 1.5)"
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_14_abel_moment_closed_form() {
    let p = params(0.5, 1.0);
    let l = 200;
    let r = sample_disorder(&p.disorder, 1414, l + 1);
    let box_h = build_box(&r, &p, l).unwrap();
    let ev = SpectralEvolution::new(diagonalize(&box_h).unwrap(), 0).unwrap();
    let w = SpectralWeight::indicator(-1.0, 1.0);
    let t = 50.0;
    let closed = abel_moment(&ev, 2.0, &w, t).unwrap();
    let quad = abel_moment_quadrature(&ev, 2.0, &w, t, 1e-8 * closed).unwrap();
    let rel = (closed - quad).abs() / quad;
    let pass = rel <= 1e-4;
    report(
        14,
        "abel moment closed form",
        pass,
        &format!("closed {closed:.8} vs quadrature {quad:.8}, rel err {rel:.2e} (<= 1e-4)"),
    );
    assert!(pass);
}

#[test]
fn criterion_15_free_system_closed_forms() {
    // Spectrum of the clean box.
    let l = 99;
    let free = build_box(
        &sample_disorder(&DisorderSpec::uniform(), 1, l + 1),
        &params(0.5, 0.0),
        l,
    )
    .unwrap();
    let evs = eigenvalues(&free);
    let mut max_ev_err = 0.0f64;
    for (idx, ev) in evs.iter().enumerate() {
        let j = (l + 1 - idx) as f64;
        let exact = 2.0 * (PI * j / (l as f64 + 2.0)).cos();
        max_ev_err = max_ev_err.max((ev - exact).abs());
    }

    // Free resolvent at E = 0 on an odd box against the sine closed form.
    let l2 = 201;
    let free2 = build_box(
        &sample_disorder(&DisorderSpec::uniform(), 1, l2 + 1),
        &params(0.5, 0.0),
        l2,
    )
    .unwrap();
    let k = FRAC_PI_2;
    let denom = k.sin() * (k * (l2 as f64 + 2.0)).sin();
    let mut max_g_err = 0.0f64;
    for src in [0usize, 57, 140] {
        let col = greens_column(&free2, 0.0, src).unwrap();
        for n in 0..=l2 {
            let (lo, hi) = (n.min(src), n.max(src));
            let exact = -(k * (lo as f64 + 1.0)).sin() * (k * (l2 as f64 + 1.0 - hi as f64)).sin()
                / denom;
            max_g_err = max_g_err.max((col[n] - exact).abs());
        }
    }

    // Ballistic exponent of the free evolution.
    let l3 = 1000;
    let free3 = build_box(
        &sample_disorder(&DisorderSpec::uniform(), 1, l3 + 1),
        &params(0.5, 0.0),
        l3,
    )
    .unwrap();
    let ev3 = SpectralEvolution::new(diagonalize(&free3).unwrap(), 0).unwrap();
    let times: Vec<f64> = (0..8).map(|i| 8.0 * 1.5f64.powi(i)).collect();
    let curve = moment_curve(&ev3, 2.0, &SpectralWeight::One, &times).unwrap();
    let exponent = transport_exponent(&curve, (times[0], *times.last().unwrap())).unwrap();

    let pass = max_ev_err < 1e-10 && max_g_err < 1e-10 && (exponent - 2.0).abs() <= 0.1;
    report(
        15,
        "free-system closed forms",
        pass,
        &format!(
            "spectrum err {max_ev_err:.2e} (< 1e-10), resolvent err {max_g_err:.2e} (< 1e-10), ballistic exponent {exponent:.3} (2 +/- 0.1)"
        ),
    );
    assert!(pass);
}
