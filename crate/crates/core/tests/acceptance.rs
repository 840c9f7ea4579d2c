//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p revivals --test acceptance`. Exits non-zero if any
//! criterion fails.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::time::Instant;

use ndarray::Array2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use revivals::analysis::{detect_revivals, detect_super_revival, extract_envelope};
use revivals::linalg::max_abs_diff;
use revivals::reference::{damped_linear_expect_a, diagonal_h_fock_sum_expect_a, kerr_expect_a_closed_form};
use revivals::{
    build_hamiltonian, build_liouvillian, coherent_state, default_n0, density_from_pure, displaced_number_state,
    expm_propagate, first_revival_amplitude_vs_n, rk4_evolve, scan_nonlinearity, timescales_closed_form,
    Classification, DampingSpec, DensityMatrix, DetectionOptions, EvolveOptions, FirstRevivalOptions, FockSpace,
    ScanParams, Trajectory, DEFAULT_OMEGA0,
};

const ALPHA: Complex64 = Complex64::new(-1.9, 0.0);

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

/// Worst-case state diagnostics over every trajectory the suite produces.
#[derive(Default)]
struct Integrity {
    runs: usize,
    trace_err: f64,
    herm_defect: f64,
    min_eigenvalue: f64,
    max_purity: f64,
    eig_samples: usize,
}

thread_local! {
    static INTEGRITY: RefCell<Integrity> = RefCell::new(Integrity { min_eigenvalue: f64::INFINITY, ..Default::default() });
}

fn audit(traj: &Trajectory) {
    INTEGRITY.with(|cell| {
        let mut s = cell.borrow_mut();
        s.runs += 1;
        for r in &traj.records {
            s.trace_err = s.trace_err.max((r.trace - 1.0).abs());
            s.herm_defect = s.herm_defect.max(r.herm_defect);
            s.max_purity = s.max_purity.max(r.purity);
        }
        let picks = sample_indices(traj.snapshots.len(), 10);
        for i in picks {
            let lam = traj.snapshots[i].state.min_eigenvalue().expect("eigensolver");
            s.min_eigenvalue = s.min_eigenvalue.min(lam);
            s.eig_samples += 1;
        }
    });
}

fn sample_indices(len: usize, count: usize) -> Vec<usize> {
    if len == 0 {
        return Vec::new();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(len as u64);
    let mut idx: Vec<usize> = (0..count.min(len)).map(|_| rng.gen_range(0..len)).collect();
    idx.sort_unstable();
    idx.dedup();
    idx
}

/// Evolution with about a dozen snapshots kept for the integrity audit.
fn evolve(
    dim: usize,
    b: f64,
    k: u32,
    damping: DampingSpec,
    rho0: &DensityMatrix,
    t_final: f64,
    dt: Option<f64>,
) -> Trajectory {
    let h = build_hamiltonian(FockSpace::new(dim).unwrap(), DEFAULT_OMEGA0, b, k).unwrap();
    let l = build_liouvillian(&h, damping);
    let step = dt.unwrap_or_else(|| l.default_dt(h.classical_period(4)));
    let steps = (t_final / step).ceil() as usize;
    let opts = EvolveOptions { dt, record_every: 1, snapshot_every: Some((steps / 12).max(1)) };
    let traj = rk4_evolve(&l, rho0, t_final, opts, &mut []).unwrap();
    audit(&traj);
    traj
}

fn coherent(dim: usize) -> DensityMatrix {
    density_from_pure(&coherent_state(FockSpace::new(dim).unwrap(), ALPHA).unwrap())
}

fn displaced(dim: usize, n: usize) -> DensityMatrix {
    density_from_pure(&displaced_number_state(FockSpace::new(dim).unwrap(), ALPHA, n).unwrap())
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let gamma = 1e-3;
    let t_final = 15.0 * 2.0 * PI / DEFAULT_OMEGA0;
    let traj = evolve(30, 0.0, 2, DampingSpec::decay(gamma).unwrap(), &coherent(30), t_final, None);
    let err = traj
        .records
        .iter()
        .map(|r| (r.a - damped_linear_expect_a(ALPHA, DEFAULT_OMEGA0, gamma, 0.0, r.t)).norm())
        .fold(0.0, f64::max);
    let secs = start.elapsed().as_secs_f64();
    ensure(err <= 1e-6, format!("max |Δ⟨a⟩| = {err:.2e} > 1e-6"))?;
    ensure(secs <= 10.0, format!("runtime {secs:.1} s > 10 s"))?;
    Ok(format!("max |Δ⟨a⟩| = {err:.2e} over t ≤ {t_final:.1} a.u., {secs:.2} s"))
}

fn kerr_series(gamma: f64, t_final: f64) -> Trajectory {
    evolve(30, 0.005, 2, DampingSpec::decay(gamma).unwrap(), &coherent(30), t_final, None)
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let b = 0.005;
    let h = build_hamiltonian(FockSpace::new(30).unwrap(), DEFAULT_OMEGA0, b, 2).unwrap();
    let ts = timescales_closed_form(&h, default_n0(ALPHA, 0)).unwrap();
    let traj = kerr_series(0.0, 1.1 * ts.t_rev);
    let err = traj
        .records
        .iter()
        .map(|r| (r.a - kerr_expect_a_closed_form(ALPHA, DEFAULT_OMEGA0, b, r.t)).norm())
        .fold(0.0, f64::max);
    ensure(err <= 1e-6, format!("max |Δ⟨a⟩| = {err:.2e} > 1e-6"))?;
    let env = extract_envelope(&traj, ts.t_cl, ts.t_cl).map_err(|e| e.to_string())?;
    let report = detect_revivals(&env, &ts, &DetectionOptions::for_order(2, false)).map_err(|e| e.to_string())?;
    let expected = [ts.t_rev / 2.0, ts.t_rev];
    ensure(report.revival_times.len() == 2, format!("detected revivals at {:?}", report.revival_times))?;
    for (t, want) in report.revival_times.iter().zip(expected) {
        ensure((t - want).abs() <= 0.02 * want, format!("revival at {t:.1}, expected {want:.1}"))?;
    }
    let min_amp = report.revival_amplitudes.iter().copied().fold(f64::INFINITY, f64::min);
    ensure(min_amp >= 0.999 * ALPHA.norm(), format!("revival amplitude {min_amp:.5} < 0.999|α|"))?;
    let secs = start.elapsed().as_secs_f64();
    ensure(secs <= 60.0, format!("runtime {secs:.1} s > 60 s"))?;
    Ok(format!(
        "max |Δ⟨a⟩| = {err:.2e}; revivals at {:.1}, {:.1} a.u. (amp ≥ {:.5}); {secs:.1} s",
        report.revival_times[0], report.revival_times[1], min_amp
    ))
}

fn criterion_3() -> Outcome {
    let expected = [
        (0.0, Classification::RegularRevivals),
        (1e-4, Classification::DampedRevivals),
        (1e-3, Classification::DampedRevivals),
        (8e-3, Classification::NoRevivals),
    ];
    let h = build_hamiltonian(FockSpace::new(30).unwrap(), DEFAULT_OMEGA0, 0.005, 2).unwrap();
    let ts = timescales_closed_form(&h, default_n0(ALPHA, 0)).unwrap();
    let mut summary = Vec::new();
    for (gamma, want) in expected {
        let traj = kerr_series(gamma, 2.1 * ts.t_rev);
        let env = extract_envelope(&traj, ts.t_cl, ts.t_cl).map_err(|e| e.to_string())?;
        let report =
            detect_revivals(&env, &ts, &DetectionOptions::for_order(2, gamma > 0.0)).map_err(|e| e.to_string())?;
        ensure(report.classification == want, format!("γ = {gamma}: {} (expected {want})", report.classification))?;
        if gamma > 0.0 {
            let amps = &report.revival_amplitudes;
            ensure(
                amps.windows(2).all(|w| w[1] < w[0]),
                format!("γ = {gamma}: amplitudes not strictly decreasing: {amps:?}"),
            )?;
        }
        let amps: Vec<String> = report.revival_amplitudes.iter().map(|a| format!("{a:.3}")).collect();
        summary.push(format!("γ={gamma}: {} [{}]", report.classification, amps.join(", ")));
    }
    Ok(summary.join("; "))
}

fn criterion_4() -> Outcome {
    let mut worst: f64 = 0.0;
    let cases = [
        (2u32, 0.005, 30usize, 0usize, 1e-3, 0.0, 600.0),
        (2, 0.005, 36, 2, 2e-3, 0.5, 600.0),
        (3, 0.005, 30, 0, 1e-3, 0.0, 150.0),
        (3, 0.005, 37, 3, 2e-3, 0.5, 150.0),
    ];
    for (k, b, dim, n, gamma, n_th, t_final) in cases {
        let damping = DampingSpec::new(gamma, n_th, false).unwrap();
        let traj = evolve(dim, b, k, damping, &displaced(dim, n), t_final, None);
        let n0 = traj.records[0].n_expect;
        for r in &traj.records {
            let want = (-gamma * (n_th + 1.0) * r.t).exp();
            worst = worst.max((r.n_expect / n0 - want).abs() / want);
        }
    }
    ensure(worst <= 1e-6, format!("max relative deviation {worst:.2e} > 1e-6"))?;
    Ok(format!("max relative deviation of ⟨n⟩/⟨n₀⟩ from e^(−γ(N+1)t): {worst:.2e} (k = 2, 3; coherent and displaced; N = 0, 0.5)"))
}

fn random_density(dim: usize, seed: u64) -> DensityMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = Array2::from_shape_fn((dim, dim), |_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let mut rho = a.dot(&a.t().mapv(|z| z.conj()));
    let tr: f64 = (0..dim).map(|i| rho[[i, i]].re).sum();
    rho.mapv_inplace(|z| z / tr);
    DensityMatrix::with_tolerance(FockSpace::new(dim).unwrap(), rho, 1e-12).unwrap()
}

fn criterion_5() -> Outcome {
    let damping = DampingSpec::decay(1e-3).unwrap();
    let rho0 = random_density(8, 7);
    let h = build_hamiltonian(FockSpace::new(8).unwrap(), DEFAULT_OMEGA0, 0.005, 2).unwrap();
    let l = build_liouvillian(&h, damping);
    let exact = expm_propagate(&l, &rho0, 50.0).map_err(|e| e.to_string())?;
    let traj = evolve(8, 0.005, 2, damping, &rho0, 50.0, Some(0.01));
    let diff = max_abs_diff(traj.final_state.matrix(), exact.matrix());
    ensure(diff <= 1e-8, format!("RK4 vs expm max-entry difference {diff:.2e} > 1e-8"))?;

    let rho6 = random_density(6, 11);
    let h6 = build_hamiltonian(FockSpace::new(6).unwrap(), DEFAULT_OMEGA0, 0.05, 2).unwrap();
    let l6 = build_liouvillian(&h6, DampingSpec::decay(0.5).unwrap());
    let exact6 = expm_propagate(&l6, &rho6, 20.0).map_err(|e| e.to_string())?;
    let err_at = |dt: f64| {
        let traj = rk4_evolve(&l6, &rho6, 20.0, EvolveOptions { dt: Some(dt), ..Default::default() }, &mut []).unwrap();
        audit(&traj);
        max_abs_diff(traj.final_state.matrix(), exact6.matrix())
    };
    let (coarse, fine) = (err_at(0.08), err_at(0.04));
    let ratio = coarse / fine;
    ensure(ratio >= 14.0, format!("error ratio on halving dt is {ratio:.2} < 14"))?;
    Ok(format!("D=8 max-entry difference {diff:.2e}; D=6 errors {coarse:.2e} → {fine:.2e}, ratio {ratio:.2}"))
}

fn criterion_6() -> Outcome {
    let b = 0.005;
    let t_sr = 2.0 * PI / b;
    let mut times = Vec::new();
    let mut oracle_err = 0.0;
    for n in 0..=2usize {
        let dim = 30;
        let rho0 = displaced(dim, n);
        let traj = evolve(dim, b, 3, DampingSpec::none(), &rho0, 1.1 * t_sr, None);
        let h = build_hamiltonian(FockSpace::new(dim).unwrap(), DEFAULT_OMEGA0, b, 3).unwrap();
        if n == 0 {
            let psi = coherent_state(h.space(), ALPHA).unwrap();
            for r in &traj.records {
                let want = diagonal_h_fock_sum_expect_a(&psi, &h, r.t).unwrap();
                oracle_err = f64::max(oracle_err, (r.a - want).norm());
            }
            ensure(oracle_err <= 1e-6, format!("max |Δ⟨a⟩| vs Fock-sum oracle = {oracle_err:.2e} > 1e-6"))?;
        }
        let ts = timescales_closed_form(&h, default_n0(ALPHA, n)).unwrap();
        let env = extract_envelope(&traj, ts.t_cl, ts.t_cl).map_err(|e| e.to_string())?;
        let report = detect_revivals(&env, &ts, &DetectionOptions::for_order(3, false)).map_err(|e| e.to_string())?;
        let after = report.collapse_intervals.first().map(|c| c.1).ok_or(format!("n = {n}: no collapse detected"))?;
        let sr = detect_super_revival(&traj, DEFAULT_OMEGA0, after).map_err(|e| e.to_string())?;
        ensure(
            (sr.time - t_sr).abs() <= 0.02 * t_sr,
            format!("n = {n}: super-revival at {:.1}, expected {t_sr:.1}", sr.time),
        )?;
        times.push(sr.time);
    }
    let (lo, hi) = times.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &t| (lo.min(t), hi.max(t)));
    ensure((hi - lo) <= 0.02 * lo, format!("super-revival times differ across n: {times:?}"))?;
    Ok(format!(
        "max |Δ⟨a⟩| = {oracle_err:.2e}; super-revival at {:.2}, {:.2}, {:.2} a.u. for n = 0, 1, 2 (2π/b = {t_sr:.2})",
        times[0], times[1], times[2]
    ))
}

fn criterion_7() -> Outcome {
    let b = 0.005;
    let dim = 34 + 4;
    let mut detected = Vec::new();
    let mut rows = Vec::new();
    for n in 1..=4usize {
        let h = build_hamiltonian(FockSpace::new(dim).unwrap(), DEFAULT_OMEGA0, b, 3).unwrap();
        let ts = timescales_closed_form(&h, default_n0(ALPHA, n)).unwrap();
        let traj = evolve(dim, b, 3, DampingSpec::none(), &displaced(dim, n), 320.0, None);
        let env = extract_envelope(&traj, ts.t_cl, ts.t_cl).map_err(|e| e.to_string())?;
        let report = detect_revivals(&env, &ts, &DetectionOptions::for_order(3, false)).map_err(|e| e.to_string())?;
        let t = *report.revival_times.first().ok_or(format!("n = {n}: no revival detected"))?;
        let theory = 2.0 * PI / (3.0 * b * n as f64);
        rows.push(format!("n={n}: {t:.1} (theory {theory:.1})"));
        detected.push(t);
    }
    let (lo, hi) = detected.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &t| (lo.min(t), hi.max(t)));
    ensure(hi - lo <= 0.05 * lo, format!("first revivals spread beyond 5%: {}", rows.join(", ")))?;
    // 1/n scaling would make t(4)/t(1) = 0.25
    let ratio = detected[3] / detected[0];
    ensure(ratio > 0.5, format!("first revivals scale like 1/n: {}", rows.join(", ")))?;
    Ok(rows.join(", "))
}

fn criterion_8() -> Outcome {
    let ns: Vec<usize> = (1..=10).collect();
    let dim = 34 + 10;
    let h = build_hamiltonian(FockSpace::new(dim).unwrap(), DEFAULT_OMEGA0, 0.005, 3).unwrap();
    let res = first_revival_amplitude_vs_n(
        ALPHA,
        &ns,
        &h,
        DampingSpec::decay(1e-4).unwrap(),
        &FirstRevivalOptions::default(),
    )
    .map_err(|e| e.to_string())?;
    let amps: Vec<f64> = res.iter().map(|r| r.amplitude).collect();
    let listing: Vec<String> = res.iter().map(|r| format!("{}:{:.3}", r.n, r.amplitude)).collect();
    ensure(amps.windows(2).all(|w| w[1] < w[0]), format!("not strictly decreasing: {}", listing.join(" ")))?;
    Ok(format!("amplitudes {}", listing.join(" ")))
}

fn criterion_9() -> Outcome {
    let start = Instant::now();
    let grid: Vec<f64> = (-25..=5).map(|e| 10f64.powf(e as f64 / 5.0)).collect();
    let within_step = |got: Option<f64>, want: f64| got.is_some_and(|g| (g / want).log10().abs() * 5.0 <= 1.0 + 1e-6);
    let mut parts = Vec::new();
    for (k, onset, offset) in [(2u32, 2e-4, 1.0), (3, 4e-4, 0.06)] {
        let scan = scan_nonlinearity(&grid, &ScanParams::standard(k)).map_err(|e| e.to_string())?;
        let fmt = |x: Option<f64>| x.map_or("none".to_string(), |v| format!("{v:.3e}"));
        let line = format!(
            "k={k}: b_onset {} (expected ≈ {onset}), b_offset {} (expected ≈ {offset})",
            fmt(scan.b_onset),
            fmt(scan.b_offset)
        );
        ensure(within_step(scan.b_onset, onset) && within_step(scan.b_offset, offset), line.clone())?;
        if k == 2 {
            let low = scan.points.iter().find(|p| (p.b - 2e-5).abs() / 2e-5 < 0.3).unwrap();
            ensure(
                low.classification == Classification::NoCollapse,
                format!("b = {:.2e} classified {}", low.b, low.classification),
            )?;
        }
        parts.push(line);
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs <= 1800.0, format!("scan took {secs:.0} s > 30 min"))?;
    Ok(format!("{}; {secs:.1} s", parts.join("; ")))
}

fn criterion_10() -> Outcome {
    INTEGRITY.with(|cell| {
        let s = cell.borrow();
        let detail = format!(
            "{} runs: max |Tr ρ − 1| = {:.1e}, max herm defect = {:.1e}, min eigenvalue = {:.1e} ({} samples), max purity − 1 = {:.1e}",
            s.runs,
            s.trace_err,
            s.herm_defect,
            s.min_eigenvalue,
            s.eig_samples,
            s.max_purity - 1.0
        );
        ensure(s.runs > 0 && s.eig_samples > 0, "no trajectories audited")?;
        ensure(s.trace_err <= 1e-8, format!("trace: {detail}"))?;
        ensure(s.herm_defect <= 1e-10, format!("Hermiticity: {detail}"))?;
        ensure(s.min_eigenvalue >= -1e-7, format!("positivity: {detail}"))?;
        ensure(s.max_purity <= 1.0 + 1e-9, format!("purity: {detail}"))?;
        Ok(detail)
    })
}

fn main() {
    // libtest flags such as --nocapture are accepted and ignored
    let criteria: [Criterion; 10] = [
        ("linear damped oscillator vs analytic amplitude", criterion_1),
        ("Kerr oscillator without damping vs closed form", criterion_2),
        ("Kerr damping series classification", criterion_3),
        ("photon-number decay law", criterion_4),
        ("RK4 vs superoperator exponential", criterion_5),
        ("cubic nonlinearity super-revival", criterion_6),
        ("displaced-number revival times independent of n", criterion_7),
        ("first-revival amplitude decreasing in n", criterion_8),
        ("onset/offset brackets of the nonlinearity scan", criterion_9),
        ("state integrity across all runs", criterion_10),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(*run).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} [{secs:.1} s]", i + 1),
            Err(why) => {
                failures += 1;
                println!("criterion {:>2} FAIL  {name}: {why} [{secs:.1} s]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
