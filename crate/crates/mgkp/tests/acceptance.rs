//! Acceptance gate: one test per shipping criterion, each printing a
//! single pass/fail line (run with `--nocapture` to see them on success).
//! Tolerances are pinned here, next to the checks they govern.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mgkp::conservation::{
    self, conserved_integral, topological_charge, IntegralKind, RectCurve, OFFSHELL_RTOL,
};
use mgkp::field2d::{Field2D, Grid2D, Spectral};
use mgkp::kinematics::{
    shock_curve_speed, shock_curve_speed_k2, soliton_from_ctheta, speed_bounds, vartheta,
};
use mgkp::params::{scaling_weight, ScaledParams, ScalingKind};
use mgkp::rational::HalfInt;
use mgkp::solver::{measure_row_speed, seed_line_wave, snap_slope, Solver, SolverConfig};
use mgkp::wave::{
    classify, construct, first_integral_residual, hw_to_angle_speed, ode_residual, profile_hw,
    reduced_constants, Polarity, SolutionKind, WaveFrame,
};

fn report(n: u32, desc: &str, ok: bool) {
    println!(
        "ACCEPTANCE criterion {n} ({desc}): {}",
        if ok { "pass" } else { "FAIL" }
    );
    assert!(ok, "acceptance criterion {n} failed: {desc}");
}

fn q(n: i32, d: i32) -> HalfInt {
    HalfInt::new(n, d).unwrap()
}

/// Try both branches; pair families admit both, single/bright families
/// admit exactly one.
fn construct_any_branch(
    sp: &ScaledParams,
    frame: &WaveFrame,
    kind: SolutionKind,
) -> Option<mgkp::wave::LineWaveSolution> {
    construct(sp, frame, kind, Polarity::Bright)
        .or_else(|_| construct(sp, frame, kind, Polarity::Dark))
        .ok()
}

// ------------------------------------------------------------------
// 1. exact profiles satisfy the reduced ODE and its first integral
// ------------------------------------------------------------------

#[test]
fn criterion_1_exact_profile_residuals() {
    const RTOL: f64 = 1e-8;
    const FRAMES_PER_COMBO: usize = 10;
    const SAMPLES: usize = 201;
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut checked = 0usize;
    let mut worst = 0.0f64;
    for qv in [q(1, 2), q(1, 1), q(2, 1), q(3, 1)] {
        for s1 in [1i8, -1] {
            for s2 in [1i8, -1] {
                let sp = ScaledParams::new(s1, s2, 0.3, 0.7, qv).unwrap();
                let mut found = 0usize;
                let mut attempts = 0usize;
                while found < FRAMES_PER_COMBO && attempts < 20_000 {
                    attempts += 1;
                    let mu = rng.gen_range(-2.0..2.0);
                    let nu = rng.gen_range(-3.0..3.0);
                    let frame = WaveFrame::new(mu, nu);
                    let rc = reduced_constants(&sp, &frame);
                    let kinds = classify(&sp, &rc);
                    let mut any = false;
                    for kind in kinds.into_iter().filter(|k| !k.is_shock()) {
                        let Some(sol) = construct_any_branch(&sp, &frame, kind) else {
                            continue;
                        };
                        let h = sol.height;
                        let w = sol.width;
                        let qf = sp.qf();
                        // residual scales from the term magnitudes at the peak
                        let scale_ode = 1.0
                            + (rc.cap_a.abs()
                                + h.powf(2.0 * qf)
                                + (sp.a + sp.b).abs() * mu.abs() * h.powf(qf))
                                * h
                                / w
                            + h / (w * w * w);
                        let scale_fi = 1.0
                            + rc.cap_a.abs() * h * h
                            + rc.cap_b.abs() * h.powf(2.0 * qf + 2.0)
                            + 2.0 * rc.cap_c.abs() * h.powf(qf + 2.0);
                        let r_ode = ode_residual(&sol, SAMPLES).unwrap() / scale_ode;
                        let r_fi = first_integral_residual(&sol, SAMPLES).unwrap() / scale_fi;
                        worst = worst.max(r_ode).max(r_fi);
                        assert!(
                            r_ode <= RTOL && r_fi <= RTOL,
                            "q={qv:?} s1={s1} s2={s2} mu={mu} nu={nu} kind={kind:?}: \
                             ode={r_ode:.3e} fi={r_fi:.3e}"
                        );
                        checked += 1;
                        any = true;
                    }
                    if any {
                        found += 1;
                    }
                }
                assert_eq!(
                    found, FRAMES_PER_COMBO,
                    "could not find {FRAMES_PER_COMBO} admissible frames for q={qv:?} s1={s1} s2={s2}"
                );
            }
        }
    }
    let ok = checked >= 16 * FRAMES_PER_COMBO && worst <= RTOL && start.elapsed().as_secs() < 10;
    println!(
        "  {} profiles, worst relative residual {worst:.3e}, {:.2}s",
        checked,
        start.elapsed().as_secs_f64()
    );
    report(1, "exact profiles satisfy the ODE and first integral", ok);
}

// ------------------------------------------------------------------
// 2. all fifteen conservation-law triples hold off-shell
// ------------------------------------------------------------------

#[test]
fn criterion_2_all_conservation_laws_offshell() {
    const FIELDS: usize = 20;
    const POINTS: usize = 5;
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut tested = [false; 16];
    let mut quarantined = Vec::new();
    for id in 1..=15u8 {
        for (s1, s2) in [(1i8, 1i8), (1, -1), (-1, 1), (-1, -1)] {
            let Some(sp) = conservation::params_for_id(id, s1, s2) else {
                continue;
            };
            let rep = conservation::verify_id(id, &sp, FIELDS, POINTS, &mut rng).unwrap();
            assert!(rep.applicable, "canonical parameters for id {id} must apply");
            assert_ne!(
                rep.verdict, "fail",
                "id {id} (s1={s1}, s2={s2}): residual {:.3e} > {OFFSHELL_RTOL:.0e}",
                rep.residual_max
            );
            tested[id as usize] = true;
            // typo protocol: where a printed flux differs, it must fail
            // and the reconstructed flux must pass
            if conservation::variant_differs(id) {
                let printed = rep.printed_residual_max.unwrap();
                assert!(
                    printed > OFFSHELL_RTOL,
                    "id {id}: printed form unexpectedly passes ({printed:.3e})"
                );
                assert!(rep.corrected_flux_used);
                assert!(rep.verdict.contains("quarantined"));
                quarantined.push((id, printed, rep.residual_max));
            }
        }
    }
    for id in 1..=15 {
        assert!(tested[id], "id {id} was never exercised");
    }
    println!("  quarantine report (printed residual vs reconstructed residual):");
    quarantined.dedup_by_key(|e| e.0);
    for (id, printed, corrected) in &quarantined {
        println!(
            "    id {id}: printed {printed:.3e} FAILS, reconstructed {corrected:.3e} passes"
        );
    }
    let elapsed = start.elapsed().as_secs_f64();
    println!("  {FIELDS} fields x {POINTS} points per configuration, {elapsed:.1}s");
    let ok = quarantined.iter().map(|e| e.0).collect::<Vec<_>>() == vec![9, 10, 13, 14, 15]
        && elapsed < 60.0;
    report(2, "all 15 conservation triples verified off-shell", ok);
}

// ------------------------------------------------------------------
// 3. the three profile parameterizations agree pointwise
// ------------------------------------------------------------------

#[test]
fn criterion_3_parameterization_routes_agree() {
    const RTOL: f64 = 1e-9;
    const CASES: usize = 20;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut done = 0usize;
    let mut worst = 0.0f64;
    while done < CASES {
        let qv = [q(1, 2), q(1, 1), q(2, 1), q(3, 1)][rng.gen_range(0..4)];
        let s1 = if rng.gen_bool(0.5) { 1 } else { -1 };
        let s2 = if rng.gen_bool(0.5) { 1 } else { -1 };
        let a = rng.gen_range(0.1..1.0);
        let b = rng.gen_range(0.1..1.0);
        let sp = ScaledParams::new(s1, s2, a, b, qv).unwrap();
        // mu > 0 keeps theta positive; the (h, w) map determines theta
        // only up to sign
        let mu = rng.gen_range(0.05..2.0);
        let nu = rng.gen_range(-3.0..3.0);
        let frame = WaveFrame::new(mu, nu);
        let rc = reduced_constants(&sp, &frame);
        let Some(kind) = classify(&sp, &rc).into_iter().find(|k| !k.is_shock()) else {
            continue;
        };
        let Some(sol) = construct_any_branch(&sp, &frame, kind) else {
            continue;
        };
        let meta = sol.metadata();

        // route 2: reconstruct from (c, theta) and compare pointwise
        let sol2 = soliton_from_ctheta(&sp, meta.c, meta.theta, kind, sol.branch).unwrap();
        for i in 0..41 {
            let xi = -8.0 * meta.w + 16.0 * meta.w * i as f64 / 40.0;
            let d = (sol.eval(xi) - sol2.eval(xi)).abs() / meta.h;
            worst = worst.max(d);
            assert!(d <= RTOL, "(c,theta) route differs by {d:.3e} at xi={xi}");
        }
        // frame parameters must agree too
        for (x, y) in [(sol2.frame.mu, mu), (sol2.frame.nu, nu)] {
            let d = (x - y).abs() / (1.0 + y.abs());
            worst = worst.max(d);
            assert!(d <= RTOL, "frame mismatch {x} vs {y}");
        }

        // route 3: the closed (h, w) profile and its angle/speed map
        for i in 0..41 {
            let xi = -8.0 * meta.w + 16.0 * meta.w * i as f64 / 40.0;
            let d = (sol.eval(xi).abs() - profile_hw(&sp, meta.h, meta.w, xi).unwrap()).abs()
                / meta.h;
            worst = worst.max(d);
            assert!(d <= RTOL, "(h,w) route differs by {d:.3e} at xi={xi}");
        }
        let (theta_hw, c_hw) = hw_to_angle_speed(&sp, meta.h, meta.w).unwrap();
        let dt = (theta_hw - meta.theta.abs()).abs() / (1.0 + meta.theta.abs());
        let dc = (c_hw - meta.c).abs() / (1.0 + meta.c.abs());
        worst = worst.max(dt).max(dc);
        assert!(
            dt <= RTOL && dc <= RTOL,
            "angle/speed from (h,w): ({theta_hw}, {c_hw}) vs ({}, {})",
            meta.theta.abs(),
            meta.c
        );
        done += 1;
    }
    println!("  {done} admissible cases, worst relative deviation {worst:.3e}");
    report(3, "(mu,nu)/(c,theta)/(h,w) routes agree pointwise", worst <= RTOL);
}

// ------------------------------------------------------------------
// 4. kinematic boundary identities
// ------------------------------------------------------------------

#[test]
fn criterion_4_kinematic_boundaries() {
    // (a) the minimum-speed curve inverts: c_min(vartheta(c)) = c
    let sp_focus = ScaledParams::new(1, 1, 0.0, 1.0, q(1, 1)).unwrap();
    let mut ok = true;
    for c in [0.1, 1.0, 10.0] {
        let theta = vartheta(c).unwrap();
        let c_min = speed_bounds(&sp_focus, theta).unwrap().c_min;
        let d = (c_min - c).abs();
        ok &= d <= 1e-10;
        assert!(d <= 1e-10, "c_min(vartheta({c})) = {c_min}, off by {d:.3e}");
    }

    // (b) the defocussing upper boundary at k = 1/sqrt(3):
    // c_max = (1 + k^2) sin^2(theta)/cos(theta), b = k*sqrt(6) at q = 1
    let b = 2.0f64.sqrt(); // k*sqrt(6) with k = 1/sqrt(3)
    let sp = ScaledParams::new(-1, 1, 0.0, b, q(1, 1)).unwrap();
    let k2 = b * b / 6.0;
    for i in 0..100 {
        let theta = -1.5 + 3.0 * i as f64 / 99.0;
        let c_max = speed_bounds(&sp, theta).unwrap().c_max.unwrap();
        let expected = (1.0 + k2) * theta.sin() * theta.sin() / theta.cos();
        let d = (c_max - expected).abs() / (1.0 + expected.abs());
        ok &= d <= 1e-12;
        assert!(d <= 1e-12, "c_max({theta}) off by {d:.3e}");
    }

    // (c) k^2 = 1 with sigma2 = -1: the shock curve sits at c = 0 exactly
    // in the k^2 parameterization; the (a, b) realization of the same
    // point (a + b = sqrt(6)) agrees to double rounding
    let sp_stat = ScaledParams::new(-1, -1, 0.0, 6.0f64.sqrt(), q(1, 1)).unwrap();
    for i in 1..20 {
        let theta = -1.4 + 2.8 * i as f64 / 19.0;
        let c = shock_curve_speed_k2(-1, 1.0, theta).unwrap();
        ok &= c == 0.0;
        assert_eq!(c, 0.0, "stationary shock curve must vanish exactly at theta={theta}");
        let c_ab = shock_curve_speed(&sp_stat, theta).unwrap();
        assert!(c_ab.abs() <= 1e-14, "(a,b) realization off by {c_ab:.3e}");
    }
    report(4, "minimum-speed inversion, defocussing boundary, stationary shock", ok);
}

// ------------------------------------------------------------------
// 5. exact rational scaling weights
// ------------------------------------------------------------------

#[test]
fn criterion_5_scaling_weights() {
    // momentum weight 3 - 2/q vanishes exactly at q = 2/3
    assert_eq!(scaling_weight(ScalingKind::Momentum, 2, 3).unwrap(), (0, 1));
    // variational energy weight 1 - 2/q vanishes exactly at q = 2
    assert_eq!(scaling_weight(ScalingKind::EnergyVar, 2, 1).unwrap(), (0, 1));
    // non-variational energy (q = 1 only) has weight -1
    assert_eq!(scaling_weight(ScalingKind::EnergyNonVar, 1, 1).unwrap(), (-1, 1));
    // spot checks away from the critical powers
    assert_eq!(scaling_weight(ScalingKind::Momentum, 1, 1).unwrap(), (1, 1));
    assert_eq!(scaling_weight(ScalingKind::Momentum, 1, 2).unwrap(), (-1, 1));
    assert_eq!(scaling_weight(ScalingKind::EnergyVar, 1, 1).unwrap(), (-1, 1));
    assert!(scaling_weight(ScalingKind::EnergyNonVar, 2, 1).is_err());
    report(5, "critical scaling weights are exact rational zeros", true);
}

// ------------------------------------------------------------------
// 6. spectral solver benchmarks
// ------------------------------------------------------------------

#[test]
fn criterion_6_solver_benchmarks() {
    let start = Instant::now();

    // (a) zero-angle soliton at q = 1, a = b = 0: translation at
    // unit speed to t = 1 with L2 error <= 1e-3 at Nx = 256
    let sp = ScaledParams::new(1, 1, 0.0, 0.0, q(1, 1)).unwrap();
    let grid = Grid2D::new(256, 32, 32.0, 8.0).unwrap();
    let frame = WaveFrame::new(0.0, 1.0);
    let kind = classify(&sp, &reduced_constants(&sp, &frame))
        .into_iter()
        .find(|k| !k.is_shock())
        .unwrap();
    let sol = construct(&sp, &frame, kind, Polarity::Bright).unwrap();
    let (u0, _) = seed_line_wave(&sol, 0.0, grid.lx / 2.0, grid, false).unwrap();
    let solver = Solver::new(&sp, grid, None).unwrap();
    let mut cfg = SolverConfig::new(1e-4, 1.0);
    cfg.snap_every = Some(2000);
    let evo = solver.evolve(&u0, &cfg).unwrap();
    let (u_ref, _) = seed_line_wave(&sol, 0.0, grid.lx / 2.0 + 1.0, grid, false).unwrap();
    let mut diff = evo.u.clone();
    for (d, r) in diff.data.iter_mut().zip(u_ref.data.iter()) {
        *d -= r;
    }
    let l2_err = diff.l2_norm() / u_ref.l2_norm();
    assert!(l2_err <= 1e-3, "straight soliton L2 error {l2_err:.3e} at t = 1");

    // conserved-integral drift over the run
    let p = &evo.trace.momentum;
    let m = &evo.trace.mass;
    let p_drift = p.iter().map(|v| (v - p[0]).abs()).fold(0.0f64, f64::max) / p[0].abs();
    let m_drift =
        m.iter().map(|v| (v - m[0]).abs()).fold(0.0f64, f64::max) / (1.0 + m[0].abs());
    assert!(p_drift <= 1e-6, "momentum drift {p_drift:.3e}");
    assert!(m_drift <= 1e-6, "mass drift {m_drift:.3e}");

    // (b) tilted soliton: measured (c, theta) within 1 % of the frame
    let sp_t = ScaledParams::new(1, 1, 0.0, 0.5, q(1, 1)).unwrap();
    let grid_t = Grid2D::new(128, 128, 64.0, 64.0).unwrap();
    let (mu, _wrap) = snap_slope(1.0, grid_t);
    let frame_t = WaveFrame::new(mu, 2.0);
    let kind_t = classify(&sp_t, &reduced_constants(&sp_t, &frame_t))
        .into_iter()
        .find(|k| !k.is_shock())
        .unwrap();
    let sol_t = construct(&sp_t, &frame_t, kind_t, Polarity::Bright).unwrap();
    let (u0_t, _) = seed_line_wave(&sol_t, mu, grid_t.lx / 2.0, grid_t, false).unwrap();
    let solver_t = Solver::new(&sp_t, grid_t, None).unwrap();
    let mut cfg_t = SolverConfig::new(5e-4, 0.4);
    cfg_t.snap_every = Some(100);
    let evo_t = solver_t.evolve(&u0_t, &cfg_t).unwrap();
    let nu_meas = measure_row_speed(&evo_t.snapshots, 0).unwrap();
    let c_meas = nu_meas / (1.0 + mu * mu).sqrt();
    let c_pred = frame_t.speed();
    let c_err = (c_meas - c_pred).abs() / c_pred.abs();
    // theta is fixed by the seeded slope; the measured angle check is the
    // speed consistency along the frame direction
    assert!(c_err <= 0.01, "tilted speed {c_meas} vs {c_pred} ({c_err:.3e})");

    // (c) variational case: energy and y-momentum drift <= 1e-5
    let sp_v = ScaledParams::new(-1, -1, 0.25, 0.5, q(1, 1)).unwrap(); // a = bq/2
    let grid_v = Grid2D::new(64, 64, 16.0, 16.0).unwrap();
    let mut u0_v = Field2D::from_fn(grid_v, |x, y| {
        0.4 * (std::f64::consts::TAU * x / 16.0).sin()
            * (1.0 + 0.3 * (std::f64::consts::TAU * y / 16.0).cos())
    });
    u0_v.project_zero_row_mean();
    let solver_v = Solver::new(&sp_v, grid_v, None).unwrap();
    let cfg_v = SolverConfig::new(1e-3, 0.5);
    let evo_v = solver_v.evolve(&u0_v, &cfg_v).unwrap();
    let e = &evo_v.trace.energy_var;
    let py = &evo_v.trace.y_momentum_var;
    assert!(e[0].is_finite());
    let e_drift = e.iter().map(|v| (v - e[0]).abs()).fold(0.0f64, f64::max);
    let py_drift = py.iter().map(|v| (v - py[0]).abs()).fold(0.0f64, f64::max);
    assert!(e_drift <= 1e-5, "variational energy drift {e_drift:.3e}");
    assert!(py_drift <= 1e-5, "variational y-momentum drift {py_drift:.3e}");

    let elapsed = start.elapsed().as_secs_f64();
    println!(
        "  straight L2 {l2_err:.3e}, P drift {p_drift:.3e}, tilted speed error {c_err:.3e}, \
         E_var drift {e_drift:.3e}, {elapsed:.1}s"
    );
    report(6, "solver reproduces exact kinematics and conserves invariants", elapsed < 300.0);
}

// ------------------------------------------------------------------
// 7. the mass charge vanishes and is deformation independent
// ------------------------------------------------------------------

#[test]
fn criterion_7_topological_mass_charge() {
    const TOL_FRAC: f64 = 1e-4;
    let sp = ScaledParams::new(1, 1, 0.0, 0.0, q(1, 1)).unwrap();
    let grid = Grid2D::new(64, 64, 32.0, 32.0).unwrap();
    let mut u = Field2D::from_fn(grid, |x, y| {
        let r2 = (x - 16.0).powi(2) + (y - 16.0).powi(2);
        (-r2 / 8.0).exp()
    });
    u.project_zero_row_mean();
    // evolve briefly so the field is a genuinely dynamical state, then
    // read u_t off the equation itself
    let solver = Solver::new(&sp, grid, None).unwrap();
    let evo = solver.evolve(&u, &SolverConfig::new(1e-3, 0.2)).unwrap();
    let u = evo.u;
    let ut = solver.rhs(&u).unwrap();
    let spectral = Spectral::new(grid);

    let inner = RectCurve { i0: 16, i1: 48, j0: 16, j1: 48 };
    let outer = RectCurve { i0: 8, i1: 56, j0: 8, j1: 56 };
    let c_inner = topological_charge(2, &sp, &spectral, &u, &ut, inner).unwrap();
    let c_outer = topological_charge(2, &sp, &spectral, &u, &ut, outer).unwrap();
    let normalization = (1.0 + u.linf_norm()) * 2.0 * (grid.lx + grid.ly);
    let tol = TOL_FRAC * normalization;
    println!(
        "  inner {c_inner:.3e}, outer {c_outer:.3e}, tolerance {tol:.3e} \
         (normalization {normalization:.3e})"
    );
    let ok = c_inner.abs() <= tol && c_outer.abs() <= tol && (c_inner - c_outer).abs() <= 2.0 * tol;
    report(7, "mass charge vanishes on dynamical data, independent of the curve", ok);
}

// ------------------------------------------------------------------
// 8. energy sign criteria on random fields
// ------------------------------------------------------------------

fn random_zero_rowmean_field<R: Rng>(grid: Grid2D, rng: &mut R) -> Field2D {
    let (lx, ly) = (grid.lx, grid.ly);
    let tau = std::f64::consts::TAU;
    let mut modes = Vec::new();
    for m in 1..=3i32 {
        for n in 0..=2i32 {
            modes.push((
                m,
                n,
                rng.gen_range(-1.0..1.0),
                rng.gen_range(0.0..tau),
                rng.gen_range(0.0..tau),
            ));
        }
    }
    // every x-factor is a pure m >= 1 harmonic: zero x-mean per row exactly
    Field2D::from_fn(grid, |x, y| {
        modes
            .iter()
            .map(|&(m, n, c, px, py)| {
                c * (tau * f64::from(m) * x / lx + px).sin()
                    * (tau * f64::from(n) * y / ly + py).cos()
            })
            .sum()
    })
}

#[test]
fn criterion_8_energy_sign_criteria() {
    const N: usize = 100;
    // quadrature roundoff floor; the criteria are exact inequalities
    const FLOOR: f64 = -1e-12;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let grid = Grid2D::new(32, 32, 4.0, 4.0).unwrap();
    let spectral = Spectral::new(grid);
    let r2 = 2.0f64.sqrt();

    // non-variational energy: sign-definite setups with sigma1 = -1
    let setups = [
        ScaledParams::new(-1, -1, 0.0, r2, q(1, 1)).unwrap(),
        ScaledParams::new(-1, 1, -2.0, r2, q(1, 1)).unwrap(),
    ];
    let mut min_e = f64::INFINITY;
    for sp in &setups {
        for _ in 0..N {
            let u = random_zero_rowmean_field(grid, &mut rng);
            let e = conserved_integral(IntegralKind::Energy, sp, &spectral, &u).unwrap();
            min_e = min_e.min(e);
            assert!(e >= FLOOR, "non-variational energy {e} < 0 (a={}, b={})", sp.a, sp.b);
        }
    }

    // variational energy: sigma1 = sigma2 = -1 with a = bq/2 and the
    // coefficient bound b^2(2q+1)/(4(q+1)) <= 1
    let sp_v = ScaledParams::new(-1, -1, 0.5, 1.0, q(1, 1)).unwrap();
    let mut min_ev = f64::INFINITY;
    for _ in 0..N {
        let u = random_zero_rowmean_field(grid, &mut rng);
        let e = conserved_integral(IntegralKind::EnergyVar, &sp_v, &spectral, &u).unwrap();
        min_ev = min_ev.min(e);
        assert!(e >= FLOOR, "variational energy {e} < 0");
    }
    println!("  min E = {min_e:.6e}, min E_var = {min_ev:.6e} over {N} fields each");
    report(8, "energy sign criteria hold on random fields, zero violations", true);
}

// ------------------------------------------------------------------
// 9. profile figure data: peak heights exact, defocussing bound enforced
// ------------------------------------------------------------------

#[test]
fn criterion_9_profile_figure_csvs() {
    let dir = std::env::temp_dir().join(format!("mgkp-acceptance-9-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();

    let sp = ScaledParams::new(-1, 1, 0.0, 1.0, q(1, 1)).unwrap();
    let l = 6.0f64.sqrt(); // non-singularity bound at q = 1: w*h < sqrt(6)
    let mut emitted = 0usize;
    let mut worst = 0.0f64;
    for h in [1.0, 2.5, 4.0] {
        for w in [0.1, 0.2, 0.5, 1.0, 2.0] {
            if w * h >= l {
                // outside the defocussing existence bound: must be rejected
                assert!(profile_hw(&sp, h, w, 0.0).is_err());
                continue;
            }
            let samples = 2001usize;
            let mut max_abs = 0.0f64;
            let mut text = String::from("xi,u\n");
            for i in 0..samples {
                let xi = -10.0 * w + 20.0 * w * i as f64 / (samples - 1) as f64;
                let u = profile_hw(&sp, h, w, xi).unwrap();
                max_abs = max_abs.max(u.abs());
                text.push_str(&format!("{xi:.16e},{u:.16e}\n"));
            }
            std::fs::write(dir.join(format!("profile_h{h}_w{w}.csv")), text).unwrap();
            worst = worst.max((max_abs - h).abs());
            assert!(
                (max_abs - h).abs() <= 1e-12,
                "h={h} w={w}: max|U| = {max_abs}"
            );
            emitted += 1;
        }
    }
    println!(
        "  {emitted} profile CSVs in {}, worst |max|U| - h| = {worst:.3e}",
        dir.display()
    );
    report(9, "figure profiles peak at h exactly, singular widths rejected", emitted >= 9);
}
