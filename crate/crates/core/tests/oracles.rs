//! Checks against independently computed references: exact rational
//! arithmetic, a standalone RK4, analytic derivatives and dense solves.

mod common;

use common::*;
use num_rational::BigRational;
use pondctl_core::*;

fn dec(s: &str) -> BigRational {
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    let digits: num_rational::BigRational = format!("{int}{frac}")
        .parse::<num_bigint::BigInt>()
        .map(BigRational::from_integer)
        .unwrap();
    let scale = num_bigint::BigInt::from(10u32).pow(frac.len() as u32);
    digits / BigRational::from_integer(scale)
}

fn to_f64(r: &BigRational) -> f64 {
    // 30 significant digits is plenty for f64 comparisons.
    let scale = num_bigint::BigInt::from(10u32).pow(30);
    let scaled = (r * BigRational::from_integer(scale.clone()))
        .round()
        .to_integer();
    scaled.to_string().parse::<f64>().unwrap() / 1e30
}

struct ExactLevels {
    xi: [f64; 2],
    w_star: [f64; 2],
    u_star: [f64; 2],
}

/// Two-species levels by explicit 2×2 inverse in exact arithmetic.
fn exact_two_plant() -> ExactLevels {
    let a = [dec("0.061"), dec("0.087")];
    let b = [
        [dec("0.0000614"), dec("0.00001")],
        [dec("0.0001"), dec("0.0001992")],
    ];
    let tau = [dec("1"), dec("1")];
    let two = dec("2");
    let s00 = &two * &b[0][0];
    let s01 = &b[0][1] + &b[1][0];
    let s11 = &two * &b[1][1];
    let det = &s00 * &s11 - &s01 * &s01;
    let xi = [
        (&s11 * &a[0] - &s01 * &a[1]) / &det,
        (&s00 * &a[1] - &s01 * &a[0]) / &det,
    ];
    let p: Vec<BigRational> = (0..2)
        .map(|j| {
            let comp = &b[j][0] * &xi[0] + &b[j][1] * &xi[1];
            &xi[j] * (&a[j] - comp + &tau[j])
        })
        .collect();
    let w: Vec<BigRational> = (0..2).map(|j| &p[j] / &tau[j]).collect();
    let u: Vec<BigRational> = (0..2).map(|j| &w[j] - &xi[j]).collect();
    ExactLevels {
        xi: [to_f64(&xi[0]), to_f64(&xi[1])],
        w_star: [to_f64(&w[0]), to_f64(&w[1])],
        u_star: [to_f64(&u[0]), to_f64(&u[1])],
    }
}

#[test]
fn xi_single_plant_matches_exact_ratio() {
    // 0.103 / 0.000294 = 103000 / 294
    let exact = to_f64(&(dec("0.103") / (dec("2") * dec("0.000147"))));
    let xi = compute_xi(&ModelSpec::eichhornia()).unwrap()[0];
    assert!((xi - exact).abs() <= 1e-12 * exact);
    assert!((exact - 350.3401).abs() < 5e-5);
}

#[test]
fn two_plant_levels_match_exact_rational_solve() {
    let exact = exact_two_plant();
    let levels = equilibrium_levels(&ModelSpec::eichhornia_pistia()).unwrap();
    for j in 0..2 {
        assert!((levels.xi[j] - exact.xi[j]).abs() <= 1e-12 * exact.xi[j]);
        assert!((levels.w_star[j] - exact.w_star[j]).abs() <= 1e-12 * exact.w_star[j]);
        assert!((levels.u_star[j] - exact.u_star[j]).abs() <= 1e-10 * exact.u_star[j]);
    }
    assert!((exact.xi[0] - 400.0813).abs() < 5e-5);
    assert!((exact.xi[1] - 107.9093).abs() < 5e-5);
}

#[test]
fn closed_form_matches_rk4() {
    let spec = ModelSpec::eichhornia();
    let levels = equilibrium_levels(&spec).unwrap();
    let (p, tau) = (levels.p[0], spec.harvest_capacity()[0]);
    let linear = move |w: &[f64]| vec![p - tau * w[0]];
    let reference = rk4(linear, &[700.0], 1.0, 1e-5)[0];
    let closed = controlled_regime_closed_form(&spec, &levels, &[700.0], 1.0)[0];
    assert!((closed - reference).abs() <= 1e-6 * reference);
    assert!((closed - 490.37).abs() < 0.01);
}

#[test]
fn integrator_matches_closed_form_without_switching() {
    for (spec, w0) in [
        (ModelSpec::eichhornia(), vec![700.0]),
        (ModelSpec::eichhornia_pistia(), vec![700.0, 350.0]),
    ] {
        let levels = equilibrium_levels(&spec).unwrap();
        let traj =
            integrate_temporal(&spec, &levels, &w0, 10.0, 0.01, Dynamics::Controlled).unwrap();
        assert!(traj.regime.iter().flatten().all(|&on| on));
        for (t, w) in traj.times.iter().zip(&traj.states) {
            let exact = controlled_regime_closed_form(&spec, &levels, &w0, *t);
            assert!(max_rel(w, &exact) < 1e-6, "t = {t}");
        }
    }
}

#[test]
fn integrator_reaches_published_levels() {
    let spec = ModelSpec::eichhornia();
    let levels = equilibrium_levels(&spec).unwrap();
    let traj =
        integrate_temporal(&spec, &levels, &[140.0], 30.0, 0.006, Dynamics::Controlled).unwrap();
    assert!((traj.terminal()[0] - 368.38).abs() < 0.01);

    let spec2 = ModelSpec::eichhornia_pistia();
    let levels2 = equilibrium_levels(&spec2).unwrap();
    let traj = integrate_temporal(
        &spec2,
        &levels2,
        &[700.0, 350.0],
        30.0,
        0.006,
        Dynamics::Controlled,
    )
    .unwrap();
    assert!((traj.terminal()[0] - 414.23).abs() < 0.05);
    assert!((traj.terminal()[1] - 110.66).abs() < 0.05);

    let free = integrate_temporal(&spec, &levels, &[140.0], 120.0, 0.006, Dynamics::Free).unwrap();
    assert!((free.terminal()[0] - 700.68).abs() < 0.5);
    assert!(free.controls.iter().flatten().all(|&u| u == 0.0));
}

#[test]
fn free_dynamics_match_standalone_rk4() {
    let spec = ModelSpec::eichhornia_pistia();
    let levels = equilibrium_levels(&spec).unwrap();
    let traj =
        integrate_temporal(&spec, &levels, &[50.0, 20.0], 5.0, 0.005, Dynamics::Free).unwrap();
    let reference = rk4(lv_rhs(&spec), &[50.0, 20.0], 5.0, 0.005);
    assert!(max_rel(traj.terminal(), &reference) < 1e-12);
}

#[test]
fn step_halving_changes_terminal_little() {
    for (spec, w0) in [
        (ModelSpec::eichhornia(), vec![140.0]),
        (ModelSpec::eichhornia_pistia(), vec![280.0, 80.0]),
    ] {
        let levels = equilibrium_levels(&spec).unwrap();
        let coarse =
            integrate_temporal(&spec, &levels, &w0, 30.0, 0.006, Dynamics::Controlled).unwrap();
        let fine =
            integrate_temporal(&spec, &levels, &w0, 30.0, 0.003, Dynamics::Controlled).unwrap();
        assert!(max_rel(coarse.terminal(), fine.terminal()) < 1e-4);
    }
}

#[test]
fn regime_flags_follow_indicator() {
    let spec = ModelSpec::eichhornia_pistia();
    let levels = equilibrium_levels(&spec).unwrap();
    let traj = integrate_temporal(
        &spec,
        &levels,
        &[280.0, 80.0],
        30.0,
        0.01,
        Dynamics::Controlled,
    )
    .unwrap();
    for (w, flags) in traj.states.iter().zip(&traj.regime) {
        let a = switch_indicator(&spec, w).unwrap();
        for j in 0..2 {
            assert_eq!(flags[j], a[j] > 0.0);
        }
    }
    assert!(traj.times.windows(2).all(|t| t[1] > t[0]));
    assert!(traj.states.iter().flatten().all(|&v| v >= 0.0));
    assert!(traj.controls.iter().flatten().all(|&v| v >= 0.0));
}

#[test]
fn single_species_monotone_approach() {
    let spec = ModelSpec::eichhornia();
    let levels = equilibrium_levels(&spec).unwrap();
    let above =
        integrate_temporal(&spec, &levels, &[700.0], 20.0, 0.01, Dynamics::Controlled).unwrap();
    let series = above.species(0);
    assert!(series.windows(2).all(|w| w[1] <= w[0]));
    assert!(series.iter().all(|&v| v >= levels.w_star[0] - 1e-9));

    let below =
        integrate_temporal(&spec, &levels, &[140.0], 30.0, 0.01, Dynamics::Controlled).unwrap();
    let series = below.species(0);
    let switch = series.iter().position(|&v| v > levels.xi[0]).unwrap();
    assert!(series[..=switch].windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn objective_matches_refined_quadrature() {
    let spec = ModelSpec::eichhornia();
    let levels = equilibrium_levels(&spec).unwrap();
    let traj =
        integrate_temporal(&spec, &levels, &[140.0], 30.0, 0.006, Dynamics::Controlled).unwrap();
    let j = traj.objective(&spec).unwrap();

    // Richardson extrapolation of the trapezoid rule on steps h and 2h.
    let u: Vec<f64> = traj.controls.iter().map(|c| c[0]).collect();
    let h = traj.times[1] - traj.times[0];
    let trap = |stride: usize| -> f64 {
        let idx: Vec<usize> = (0..traj.times.len()).step_by(stride).collect();
        assert_eq!(*idx.last().unwrap(), traj.times.len() - 1);
        idx.windows(2)
            .map(|w| 0.5 * h * stride as f64 * (u[w[0]] + u[w[1]]))
            .sum()
    };
    let refined = (4.0 * trap(1) - trap(2)) / 3.0;
    let oracle = -traj.terminal()[0] - spec.harvest_capacity()[0] * refined;
    assert!((j - oracle).abs() <= 1e-6 * oracle.abs(), "{j} vs {oracle}");
    // About 16.5 days harvested at nearly u* per day.
    assert!(j < -traj.terminal()[0] - 15.0 * levels.u_star[0]);
}

#[test]
fn dxx_second_derivative_of_cosine() {
    let n = 100;
    let dx = 10.0 / 99.0;
    let op = assemble_dxx(n, dx).unwrap();
    let k = std::f64::consts::PI / 10.0;
    let w: Vec<f64> = (0..n).map(|s| (k * s as f64 * dx).cos()).collect();
    let d2 = op.apply(&w);
    let err = (1..n - 1)
        .map(|s| (d2[s] + k * k * (k * s as f64 * dx).cos()).abs())
        .fold(0.0, f64::max);
    assert!(err < 5.0 * dx * dx, "{err}");
}

#[test]
fn one_uniform_step_matches_rk4() {
    let spec = ModelSpec::eichhornia();
    let levels = equilibrium_levels(&spec).unwrap();
    let op = assemble_dxx(100, 10.0 / 99.0).unwrap();
    let init = StateField::uniform(&[140.0], 100).unwrap();
    let (next, _) =
        semi_implicit_step(&spec, &levels, &op, &init, 0.006, &StepOptions::default()).unwrap();
    let reference = rk4(lv_rhs(&spec), &[140.0], 0.006, 0.006)[0];
    let v = next.species(0);
    assert!(v.iter().all(|&x| (x - v[0]).abs() < 1e-12 * v[0]));
    assert!((v[0] - reference).abs() <= 1e-5 * reference);
}

#[test]
fn step_linear_system_residual() {
    // Rebuild the first linear system of a step by hand and check the solve.
    let spec = ModelSpec::eichhornia();
    let levels = equilibrium_levels(&spec).unwrap();
    let disc = Discretization::default();
    let op = DiffusionOperator::for_grid(&disc).unwrap();
    let prev = field(vec![profile(&disc, |x| 80.0 * x)]);
    let dt = disc.dt();
    let r = 1.33 * op.inv_dx2();
    let n = 100;
    let mut dense = vec![vec![0.0; n]; n];
    let mut rhs = vec![0.0; n];
    let (a, b) = (0.103, 0.000147);
    for s in 0..n {
        let w = prev.species(0)[s];
        let ind = -a + 2.0 * b * w;
        let (lin, c) = if ind > 0.0 {
            (0.0, levels.p[0] - levels.xi[0] - (w - levels.xi[0]))
        } else {
            (a - 2.0 * b * w, b * w * w)
        };
        for k in 0..n {
            dense[s][k] = -r * op.entry(s, k) / op.inv_dx2();
        }
        dense[s][s] += 1.0 / dt - lin;
        rhs[s] = w / dt + c;
    }
    let lower: Vec<f64> = (1..n).map(|s| dense[s][s - 1]).collect();
    let upper: Vec<f64> = (0..n - 1).map(|s| dense[s][s + 1]).collect();
    let diag: Vec<f64> = (0..n).map(|s| dense[s][s]).collect();
    let x = solve_tridiagonal(&lower, &diag, &upper, &rhs).unwrap();
    let rnorm = rhs.iter().map(|v| v.abs()).fold(0.0, f64::max);
    for s in 0..n {
        let ax: f64 = (0..n).map(|k| dense[s][k] * x[k]).sum();
        assert!((ax - rhs[s]).abs() < 1e-10 * rnorm);
    }
    let y = dense_solve(dense, rhs);
    assert!(max_rel(&x, &y) < 1e-12);

    // The crate's step uses the same system on its first inner iteration.
    let mut options = StepOptions::default();
    options.max_iterations = 2;
    options.tolerance = f64::MAX;
    let (first, _) = semi_implicit_step(&spec, &levels, &op, &prev, dt, &options).unwrap();
    assert!(max_rel(first.species(0), &x) < 1e-12);
}

#[test]
fn pure_diffusion_conserves_mass() {
    let spec = ModelSpec::eichhornia_pistia();
    let levels = equilibrium_levels(&spec).unwrap();
    let disc = Discretization::default();
    let op = DiffusionOperator::for_grid(&disc).unwrap();
    let prev = field(vec![
        profile(&disc, |x| 80.0 * x),
        profile(&disc, |x| if x < 3.0 { 500.0 } else { 1.0 }),
    ]);
    let options = StepOptions {
        dynamics: Dynamics::DiffusionOnly,
        ..StepOptions::default()
    };
    for dt in [0.006, 1.0, 50.0] {
        let (next, _) = semi_implicit_step(&spec, &levels, &op, &prev, dt, &options).unwrap();
        for j in 0..2 {
            let before: f64 = prev.species(j).iter().sum();
            let after: f64 = next.species(j).iter().sum();
            assert!((after - before).abs() <= 1e-10 * before);
        }
    }
}

#[test]
fn uniform_equilibrium_is_stationary_for_two_plants() {
    let spec = ModelSpec::eichhornia_pistia();
    let levels = equilibrium_levels(&spec).unwrap();
    let op = assemble_dxx(50, 0.2).unwrap();
    let init = StateField::uniform(&levels.w_star, 50).unwrap();
    let (next, _) =
        semi_implicit_step(&spec, &levels, &op, &init, 0.006, &StepOptions::default()).unwrap();
    for j in 0..2 {
        assert!(next
            .species(j)
            .iter()
            .all(|v| (v - levels.w_star[j]).abs() < 1e-8));
    }
}

fn assert_flags_consistent(spec: &ModelSpec, init: StateField, steps: usize) {
    let levels = equilibrium_levels(spec).unwrap();
    let disc = Discretization::default();
    let op = DiffusionOperator::for_grid(&disc).unwrap();
    let mut stepper = pde::Stepper::new(op, spec.n_species(), StepOptions::default());
    // One inner update moves each density by at most the tolerance, so the
    // indicator can move by at most that much times the row sum of S.
    let slack: Vec<f64> = (0..spec.n_species())
        .map(|j| spec.symmetrized().row(j).iter().sum::<f64>() * 1e-4)
        .collect();
    let mut current = init;
    for _ in 0..steps {
        let (next, diag) = stepper.step(spec, &levels, &current, disc.dt()).unwrap();
        let a = spatial_switch(spec, &next, SwitchRule::CrossSpecies).unwrap();
        let flags = stepper.controlled_flags();
        for j in 0..spec.n_species() {
            assert_eq!(
                flags[j].iter().filter(|&&f| f).count(),
                diag.controlled_node_count[j]
            );
            for s in 0..disc.n_space() {
                if flags[j][s] {
                    assert!(a[j][s] > -slack[j]);
                } else {
                    assert!(a[j][s] <= slack[j]);
                }
            }
        }
        current = next;
    }
}

#[test]
fn flagged_nodes_agree_with_converged_indicator() {
    let disc = Discretization::default();
    assert_flags_consistent(
        &ModelSpec::eichhornia(),
        field(vec![profile(&disc, |x| 80.0 * x)]),
        3000,
    );
    for w0 in [[280.0, 80.0], [700.0, 350.0]] {
        assert_flags_consistent(
            &ModelSpec::eichhornia_pistia(),
            StateField::uniform(&w0, disc.n_space()).unwrap(),
            3000,
        );
    }
}

#[test]
fn sliding_node_needs_regime_freezing() {
    // Two species with a sloped start put some node on the switch surface
    // away from the optimal level, where the two branches disagree.
    let spec = ModelSpec::eichhornia_pistia();
    let levels = equilibrium_levels(&spec).unwrap();
    let disc = Discretization::default();
    let init = field(vec![
        profile(&disc, |x| 70.0 * x),
        profile(&disc, |x| 35.0 * x),
    ]);
    let literal = run_pde(&spec, &levels, &disc, &init, &RunOptions::default()).unwrap_err();
    assert!(matches!(
        literal.root(),
        Error::InnerIterationDiverged { .. }
    ));
    assert!(matches!(literal, Error::Step { .. }));

    let mut options = RunOptions::default();
    options.step.freeze_regimes_after = Some(20);
    let run = run_pde(&spec, &levels, &disc, &init, &options).unwrap();
    assert!(run.diagnostics.iter().all(|d| d.final_residual <= 1e-4));
    for j in 0..2 {
        assert!(run
            .terminal()
            .species(j)
            .iter()
            .all(|v| (v - levels.w_star[j]).abs() < 1e-3));
    }
}

#[test]
fn comparison_principle_single_species() {
    let spec = ModelSpec::eichhornia();
    let levels = equilibrium_levels(&spec).unwrap();
    let disc = Discretization::new(10.0, 100, 12.0, 2000).unwrap();
    let pairs: [(fn(f64) -> f64, fn(f64) -> f64); 3] = [
        (|x| 80.0 * x, |x| 80.0 * x + 20.0),
        (|_| 140.0, |x| 140.0 + 30.0 * x),
        (|x| 10.0 * x, |_| 700.0),
    ];
    for (lo, hi) in pairs {
        let w = field(vec![profile(&disc, lo)]);
        let v = field(vec![profile(&disc, hi)]);
        let rw = run_pde(&spec, &levels, &disc, &w, &RunOptions::default()).unwrap();
        let rv = run_pde(&spec, &levels, &disc, &v, &RunOptions::default()).unwrap();
        for (a, b) in rw.snapshots.iter().zip(&rv.snapshots) {
            for (x, y) in a.species(0).iter().zip(b.species(0)) {
                assert!(x <= &(y + 1e-9));
            }
        }
    }
}
