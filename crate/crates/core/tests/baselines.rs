use std::collections::HashSet;
use std::sync::Arc;

use num_complex::Complex64;
use qexplore::alphazero::AlphaZeroConfig;
use qexplore::baselines::{
    crossover, descend, ga_optimize, grape_optimize, hybrid_optimize, mutate, q_learning_optimize, stochastic_descent,
    FilterSpec, GaConfig, GrapeConfig, GrapeProblem, HybridConfig, LbfgsStop, QLearningConfig, QTable,
};
use qexplore::env::{
    digital_environment, pwc_environment, BitObjective, ControlEnvironment, DigitalConfig, EnvBits, PwcConfig,
    SharedEnv, UnitaryTableEnv,
};
use qexplore::quantum::{
    build_target_sqrt_zx, build_target_x, ComplexMatrix, ControlSystem, SystemParameters, UnitaryOperator,
};
use qexplore::record::{Budget, ClockKind, Stage, Tracker};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-3)
}

fn cr_system() -> ControlSystem {
    ControlSystem::new(SystemParameters::cross_resonance()).unwrap()
}

fn random_pulse(rng: &mut ChaCha8Rng, n: usize, max: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen::<f64>() * max).collect()
}

fn check_fd(problem: &GrapeProblem, pulses: usize, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max = problem.max_drive();
    for _ in 0..pulses {
        // Keep away from the bounds so both difference points are valid.
        let p: Vec<f64> = (0..problem.steps()).map(|_| max * rng.gen_range(0.01..0.99)).collect();
        let (_, g) = problem.fidelity_and_gradient(&p).unwrap();
        let h = 1e-6 * max;
        for k in 0..p.len() {
            let mut up = p.clone();
            up[k] += h;
            let mut down = p.clone();
            down[k] -= h;
            let fd = (problem.fidelity(&up).unwrap() - problem.fidelity(&down).unwrap()) / (2.0 * h);
            // Compare in units of the drive bound.
            let err = rel_err(g[k] * max, fd * max);
            assert!(err < 1e-5, "step {k}: analytic {} fd {} rel {err:e}", g[k] * max, fd * max);
        }
    }
}

#[test]
fn pwc_gradient_matches_finite_differences() {
    let problem = GrapeProblem::new(cr_system(), build_target_sqrt_zx(2).unwrap(), 30, 2e-9, 1, None).unwrap();
    check_fd(&problem, 3, 1);
}

#[test]
fn filtered_gradient_matches_finite_differences() {
    let problem = GrapeProblem::new(
        cr_system(),
        build_target_sqrt_zx(2).unwrap(),
        6,
        4e-9,
        40,
        Some(FilterSpec { sigma: 0.7e-9 }),
    )
    .unwrap();
    check_fd(&problem, 2, 2);
}

/// `exp(-i theta n.sigma)` derivative for the two-level transmon, written
/// directly in Pauli form rather than through an eigendecomposition.
fn single_qubit_step(detuning: f64, omega: f64, dt: f64) -> (ComplexMatrix, ComplexMatrix) {
    let a = -detuning / 2.0;
    let b = omega;
    let r = (a * a + b * b).sqrt();
    let theta = r * dt;
    let phase = Complex64::from_polar(1.0, -detuning * dt / 2.0);
    let i = Complex64::new(0.0, 1.0);
    let id = ComplexMatrix::identity(2);
    let sz = ComplexMatrix::from_real_rows(2, &[1.0, 0.0, 0.0, -1.0]).unwrap();
    let sx = ComplexMatrix::from_real_rows(2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
    let nsig = |ca: f64, cb: f64| &sz.scale_real(ca) + &sx.scale_real(cb);
    let u = (&id.scale_real(theta.cos()) - &nsig(a / r, b / r).scale(i * theta.sin())).scale(phase);
    let dtheta = dt * b / r;
    let da = -a * b / r.powi(3);
    let db = 1.0 / r - b * b / r.powi(3);
    let du = &(&id.scale_real(-theta.sin() * dtheta) - &nsig(a / r, b / r).scale(i * theta.cos() * dtheta))
        - &nsig(da, db).scale(i * theta.sin());
    (u, du.scale(phase))
}

#[test]
fn single_qubit_gradient_matches_closed_form() {
    let params = SystemParameters::single_transmon();
    let sys = ControlSystem::new(params).unwrap();
    let target = build_target_x(2).unwrap();
    let dt = 2e-9;
    let problem = GrapeProblem::new(sys, target.clone(), 2, dt, 1, None).unwrap();
    let pulse = [0.31 * params.max_drive, 0.77 * params.max_drive];
    let (f, g) = problem.fidelity_and_gradient(&pulse).unwrap();
    let (u1, du1) = single_qubit_step(params.detuning, pulse[0], dt);
    let (u2, du2) = single_qubit_step(params.detuning, pulse[1], dt);
    let td = target.matrix().adjoint();
    let ov = (&td * &(&u2 * &u1)).trace() / 2.0;
    assert!((f - ov.norm_sqr()).abs() < 1e-12);
    let d1 = (&td * &(&u2 * &du1)).trace() / 2.0;
    let d2 = (&td * &(&du2 * &u1)).trace() / 2.0;
    let g1 = 2.0 * (ov.conj() * d1).re;
    let g2 = 2.0 * (ov.conj() * d2).re;
    let m = params.max_drive;
    assert!((g[0] * m - g1 * m).abs() < 1e-9 * (g1 * m).abs().max(1.0));
    assert!((g[1] * m - g2 * m).abs() < 1e-9 * (g2 * m).abs().max(1.0));
}

#[test]
fn gradient_vanishes_at_perfect_fidelity() {
    let sys = cr_system();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let pulse = random_pulse(&mut rng, 10, sys.max_drive() * 0.9);
    let probe = GrapeProblem::new(sys.clone(), UnitaryOperator::identity(4), 10, 2e-9, 1, None).unwrap();
    let reached = probe.unitary(&pulse).unwrap();
    let problem = GrapeProblem::new(sys.clone(), reached, 10, 2e-9, 1, None).unwrap();
    let (f, g) = problem.fidelity_and_gradient(&pulse).unwrap();
    assert!((f - 1.0).abs() < 1e-12);
    assert!(g.iter().all(|d| (d * sys.max_drive()).abs() < 1e-8), "{g:?}");

    let mut sink = Vec::new();
    let mut t = Tracker::new(&mut sink, ClockKind::Logical, Budget::Episodes(1), "grape", 0, "h").unwrap();
    let out = grape_optimize(&problem, &pulse, &GrapeConfig::default(), &mut t, 0, None).unwrap();
    assert_eq!(out.iterations, 0);
    assert_eq!(out.stop, LbfgsStop::GradientTolerance);
    // Round trip through normalized units may move the last ulp.
    assert!(out.amplitudes.iter().zip(&pulse).all(|(a, b)| (a - b).abs() <= 1e-12 * b.abs()));
}

#[test]
fn gradient_is_reflection_equivariant() {
    let sys = cr_system();
    let max = sys.max_drive();
    let problem = GrapeProblem::new(sys, build_target_sqrt_zx(2).unwrap(), 12, 2e-9, 1, None).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..5 {
        let p = random_pulse(&mut rng, 12, max);
        let mut r = p.clone();
        r.reverse();
        let (fp, gp) = problem.fidelity_and_gradient(&p).unwrap();
        let (fr, gr) = problem.fidelity_and_gradient(&r).unwrap();
        assert!((fp - fr).abs() < 1e-10);
        for k in 0..12 {
            assert!((gp[k] * max - gr[11 - k] * max).abs() < 1e-8);
        }
    }
}

#[test]
fn grape_beats_random_seeds_by_an_order_of_magnitude() {
    let sys = cr_system();
    let problem = GrapeProblem::new(sys.clone(), build_target_sqrt_zx(2).unwrap(), 30, 2e-9, 1, None).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut sink = Vec::new();
    let mut t = Tracker::new(&mut sink, ClockKind::Logical, Budget::Episodes(100), "grape", 5, "h").unwrap();
    let cfg = GrapeConfig {
        record_iterates: false,
        ..GrapeConfig::default()
    };
    let mut best_final = 1.0_f64;
    let mut best_seed = 1.0_f64;
    for group in 0..100 {
        let seed = random_pulse(&mut rng, 30, sys.max_drive());
        let out = grape_optimize(&problem, &seed, &cfg, &mut t, group, None).unwrap();
        assert!(out.history.windows(2).all(|w| w[1] >= w[0]));
        assert!(out.fidelity >= out.seed_fidelity);
        best_final = best_final.min(1.0 - out.fidelity);
        best_seed = best_seed.min(1.0 - out.seed_fidelity);
    }
    assert!(best_final * 10.0 <= best_seed, "{best_final} vs {best_seed}");
}

#[test]
fn ga_operators() {
    let a = vec![1, 0, 1, 1, 0];
    let (c1, c2) = crossover(&a, &a, 2);
    assert_eq!(c1, a);
    assert_eq!(c2, a);
    let mut m = a.clone();
    mutate(&mut m, 0.0, &mut ChaCha8Rng::seed_from_u64(0));
    assert_eq!(m, a);
    let (c1, c2) = crossover(&[0, 0, 0], &[1, 1, 1], 1);
    assert_eq!((c1, c2), (vec![0, 1, 1], vec![1, 0, 0]));
}

fn digital() -> SharedEnv {
    let sys = ControlSystem::new(SystemParameters::single_transmon()).unwrap();
    Arc::new(digital_environment(&sys, &DigitalConfig::default()).unwrap())
}

fn enumerate(env: &dyn ControlEnvironment) -> Vec<(Vec<usize>, f64)> {
    let n = env.horizon();
    (0..1usize << n)
        .map(|code| {
            let seq: Vec<usize> = (0..n).map(|k| (code >> (n - 1 - k)) & 1).collect();
            let f = env.evaluate(&seq).unwrap();
            (seq, f)
        })
        .collect()
}

#[test]
fn digital_toy_has_a_unique_optimum_at_the_hidden_string() {
    let env = digital();
    let all = enumerate(env.as_ref());
    let best = all.iter().map(|(_, f)| *f).fold(0.0, f64::max);
    let winners: Vec<_> = all.iter().filter(|(_, f)| *f > best - 1e-9).collect();
    assert_eq!(winners.len(), 1);
    let bits = DigitalConfig::default().bits().unwrap();
    assert_eq!(winners[0].0, bits);
    assert!((best - 1.0).abs() < 1e-12);
}

#[test]
fn ga_best_is_monotone_and_population_constant() {
    let env = digital();
    let obj = EnvBits::new(env).unwrap();
    let mut sink = Vec::new();
    let mut t = Tracker::new(&mut sink, ClockKind::Logical, Budget::Episodes(50), "ga", 1, "h").unwrap();
    ga_optimize(&obj, &GaConfig::default(), &mut t, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
    drop(t);
    assert_eq!(sink.len(), 50);
    assert!(sink.windows(2).all(|w| w[1].fidelity >= w[0].fidelity));
    assert!(sink.iter().all(|r| r.stage == Stage::Generation));
}

#[test]
fn q_learning_with_zero_rate_never_changes() {
    let env = digital();
    let cfg = QLearningConfig {
        learning_rate: 0.0,
        ..QLearningConfig::default()
    };
    let mut sink = Vec::new();
    let mut t = Tracker::new(&mut sink, ClockKind::Logical, Budget::Episodes(20), "q", 2, "h").unwrap();
    let reference = QTable::new(env.horizon(), 2, cfg.init_scale, &mut ChaCha8Rng::seed_from_u64(2));
    let out = q_learning_optimize(env.as_ref(), &cfg, &mut t, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
    assert_eq!(out.table, reference);
}

fn arms(fidelities: &[f64], horizon: usize) -> UnitaryTableEnv {
    let x = ComplexMatrix::from_real_rows(2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
    let actions = fidelities
        .iter()
        .map(|f: &f64| {
            let theta = f.sqrt().acos();
            UnitaryOperator::new(qexplore::quantum::propagator(&x, theta).unwrap()).unwrap()
        })
        .collect();
    UnitaryTableEnv::new("arms", actions, horizon, UnitaryOperator::identity(2), 1.0).unwrap()
}

#[test]
fn q_learning_single_update_arithmetic() {
    let mut table = QTable::new(1, 3, 0.0, &mut ChaCha8Rng::seed_from_u64(0));
    table.update(0, None, 2, 0.9, 0.001);
    assert!((table.get(0, None, 2) - 0.9 * 0.001).abs() < 1e-18);
    assert_eq!(table.get(0, None, 0), 0.0);
}

#[test]
fn q_learning_finds_enumerated_optimum() {
    // Rotations about X compose additively, so a 2-step, 3-action task has
    // nine sequences with distinct enough values.
    let env = arms(&[0.95, 0.6, 0.2], 2);
    let optimum = enumerate_general(&env).into_iter().fold(0.0, f64::max);
    let mut sink = Vec::new();
    let mut t = Tracker::new(&mut sink, ClockKind::Logical, Budget::Episodes(100_000), "q", 3, "h").unwrap();
    let out = q_learning_optimize(&env, &QLearningConfig::default(), &mut t, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
    let greedy = env.evaluate(&out.table.greedy_sequence()).unwrap();
    assert!((optimum - greedy).abs() < 1e-3, "{greedy} vs {optimum}");
}

fn enumerate_general(env: &dyn ControlEnvironment) -> Vec<f64> {
    let a = env.action_count();
    let n = env.horizon();
    (0..a.pow(n as u32))
        .map(|mut code| {
            let seq: Vec<usize> = (0..n)
                .map(|_| {
                    let x = code % a;
                    code /= a;
                    x
                })
                .collect();
            env.evaluate(&seq).unwrap()
        })
        .collect()
}

#[test]
fn sd_one_step_picks_the_better_action() {
    let env = arms(&[0.2, 0.9], 1);
    for seed in 0..20 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let start = vec![rng.gen_range(0..2)];
        let d = descend(&env, start, &mut rng, || true).unwrap();
        assert!(d.converged);
        assert_eq!(d.actions, vec![1]);
        assert!(d.proposals <= 3);
    }
}

#[test]
fn sd_converges_to_true_local_optima() {
    let env = digital();
    let all = enumerate(env.as_ref());
    let value = |seq: &[usize]| all.iter().find(|(s, _)| s == seq).unwrap().1;
    let mut sink = Vec::new();
    let mut t = Tracker::new(&mut sink, ClockKind::Logical, Budget::Episodes(40), "sd", 4, "h").unwrap();
    let descents = stochastic_descent(env.as_ref(), &mut t, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
    for d in &descents {
        assert!(d.converged);
        for k in 0..d.actions.len() {
            let mut n = d.actions.clone();
            n[k] ^= 1;
            assert!(value(&n) <= d.fidelity, "not a 1-flip optimum: {:?}", d.actions);
        }
    }
}

#[test]
fn hybrid_refinements_link_to_episodes_and_never_lose_fidelity() {
    let sys = ControlSystem::new(SystemParameters::single_transmon()).unwrap();
    let target = build_target_x(2).unwrap();
    let env = pwc_environment(&sys, target.clone(), &PwcConfig::default(), 10e-9).unwrap();
    let problem = GrapeProblem::new(sys, target, 5, 2e-9, 1, None).unwrap();
    let mut az = AlphaZeroConfig::default();
    az.search.simulations = 10;
    az.network.width = 16;
    az.min_replay = 20;
    az.batch_size = 8;
    let mut sink = Vec::new();
    let mut t = Tracker::new(&mut sink, ClockKind::Logical, Budget::Episodes(12), "hybrid", 6, "h").unwrap();
    let out = hybrid_optimize(&env, &problem, &az, &GrapeConfig::default(), &HybridConfig::default(), &mut t, 6).unwrap();
    drop(t);
    assert_eq!(out.refinements.len(), 6);
    let episodes: Vec<_> = sink.iter().filter(|r| r.stage == Stage::Episode).collect();
    assert_eq!(episodes.len(), 6);
    let episode_ids: HashSet<u64> = episodes.iter().map(|r| r.index).collect();
    for r in sink.iter().filter(|r| r.stage == Stage::Seed) {
        assert!(episode_ids.contains(&r.parent.unwrap()));
    }
    for (_, g) in &out.refinements {
        assert!(g.fidelity >= g.seed_fidelity);
    }
    let finals = sink.iter().filter(|r| r.stage == Stage::Final).count();
    assert_eq!(finals, 6);
}

#[test]
fn bit_view_requires_two_actions() {
    let sys = ControlSystem::new(SystemParameters::single_transmon()).unwrap();
    let env: SharedEnv =
        Arc::new(pwc_environment(&sys, build_target_x(2).unwrap(), &PwcConfig::default(), 4e-9).unwrap());
    assert!(EnvBits::new(env).is_err());
    let obj = EnvBits::new(digital()).unwrap();
    assert_eq!(obj.bit_count(), 8);
}
