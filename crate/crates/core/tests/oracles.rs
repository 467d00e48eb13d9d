//! Checks against independently computed references: analytic Taylor-Green
//! solutions and a brute-force finite-difference quadrature.

use std::f64::consts::{LN_2, PI};

use nstrans::diagnostics::{
    energy_identity_residual, h1_norm_sq, kinetic_energy, mechanical_energy_field, singularity_indicator,
    streamwise_energy_derivative,
};
use nstrans::solver::{
    analytic_taylor_green, analytic_taylor_green_pressure, analytic_taylor_green_timeline, pressure_from_velocity,
    simulate, InitialCondition, SolverConfig, TimeStep,
};
use nstrans::{divergence, taylor_green, FlowParams, Grid, ScalarField, VelocityField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Analytic band-limited velocity: each component is a sum of Fourier modes
/// with integer wave vectors `|m| <= 4`.
struct ModeField {
    modes: Vec<(f64, f64, [f64; 4])>,
}

impl ModeField {
    fn random(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut modes = Vec::new();
        for mx in -4i32..=4 {
            for my in -4i32..=4 {
                if mx * mx + my * my > 16 || rng.random::<f64>() < 0.5 {
                    continue;
                }
                let c = [(); 4].map(|_| rng.random_range(-1.0..1.0));
                modes.push((mx as f64, my as f64, c));
            }
        }
        Self { modes }
    }

    fn eval(&self, x: f64, y: f64) -> (f64, f64) {
        self.modes.iter().fold((0.0, 0.0), |(u, v), (kx, ky, c)| {
            let ph = kx * x + ky * y;
            (u + c[0] * ph.cos() + c[1] * ph.sin(), v + c[2] * ph.cos() + c[3] * ph.sin())
        })
    }
}

/// Second-order central-difference quadrature of `int |grad u|^2` on an
/// `n x n` periodic lattice over `[0, 2pi)^2`.
fn fd_h1_oracle(f: impl Fn(f64, f64) -> (f64, f64), n: usize) -> f64 {
    let h = 2.0 * PI / n as f64;
    let at = |i: usize, j: usize| f((i % n) as f64 * h, (j % n) as f64 * h);
    let samples: Vec<Vec<(f64, f64)>> = (0..n).map(|j| (0..n).map(|i| at(i, j)).collect()).collect();
    let mut sum = 0.0;
    for j in 0..n {
        for i in 0..n {
            let (ip, im) = ((i + 1) % n, (i + n - 1) % n);
            let (jp, jm) = ((j + 1) % n, (j + n - 1) % n);
            let dux = (samples[j][ip].0 - samples[j][im].0) / (2.0 * h);
            let duy = (samples[jp][i].0 - samples[jm][i].0) / (2.0 * h);
            let dvx = (samples[j][ip].1 - samples[j][im].1) / (2.0 * h);
            let dvy = (samples[jp][i].1 - samples[jm][i].1) / (2.0 * h);
            sum += dux * dux + duy * duy + dvx * dvx + dvy * dvy;
        }
    }
    sum * h * h
}

#[test]
fn h1_matches_finite_difference_quadrature() {
    let grid = Grid::square(32).unwrap();
    for seed in 0..10 {
        let mf = ModeField::random(seed);
        let field = VelocityField::from_fn(grid, |x, y| mf.eval(x, y)).unwrap();
        let spectral = h1_norm_sq(&field);
        let oracle = fd_h1_oracle(|x, y| mf.eval(x, y), 512);
        let rel = (spectral - oracle).abs() / oracle;
        assert!(rel < 5e-3, "seed {seed}: spectral {spectral} vs fd {oracle} (rel {rel})");
    }
}

#[test]
fn taylor_green_h1_against_quadrature_and_closed_form() {
    let oracle = fd_h1_oracle(|x, y| (x.sin() * y.cos(), -x.cos() * y.sin()), 512);
    assert!((oracle - 4.0 * PI * PI).abs() / (4.0 * PI * PI) < 1e-3);
    for n in [16, 64, 128] {
        let h1 = h1_norm_sq(&taylor_green(&Grid::square(n).unwrap(), 1.0).unwrap());
        assert!((h1 - 4.0 * PI * PI).abs() / (4.0 * PI * PI) < 1e-10);
    }
}

#[test]
fn taylor_green_mechanical_energy_closed_form() {
    let grid = Grid::square(64).unwrap();
    let f = taylor_green(&grid, 1.0).unwrap();
    let p = pressure_from_velocity(&f);
    let e = mechanical_energy_field(&f, &p, &FlowParams::with_viscosity(0.01)).unwrap();
    // p/rho = (cos2x + cos2y)/4 and |u|^2/2 = (1 - cos2x cos2y)/4
    let exact = ScalarField::from_fn(grid, |x, y| {
        let (c2x, c2y) = ((2.0 * x).cos(), (2.0 * y).cos());
        0.25 + 0.25 * c2x + 0.25 * c2y - 0.25 * c2x * c2y
    })
    .unwrap();
    let scale = exact.max_abs();
    for (a, b) in e.data().iter().zip(exact.data()) {
        assert!((a - b).abs() / scale < 1e-10);
    }
}

#[test]
fn bernoulli_holds_for_taylor_green() {
    let grid = Grid::square(64).unwrap();
    let params = FlowParams::with_viscosity(0.01);
    let f = taylor_green(&grid, 1.0).unwrap();
    let p = analytic_taylor_green_pressure(&grid, 1.0).unwrap();
    let e = mechanical_energy_field(&f, &p, &params).unwrap();
    let d = streamwise_energy_derivative(&f, &e).unwrap();
    assert!(d.max_abs() < 1e-10, "sup |u.grad E| = {}", d.max_abs());
}

#[test]
fn simulated_decay_matches_exact_solution() {
    let grid = Grid::square(64).unwrap();
    let cfg = SolverConfig::taylor_green(grid, FlowParams::with_viscosity(0.01), 1.0, 1.0, 0.1);
    let tl = simulate(&cfg).unwrap();
    let times = tl.times();
    assert_eq!(times.len(), 11);
    assert_eq!(times[10], 1.0);
    for (k, t) in times.iter().enumerate() {
        assert!((t - 0.1 * k as f64).abs() < 1e-12);
    }
    let ke = kinetic_energy(tl.snapshots()[10].velocity());
    let exact = PI * PI * (-0.04f64).exp();
    assert!((ke - exact).abs() / exact < 1e-6);
}

#[test]
fn rk4_temporal_convergence() {
    // nu chosen so the RK4 truncation error sits well above round-off
    let grid = Grid::square(16).unwrap();
    let nu = 0.25;
    let exact = analytic_taylor_green(&grid, 1.0, nu, 1.0).unwrap();
    let errors: Vec<f64> = [0.1, 0.05, 0.025]
        .iter()
        .map(|&dt| {
            let mut cfg = SolverConfig::taylor_green(grid, FlowParams::with_viscosity(nu), 1.0, 1.0, 1.0);
            cfg.dt = TimeStep::Fixed(dt);
            let tl = simulate(&cfg).unwrap();
            let last = tl.snapshots().last().unwrap().velocity();
            last.u()
                .iter()
                .zip(exact.velocity().u())
                .chain(last.v().iter().zip(exact.velocity().v()))
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
        })
        .collect();
    for pair in errors.windows(2) {
        let order = (pair[0] / pair[1]).log2();
        assert!(order >= 3.0, "observed order {order} from errors {errors:?}");
    }
}

#[test]
fn divergence_stays_at_round_off_without_dealiasing() {
    let grid = Grid::square(32).unwrap();
    let mut cfg = SolverConfig::taylor_green(grid, FlowParams::with_viscosity(0.01), 1.0, 1.0, 0.25);
    cfg.initial_condition = InitialCondition::RandomShear { seed: 5, amplitude: 1.0 };
    cfg.dealias = false;
    for s in simulate(&cfg).unwrap().snapshots() {
        assert!(divergence(s.velocity()).max_abs() < 1e-10);
    }
}

#[test]
fn centred_residual_on_exact_solution() {
    let grid = Grid::square(32).unwrap();
    let params = FlowParams::with_viscosity(0.01);
    let tl = analytic_taylor_green_timeline(&grid, 1.0, &params, &[0.4, 0.5, 0.6]).unwrap();
    let r = energy_identity_residual(&tl, 1).unwrap();
    assert!(r.normalized.abs() < 1e-3, "normalized residual {}", r.normalized);
}

#[test]
fn half_decay_hit_within_one_interval() {
    let grid = Grid::square(16).unwrap();
    let params = FlowParams::with_viscosity(0.01);
    let interval = 1.0;
    let times: Vec<f64> = (0..=60).map(|k| k as f64 * interval).collect();
    let tl = analytic_taylor_green_timeline(&grid, 1.0, &params, &times).unwrap();
    let first = (0..tl.len())
        .find(|&k| singularity_indicator(&tl, k, 0.5).unwrap().global_hit)
        .unwrap();
    let t_star = LN_2 / (2.0 * 0.01);
    assert!((times[first] - t_star).abs() <= interval);
}

#[test]
fn kinetic_energy_rate_bounded_by_indicator() {
    // |d||u||^2/dt| <= 2 nu h1(0) indicator^2, 5% slack
    let grid = Grid::square(16).unwrap();
    let nu = 0.01;
    let params = FlowParams::with_viscosity(nu);
    let times: Vec<f64> = (0..=40).map(|k| k as f64 * 2.0).collect();
    let tl = analytic_taylor_green_timeline(&grid, 1.0, &params, &times).unwrap();
    let snaps = tl.snapshots();
    let h1_0 = h1_norm_sq(snaps[0].velocity());
    for k in 1..snaps.len() - 1 {
        let l2 = |s: &nstrans::Snapshot| 2.0 * kinetic_energy(s.velocity());
        let rate = (l2(&snaps[k + 1]) - l2(&snaps[k - 1])) / (times[k + 1] - times[k - 1]);
        let ind = singularity_indicator(&tl, k, 0.5).unwrap().indicator;
        assert!(rate.abs() <= 1.05 * 2.0 * nu * h1_0 * ind * ind, "k = {k}");
    }
}
