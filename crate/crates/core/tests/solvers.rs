use fowler::erosion::{erosion_rate, verify_erosion, ErosionConfig};
use fowler::fd::{self, FdConfig, Model};
use fowler::grid::{Field, Grid};
use fowler::nonlocal::{Bump, SmoothProfile};
use fowler::presets::{load_preset, InitialCondition};
use fowler::spectral::{simulate, stability_probe, SimConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn small_config(t_end: f64, dt: f64) -> SimConfig {
    let mut cfg = SimConfig::new(Grid::new(30.0, 512).unwrap(), t_end);
    cfg.dt = dt;
    cfg.snapshot_stride = usize::MAX;
    cfg
}

#[test]
fn etd2_converges_at_second_order() {
    let cfg = small_config(0.2, 2.5e-4);
    let u0 = InitialCondition::default().sample(cfg.grid).unwrap();
    let reference = simulate(&cfg, &u0).unwrap().final_snapshot().field.clone();
    let errors: Vec<f64> = [4e-3, 2e-3, 1e-3]
        .iter()
        .map(|&dt| {
            let run = simulate(&small_config(0.2, dt), &u0).unwrap();
            run.final_snapshot().field.sub(&reference).unwrap().l2_norm()
        })
        .collect();
    for w in errors.windows(2) {
        let ratio = w[0] / w[1];
        assert!((3.0..5.5).contains(&ratio), "errors {errors:?}");
    }
}

#[test]
fn perturbations_grow_at_most_exponentially() {
    let cfg = small_config(0.5, 1e-3);
    let grid = cfg.grid;
    let ic = InitialCondition::default();
    let u0 = ic.sample(grid).unwrap();
    let v0 = Field::from_fn(grid, |x| ic.value(x, grid.length()) + (-(x - 14.0f64).powi(2)).exp()).unwrap();
    let rows = stability_probe(&u0, &v0, &cfg, &[1e-2, 1e-3, 1e-4]).unwrap();
    for r in &rows {
        assert!(r.sup_ratio.is_finite() && r.sup_ratio >= 1.0 - 1e-12);
        assert!(r.running_sup.windows(2).all(|w| w[1].1 >= w[0].1));
    }
    // In the linear regime the amplification no longer depends on the size.
    let (a, b) = (rows[1].sup_ratio, rows[2].sup_ratio);
    assert!((a - b).abs() <= 1e-2 * b, "{rows:?}");
}

#[test]
fn burgers_respects_the_maximum_principle() {
    let preset = load_preset("dune").unwrap();
    let cfg = FdConfig {
        model: Model::Burgers,
        t_end: 2.0,
        ..preset.fd
    };
    let r = fd::run(&cfg).unwrap();
    let peak = cfg.initial.bump().unwrap().amplitude;
    assert!(r.min_value >= -1e-12, "min {}", r.min_value);
    assert!(r.max_value <= peak + 1e-12, "max {}", r.max_value);
    assert!(r.mass_drift() < 1e-12, "mass drift {}", r.mass_drift());
}

#[test]
fn erosion_rate_predicts_random_bumps() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..10 {
        let bump = Bump {
            center: rng.gen_range(13.0..16.0),
            radius: rng.gen_range(0.75..1.5),
            amplitude: rng.gen_range(0.25..1.0),
        };
        let x_star = bump.support().1 + rng.gen_range(0.5..2.0);
        let mut sim = SimConfig::new(Grid::new(30.0, 2048).unwrap(), 0.01);
        sim.dt = 1e-4;
        let cfg = ErosionConfig {
            sim,
            x_star,
            slope_steps: 100,
        };
        let r = verify_erosion(&bump, &cfg).unwrap();
        assert!(r.measured_rate < 0.0 && r.t_star.is_some());
        assert!(
            r.relative_error <= 0.10,
            "{bump:?} at {x_star}: {} vs {}",
            r.measured_rate,
            r.predicted_rate
        );
        assert_eq!(r.predicted_rate, erosion_rate(&bump, r.x_node).unwrap());
    }
}
