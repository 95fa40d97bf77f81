use fowler::grid::{forward, inverse, Field, Grid};
use fowler::kernel::{build_kernel, convolve};
use fowler::nonlocal::{apply_I_formula, apply_I_spectral, sobolev_norm, Bump, Gaussian, SmoothProfile};
use fowler::symbol::{canonical_constants, omega0_closed, psi_closed, SymbolTable};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_field(grid: Grid, rng: &mut ChaCha8Rng) -> Field {
    let values = (0..grid.points()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    Field::new(grid, values).unwrap()
}

/// Sum of a few random Gaussians; smooth enough that its spectrum decays.
fn random_smooth(grid: Grid, rng: &mut ChaCha8Rng) -> Field {
    let bumps: Vec<Gaussian> = (0..3)
        .map(|_| Gaussian {
            center: rng.gen_range(0.4..0.6) * grid.length(),
            width: rng.gen_range(0.5..1.5),
            amplitude: rng.gen_range(-1.0..1.0),
        })
        .collect();
    Field::from_fn(grid, |x| bumps.iter().map(|g| g.eval(x).0).sum()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn transform_roundtrip_and_parseval(seed in any::<u64>(), log_n in 4u32..11, length in 1.0f64..100.0) {
        let grid = Grid::new(length, 1 << log_n).unwrap();
        let f = random_field(grid, &mut ChaCha8Rng::seed_from_u64(seed));
        let spec = forward(&f).unwrap();
        let back = inverse(&spec).unwrap();
        let err = f.values().iter().zip(back.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        prop_assert!(err < 1e-13, "roundtrip error {err}");
        let lhs = f.l2_norm();
        let rhs = spec.l2_norm();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs, "{lhs} vs {rhs}");
        prop_assert!((f.mass() - spec.mass()).abs() <= 1e-12 * (1.0 + f.l2_norm() * length.sqrt()));
    }

    #[test]
    fn formula_is_linear_and_translation_invariant(
        center in 5.0f64..10.0,
        radius in 0.5f64..2.0,
        amp in 0.1f64..3.0,
        shift in -3.0f64..3.0,
        offset in -1.0f64..4.0,
    ) {
        let b = Bump { center, radius, amplitude: 1.0 };
        let x = center + offset;
        let base = apply_I_formula(&b, x).unwrap();
        let scaled = apply_I_formula(&Bump { amplitude: amp, ..b }, x).unwrap();
        prop_assert!((scaled - amp * base).abs() <= 1e-8 * (1.0 + scaled.abs()));
        let moved = apply_I_formula(&Bump { center: center + shift, ..b }, x + shift).unwrap();
        prop_assert!((moved - base).abs() <= 1e-8 * (1.0 + base.abs()));
    }
}

#[test]
fn omega0_matches_dense_scan() {
    let c = canonical_constants().unwrap();
    for &eps in &[0.1, 0.5, 1.0, 2.0] {
        let n = 400_000;
        let top = 4.0 * fowler::symbol::most_unstable_frequency(c.a, eps);
        let scan = (0..=n)
            .map(|k| -psi_closed(top * k as f64 / n as f64, &c, eps).re)
            .fold(f64::NEG_INFINITY, f64::max);
        let closed = omega0_closed(c.a, eps);
        assert!(
            (scan - closed).abs() <= 1e-8 * closed,
            "eps {eps}: scan {scan} vs {closed}"
        );
    }
}

#[test]
fn nonlocal_operator_is_bounded_between_sobolev_spaces() {
    let grid = Grid::new(30.0, 2048).unwrap();
    let table = SymbolTable::new(grid, 1.0).unwrap();
    // |multiplier| = 2a|ξ|^{4/3}; 4π²Γ(2/3) is the looser published constant.
    let bound = 2.0 * table.a();
    let loose = 4.0 * std::f64::consts::PI.powi(2) * fowler::special::gamma(2.0 / 3.0);
    assert!(bound < loose);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..10 {
        let f = random_smooth(grid, &mut rng);
        let image = apply_I_spectral(&f, &table).unwrap().field;
        for &s in &[0.0, 0.5, 1.0] {
            let lhs = sobolev_norm(&image, s).unwrap();
            let rhs = bound * sobolev_norm(&f, s + 4.0 / 3.0).unwrap();
            assert!(lhs <= rhs * (1.0 + 1e-12), "s = {s}: {lhs} > {rhs}");
        }
    }
}

#[test]
fn convolution_growth_bounded_by_omega0() {
    let grid = Grid::new(30.0, 1024).unwrap();
    let table = SymbolTable::new(grid, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for t in [0.01, 0.1, 1.0] {
        let k = build_kernel(t, &table).unwrap();
        let growth = (table.omega0() * t).exp();
        for _ in 0..20 {
            let f = random_field(grid, &mut rng);
            let g = convolve(&k, &f).unwrap();
            assert!(g.l2_norm() <= growth * f.l2_norm() * (1.0 + 1e-12));
        }
    }
}

#[test]
fn semigroup_is_strongly_continuous() {
    let grid = Grid::new(30.0, 4096).unwrap();
    let table = SymbolTable::new(grid, 1.0).unwrap();
    let f = Bump::dune(15.0).sample(grid).unwrap();
    let mut last = f64::INFINITY;
    for t in [1e-1, 1e-2, 1e-3, 1e-4, 1e-5] {
        let g = convolve(&build_kernel(t, &table).unwrap(), &f).unwrap();
        let d = g.sub(&f).unwrap().l2_norm();
        assert!(d < last, "t = {t}: {d} not below {last}");
        last = d;
    }
    assert!(last < 1e-3 * f.l2_norm());
}

#[test]
fn kernel_smooths_rough_data() {
    let grid = Grid::new(30.0, 2048).unwrap();
    let table = SymbolTable::new(grid, 1.0).unwrap();
    let f = random_field(grid, &mut ChaCha8Rng::seed_from_u64(3));
    let mut last = forward(&f).unwrap().tail_fraction();
    assert!(last > 0.1);
    for t in [1e-4, 1e-3, 1e-2] {
        let g = convolve(&build_kernel(t, &table).unwrap(), &f).unwrap();
        let tail = forward(&g).unwrap().tail_fraction();
        assert!(tail < last, "t = {t}: tail {tail} not below {last}");
        last = tail;
    }
    assert!(last < 1e-12);
}
