use blowuplab_core::certificates::*;
use blowuplab_core::functionals::*;
use blowuplab_core::grid::{make_grid, Grid, StencilOrder};
use blowuplab_core::{Mode, Params, State};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Sum of `modes` plane waves with wavenumbers up to `kmax`, optionally under a
/// Gaussian envelope of width `env`.
fn band_limited(
    grid: &Grid,
    rng: &mut ChaCha8Rng,
    modes: usize,
    kmax: f64,
    env: Option<f64>,
) -> Vec<f64> {
    let waves: Vec<([f64; 3], f64, f64)> = (0..modes)
        .map(|_| {
            let k = [
                rng.gen_range(-kmax..kmax),
                rng.gen_range(-kmax..kmax),
                rng.gen_range(-kmax..kmax),
            ];
            (
                k,
                rng.gen_range(-1.0..1.0),
                rng.gen_range(0.0..std::f64::consts::TAU),
            )
        })
        .collect();
    let shift: [f64; 3] = [
        rng.gen_range(-0.5..0.5),
        rng.gen_range(-0.5..0.5),
        rng.gen_range(-0.5..0.5),
    ];
    grid.sample(|x| {
        let mut v = 0.0;
        for (k, a, phi) in &waves {
            v += a * (k[0] * x[0] + k[1] * x[1] + k[2] * x[2] + phi).cos();
        }
        match env {
            Some(w) => {
                let r2: f64 = (0..3).map(|d| (x[d] - shift[d]) * (x[d] - shift[d])).sum();
                v * (-r2 / (2.0 * w * w)).exp()
            }
            None => v,
        }
    })
}

/// Nonnegative band-limited density, velocity and field on a periodic grid.
fn random_state(seed: u64, gamma: f64, n: usize) -> State {
    let grid = make_grid(3, 4.0, n).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = 2.0 * std::f64::consts::PI / 8.0;
    let periodic = |rng: &mut ChaCha8Rng, grid: &Grid| {
        let k: Vec<[i32; 3]> = (0..4)
            .map(|_| {
                [
                    rng.gen_range(-2..=2),
                    rng.gen_range(-2..=2),
                    rng.gen_range(-2..=2),
                ]
            })
            .collect();
        let c: Vec<(f64, f64)> = (0..4)
            .map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(0.0..6.3)))
            .collect();
        grid.sample(|x| {
            k.iter()
                .zip(&c)
                .map(|(k, (a, p))| {
                    a * (base * (k[0] as f64 * x[0] + k[1] as f64 * x[1] + k[2] as f64 * x[2]) + p)
                        .cos()
                })
                .sum::<f64>()
        })
    };
    let f = periodic(&mut rng, &grid);
    let rho: Vec<f64> = f.iter().map(|v| v * v).collect();
    let u = (0..3).map(|_| periodic(&mut rng, &grid)).collect();
    let h = (0..3).map(|_| periodic(&mut rng, &grid)).collect();
    let params = Params {
        a: rng.gen_range(0.5..2.0),
        gamma,
        mu: 1.0,
        lambda: -0.5,
        nu: 0.5,
    };
    State::new(grid, Mode::Mhd, params, 0.0, rho, u, h).unwrap()
}

fn tol() -> Tolerances {
    Tolerances::default()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn holder_and_jensen_hold_as_finite_sums(seed in any::<u64>(), gamma in 1.2f64..3.0) {
        let st = random_state(seed, gamma, 10);
        let b = energy_breakdown(&st).unwrap();
        let reports = check_momentum_gradient_bound(&b, &st.params, &tol());
        for r in reports.iter().filter(|r| r.tolerance_class == ToleranceClass::ExactToRoundoff) {
            prop_assert_eq!(r.outcome, Outcome::Checked);
            prop_assert!(r.pass, "{} lhs {} rhs {}", r.name, r.lhs, r.rhs);
        }
    }

    #[test]
    fn nonnegative_functionals(seed in any::<u64>(), gamma in 1.1f64..3.0) {
        let st = random_state(seed, gamma, 8);
        let b = energy_breakdown(&st).unwrap();
        for v in [b.m, b.e_k, b.e_m, b.e_i, b.g, b.grad_u_sq, b.curl_h_sq, b.u_l6, b.rho_l65, b.rho_lgamma, b.div_h_sq, b.dissipation, b.boundary_mass] {
            prop_assert!(v >= 0.0);
        }
        // Q - 4G(E_m + E_i) = 4 G E_k - F^2 >= 0 by Cauchy-Schwarz
        let gap = b.q - 4.0 * b.g * (b.e_m + b.e_i);
        prop_assert!(gap >= -1e-12 * b.q.abs().max(b.f * b.f));
        prop_assert!(b.e_i > 0.0 && b.q > 0.0);
    }

    #[test]
    fn velocity_scaling_laws(seed in any::<u64>(), c in -3.0f64..3.0) {
        let st = random_state(seed, 1.4, 8);
        let mut scaled = st.clone();
        scaled.u.iter_mut().flatten().for_each(|v| *v *= c);
        let (a, b) = (energy_breakdown(&st).unwrap(), energy_breakdown(&scaled).unwrap());
        let close = |x: f64, y: f64| (x - y).abs() <= 1e-12 * x.abs().max(y.abs()).max(1e-300);
        prop_assert!(close(b.e_k, c * c * a.e_k));
        // F is a signed sum, so it is judged against its Cauchy-Schwarz bound
        prop_assert!((b.f - c * a.f).abs() <= 1e-12 * c.abs() * 2.0 * (a.g * a.e_k).sqrt());
        prop_assert!(close(b.u_l6, c.powi(6) * a.u_l6));
        prop_assert!(close(b.grad_u_sq, c * c * a.grad_u_sq));
        prop_assert_eq!(b.e_i, a.e_i);
        prop_assert_eq!(b.g, a.g);
    }

    #[test]
    fn sobolev_holds_on_localized_band_limited_fields(seed in any::<u64>()) {
        let grid = make_grid(3, 6.0, 32).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let width = rng.gen_range(0.8..1.5);
        let u = [
            band_limited(&grid, &mut rng, 3, 1.2, Some(width)),
            band_limited(&grid, &mut rng, 3, 1.2, Some(width)),
            band_limited(&grid, &mut rng, 3, 1.2, Some(width)),
        ];
        let l6 = grid.integrate_with(|k| {
            let s = u[0][k] * u[0][k] + u[1][k] * u[1][k] + u[2][k] * u[2][k];
            s * s * s
        });
        let mut dirichlet = 0.0;
        for c in &u {
            let g = grid.gradient(c, StencilOrder::Fourth).unwrap();
            dirichlet += grid.integrate_with(|k| g.iter().map(|d| d[k] * d[k]).sum());
        }
        let lhs = l6.powf(1.0 / 3.0);
        let rhs = constant_k2(3).unwrap() * dirichlet;
        prop_assert!(lhs <= rhs * (1.0 + 1e-2), "lhs {lhs} rhs {rhs}");
    }

    #[test]
    fn interpolation_holds_on_nonnegative_fields(seed in any::<u64>(), gamma in 1.1f64..3.0) {
        let grid = make_grid(3, 6.0, 24).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let width = rng.gen_range(0.6..1.2);
        let f: Vec<f64> = band_limited(&grid, &mut rng, 4, 1.0, Some(width)).iter().map(|v| v * v).collect();
        let m = grid.integrate(&f).unwrap();
        let lg = grid.integrate_with(|k| f[k].powf(gamma));
        let mut x = [0.0; 3];
        let moment = grid.integrate_with(|k| {
            grid.position(k, &mut x);
            (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) * f[k]
        });
        let d = 5.0 * gamma - 3.0;
        let rhs = constant_cgn(gamma, 3).unwrap() * lg.powf(2.0 / d) * moment.powf(3.0 * (gamma - 1.0) / d);
        prop_assert!(m <= rhs * (1.0 + 1e-2), "m {m} rhs {rhs}");
    }

    #[test]
    fn derivative_sums_by_parts(seed in any::<u64>(), axis in 0usize..3) {
        let grid = make_grid(3, 2.0, 10).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f: Vec<f64> = (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let g: Vec<f64> = (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        for order in [StencilOrder::Second, StencilOrder::Fourth] {
            let (df, dg) = (grid.derivative(&f, axis, order).unwrap(), grid.derivative(&g, axis, order).unwrap());
            let a: f64 = f.iter().zip(&dg).map(|(x, y)| x * y).sum();
            let b: f64 = g.iter().zip(&df).map(|(x, y)| x * y).sum();
            prop_assert!((a + b).abs() < 1e-12 * grid.len() as f64);
            prop_assert!(df.iter().sum::<f64>().abs() < 1e-12 * grid.len() as f64);
        }
    }

    #[test]
    fn derivative_commutes_with_grid_shifts(seed in any::<u64>(), axis in 0usize..3, shift in 1usize..10) {
        let grid = make_grid(3, 2.0, 10).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f: Vec<f64> = (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let s = grid.stride(axis);
        let n = grid.points();
        let roll = |v: &[f64]| -> Vec<f64> {
            (0..v.len())
                .map(|k| {
                    let i = grid.axis_index(k, axis);
                    v[k - i * s + ((i + shift) % n) * s]
                })
                .collect()
        };
        let d_then_roll = roll(&grid.derivative(&f, axis, StencilOrder::Fourth).unwrap());
        let roll_then_d = grid.derivative(&roll(&f), axis, StencilOrder::Fourth).unwrap();
        prop_assert_eq!(d_then_roll, roll_then_d);
    }

    #[test]
    fn integration_is_linear(seed in any::<u64>(), a in -5.0f64..5.0, b in -5.0f64..5.0) {
        let grid = make_grid(3, 1.5, 8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f: Vec<f64> = (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let g: Vec<f64> = (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let combo: Vec<f64> = f.iter().zip(&g).map(|(x, y)| a * x + b * y).collect();
        let lhs = grid.integrate(&combo).unwrap();
        let rhs = a * grid.integrate(&f).unwrap() + b * grid.integrate(&g).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-12 * (a.abs() + b.abs() + 1.0) * grid.len() as f64 * grid.weight());
    }

    #[test]
    fn curl_is_self_adjoint_and_solenoidal(seed in any::<u64>()) {
        let grid = make_grid(3, 2.0, 8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut field = || -> Vec<Vec<f64>> {
            (0..3).map(|_| (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect()
        };
        let (a, b) = (field(), field());
        let (ca, cb) = (grid.curl(&a, StencilOrder::Fourth).unwrap(), grid.curl(&b, StencilOrder::Fourth).unwrap());
        let dot = |x: &[Vec<f64>], y: &[Vec<f64>]| -> f64 {
            x.iter().zip(y).map(|(p, q)| p.iter().zip(q).map(|(s, t)| s * t).sum::<f64>()).sum()
        };
        prop_assert!((dot(&a, &cb) - dot(&ca, &b)).abs() < 1e-11 * grid.len() as f64);
        let div = grid.divergence(&ca, StencilOrder::Fourth).unwrap();
        prop_assert!(div.iter().all(|d| d.abs() < 1e-11));
    }
}

#[test]
fn talenti_probe_approaches_the_constant_from_below() {
    let levels: Vec<_> = [48, 96, 144]
        .iter()
        .map(|&n| talenti_probe(6.0, n, 2.0, StencilOrder::Fourth).unwrap())
        .collect();
    for w in levels.windows(2) {
        assert!(w[1].ratio() > w[0].ratio());
    }
    let last = levels.last().unwrap();
    assert!(
        last.ratio() >= 0.95 && last.ratio() <= 1.0,
        "{}",
        last.ratio()
    );
    let limit = extrapolated_ratio(&levels[0], &levels[1], 2.0);
    assert!((0.95..=1.0 + 1e-2).contains(&limit), "{limit}");
}
