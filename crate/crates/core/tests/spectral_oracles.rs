use choquard::spectral::{RieszMode, RieszOperator};
use choquard::{Grid, Spectral, SpectralField};
use statrs::function::erf::erf;
use std::f64::consts::PI;

fn gaussian_density(g: &Grid, s: f64) -> Vec<f64> {
    let norm = (2.0 * PI * s * s).powf(-1.5);
    g.map_points(|x| norm * (-x.iter().map(|v| v * v).sum::<f64>() / (2.0 * s * s)).exp())
}

/// Max relative error against the closed-form Newtonian potential of a unit
/// Gaussian, over nodes with every coordinate inside half the box.
fn newtonian_error(n: usize, half_width: f64) -> f64 {
    let s = 1.0;
    let g = Grid::new(3, n, half_width, true).unwrap();
    let op = RieszOperator::new(g, 2.0, RieszMode::FreeSpace).unwrap();
    let phi = op.convolve(&gaussian_density(&g, s));
    let pts = g.map_points(|x| x.to_vec());
    pts.iter()
        .zip(&phi)
        .filter(|(x, _)| x.iter().all(|v| v.abs() <= half_width / 2.0))
        .map(|(x, &v)| {
            let r = x.iter().map(|c| c * c).sum::<f64>().sqrt();
            let exact = erf(r / (2f64.sqrt() * s)) / (4.0 * PI * r);
            (v - exact).abs() / exact
        })
        .fold(0.0, f64::max)
}

#[test]
fn newtonian_potential_of_gaussian() {
    let err = newtonian_error(128, 16.0);
    println!("n=128 L=16 max rel err {err:e}");
    assert!(err < 1e-3);
}

#[test]
fn brute_force_kernel_sum_agrees_on_coarse_grid() {
    let (n, l, s) = (16, 3.0, 0.8);
    let g = Grid::new(3, n, l, true).unwrap();
    let h = g.spacing();
    let rho = gaussian_density(&g, s);
    let op = RieszOperator::new(g, 2.0, RieszMode::FreeSpace).unwrap();
    let phi = op.convolve(&rho);
    let pts = g.map_points(|x| [x[0], x[1], x[2]]);
    // average of 1/|x| over the unit cube, 3 ln(2 + sqrt 3) - pi/2
    let self_cell = 3.0 * (2.0 + 3f64.sqrt()).ln() - PI / 2.0;
    let mut worst: f64 = 0.0;
    for (i, xi) in pts.iter().enumerate().step_by(37) {
        let mut acc = rho[i] * self_cell * h * h;
        for (j, xj) in pts.iter().enumerate() {
            if i != j {
                let d = ((xi[0] - xj[0]).powi(2) + (xi[1] - xj[1]).powi(2) + (xi[2] - xj[2]).powi(2))
                    .sqrt();
                acc += h.powi(3) * rho[j] / d;
            }
        }
        let brute = acc / (4.0 * PI);
        worst = worst.max((brute - phi[i]).abs() / brute);
    }
    assert!(worst < 1e-2, "brute-force mismatch {worst}");
}

#[test]
fn far_field_of_narrow_bump() {
    let g = Grid::new(3, 64, 8.0, true).unwrap();
    let s = 0.4;
    let rho = gaussian_density(&g, s);
    let mass: f64 = rho.iter().sum::<f64>() * g.cell_volume();
    let op = RieszOperator::new(g, 1.5, RieszMode::FreeSpace).unwrap();
    let phi = op.convolve(&rho);
    let a = choquard::params::riesz_constant(3, 1.5);
    let pts = g.map_points(|x| x.iter().map(|v| v * v).sum::<f64>().sqrt());
    let (i, r) = pts
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - 4.0).abs().total_cmp(&(b.1 - 4.0).abs()))
        .unwrap();
    let far = mass * a / r.powf(1.5);
    assert!((phi[i] - far).abs() / far < 0.05);
}

fn smooth_random_density(g: &Grid, seed: u64) -> Vec<f64> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let centers: Vec<[f64; 4]> = (0..4)
        .map(|_| {
            [
                rng.gen_range(-1.5..1.5),
                rng.gen_range(-1.5..1.5),
                rng.gen_range(-1.5..1.5),
                rng.gen_range(0.5..1.2),
            ]
        })
        .collect();
    g.map_points(|x| {
        centers
            .iter()
            .map(|c| {
                let r2 = (x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2) + (x[2] - c[2]).powi(2);
                (-r2 / (c[3] * c[3])).exp()
            })
            .sum()
    })
}

#[test]
fn riesz_operator_is_symmetric_and_positive() {
    let g = Grid::new(3, 32, 6.0, true).unwrap();
    for mode in [RieszMode::FreeSpace, RieszMode::Periodic] {
        let op = RieszOperator::new(g, 2.0, mode).unwrap();
        let f = smooth_random_density(&g, 1);
        let h = smooth_random_density(&g, 2);
        let (if_, ih) = op.convolve_pair(&f, &h);
        let lhs: f64 = if_.iter().zip(&h).map(|(a, b)| a * b).sum();
        let rhs: f64 = f.iter().zip(&ih).map(|(a, b)| a * b).sum();
        assert!((lhs - rhs).abs() < 1e-12 * lhs.abs());
        if mode == RieszMode::FreeSpace {
            let max = if_.iter().cloned().fold(0.0, f64::max);
            let min = if_.iter().cloned().fold(f64::INFINITY, f64::min);
            assert!(min >= -1e-6 * max);
        }
    }
}

#[test]
fn gaussian_quadratures() {
    let g = Grid::new(3, 128, 16.0, true).unwrap();
    let sp = Spectral::new(g);
    let u = SpectralField::gaussian(g, 1.0, 1.0);
    let m = PI.powf(1.5);
    assert!((u.mass() - m).abs() < 1e-8 * m);
    let k = 1.5 * m;
    assert!((sp.gradient_squared(&u) - k).abs() < 1e-6 * k);
}

mod props {
    use super::*;
    use num_complex::Complex64;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn parseval_and_unitary_kinetic_step(seed in 0u64..1000, tau in -2.0f64..2.0) {
            use rand::{Rng, SeedableRng};
            let g = Grid::new(3, 16, 4.0, true).unwrap();
            let sp = Spectral::new(g);
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let vals: Vec<Complex64> = (0..g.len())
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let u = SpectralField::from_values(g, vals).unwrap();
            let hat = sp.forward(&u);
            let side = (2.0 * g.half_width).powi(3);
            let fourier = hat.iter().map(|v| v.norm_sqr()).sum::<f64>()
                * g.cell_volume().powi(2) / side;
            prop_assert!((fourier - u.mass()).abs() < 1e-12 * u.mass());
            let v = sp.kinetic_multiplier_step(&u, tau);
            prop_assert!((v.mass() - u.mass()).abs() < 1e-13 * u.mass());
        }
    }
}
