//! Seeded samplers for the verification suites.
//!
//! Every trial gets its own generator derived from `(seed, identity, trial)`,
//! so results do not depend on scheduling or on the number of threads.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use theta_summa_core::jacobian::{gap_point, Sheet, SurfaceModel, SurfacePoint};
use theta_summa_core::linalg::{CMatrix, IMatrix};
use theta_summa_core::riemann::{gamma12_generators, Characteristic, PeriodMatrix};
use theta_summa_core::summation::SummandConfig;
use theta_summa_core::Complex64;

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

fn fnv(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

pub fn trial_seed(seed: u64, tag: &str, trial: usize) -> u64 {
    splitmix(splitmix(seed ^ fnv(tag)) ^ trial as u64)
}

pub fn trial_rng(seed: u64, tag: &str, trial: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(trial_seed(seed, tag, trial))
}

pub fn cx(rng: &mut impl Rng, re: (f64, f64), im: (f64, f64)) -> Complex64 {
    Complex64::new(rng.gen_range(re.0..re.1), rng.gen_range(im.0..im.1))
}

/// Modulus log-uniform in `[0.5, 2]`, uniform argument.
pub fn param(rng: &mut impl Rng) -> Complex64 {
    let l = rng.gen_range(0.5f64.ln()..2.0f64.ln());
    Complex64::from_polar(l.exp(), rng.gen_range(0.0..TAU))
}

pub fn params<const N: usize>(rng: &mut impl Rng) -> [Complex64; N] {
    std::array::from_fn(|_| param(rng))
}

/// Base `q` with `0.1 ≤ |q| < 0.9`.
pub fn base_q(rng: &mut impl Rng) -> Complex64 {
    Complex64::from_polar(rng.gen_range(0.1..0.9), rng.gen_range(0.0..TAU))
}

pub fn real_nome(rng: &mut impl Rng) -> f64 {
    rng.gen_range(0.01..0.3)
}

/// Complex nome with `0.01 ≤ |p| < 0.3`.
pub fn complex_nome(rng: &mut impl Rng) -> Complex64 {
    Complex64::from_polar(rng.gen_range(0.01..0.3), rng.gen_range(0.0..TAU))
}

/// Point of the annulus `0.1 ≤ |a| < 10`.
pub fn annulus(rng: &mut impl Rng) -> Complex64 {
    let l = rng.gen_range(0.1f64.ln()..10.0f64.ln());
    Complex64::from_polar(l.exp(), rng.gen_range(0.0..TAU))
}

/// `(σ, τ)` for the `θ₁` checks.
pub fn sigma_tau(rng: &mut impl Rng) -> (Complex64, Complex64) {
    (cx(rng, (0.3, 1.5), (-0.2, 0.2)), cx(rng, (-0.5, 0.5), (0.6, 1.6)))
}

pub fn torus_tau(rng: &mut impl Rng) -> Complex64 {
    cx(rng, (-0.5, 0.5), (0.8, 1.3))
}

pub fn u_vec(rng: &mut impl Rng, g: usize) -> Vec<Complex64> {
    (0..g).map(|_| cx(rng, (-1.0, 1.0), (-0.5, 0.5))).collect()
}

pub fn z_vec(rng: &mut impl Rng, g: usize) -> Vec<Complex64> {
    (0..g).map(|_| cx(rng, (-0.5, 0.5), (-0.2, 0.2))).collect()
}

/// Symmetric `Ω` with `Im Ω` bounded below by `0.4`.
pub fn period_matrix(rng: &mut impl Rng, g: usize) -> PeriodMatrix {
    loop {
        let x = CMatrix::from_fn(g, |_, _| cx(rng, (-0.5, 0.5), (-0.3, 0.3)));
        let diag: Vec<f64> = (0..g).map(|_| rng.gen_range(0.8..1.4)).collect();
        let sym = CMatrix::from_fn(g, |i, j| {
            let s = 0.5 * (x[(i, j)] + x[(j, i)]);
            if i == j {
                s + Complex64::new(0.0, diag[i])
            } else {
                s
            }
        });
        if let Ok(p) = PeriodMatrix::new(sym) {
            if p.im_eigen_range().0 > 0.4 {
                return p;
            }
        }
    }
}

pub fn half_char(rng: &mut impl Rng, g: usize) -> Characteristic {
    Characteristic::half(g, rng.gen_range(0..1 << g), rng.gen_range(0..1 << g))
}

/// Word of one to four generators of `Γ₁,₂`.
pub fn gamma12_word(rng: &mut impl Rng, g: usize) -> IMatrix {
    let gens = gamma12_generators(g);
    let mut m = IMatrix::identity(2 * g);
    for _ in 0..rng.gen_range(1..5) {
        m = m.matmul(&gens[rng.gen_range(0..gens.len())]);
    }
    m
}

/// Random point of the surface: a torus point, or a real point in one of the
/// two inner gaps of a hyperelliptic curve on a random sheet.
pub fn surface_point(rng: &mut impl Rng, model: &SurfaceModel) -> SurfacePoint {
    if model.genus() == 1 {
        SurfacePoint::Torus(cx(rng, (-1.0, 1.0), (-0.3, 0.3)))
    } else {
        let sheet = if rng.gen_bool(0.5) { Sheet::Plus } else { Sheet::Minus };
        gap_point(model, rng.gen_range(0..2), rng.gen_range(0.05..0.95), sheet)
            .expect("gap fractions stay inside the gaps")
    }
}

pub fn points(rng: &mut impl Rng, model: &SurfaceModel, n: usize) -> Vec<SurfacePoint> {
    (0..n).map(|_| surface_point(rng, model)).collect()
}

pub fn summand_config(rng: &mut impl Rng, model: &SurfaceModel, n: usize) -> SummandConfig {
    let g = model.genus();
    let (a, b, c, d) =
        (points(rng, model, n + 1), points(rng, model, n + 1), points(rng, model, n + 1), points(rng, model, n + 1));
    SummandConfig { z: (0..=n).map(|_| z_vec(rng, g)).collect(), a, b, c, d }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_separate_trials_and_tags() {
        let s = trial_seed(7, "ft", 0);
        assert_eq!(s, trial_seed(7, "ft", 0));
        assert_ne!(s, trial_seed(7, "ft", 1));
        assert_ne!(s, trial_seed(7, "e87", 0));
        assert_ne!(s, trial_seed(8, "ft", 0));
    }

    #[test]
    fn samplers_respect_ranges() {
        let mut rng = trial_rng(1, "t", 0);
        for _ in 0..200 {
            let t = param(&mut rng).norm();
            assert!((0.5..=2.0).contains(&t));
            assert!((0.1..0.9).contains(&base_q(&mut rng).norm()));
            assert!(period_matrix(&mut rng, 2).im_eigen_range().0 > 0.4);
        }
    }
}
