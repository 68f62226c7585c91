//! Riemann theta functions with rational characteristics
//! `Θ_{α,β}(u;Ω) = Σ_{n∈ℤ^g} exp(πi (n+α)ᵀΩ(n+α) + 2πi (u+β)ᵀ(n+α))`,
//! their quasi-periodicity and the `Γ_{1,2}` transformation law.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
use num_rational::Ratio;
#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{bail, Result};
use crate::linalg::{vdot, CMatrix, IMatrix, RMatrix};

/// Largest allowed `|Ω − Ωᵀ|` entry.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Smallest acceptable gradient norm of an odd theta function at the origin.
pub const GRADIENT_TOL: f64 = 1e-8;
/// Theta values below this multiple of the dominant term trigger a resample.
pub const SMALL_THETA: f64 = 1e-8;
/// Default relative truncation tolerance.
pub const DEFAULT_TOL: f64 = 1e-16;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Symmetric `g × g` matrix with positive definite imaginary part.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodMatrix {
    omega: CMatrix,
    im_inv: RMatrix,
    lambda_min: f64,
    lambda_max: f64,
}

impl PeriodMatrix {
    pub fn new(omega: CMatrix) -> Result<Self> {
        if omega.dim() == 0 {
            bail!(Domain, "period matrix must be at least 1×1");
        }
        let defect = omega.symmetry_defect();
        if !(defect <= SYMMETRY_TOL) {
            bail!(Domain, "period matrix is not symmetric (defect {defect:e})");
        }
        let omega = omega.symmetrized();
        let y = omega.im();
        let ev = y.symmetric_eigenvalues();
        let (lambda_min, lambda_max) = (ev[0], ev[ev.len() - 1]);
        if !(lambda_min > 0.0) {
            bail!(Domain, "imaginary part is not positive definite (smallest eigenvalue {lambda_min:e})");
        }
        let im_inv = y.inverse()?;
        Ok(PeriodMatrix { omega, im_inv, lambda_min, lambda_max })
    }

    /// Genus one: `Ω = [τ]`.
    pub fn scalar(tau: Complex64) -> Result<Self> {
        Self::new(CMatrix::from_fn(1, |_, _| tau))
    }

    pub fn g(&self) -> usize {
        self.omega.dim()
    }

    pub fn omega(&self) -> &CMatrix {
        &self.omega
    }

    /// Extreme eigenvalues of `Im Ω`.
    pub fn im_eigen_range(&self) -> (f64, f64) {
        (self.lambda_min, self.lambda_max)
    }
}

/// Characteristic `(α, β)` with exact rational entries.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Characteristic {
    pub alpha: Vec<Ratio<i64>>,
    pub beta: Vec<Ratio<i64>>,
}

impl Characteristic {
    pub fn new(alpha: Vec<Ratio<i64>>, beta: Vec<Ratio<i64>>) -> Result<Self> {
        if alpha.len() != beta.len() || alpha.is_empty() {
            bail!(Domain, "characteristic halves must have equal positive length");
        }
        Ok(Characteristic { alpha, beta })
    }

    pub fn zero(g: usize) -> Self {
        Characteristic { alpha: vec![Ratio::from_integer(0); g], beta: vec![Ratio::from_integer(0); g] }
    }

    /// Half-characteristic from bit masks: bit `j` set means entry `j` is `1/2`.
    pub fn half(g: usize, alpha_bits: u32, beta_bits: u32) -> Self {
        let entry = |bits: u32, j: usize| Ratio::new(((bits >> j) & 1) as i64, 2);
        Characteristic {
            alpha: (0..g).map(|j| entry(alpha_bits, j)).collect(),
            beta: (0..g).map(|j| entry(beta_bits, j)).collect(),
        }
    }

    pub fn g(&self) -> usize {
        self.alpha.len()
    }

    pub fn alpha_f64(&self) -> Vec<f64> {
        self.alpha.iter().map(ratio_f64).collect()
    }

    pub fn beta_f64(&self) -> Vec<f64> {
        self.beta.iter().map(ratio_f64).collect()
    }

    pub fn is_half(&self) -> bool {
        let ok = |r: &Ratio<i64>| *r == Ratio::from_integer(0) || *r == Ratio::new(1, 2);
        self.alpha.iter().all(ok) && self.beta.iter().all(ok)
    }

    /// `4 Σ α_j β_j ≡ 1 (mod 2)`.
    pub fn is_odd(&self) -> bool {
        let s: Ratio<i64> = self.alpha.iter().zip(&self.beta).map(|(a, b)| a * b).sum::<Ratio<i64>>() * 4;
        s.is_integer() && s.to_integer().rem_euclid(2) == 1
    }
}

fn ratio_f64(r: &Ratio<i64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// All `4^g` half-characteristics, `α` bits varying slowest.
pub fn half_characteristics(g: usize) -> Vec<Characteristic> {
    let n = 1u32 << g;
    (0..n).flat_map(|a| (0..n).map(move |b| Characteristic::half(g, a, b))).collect()
}

/// Truncation ball for the lattice sum.
#[derive(Debug, Clone, PartialEq)]
pub struct Truncation {
    pub radius: f64,
    /// Centre of the Gaussian in `n + α` coordinates, `−(Im Ω)⁻¹ Im u`.
    pub center: Vec<f64>,
}

/// Radius `R` such that lattice points with `‖n + α − center‖ > R` contribute
/// less than `tol` relative to the dominant term.
///
/// Completing the square gives `|term| = e^{π cᵀYc} e^{−π (m−c)ᵀY(m−c)}` for
/// `m = n + α`, `Y = Im Ω`. The nearest lattice point lies within `√g/2` of the
/// centre, which bounds the dominant term from below, and the tail outside a
/// ball of radius `R` is bounded by the scalar Gaussian with `λ_min(Y)`.
pub fn truncation_radius(omega: &PeriodMatrix, u: &[Complex64], tol: f64) -> Truncation {
    let g = omega.g() as f64;
    let v: Vec<f64> = u.iter().map(|z| z.im).collect();
    let center = omega.im_inv.mul_vec(&v).iter().map(|x| -x).collect();
    let budget = (1.0 / tol).ln() + g * 4f64.ln() + PI * omega.lambda_max * g / 4.0;
    let radius = (budget / (PI * omega.lambda_min)).sqrt() + g.sqrt() / 2.0;
    Truncation { radius, center }
}

/// Value of a lattice sum plus the data needed to judge it.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaValue {
    pub value: Complex64,
    pub terms: usize,
    pub radius: f64,
    pub max_term: f64,
}

pub fn theta_g(u: &[Complex64], omega: &PeriodMatrix, ch: &Characteristic, tol: f64) -> Result<Complex64> {
    theta_g_with_info(u, omega, ch, tol).map(|t| t.value)
}

pub fn theta_g_with_info(u: &[Complex64], omega: &PeriodMatrix, ch: &Characteristic, tol: f64) -> Result<ThetaValue> {
    let trunc = truncation_radius(omega, u, tol);
    theta_in_ball(u, omega, ch, tol, trunc.radius, &trunc.center)
}

/// Same sum with an explicit radius, for checking the truncation bound.
pub fn theta_g_radius(u: &[Complex64], omega: &PeriodMatrix, ch: &Characteristic, radius: f64) -> Result<ThetaValue> {
    let trunc = truncation_radius(omega, u, 1.0);
    theta_in_ball(u, omega, ch, 1.0, radius, &trunc.center)
}

fn theta_in_ball(
    u: &[Complex64],
    omega: &PeriodMatrix,
    ch: &Characteristic,
    tol: f64,
    radius: f64,
    center: &[f64],
) -> Result<ThetaValue> {
    let g = omega.g();
    if u.len() != g || ch.g() != g {
        bail!(Domain, "dimension mismatch: genus {g}, argument {}, characteristic {}", u.len(), ch.g());
    }
    if !(tol > 0.0) || !(radius > 0.0) {
        bail!(Domain, "tolerance and radius must be positive");
    }
    let alpha = ch.alpha_f64();
    let beta = ch.beta_f64();
    let shift: Vec<Complex64> = u.iter().zip(&beta).map(|(x, b)| x + b).collect();
    let lo: Vec<i64> = (0..g).map(|j| (center[j] - alpha[j] - radius).ceil() as i64).collect();
    let hi: Vec<i64> = (0..g).map(|j| (center[j] - alpha[j] + radius).floor() as i64).collect();
    if lo.iter().zip(&hi).any(|(l, h)| l > h) {
        bail!(Domain, "empty truncation box");
    }
    let om = omega.omega();
    let mut n = lo.clone();
    let mut m = vec![0.0; g];
    let mut value = Complex64::new(0.0, 0.0);
    let mut terms = 0;
    let mut max_term = 0.0f64;
    let r2 = radius * radius;
    loop {
        let mut d2 = 0.0;
        for j in 0..g {
            m[j] = n[j] as f64 + alpha[j];
            d2 += (m[j] - center[j]).powi(2);
        }
        if d2 <= r2 {
            let mut expo = Complex64::new(0.0, 0.0);
            for j in 0..g {
                let mut row = Complex64::new(0.0, 0.0);
                for k in 0..g {
                    row += om[(j, k)] * m[k];
                }
                expo += m[j] * (PI * I * row + 2.0 * PI * I * shift[j]);
            }
            let term = expo.exp();
            max_term = max_term.max(term.norm());
            value += term;
            terms += 1;
        }
        // odometer over the box
        let mut j = 0;
        loop {
            if j == g {
                return Ok(ThetaValue { value, terms, radius, max_term });
            }
            if n[j] < hi[j] {
                n[j] += 1;
                break;
            }
            n[j] = lo[j];
            j += 1;
        }
    }
}

/// Odd, nonsingular characteristic on a fixed period matrix: the bracket
/// `[u] = Θ_{α,β}(u;Ω)` of the theta sums.
#[derive(Debug, Clone, PartialEq)]
pub struct OddBracket {
    pub omega: PeriodMatrix,
    pub ch: Characteristic,
    pub gradient_norm: f64,
    pub tol: f64,
}

impl OddBracket {
    pub fn new(omega: PeriodMatrix, ch: Characteristic) -> Result<Self> {
        if !ch.is_odd() {
            bail!(Config, "characteristic is not odd");
        }
        let gradient_norm = odd_gradient_norm(&omega, &ch)?;
        if !(gradient_norm > GRADIENT_TOL) {
            bail!(Config, "odd characteristic is singular (gradient norm {gradient_norm:e})");
        }
        Ok(OddBracket { omega, ch, gradient_norm, tol: DEFAULT_TOL })
    }

    pub fn g(&self) -> usize {
        self.omega.g()
    }

    pub fn eval(&self, u: &[Complex64]) -> Result<Complex64> {
        theta_g(u, &self.omega, &self.ch, self.tol)
    }

    pub fn eval_with_info(&self, u: &[Complex64]) -> Result<ThetaValue> {
        theta_g_with_info(u, &self.omega, &self.ch, self.tol)
    }
}

// Θ is odd, so the central difference at 0 reduces to Θ(h e_j)/h.
fn odd_gradient_norm(omega: &PeriodMatrix, ch: &Characteristic) -> Result<f64> {
    let g = omega.g();
    let h = 1e-5;
    let mut s = 0.0;
    for j in 0..g {
        let mut e = vec![Complex64::new(0.0, 0.0); g];
        e[j] = Complex64::new(h, 0.0);
        let plus = theta_g(&e, omega, ch, DEFAULT_TOL)?;
        e[j] = Complex64::new(-h, 0.0);
        let minus = theta_g(&e, omega, ch, DEFAULT_TOL)?;
        s += ((plus - minus) / (2.0 * h)).norm_sqr();
    }
    Ok(s.sqrt())
}

/// First odd half-characteristic whose theta function has a nonvanishing
/// gradient at the origin.
pub fn pick_odd_char(omega: &PeriodMatrix) -> Result<OddBracket> {
    let mut report = String::new();
    for ch in half_characteristics(omega.g()).into_iter().filter(Characteristic::is_odd) {
        let norm = odd_gradient_norm(omega, &ch)?;
        if norm > GRADIENT_TOL {
            return OddBracket::new(omega.clone(), ch);
        }
        report.push_str(&format!(" {:?}/{:?}: {norm:e};", ch.alpha, ch.beta));
    }
    bail!(Config, "no nonsingular odd half-characteristic; gradient norms:{report}")
}

/// Shift used in a quasi-periodicity check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuasiDirection {
    /// `u → u + e_j`.
    Lattice(usize),
    /// `u → u + Ω e_k`.
    Period(usize),
}

pub fn quasi_period_residual(
    u: &[Complex64],
    omega: &PeriodMatrix,
    ch: &Characteristic,
    direction: QuasiDirection,
) -> Result<f64> {
    let g = omega.g();
    let base = theta_g_with_info(u, omega, ch, DEFAULT_TOL)?;
    if base.value.norm() < SMALL_THETA * base.max_term {
        bail!(Resample, "theta is near a zero at the sample point");
    }
    let mut moved = u.to_vec();
    let factor = match direction {
        QuasiDirection::Lattice(j) if j < g => {
            moved[j] += 1.0;
            (2.0 * PI * I * ratio_f64(&ch.alpha[j])).exp()
        }
        QuasiDirection::Period(k) if k < g => {
            for (j, x) in moved.iter_mut().enumerate() {
                *x += omega.omega()[(j, k)];
            }
            let okk = omega.omega()[(k, k)];
            (-PI * I * okk - 2.0 * PI * I * (ratio_f64(&ch.beta[k]) + u[k])).exp()
        }
        _ => bail!(Domain, "direction index out of range for genus {g}"),
    };
    let shifted = theta_g(&moved, omega, ch, DEFAULT_TOL)?;
    Ok((shifted / (factor * base.value) - 1.0).norm())
}

/// Splits a `2g × 2g` matrix into its `g × g` blocks `(a, b, c, d)`.
pub fn blocks(gamma: &IMatrix) -> (IMatrix, IMatrix, IMatrix, IMatrix) {
    let g = gamma.dim() / 2;
    (gamma.block(0, 0, g), gamma.block(0, g, g), gamma.block(g, 0, g), gamma.block(g, g, g))
}

fn symplectic_form(g: usize) -> IMatrix {
    IMatrix::from_fn(2 * g, |i, j| {
        if j == i + g {
            1
        } else if i == j + g {
            -1
        } else {
            0
        }
    })
}

/// `γ` is integral symplectic with `diag(a bᵀ) ≡ diag(c dᵀ) ≡ 0 (mod 2)`.
pub fn gamma12_validate(gamma: &IMatrix) -> bool {
    let n = gamma.dim();
    if n == 0 || !n.is_multiple_of(2) {
        return false;
    }
    let j = symplectic_form(n / 2);
    if gamma.transpose().matmul(&j).matmul(gamma) != j {
        return false;
    }
    let (a, b, c, d) = blocks(gamma);
    let even = |m: IMatrix| m.diag().iter().all(|x| x.rem_euclid(2) == 0);
    even(a.matmul(&b.transpose())) && even(c.matmul(&d.transpose()))
}

/// Generators of `Γ_{1,2}` and their inverses: translations by symmetric
/// integer matrices with even diagonal, elementary `diag(A, A^{−T})`, and `±J`.
pub fn gamma12_generators(g: usize) -> Vec<IMatrix> {
    let zero = IMatrix::zeros(g);
    let id = IMatrix::identity(g);
    let mut out = Vec::new();
    for i in 0..g {
        for j in i..g {
            for s in [1i64, -1] {
                let b = IMatrix::from_fn(g, |r, c| {
                    if i == j {
                        if r == i && c == i {
                            2 * s
                        } else {
                            0
                        }
                    } else if (r, c) == (i, j) || (r, c) == (j, i) {
                        s
                    } else {
                        0
                    }
                });
                out.push(IMatrix::from_blocks(&id, &b, &zero, &id));
            }
        }
    }
    for i in 0..g {
        for j in 0..g {
            if i == j {
                continue;
            }
            for s in [1i64, -1] {
                let a = IMatrix::from_fn(g, |r, c| {
                    if r == c {
                        1
                    } else if (r, c) == (i, j) {
                        s
                    } else {
                        0
                    }
                });
                let a_inv_t = IMatrix::from_fn(g, |r, c| {
                    if r == c {
                        1
                    } else if (r, c) == (j, i) {
                        -s
                    } else {
                        0
                    }
                });
                out.push(IMatrix::from_blocks(&a, &zero, &zero, &a_inv_t));
            }
        }
    }
    let neg = id.map(|x| -x);
    out.push(IMatrix::from_blocks(&zero, &neg, &id, &zero));
    out.push(IMatrix::from_blocks(&zero, &id, &neg, &zero));
    out
}

/// Image of `(Ω, u, (α, β))` under `γ`:
/// `Ω' = (aΩ+b)(cΩ+d)⁻¹`, `u' = (cΩ+d)^{−T} u`,
/// `α' = dα − cβ + ½ diag(c dᵀ)`, `β' = −bα + aβ + ½ diag(a bᵀ)`.
pub fn sp_act(
    gamma: &IMatrix,
    omega: &PeriodMatrix,
    u: &[Complex64],
    ch: &Characteristic,
) -> Result<(PeriodMatrix, Vec<Complex64>, Characteristic)> {
    let g = omega.g();
    if gamma.dim() != 2 * g || u.len() != g || ch.g() != g {
        bail!(Domain, "dimension mismatch for genus {g}");
    }
    if !gamma12_validate(gamma) {
        bail!(Precondition, "matrix is not in the theta group");
    }
    let (a, b, c, d) = blocks(gamma);
    let om = omega.omega();
    let m = c.to_complex().matmul(om).add(&d.to_complex());
    let m_inv = m.inverse()?;
    let num = a.to_complex().matmul(om).add(&b.to_complex());
    let omega2 = PeriodMatrix::new(num.matmul(&m_inv).symmetrized())?;
    let u2 = m_inv.transpose().mul_vec(u);
    let int_mul = |mat: &IMatrix, v: &[Ratio<i64>]| -> Vec<Ratio<i64>> {
        (0..g).map(|i| (0..g).map(|k| v[k] * mat[(i, k)]).sum()).collect()
    };
    let half_diag = |x: IMatrix, y: &IMatrix| -> Vec<Ratio<i64>> {
        x.matmul(&y.transpose()).diag().iter().map(|&v| Ratio::new(v, 2)).collect()
    };
    let (da, cb) = (int_mul(&d, &ch.alpha), int_mul(&c, &ch.beta));
    let (ba, ab) = (int_mul(&b, &ch.alpha), int_mul(&a, &ch.beta));
    let (hc, ha) = (half_diag(c.clone(), &d), half_diag(a.clone(), &b));
    let alpha = (0..g).map(|i| da[i] - cb[i] + hc[i]).collect();
    let beta = (0..g).map(|i| -ba[i] + ab[i] + ha[i]).collect();
    Ok((omega2, u2, Characteristic { alpha, beta }))
}

/// `ρ = Θ'(u';Ω') / (√det(cΩ+d) e^{πi uᵀ(cΩ+d)⁻¹c u} Θ(u;Ω))`, an eighth root
/// of unity.
pub fn sp_mod_ratio(gamma: &IMatrix, omega: &PeriodMatrix, u: &[Complex64], ch: &Characteristic) -> Result<Complex64> {
    let (omega2, u2, ch2) = sp_act(gamma, omega, u, ch)?;
    let (_, _, c, d) = blocks(gamma);
    let m = c.to_complex().matmul(omega.omega()).add(&d.to_complex());
    let m_inv = m.inverse()?;
    let cu = c.to_complex().mul_vec(u);
    let quad = vdot(u, &m_inv.mul_vec(&cu));
    let base = theta_g_with_info(u, omega, ch, DEFAULT_TOL)?;
    if base.value.norm() < SMALL_THETA * base.max_term {
        bail!(Resample, "theta is near a zero at the sample point");
    }
    let image = theta_g(&u2, &omega2, &ch2, DEFAULT_TOL)?;
    Ok(image / (m.det().sqrt() * (PI * I * quad).exp() * base.value))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{theta1, ModularPair, Theta1Route};
    use crate::residual::relative;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn omega2(a: Complex64, b: Complex64, d: Complex64) -> PeriodMatrix {
        PeriodMatrix::new(CMatrix::from_row_major(vec![a, b, b, d]).unwrap()).unwrap()
    }

    fn random_omega(rng: &mut ChaCha8Rng, g: usize) -> PeriodMatrix {
        loop {
            let x = CMatrix::from_fn(g, |_, _| c(rng.gen_range(-0.5..0.5), rng.gen_range(-0.3..0.3)));
            let sym = CMatrix::from_fn(g, |i, j| {
                let base = 0.5 * (x[(i, j)] + x[(j, i)]);
                if i == j {
                    base + c(0.0, rng.gen_range(0.8..1.4))
                } else {
                    base
                }
            });
            if let Ok(p) = PeriodMatrix::new(sym) {
                if p.im_eigen_range().0 > 0.4 {
                    return p;
                }
            }
        }
    }

    fn random_u(rng: &mut ChaCha8Rng, g: usize) -> Vec<Complex64> {
        (0..g).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-0.5..0.5))).collect()
    }

    #[test]
    fn rejects_invalid_period_matrices() {
        assert!(PeriodMatrix::scalar(c(0.3, -0.1)).is_err());
        let asym = CMatrix::from_row_major(vec![c(0.0, 1.0), c(0.1, 0.0), c(0.2, 0.0), c(0.0, 1.0)]).unwrap();
        assert!(PeriodMatrix::new(asym).is_err());
        let indefinite = CMatrix::from_row_major(vec![c(0.0, 1.0), c(0.0, 2.0), c(0.0, 2.0), c(0.0, 1.0)]).unwrap();
        assert!(PeriodMatrix::new(indefinite).is_err());
    }

    #[test]
    fn genus_one_matches_direct_sum() {
        let tau = c(0.2, 0.9);
        let om = PeriodMatrix::scalar(tau).unwrap();
        let v = theta_g(&[c(0.0, 0.0)], &om, &Characteristic::zero(1), 1e-16).unwrap();
        let mut direct = c(0.0, 0.0);
        for n in -50i32..=50 {
            direct += (PI * I * tau * (n * n) as f64).exp();
        }
        assert!(relative(v, direct) < 1e-15);
    }

    #[test]
    fn genus_one_odd_theta_is_minus_theta1() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let sigma = c(rng.gen_range(-1.0..1.0), rng.gen_range(-0.1..0.1));
            let tau = c(rng.gen_range(-0.5..0.5), rng.gen_range(0.5..1.5));
            let bases = ModularPair::new(sigma, tau).unwrap();
            let u = c(rng.gen_range(-1.0..1.0), rng.gen_range(-0.5..0.5));
            let om = PeriodMatrix::scalar(tau).unwrap();
            let v = theta_g(&[sigma * u], &om, &Characteristic::half(1, 1, 1), 1e-16).unwrap();
            for route in [Theta1Route::Series, Theta1Route::Product] {
                assert!(relative(v, -theta1(u, &bases, route)) < 1e-12);
            }
        }
    }

    #[test]
    fn diagonal_period_matrix_factorises() {
        let (t1, t2) = (c(0.1, 1.1), c(-0.3, 0.8));
        let om = omega2(t1, c(0.0, 0.0), t2);
        let u = [c(0.3, 0.1), c(-0.2, 0.05)];
        for (a, b) in [(0u32, 0u32), (1, 2), (3, 3), (2, 1)] {
            let ch = Characteristic::half(2, a, b);
            let v = theta_g(&u, &om, &ch, 1e-16).unwrap();
            let f1 =
                theta_g(&u[..1], &PeriodMatrix::scalar(t1).unwrap(), &Characteristic::half(1, a & 1, b & 1), 1e-16)
                    .unwrap();
            let f2 =
                theta_g(&u[1..], &PeriodMatrix::scalar(t2).unwrap(), &Characteristic::half(1, a >> 1, b >> 1), 1e-16)
                    .unwrap();
            assert!(relative(v, f1 * f2) < 1e-13);
        }
    }

    #[test]
    fn truncation_radius_behaviour() {
        let om = PeriodMatrix::scalar(c(0.0, 1.0)).unwrap();
        let t = truncation_radius(&om, &[c(0.0, 0.0)], 1e-12);
        let scalar = (12.0 * 10f64.ln() / PI).sqrt();
        assert!(t.radius > scalar && t.radius < scalar + 1.0);
        let wider = PeriodMatrix::scalar(c(0.0, 2.0)).unwrap();
        assert!(truncation_radius(&wider, &[c(0.0, 0.0)], 1e-12).radius < t.radius);
        let shifted = truncation_radius(&om, &[c(0.0, 3.0)], 1e-12);
        assert_eq!(shifted.radius, t.radius);
        assert!((shifted.center[0] + 3.0).abs() < 1e-15);
    }

    #[test]
    fn doubling_the_radius_changes_nothing() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for g in [1, 2, 3] {
            let om = random_omega(&mut rng, g);
            let u = random_u(&mut rng, g);
            let ch = Characteristic::half(g, 1, (1 << g) - 1);
            let tol = 1e-14;
            let base = theta_g_with_info(&u, &om, &ch, tol).unwrap();
            let wide = theta_g_radius(&u, &om, &ch, 2.0 * base.radius).unwrap();
            assert!((wide.value - base.value).norm() < tol * base.max_term, "g={g}");
            assert!(wide.terms > base.terms);
        }
    }

    #[test]
    fn half_characteristic_counts() {
        assert_eq!(half_characteristics(2).len(), 16);
        let odd1: Vec<_> = half_characteristics(1).into_iter().filter(Characteristic::is_odd).collect();
        assert_eq!(odd1, vec![Characteristic::half(1, 1, 1)]);
        assert_eq!(half_characteristics(2).iter().filter(|c| c.is_odd()).count(), 6);
        assert_eq!(half_characteristics(3).iter().filter(|c| c.is_odd()).count(), 28);
    }

    #[test]
    fn picked_characteristic_is_odd_and_vanishes_at_origin() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let b1 = pick_odd_char(&PeriodMatrix::scalar(c(0.1, 1.0)).unwrap()).unwrap();
        assert_eq!(b1.ch, Characteristic::half(1, 1, 1));
        for g in [1, 2] {
            let b = pick_odd_char(&random_omega(&mut rng, g)).unwrap();
            assert!(b.ch.is_odd() && b.gradient_norm > GRADIENT_TOL);
            let zero = vec![c(0.0, 0.0); g];
            let info = b.eval_with_info(&zero).unwrap();
            assert!(info.value.norm() < 1e-14 * info.max_term);
        }
    }

    #[test]
    fn odd_theta_is_odd() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for g in [1, 2] {
            let om = random_omega(&mut rng, g);
            for ch in half_characteristics(g).into_iter().filter(Characteristic::is_odd) {
                let u = random_u(&mut rng, g);
                let minus: Vec<_> = u.iter().map(|x| -x).collect();
                let a = theta_g(&u, &om, &ch, 1e-16).unwrap();
                let b = theta_g(&minus, &om, &ch, 1e-16).unwrap();
                assert!(relative(b, -a) < 1e-11);
            }
        }
    }

    #[test]
    fn quasi_periodicity() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for g in [1, 2] {
            let mut done = 0;
            while done < 40 {
                let om = random_omega(&mut rng, g);
                let u = random_u(&mut rng, g);
                let ch = Characteristic::new(
                    (0..g).map(|_| Ratio::new(rng.gen_range(0..4), 4)).collect(),
                    (0..g).map(|_| Ratio::new(rng.gen_range(0..3), 3)).collect(),
                )
                .unwrap();
                let mut worst = 0.0f64;
                let mut skipped = false;
                for k in 0..g {
                    for dir in [QuasiDirection::Lattice(k), QuasiDirection::Period(k)] {
                        match quasi_period_residual(&u, &om, &ch, dir) {
                            Ok(r) => worst = worst.max(r),
                            Err(e) if e.is_resample() => skipped = true,
                            Err(e) => panic!("{e}"),
                        }
                    }
                }
                if skipped {
                    continue;
                }
                let tol = if g == 1 { 1e-11 } else { 1e-10 };
                assert!(worst < tol, "g={g}: {worst}");
                done += 1;
            }
        }
    }

    #[test]
    fn zero_characteristic_lattice_multiplier_is_one() {
        let om = PeriodMatrix::scalar(c(0.3, 1.2)).unwrap();
        let r =
            quasi_period_residual(&[c(0.2, 0.1)], &om, &Characteristic::zero(1), QuasiDirection::Lattice(0)).unwrap();
        assert!(r < 1e-14);
    }

    fn im(rows: &[i64]) -> IMatrix {
        IMatrix::from_row_major(rows.to_vec()).unwrap()
    }

    #[test]
    fn gamma12_membership() {
        assert!(gamma12_validate(&IMatrix::identity(2)));
        assert!(gamma12_validate(&IMatrix::identity(4)));
        assert!(gamma12_validate(&im(&[0, -1, 1, 0])));
        assert!(!gamma12_validate(&im(&[1, 1, 0, 1])));
        assert!(gamma12_validate(&im(&[1, 2, 0, 1])));
        assert!(!gamma12_validate(&im(&[2, 0, 0, 1])));
        for g in [1, 2, 3] {
            assert!(gamma12_generators(g).iter().all(gamma12_validate));
        }
    }

    #[test]
    fn sp_act_identity_and_inversion() {
        let om = PeriodMatrix::scalar(c(0.2, 0.8)).unwrap();
        let u = [c(0.3, 0.1)];
        let ch = Characteristic::half(1, 1, 1);
        let (o, v, k) = sp_act(&IMatrix::identity(2), &om, &u, &ch).unwrap();
        assert_eq!((o.omega()[(0, 0)], v[0], k.clone()), (om.omega()[(0, 0)], u[0], ch.clone()));
        let rho = sp_mod_ratio(&IMatrix::identity(2), &om, &u, &ch).unwrap();
        assert!((rho - 1.0).norm() < 1e-15);
        let tau = om.omega()[(0, 0)];
        let (o, v, k) = sp_act(&im(&[0, -1, 1, 0]), &om, &u, &ch).unwrap();
        assert!((o.omega()[(0, 0)] + 1.0 / tau).norm() < 1e-15);
        assert!((v[0] - u[0] / tau).norm() < 1e-15);
        assert!(k.is_odd());
    }

    #[test]
    fn s_transformation_is_eighth_root_at_genus_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let om = PeriodMatrix::scalar(c(0.0, 0.8)).unwrap();
        for ch in half_characteristics(1) {
            let u = random_u(&mut rng, 1);
            let rho = sp_mod_ratio(&im(&[0, -1, 1, 0]), &om, &u, &ch).unwrap();
            assert!((rho.norm() - 1.0).abs() < 1e-9 && (rho.powi(8) - 1.0).norm() < 1e-9);
        }
    }

    #[test]
    fn random_theta_group_elements_give_eighth_roots() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for g in [1, 2] {
            let gens = gamma12_generators(g);
            let mut done = 0;
            while done < 20 {
                let om = random_omega(&mut rng, g);
                let mut gamma = IMatrix::identity(2 * g);
                for _ in 0..rng.gen_range(1..5) {
                    gamma = gamma.matmul(&gens[rng.gen_range(0..gens.len())]);
                }
                assert!(gamma12_validate(&gamma));
                let ch = Characteristic::half(g, rng.gen_range(0..1 << g), rng.gen_range(0..1 << g));
                let u = random_u(&mut rng, g);
                let rho = match sp_mod_ratio(&gamma, &om, &u, &ch) {
                    Ok(r) => r,
                    Err(e) if e.is_resample() => continue,
                    Err(e) => panic!("{e}"),
                };
                assert!((rho.norm() - 1.0).abs() < 1e-9 && (rho.powi(8) - 1.0).norm() < 1e-9, "{rho}");
                done += 1;
            }
        }
    }

    #[test]
    fn block_diagonal_action_factorises() {
        let (t1, t2) = (c(0.1, 1.1), c(-0.3, 0.8));
        let om = omega2(t1, c(0.0, 0.0), t2);
        let s_block = im(&[1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1]);
        let gamma = im(&[0, 0, -1, 0, 0, 1, 0, 0, 1, 0, 0, 0, 0, 0, 0, 1]);
        assert!(gamma12_validate(&gamma) && gamma12_validate(&s_block));
        let u = [c(0.3, 0.1), c(-0.2, 0.05)];
        let ch = Characteristic::half(2, 3, 1);
        let (o, _, _) = sp_act(&gamma, &om, &u, &ch).unwrap();
        assert!((o.omega()[(0, 0)] + 1.0 / t1).norm() < 1e-14 && (o.omega()[(1, 1)] - t2).norm() < 1e-14);
        assert!(o.omega()[(0, 1)].norm() < 1e-14);
        let rho = sp_mod_ratio(&gamma, &om, &u, &ch).unwrap();
        let rho1 = sp_mod_ratio(
            &im(&[0, -1, 1, 0]),
            &PeriodMatrix::scalar(t1).unwrap(),
            &u[..1],
            &Characteristic::half(1, 1, 1),
        )
        .unwrap();
        let rho2 = sp_mod_ratio(
            &IMatrix::identity(2),
            &PeriodMatrix::scalar(t2).unwrap(),
            &u[1..],
            &Characteristic::half(1, 1, 0),
        )
        .unwrap();
        assert!(relative(rho, rho1 * rho2) < 1e-12);
    }
}
