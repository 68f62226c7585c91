//! Genus-1 building blocks: q-Pochhammer symbols, the short theta function
//! `θ(a;p) = (a;p)_∞ (p/a;p)_∞`, Jacobi `θ₁(u;σ,τ)` and elliptic shifted
//! factorials in multiplicative and additive form.

use alloc::format;
use core::f64::consts::PI;

use num_complex::Complex64;
#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{bail, Result};

/// Truncation target for infinite products and theta series, relative to the
/// leading magnitude. Chosen below `f64::EPSILON` so truncation never dominates
/// rounding.
pub const DEFAULT_TOL: f64 = 1e-17;

/// Extra factors kept beyond the geometric tail bound.
const POCHHAMMER_GUARD: usize = 5;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Elliptic nome `p` with `|p| < 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Nome(Complex64);

impl Nome {
    pub fn new(p: Complex64) -> Result<Self> {
        if !(p.re.is_finite() && p.im.is_finite()) || p.norm() >= 1.0 {
            bail!(Domain, "nome must satisfy |p| < 1, got |p| = {}", p.norm());
        }
        Ok(Nome(p))
    }

    pub fn real(p: f64) -> Result<Self> {
        Self::new(Complex64::new(p, 0.0))
    }

    pub fn value(self) -> Complex64 {
        self.0
    }

    pub fn abs(self) -> f64 {
        self.0.norm()
    }
}

/// The pair of bases `(σ, τ)`, with `q = e^{2πiσ}` and `p = e^{2πiτ}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModularPair {
    sigma: Complex64,
    tau: Complex64,
    q: Complex64,
    p: Nome,
}

impl ModularPair {
    pub fn new(sigma: Complex64, tau: Complex64) -> Result<Self> {
        if !(tau.im > 0.0) || !tau.re.is_finite() || !tau.im.is_finite() {
            bail!(Domain, "Im(tau) must be positive, got tau = {tau}");
        }
        if !(sigma.re.is_finite() && sigma.im.is_finite()) {
            bail!(Domain, "sigma must be finite");
        }
        let q = (2.0 * PI * I * sigma).exp();
        let p = Nome::new((2.0 * PI * I * tau).exp())?;
        Ok(ModularPair { sigma, tau, q, p })
    }

    /// Recovers `(σ, τ)` from multiplicative bases via principal logarithms.
    pub fn from_nomes(q: Complex64, p: Complex64) -> Result<Self> {
        if q.norm() == 0.0 || !(q.re.is_finite() && q.im.is_finite()) {
            bail!(Domain, "q must be finite and nonzero");
        }
        let nome = Nome::new(p)?;
        if p.norm() == 0.0 {
            bail!(Domain, "p = 0 has no finite tau");
        }
        let sigma = q.ln() / (2.0 * PI * I);
        let tau = p.ln() / (2.0 * PI * I);
        Ok(ModularPair { sigma, tau, q, p: nome })
    }

    pub fn sigma(&self) -> Complex64 {
        self.sigma
    }

    pub fn tau(&self) -> Complex64 {
        self.tau
    }

    pub fn q(&self) -> Complex64 {
        self.q
    }

    pub fn p(&self) -> Nome {
        self.p
    }

    /// `q^x = e^{2πiσx}`.
    pub fn q_pow(&self, x: Complex64) -> Complex64 {
        (2.0 * PI * I * self.sigma * x).exp()
    }

    /// `p^x = e^{2πiτx}`.
    pub fn p_pow(&self, x: Complex64) -> Complex64 {
        (2.0 * PI * I * self.tau * x).exp()
    }
}

/// Number of factors of `(a;p)_∞` needed for the tail to perturb the product
/// by less than `tol` relatively.
///
/// The tail `∏_{n≥N}(1 − a pⁿ)` differs from 1 by about `|a||p|^N / (1 − |p|)`.
pub fn pochhammer_terms(a: Complex64, p: Nome, tol: f64) -> usize {
    let (aa, ap) = (a.norm(), p.abs());
    if aa == 0.0 || ap == 0.0 {
        return 1;
    }
    let n = ((tol * (1.0 - ap) / aa).ln() / ap.ln()).ceil();
    let n = if n.is_finite() && n > 0.0 { n as usize } else { 0 };
    n + POCHHAMMER_GUARD
}

/// `(a;p)_∞ = ∏_{n≥0} (1 − a pⁿ)`.
pub fn pochhammer_inf(a: Complex64, p: Nome, tol: f64) -> Result<Complex64> {
    if !(tol > 0.0) {
        bail!(Domain, "tolerance must be positive");
    }
    let n = pochhammer_terms(a, p, tol);
    let mut prod = Complex64::new(1.0, 0.0);
    let mut apn = a;
    for _ in 0..n {
        prod *= 1.0 - apn;
        apn *= p.value();
    }
    Ok(prod)
}

/// Short theta function `θ(a;p) = (a;p)_∞ (p a⁻¹;p)_∞`.
pub fn theta_short(a: Complex64, p: Nome) -> Result<Complex64> {
    theta_short_with_tol(a, p, DEFAULT_TOL)
}

pub fn theta_short_with_tol(a: Complex64, p: Nome, tol: f64) -> Result<Complex64> {
    if a.norm() == 0.0 {
        bail!(Domain, "theta(a;p) is undefined at a = 0");
    }
    Ok(pochhammer_inf(a, p, tol)? * pochhammer_inf(p.value() / a, p, tol)?)
}

/// A complex number stored as `mant · e^{log}`, for products whose factors
/// over- or underflow on their own.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scaled {
    pub mant: Complex64,
    pub log: f64,
}

impl Scaled {
    pub const ONE: Scaled = Scaled { mant: Complex64::new(1.0, 0.0), log: 0.0 };

    pub fn new(z: Complex64) -> Self {
        Scaled { mant: z, log: 0.0 }.normalized()
    }

    fn normalized(self) -> Self {
        let m = self.mant.norm();
        if m == 0.0 || !m.is_finite() {
            return self;
        }
        let l = m.ln();
        Scaled { mant: self.mant / m, log: self.log + l }
    }

    pub fn to_complex(self) -> Complex64 {
        self.mant * self.log.exp()
    }

    pub fn norm(self) -> f64 {
        self.mant.norm() * self.log.exp()
    }

    pub fn is_zero(self) -> bool {
        self.mant.norm() == 0.0
    }
}

impl core::ops::Mul for Scaled {
    type Output = Scaled;
    fn mul(self, o: Scaled) -> Scaled {
        Scaled { mant: self.mant * o.mant, log: self.log + o.log }.normalized()
    }
}

impl core::ops::Div for Scaled {
    type Output = Scaled;
    fn div(self, o: Scaled) -> Scaled {
        Scaled { mant: self.mant / o.mant, log: self.log - o.log }.normalized()
    }
}

impl core::ops::MulAssign for Scaled {
    fn mul_assign(&mut self, o: Scaled) {
        *self = *self * o;
    }
}

impl core::ops::DivAssign for Scaled {
    fn div_assign(&mut self, o: Scaled) {
        *self = *self / o;
    }
}

/// `θ(a;p)` as a [`Scaled`] value. The argument is first moved into the
/// annulus `|p|^{1/2} ≤ |a| ≤ |p|^{−1/2}` with
/// `θ(pᵐx) = (−1)ᵐ x^{−m} p^{−m(m−1)/2} θ(x)`.
pub fn theta_short_scaled(a: Complex64, p: Nome) -> Result<Scaled> {
    let (v, prefactor) = theta_short_parts(a, p)?;
    Ok(Scaled::new(v) * prefactor)
}

/// `θ(a;p) = v · prefactor`, where `v` is the theta value at the reduced
/// argument. `|v|` measures closeness to a zero independently of `|a|`.
pub fn theta_short_parts(a: Complex64, p: Nome) -> Result<(Complex64, Scaled)> {
    if a.norm() == 0.0 {
        bail!(Domain, "theta(a;p) is undefined at a = 0");
    }
    let pv = p.value();
    if pv.norm() == 0.0 {
        return Ok((1.0 - a, Scaled::ONE));
    }
    let m = (a.norm().ln() / pv.norm().ln()).round();
    if m == 0.0 {
        return Ok((theta_short(a, p)?, Scaled::ONE));
    }
    let x = a * pv.powf(-m);
    let l = -m * x.ln() - 0.5 * m * (m - 1.0) * pv.ln() + I * PI * m;
    Ok((theta_short(x, p)?, Scaled { mant: Complex64::from_polar(1.0, l.im), log: l.re }))
}

/// `θ(t_0, …, t_k; p) = ∏ θ(t_i; p)`.
pub fn theta_short_product(args: &[Complex64], p: Nome) -> Result<Complex64> {
    args.iter().try_fold(Complex64::new(1.0, 0.0), |acc, &a| Ok(acc * theta_short(a, p)?))
}

/// Evaluation route for `θ₁`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Theta1Route {
    /// `−i Σ_k (−1)^k p^{(2k+1)²/8} q^{(k+1/2)u}`
    Series,
    /// `i p^{1/8} q^{−u/2} (p;p)_∞ θ(q^u; p)`
    Product,
}

/// Jacobi `θ₁(u; σ, τ)`, the elliptic number `[u]`.
pub fn theta1(u: Complex64, bases: &ModularPair, route: Theta1Route) -> Complex64 {
    match route {
        Theta1Route::Series => theta1_series(u, bases, DEFAULT_TOL),
        Theta1Route::Product => theta1_product(u, bases, DEFAULT_TOL),
    }
}

/// Additive elliptic number `[u; σ, τ]` through the series route.
pub fn elliptic_number(u: Complex64, bases: &ModularPair) -> Complex64 {
    theta1_series(u, bases, DEFAULT_TOL)
}

/// `[x]/[y]` with both arguments moved by the lattice shift of `σy`, so the
/// large part of the quasi-periodicity factor reduces to `e^{−2πiBσ(x−y)}`.
/// The shifted numerator is then reduced once more by a small shift.
pub fn elliptic_ratio(x: Complex64, y: Complex64, bases: &ModularPair) -> Scaled {
    let (sigma, tau) = (bases.sigma, bases.tau);
    let delta = sigma * (x - y);
    let (wy, _, big_b) = reduce(sigma * y, tau);
    let (wx, l) = reduce_with_factor(wy + delta, tau);
    let l = l - 2.0 * PI * I * big_b * delta;
    let num = Scaled::new(theta1_series_reduced(wx, tau, DEFAULT_TOL));
    let den = Scaled::new(theta1_series_reduced(wy, tau, DEFAULT_TOL));
    num / den * Scaled { mant: Complex64::from_polar(1.0, l.im), log: l.re }
}

// w = w' + a + bτ with w' near the origin.
fn reduce(w: Complex64, tau: Complex64) -> (Complex64, f64, f64) {
    let b = (w.im / tau.im).round();
    let a = (w.re - b * tau.re).round();
    (w - a - b * tau, a, b)
}

// θ₁(w) = e^{l} θ₁(w'), with l = πiτb² − 2πibw + πi(a + b).
fn reduce_with_factor(w: Complex64, tau: Complex64) -> (Complex64, Complex64) {
    let (reduced, a, b) = reduce(w, tau);
    (reduced, PI * I * tau * b * b - 2.0 * PI * I * b * w + I * PI * (a + b))
}

fn theta1_series(u: Complex64, bases: &ModularPair, tol: f64) -> Complex64 {
    // Reduce w = σu near the origin first so the series runs with small
    // exponents.
    let (reduced, l) = reduce_with_factor(bases.sigma * u, bases.tau);
    (Scaled::new(theta1_series_reduced(reduced, bases.tau, tol))
        * Scaled { mant: Complex64::from_polar(1.0, l.im), log: l.re })
    .to_complex()
}

fn theta1_series_reduced(su: Complex64, tau: Complex64, tol: f64) -> Complex64 {
    // |term(h)| = exp(−π Im τ h² − 2π Im(σu) h) for h = k + 1/2: a Gaussian
    // centred at −Im(σu)/Im τ, truncated where it falls below `tol`.
    let center = -su.im / tau.im;
    let radius = ((1.0 / tol).ln() / (PI * tau.im)).sqrt() + 1.0;
    let k_lo = (center - radius - 0.5).ceil() as i64;
    let k_hi = (center + radius - 0.5).floor() as i64;
    let mut sum = Complex64::new(0.0, 0.0);
    for k in k_lo..=k_hi {
        let h = k as f64 + 0.5;
        let term = (PI * I * tau * h * h + 2.0 * PI * I * su * h).exp();
        if k.rem_euclid(2) == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    -I * sum
}

fn theta1_product(u: Complex64, bases: &ModularPair, tol: f64) -> Complex64 {
    let p = bases.p;
    let x = bases.q_pow(u);
    let prefactor = I * (PI * I * bases.tau / 4.0).exp() * (-PI * I * bases.sigma * u).exp();
    let pp = pochhammer_inf(p.value(), p, tol).unwrap_or(Complex64::new(1.0, 0.0));
    let th = if x.norm() == 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        pochhammer_inf(x, p, tol).unwrap_or_default() * pochhammer_inf(p.value() / x, p, tol).unwrap_or_default()
    };
    prefactor * pp * th
}

/// Multiplicative elliptic shifted factorial
/// `θ(t_0, …, t_k; p; q)_n = ∏_m ∏_{j<n} θ(t_m q^j; p)`.
pub fn elliptic_factorial_mult(params: &[Complex64], n: usize, q: Complex64, p: Nome) -> Result<Complex64> {
    let mut prod = Complex64::new(1.0, 0.0);
    for &t in params {
        if t.norm() == 0.0 {
            bail!(Domain, "elliptic factorial parameter is zero");
        }
        let mut x = t;
        for _ in 0..n {
            prod *= theta_short(x, p)?;
            x *= q;
        }
    }
    Ok(prod)
}

/// Additive elliptic shifted factorial `[u_0, …, u_k]_n = ∏_m ∏_{j<n} [u_m + j; σ, τ]`.
pub fn elliptic_factorial_add(params: &[Complex64], n: usize, bases: &ModularPair) -> Complex64 {
    let mut prod = Complex64::new(1.0, 0.0);
    for &u in params {
        for j in 0..n {
            prod *= elliptic_number(u + j as f64, bases);
        }
    }
    prod
}

/// Action of `γ = (a b; c d) ∈ SL(2, ℤ)`: `τ → (aτ+b)/(cτ+d)`, `σ → σ/(cτ+d)`.
pub fn psl2_act(bases: &ModularPair, gamma: [[i64; 2]; 2]) -> Result<ModularPair> {
    let [[a, b], [c, d]] = gamma;
    if a * d - b * c != 1 {
        bail!(Domain, "modular matrix must have determinant 1, got {}", a * d - b * c);
    }
    let denom = c as f64 * bases.tau + d as f64;
    let tau = (a as f64 * bases.tau + b as f64) / denom;
    ModularPair::new(bases.sigma / denom, tau).map_err(|e| crate::Error::Domain(format!("{e}")))
}

/// `(−iτ)^{1/2}` on the branch with positive real part.
pub fn modular_sqrt(tau: Complex64) -> Complex64 {
    let r = (-I * tau).sqrt();
    if r.re < 0.0 {
        -r
    } else {
        r
    }
}
