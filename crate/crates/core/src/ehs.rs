//! Elliptic hypergeometric series `_{r+1}E_r` built from the term ratio
//! `h(n) = z ∏ θ(t_i qⁿ; p) / ∏ θ(w_i qⁿ; p)`, their classification, and the
//! Frenkel-Turaev and `_8E_7` summations.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{bail, Error, Result};
use crate::kernel::{
    elliptic_number, elliptic_ratio, psl2_act, theta_short, theta_short_parts, theta_short_scaled, ModularPair, Nome,
    Scaled,
};
use crate::residual::relative;

/// Relative tolerance for the balancing and well-poisedness flags.
pub const CLASSIFY_TOL: f64 = 1e-12;
/// `|t q^N − 1|` below this declares `t = q^{−N}`.
pub const TERMINATION_TOL: f64 = 1e-10;
/// Theta factors smaller than this in a denominator trigger a resample.
pub const ZERO_GUARD: f64 = 1e-8;
/// Denominator theta factors below this are reported as poles of `h`.
const POLE_EPS: f64 = 1e-14;
/// Draws whose largest term exceeds the sum by more than this are resampled.
pub const COND_LIMIT: f64 = 1e3;
/// Ratio bound for accepting a nonterminating series as convergent.
const CONVERGENT_RATIO: f64 = 0.9;

const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Parameters of `_{r+1}E_r(t_0, …, t_r; w_1, …, w_r; q, p; z)`, with `w[0] = q`
/// for unilateral series.
#[derive(Debug, Clone, PartialEq)]
pub struct EllipticSeriesSpec {
    pub t: Vec<Complex64>,
    pub w: Vec<Complex64>,
    pub z: Complex64,
    pub q: Complex64,
    pub p: Nome,
}

/// Structural flags of a series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Classification {
    pub balanced: bool,
    pub well_poised: bool,
    pub very_well_poised: bool,
    /// Well-poised, balanced, odd `r`, and on the `+` branch
    /// `t_1⋯t_{2m+1} = q^{m+1} t_0^m`.
    pub totally_elliptic_candidate: bool,
}

fn nonzero(params: &[Complex64], what: &str) -> Result<()> {
    if let Some(i) = params.iter().position(|x| x.norm() == 0.0 || !x.re.is_finite() || !x.im.is_finite()) {
        bail!(Domain, "{what}[{i}] must be finite and nonzero");
    }
    Ok(())
}

fn close(a: Complex64, b: Complex64) -> bool {
    relative(a, b) < CLASSIFY_TOL
}

fn product(xs: &[Complex64]) -> Complex64 {
    xs.iter().product()
}

impl EllipticSeriesSpec {
    pub fn new(t: Vec<Complex64>, w: Vec<Complex64>, z: Complex64, q: Complex64, p: Nome) -> Result<Self> {
        if t.is_empty() || t.len() != w.len() {
            bail!(Domain, "need equally many numerator and denominator parameters (got {} and {})", t.len(), w.len());
        }
        nonzero(&t, "t")?;
        nonzero(&w, "w")?;
        nonzero(&[q], "q")?;
        Ok(EllipticSeriesSpec { t, w, z, q, p })
    }

    pub fn r(&self) -> usize {
        self.t.len() - 1
    }

    /// `qⁿ = e^{n log q}` on the principal branch.
    pub fn q_pow(&self, n: Complex64) -> Complex64 {
        (n * self.q.ln()).exp()
    }

    /// Shifts of `n` realising `σ⁻¹` and `τσ⁻¹`: `qⁿ` is unchanged by the first
    /// and multiplied by `p` under the second.
    pub fn period_shifts(&self) -> Result<(Complex64, Complex64)> {
        if self.p.abs() == 0.0 {
            bail!(Domain, "p = 0 has no second period");
        }
        let lq = self.q.ln();
        Ok((2.0 * PI * I / lq, self.p.value().ln() / lq))
    }

    /// Term ratio `h(n)` at complex `n`.
    pub fn h_ratio(&self, n: Complex64) -> Result<Complex64> {
        self.h_at(self.q_pow(n), n)
    }

    fn h_at(&self, qn: Complex64, n: Complex64) -> Result<Complex64> {
        let mut num = self.z;
        let mut den = ONE;
        for (&t, &w) in self.t.iter().zip(&self.w) {
            let d = theta_short(w * qn, self.p)?;
            if d.norm() < POLE_EPS {
                return Err(Error::Pole(format!("{n}")));
            }
            den *= d;
            num *= theta_short(t * qn, self.p)?;
        }
        let h = num / den;
        if !h.is_finite() {
            bail!(Domain, "h({n}) is not representable in binary64");
        }
        Ok(h)
    }

    pub fn classify(&self) -> Classification {
        let r = self.r();
        let balanced = close(product(&self.t), product(&self.w));
        let qt0 = self.q * self.t[0];
        let well_poised = close(self.w[0], self.q) && (1..=r).all(|i| close(self.t[i] * self.w[i], qt0));
        let very_well_poised = well_poised && r >= 4 && self.has_vwp_tail();
        let totally_elliptic_candidate = well_poised && balanced && r % 2 == 1 && {
            let m = ((r - 1) / 2) as i32;
            close(product(&self.t[1..]), self.q.powi(m + 1) * self.t[0].powi(m))
        };
        Classification { balanced, well_poised, very_well_poised, totally_elliptic_candidate }
    }

    // The last four numerator parameters must be {±t_0^{1/2} q, ±t_0^{1/2} q p^{∓1/2}}
    // for one of the two square roots.
    fn has_vwp_tail(&self) -> bool {
        if self.p.abs() == 0.0 {
            return false;
        }
        let tail = &self.t[self.t.len() - 4..];
        let root = self.t[0].sqrt();
        [root, -root].iter().any(|&s| {
            let pattern = vwp_tail(s, self.q, self.p.value());
            let mut used = [false; 4];
            pattern.iter().all(|&want| match (0..4).find(|&i| !used[i] && close(tail[i], want)) {
                Some(i) => {
                    used[i] = true;
                    true
                }
                None => false,
            })
        })
    }
}

fn vwp_tail(root: Complex64, q: Complex64, p: Complex64) -> [Complex64; 4] {
    let sp = p.sqrt();
    [root * q, -root * q, root * q / sp, -root * q * sp]
}

/// Very-well-poised series in the reduced form
/// `Σ θ(t_0 q^{2n};p)/θ(t_0;p) ∏_{m=0}^{r−4} θ(t_m;p;q)_n / θ(q t_0/t_m;p;q)_n (−qz)ⁿ`.
///
/// `free` holds `t_1, …, t_{r−4}`; the four parameters fixed by very-well-poisedness
/// are implicit.
#[derive(Debug, Clone, PartialEq)]
pub struct VwpSpec {
    pub t0: Complex64,
    pub free: Vec<Complex64>,
    pub z: Complex64,
    pub q: Complex64,
    pub p: Nome,
}

/// Builds a very-well-poised spec from `t_0` and the free parameters.
pub fn make_vwp(t0: Complex64, free: Vec<Complex64>, z: Complex64, q: Complex64, p: Nome) -> Result<VwpSpec> {
    VwpSpec::new(t0, free, z, q, p)
}

impl VwpSpec {
    pub fn new(t0: Complex64, free: Vec<Complex64>, z: Complex64, q: Complex64, p: Nome) -> Result<Self> {
        nonzero(&[t0, q], "t0/q")?;
        nonzero(&free, "free")?;
        Ok(VwpSpec { t0, free, z, q, p })
    }

    /// Balanced spec whose last free parameter is solved from
    /// `∏_{j=1}^{2m−3} t_j = q^{m−3} t_0^{m−2}`; `head` holds the other `2m−4`.
    pub fn balanced(t0: Complex64, head: Vec<Complex64>, z: Complex64, q: Complex64, p: Nome) -> Result<Self> {
        if !head.len().is_multiple_of(2) {
            bail!(Domain, "balanced odd-r spec needs an even number of independent free parameters");
        }
        nonzero(&head, "free")?;
        let mut free = head;
        let companion = balancing_companion(t0, &free, q);
        free.push(companion);
        Self::new(t0, free, z, q, p)
    }

    pub fn r(&self) -> usize {
        self.free.len() + 4
    }

    /// `(t_0, t_1, …, t_{r−4})`, the parameters paired with `q t_0 / t_m`.
    fn paired(&self) -> Vec<Complex64> {
        let mut v = Vec::with_capacity(self.free.len() + 1);
        v.push(self.t0);
        v.extend_from_slice(&self.free);
        v
    }

    /// Balancing in the odd-`r` sense, `r = 2m + 1`.
    pub fn is_balanced(&self) -> bool {
        let r = self.r();
        if r.is_multiple_of(2) {
            return false;
        }
        close(product(&self.free), balancing_target(self.t0, self.q, ((r - 1) / 2) as i32))
    }

    /// Full well-poised spec with the implicit parameters made explicit.
    pub fn to_series_spec(&self) -> Result<EllipticSeriesSpec> {
        if self.p.abs() == 0.0 {
            bail!(Domain, "the very-well-poised parameters need p ≠ 0");
        }
        let mut t = self.paired();
        t.extend_from_slice(&vwp_tail(self.t0.sqrt(), self.q, self.p.value()));
        let qt0 = self.q * self.t0;
        let mut w = vec![self.q];
        w.extend(t[1..].iter().map(|&x| qt0 / x));
        EllipticSeriesSpec::new(t, w, self.z, self.q, self.p)
    }

    pub fn classify(&self) -> Result<Classification> {
        Ok(self.to_series_spec()?.classify())
    }

    /// Term ratio of the reduced form at complex `n`.
    pub fn h_ratio(&self, n: Complex64) -> Result<Complex64> {
        let lq = self.q.ln();
        let qn = (n * lq).exp();
        let p = self.p;
        let lead = theta_short(self.t0 * qn * qn * self.q * self.q, p)?;
        let lead_den = theta_short(self.t0 * qn * qn, p)?;
        if lead_den.norm() < POLE_EPS {
            return Err(Error::Pole(format!("{n}")));
        }
        let mut h = lead / lead_den * (-self.q * self.z);
        let qt0 = self.q * self.t0;
        for t in self.paired() {
            let d = theta_short(qt0 * qn / t, p)?;
            if d.norm() < POLE_EPS {
                return Err(Error::Pole(format!("{n}")));
            }
            h *= theta_short(t * qn, p)? / d;
        }
        Ok(h)
    }
}

fn balancing_target(t0: Complex64, q: Complex64, m: i32) -> Complex64 {
    q.powi(m - 3) * t0.powi(m - 2)
}

fn balancing_companion(t0: Complex64, head: &[Complex64], q: Complex64) -> Complex64 {
    // free.len() = 2m − 3 once the companion is appended
    let m = ((head.len() + 1 + 3) / 2) as i32;
    balancing_target(t0, q, m) / product(head)
}

/// Where a series terminates: `t[index] = q^{−length}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TerminationInfo {
    pub terminating: bool,
    pub index: usize,
    pub length: usize,
}

/// Finds the smallest `N ≤ max_len` with `t_m q^N = 1` for some parameter.
pub fn detect_termination(params: &[Complex64], q: Complex64, max_len: usize) -> TerminationInfo {
    let mut best: Option<(usize, usize)> = None;
    for (m, &t) in params.iter().enumerate() {
        let mut x = t;
        for n in 0..=max_len {
            if best.is_some_and(|(_, b)| n >= b) {
                break;
            }
            if (x - 1.0).norm() < TERMINATION_TOL {
                best = Some((m, n));
                break;
            }
            x *= q;
        }
    }
    match best {
        Some((index, length)) => TerminationInfo { terminating: true, index, length },
        None => TerminationInfo { terminating: false, index: 0, length: 0 },
    }
}

/// How many terms of a series to take.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesLimit {
    /// Exactly `c_0 + … + c_N`; use for terminating series.
    Terms(usize),
    /// Sum until the terms are negligible, failing if that does not happen
    /// within `max_terms` or the ratio test fails.
    Converge { max_terms: usize },
}

impl From<TerminationInfo> for SeriesLimit {
    fn from(info: TerminationInfo) -> Self {
        if info.terminating {
            SeriesLimit::Terms(info.length)
        } else {
            SeriesLimit::Converge { max_terms: 2000 }
        }
    }
}

/// A partial sum together with the largest term magnitude seen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue {
    pub sum: Complex64,
    pub max_term: f64,
}

fn accumulate(limit: SeriesLimit, mut term: impl FnMut(usize) -> Result<Complex64>) -> Result<SeriesValue> {
    let mut max_term = 0.0f64;
    let mut term = |k| {
        let c = term(k)?;
        max_term = max_term.max(c.norm());
        Ok::<_, Error>(c)
    };
    let sum = match limit {
        SeriesLimit::Terms(n) => (0..=n).try_fold(Complex64::new(0.0, 0.0), |s, k| Ok::<_, Error>(s + term(k)?))?,
        SeriesLimit::Converge { max_terms } => {
            let mut sum = Complex64::new(0.0, 0.0);
            let mut prev: Option<Complex64> = None;
            let mut small = 0;
            let mut window: Vec<f64> = Vec::new();
            for k in 0..max_terms {
                let c = term(k)?;
                sum += c;
                if let Some(pc) = prev {
                    if pc.norm() > 0.0 {
                        window.push(c.norm() / pc.norm());
                        if window.len() > 5 {
                            window.remove(0);
                        }
                    }
                }
                prev = Some(c);
                if c.norm() <= 1e-17 * sum.norm() {
                    small += 1;
                    if small >= 3 {
                        return Ok(SeriesValue { sum, max_term });
                    }
                } else {
                    small = 0;
                }
                if window.len() == 5 && window.iter().all(|&r| r >= 1.0) {
                    bail!(Divergence, "term ratio ≥ 1 over the last {} terms at n = {k}", window.len());
                }
            }
            if !(window.iter().all(|&r| r < CONVERGENT_RATIO) && prev.is_some_and(|c| c.norm() <= 1e-14 * sum.norm())) {
                bail!(Divergence, "no convergence within {max_terms} terms");
            }
            sum
        }
    };
    Ok(SeriesValue { sum, max_term })
}

/// `Σ c_n` with `c_0 = 1`, `c_{n+1} = c_n h(n)`.
pub fn series_eval(spec: &EllipticSeriesSpec, limit: SeriesLimit) -> Result<Complex64> {
    series_eval_with_scale(spec, limit).map(|v| v.sum)
}

pub fn series_eval_with_scale(spec: &EllipticSeriesSpec, limit: SeriesLimit) -> Result<SeriesValue> {
    let mut c = ONE;
    let mut qn = ONE;
    accumulate(limit, |k| {
        if k > 0 {
            c *= spec.h_at(qn, Complex64::new((k - 1) as f64, 0.0))?;
            qn *= spec.q;
        }
        Ok(c)
    })
}

/// Reduced very-well-poised form, with running shifted factorials.
pub fn vwp_series_eval(spec: &VwpSpec, limit: SeriesLimit) -> Result<Complex64> {
    vwp_series_eval_with_scale(spec, limit).map(|v| v.sum)
}

pub fn vwp_series_eval_with_scale(spec: &VwpSpec, limit: SeriesLimit) -> Result<SeriesValue> {
    let p = spec.p;
    let q = spec.q;
    let lead0 = theta_short_scaled(spec.t0, p)?;
    if lead0.norm() < POLE_EPS {
        bail!(Pole, "theta(t0; p) vanishes");
    }
    let paired = spec.paired();
    let qt0 = q * spec.t0;
    let arg = Scaled::new(-q * spec.z);
    let mut fact = Scaled::ONE;
    let mut qn = ONE;
    accumulate(limit, |k| {
        if k > 0 {
            for &t in &paired {
                let (v, prefactor) = theta_short_parts(qt0 * qn / t, p)?;
                if v.norm() < POLE_EPS {
                    bail!(Pole, "denominator factor vanishes at n = {}", k - 1);
                }
                fact *= theta_short_scaled(t * qn, p)? / (Scaled::new(v) * prefactor);
            }
            qn *= q;
            fact *= arg;
        }
        Ok((theta_short_scaled(spec.t0 * qn * qn, p)? / lead0 * fact).to_complex())
    })
}

fn guard_nonzero(values: impl IntoIterator<Item = Complex64>, what: &str) -> Result<()> {
    for v in values {
        if v.norm() < ZERO_GUARD {
            bail!(Resample, "{what} factor |{v}| below {ZERO_GUARD:e}");
        }
    }
    Ok(())
}

fn guard_conditioning(value: SeriesValue) -> Result<()> {
    if value.max_term > COND_LIMIT * value.sum.norm() {
        bail!(Resample, "sum {} cancels against terms of size {:e}", value.sum, value.max_term);
    }
    Ok(())
}

// Log-scaled, since the individual factors over- and underflow once |q|^n is small.
fn factorial_ratio(num: &[Complex64], den: &[Complex64], n: usize, q: Complex64, p: Nome) -> Result<Complex64> {
    let mut r = Scaled::ONE;
    let mut qj = ONE;
    for _ in 0..n {
        for (&a, &b) in num.iter().zip(den) {
            r *= theta_short_scaled(a * qj, p)? / theta_short_scaled(b * qj, p)?;
        }
        qj *= q;
    }
    Ok(r.to_complex())
}

// Smallness is judged on the reduced theta value, not on |θ| itself.
fn guard_factorials(params: &[Complex64], n: usize, q: Complex64, p: Nome, what: &str) -> Result<()> {
    for &t in params {
        let mut x = t;
        for _ in 0..n {
            guard_nonzero([theta_short_parts(x, p)?.0], what)?;
            x *= q;
        }
    }
    Ok(())
}

/// Both sides of the Frenkel-Turaev sum for the terminating balanced
/// very-well-poised `_{10}E_9`, with `t_4 = q^{−n}` and
/// `t_5 = q t_0² / (t_1 t_2 t_3 t_4)`.
pub fn frenkel_turaev_pair(
    t0: Complex64,
    t1: Complex64,
    t2: Complex64,
    t3: Complex64,
    n: usize,
    q: Complex64,
    p: Nome,
) -> Result<(Complex64, Complex64)> {
    nonzero(&[t0, t1, t2, t3, q], "parameter")?;
    let t4 = q.powi(-(n as i32));
    let t5 = q * t0 * t0 / (t1 * t2 * t3 * t4);
    let qt0 = q * t0;
    let ts = [t0, t1, t2, t3, t4, t5];
    let lhs_den: Vec<Complex64> = ts.iter().map(|&t| qt0 / t).collect();
    guard_nonzero([theta_short_parts(t0, p)?.0], "theta(t0)")?;
    guard_factorials(&lhs_den, n, q, p, "sum denominator")?;
    let rhs_den = [qt0 / (t1 * t2 * t3), qt0 / t1, qt0 / t2, qt0 / t3];
    guard_factorials(&rhs_den, n, q, p, "product denominator")?;

    let spec = VwpSpec::new(t0, ts[1..].to_vec(), -ONE, q, p)?;
    let lhs = vwp_series_eval_with_scale(&spec, SeriesLimit::Terms(n))?;
    guard_conditioning(lhs)?;
    let lhs = lhs.sum;
    let rhs_num = [qt0, qt0 / (t1 * t2), qt0 / (t1 * t3), qt0 / (t2 * t3)];
    let rhs = factorial_ratio(&rhs_num, &rhs_den, n, q, p)?;
    Ok((lhs, rhs))
}

/// Notation for the `_8E_7` sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SumForm {
    /// Short theta functions of `t_i`.
    Multiplicative,
    /// Elliptic numbers `[u_i]` with `t_i = q^{u_i}`.
    Additive,
}

/// Both sides of the indeterminate `_8E_7` summation (`t_3 = t_0/(t_1 t_2)`).
pub fn sum_8e7_pair(
    t0: Complex64,
    t1: Complex64,
    t2: Complex64,
    n: usize,
    bases: &ModularPair,
    form: SumForm,
) -> Result<(Complex64, Complex64)> {
    nonzero(&[t0, t1, t2], "parameter")?;
    let (q, p) = (bases.q(), bases.p());
    let t3 = t0 / (t1 * t2);
    let qt0 = q * t0;
    let den = [q, qt0 / t1, qt0 / t2, q * t1 * t2];
    guard_nonzero([theta_short_parts(t0, p)?.0], "theta(t0)")?;
    guard_factorials(&den, n, q, p, "denominator")?;
    match form {
        SumForm::Multiplicative => {
            let spec = VwpSpec::new(t0, vec![t1, t2, t3], -ONE, q, p)?;
            let lhs = vwp_series_eval_with_scale(&spec, SeriesLimit::Terms(n))?;
            guard_conditioning(lhs)?;
            let lhs = lhs.sum;
            let num = [qt0, q * t1, q * t2, qt0 / (t1 * t2)];
            let rhs = factorial_ratio(&num, &den, n, q, p)?;
            Ok((lhs, rhs))
        }
        SumForm::Additive => {
            let log_q = 2.0 * PI * I * bases.sigma();
            let [u0, u1, u2] = [t0, t1, t2].map(|t| t.ln() / log_q);
            let num = [u0, u1, u2, u0 - u1 - u2];
            let den = [ONE, 1.0 + u0 - u1, 1.0 + u0 - u2, 1.0 + u1 + u2];
            let e = |x: Complex64, y: Complex64| elliptic_ratio(x, y, bases);
            let mut lhs = Complex64::new(0.0, 0.0);
            let mut max_term = 0.0f64;
            let mut term = Scaled::ONE;
            for k in 0..=n {
                if k > 0 {
                    let j = (k - 1) as f64;
                    term *= e(u0 + 2.0 * k as f64, u0 + 2.0 * j);
                    for (&a, &b) in num.iter().zip(&den) {
                        term *= e(a + j, b + j);
                    }
                }
                let t = term.to_complex();
                max_term = max_term.max(t.norm());
                lhs += t;
            }
            guard_conditioning(SeriesValue { sum: lhs, max_term })?;
            let rhs_num = [1.0 + u0, 1.0 + u1, 1.0 + u2, 1.0 + u0 - u1 - u2];
            let mut rhs = Scaled::ONE;
            for j in 0..n {
                for (&a, &b) in rhs_num.iter().zip(&den) {
                    rhs *= e(a + j as f64, b + j as f64);
                }
            }
            Ok((lhs, rhs.to_complex()))
        }
    }
}

fn max_ratio_defect(
    samples: &[Complex64],
    base: impl Fn(Complex64) -> Result<Complex64>,
    moved: impl Fn(Complex64) -> Result<Complex64>,
) -> Result<f64> {
    samples.iter().try_fold(0.0f64, |m, &n| {
        let b = base(n)?;
        if b.norm() < ZERO_GUARD {
            bail!(Resample, "h({n}) is too small to compare");
        }
        Ok(m.max((moved(n)? / b - 1.0).norm()))
    })
}

fn require_balanced(spec: &VwpSpec) -> Result<()> {
    if spec.free.is_empty() || !spec.is_balanced() {
        bail!(Precondition, "spec is not balanced in the odd-r sense");
    }
    Ok(())
}

/// `max_n |h(n; p t_0)/h(n; t_0) − 1|` with the balancing companion (the last
/// free parameter) recomputed after the shift.
pub fn total_ellipticity_residual(spec: &VwpSpec, samples: &[Complex64]) -> Result<f64> {
    require_balanced(spec)?;
    let mut shifted = spec.clone();
    shifted.t0 = spec.p.value() * spec.t0;
    let last = shifted.free.len() - 1;
    shifted.free[last] = balancing_companion(shifted.t0, &shifted.free[..last], spec.q);
    max_ratio_defect(samples, |n| spec.h_ratio(n), |n| shifted.h_ratio(n))
}

/// Same as [`total_ellipticity_residual`] for the shift `t_j → p t_j` of a
/// non-companion free parameter (`j` indexes `free`).
pub fn companion_shift_residual(spec: &VwpSpec, j: usize, samples: &[Complex64]) -> Result<f64> {
    require_balanced(spec)?;
    let last = spec.free.len() - 1;
    if j >= last {
        bail!(Domain, "index {j} is the companion or out of range");
    }
    let mut shifted = spec.clone();
    shifted.free[j] *= spec.p.value();
    shifted.free[last] = balancing_companion(spec.t0, &shifted.free[..last], spec.q);
    max_ratio_defect(samples, |n| spec.h_ratio(n), |n| shifted.h_ratio(n))
}

/// Double periodicity of the reduced-form `h`: `n → n + σ⁻¹` and `n → n + τσ⁻¹`.
pub fn period_shift_residual(spec: &VwpSpec, samples: &[Complex64]) -> Result<f64> {
    let full = spec.to_series_spec()?;
    let (s1, s2) = full.period_shifts()?;
    let a = max_ratio_defect(samples, |n| spec.h_ratio(n), |n| spec.h_ratio(n + s1))?;
    let b = max_ratio_defect(samples, |n| spec.h_ratio(n), |n| spec.h_ratio(n + s2))?;
    Ok(a.max(b))
}

/// Additive term ratio `h(n) = z ∏[u_i + n] / ∏[v_i + n]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdditiveRatio {
    pub u: Vec<Complex64>,
    pub v: Vec<Complex64>,
    pub z: Complex64,
}

impl AdditiveRatio {
    /// Totally elliptic ratio: `v_0 = 1`, `u_i + v_i = u_0 + 1`, and `u_r`
    /// solved from `Σ u_i = Σ v_i`.
    pub fn totally_elliptic(u0: Complex64, head: &[Complex64], z: Complex64) -> Self {
        let r = head.len() + 1;
        let c = u0 + 1.0;
        let target = (1.0 + r as f64 * c - u0) / 2.0;
        let ur = target - head.iter().sum::<Complex64>();
        let mut u = vec![u0];
        u.extend_from_slice(head);
        u.push(ur);
        let mut v = vec![ONE];
        v.extend(u[1..].iter().map(|&x| c - x));
        AdditiveRatio { u, v, z }
    }

    pub fn h(&self, n: Complex64, bases: &ModularPair) -> Result<Complex64> {
        let mut h = self.z;
        for (&a, &b) in self.u.iter().zip(&self.v) {
            let d = elliptic_number(b + n, bases);
            if d.norm() < POLE_EPS {
                return Err(Error::Pole(format!("{n}")));
            }
            h *= elliptic_number(a + n, bases) / d;
        }
        Ok(h)
    }
}

/// `max_n |h(n; γ·(σ,τ)) / h(n; σ,τ) − 1|`.
pub fn modular_invariance_residual(
    ratio: &AdditiveRatio,
    samples: &[Complex64],
    bases: &ModularPair,
    gamma: [[i64; 2]; 2],
) -> Result<f64> {
    let moved = psl2_act(bases, gamma)?;
    max_ratio_defect(samples, |n| ratio.h(n, bases), |n| ratio.h(n, &moved))
}
