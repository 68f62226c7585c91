//! Multiparameter theta sums on a Riemann surface, their degenerate forms and
//! two hypergeometric-type specialisations.
//!
//! Notation: `[x_1, …, x_m] = [x_1]⋯[x_m]` with `[x]` the odd theta function of
//! the surface, and for each `k`
//!
//! ```text
//! g_k    = [z_k, z_k + v(a_k,c_k) + v(b_k,d_k), v(c_k,d_k), v(a_k,b_k)]
//! h_k    = [z_k + v(a_k,c_k), z_k + v(b_k,d_k), v(c_k,b_k), v(a_k,d_k)]
//! lead_k = [z_k + v(b_k,c_k), z_k + v(a_k,d_k), v(a_k,c_k), v(b_k,d_k)]
//! ```
//!
//! so that `lead_k = g_k − h_k` and
//! `Σ_k lead_k ∏_{j<k} g_j ∏_{j>k} h_j = ∏ g_k − ∏ h_k`.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{bail, Result};
use crate::jacobian::{SurfaceModel, SurfacePoint};
use crate::linalg::{vadd, vscale, vsub};
use crate::residual::scaled;
use crate::riemann::SMALL_THETA;

const ONE: Complex64 = Complex64::new(1.0, 0.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Inputs of the theorem: `n + 1` vectors `z_k` and points `a_k, b_k, c_k, d_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct SummandConfig {
    pub z: Vec<Vec<Complex64>>,
    pub a: Vec<SurfacePoint>,
    pub b: Vec<SurfacePoint>,
    pub c: Vec<SurfacePoint>,
    pub d: Vec<SurfacePoint>,
}

impl SummandConfig {
    /// Upper summation index `n`.
    pub fn n(&self) -> usize {
        self.z.len().saturating_sub(1)
    }

    /// Shape checks plus pairwise distinctness of all `4n + 4` points.
    pub fn validate(&self, model: &SurfaceModel) -> Result<()> {
        self.validate_shape(model)?;
        let pts: Vec<&SurfacePoint> = self.a.iter().chain(&self.b).chain(&self.c).chain(&self.d).collect();
        for i in 0..pts.len() {
            for j in 0..i {
                if pts[i] == pts[j] {
                    bail!(Precondition, "points must be pairwise distinct ({:?} repeats)", pts[i]);
                }
            }
        }
        Ok(())
    }

    fn validate_shape(&self, model: &SurfaceModel) -> Result<()> {
        let len = self.z.len();
        if len == 0 {
            bail!(Precondition, "need at least one summand");
        }
        if [self.a.len(), self.b.len(), self.c.len(), self.d.len()].iter().any(|&l| l != len) {
            bail!(Precondition, "all lists must have n + 1 = {len} entries");
        }
        if let Some(k) = self.z.iter().position(|z| z.len() != model.genus()) {
            bail!(Precondition, "z[{k}] has length {} for genus {}", self.z[k].len(), model.genus());
        }
        for p in self.a.iter().chain(&self.b).chain(&self.c).chain(&self.d) {
            model.check_point(p)?;
        }
        Ok(())
    }
}

/// Product of brackets with the bookkeeping for scale and near-zeros.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BracketProduct {
    pub value: Complex64,
    /// Product of the dominant lattice terms of each factor.
    pub scale: f64,
    pub near_zero: bool,
}

fn bracket_product(model: &SurfaceModel, args: &[Vec<Complex64>]) -> Result<BracketProduct> {
    let mut out = BracketProduct { value: ONE, scale: 1.0, near_zero: false };
    for x in args {
        let t = model.bracket().eval_with_info(x)?;
        out.near_zero |= t.value.norm() < SMALL_THETA * t.max_term;
        out.value *= t.value;
        out.scale *= t.max_term;
    }
    Ok(out)
}

/// Abel vectors of one index `k`, measured from the surface base point.
struct Vectors {
    a: Vec<Complex64>,
    b: Vec<Complex64>,
    c: Vec<Complex64>,
    d: Vec<Complex64>,
}

fn vectors(model: &SurfaceModel, cfg: &SummandConfig, k: usize) -> Result<Vectors> {
    Ok(Vectors {
        a: model.abel_from_base(&cfg.a[k])?,
        b: model.abel_from_base(&cfg.b[k])?,
        c: model.abel_from_base(&cfg.c[k])?,
        d: model.abel_from_base(&cfg.d[k])?,
    })
}

fn v(p: &[Complex64], q: &[Complex64]) -> Vec<Complex64> {
    vsub(q, p)
}

fn check_index(cfg: &SummandConfig, k: usize) -> Result<()> {
    if k > cfg.n() || cfg.z.is_empty() {
        bail!(Domain, "index {k} out of range 0..={}", cfg.n());
    }
    Ok(())
}

fn g_args(z: &[Complex64], p: &Vectors) -> [Vec<Complex64>; 4] {
    let (ac, bd) = (v(&p.a, &p.c), v(&p.b, &p.d));
    [z.to_vec(), vadd(z, &vadd(&ac, &bd)), v(&p.c, &p.d), v(&p.a, &p.b)]
}

fn h_args(z: &[Complex64], p: &Vectors) -> [Vec<Complex64>; 4] {
    [vadd(z, &v(&p.a, &p.c)), vadd(z, &v(&p.b, &p.d)), v(&p.c, &p.b), v(&p.a, &p.d)]
}

fn lead_args(z: &[Complex64], p: &Vectors) -> [Vec<Complex64>; 4] {
    [vadd(z, &v(&p.b, &p.c)), vadd(z, &v(&p.a, &p.d)), v(&p.a, &p.c), v(&p.b, &p.d)]
}

pub fn g_term(model: &SurfaceModel, cfg: &SummandConfig, k: usize) -> Result<Complex64> {
    check_index(cfg, k)?;
    Ok(bracket_product(model, &g_args(&cfg.z[k], &vectors(model, cfg, k)?))?.value)
}

pub fn h_term(model: &SurfaceModel, cfg: &SummandConfig, k: usize) -> Result<Complex64> {
    check_index(cfg, k)?;
    Ok(bracket_product(model, &h_args(&cfg.z[k], &vectors(model, cfg, k)?))?.value)
}

pub fn lead_term(model: &SurfaceModel, cfg: &SummandConfig, k: usize) -> Result<Complex64> {
    check_index(cfg, k)?;
    Ok(bracket_product(model, &lead_args(&cfg.z[k], &vectors(model, cfg, k)?))?.value)
}

/// `g_k`, `h_k` and `lead_k` for every `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Terms {
    pub g: Vec<BracketProduct>,
    pub h: Vec<BracketProduct>,
    pub lead: Vec<BracketProduct>,
}

pub fn all_terms(model: &SurfaceModel, cfg: &SummandConfig) -> Result<Terms> {
    cfg.validate_shape(model)?;
    let mut t = Terms { g: Vec::new(), h: Vec::new(), lead: Vec::new() };
    for k in 0..=cfg.n() {
        let p = vectors(model, cfg, k)?;
        let z = &cfg.z[k];
        t.g.push(bracket_product(model, &g_args(z, &p))?);
        t.h.push(bracket_product(model, &h_args(z, &p))?);
        t.lead.push(bracket_product(model, &lead_args(z, &p))?);
    }
    Ok(t)
}

/// Two sides of an identity with the largest term that entered them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SumPair {
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub scale: f64,
}

impl SumPair {
    /// `|lhs − rhs| / max(|lhs|, |rhs|, scale)`.
    pub fn residual(&self) -> f64 {
        scaled(self.lhs, self.rhs, self.scale)
    }
}

/// `Σ (x_k − y_k) ∏_{j<k} x_j ∏_{j>k} y_j` against `∏ x_j − ∏ y_j`.
pub fn telescope_pair(x: &[Complex64], y: &[Complex64]) -> Result<SumPair> {
    if x.is_empty() || x.len() != y.len() {
        bail!(Domain, "sequences must be nonempty and of equal length");
    }
    let n = x.len();
    // suffix[k] = ∏_{j≥k} y_j
    let mut suffix = vec![ONE; n + 1];
    for k in (0..n).rev() {
        suffix[k] = suffix[k + 1] * y[k];
    }
    let mut lhs = ZERO;
    let mut prefix = ONE;
    let mut scale = 0.0f64;
    for k in 0..n {
        let term = (x[k] - y[k]) * prefix * suffix[k + 1];
        scale = scale.max(term.norm());
        lhs += term;
        prefix *= x[k];
    }
    let rhs = prefix - suffix[0];
    Ok(SumPair { lhs, rhs, scale: scale.max(prefix.norm()).max(suffix[0].norm()) })
}

/// Both sides of the multiparameter sum.
pub fn theorem_sum_pair(model: &SurfaceModel, cfg: &SummandConfig) -> Result<SumPair> {
    cfg.validate(model)?;
    let t = all_terms(model, cfg)?;
    if t.g.iter().chain(&t.h).chain(&t.lead).any(|b| b.near_zero) {
        bail!(Resample, "a bracket sits near a theta zero");
    }
    let val = |v: &[BracketProduct]| v.iter().map(|b| b.value).collect::<Vec<_>>();
    let (g, h, lead) = (val(&t.g), val(&t.h), val(&t.lead));
    let n = g.len();
    let mut suffix = vec![ONE; n + 1];
    for k in (0..n).rev() {
        suffix[k] = suffix[k + 1] * h[k];
    }
    let mut lhs = ZERO;
    let mut prefix = ONE;
    let mut scale = 0.0f64;
    for k in 0..n {
        let term = lead[k] * prefix * suffix[k + 1];
        scale = scale.max(term.norm());
        lhs += term;
        prefix *= g[k];
    }
    let rhs = prefix - suffix[0];
    Ok(SumPair { lhs, rhs, scale: scale.max(prefix.norm()).max(suffix[0].norm()) })
}

/// `max_k |h_k + lead_k − g_k| / max(|h_k|, |lead_k|, |g_k|)`: the induction
/// step of the proof.
pub fn induction_step_residual(model: &SurfaceModel, cfg: &SummandConfig) -> Result<f64> {
    let t = all_terms(model, cfg)?;
    Ok((0..t.g.len())
        .map(|k| {
            let (g, h, l) = (t.g[k].value, t.h[k].value, t.lead[k].value);
            scaled(h + l, g, h.norm().max(l.norm()))
        })
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DegenerateMode {
    /// `a_n = b_n`: `[v(a_n, b_n)] = 0` and the ratio sum equals 1.
    Sum2,
    /// `c_0 = b_0`: `[v(c_0, b_0)] = 0`.
    Sum3,
}

/// Forces the coincidence of `mode` on a copy of `cfg`.
pub fn degenerate_config(cfg: &SummandConfig, mode: DegenerateMode) -> SummandConfig {
    let mut out = cfg.clone();
    match mode {
        DegenerateMode::Sum2 => {
            let n = out.n();
            out.a[n] = out.b[n];
        }
        DegenerateMode::Sum3 => out.c[0] = out.b[0],
    }
    out
}

/// Both sides of the degenerate sum after forcing the coincidence.
///
/// `Sum2`: `Σ_k lead_k/(−h_k) ∏_{j<k} g_j/h_j` against `1`.
/// `Sum3`: `Σ_k lead_k/g_0 ∏_{j<k} g_j/h_{j+1}` against `∏_{k≥1} g_k/h_k`.
pub fn degenerate_sum_pair(model: &SurfaceModel, cfg: &SummandConfig, mode: DegenerateMode) -> Result<SumPair> {
    let cfg = degenerate_config(cfg, mode);
    let t = all_terms(model, &cfg)?;
    let n = cfg.n();
    let guard = |b: &BracketProduct| -> Result<Complex64> {
        if b.near_zero {
            bail!(Resample, "denominator bracket sits near a theta zero");
        }
        Ok(b.value)
    };
    let mut lhs = ZERO;
    let mut scale = 0.0f64;
    let mut prod = ONE;
    match mode {
        DegenerateMode::Sum2 => {
            for k in 0..=n {
                let term = t.lead[k].value / -guard(&t.h[k])? * prod;
                scale = scale.max(term.norm());
                lhs += term;
                if k < n {
                    prod *= t.g[k].value / t.h[k].value;
                }
            }
            Ok(SumPair { lhs, rhs: ONE, scale })
        }
        DegenerateMode::Sum3 => {
            let g0 = guard(&t.g[0])?;
            for k in 0..=n {
                let term = t.lead[k].value / g0 * prod;
                scale = scale.max(term.norm());
                lhs += term;
                if k < n {
                    prod *= t.g[k].value / guard(&t.h[k + 1])?;
                }
            }
            let mut rhs = ONE;
            for k in 1..=n {
                rhs *= t.g[k].value / t.h[k].value;
            }
            Ok(SumPair { lhs, rhs, scale: scale.max(rhs.norm()) })
        }
    }
}

/// `|value − 1|` for `Sum2`, scaled defect for `Sum3`.
pub fn degenerate_sum_check(model: &SurfaceModel, cfg: &SummandConfig, mode: DegenerateMode) -> Result<f64> {
    let pair = degenerate_sum_pair(model, cfg, mode)?;
    Ok(match mode {
        DegenerateMode::Sum2 => (pair.lhs - 1.0).norm(),
        DegenerateMode::Sum3 => pair.residual(),
    })
}

/// Inputs of the first specialisation.
#[derive(Debug, Clone, PartialEq)]
pub struct Corollary1Input {
    pub u0: Vec<Complex64>,
    pub x: Vec<SurfacePoint>,
    pub a: Vec<SurfacePoint>,
    pub d0: SurfacePoint,
}

impl Corollary1Input {
    /// The `Sum3` configuration it specialises: `z_k = u_0 + v(x_0, x_k)`,
    /// `b_k = x_0`, `c_k = x_k`, `d_k = d_0`.
    pub fn to_config(&self, model: &SurfaceModel) -> Result<SummandConfig> {
        let n1 = self.x.len();
        if n1 == 0 || self.a.len() != n1 {
            bail!(Precondition, "x and a must be nonempty lists of equal length");
        }
        let x0 = model.abel_from_base(&self.x[0])?;
        let mut z = Vec::with_capacity(n1);
        for p in &self.x {
            z.push(vadd(&self.u0, &v(&x0, &model.abel_from_base(p)?)));
        }
        Ok(SummandConfig { z, a: self.a.clone(), b: vec![self.x[0]; n1], c: self.x.clone(), d: vec![self.d0; n1] })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Corollary1Outcome {
    pub pair: SumPair,
    /// Largest `|Σ numerator arguments − Σ denominator arguments|` on the right side.
    pub balance_defect: f64,
    /// Largest deviation of a reciprocal pair sum from `u_0 + 2v(x_k)`.
    pub well_poised_defect: f64,
}

impl Corollary1Outcome {
    pub fn residual(&self) -> f64 {
        self.pair.residual()
    }
}

fn max_abs(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Evaluates the specialised sum with `X_k = v(x_0, x_k)`, `u_2 = v(d_0, x_0)`
/// and `u_1^{(k)} = v(x_k, a_k)`.
pub fn corollary1_check(model: &SurfaceModel, input: &Corollary1Input) -> Result<Corollary1Outcome> {
    let n1 = input.x.len();
    if n1 == 0 || input.a.len() != n1 || input.u0.len() != model.genus() {
        bail!(Precondition, "inconsistent corollary input lengths");
    }
    let u0 = &input.u0;
    let vx0 = model.abel_from_base(&input.x[0])?;
    let u2 = v(&model.abel_from_base(&input.d0)?, &vx0);
    let mut xs = Vec::with_capacity(n1);
    let mut u1 = Vec::with_capacity(n1);
    for k in 0..n1 {
        let vx = model.abel_from_base(&input.x[k])?;
        u1.push(v(&vx, &model.abel_from_base(&input.a[k])?));
        xs.push(v(&vx0, &vx));
    }
    let br = |args: &[Vec<Complex64>]| bracket_product(model, args);
    let guard = |b: BracketProduct| -> Result<Complex64> {
        if b.near_zero {
            bail!(Resample, "denominator bracket sits near a theta zero");
        }
        Ok(b.value)
    };
    let u0_u2 = vsub(u0, &u2);
    let first = |k: usize| vsub(&u0_u2, &u1[k]);
    let base = guard(br(&[u0.clone(), first(0), u1[0].clone()])?)?;
    let mut lhs = ZERO;
    let mut scale = 0.0f64;
    let mut prod = ONE;
    let mut rhs = ONE;
    let mut balance_defect = 0.0f64;
    let mut well_poised_defect = 0.0f64;
    for k in 0..n1 {
        let x = &xs[k];
        let lead = br(&[vadd(u0, &vscale(x, Complex64::new(2.0, 0.0))), first(k), u1[k].clone()])?.value;
        let term = lead / base * prod;
        scale = scale.max(term.norm());
        lhs += term;
        if k + 1 < n1 {
            let y = &xs[k + 1];
            let num = br(&[vadd(u0, x), vadd(&first(k), x), vadd(&u1[k], x), vadd(&u2, x)])?.value;
            let den = guard(br(&[
                y.clone(),
                vadd(&vadd(&u1[k + 1], &u2), y),
                vadd(&vsub(u0, &u1[k + 1]), y),
                vadd(&u0_u2, y),
            ])?)?;
            prod *= num / den;
        }
        if k >= 1 {
            let num_args = [vadd(u0, x), vadd(&first(k), x), vadd(&u1[k], x), vadd(&u2, x)];
            let den_args = [x.clone(), vadd(&vadd(&u1[k], &u2), x), vadd(&vsub(u0, &u1[k]), x), vadd(&u0_u2, x)];
            let total = |a: &[Vec<Complex64>]| a.iter().fold(vec![ZERO; u0.len()], |s, v| vadd(&s, v));
            balance_defect = balance_defect.max(max_abs(&vsub(&total(&num_args), &total(&den_args))));
            let target = vadd(u0, &vscale(x, Complex64::new(2.0, 0.0)));
            for (nu, de) in num_args.iter().zip(&den_args) {
                well_poised_defect = well_poised_defect.max(max_abs(&vsub(&vadd(nu, de), &target)));
            }
            rhs *= br(&num_args)?.value / guard(br(&den_args)?)?;
        }
    }
    Ok(Corollary1Outcome {
        pair: SumPair { lhs, rhs, scale: scale.max(rhs.norm()) },
        balance_defect,
        well_poised_defect,
    })
}

/// Inputs of the second specialisation.
#[derive(Debug, Clone, PartialEq)]
pub struct Corollary2Input {
    pub z0: Vec<Complex64>,
    pub a: SurfacePoint,
    pub c: SurfacePoint,
    pub x: Vec<SurfacePoint>,
}

/// The sum, the difference of boundary ratios and the closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Corollary2Outcome {
    pub sum: Complex64,
    pub difference: Complex64,
    pub closed: Complex64,
    pub scale: f64,
}

impl Corollary2Outcome {
    /// Largest pairwise scaled defect.
    pub fn residual(&self) -> f64 {
        let (s, d, c) = (self.sum, self.difference, self.closed);
        scaled(s, d, self.scale).max(scaled(d, c, self.scale)).max(scaled(s, c, self.scale))
    }
}

pub fn corollary2_check(model: &SurfaceModel, input: &Corollary2Input) -> Result<Corollary2Outcome> {
    if input.x.len() < 2 || input.z0.len() != model.genus() {
        bail!(Precondition, "need x_0, …, x_n with n ≥ 1 and z_0 of genus length");
    }
    let z0 = &input.z0;
    let va = model.abel_from_base(&input.a)?;
    let vc = model.abel_from_base(&input.c)?;
    let vx = input.x.iter().map(|p| model.abel_from_base(p)).collect::<Result<Vec<_>>>()?;
    let vac = v(&va, &vc);
    let br = |args: &[Vec<Complex64>]| -> Result<Complex64> {
        let b = bracket_product(model, args)?;
        Ok(b.value)
    };
    let den = |args: &[Vec<Complex64>]| -> Result<Complex64> {
        let b = bracket_product(model, args)?;
        if b.near_zero {
            bail!(Resample, "denominator bracket sits near a theta zero");
        }
        Ok(b.value)
    };
    let ratio = |k: usize| -> Result<Complex64> {
        let (cx, ax) = (v(&vc, &vx[k]), v(&va, &vx[k]));
        Ok(br(&[vadd(z0, &ax), cx.clone()])? / den(&[vadd(z0, &cx), ax])?)
    };
    let n = vx.len() - 1;
    let mut sum = ZERO;
    let mut scale = 0.0f64;
    for k in 1..=n {
        let (cprev, aprev, ak) = (v(&vc, &vx[k - 1]), v(&va, &vx[k - 1]), v(&va, &vx[k]));
        let num = br(&[z0.clone(), vadd(z0, &vadd(&cprev, &ak)), vac.clone(), v(&vx[k - 1], &vx[k])])?;
        let term = num / den(&[vadd(z0, &cprev), vadd(z0, &v(&vc, &vx[k])), aprev, ak])?;
        scale = scale.max(term.norm());
        sum += term;
    }
    let (rn, r0) = (ratio(n)?, ratio(0)?);
    let difference = rn - r0;
    let (c0, an) = (v(&vc, &vx[0]), v(&va, &vx[n]));
    let closed = br(&[z0.clone(), vadd(z0, &vadd(&c0, &an)), vac.clone(), v(&vx[0], &vx[n])])?
        / den(&[vadd(z0, &c0), vadd(z0, &v(&vc, &vx[n])), v(&va, &vx[0]), an])?;
    let scale = scale.max(rn.norm()).max(r0.norm());
    Ok(Corollary2Outcome { sum, difference, closed, scale })
}

/// `Sum2` evaluated after shifting `z[k]` by `shift`; the ratio form makes the
/// quasi-period multipliers cancel.
pub fn sum2_shift_residual(model: &SurfaceModel, cfg: &SummandConfig, k: usize, shift: &[Complex64]) -> Result<f64> {
    check_index(cfg, k)?;
    let mut moved = cfg.clone();
    moved.z[k] = vadd(&moved.z[k], shift);
    let base = degenerate_sum_pair(model, cfg, DegenerateMode::Sum2)?;
    let other = degenerate_sum_pair(model, &moved, DegenerateMode::Sum2)?;
    Ok((other.lhs - base.lhs).norm().max((other.lhs - 1.0).norm()))
}
