//! Concrete Riemann surfaces with their period matrices and Abel maps: the
//! torus `ℂ/(ℤ + τℤ)` and the genus-2 curve `y² = ∏(x − e_j)` with six real
//! branch points.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{bail, Error, Result};
use crate::linalg::{vadd, vsub, CMatrix};
use crate::quadrature::{gauss_chebyshev, gauss_legendre};
use crate::riemann::{pick_odd_char, OddBracket, PeriodMatrix, SMALL_THETA};

/// Certificate bound on `|Ω − Ωᵀ|`.
pub const OMEGA_SYMMETRY_TOL: f64 = 1e-8;
/// Points closer than this to a branch point are rejected.
pub const BRANCH_CLEARANCE: f64 = 1e-6;
/// Period integrals are refined until doubling the nodes moves them less than this.
pub const PERIOD_CONV_TOL: f64 = 1e-9;
/// Default Gauss-Chebyshev node count before refinement.
pub const DEFAULT_NODES: usize = 64;
const MAX_NODES: usize = 8192;
const ABEL_CONV_TOL: f64 = 1e-12;
const ABEL_RULES: [usize; 5] = [32, 64, 128, 256, 512];

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sheet {
    Plus,
    Minus,
}

impl Sheet {
    pub fn sign(self) -> f64 {
        match self {
            Sheet::Plus => 1.0,
            Sheet::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Sheet::Plus => Sheet::Minus,
            Sheet::Minus => Sheet::Plus,
        }
    }
}

/// A point on one of the supported surfaces.
///
/// On the hyperelliptic curve `Sheet::Plus` means `y > 0` where `f(x) > 0`
/// and `Im y > 0` where `f(x) < 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SurfacePoint {
    Torus(Complex64),
    Hyperelliptic { x: Complex64, sheet: Sheet },
}

#[derive(Debug, Clone, PartialEq)]
pub enum SurfaceKind {
    Torus { tau: Complex64 },
    Hyperelliptic2 { branch_points: [f64; 6] },
}

/// Numerical evidence that a computed period matrix is usable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Certificates {
    pub symmetry_defect: f64,
    pub im_lambda_min: f64,
    /// `max |𝒜⁻¹𝒜 − I|` for the normalised A-periods.
    pub a_normalization_defect: f64,
    /// Largest change of a period integral in the last node doubling.
    pub quadrature_change: f64,
    pub nodes: usize,
    /// Whether the B-cycle orientation had to be reversed.
    pub orientation_flipped: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceModel {
    kind: SurfaceKind,
    omega: PeriodMatrix,
    bracket: OddBracket,
    certificates: Certificates,
    /// Unnormalised A- and B-periods; rows index `dx/y, x dx/y`, columns cycles.
    a_periods: CMatrix,
    b_periods: CMatrix,
    a_inv: CMatrix,
    segments: Vec<[Complex64; 2]>,
    b_sign: f64,
}

pub fn make_torus(tau: Complex64) -> Result<SurfaceModel> {
    if !(tau.im > 0.0) {
        bail!(Domain, "torus needs Im τ > 0 (got {tau})");
    }
    let omega = PeriodMatrix::scalar(tau)?;
    let bracket = pick_odd_char(&omega)?;
    let one = CMatrix::identity(1);
    Ok(SurfaceModel {
        kind: SurfaceKind::Torus { tau },
        omega,
        bracket,
        certificates: Certificates {
            symmetry_defect: 0.0,
            im_lambda_min: tau.im,
            a_normalization_defect: 0.0,
            quadrature_change: 0.0,
            nodes: 0,
            orientation_flipped: false,
        },
        a_periods: one.clone(),
        b_periods: CMatrix::from_fn(1, |_, _| tau),
        a_inv: one,
        segments: Vec::new(),
        b_sign: 1.0,
    })
}

pub fn make_hyperelliptic2(branch_points: [f64; 6]) -> Result<SurfaceModel> {
    make_hyperelliptic2_with(branch_points, DEFAULT_NODES)
}

/// Genus-2 model with cycles `A_1 = 2ℓ_1`, `A_2 = 2ℓ_3`, `B_1 = 2ℓ_2 + 2ℓ_4`,
/// `B_2 = 2ℓ_4`, where `ℓ_j` is the integral over `[e_j, e_{j+1}]` along the
/// upper edge of the real axis.
pub fn make_hyperelliptic2_with(e: [f64; 6], nodes: usize) -> Result<SurfaceModel> {
    if e.iter().any(|x| !x.is_finite()) || e.windows(2).any(|w| !(w[0] < w[1])) {
        bail!(Domain, "branch points must be finite, distinct and sorted ascending");
    }
    if nodes == 0 {
        bail!(Domain, "node count must be positive");
    }
    let mut n = nodes;
    let mut segs = segment_integrals(&e, n);
    let mut change;
    loop {
        let finer = segment_integrals(&e, 2 * n);
        change =
            segs.iter().zip(&finer).flat_map(|(a, b)| [(a[0] - b[0]).norm(), (a[1] - b[1]).norm()]).fold(0.0, f64::max);
        segs = finer;
        n *= 2;
        if change < PERIOD_CONV_TOL {
            break;
        }
        if n >= MAX_NODES {
            return Err(Error::Construction(alloc::format!(
                "period quadrature did not converge: change {change:e} at {n} nodes"
            )));
        }
    }
    let period = |j: usize, k: usize| 2.0 * segs[j][k];
    let a_periods = CMatrix::from_fn(2, |k, col| period(if col == 0 { 0 } else { 2 }, k));
    let b_raw = CMatrix::from_fn(2, |k, col| if col == 0 { period(1, k) + period(3, k) } else { period(3, k) });
    let a_inv = a_periods.inverse().map_err(|err| Error::Construction(alloc::format!("A-periods singular: {err}")))?;
    let mut flipped = false;
    let mut b_sign = 1.0;
    let mut omega_raw = a_inv.matmul(&b_raw);
    let mut ev = omega_raw.im().symmetric_eigenvalues();
    if ev[0] <= 0.0 {
        flipped = true;
        b_sign = -1.0;
        omega_raw = omega_raw.scale(Complex64::new(-1.0, 0.0));
        ev = omega_raw.im().symmetric_eigenvalues();
    }
    let symmetry_defect = omega_raw.symmetry_defect();
    let normal = a_inv.matmul(&a_periods);
    let a_normalization_defect = CMatrix::from_fn(2, |i, j| normal[(i, j)] - if i == j { 1.0 } else { 0.0 }).max_abs();
    if !(symmetry_defect < OMEGA_SYMMETRY_TOL) || !(ev[0] > 0.0) {
        return Err(Error::Construction(alloc::format!(
            "period matrix certificates failed: symmetry defect {symmetry_defect:e}, λ_min(Im Ω) {:e}",
            ev[0]
        )));
    }
    let omega = PeriodMatrix::new(omega_raw.symmetrized())?;
    let bracket = pick_odd_char(&omega)?;
    Ok(SurfaceModel {
        kind: SurfaceKind::Hyperelliptic2 { branch_points: e },
        omega,
        bracket,
        certificates: Certificates {
            symmetry_defect,
            im_lambda_min: ev[0],
            a_normalization_defect,
            quadrature_change: change,
            nodes: n,
            orientation_flipped: flipped,
        },
        a_periods,
        b_periods: b_raw.scale(Complex64::new(b_sign, 0.0)),
        a_inv,
        segments: segs,
        b_sign,
    })
}

/// `y(x + i0) / sqrt|f(x)|` for real `x` off the branch points.
fn edge_phase(e: &[f64; 6], x: f64) -> Complex64 {
    I.powi(e.iter().filter(|&&b| b > x).count() as i32)
}

fn abs_rest(e: &[f64; 6], x: f64, skip: &[usize]) -> f64 {
    e.iter().enumerate().filter(|(i, _)| !skip.contains(i)).map(|(_, b)| (x - b).abs()).product()
}

/// `∫_{e_j}^{e_{j+1}} x^k dx / y(x + i0)` for `j = 0..5`, `k = 0, 1`.
fn segment_integrals(e: &[f64; 6], n: usize) -> Vec<[Complex64; 2]> {
    (0..5)
        .map(|j| {
            let (a, b) = (e[j], e[j + 1]);
            let (xs, ws) = gauss_chebyshev(a, b, n);
            let mut s = [0.0f64; 2];
            for (x, w) in xs.iter().zip(&ws) {
                let f = w / abs_rest(e, *x, &[j, j + 1]).sqrt();
                s[0] += f;
                s[1] += f * x;
            }
            let phase = edge_phase(e, 0.5 * (a + b));
            [s[0] / phase, s[1] / phase]
        })
        .collect()
}

/// `∫_{e_j}^{x} t^k dt / y(t + i0)` along the real axis; singular only at `e_j`.
fn partial_integral(e: &[f64; 6], j: usize, x: f64) -> Result<[Complex64; 2]> {
    let a = e[j];
    let h = x - a;
    let phase = edge_phase(e, a + 0.5 * h);
    let pref = 2.0 * h / h.abs().sqrt();
    let eval = |n: usize| {
        let (xs, ws) = gauss_legendre(n);
        let mut s = [0.0f64; 2];
        for (xi, w) in xs.iter().zip(&ws) {
            let sv = 0.5 * (xi + 1.0);
            let t = a + h * sv * sv;
            let f = 0.5 * w / abs_rest(e, t, &[j]).sqrt();
            s[0] += f;
            s[1] += f * t;
        }
        [s[0] * pref, s[1] * pref]
    };
    let mut prev = eval(ABEL_RULES[0]);
    for &n in &ABEL_RULES[1..] {
        let next = eval(n);
        let change = (next[0] - prev[0]).abs().max((next[1] - prev[1]).abs());
        let scale = next[0].abs().max(next[1].abs()).max(1.0);
        prev = next;
        if change < ABEL_CONV_TOL * scale {
            return Ok([prev[0] / phase, prev[1] / phase]);
        }
    }
    bail!(Domain, "Abel integral to x = {x} did not converge")
}

impl SurfaceModel {
    pub fn kind(&self) -> &SurfaceKind {
        &self.kind
    }

    pub fn genus(&self) -> usize {
        self.omega.g()
    }

    pub fn period_matrix(&self) -> &PeriodMatrix {
        &self.omega
    }

    pub fn bracket(&self) -> &OddBracket {
        &self.bracket
    }

    /// Same model with a different truncation tolerance for bracket evaluations.
    pub fn with_theta_tol(mut self, tol: f64) -> Result<Self> {
        if !(tol > 0.0) {
            bail!(Domain, "theta tolerance must be positive");
        }
        self.bracket.tol = tol;
        Ok(self)
    }

    pub fn certificates(&self) -> &Certificates {
        &self.certificates
    }

    pub fn a_periods(&self) -> &CMatrix {
        &self.a_periods
    }

    pub fn b_periods(&self) -> &CMatrix {
        &self.b_periods
    }

    /// Unnormalised periods computed with `y → −y`.
    pub fn opposite_sheet_periods(&self) -> (CMatrix, CMatrix) {
        let neg = Complex64::new(-1.0, 0.0);
        (self.a_periods.scale(neg), self.b_periods.scale(neg))
    }

    pub fn check_point(&self, p: &SurfacePoint) -> Result<()> {
        match (&self.kind, p) {
            (SurfaceKind::Torus { .. }, SurfacePoint::Torus(w)) => {
                if !w.is_finite() {
                    bail!(Domain, "torus coordinate must be finite");
                }
                Ok(())
            }
            (SurfaceKind::Hyperelliptic2 { branch_points }, SurfacePoint::Hyperelliptic { x, .. }) => {
                if x.im != 0.0 || !x.re.is_finite() {
                    bail!(Domain, "only finite real x-coordinates are supported (got {x})");
                }
                if let Some(b) = branch_points.iter().find(|b| (x.re - **b).abs() <= BRANCH_CLEARANCE) {
                    bail!(Domain, "point x = {} is within {BRANCH_CLEARANCE:e} of branch point {b}", x.re);
                }
                Ok(())
            }
            _ => bail!(Domain, "point type does not match the surface"),
        }
    }

    /// Abel map from the base point (the origin of the torus, `e_1` on the
    /// hyperelliptic curve) to `p`.
    pub fn abel_from_base(&self, p: &SurfacePoint) -> Result<Vec<Complex64>> {
        self.check_point(p)?;
        match (&self.kind, p) {
            (SurfaceKind::Torus { .. }, SurfacePoint::Torus(w)) => Ok(vec![*w]),
            (SurfaceKind::Hyperelliptic2 { branch_points: e }, SurfacePoint::Hyperelliptic { x, sheet }) => {
                let x = x.re;
                let j = e.iter().filter(|&&b| b < x).count();
                // path along the upper edge, starting from the nearest branch point
                // on the side of e_1
                let (full, start) = if j == 0 {
                    (0, 0)
                } else if j == 6 {
                    (5, 5)
                } else if x - e[j - 1] <= e[j] - x {
                    (j - 1, j - 1)
                } else {
                    (j, j)
                };
                let mut acc = [Complex64::new(0.0, 0.0); 2];
                for seg in &self.segments[..full] {
                    acc[0] += seg[0];
                    acc[1] += seg[1];
                }
                let part = partial_integral(e, start, x)?;
                acc[0] += part[0];
                acc[1] += part[1];
                let phase = edge_phase(e, x);
                let s = sheet.sign() * (phase.re + phase.im);
                Ok(self.a_inv.mul_vec(&[acc[0] * s, acc[1] * s]))
            }
            _ => unreachable!("checked by check_point"),
        }
    }
}

/// `v(a, b) = ∫_a^b ω`.
pub fn abel_map(model: &SurfaceModel, a: &SurfacePoint, b: &SurfacePoint) -> Result<Vec<Complex64>> {
    Ok(vsub(&model.abel_from_base(b)?, &model.abel_from_base(a)?))
}

/// Point in one of the real gaps `(e_2, e_3)` (`gap = 0`) or `(e_4, e_5)`
/// (`gap = 1`) at relative position `frac`.
pub fn gap_point(model: &SurfaceModel, gap: usize, frac: f64, sheet: Sheet) -> Result<SurfacePoint> {
    let SurfaceKind::Hyperelliptic2 { branch_points: e } = model.kind() else {
        bail!(Domain, "gap points exist only on the hyperelliptic model");
    };
    if gap > 1 || !(0.0..=1.0).contains(&frac) {
        bail!(Domain, "gap must be 0 or 1 and frac in [0, 1]");
    }
    let (lo, hi) = (e[2 * gap + 1], e[2 * gap + 2]);
    Ok(SurfacePoint::Hyperelliptic { x: Complex64::new(lo + frac * (hi - lo), 0.0), sheet })
}

/// The three products in Fay's trisecant identity `T_1 + T_2 = T_3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FayTerms {
    pub t1: Complex64,
    pub t2: Complex64,
    pub t3: Complex64,
}

impl FayTerms {
    pub fn residual(&self) -> f64 {
        let scale = self.t1.norm().max(self.t2.norm()).max(self.t3.norm());
        if scale == 0.0 {
            0.0
        } else {
            (self.t1 + self.t2 - self.t3).norm() / scale
        }
    }
}

pub fn fay_terms(
    model: &SurfaceModel,
    u: &[Complex64],
    a: &SurfacePoint,
    b: &SurfacePoint,
    c: &SurfacePoint,
    d: &SurfacePoint,
) -> Result<FayTerms> {
    let g = model.genus();
    if u.len() != g {
        bail!(Domain, "argument has length {} for genus {g}", u.len());
    }
    let [va, vb, vc, vd] = [a, b, c, d].map(|p| model.abel_from_base(p));
    let (va, vb, vc, vd) = (va?, vb?, vc?, vd?);
    let v = |p: &[Complex64], q: &[Complex64]| vsub(q, p);
    let br = model.bracket();
    // each product returns (value, product of dominant terms)
    let prod = |args: [Vec<Complex64>; 4]| -> Result<(Complex64, f64, bool)> {
        let mut val = Complex64::new(1.0, 0.0);
        let mut scale = 1.0;
        let mut near_zero = false;
        for x in &args {
            let t = br.eval_with_info(x)?;
            near_zero |= t.value.norm() < SMALL_THETA * t.max_term;
            val *= t.value;
            scale *= t.max_term;
        }
        Ok((val, scale, near_zero))
    };
    let (vac, vbd) = (v(&va, &vc), v(&vb, &vd));
    let t1 = prod([vadd(u, &vac), vadd(u, &vbd), v(&vc, &vb), v(&va, &vd)])?;
    let t2 = prod([vadd(u, &v(&vb, &vc)), vadd(u, &v(&va, &vd)), vac.clone(), vbd.clone()])?;
    let t3 = prod([u.to_vec(), vadd(u, &vadd(&vac, &vbd)), v(&vc, &vd), v(&va, &vb)])?;
    if t1.2 && t2.2 && t3.2 {
        bail!(Resample, "all three Fay products sit at zeros of the theta function");
    }
    Ok(FayTerms { t1: t1.0, t2: t2.0, t3: t3.0 })
}

/// `|T_1 + T_2 − T_3| / max(|T_1|, |T_2|, |T_3|)`.
pub fn fay_residual(
    model: &SurfaceModel,
    u: &[Complex64],
    a: &SurfacePoint,
    b: &SurfacePoint,
    c: &SurfacePoint,
    d: &SurfacePoint,
) -> Result<f64> {
    Ok(fay_terms(model, u, a, b, c, d)?.residual())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::vnorm;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const E: [f64; 6] = [-5.0, -3.0, -1.0, 1.0, 3.0, 5.0];

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn torus_point(rng: &mut ChaCha8Rng) -> SurfacePoint {
        SurfacePoint::Torus(c(rng.gen_range(-1.0..1.0), rng.gen_range(-0.4..0.4)))
    }

    fn hyper_point(rng: &mut ChaCha8Rng, model: &SurfaceModel) -> SurfacePoint {
        let sheet = if rng.gen_bool(0.5) { Sheet::Plus } else { Sheet::Minus };
        gap_point(model, rng.gen_range(0..2), rng.gen_range(0.05..0.95), sheet).unwrap()
    }

    #[test]
    fn torus_basics() {
        let m = make_torus(c(0.0, 1.0)).unwrap();
        assert_eq!(m.period_matrix().omega()[(0, 0)], c(0.0, 1.0));
        assert!(make_torus(c(0.3, 0.0)).is_err());
        let (a, b, cc) =
            (SurfacePoint::Torus(c(0.3, 0.1)), SurfacePoint::Torus(c(-0.2, 0.4)), SurfacePoint::Torus(c(0.7, -0.3)));
        assert_eq!(abel_map(&m, &a, &a).unwrap(), vec![c(0.0, 0.0)]);
        let zero = SurfacePoint::Torus(c(0.0, 0.0));
        let lhs = vadd(&abel_map(&m, &zero, &b).unwrap(), &abel_map(&m, &b, &cc).unwrap());
        assert!(vnorm(&vsub(&lhs, &abel_map(&m, &zero, &cc).unwrap())) < 1e-15);
    }

    #[test]
    fn torus_fay() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut done = 0;
        while done < 200 {
            let tau = c(rng.gen_range(-0.5..0.5), rng.gen_range(0.7..1.5));
            let m = make_torus(tau).unwrap();
            let pts: Vec<_> = (0..4).map(|_| torus_point(&mut rng)).collect();
            let u = [c(rng.gen_range(-1.0..1.0), rng.gen_range(-0.3..0.3))];
            match fay_residual(&m, &u, &pts[0], &pts[1], &pts[2], &pts[3]) {
                Ok(r) => assert!(r < 1e-10, "{r}"),
                Err(e) if e.is_resample() => continue,
                Err(e) => panic!("{e}"),
            }
            done += 1;
        }
    }

    #[test]
    fn torus_fay_with_coincident_points() {
        let m = make_torus(c(0.1, 1.1)).unwrap();
        let a = SurfacePoint::Torus(c(0.3, 0.1));
        let (cc, d) = (SurfacePoint::Torus(c(-0.4, 0.2)), SurfacePoint::Torus(c(0.1, -0.25)));
        let terms = fay_terms(&m, &[c(0.2, 0.05)], &a, &a, &cc, &d).unwrap();
        assert!(terms.t3.norm() < 1e-14 * terms.t1.norm());
        assert!(terms.residual() < 1e-10);
    }

    #[test]
    fn hyperelliptic_certificates() {
        let m = make_hyperelliptic2(E).unwrap();
        let cert = m.certificates();
        assert!(cert.symmetry_defect < 1e-8 && cert.im_lambda_min > 0.0);
        assert!(cert.a_normalization_defect < 1e-8);
        assert!(cert.quadrature_change < PERIOD_CONV_TOL);
        let om = m.period_matrix().omega();
        assert!((om[(0, 0)] - c(0.0, 1.709)).norm() < 1e-3);
        assert!((om[(0, 1)] - c(0.0, 0.855)).norm() < 1e-3);
        assert!((om[(1, 1)] - c(0.0, 1.277)).norm() < 1e-3);
        let (a, b) = m.opposite_sheet_periods();
        assert_eq!(a.scale(c(-1.0, 0.0)), *m.a_periods());
        assert_eq!(b.scale(c(-1.0, 0.0)), *m.b_periods());
    }

    #[test]
    fn doubling_nodes_keeps_periods() {
        let coarse = make_hyperelliptic2_with(E, 64).unwrap();
        let fine = make_hyperelliptic2_with(E, 512).unwrap();
        let d = CMatrix::from_fn(2, |i, j| coarse.a_periods()[(i, j)] - fine.a_periods()[(i, j)]).max_abs();
        let db = CMatrix::from_fn(2, |i, j| coarse.b_periods()[(i, j)] - fine.b_periods()[(i, j)]).max_abs();
        assert!(d < 1e-9 && db < 1e-9);
    }

    #[test]
    fn construction_errors() {
        assert!(make_hyperelliptic2([-5.0, -3.0, -3.0, 1.0, 3.0, 5.0]).is_err());
        assert!(make_hyperelliptic2([5.0, -3.0, -1.0, 1.0, 3.0, 4.0]).is_err());
    }

    #[test]
    fn abel_map_properties() {
        let m = make_hyperelliptic2(E).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let [a, b, cc, d] = [0; 4].map(|_| hyper_point(&mut rng, &m));
            assert!(vnorm(&abel_map(&m, &a, &a).unwrap()) == 0.0);
            let ab = abel_map(&m, &a, &b).unwrap();
            let ba = abel_map(&m, &b, &a).unwrap();
            assert!(vnorm(&vadd(&ab, &ba)) < 1e-15);
            let lhs = vadd(&abel_map(&m, &a, &cc).unwrap(), &abel_map(&m, &b, &d).unwrap());
            let rhs = vadd(&abel_map(&m, &b, &cc).unwrap(), &abel_map(&m, &a, &d).unwrap());
            assert!(vnorm(&vsub(&lhs, &rhs)) < 1e-8);
        }
        let near = SurfacePoint::Hyperelliptic { x: c(-3.0 + 1e-7, 0.0), sheet: Sheet::Plus };
        assert!(m.abel_from_base(&near).is_err());
        let complex = SurfacePoint::Hyperelliptic { x: c(0.0, 0.5), sheet: Sheet::Plus };
        assert!(m.abel_from_base(&complex).is_err());
        assert!(m.abel_from_base(&SurfacePoint::Torus(c(0.0, 0.0))).is_err());
    }

    #[test]
    fn opposite_sheets_are_negatives() {
        let m = make_hyperelliptic2(E).unwrap();
        for x in [-4.0, -2.2, 0.3, 2.0, 4.5, 7.0, -6.5] {
            let p = SurfacePoint::Hyperelliptic { x: c(x, 0.0), sheet: Sheet::Plus };
            let q = SurfacePoint::Hyperelliptic { x: c(x, 0.0), sheet: Sheet::Minus };
            let (vp, vq) = (m.abel_from_base(&p).unwrap(), m.abel_from_base(&q).unwrap());
            assert!(vnorm(&vadd(&vp, &vq)) < 1e-14);
        }
    }

    // The Abel map must not depend on which end of a gap the path starts from.
    #[test]
    fn abel_map_is_continuous_across_gap_midpoints() {
        let m = make_hyperelliptic2(E).unwrap();
        for mid in [-2.0, 0.0, 2.0] {
            let l = SurfacePoint::Hyperelliptic { x: c(mid - 1e-9, 0.0), sheet: Sheet::Plus };
            let r = SurfacePoint::Hyperelliptic { x: c(mid + 1e-9, 0.0), sheet: Sheet::Plus };
            assert!(vnorm(&abel_map(&m, &l, &r).unwrap()) < 1e-8);
        }
    }

    #[test]
    fn hyperelliptic_fay() {
        let m = make_hyperelliptic2(E).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut done = 0;
        while done < 20 {
            let [a, b, cc, d] = [0; 4].map(|_| hyper_point(&mut rng, &m));
            let u = [
                c(rng.gen_range(-0.5..0.5), rng.gen_range(-0.2..0.2)),
                c(rng.gen_range(-0.5..0.5), rng.gen_range(-0.2..0.2)),
            ];
            match fay_residual(&m, &u, &a, &b, &cc, &d) {
                Ok(r) => assert!(r < 1e-6, "{r}"),
                Err(e) if e.is_resample() => continue,
                Err(e) => panic!("{e}"),
            }
            done += 1;
        }
    }
}
