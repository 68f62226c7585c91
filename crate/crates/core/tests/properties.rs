//! Property tests across modules.

use proptest::prelude::*;
use theta_summa_core::ehs::{frenkel_turaev_pair, sum_8e7_pair, total_ellipticity_residual, SumForm, VwpSpec};
use theta_summa_core::jacobian::{fay_residual, make_torus, SurfacePoint};
use theta_summa_core::kernel::{ModularPair, Nome};
use theta_summa_core::linalg::CMatrix;
use theta_summa_core::residual::relative;
use theta_summa_core::riemann::{quasi_period_residual, theta_g, Characteristic, PeriodMatrix, QuasiDirection};
use theta_summa_core::summation::{telescope_pair, theorem_sum_pair, SummandConfig};
use theta_summa_core::{Complex64, Error};

fn param() -> impl Strategy<Value = Complex64> {
    (0.5f64.ln()..2.0f64.ln(), 0.0..std::f64::consts::TAU).prop_map(|(l, a)| Complex64::from_polar(l.exp(), a))
}

fn base_q() -> impl Strategy<Value = Complex64> {
    (0.1f64..0.9, 0.0..std::f64::consts::TAU).prop_map(|(r, a)| Complex64::from_polar(r, a))
}

fn cx(re: std::ops::Range<f64>, im: std::ops::Range<f64>) -> impl Strategy<Value = Complex64> {
    (re, im).prop_map(|(a, b)| Complex64::new(a, b))
}

fn skip_resample<T>(r: Result<T, Error>) -> Result<T, TestCaseError> {
    match r {
        Ok(v) => Ok(v),
        Err(e) if e.is_resample() => Err(TestCaseError::reject("resample")),
        Err(e) => Err(TestCaseError::fail(e.to_string())),
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn telescoping_skeleton(x in prop::collection::vec(cx(-2.0..2.0, -2.0..2.0), 1..21), seed in any::<u64>()) {
        let y: Vec<_> = x.iter().enumerate().map(|(i, v)| v * Complex64::from_polar(0.9, (seed as f64 + i as f64).sin())).collect();
        prop_assert!(telescope_pair(&x, &y).unwrap().residual() < 1e-13);
    }

    #[test]
    fn frenkel_turaev(t in prop::array::uniform4(param()), q in base_q(), p in 0.01f64..0.3, n in 0usize..9) {
        let (l, r) = skip_resample(frenkel_turaev_pair(t[0], t[1], t[2], t[3], n, q, Nome::real(p).unwrap()))?;
        prop_assert!(relative(l, r) < 1e-10);
    }

    #[test]
    fn e87_forms_agree(t in prop::array::uniform3(param()), q in base_q(), p in 0.01f64..0.3, n in 0usize..11) {
        let bases = ModularPair::from_nomes(q, Complex64::new(p, 0.0)).unwrap();
        let m = skip_resample(sum_8e7_pair(t[0], t[1], t[2], n, &bases, SumForm::Multiplicative))?;
        let a = skip_resample(sum_8e7_pair(t[0], t[1], t[2], n, &bases, SumForm::Additive))?;
        prop_assert!(relative(m.0, m.1) < 1e-10 && relative(a.0, a.1) < 1e-10);
        prop_assert!(relative(m.0, a.0) < 1e-10);
    }

    #[test]
    fn total_ellipticity(t0 in param(), head in prop::array::uniform4(param()), z in param(), q in base_q(), p in 0.01f64..0.3) {
        let spec = VwpSpec::balanced(t0, head.to_vec(), z, q, Nome::real(p).unwrap()).unwrap();
        let samples = [Complex64::new(0.0, 0.0), Complex64::new(1.3, 0.1)];
        match total_ellipticity_residual(&spec, &samples) {
            Ok(r) => prop_assert!(r < 1e-9),
            Err(Error::Resample(_)) | Err(Error::Pole(_)) => return Err(TestCaseError::reject("near zero")),
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        }
    }

    #[test]
    fn genus_two_quasi_periods(
        diag in prop::array::uniform2(0.8f64..1.5),
        off in cx(-0.3..0.3, -0.3..0.3),
        re in prop::array::uniform2(-0.5f64..0.5),
        u in prop::array::uniform2(cx(-1.0..1.0, -0.5..0.5)),
        bits in (0u32..4, 0u32..4),
    ) {
        let om = CMatrix::from_row_major(vec![Complex64::new(re[0], diag[0]), off, off, Complex64::new(re[1], diag[1])]).unwrap();
        let Ok(om) = PeriodMatrix::new(om) else { return Err(TestCaseError::reject("not positive")) };
        prop_assume!(om.im_eigen_range().0 > 0.3);
        let ch = Characteristic::half(2, bits.0, bits.1);
        for k in 0..2 {
            for dir in [QuasiDirection::Lattice(k), QuasiDirection::Period(k)] {
                prop_assert!(skip_resample(quasi_period_residual(&u, &om, &ch, dir))? < 1e-10);
            }
        }
        if ch.is_odd() {
            let a = theta_g(&u, &om, &ch, 1e-16).unwrap();
            let b = theta_g(&[-u[0], -u[1]], &om, &ch, 1e-16).unwrap();
            prop_assert!(relative(b, -a) < 1e-11);
        }
    }

    #[test]
    fn torus_fay(tau in cx(-0.5..0.5, 0.7..1.5), pts in prop::array::uniform4(cx(-1.0..1.0, -0.4..0.4)), z in cx(-1.0..1.0, -0.3..0.3)) {
        let m = make_torus(tau).unwrap();
        let [a, b, c, d] = pts.map(SurfacePoint::Torus);
        prop_assert!(skip_resample(fay_residual(&m, &[z], &a, &b, &c, &d))? < 1e-10);
    }

    #[test]
    fn torus_theorem(
        tau in cx(-0.5..0.5, 0.8..1.3),
        pts in prop::collection::vec(prop::array::uniform4(cx(-1.0..1.0, -0.3..0.3)), 1..8),
        zs in prop::collection::vec(cx(-0.5..0.5, -0.2..0.2), 8),
    ) {
        let m = make_torus(tau).unwrap();
        let pick = |i: usize| pts.iter().map(|p| SurfacePoint::Torus(p[i])).collect::<Vec<_>>();
        let cfg = SummandConfig { z: zs[..pts.len()].iter().map(|z| vec![*z]).collect(), a: pick(0), b: pick(1), c: pick(2), d: pick(3) };
        let pair = skip_resample(theorem_sum_pair(&m, &cfg))?;
        prop_assert!(pair.residual() < 1e-9);
    }
}
