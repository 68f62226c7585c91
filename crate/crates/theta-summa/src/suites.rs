//! Randomized verification suites, one per identity.

use std::borrow::Cow;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};
use theta_summa_core::ehs::{
    companion_shift_residual, frenkel_turaev_pair, period_shift_residual, sum_8e7_pair, total_ellipticity_residual,
    SumForm, VwpSpec,
};
use theta_summa_core::jacobian::{fay_residual, make_hyperelliptic2_with, make_torus, SurfaceModel};
use theta_summa_core::kernel::{
    modular_sqrt, psl2_act, theta1, theta_short, theta_short_parts, ModularPair, Nome, Theta1Route,
};
use theta_summa_core::residual::relative;
use theta_summa_core::riemann::{
    gamma12_validate, quasi_period_residual, sp_mod_ratio, theta_g, Characteristic, PeriodMatrix, QuasiDirection,
};
use theta_summa_core::summation::{
    corollary1_check, corollary2_check, degenerate_sum_check, induction_step_residual, sum2_shift_residual,
    telescope_pair, theorem_sum_pair, Corollary1Input, Corollary2Input, DegenerateMode,
};
use theta_summa_core::{Complex64, Error};

use crate::format::{pair, pairs, FormatError, ModelDoc, ModelRef, PointDoc, SummandDoc};
use crate::report::{Failure, Report};
use crate::sampling::{self as smp, trial_rng, trial_seed};

pub const DEFAULT_SEED: u64 = 20240601;
pub const DEFAULT_BRANCH_POINTS: [f64; 6] = [-5.0, -3.0, -1.0, 1.0, 3.0, 5.0];
/// Resamples allowed per trial before it counts as failed.
pub const RESAMPLE_BUDGET: usize = 100;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Identity {
    Funrel,
    Quasi,
    Modular,
    Ft,
    E87,
    TotalElliptic,
    Per,
    Spmod,
    Fay,
    Theorem,
    Sum2,
    Sum3,
    Cor1,
    Cor2,
    Telescope,
}

impl Identity {
    pub const ALL: [Identity; 15] = [
        Identity::Funrel,
        Identity::Quasi,
        Identity::Modular,
        Identity::Ft,
        Identity::E87,
        Identity::TotalElliptic,
        Identity::Per,
        Identity::Spmod,
        Identity::Fay,
        Identity::Theorem,
        Identity::Sum2,
        Identity::Sum3,
        Identity::Cor1,
        Identity::Cor2,
        Identity::Telescope,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Identity::Funrel => "funrel",
            Identity::Quasi => "quasi",
            Identity::Modular => "modular",
            Identity::Ft => "ft",
            Identity::E87 => "e87",
            Identity::TotalElliptic => "total_elliptic",
            Identity::Per => "per",
            Identity::Spmod => "spmod",
            Identity::Fay => "fay",
            Identity::Theorem => "theorem",
            Identity::Sum2 => "sum2",
            Identity::Sum3 => "sum3",
            Identity::Cor1 => "cor1",
            Identity::Cor2 => "cor2",
            Identity::Telescope => "telescope",
        }
    }

    /// Runs on a surface (torus or genus-2 curve) chosen by `--genus`.
    pub fn on_surface(self) -> bool {
        matches!(
            self,
            Identity::Fay | Identity::Theorem | Identity::Sum2 | Identity::Sum3 | Identity::Cor1 | Identity::Cor2
        )
    }

    /// Uses `--genus` at all.
    pub fn uses_genus(self) -> bool {
        self.on_surface() || matches!(self, Identity::Per | Identity::Spmod)
    }

    pub fn default_trials(self, genus: usize) -> usize {
        let g2 = genus > 1;
        match self {
            Identity::Funrel | Identity::Quasi => 200,
            Identity::Modular | Identity::Ft | Identity::E87 | Identity::Per => 100,
            Identity::TotalElliptic => 50,
            Identity::Spmod => 20,
            Identity::Fay => {
                if g2 {
                    50
                } else {
                    200
                }
            }
            Identity::Theorem => {
                if g2 {
                    25
                } else {
                    100
                }
            }
            Identity::Sum2 | Identity::Sum3 | Identity::Cor1 | Identity::Cor2 => {
                if g2 {
                    25
                } else {
                    50
                }
            }
            Identity::Telescope => 500,
        }
    }

    pub fn default_tol(self, genus: usize) -> f64 {
        match self {
            Identity::Telescope => 1e-13,
            Identity::Fay if genus > 1 => 1e-6,
            s if s.on_surface() && genus > 1 => 1e-5,
            Identity::Theorem | Identity::Sum2 | Identity::Sum3 | Identity::Cor1 | Identity::Cor2 => 1e-9,
            Identity::TotalElliptic | Identity::Spmod => 1e-9,
            _ => 1e-10,
        }
    }

    /// Largest series length `n`; trial `i` uses `n = i mod (n_max + 1)`.
    pub fn default_n_max(self, genus: usize) -> Option<usize> {
        let g2 = genus > 1;
        match self {
            Identity::Ft => Some(8),
            Identity::E87 => Some(10),
            Identity::Theorem => Some(if g2 { 4 } else { 10 }),
            Identity::Sum2 | Identity::Sum3 => Some(if g2 { 3 } else { 5 }),
            Identity::Cor1 => Some(if g2 { 3 } else { 4 }),
            Identity::Cor2 => Some(if g2 { 3 } else { 6 }),
            Identity::Telescope => Some(19),
            _ => None,
        }
    }

    fn min_n(self) -> usize {
        if self == Identity::Cor2 {
            1
        } else {
            0
        }
    }
}

impl fmt::Display for Identity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Identity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Identity::ALL.into_iter().find(|i| i.name() == s).ok_or_else(|| format!("unknown identity {s:?}"))
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub seed: u64,
    pub trials: Option<usize>,
    pub tol: Option<f64>,
    pub genus: usize,
    pub n_max: Option<usize>,
    /// Truncation tolerance of the theta brackets on surfaces.
    pub theta_tol: Option<f64>,
    /// Starting quadrature nodes for the genus-2 periods.
    pub nodes: usize,
    /// Fixed surface replacing the random torus or the default genus-2 curve.
    pub model: Option<ModelDoc>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: DEFAULT_SEED,
            trials: None,
            tol: None,
            genus: 1,
            n_max: None,
            theta_tol: None,
            nodes: theta_summa_core::jacobian::DEFAULT_NODES,
            model: None,
        }
    }
}

/// State shared by all trials of a run.
pub struct Context {
    genus: usize,
    theta_tol: Option<f64>,
    fixed: Option<(SurfaceModel, ModelDoc)>,
}

impl Context {
    pub fn new(cfg: &RunConfig) -> Result<Self, FormatError> {
        let fixed = match (&cfg.model, cfg.genus) {
            (Some(doc), _) => Some((doc.to_model()?, doc.quadrature_nodes.unwrap_or(cfg.nodes))),
            (None, 1) => None,
            (None, 2) => Some((make_hyperelliptic2_with(DEFAULT_BRANCH_POINTS, cfg.nodes)?, cfg.nodes)),
            (None, g) => {
                return Err(FormatError::Parse(format!("no built-in surface for genus {g}; pass a model file")))
            }
        };
        let fixed = match fixed {
            Some((m, nodes)) => {
                let m = match cfg.theta_tol {
                    Some(t) => m.with_theta_tol(t)?,
                    None => m,
                };
                let doc = ModelDoc::from_model(&m, nodes);
                Some((m, doc))
            }
            None => None,
        };
        let genus = fixed.as_ref().map_or(cfg.genus, |(m, _)| m.genus());
        Ok(Context { genus, theta_tol: cfg.theta_tol, fixed })
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    fn surface(&self, rng: &mut ChaCha8Rng) -> Result<(Cow<'_, SurfaceModel>, ModelDoc), Error> {
        if let Some((m, doc)) = &self.fixed {
            return Ok((Cow::Borrowed(m), doc.clone()));
        }
        let mut m = make_torus(smp::torus_tau(rng))?;
        if let Some(t) = self.theta_tol {
            m = m.with_theta_tol(t)?;
        }
        let doc = ModelDoc::from_model(&m, 0);
        Ok((Cow::Owned(m), doc))
    }
}

/// One sampled attempt: its inputs and either a residual or an error.
struct Sample {
    inputs: Value,
    residual: Result<f64, Error>,
}

impl Sample {
    fn of(inputs: Value, residual: Result<f64, Error>) -> Self {
        Sample { inputs, residual }
    }
}

fn cj(z: Complex64) -> Value {
    json!(pair(z))
}

fn max_of(values: impl IntoIterator<Item = Result<f64, Error>>) -> Result<f64, Error> {
    let mut m = 0.0f64;
    for v in values {
        let v = v?;
        // NaN must survive the max.
        m = if v.is_nan() || m.is_nan() { f64::NAN } else { m.max(v) };
    }
    Ok(m)
}

fn near_zero(what: &str) -> Error {
    Error::Resample(format!("{what} is near a zero at the sample point"))
}

fn funrel(rng: &mut ChaCha8Rng) -> Sample {
    let a = smp::annulus(rng);
    let p = smp::complex_nome(rng);
    let inputs = json!({"a": cj(a), "p": cj(p)});
    let run = || {
        let p = Nome::new(p)?;
        if theta_short_parts(a, p)?.0.norm() < 1e-8 {
            return Err(near_zero("theta(a;p)"));
        }
        let th = theta_short(a, p)?;
        let target = -th / a;
        Ok(relative(theta_short(p.value() * a, p)?, target).max(relative(theta_short(1.0 / a, p)?, target)))
    };
    Sample::of(inputs, run())
}

fn theta1_inputs(rng: &mut ChaCha8Rng) -> (Complex64, Complex64, Complex64, Value) {
    let (sigma, tau) = smp::sigma_tau(rng);
    let u = smp::cx(rng, (-1.0, 1.0), (-0.3, 0.3));
    (sigma, tau, u, json!({"sigma": cj(sigma), "tau": cj(tau), "u": cj(u)}))
}

fn quasi(rng: &mut ChaCha8Rng) -> Sample {
    let (sigma, tau, u, inputs) = theta1_inputs(rng);
    let run = || {
        let b = ModularPair::new(sigma, tau)?;
        let mut r = Vec::new();
        let series = theta1(u, &b, Theta1Route::Series);
        if series.norm() < 1e-4 {
            return Err(near_zero("theta1"));
        }
        for route in [Theta1Route::Series, Theta1Route::Product] {
            let base = theta1(u, &b, route);
            r.push(Ok(relative(theta1(u + 1.0 / sigma, &b, route), -base)));
            let factor = -(-PI * I * tau - 2.0 * PI * I * sigma * u).exp();
            r.push(Ok(relative(theta1(u + tau / sigma, &b, route), factor * base)));
        }
        r.push(Ok(relative(theta1(u, &b, Theta1Route::Product), series)));
        max_of(r)
    };
    Sample::of(inputs, run())
}

fn modular(rng: &mut ChaCha8Rng) -> Sample {
    let (sigma, tau, u, inputs) = theta1_inputs(rng);
    let run = || {
        let b = ModularPair::new(sigma, tau)?;
        let base = theta1(u, &b, Theta1Route::Series);
        if base.norm() < 1e-4 {
            return Err(near_zero("theta1"));
        }
        let t = psl2_act(&b, [[1, 1], [0, 1]])?;
        let rt = relative(theta1(u, &t, Theta1Route::Series), (PI * I / 4.0).exp() * base);
        let s = psl2_act(&b, [[0, -1], [1, 0]])?;
        let rhs = -I * modular_sqrt(tau) * (PI * I * sigma * sigma * u * u / tau).exp() * base;
        Ok(rt.max(relative(theta1(u, &s, Theta1Route::Series), rhs)))
    };
    Sample::of(inputs, run())
}

fn ft(rng: &mut ChaCha8Rng, n: usize) -> Sample {
    let t = smp::params::<4>(rng);
    let (q, p) = (smp::base_q(rng), smp::real_nome(rng));
    let inputs = json!({"t": pairs(&t), "q": cj(q), "p": p, "n": n});
    let run = || {
        let (l, r) = frenkel_turaev_pair(t[0], t[1], t[2], t[3], n, q, Nome::real(p)?)?;
        Ok(relative(l, r))
    };
    Sample::of(inputs, run())
}

fn e87(rng: &mut ChaCha8Rng, n: usize) -> Sample {
    let t = smp::params::<3>(rng);
    let (q, p) = (smp::base_q(rng), smp::real_nome(rng));
    let inputs = json!({"t": pairs(&t), "q": cj(q), "p": p, "n": n});
    let run = || {
        let bases = ModularPair::from_nomes(q, Complex64::new(p, 0.0))?;
        let m = sum_8e7_pair(t[0], t[1], t[2], n, &bases, SumForm::Multiplicative)?;
        let a = sum_8e7_pair(t[0], t[1], t[2], n, &bases, SumForm::Additive)?;
        max_of([Ok(relative(m.0, m.1)), Ok(relative(a.0, a.1)), Ok(relative(m.0, a.0))])
    };
    Sample::of(inputs, run())
}

const ELLIPTIC_SAMPLES: [Complex64; 3] =
    [Complex64::new(0.0, 0.0), Complex64::new(1.3, 0.1), Complex64::new(2.7, -0.2)];

fn total_elliptic(rng: &mut ChaCha8Rng) -> Sample {
    let t0 = smp::param(rng);
    let len = 2 * rng.gen_range(1..=3);
    let head: Vec<Complex64> = (0..len).map(|_| smp::param(rng)).collect();
    let (z, q, p) = (smp::param(rng), smp::base_q(rng), smp::real_nome(rng));
    let j = rng.gen_range(0..len);
    let inputs = json!({"t0": cj(t0), "head": pairs(&head), "z": cj(z), "q": cj(q), "p": p, "shifted": j});
    let run = || {
        let spec = VwpSpec::balanced(t0, head.clone(), z, q, Nome::real(p)?)?;
        let r = max_of([
            total_ellipticity_residual(&spec, &ELLIPTIC_SAMPLES),
            companion_shift_residual(&spec, j, &ELLIPTIC_SAMPLES),
            period_shift_residual(&spec, &ELLIPTIC_SAMPLES),
        ]);
        match r {
            Err(Error::Pole(_)) => Err(near_zero("term ratio")),
            r => r,
        }
    };
    Sample::of(inputs, run())
}

fn char_json(ch: &Characteristic) -> Value {
    serde_json::to_value(crate::format::CharacteristicDoc::from_char(ch)).expect("serializes")
}

fn omega_json(om: &PeriodMatrix) -> Value {
    json!(pairs(om.omega().as_slice()))
}

fn per(rng: &mut ChaCha8Rng, g: usize) -> Sample {
    let om = smp::period_matrix(rng, g);
    let ch = smp::half_char(rng, g);
    let u = smp::u_vec(rng, g);
    let sigma = smp::cx(rng, (0.3, 1.5), (-0.2, 0.2));
    let inputs =
        json!({"Omega": omega_json(&om), "characteristic": char_json(&ch), "u": pairs(&u), "sigma": cj(sigma)});
    let run = || {
        let mut r = Vec::new();
        for k in 0..g {
            for dir in [QuasiDirection::Lattice(k), QuasiDirection::Period(k)] {
                r.push(quasi_period_residual(&u, &om, &ch, dir));
            }
        }
        if g == 1 {
            // Genus one with characteristic (1/2, 1/2) is −θ₁.
            let tau = om.omega()[(0, 0)];
            let b = ModularPair::new(sigma, tau)?;
            let t1 = theta1(u[0], &b, Theta1Route::Series);
            if t1.norm() > 1e-4 {
                let v = theta_g(&[sigma * u[0]], &om, &Characteristic::half(1, 1, 1), 1e-16)?;
                r.push(Ok(relative(v, -t1)));
            }
        }
        max_of(r)
    };
    Sample::of(inputs, run())
}

fn spmod(rng: &mut ChaCha8Rng, g: usize) -> Sample {
    let gamma = smp::gamma12_word(rng, g);
    let om = smp::period_matrix(rng, g);
    let ch = smp::half_char(rng, g);
    let (u1, u2) = (smp::u_vec(rng, g), smp::u_vec(rng, g));
    let inputs = json!({
        "gamma": gamma.as_slice(),
        "Omega": omega_json(&om),
        "characteristic": char_json(&ch),
        "u": [pairs(&u1), pairs(&u2)],
    });
    let run = || {
        if !gamma12_validate(&gamma) {
            return Err(Error::Precondition("sampled matrix left the theta group".into()));
        }
        let rho = sp_mod_ratio(&gamma, &om, &u1, &ch)?;
        let rho2 = sp_mod_ratio(&gamma, &om, &u2, &ch)?;
        max_of([Ok((rho.norm() - 1.0).abs()), Ok((rho.powi(8) - 1.0).norm()), Ok((rho - rho2).norm())])
    };
    Sample::of(inputs, run())
}

fn fay(ctx: &Context, rng: &mut ChaCha8Rng) -> Sample {
    let (model, doc) = match ctx.surface(rng) {
        Ok(m) => m,
        Err(e) => return Sample::of(Value::Null, Err(e)),
    };
    let z = smp::z_vec(rng, model.genus());
    let p = smp::points(rng, &model, 4);
    let inputs = json!({
        "model": doc,
        "z": pairs(&z),
        "points": p.iter().map(PointDoc::from).collect::<Vec<_>>(),
    });
    Sample::of(inputs, fay_residual(&model, &z, &p[0], &p[1], &p[2], &p[3]))
}

fn summand(ctx: &Context, rng: &mut ChaCha8Rng, id: Identity, n: usize) -> Sample {
    let (model, doc) = match ctx.surface(rng) {
        Ok(m) => m,
        Err(e) => return Sample::of(Value::Null, Err(e)),
    };
    let model = model.as_ref();
    let cfg = smp::summand_config(rng, model, n);
    let mut inputs = serde_json::to_value(SummandDoc::new(ModelRef::Inline(Box::new(doc)), &cfg)).expect("serializes");
    let residual = match id {
        Identity::Theorem => {
            max_of([theorem_sum_pair(model, &cfg).map(|p| p.residual()), induction_step_residual(model, &cfg)])
        }
        Identity::Sum3 => degenerate_sum_check(model, &cfg, DegenerateMode::Sum3),
        _ => {
            let g = model.genus();
            let k = rng.gen_range(0..=n);
            let j = rng.gen_range(0..g);
            let shift: Vec<Complex64> = if rng.gen_bool(0.5) {
                (0..g).map(|i| if i == j { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) }).collect()
            } else {
                (0..g).map(|i| model.period_matrix().omega()[(i, j)]).collect()
            };
            inputs["shift"] = json!({"k": k, "vector": pairs(&shift)});
            max_of([
                degenerate_sum_check(model, &cfg, DegenerateMode::Sum2),
                sum2_shift_residual(model, &cfg, k, &shift),
            ])
        }
    };
    Sample::of(inputs, residual)
}

fn cor1(ctx: &Context, rng: &mut ChaCha8Rng, n: usize) -> Sample {
    let (model, doc) = match ctx.surface(rng) {
        Ok(m) => m,
        Err(e) => return Sample::of(Value::Null, Err(e)),
    };
    let model = model.as_ref();
    let input = Corollary1Input {
        u0: smp::z_vec(rng, model.genus()),
        x: smp::points(rng, model, n + 1),
        a: smp::points(rng, model, n + 1),
        d0: smp::surface_point(rng, model),
    };
    let pts = |v: &[theta_summa_core::jacobian::SurfacePoint]| v.iter().map(PointDoc::from).collect::<Vec<_>>();
    let inputs = json!({
        "model": doc,
        "u0": pairs(&input.u0),
        "x": pts(&input.x),
        "a": pts(&input.a),
        "d0": PointDoc::from(&input.d0),
    });
    let residual =
        corollary1_check(model, &input).map(|o| o.residual().max(o.balance_defect).max(o.well_poised_defect));
    Sample::of(inputs, residual)
}

fn cor2(ctx: &Context, rng: &mut ChaCha8Rng, n: usize) -> Sample {
    let (model, doc) = match ctx.surface(rng) {
        Ok(m) => m,
        Err(e) => return Sample::of(Value::Null, Err(e)),
    };
    let model = model.as_ref();
    let input = Corollary2Input {
        z0: smp::z_vec(rng, model.genus()),
        a: smp::surface_point(rng, model),
        c: smp::surface_point(rng, model),
        x: smp::points(rng, model, n + 1),
    };
    let inputs = json!({
        "model": doc,
        "z0": pairs(&input.z0),
        "a": PointDoc::from(&input.a),
        "c": PointDoc::from(&input.c),
        "x": input.x.iter().map(PointDoc::from).collect::<Vec<_>>(),
    });
    Sample::of(inputs, corollary2_check(model, &input).map(|o| o.residual()))
}

fn telescope(rng: &mut ChaCha8Rng, n: usize) -> Sample {
    let x: Vec<Complex64> = (0..=n).map(|_| smp::cx(rng, (-2.0, 2.0), (-2.0, 2.0))).collect();
    let y: Vec<Complex64> = (0..=n).map(|_| smp::cx(rng, (-2.0, 2.0), (-2.0, 2.0))).collect();
    let inputs = json!({"x": pairs(&x), "y": pairs(&y)});
    Sample::of(inputs, telescope_pair(&x, &y).map(|p| p.residual()))
}

fn sample(id: Identity, ctx: &Context, rng: &mut ChaCha8Rng, n: usize) -> Sample {
    let g = ctx.genus;
    match id {
        Identity::Funrel => funrel(rng),
        Identity::Quasi => quasi(rng),
        Identity::Modular => modular(rng),
        Identity::Ft => ft(rng, n),
        Identity::E87 => e87(rng, n),
        Identity::TotalElliptic => total_elliptic(rng),
        Identity::Per => per(rng, g),
        Identity::Spmod => spmod(rng, g),
        Identity::Fay => fay(ctx, rng),
        Identity::Theorem | Identity::Sum2 | Identity::Sum3 => summand(ctx, rng, id, n),
        Identity::Cor1 => cor1(ctx, rng, n),
        Identity::Cor2 => cor2(ctx, rng, n),
        Identity::Telescope => telescope(rng, n),
    }
}

struct TrialOutcome {
    trial: usize,
    seed: u64,
    inputs: Value,
    residual: Result<f64, String>,
    resamples: usize,
}

fn run_trial(id: Identity, ctx: &Context, seed: u64, trial: usize, n: usize) -> TrialOutcome {
    let tseed = trial_seed(seed, id.name(), trial);
    let mut rng = trial_rng(seed, id.name(), trial);
    let mut resamples = 0;
    loop {
        let s = sample(id, ctx, &mut rng, n);
        let residual = match s.residual {
            Err(e) if e.is_resample() => {
                if resamples < RESAMPLE_BUDGET {
                    resamples += 1;
                    continue;
                }
                Err(format!("resample budget exhausted: {e}"))
            }
            Err(e) => Err(e.to_string()),
            Ok(r) => Ok(r),
        };
        return TrialOutcome { trial, seed: tseed, inputs: s.inputs, residual, resamples };
    }
}

/// Runs one identity with a prepared context.
pub fn run_with(id: Identity, cfg: &RunConfig, ctx: &Context) -> Report {
    let start = Instant::now();
    let genus = if id.uses_genus() { ctx.genus } else { 1 };
    let trials = cfg.trials.unwrap_or_else(|| id.default_trials(genus));
    let tol = cfg.tol.unwrap_or_else(|| id.default_tol(genus));
    let n_max = id.default_n_max(genus).map(|d| cfg.n_max.unwrap_or(d).max(id.min_n()));
    let n_of = |trial: usize| match n_max {
        Some(m) => id.min_n() + trial % (m - id.min_n() + 1),
        None => 0,
    };
    let outcomes: Vec<TrialOutcome> =
        (0..trials).into_par_iter().map(|t| run_trial(id, ctx, cfg.seed, t, n_of(t))).collect();

    let mut failures = Vec::new();
    let (mut max, mut sum, mut errored, mut resamples) = (0.0f64, 0.0, false, 0);
    for o in outcomes {
        resamples += o.resamples;
        let (residual, error) = match o.residual {
            Ok(r) => {
                max = if r.is_nan() || max.is_nan() { f64::NAN } else { max.max(r) };
                sum += r;
                (Some(r), None)
            }
            Err(e) => {
                errored = true;
                (None, Some(e))
            }
        };
        let failed = error.is_some() || residual.is_some_and(|r| r.is_nan() || r > tol);
        if failed {
            failures.push(Failure { trial: o.trial, seed: o.seed, inputs: o.inputs, residual, error });
        }
    }
    failures.sort_by_key(|f| (f.seed, f.trial));
    let finite = |x: f64| (!errored && x.is_finite()).then_some(x);
    Report {
        schema: crate::format::SCHEMA,
        identity: id.name().into(),
        genus,
        seed: cfg.seed,
        trials,
        n_max,
        tol,
        max_residual: finite(max),
        mean_residual: if trials == 0 { Some(0.0) } else { finite(sum / trials as f64) },
        resamples,
        passed: failures.is_empty(),
        failures,
        wall_time: start.elapsed().as_secs_f64(),
    }
}

pub fn run(id: Identity, cfg: &RunConfig) -> Result<Report, FormatError> {
    let ctx = Context::new(cfg)?;
    Ok(run_with(id, cfg, &ctx))
}

/// Every identity with one shared context.
pub fn run_all(cfg: &RunConfig) -> Result<Vec<Report>, FormatError> {
    let ctx = Context::new(cfg)?;
    Ok(Identity::ALL.iter().map(|&id| run_with(id, cfg, &ctx)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for id in Identity::ALL {
            assert_eq!(id.name().parse::<Identity>().unwrap(), id);
        }
        assert!("all".parse::<Identity>().is_err());
    }

    #[test]
    fn n_cycles_through_range() {
        let cfg = RunConfig { trials: Some(7), ..RunConfig::default() };
        let r = run(Identity::Cor2, &RunConfig { n_max: Some(2), ..cfg }).unwrap();
        assert_eq!(r.n_max, Some(2));
        assert!(r.passed, "{r:?}");
    }
}
