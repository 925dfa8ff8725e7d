use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use skdv_core::invariants::{
    almost_conservation_run, functional_e, functional_l, interp_bound_check, EnergyVariant,
};
use skdv_core::propagators::{SolverConfig, SystemParams, SystemState};
use skdv_core::spectral::{ComplexField, Grid, MultiplierSpec, RealField};

/// Trigonometric polynomial with coefficients `(k, c_k)`.
#[derive(Clone)]
struct Trig(Vec<(i64, Complex64)>);

impl Trig {
    fn random(rng: &mut impl Rng, kmax: i64, real: bool) -> Self {
        let mut terms = Vec::new();
        for k in 0..=kmax {
            let c = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
                / (1.0 + (k * k) as f64);
            if real {
                let c = if k == 0 { Complex64::new(c.re, 0.0) } else { c };
                terms.push((k, c));
                if k > 0 {
                    terms.push((-k, c.conj()));
                }
            } else {
                terms.push((k, c));
                if k > 0 {
                    let d = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                    terms.push((-k, d / (1.0 + (k * k) as f64)));
                }
            }
        }
        Self(terms)
    }

    /// `sum (i xi)^d m(xi) c_k exp(i xi x)`.
    fn eval(&self, x: f64, dk: f64, d: i32, m: &MultiplierSpec) -> Complex64 {
        self.0
            .iter()
            .map(|&(k, c)| {
                let xi = k as f64 * dk;
                Complex64::new(0.0, xi).powi(d) * m.symbol(xi) * c * Complex64::from_polar(1.0, xi * x)
            })
            .sum()
    }

    fn complex_field(&self, g: Grid) -> ComplexField {
        let id = MultiplierSpec::identity_on(&g, 0.0).unwrap();
        ComplexField::from_fn(g, |x| self.eval(x, g.frequency_spacing(), 0, &id))
    }

    fn real_field(&self, g: Grid) -> RealField {
        let id = MultiplierSpec::identity_on(&g, 0.0).unwrap();
        RealField::from_fn(g, |x| self.eval(x, g.frequency_spacing(), 0, &id).re)
    }
}

fn setup(seed: u64) -> (Trig, Trig) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (Trig::random(&mut rng, 12, false), Trig::random(&mut rng, 12, true))
}

#[test]
fn momentum_matches_parseval_closed_form() {
    let g = Grid::new(128, 4.0).unwrap();
    let p = SystemParams::couplings(0.8, 1.0, 1.7).unwrap();
    let m = MultiplierSpec::new(2.0, 0.4).unwrap();
    for seed in 0..5 {
        let (a, b) = setup(seed);
        let got = functional_l(&a.complex_field(g), &b.real_field(g), &p, &m).unwrap();
        // |f|^2 = 2L sum |c_k|^2 and int Im(f conj f_x) = -2L sum xi_k |c_k|^2
        let dk = g.frequency_spacing();
        let v2: f64 = b.0.iter().map(|&(k, c)| (m.symbol(k as f64 * dk) * c).norm_sqr()).sum();
        let mom: f64 = a
            .0
            .iter()
            .map(|&(k, c)| -(k as f64 * dk) * (m.symbol(k as f64 * dk) * c).norm_sqr())
            .sum();
        let want = g.length() * (p.alpha * v2 + 2.0 * p.gamma * mom);
        assert!((got - want).abs() < 1e-10 * (1.0 + want.abs()), "{got} vs {want}");
    }
}

#[test]
fn energy_matches_direct_quadrature() {
    let g = Grid::new(128, 4.0).unwrap();
    let p = SystemParams::couplings(0.8, 0.6, 1.7).unwrap();
    let m = MultiplierSpec::new(2.0, 0.4).unwrap();
    let dk = g.frequency_spacing();
    for seed in 10..13 {
        let (a, b) = setup(seed);
        let (u, v) = (a.complex_field(g), b.real_field(g));
        for variant in [EnergyVariant::U4, EnergyVariant::V4] {
            let got = functional_e(&u, &v, &p, &m, variant).unwrap();
            // finely sampled rectangle rule, exact for these trigonometric polynomials
            let fine = 1024;
            let h = g.length() / fine as f64;
            let mut want = 0.0;
            for j in 0..fine {
                let x = -g.half_length() + j as f64 * h;
                let iu = a.eval(x, dk, 0, &m);
                let iux = a.eval(x, dk, 1, &m);
                let iv = b.eval(x, dk, 0, &m).re;
                let ivx = b.eval(x, dk, 1, &m).re;
                let q = match variant {
                    EnergyVariant::U4 => iu.norm_sqr().powi(2),
                    EnergyVariant::V4 => iv.powi(4),
                };
                want += p.alpha * p.gamma * iv * iu.norm_sqr()
                    + p.gamma * iux.norm_sqr()
                    + 0.5 * p.alpha * ivx * ivx
                    - p.alpha / 6.0 * iv.powi(3)
                    + 0.5 * p.beta * p.gamma * q;
            }
            want *= h;
            assert!((got - want).abs() < 1e-10 * (1.0 + want.abs()), "{variant:?}: {got} vs {want}");
        }
    }
}

fn max_interp_ratio(nx: usize, states: &[(Trig, Trig)], p: &SystemParams, m: &MultiplierSpec) -> f64 {
    let g = Grid::new(nx, 4.0).unwrap();
    states
        .iter()
        .map(|(a, b)| {
            let (lhs, rhs) = interp_bound_check(&a.complex_field(g), &b.real_field(g), p, m).unwrap();
            lhs / rhs
        })
        .fold(0.0, f64::max)
}

#[test]
fn interpolation_ratio_is_resolution_independent() {
    let p = SystemParams::couplings(1.0, 1.0, 1.0).unwrap();
    let m = MultiplierSpec::new(4.0, 0.6).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let states: Vec<(Trig, Trig)> = (0..100)
        .map(|_| {
            let scale = 10f64.powf(rng.random_range(-1.0..1.0));
            let (a, b) = (Trig::random(&mut rng, 10, false), Trig::random(&mut rng, 10, true));
            let s = |t: Trig| Trig(t.0.into_iter().map(|(k, c)| (k, c * scale)).collect());
            (s(a), s(b))
        })
        .collect();
    let coarse = max_interp_ratio(128, &states, &p, &m);
    let fine = max_interp_ratio(256, &states, &p, &m);
    assert!(coarse.is_finite() && coarse > 0.0);
    assert!((coarse - fine).abs() < 1e-8 * coarse, "{coarse} vs {fine}");
}

#[test]
fn truncation_removes_aliased_modes_before_products() {
    // a mode above the 2/3 band does not contribute
    let g = Grid::new(64, 4.0).unwrap();
    let p = SystemParams::couplings(1.0, 1.0, 1.0).unwrap();
    let m = MultiplierSpec::identity_on(&g, 0.5).unwrap();
    let k = g.dealias_cutoff() + 2;
    let v = RealField::from_fn(g, |x| (k as f64 * g.frequency_spacing() * x).cos());
    let u = ComplexField::zeros(g);
    assert!(functional_l(&u, &v, &p, &m).unwrap().abs() < 1e-12);
}

#[test]
fn conservation_run_reports_every_cutoff() {
    let g = Grid::new(128, 8.0 * std::f64::consts::PI).unwrap();
    let p = SystemParams::new(1.0, 1.0, 1.0, 0.6, 0.0).unwrap();
    let u = ComplexField::from_fn(g, |x| Complex64::new((-x * x / 4.0).exp(), 0.0));
    let v = RealField::from_fn(g, |x| 0.5 * (-(x - 1.0).powi(2) / 4.0).exp());
    let data = SystemState::new(u, v, 0.0).unwrap();
    let cfg = SolverConfig::new(1e-3, true, 10).unwrap();
    let cutoffs: Vec<MultiplierSpec> = [2.0, 4.0, 8.0, 1e3]
        .iter()
        .map(|&n| MultiplierSpec::new(n, 0.6).unwrap())
        .collect();
    let (traj, reports) =
        almost_conservation_run(&data, &p, &cutoffs, 0.2, &cfg, EnergyVariant::U4).unwrap();
    assert_eq!(reports.len(), 4);
    for r in &reports {
        assert_eq!(r.t, traj.times);
        assert_eq!(r.drift_e[0], 0.0);
    }
    // with the identity multiplier the functionals are conserved
    let id = &reports[3];
    assert!(id.relative_drift_e() < 1e-8, "{}", id.relative_drift_e());
    assert!(id.relative_drift_l() < 1e-8, "{}", id.relative_drift_l());
}

#[test]
fn conservation_run_needs_same_sign_couplings() {
    let g = Grid::new(64, 5.0).unwrap();
    let p = SystemParams::new(1.0, 1.0, -1.0, 0.6, 0.0).unwrap();
    let data = SystemState::new(ComplexField::zeros(g), RealField::zeros(g), 0.0).unwrap();
    let cfg = SolverConfig::new(1e-3, true, 1).unwrap();
    let m = [MultiplierSpec::new(4.0, 0.5).unwrap()];
    assert!(almost_conservation_run(&data, &p, &m, 0.1, &cfg, EnergyVariant::U4).is_err());
}
