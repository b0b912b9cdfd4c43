mod common;

use std::f64::consts::PI;

use common::*;
use esscirc::bases::{bessel_ratio, BesselRatios};
use esscirc::moments::{sin_power_coeffs, sin_power_coeffs_closed_form};
use esscirc::skewing::{skewing_cdf, skewing_log_cdf, skewing_pdf, LOG_FLOOR};
use esscirc::{
    centered_moments, circular_skewness, log_likelihood, moments, skewness_range, BaseFamily,
    BaseModel, CircularBase, EssModel, SkewingPolynomial,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn ess(family: BaseFamily, mu: f64, c: f64, lambda: f64, m: usize) -> EssModel {
    EssModel::from_family(family, mu, c, lambda, m).unwrap()
}

#[test]
fn skewing_cdf_matches_integrated_pdf() {
    for m in 0..=10 {
        let p = SkewingPolynomial::new(m).unwrap();
        let mut worst: f64 = 0.0;
        for i in 0..1000 {
            let x = -1.0 + 2.0 * (i as f64 + 0.5) / 1000.0;
            let q = simpson(|t| p.pdf(t).unwrap(), -1.0, x, 2000);
            worst = worst.max((p.cdf(x).unwrap() - q).abs());
        }
        assert!(worst < 1e-10, "m={m}: {worst:e}");
    }
}

#[test]
fn skewing_examples() {
    assert_eq!(skewing_pdf(0, 0.3).unwrap(), 0.5);
    assert_eq!(skewing_pdf(1, 0.0).unwrap(), 0.75);
    assert_eq!(skewing_pdf(2, 1.0).unwrap(), 0.0);
    assert_eq!(skewing_cdf(0, 0.0).unwrap(), 0.5);
    let g1 = simpson(|t| skewing_pdf(1, t).unwrap(), -1.0, 0.5, 1000);
    assert!((skewing_cdf(1, 0.5).unwrap() - 0.84375).abs() < 1e-15);
    assert!((g1 - 0.84375).abs() < 1e-12);
    let g2 = simpson(|t| skewing_pdf(2, t).unwrap(), -1.0, 0.5, 1000);
    assert!((skewing_cdf(2, 0.5).unwrap() - 0.896484375).abs() < 1e-15);
    assert!((g2 - 0.896484375).abs() < 1e-12);
    assert!((skewing_log_cdf(0, 0.0).unwrap() - 0.5f64.ln()).abs() < 1e-15);
    assert_eq!(skewing_log_cdf(1, 1.0).unwrap(), 0.0);
    assert_eq!(skewing_log_cdf(3, -1.0).unwrap(), LOG_FLOOR.ln());
    for m in 0..=6 {
        let total = simpson(|t| skewing_pdf(m, t).unwrap(), -1.0, 1.0, 2000);
        assert!((total - 1.0).abs() < 1e-12, "m={m}");
    }
}

#[test]
fn skewing_is_monotone() {
    for m in 0..=8 {
        let p = SkewingPolynomial::new(m).unwrap();
        let mut prev = p.cdf(-0.9).unwrap();
        for i in 1..2000 {
            let x = -0.9 + 1.8 * i as f64 / 1999.0;
            let v = p.cdf(x).unwrap();
            assert!(v > prev, "m={m} x={x}");
            prev = v;
        }
    }
}

#[test]
fn base_densities_normalize_and_are_symmetric() {
    let bases: Vec<BaseModel> = [0.01, 0.5, 2.0, 8.0, 50.0, 300.0]
        .iter()
        .map(|&k| BaseModel::von_mises(k).unwrap())
        .chain(
            [0.05, 0.3, 0.8, 0.95]
                .iter()
                .map(|&r| BaseModel::wrapped_cauchy(r).unwrap()),
        )
        .collect();
    for b in &bases {
        let total = periodic_integral(|t| b.density(t));
        assert!((total - 1.0).abs() < 1e-10, "{b:?}: {total}");
        for i in 0..50 {
            let t = 0.06 * i as f64;
            assert!((b.density(t) - b.density(-t)).abs() < 1e-14);
        }
        let a1 = b.cosine_moment(1);
        assert!(a1 > 0.0 && a1 < 1.0);
    }
    let wc = BaseModel::wrapped_cauchy(0.8).unwrap();
    let q = periodic_integral(|t| wc.density(t) * t.cos());
    assert!((q - 0.8).abs() < 1e-12);
}

#[test]
fn bessel_ratios_against_series_and_quadrature() {
    for &kappa in &[0.1, 1.0, 2.0, 8.0, 20.0] {
        let i0 = bessel_i_series(0, kappa);
        for p in 0..=30u32 {
            let want = bessel_i_series(p, kappa) / i0;
            let got = bessel_ratio(p as usize, kappa).unwrap();
            assert!(((got - want) / want).abs() < 1e-12, "p={p} kappa={kappa}");
        }
    }
    let vm = BaseModel::von_mises(2.0).unwrap();
    let q = periodic_integral(|t| t.cos() * vm.density(t));
    assert!((bessel_ratio(1, 2.0).unwrap() - q).abs() < 1e-13);
    assert!((q - 0.697775).abs() < 1e-6);
    assert_eq!(bessel_ratio(0, 2.0).unwrap(), 1.0);
    let r25 = bessel_ratio(25, 2.0).unwrap();
    assert!(r25 > 0.0 && r25 < 1e-20);
}

#[test]
fn bessel_recurrence_holds() {
    for &kappa in &[0.3, 2.0, 15.0, 120.0, 500.0] {
        let r = BesselRatios::new(40, kappa).unwrap();
        for p in 1..39i64 {
            let lhs = r.ratio(p - 1).unwrap() - r.ratio(p + 1).unwrap();
            let rhs = 2.0 * p as f64 / kappa * r.ratio(p).unwrap();
            if rhs > 1e-280 {
                assert!(((lhs - rhs) / rhs).abs() < 1e-10, "kappa={kappa} p={p}");
            }
        }
    }
}

#[test]
fn base_samplers_match_their_laws() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let wc = BaseModel::wrapped_cauchy(0.8).unwrap();
    let draws: Vec<f64> = (0..100_000).map(|_| wc.sample(&mut rng)).collect();
    let cdf = NumericCdf::new(|t| wc.density(t), 1 << 16);
    assert!(ks_distance(&draws, |t| cdf.eval(t)) < 0.01);

    let vm = BaseModel::von_mises(2.0).unwrap();
    let draws: Vec<f64> = (0..100_000).map(|_| vm.sample(&mut rng)).collect();
    let n = draws.len() as f64;
    let c: f64 = draws.iter().map(|t| t.cos()).sum();
    let s: f64 = draws.iter().map(|t| t.sin()).sum();
    assert!((c.hypot(s) / n - bessel_ratio(1, 2.0).unwrap()).abs() < 0.01);

    let tight = BaseModel::wrapped_cauchy(0.999).unwrap();
    let draws: Vec<f64> = (0..10_000).map(|_| tight.sample(&mut rng)).collect();
    let c: f64 = draws.iter().map(|t| t.cos()).sum::<f64>() / 10_000.0;
    assert!(c > 0.99);
}

#[test]
fn ess_density_examples() {
    let m = ess(BaseFamily::Wc, 0.0, 0.8, 1.0, 0);
    let want = 2.0 * 0.36 / (2.0 * PI * 1.64);
    assert!((m.density(PI / 2.0) - want).abs() < 1e-15);
    assert!((periodic_integral(|t| m.density(t)) - 1.0).abs() < 1e-9);

    let fig3 = ess(BaseFamily::Vm, 0.0, 8.0, 0.9, 5);
    assert!((periodic_integral(|t| fig3.density(t)) - 1.0).abs() < 1e-9);
    let right = simpson(|t| fig3.density(t), 0.0, PI, 4000);
    let left = simpson(|t| fig3.density(t), -PI, 0.0, 4000);
    assert!(right - left > 0.1, "left {left} right {right}");
}

#[test]
fn reflection_duality() {
    for (fam, c) in [(BaseFamily::Vm, 3.0), (BaseFamily::Wc, 0.7)] {
        for m in 0..4 {
            let a = ess(fam, 0.4, c, 0.6, m);
            let b = ess(fam, 0.4, c, -0.6, m);
            for i in 0..60 {
                let t = -PI + 0.1 * i as f64;
                assert!((a.density(t) - b.density(0.8 - t)).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn sin_power_examples() {
    assert_eq!(sin_power_coeffs(1).unwrap().coeffs(), &[1.0]);
    assert_eq!(sin_power_coeffs(3).unwrap().coeffs(), &[-0.25, 0.75]);
    let five = sin_power_coeffs(5).unwrap();
    let worst = (0..1000)
        .map(|i| -PI + 2.0 * PI * i as f64 / 1000.0)
        .map(|t| (t.sin().powi(5) - five.evaluate(t)).abs())
        .fold(0.0, f64::max);
    assert!(worst < 1e-12);
    for n in (1..=25).step_by(2) {
        let a = sin_power_coeffs(n).unwrap();
        let b = sin_power_coeffs_closed_form(n).unwrap();
        assert_eq!(a.exact_coeffs(), b.exact_coeffs(), "n={n}");
        let lead = if (n - 1) / 2 % 2 == 0 { 1.0 } else { -1.0 } / 2f64.powi(n as i32 - 1);
        assert_eq!(a.coeffs()[0], lead);
    }
    assert!(sin_power_coeffs(4).is_err());
    assert!(sin_power_coeffs(27).is_err());
}

#[test]
fn sine_moment_examples() {
    let wc = ess(BaseFamily::Wc, 0.0, 0.8, 0.5, 1);
    let (_, b1) = centered_moments(&wc, 1).unwrap();
    assert!((b1 - 0.1283625).abs() < 1e-12);
    let (_, q) = quadrature_moments(&wc, 1);
    assert!((b1 - q).abs() < 1e-10);

    let vm = ess(BaseFamily::Vm, 0.0, 2.0, -0.5, 2);
    let (_, b2) = centered_moments(&vm, 2).unwrap();
    let want = example_beta(2, -0.5, 2, |q| bessel_ratio(q as usize, 2.0).unwrap());
    assert!((b2 - want).abs() < 1e-12);
    assert!((b2 - quadrature_moments(&vm, 2).1).abs() < 1e-10);

    for m in 1..=2 {
        for &lambda in &[-1.0, -0.3, 0.7, 1.0] {
            for p in -4..=6 {
                let w = ess(BaseFamily::Wc, 0.0, 0.6, lambda, m);
                let (_, b) = centered_moments(&w, p).unwrap();
                let want = example_beta(m, lambda, p, |q| 0.6f64.powi(q.abs() as i32));
                assert!((b - want).abs() < 1e-12, "wc m={m} l={lambda} p={p}");
            }
        }
    }
}

#[test]
fn rotated_moments_match_quadrature() {
    let model = ess(BaseFamily::Wc, 1.0, 0.8, 0.5, 1);
    let tm = moments(&model, 1).unwrap();
    let (a, b) = quadrature_moments(&model, 1);
    assert!((tm.alpha - a).abs() < 1e-9 && (tm.beta - b).abs() < 1e-9);
    assert!((tm.mrl.powi(2) - (tm.alpha.powi(2) + tm.beta.powi(2))).abs() < 1e-12);
    let centered = moments(&model.with_mu(0.0), 1).unwrap();
    assert!((centered.mrl - tm.mrl).abs() < 1e-14);
}

#[test]
fn alpha_is_free_of_order() {
    for m in 0..5 {
        let (a, _) = centered_moments(&ess(BaseFamily::Vm, 0.0, 2.0, 0.7, m), 3).unwrap();
        assert_eq!(a, bessel_ratio(3, 2.0).unwrap());
    }
}

/// Skewness from quadrature moments only.
fn quadrature_skewness(model: &EssModel) -> f64 {
    let (a1, b1) = quadrature_moments(model, 1);
    let md = b1.atan2(a1);
    let mrl = a1.hypot(b1);
    let b2bar = periodic_integral(|t| (2.0 * (t - md)).sin() * model.density(t));
    b2bar / (1.0 - mrl).powf(1.5)
}

#[test]
fn skewness_matches_quadrature_and_fig4_sign() {
    let mut prev = f64::INFINITY;
    for i in 0..=20 {
        let lambda = -1.0 + 0.1 * i as f64;
        let model = ess(BaseFamily::Vm, 0.0, 2.0, lambda, 2);
        let s = circular_skewness(&model).unwrap();
        assert!((s - quadrature_skewness(&model)).abs() < 1e-9);
        assert!(s < prev + 1e-15, "not decreasing at lambda={lambda}");
        prev = s;
    }
    let zero = circular_skewness(&ess(BaseFamily::Vm, 0.0, 2.0, 0.0, 2)).unwrap();
    assert!(zero.abs() < 1e-15);
    let shifted = circular_skewness(&ess(BaseFamily::Wc, 2.0, 0.8, 0.4, 1)).unwrap();
    let centered = circular_skewness(&ess(BaseFamily::Wc, 0.0, 0.8, 0.4, 1)).unwrap();
    assert!((shifted - centered).abs() < 1e-12);
}

#[test]
fn wrapped_cauchy_skewness_grows_without_bound() {
    let s: Vec<f64> = [0.9, 0.95, 0.99]
        .iter()
        .map(|&rho| {
            circular_skewness(&ess(BaseFamily::Wc, 0.0, rho, -1.0, 0))
                .unwrap()
                .abs()
        })
        .collect();
    assert!(s[0] < s[1] && s[1] < s[2], "{s:?}");
}

#[test]
fn skewness_extrema_sit_on_the_lambda_boundary() {
    for m in 0..=2 {
        let range = skewness_range(BaseFamily::Vm, m).unwrap();
        for i in 0..40 {
            let kappa = (0.01f64.ln() + (5000f64).ln() * i as f64 / 39.0).exp();
            for j in 0..=20 {
                let lambda = -1.0 + 0.1 * j as f64;
                let s = circular_skewness(&ess(BaseFamily::Vm, 0.0, kappa, lambda, m)).unwrap();
                assert!(
                    s.abs() <= range.s_max + 1e-9,
                    "m={m} kappa={kappa} lambda={lambda}"
                );
            }
        }
    }
}

#[test]
fn sample_sine_moment_matches_formula() {
    let model = ess(BaseFamily::Wc, 0.0, 0.8, 0.8, 3);
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let draws = model.sample(100_000, &mut rng);
    let s: Vec<f64> = draws.iter().map(|t| t.sin()).collect();
    let n = s.len() as f64;
    let mean = s.iter().sum::<f64>() / n;
    let sd = (s.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let (_, beta1) = centered_moments(&model, 1).unwrap();
    assert!(
        (mean - beta1).abs() < 3.0 * sd / n.sqrt(),
        "{mean} vs {beta1}"
    );
}

#[test]
fn single_observation_log_likelihood() {
    for m in 0..4 {
        for &lambda in &[-1.0, 0.3, 1.0] {
            let model = ess(BaseFamily::Wc, 0.7, 0.8, lambda, m);
            let ll = log_likelihood(&model, &[0.7]).unwrap();
            assert!((ll - 1.43239f64.ln()).abs() < 1e-5);
            assert!((ll - model.density(0.7).ln()).abs() < 1e-14);
        }
    }
}

/// At `lambda = 0` the von Mises location score `kappa sin x` and the skewness
/// score `2 g_m(0) sin x` are proportional, so the Fisher information is
/// singular.
#[test]
fn von_mises_fisher_information_is_singular_at_zero_skew() {
    use esscirc::inference::observation_score;
    let info = |lambda: f64| {
        let model = ess(BaseFamily::Vm, 0.0, 2.0, lambda, 1);
        let mut m = nalgebra::Matrix3::<f64>::zeros();
        for i in 0..QUAD_POINTS {
            let t = -PI + 2.0 * PI * i as f64 / QUAD_POINTS as f64;
            let s = nalgebra::Vector3::from(observation_score(&model, t));
            m += s * s.transpose() * model.density(t) * 2.0 * PI / QUAD_POINTS as f64;
        }
        let e = m.symmetric_eigenvalues();
        e.max() / e.min().abs()
    };
    assert!(info(0.0) > 1e12, "{}", info(0.0));
    assert!(info(0.5) < 1e4);
}
