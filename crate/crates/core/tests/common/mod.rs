//! Independent numerical oracles shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use esscirc::{CircularBase, EssModel};

/// Grid size of the periodic trapezoid rule.
pub const QUAD_POINTS: usize = 1 << 14;

/// `int_{-pi}^{pi} f` by the periodic trapezoid rule on `QUAD_POINTS` nodes.
pub fn periodic_integral(f: impl Fn(f64) -> f64) -> f64 {
    let h = 2.0 * PI / QUAD_POINTS as f64;
    (0..QUAD_POINTS).map(|i| f(-PI + i as f64 * h)).sum::<f64>() * h
}

/// `int_a^b f` by composite Simpson with `n` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// `(alpha_p, beta_p)` of a model by quadrature, using the same hand-rolled
/// density formula `2 f0(x) G(lambda sin x)` as the oracle for `density`.
pub fn quadrature_moments<B: CircularBase>(model: &EssModel<B>, p: i64) -> (f64, f64) {
    let a = periodic_integral(|t| (p as f64 * t).cos() * model.density(t));
    let b = periodic_integral(|t| (p as f64 * t).sin() * model.density(t));
    (a, b)
}

/// Distribution function on `[-pi, pi)` tabulated on a fine grid: cumulative
/// trapezoid with linear interpolation in between.
pub struct NumericCdf {
    step: f64,
    values: Vec<f64>,
}

impl NumericCdf {
    pub fn new(density: impl Fn(f64) -> f64, points: usize) -> Self {
        let step = 2.0 * PI / points as f64;
        let mut values = Vec::with_capacity(points + 1);
        values.push(0.0);
        let mut prev = density(-PI);
        let mut acc = 0.0;
        for i in 1..=points {
            let cur = density(-PI + i as f64 * step);
            acc += 0.5 * (prev + cur) * step;
            values.push(acc);
            prev = cur;
        }
        let total = acc;
        for v in &mut values {
            *v /= total;
        }
        Self { step, values }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let x = ((t + PI) / self.step).clamp(0.0, (self.values.len() - 1) as f64);
        let i = (x.floor() as usize).min(self.values.len() - 2);
        let frac = x - i as f64;
        self.values[i] * (1.0 - frac) + self.values[i + 1] * frac
    }
}

/// Kolmogorov–Smirnov distance between a sample and a distribution function.
pub fn ks_distance(sample: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut s = sample.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// `I_p(kappa)` by its power series; fine for moderate `kappa`.
pub fn bessel_i_series(p: u32, kappa: f64) -> f64 {
    let half = kappa / 2.0;
    let mut term = half.powi(p as i32) / (1..=p).map(f64::from).product::<f64>();
    let mut sum = term;
    let mut k = 1.0;
    while term > 1e-18 * sum {
        term *= half * half / (k * (k + p as f64));
        sum += term;
        k += 1.0;
    }
    sum
}

/// The order-1 and order-2 sine moments, written out by hand.
pub fn example_beta(m: usize, lambda: f64, p: i64, a: impl Fn(i64) -> f64) -> f64 {
    let d = |q: i64| a((p + q).abs()) - a((p - q).abs());
    let l3 = lambda.powi(3);
    let l5 = lambda.powi(5);
    match m {
        1 => 3.0 / 16.0 * (l3 - 4.0 * lambda) * d(1) - l3 / 16.0 * d(3),
        2 => {
            let c21 = -l5 + 4.0 * l3 - 8.0 * lambda;
            let c22 = 3.0 * l5 - 8.0 * l3;
            15.0 / 128.0 * c21 * d(1) + 5.0 / 256.0 * c22 * d(3) - 3.0 / 256.0 * l5 * d(5)
        }
        _ => unreachable!(),
    }
}
