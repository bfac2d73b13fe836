//! Reference computations shared by the integration tests. Nothing here calls
//! into the library under test.

#![allow(dead_code)]

use std::f64::consts::PI;

/// Composite Simpson rule with `n` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// Running integral of `f` on a uniform mesh, by the trapezoid rule.
pub struct TabulatedCdf {
    a: f64,
    h: f64,
    values: Vec<f64>,
}

impl TabulatedCdf {
    pub fn new(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> Self {
        let h = (b - a) / n as f64;
        let mut values = Vec::with_capacity(n + 1);
        let mut acc = 0.0;
        let mut prev = f(a);
        values.push(0.0);
        for i in 1..=n {
            let cur = f(a + i as f64 * h);
            acc += 0.5 * h * (prev + cur);
            values.push(acc);
            prev = cur;
        }
        let total = acc;
        for v in &mut values {
            *v /= total;
        }
        Self { a, h, values }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let t = (x - self.a) / self.h;
        if t <= 0.0 {
            return 0.0;
        }
        let i = t.floor() as usize;
        if i + 1 >= self.values.len() {
            return 1.0;
        }
        let frac = t - i as f64;
        self.values[i] * (1.0 - frac) + self.values[i + 1] * frac
    }
}

/// Screen density for envelope `exp(-x^2 / (4 s^2))` centred at 0, written
/// out term by term.
pub fn two_beam_density(x: f64, alpha_sq: f64, p: f64, s: f64) -> f64 {
    let a = alpha_sq.sqrt();
    let b = (1.0 - alpha_sq).sqrt();
    let g2 = (-x * x / (2.0 * s * s)).exp();
    let n2 = 1.0 / ((2.0 * PI).sqrt() * s);
    n2 * g2 * (a * a + b * b + 2.0 * a * b * (2.0 * p * x).sin())
}

/// Even-odd ray casting along `+x`.
pub fn ray_cast_inside(poly: &[[f64; 2]], p: [f64; 2]) -> bool {
    let mut inside = false;
    let n = poly.len();
    let mut j = n - 1;
    for i in 0..n {
        let (xi, yi) = (poly[i][0], poly[i][1]);
        let (xj, yj) = (poly[j][0], poly[j][1]);
        if (yi > p[1]) != (yj > p[1]) && p[0] < (xj - xi) * (p[1] - yi) / (yj - yi) + xi {
            inside = !inside;
        }
        j = i;
    }
    inside
}

/// Free Gaussian width for initial width `s0` (natural units).
pub fn free_width(s0: f64, t: f64) -> f64 {
    s0 * (1.0 + (t / (2.0 * s0 * s0)).powi(2)).sqrt()
}
