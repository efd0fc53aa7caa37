//! Numerical check of the integral and algebraic identities behind the
//! closed form, on random parameter draws.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate, oscillatory_tail, QuadratureSpec};

/// Worst case of one identity over all draws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub name: String,
    pub draws: usize,
    pub max_rel_err: f64,
    pub worst_params: String,
    /// Largest magnitude of the extrapolated oscillatory tail beyond the
    /// truncation point, relative to the right-hand side. Zero for proper
    /// integrals.
    pub tail_bound: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub tolerance: f64,
    pub checks: Vec<IdentityCheck>,
}

impl IdentityReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// First failing identity as an error.
    pub fn require(&self) -> Result<()> {
        match self.checks.iter().find(|c| !c.passed) {
            None => Ok(()),
            Some(c) => Err(Error::IdentityFailure {
                name: c.name.clone(),
                rel_err: c.max_rel_err,
                params: c.worst_params.clone(),
            }),
        }
    }
}

struct Tracker {
    name: &'static str,
    tolerance: f64,
    draws: usize,
    worst: f64,
    params: String,
    tail: f64,
}

impl Tracker {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Tracker {
            name,
            tolerance,
            draws: 0,
            worst: 0.0,
            params: String::new(),
            tail: 0.0,
        }
    }

    fn record(&mut self, rel_err: f64, params: impl FnOnce() -> String) {
        self.draws += 1;
        // NaN counts as a failure.
        if !(rel_err <= self.worst) {
            self.worst = if rel_err.is_nan() { f64::INFINITY } else { rel_err };
            self.params = params();
        }
    }

    fn finish(self) -> IdentityCheck {
        IdentityCheck {
            name: self.name.to_string(),
            draws: self.draws,
            max_rel_err: self.worst,
            worst_params: self.params,
            tail_bound: self.tail,
            passed: self.worst <= self.tolerance,
        }
    }
}

fn rel(got: f64, want: f64, scale: f64) -> f64 {
    (got - want).abs() / scale
}

fn tight(spec: &QuadratureSpec, scale: f64) -> QuadratureSpec {
    QuadratureSpec {
        rel_tol: (1e-3 * spec.rel_tol).max(1e-14),
        abs_tol: 1e-3 * spec.rel_tol * scale,
        max_intervals: spec.max_intervals.max(20_000),
        ..*spec
    }
}

/// `int_0^inf f` for an oscillating integrand with half-period `half`: direct
/// quadrature up to `cut`, then extrapolated half-period sums. Returns the
/// value and the tail magnitude.
fn improper<F: Fn(f64) -> f64>(f: F, cut: f64, half: f64, spec: &QuadratureSpec) -> (f64, f64) {
    let pieces = ((cut / half).ceil() as usize).max(1);
    let head = integrate(&f, 0.0, cut, pieces, spec).value[0];
    let start = pieces as f64 * half;
    let bridge = if start > cut {
        integrate(&f, cut, start, 1, spec).value[0]
    } else {
        0.0
    };
    let (tail, _) = oscillatory_tail(&f, start.max(cut), half, 40);
    (head + bridge + tail, (bridge + tail).abs())
}

/// Checks every identity on `draws` random parameter sets. Integral
/// identities pass at `spec.rel_tol`; algebraic ones at 1e-12.
pub fn verify_identities(spec: &QuadratureSpec, draws: usize, seed: u64) -> IdentityReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tol = spec.rel_tol;
    let exact = 1e-12;

    let mut multinomial = Tracker::new("multinomial", exact);
    let mut modulus = Tracker::new("modulus", exact);
    let mut cross = Tracker::new("cross-modulus", exact);
    let mut arctan = Tracker::new("arctan-sum", tol);
    let mut sine2 = Tracker::new("sine-squared", tol);
    let mut asinh = Tracker::new("asinh", tol);
    let mut cosine = Tracker::new("cosine-transform", tol);
    let mut sine = Tracker::new("sine-transform", tol);

    for draw in 0..draws {
        // Algebra.
        let (x, y, z): (f64, f64, f64) = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        let n = draw % 5;
        let mut sum = 0.0;
        for l1 in 0..=n {
            for l2 in 0..=(n - l1) {
                let l3 = n - l1 - l2;
                let coef = factorial(n) / (factorial(l1) * factorial(l2) * factorial(l3));
                sum += coef * x.powi(l1 as i32) * y.powi(l2 as i32) * z.powi(l3 as i32);
            }
        }
        let direct = (x + y + z).powi(n as i32);
        let scale = (x.abs() + y.abs() + z.abs()).powi(n as i32).max(f64::MIN_POSITIVE);
        multinomial.record(rel(sum, direct, scale), || format!("x={x}, y={y}, z={z}, i={n}"));

        let zi = Complex64::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
        let zj = Complex64::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
        let prod = zi * zi.conj();
        let m = zi.norm().powi(2);
        modulus.record((prod.re - m).abs().max(prod.im.abs()) / m, || format!("z={zi}"));
        let lhs = zi * zj.conj() + zj * zi.conj();
        let rhs = 2.0 * (zi * zj.conj()).re;
        let s = zi.norm() * zj.norm();
        cross.record((lhs.re - rhs).abs().max(lhs.im.abs()) / s, || format!("z_i={zi}, z_j={zj}"));

        // Integrals. Every fourth draw uses a = b; half of them flip c.
        let a: f64 = rng.random_range(0.1..3.0);
        let b: f64 = if draw % 4 == 0 { a } else { rng.random_range(0.1..3.0) };
        let c_mag: f64 = rng.random_range(0.2..5.0);
        let c = if draw % 2 == 1 { -c_mag } else { c_mag };
        let big_x: f64 = rng.random_range(0.1..10.0);
        let d: f64 = rng.random_range(0.1..5.0);
        let l: f64 = rng.random_range(0.1..1.0);
        let params = || format!("a={a}, b={b}, c={c}, X={big_x}, d={d}, L={l}");

        let rational = |t: f64| (a * b + c * c * t * t) / ((a * a + c * c * t * t) * (b * b + c * c * t * t));

        let want = ((c * big_x / a).atan() + (c * big_x / b).atan()) / (c * (a + b));
        let got = integrate(rational, 0.0, big_x, 1, &tight(spec, want.abs())).value[0];
        arctan.record(rel(got, want, want.abs()), params);

        let want = PI / (2.0 * (a + b)) * (1.0 / (a * a + c * c).sqrt() + 1.0 / (b * b + c * c).sqrt());
        let got = integrate(
            |t| {
                let s2 = t.sin().powi(2);
                (a * b + c * c * s2) / ((a * a + c * c * s2) * (b * b + c * c * s2))
            },
            0.0,
            PI / 2.0,
            1,
            &tight(spec, want),
        )
        .value[0];
        sine2.record(rel(got, want, want), params);

        let want = (d * big_x * big_x).asinh() / (2.0 * d);
        let got = integrate(
            |t| t / (1.0 + d * d * t.powi(4)).sqrt(),
            0.0,
            big_x,
            1,
            &tight(spec, want),
        )
        .value[0];
        asinh.record(rel(got, want, want), params);

        let (ea, eb) = ((-(a * l).abs()).exp(), (-(b * l).abs()).exp());
        let scale = PI / 2.0 * (ea + eb) / (c * (a + b)).abs();
        let cut = spec.truncation_factor * a.max(b) / c.abs();
        let half = PI / (c.abs() * l);
        let qspec = tight(spec, scale);

        let want = PI / 2.0 * (ea * (c / a).signum() + eb * (c / b).signum()) / (c * (a + b));
        let (got, tail) = improper(|t| rational(t) * (c * t * l).cos(), cut, half, &qspec);
        cosine.record(rel(got, want, scale), params);
        cosine.tail = cosine.tail.max(tail / scale);

        let want = PI / 2.0 * (ea * (-c).signum() + eb * c.signum()) / (c * (a + b));
        let (got, tail) = improper(
            |t| (a - b) * c * t / ((a * a + c * c * t * t) * (b * b + c * c * t * t)) * (c * t * l).sin(),
            cut,
            half,
            &qspec,
        );
        sine.record(rel(got, want, scale), params);
        sine.tail = sine.tail.max(tail / scale);
    }

    IdentityReport {
        tolerance: tol,
        checks: [multinomial, modulus, cross, arctan, sine2, asinh, cosine, sine]
            .into_iter()
            .map(Tracker::finish)
            .collect(),
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}
