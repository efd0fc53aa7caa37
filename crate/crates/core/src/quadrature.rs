//! Adaptive Gauss–Kronrod quadrature, Gauss–Legendre rules and Wynn's
//! epsilon algorithm for oscillatory tails.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

/// Tolerances and limits for the numerical oracle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Maximum number of subintervals of one adaptive integration.
    pub max_intervals: usize,
    /// Improper integrals are integrated directly up to this many multiples
    /// of their decay scale before the tail is summed.
    pub truncation_factor: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            rel_tol: 1e-8,
            abs_tol: 0.0,
            max_intervals: 20_000,
            truncation_factor: 50.0,
        }
    }
}

impl QuadratureSpec {
    /// Tolerances for the double integrals of the NLI efficiency.
    pub fn eta() -> Self {
        QuadratureSpec {
            rel_tol: 1e-6,
            ..Self::default()
        }
    }

    pub fn with_rel_tol(self, rel_tol: f64) -> Self {
        QuadratureSpec { rel_tol, ..self }
    }

    pub fn is_valid(&self) -> bool {
        self.rel_tol > 0.0 && self.abs_tol >= 0.0 && self.max_intervals > 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult<const N: usize> {
    pub value: [f64; N],
    /// Estimated absolute error (Euclidean norm over components).
    pub error: f64,
    pub intervals: usize,
    pub converged: bool,
}

const XGK: [f64; 11] = [
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.000000000000000000000000000000000,
];

const WGK: [f64; 11] = [
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077208613987486,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
];

/// Gauss weights of the embedded 10-point rule, matching `XGK[1], XGK[3], ...`.
const WG: [f64; 5] = [
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
];

fn norm<const N: usize>(v: &[f64; N]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// One 21-point Kronrod panel with its Gauss-10 error estimate.
pub fn gk21<const N: usize, F: FnMut(f64) -> [f64; N]>(f: &mut F, a: f64, b: f64) -> ([f64; N], f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut kron = [0.0; N];
    let mut gauss = [0.0; N];
    let fc = f(c);
    for n in 0..N {
        kron[n] = WGK[10] * fc[n];
    }
    for j in 0..10 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        for n in 0..N {
            let s = f1[n] + f2[n];
            kron[n] += WGK[j] * s;
            if j % 2 == 1 {
                gauss[n] += WG[j / 2] * s;
            }
        }
    }
    let mut diff = [0.0; N];
    for n in 0..N {
        kron[n] *= h;
        gauss[n] *= h;
        diff[n] = kron[n] - gauss[n];
    }
    let raw = norm(&diff);
    // QUADPACK-style sharpening of the raw difference.
    let err = if raw > 0.0 {
        let scaled = (200.0 * raw / norm(&kron).max(f64::MIN_POSITIVE)).min(1.0);
        raw.min(norm(&kron) * scaled.powf(1.5)).max(raw * 1e-3)
    } else {
        0.0
    };
    (kron, err.max(50.0 * f64::EPSILON * norm(&kron)))
}

struct Piece<const N: usize> {
    a: f64,
    b: f64,
    value: [f64; N],
    error: f64,
}

impl<const N: usize> PartialEq for Piece<N> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<const N: usize> Eq for Piece<N> {}
impl<const N: usize> PartialOrd for Piece<N> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<const N: usize> Ord for Piece<N> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Globally adaptive GK21 over `[a, b]`, starting from `pieces` equal
/// subintervals and always bisecting the worst one.
pub fn integrate_vec<const N: usize, F: FnMut(f64) -> [f64; N]>(
    mut f: F,
    a: f64,
    b: f64,
    pieces: usize,
    spec: &QuadratureSpec,
) -> QuadResult<N> {
    let pieces = pieces.max(1);
    let mut heap = BinaryHeap::with_capacity(pieces * 2);
    let width = (b - a) / pieces as f64;
    for p in 0..pieces {
        let lo = a + p as f64 * width;
        let hi = if p + 1 == pieces { b } else { lo + width };
        let (value, error) = gk21(&mut f, lo, hi);
        heap.push(Piece { a: lo, b: hi, value, error });
    }

    let total = |heap: &BinaryHeap<Piece<N>>| {
        let mut v = [0.0; N];
        let mut e = 0.0;
        for p in heap.iter() {
            for (acc, x) in v.iter_mut().zip(p.value) {
                *acc += x;
            }
            e += p.error;
        }
        (v, e)
    };

    let (mut value, mut error) = total(&heap);
    let mut converged = error <= spec.abs_tol.max(spec.rel_tol * norm(&value));
    while !converged && heap.len() < spec.max_intervals {
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            // Interval cannot be split further in floating point.
            heap.push(worst);
            break;
        }
        let (v1, e1) = gk21(&mut f, worst.a, mid);
        let (v2, e2) = gk21(&mut f, mid, worst.b);
        for n in 0..N {
            value[n] += v1[n] + v2[n] - worst.value[n];
        }
        error += e1 + e2 - worst.error;
        heap.push(Piece { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Piece { a: mid, b: worst.b, value: v2, error: e2 });
        converged = error <= spec.abs_tol.max(spec.rel_tol * norm(&value));
    }
    let (value, error) = total(&heap);
    QuadResult {
        value,
        error,
        intervals: heap.len(),
        converged: error <= spec.abs_tol.max(spec.rel_tol * norm(&value)),
    }
}

/// Scalar form of [`integrate_vec`].
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, pieces: usize, spec: &QuadratureSpec) -> QuadResult<1> {
    integrate_vec(move |x| [f(x)], a, b, pieces, spec)
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Wynn's epsilon extrapolation of a sequence of partial sums.
///
/// Returns the extrapolated limit and the change between the last two
/// estimates as an error indicator.
pub fn wynn_epsilon(sums: &[f64]) -> (f64, f64) {
    let n = sums.len();
    match n {
        0 => return (0.0, f64::INFINITY),
        1 | 2 => return (sums[n - 1], (sums[n - 1] - sums[0]).abs()),
        _ => {}
    }
    // eps[k] holds column k of the epsilon table for the current diagonal.
    let mut prev: Vec<f64> = vec![0.0; n + 1];
    let mut cur: Vec<f64> = sums.to_vec();
    let mut best = sums[n - 1];
    let mut best_prev = sums[n - 2];
    let mut col = 0;
    while cur.len() > 1 {
        let mut next = Vec::with_capacity(cur.len() - 1);
        for j in 0..cur.len() - 1 {
            let d = cur[j + 1] - cur[j];
            let inv = if d == 0.0 { f64::INFINITY } else { 1.0 / d };
            let base = if col == 0 { 0.0 } else { prev[j + 1] };
            next.push(base + inv);
        }
        col += 1;
        if col % 2 == 0 && next.iter().all(|v| v.is_finite()) {
            // Even columns are estimates of the limit.
            if next.len() >= 2 {
                best_prev = next[next.len() - 2];
            }
            best = next[next.len() - 1];
        }
        prev = cur;
        cur = next;
        if !cur.iter().all(|v| v.is_finite()) {
            break;
        }
    }
    (best, (best - best_prev).abs())
}

/// Integral of `f` over `[start, inf)` for an integrand that oscillates with
/// half-period `half_period` and decays in amplitude: integrates consecutive
/// half-periods and extrapolates the partial sums.
pub fn oscillatory_tail<F: FnMut(f64) -> f64>(mut f: F, start: f64, half_period: f64, terms: usize) -> (f64, f64) {
    let spec = QuadratureSpec::default().with_rel_tol(1e-13);
    let mut sums = Vec::with_capacity(terms);
    let mut acc = 0.0;
    for m in 0..terms {
        let a = start + m as f64 * half_period;
        let r = integrate(&mut f, a, a + half_period, 1, &spec);
        acc += r.value[0];
        sums.push(acc);
    }
    wynn_epsilon(&sums)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn kronrod_weights_integrate_constants() {
        let s: f64 = 2.0 * WGK[..10].iter().sum::<f64>() + WGK[10];
        assert_relative_eq!(s, 2.0, max_relative = 1e-15);
        let g: f64 = 2.0 * WG.iter().sum::<f64>();
        assert_relative_eq!(g, 2.0, max_relative = 1e-15);
    }

    #[test]
    fn gk21_is_exact_for_high_degree_polynomials() {
        let mut f = |x: f64| [x.powi(30), x.powi(19)];
        let (v, _) = gk21(&mut f, -1.0, 1.0);
        assert_relative_eq!(v[0], 2.0 / 31.0, max_relative = 1e-13);
        assert!(v[1].abs() < 1e-15);
        let mut g = |x: f64| [x.powi(18)];
        let (v, err) = gk21(&mut g, 0.0, 1.0);
        assert_relative_eq!(v[0], 1.0 / 19.0, max_relative = 1e-14);
        assert!(err < 1e-13);
    }

    #[test]
    fn adaptive_handles_peaks_and_oscillation() {
        let spec = QuadratureSpec::default().with_rel_tol(1e-12);
        let r = integrate(|x| 1.0 / (1e-4 + x * x), -1.0, 1.0, 1, &spec);
        assert!(r.converged);
        assert_relative_eq!(r.value[0], 2.0 * (1.0f64 / 1e-2).atan() / 1e-2, max_relative = 1e-11);
        let r = integrate(|x| (100.0 * x).cos(), 0.0, 10.0, 8, &spec);
        assert_relative_eq!(r.value[0], (1000.0f64).sin() / 100.0, max_relative = 1e-10);
    }

    #[test]
    fn gauss_legendre_rules() {
        for n in [1, 2, 4, 7, 8, 16] {
            let (x, w) = gauss_legendre(n);
            assert_relative_eq!(w.iter().sum::<f64>(), 2.0, max_relative = 1e-14);
            let deg = 2 * n - 2;
            let integral: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
            assert_relative_eq!(integral, 2.0 / (deg as f64 + 1.0), max_relative = 1e-13);
        }
    }

    #[test]
    fn wynn_accelerates_alternating_series() {
        // 1 - 1/2 + 1/3 - ... = ln 2
        let mut sums = Vec::new();
        let mut s = 0.0;
        for k in 1..=20 {
            s += if k % 2 == 1 { 1.0 } else { -1.0 } / k as f64;
            sums.push(s);
        }
        let (v, _) = wynn_epsilon(&sums);
        assert!((v - std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn oscillatory_tail_of_sine_over_x() {
        // int_pi^inf sin(x)/x dx = pi/2 - Si(pi)
        let si_pi = 1.851_937_051_982_466_2;
        let (v, err) = oscillatory_tail(|x| x.sin() / x, std::f64::consts::PI, std::f64::consts::PI, 30);
        assert!((v - (std::f64::consts::FRAC_PI_2 - si_pi)).abs() < 1e-12, "{v} {err}");
    }
}
