//! Filon-type Fourier integral `int_0^L g(z) exp(j phi z) dz`.
//!
//! `g` is replaced on each panel by its degree-7 interpolant through the
//! Gauss–Legendre nodes; the oscillatory factor is then integrated exactly
//! through the moments `int_{-1}^{1} t^m exp(j theta t) dt`.

use std::sync::OnceLock;

use nalgebra::SMatrix;
use num_complex::Complex64;

use crate::quadrature::gauss_legendre;

const ORDER: usize = 8;

struct Basis {
    nodes: [f64; ORDER],
    /// Maps node values to monomial coefficients in `t` on `[-1, 1]`.
    inverse_vandermonde: SMatrix<f64, ORDER, ORDER>,
}

fn basis() -> &'static Basis {
    static BASIS: OnceLock<Basis> = OnceLock::new();
    BASIS.get_or_init(|| {
        let (x, _) = gauss_legendre(ORDER);
        let mut nodes = [0.0; ORDER];
        nodes.copy_from_slice(&x);
        let v = SMatrix::<f64, ORDER, ORDER>::from_fn(|r, c| nodes[r].powi(c as i32));
        Basis {
            nodes,
            inverse_vandermonde: v.try_inverse().expect("Vandermonde matrix on distinct nodes"),
        }
    })
}

#[derive(Debug, Clone)]
pub struct FilonTransform {
    length: f64,
    half_width: f64,
    coefficients: Vec<[f64; ORDER]>,
}

impl FilonTransform {
    /// Samples `g` on `panels` equal panels of `[0, length]`.
    pub fn new<G: FnMut(f64) -> f64>(mut g: G, length: f64, panels: usize) -> Self {
        let b = basis();
        let h = length / panels as f64;
        let coefficients = (0..panels)
            .map(|p| {
                let centre = (p as f64 + 0.5) * h;
                let values = nalgebra::SVector::<f64, ORDER>::from_fn(|j, _| g(centre + 0.5 * h * b.nodes[j]));
                let c = b.inverse_vandermonde * values;
                let mut out = [0.0; ORDER];
                out.copy_from_slice(c.as_slice());
                out
            })
            .collect();
        FilonTransform {
            length,
            half_width: 0.5 * h,
            coefficients,
        }
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn eval(&self, phi: f64) -> Complex64 {
        let moments = moments(phi * self.half_width);
        let step = Complex64::from_polar(1.0, 2.0 * phi * self.half_width);
        let mut phase = Complex64::from_polar(1.0, phi * self.half_width);
        let mut total = Complex64::new(0.0, 0.0);
        for (p, c) in self.coefficients.iter().enumerate() {
            if p % 16 == 0 {
                // Re-anchor the rotation to keep round-off from accumulating.
                phase = Complex64::from_polar(1.0, phi * self.half_width * (2 * p + 1) as f64);
            }
            let mut panel = Complex64::new(0.0, 0.0);
            for m in 0..ORDER {
                panel += c[m] * moments[m];
            }
            total += phase * panel;
            phase *= step;
        }
        total * self.half_width
    }

    /// `|F(phi)|^2`.
    pub fn mu(&self, phi: f64) -> f64 {
        self.eval(phi).norm_sqr()
    }
}

/// `int_{-1}^{1} t^m exp(j theta t) dt` for `m < ORDER`.
fn moments(theta: f64) -> [Complex64; ORDER] {
    let mut w = [Complex64::new(0.0, 0.0); ORDER];
    if theta.abs() <= 4.0 {
        // Power series; only even total powers survive the symmetric range.
        let it = Complex64::new(0.0, theta);
        for (m, wm) in w.iter_mut().enumerate() {
            let mut term = Complex64::new(1.0, 0.0);
            let mut sum = Complex64::new(0.0, 0.0);
            for k in 0..80 {
                if (m + k) % 2 == 0 {
                    sum += term * (2.0 / (m + k + 1) as f64);
                }
                term = term * it / (k + 1) as f64;
                if term.norm() < 1e-18 {
                    break;
                }
            }
            *wm = sum;
        }
    } else {
        let it = Complex64::new(0.0, theta);
        let ep = Complex64::from_polar(1.0, theta);
        let em = Complex64::from_polar(1.0, -theta);
        w[0] = (ep - em) / it;
        for m in 1..ORDER {
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            w[m] = (ep - sign * em - m as f64 * w[m - 1]) / it;
        }
    }
    w
}
