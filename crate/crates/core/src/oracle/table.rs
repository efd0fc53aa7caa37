//! Cumulative link function `M(Phi) = int_0^Phi mu(x) dx` on a fine grid.
//!
//! For a profile that does not depend on the frequency arguments the link
//! function depends on the phase alone, so every double integral of one
//! channel reduces to lookups of `M`. Nodes carry `M` and `mu = M'`, and
//! values in between come from cubic Hermite interpolation.

use rayon::prelude::*;

use super::FilonTransform;
use crate::quadrature::gauss_legendre;

#[derive(Debug, Clone)]
pub struct LinkTable {
    transform: FilonTransform,
    delta: f64,
    mu: Vec<f64>,
    cumulative: Vec<f64>,
}

impl LinkTable {
    /// Tabulates `[0, phi_max]` with node spacing `resolution / L`.
    pub fn build(transform: FilonTransform, phi_max: f64, resolution: f64) -> Self {
        let delta = resolution / transform.length();
        let n = ((phi_max.abs() / delta).ceil() as usize).max(1);
        let (x, w) = gauss_legendre(4);
        let intervals: Vec<(f64, f64)> = (0..n)
            .into_par_iter()
            .map(|m| {
                let a = m as f64 * delta;
                let c = a + 0.5 * delta;
                let area: f64 = x
                    .iter()
                    .zip(&w)
                    .map(|(t, wt)| wt * transform.mu(c + 0.5 * delta * t))
                    .sum();
                (0.5 * delta * area, transform.mu(a + delta))
            })
            .collect();
        let mut mu = Vec::with_capacity(n + 1);
        let mut cumulative = Vec::with_capacity(n + 1);
        mu.push(transform.mu(0.0));
        cumulative.push(0.0);
        for (area, end) in intervals {
            cumulative.push(cumulative.last().unwrap() + area);
            mu.push(end);
        }
        LinkTable {
            transform,
            delta,
            mu,
            cumulative,
        }
    }

    pub fn phi_max(&self) -> f64 {
        (self.mu.len() - 1) as f64 * self.delta
    }

    pub fn nodes(&self) -> usize {
        self.mu.len()
    }

    /// Link function evaluated directly from the transform.
    pub fn mu(&self, phi: f64) -> f64 {
        self.transform.mu(phi)
    }

    /// `int_0^phi mu`; odd in `phi`.
    pub fn cumulative(&self, phi: f64) -> f64 {
        let x = phi.abs();
        let last = self.mu.len() - 1;
        let value = if x >= self.phi_max() {
            // mu decays like 1/phi^2 beyond the table.
            let xm = self.phi_max();
            let tail = if xm > 0.0 { self.mu[last] * xm * xm * (1.0 / xm - 1.0 / x) } else { 0.0 };
            self.cumulative[last] + tail
        } else {
            let s = x / self.delta;
            let m = (s.floor() as usize).min(last - 1);
            let t = s - m as f64;
            let t2 = t * t;
            let t3 = t2 * t;
            let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
            let h10 = t3 - 2.0 * t2 + t;
            let h01 = -2.0 * t3 + 3.0 * t2;
            let h11 = t3 - t2;
            h00 * self.cumulative[m]
                + h10 * self.delta * self.mu[m]
                + h01 * self.cumulative[m + 1]
                + h11 * self.delta * self.mu[m + 1]
        };
        value.copysign(phi)
    }

    /// `M(phi) / phi`, the mean of `mu` over `[0, phi]`; even in `phi`.
    pub fn average(&self, phi: f64) -> f64 {
        if phi == 0.0 {
            self.mu[0]
        } else {
            self.cumulative(phi) / phi
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn loss_only_cumulative() {
        let a = 4.6e-5;
        let l = 80e3;
        let table = LinkTable::build(FilonTransform::new(|z| (-a * z).exp(), l, 64), 2e-3, 0.125);
        // mu = (1 - 2 e cos(phi L) + e^2) / (a^2 + phi^2) integrates in closed form.
        let e = (-a * l).exp();
        let exact = |phi: f64| -> f64 {
            let mut s = 0.0;
            // Sum of the non-oscillating part plus the cosine part by quadrature.
            s += (1.0 + e * e) * (phi / a).atan() / a;
            let spec = crate::quadrature::QuadratureSpec::default().with_rel_tol(1e-13);
            let pieces = ((phi * l / std::f64::consts::PI).ceil() as usize).max(1);
            s - 2.0 * e
                * crate::quadrature::integrate(|x| (x * l).cos() / (a * a + x * x), 0.0, phi, pieces, &spec).value[0]
        };
        for phi in [1e-6, 3e-5, 4e-4, 1.9e-3] {
            assert_relative_eq!(table.cumulative(phi), exact(phi), max_relative = 1e-7);
            assert_relative_eq!(table.cumulative(-phi), -exact(phi), max_relative = 1e-7);
        }
        assert_relative_eq!(table.average(0.0), table.mu(0.0), max_relative = 1e-15);
        assert_relative_eq!(table.average(1e-12), table.mu(0.0), max_relative = 1e-9);
    }
}
