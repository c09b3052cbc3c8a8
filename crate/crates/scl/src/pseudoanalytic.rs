//! Extensions of smooth boundary data into the plane with controlled
//! dbar defect.
//!
//! A function given on a curve is extended by its first-order jet in the
//! normal directions and faded out by a smooth cutoff: F(z) =
//! chi(dist/delta) [f(p(z)) + g(p(z)) (z - p(z))], with p the nearest-point
//! projection and g the complex tangential derivative of the boundary data.
//! For C^{1+alpha} data the defect |dbar F| decays like dist^alpha, which is
//! exactly what the contour-plus-area quadrature downstream consumes.

use num_complex::Complex64;
use thiserror::Error;

use crate::curves::{fft, spectral_derivative, JordanCurve};

const TAU: f64 = std::f64::consts::TAU;
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Error)]
pub enum ExtensionError {
    #[error("tube width {delta:.4e} exceeds half the measured reach {reach:.4e}")]
    TubeTooWide { delta: f64, reach: f64 },
}

/// Quintic fade: 1 on [0, 1/2], 0 on [1, infinity), C^2 everywhere.
pub fn cutoff(x: f64) -> f64 {
    if x <= 0.5 {
        1.0
    } else if x >= 1.0 {
        0.0
    } else {
        let u = (x - 0.5) / 0.5;
        1.0 - u * u * u * (10.0 - 15.0 * u + 6.0 * u * u)
    }
}

/// Trigonometric interpolant of uniform periodic samples, trimmed to the
/// numerically significant modes.
#[derive(Clone, Debug)]
struct TrigSeries {
    k_lo: i64,
    coeffs: Vec<Complex64>,
}

impl TrigSeries {
    fn from_samples(samples: &[Complex64]) -> Self {
        let n = samples.len();
        let mut buf = samples.to_vec();
        fft(&mut buf, false);
        let scale = 1.0 / n as f64;
        let half = n as i64 / 2;
        let mut modes: Vec<(i64, Complex64)> = (0..n)
            .map(|idx| {
                let k = if idx as i64 >= half {
                    idx as i64 - n as i64
                } else {
                    idx as i64
                };
                (k, buf[idx] * scale)
            })
            .collect();
        modes.sort_by_key(|(k, _)| *k);
        let top = modes.iter().map(|(_, c)| c.norm()).fold(0.0, f64::max);
        let keep = 1e-14 * top;
        let first = modes.iter().position(|(_, c)| c.norm() > keep).unwrap_or(0);
        let last = modes
            .iter()
            .rposition(|(_, c)| c.norm() > keep)
            .unwrap_or(modes.len() - 1);
        TrigSeries {
            k_lo: modes[first].0,
            coeffs: modes[first..=last].iter().map(|(_, c)| *c).collect(),
        }
    }

    fn eval(&self, t: f64) -> Complex64 {
        let e = Complex64::from_polar(1.0, t);
        let mut phase = Complex64::from_polar(1.0, self.k_lo as f64 * t);
        let mut acc = ZERO;
        for c in &self.coeffs {
            acc += c * phase;
            phase *= e;
        }
        acc
    }
}

/// Boundary data on a curve: sampled values and the complex derivative
/// along the curve, g = (d/dt f(psi)) / psi'.
#[derive(Clone, Debug)]
pub struct CurveFunction {
    m: usize,
    values: Vec<Complex64>,
    derivative: Vec<Complex64>,
    value_series: TrigSeries,
    derivative_series: TrigSeries,
}

impl CurveFunction {
    /// Samples a closure over the curve grid; the tangential derivative
    /// comes from spectral differentiation of the samples.
    pub fn from_closure(
        curve: &JordanCurve,
        f: impl Fn(Complex64) -> Complex64,
    ) -> CurveFunction {
        let m = curve.grid_size();
        let values: Vec<Complex64> = (0..m)
            .map(|i| f(curve.psi(TAU * i as f64 / m as f64)))
            .collect();
        Self::from_samples(curve, values)
    }

    /// Wraps uniform samples of the boundary values; sample count must
    /// match the curve grid.
    pub fn from_samples(curve: &JordanCurve, values: Vec<Complex64>) -> CurveFunction {
        let m = curve.grid_size();
        assert_eq!(values.len(), m, "need one sample per curve grid node");
        let dv = spectral_derivative(&values);
        let derivative: Vec<Complex64> = (0..m)
            .map(|i| dv[i] / curve.psi_t(TAU * i as f64 / m as f64))
            .collect();
        let value_series = TrigSeries::from_samples(&values);
        let derivative_series = TrigSeries::from_samples(&derivative);
        CurveFunction {
            m,
            values,
            derivative,
            value_series,
            derivative_series,
        }
    }

    pub fn sample_count(&self) -> usize {
        self.m
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn derivative_samples(&self) -> &[Complex64] {
        &self.derivative
    }

    /// Boundary value at parameter t, by trigonometric interpolation.
    pub fn value(&self, t: f64) -> Complex64 {
        self.value_series.eval(t)
    }

    /// Complex tangential derivative at parameter t.
    pub fn derivative(&self, t: f64) -> Complex64 {
        self.derivative_series.eval(t)
    }
}

/// First-order jet extension of boundary data, supported on a tube of
/// width `cutoff_width` around the curve.
#[derive(Clone, Debug)]
pub struct PseudoExtension {
    curve: JordanCurve,
    data: CurveFunction,
    cutoff_width: f64,
    holder_exponent: f64,
}

/// Builds the jet extension. `delta` must stay at or below half the
/// measured reach so projections inside the tube are unambiguous;
/// `alpha` is the decay exponent in (0, 1) used by the verifier.
pub fn jet_extension(
    curve: &JordanCurve,
    data: &CurveFunction,
    delta: f64,
    alpha: f64,
) -> Result<PseudoExtension, ExtensionError> {
    assert!(alpha > 0.0 && alpha < 1.0, "exponent must lie in (0, 1)");
    assert!(delta > 0.0, "tube width must be positive");
    let reach = curve.reach();
    if delta > 0.5 * reach {
        return Err(ExtensionError::TubeTooWide { delta, reach });
    }
    Ok(PseudoExtension {
        curve: curve.clone(),
        data: data.clone(),
        cutoff_width: delta,
        holder_exponent: alpha,
    })
}

impl PseudoExtension {
    pub fn cutoff_width(&self) -> f64 {
        self.cutoff_width
    }

    pub fn holder_exponent(&self) -> f64 {
        self.holder_exponent
    }

    pub fn curve(&self) -> &JordanCurve {
        &self.curve
    }

    /// F(z): the jet about the nearest curve point, faded by the cutoff.
    pub fn evaluate(&self, z: Complex64) -> Complex64 {
        let pr = self.curve.project_flat(z);
        if pr.distance >= self.cutoff_width {
            return ZERO;
        }
        let chi = cutoff(pr.distance / self.cutoff_width);
        if chi == 0.0 {
            return ZERO;
        }
        let f = self.data.value(pr.parameter);
        let g = self.data.derivative(pr.parameter);
        chi * (f + g * (z - pr.point))
    }

    /// dbar F(z) by central differences with a step tied to the distance
    /// from the curve, so the stencil never straddles disproportionate
    /// cutoff regimes near the boundary.
    pub fn dbar(&self, z: Complex64) -> Complex64 {
        let d = self.curve.project_flat(z).distance;
        if d >= self.cutoff_width {
            return ZERO;
        }
        let h = (d.max(1e-8) / 100.0).min(1e-6);
        let fx = self.evaluate(z + Complex64::new(h, 0.0))
            - self.evaluate(z - Complex64::new(h, 0.0));
        let fy = self.evaluate(z + Complex64::new(0.0, h))
            - self.evaluate(z - Complex64::new(0.0, h));
        (fx + Complex64::new(0.0, 1.0) * fy) / (4.0 * h)
    }
}

/// Where to sample the tube when verifying an extension.
#[derive(Clone, Debug)]
pub struct ExtensionSampleSpec {
    pub angular: usize,
    pub radial: usize,
    /// Smallest sampled distance, as a fraction of the tube width. Below
    /// about 5% the finite-difference noise of the dbar stencil, divided
    /// by dist^alpha, outweighs the defect being measured.
    pub inner_fraction: f64,
    /// Largest sampled distance, as a fraction of the tube width. The
    /// default stays inside the plateau of the cutoff.
    pub outer_fraction: f64,
    pub both_sides: bool,
}

impl Default for ExtensionSampleSpec {
    fn default() -> Self {
        ExtensionSampleSpec {
            angular: 64,
            radial: 10,
            inner_fraction: 0.05,
            outer_fraction: 0.49,
            both_sides: true,
        }
    }
}

/// Measures sup |dbar F| / dist^alpha over the sampled tube. A finite,
/// refinement-stable value certifies the extension numerically.
pub fn verify_extension(
    ext: &PseudoExtension,
    curve: &JordanCurve,
    spec: &ExtensionSampleSpec,
) -> f64 {
    let alpha = ext.holder_exponent();
    let delta = ext.cutoff_width();
    let sides: &[f64] = if spec.both_sides { &[1.0, -1.0] } else { &[1.0] };
    let results = crate::par::par_map(spec.angular, |j| {
        let t = TAU * j as f64 / spec.angular as f64;
        let (p, dp, _) = curve.eval(t);
        let normal = -Complex64::new(0.0, 1.0) * dp / dp.norm();
        let mut sup: f64 = 0.0;
        for lvl in 0..spec.radial {
            let frac = spec.inner_fraction
                + (spec.outer_fraction - spec.inner_fraction) * lvl as f64
                    / (spec.radial.max(2) - 1) as f64;
            let d = frac * delta;
            for side in sides {
                let z = p + side * d * normal;
                sup = sup.max(ext.dbar(z).norm() / d.powf(alpha));
            }
        }
        sup
    });
    results.into_iter().fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circle() -> JordanCurve {
        JordanCurve::builtin("circle").unwrap()
    }

    #[test]
    fn spectral_tangential_derivative_matches_known_functions() {
        let c = JordanCurve::builtin("ellipse:1.2:1").unwrap();
        let f = CurveFunction::from_closure(&c, |z| z * z);
        for j in 0..24 {
            let t = TAU * j as f64 / 24.0;
            let expect = 2.0 * c.psi(t);
            assert!(
                (f.derivative(t) - expect).norm() < 1e-8,
                "derivative gap {}",
                (f.derivative(t) - expect).norm()
            );
        }
    }

    #[test]
    fn jet_of_identity_is_exact_in_half_tube() {
        let c = circle();
        let f = CurveFunction::from_closure(&c, |z| z);
        let ext = jet_extension(&c, &f, 0.4, 0.9).unwrap();
        for j in 0..20 {
            let t = TAU * j as f64 / 20.0;
            for rho in [0.85f64, 0.95, 1.05, 1.15] {
                let z = Complex64::from_polar(rho, t);
                assert!((ext.evaluate(z) - z).norm() < 1e-11);
                assert!(ext.dbar(z).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn jet_of_conjugate_boundary_data_tracks_reciprocal() {
        // On the unit circle conj(z) = 1/z, so the jet built from conjugate
        // boundary samples must agree with 1/z to second order off the
        // curve.
        let c = circle();
        let f = CurveFunction::from_closure(&c, |z| z.conj());
        let ext = jet_extension(&c, &f, 0.4, 0.9).unwrap();
        for j in 0..16 {
            let t = 0.1 + TAU * j as f64 / 16.0;
            for d in [0.01f64, 0.03, 0.08] {
                for rho in [1.0 - d, 1.0 + d] {
                    let z = Complex64::from_polar(rho, t);
                    let gap = (ext.evaluate(z) - 1.0 / z).norm();
                    assert!(gap <= 10.0 * d * d, "gap {gap} at distance {d}");
                }
            }
        }
    }

    #[test]
    fn constant_data_reduces_to_the_cutoff() {
        let c = circle();
        let f = CurveFunction::from_closure(&c, |_| Complex64::new(1.0, 0.0));
        let delta = 0.4;
        let ext = jet_extension(&c, &f, delta, 0.9).unwrap();
        for rho in [0.7f64, 0.85, 1.0, 1.1, 1.32, 1.45] {
            let z = Complex64::from_polar(rho, 0.7);
            let dist = (rho - 1.0f64).abs();
            let expect = cutoff(dist / delta);
            assert!(
                (ext.evaluate(z).re - expect).abs() < 1e-10,
                "rho {rho}: {} vs {expect}",
                ext.evaluate(z).re
            );
            assert!(ext.evaluate(z).im.abs() < 1e-12);
        }
        // dbar vanishes on the plateau and is active in the shell.
        assert!(ext.dbar(Complex64::from_polar(1.1, 0.3)).norm() < 1e-9);
        assert!(ext.dbar(Complex64::from_polar(1.3, 0.3)).norm() > 0.1);
        assert_eq!(ext.evaluate(Complex64::from_polar(1.5, 0.3)), ZERO);
    }

    #[test]
    fn boundary_restriction_reproduces_samples() {
        let c = JordanCurve::builtin("blob:4").unwrap();
        let f = CurveFunction::from_closure(&c, |z| z * z + Complex64::new(0.0, 0.5) * z);
        let ext = jet_extension(&c, &f, 0.25 * c.reach(), 0.9).unwrap();
        let m = c.grid_size();
        for i in (0..m).step_by(m / 32) {
            let t = TAU * i as f64 / m as f64;
            let z = c.psi(t);
            assert!(
                (ext.evaluate(z) - f.values()[i]).norm() < 1e-10,
                "restriction gap at node {i}"
            );
        }
    }

    #[test]
    fn extension_is_linear() {
        let c = JordanCurve::builtin("ellipse:1.2:1").unwrap();
        let f = CurveFunction::from_closure(&c, |z| z * z);
        let h = CurveFunction::from_closure(&c, |z| 1.0 / (z - Complex64::new(3.0, 0.0)));
        let a = Complex64::new(0.7, -0.2);
        let b = Complex64::new(-1.3, 0.4);
        let mixed_values: Vec<Complex64> = f
            .values()
            .iter()
            .zip(h.values())
            .map(|(x, y)| a * x + b * y)
            .collect();
        let mixed = CurveFunction::from_samples(&c, mixed_values);
        let e_f = jet_extension(&c, &f, 0.3, 0.9).unwrap();
        let e_h = jet_extension(&c, &h, 0.3, 0.9).unwrap();
        let e_m = jet_extension(&c, &mixed, 0.3, 0.9).unwrap();
        for j in 0..12 {
            let t = 0.3 + TAU * j as f64 / 12.0;
            for rho in [0.93f64, 1.06] {
                let z = Complex64::from_polar(rho, t);
                let lhs = e_m.evaluate(z);
                let rhs = a * e_f.evaluate(z) + b * e_h.evaluate(z);
                assert!((lhs - rhs).norm() < 1e-12, "linearity gap {}", (lhs - rhs).norm());
            }
        }
    }

    #[test]
    fn finite_differences_match_chain_rule_on_the_circle() {
        // For the circle the projection is closed-form, so dbar F has an
        // explicit polar expression to pin the stencil against.
        let c = circle();
        let f = CurveFunction::from_closure(&c, |z| z * z * z.conj());
        let delta = 0.4;
        let ext = jet_extension(&c, &f, delta, 0.9).unwrap();
        let m = c.grid_size();
        let dg = spectral_derivative(f.derivative_samples());
        let mut worst = 0.0f64;
        for i in (0..m).step_by(m / 24) {
            let theta = TAU * i as f64 / m as f64;
            for rho in [0.9f64, 1.08, 1.22] {
                let z = Complex64::from_polar(rho, theta);
                let dist = (rho - 1.0f64).abs();
                if dist >= delta {
                    continue;
                }
                let sgn = if rho >= 1.0 { 1.0 } else { -1.0 };
                let x = dist / delta;
                let chi = cutoff(x);
                let dchi = if (0.5..1.0).contains(&x) {
                    let u = (x - 0.5) / 0.5;
                    -(30.0 * u * u - 60.0 * u * u * u + 30.0 * u * u * u * u) / 0.5 / delta
                } else {
                    0.0
                };
                let e = Complex64::from_polar(1.0, theta);
                let fv = f.value(theta);
                let gv = f.derivative(theta);
                let gpv = dg[i];
                let jet = fv + gv * (rho - 1.0) * e;
                let d_rho = dchi * sgn * jet + chi * gv * e;
                let d_theta = chi
                    * (gv * Complex64::new(0.0, 1.0) * e
                        + gpv * (rho - 1.0) * e
                        + gv * (rho - 1.0) * Complex64::new(0.0, 1.0) * e);
                let analytic = 0.5 * e * (d_rho + Complex64::new(0.0, 1.0) * d_theta / rho);
                let gap = (ext.dbar(z) - analytic).norm();
                worst = worst.max(gap);
            }
        }
        assert!(worst < 1e-6, "stencil vs chain rule gap {worst}");
    }

    #[test]
    fn verifier_is_tiny_for_holomorphic_jet_and_stable_for_polynomials() {
        let c = JordanCurve::builtin("ellipse:1.2:1").unwrap();
        let f = CurveFunction::from_closure(&c, |z| z);
        let ext = jet_extension(&c, &f, 0.4, 0.9).unwrap();
        let v = verify_extension(&ext, &c, &ExtensionSampleSpec::default());
        assert!(v < 1e-8, "identity data verifier {v}");

        let g = CurveFunction::from_closure(&c, |z| z * z + z.conj());
        let ext = jet_extension(&c, &g, 0.4, 0.9).unwrap();
        let spec = ExtensionSampleSpec::default();
        let v1 = verify_extension(&ext, &c, &spec);
        let mut dense = spec.clone();
        dense.angular *= 2;
        dense.radial *= 2;
        let v2 = verify_extension(&ext, &c, &dense);
        assert!(v1.is_finite() && v1 > 0.0);
        assert!(
            (v2 - v1).abs() / v1 < 0.1,
            "verifier drifted from {v1} to {v2} under refinement"
        );
    }

    #[test]
    fn halving_the_tube_does_not_double_the_constant() {
        let c = JordanCurve::builtin("ellipse:1.2:1").unwrap();
        let f = CurveFunction::from_closure(&c, |z| z * z + z.conj());
        let spec = ExtensionSampleSpec::default();
        let wide = jet_extension(&c, &f, 0.4, 0.9).unwrap();
        let narrow = jet_extension(&c, &f, 0.2, 0.9).unwrap();
        let vw = verify_extension(&wide, &c, &spec);
        let vn = verify_extension(&narrow, &c, &spec);
        assert!(vn <= 2.0 * vw * (1.0 + 1e-9), "narrow {vn} vs wide {vw}");
    }

    #[test]
    fn oversized_tube_is_rejected() {
        let c = circle();
        let f = CurveFunction::from_closure(&c, |z| z);
        assert!(matches!(
            jet_extension(&c, &f, 0.51, 0.9),
            Err(ExtensionError::TubeTooWide { .. })
        ));
    }
}
