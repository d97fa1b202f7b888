//! Exact formulas on the unit disk.

use std::f64::consts::PI;

use num_complex::Complex64;

/// `m_p(ζ, w) = [(1 − |w|²)/(1 − ζ w̄)]^{4/p}` on the unit disk.
///
/// `Re(1 − ζ w̄) > 0` on the disk, so the principal power is holomorphic in ζ.
pub fn disk_closed_form(zeta: Complex64, w: Complex64, p: f64) -> Complex64 {
    let base = Complex64::new(1.0 - w.norm_sqr(), 0.0) / (Complex64::new(1.0, 0.0) - zeta * w.conj());
    base.powf(4.0 / p)
}

/// `m_p(w) = [π (1 − |w|²)²]^{1/p}`, the `L^p` norm of [`disk_closed_form`] in ζ.
pub fn disk_closed_form_mass(w: Complex64, p: f64) -> f64 {
    let s = 1.0 - w.norm_sqr();
    (PI * s * s).powf(1.0 / p)
}

/// Bergman kernel of the disk, `K₂(z, w) = 1/(π (1 − z w̄)²)`.
pub fn disk_bergman_kernel(z: Complex64, w: Complex64) -> Complex64 {
    let d = Complex64::new(1.0, 0.0) - z * w.conj();
    (d * d * PI).inv()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn closed_form_values() {
        for p in [1.0, 2.0, 3.7] {
            assert!((disk_closed_form(c(0.3, -0.2), c(0.0, 0.0), p) - 1.0).norm() < 1e-15);
        }
        assert!((disk_closed_form(c(0.0, 0.0), c(0.5, 0.0), 2.0) - 0.5625).norm() < 1e-15);
        assert!((disk_closed_form(c(0.5, 0.0), c(0.5, 0.0), 4.0) - 1.0).norm() < 1e-15);
    }

    #[test]
    fn mass_values() {
        assert!((disk_closed_form_mass(c(0.0, 0.0), 2.0) - 1.7724538509055159).abs() < 1e-15);
        assert!((disk_closed_form_mass(c(0.5, 0.0), 2.0) - 0.75 * PI.sqrt()).abs() < 1e-15);
        assert!((disk_closed_form_mass(c(0.5, 0.0), 4.0) - 1.152970).abs() < 1e-6);
        assert!((disk_closed_form_mass(c(0.5, 0.0), 4.0) - (PI * 0.5625f64).powf(0.25)).abs() < 1e-15);
    }

    #[test]
    fn kernel_ratio_is_bergman_normalization() {
        // m_2(ζ,w) = K(ζ,w)/K(w,w)
        let w = c(0.3, 0.4);
        let z = c(-0.2, 0.5);
        let lhs = disk_closed_form(z, w, 2.0);
        let rhs = disk_bergman_kernel(z, w) / disk_bergman_kernel(w, w);
        assert!((lhs - rhs).norm() < 1e-14);
    }
}
