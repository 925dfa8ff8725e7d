use num_complex::Complex64;

/// Below this `|Q|` the kernel is evaluated from its Taylor series.
pub const KERNEL_SERIES_GUARD: f64 = 1e-6;

/// `K(Q, t) = int_0^t exp(-i t' Q) dt' = (1 - exp(-i t Q)) / (i Q)`.
///
/// Evaluated as `t exp(-i tQ/2) sinc(tQ/2)`, which has no cancellation,
/// and by the series `t - i Q t^2/2 - Q^2 t^3/6 + ...` near `Q = 0`.
pub fn duhamel_kernel(q: f64, t: f64) -> Complex64 {
    if q.abs() < KERNEL_SERIES_GUARD {
        let z = Complex64::new(0.0, -q * t);
        // t * sum_{n<5} z^n / (n+1)!
        let mut term = Complex64::new(t, 0.0);
        let mut sum = term;
        for n in 1..5 {
            term *= z / (n as f64 + 1.0);
            sum += term;
        }
        return sum;
    }
    let half = 0.5 * q * t;
    let sinc = if half == 0.0 { 1.0 } else { half.sin() / half };
    Complex64::from_polar(t * sinc, -half)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn removable_singularity() {
        assert_eq!(duhamel_kernel(0.0, 1.0), Complex64::new(1.0, 0.0));
        assert_eq!(duhamel_kernel(0.0, -0.5), Complex64::new(-0.5, 0.0));
        // both branches agree across the guard, up to |dK/dQ| <= t^2 / 2
        let (q0, q1, t) = (0.999e-6, 1.001e-6, 0.8);
        let jump = (duhamel_kernel(q0, t) - duhamel_kernel(q1, t)).norm();
        assert!(jump <= 0.5 * t * t * (q1 - q0) * (1.0 + 1e-6) + 1e-16);
    }

    #[test]
    fn matches_closed_form() {
        for &(q, t) in &[(3.0, 0.7), (-12.5, 1.0), (1e-3, 1.0), (250.0, 0.3)] {
            let direct = (Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, -t * q))
                / Complex64::new(0.0, q);
            assert!((duhamel_kernel(q, t) - direct).norm() < 1e-12 * (1.0 + direct.norm()));
        }
    }

    #[test]
    fn bounded_by_time() {
        for i in -60..=60 {
            for j in -10..=10 {
                let q = i as f64 * 0.37 + 1e-7 * j as f64;
                let t = j as f64 * 0.1;
                assert!(duhamel_kernel(q, t).norm() <= t.abs() * (1.0 + 1e-15));
            }
        }
    }
}
