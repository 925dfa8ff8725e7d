/// Even smooth cutoff: 1 on `|t| <= 1`, 0 on `|t| >= 2`.
///
/// The transition is the normalised bump blend `g(2-|t|) / (g(2-|t|) + g(|t|-1))`
/// with `g(z) = exp(-1/z)`, which is C^infinity at both ends.
pub fn psi(t: f64) -> f64 {
    let a = t.abs();
    if a <= 1.0 {
        1.0
    } else if a >= 2.0 {
        0.0
    } else {
        let up = bump(2.0 - a);
        up / (up + bump(a - 1.0))
    }
}

fn bump(z: f64) -> f64 {
    if z <= 0.0 {
        0.0
    } else {
        (-1.0 / z).exp()
    }
}
