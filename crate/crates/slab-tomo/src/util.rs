use num_complex::Complex64;
use std::f64::consts::TAU;

/// e^{2πi t}, computed after reducing `t` modulo 1.
///
/// The reduction keeps arguments small, and quarter-period multiples are
/// returned as exact unit values so that half-integer phases (deck shifts,
/// boundary traces at x = 0, 1/2, 1) do not pick up spurious imaginary dust.
pub(crate) fn cis_mod1(t: f64) -> Complex64 {
    let r = t.rem_euclid(1.0);
    if r == 0.0 {
        Complex64::new(1.0, 0.0)
    } else if r == 0.25 {
        Complex64::new(0.0, 1.0)
    } else if r == 0.5 {
        Complex64::new(-1.0, 0.0)
    } else if r == 0.75 {
        Complex64::new(0.0, -1.0)
    } else {
        let th = TAU * r;
        Complex64::new(th.cos(), th.sin())
    }
}

/// Reduce a coordinate to the fundamental domain [0, 1) of the torus.
pub(crate) fn mod1(x: f64) -> f64 {
    let r = x.rem_euclid(1.0);
    // rem_euclid can return 1.0 when x is a tiny negative number
    if r == 1.0 {
        0.0
    } else {
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quarter_phases_are_exact() {
        assert_eq!(cis_mod1(0.0), Complex64::new(1.0, 0.0));
        assert_eq!(cis_mod1(0.5), Complex64::new(-1.0, 0.0));
        assert_eq!(cis_mod1(2.75), Complex64::new(0.0, -1.0));
        assert_eq!(cis_mod1(-0.25), Complex64::new(0.0, -1.0));
        assert_eq!(cis_mod1(17.0), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn generic_phase_matches_euler() {
        let z = cis_mod1(0.1);
        assert!((z.re - (TAU * 0.1).cos()).abs() < 1e-15);
        assert!((z.im - (TAU * 0.1).sin()).abs() < 1e-15);
    }

    #[test]
    fn mod1_stays_in_range() {
        assert_eq!(mod1(1.0), 0.0);
        assert_eq!(mod1(-0.25), 0.75);
        assert_eq!(mod1(-1e-20), 0.0);
    }
}
