//! Atomic units. Lengths are Bohr radii, energies Hartree, and one atomic
//! unit of time is 2.418884e-17 s.

/// One atomic unit of time in seconds.
pub const AU_TIME_SECONDS: f64 = 2.418884e-17;

/// One atomic unit of time in picoseconds.
pub const AU_TIME_PICOSECONDS: f64 = AU_TIME_SECONDS * 1e12;

/// Convert a duration from atomic units of time to picoseconds.
pub fn au_to_picoseconds(t_au: f64) -> f64 {
    t_au * AU_TIME_PICOSECONDS
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn au_time_conversion() {
        assert!((au_to_picoseconds(1.0) - 2.418884e-5).abs() < 1e-12);
    }
}
