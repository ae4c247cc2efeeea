//! Conversion between the table units used in scenario files and SI.
//!
//! Emission picks the representation that converts back to the exact same
//! SI double, so `load -> emit -> load` is an identity.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Unit {
    Micros,
    Milliwatts,
    Microjoules,
    Bytes,
    Mbps,
}

impl Unit {
    pub fn to_si(self, v: f64) -> f64 {
        match self {
            Unit::Micros => v / 1e6,
            Unit::Milliwatts => v / 1e3,
            Unit::Microjoules => v / 1e6,
            Unit::Bytes => v * 8.0,
            Unit::Mbps => v * 1e6,
        }
    }

    pub fn from_si(self, si: f64) -> f64 {
        let guess = match self {
            Unit::Micros => si * 1e6,
            Unit::Milliwatts => si * 1e3,
            Unit::Microjoules => si * 1e6,
            Unit::Bytes => si / 8.0,
            Unit::Mbps => si / 1e6,
        };
        if !guess.is_finite() || self.to_si(guess) == si {
            return guess;
        }
        // Walk a few ulps either side for a value that maps back exactly.
        let mut lo = guess;
        let mut hi = guess;
        for _ in 0..8 {
            lo = next_down(lo);
            hi = next_up(hi);
            if self.to_si(lo) == si {
                return lo;
            }
            if self.to_si(hi) == si {
                return hi;
            }
        }
        guess
    }
}

fn next_up(x: f64) -> f64 {
    if x.is_nan() || x == f64::INFINITY {
        return x;
    }
    if x == 0.0 {
        return f64::from_bits(1);
    }
    let bits = x.to_bits();
    if x > 0.0 {
        f64::from_bits(bits + 1)
    } else {
        f64::from_bits(bits - 1)
    }
}

fn next_down(x: f64) -> f64 {
    -next_up(-x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn table_values_convert() {
        assert_eq!(Unit::Micros.to_si(9.0), 9e-6);
        assert_eq!(Unit::Bytes.to_si(14.0), 112.0);
        assert_eq!(Unit::Mbps.to_si(5.5), 5.5e6);
        assert_eq!(Unit::Milliwatts.to_si(11.37), 0.01137);
    }

    const UNITS: [Unit; 5] = [
        Unit::Micros,
        Unit::Milliwatts,
        Unit::Microjoules,
        Unit::Bytes,
        Unit::Mbps,
    ];

    proptest! {
        #[test]
        fn emit_then_load_is_exact(v in 1e-3f64..1e4, u in 0usize..5) {
            let unit = UNITS[u];
            let si = unit.to_si(v);
            let back = unit.from_si(si);
            prop_assert_eq!(unit.to_si(back), si);
        }
    }
}
