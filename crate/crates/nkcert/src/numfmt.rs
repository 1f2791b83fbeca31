//! Deterministic decimal rendering of floating-point values.
//!
//! Table outputs are meant to be diffable and reproducible bit for bit, so
//! every number is printed in plain decimal notation with 17 significant
//! digits — enough for an exact `f64` round trip — rather than through the
//! locale- and implementation-sensitive default formatting.

/// Render `x` in decimal notation with 17 significant digits.
///
/// `0` renders as `"0"`; non-finite values render as `"nan"`, `"inf"`,
/// `"-inf"`. The output parses back to exactly the same bits.
pub fn sig17(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let exponent = x.abs().log10().floor() as i32;
    let decimals = (16 - exponent).max(0) as usize;
    format!("{:.*}", decimals, x)
}

#[cfg(test)]
mod tests {
    use super::sig17;

    #[test]
    fn plain_decimal_with_17_significant_digits() {
        assert_eq!(sig17(0.0), "0");
        assert_eq!(sig17(1.5), "1.5000000000000000");
        assert_eq!(sig17(12.5), "12.500000000000000");
        assert_eq!(sig17(0.36754446796632406), "0.36754446796632406");
        assert_eq!(sig17(-0.25), "-0.25000000000000000");
        assert_eq!(sig17(f64::NAN), "nan");
        assert_eq!(sig17(f64::INFINITY), "inf");
    }

    #[test]
    fn roundtrips_exactly() {
        for &x in &[
            0.1,
            1.0 / 3.0,
            2.0_f64.sqrt(),
            1e-13,
            123456.789,
            -9.869604401089358e-5,
        ] {
            let s = sig17(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{x} -> {s} -> {back}");
        }
    }
}
