//! Serialization of extended reals: infinities are written as the strings
//! `"inf"` / `"-inf"` so JSON output round-trips.

use serde::Serializer;

pub fn ext_f64<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_infinite() {
        s.serialize_str(if *v > 0.0 { "inf" } else { "-inf" })
    } else {
        s.serialize_f64(*v)
    }
}

pub fn opt_ext_f64<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(x) => ext_f64(x, s),
        None => s.serialize_none(),
    }
}

/// Decimal text with 17 significant digits; `inf` for positive infinity.
pub fn format_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{v:.16e}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits_round_trip() {
        for v in [1.0 / std::f64::consts::PI, 0.1, -2.5e-300, 6.02e23, 0.0] {
            let s = format_f64(v);
            let mantissa = s.split('e').next().unwrap().trim_start_matches('-');
            assert_eq!(mantissa.replace('.', "").len(), 17, "{s}");
            assert_eq!(s.parse::<f64>().unwrap(), v);
        }
        assert_eq!(format_f64(f64::INFINITY), "inf");
    }
}
