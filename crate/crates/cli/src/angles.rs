//! Angle arguments: plain radians or rational multiples of pi.

use std::f64::consts::PI;

/// Parse `0.785`, `pi`, `-pi/4`, `3pi/4`, `2*pi/3`, `π/2`.
pub fn parse_angle(raw: &str) -> Result<f64, String> {
    let text: String = raw
        .trim()
        .to_ascii_lowercase()
        .replace('π', "pi")
        .chars()
        .filter(|c| !c.is_whitespace())
        .collect();
    if text.is_empty() {
        return Err("empty angle".into());
    }
    if let Ok(v) = text.parse::<f64>() {
        return finite(v, raw);
    }
    let (sign, body) = match text.strip_prefix('-') {
        Some(rest) => (-1.0, rest),
        None => (1.0, text.strip_prefix('+').unwrap_or(&text)),
    };
    let (num, den) = match body.split_once('/') {
        Some((n, d)) => {
            let d: f64 = d
                .parse()
                .map_err(|_| format!("bad denominator in angle {raw:?}"))?;
            if d == 0.0 {
                return Err(format!("zero denominator in angle {raw:?}"));
            }
            (n, d)
        }
        None => (body, 1.0),
    };
    let coeff = match num.strip_suffix("pi") {
        Some(c) => {
            let c = c.strip_suffix('*').unwrap_or(c);
            if c.is_empty() {
                PI
            } else {
                c.parse::<f64>()
                    .map_err(|_| format!("bad coefficient in angle {raw:?}"))?
                    * PI
            }
        }
        None => num
            .parse::<f64>()
            .map_err(|_| format!("cannot parse angle {raw:?}"))?,
    };
    finite(sign * coeff / den, raw)
}

fn finite(v: f64, raw: &str) -> Result<f64, String> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("angle {raw:?} is not finite"))
    }
}

/// Comma-separated list of angles.
pub fn parse_angle_list(raw: &str) -> Result<Vec<f64>, String> {
    raw.split(',').map(parse_angle).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forms() {
        assert_eq!(parse_angle("0.5").unwrap(), 0.5);
        assert_eq!(parse_angle("pi").unwrap(), PI);
        assert_eq!(parse_angle("-pi/4").unwrap(), -PI / 4.0);
        assert_eq!(parse_angle("3pi/4").unwrap(), 3.0 * PI / 4.0);
        assert_eq!(parse_angle("2*pi/3").unwrap(), 2.0 * PI / 3.0);
        assert_eq!(parse_angle(" π/2 ").unwrap(), PI / 2.0);
        assert_eq!(parse_angle("+pi/3").unwrap(), PI / 3.0);
        assert!(parse_angle("pi/0").is_err());
        assert!(parse_angle("tau").is_err());
        assert!(parse_angle("").is_err());
        assert_eq!(
            parse_angle_list("pi/4,-pi/4,0,pi/2").unwrap(),
            vec![PI / 4.0, -PI / 4.0, 0.0, PI / 2.0]
        );
    }
}
