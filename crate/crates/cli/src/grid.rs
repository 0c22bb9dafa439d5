//! Parsing of numeric flags: plain numbers, `lnX`, lists, and
//! `start:stop:count` grids.

/// A number, or `lnX` for the natural log of `X` (so `ln2` is `ln 2`).
pub fn parse_value(token: &str) -> Result<f64, String> {
    let t = token.trim();
    let v = match t.strip_prefix("ln") {
        Some(rest) => {
            let x: f64 = rest.parse().map_err(|_| format!("cannot parse {t:?}"))?;
            if !(x > 0.0) {
                return Err(format!("{t:?}: logarithm of a non-positive number"));
            }
            x.ln()
        }
        None => t.parse().map_err(|_| format!("cannot parse {t:?} as a number"))?,
    };
    if !v.is_finite() {
        return Err(format!("{t:?} is not finite"));
    }
    Ok(v)
}

/// `start:stop:count` (linear, or geometric with `log`) or a comma-separated list.
pub fn parse_grid(spec: &str, log: bool) -> Result<Vec<f64>, String> {
    let spec = spec.trim();
    if spec.is_empty() {
        return Err("empty grid".into());
    }
    if !spec.contains(':') {
        if log {
            return Err("--log needs a start:stop:count grid".into());
        }
        return spec.split(',').map(parse_value).collect();
    }
    let parts: Vec<&str> = spec.split(':').collect();
    let [start, stop, count] = parts[..] else {
        return Err(format!("{spec:?} is not of the form start:stop:count"));
    };
    let start = parse_value(start)?;
    let stop = parse_value(stop)?;
    let count: usize = count
        .trim()
        .parse()
        .map_err(|_| format!("count {count:?} is not a positive integer"))?;
    if count == 0 {
        return Err("grid count must be at least 1".into());
    }
    if count == 1 {
        return Ok(vec![start]);
    }
    if log && !(start > 0.0 && stop > 0.0) {
        return Err("a geometric grid needs positive start and stop".into());
    }
    let last = (count - 1) as f64;
    Ok((0..count)
        .map(|i| {
            if i == count - 1 {
                return stop;
            }
            let t = i as f64 / last;
            if log {
                (start.ln() + t * (stop.ln() - start.ln())).exp()
            } else {
                start + t * (stop - start)
            }
        })
        .collect())
}

/// Requires a strictly increasing grid of non-negative values.
pub fn check_increasing(grid: &[f64]) -> Result<(), String> {
    if grid.iter().any(|&e| e < 0.0) {
        return Err("values must be non-negative".into());
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err("values must be strictly increasing".into());
    }
    Ok(())
}
