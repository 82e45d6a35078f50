//! Command-line value parsers. `2^-k` (also `2^(-k)`) is read exactly.

pub fn parse_real(s: &str) -> Result<f64, String> {
    let t = s.trim();
    if let Some(e) = t.strip_prefix("2^") {
        let e = e.trim_start_matches('(').trim_end_matches(')');
        let k: i32 = e.parse().map_err(|_| format!("bad exponent in `{s}`"))?;
        return Ok(2f64.powi(k));
    }
    let x: f64 = t.parse().map_err(|_| format!("not a number: `{s}`"))?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(format!("not finite: `{s}`"))
    }
}

pub fn parse_real_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',').map(parse_real).collect()
}

/// Comma list of integers and inclusive ranges `a..=b` (or `a..b`, exclusive).
pub fn parse_u32_list(s: &str) -> Result<Vec<u32>, String> {
    let mut out = Vec::new();
    for part in s.split(',') {
        let p = part.trim();
        let num = |x: &str| x.trim().parse::<u32>().map_err(|_| format!("not a level: `{x}`"));
        if let Some((a, b)) = p.split_once("..=") {
            let (a, b) = (num(a)?, num(b)?);
            if a > b {
                return Err(format!("empty range `{p}`"));
            }
            out.extend(a..=b);
        } else if let Some((a, b)) = p.split_once("..") {
            let (a, b) = (num(a)?, num(b)?);
            if a >= b {
                return Err(format!("empty range `{p}`"));
            }
            out.extend(a..b);
        } else {
            out.push(num(p)?);
        }
    }
    Ok(out)
}
