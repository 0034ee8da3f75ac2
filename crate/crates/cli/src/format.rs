/// `2.834e-02` style with `digits` significant digits, or the shortest
/// round-trip form when `full` is set.
pub fn sci(v: f64, digits: usize, full: bool) -> String {
    let raw = if full {
        format!("{v:e}")
    } else {
        format!("{:.*e}", digits.saturating_sub(1), v)
    };
    match raw.split_once('e') {
        Some((mantissa, exp)) => {
            let (sign, digits) = match exp.strip_prefix('-') {
                Some(d) => ('-', d),
                None => ('+', exp),
            };
            format!("{mantissa}e{sign}{digits:0>2}")
        }
        None => raw,
    }
}

/// Order column: two decimals, `n/a` when undefined.
pub fn order(v: Option<f64>, full: bool) -> String {
    match v {
        Some(x) if full => format!("{x}"),
        Some(x) => format!("{x:.2}"),
        None => "n/a".to_string(),
    }
}
