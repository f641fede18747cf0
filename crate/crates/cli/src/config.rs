use metspace::GridChart;

/// Parses `dim,shape,spacing,origin,periodic`. Each of the last four fields
/// is either one value for every axis or `:`-separated per-axis values;
/// periodic flags are 0 or 1.
pub fn parse_chart(spec: &str) -> Result<GridChart, String> {
    let fields: Vec<&str> = spec.split(',').map(str::trim).collect();
    if fields.len() != 5 {
        return Err(format!("expected dim,shape,spacing,origin,periodic, got {spec:?}"));
    }
    let dim: usize = fields[0].parse().map_err(|_| format!("bad dimension {:?}", fields[0]))?;
    if dim == 0 || dim > 4 {
        return Err(format!("dimension {dim} outside 1..=4"));
    }
    let shape = per_axis(fields[1], dim, "shape", |s| s.parse::<usize>().ok())?;
    let spacing = per_axis(fields[2], dim, "spacing", |s| s.parse::<f64>().ok())?;
    let origin = per_axis(fields[3], dim, "origin", |s| s.parse::<f64>().ok())?;
    let periodic = per_axis(fields[4], dim, "periodic", |s| match s {
        "0" => Some(false),
        "1" => Some(true),
        _ => None,
    })?;
    GridChart::new(origin, spacing, shape, periodic).map_err(|e| e.to_string())
}

fn per_axis<T: Clone>(field: &str, dim: usize, what: &str, parse: impl Fn(&str) -> Option<T>) -> Result<Vec<T>, String> {
    let parts: Vec<&str> = field.split(':').collect();
    let values = parts
        .iter()
        .map(|p| parse(p.trim()).ok_or_else(|| format!("bad {what} value {p:?}")))
        .collect::<Result<Vec<T>, String>>()?;
    match values.len() {
        1 => Ok(vec![values[0].clone(); dim]),
        n if n == dim => Ok(values),
        n => Err(format!("{what} has {n} values for {dim} axes")),
    }
}

/// `x:y` node pair.
pub fn parse_pair(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("expected x:y, got {s:?}"))?;
    let x = a.trim().parse().map_err(|_| format!("bad node {a:?}"))?;
    let y = b.trim().parse().map_err(|_| format!("bad node {b:?}"))?;
    Ok((x, y))
}
