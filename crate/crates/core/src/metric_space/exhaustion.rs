use crate::chart::GridChart;
use crate::error::{Error, Result};
use crate::field::build_field_with_cap;
use crate::linalg::Mat;

use super::{dl, DivergenceCertificate, ExtendedDistance};

/// Box distances above this value that still grow are reported as +∞.
pub const DL_INFINITY_THRESHOLD: f64 = 50.0;

/// Distance between two generated metrics on the boxes [-r, r]^dim for
/// increasing r. Each box uses `nodes_per_unit` grid steps per unit length
/// (at least one step per axis). If the last value exceeds
/// [`DL_INFINITY_THRESHOLD`] and the values grow strictly over the last three
/// radii, the result is +∞ with the radii and values as certificate;
/// otherwise it is the last finite value, flagged as truncated.
pub fn dl_exhaustion<G, H>(g_gen: G, h_gen: H, dim: usize, radii: &[f64], nodes_per_unit: f64) -> Result<ExtendedDistance>
where
    G: Fn(&[f64]) -> Mat + Sync,
    H: Fn(&[f64]) -> Mat + Sync,
{
    if radii.is_empty() {
        return Err(Error::InvalidArgument("no radii given".into()));
    }
    if radii.windows(2).any(|w| !(w[1] > w[0])) || !(radii[0] > 0.0) {
        return Err(Error::InvalidArgument("radii must be positive and strictly ascending".into()));
    }
    let mut values = Vec::with_capacity(radii.len());
    let mut last_node = None;
    for &r in radii {
        let steps = ((2.0 * r * nodes_per_unit).round() as usize).max(1);
        let h = 2.0 * r / steps as f64;
        let chart = GridChart::new(vec![-r; dim], vec![h; dim], vec![steps + 1; dim], vec![false; dim])?;
        let g = build_field_with_cap(&chart, &g_gen, 1.0)?;
        let hf = build_field_with_cap(&chart, &h_gen, 1.0)?;
        let d = dl(&g, &hf)?;
        values.push(d.value);
        last_node = d.argmax_node;
    }
    let n = values.len();
    let growing = n >= 3 && values[n - 3] < values[n - 2] && values[n - 2] < values[n - 1];
    let profile: Vec<(f64, f64)> = radii.iter().cloned().zip(values.iter().cloned()).collect();
    if growing && values[n - 1] > DL_INFINITY_THRESHOLD {
        return Ok(ExtendedDistance {
            value: f64::INFINITY,
            argmax_node: None,
            certificate: Some(DivergenceCertificate {
                radii: radii.to_vec(),
                values,
                threshold: DL_INFINITY_THRESHOLD,
            }),
            truncated: false,
            profile,
        });
    }
    Ok(ExtendedDistance { value: values[n - 1], argmax_node: last_node, certificate: None, truncated: true, profile })
}
