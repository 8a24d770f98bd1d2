//! Browser bindings for the demo page in `www/`.

use wasm_bindgen::prelude::*;

use szego_core::heisenberg::GroupPoint;
use szego_core::io::to_json_string;
use szego_core::kernel::{kernel, s_closed_form, s_derivative_oracle, s_sum_form};
use szego_core::verification::{run_claim, ScanOptions};
use szego_core::{KernelConfig, Quaternion};

fn config(n: usize, c: f64) -> Result<KernelConfig, String> {
    KernelConfig::new(n, c).map_err(|e| e.to_string())
}

/// `s(σ)` by the sum form, the closed form and the derivative-polynomial
/// oracle: twelve numbers, four per form. The closed form is `NaN` near the
/// real axis, where it is undefined.
#[wasm_bindgen]
pub fn eval_s(n: usize, c: f64, x1: f64, x2: f64, x3: f64, x4: f64) -> Result<Vec<f64>, String> {
    let cfg = config(n, c)?;
    let sigma = Quaternion::new(x1, x2, x3, x4);
    let sum = s_sum_form(&sigma, &cfg).map_err(|e| e.to_string())?;
    let closed = s_closed_form(&sigma, &cfg).unwrap_or(Quaternion::new(f64::NAN, f64::NAN, f64::NAN, f64::NAN));
    let oracle = s_derivative_oracle(&sigma, &cfg).map_err(|e| e.to_string())?;
    Ok([sum, closed, oracle].iter().flat_map(|q| q.to_array()).collect())
}

/// `log10 |K(g)|` on a `width × height` grid of the plane spanned by `y1`
/// (horizontal, `[-extent, extent]`) and `t_alpha` (vertical,
/// `[-extent^2, extent^2]`), row-major from the top. `NaN` at the identity.
#[wasm_bindgen]
pub fn kernel_plane(
    n: usize,
    c: f64,
    alpha: usize,
    width: usize,
    height: usize,
    extent: f64,
) -> Result<Vec<f64>, String> {
    let cfg = config(n, c)?;
    if !(1..=3).contains(&alpha) {
        return Err(format!("alpha must be 1, 2 or 3, got {alpha}"));
    }
    if width < 2 || height < 2 || !(extent > 0.0) {
        return Err("need width, height ≥ 2 and a positive extent".into());
    }
    let dim = 3 + 4 * (n - 1);
    let mut out = Vec::with_capacity(width * height);
    for row in 0..height {
        let t = extent * extent * (1.0 - 2.0 * row as f64 / (height - 1) as f64);
        for col in 0..width {
            let y = extent * (2.0 * col as f64 / (width - 1) as f64 - 1.0);
            let mut coords = vec![0.0; dim];
            coords[alpha - 1] = t;
            coords[3] = y;
            let g = GroupPoint::from_coords(&coords).map_err(|e| e.to_string())?;
            out.push(kernel(&g, &cfg).map(|k| k.modulus().log10()).unwrap_or(f64::NAN));
        }
    }
    Ok(out)
}

/// One verification claim as a JSON report.
#[wasm_bindgen]
pub fn scan_claim(claim: &str, n: usize, c: f64, samples: usize, seed: u32) -> Result<String, String> {
    let cfg = config(n, c)?;
    let report = run_claim(claim, &cfg, &ScanOptions::new(samples, seed as u64)).map_err(|e| e.to_string())?;
    to_json_string(&report).map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_forms_agree() {
        let v = eval_s(2, 1.0, 1.0, 1.0, 0.0, 0.0).unwrap();
        for form in v.chunks(4) {
            assert!((form[1] + 1.0).abs() < 1e-13 && form[0].abs() < 1e-13);
        }
        let axis = eval_s(2, 1.0, 1.0, 0.0, 0.0, 0.0).unwrap();
        assert!(axis[4].is_nan());
        assert_eq!(axis[0], 12.0);
    }

    #[test]
    fn plane_has_a_pole_at_the_centre() {
        let v = kernel_plane(2, 1.0, 1, 5, 5, 1.0).unwrap();
        assert!(v[12].is_nan());
        // |K((1, 0))| = 4
        assert!((v[2] - 4f64.log10()).abs() < 1e-12);
        assert!(kernel_plane(2, 1.0, 4, 5, 5, 1.0).is_err());
    }

    #[test]
    fn claim_json() {
        let s = scan_claim("homogeneity", 2, 1.0, 50, 1).unwrap();
        assert!(s.contains("\"claim\": \"homogeneity\""));
        assert!(scan_claim("nope", 2, 1.0, 5, 1).is_err());
    }
}
