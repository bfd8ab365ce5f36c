//! Test-only reference implementations, kept independent of the library's
//! rendering path.

use moiredb::moire::MoireImageSpec;

/// Brightness straight from the closed form, evaluated per pixel with
/// nothing precomputed: each pattern rendered to a float grid, rounded,
/// then averaged in floating point.
pub fn naive_moire(spec: &MoireImageSpec) -> Vec<u8> {
    let (w, h) = (spec.width, spec.height);
    let mut layers: Vec<Vec<f64>> = Vec::new();
    for p in &spec.patterns {
        let mut layer = vec![0.0; w * h];
        for y in 0..h {
            for x in 0..w {
                let px = x as f64 + 0.5;
                let py = y as f64 + 0.5;
                let r = ((px - p.center_x) * (px - p.center_x)
                    + (py - p.center_y) * (py - p.center_y))
                    .sqrt();
                let g = (p.amplitude * (p.nu * std::f64::consts::PI * r).cos() + 1.0) * 255.0 / 2.0;
                layer[y * w + x] = g.round().clamp(0.0, 255.0);
            }
        }
        layers.push(layer);
    }
    (0..w * h)
        .map(|i| {
            let mean = layers.iter().map(|l| l[i]).sum::<f64>() / layers.len() as f64;
            mean.round() as u8
        })
        .collect()
}
