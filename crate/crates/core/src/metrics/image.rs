use crate::image::RgbImage;

use super::MetricsError;

/// Peak signal-to-noise ratio in dB for [0, 1] images: `10 log10(1 / MSE)`.
/// Identical images give `f64::INFINITY`.
pub fn psnr(a: &RgbImage, b: &RgbImage) -> Result<f64, MetricsError> {
    if (a.width(), a.height()) != (b.width(), b.height()) {
        return Err(MetricsError::ShapeMismatch(a.width(), a.height(), b.width(), b.height()));
    }
    let n = a.pixels().len() * 3;
    if n == 0 {
        return Ok(f64::INFINITY);
    }
    let sse: f64 = a
        .pixels()
        .iter()
        .zip(b.pixels())
        .flat_map(|(p, q)| (0..3).map(move |c| p[c] as f64 - q[c] as f64))
        .map(|d| d * d)
        .sum();
    let mse = sse / n as f64;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (1.0 / mse).log10())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_is_infinite() {
        let a = RgbImage::filled(4, 4, [0.3, 0.2, 0.1]);
        assert_eq!(psnr(&a, &a).unwrap(), f64::INFINITY);
    }

    #[test]
    fn half_gray_closed_form() {
        let a = RgbImage::black(8, 8);
        let b = RgbImage::filled(8, 8, [0.5; 3]);
        let p = psnr(&a, &b).unwrap();
        assert!((p - 10.0 * 4f64.log10()).abs() < 1e-12);
        assert!((p - 6.0206).abs() < 1e-4);
    }

    #[test]
    fn shape_mismatch() {
        assert_eq!(
            psnr(&RgbImage::black(2, 3), &RgbImage::black(3, 2)),
            Err(MetricsError::ShapeMismatch(2, 3, 3, 2))
        );
    }
}
