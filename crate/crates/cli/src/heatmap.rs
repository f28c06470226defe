//! Grayscale PGM rendering of coefficient matrices.

use deeplrr::Matrix;

/// Row-major gray levels `round(255 * |m_ij| / max |m|)`; all zero when `m` is.
pub fn quantize(m: &Matrix) -> Vec<u8> {
    let peak = m.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let mut px = Vec::with_capacity(m.len());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let level = if peak > 0.0 {
                (255.0 * m[(i, j)].abs() / peak).round()
            } else {
                0.0
            };
            px.push(level as u8);
        }
    }
    px
}

/// Binary `P5` image with maxval 255, one pixel per entry.
pub fn encode_pgm(m: &Matrix) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", m.ncols(), m.nrows()).into_bytes();
    out.extend(quantize(m));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_is_diagonal_white() {
        let px = quantize(&Matrix::identity(4, 4));
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(px[i * 4 + j], if i == j { 255 } else { 0 });
            }
        }
    }

    #[test]
    fn zero_matrix_is_black() {
        assert!(quantize(&Matrix::zeros(3, 5)).iter().all(|&p| p == 0));
    }

    #[test]
    fn header_and_rounding() {
        let m = Matrix::from_row_slice(1, 3, &[-2.0, 1.0, 0.5]);
        let img = encode_pgm(&m);
        let header = b"P5\n3 1\n255\n";
        assert_eq!(&img[..header.len()], header);
        // 127.5 and 63.75 round half away from zero
        assert_eq!(&img[header.len()..], &[255, 128, 64]);
    }
}
