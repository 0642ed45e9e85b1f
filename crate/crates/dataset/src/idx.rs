//! Reader for the IDX format used by MNIST-style digit corpora.

use std::path::Path;

use crate::error::{DataError, Result};
use crate::image::Image;

fn read(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|source| DataError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn parse_header(bytes: &[u8], type_code: u8) -> Result<(Vec<usize>, usize)> {
    if bytes.len() < 4 || bytes[0] != 0 || bytes[1] != 0 {
        return Err(DataError::Format("missing IDX magic".into()));
    }
    if bytes[2] != type_code {
        return Err(DataError::Format(format!(
            "IDX element type 0x{:02x}, expected 0x{type_code:02x}",
            bytes[2]
        )));
    }
    let ndim = bytes[3] as usize;
    let header_len = 4 + 4 * ndim;
    if bytes.len() < header_len {
        return Err(DataError::Truncated("IDX header".into()));
    }
    let dims: Vec<usize> = (0..ndim)
        .map(|i| u32::from_be_bytes(bytes[4 + 4 * i..8 + 4 * i].try_into().unwrap()) as usize)
        .collect();
    let total: usize = dims.iter().product();
    if bytes.len() < header_len + total {
        return Err(DataError::Truncated(format!(
            "IDX payload has {} of {total} bytes",
            bytes.len() - header_len
        )));
    }
    Ok((dims, header_len))
}

/// Parses an unsigned-byte IDX image file, normalizing pixels to [0, 1].
pub fn parse_images(bytes: &[u8]) -> Result<Vec<Image>> {
    let (dims, offset) = parse_header(bytes, 0x08)?;
    if dims.len() != 3 {
        return Err(DataError::Format(format!("image file has {} dimensions", dims.len())));
    }
    let (n, h, w) = (dims[0], dims[1], dims[2]);
    Ok((0..n)
        .map(|i| {
            let start = offset + i * h * w;
            Image {
                height: h,
                width: w,
                data: bytes[start..start + h * w].iter().map(|&b| b as f64 / 255.0).collect(),
            }
        })
        .collect())
}

pub fn parse_labels(bytes: &[u8]) -> Result<Vec<u32>> {
    let (dims, offset) = parse_header(bytes, 0x08)?;
    if dims.len() != 1 {
        return Err(DataError::Format(format!("label file has {} dimensions", dims.len())));
    }
    Ok(bytes[offset..offset + dims[0]].iter().map(|&b| b as u32).collect())
}

/// Loads an image/label file pair, checking that their counts agree.
pub fn load_pair(images: &Path, labels: &Path) -> Result<Vec<(Image, u32)>> {
    let imgs = parse_images(&read(images)?)?;
    let labs = parse_labels(&read(labels)?)?;
    if imgs.len() != labs.len() {
        return Err(DataError::Format(format!(
            "{} images but {} labels",
            imgs.len(),
            labs.len()
        )));
    }
    Ok(imgs.into_iter().zip(labs).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn idx_images(n: u32, h: u32, w: u32, data: &[u8]) -> Vec<u8> {
        let mut b = vec![0, 0, 8, 3];
        for d in [n, h, w] {
            b.extend_from_slice(&d.to_be_bytes());
        }
        b.extend_from_slice(data);
        b
    }

    #[test]
    fn parses_images_and_labels() {
        let bytes = idx_images(2, 2, 3, &[0, 255, 51, 0, 0, 0, 1, 2, 3, 4, 5, 255]);
        let imgs = parse_images(&bytes).unwrap();
        assert_eq!(imgs.len(), 2);
        assert_eq!(imgs[0].data[1], 1.0);
        assert!((imgs[0].data[2] - 0.2).abs() < 1e-12);
        let mut labels = vec![0, 0, 8, 1, 0, 0, 0, 2];
        labels.extend_from_slice(&[7, 3]);
        assert_eq!(parse_labels(&labels).unwrap(), vec![7, 3]);
    }

    #[test]
    fn rejects_truncation_and_wrong_type() {
        let bytes = idx_images(2, 2, 2, &[0; 7]);
        assert!(matches!(parse_images(&bytes), Err(DataError::Truncated(_))));
        let mut wrong = idx_images(1, 1, 1, &[0]);
        wrong[2] = 0x0D;
        assert!(parse_images(&wrong).is_err());
    }
}
