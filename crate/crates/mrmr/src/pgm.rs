//! Plain PGM (P2) export of debug maps and P2/P5 import for standalone
//! door-detection scoring.

use crate::cues::{BinaryMap, DistanceField};
use crate::{Error, Result};
use std::io::Write;
use std::path::Path;

fn write_p2(path: &Path, w: usize, h: usize, maxval: u32, values: impl Iterator<Item = u32>) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "P2")?;
    writeln!(f, "{w} {h}")?;
    writeln!(f, "{maxval}")?;
    let mut col = 0usize;
    for v in values {
        if col == w {
            writeln!(f)?;
            col = 0;
        } else if col > 0 {
            write!(f, " ")?;
        }
        write!(f, "{v}")?;
        col += 1;
    }
    writeln!(f)?;
    Ok(())
}

/// Writes a binary map as P2 (0 = free, 100 = occupied).
pub fn write_binary_map(path: &Path, b: &BinaryMap) -> Result<()> {
    write_p2(path, b.w, b.h, 100, b.data.iter().map(|&v| v as u32 * 100))
}

/// Writes a distance field as P2, values scaled x100 and clamped to 65535.
pub fn write_distance_field(path: &Path, d: &DistanceField) -> Result<()> {
    write_p2(
        path,
        d.w,
        d.h,
        65535,
        d.data.iter().map(|&v| ((v * 100.0).round() as u32).min(65535)),
    )
}

/// Reads a P2 or P5 PGM as a binary occupancy map: nonzero pixels are
/// occupied. `cell` sets the metric scale of the result.
pub fn read_binary_map(path: &Path, cell: f64) -> Result<BinaryMap> {
    let bytes = std::fs::read(path)?;
    if bytes.len() < 2 {
        return Err(Error::Parse("pgm too short".into()));
    }
    let magic = &bytes[..2];
    match magic {
        b"P2" => {
            let text = std::str::from_utf8(&bytes)
                .map_err(|_| Error::Parse("pgm is not valid utf-8".into()))?;
            let mut nums = text
                .lines()
                .filter(|l| !l.starts_with('#'))
                .flat_map(|l| l.split_whitespace())
                .skip(1); // past magic
            let mut next = || -> Result<u32> {
                nums.next()
                    .ok_or_else(|| Error::Parse("pgm truncated".into()))?
                    .parse()
                    .map_err(|_| Error::Parse("pgm bad integer".into()))
            };
            let w = next()? as usize;
            let h = next()? as usize;
            let _maxval = next()?;
            let mut b = BinaryMap::new(w, h, cell);
            for i in 0..w * h {
                let v = next()?;
                b.data[i] = (v != 0) as u8;
            }
            Ok(b)
        }
        b"P5" => {
            // header: magic, whitespace, w, h, maxval, single whitespace, raster
            let mut pos = 2usize;
            let mut read_token = |bytes: &[u8]| -> Result<(usize, usize)> {
                let mut p = pos;
                while p < bytes.len() && bytes[p].is_ascii_whitespace() {
                    p += 1;
                }
                while p < bytes.len() && bytes[p] == b'#' {
                    while p < bytes.len() && bytes[p] != b'\n' {
                        p += 1;
                    }
                    while p < bytes.len() && bytes[p].is_ascii_whitespace() {
                        p += 1;
                    }
                }
                let start = p;
                while p < bytes.len() && !bytes[p].is_ascii_whitespace() {
                    p += 1;
                }
                pos = p;
                Ok((start, p))
            };
            let parse_usize = |bytes: &[u8], range: (usize, usize)| -> Result<usize> {
                std::str::from_utf8(&bytes[range.0..range.1])
                    .ok()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| Error::Parse("pgm bad header".into()))
            };
            let wr = read_token(&bytes)?;
            let hr = read_token(&bytes)?;
            let mr = read_token(&bytes)?;
            let w = parse_usize(&bytes, wr)?;
            let h = parse_usize(&bytes, hr)?;
            let maxval = parse_usize(&bytes, mr)?;
            let raster = pos + 1;
            let bpp = if maxval > 255 { 2 } else { 1 };
            if bytes.len() < raster + w * h * bpp {
                return Err(Error::Parse("pgm raster truncated".into()));
            }
            let mut b = BinaryMap::new(w, h, cell);
            for i in 0..w * h {
                let v = if bpp == 1 {
                    bytes[raster + i] as u32
                } else {
                    u32::from(bytes[raster + 2 * i]) << 8 | u32::from(bytes[raster + 2 * i + 1])
                };
                b.data[i] = (v != 0) as u8;
            }
            Ok(b)
        }
        _ => Err(Error::Parse("not a P2/P5 pgm".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p2_roundtrip_binary() {
        let dir = tempfile::tempdir().unwrap();
        let mut b = BinaryMap::new(7, 5, 0.2);
        b.set(1, 1, 1);
        b.set(6, 4, 1);
        let path = dir.path().join("b.pgm");
        write_binary_map(&path, &b).unwrap();
        let back = read_binary_map(&path, 0.2).unwrap();
        assert_eq!(back, b);
    }

    #[test]
    fn distance_field_scaling_clamped() {
        let dir = tempfile::tempdir().unwrap();
        let d = DistanceField { w: 2, h: 1, cell: 0.2, data: vec![1.234, 9999.0] };
        let path = dir.path().join("d.pgm");
        write_distance_field(&path, &d).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.contains("123"));
        assert!(text.contains("65535"));
    }

    #[test]
    fn read_rejects_garbage() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.pgm");
        std::fs::write(&path, b"JUNK").unwrap();
        assert!(read_binary_map(&path, 0.2).is_err());
    }
}
