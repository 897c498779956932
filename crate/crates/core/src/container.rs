//! Binary container for masks, coefficient fields and frequency signals.
//!
//! Layout: the 8-byte magic `HSCONT01`, a little-endian `u64` header length, a JSON header,
//! then a little-endian payload. Masks store one byte per cell in row-major order.
//! Fields and signals store interleaved `f64` real and imaginary parts.

use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hyperbolic::{make_grid, mask_from_primitives, GridSpec, Primitive, RegionMask};
use crate::transform::{CoefficientField, FreqSignal};
use crate::wavelet::WaveletIndex;

pub const MAGIC: &[u8; 8] = b"HSCONT01";
const MAX_HEADER: u64 = 1 << 26;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Header {
    Mask { grid: GridSpec, primitives: Vec<Primitive>, cells: usize },
    Field { grid: GridSpec, wavelet: WaveletIndex, cells: usize },
    Signal { xi_min: f64, dxi: f64, count: usize },
}

/// Decoded container contents.
#[derive(Debug, Clone)]
pub enum Container {
    Mask(RegionMask),
    Field(CoefficientField),
    Signal(FreqSignal),
}

fn write_raw(out: &mut impl Write, header: &Header, payload: &[u8]) -> Result<()> {
    let json = serde_json::to_vec(header)?;
    out.write_all(MAGIC)?;
    out.write_all(&(json.len() as u64).to_le_bytes())?;
    out.write_all(&json)?;
    out.write_all(payload)?;
    Ok(())
}

fn complex_bytes(values: &[Complex64]) -> Vec<u8> {
    values
        .iter()
        .flat_map(|v| v.re.to_le_bytes().into_iter().chain(v.im.to_le_bytes()))
        .collect()
}

fn complex_from_bytes(bytes: &[u8], count: usize) -> Result<Vec<Complex64>> {
    if bytes.len() != 16 * count {
        return Err(Error::Format(format!("payload has {} bytes, expected {}", bytes.len(), 16 * count)));
    }
    Ok(bytes
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
            Complex64::new(re, im)
        })
        .collect())
}

pub fn write_mask(out: &mut impl Write, mask: &RegionMask) -> Result<()> {
    let header = Header::Mask {
        grid: *mask.grid().spec(),
        primitives: mask.primitives().to_vec(),
        cells: mask.indicator().len(),
    };
    let payload: Vec<u8> = mask.indicator().iter().map(|&b| b as u8).collect();
    write_raw(out, &header, &payload)
}

pub fn write_field(out: &mut impl Write, field: &CoefficientField) -> Result<()> {
    let header = Header::Field {
        grid: *field.grid().spec(),
        wavelet: field.wavelet(),
        cells: field.values().len(),
    };
    write_raw(out, &header, &complex_bytes(field.values()))
}

pub fn write_signal(out: &mut impl Write, signal: &FreqSignal) -> Result<()> {
    let header = Header::Signal {
        xi_min: signal.xi_min(),
        dxi: signal.dxi(),
        count: signal.len(),
    };
    write_raw(out, &header, &complex_bytes(signal.values()))
}

/// Reads any container kind. Masks are rebuilt from their primitives and checked against the stored cells.
pub fn read(input: &mut impl Read) -> Result<Container> {
    let mut magic = [0u8; 8];
    input.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let mut len = [0u8; 8];
    input.read_exact(&mut len)?;
    let len = u64::from_le_bytes(len);
    if len > MAX_HEADER {
        return Err(Error::Format(format!("header length {len} is implausible")));
    }
    let mut json = vec![0u8; len as usize];
    input.read_exact(&mut json)?;
    let header: Header = serde_json::from_slice(&json)?;
    let mut payload = Vec::new();
    input.read_to_end(&mut payload)?;
    match header {
        Header::Mask { grid, primitives, cells } => {
            let g = make_grid(grid)?;
            if cells != g.len() || payload.len() != cells {
                return Err(Error::Format("mask payload does not match its grid".into()));
            }
            let mask = mask_from_primitives(&g, &primitives)?;
            let same = payload
                .iter()
                .zip(mask.indicator())
                .all(|(&b, &m)| (b != 0) == m && b <= 1);
            if !same {
                return Err(Error::Format("stored mask cells disagree with its primitives".into()));
            }
            Ok(Container::Mask(mask))
        }
        Header::Field { grid, wavelet, cells } => {
            let g = make_grid(grid)?;
            if cells != g.len() {
                return Err(Error::Format("field cell count does not match its grid".into()));
            }
            let values = complex_from_bytes(&payload, cells)?;
            Ok(Container::Field(CoefficientField::from_values(g, wavelet, values)?))
        }
        Header::Signal { xi_min, dxi, count } => {
            let values = complex_from_bytes(&payload, count)?;
            Ok(Container::Signal(FreqSignal::new(xi_min, dxi, values)?))
        }
    }
}

pub fn read_path(path: &Path) -> Result<Container> {
    read(&mut std::io::BufReader::new(std::fs::File::open(path)?))
}

fn save(path: &Path, f: impl FnOnce(&mut std::io::BufWriter<std::fs::File>) -> Result<()>) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    f(&mut out)?;
    out.flush()?;
    Ok(())
}

pub fn save_mask(path: &Path, mask: &RegionMask) -> Result<()> {
    save(path, |o| write_mask(o, mask))
}

pub fn save_field(path: &Path, field: &CoefficientField) -> Result<()> {
    save(path, |o| write_field(o, field))
}

pub fn save_signal(path: &Path, signal: &FreqSignal) -> Result<()> {
    save(path, |o| write_signal(o, signal))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hyperbolic::{DiskSpec, UHPoint};

    fn mask() -> RegionMask {
        let g = make_grid(GridSpec::new(-2.0, 2.0, 64, 0.25, 4.0, 32)).unwrap();
        let d = DiskSpec::new(UHPoint::I, 0.5).unwrap();
        mask_from_primitives(&g, &[Primitive::Disk(d)]).unwrap()
    }

    #[test]
    fn mask_round_trip() {
        let m = mask();
        let mut buf = Vec::new();
        write_mask(&mut buf, &m).unwrap();
        assert_eq!(&buf[..8], MAGIC);
        let Container::Mask(back) = read(&mut buf.as_slice()).unwrap() else {
            panic!("wrong kind")
        };
        assert_eq!(back.indicator(), m.indicator());
        assert_eq!(back.primitives(), m.primitives());
    }

    #[test]
    fn tampered_mask_rejected() {
        let m = mask();
        let mut buf = Vec::new();
        write_mask(&mut buf, &m).unwrap();
        let last = buf.len() - 1;
        buf[last] ^= 1;
        assert!(matches!(read(&mut buf.as_slice()), Err(Error::Format(_))));
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(matches!(read(&mut bad.as_slice()), Err(Error::Format(_))));
    }

    #[test]
    fn field_and_signal_round_trip_bit_exact() {
        let m = mask();
        let w = WaveletIndex::new(1, 2.5).unwrap();
        let field = CoefficientField::from_fn(m.grid(), w, |z| Complex64::new(z.x(), 1.0 / z.s())).unwrap();
        let mut buf = Vec::new();
        write_field(&mut buf, &field).unwrap();
        let Container::Field(back) = read(&mut buf.as_slice()).unwrap() else {
            panic!("wrong kind")
        };
        assert_eq!(back.wavelet(), w);
        assert!(back.values().iter().zip(field.values()).all(|(a, b)| a.re.to_bits() == b.re.to_bits() && a.im.to_bits() == b.im.to_bits()));

        let sig = FreqSignal::atom(2, 3.0, UHPoint::new(0.3, 1.5).unwrap(), 0.0, 0.01, 500).unwrap();
        let mut buf = Vec::new();
        write_signal(&mut buf, &sig).unwrap();
        let Container::Signal(back) = read(&mut buf.as_slice()).unwrap() else {
            panic!("wrong kind")
        };
        assert_eq!(back, sig);
        buf.truncate(buf.len() - 3);
        assert!(read(&mut buf.as_slice()).is_err());
    }
}
