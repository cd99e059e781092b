//! The VSEQ container.
//!
//! Layout (little-endian throughout), 24 header bytes followed by the payload:
//!
//! | offset | size | field                         |
//! |--------|------|-------------------------------|
//! | 0      | 4    | magic `VSEQ`                  |
//! | 4      | 4    | version (u32, currently 1)    |
//! | 8      | 4    | frames T (u32)                |
//! | 12     | 4    | height H (u32)                |
//! | 16     | 4    | width W (u32)                 |
//! | 20     | 2    | channels C (u16)              |
//! | 22     | 2    | dtype code (u16, 1 = binary32)|
//! | 24     | 4·N  | samples, `(t,h,w,c)` row-major |

use std::fs;
use std::io::{self, Read};
use std::path::Path;

use super::{Dims, FrameSequence};
use crate::error::{Error, Result};

pub const VSEQ_MAGIC: [u8; 4] = *b"VSEQ";
pub const VSEQ_VERSION: u32 = 1;
pub const HEADER_LEN: usize = 24;
const DTYPE_F32: u16 = 1;

/// Serializes a sequence into VSEQ bytes.
pub fn vseq_bytes(seq: &FrameSequence) -> Result<Vec<u8>> {
    let d = seq.dims();
    let mut out = Vec::with_capacity(HEADER_LEN + 4 * d.len());
    out.extend_from_slice(&VSEQ_MAGIC);
    out.extend_from_slice(&VSEQ_VERSION.to_le_bytes());
    for v in [d.frames, d.height, d.width] {
        let v = u32::try_from(v).map_err(|_| Error::validation("dimension exceeds u32"))?;
        out.extend_from_slice(&v.to_le_bytes());
    }
    out.extend_from_slice(&(d.channels as u16).to_le_bytes());
    out.extend_from_slice(&DTYPE_F32.to_le_bytes());
    for (i, &v) in seq.data().iter().enumerate() {
        let s = v as f32;
        if !s.is_finite() {
            return Err(Error::validation(format!(
                "value {v} at index {i} is not representable as binary32"
            )));
        }
        out.extend_from_slice(&s.to_le_bytes());
    }
    Ok(out)
}

pub fn write_vseq(seq: &FrameSequence, path: impl AsRef<Path>) -> Result<()> {
    let bytes = vseq_bytes(seq)?;
    fs::write(path, bytes)?;
    Ok(())
}

pub fn read_vseq(path: impl AsRef<Path>) -> Result<FrameSequence> {
    let mut file = fs::File::open(path)?;
    let mut header = [0u8; HEADER_LEN];
    file.read_exact(&mut header)?;
    let dims = parse_header(&header)?;
    let mut payload = vec![0u8; 4 * dims.len()];
    file.read_exact(&mut payload)?;
    let mut rest = [0u8; 1];
    if file.read(&mut rest)? != 0 {
        return Err(Error::Format("trailing bytes after payload".into()));
    }
    let data = payload
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64)
        .collect();
    FrameSequence::new(dims, data)
}

fn parse_header(h: &[u8; HEADER_LEN]) -> Result<Dims> {
    if h[0..4] != VSEQ_MAGIC {
        return Err(Error::Format(format!("bad magic {:?}", String::from_utf8_lossy(&h[0..4]))));
    }
    let u32_at = |o: usize| u32::from_le_bytes([h[o], h[o + 1], h[o + 2], h[o + 3]]);
    let version = u32_at(4);
    if version != VSEQ_VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let dtype = u16::from_le_bytes([h[22], h[23]]);
    if dtype != DTYPE_F32 {
        return Err(Error::Format(format!("unsupported dtype code {dtype}")));
    }
    let dims = Dims::new(
        u32_at(8) as usize,
        u32_at(12) as usize,
        u32_at(16) as usize,
        u16::from_le_bytes([h[20], h[21]]) as usize,
    );
    dims.validate()
        .map_err(|e| Error::Format(format!("invalid header dimensions: {e}")))?;
    // Refuse absurd headers before allocating.
    dims.frames
        .checked_mul(dims.frame_len())
        .and_then(|n| n.checked_mul(4))
        .ok_or_else(|| Error::Io(io::Error::new(io::ErrorKind::InvalidData, "payload size overflows")))?;
    Ok(dims)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn zero_sequence_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("z.vseq");
        let seq = FrameSequence::zeros(Dims::new(2, 4, 4, 1)).unwrap();
        write_vseq(&seq, &p).unwrap();
        let back = read_vseq(&p).unwrap();
        assert_eq!(back, seq);
        assert_eq!(fs::read(&p).unwrap(), vseq_bytes(&back).unwrap());
    }

    #[test]
    fn file_length_formula() {
        let dir = tempfile::tempdir().unwrap();
        for (dims, expect) in [
            (Dims::new(1, 2, 2, 1), 40u64),
            (Dims::new(4, 16, 16, 3), 24 + 12288),
        ] {
            let p = dir.path().join(format!("{dims}.vseq"));
            write_vseq(&FrameSequence::filled(dims, 0.25).unwrap(), &p).unwrap();
            assert_eq!(fs::metadata(&p).unwrap().len(), expect);
            assert_eq!(expect, (HEADER_LEN + 4 * dims.len()) as u64);
        }
    }

    #[test]
    fn writes_are_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let seq = FrameSequence::filled(Dims::new(1, 2, 2, 1), 0.3).unwrap();
        let (a, b) = (dir.path().join("a"), dir.path().join("b"));
        write_vseq(&seq, &a).unwrap();
        write_vseq(&seq, &b).unwrap();
        assert_eq!(fs::read(a).unwrap(), fs::read(b).unwrap());
    }

    #[test]
    fn random_rgb_roundtrip() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let dims = Dims::new(3, 8, 8, 3);
        let data: Vec<f64> = (0..dims.len()).map(|_| rng.random::<f32>() as f64).collect();
        let seq = FrameSequence::new(dims, data).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.vseq");
        write_vseq(&seq, &p).unwrap();
        assert_eq!(read_vseq(&p).unwrap(), seq);
    }

    #[test]
    fn bad_magic_is_a_format_error() {
        let mut bytes = vseq_bytes(&FrameSequence::zeros(Dims::new(1, 2, 2, 1)).unwrap()).unwrap();
        bytes[3] = b'X';
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.vseq");
        fs::write(&p, &bytes).unwrap();
        assert!(matches!(read_vseq(&p), Err(Error::Format(_))));
    }

    #[test]
    fn bad_version_and_dtype() {
        let base = vseq_bytes(&FrameSequence::zeros(Dims::new(1, 2, 2, 1)).unwrap()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("v.vseq");
        let mut b = base.clone();
        b[4] = 9;
        fs::write(&p, &b).unwrap();
        assert!(matches!(read_vseq(&p), Err(Error::Format(_))));
        let mut b = base;
        b[22] = 2;
        fs::write(&p, &b).unwrap();
        assert!(matches!(read_vseq(&p), Err(Error::Format(_))));
    }

    #[test]
    fn truncated_payload_is_io_error() {
        let bytes = vseq_bytes(&FrameSequence::zeros(Dims::new(2, 4, 4, 1)).unwrap()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.vseq");
        fs::write(&p, &bytes[..bytes.len() - 3]).unwrap();
        assert!(matches!(read_vseq(&p), Err(Error::Io(_))));
    }

    #[test]
    fn non_finite_payload_is_validation_error() {
        let mut bytes = vseq_bytes(&FrameSequence::zeros(Dims::new(1, 1, 2, 1)).unwrap()).unwrap();
        bytes[24..28].copy_from_slice(&f32::NAN.to_le_bytes());
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("n.vseq");
        fs::write(&p, &bytes).unwrap();
        assert!(matches!(read_vseq(&p), Err(Error::Validation(_))));
    }

    #[test]
    fn unwritable_path_is_io_error() {
        let seq = FrameSequence::zeros(Dims::new(1, 1, 1, 1)).unwrap();
        let r = write_vseq(&seq, "/nonexistent-dir/x/y.vseq");
        assert!(matches!(r, Err(Error::Io(_))));
    }
}
