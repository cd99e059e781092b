//! Directories of 8-bit PNG frames named `frame_%05d.png`.

use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use super::{Dims, FrameSequence};
use crate::error::{Error, Result};

/// Loads every `*.png` in `dir`, in lexicographic order, mapping byte `v` to `v / 255`.
pub fn import_png_dir(dir: impl AsRef<Path>) -> Result<FrameSequence> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir.as_ref())?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("png")))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(Error::validation(format!(
            "no PNG frames in {}",
            dir.as_ref().display()
        )));
    }
    let mut shape: Option<(usize, usize, usize)> = None;
    let mut data = Vec::new();
    for p in &paths {
        let (h, w, c, bytes) = read_png(p)?;
        match shape {
            None => shape = Some((h, w, c)),
            Some(s) if s != (h, w, c) => {
                return Err(Error::validation(format!(
                    "{} is {h}x{w}x{c}, earlier frames are {}x{}x{}",
                    p.display(),
                    s.0,
                    s.1,
                    s.2
                )))
            }
            _ => {}
        }
        data.extend(bytes.iter().map(|&b| b as f64 / 255.0));
    }
    let (h, w, c) = shape.expect("at least one frame");
    FrameSequence::new(Dims::new(paths.len(), h, w, c), data)
}

fn read_png(path: &Path) -> Result<(usize, usize, usize, Vec<u8>)> {
    let file = BufReader::new(fs::File::open(path)?);
    let decoder = png::Decoder::new(file);
    let mut reader = decoder
        .read_info()
        .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| Error::Format(format!("{}: image too large", path.display())))?;
    let mut buf = vec![0u8; size];
    let info = reader
        .next_frame(&mut buf)
        .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    if info.bit_depth != png::BitDepth::Eight {
        return Err(Error::validation(format!("{}: only 8-bit PNG is supported", path.display())));
    }
    let channels = match info.color_type {
        png::ColorType::Grayscale => 1,
        png::ColorType::Rgb => 3,
        other => {
            return Err(Error::validation(format!(
                "{}: unsupported color type {other:?}",
                path.display()
            )))
        }
    };
    let (h, w) = (info.height as usize, info.width as usize);
    let line = w * channels;
    let mut out = Vec::with_capacity(h * line);
    for row in buf.chunks(info.line_size).take(h) {
        out.extend_from_slice(&row[..line]);
    }
    Ok((h, w, channels, out))
}

/// Quantizes a value to 8 bits: clamp to `[0, 1]`, then round half up.
pub(crate) fn quantize_u8(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0 + 0.5).floor() as u8
}

/// Writes `frame_00000.png`, `frame_00001.png`, ... into `dir` (created if missing).
pub fn export_png_dir(seq: &FrameSequence, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let d = seq.dims();
    let color = if d.channels == 3 {
        png::ColorType::Rgb
    } else {
        png::ColorType::Grayscale
    };
    for (t, frame) in seq.frames().enumerate() {
        let path = dir.join(format!("frame_{t:05}.png"));
        let file = fs::File::create(&path)?;
        let mut enc = png::Encoder::new(std::io::BufWriter::new(file), d.width as u32, d.height as u32);
        enc.set_color(color);
        enc.set_depth(png::BitDepth::Eight);
        let bytes: Vec<u8> = frame.iter().map(|&v| quantize_u8(v)).collect();
        enc.write_header()
            .and_then(|mut w| w.write_image_data(&bytes))
            .map_err(|e| match e {
                png::EncodingError::IoError(io) => Error::Io(io),
                other => Error::Format(other.to_string()),
            })?;
    }
    Ok(())
}
