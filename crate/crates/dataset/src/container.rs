//! Binary dataset container.
//!
//! Layout (all integers and floats little-endian):
//!
//! ```text
//! magic            8 bytes  "DPCNNDS1"
//! version          u32
//! led_count        u32
//! height, width    u32, u32
//! example_count    u64
//! class_count      u32
//! noise_reference  f64
//! global_seed      u64
//! grid             side u32, pitch f64, wavelength f64
//! sensor           side u32, readout_sigma f64, sample_sigma f64
//! phase params     n f64, thickness f64, wavelength f64, alpha f64, convention u8
//! elastic          sigma f64, amplitude f64
//! led table        na f64, then per LED: sx f64, sy f64, ring u32, bright_field u8
//! object ids       u64 × example_count
//! header_crc       u32  CRC32 of every byte above
//! payload_crc      u32  CRC32 of the payload
//! payload          per example: led_count×height×width f32, then label u32
//! ```

use std::path::Path;

use dpcnn_optics::{GridSpec, Led, LedArray, SensorSpec};

use crate::augment::ElasticSpec;
use crate::error::{DataError, Result};
use crate::object::{AmplitudeConvention, PhaseObjectParams};
use crate::stack::SubImageStack;

pub const MAGIC: &[u8; 8] = b"DPCNNDS1";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetHeader {
    pub led_count: usize,
    pub height: usize,
    pub width: usize,
    pub class_count: usize,
    pub noise_reference: f64,
    pub global_seed: u64,
    pub grid: GridSpec,
    pub sensor: SensorSpec,
    pub params: PhaseObjectParams,
    pub elastic: ElasticSpec,
    pub array: LedArray,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub header: DatasetHeader,
    pub examples: Vec<SubImageStack>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    /// Same header, a different subset of examples.
    pub fn with_examples(&self, examples: Vec<SubImageStack>) -> Dataset {
        Dataset {
            header: self.header.clone(),
            examples,
        }
    }

    fn check_shapes(&self) -> Result<()> {
        let h = &self.header;
        if h.array.len() != h.led_count {
            return Err(DataError::Format(format!(
                "header lists {} LEDs but led_count is {}",
                h.array.len(),
                h.led_count
            )));
        }
        for (i, ex) in self.examples.iter().enumerate() {
            if (ex.led_count, ex.height, ex.width) != (h.led_count, h.height, h.width) {
                return Err(DataError::Dimension(format!(
                    "example {i} is {}×{}×{}, header says {}×{}×{}",
                    ex.led_count, ex.height, ex.width, h.led_count, h.height, h.width
                )));
            }
        }
        Ok(())
    }
}

struct Writer(Vec<u8>);

impl Writer {
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    fn u32(&mut self, v: u32) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn usize32(&mut self, v: usize) -> Result<()> {
        let v = u32::try_from(v).map_err(|_| DataError::Format(format!("{v} does not fit in u32")))?;
        self.u32(v);
        Ok(())
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        if self.bytes.len() - self.pos < n {
            return Err(DataError::Truncated(format!("ended inside {what}")));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }
    fn u8(&mut self, what: &str) -> Result<u8> {
        Ok(self.take(1, what)?[0])
    }
    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }
    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }
    fn f64(&mut self, what: &str) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }
}

/// Serializes a dataset to bytes.
pub fn encode(dataset: &Dataset) -> Result<Vec<u8>> {
    dataset.check_shapes()?;
    let h = &dataset.header;
    let mut w = Writer(Vec::new());
    w.0.extend_from_slice(MAGIC);
    w.u32(FORMAT_VERSION);
    w.usize32(h.led_count)?;
    w.usize32(h.height)?;
    w.usize32(h.width)?;
    w.u64(dataset.examples.len() as u64);
    w.usize32(h.class_count)?;
    w.f64(h.noise_reference);
    w.u64(h.global_seed);
    w.usize32(h.grid.side_px)?;
    w.f64(h.grid.pitch);
    w.f64(h.grid.wavelength);
    w.usize32(h.sensor.side_px)?;
    w.f64(h.sensor.readout_sigma);
    w.f64(h.sensor.sample_sigma);
    w.f64(h.params.refractive_index);
    w.f64(h.params.max_thickness);
    w.f64(h.params.wavelength);
    w.f64(h.params.absorption_alpha);
    w.u8(h.params.amplitude_convention.code());
    w.f64(h.elastic.sigma);
    w.f64(h.elastic.amplitude);
    w.f64(h.array.na);
    for led in &h.array.leds {
        w.f64(led.sx);
        w.f64(led.sy);
        w.u32(led.ring);
        w.u8(led.bright_field as u8);
    }
    for ex in &dataset.examples {
        w.u64(ex.object_id);
    }
    let header_crc = crc32fast::hash(&w.0);
    w.u32(header_crc);

    let mut payload = Writer(Vec::with_capacity(
        dataset.examples.len() * (4 * h.led_count * h.height * h.width + 4),
    ));
    for ex in &dataset.examples {
        for v in &ex.images {
            payload.0.extend_from_slice(&v.to_le_bytes());
        }
        payload.u32(ex.label);
    }
    w.u32(crc32fast::hash(&payload.0));
    w.0.extend_from_slice(&payload.0);
    Ok(w.0)
}

/// Parses bytes produced by [`encode`]; nothing is returned unless every check passes.
pub fn decode(bytes: &[u8]) -> Result<Dataset> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(8, "magic")? != MAGIC {
        return Err(DataError::BadMagic);
    }
    let version = r.u32("version")?;
    if version != FORMAT_VERSION {
        return Err(DataError::VersionMismatch {
            found: version,
            expected: FORMAT_VERSION,
        });
    }
    let led_count = r.u32("led count")? as usize;
    let height = r.u32("height")? as usize;
    let width = r.u32("width")? as usize;
    let count = r.u64("example count")? as usize;
    let class_count = r.u32("class count")? as usize;
    let noise_reference = r.f64("noise reference")?;
    let global_seed = r.u64("seed")?;
    let grid = GridSpec {
        side_px: r.u32("grid")? as usize,
        pitch: r.f64("grid")?,
        wavelength: r.f64("grid")?,
    };
    let sensor = SensorSpec {
        side_px: r.u32("sensor")? as usize,
        readout_sigma: r.f64("sensor")?,
        sample_sigma: r.f64("sensor")?,
    };
    let refractive_index = r.f64("params")?;
    let max_thickness = r.f64("params")?;
    let wavelength = r.f64("params")?;
    let absorption_alpha = r.f64("params")?;
    let code = r.u8("params")?;
    let elastic = ElasticSpec {
        sigma: r.f64("elastic")?,
        amplitude: r.f64("elastic")?,
    };
    let na = r.f64("led table")?;
    // bound allocations by what the file can actually hold
    if led_count > bytes.len() / 21 || count > bytes.len() / 8 {
        return Err(DataError::Truncated("header counts exceed file size".into()));
    }
    let mut leds = Vec::with_capacity(led_count);
    for _ in 0..led_count {
        leds.push(Led {
            sx: r.f64("led table")?,
            sy: r.f64("led table")?,
            ring: r.u32("led table")?,
            bright_field: r.u8("led table")? != 0,
        });
    }
    let ids = (0..count)
        .map(|_| r.u64("object ids"))
        .collect::<Result<Vec<_>>>()?;
    let header_end = r.pos;
    let header_crc = r.u32("header checksum")?;
    let payload_crc = r.u32("payload checksum")?;
    if crc32fast::hash(&bytes[..header_end]) != header_crc {
        return Err(DataError::Checksum("header"));
    }
    let amplitude_convention = AmplitudeConvention::from_code(code)
        .ok_or_else(|| DataError::Format(format!("unknown amplitude convention {code}")))?;

    let plane = led_count * height * width;
    let record = 4 * plane + 4;
    let payload = &bytes[r.pos..];
    let expected = count
        .checked_mul(record)
        .ok_or_else(|| DataError::Format("payload size overflows".into()))?;
    if payload.len() < expected {
        return Err(DataError::Truncated(format!(
            "payload has {} of {expected} bytes",
            payload.len()
        )));
    }
    if payload.len() > expected {
        return Err(DataError::Format(format!(
            "{} trailing bytes after payload",
            payload.len() - expected
        )));
    }
    if crc32fast::hash(payload) != payload_crc {
        return Err(DataError::Checksum("payload"));
    }

    let examples = payload
        .chunks_exact(record)
        .zip(ids)
        .map(|(chunk, object_id)| {
            let images = chunk[..4 * plane]
                .chunks_exact(4)
                .map(|b| f32::from_le_bytes(b.try_into().unwrap()))
                .collect();
            let label = u32::from_le_bytes(chunk[4 * plane..].try_into().unwrap());
            SubImageStack {
                images,
                led_count,
                height,
                width,
                label,
                object_id,
                seed: global_seed,
            }
        })
        .collect();

    Ok(Dataset {
        header: DatasetHeader {
            led_count,
            height,
            width,
            class_count,
            noise_reference,
            global_seed,
            grid,
            sensor,
            params: PhaseObjectParams {
                refractive_index,
                max_thickness,
                wavelength,
                absorption_alpha,
                amplitude_convention,
            },
            elastic,
            array: LedArray { na, leds },
        },
        examples,
    })
}

pub fn save_dataset(path: &Path, dataset: &Dataset) -> Result<()> {
    let bytes = encode(dataset)?;
    std::fs::write(path, bytes).map_err(|source| DataError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn load_dataset(path: &Path) -> Result<Dataset> {
    let bytes = std::fs::read(path).map_err(|source| DataError::Io {
        path: path.display().to_string(),
        source,
    })?;
    decode(&bytes)
}
