//! Binary time-tag file format.
//!
//! Layout (all little-endian):
//!
//! ```text
//! header, 16 bytes:
//!   magic            4  b"TTAG"
//!   version          2  u16, currently 1
//!   tick_resolution  4  u32, picoseconds per tick
//!   channel_count    1  u8
//!   reserved         5  zeros
//! records, 9 bytes each:
//!   channel          1  u8
//!   timestamp        8  u64 ticks
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::sim::{channel, TimeTag, TimeTagStream};

pub const MAGIC: [u8; 4] = *b"TTAG";
pub const VERSION: u16 = 1;
pub const HEADER_LEN: usize = 16;
pub const RECORD_LEN: usize = 9;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("bad magic {0:02x?}, expected \"TTAG\"")]
    BadMagic([u8; 4]),
    #[error("unsupported version {0}, expected {VERSION}")]
    UnsupportedVersion(u16),
    #[error("tick resolution must be positive")]
    ZeroTickResolution,
    #[error("file ends mid-record ({trailing} trailing bytes)")]
    TruncatedRecord { trailing: usize },
    #[error("truncated header ({0} bytes)")]
    TruncatedHeader(usize),
    #[error("timestamps decrease at record {index}")]
    NonMonotonic { index: usize },
    #[error("equal timestamps out of channel order at record {index}")]
    TieOrder { index: usize },
    #[error("channel {channel} outside declared channel count {count} at record {index}")]
    ChannelOutOfRange {
        channel: u8,
        count: u8,
        index: usize,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// File header; `channel_count` declares the valid channel id range.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TimeTagFileHeader {
    pub version: u16,
    pub tick_resolution_ps: u32,
    pub channel_count: u8,
}

impl TimeTagFileHeader {
    pub fn for_stream(stream: &TimeTagStream) -> Self {
        TimeTagFileHeader {
            version: VERSION,
            tick_resolution_ps: stream.tick_ps(),
            channel_count: channel::COUNT,
        }
    }

    pub fn to_bytes(self) -> [u8; HEADER_LEN] {
        let mut out = [0u8; HEADER_LEN];
        out[0..4].copy_from_slice(&MAGIC);
        out[4..6].copy_from_slice(&self.version.to_le_bytes());
        out[6..10].copy_from_slice(&self.tick_resolution_ps.to_le_bytes());
        out[10] = self.channel_count;
        out
    }

    pub fn from_bytes(bytes: &[u8; HEADER_LEN]) -> Result<Self, FormatError> {
        let mut magic = [0u8; 4];
        magic.copy_from_slice(&bytes[0..4]);
        if magic != MAGIC {
            return Err(FormatError::BadMagic(magic));
        }
        let version = u16::from_le_bytes([bytes[4], bytes[5]]);
        if version != VERSION {
            return Err(FormatError::UnsupportedVersion(version));
        }
        let tick_resolution_ps = u32::from_le_bytes([bytes[6], bytes[7], bytes[8], bytes[9]]);
        if tick_resolution_ps == 0 {
            return Err(FormatError::ZeroTickResolution);
        }
        Ok(TimeTagFileHeader {
            version,
            tick_resolution_ps,
            channel_count: bytes[10],
        })
    }
}

/// Serialize a stream; records go out in stream order.
pub fn write_stream(stream: &TimeTagStream, mut w: impl Write) -> Result<(), FormatError> {
    w.write_all(&TimeTagFileHeader::for_stream(stream).to_bytes())?;
    let mut record = [0u8; RECORD_LEN];
    for tag in stream.tags() {
        record[0] = tag.channel;
        record[1..9].copy_from_slice(&tag.ticks.to_le_bytes());
        w.write_all(&record)?;
    }
    Ok(())
}

pub fn write_stream_to_path(
    stream: &TimeTagStream,
    path: impl AsRef<Path>,
) -> Result<(), FormatError> {
    let mut w = BufWriter::new(File::create(path)?);
    write_stream(stream, &mut w)?;
    w.flush()?;
    Ok(())
}

/// Parse a stream, validating header, record framing, timestamp order and
/// channel range.
pub fn read_stream(mut r: impl Read) -> Result<TimeTagStream, FormatError> {
    let mut header_bytes = [0u8; HEADER_LEN];
    let mut filled = 0usize;
    while filled < HEADER_LEN {
        let n = r.read(&mut header_bytes[filled..])?;
        if n == 0 {
            return Err(FormatError::TruncatedHeader(filled));
        }
        filled += n;
    }
    let header = TimeTagFileHeader::from_bytes(&header_bytes)?;

    let mut body = Vec::new();
    r.read_to_end(&mut body)?;
    if body.len() % RECORD_LEN != 0 {
        return Err(FormatError::TruncatedRecord {
            trailing: body.len() % RECORD_LEN,
        });
    }
    let mut tags = Vec::with_capacity(body.len() / RECORD_LEN);
    let mut previous: Option<TimeTag> = None;
    for (index, chunk) in body.chunks_exact(RECORD_LEN).enumerate() {
        let channel = chunk[0];
        let ticks = u64::from_le_bytes(chunk[1..9].try_into().expect("9-byte record"));
        if channel >= header.channel_count {
            return Err(FormatError::ChannelOutOfRange {
                channel,
                count: header.channel_count,
                index,
            });
        }
        let tag = TimeTag { channel, ticks };
        if let Some(prev) = previous {
            if tag.ticks < prev.ticks {
                return Err(FormatError::NonMonotonic { index });
            }
            if tag.ticks == prev.ticks && tag.channel < prev.channel {
                return Err(FormatError::TieOrder { index });
            }
        }
        previous = Some(tag);
        tags.push(tag);
    }
    TimeTagStream::from_sorted(header.tick_resolution_ps, tags)
        .map_err(|_| FormatError::NonMonotonic { index: 0 })
}

pub fn read_stream_from_path(path: impl AsRef<Path>) -> Result<TimeTagStream, FormatError> {
    read_stream(BufReader::new(File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_stream() -> TimeTagStream {
        let tags = vec![
            TimeTag {
                channel: 0,
                ticks: 10,
            },
            TimeTag {
                channel: 1,
                ticks: 10,
            },
            TimeTag {
                channel: 1,
                ticks: 250,
            },
            TimeTag {
                channel: 2,
                ticks: 2_000_000_001,
            },
        ];
        TimeTagStream::from_sorted(1000, tags).unwrap()
    }

    #[test]
    fn empty_stream_is_header_only() {
        let s = TimeTagStream::new(1000).unwrap();
        let mut buf = Vec::new();
        write_stream(&s, &mut buf).unwrap();
        assert_eq!(buf.len(), 16);
        let back = read_stream(buf.as_slice()).unwrap();
        assert!(back.is_empty());
        assert_eq!(back.tick_ps(), 1000);
    }

    #[test]
    fn roundtrip_preserves_records() {
        let s = sample_stream();
        let mut buf = Vec::new();
        write_stream(&s, &mut buf).unwrap();
        assert_eq!(buf.len(), 16 + 4 * RECORD_LEN);
        let back = read_stream(buf.as_slice()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn corruption_taxonomy() {
        let s = sample_stream();
        let mut buf = Vec::new();
        write_stream(&s, &mut buf).unwrap();

        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(matches!(
            read_stream(bad.as_slice()),
            Err(FormatError::BadMagic(_))
        ));

        let mut bad = buf.clone();
        bad[4] = 9;
        assert!(matches!(
            read_stream(bad.as_slice()),
            Err(FormatError::UnsupportedVersion(9))
        ));

        let mut bad = buf.clone();
        bad[6..10].copy_from_slice(&0u32.to_le_bytes());
        assert!(matches!(
            read_stream(bad.as_slice()),
            Err(FormatError::ZeroTickResolution)
        ));

        let bad = &buf[..buf.len() - 3];
        assert!(matches!(
            read_stream(bad),
            Err(FormatError::TruncatedRecord { trailing: 6 })
        ));

        let bad = &buf[..10];
        assert!(matches!(
            read_stream(bad),
            Err(FormatError::TruncatedHeader(10))
        ));

        // Swap two records to break monotonicity.
        let mut bad = buf.clone();
        let (a, b) = (16, 16 + RECORD_LEN);
        for i in 0..RECORD_LEN {
            bad.swap(a + i, b + i);
        }
        assert!(matches!(
            read_stream(bad.as_slice()),
            Err(FormatError::TieOrder { .. }) | Err(FormatError::NonMonotonic { .. })
        ));

        let mut bad = buf.clone();
        bad[16] = 200; // channel beyond the declared count
        assert!(matches!(
            read_stream(bad.as_slice()),
            Err(FormatError::ChannelOutOfRange { channel: 200, .. })
        ));
    }
}
