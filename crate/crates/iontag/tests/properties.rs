//! Property tests of the serialization and correlation invariants.

use proptest::prelude::*;

use iontag::analysis::g2;
use iontag::atom::PolarizationState;
use iontag::io::{read_stream, write_stream};
use iontag::sim::{TimeTag, TimeTagStream};
use num_complex::Complex64 as C64;

fn sorted_tags(max_len: usize) -> impl Strategy<Value = Vec<TimeTag>> {
    prop::collection::vec((0u8..4, 0u64..1_000_000_000_000), 0..max_len).prop_map(|mut v| {
        v.sort_unstable_by_key(|&(c, t)| (t, c));
        v.into_iter()
            .map(|(channel, ticks)| TimeTag { channel, ticks })
            .collect()
    })
}

proptest! {
    #[test]
    fn stream_roundtrip_is_identity(tags in sorted_tags(600), tick in 1u32..1_000_000) {
        let stream = TimeTagStream::from_sorted(tick, tags).unwrap();
        let mut buf = Vec::new();
        write_stream(&stream, &mut buf).unwrap();
        let back = read_stream(buf.as_slice()).unwrap();
        prop_assert_eq!(back, stream);
    }

    #[test]
    fn g2_two_pointer_matches_bruteforce(
        a in prop::collection::vec(0.0f64..1.0, 0..120),
        b in prop::collection::vec(0.0f64..1.0, 0..120),
        w in 1e-3f64..5e-2,
        half_bins in 2i64..12,
    ) {
        let mut a = a;
        let mut b = b;
        a.sort_by(|x, y| x.partial_cmp(y).unwrap());
        b.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let lag = half_bins as f64 * w;
        let hist = g2(&a, &b, w, lag).unwrap();
        let half = (lag / w).round() as i64;
        let mut brute = vec![0u64; (2 * half + 1) as usize];
        for &x in &a {
            for &y in &b {
                let k = ((y - x) / w).round() as i64;
                if k.abs() <= half {
                    brute[(k + half) as usize] += 1;
                }
            }
        }
        prop_assert_eq!(hist.counts, brute);
    }

    #[test]
    fn overlap_is_symmetric_and_phase_invariant(
        re1 in -1.0f64..1.0, im1 in -1.0f64..1.0,
        re2 in -1.0f64..1.0, im2 in -1.0f64..1.0,
        re3 in -1.0f64..1.0, im3 in -1.0f64..1.0,
        re4 in -1.0f64..1.0, im4 in -1.0f64..1.0,
        phase in 0.0f64..std::f64::consts::TAU,
    ) {
        let make = |h: C64, v: C64| PolarizationState::new(h, v);
        let (Ok(a), Ok(b)) = (
            make(C64::new(re1, im1), C64::new(re2, im2)),
            make(C64::new(re3, im3), C64::new(re4, im4)),
        ) else {
            return Ok(()); // zero-norm draws are rejected by construction
        };
        prop_assert!((a.overlap(&b) - b.overlap(&a)).abs() < 1e-12);
        let rotated = PolarizationState::new(
            a.h * C64::from_polar(1.0, phase),
            a.v * C64::from_polar(1.0, phase),
        ).unwrap();
        prop_assert!((a.overlap(&b) - rotated.overlap(&b)).abs() < 1e-12);
        prop_assert!(a.overlap(&b) <= 1.0 + 1e-12);
    }
}

/// Large-scale deterministic round trip: a million random sorted tags come
/// back bit-identical.
#[test]
fn million_tag_roundtrip() {
    use rand::{RngExt, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(424242);
    let mut tags: Vec<TimeTag> = (0..1_000_000)
        .map(|_| TimeTag {
            channel: rng.random_range(0..4),
            ticks: rng.random_range(0..u64::MAX / 2),
        })
        .collect();
    tags.sort_unstable_by_key(|t| (t.ticks, t.channel));
    let stream = TimeTagStream::from_sorted(1000, tags).unwrap();
    let mut buf = Vec::with_capacity(16 + 9 * stream.len());
    write_stream(&stream, &mut buf).unwrap();
    let back = read_stream(buf.as_slice()).unwrap();
    assert_eq!(back, stream);
}
