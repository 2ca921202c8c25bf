mod common;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use segrl::segment::{label_components, quantize, render, segment_labels, RenderMode, SegmenterConfig};
use segrl::Frame;

#[test]
fn labeling_equals_flood_fill_on_random_frames() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..1500 {
        let f = common::random_blocky_frame(&mut rng, 32);
        let map = label_components(&f);
        let oracle = common::flood_fill_labels(f.width(), f.height(), f.pixels());
        assert!(common::same_partition(map.labels(), &oracle));
        assert_eq!(map.labels(), &oracle[..], "labels follow raster order of first pixels");
        assert_eq!(map.segment_count() as usize, *oracle.iter().max().unwrap() as usize);
    }
}

#[test]
fn quantized_frames_keep_partition_property() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for _ in 0..200 {
        let f = common::random_blocky_frame(&mut rng, 24);
        let q = quantize(&f, 2).unwrap();
        let oracle = common::flood_fill_labels(q.width(), q.height(), q.pixels());
        assert!(common::same_partition(label_components(&q).labels(), &oracle));
    }
}

#[test]
fn two_region_frame_replace_render() {
    let mut f = Frame::filled(8, 4, [0, 0, 0]);
    f.fill_rect(4, 0, 4, 4, [250, 250, 250]);
    let cfg = SegmenterConfig { bits: 3, min_area: 1, mode: RenderMode::Replace };
    let map = segment_labels(&f, &cfg).unwrap();
    assert_eq!(map.segment_count(), 2);
    let out = render(&map, &f, RenderMode::Replace).unwrap();
    let left = out.pixel(0, 0);
    let right = out.pixel(7, 3);
    assert_ne!(left, right);
    for y in 0..4 {
        for x in 0..8 {
            assert_eq!(out.pixel(x, y), if x < 4 { left } else { right });
        }
    }
    assert_eq!(left, segrl::segment::palette_color(1));
    assert_eq!(right, segrl::segment::palette_color(2));
}
