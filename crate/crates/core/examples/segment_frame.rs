//! Segments one environment frame with the builtin segmenter and writes the
//! original, the replace render and an overlay render as PPM files.

use anyhow::Result;
use segrl::env::{make_env, MINICATCH8};
use segrl::harness::dump_frame;
use segrl::segment::{render, segment_labels, RenderMode, SegmenterConfig};

fn main() -> Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "segment_out".into());
    let out = std::path::Path::new(&out);
    let mut env = make_env(MINICATCH8)?;
    env.reset(3);
    let mut frame = env.step(0)?.frame;
    for _ in 0..40 {
        frame = env.step(1)?.frame;
    }

    let config = SegmenterConfig::default();
    let map = segment_labels(&frame, &config)?;
    let mut areas = map.areas();
    areas.remove(0);
    areas.sort_unstable_by(|a, b| b.cmp(a));
    println!("{} segments, largest areas {:?}", map.segment_count(), &areas[..areas.len().min(5)]);

    std::fs::create_dir_all(out)?;
    dump_frame(&frame, &out.join("original.ppm"))?;
    dump_frame(&render(&map, &frame, RenderMode::Replace)?, &out.join("replace.ppm"))?;
    dump_frame(&render(&map, &frame, RenderMode::Overlay(0.5))?, &out.join("overlay.ppm"))?;
    println!("wrote {}", out.display());
    Ok(())
}
