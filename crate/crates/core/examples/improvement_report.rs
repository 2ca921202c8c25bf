//! Builds the segmented-vs-raw improvement table from published end scores.

use anyhow::Result;
use segrl::harness::{improvement_report, ScorePair};

fn main() -> Result<()> {
    // (game, raw, segmented)
    let scores = [
        ("Beam Rider", 390.3, 505.1),
        ("Seaquest", 218.1, 230.4),
        ("Chopper Command", 889.6, 932.2),
        ("Space Invaders", 223.3, 226.2),
        ("Kung Fu Master", 78.4, 73.2),
        ("Q*Bert", 456.6, 375.8),
        ("Ms. Pac-Man", 704.9, 505.5),
        ("Frostbite", 183.1, 114.6),
        ("Breakout", 9.42, 4.97),
        ("Road Runner", 1870.0, 247.5),
    ];
    let mut pairs: Vec<ScorePair> = scores.iter().map(|&(g, r, s)| ScorePair::new(g, r, s)).collect();
    for game in ["Pong", "Zaxxon"] {
        pairs.push(ScorePair { game: game.into(), raw: None, segmented: None, no_learning: true });
    }
    let report = improvement_report(&pairs);
    print!("{}", report.to_text());
    println!();
    print!("{}", report.to_csv()?);
    Ok(())
}
