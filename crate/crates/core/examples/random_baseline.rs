//! Mean and spread of a uniform-random policy, the reference band for
//! deciding whether an agent learned anything.

use anyhow::Result;
use segrl::env::ENV_IDS;
use segrl::harness::random_policy_baseline;

fn main() -> Result<()> {
    let episodes = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(100);
    for id in ENV_IDS {
        let b = random_policy_baseline(id, episodes, 47, 4)?;
        println!("{id:<16} {episodes} episodes  mean {:>7.2}  std {:>5.2}", b.mean, b.std);
    }
    Ok(())
}
