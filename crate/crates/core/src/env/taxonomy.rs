use serde::{Deserialize, Serialize};

use super::EnvError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Exploration {
    Easy,
    Hard,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RewardClass {
    HumanOptimal,
    ScoreExploit,
    Dense,
    Sparse,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ObjectCount {
    Low,
    High,
}

impl ObjectCount {
    pub fn as_str(self) -> &'static str {
        match self {
            ObjectCount::Low => "low",
            ObjectCount::High => "high",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TaxonomyEntry {
    pub game: &'static str,
    pub exploration: Exploration,
    pub reward: RewardClass,
    pub objects: ObjectCount,
}

const fn entry(game: &'static str, exploration: Exploration, reward: RewardClass, objects: ObjectCount) -> TaxonomyEntry {
    TaxonomyEntry { game, exploration, reward, objects }
}

use Exploration::*;
use ObjectCount::*;
use RewardClass::*;

/// The twelve Atari games of the experiment grid. The hard-exploration /
/// sparse-reward column is intentionally empty.
const ENTRIES: [TaxonomyEntry; 12] = [
    entry("Breakout", Easy, HumanOptimal, Low),
    entry("Pong", Easy, HumanOptimal, Low),
    entry("Kung Fu Master", Easy, ScoreExploit, Low),
    entry("Road Runner", Easy, ScoreExploit, Low),
    entry("Ms. Pac-Man", Hard, Dense, Low),
    entry("Q*Bert", Hard, Dense, Low),
    entry("Space Invaders", Easy, HumanOptimal, High),
    entry("Chopper Command", Easy, HumanOptimal, High),
    entry("Seaquest", Easy, ScoreExploit, High),
    entry("Beam Rider", Easy, ScoreExploit, High),
    entry("Frostbite", Hard, Dense, High),
    entry("Zaxxon", Hard, Dense, High),
];

pub fn taxonomy_entries() -> &'static [TaxonomyEntry] {
    &ENTRIES
}

pub fn taxonomy_lookup(game: &str) -> Result<TaxonomyEntry, EnvError> {
    ENTRIES
        .iter()
        .find(|e| e.game == game)
        .copied()
        .ok_or_else(|| EnvError::UnknownGame(game.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_rows() {
        assert_eq!(taxonomy_lookup("Breakout").unwrap(), entry("Breakout", Easy, HumanOptimal, Low));
        assert_eq!(taxonomy_lookup("Seaquest").unwrap(), entry("Seaquest", Easy, ScoreExploit, High));
        assert_eq!(taxonomy_lookup("Zaxxon").unwrap(), entry("Zaxxon", Hard, Dense, High));
        assert!(taxonomy_lookup("Montezuma's Revenge").is_err());
    }

    #[test]
    fn grid_has_two_games_per_cell_and_no_sparse_entries() {
        assert_eq!(ENTRIES.len(), 12);
        assert!(ENTRIES.iter().all(|e| e.reward != Sparse));
        for (exp, rew) in [(Easy, HumanOptimal), (Easy, ScoreExploit), (Hard, Dense)] {
            for obj in [Low, High] {
                let n = ENTRIES
                    .iter()
                    .filter(|e| e.exploration == exp && e.reward == rew && e.objects == obj)
                    .count();
                assert_eq!(n, 2);
            }
        }
    }
}
