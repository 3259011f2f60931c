use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Finite normal-form game with utilities for every joint pure profile.
///
/// Profiles are ordered lexicographically with player 0 most significant:
/// profile index `sum_i a_i * stride_i`, where the last player has stride 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GameDocument", into = "GameDocument")]
pub struct NormalFormGame {
    actions: Vec<Vec<String>>,
    strides: Vec<usize>,
    /// `[profile][player]`
    utilities: Vec<Vec<f64>>,
}

/// JSON layout of a game file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameDocument {
    pub players: usize,
    pub actions: Vec<Vec<String>>,
    pub utilities: Vec<Vec<f64>>,
}

impl TryFrom<GameDocument> for NormalFormGame {
    type Error = Error;

    fn try_from(doc: GameDocument) -> Result<Self> {
        if doc.players != doc.actions.len() {
            return Err(Error::arg(format!(
                "field `players` is {} but `actions` lists {} players",
                doc.players,
                doc.actions.len()
            )));
        }
        NormalFormGame::new(doc.actions, doc.utilities)
    }
}

impl From<NormalFormGame> for GameDocument {
    fn from(g: NormalFormGame) -> Self {
        GameDocument {
            players: g.actions.len(),
            actions: g.actions,
            utilities: g.utilities,
        }
    }
}

impl NormalFormGame {
    pub fn new(actions: Vec<Vec<String>>, utilities: Vec<Vec<f64>>) -> Result<Self> {
        if actions.is_empty() {
            return Err(Error::arg("a game needs at least one player"));
        }
        if let Some(i) = actions.iter().position(Vec::is_empty) {
            return Err(Error::arg(format!("player {i} has no actions")));
        }
        let n_profiles: usize = actions.iter().map(Vec::len).product();
        if utilities.len() != n_profiles {
            return Err(Error::Dimension {
                what: "utility profiles",
                expected: n_profiles,
                actual: utilities.len(),
            });
        }
        for (k, row) in utilities.iter().enumerate() {
            if row.len() != actions.len() {
                return Err(Error::arg(format!(
                    "utilities[{k}] has {} entries, expected one per player ({})",
                    row.len(),
                    actions.len()
                )));
            }
            if row.iter().any(|u| !u.is_finite()) {
                return Err(Error::arg(format!(
                    "utilities[{k}] contains a non-finite value"
                )));
            }
        }
        let mut strides = vec![1; actions.len()];
        for i in (0..actions.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * actions[i + 1].len();
        }
        Ok(NormalFormGame {
            actions,
            strides,
            utilities,
        })
    }

    /// Game from a utility function over profiles given as action indices.
    pub fn from_fn(
        action_counts: &[usize],
        mut utility: impl FnMut(&[usize]) -> Vec<f64>,
    ) -> Result<Self> {
        let actions: Vec<Vec<String>> = action_counts
            .iter()
            .map(|&n| (0..n).map(|a| format!("a{a}")).collect())
            .collect();
        let n_profiles: usize = action_counts.iter().product();
        let mut profile = vec![0; action_counts.len()];
        let mut utilities = Vec::with_capacity(n_profiles);
        for k in 0..n_profiles {
            let mut rest = k;
            for i in (0..action_counts.len()).rev() {
                profile[i] = rest % action_counts[i];
                rest /= action_counts[i];
            }
            utilities.push(utility(&profile));
        }
        Self::new(actions, utilities)
    }

    /// Two-player game from row and column payoff matrices.
    pub fn bimatrix(row: &[Vec<f64>], col: &[Vec<f64>]) -> Result<Self> {
        let m = row.len();
        let n = row.first().map_or(0, Vec::len);
        if col.len() != m || col.iter().chain(row.iter()).any(|r| r.len() != n) {
            return Err(Error::arg("bimatrix payoff tables must have equal shapes"));
        }
        Self::from_fn(&[m, n], |p| vec![row[p[0]][p[1]], col[p[0]][p[1]]])
    }

    pub fn with_action_names(mut self, names: Vec<Vec<String>>) -> Result<Self> {
        if names.len() != self.actions.len()
            || names
                .iter()
                .zip(&self.actions)
                .any(|(a, b)| a.len() != b.len())
        {
            return Err(Error::arg("action names do not match the game's shape"));
        }
        self.actions = names;
        Ok(self)
    }

    pub fn n_players(&self) -> usize {
        self.actions.len()
    }

    pub fn n_actions(&self, player: usize) -> usize {
        self.actions[player].len()
    }

    pub fn action_names(&self) -> &[Vec<String>] {
        &self.actions
    }

    pub fn n_profiles(&self) -> usize {
        self.utilities.len()
    }

    /// Player `player`'s action in `profile`.
    pub fn action_of(&self, profile: usize, player: usize) -> usize {
        (profile / self.strides[player]) % self.actions[player].len()
    }

    /// Action indices of every player in `profile`.
    pub fn profile(&self, profile: usize) -> Vec<usize> {
        (0..self.n_players())
            .map(|i| self.action_of(profile, i))
            .collect()
    }

    pub fn profile_index(&self, actions: &[usize]) -> usize {
        actions.iter().zip(&self.strides).map(|(a, s)| a * s).sum()
    }

    /// `profile` with `player`'s action replaced by `action`.
    pub fn deviate(&self, profile: usize, player: usize, action: usize) -> usize {
        let current = self.action_of(profile, player);
        profile - current * self.strides[player] + action * self.strides[player]
    }

    pub fn utility(&self, profile: usize, player: usize) -> f64 {
        self.utilities[profile][player]
    }

    pub fn utilities(&self) -> &[Vec<f64>] {
        &self.utilities
    }

    /// Sum of all players' utilities at `profile`.
    pub fn welfare(&self, profile: usize) -> f64 {
        self.utilities[profile].iter().sum()
    }

    /// Copy with `shift` added to every utility of `player`.
    pub fn shifted(&self, player: usize, shift: f64) -> Self {
        let mut g = self.clone();
        for row in &mut g.utilities {
            row[player] += shift;
        }
        g
    }

    /// Readable profile label such as `(buy, hold)`.
    pub fn profile_label(&self, profile: usize) -> String {
        let names: Vec<&str> = (0..self.n_players())
            .map(|i| self.actions[i][self.action_of(profile, i)].as_str())
            .collect();
        format!("({})", names.join(", "))
    }

    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("game serializes")
    }
}
