//! JSON state files.
//!
//! Rationals travel as strings (`"p"` or `"p/q"`) so the round trip is
//! bit-exact; JSON numbers would silently truncate.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::StateFileError;
use crate::exact::{format_rat, parse_rat};
use crate::lattice::TodaState;

/// Serialized form of a state:
/// `{"N": 2, "M": 1, "t": 0, "I": [["1", "2"]], "V": ["3", "4"]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StateFile {
    #[serde(rename = "N")]
    pub sites: usize,
    #[serde(rename = "M")]
    pub depth: usize,
    pub t: i64,
    #[serde(rename = "I")]
    pub i_rows: Vec<Vec<String>>,
    #[serde(rename = "V")]
    pub v_row: Vec<String>,
}

impl StateFile {
    pub fn from_state(state: &TodaState) -> Self {
        Self {
            sites: state.sites(),
            depth: state.depth(),
            t: state.time(),
            i_rows: (0..state.depth())
                .map(|j| state.i_layer(j).iter().map(format_rat).collect())
                .collect(),
            v_row: state.v().iter().map(format_rat).collect(),
        }
    }

    /// Converts to a state, checking shape and the validity constraints.
    pub fn to_state(&self) -> Result<TodaState, StateFileError> {
        if self.sites < 2 {
            return Err(StateFileError::Parse(format!(
                "N must be at least 2, got {}",
                self.sites
            )));
        }
        if self.depth < 1 {
            return Err(StateFileError::Parse("M must be at least 1".into()));
        }
        if self.i_rows.len() != self.depth {
            return Err(StateFileError::Parse(format!(
                "expected {} I rows, got {}",
                self.depth,
                self.i_rows.len()
            )));
        }
        let parse_row = |row: &[String], what: &str| {
            row.iter()
                .map(|s| {
                    parse_rat(s).map_err(|e| StateFileError::Parse(format!("{what}: {e}")))
                })
                .collect::<Result<Vec<_>, _>>()
        };
        let mut i_layers = Vec::with_capacity(self.depth);
        for (j, row) in self.i_rows.iter().enumerate() {
            if row.len() != self.sites {
                return Err(StateFileError::Parse(format!(
                    "I row {j} has {} entries, expected {}",
                    row.len(),
                    self.sites
                )));
            }
            i_layers.push(parse_row(row, "I")?);
        }
        if self.v_row.len() != self.sites {
            return Err(StateFileError::Parse(format!(
                "V has {} entries, expected {}",
                self.v_row.len(),
                self.sites
            )));
        }
        let v = parse_row(&self.v_row, "V")?;
        let state = TodaState::new(self.t, i_layers, v);
        state.validate().map_err(StateFileError::Validation)?;
        Ok(state)
    }
}

pub fn parse_state(path: &Path) -> Result<TodaState, StateFileError> {
    let text = std::fs::read_to_string(path)?;
    let file: StateFile =
        serde_json::from_str(&text).map_err(|e| StateFileError::Parse(e.to_string()))?;
    file.to_state()
}

pub fn write_state(path: &Path, state: &TodaState) -> Result<(), StateFileError> {
    let file = StateFile::from_state(state);
    let text = serde_json::to_string_pretty(&file).expect("state files always serialize");
    std::fs::write(path, text)?;
    Ok(())
}

/// Canonical single-line JSON form, used for round-trip checks.
pub fn canonical_json(state: &TodaState) -> String {
    serde_json::to_string(&StateFile::from_state(state)).expect("state files always serialize")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;

    #[test]
    fn parse_worked_state() {
        let json = r#"{"N":2,"M":1,"t":0,"I":[["1","2"]],"V":["3","4"]}"#;
        let file: StateFile = serde_json::from_str(json).unwrap();
        let state = file.to_state().unwrap();
        assert_eq!(state, TodaState::from_ints(0, &[&[1, 2]], &[3, 4]));
    }

    #[test]
    fn fractions_stay_exact() {
        let json = r#"{"N":2,"M":1,"t":0,"I":[["1/3","2"]],"V":["3","4"]}"#;
        let state: StateFile = serde_json::from_str(json).unwrap();
        let state = state.to_state().unwrap();
        assert_eq!(state.front_layer()[0], rat(1, 3));
    }

    #[test]
    fn zero_entry_is_a_validation_error() {
        let json = r#"{"N":2,"M":1,"t":0,"I":[["1","2"]],"V":["0","4"]}"#;
        let file: StateFile = serde_json::from_str(json).unwrap();
        assert!(matches!(
            file.to_state(),
            Err(StateFileError::Validation(_))
        ));
    }

    #[test]
    fn round_trip_is_identity() {
        let state = TodaState::new(
            3,
            vec![vec![rat(1, 3), rat(-7, 2)], vec![rat(5, 1), rat(2, 9)]],
            vec![rat(3, 4), rat(11, 5)],
        );
        let json = canonical_json(&state);
        let file: StateFile = serde_json::from_str(&json).unwrap();
        let back = file.to_state().unwrap();
        assert_eq!(back, state);
        assert_eq!(canonical_json(&back), json);
    }

    #[test]
    fn shape_errors_are_parse_errors() {
        let json = r#"{"N":2,"M":2,"t":0,"I":[["1","2"]],"V":["3","4"]}"#;
        let file: StateFile = serde_json::from_str(json).unwrap();
        assert!(matches!(file.to_state(), Err(StateFileError::Parse(_))));
    }
}
