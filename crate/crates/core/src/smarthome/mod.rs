//! Smart-home application driven by decoded selections.
//!
//! In home mode every object is a device icon: selecting it toggles the
//! device, except for two special icons that open the character speller and
//! the call list. In character mode the same 36 positions are the symbols
//! `A`-`Z`, `1`-`9` and `_`; selecting `_` twice in a row confirms the text
//! and returns to home mode.

mod closed_loop;

pub use closed_loop::{run_closed_loop, write_decode_log, DecodeStep};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trial::ObjectId;

pub const N_OBJECTS: usize = 36;

/// The character speller's symbols, indexed by object id.
pub struct CharSet;

impl CharSet {
    pub const SYMBOLS: [char; N_OBJECTS] = [
        'A', 'B', 'C', 'D', 'E', 'F', 'G', 'H', 'I', 'J', 'K', 'L', 'M', 'N', 'O', 'P', 'Q', 'R',
        'S', 'T', 'U', 'V', 'W', 'X', 'Y', 'Z', '1', '2', '3', '4', '5', '6', '7', '8', '9', '_',
    ];
    pub const CONFIRM: char = '_';

    pub fn symbol(id: ObjectId) -> Result<char> {
        Self::SYMBOLS.get(id).copied().ok_or(Error::InvalidObject { id, n: N_OBJECTS })
    }

    pub fn index_of(c: char) -> Option<ObjectId> {
        Self::SYMBOLS.iter().position(|&s| s == c)
    }

    pub fn contains(c: char) -> bool {
        Self::index_of(c).is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeviceEntry {
    pub id: ObjectId,
    pub room: usize,
    pub label: String,
    pub initial_active: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpecialIds {
    pub to_char_speller: ObjectId,
    pub call_list: ObjectId,
}

/// Device inventory loaded from JSON.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub rooms: Vec<String>,
    pub devices: Vec<DeviceEntry>,
    pub special_ids: SpecialIds,
    pub contacts: Vec<String>,
}

const DEFAULT_MANIFEST: &str = include_str!("../../data/default_manifest.json");

impl Manifest {
    /// Four rooms of nine devices each.
    pub fn default_home() -> Self {
        Self::from_json(DEFAULT_MANIFEST).expect("bundled manifest is valid")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: Manifest = serde_json::from_str(text)?;
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidManifest(m));
        if self.devices.len() != N_OBJECTS {
            return bad(format!("expected {N_OBJECTS} devices, found {}", self.devices.len()));
        }
        for (i, d) in self.devices.iter().enumerate() {
            if d.id != i {
                return bad(format!("device at position {i} has id {}; ids must be 0..35 in order", d.id));
            }
            if d.room >= self.rooms.len() {
                return bad(format!("device {i} refers to unknown room {}", d.room));
            }
        }
        let s = self.special_ids;
        if s.to_char_speller >= N_OBJECTS || s.call_list >= N_OBJECTS {
            return bad("special ids must lie in 0..35".into());
        }
        if s.to_char_speller == s.call_list {
            return bad("special ids must be distinct".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    HomeSpeller,
    CharacterSpeller,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Device {
    pub id: ObjectId,
    pub room: usize,
    pub label: String,
    pub active: bool,
}

/// Something the home did in response to a selection.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum HomeEvent {
    Toggled { id: ObjectId, active: bool },
    EnteredCharacterSpeller,
    CallListOpened { contacts: Vec<String> },
    Typed { symbol: char },
    TextConfirmed { text: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HomeState {
    pub devices: Vec<Device>,
    pub mode: Mode,
    /// Text being typed, or the last confirmed text once back in home mode.
    pub text_buffer: String,
    pub call_list: Vec<String>,
    pub special_ids: SpecialIds,
    pub events: Vec<HomeEvent>,
    /// The previous character-mode selection was the confirm symbol.
    pub pending_confirm: bool,
}

impl Default for HomeState {
    fn default() -> Self {
        Self::new(&Manifest::default_home())
    }
}

impl HomeState {
    pub fn new(manifest: &Manifest) -> Self {
        Self {
            devices: manifest
                .devices
                .iter()
                .map(|d| Device {
                    id: d.id,
                    room: d.room,
                    label: d.label.clone(),
                    active: d.initial_active,
                })
                .collect(),
            mode: Mode::HomeSpeller,
            text_buffer: String::new(),
            call_list: manifest.contacts.clone(),
            special_ids: manifest.special_ids,
            events: Vec::new(),
            pending_confirm: false,
        }
    }

    /// Applies one decoded selection in place.
    pub fn select(&mut self, id: ObjectId) -> Result<()> {
        if id >= self.devices.len() {
            return Err(Error::InvalidObject {
                id,
                n: self.devices.len(),
            });
        }
        match self.mode {
            Mode::HomeSpeller if id == self.special_ids.to_char_speller => {
                self.mode = Mode::CharacterSpeller;
                self.text_buffer.clear();
                self.pending_confirm = false;
                self.events.push(HomeEvent::EnteredCharacterSpeller);
            }
            Mode::HomeSpeller if id == self.special_ids.call_list => {
                self.events.push(HomeEvent::CallListOpened {
                    contacts: self.call_list.clone(),
                });
            }
            Mode::HomeSpeller => {
                let d = &mut self.devices[id];
                d.active = !d.active;
                self.events.push(HomeEvent::Toggled { id, active: d.active });
            }
            Mode::CharacterSpeller => {
                let symbol = CharSet::symbol(id)?;
                if symbol == CharSet::CONFIRM && self.pending_confirm {
                    // the first confirm symbol was typed provisionally
                    self.text_buffer.pop();
                    self.mode = Mode::HomeSpeller;
                    self.pending_confirm = false;
                    self.events.push(HomeEvent::TextConfirmed {
                        text: self.text_buffer.clone(),
                    });
                } else {
                    self.text_buffer.push(symbol);
                    self.pending_confirm = symbol == CharSet::CONFIRM;
                    self.events.push(HomeEvent::Typed { symbol });
                }
            }
        }
        Ok(())
    }

    pub fn device(&self, id: ObjectId) -> Option<&Device> {
        self.devices.get(id)
    }
}

/// Functional form of [`HomeState::select`].
pub fn apply_selection(state: &HomeState, id: ObjectId) -> Result<HomeState> {
    let mut next = state.clone();
    next.select(id)?;
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn typing(state: &HomeState, ids: &[ObjectId]) -> HomeState {
        ids.iter().fold(state.clone(), |s, &i| apply_selection(&s, i).unwrap())
    }

    #[test]
    fn charset_has_36_distinct_symbols() {
        let mut v = CharSet::SYMBOLS.to_vec();
        v.sort();
        v.dedup();
        assert_eq!(v.len(), 36);
        assert_eq!(CharSet::symbol(0).unwrap(), 'A');
        assert_eq!(CharSet::symbol(26).unwrap(), '1');
        assert_eq!(CharSet::symbol(35).unwrap(), '_');
        assert!(CharSet::symbol(36).is_err());
        assert_eq!(CharSet::index_of('Z'), Some(25));
    }

    #[test]
    fn default_manifest_shape() {
        let m = Manifest::default_home();
        assert_eq!(m.rooms.len(), 4);
        for r in 0..4 {
            assert_eq!(m.devices.iter().filter(|d| d.room == r).count(), 9);
        }
        assert!(!m.contacts.is_empty());
    }

    #[test]
    fn toggling_a_device() {
        let s = HomeState::default();
        assert!(!s.devices[7].active);
        let s1 = apply_selection(&s, 7).unwrap();
        assert!(s1.devices[7].active);
        let s2 = apply_selection(&s1, 7).unwrap();
        assert_eq!(s2.devices, s.devices);
        assert!(apply_selection(&s, 36).is_err());
    }

    #[test]
    fn call_list_only_records_an_event() {
        let s = HomeState::default();
        let s1 = apply_selection(&s, s.special_ids.call_list).unwrap();
        assert_eq!(s1.devices, s.devices);
        assert_eq!(s1.mode, Mode::HomeSpeller);
        assert!(matches!(s1.events.last(), Some(HomeEvent::CallListOpened { .. })));
    }

    #[test]
    fn speller_round_trip() {
        let s = HomeState::default();
        let to = s.special_ids.to_char_speller;
        // H I _ _ : types "HI" and returns
        let s1 = typing(&s, &[to, 7, 8, 35, 35]);
        assert_eq!(s1.mode, Mode::HomeSpeller);
        assert_eq!(s1.text_buffer, "HI");
        assert_eq!(s1.devices, s.devices);
        assert_eq!(s1.events.last(), Some(&HomeEvent::TextConfirmed { text: "HI".into() }));
    }

    #[test]
    fn single_underscore_is_a_symbol() {
        let s = HomeState::default();
        let s1 = typing(&s, &[s.special_ids.to_char_speller, 35, 0, 35]);
        assert_eq!(s1.mode, Mode::CharacterSpeller);
        assert_eq!(s1.text_buffer, "_A_");
        assert!(s1.text_buffer.chars().all(CharSet::contains));
    }

    #[test]
    fn manifest_validation() {
        let mut m = Manifest::default_home();
        m.special_ids.call_list = m.special_ids.to_char_speller;
        assert!(m.validate().is_err());
        let mut m = Manifest::default_home();
        m.devices.pop();
        assert!(m.validate().is_err());
        let mut m = Manifest::default_home();
        m.devices[3].room = 9;
        assert!(matches!(m.validate(), Err(Error::InvalidManifest(_))));
    }
}
