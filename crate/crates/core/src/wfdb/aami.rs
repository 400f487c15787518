use serde::{Deserialize, Serialize};

/// AAMI heartbeat classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AamiClass {
    N,
    S,
    V,
    F,
    Q,
}

impl AamiClass {
    pub const ALL: [AamiClass; 5] = [
        AamiClass::N,
        AamiClass::S,
        AamiClass::V,
        AamiClass::F,
        AamiClass::Q,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AamiClass::N => "N",
            AamiClass::S => "S",
            AamiClass::V => "V",
            AamiClass::F => "F",
            AamiClass::Q => "Q",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        AamiClass::ALL.into_iter().find(|c| c.as_str() == s)
    }
}

impl std::fmt::Display for AamiClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Maps a beat annotation symbol to its AAMI class.
///
/// Non-beat codes (rhythm, noise, artifacts, waveform markers) yield `None`.
pub fn map_beat_class(symbol: char) -> Option<AamiClass> {
    match symbol {
        'N' | 'L' | 'R' | 'e' | 'j' => Some(AamiClass::N),
        'A' | 'a' | 'J' | 'S' => Some(AamiClass::S),
        'V' | 'E' => Some(AamiClass::V),
        'F' => Some(AamiClass::F),
        'Q' | '/' | 'f' => Some(AamiClass::Q),
        _ => None,
    }
}

/// WFDB beat (QRS) annotation codes, used for detection scoring.
pub fn is_beat_symbol(symbol: char) -> bool {
    map_beat_class(symbol).is_some() || matches!(symbol, 'n' | 'B' | 'r' | '?')
}
