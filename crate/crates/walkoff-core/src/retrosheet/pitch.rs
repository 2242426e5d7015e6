//! Pitch-sequence profiling: how a batter used his pitches, for the
//! strategy-switching audit.

/// Per-plate-appearance pitch usage.
///
/// Bunt attempts are foul bunts (`L`), missed bunts (`M`), and the in-play
/// pitch (`X`) when the plate appearance ended in a bunt; swings are `S`,
/// `F`, and a non-bunt `X`; takes are balls (`B`) and called strikes (`C`).
/// Display markers (`*`, `+`, `>`, `.`) and pickoff digits are stripped
/// before counting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PitchProfile {
    pub bunt_attempt_pitches: u32,
    pub swing_pitches: u32,
    pub taken_pitches: u32,
    /// True when the batter both attempted a bunt and swung away in the
    /// same plate appearance.
    pub switched_strategy: bool,
    /// False when the pitch string was empty (older data): counts are zero
    /// and the record should not enter switching-rate denominators.
    pub known: bool,
}

pub fn pitch_profile(pitches: &str, bunt_flag: bool) -> PitchProfile {
    let mut bunt = 0u32;
    let mut swing = 0u32;
    let mut taken = 0u32;
    let mut any = false;
    for c in pitches.chars() {
        match c {
            '*' | '+' | '>' | '.' | '1' | '2' | '3' => continue,
            'L' | 'M' => {
                bunt += 1;
                any = true;
            }
            'S' | 'F' => {
                swing += 1;
                any = true;
            }
            'X' => {
                if bunt_flag {
                    bunt += 1;
                } else {
                    swing += 1;
                }
                any = true;
            }
            'B' | 'C' => {
                taken += 1;
                any = true;
            }
            // H (hit batter), I/V (intentional/automatic ball), P (pitchout),
            // N (no pitch), Q/R/Y (pitchout variants), O/T (tips), U (unknown):
            // present but neutral for strategy profiling.
            _ => {
                any = true;
            }
        }
    }
    PitchProfile {
        bunt_attempt_pitches: bunt,
        swing_pitches: swing,
        taken_pitches: taken,
        switched_strategy: bunt >= 1 && swing >= 1,
        known: any,
    }
}
