//! `walkoff parse`: read event files, replay every game, report what the
//! replay engine thinks of the data.

use std::fmt::Write as _;
use std::fs;

use anyhow::{Context, Result};

use walkoff_core::retrosheet::{replay_game, Half};

use crate::cmd::{CommandOutput, ParseArgs};
use crate::formats::{collect_event_paths, load_games};
use crate::manifest::RunManifest;
use crate::resolve_seed;

pub fn run(args: &ParseArgs) -> Result<CommandOutput> {
    let seed = resolve_seed(args.seed);
    let mut manifest = RunManifest::new("parse", seed);
    let files = collect_event_paths(&args.paths)?;
    for f in &files {
        manifest.input(f)?;
    }

    let games = load_games(&files)?;
    let total_plays: usize = games.iter().map(|g| g.plays.len()).sum();

    let mut replayed_plays = 0usize;
    let mut inconsistencies = Vec::new();
    let mut context_csv = String::from(
        "game_id,play_index,inning,half,outs,b1,b2,b3,score_away,score_home,event_text,bunt_flag\n",
    );
    for game in &games {
        match replay_game(game) {
            Ok(replay) => {
                replayed_plays += replay.contexts.len();
                for (idx, (play, ctx)) in
                    game.plays.iter().zip(&replay.contexts).enumerate()
                {
                    let s = &ctx.state_before;
                    let _ = writeln!(
                        context_csv,
                        "{},{},{},{},{},{},{},{},{},{},{},{}",
                        game.game_id,
                        idx,
                        play.inning,
                        if play.half == Half::Top { 0 } else { 1 },
                        s.outs,
                        s.first as u8,
                        s.second as u8,
                        s.third as u8,
                        ctx.score_away,
                        ctx.score_home,
                        play.event_text,
                        ctx.bunt_flag as u8
                    );
                }
            }
            Err(e) => inconsistencies.push(e.to_string()),
        }
    }

    if let Some(out) = &args.out {
        fs::write(out, &context_csv)
            .with_context(|| format!("cannot write {}", out.display()))?;
    }

    let mut text = manifest.text_block();
    let _ = writeln!(text, "files parsed           : {}", files.len());
    let _ = writeln!(text, "games parsed           : {}", games.len());
    let _ = writeln!(text, "plays parsed           : {total_plays}");
    let _ = writeln!(text, "plays replayed         : {replayed_plays}");
    let _ = writeln!(text, "replay inconsistencies : {}", inconsistencies.len());
    for line in &inconsistencies {
        let _ = writeln!(text, "  {line}");
    }
    if let Some(out) = &args.out {
        let _ = writeln!(text, "play contexts written to {}", out.display());
    }
    Ok(CommandOutput::ok(text))
}
