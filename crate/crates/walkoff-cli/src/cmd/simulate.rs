//! `walkoff simulate`: the 24-state scoring table (exact vs Monte Carlo),
//! the bunt-vs-swing policy comparison, game-length probabilities, and the
//! season-level value of switching policy.

use std::fmt::Write as _;
use std::fs;

use anyhow::{anyhow, Context, Result};

use walkoff_core::baseout::BaseOutState;
use walkoff_core::rng::derive_rng;
use walkoff_core::sim::{
    bunt_policy_value, game_length_distribution, score_prob, season_uplift,
    simulate_half_inning, EventModel, GeometricGameModel, DEFAULT_SAC_SUCCESS,
};

use crate::cmd::{CommandOutput, SimulateArgs};
use crate::formats::{event_model_text, parse_event_model};
use crate::manifest::RunManifest;
use crate::resolve_seed;

pub fn run(args: &SimulateArgs) -> Result<CommandOutput> {
    let seed = resolve_seed(args.seed);

    let (model, cfg_sac) = match &args.model {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("cannot read {}", path.display()))?;
            parse_event_model(&text).map_err(|e| anyhow!("{}: {e}", path.display()))?
        }
        None => (EventModel::default_swing(), DEFAULT_SAC_SUCCESS),
    };
    let p_sac = args.sac_success.unwrap_or(cfg_sac);

    if let Some(path) = &args.dump_model {
        fs::write(path, event_model_text(&model, p_sac))
            .with_context(|| format!("cannot write {}", path.display()))?;
        return Ok(CommandOutput::ok(format!("model config written to {}\n", path.display())));
    }

    let mut manifest = RunManifest::new("simulate", seed);
    if let Some(path) = &args.model {
        manifest.input(path)?;
    }
    manifest.config("r", args.r);
    manifest.config("p_sac_success", p_sac);
    manifest.config("n_situations", args.n_situations);
    manifest.config("p_continue_win", args.p_continue_win);
    manifest.config("mc_trials", args.mc_trials);

    let mut text = manifest.text_block();
    let _ = writeln!(text, "plate-appearance model");
    for outcome in walkoff_core::sim::PaOutcome::ALL {
        let _ = writeln!(text, "  {:<12} {:.4}", outcome.label(), model.prob(outcome));
    }
    let _ = writeln!(
        text,
        "  single scores runner from second with p = {:.2}; an out scores the runner\n  from third (fewer than two out) with p = {:.2}",
        model.single_scores_from_second, model.out_scores_from_third
    );

    let _ = writeln!(
        text,
        "\nscore probability by base-out state (exact solve vs {} Monte Carlo trials)",
        args.mc_trials
    );
    let _ = writeln!(
        text,
        "  {:<6} {:<5} {:>9} {:>9} {:>9}",
        "bases", "outs", "exact", "mc", "|diff|"
    );
    for state in BaseOutState::all() {
        let exact = score_prob(&state, &model).map_err(|e| anyhow!("{e}"))?;
        let mc = monte_carlo(&state, &model, args.mc_trials, seed);
        let _ = writeln!(
            text,
            "  {:<6} {:<5} {:>9.4} {:>9.4} {:>9.4}",
            state.bases_label(),
            state.outs,
            exact,
            mc,
            (exact - mc).abs()
        );
    }

    let (bunt, swing) = bunt_policy_value(&model, p_sac).map_err(|e| anyhow!("{e}"))?;
    let _ = writeln!(text, "\nfirst-plate-appearance policy from -2- 0 out (ghost runner)");
    let _ = writeln!(text, "  swing away                    : {swing:.4}");
    let _ = writeln!(text, "  bunt (success p = {p_sac:.2})       : {bunt:.4}");
    let _ = writeln!(text, "  inning win-probability edge   : {:+.4}", bunt - swing);

    let g = GeometricGameModel::new(args.r).map_err(|e| anyhow!("{e}"))?;
    let _ = writeln!(text, "\ngame length (per-inning end probability r = {:.2})", args.r);
    let within_two = 1.0 - game_length_distribution(&g, 3);
    let _ = writeln!(text, "  P(decided within two extra innings) = {within_two:.4}");
    let _ = writeln!(
        text,
        "  P(reaching 12 innings or more)       = {:.4}",
        game_length_distribution(&g, 3)
    );
    let _ = writeln!(text, "  {:<22} {:>9}", "extra innings >= k", "P");
    for k in 1..=6u32 {
        let _ = writeln!(text, "  {:<22} {:>9.4}", k, game_length_distribution(&g, k));
    }

    let uplift = season_uplift(args.n_situations, bunt, swing, args.p_continue_win);
    let _ = writeln!(text, "\nseason value of always bunting here");
    let _ = writeln!(
        text,
        "  {:.2} situations x ({:.4} - {:.4}) x (1 - {:.2}) = {:+.3} wins per season",
        args.n_situations, bunt, swing, args.p_continue_win, uplift
    );

    Ok(CommandOutput::ok(text))
}

/// Per-trial generators derive from (seed, state-and-trial index), so the
/// aggregate is the same no matter how trials are ordered or distributed.
fn monte_carlo(state: &BaseOutState, model: &EventModel, trials: u64, seed: u64) -> f64 {
    let base = state.index() as u64 * trials;
    let mut hits = 0u64;
    for t in 0..trials {
        let mut rng = derive_rng(seed, base + t);
        if simulate_half_inning(state, model, &mut rng).scored {
            hits += 1;
        }
    }
    hits as f64 / trials as f64
}
