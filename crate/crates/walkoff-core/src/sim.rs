//! A base-out Markov model of one half-inning, solved exactly for the
//! probability that at least one run scores before three outs, plus a
//! geometric model of extra-inning game length and the season-level value
//! of the bunt decision.
//!
//! Only the first run matters (any run walks the game off), so the chain
//! is solved for a Boolean absorbing event rather than run expectancy.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::baseout::BaseOutState;
use crate::linalg;

/// Plate-appearance outcomes the model distributes probability over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PaOutcome {
    Out,
    Walk,
    Single,
    Double,
    Triple,
    HomeRun,
    SacSuccess,
    SacFail,
}

impl PaOutcome {
    pub const ALL: [PaOutcome; 8] = [
        PaOutcome::Out,
        PaOutcome::Walk,
        PaOutcome::Single,
        PaOutcome::Double,
        PaOutcome::Triple,
        PaOutcome::HomeRun,
        PaOutcome::SacSuccess,
        PaOutcome::SacFail,
    ];

    pub fn label(self) -> &'static str {
        match self {
            PaOutcome::Out => "out",
            PaOutcome::Walk => "walk",
            PaOutcome::Single => "single",
            PaOutcome::Double => "double",
            PaOutcome::Triple => "triple",
            PaOutcome::HomeRun => "home_run",
            PaOutcome::SacSuccess => "sac_success",
            PaOutcome::SacFail => "sac_fail",
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("outcome probabilities must be in [0,1] and sum to 1 (sum = {0})")]
    BadDistribution(f64),
    #[error("advancement probability `{name}` = {value} outside [0,1]")]
    BadAdvancement { name: &'static str, value: f64 },
    #[error("probability `{name}` = {value} outside the unit interval")]
    BadProbability { name: &'static str, value: f64 },
    #[error("absorbing-chain system is singular")]
    SingularSystem,
}

/// A plate-appearance outcome distribution plus its advancement rules.
///
/// Fixed advancement semantics: a walk forces the usual chain; a single
/// scores the runner from third, sends the runner from second home with
/// probability `single_scores_from_second` (else to third), and moves the
/// runner from first to second; a double scores runners from second and
/// third and sends the runner from first to third; triples and home runs
/// clear the bases ahead of the batter. A generic out scores the runner
/// from third with probability `out_scores_from_third` when fewer than two
/// are out (tag-ups and ground balls); otherwise runners hold. A successful
/// sacrifice trades an out for one base per runner; a failed sacrifice is a
/// plain out with runners holding.
#[derive(Debug, Clone, PartialEq)]
pub struct EventModel {
    probs: [f64; 8],
    pub single_scores_from_second: f64,
    pub out_scores_from_third: f64,
}

impl EventModel {
    pub fn new(
        probs: [f64; 8],
        single_scores_from_second: f64,
        out_scores_from_third: f64,
    ) -> Result<EventModel, SimError> {
        let sum: f64 = probs.iter().sum();
        if probs.iter().any(|p| !(0.0..=1.0).contains(p)) || (sum - 1.0).abs() > 1e-12 {
            return Err(SimError::BadDistribution(sum));
        }
        for (name, value) in [
            ("single_scores_from_second", single_scores_from_second),
            ("out_scores_from_third", out_scores_from_third),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(SimError::BadAdvancement { name, value });
            }
        }
        Ok(EventModel { probs, single_scores_from_second, out_scores_from_third })
    }

    pub fn prob(&self, outcome: PaOutcome) -> f64 {
        self.probs[PaOutcome::ALL.iter().position(|o| *o == outcome).unwrap()]
    }

    pub fn probs(&self) -> &[f64; 8] {
        &self.probs
    }

    /// League-average-flavored swing-away model, calibrated so that the
    /// ghost-runner start state scores with probability near the observed
    /// swing-away inning win rate. Mid-inning sacrifices are folded into
    /// the policy comparison, not the background distribution.
    pub fn default_swing() -> EventModel {
        EventModel::new(
            [0.662, 0.094, 0.150, 0.046, 0.004, 0.031, 0.006, 0.007],
            0.60,
            0.55,
        )
        .expect("default model is valid")
    }
}

/// Where one plate appearance can leave the half-inning.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    /// A run crossed: the game is over, the home team wins.
    Scored,
    /// Third out without a run: the inning moves on.
    InningOver,
    Live(BaseOutState),
}

/// Enumerates the outcome's branches as (probability, step). Shared by the
/// exact solver and the Monte Carlo sampler, so the two agree on semantics
/// and disagree only in method.
pub fn transition(state: &BaseOutState, outcome: PaOutcome, m: &EventModel) -> Vec<(f64, Step)> {
    let s = *state;
    let o = s.outs;
    let advance_out = |outs: u8, bases: BaseOutState| -> Step {
        if outs >= 3 {
            Step::InningOver
        } else {
            Step::Live(BaseOutState { outs, ..bases })
        }
    };
    match outcome {
        PaOutcome::Out => {
            let held = advance_out(o + 1, s);
            if s.third && o < 2 && m.out_scores_from_third > 0.0 {
                let q = m.out_scores_from_third;
                vec![(q, Step::Scored), (1.0 - q, held)]
            } else {
                vec![(1.0, held)]
            }
        }
        PaOutcome::Walk => {
            if s.first && s.second && s.third {
                return vec![(1.0, Step::Scored)];
            }
            let second = s.first || s.second;
            let third = s.third || (s.first && s.second);
            vec![(1.0, Step::Live(BaseOutState::new(true, second, third, o)))]
        }
        PaOutcome::Single => {
            if s.third {
                return vec![(1.0, Step::Scored)];
            }
            if s.second {
                let p = m.single_scores_from_second;
                let held = Step::Live(BaseOutState::new(true, s.first, true, o));
                if p >= 1.0 {
                    return vec![(1.0, Step::Scored)];
                }
                if p <= 0.0 {
                    return vec![(1.0, held)];
                }
                return vec![(p, Step::Scored), (1.0 - p, held)];
            }
            vec![(1.0, Step::Live(BaseOutState::new(true, s.first, false, o)))]
        }
        PaOutcome::Double => {
            if s.second || s.third {
                return vec![(1.0, Step::Scored)];
            }
            if s.first {
                return vec![(1.0, Step::Live(BaseOutState::new(false, true, true, o)))];
            }
            vec![(1.0, Step::Live(BaseOutState::new(false, true, false, o)))]
        }
        PaOutcome::Triple => {
            if s.runners() > 0 {
                return vec![(1.0, Step::Scored)];
            }
            vec![(1.0, Step::Live(BaseOutState::new(false, false, true, o)))]
        }
        PaOutcome::HomeRun => vec![(1.0, Step::Scored)],
        PaOutcome::SacSuccess => {
            // The batter is out; a third out on the batter never scores a
            // run, so with two out the sacrifice just ends the inning.
            if s.third && o < 2 {
                return vec![(1.0, Step::Scored)];
            }
            let bases = BaseOutState::new(false, s.first, s.second, 0);
            vec![(1.0, advance_out(o + 1, bases))]
        }
        PaOutcome::SacFail => vec![(1.0, advance_out(o + 1, s))],
    }
}

/// Exact probability that at least one run scores before three outs,
/// starting from `state`, by solving the absorbing chain over the 24 live
/// states.
pub fn score_prob(state: &BaseOutState, m: &EventModel) -> Result<f64, SimError> {
    let n = 24usize;
    // (I − Q) v = b, where Q holds live-to-live mass and b direct absorption
    // into "scored".
    let mut a = vec![0.0; n * n];
    let mut b = vec![0.0; n];
    for idx in 0..n {
        a[idx * n + idx] = 1.0;
        let from = BaseOutState::from_index(idx);
        for outcome in PaOutcome::ALL {
            let p = m.prob(outcome);
            if p == 0.0 {
                continue;
            }
            for (q, step) in transition(&from, outcome, m) {
                match step {
                    Step::Scored => b[idx] += p * q,
                    Step::InningOver => {}
                    Step::Live(t) => a[idx * n + t.index()] -= p * q,
                }
            }
        }
    }
    let v = linalg::solve_lu(a, b, n).ok_or(SimError::SingularSystem)?;
    Ok(v[state.index()].clamp(0.0, 1.0))
}

/// One sampled half-inning trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub scored: bool,
    /// Each plate appearance's outcome and where it left the inning.
    pub steps: Vec<(PaOutcome, Step)>,
}

/// Samples one half-inning under the same transition semantics the exact
/// solver uses; this is the solver's Monte Carlo oracle.
pub fn simulate_half_inning<R: Rng>(
    state: &BaseOutState,
    m: &EventModel,
    rng: &mut R,
) -> Trajectory {
    let mut cur = *state;
    let mut steps = Vec::new();
    loop {
        let outcome = sample_outcome(m, rng);
        let branches = transition(&cur, outcome, m);
        let step = sample_branch(&branches, rng);
        steps.push((outcome, step));
        match step {
            Step::Scored => return Trajectory { scored: true, steps },
            Step::InningOver => return Trajectory { scored: false, steps },
            Step::Live(next) => cur = next,
        }
    }
}

fn sample_outcome<R: Rng>(m: &EventModel, rng: &mut R) -> PaOutcome {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for outcome in PaOutcome::ALL {
        acc += m.prob(outcome);
        if u < acc {
            return outcome;
        }
    }
    PaOutcome::Out
}

fn sample_branch<R: Rng>(branches: &[(f64, Step)], rng: &mut R) -> Step {
    if branches.len() == 1 {
        return branches[0].1;
    }
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for &(q, step) in branches {
        acc += q;
        if u < acc {
            return step;
        }
    }
    branches.last().expect("nonempty branches").1
}

/// Default probability that an attempted sacrifice succeeds, paired with
/// [`EventModel::default_swing`] to reproduce the observed inning win rates.
pub const DEFAULT_SAC_SUCCESS: f64 = 0.96;

/// Values the two first-plate-appearance policies from the ghost-runner
/// start state. Swinging away plays the background model directly; bunting
/// spends the first plate appearance on a sacrifice attempt that succeeds
/// with probability `p_sac_success` (runner to third, one out) or fails
/// (batter out, runner holds).
pub fn bunt_policy_value(
    m: &EventModel,
    p_sac_success: f64,
) -> Result<(f64, f64), SimError> {
    if !(0.0..=1.0).contains(&p_sac_success) {
        return Err(SimError::BadProbability { name: "p_sac_success", value: p_sac_success });
    }
    let start = BaseOutState::ghost_runner_start();
    let swing = score_prob(&start, m)?;
    let value_of = |outcome: PaOutcome| -> Result<f64, SimError> {
        let mut v = 0.0;
        for (q, step) in transition(&start, outcome, m) {
            v += q * match step {
                Step::Scored => 1.0,
                Step::InningOver => 0.0,
                Step::Live(t) => score_prob(&t, m)?,
            };
        }
        Ok(v)
    };
    let bunt = p_sac_success * value_of(PaOutcome::SacSuccess)?
        + (1.0 - p_sac_success) * value_of(PaOutcome::SacFail)?;
    Ok((bunt, swing))
}

/// Extra-inning games end independently each inning with probability `r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometricGameModel {
    r: f64,
}

impl GeometricGameModel {
    pub fn new(r: f64) -> Result<GeometricGameModel, SimError> {
        if !r.is_finite() || r <= 0.0 || r > 1.0 {
            return Err(SimError::BadProbability { name: "r", value: r });
        }
        Ok(GeometricGameModel { r })
    }

    pub fn r(&self) -> f64 {
        self.r
    }
}

/// P(the game lasts at least `k` extra innings) = (1 − r)^(k−1).
pub fn game_length_distribution(g: &GeometricGameModel, k: u32) -> f64 {
    debug_assert!(k >= 1);
    libm::pow(1.0 - g.r, (k - 1) as f64)
}

/// Expected additional wins per season from bunting every qualifying
/// situation: n · (p_bunt − p_swing) · (1 − p_continue_win), where
/// `p_continue_win` is the home team's eventual win probability when the
/// inning ends scoreless.
pub fn season_uplift(
    n_situations_per_season: f64,
    p_bunt: f64,
    p_swing: f64,
    p_continue_win: f64,
) -> f64 {
    n_situations_per_season * (p_bunt - p_swing) * (1.0 - p_continue_win)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::derive_rng;

    fn only(outcome: PaOutcome) -> EventModel {
        let mut probs = [0.0; 8];
        probs[PaOutcome::ALL.iter().position(|o| *o == outcome).unwrap()] = 1.0;
        EventModel::new(probs, 0.6, 0.0).unwrap()
    }

    #[test]
    fn all_outs_never_scores() {
        let m = only(PaOutcome::Out);
        for state in BaseOutState::all() {
            assert_eq!(score_prob(&state, &m).unwrap(), 0.0);
        }
        let mut rng = derive_rng(1, 0);
        for _ in 0..100 {
            let t = simulate_half_inning(&BaseOutState::ghost_runner_start(), &m, &mut rng);
            assert!(!t.scored);
            assert!(t.steps.len() <= 3);
        }
    }

    #[test]
    fn runner_on_third_with_guaranteed_single_scores() {
        let m = only(PaOutcome::Single);
        let s = BaseOutState::new(false, false, true, 0);
        assert_eq!(score_prob(&s, &m).unwrap(), 1.0);
    }

    #[test]
    fn two_outcome_model_matches_closed_form_and_monte_carlo() {
        // P(out) = 0.7, P(single) = 0.3, single always scores from second:
        // from (-2-, 0) the chain scores unless three straight outs,
        // v = 1 − 0.7³ = 0.657.
        let mut probs = [0.0; 8];
        probs[0] = 0.7;
        probs[2] = 0.3;
        let m = EventModel::new(probs, 1.0, 0.0).unwrap();
        let start = BaseOutState::ghost_runner_start();
        let exact = score_prob(&start, &m).unwrap();
        assert!((exact - 0.657).abs() < 1e-12);

        let trials = 1_000_000u32;
        let mut hits = 0u32;
        for t in 0..trials {
            let mut rng = derive_rng(99, t as u64);
            if simulate_half_inning(&start, &m, &mut rng).scored {
                hits += 1;
            }
        }
        let mc = hits as f64 / trials as f64;
        assert!((mc - exact).abs() < 0.002, "mc {mc} vs exact {exact}");
    }

    #[test]
    fn trajectories_are_seed_reproducible() {
        let m = EventModel::default_swing();
        let start = BaseOutState::ghost_runner_start();
        let a = simulate_half_inning(&start, &m, &mut derive_rng(7, 3));
        let b = simulate_half_inning(&start, &m, &mut derive_rng(7, 3));
        assert_eq!(a, b);
    }

    #[test]
    fn walk_transition_forces_only_chains() {
        let m = EventModel::default_swing();
        // Runner on second: a walk does not push him.
        let s = BaseOutState::new(false, true, false, 1);
        match transition(&s, PaOutcome::Walk, &m).as_slice() {
            [(p, Step::Live(t))] => {
                assert_eq!(*p, 1.0);
                assert_eq!(*t, BaseOutState::new(true, true, false, 1));
            }
            other => panic!("unexpected {other:?}"),
        }
        // Bases loaded: forced run.
        let s = BaseOutState::new(true, true, true, 2);
        assert_eq!(transition(&s, PaOutcome::Walk, &m), alloc::vec![(1.0, Step::Scored)]);
    }

    #[test]
    fn sacrifice_paths_from_the_ghost_state() {
        let m = EventModel::default_swing();
        let start = BaseOutState::ghost_runner_start();
        match transition(&start, PaOutcome::SacSuccess, &m).as_slice() {
            [(_, Step::Live(t))] => assert_eq!(*t, BaseOutState::new(false, false, true, 1)),
            other => panic!("unexpected {other:?}"),
        }
        match transition(&start, PaOutcome::SacFail, &m).as_slice() {
            [(_, Step::Live(t))] => assert_eq!(*t, BaseOutState::new(false, true, false, 1)),
            other => panic!("unexpected {other:?}"),
        }
        // A two-out squeeze cannot score: the batter's out ends the inning.
        let s = BaseOutState::new(false, false, true, 2);
        assert_eq!(
            transition(&s, PaOutcome::SacSuccess, &m),
            alloc::vec![(1.0, Step::InningOver)]
        );
    }

    #[test]
    fn monotone_in_runners_and_outs_on_a_small_grid() {
        for (po, ps, q) in [(0.70, 0.12, 0.0), (0.65, 0.2, 0.3), (0.55, 0.3, 0.5)] {
            let probs = [po, 0.08, ps, 0.04, 0.005, 0.02, 0.0, 1.0 - po - 0.08 - ps - 0.065];
            let m = EventModel::new(probs, 0.6, q).unwrap();
            let v: Vec<f64> = BaseOutState::all()
                .iter()
                .map(|s| score_prob(s, &m).unwrap())
                .collect();
            for s in BaseOutState::all() {
                // Removing an out never decreases the value.
                if s.outs > 0 {
                    let fewer = BaseOutState { outs: s.outs - 1, ..s };
                    assert!(v[fewer.index()] >= v[s.index()] - 1e-12);
                }
                // Adding a runner never decreases the value.
                for add in [
                    BaseOutState { first: true, ..s },
                    BaseOutState { second: true, ..s },
                    BaseOutState { third: true, ..s },
                ] {
                    assert!(v[add.index()] >= v[s.index()] - 1e-12);
                }
            }
        }
    }

    #[test]
    fn wasted_out_cannot_help() {
        // p_sac_success = 0 turns the bunt into a pure out with the runner
        // holding; that can never beat swinging away.
        for (po, ps) in [(0.70, 0.10), (0.62, 0.20), (0.55, 0.27)] {
            let probs = [po, 0.1, ps, 0.03, 0.005, 0.02, 0.0, 1.0 - po - 0.155 - ps];
            for q in [0.0, 0.3, 0.6] {
                let m = EventModel::new(probs, 0.6, q).unwrap();
                let (bunt, swing) = bunt_policy_value(&m, 0.0).unwrap();
                assert!(bunt <= swing + 1e-12);
            }
        }
    }

    #[test]
    fn policy_value_is_monotone_in_sac_success() {
        let m = EventModel::default_swing();
        let mut prev = -1.0;
        for i in 0..=10 {
            let p = i as f64 / 10.0;
            let (bunt, _) = bunt_policy_value(&m, p).unwrap();
            assert!(bunt >= prev - 1e-12);
            prev = bunt;
        }
    }

    #[test]
    fn default_model_hits_the_observed_win_rates() {
        let m = EventModel::default_swing();
        let (bunt, swing) = bunt_policy_value(&m, DEFAULT_SAC_SUCCESS).unwrap();
        assert!((swing - 0.566).abs() < 0.02, "swing {swing}");
        assert!((bunt - 0.736).abs() < 0.02, "bunt {bunt}");
    }

    #[test]
    fn geometric_game_length() {
        let g = GeometricGameModel::new(0.72).unwrap();
        assert!((game_length_distribution(&g, 3) - 0.0784).abs() < 1e-12);
        assert!((1.0 - game_length_distribution(&g, 3) - 0.9216).abs() < 1e-12);
        assert_eq!(game_length_distribution(&g, 1), 1.0);

        let sure = GeometricGameModel::new(1.0).unwrap();
        assert_eq!(game_length_distribution(&sure, 2), 0.0);

        let half = GeometricGameModel::new(0.5).unwrap();
        assert!((game_length_distribution(&half, 3) - 0.25).abs() < 1e-12);

        assert!(GeometricGameModel::new(0.0).is_err());
        assert!(GeometricGameModel::new(1.5).is_err());
    }

    #[test]
    fn season_uplift_formula() {
        assert_eq!(season_uplift(4.15, 0.6, 0.6, 0.5), 0.0);
        let v = season_uplift(4.15, 0.736, 0.566, 0.5);
        assert!((v - 0.352750).abs() < 1e-6);
        let upper = season_uplift(4.15, 0.736, 0.566, 0.0);
        assert!((upper - 0.705500).abs() < 1e-6);
    }

    #[test]
    fn bad_models_are_rejected() {
        let mut probs = [0.0; 8];
        probs[0] = 0.5;
        assert!(matches!(
            EventModel::new(probs, 0.5, 0.0),
            Err(SimError::BadDistribution(_))
        ));
        probs[0] = 1.0;
        assert!(EventModel::new(probs, 1.5, 0.0).is_err());
        assert!(EventModel::new(probs, 0.5, -0.1).is_err());
    }
}
