//! End-to-end solving of bi-valued arenas and ε-optimal timed strategies.
//!
//! Abstract strategies of the border abstraction are lifted to timed
//! strategies: Player 1 plays exactly at borders or at distance η from
//! them, Player 2 at distance `η/2^(n+1)` in round `n`.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::abstraction::{build_border_abstraction, AbstractionError, BorderAbstraction};
use crate::arena::{
    bi_valued_profile, make_bounded, validate_arena, BiValuedProfile, ExtValue, Player, ProfileRejection, PtgArena, Violation,
};
use crate::finite_solver::{solve_finite, SolveResult};
use crate::regions::{ConstantLadder, EtaRegion, Position, RegionClass};
use crate::scalar::{max_of, min_of, Scalar};
use crate::simulation::{Configuration, Play, StrategyError, TimedMove, TimedStrategy};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SynthesisError {
    #[error("invalid arena: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
    #[error(transparent)]
    NotBiValued(#[from] ProfileRejection),
    #[error(transparent)]
    Abstraction(#[from] AbstractionError),
    #[error("unknown location {0}")]
    UnknownLocation(String),
    #[error("valuation {valuation} is not a border constant; values are only computed at the borders {borders:?}")]
    NotABorder { valuation: String, borders: Vec<i64> },
    #[error("valuation {valuation} violates the invariant of {location}")]
    OutsideInvariant { location: String, valuation: String },
    #[error("epsilon must be positive, got {0}")]
    BadEpsilon(String),
    #[error("value {0} at the start vertex is not finite")]
    InfiniteValue(ExtValue),
}

/// The precision `ε`, the region width `η` and the step bound `L`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EpsilonPlan<T> {
    pub epsilon: T,
    pub eta: T,
    pub steps: usize,
}

impl<T: Scalar> EpsilonPlan<T> {
    /// Whether `0 < η < 1/3`, `η < ε/(2L)` and `η < ε/3`.
    pub fn is_valid(&self) -> bool {
        let two_l = T::from_int(2 * self.steps as i64);
        self.eta.is_positive()
            && self.eta < T::from_ratio(1, 3)
            && self.eta < self.epsilon.clone() / two_l
            && self.eta < self.epsilon.clone() / T::from_int(3)
    }
}

/// Half of `min(ε/(2L), ε/3, 1/3)`.
pub fn choose_eta<T: Scalar>(epsilon: &T, steps: usize) -> T {
    let steps = steps.max(1) as i64;
    let a = epsilon.clone() / T::from_int(2 * steps);
    let b = epsilon.clone() / T::from_int(3);
    min_of(&min_of(&a, &b), &T::from_ratio(1, 3)).half()
}

/// `L = max(N, 1)` where `N` is the stabilization index of value iteration;
/// fails if the value of `v0` is not finite.
pub fn steps_bound(result: &SolveResult, v0: usize) -> Result<usize, SynthesisError> {
    match result.values[v0] {
        ExtValue::Finite(_) => Ok(result.table.stabilization_index().max(1)),
        v => Err(SynthesisError::InfiniteValue(v)),
    }
}

/// Player 1's delay towards abstract target region `j` from `nu` in `i`.
pub fn p1_delay<T: Scalar>(i: &EtaRegion, j: &EtaRegion, nu: &T, eta: &T) -> T {
    if i == j {
        return T::zero();
    }
    let m = T::from_int(j.anchor);
    match j.position {
        Position::At => m - nu.clone(),
        Position::JustBelow => m - eta.clone() - nu.clone(),
        Position::JustAbove => m + eta.clone() - nu.clone(),
    }
}

/// Player 2's delay towards `j` in round `n` of the play.
pub fn p2_delay<T: Scalar>(j: &EtaRegion, nu: &T, eta: &T, n: usize) -> T {
    let m = T::from_int(j.anchor);
    let delta = eta.div_pow2(n as u32 + 1);
    match j.position {
        Position::At => m - nu.clone(),
        Position::JustBelow => max_of(&(m - delta - nu.clone()), &T::zero()),
        Position::JustAbove => max_of(&(m + delta - nu.clone()), &T::zero()),
    }
}

/// Everything computed for one arena and start configuration.
#[derive(Clone, Debug)]
pub struct PtgSolution<T> {
    /// The bounded arena that strategies play in.
    pub arena: PtgArena,
    pub profile: BiValuedProfile,
    pub abstraction: BorderAbstraction,
    pub result: SolveResult,
    pub start: usize,
    pub value: ExtValue,
    /// Present when the start value is finite.
    pub plan: Option<EpsilonPlan<T>>,
}

impl<T: Scalar> PtgSolution<T> {
    pub fn ladder(&self) -> &ConstantLadder {
        &self.abstraction.ladder
    }

    pub fn start_configuration(&self) -> Configuration<T> {
        let v = &self.abstraction.vertices[self.start];
        Configuration::new(v.location.clone(), T::from_int(v.region.anchor))
    }

    /// Value of `(location, M)` for a border constant `M`, if that
    /// configuration exists.
    pub fn value_at(&self, location: &str, border: i64) -> Option<ExtValue> {
        let k = self.ladder().index_of(border)?;
        let v = self.abstraction.vertex_of(location, &self.ladder().at(k))?;
        Some(self.result.values[v])
    }

    /// The abstract vertex and region of a configuration.
    pub fn abstract_vertex(&self, c: &Configuration<T>, eta: &T) -> Result<(usize, EtaRegion), StrategyError> {
        let outside = || StrategyError::OutsideUsefulRegion {
            location: c.location.clone(),
            valuation: c.valuation.to_string(),
        };
        let region = match self.ladder().region_of(&c.valuation, eta) {
            Ok(RegionClass::Useful(r)) => r,
            _ => return Err(outside()),
        };
        let v = self
            .abstraction
            .vertex_of(&c.location, &region)
            .ok_or_else(|| StrategyError::NoAbstractVertex(format!("{},{}", c.location, c.valuation)))?;
        Ok((v, region))
    }

    pub fn p1_strategy(&self) -> Option<UniformP1Strategy<'_, T>> {
        self.plan.as_ref().map(|plan| UniformP1Strategy { solution: self, plan })
    }

    pub fn p2_strategy(&self) -> Option<ConvergentP2Strategy<'_, T>> {
        self.plan.as_ref().map(|plan| ConvergentP2Strategy { solution: self, plan })
    }

    /// The abstract target region and label of action `a`, or `None` for
    /// the stall loop.
    fn lift(&self, a: Option<usize>) -> Option<(EtaRegion, String)> {
        let act = self.abstraction.action(a?)?;
        Some((act.target_region, act.label.clone()))
    }
}

/// Player 1's η-region-uniform strategy lifted from the counter strategy.
#[derive(Clone, Copy, Debug)]
pub struct UniformP1Strategy<'a, T> {
    solution: &'a PtgSolution<T>,
    plan: &'a EpsilonPlan<T>,
}

impl<T: Scalar> TimedStrategy<T> for UniformP1Strategy<'_, T> {
    fn next_move(&self, play: &Play<T>) -> Result<Option<TimedMove<T>>, StrategyError> {
        let c = play.last();
        let (v, i) = self.solution.abstract_vertex(c, &self.plan.eta)?;
        let a = self.solution.result.p1.action_after(v, play.len());
        Ok(self
            .solution
            .lift(a)
            .map(|(j, label)| TimedMove::new(p1_delay(&i, &j, &c.valuation, &self.plan.eta), label)))
    }
}

/// Player 2's η-convergent strategy lifted from the memoryless strategy.
#[derive(Clone, Copy, Debug)]
pub struct ConvergentP2Strategy<'a, T> {
    solution: &'a PtgSolution<T>,
    plan: &'a EpsilonPlan<T>,
}

impl<T: Scalar> TimedStrategy<T> for ConvergentP2Strategy<'_, T> {
    fn next_move(&self, play: &Play<T>) -> Result<Option<TimedMove<T>>, StrategyError> {
        let c = play.last();
        let (v, _) = self.solution.abstract_vertex(c, &self.plan.eta)?;
        let a = self.solution.result.p2.action(v);
        Ok(self
            .solution
            .lift(a)
            .map(|(j, label)| TimedMove::new(p2_delay(&j, &c.valuation, &self.plan.eta, play.len()), label)))
    }
}

fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A seeded random strategy that follows some abstract edge and stops at a
/// random point of its target region. Its choices depend only on the seed
/// and the sequence of abstract vertices visited, so it is
/// η-region-uniform. In convergent mode the points of round `n` stay
/// within `η/2^(n+1)` of the border.
#[derive(Clone, Debug)]
pub struct RandomUniformStrategy<'a, T> {
    solution: &'a PtgSolution<T>,
    eta: T,
    seed: u64,
    convergent: bool,
}

impl<'a, T: Scalar> RandomUniformStrategy<'a, T> {
    pub fn new(solution: &'a PtgSolution<T>, eta: T, seed: u64, convergent: bool) -> Self {
        RandomUniformStrategy {
            solution,
            eta,
            seed,
            convergent,
        }
    }

    /// A fraction in `(0, 1]`, or `(0, 1)` when `open` is set.
    fn fraction(h: u64, open: bool) -> T {
        let den = 1i64 << (1 + h % 8);
        let span = if open { den - 1 } else { den };
        let num = 1 + ((h >> 8) % span as u64) as i64;
        T::from_ratio(num, den)
    }

    fn post_valuation(&self, i: &EtaRegion, j: &EtaRegion, nu: &T, n: usize, h: u64) -> T {
        let m = T::from_int(j.anchor);
        let width = if self.convergent {
            self.eta.div_pow2(n as u32 + 1)
        } else {
            self.eta.clone()
        };
        let stay = h.is_multiple_of(4);
        match j.position {
            Position::At => m,
            Position::JustAbove => {
                let top = m.clone() + width;
                if i == j && (*nu > top || stay) {
                    nu.clone()
                } else {
                    let lo = max_of(nu, &m);
                    lo.clone() + (top - lo) * Self::fraction(h >> 2, false)
                }
            }
            Position::JustBelow => {
                let bottom = m.clone() - width;
                let lo = max_of(nu, &bottom);
                if i == j && stay && *nu >= bottom {
                    nu.clone()
                } else {
                    lo.clone() + (m - lo) * Self::fraction(h >> 2, true)
                }
            }
        }
    }
}

impl<T: Scalar> TimedStrategy<T> for RandomUniformStrategy<'_, T> {
    fn next_move(&self, play: &Play<T>) -> Result<Option<TimedMove<T>>, StrategyError> {
        let mut h = mix(self.seed);
        for c in play.configs() {
            let (v, _) = self.solution.abstract_vertex(c, &self.eta)?;
            h = mix(h ^ v as u64);
        }
        let c = play.last();
        let (v, i) = self.solution.abstract_vertex(c, &self.eta)?;
        let g = &self.solution.abstraction.graph;
        let edges = g.edges(v);
        if edges.is_empty() {
            return Ok(None);
        }
        let e = edges[(h % edges.len() as u64) as usize];
        let Some((j, label)) = self.solution.lift(Some(e.action)) else {
            return Ok(None);
        };
        let post = self.post_valuation(&i, &j, &c.valuation, play.len(), mix(h));
        Ok(Some(TimedMove::new(post - c.valuation.clone(), label)))
    }
}

/// Solves `arena` from `(location, valuation)`; `valuation` must be a border
/// constant of the arena. Strategies are synthesized when the value there
/// is finite.
pub fn solve_ptg<T: Scalar>(
    arena: &PtgArena,
    location: &str,
    valuation: &T,
    epsilon: &T,
) -> Result<PtgSolution<T>, SynthesisError> {
    let violations = validate_arena(arena);
    if !violations.is_empty() {
        return Err(SynthesisError::Invalid(violations));
    }
    if !epsilon.is_positive() {
        return Err(SynthesisError::BadEpsilon(epsilon.to_string()));
    }
    let profile = bi_valued_profile(arena)?;
    let loc = arena
        .location(location)
        .ok_or_else(|| SynthesisError::UnknownLocation(location.to_string()))?;
    let borders = ConstantLadder::of_arena(arena);
    let border = valuation
        .as_int()
        .filter(|m| borders.index_of(*m).is_some())
        .ok_or_else(|| SynthesisError::NotABorder {
            valuation: valuation.to_string(),
            borders: borders.constants().to_vec(),
        })?;
    if !loc.invariant.contains(valuation) {
        return Err(SynthesisError::OutsideInvariant {
            location: location.to_string(),
            valuation: valuation.to_string(),
        });
    }

    let bounded = make_bounded(arena);
    let abstraction = build_border_abstraction(&bounded)?;
    let result = solve_finite(&abstraction.graph);
    let k = abstraction.ladder.index_of(border).expect("bounding keeps every constant");
    let start = abstraction
        .vertex_of(location, &abstraction.ladder.at(k))
        .expect("the start satisfies the invariant");
    let value = result.values[start];
    let plan = match steps_bound(&result, start) {
        Ok(steps) => {
            // Rates are multiples of d, so errors scale with it.
            let scaled = epsilon.clone() / T::from_int(profile.d);
            Some(EpsilonPlan {
                epsilon: epsilon.clone(),
                eta: choose_eta(&scaled, steps),
                steps,
            })
        }
        Err(_) => None,
    };
    Ok(PtgSolution {
        arena: bounded,
        profile,
        abstraction,
        result,
        start,
        value,
        plan,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Comparator {
    Le,
    Lt,
    Eq,
    Ge,
    Gt,
}

impl Comparator {
    pub const ALL: [Comparator; 5] = [Comparator::Le, Comparator::Lt, Comparator::Eq, Comparator::Ge, Comparator::Gt];

    pub fn symbol(self) -> &'static str {
        match self {
            Comparator::Le => "<=",
            Comparator::Lt => "<",
            Comparator::Eq => "=",
            Comparator::Ge => ">=",
            Comparator::Gt => ">",
        }
    }

    /// The player whose objective the verdict describes: Player 1 for
    /// upper bounds and equality, Player 2 for lower bounds.
    pub fn player(self) -> Player {
        match self {
            Comparator::Ge | Comparator::Gt => Player::Two,
            _ => Player::One,
        }
    }
}

impl fmt::Display for Comparator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl FromStr for Comparator {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Comparator::ALL
            .into_iter()
            .find(|c| c.symbol() == s)
            .ok_or_else(|| format!("unknown comparator {s}; expected one of <=, <, =, >=, >"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Verdict {
    Win,
    EpsilonBoundary,
    Lose,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Win => "WIN",
            Verdict::EpsilonBoundary => "EPSILON_BOUNDARY",
            Verdict::Lose => "LOSE",
        })
    }
}

/// Value-level answer to "can the payoff be kept `cmp K`?".
///
/// For `<=` and `<` the verdict is Player 1's: `WIN` when the value is below
/// `K`, `EPSILON_BOUNDARY` when it equals `K` (only `K + ε` is guaranteed),
/// `LOSE` above. For `>=` and `>` it is Player 2's, mirrored. For `=` the
/// value alone only tells that `K` is approachable when it equals the value.
pub fn decide_objective(value: ExtValue, cmp: Comparator, k: i64) -> Verdict {
    use std::cmp::Ordering::*;
    let ord = value.cmp(&ExtValue::Finite(k));
    match (cmp, ord) {
        (_, Equal) => Verdict::EpsilonBoundary,
        (Comparator::Le | Comparator::Lt, Less) | (Comparator::Ge | Comparator::Gt, Greater) => Verdict::Win,
        _ => Verdict::Lose,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arena::fixtures::{convergence_example, fig1};
    use crate::simulation::{classify_play, play_cost, run_match};
    use crate::Rational;
    use num_traits::Signed;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    #[test]
    fn eta_choices() {
        assert_eq!(choose_eta(&q(1, 10), 5), q(1, 200));
        assert_eq!(choose_eta(&q(3, 1), 1), q(1, 6));
        assert_eq!(choose_eta(&q(1, 3), 1), q(1, 18));
        for (e, l) in [(q(1, 10), 5), (q(3, 1), 1), (q(1, 3), 1), (q(7, 2), 40)] {
            let plan = EpsilonPlan {
                eta: choose_eta(&e, l),
                epsilon: e,
                steps: l,
            };
            assert!(plan.is_valid());
        }
    }

    #[test]
    fn p1_translation() {
        let l = ConstantLadder::new([1, 2]);
        let eta = q(1, 8);
        assert_eq!(p1_delay(&l.at(0), &l.at(1), &q(1, 2), &eta), q(1, 2));
        assert_eq!(p1_delay(&l.at(0), &l.just_below(1).unwrap(), &q(1, 2), &eta), q(3, 8));
        let sliver = l.just_above(0).unwrap();
        assert_eq!(p1_delay(&sliver, &sliver, &q(1, 16), &eta), q(0, 1));
        assert_eq!(p1_delay(&l.at(0), &sliver, &q(0, 1), &eta), q(1, 8));
    }

    #[test]
    fn p2_translation() {
        let l = ConstantLadder::new([1, 2]);
        let eta = q(1, 8);
        let below = l.just_below(1).unwrap();
        assert_eq!(p2_delay(&below, &q(1, 2), &eta, 0), q(7, 16));
        assert_eq!(p2_delay(&below, &(q(1, 1) - eta.clone() / q(16, 1)), &eta, 3), q(0, 1));
        assert_eq!(p2_delay(&l.at(2), &q(2, 1), &eta, 4), q(0, 1));
        assert_eq!(p2_delay(&l.just_above(1).unwrap(), &q(1, 1), &eta, 1), q(1, 32));
    }

    #[test]
    fn verdicts() {
        use Comparator::*;
        assert_eq!(decide_objective(ExtValue::Finite(1), Le, 2), Verdict::Win);
        assert_eq!(decide_objective(ExtValue::Finite(1), Le, 1), Verdict::EpsilonBoundary);
        for c in Comparator::ALL {
            let v = decide_objective(ExtValue::PlusInf, c, 3);
            assert_eq!(v, if c.player() == Player::Two { Verdict::Win } else { Verdict::Lose });
        }
        assert_eq!(decide_objective(ExtValue::Finite(4), Gt, 3), Verdict::Win);
        assert_eq!(decide_objective(ExtValue::Finite(4), Eq, 3), Verdict::Lose);
        assert_eq!(">=".parse::<Comparator>(), Ok(Ge));
        assert!("=>".parse::<Comparator>().is_err());
    }

    #[test]
    fn start_must_be_a_border() {
        let a = fig1();
        assert!(matches!(
            solve_ptg(&a, "l1", &q(1, 2), &q(1, 100)),
            Err(SynthesisError::NotABorder { .. })
        ));
        assert!(matches!(
            solve_ptg(&a, "nope", &q(0, 1), &q(1, 100)),
            Err(SynthesisError::UnknownLocation(_))
        ));
        assert!(matches!(
            solve_ptg(&a, "l1", &q(2, 1), &q(1, 100)),
            Err(SynthesisError::OutsideInvariant { .. })
        ));
        assert!(matches!(solve_ptg(&a, "l1", &q(0, 1), &q(0, 1)), Err(SynthesisError::BadEpsilon(_))));
    }

    #[test]
    fn fig1_as_drawn_has_value_two() {
        // Player 2 may loop in l3 while x < 1, so Player 1 must wait a full
        // time unit in l2 before handing over.
        let s = solve_ptg(&fig1(), "l1", &q(0, 1), &q(1, 100)).unwrap();
        assert_eq!(s.value, ExtValue::Finite(2));
        assert_eq!(s.value_at("l2", 0), Some(ExtValue::Finite(2)));
        assert_eq!(s.value_at("l4", 0), Some(ExtValue::Finite(2)));
        assert_eq!(s.value_at("l4", 1), Some(ExtValue::Finite(3)));
        assert_eq!(s.value_at("l3", 0), Some(ExtValue::PlusInf));
        let (p1, p2) = (s.p1_strategy().unwrap(), s.p2_strategy().unwrap());
        let r = run_match(&s.arena, &p1, &p2, s.start_configuration(), 50).unwrap();
        let cost = play_cost(&s.arena, &r);
        let ExtValue::Finite(c) = cost else { panic!("{cost:?}") };
        assert!((c - q(2, 1)).abs() <= q(1, 100));
    }

    #[test]
    fn convergence_example_value_zero() {
        let s = solve_ptg(&convergence_example(), "u", &q(0, 1), &q(1, 100)).unwrap();
        assert_eq!(s.value, ExtValue::Finite(0));
        let plan = s.plan.clone().unwrap();
        let p2 = s.p2_strategy().unwrap();
        for seed in 0..5 {
            let p1 = RandomUniformStrategy::new(&s, plan.eta.clone(), seed, false);
            let r = run_match(&s.arena, &p1, &p2, s.start_configuration(), 60).unwrap();
            if let ExtValue::Finite(c) = play_cost(&s.arena, &r) {
                assert!(c >= -q(1, 100));
            }
            let class = classify_play(&r, s.ladder(), &plan.eta);
            assert!(class.eta_close);
        }
    }

    #[test]
    fn unreachable_target_gives_no_strategies() {
        let mut a = convergence_example();
        a.transitions.retain(|t| t.label != "exit");
        let s = solve_ptg(&a, "u", &q(0, 1), &q(1, 100)).unwrap();
        assert_eq!(s.value, ExtValue::PlusInf);
        assert!(s.p1_strategy().is_none() && s.p2_strategy().is_none());
    }
}
