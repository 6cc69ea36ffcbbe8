//! Local-hidden-state ensembles for Bob's qubit and the classical demon that
//! plays against them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{check_eta, default_ratio, transverse, Button, CellColor};
use crate::error::{Error, Result};
use crate::qubit::BlochVector;

pub const WEIGHT_TOL: f64 = 1e-10;
pub const NORM_TOL: f64 = 1e-12;
pub const MEAN_TOL: f64 = 1e-9;

/// Workers used by [`search_max_classical_work`] unless told otherwise. The
/// result depends on this number, so it is fixed rather than tied to the
/// machine.
pub const DEFAULT_WORKERS: usize = 8;

const MAX_SAMPLING_ATTEMPTS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Member {
    pub p: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Member {
    pub fn bloch(&self) -> BlochVector {
        BlochVector {
            x: self.x,
            y: self.y,
            z: self.z,
        }
    }
}

/// Weighted hidden states whose average is the Gibbs state `(0, 0, η)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawEnsemble")]
pub struct HiddenStateEnsemble {
    eta: f64,
    members: Vec<Member>,
}

#[derive(Deserialize)]
struct RawEnsemble {
    eta: f64,
    members: Vec<Member>,
}

impl TryFrom<RawEnsemble> for HiddenStateEnsemble {
    type Error = Error;

    fn try_from(raw: RawEnsemble) -> Result<Self> {
        HiddenStateEnsemble::new(raw.eta, raw.members)
    }
}

impl HiddenStateEnsemble {
    pub fn new(eta: f64, members: Vec<Member>) -> Result<Self> {
        check_eta(eta)?;
        if members.is_empty() {
            return Err(Error::InvalidEnsemble("no members".into()));
        }
        let mut total = 0.0;
        let mut mean = [0.0; 3];
        for (i, m) in members.iter().enumerate() {
            if !m.p.is_finite() || m.p < 0.0 {
                return Err(Error::InvalidEnsemble(format!("member {i} has weight {}", m.p)));
            }
            let len = m.bloch().length();
            if len.is_nan() || len > 1.0 + NORM_TOL {
                return Err(Error::InvalidEnsemble(format!(
                    "member {i} has Bloch length {len}"
                )));
            }
            total += m.p;
            mean[0] += m.p * m.x;
            mean[1] += m.p * m.y;
            mean[2] += m.p * m.z;
        }
        if (total - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::InvalidEnsemble(format!("weights sum to {total}")));
        }
        let dev = mean[0].abs().max(mean[1].abs()).max((mean[2] - eta).abs());
        if dev > MEAN_TOL {
            return Err(Error::InvalidEnsemble(format!(
                "mean Bloch vector ({}, {}, {}) misses (0, 0, {eta}) by {dev:.3e}",
                mean[0], mean[1], mean[2]
            )));
        }
        Ok(Self { eta, members })
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn members(&self) -> &[Member] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("ensemble serializes")
    }

    pub fn from_json(s: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }
}

/// Alice's announcement for a hidden state: the button with the larger
/// expected work. Ties go to `z0` for red and `x-` for blue.
pub fn announce(r: BlochVector, color: CellColor) -> Button {
    match color {
        CellColor::Red if r.z > 0.0 => Button::Z1,
        CellColor::Red => Button::Z0,
        CellColor::Blue if r.x > 0.0 => Button::XPlus,
        CellColor::Blue => Button::XMinus,
    }
}

/// `(W̄_z, W̄_x)` of the optimal classical demon.
pub fn alice_component_works(ens: &HiddenStateEnsemble) -> (f64, f64) {
    let eta = ens.eta;
    let (mut abs_z, mut abs_x) = (0.0, 0.0);
    for m in &ens.members {
        abs_z += m.p * m.z.abs();
        abs_x += m.p * m.x.abs();
    }
    let red = 0.5 * (eta + abs_z);
    let blue = 0.5 * (eta + eta * eta + transverse(eta) * abs_x);
    (red, blue)
}

/// Average work per cell when blue cells outnumber red ones by `c`.
pub fn alice_optimal_work(ens: &HiddenStateEnsemble, c: f64) -> f64 {
    let (red, blue) = alice_component_works(ens);
    (red + c * blue) / (1.0 + c)
}

/// Four pure states `(±1/√2, 0, ±1/√2)` that reach the classical bound.
pub fn saturating_ensemble(eta: f64) -> Result<HiddenStateEnsemble> {
    check_eta(eta)?;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    if eta.abs() > h + 1e-15 {
        return Err(Error::SaturationInfeasible(eta));
    }
    let up = ((1.0 + eta * std::f64::consts::SQRT_2) / 4.0).max(0.0);
    let down = ((1.0 - eta * std::f64::consts::SQRT_2) / 4.0).max(0.0);
    let members = vec![
        Member { p: up, x: h, y: 0.0, z: h },
        Member { p: up, x: -h, y: 0.0, z: h },
        Member { p: down, x: h, y: 0.0, z: -h },
        Member { p: down, x: -h, y: 0.0, z: -h },
    ];
    HiddenStateEnsemble::new(eta, members)
}

pub fn energy_eigenstate_ensemble(eta: f64) -> Result<HiddenStateEnsemble> {
    check_eta(eta)?;
    HiddenStateEnsemble::new(
        eta,
        vec![
            Member { p: 0.5 * (1.0 + eta), x: 0.0, y: 0.0, z: 1.0 },
            Member { p: 0.5 * (1.0 - eta), x: 0.0, y: 0.0, z: -1.0 },
        ],
    )
}

fn random_in_ball<R: Rng + ?Sized>(rng: &mut R) -> [f64; 3] {
    loop {
        let v = [
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        ];
        let n2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
        if n2 <= 1.0 && n2 > 1e-12 {
            return v;
        }
    }
}

fn random_point<R: Rng + ?Sized>(rng: &mut R) -> [f64; 3] {
    let v = random_in_ball(rng);
    if rng.random_bool(0.5) {
        let n = norm(v);
        [v[0] / n, v[1] / n, v[2] / n]
    } else {
        v
    }
}

fn norm(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

fn clamp_to_ball(v: [f64; 3]) -> [f64; 3] {
    let n = norm(v);
    if n > 1.0 {
        [v[0] / n, v[1] / n, v[2] / n]
    } else {
        v
    }
}

/// Unnormalized hidden states before the Gibbs correction.
#[derive(Debug, Clone)]
struct RawCandidate {
    points: Vec<[f64; 3]>,
    weights: Vec<f64>,
}

impl RawCandidate {
    fn sample<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let points = (0..n).map(|_| random_point(rng)).collect();
        let weights = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
        Self { points, weights }
    }

    /// Shift every point by the mean error; if that leaves the ball, shrink
    /// the weights and add one compensating state instead.
    fn correct(&self, eta: f64) -> Result<HiddenStateEnsemble> {
        let total: f64 = self.weights.iter().sum();
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::InvalidEnsemble("degenerate weights".into()));
        }
        let p: Vec<f64> = self.weights.iter().map(|w| w / total).collect();
        let mut m = [0.0; 3];
        for (pi, r) in p.iter().zip(&self.points) {
            for k in 0..3 {
                m[k] += pi * r[k];
            }
        }
        let g = [0.0, 0.0, eta];
        let d = [g[0] - m[0], g[1] - m[1], g[2] - m[2]];

        let shifted: Vec<[f64; 3]> = self
            .points
            .iter()
            .map(|r| [r[0] + d[0], r[1] + d[1], r[2] + d[2]])
            .collect();
        let members = if shifted.iter().all(|r| norm(*r) <= 1.0) {
            shifted
                .iter()
                .zip(&p)
                .map(|(r, &pi)| Member { p: pi, x: r[0], y: r[1], z: r[2] })
                .collect()
        } else {
            // Smallest λ with |d + λ m| ≤ λ, i.e. a compensating state in the ball.
            let mm = m[0] * m[0] + m[1] * m[1] + m[2] * m[2];
            let dm = d[0] * m[0] + d[1] * m[1] + d[2] * m[2];
            let dd = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
            let a = 1.0 - mm;
            let lambda = if a > 1e-12 {
                ((dm + (dm * dm + a * dd).sqrt()) / a * (1.0 + 1e-12)).min(1.0)
            } else {
                1.0
            };
            let rc = clamp_to_ball([
                (d[0] + lambda * m[0]) / lambda,
                (d[1] + lambda * m[1]) / lambda,
                (d[2] + lambda * m[2]) / lambda,
            ]);
            let mut out: Vec<Member> = self
                .points
                .iter()
                .zip(&p)
                .map(|(r, &pi)| Member { p: (1.0 - lambda) * pi, x: r[0], y: r[1], z: r[2] })
                .collect();
            out.push(Member { p: lambda, x: rc[0], y: rc[1], z: rc[2] });
            out
        };
        HiddenStateEnsemble::new(eta, members)
    }

    fn perturb<R: Rng + ?Sized>(&self, step: f64, rng: &mut R) -> Self {
        let mut next = self.clone();
        let i = rng.random_range(0..next.points.len());
        if rng.random_bool(0.5) {
            let r = next.points[i];
            next.points[i] = clamp_to_ball([
                r[0] + step * rng.random_range(-1.0..1.0),
                r[1] + step * rng.random_range(-1.0..1.0),
                r[2] + step * rng.random_range(-1.0..1.0),
            ]);
        } else {
            next.weights[i] *= (step * rng.random_range(-4.0..4.0)).exp();
        }
        next
    }
}

/// `n` random hidden states, corrected so their weighted mean is `(0, 0, η)`.
/// The result has `n` or `n + 1` members.
pub fn random_ensemble<R: Rng + ?Sized>(eta: f64, n: usize, rng: &mut R) -> Result<HiddenStateEnsemble> {
    check_eta(eta)?;
    if n < 2 {
        return Err(Error::InvalidParameter {
            name: "n",
            reason: format!("need at least 2 states, got {n}"),
        });
    }
    for _ in 0..MAX_SAMPLING_ATTEMPTS {
        if let Ok(ens) = RawCandidate::sample(n, rng).correct(eta) {
            return Ok(ens);
        }
    }
    Err(Error::EnsembleSamplingFailed(MAX_SAMPLING_ATTEMPTS))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchConfig {
    pub budget: usize,
    pub seed: u64,
    pub workers: usize,
    /// Ratio to optimize for; `None` is `1/√(1−η²)`.
    pub ratio: Option<f64>,
    pub max_states: usize,
}

impl SearchConfig {
    pub fn new(budget: usize, seed: u64) -> Self {
        Self {
            budget,
            seed,
            workers: DEFAULT_WORKERS,
            ratio: None,
            max_states: 6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub best: HiddenStateEnsemble,
    pub value: f64,
    pub evaluations: usize,
}

/// Random restarts with hill-climbing, seeded per worker from
/// `(seed, worker index)`. The analytic candidates always take part, so the
/// result never falls below the energy-eigenstate ensemble.
pub fn search_max_classical_work(eta: f64, config: &SearchConfig) -> Result<SearchResult> {
    check_eta(eta)?;
    if config.budget == 0 || config.workers == 0 || config.max_states < 2 {
        return Err(Error::InvalidParameter {
            name: "budget",
            reason: "budget, workers must be positive and max_states at least 2".into(),
        });
    }
    let c = config.ratio.unwrap_or_else(|| default_ratio(eta));
    let score = |e: &HiddenStateEnsemble| alice_optimal_work(e, c);

    let mut best = energy_eigenstate_ensemble(eta)?;
    let mut best_value = score(&best);
    if let Ok(sat) = saturating_ensemble(eta) {
        let v = score(&sat);
        if v > best_value {
            best = sat;
            best_value = v;
        }
    }

    let workers = config.workers.min(config.budget);
    let per_worker: Vec<usize> = (0..workers)
        .map(|w| config.budget / workers + usize::from(w < config.budget % workers))
        .collect();
    let results: Vec<Option<(HiddenStateEnsemble, f64)>> = per_worker
        .par_iter()
        .enumerate()
        .map(|(w, &budget)| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(w as u64);
            search_worker(eta, budget, config.max_states, &score, &mut rng)
        })
        .collect();

    for (ens, v) in results.into_iter().flatten() {
        if v > best_value {
            best = ens;
            best_value = v;
        }
    }
    Ok(SearchResult {
        best,
        value: best_value,
        evaluations: config.budget,
    })
}

fn search_worker<R: Rng>(
    eta: f64,
    budget: usize,
    max_states: usize,
    score: &(impl Fn(&HiddenStateEnsemble) -> f64 + Sync),
    rng: &mut R,
) -> Option<(HiddenStateEnsemble, f64)> {
    const CLIMB: usize = 64;
    let mut best: Option<(HiddenStateEnsemble, f64)> = None;
    let mut used = 0;
    while used < budget {
        let n = rng.random_range(2..=max_states);
        let mut raw = RawCandidate::sample(n, rng);
        used += 1;
        let Ok(mut ens) = raw.correct(eta) else { continue };
        let mut value = score(&ens);
        let mut step = 0.25;
        let climb = CLIMB.min(budget - used);
        for _ in 0..climb {
            used += 1;
            let next = raw.perturb(step, rng);
            match next.correct(eta) {
                Ok(e) if score(&e) > value => {
                    value = score(&e);
                    ens = e;
                    raw = next;
                }
                _ => step = (step * 0.9).max(1e-3),
            }
        }
        if best.as_ref().is_none_or(|(_, v)| value > *v) {
            best = Some((ens, value));
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{classical_bound, work_observables};
    use proptest::prelude::*;

    /// Independent evaluation: best button per state from the work
    /// observables, weighted and recombined.
    fn brute_force(ens: &HiddenStateEnsemble, c: f64) -> f64 {
        let (mut red, mut blue) = (0.0, 0.0);
        for m in ens.members() {
            let obs = work_observables(m.bloch(), ens.eta());
            red += m.p * obs.z1.max(obs.z0);
            blue += m.p * obs.x_plus.max(obs.x_minus);
        }
        (red + c * blue) / (1.0 + c)
    }

    #[test]
    fn eigenstate_ensemble_at_infinite_temperature() {
        let ens = energy_eigenstate_ensemble(0.0).unwrap();
        assert!((alice_optimal_work(&ens, 1.0) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn saturating_ensemble_weights_and_tightness() {
        let ens = saturating_ensemble(0.0).unwrap();
        assert!(ens.members().iter().all(|m| (m.p - 0.25).abs() < 1e-15));
        assert!((alice_optimal_work(&ens, 1.0) - 1.0 / (2.0 * 2f64.sqrt())).abs() < 1e-15);
        let ens = saturating_ensemble(-0.5).unwrap();
        assert!((ens.members()[0].p - 0.073_223_304_703_363).abs() < 1e-12);
        assert!((ens.members()[2].p - 0.426_776_695_296_637).abs() < 1e-12);
        for eta in [0.0, -0.3, -0.5, -std::f64::consts::FRAC_1_SQRT_2] {
            let ens = saturating_ensemble(eta).unwrap();
            let v = alice_optimal_work(&ens, default_ratio(eta));
            assert!((v - classical_bound(eta)).abs() < 1e-12, "eta {eta}");
        }
        assert!(matches!(saturating_ensemble(-0.8), Err(Error::SaturationInfeasible(_))));
    }

    #[test]
    fn gibbs_point_stays_below_bound() {
        let ens = HiddenStateEnsemble::new(-0.5, vec![Member { p: 1.0, x: 0.0, y: 0.0, z: -0.5 }]).unwrap();
        let v = alice_optimal_work(&ens, default_ratio(-0.5));
        assert!((v - brute_force(&ens, default_ratio(-0.5))).abs() < 1e-15);
        assert!(v <= classical_bound(-0.5));
    }

    #[test]
    fn validation_rejects_broken_ensembles() {
        let ok = Member { p: 0.5, x: 0.0, y: 0.0, z: 1.0 };
        let down = Member { p: 0.5, x: 0.0, y: 0.0, z: -1.0 };
        assert!(HiddenStateEnsemble::new(0.0, vec![ok, down]).is_ok());
        assert!(HiddenStateEnsemble::new(0.0, vec![]).is_err());
        assert!(HiddenStateEnsemble::new(0.1, vec![ok, down]).is_err());
        assert!(HiddenStateEnsemble::new(0.0, vec![Member { p: 0.6, ..ok }, down]).is_err());
        assert!(HiddenStateEnsemble::new(0.0, vec![Member { z: 1.1, ..ok }, Member { z: -1.1, ..down }]).is_err());
        assert!(HiddenStateEnsemble::new(0.0, vec![Member { p: -0.5, ..ok }, Member { p: 1.5, ..down }]).is_err());
    }

    #[test]
    fn json_round_trip_validates() {
        let ens = saturating_ensemble(-0.3).unwrap();
        let back = HiddenStateEnsemble::from_json(&ens.to_json()).unwrap();
        assert_eq!(ens, back);
        let bad = r#"{"eta": 0.0, "members": [{"p": 1.0, "x": 0.0, "y": 0.0, "z": 1.0}]}"#;
        assert!(HiddenStateEnsemble::from_json(bad).is_err());
    }

    #[test]
    fn random_ensemble_is_deterministic_and_valid() {
        let a = random_ensemble(-0.4, 5, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = random_ensemble(-0.4, 5, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
        let pair = random_ensemble(0.0, 2, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert!(pair.len() >= 2);
        assert!(random_ensemble(0.0, 1, &mut ChaCha8Rng::seed_from_u64(1)).is_err());
    }

    #[test]
    fn compensating_state_used_when_shift_leaves_ball() {
        let raw = RawCandidate {
            points: vec![[0.0, 0.0, 1.0], [1.0, 0.0, 0.0]],
            weights: vec![1.0, 1.0],
        };
        let ens = raw.correct(-0.9).unwrap();
        assert_eq!(ens.len(), 3);
    }

    #[test]
    fn search_finds_saturating_value_and_respects_bound() {
        let res = search_max_classical_work(0.0, &SearchConfig::new(2000, 3)).unwrap();
        assert!((res.value - 1.0 / (2.0 * 2f64.sqrt())).abs() < 1e-9);
        let res = search_max_classical_work(-0.9, &SearchConfig::new(2000, 3)).unwrap();
        assert!(res.value <= classical_bound(-0.9) + 1e-9);
        let res = search_max_classical_work(-0.9, &SearchConfig::new(1, 3)).unwrap();
        let eig = alice_optimal_work(&energy_eigenstate_ensemble(-0.9).unwrap(), default_ratio(-0.9));
        assert!(res.value >= eig);
    }

    #[test]
    fn search_is_reproducible() {
        let cfg = SearchConfig::new(3000, 17);
        let a = search_max_classical_work(-0.85, &cfg).unwrap();
        let b = search_max_classical_work(-0.85, &cfg).unwrap();
        assert_eq!(a, b);
    }

    proptest! {
        #[test]
        fn closed_form_matches_brute_force(seed in any::<u64>(), eta in -0.99f64..0.99, n in 2usize..8, c in 0.1f64..10.0) {
            let ens = random_ensemble(eta, n, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            prop_assert!((alice_optimal_work(&ens, c) - brute_force(&ens, c)).abs() < 1e-12);
        }

        #[test]
        fn never_beats_bound(seed in any::<u64>(), eta in -0.99f64..0.0, n in 2usize..8) {
            let ens = random_ensemble(eta, n, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            prop_assert!(alice_optimal_work(&ens, default_ratio(eta)) <= classical_bound(eta) + 1e-9);
        }

        #[test]
        fn announced_button_is_never_worse(x in -1.0f64..1.0, z in -1.0f64..1.0, eta in -0.99f64..0.99) {
            let r = BlochVector { x, y: 0.0, z };
            let obs = work_observables(r, eta);
            for color in [CellColor::Red, CellColor::Blue] {
                let chosen = obs.get(announce(r, color));
                for b in color.buttons() {
                    prop_assert!(obs.get(b) <= chosen + 1e-15);
                }
            }
        }

        #[test]
        fn infinite_temperature_components(seed in any::<u64>(), n in 2usize..8) {
            let ens = random_ensemble(0.0, n, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            let (red, blue) = alice_component_works(&ens);
            let sz: f64 = ens.members().iter().map(|m| m.p * m.z.abs()).sum();
            let sx: f64 = ens.members().iter().map(|m| m.p * m.x.abs()).sum();
            prop_assert!((red - 0.5 * sz).abs() < 1e-12);
            prop_assert!((blue - 0.5 * sx).abs() < 1e-12);
        }
    }
}
