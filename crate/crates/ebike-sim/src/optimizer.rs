//! Pollution-weighted allocation of the battery energy budget.
//!
//! Each candidate segment carries a traversal probability `p`, an expected
//! assist energy `e` (watt-hours for full assistance) and a pollution level
//! `d`. The planner maximizes `sum(p * d * e * x)` subject to
//! `sum(p * e * x) <= budget` and `0 <= x <= 1`.
//!
//! Objective and constraint share the factor `p * e`, so the problem is a
//! continuous knapsack whose value ratio is just `d`: filling segments in
//! decreasing pollution order, with one fractional segment at the budget
//! boundary, is exact. No LP solver is needed.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::route::SegmentId;

/// Per-segment inputs to the planner.
#[derive(Debug, Clone)]
pub struct SegmentEstimate {
    pub segment: SegmentId,
    /// Probability of traversing the segment in the remainder of the trip.
    pub probability: f64,
    /// Expected battery energy for full assistance on the segment, in Wh.
    pub expected_energy_wh: f64,
    /// Expected pollution level, arbitrary nonnegative units.
    pub pollution: f64,
}

impl SegmentEstimate {
    fn validate(&self) -> Result<()> {
        let fail = |reason: &str| {
            Err(Error::InvalidEstimate {
                segment: self.segment.to_string(),
                reason: reason.to_string(),
            })
        };
        if !self.probability.is_finite() || !(0.0..=1.0).contains(&self.probability) {
            return fail("probability must lie in [0, 1]");
        }
        if !self.expected_energy_wh.is_finite() || self.expected_energy_wh <= 0.0 {
            return fail("expected energy must be positive");
        }
        if !self.pollution.is_finite() || self.pollution < 0.0 {
            return fail("pollution level must be nonnegative");
        }
        Ok(())
    }

    /// Expected energy cost of full assistance, `p * e`.
    fn cost(&self) -> f64 {
        self.probability * self.expected_energy_wh
    }

    /// Objective weight of full assistance, `p * d * e`.
    fn value(&self) -> f64 {
        self.probability * self.pollution * self.expected_energy_wh
    }
}

/// Available battery energy in watt-hours.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyBudget(f64);

impl EnergyBudget {
    pub fn new(wh: f64) -> Result<Self> {
        if !wh.is_finite() || wh < 0.0 {
            return Err(Error::NegativeBudget(wh));
        }
        Ok(EnergyBudget(wh))
    }

    pub fn wh(&self) -> f64 {
        self.0
    }
}

/// Per-segment assist fractions with the objective they achieve.
#[derive(Debug, Clone)]
pub struct AssistPlan {
    pub fractions: BTreeMap<SegmentId, f64>,
    pub objective: f64,
    pub spent_expected_energy_wh: f64,
}

impl AssistPlan {
    pub fn fraction(&self, segment: &SegmentId) -> Option<f64> {
        self.fractions.get(segment).copied()
    }
}

fn validate_instance(estimates: &[SegmentEstimate]) -> Result<()> {
    if estimates.is_empty() {
        return Err(Error::EmptyEstimates);
    }
    let mut seen = std::collections::BTreeSet::new();
    for est in estimates {
        est.validate()?;
        if !seen.insert(&est.segment) {
            return Err(Error::DuplicateEstimate(est.segment.to_string()));
        }
    }
    Ok(())
}

fn plan_from_fractions(estimates: &[SegmentEstimate], x: &[f64]) -> AssistPlan {
    let mut fractions = BTreeMap::new();
    let mut objective = 0.0;
    let mut spent = 0.0;
    for (est, &xi) in estimates.iter().zip(x) {
        objective += est.value() * xi;
        spent += est.cost() * xi;
        fractions.insert(est.segment.clone(), xi);
    }
    AssistPlan {
        fractions,
        objective,
        spent_expected_energy_wh: spent,
    }
}

/// Solve the allocation problem exactly by greedy fill in decreasing
/// pollution order (ties by segment id). Segments whose expected cost is
/// zero (`p = 0`) consume no budget and receive full assistance.
pub fn solve_assist_plan(
    estimates: &[SegmentEstimate],
    budget: EnergyBudget,
) -> Result<AssistPlan> {
    validate_instance(estimates)?;

    let mut order: Vec<usize> = (0..estimates.len()).collect();
    order.sort_by(|&a, &b| {
        estimates[b]
            .pollution
            .total_cmp(&estimates[a].pollution)
            .then_with(|| estimates[a].segment.cmp(&estimates[b].segment))
    });

    let mut x = vec![0.0; estimates.len()];
    let mut remaining = budget.wh();
    for idx in order {
        let est = &estimates[idx];
        let cost = est.cost();
        if cost == 0.0 {
            x[idx] = 1.0;
        } else if cost <= remaining {
            x[idx] = 1.0;
            remaining -= cost;
        } else {
            x[idx] = remaining / cost;
            remaining = 0.0;
        }
    }
    Ok(plan_from_fractions(estimates, &x))
}

/// Objective value `sum(p * d * e * x)` for explicit fractions.
pub fn plan_objective(
    estimates: &[SegmentEstimate],
    fractions: &BTreeMap<SegmentId, f64>,
) -> Result<f64> {
    let mut total = 0.0;
    for est in estimates {
        let x = fractions
            .get(&est.segment)
            .ok_or_else(|| Error::MissingSegment(est.segment.to_string()))?;
        total += est.value() * x;
    }
    Ok(total)
}

/// Exhaustive grid-search oracle, independent of the greedy solver.
///
/// Evaluates every feasible grid point with `x` restricted to multiples of
/// `1/resolution` and returns the best. The objective is nondecreasing in
/// each coordinate, so the last coordinate of any prefix is optimized in
/// closed form as the largest feasible grid value; the remaining
/// coordinates are enumerated outright. Instance size is capped because
/// the enumeration is exponential. Test use only.
pub fn oracle_solve(
    estimates: &[SegmentEstimate],
    budget: EnergyBudget,
    resolution: u32,
) -> Result<AssistPlan> {
    validate_instance(estimates)?;
    if estimates.len() > 5 || resolution == 0 || resolution > 100 {
        return Err(Error::OracleInstanceTooLarge {
            segments: estimates.len(),
            resolution,
        });
    }

    let res = resolution as usize;
    let costs: Vec<f64> = estimates.iter().map(|e| e.cost()).collect();
    let values: Vec<f64> = estimates.iter().map(|e| e.value()).collect();
    // Slack comparable to the feasibility tolerance used everywhere else.
    let slack = 1e-9;

    let mut best_x = vec![0.0; estimates.len()];
    let mut best_obj = f64::NEG_INFINITY;
    let mut x = vec![0.0; estimates.len()];

    // Depth-first over coordinates 0..n-1, largest grid value first so the
    // all-ones point is visited first whenever it is feasible.
    fn recurse(
        depth: usize,
        spent: f64,
        value: f64,
        x: &mut [f64],
        best_x: &mut Vec<f64>,
        best_obj: &mut f64,
        costs: &[f64],
        values: &[f64],
        res: usize,
        budget: f64,
        slack: f64,
    ) {
        let last = x.len() - 1;
        if depth == last {
            let remaining = budget + slack - spent;
            if remaining < 0.0 {
                return;
            }
            let steps = if costs[last] <= 0.0 {
                res
            } else {
                let per_step = costs[last] / res as f64;
                ((remaining / per_step).floor() as usize).min(res)
            };
            x[last] = steps as f64 / res as f64;
            let obj = value + values[last] * x[last];
            if obj > *best_obj {
                *best_obj = obj;
                best_x.copy_from_slice(x);
            }
            return;
        }
        for step in (0..=res).rev() {
            let xi = step as f64 / res as f64;
            let s = spent + costs[depth] * xi;
            if s > budget + slack {
                continue;
            }
            x[depth] = xi;
            recurse(
                depth + 1,
                s,
                value + values[depth] * xi,
                x,
                best_x,
                best_obj,
                costs,
                values,
                res,
                budget,
                slack,
            );
        }
        x[depth] = 0.0;
    }

    recurse(
        0,
        0.0,
        0.0,
        &mut x,
        &mut best_x,
        &mut best_obj,
        &costs,
        &values,
        res,
        budget.wh(),
        slack,
    );

    Ok(plan_from_fractions(estimates, &best_x))
}

/// Run the grid oracle over many instances, in parallel when the
/// `parallel` feature is enabled.
pub fn oracle_batch(
    instances: &[(Vec<SegmentEstimate>, EnergyBudget, u32)],
) -> Vec<Result<AssistPlan>> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        instances
            .par_iter()
            .map(|(est, budget, res)| oracle_solve(est, *budget, *res))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        oracle_batch_sequential(instances)
    }
}

/// Sequential counterpart to [`oracle_batch`], kept unconditionally for
/// benchmarking the parallel speedup.
pub fn oracle_batch_sequential(
    instances: &[(Vec<SegmentEstimate>, EnergyBudget, u32)],
) -> Vec<Result<AssistPlan>> {
    instances
        .iter()
        .map(|(est, budget, res)| oracle_solve(est, *budget, *res))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn est(id: &str, p: f64, e: f64, d: f64) -> SegmentEstimate {
        SegmentEstimate {
            segment: SegmentId::from(id),
            probability: p,
            expected_energy_wh: e,
            pollution: d,
        }
    }

    fn budget(wh: f64) -> EnergyBudget {
        EnergyBudget::new(wh).unwrap()
    }

    #[test]
    fn unconstrained_instance_gets_full_assist() {
        let plan = solve_assist_plan(&[est("a", 1.0, 10.0, 5.0)], budget(20.0)).unwrap();
        assert_eq!(plan.fraction(&"a".into()), Some(1.0));
        assert_eq!(plan.objective, 50.0);
        assert_eq!(plan.spent_expected_energy_wh, 10.0);
    }

    #[test]
    fn marginal_segment_is_truncated() {
        let plan = solve_assist_plan(&[est("a", 1.0, 10.0, 5.0)], budget(5.0)).unwrap();
        assert_eq!(plan.fraction(&"a".into()), Some(0.5));
        assert_eq!(plan.objective, 25.0);
        assert_eq!(plan.spent_expected_energy_wh, 5.0);
    }

    #[test]
    fn budget_goes_to_the_dirtier_segment() {
        let ests = [est("a", 1.0, 10.0, 9.0), est("b", 1.0, 10.0, 1.0)];
        let plan = solve_assist_plan(&ests, budget(10.0)).unwrap();
        assert_eq!(plan.fraction(&"a".into()), Some(1.0));
        assert_eq!(plan.fraction(&"b".into()), Some(0.0));
        assert_eq!(plan.objective, 90.0);

        // Independent confirmation by the grid oracle.
        let oracle = oracle_solve(&ests, budget(10.0), 100).unwrap();
        assert!((plan.objective - oracle.objective).abs() < 1e-9);
    }

    #[test]
    fn zero_probability_segments_cost_nothing() {
        let ests = [est("a", 0.0, 10.0, 5.0), est("b", 1.0, 4.0, 2.0)];
        let plan = solve_assist_plan(&ests, budget(1.0)).unwrap();
        assert_eq!(plan.fraction(&"a".into()), Some(1.0));
        assert_eq!(plan.fraction(&"b".into()), Some(0.25));
        assert!((plan.spent_expected_energy_wh - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pollution_ties_break_by_segment_id() {
        let ests = [est("b", 1.0, 10.0, 3.0), est("a", 1.0, 10.0, 3.0)];
        let plan = solve_assist_plan(&ests, budget(10.0)).unwrap();
        assert_eq!(plan.fraction(&"a".into()), Some(1.0));
        assert_eq!(plan.fraction(&"b".into()), Some(0.0));
    }

    #[test]
    fn invalid_inputs_are_rejected() {
        assert!(matches!(
            solve_assist_plan(&[], budget(1.0)),
            Err(Error::EmptyEstimates)
        ));
        assert!(EnergyBudget::new(-1.0).is_err());
        assert!(solve_assist_plan(&[est("a", 1.2, 1.0, 1.0)], budget(1.0)).is_err());
        assert!(solve_assist_plan(&[est("a", 0.5, 0.0, 1.0)], budget(1.0)).is_err());
        assert!(solve_assist_plan(&[est("a", 0.5, -2.0, 1.0)], budget(1.0)).is_err());
        assert!(solve_assist_plan(&[est("a", 0.5, 1.0, -0.1)], budget(1.0)).is_err());
        let dup = [est("a", 0.5, 1.0, 1.0), est("a", 0.5, 1.0, 1.0)];
        assert!(matches!(
            solve_assist_plan(&dup, budget(1.0)),
            Err(Error::DuplicateEstimate(_))
        ));
    }

    #[test]
    fn oracle_zero_budget_spends_nothing() {
        let ests = [est("a", 0.5, 2.0, 3.0), est("b", 1.0, 1.0, 1.0)];
        let plan = oracle_solve(&ests, budget(0.0), 50).unwrap();
        assert_eq!(plan.fraction(&"a".into()), Some(0.0));
        assert_eq!(plan.fraction(&"b".into()), Some(0.0));
        assert_eq!(plan.objective, 0.0);
    }

    #[test]
    fn oracle_inactive_constraint_gives_full_assist() {
        let ests = [est("a", 0.5, 2.0, 3.0), est("b", 1.0, 1.0, 1.0)];
        let plan = oracle_solve(&ests, budget(2.5), 10).unwrap();
        assert_eq!(plan.fraction(&"a".into()), Some(1.0));
        assert_eq!(plan.fraction(&"b".into()), Some(1.0));
    }

    #[test]
    fn oracle_rejects_oversized_instances() {
        let ests: Vec<_> = (0..6)
            .map(|i| est(&format!("s{i}"), 0.5, 1.0, 1.0))
            .collect();
        assert!(matches!(
            oracle_solve(&ests, budget(1.0), 10),
            Err(Error::OracleInstanceTooLarge { .. })
        ));
        assert!(oracle_solve(&ests[..2], budget(1.0), 101).is_err());
        assert!(oracle_solve(&ests[..2], budget(1.0), 0).is_err());
    }

    #[test]
    fn objective_hand_values() {
        let ests = [est("a", 0.5, 4.0, 2.0)];
        let zero: BTreeMap<_, _> = [(SegmentId::from("a"), 0.0)].into();
        assert_eq!(plan_objective(&ests, &zero).unwrap(), 0.0);
        let one: BTreeMap<_, _> = [(SegmentId::from("a"), 1.0)].into();
        assert_eq!(plan_objective(&ests, &one).unwrap(), 4.0);

        let ests2 = [est("a", 1.0, 8.0, 3.0)];
        let quarter: BTreeMap<_, _> = [(SegmentId::from("a"), 0.25)].into();
        assert_eq!(plan_objective(&ests2, &quarter).unwrap(), 6.0);
    }

    #[test]
    fn objective_missing_segment_errors() {
        let ests = [est("a", 0.5, 4.0, 2.0)];
        let empty = BTreeMap::new();
        assert!(matches!(
            plan_objective(&ests, &empty),
            Err(Error::MissingSegment(_))
        ));
    }
}
