//! Shot allocation, runtime model and cross-coordinate reduction reports.
//!
//! For groups with variances `V_α` and target precision `ε`, the optimal
//! total number of measurements is `(Σ_α √V_α / ε)²`, split proportionally to
//! `√V_α`. A run takes that many repetitions of the state-preparation circuit,
//! whose duration is its CNOT count times the CNOT time.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::encode::cnot_count_uvccsd;
use crate::error::{invalid, Error, Result};
use crate::format::fmt_f64;
use crate::group::GroupingResult;

/// Default target precision, in the Hamiltonian's energy unit.
pub const DEFAULT_EPSILON: f64 = 1.6e-3;

/// Default CNOT duration in microseconds.
pub const DEFAULT_T_CNOT_US: f64 = 1.0;

/// Relative distance under which `(Σ√V/ε)²` snaps to the nearest integer
/// before the ceiling, so that exact squares are not bumped up by rounding.
const SNAP_RELATIVE: f64 = 1e-9;

pub const REPORT_CSV_HEADER: &str = "label,sum_sqrt_var,total_shots,circuit_time_us,total_time_min";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShotAllocation {
    pub shots: Vec<u64>,
    pub total_shots: u64,
}

/// Continuous optimum `(Σ√V/ε)²` before any rounding.
pub fn optimal_total(variances: &[f64], epsilon: f64) -> Result<f64> {
    check_inputs(variances, epsilon)?;
    let s: f64 = variances.iter().map(|v| v.sqrt()).sum();
    Ok((s / epsilon).powi(2))
}

fn check_inputs(variances: &[f64], epsilon: f64) -> Result<()> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(invalid(format!(
            "epsilon must be positive and finite, got {epsilon}"
        )));
    }
    if let Some(v) = variances.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        return Err(invalid(format!(
            "variances must be finite and non-negative, got {v}"
        )));
    }
    Ok(())
}

/// Integer shot counts per group.
///
/// Groups with positive variance share `ceil((Σ√V/ε)²)` shots in proportion
/// to `√V_α` by largest remainder, each receiving at least one shot.
/// Zero-variance groups receive one shot each on top.
pub fn allocate(variances: &[f64], epsilon: f64) -> Result<ShotAllocation> {
    let continuous = optimal_total(variances, epsilon)?;
    let nearest = continuous.round();
    let target = if (continuous - nearest).abs() <= SNAP_RELATIVE * nearest.max(1.0) {
        nearest
    } else {
        continuous.ceil()
    };
    if target >= u64::MAX as f64 / 2.0 {
        return Err(Error::Overflow("total shot count"));
    }
    let target = target as u64;
    let roots: Vec<f64> = variances.iter().map(|v| v.sqrt()).collect();
    let s: f64 = roots.iter().sum();

    let mut shots = vec![0u64; variances.len()];
    let mut remainders = Vec::new();
    let mut assigned = 0u64;
    for (i, r) in roots.iter().enumerate() {
        if *r == 0.0 {
            continue;
        }
        let quota = target as f64 * r / s;
        let base = (quota.floor() as u64).max(1);
        shots[i] = base;
        assigned += base;
        remainders.push((quota - base as f64, i));
    }
    if assigned < target {
        remainders.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        for &(_, i) in remainders.iter().cycle().take((target - assigned) as usize) {
            shots[i] += 1;
        }
    }
    for (i, r) in roots.iter().enumerate() {
        if *r == 0.0 {
            shots[i] = 1;
        }
    }
    let total_shots = shots.iter().sum();
    Ok(ShotAllocation { shots, total_shots })
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementPlan {
    pub groups: GroupingResult,
    pub variances: Vec<f64>,
    pub epsilon: f64,
    pub shots: Vec<u64>,
    pub total_shots: u64,
}

impl MeasurementPlan {
    pub fn new(groups: GroupingResult, variances: Vec<f64>, epsilon: f64) -> Result<Self> {
        if variances.len() != groups.groups.len() {
            return Err(Error::LengthMismatch {
                left: groups.groups.len(),
                right: variances.len(),
            });
        }
        let ShotAllocation { shots, total_shots } = allocate(&variances, epsilon)?;
        Ok(MeasurementPlan {
            groups,
            variances,
            epsilon,
            shots,
            total_shots,
        })
    }

    pub fn sum_sqrt_var(&self) -> f64 {
        self.variances.iter().map(|v| v.sqrt()).sum()
    }

    pub fn to_json(&self) -> Result<String> {
        crate::format::to_json_string(&PlanFile {
            scheme: self.groups.scheme.name().to_string(),
            epsilon: self.epsilon,
            sum_sqrt_var: self.sum_sqrt_var(),
            total_shots: self.total_shots,
            groups: self
                .groups
                .groups
                .iter()
                .zip(&self.variances)
                .zip(&self.shots)
                .map(|((g, &variance), &shots)| PlanGroup {
                    tag: g.tag.clone(),
                    size: g.members.len(),
                    variance,
                    shots,
                })
                .collect(),
        })
    }
}

#[derive(Serialize, Deserialize)]
struct PlanFile {
    scheme: String,
    epsilon: f64,
    sum_sqrt_var: f64,
    total_shots: u64,
    groups: Vec<PlanGroup>,
}

#[derive(Serialize, Deserialize)]
struct PlanGroup {
    tag: Option<String>,
    size: usize,
    variance: f64,
    shots: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RuntimeReport {
    pub label: String,
    pub molecule: Option<String>,
    pub plan: MeasurementPlan,
    pub t_cnot_us: f64,
    pub modes: u64,
    pub n_virtuals: u64,
    pub cnot_count: u64,
    pub circuit_time_us: f64,
    pub total_time_us: f64,
}

impl RuntimeReport {
    pub fn total_time_seconds(&self) -> f64 {
        self.total_time_us * 1e-6
    }

    pub fn total_time_minutes(&self) -> f64 {
        self.total_time_seconds() / 60.0
    }

    pub fn summary(&self) -> ReportRow {
        ReportRow {
            label: self.label.clone(),
            molecule: self.molecule.clone(),
            scheme: self.plan.groups.scheme.name().to_string(),
            groups: self.plan.groups.groups.len(),
            epsilon: self.plan.epsilon,
            sum_sqrt_var: self.plan.sum_sqrt_var(),
            variances: self.plan.variances.clone(),
            total_shots: self.plan.total_shots,
            modes: self.modes,
            n_virtuals: self.n_virtuals,
            t_cnot_us: self.t_cnot_us,
            cnot_count: self.cnot_count,
            circuit_time_us: self.circuit_time_us,
            total_time_us: self.total_time_us,
            total_time_min: self.total_time_minutes(),
        }
    }
}

/// Runtime of a plan executed with a UVCCSD-style circuit on `modes` modes
/// with `n_virtuals` virtual modals each.
pub fn runtime(
    label: &str,
    molecule: Option<&str>,
    plan: MeasurementPlan,
    modes: u64,
    n_virtuals: u64,
    t_cnot_us: f64,
) -> Result<RuntimeReport> {
    if !(t_cnot_us.is_finite() && t_cnot_us > 0.0) {
        return Err(invalid(format!(
            "CNOT time must be positive, got {t_cnot_us}"
        )));
    }
    let cnot_count = cnot_count_uvccsd(modes, n_virtuals)?;
    let circuit_time_us = cnot_count as f64 * t_cnot_us;
    let total_time_us = plan.total_shots as f64 * circuit_time_us;
    Ok(RuntimeReport {
        label: label.to_string(),
        molecule: molecule.map(str::to_string),
        plan,
        t_cnot_us,
        modes,
        n_virtuals,
        cnot_count,
        circuit_time_us,
        total_time_us,
    })
}

/// Serializable summary of a runtime report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub label: String,
    pub molecule: Option<String>,
    pub scheme: String,
    pub groups: usize,
    pub epsilon: f64,
    pub sum_sqrt_var: f64,
    pub variances: Vec<f64>,
    pub total_shots: u64,
    pub modes: u64,
    pub n_virtuals: u64,
    pub t_cnot_us: f64,
    pub cnot_count: u64,
    pub circuit_time_us: f64,
    pub total_time_us: f64,
    pub total_time_min: f64,
}

impl ReportRow {
    /// `(Σ√Var)²`, the factor by which the variance drives the runtime.
    pub fn effective_variance(&self) -> f64 {
        self.sum_sqrt_var * self.sum_sqrt_var
    }

    /// Recomputes shots and times for a new precision and CNOT duration.
    pub fn replan(&self, epsilon: f64, t_cnot_us: f64) -> Result<ReportRow> {
        if !(t_cnot_us.is_finite() && t_cnot_us > 0.0) {
            return Err(invalid(format!(
                "CNOT time must be positive, got {t_cnot_us}"
            )));
        }
        let total_shots = allocate(&self.variances, epsilon)?.total_shots;
        let circuit_time_us = self.cnot_count as f64 * t_cnot_us;
        let total_time_us = total_shots as f64 * circuit_time_us;
        Ok(ReportRow {
            epsilon,
            t_cnot_us,
            total_shots,
            circuit_time_us,
            total_time_us,
            total_time_min: total_time_us * 1e-6 / 60.0,
            ..self.clone()
        })
    }

    pub fn to_json(&self) -> Result<String> {
        crate::format::to_json_string(self)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.label,
            fmt_f64(self.sum_sqrt_var),
            self.total_shots,
            fmt_f64(self.circuit_time_us),
            fmt_f64(self.total_time_min)
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReductionReport {
    /// `max / min` of `(Σ√Var)²` over the ranked labels.
    pub reduction: f64,
    /// Rows ordered from the smallest to the largest effective variance.
    pub ranking: Vec<ReportRow>,
    pub excluded: Vec<String>,
}

/// Compares coordinate systems of one molecule by `(Σ√Var)²`.
pub fn reduction_report(rows: &[ReportRow], exclude: &[String]) -> Result<ReductionReport> {
    if let Some(first) = rows.first() {
        if let Some(other) = rows.iter().find(|r| r.molecule != first.molecule) {
            return Err(invalid(format!(
                "molecule tags differ: {:?} vs {:?}",
                first.molecule, other.molecule
            )));
        }
    }
    let (excluded, mut ranking): (Vec<&ReportRow>, Vec<&ReportRow>) =
        rows.iter().partition(|r| exclude.contains(&r.label));
    if ranking.len() < 2 {
        return Err(invalid(
            "a reduction needs at least two reports after exclusion",
        ));
    }
    ranking.sort_by(|a, b| {
        a.effective_variance()
            .total_cmp(&b.effective_variance())
            .then_with(|| a.label.cmp(&b.label))
    });
    let min = ranking[0].effective_variance();
    let max = ranking[ranking.len() - 1].effective_variance();
    let reduction = if max == min {
        1.0
    } else if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    };
    Ok(ReductionReport {
        reduction,
        ranking: ranking.into_iter().cloned().collect(),
        excluded: excluded.into_iter().map(|r| r.label.clone()).collect(),
    })
}

impl ReductionReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(REPORT_CSV_HEADER);
        out.push('\n');
        for row in &self.ranking {
            out.push_str(&row.csv_line());
            out.push('\n');
        }
        out
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let width = self
            .ranking
            .iter()
            .map(|r| r.label.len())
            .max()
            .unwrap_or(5)
            .max(5);
        let _ = writeln!(
            out,
            "{:<width$}  {:>14}  {:>14}  {:>14}  {:>14}",
            "label", "sum_sqrt_var", "total_shots", "circuit_us", "total_min"
        );
        for r in &self.ranking {
            let _ = writeln!(
                out,
                "{:<width$}  {:>14.6e}  {:>14}  {:>14.1}  {:>14.3}",
                r.label, r.sum_sqrt_var, r.total_shots, r.circuit_time_us, r.total_time_min
            );
        }
        let _ = writeln!(
            out,
            "reduction (max/min of (sum sqrt var)^2): {:.6}",
            self.reduction
        );
        if !self.excluded.is_empty() {
            let _ = writeln!(out, "excluded: {}", self.excluded.join(", "));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{GroupingScheme, MeasurementGroup};
    use proptest::prelude::*;

    fn plan_with(variances: Vec<f64>, epsilon: f64) -> MeasurementPlan {
        let groups = GroupingResult {
            groups: variances
                .iter()
                .map(|_| MeasurementGroup {
                    members: Vec::new(),
                    commutation: crate::group::Commutation::Qwc,
                    tag: None,
                })
                .collect(),
            scheme: GroupingScheme::Qwc,
            covered_terms: 0,
        };
        MeasurementPlan::new(groups, variances, epsilon).unwrap()
    }

    fn row(label: &str, sum_sqrt_var: f64) -> ReportRow {
        ReportRow {
            label: label.into(),
            molecule: Some("m".into()),
            scheme: "qwc".into(),
            groups: 1,
            epsilon: 1.0,
            sum_sqrt_var,
            variances: vec![sum_sqrt_var * sum_sqrt_var],
            total_shots: (sum_sqrt_var * sum_sqrt_var).ceil() as u64,
            modes: 3,
            n_virtuals: 3,
            t_cnot_us: 1.0,
            cnot_count: 1296,
            circuit_time_us: 1296.0,
            total_time_us: 0.0,
            total_time_min: 0.0,
        }
    }

    #[test]
    fn allocation_examples() {
        let eps = 1e-3;
        assert_eq!(
            allocate(&[eps * eps], eps).unwrap(),
            ShotAllocation {
                shots: vec![1],
                total_shots: 1
            }
        );
        let a = allocate(&[4.0 * eps * eps, eps * eps], eps).unwrap();
        assert_eq!(a.shots, vec![6, 3]);
        assert_eq!(a.total_shots, 9);
        assert!(allocate(&[1.0], 0.0).is_err());
        assert!(allocate(&[-1.0], 1.0).is_err());
    }

    #[test]
    fn zero_variance_groups_get_one_shot_on_top() {
        let a = allocate(&[0.0, 4.0, 0.0, 1.0], 1.0).unwrap();
        assert_eq!(a.shots, vec![1, 6, 1, 3]);
        assert_eq!(a.total_shots, 11);
        let a = allocate(&[0.0, 0.0, 0.0], 1.0).unwrap();
        assert_eq!(a.total_shots, 3);
    }

    #[test]
    fn floor_of_one_shot() {
        // the small group's quota is below one shot
        let a = allocate(&[1e4, 1e-8], 1.0).unwrap();
        assert_eq!(a.shots[1], 1);
        assert!(a.total_shots >= 10_001);
    }

    #[test]
    fn runtime_examples() {
        let mut plan = plan_with(vec![1.0], 1.0);
        plan.total_shots = 1_000_000;
        let r = runtime("NC", None, plan.clone(), 3, 3, 1.0).unwrap();
        assert_eq!(r.cnot_count, 1296);
        assert_eq!(r.total_time_seconds(), 1296.0);
        assert!((r.total_time_minutes() - 21.6).abs() < 1e-12);
        plan.total_shots = 1;
        let r = runtime("NC", None, plan, 3, 3, 1.0).unwrap();
        assert_eq!(r.total_time_us, r.circuit_time_us);
    }

    #[test]
    fn runtime_is_linear_in_t_cnot() {
        let plan = plan_with(vec![0.3, 0.7], 0.01);
        let a = runtime("a", None, plan.clone(), 4, 2, 1.0).unwrap();
        let b = runtime("a", None, plan, 4, 2, 2.5).unwrap();
        assert_eq!(b.total_time_us, a.total_time_us * 2.5);
    }

    #[test]
    fn reduction_examples() {
        let r = reduction_report(&[row("a", 2.0), row("b", 2.0)], &[]).unwrap();
        assert_eq!(r.reduction, 1.0);
        let r = reduction_report(&[row("NC", 3.0), row("wL", 1.0)], &[]).unwrap();
        assert_eq!(r.reduction, 9.0);
        assert_eq!(r.ranking[0].label, "wL");
        assert_eq!(r.ranking[1].total_shots / r.ranking[0].total_shots, 9);
        let r = reduction_report(
            &[row("NC", 3.0), row("wL", 1.0), row("x", 10.0)],
            &["x".into()],
        )
        .unwrap();
        assert_eq!(r.reduction, 9.0);
        assert_eq!(r.excluded, vec!["x".to_string()]);
        let mut other = row("c", 1.0);
        other.molecule = Some("n".into());
        assert!(reduction_report(&[row("a", 1.0), other], &[]).is_err());
        assert!(reduction_report(&[row("a", 1.0)], &[]).is_err());
    }

    #[test]
    fn replan_matches_fresh_runtime() {
        let plan = plan_with(vec![0.04, 0.01], 0.1);
        let fresh = runtime("a", None, plan_with(vec![0.04, 0.01], 0.05), 3, 3, 2.0)
            .unwrap()
            .summary();
        let row = runtime("a", None, plan, 3, 3, 1.0).unwrap().summary();
        assert_eq!(row.replan(0.05, 2.0).unwrap(), fresh);
        assert_eq!(ReportRow::from_json(&row.to_json().unwrap()).unwrap(), row);
    }

    #[test]
    fn csv_layout() {
        let r = reduction_report(&[row("NC", 3.0), row("wL", 1.0)], &[]).unwrap();
        let csv = r.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(REPORT_CSV_HEADER));
        assert!(lines
            .next()
            .unwrap()
            .starts_with("wL,1.0000000000000000e0,1,"));
    }

    proptest! {
        #[test]
        fn totals_follow_the_optimum(vs in prop::collection::vec(0.0f64..10.0, 1..12), eps in 0.01f64..1.0) {
            let a = allocate(&vs, eps).unwrap();
            prop_assert!(a.shots.iter().all(|&s| s >= 1));
            prop_assert_eq!(a.shots.iter().sum::<u64>(), a.total_shots);
            let zeros = vs.iter().filter(|v| **v == 0.0).count() as u64;
            let opt = optimal_total(&vs, eps).unwrap();
            let positive = vs.len() as u64 - zeros;
            let measured = (a.total_shots - zeros) as f64;
            prop_assert!(measured >= opt - 1e-9 * opt.max(1.0));
            prop_assert!(measured <= opt.ceil() + positive as f64);
        }

        #[test]
        fn scaling_variances_scales_totals(vs in prop::collection::vec(0.01f64..10.0, 1..8), c in 1.5f64..20.0) {
            let eps = 0.05;
            let a = allocate(&vs, eps).unwrap();
            let scaled: Vec<f64> = vs.iter().map(|v| v * c).collect();
            let b = allocate(&scaled, eps).unwrap();
            let n = vs.len() as f64;
            prop_assert!((b.total_shots as f64 - c * a.total_shots as f64).abs() <= (c + 1.0) * (n + 1.0));
            let s: f64 = vs.iter().map(|v| v.sqrt()).sum();
            for (i, v) in vs.iter().enumerate() {
                let share = v.sqrt() / s;
                prop_assert!((b.shots[i] as f64 / b.total_shots as f64 - share).abs() <= (n + 1.0) / b.total_shots as f64 + 1e-12);
            }
        }

        #[test]
        fn reduction_invariant_under_relabel_and_epsilon(xs in prop::collection::vec(0.1f64..10.0, 2..6), k in 0.1f64..10.0) {
            let rows: Vec<ReportRow> = xs.iter().enumerate().map(|(i, x)| row(&format!("c{i}"), *x)).collect();
            let base = reduction_report(&rows, &[]).unwrap().reduction;
            let mut relabeled: Vec<ReportRow> = rows.iter().rev().enumerate().map(|(i, r)| ReportRow { label: format!("z{i}"), ..r.clone() }).collect();
            relabeled.iter_mut().for_each(|r| r.epsilon *= k);
            prop_assert_eq!(reduction_report(&relabeled, &[]).unwrap().reduction, base);
            prop_assert!(base >= 1.0);
        }
    }
}
